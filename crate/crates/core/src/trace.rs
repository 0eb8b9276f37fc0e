//! Channel coefficient traces produced by an external channel generator.
//!
//! The format is CSV with header `session,subcarrier,h_ab_re,h_ab_im` and an
//! optional `h_ae_re,h_ae_im` column pair, one row per (session, subcarrier),
//! rows grouped by session with subcarriers in ascending order. Traces model
//! reciprocal links, so the reverse coefficients equal the forward ones.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::channel::{ChannelRealization, DirectChannels};
use crate::error::{Result, SkgError};
use crate::signal::ComplexVector;

const HEADER: [&str; 4] = ["session", "subcarrier", "h_ab_re", "h_ab_im"];
const EVE_HEADER: [&str; 2] = ["h_ae_re", "h_ae_im"];

/// Streaming reader over the sessions in a trace file.
pub struct TraceReader {
    path: PathBuf,
    records: csv::StringRecordsIntoIter<BufReader<File>>,
    n_subcarriers: usize,
    has_eve: bool,
    pending: Option<(u64, u64, csv::StringRecord)>,
    done: bool,
}

/// Opens `path` and yields one realization per session in file order.
pub fn load_trace(path: impl AsRef<Path>, n_subcarriers: usize) -> Result<TraceReader> {
    let path = path.as_ref().to_path_buf();
    let file = File::open(&path).map_err(|e| SkgError::io(&path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| parse_error(&path, 1, e))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let has_eve = if names == HEADER {
        false
    } else if names.len() == 6 && names[..4] == HEADER && names[4..] == EVE_HEADER {
        true
    } else {
        return Err(SkgError::Parse {
            path,
            line: 1,
            message: format!("unexpected header {names:?}"),
        });
    };
    Ok(TraceReader {
        path,
        records: reader.into_records(),
        n_subcarriers,
        has_eve,
        pending: None,
        done: false,
    })
}

impl TraceReader {
    /// True when the file carries Eve's coefficients.
    pub fn has_eve(&self) -> bool {
        self.has_eve
    }

    fn next_row(&mut self) -> Option<Result<(u64, u64, csv::StringRecord)>> {
        if let Some(row) = self.pending.take() {
            return Some(Ok(row));
        }
        let record = match self.records.next()? {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Some(Err(parse_error(&self.path, line, e)));
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let session = match parse_field::<u64>(&self.path, line, &record, 0, "session") {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(Ok((session, line, record)))
    }

    fn read_session(&mut self) -> Option<Result<ChannelRealization>> {
        let (session, line, first) = match self.next_row()? {
            Ok(row) => row,
            Err(e) => return Some(Err(e)),
        };
        let mut rows = vec![(line, first)];
        loop {
            match self.next_row() {
                None => break,
                Some(Err(e)) => return Some(Err(e)),
                Some(Ok((s, l, r))) if s == session => rows.push((l, r)),
                Some(Ok(other)) => {
                    self.pending = Some(other);
                    break;
                }
            }
        }
        Some(self.build(session, &rows))
    }

    fn build(&self, session: u64, rows: &[(u64, csv::StringRecord)]) -> Result<ChannelRealization> {
        if rows.len() != self.n_subcarriers {
            return Err(SkgError::Shape {
                path: self.path.clone(),
                session,
                expected: self.n_subcarriers,
                found: rows.len(),
            });
        }
        let mut h_ab = Vec::with_capacity(rows.len());
        let mut h_ae = Vec::with_capacity(rows.len());
        for (index, (line, record)) in rows.iter().enumerate() {
            let expected_len = if self.has_eve { 6 } else { 4 };
            if record.len() != expected_len {
                return Err(SkgError::Parse {
                    path: self.path.clone(),
                    line: *line,
                    message: format!("expected {expected_len} fields, found {}", record.len()),
                });
            }
            let sub = parse_field::<usize>(&self.path, *line, record, 1, "subcarrier")?;
            if sub != index {
                return Err(SkgError::Parse {
                    path: self.path.clone(),
                    line: *line,
                    message: format!("subcarrier {sub} out of order, expected {index}"),
                });
            }
            let f = |i: usize, name: &str| parse_field::<f64>(&self.path, *line, record, i, name);
            h_ab.push(Complex64::new(f(2, "h_ab_re")?, f(3, "h_ab_im")?));
            if self.has_eve {
                h_ae.push(Complex64::new(f(4, "h_ae_re")?, f(5, "h_ae_im")?));
            }
        }
        let h_ab = ComplexVector::new(h_ab);
        Ok(ChannelRealization::Direct(DirectChannels {
            h_ab_rev: h_ab.clone(),
            h_ab,
            h_ae: self.has_eve.then(|| ComplexVector::new(h_ae)),
            h_be: None,
        }))
    }
}

impl Iterator for TraceReader {
    type Item = Result<ChannelRealization>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.read_session();
        if matches!(item, None | Some(Err(_))) {
            self.done = true;
        }
        item
    }
}

fn parse_error(path: &Path, line: u64, e: csv::Error) -> SkgError {
    SkgError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    record: &csv::StringRecord,
    index: usize,
    name: &str,
) -> Result<T> {
    let raw = record.get(index).unwrap_or("");
    raw.parse().map_err(|_| SkgError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("cannot parse {name} from {raw:?}"),
    })
}

/// Writes direct-scenario realizations in trace format. Eve columns are
/// emitted when every realization carries `h_ae`.
pub fn write_trace(path: impl AsRef<Path>, realizations: &[ChannelRealization]) -> Result<()> {
    let path = path.as_ref();
    let direct: Vec<&DirectChannels> = realizations
        .iter()
        .map(|r| {
            r.direct().ok_or_else(|| {
                SkgError::Precondition("traces hold direct-scenario channels only".into())
            })
        })
        .collect::<Result<_>>()?;
    let with_eve = !direct.is_empty() && direct.iter().all(|d| d.h_ae.is_some());
    let mut out = String::new();
    out.push_str(&HEADER.join(","));
    if with_eve {
        out.push(',');
        out.push_str(&EVE_HEADER.join(","));
    }
    out.push('\n');
    for (session, d) in direct.iter().enumerate() {
        for j in 0..d.h_ab.len() {
            let h = d.h_ab[j];
            out.push_str(&format!("{session},{j},{},{}", float(h.re), float(h.im)));
            if let (true, Some(e)) = (with_eve, &d.h_ae) {
                out.push_str(&format!(",{},{}", float(e[j].re), float(e[j].im)));
            }
            out.push('\n');
        }
    }
    let mut file = File::create(path).map_err(|e| SkgError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| SkgError::io(path, e))
}

/// 17 significant digits: enough to reproduce every f64 exactly.
pub(crate) fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channels;
    use crate::config::{Scenario, SessionConfig};
    use crate::signal::Rng;

    fn sample(n: usize, count: usize) -> Vec<ChannelRealization> {
        let mut cfg = SessionConfig::direct();
        cfg.n_subcarriers = n;
        let model = cfg.channel_model().unwrap();
        let mut rng = Rng::seeded(3);
        (0..count)
            .map(|_| sample_channels(&mut rng, &model, Scenario::Direct).unwrap())
            .collect()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let mut written = sample(16, 2);
        for r in &mut written {
            if let ChannelRealization::Direct(d) = r {
                d.h_be = None;
            }
        }
        write_trace(&path, &written).unwrap();
        let reader = load_trace(&path, 16).unwrap();
        assert!(reader.has_eve());
        let read: Vec<_> = reader.collect::<Result<_>>().unwrap();
        assert_eq!(read.len(), 2);
        for (a, b) in read.iter().zip(&written) {
            let (a, b) = (a.direct().unwrap(), b.direct().unwrap());
            assert_eq!(a.h_ab, b.h_ab);
            assert_eq!(a.h_ae, b.h_ae);
            assert_eq!(a.h_ab_rev, a.h_ab);
        }
    }

    #[test]
    fn missing_eve_columns_are_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        std::fs::write(
            &path,
            "session,subcarrier,h_ab_re,h_ab_im\n0,0,1.0,0.5\n0,1,-0.25,2\n",
        )
        .unwrap();
        let reader = load_trace(&path, 2).unwrap();
        assert!(!reader.has_eve());
        let r: Vec<_> = reader.collect::<Result<_>>().unwrap();
        assert!(r[0].direct().unwrap().h_ae.is_none());
    }

    #[test]
    fn malformed_row_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        std::fs::write(
            &path,
            "session,subcarrier,h_ab_re,h_ab_im\n0,0,1.0,0.5\n0,1,oops,2\n",
        )
        .unwrap();
        let err = load_trace(&path, 2).unwrap().next().unwrap().unwrap_err();
        assert!(matches!(err, SkgError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn wrong_subcarrier_count_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace(&path, &sample(8, 1)).unwrap();
        let err = load_trace(&path, 16).unwrap().next().unwrap().unwrap_err();
        assert!(
            matches!(
                err,
                SkgError::Shape {
                    expected: 16,
                    found: 8,
                    ..
                }
            ),
            "{err}"
        );
    }
}
