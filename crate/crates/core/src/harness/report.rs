//! Result files of a campaign.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SkgError};
use crate::harness::campaign::{CampaignResults, PointBound, SweepAxis};
use crate::security::BoundReport;

pub const METRICS_FILE: &str = "metrics.csv";
pub const EVE_CDF_FILE: &str = "eve_ber_cdf.csv";
pub const BOUNDS_FILE: &str = "bounds.txt";
pub const KEYSTREAM_FILE: &str = "keystream.bin";

/// Paths of the files written by [`emit_results`].
#[derive(Clone, Debug, PartialEq)]
pub struct EmittedFiles {
    pub metrics: PathBuf,
    pub eve_ber_cdf: PathBuf,
    pub bounds: PathBuf,
    pub keystream: PathBuf,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| SkgError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> SkgError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SkgError::io(path, io),
        other => SkgError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| SkgError::io(path, e))
}

/// Empirical CDF `(errors/len, fraction ≤)` over the distinct error counts.
pub fn empirical_cdf(errors: &[u32], key_len: usize) -> Vec<(f64, f64)> {
    let mut sorted = errors.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    for (i, &e) in sorted.iter().enumerate() {
        if sorted.get(i + 1) != Some(&e) {
            out.push((e as f64 / key_len as f64, (i + 1) as f64 / n));
        }
    }
    out
}

fn bound_block(out: &mut String, axis: SweepAxis, b: &PointBound) {
    let r: &BoundReport = &b.report;
    let kind = match r.kind {
        crate::security::BoundKind::Semantic => "semantic",
        crate::security::BoundKind::Fano => "fano",
    };
    let _ = writeln!(out, "[{} = {}]", axis, b.sweep_value);
    let _ = writeln!(out, "kind = {kind}");
    let _ = writeln!(out, "scenario = {}", r.scenario);
    let _ = writeln!(out, "n_subcarriers = {}", r.n_subcarriers);
    let _ = writeln!(out, "delta = {}", r.delta);
    let _ = writeln!(out, "mi_bits = {}", r.mi);
    if let (Some(h), Some(q)) = (r.h_q, r.q_support) {
        let _ = writeln!(out, "h_q_bits = {h}");
        let _ = writeln!(out, "q_support = {q}");
    }
    if let Some(inputs) = &b.inputs {
        let _ = writeln!(out, "mi_samples = {}", inputs.mi.n_samples);
        let _ = writeln!(out, "mi_estimator = {:?}", inputs.mi.kind);
    }
    let _ = writeln!(
        out,
        "guessing_term = {} (2^{:.2})",
        r.guessing_term,
        r.log2_guessing()
    );
    let _ = writeln!(out, "hash_term = {} (2^{:.2})", r.hash_term, r.log2_hash());
    let _ = writeln!(out, "sum = {}", r.sum);
    let _ = writeln!(out, "bound = {} (2^{:.2})", r.bound, r.log2_bound());
    let _ = writeln!(out, "vacuous = {}", r.vacuous);
    out.push('\n');
}

/// Formats bound reports in the `bounds.txt` layout.
pub fn format_bounds(axis: SweepAxis, bounds: &[PointBound]) -> String {
    let mut out = String::new();
    for b in bounds {
        bound_block(&mut out, axis, b);
    }
    out
}

/// Writes `metrics.csv`, `eve_ber_cdf.csv`, `bounds.txt` and
/// `keystream.bin` into `dir`, creating it if needed.
pub fn emit_results(results: &CampaignResults, dir: impl AsRef<Path>) -> Result<EmittedFiles> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| SkgError::io(dir, e))?;
    let files = EmittedFiles {
        metrics: dir.join(METRICS_FILE),
        eve_ber_cdf: dir.join(EVE_CDF_FILE),
        bounds: dir.join(BOUNDS_FILE),
        keystream: dir.join(KEYSTREAM_FILE),
    };
    let axis = results.axis.name();

    let mut header = vec![axis];
    header.extend(crate::harness::campaign::MetricsRow::FIELDS);
    write_rows(
        &files.metrics,
        &header,
        results.points.iter().map(|p| p.row.record()),
    )?;

    let cdf_rows = results.points.iter().flat_map(|p| {
        empirical_cdf(&p.eve_key_errors, results.key_len)
            .into_iter()
            .map(move |(ber, cdf)| {
                vec![
                    p.row.sweep_value.to_string(),
                    ber.to_string(),
                    cdf.to_string(),
                ]
            })
    });
    write_rows(&files.eve_ber_cdf, &[axis, "ber_eve", "cdf"], cdf_rows)?;

    let bounds: Vec<PointBound> = results
        .points
        .iter()
        .filter_map(|p| p.bound.clone())
        .collect();
    fs::write(&files.bounds, format_bounds(results.axis, &bounds))
        .map_err(|e| SkgError::io(&files.bounds, e))?;

    fs::write(&files.keystream, results.keystream().to_bytes())
        .map_err(|e| SkgError::io(&files.keystream, e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_steps() {
        let cdf = empirical_cdf(&[16, 12, 16, 20], 32);
        assert_eq!(cdf, vec![(0.375, 0.25), (0.5, 0.75), (0.625, 1.0)]);
        assert!(empirical_cdf(&[], 32).is_empty());
    }

    #[test]
    fn empty_campaign_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let results = CampaignResults {
            axis: SweepAxis::SnrDb,
            key_len: 32,
            points: vec![],
        };
        let files = emit_results(&results, dir.path()).unwrap();
        let metrics = fs::read_to_string(&files.metrics).unwrap();
        assert_eq!(metrics.lines().count(), 1);
        assert!(metrics.starts_with("snr_db,trials,sessions,"));
        assert!(metrics.ends_with('\n') && !metrics.contains('\r'));
        assert_eq!(
            fs::read_to_string(&files.eve_ber_cdf).unwrap(),
            "snr_db,ber_eve,cdf\n"
        );
        assert!(fs::read(&files.keystream).unwrap().is_empty());
    }

    #[test]
    fn unwritable_directory_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let results = CampaignResults {
            axis: SweepAxis::Zeta,
            key_len: 32,
            points: vec![],
        };
        let err = emit_results(&results, blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
