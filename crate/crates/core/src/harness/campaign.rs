//! Seeded Monte Carlo campaigns over an SNR, ζ or ρ grid.
//!
//! A trial is one attempt at a final key: sessions run until four have been
//! accepted or the per-key session cap is reached. Accepted session keys are
//! XORed into the final key. Trials run in parallel, each on its own child
//! random stream, and are reduced in trial order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplify::{combine_sessions, KEYS_PER_FINAL};
use crate::bits::BitSeq;
use crate::channel::{sample_channels, with_nonreciprocity, ChannelRealization};
use crate::config::{Scenario, SessionConfig};
use crate::error::{Result, SkgError};
use crate::harness::analysis::{
    direct_bound, estimate_fano_inputs, randomness_efficiency, relay_bound, FanoInputs,
};
use crate::harness::session::run_session_with;
use crate::reconcile::ConvCode;
use crate::security::{BoundReport, EstimatorConfig};
use crate::signal::Rng;
use crate::trace::load_trace;

/// Stream index of the fixed channel realization in static mode.
const STATIC_STREAM: u64 = u64::MAX;
/// Stream index of the bound estimator.
const BOUND_STREAM: u64 = u64::MAX - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    Zeta,
    Rho,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Zeta => "zeta",
            SweepAxis::Rho => "rho",
        }
    }

    /// The template with this axis set to `value`.
    pub fn apply(self, template: &SessionConfig, value: f64) -> SessionConfig {
        let mut cfg = template.clone();
        match self {
            SweepAxis::SnrDb => cfg.snr_db = value,
            SweepAxis::Zeta => cfg.zeta = value,
            SweepAxis::Rho => cfg.rho = Some(value),
        }
        cfg
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = SkgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr_db" => Ok(SweepAxis::SnrDb),
            "zeta" => Ok(SweepAxis::Zeta),
            "rho" => Ok(SweepAxis::Rho),
            other => Err(SkgError::InvalidConfig(format!(
                "unknown sweep axis {other:?}; expected snr_db, zeta or rho"
            ))),
        }
    }
}

/// Whether the channel stays fixed across the sessions of a sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// One realization for every session. With ζ < 1 the reverse links are
    /// redrawn around the fixed forward links each session.
    Static,
    /// A fresh realization per session.
    PerSession,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub template: SessionConfig,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    /// Final-key attempts per sweep point.
    pub trials: usize,
    pub channel_mode: ChannelMode,
    /// Sessions after which an incomplete key attempt is abandoned.
    pub max_sessions_per_key: usize,
    /// Channel trace replacing the synthetic direct channel model.
    pub trace: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Write bounds per sweep point.
    pub bounds: bool,
    /// Estimator for the relay bound's information terms.
    pub estimator: EstimatorConfig,
}

/// Keys of the flat campaign file besides the session parameters.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignKeys {
    sweep_axis: Option<SweepAxis>,
    sweep_values: Option<Vec<f64>>,
    trials: Option<usize>,
    channel_mode: Option<ChannelMode>,
    max_sessions_per_key: Option<usize>,
    trace: Option<PathBuf>,
    out: Option<PathBuf>,
    bounds: Option<bool>,
    bound_samples: Option<usize>,
}

const CAMPAIGN_KEYS: [&str; 9] = [
    "sweep_axis",
    "sweep_values",
    "trials",
    "channel_mode",
    "max_sessions_per_key",
    "trace",
    "out",
    "bounds",
    "bound_samples",
];

impl CampaignConfig {
    /// Single-point campaign at the template's own parameters.
    pub fn new(template: SessionConfig) -> Self {
        let seed = template.seed;
        CampaignConfig {
            sweep_values: vec![template.snr_db],
            template,
            sweep_axis: SweepAxis::SnrDb,
            trials: 1000,
            channel_mode: ChannelMode::Static,
            max_sessions_per_key: 64,
            trace: None,
            out: PathBuf::from("results"),
            seed,
            bounds: true,
            estimator: EstimatorConfig {
                seed,
                ..EstimatorConfig::default()
            },
        }
    }

    pub fn sweep(mut self, axis: SweepAxis, values: Vec<f64>) -> Self {
        self.sweep_axis = axis;
        self.sweep_values = values;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.template.seed = seed;
        self.estimator.seed = seed;
        self
    }

    /// Parses the flat key/value campaign file. Session parameters and
    /// campaign keys share one table; `scenario` selects the preset that
    /// unspecified session parameters default to.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| SkgError::InvalidConfig(e.to_string()))?;
        let mut campaign = toml::Table::new();
        for key in CAMPAIGN_KEYS {
            if let Some(v) = table.remove(key) {
                campaign.insert(key.to_string(), v);
            }
        }
        let keys: CampaignKeys = campaign
            .try_into()
            .map_err(|e: toml::de::Error| SkgError::InvalidConfig(e.to_string()))?;
        let scenario = match table.get("scenario") {
            Some(v) => v
                .as_str()
                .ok_or_else(|| SkgError::InvalidConfig("scenario must be a string".into()))?
                .parse()?,
            None => Scenario::Direct,
        };
        let mut base = toml::Table::try_from(SessionConfig::for_scenario(scenario))
            .map_err(|e| SkgError::InvalidConfig(e.to_string()))?;
        base.extend(table);
        let template: SessionConfig = base
            .try_into()
            .map_err(|e: toml::de::Error| SkgError::InvalidConfig(e.to_string()))?;

        let mut cfg = CampaignConfig::new(template);
        if let Some(axis) = keys.sweep_axis {
            cfg.sweep_axis = axis;
            cfg.sweep_values = vec![axis_value(&cfg.template, axis)];
        }
        if let Some(values) = keys.sweep_values {
            cfg.sweep_values = values;
        }
        cfg.trials = keys.trials.unwrap_or(cfg.trials);
        cfg.channel_mode = keys.channel_mode.unwrap_or(cfg.channel_mode);
        cfg.max_sessions_per_key = keys
            .max_sessions_per_key
            .unwrap_or(cfg.max_sessions_per_key);
        cfg.trace = keys.trace;
        cfg.out = keys.out.unwrap_or(cfg.out);
        cfg.bounds = keys.bounds.unwrap_or(cfg.bounds);
        if let Some(n) = keys.bound_samples {
            cfg.estimator.n_samples = n;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SkgError::io(path, e))?;
        CampaignConfig::from_toml(&text)
    }

    /// Sets `axis` from a command-line list: several values make it the
    /// sweep; a single value sets the template unless it is already the
    /// swept axis.
    pub fn override_axis(&mut self, axis: SweepAxis, values: &[f64]) {
        if values.len() > 1 || axis == self.sweep_axis {
            self.sweep_axis = axis;
            self.sweep_values = values.to_vec();
        } else if let Some(&v) = values.first() {
            self.template = axis.apply(&self.template, v);
        }
    }

    pub fn point_config(&self, value: f64) -> SessionConfig {
        let mut cfg = self.sweep_axis.apply(&self.template, value);
        cfg.seed = self.seed;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(SkgError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(SkgError::InvalidConfig("sweep has no values".into()));
        }
        if self.max_sessions_per_key < KEYS_PER_FINAL {
            return Err(SkgError::InvalidConfig(format!(
                "max_sessions_per_key must be at least {KEYS_PER_FINAL}"
            )));
        }
        if self.trace.is_some() && self.template.scenario != Scenario::Direct {
            return Err(SkgError::InvalidConfig(
                "channel traces drive the direct scenario only".into(),
            ));
        }
        self.estimator.validate()?;
        for &v in &self.sweep_values {
            self.point_config(v).validate()?;
        }
        Ok(())
    }
}

fn axis_value(cfg: &SessionConfig, axis: SweepAxis) -> f64 {
    match axis {
        SweepAxis::SnrDb => cfg.snr_db,
        SweepAxis::Zeta => cfg.zeta,
        SweepAxis::Rho => cfg.rho().unwrap_or(f64::NAN),
    }
}

/// Aggregated metrics of one sweep point. Rates with an empty denominator
/// and Eve metrics without an Eve are NaN.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub sweep_value: f64,
    pub trials: u64,
    pub sessions: u64,
    pub accepted: u64,
    pub completed_keys: u64,
    /// Alice–Bob mismatch rate of quantized sequences over all sessions.
    pub bmr_bob: f64,
    /// Alice–Eve mismatch rate of quantized sequences over all sessions.
    pub bmr_eve: f64,
    /// Alice–Bob error rate of completed final keys.
    pub ber_bob: f64,
    /// Alice–Eve error rate of completed final keys.
    pub ber_eve: f64,
    pub accept_rate: f64,
    /// All sessions divided by completed keys.
    pub avg_sessions: f64,
    pub randomness_efficiency: f64,
    /// Accepted sessions whose keys differ.
    pub false_accepts: u64,
}

impl MetricsRow {
    pub const FIELDS: [&'static str; 12] = [
        "trials",
        "sessions",
        "accepted",
        "completed_keys",
        "bmr_bob",
        "bmr_eve",
        "ber_bob",
        "ber_eve",
        "accept_rate",
        "avg_sessions",
        "randomness_efficiency",
        "false_accepts",
    ];

    pub(crate) fn record(&self) -> Vec<String> {
        vec![
            self.sweep_value.to_string(),
            self.trials.to_string(),
            self.sessions.to_string(),
            self.accepted.to_string(),
            self.completed_keys.to_string(),
            self.bmr_bob.to_string(),
            self.bmr_eve.to_string(),
            self.ber_bob.to_string(),
            self.ber_eve.to_string(),
            self.accept_rate.to_string(),
            self.avg_sessions.to_string(),
            self.randomness_efficiency.to_string(),
            self.false_accepts.to_string(),
        ]
    }
}

/// Bound evaluated at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointBound {
    pub sweep_value: f64,
    pub report: BoundReport,
    /// Monte Carlo inputs of a relay bound.
    pub inputs: Option<FanoInputs>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub row: MetricsRow,
    /// Final-key bit errors at Eve, one per completed key with an Eve.
    pub eve_key_errors: Vec<u32>,
    /// Alice's completed final keys in trial order.
    pub final_keys: Vec<BitSeq>,
    pub bound: Option<PointBound>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResults {
    pub axis: SweepAxis,
    pub key_len: usize,
    pub points: Vec<PointResult>,
}

impl CampaignResults {
    pub fn rows(&self) -> Vec<MetricsRow> {
        self.points.iter().map(|p| p.row.clone()).collect()
    }

    /// All completed final keys, point by point.
    pub fn keystream(&self) -> BitSeq {
        let keys: Vec<BitSeq> = self
            .points
            .iter()
            .flat_map(|p| p.final_keys.iter().cloned())
            .collect();
        BitSeq::concat(&keys)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
struct TrialStats {
    sessions: u64,
    accepted: u64,
    false_accepts: u64,
    q_bits: u64,
    mismatch_bob: u64,
    eve_q_bits: u64,
    mismatch_eve: u64,
    /// Final keys of Alice and Bob and Eve's errors, when the key completed.
    final_key: Option<(BitSeq, u32, Option<u32>)>,
}

/// Supplies the channel of each session.
trait ChannelSource {
    fn next(&mut self, rng: &mut Rng) -> Result<ChannelRealization>;
}

struct Fixed<'a> {
    realization: &'a ChannelRealization,
    cfg: &'a SessionConfig,
}

impl ChannelSource for Fixed<'_> {
    fn next(&mut self, rng: &mut Rng) -> Result<ChannelRealization> {
        if self.cfg.zeta == 1.0 {
            return Ok(self.realization.clone());
        }
        with_nonreciprocity(
            self.realization,
            self.cfg.zeta,
            self.cfg.sigma_h2,
            self.cfg.sigma_g2,
            rng,
        )
    }
}

struct Fresh<'a> {
    cfg: &'a SessionConfig,
}

impl ChannelSource for Fresh<'_> {
    fn next(&mut self, rng: &mut Rng) -> Result<ChannelRealization> {
        sample_channels(rng, &self.cfg.channel_model()?, self.cfg.scenario)
    }
}

fn run_trial(
    cfg: &SessionConfig,
    code: &ConvCode,
    max_sessions: usize,
    source: &mut dyn ChannelSource,
    rng: &mut Rng,
) -> Result<TrialStats> {
    let mut stats = TrialStats::default();
    let mut alice = Vec::with_capacity(KEYS_PER_FINAL);
    let mut bob = Vec::with_capacity(KEYS_PER_FINAL);
    let mut eve = Vec::with_capacity(KEYS_PER_FINAL);
    while alice.len() < KEYS_PER_FINAL && (stats.sessions as usize) < max_sessions {
        let channel = source.next(rng)?;
        let out = run_session_with(cfg, &channel, code, rng)?;
        stats.sessions += 1;
        stats.q_bits += out.q_alice().len() as u64;
        stats.mismatch_bob += out.q_alice().hamming(out.q_bob())? as u64;
        if let Some(g) = &out.eve {
            stats.eve_q_bits += g.q.len() as u64;
            stats.mismatch_eve += out.q_alice().hamming(&g.q)? as u64;
        }
        if out.accepted() {
            stats.accepted += 1;
            stats.false_accepts += (out.key_alice() != out.key_bob()) as u64;
            alice.push(out.key_alice().clone());
            bob.push(out.key_bob().clone());
            if let Some(g) = out.eve {
                eve.push(g.keys.key);
            }
        }
    }
    if alice.len() == KEYS_PER_FINAL {
        let k_a = combine_sessions(&alice)?;
        let k_b = combine_sessions(&bob)?;
        let eve_errors = match eve.len() {
            KEYS_PER_FINAL => Some(k_a.hamming(&combine_sessions(&eve)?)? as u32),
            _ => None,
        };
        let bob_errors = k_a.hamming(&k_b)? as u32;
        stats.final_key = Some((k_a, bob_errors, eve_errors));
    }
    Ok(stats)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

fn reduce(cfg: &SessionConfig, value: f64, trials: &[TrialStats], key_len: usize) -> PointResult {
    let sum = |f: fn(&TrialStats) -> u64| trials.iter().map(f).sum::<u64>();
    let sessions = sum(|t| t.sessions);
    let accepted = sum(|t| t.accepted);
    let completed: Vec<_> = trials.iter().filter_map(|t| t.final_key.as_ref()).collect();
    let completed_keys = completed.len() as u64;
    let bob_errors: u64 = completed.iter().map(|c| c.1 as u64).sum();
    let eve_key_errors: Vec<u32> = completed.iter().filter_map(|c| c.2).collect();
    let eve_errors: u64 = eve_key_errors.iter().map(|&e| e as u64).sum();
    let key_bits = completed_keys * key_len as u64;
    let row = MetricsRow {
        sweep_value: value,
        trials: trials.len() as u64,
        sessions,
        accepted,
        completed_keys,
        bmr_bob: ratio(sum(|t| t.mismatch_bob), sum(|t| t.q_bits)),
        bmr_eve: ratio(sum(|t| t.mismatch_eve), sum(|t| t.eve_q_bits)),
        ber_bob: ratio(bob_errors, key_bits),
        ber_eve: ratio(eve_errors, eve_key_errors.len() as u64 * key_len as u64),
        accept_rate: ratio(accepted, sessions),
        avg_sessions: ratio(sessions, completed_keys),
        randomness_efficiency: randomness_efficiency(cfg),
        false_accepts: sum(|t| t.false_accepts),
    };
    PointResult {
        row,
        eve_key_errors,
        final_keys: completed.iter().map(|c| c.0.clone()).collect(),
        bound: None,
    }
}

fn point_bound(cfg: &SessionConfig, campaign: &CampaignConfig, value: f64) -> Result<PointBound> {
    let (report, inputs) = match cfg.scenario {
        Scenario::Direct => (direct_bound(cfg)?, None),
        Scenario::Relay => {
            let est = EstimatorConfig {
                seed: Rng::child(campaign.seed, BOUND_STREAM).next_u64(),
                ..campaign.estimator.clone()
            };
            let inputs = estimate_fano_inputs(cfg, &est)?;
            (relay_bound(cfg, &inputs)?, Some(inputs))
        }
    };
    Ok(PointBound {
        sweep_value: value,
        report,
        inputs,
    })
}

/// Runs every sweep point. The result depends only on `cfg`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResults> {
    cfg.validate()?;
    let code = ConvCode::standard();
    let key_len = cfg.template.quantized_len() / 2;
    let mut trace = match &cfg.trace {
        Some(path) => Some(load_trace(path, cfg.template.n_subcarriers)?),
        None => None,
    };
    let mut trace_static: Option<ChannelRealization> = None;
    let mut trace_used = 0usize;
    let mut points = Vec::with_capacity(cfg.sweep_values.len());
    for (index, &value) in cfg.sweep_values.iter().enumerate() {
        let point = cfg.point_config(value);
        let point_seed = Rng::child(cfg.seed, index as u64).next_u64();
        let trial_rng = |t: usize| Rng::child(point_seed, t as u64);
        let trials: Vec<TrialStats> = match (&mut trace, cfg.channel_mode) {
            (Some(reader), ChannelMode::PerSession) => {
                // Realizations are consumed in session order, so trials run serially.
                struct Replay<'a> {
                    reader: &'a mut crate::trace::TraceReader,
                    cfg: &'a SessionConfig,
                    used: &'a mut usize,
                }
                impl ChannelSource for Replay<'_> {
                    fn next(&mut self, rng: &mut Rng) -> Result<ChannelRealization> {
                        let realization = match self.reader.next() {
                            Some(r) => r?,
                            None => {
                                return Err(SkgError::TraceExhausted {
                                    needed: *self.used + 1,
                                    available: *self.used,
                                })
                            }
                        };
                        *self.used += 1;
                        Fixed {
                            realization: &realization,
                            cfg: self.cfg,
                        }
                        .next(rng)
                    }
                }
                let mut source = Replay {
                    reader,
                    cfg: &point,
                    used: &mut trace_used,
                };
                (0..cfg.trials)
                    .map(|t| {
                        run_trial(
                            &point,
                            &code,
                            cfg.max_sessions_per_key,
                            &mut source,
                            &mut trial_rng(t),
                        )
                    })
                    .collect::<Result<_>>()?
            }
            (maybe_trace, mode) => {
                let realization = match (maybe_trace, mode) {
                    (Some(reader), _) => {
                        if trace_static.is_none() {
                            let first =
                                reader.next().transpose()?.ok_or(SkgError::TraceExhausted {
                                    needed: 1,
                                    available: 0,
                                })?;
                            trace_static = Some(first);
                        }
                        trace_static.clone()
                    }
                    (None, ChannelMode::Static) => Some(sample_channels(
                        &mut Rng::child(cfg.seed, STATIC_STREAM),
                        &point.channel_model()?,
                        point.scenario,
                    )?),
                    (None, ChannelMode::PerSession) => None,
                };
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(t);
                        match &realization {
                            Some(r) => {
                                let mut source = Fixed {
                                    realization: r,
                                    cfg: &point,
                                };
                                run_trial(
                                    &point,
                                    &code,
                                    cfg.max_sessions_per_key,
                                    &mut source,
                                    &mut rng,
                                )
                            }
                            None => {
                                let mut source = Fresh { cfg: &point };
                                run_trial(
                                    &point,
                                    &code,
                                    cfg.max_sessions_per_key,
                                    &mut source,
                                    &mut rng,
                                )
                            }
                        }
                    })
                    .collect::<Result<_>>()?
            }
        };
        let mut result = reduce(&point, value, &trials, key_len);
        if cfg.bounds {
            result.bound = Some(point_bound(&point, cfg, value)?);
        }
        points.push(result);
    }
    Ok(CampaignResults {
        axis: cfg.sweep_axis,
        key_len,
        points,
    })
}
