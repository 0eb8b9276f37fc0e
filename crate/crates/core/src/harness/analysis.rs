//! Protocol-level figures derived from a configuration: randomness
//! efficiency and the inputs of the attack-probability bounds.

use serde::Serialize;

use crate::channel::sample_channels;
use crate::config::{Scenario, SessionConfig};
use crate::error::{Result, SkgError};
use crate::exchange::run_exchange;
use crate::quantize::quantize;
use crate::security::{
    estimate_entropy, estimate_mi, fano_bound, mi_gaussian, semantic_bound, BoundReport,
    EstimatorConfig, MiEstimate, Samples,
};
use crate::signal::Rng;

/// `R_Q / (H(S) + H(V))` with `R_Q = 2δN` and `H(S) = H(V) = N log₂M`.
pub fn randomness_efficiency(cfg: &SessionConfig) -> f64 {
    let n = cfg.n_subcarriers as f64;
    let r_q = 2.0 * cfg.delta as f64 * n;
    let h = n * (cfg.qam_order as f64).log2();
    r_q / (2.0 * h)
}

/// Semantic bound for the direct scenario with `I` taken from the
/// configured Eve correlation.
pub fn direct_bound(cfg: &SessionConfig) -> Result<BoundReport> {
    let mi = mi_gaussian(cfg.rho()?)?;
    semantic_bound(Scenario::Direct, cfg.n_subcarriers as u32, cfg.delta, mi)
}

/// Monte Carlo inputs of the relay bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FanoInputs {
    /// `I(w_alice; w_e1, w_e2)` per subcarrier.
    pub mi: MiEstimate,
    /// Entropy of Alice's per-subcarrier quantizer output.
    pub h_q: f64,
    pub q_support: u64,
    pub sessions: usize,
}

/// Pools subcarrier samples from independent relay sessions, each over a
/// fresh channel realization, until `est.n_samples` are collected.
pub fn estimate_fano_inputs(cfg: &SessionConfig, est: &EstimatorConfig) -> Result<FanoInputs> {
    if cfg.scenario != Scenario::Relay {
        return Err(SkgError::Precondition(
            "Fano inputs are defined for the relay scenario".into(),
        ));
    }
    cfg.validate()?;
    est.validate()?;
    let model = cfg.channel_model()?;
    let n = cfg.n_subcarriers;
    let sessions = est.n_samples.div_ceil(n);
    let mut rng = Rng::child(est.seed, 0);
    let mut alice = Vec::with_capacity(sessions * n);
    let mut e1 = Vec::with_capacity(sessions * n);
    let mut e2 = Vec::with_capacity(sessions * n);
    let mut symbols = Vec::with_capacity(sessions * n);
    let scale = 1u32 << cfg.delta;
    for _ in 0..sessions {
        let channel = sample_channels(&mut rng, &model, Scenario::Relay)?;
        let ex = run_exchange(cfg, &channel, &mut rng)?;
        let eve = ex.eve.as_ref().expect("relay exchanges always observe Eve");
        alice.extend_from_slice(ex.w_alice.as_slice());
        e1.extend_from_slice(eve.received[0].as_slice());
        e2.extend_from_slice(eve.received[1].as_slice());
        let q = quantize(&ex.w_alice, cfg.delta)?;
        symbols.extend(q.symbols.iter().map(|&(r, i)| r * scale + i));
    }
    let x = Samples::from_complex_columns(&[&alice])?;
    let y = Samples::from_complex_columns(&[&e1, &e2])?;
    let mi = estimate_mi(&x, &y, est)?;
    let q_support = 1u64 << (2 * cfg.delta);
    let h_q = estimate_entropy(&symbols, q_support as u32)?;
    Ok(FanoInputs {
        mi,
        h_q,
        q_support,
        sessions,
    })
}

pub fn relay_bound(cfg: &SessionConfig, inputs: &FanoInputs) -> Result<BoundReport> {
    fano_bound(
        Scenario::Relay,
        cfg.n_subcarriers as u32,
        cfg.delta,
        inputs.h_q,
        inputs.mi.bits.max(0.0),
        inputs.q_support,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_examples() {
        assert_eq!(randomness_efficiency(&SessionConfig::direct()), 0.5);
        assert_eq!(randomness_efficiency(&SessionConfig::relay()), 64.0 / 192.0);
        let mut cfg = SessionConfig::direct();
        cfg.qam_order = 4;
        cfg.delta = 1;
        assert_eq!(randomness_efficiency(&cfg), 0.5);
    }

    #[test]
    fn direct_bound_uses_spatial_correlation() {
        let r = direct_bound(&SessionConfig::direct()).unwrap();
        let rho = crate::channel::spatial_correlation(0.5).unwrap();
        assert_eq!(r.mi, -(1.0 - rho * rho).log2());
        assert_eq!(r.hash_term, 2f64.powi(-32));
    }

    #[test]
    fn fano_inputs_need_relay() {
        let est = EstimatorConfig::default();
        assert!(estimate_fano_inputs(&SessionConfig::direct(), &est).is_err());
    }

    #[test]
    fn fano_inputs_small_run() {
        let est = EstimatorConfig {
            n_samples: 4000,
            ..EstimatorConfig::default()
        };
        let inputs = estimate_fano_inputs(&SessionConfig::relay(), &est).unwrap();
        assert_eq!(inputs.sessions, 250);
        assert!(inputs.h_q > 3.0 && inputs.h_q <= 4.0);
        assert!(inputs.mi.bits.is_finite());
        let r = relay_bound(&SessionConfig::relay(), &inputs).unwrap();
        assert!(r.bound <= 1.0);
    }
}
