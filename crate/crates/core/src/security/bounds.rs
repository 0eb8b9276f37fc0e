//! Analytic upper bounds on the probability that Eve recovers a session key.
//!
//! Both bounds have the form `guessing term + hash term` where the hash term
//! `2^{−δN}` is the collision probability of the final hash. A bound whose
//! value reaches 1 says nothing and is flagged as vacuous.

use serde::Serialize;

use crate::config::Scenario;
use crate::error::{Result, SkgError};

/// Mutual information `−log₂(1 − ρ²)` in bits between two circularly symmetric
/// complex Gaussians whose real and imaginary parts each have correlation ρ.
pub fn mi_gaussian(rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(SkgError::Domain(format!(
            "correlation {rho} outside [0, 1): covariance would be singular or invalid"
        )));
    }
    Ok(-(1.0 - rho * rho).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Semantic-security bound from the channel correlation.
    Semantic,
    /// Fano-type bound from the quantizer entropy and Eve's information.
    Fano,
}

/// One evaluated bound together with the inputs that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub scenario: Scenario,
    pub n_subcarriers: u32,
    pub delta: u32,
    /// Eve's information per subcarrier in bits.
    pub mi: f64,
    /// Quantizer output entropy per subcarrier (Fano bound only).
    pub h_q: Option<f64>,
    /// Quantizer alphabet size |Q| (Fano bound only).
    pub q_support: Option<u64>,
    pub guessing_term: f64,
    pub hash_term: f64,
    /// `guessing_term + hash_term`.
    pub sum: f64,
    /// `sum` capped at 1.
    pub bound: f64,
    pub vacuous: bool,
}

impl BoundReport {
    fn new(
        kind: BoundKind,
        scenario: Scenario,
        n: u32,
        delta: u32,
        mi: f64,
        per_subcarrier: f64,
        h_q: Option<f64>,
        q_support: Option<u64>,
    ) -> Self {
        let guessing_term = per_subcarrier.max(0.0).powi(n as i32);
        let hash_term = 2f64.powi(-((delta * n) as i32));
        let sum = guessing_term + hash_term;
        let vacuous = per_subcarrier >= 1.0 || sum >= 1.0;
        BoundReport {
            kind,
            scenario,
            n_subcarriers: n,
            delta,
            mi,
            h_q,
            q_support,
            guessing_term,
            hash_term,
            sum,
            bound: if vacuous { 1.0 } else { sum },
            vacuous,
        }
    }

    pub fn log2_bound(&self) -> f64 {
        self.bound.log2()
    }

    pub fn log2_guessing(&self) -> f64 {
        self.guessing_term.log2()
    }

    pub fn log2_hash(&self) -> f64 {
        self.hash_term.log2()
    }
}

fn check_common(n: u32, delta: u32, mi: f64) -> Result<()> {
    if n == 0 || delta == 0 {
        return Err(SkgError::Precondition("N and δ must be positive".into()));
    }
    if !(mi >= 0.0 && mi.is_finite()) {
        return Err(SkgError::Precondition(format!(
            "mutual information {mi} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// `(2^{−2δ} + √(2I))^N + 2^{−δN}`.
pub fn semantic_bound(scenario: Scenario, n: u32, delta: u32, mi: f64) -> Result<BoundReport> {
    check_common(n, delta, mi)?;
    let base = 2f64.powi(-2 * delta as i32) + (2.0 * mi).sqrt();
    Ok(BoundReport::new(
        BoundKind::Semantic,
        scenario,
        n,
        delta,
        mi,
        base,
        None,
        None,
    ))
}

/// `(1 − (H − I − 1)/log₂|Q|)^N + 2^{−δN}`.
pub fn fano_bound(
    scenario: Scenario,
    n: u32,
    delta: u32,
    h_q: f64,
    mi_abe: f64,
    q_support: u64,
) -> Result<BoundReport> {
    check_common(n, delta, mi_abe)?;
    if q_support != 1u64 << (2 * delta) {
        return Err(SkgError::Precondition(format!(
            "alphabet size {q_support} must equal 2^(2δ) = {}",
            1u64 << (2 * delta)
        )));
    }
    let log_q = (q_support as f64).log2();
    if !(0.0..=log_q + 1e-12).contains(&h_q) {
        return Err(SkgError::Precondition(format!(
            "entropy {h_q} outside [0, {log_q}]"
        )));
    }
    let base = 1.0 - (h_q - mi_abe - 1.0) / log_q;
    Ok(BoundReport::new(
        BoundKind::Fano,
        scenario,
        n,
        delta,
        mi_abe,
        base,
        Some(h_q),
        Some(q_support),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn gaussian_mi_values() {
        assert_eq!(mi_gaussian(0.0).unwrap(), 0.0);
        assert!((mi_gaussian(0.09).unwrap() - 0.011733).abs() < 1e-6);
        assert!(mi_gaussian(1.0).is_err());
        assert!(mi_gaussian(-0.1).is_err());
    }

    #[test]
    fn semantic_bound_limits() {
        let r = semantic_bound(Scenario::Direct, 16, 2, 0.0).unwrap();
        assert_eq!(r.guessing_term, 2f64.powi(-64));
        assert_eq!(r.hash_term, 2f64.powi(-32));
        let r = semantic_bound(Scenario::Direct, 16, 2, 0.5).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn semantic_bound_at_rounded_mi() {
        let r = semantic_bound(Scenario::Direct, 16, 2, 0.01).unwrap();
        assert!(r.bound < 2f64.powi(-31));
        assert!(
            (r.log2_guessing() - -37.0).abs() < 1.0,
            "{}",
            r.log2_guessing()
        );
    }

    #[test]
    fn fano_examples() {
        let r = fano_bound(Scenario::Relay, 16, 2, 3.86, 1.39, 16).unwrap();
        assert!((r.log2_bound() - -10.57).abs() < 0.01, "{}", r.log2_bound());
        let r = fano_bound(Scenario::Relay, 16, 2, 4.0, 0.0, 16).unwrap();
        assert_eq!(r.guessing_term, 4f64.powi(-16));
        let r = fano_bound(Scenario::Relay, 1, 2, 4.0, 0.0, 16).unwrap();
        assert_eq!(r.bound, 0.5);
        assert!(
            fano_bound(Scenario::Relay, 16, 2, 2.0, 1.5, 16)
                .unwrap()
                .vacuous
        );
        assert!(fano_bound(Scenario::Relay, 16, 2, 4.5, 0.0, 16).is_err());
        assert!(fano_bound(Scenario::Relay, 16, 2, 3.0, 0.0, 15).is_err());
    }

    proptest! {
        #[test]
        fn gaussian_mi_is_increasing(a in 0.0f64..0.999, b in 0.0f64..0.999) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(mi_gaussian(lo).unwrap() <= mi_gaussian(hi).unwrap());
        }

        #[test]
        fn totals_are_exact_sums(n in 1u32..32, delta in 1u32..4, mi in 0.0f64..0.3, h in 2.0f64..4.0) {
            let s = semantic_bound(Scenario::Direct, n, delta, mi).unwrap();
            prop_assert_eq!(s.sum, s.guessing_term + s.hash_term);
            let q = 1u64 << (2 * delta);
            let h = h.min((q as f64).log2());
            let f = fano_bound(Scenario::Relay, n, delta, h, mi, q).unwrap();
            prop_assert_eq!(f.sum, f.guessing_term + f.hash_term);
        }

        #[test]
        fn semantic_monotone(n in 1u32..31, mi in 0.0f64..0.2, extra in 0.0f64..0.1) {
            let a = semantic_bound(Scenario::Direct, n, 2, mi).unwrap();
            let longer = semantic_bound(Scenario::Direct, n + 1, 2, mi).unwrap();
            let leakier = semantic_bound(Scenario::Direct, n, 2, mi + extra).unwrap();
            prop_assert!(longer.bound <= a.bound);
            prop_assert!(leakier.bound >= a.bound);
        }

        #[test]
        fn fano_decreases_with_entropy(h in 2.5f64..3.9, dh in 0.0f64..0.1, mi in 0.0f64..1.0) {
            let a = fano_bound(Scenario::Relay, 16, 2, h, mi, 16).unwrap();
            let b = fano_bound(Scenario::Relay, 16, 2, h + dh, mi, 16).unwrap();
            prop_assert!(b.bound <= a.bound);
        }
    }
}
