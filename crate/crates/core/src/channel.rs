//! Fading channel realizations for the direct and relay scenarios.
//!
//! Coefficients are flat per subcarrier and independent across subcarriers
//! and across draws. Each legitimate coefficient is circularly-symmetric
//! Gaussian with variance `σ²/2` per dimension, so magnitudes are Rayleigh and
//! phases uniform. Eve's coefficients are correlated with the legitimate link
//! that shares her receive neighbourhood: per-dimension correlation `ρ`, real
//! with real and imaginary with imaginary.

use std::f64::consts::{FRAC_PI_4, PI};

#[cfg(test)]
use num_complex::Complex64;

use crate::config::Scenario;
use crate::error::{Result, SkgError};
use crate::signal::{draw_cscg_vector, ComplexVector, Rng};

/// Zeroth-order Bessel function of the first kind.
///
/// Power series below 12, Hankel asymptotic expansion above; absolute error
/// stays under 1e-10 across the real line.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 12.0 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        // P and Q series of the Hankel expansion, truncated at the smallest term.
        // μ = 4ν² with ν = 0.
        let mu = 0.0_f64;
        let mut p = 0.0;
        let mut q = 0.0;
        let mut term = 1.0_f64;
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            if term.abs() > prev {
                break;
            }
            prev = term.abs();
            match k % 4 {
                0 => p += term,
                1 => q += term,
                2 => p -= term,
                _ => q -= term,
            }
            let odd = (2 * k + 1) as f64;
            term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
        }
        let chi = x - FRAC_PI_4;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Correlation between fading coefficients at two points `d` apart:
/// `ρ = J0(2π d/λ)²`.
pub fn spatial_correlation(distance_over_lambda: f64) -> Result<f64> {
    if !(distance_over_lambda >= 0.0) || !distance_over_lambda.is_finite() {
        return Err(SkgError::Precondition(format!(
            "distance {distance_over_lambda} must be a finite non-negative multiple of λ"
        )));
    }
    Ok(bessel_j0(2.0 * PI * distance_over_lambda).powi(2))
}

/// Parameters of the synthetic fading model.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModelConfig {
    pub n_subcarriers: usize,
    /// Average power of Alice's link (`h_ab`, or `h` to the relay).
    pub sigma_h2: f64,
    /// Average power of Bob's link to the relay.
    pub sigma_g2: f64,
    /// Per-dimension correlation between Eve's coefficients and the nearby legitimate link.
    pub rho: f64,
    /// Reciprocity correlation between forward and reverse coefficients.
    pub zeta: f64,
}

impl ChannelModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(SkgError::InvalidConfig("N must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(SkgError::InvalidConfig(format!(
                "rho {} outside [0, 1)",
                self.rho
            )));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(SkgError::InvalidConfig(format!(
                "zeta {} outside (0, 1]",
                self.zeta
            )));
        }
        if !(self.sigma_h2 > 0.0 && self.sigma_g2 > 0.0) {
            return Err(SkgError::InvalidConfig(
                "link powers must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Direct scenario: Alice↔Bob plus Eve's links to each of them.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectChannels {
    /// Alice → Bob.
    pub h_ab: ComplexVector,
    /// Bob → Alice.
    pub h_ab_rev: ComplexVector,
    /// Alice → Eve. Absent when a trace carries no Eve columns.
    pub h_ae: Option<ComplexVector>,
    /// Bob → Eve.
    pub h_be: Option<ComplexVector>,
}

/// Relay scenario: both parties' links to the relay plus Eve's links.
#[derive(Clone, Debug, PartialEq)]
pub struct RelayChannels {
    /// Alice → relay.
    pub h: ComplexVector,
    /// Relay → Alice.
    pub h_rev: ComplexVector,
    /// Bob → relay.
    pub g: ComplexVector,
    /// Relay → Bob.
    pub g_rev: ComplexVector,
    /// Alice → Eve.
    pub h_ae: ComplexVector,
    /// Bob → Eve.
    pub g_be: ComplexVector,
    /// Relay → Eve.
    pub f_ce: ComplexVector,
}

/// Every coefficient vector of one coherence interval.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelRealization {
    Direct(DirectChannels),
    Relay(RelayChannels),
}

impl ChannelRealization {
    pub fn scenario(&self) -> Scenario {
        match self {
            ChannelRealization::Direct(_) => Scenario::Direct,
            ChannelRealization::Relay(_) => Scenario::Relay,
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        match self {
            ChannelRealization::Direct(d) => d.h_ab.len(),
            ChannelRealization::Relay(r) => r.h.len(),
        }
    }

    pub fn direct(&self) -> Option<&DirectChannels> {
        match self {
            ChannelRealization::Direct(d) => Some(d),
            ChannelRealization::Relay(_) => None,
        }
    }

    pub fn relay(&self) -> Option<&RelayChannels> {
        match self {
            ChannelRealization::Relay(r) => Some(r),
            ChannelRealization::Direct(_) => None,
        }
    }
}

/// `ρ`-correlated companion of `base`: `ρ·(σ_e/σ_b)·base + √(1−ρ²)·w` with
/// `w ~ CN(0, σ_e²)`.
fn correlated_with(
    rng: &mut Rng,
    base: &ComplexVector,
    rho: f64,
    sigma_base2: f64,
    sigma_new2: f64,
) -> ComplexVector {
    let fresh = draw_cscg_vector(rng, sigma_new2 / 2.0, base.len());
    let gain = rho * (sigma_new2 / sigma_base2).sqrt();
    let spread = (1.0 - rho * rho).sqrt();
    base.zip_with(&fresh, |b, w| b * gain + w * spread)
}

/// Draws one coherence interval for `scenario`.
pub fn sample_channels(
    rng: &mut Rng,
    config: &ChannelModelConfig,
    scenario: Scenario,
) -> Result<ChannelRealization> {
    config.validate()?;
    let n = config.n_subcarriers;
    let sh = config.sigma_h2;
    let sg = config.sigma_g2;
    Ok(match scenario {
        Scenario::Direct => {
            let h_ab = draw_cscg_vector(rng, sh / 2.0, n);
            let h_ab_rev = apply_nonreciprocity(&h_ab, config.zeta, sh.sqrt(), rng)?;
            // Eve is nearer Bob: her link from Alice shares Bob's fading.
            let h_ae = correlated_with(rng, &h_ab, config.rho, sh, sh);
            let h_be = draw_cscg_vector(rng, sh / 2.0, n);
            ChannelRealization::Direct(DirectChannels {
                h_ab,
                h_ab_rev,
                h_ae: Some(h_ae),
                h_be: Some(h_be),
            })
        }
        Scenario::Relay => {
            let h = draw_cscg_vector(rng, sh / 2.0, n);
            let h_rev = apply_nonreciprocity(&h, config.zeta, sh.sqrt(), rng)?;
            let g = draw_cscg_vector(rng, sg / 2.0, n);
            let g_rev = apply_nonreciprocity(&g, config.zeta, sg.sqrt(), rng)?;
            // Eve sits near the relay, so both uplinks are correlated with hers.
            let h_ae = correlated_with(rng, &h, config.rho, sh, sh);
            let g_be = correlated_with(rng, &g, config.rho, sg, sg);
            let f_ce = draw_cscg_vector(rng, 0.5, n);
            ChannelRealization::Relay(RelayChannels {
                h,
                h_rev,
                g,
                g_rev,
                h_ae,
                g_be,
                f_ce,
            })
        }
    })
}

/// Reverse-link coefficients `ζ·h + √(1−ζ²)·(σ_h/√2)·n` with `n` unit
/// variance per dimension. `ζ = 1` returns the input unchanged.
pub fn apply_nonreciprocity(
    h_fwd: &ComplexVector,
    zeta: f64,
    sigma_h: f64,
    rng: &mut Rng,
) -> Result<ComplexVector> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(SkgError::Precondition(format!(
            "zeta {zeta} outside (0, 1]"
        )));
    }
    if zeta == 1.0 {
        return Ok(h_fwd.clone());
    }
    let spread = (1.0 - zeta * zeta).sqrt() * sigma_h / 2f64.sqrt();
    let noise = draw_cscg_vector(rng, 1.0, h_fwd.len());
    Ok(h_fwd.zip_with(&noise, |h, w| h * zeta + w * spread))
}

/// Replaces the reverse link(s) of `realization` with `ζ`-correlated copies
/// of the forward link(s).
pub fn with_nonreciprocity(
    realization: &ChannelRealization,
    zeta: f64,
    sigma_h2: f64,
    sigma_g2: f64,
    rng: &mut Rng,
) -> Result<ChannelRealization> {
    Ok(match realization {
        ChannelRealization::Direct(d) => ChannelRealization::Direct(DirectChannels {
            h_ab_rev: apply_nonreciprocity(&d.h_ab, zeta, sigma_h2.sqrt(), rng)?,
            ..d.clone()
        }),
        ChannelRealization::Relay(r) => ChannelRealization::Relay(RelayChannels {
            h_rev: apply_nonreciprocity(&r.h, zeta, sigma_h2.sqrt(), rng)?,
            g_rev: apply_nonreciprocity(&r.g, zeta, sigma_g2.sqrt(), rng)?,
            ..r.clone()
        }),
    })
}

/// Pearson correlation of two real samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
pub(crate) fn real_parts(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

#[cfg(test)]
pub(crate) fn imag_parts(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.im).collect()
}
