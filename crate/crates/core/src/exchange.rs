//! Induced randomness exchange for one session.
//!
//! Alice and Bob each draw a vector of QAM symbols per session, transmit it
//! and multiply what they receive by what they sent. In the direct scenario
//! this gives
//!
//! ```text
//! w_alice = s∘v∘h_rev + s∘n_a        w_bob = s∘v∘h + v∘n_b
//! ```
//!
//! In the relay scenario both parties transmit simultaneously, the relay
//! amplifies the superposition by a public factor α and broadcasts it, and
//! each party cancels its own echo before multiplying:
//!
//! ```text
//! w_alice = s∘v∘g∘h_rev + s∘s∘z_a + s∘n_r∘h_rev + s∘n_3a/α
//! ```
//!
//! where `z_a = h∘h_rev − ĥ∘ĥ` is the echo cancellation residual.
//!
//! Observation SNR is the ratio of the mean power of the product term to the
//! mean power of the remaining terms per entry, averaged over symbols and
//! fading.

use num_complex::Complex64;

use crate::channel::{ChannelRealization, DirectChannels, RelayChannels};
use crate::config::{db_to_linear, linear_to_db, Estimation, Scenario, SessionConfig};
use crate::error::{Result, SkgError};
use crate::signal::{draw_cscg_vector, draw_qam_vector, ComplexVector, Rng};

/// What Eve sees during one session.
#[derive(Clone, Debug, PartialEq)]
pub struct EveObservations {
    /// Raw received vectors: `[e1, e2]` for the direct scenario (`[e1]` when
    /// the channel lacks Eve's link from Bob) and `[w_e1, w_e2]` for the
    /// relay scenario.
    pub received: Vec<ComplexVector>,
    /// Eve's best imitation of a legitimate observation, the input to her
    /// copy of the quantizer.
    pub proxy: ComplexVector,
}

/// Everything produced by one exchange.
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeResult {
    pub w_alice: ComplexVector,
    pub w_bob: ComplexVector,
    /// Alice's local randomness.
    pub s: ComplexVector,
    /// Bob's local randomness.
    pub v: ComplexVector,
    /// `None` when the channel realization carries no Eve links.
    pub eve: Option<EveObservations>,
    /// Public amplification factor (relay scenario).
    pub alpha: Option<f64>,
    pub channel: ChannelRealization,
}

fn cn(rng: &mut Rng, variance: f64, n: usize) -> ComplexVector {
    draw_cscg_vector(rng, variance / 2.0, n)
}

fn check_len(n: usize, vectors: &[&ComplexVector]) -> Result<()> {
    for v in vectors {
        if v.len() != n {
            return Err(SkgError::LengthMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    Ok(())
}

/// Receiver noise variance of the direct scenario, `σ_h² / SNR`.
pub fn direct_noise_variance(cfg: &SessionConfig) -> f64 {
    cfg.sigma_h2 / cfg.snr_linear()
}

/// Runs one direct exchange over `channel`.
pub fn run_direct_exchange(
    cfg: &SessionConfig,
    channel: &DirectChannels,
    rng: &mut Rng,
) -> Result<ExchangeResult> {
    if cfg.scenario != Scenario::Direct {
        return Err(SkgError::Precondition(
            "direct exchange needs the direct scenario".into(),
        ));
    }
    let n = cfg.n_subcarriers;
    check_len(n, &[&channel.h_ab, &channel.h_ab_rev])?;
    let constellation = cfg.constellation()?;
    let noise = direct_noise_variance(cfg);

    let s = draw_qam_vector(rng, &constellation, n);
    let v = draw_qam_vector(rng, &constellation, n);
    let n_a = cn(rng, noise, n);
    let n_b = cn(rng, noise, n);
    // Alice receives v through h_rev; Bob receives s through h.
    let w_alice = s.hadamard(&v.hadamard(&channel.h_ab_rev).add(&n_a));
    let w_bob = v.hadamard(&s.hadamard(&channel.h_ab).add(&n_b));

    // Without h_be (traces carry only Eve's link from Alice) she observes e1 alone.
    let eve = match &channel.h_ae {
        Some(h_ae) => {
            check_len(n, &[h_ae])?;
            let eve_noise = if cfg.eve_noiseless { 0.0 } else { noise };
            let e1 = s.hadamard(h_ae).add(&cn(rng, eve_noise, n));
            // Eve is assumed to recover both symbol vectors exactly.
            let w_ed1 = v.hadamard(&e1);
            let mut received = vec![e1];
            if let Some(h_be) = &channel.h_be {
                check_len(n, &[h_be])?;
                received.push(v.hadamard(h_be).add(&cn(rng, eve_noise, n)));
            }
            Some(EveObservations {
                received,
                proxy: w_ed1,
            })
        }
        None => None,
    };

    Ok(ExchangeResult {
        w_alice,
        w_bob,
        s,
        v,
        eve,
        alpha: None,
        channel: ChannelRealization::Direct(channel.clone()),
    })
}

/// Eve's constructed direct-scenario samples `[v∘e1, s∘e2]`.
pub fn eve_direct_products(result: &ExchangeResult) -> Option<[ComplexVector; 2]> {
    let eve = result.eve.as_ref()?;
    if result.channel.scenario() != Scenario::Direct {
        return None;
    }
    Some([
        result.v.hadamard(&eve.received[0]),
        result.s.hadamard(eve.received.get(1)?),
    ])
}

/// Powers and noise levels of the relay scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelayLinkBudget {
    /// Mean transmit power of Alice's symbols.
    pub p_s: f64,
    /// Mean transmit power of Bob's symbols.
    pub p_v: f64,
    /// Noise variance at the relay.
    pub sigma_nr2: f64,
    /// Downlink noise variance at Alice.
    pub sigma_na2: f64,
    /// Downlink noise variance at Bob.
    pub sigma_nb2: f64,
    /// Noise variance of Eve's receivers.
    pub sigma_ne2: f64,
    pub sigma_h2: f64,
    pub sigma_g2: f64,
    /// Known probe power broadcast by the relay for channel estimation.
    pub p_probe: f64,
    /// E|s|⁴ / p_s² of the unit-power constellation.
    pub kurtosis: f64,
    pub zeta: f64,
    pub estimation: Estimation,
}

impl RelayLinkBudget {
    /// Unit noise everywhere, with transmit powers set so that each uplink
    /// arrives at `relay_snr_db` and the probe at `probe_snr_db`.
    pub fn from_config(cfg: &SessionConfig) -> Result<Self> {
        let relay_snr = db_to_linear(cfg.relay_snr_db);
        let constellation = cfg.constellation()?;
        Ok(RelayLinkBudget {
            p_s: relay_snr / cfg.sigma_h2,
            p_v: relay_snr / cfg.sigma_g2,
            sigma_nr2: 1.0,
            sigma_na2: 1.0,
            sigma_nb2: 1.0,
            sigma_ne2: if cfg.eve_noiseless { 0.0 } else { 1.0 },
            sigma_h2: cfg.sigma_h2,
            sigma_g2: cfg.sigma_g2,
            p_probe: db_to_linear(cfg.probe_snr_db) / cfg.sigma_h2.min(cfg.sigma_g2),
            kurtosis: constellation.fourth_moment() / constellation.mean_power().powi(2),
            zeta: cfg.zeta,
            estimation: cfg.estimation,
        })
    }

    /// A budget with every noise source removed.
    pub fn noiseless(cfg: &SessionConfig) -> Result<Self> {
        Ok(RelayLinkBudget {
            sigma_nr2: 0.0,
            sigma_na2: 0.0,
            sigma_nb2: 0.0,
            sigma_ne2: 0.0,
            ..RelayLinkBudget::from_config(cfg)?
        })
    }

    /// Mean power of the echo cancellation residual `h∘h_rev − ĥ∘ĥ` for a
    /// link of power `sigma2` and downlink noise `noise2`.
    pub fn residual_power(&self, sigma2: f64, noise2: f64) -> f64 {
        match self.estimation {
            Estimation::Perfect => 0.0,
            Estimation::ProbeBased => {
                let e2 = noise2 / self.p_probe;
                let d = 1.0 - self.zeta;
                d * (2.0 + d) * sigma2 * sigma2 + 4.0 * sigma2 * e2 + 2.0 * e2 * e2
            }
        }
    }

    fn alpha_free_terms(&self) -> (f64, f64) {
        let signal = self.p_s * self.p_v * self.sigma_g2 * self.sigma_h2;
        let floor = self.p_s * self.sigma_nr2 * self.sigma_h2
            + self.kurtosis
                * self.p_s
                * self.p_s
                * self.residual_power(self.sigma_h2, self.sigma_na2);
        (signal, floor)
    }

    /// Analytic SNR of Alice's observation for a given α.
    pub fn alice_snr(&self, alpha: f64) -> f64 {
        let (signal, floor) = self.alpha_free_terms();
        signal / (floor + self.p_s * self.sigma_na2 / (alpha * alpha))
    }
}

/// Amplification factor that places Alice's observation SNR at
/// `cfg.snr_db`. Returns 1 when the downlink is noiseless, since α then has
/// no effect on the SNR.
pub fn compute_alpha(cfg: &SessionConfig, budget: &RelayLinkBudget) -> Result<f64> {
    if budget.sigma_na2 == 0.0 {
        return Ok(1.0);
    }
    let (signal, floor) = budget.alpha_free_terms();
    let target = cfg.snr_linear();
    let headroom = signal / target - floor;
    if headroom <= 0.0 || !headroom.is_finite() {
        return Err(SkgError::UnreachableSnr {
            target_db: cfg.snr_db,
            max_db: linear_to_db(signal / floor),
        });
    }
    let alpha = (budget.p_s * budget.sigma_na2 / headroom).sqrt();
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(SkgError::InvalidConfig(format!(
            "amplification factor {alpha} is unusable"
        )));
    }
    Ok(alpha)
}

/// Least-squares estimate of a downlink from the relay's probe.
fn estimate(rng: &mut Rng, h_rev: &ComplexVector, p_probe: f64, noise: f64) -> ComplexVector {
    let amp = p_probe.sqrt();
    let n = cn(rng, noise, h_rev.len());
    h_rev.zip_with(&n, |h, w| (h * amp + w) / amp)
}

/// Runs one relay exchange with the link budget derived from `cfg`.
pub fn run_relay_exchange(
    cfg: &SessionConfig,
    channel: &RelayChannels,
    rng: &mut Rng,
) -> Result<ExchangeResult> {
    run_relay_exchange_with(cfg, &RelayLinkBudget::from_config(cfg)?, channel, rng)
}

/// Runs one relay exchange with an explicit link budget.
pub fn run_relay_exchange_with(
    cfg: &SessionConfig,
    budget: &RelayLinkBudget,
    channel: &RelayChannels,
    rng: &mut Rng,
) -> Result<ExchangeResult> {
    if cfg.scenario != Scenario::Relay {
        return Err(SkgError::Precondition(
            "relay exchange needs the relay scenario".into(),
        ));
    }
    let n = cfg.n_subcarriers;
    check_len(
        n,
        &[
            &channel.h,
            &channel.h_rev,
            &channel.g,
            &channel.g_rev,
            &channel.h_ae,
            &channel.g_be,
            &channel.f_ce,
        ],
    )?;
    let constellation = cfg.constellation()?;
    let alpha = compute_alpha(cfg, budget)?;

    // Probe broadcast and echo-path estimates.
    let (echo_a, echo_b) = match budget.estimation {
        Estimation::Perfect => (
            channel.h.hadamard(&channel.h_rev),
            channel.g.hadamard(&channel.g_rev),
        ),
        Estimation::ProbeBased => {
            let h_hat = estimate(rng, &channel.h_rev, budget.p_probe, budget.sigma_na2);
            let g_hat = estimate(rng, &channel.g_rev, budget.p_probe, budget.sigma_nb2);
            (h_hat.square(), g_hat.square())
        }
    };

    let s = draw_qam_vector(rng, &constellation, n).scale(budget.p_s.sqrt());
    let v = draw_qam_vector(rng, &constellation, n).scale(budget.p_v.sqrt());

    // Simultaneous uplink.
    let n_r = cn(rng, budget.sigma_nr2, n);
    let y_relay = s
        .hadamard(&channel.h)
        .add(&v.hadamard(&channel.g))
        .add(&n_r);

    // Amplified downlink.
    let n_3a = cn(rng, budget.sigma_na2, n);
    let n_3b = cn(rng, budget.sigma_nb2, n);
    let y_3a = y_relay.hadamard(&channel.h_rev).scale(alpha).add(&n_3a);
    let y_3b = y_relay.hadamard(&channel.g_rev).scale(alpha).add(&n_3b);

    // Echo cancellation, normalization by α, multiplication by own symbols.
    let w_alice = y_3a
        .scale(1.0 / alpha)
        .sub(&s.hadamard(&echo_a))
        .hadamard(&s);
    let w_bob = y_3b
        .scale(1.0 / alpha)
        .sub(&v.hadamard(&echo_b))
        .hadamard(&v);

    // Eve overhears both uplinks and the relay broadcast.
    let n_e5 = cn(rng, budget.sigma_ne2, n);
    let w_e1 = s
        .hadamard(&channel.h_ae)
        .add(&v.hadamard(&channel.g_be))
        .add(&n_e5);
    let n_e6 = cn(rng, budget.sigma_ne2, n);
    let e3 = y_relay.hadamard(&channel.f_ce).scale(alpha).add(&n_e6);
    let w_e2 = e3.zip_with(&channel.f_ce, |e, f| e / (f * alpha));
    let eve = EveObservations {
        proxy: w_e2.clone(),
        received: vec![w_e1, w_e2],
    };

    Ok(ExchangeResult {
        w_alice,
        w_bob,
        s,
        v,
        eve: Some(eve),
        alpha: Some(alpha),
        channel: ChannelRealization::Relay(channel.clone()),
    })
}

/// Dispatches on the realization's scenario.
pub fn run_exchange(
    cfg: &SessionConfig,
    channel: &ChannelRealization,
    rng: &mut Rng,
) -> Result<ExchangeResult> {
    match channel {
        ChannelRealization::Direct(d) => run_direct_exchange(cfg, d, rng),
        ChannelRealization::Relay(r) => run_relay_exchange(cfg, r, rng),
    }
}

/// The noiseless product term of Alice's observation.
pub fn alice_signal(result: &ExchangeResult) -> ComplexVector {
    match &result.channel {
        ChannelRealization::Direct(d) => result.s.hadamard(&result.v).hadamard(&d.h_ab_rev),
        ChannelRealization::Relay(r) => result
            .s
            .hadamard(&result.v)
            .hadamard(&r.g)
            .hadamard(&r.h_rev),
    }
}

/// Complex sample correlation `|Σ a·b*| / √(Σ|a|² Σ|b|²)`.
pub fn complex_correlation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let cross: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let pa: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let pb: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    cross.norm() / (pa * pb).sqrt()
}
