//! One complete key generation session.

use crate::amplify::{consistency_check, derive_key, Consistency, KeyMaterial};
use crate::bits::BitSeq;
use crate::channel::ChannelRealization;
use crate::config::SessionConfig;
use crate::error::Result;
use crate::exchange::{run_exchange, EveObservations, ExchangeResult};
use crate::quantize::{quantize, Quantized};
use crate::reconcile::{recover, sketch, ConvCode, SketchRecord};
use crate::signal::Rng;

/// Everything Alice and Bob send over the public channel.
#[derive(Clone, Debug, PartialEq)]
pub struct PublicTranscript {
    pub sketch: SketchRecord,
    pub check_alice: BitSeq,
    pub alpha: Option<f64>,
}

/// The information available to Eve: the public transcript and her own
/// observations. Eve's decoding path only ever receives this type.
#[derive(Clone, Copy, Debug)]
pub struct EveView<'a> {
    transcript: &'a PublicTranscript,
    observations: &'a EveObservations,
}

impl<'a> EveView<'a> {
    pub fn new(transcript: &'a PublicTranscript, observations: &'a EveObservations) -> Self {
        EveView {
            transcript,
            observations,
        }
    }

    pub fn transcript(&self) -> &PublicTranscript {
        self.transcript
    }

    pub fn observations(&self) -> &EveObservations {
        self.observations
    }
}

/// Eve's attempt at the session key.
#[derive(Clone, Debug, PartialEq)]
pub struct EveGuess {
    pub q: BitSeq,
    pub q_recovered: BitSeq,
    pub keys: KeyMaterial,
    /// Her key's check equals the published one.
    pub check_matches: bool,
}

/// Eve quantizes her proxy observation, applies the public sketch and hashes.
pub fn eve_guess(view: EveView<'_>, delta: u32, code: &ConvCode) -> Result<EveGuess> {
    let q = quantize(&view.observations().proxy, delta)?.bits;
    let q_recovered = recover(&view.transcript().sketch, &q, code)?;
    let keys = derive_key(&q_recovered)?;
    let check_matches = keys.check == view.transcript().check_alice;
    Ok(EveGuess {
        q,
        q_recovered,
        keys,
        check_matches,
    })
}

/// Reconciliation and privacy amplification between two quantized sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct Agreement {
    pub sketch: SketchRecord,
    /// Bob's reconstruction of Alice's sequence.
    pub q_recovered: BitSeq,
    pub alice: KeyMaterial,
    pub bob: KeyMaterial,
    pub consistency: Consistency,
}

/// Alice publishes a sketch of `q_a`; Bob reconstructs from `q_b`; both hash
/// and compare checks.
pub fn agree(q_a: &BitSeq, q_b: &BitSeq, code: &ConvCode, rng: &mut Rng) -> Result<Agreement> {
    let sketch = sketch(q_a, rng, code)?;
    let q_recovered = recover(&sketch, q_b, code)?;
    let alice = derive_key(q_a)?;
    let bob = derive_key(&q_recovered)?;
    let consistency = consistency_check(&alice.check, &bob.check)?;
    Ok(Agreement {
        sketch,
        q_recovered,
        alice,
        bob,
        consistency,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionOutcome {
    pub exchange: ExchangeResult,
    pub quantized_alice: Quantized,
    pub quantized_bob: Quantized,
    pub agreement: Agreement,
    pub transcript: PublicTranscript,
    /// `None` when the channel carries no Eve links.
    pub eve: Option<EveGuess>,
}

impl SessionOutcome {
    pub fn accepted(&self) -> bool {
        self.agreement.consistency == Consistency::Accept
    }

    pub fn q_alice(&self) -> &BitSeq {
        &self.quantized_alice.bits
    }

    pub fn q_bob(&self) -> &BitSeq {
        &self.quantized_bob.bits
    }

    pub fn key_alice(&self) -> &BitSeq {
        &self.agreement.alice.key
    }

    pub fn key_bob(&self) -> &BitSeq {
        &self.agreement.bob.key
    }
}

/// Runs exchange, quantization, reconciliation, amplification and the
/// consistency check with the standard code.
pub fn run_session(
    cfg: &SessionConfig,
    channel: &ChannelRealization,
    rng: &mut Rng,
) -> Result<SessionOutcome> {
    run_session_with(cfg, channel, &ConvCode::standard(), rng)
}

pub fn run_session_with(
    cfg: &SessionConfig,
    channel: &ChannelRealization,
    code: &ConvCode,
    rng: &mut Rng,
) -> Result<SessionOutcome> {
    let exchange = run_exchange(cfg, channel, rng)?;
    let quantized_alice = quantize(&exchange.w_alice, cfg.delta)?;
    let quantized_bob = quantize(&exchange.w_bob, cfg.delta)?;
    let agreement = agree(&quantized_alice.bits, &quantized_bob.bits, code, rng)?;
    let transcript = PublicTranscript {
        sketch: agreement.sketch.clone(),
        check_alice: agreement.alice.check.clone(),
        alpha: exchange.alpha,
    };
    let eve = match &exchange.eve {
        Some(obs) => Some(eve_guess(EveView::new(&transcript, obs), cfg.delta, code)?),
        None => None,
    };
    Ok(SessionOutcome {
        exchange,
        quantized_alice,
        quantized_bob,
        agreement,
        transcript,
        eve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channels;
    use crate::config::Scenario;

    #[test]
    fn noiseless_direct_session_accepts() {
        let mut cfg = SessionConfig::direct();
        cfg.snr_db = f64::INFINITY;
        let mut rng = Rng::seeded(4);
        let ch =
            sample_channels(&mut rng, &cfg.channel_model().unwrap(), Scenario::Direct).unwrap();
        let out = run_session(&cfg, &ch, &mut rng).unwrap();
        assert!(out.accepted());
        assert_eq!(out.key_alice(), out.key_bob());
        assert_eq!(out.q_alice().len(), 64);
        assert_eq!(out.key_alice().len(), 32);
        assert_eq!(out.agreement.alice.check.len(), 16);
        assert!(out.eve.is_some());
    }

    #[test]
    fn complementary_sequences_are_rejected() {
        let mut rng = Rng::seeded(5);
        let code = ConvCode::standard();
        let mut accepts = 0;
        for _ in 0..2000 {
            let q_a = rng.bits(64);
            let a = agree(&q_a, &q_a.not(), &code, &mut rng).unwrap();
            assert_ne!(a.q_recovered, q_a);
            accepts += (a.consistency == Consistency::Accept) as u32;
        }
        assert!(accepts <= 1);
    }

    #[test]
    fn eve_view_exposes_only_public_data() {
        // The view's fields are the transcript and Eve's observations; none
        // of the legitimate parties' sequences or keys.
        let mut cfg = SessionConfig::direct();
        cfg.snr_db = 20.0;
        let mut rng = Rng::seeded(6);
        let ch =
            sample_channels(&mut rng, &cfg.channel_model().unwrap(), Scenario::Direct).unwrap();
        let out = run_session(&cfg, &ch, &mut rng).unwrap();
        let view = EveView::new(&out.transcript, out.exchange.eve.as_ref().unwrap());
        let debug = format!("{view:?}");
        for forbidden in ["w_alice", "w_bob", "q_recovered", "key"] {
            assert!(
                !debug.contains(forbidden),
                "{forbidden} reachable from EveView"
            );
        }
        let again = eve_guess(view, cfg.delta, &ConvCode::standard()).unwrap();
        assert_eq!(Some(again), out.eve);
    }
}
