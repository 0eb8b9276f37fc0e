//! Key generation through an untrusted amplify-and-forward relay, comparing
//! the relay's view with the legitimate observations.

use skg::exchange::complex_correlation;
use skg::quantize::bmr;
use skg::{run_session, sample_channels, Rng, Scenario, SessionConfig};

fn main() -> skg::Result<()> {
    let cfg = SessionConfig::relay();
    let mut rng = Rng::seeded(11);
    let mut accepted = 0;
    let mut mismatch = 0.0;
    let mut eve_bits = 0usize;
    let mut eve_errors = 0usize;
    let sessions = 200;
    for _ in 0..sessions {
        let channel = sample_channels(&mut rng, &cfg.channel_model()?, Scenario::Relay)?;
        let out = run_session(&cfg, &channel, &mut rng)?;
        accepted += out.accepted() as usize;
        mismatch += bmr(out.q_alice(), out.q_bob())?;
        if let Some(eve) = &out.eve {
            eve_errors += eve.keys.key.hamming(out.key_alice())?;
            eve_bits += eve.keys.key.len();
        }
    }
    println!(
        "{sessions} sessions at {} dB, relay uplinks at {} dB",
        cfg.snr_db, cfg.relay_snr_db
    );
    println!("accepted          {accepted}");
    println!("mean BMR          {:.4}", mismatch / sessions as f64);
    println!(
        "relay key BER     {:.4}",
        eve_errors as f64 / eve_bits as f64
    );

    let channel = sample_channels(&mut rng, &cfg.channel_model()?, Scenario::Relay)?;
    let out = run_session(&cfg, &channel, &mut rng)?;
    let eve = out
        .exchange
        .eve
        .as_ref()
        .expect("relay sessions observe the relay");
    println!(
        "alpha             {:.4}",
        out.exchange.alpha.unwrap_or(f64::NAN)
    );
    println!(
        "|corr(w_a, w_b)|  {:.3}",
        complex_correlation(
            out.exchange.w_alice.as_slice(),
            out.exchange.w_bob.as_slice()
        )
    );
    println!(
        "|corr(w_a, w_e)|  {:.3}",
        complex_correlation(out.exchange.w_alice.as_slice(), eve.proxy.as_slice())
    );
    Ok(())
}
