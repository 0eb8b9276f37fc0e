//! One key generation session over a static direct link, showing each stage.

use skg::amplify::Consistency;
use skg::quantize::bmr;
use skg::{run_session, sample_channels, Rng, Scenario, SessionConfig};

fn main() -> skg::Result<()> {
    let cfg = SessionConfig::direct();
    let mut rng = Rng::seeded(7);
    let channel = sample_channels(&mut rng, &cfg.channel_model()?, Scenario::Direct)?;
    let out = run_session(&cfg, &channel, &mut rng)?;

    println!(
        "SNR {} dB, N = {}, {}-QAM, delta = {}",
        cfg.snr_db, cfg.n_subcarriers, cfg.qam_order, cfg.delta
    );
    println!("q_alice  {}", out.q_alice());
    println!("q_bob    {}", out.q_bob());
    println!("BMR      {:.4}", bmr(out.q_alice(), out.q_bob())?);
    println!("sketch   {}", out.transcript.sketch.ss);
    println!("key A    {}", out.key_alice());
    println!("key B    {}", out.key_bob());
    println!("check A  {}", out.agreement.alice.check);
    println!("check B  {}", out.agreement.bob.check);
    let verdict = match out.agreement.consistency {
        Consistency::Accept => "accept",
        Consistency::Reject => "reject",
    };
    println!("verdict  {verdict}");
    if let Some(eve) = &out.eve {
        let errors = eve.keys.key.hamming(out.key_alice())?;
        println!(
            "key E    {} ({errors} of {} bits differ)",
            eve.keys.key,
            eve.keys.key.len()
        );
    }
    Ok(())
}
