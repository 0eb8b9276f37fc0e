//! Eve's success-probability bounds in both scenarios.

use skg::channel::spatial_correlation;
use skg::harness::{direct_bound, estimate_fano_inputs, relay_bound};
use skg::security::EstimatorConfig;
use skg::SessionConfig;

fn main() -> skg::Result<()> {
    let direct = SessionConfig::direct();
    for d in [0.25, 0.5, 1.0] {
        let mut cfg = direct.clone();
        cfg.eve_distance = d;
        let r = direct_bound(&cfg)?;
        println!(
            "direct d = {d} lambda: rho = {:.4}, I = {:.4} bits, guessing 2^{:.2}, hash 2^{:.2}, bound 2^{:.2}",
            spatial_correlation(d)?,
            r.mi,
            r.log2_guessing(),
            r.log2_hash(),
            r.log2_bound()
        );
    }

    let relay = SessionConfig::relay();
    let est = EstimatorConfig {
        n_samples: 50_000,
        ..EstimatorConfig::default()
    };
    let inputs = estimate_fano_inputs(&relay, &est)?;
    let r = relay_bound(&relay, &inputs)?;
    println!(
        "relay {} dB: I = {:.4} bits, H(q_a) = {:.4} bits, bound 2^{:.2}",
        relay.snr_db,
        inputs.mi.bits,
        inputs.h_q,
        r.log2_bound()
    );
    Ok(())
}
