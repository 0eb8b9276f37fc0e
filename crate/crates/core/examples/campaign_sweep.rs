//! SNR sweep of the direct scenario, written as CSV result files.

use skg::harness::{ChannelMode, SweepAxis};
use skg::{emit_results, run_campaign, CampaignConfig, SessionConfig};

fn main() -> skg::Result<()> {
    let mut cfg = CampaignConfig::new(SessionConfig::direct())
        .sweep(SweepAxis::SnrDb, vec![0.0, 10.0, 20.0, 30.0])
        .with_seed(3);
    cfg.trials = 500;
    cfg.channel_mode = ChannelMode::PerSession;
    let out = std::env::temp_dir().join("skg_campaign_sweep");

    let results = run_campaign(&cfg)?;
    let files = emit_results(&results, &out)?;
    println!("snr_db  bmr_bob  ber_eve  accept  sessions/key");
    for row in results.rows() {
        println!(
            "{:>6}  {:>7.4}  {:>7.4}  {:>6.3}  {:>12.3}",
            row.sweep_value, row.bmr_bob, row.ber_eve, row.accept_rate, row.avg_sessions
        );
    }
    println!("metrics in {}", files.metrics.display());
    Ok(())
}
