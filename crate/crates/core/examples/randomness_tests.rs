//! Generated final keys through the statistical randomness tests.

use skg::harness::SweepAxis;
use skg::security::{nist_core_tests, NistParams};
use skg::{run_campaign, CampaignConfig, SessionConfig};

fn main() -> skg::Result<()> {
    let mut cfg = CampaignConfig::new(SessionConfig::direct()).sweep(SweepAxis::SnrDb, vec![30.0]);
    cfg.trials = 32_768;
    cfg.bounds = false;
    let bits = run_campaign(&cfg)?.keystream();
    println!("{} key bits", bits.len());
    for r in nist_core_tests(&bits, &NistParams::default()) {
        let p: Vec<String> = r.p_values.iter().map(|p| format!("{p:.4}")).collect();
        let status = match (&r.skipped, r.passed()) {
            (Some(reason), _) => format!("skipped ({reason})"),
            (None, true) => "pass".into(),
            (None, false) => "FAIL".into(),
        };
        println!("{:<24} {:<16} {status}", r.name, p.join(" "));
    }
    Ok(())
}
