//! Statistical properties of the full pipeline.

use skg::amplify::derive_key;
use skg::harness::{ChannelMode, SweepAxis};
use skg::{run_campaign, CampaignConfig, Rng, SessionConfig};

#[test]
fn key_bits_are_unbiased() {
    let mut rng = Rng::seeded(8);
    let draws = 1_000_000;
    let mut ones = [0u32; 32];
    for _ in 0..draws {
        let key = derive_key(&rng.bits(64)).unwrap().key;
        for (count, &b) in ones.iter_mut().zip(key.bits()) {
            *count += b as u32;
        }
    }
    for (i, &c) in ones.iter().enumerate() {
        let bias = (c as f64 / draws as f64 - 0.5).abs();
        assert!(bias <= 0.01, "bit {i}: bias {bias}");
    }
}

#[test]
fn accepted_sessions_agree() {
    let mut cfg = CampaignConfig::new(SessionConfig::direct())
        .sweep(SweepAxis::SnrDb, vec![20.0])
        .with_seed(12);
    cfg.trials = 26_500;
    cfg.channel_mode = ChannelMode::PerSession;
    cfg.bounds = false;
    let row = run_campaign(&cfg).unwrap().rows().remove(0);
    assert!(row.accepted >= 100_000, "{} accepted", row.accepted);
    assert!(
        row.false_accepts <= 10,
        "{} mismatched accepts",
        row.false_accepts
    );
    assert!(row.ber_bob <= 10.0 / (row.completed_keys as f64 * 32.0));
}

#[test]
fn bmr_falls_with_snr_in_both_scenarios() {
    for template in [SessionConfig::direct(), SessionConfig::relay()] {
        let mut cfg = CampaignConfig::new(template)
            .sweep(SweepAxis::SnrDb, vec![5.0, 15.0, 25.0])
            .with_seed(13);
        cfg.trials = 300;
        cfg.channel_mode = ChannelMode::PerSession;
        cfg.max_sessions_per_key = 4;
        cfg.bounds = false;
        let bmr: Vec<f64> = run_campaign(&cfg)
            .unwrap()
            .rows()
            .iter()
            .map(|r| r.bmr_bob)
            .collect();
        assert!(bmr[0] > bmr[1] && bmr[1] > bmr[2], "{bmr:?}");
    }
}
