//! Writes a channel trace, then replays it session by session in a campaign.

use skg::harness::{ChannelMode, SweepAxis};
use skg::trace::write_trace;
use skg::{run_campaign, sample_channels, CampaignConfig, Rng, Scenario, SessionConfig};

fn main() -> skg::Result<()> {
    let template = SessionConfig::direct();
    let model = template.channel_model()?;
    let mut rng = Rng::seeded(21);
    let sessions = 256;
    let realizations: Vec<_> = (0..sessions)
        .map(|_| sample_channels(&mut rng, &model, Scenario::Direct))
        .collect::<skg::Result<_>>()?;
    let path = std::env::temp_dir().join("skg_trace.csv");
    write_trace(&path, &realizations)?;

    let mut cfg = CampaignConfig::new(template).sweep(SweepAxis::SnrDb, vec![20.0]);
    cfg.trace = Some(path.clone());
    cfg.channel_mode = ChannelMode::PerSession;
    cfg.trials = 50;
    cfg.max_sessions_per_key = 4;
    let results = run_campaign(&cfg)?;
    let row = &results.rows()[0];
    println!(
        "replayed {} of {sessions} sessions from {}",
        row.sessions,
        path.display()
    );
    println!(
        "bmr_bob {:.4}, accept rate {:.3}, keys {}",
        row.bmr_bob, row.accept_rate, row.completed_keys
    );
    Ok(())
}
