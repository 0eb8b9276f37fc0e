//! Session orchestration, Monte Carlo campaigns and result files.

pub mod analysis;
pub mod campaign;
pub mod report;
pub mod session;

pub use analysis::{
    direct_bound, estimate_fano_inputs, randomness_efficiency, relay_bound, FanoInputs,
};
pub use campaign::{
    run_campaign, CampaignConfig, CampaignResults, ChannelMode, MetricsRow, PointBound,
    PointResult, SweepAxis,
};
pub use report::{emit_results, empirical_cdf, format_bounds, EmittedFiles};
pub use session::{
    agree, eve_guess, run_session, run_session_with, Agreement, EveGuess, EveView,
    PublicTranscript, SessionOutcome,
};
