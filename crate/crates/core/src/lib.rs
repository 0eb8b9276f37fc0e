//! Physical-layer secret key generation from induced randomness.
//!
//! Alice and Bob each inject random QAM symbols into a static channel and
//! multiply what they receive by what they sent, turning the channel into a
//! source of fresh shared randomness per session. The pipeline quantizes
//! these observations, reconciles mismatches with a convolutional-code
//! secure sketch and hashes the result into a key and a consistency check.
//! Both a direct link and an untrusted amplify-and-forward relay are
//! modeled, together with the eavesdropper's observations, analytic attack
//! bounds and randomness tests.

pub mod amplify;
pub mod bits;
pub mod channel;
pub mod config;
pub mod error;
pub mod exchange;
pub mod harness;
pub mod quantize;
pub mod reconcile;
pub mod security;
pub mod signal;
pub mod trace;

pub use bits::BitSeq;
pub use channel::{sample_channels, ChannelRealization};
pub use config::{Estimation, Scenario, SessionConfig};
pub use error::{Result, SkgError};
pub use harness::{emit_results, run_campaign, run_session, CampaignConfig, SessionOutcome};
pub use signal::Rng;
