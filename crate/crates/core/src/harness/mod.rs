//! Configuration, verification campaigns and report emission behind the
//! `amvp` command line tool.

pub mod campaign;
pub mod config;
pub mod output;

pub use campaign::{run_campaign, Anchor, Record, Status, VerificationReport};
pub use config::CampaignConfig;
pub use output::emit_outputs;
