//! IO companion for the liveplan engine: input bundle loading, plan and
//! metrics file formats, and the CLI commands.

pub mod bundle;
pub mod commands;
pub mod planfile;

pub use bundle::{load_bundle, BundleError};
pub use commands::{cmd_explain, cmd_generate, cmd_metrics, cmd_verify};
pub use planfile::{parse_plan, serialize_plan, PlanParseError};
