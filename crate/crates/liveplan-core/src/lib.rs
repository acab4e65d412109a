//! Deterministic generation of live-testing plans for cloud services.
//!
//! The engine turns a validated system model and test suite into an ordered
//! execution schedule: it derives test configurations from per-item coverage
//! criteria, merges call paths so configurations are deployed as few times as
//! possible, selects a test isolation method per configured instance, orders
//! the runs to minimize service relocations, and assembles the result into a
//! serializable plan. The [`oracle`] module carries independent brute-force
//! verifiers for the optimality claims the engine relies on.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `liveplan-cli` crate.

#![no_std]

extern crate alloc;

pub mod coverage;
pub mod ids;
pub mod merging;
pub mod methods;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod path;
pub mod pipeline;
pub mod plan;
pub mod runs;
pub mod validate;

pub use ids::{AppId, CiId, EnvId, FrameworkId, NodeId, SiId, TsiId};
pub use model::{Model, SystemModel};
pub use pipeline::{generate_plan, GenerateOptions, PipelineError, PipelineTrace};
pub use plan::TestPlan;
