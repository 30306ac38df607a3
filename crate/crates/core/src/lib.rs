//! Composite gender equality indices for territories.
//!
//! Raw gender-disaggregated indicators are turned into 0..100 scores that
//! combine a relative gap with a level correction, then aggregated upward
//! through sub-domains and domains with a penalized mean that punishes
//! unbalanced profiles.

pub mod cli;
pub mod data;
pub mod fixtures;
pub mod gap;
pub mod index;
pub mod io;
pub mod penalized;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod validate;
pub mod verify;
