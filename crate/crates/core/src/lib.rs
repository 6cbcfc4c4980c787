//! Hausdorff dimension bounds for nearest-integer continued fraction systems.

pub mod exactnum;
pub mod cf_core;
pub mod symbolic;
pub mod nicf_system;
pub mod pressure_dim;
pub mod ledger;
pub mod spectrum;
pub mod cli;
