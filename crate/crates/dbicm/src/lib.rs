//! File formats, configuration and batch commands around `dbicm-core`.

pub mod alist;
pub mod artifact;
pub mod commands;
pub mod config;
pub mod grid;
pub mod reference;
pub mod sidecar;
pub mod workflow;
