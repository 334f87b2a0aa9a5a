//! Configuration, orchestration and reporting for verification campaigns.

pub mod campaign;
pub mod config;
pub mod report;
