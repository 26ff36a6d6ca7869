//! Experiment harness around the W2 laboratory: configuration files,
//! experiment runners, CSV artifacts and the built-in acceptance checks.

pub mod catalog;
pub mod config;
pub mod experiments;
pub mod report;
