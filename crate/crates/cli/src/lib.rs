//! Library surface behind the `critwave` binary: config schema, command
//! pipelines, and the verify suite.

pub mod config;
pub mod run;
pub mod verify;
