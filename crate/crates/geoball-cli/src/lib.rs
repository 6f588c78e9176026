//! Manifest parsing, analysis orchestration, and report serialization
//! behind the `geoball` command line tool.

pub mod manifest;
pub mod report;
pub mod runner;
