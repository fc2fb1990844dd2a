//! Configuration parsing, series persistence and report emission.

pub mod config;
pub mod report;
pub mod series;
