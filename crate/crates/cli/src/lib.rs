//! Command-line front end: CSV and JSON ingestion, calibration runs,
//! pricing, forward-skew surfaces and diagnostics.

pub mod commands;
pub mod io;
