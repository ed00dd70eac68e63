//! Config ingestion and report schemas for the `parinv` binary, exposed as
//! a library so integration tests can re-validate emitted documents.

pub mod config;
pub mod report;
