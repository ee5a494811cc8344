//! Stakeholder interaction analysis for requirements-artifact repositories.
//!
//! The library is organized as a pipeline over persisted intermediate files:
//!
//! 1. [`ingest`] parses issue-tracker exports (or delimited text) into
//!    canonical participation events and applies scope filters.
//! 2. [`identity`] classifies actors by organizational affiliation and
//!    projects events onto affiliation-level stakeholders.
//! 3. [`network`] builds weighted, directed interaction networks from
//!    projected events, in per-artifact and pooled weight semantics.
//! 4. [`centrality`] computes out-degree, betweenness, closeness and
//!    eigenvector centrality over a network.
//! 5. [`influence`] assembles influence profiles, aggregated scores and
//!    rankings, and cross-compares networks.
//! 6. [`mapping`] places stakeholders into the influence/alignment
//!    quadrant matrix from scores and analyst annotations.
//!
//! [`pipeline`] wires the steps into file-based commands used by the CLI.

pub mod centrality;
pub mod error;
pub mod event;
pub mod graphio;
pub mod identity;
pub mod influence;
pub mod ingest;
pub mod mapping;
pub mod network;
pub mod pipeline;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
