//! Responsible-AI question bank engine: hierarchical risk questions, tiered
//! navigation, assessment sessions with risk registers, and regulation
//! compliance scoring.

pub mod answer;
pub mod assessment;
pub mod canonical;
pub mod compliance;
pub mod ingest;
pub mod model;
pub mod navigator;
pub mod reporting;
pub mod seed;

#[cfg(test)]
mod test_support;
