//! Command-line tool and `/v1` HTTP service over the question-bank engine.

pub mod app;
pub mod cli;
pub mod server;

pub use cli::run_cli;
