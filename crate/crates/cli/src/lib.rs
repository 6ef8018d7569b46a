//! Library surface of the orchestrator: the stages behind the `airnet`
//! subcommands, reusable by integration tests and embedding code.

pub mod error;
pub mod manifest;
pub mod run;
pub mod serve;
pub mod stages;
