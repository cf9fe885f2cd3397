//! Batch front-end for `pcoh`: JSON state documents in, JSON result
//! documents out.
//!
//! [`run_command`] takes the argument list and a [`Workspace`] for file
//! access, so every subcommand can run against the filesystem or in memory.
//! Result documents are deterministic given the arguments and input bytes;
//! only `elapsed_ms` varies between runs.

pub mod command;
pub mod document;
pub mod report;
pub mod selfcheck;

pub use command::{run_command, CommandError, Execution, FileSystem, MemoryWorkspace, Workspace};
pub use document::{parse_document, DocumentError, DocumentKind, StateDocument};
pub use report::{ResultDocument, ResultValue};

use pcoh_verify::{Config, Outcome};

/// Identifiers of every acceptance criterion, including the front-end one.
pub fn criterion_ids() -> Vec<u32> {
    let mut ids: Vec<u32> = pcoh_verify::CRITERIA.iter().map(|c| c.0).collect();
    ids.push(selfcheck::ID);
    ids
}

pub fn run_criterion(id: u32, cfg: &Config) -> Option<Outcome> {
    if id == selfcheck::ID {
        Some(selfcheck::run(cfg))
    } else {
        pcoh_verify::run(id, cfg)
    }
}
