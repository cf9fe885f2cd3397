//! Runs every acceptance criterion at its full trial counts and prints one
//! line per criterion. Exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use pcoh_cli::{criterion_ids, run_criterion};
use pcoh_verify::Config;

fn main() -> ExitCode {
    let cfg = Config::default();
    let mut failed = Vec::new();
    for id in criterion_ids() {
        let start = Instant::now();
        let outcome = run_criterion(id, &cfg).expect("listed criterion");
        println!("{outcome}  [{:.1}s]", start.elapsed().as_secs_f64());
        if !outcome.passed() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criterion_ids().len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
