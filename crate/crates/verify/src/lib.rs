//! Randomized acceptance suites with brute-force oracles.
//!
//! Each criterion is a set of named checks. A check records one deviation per
//! sample, oriented so that larger is worse, and fails a sample whose
//! deviation exceeds the check tolerance or is not finite. Trials run on the
//! rayon pool; trial `t` draws from a generator seeded with `seed ^ t` mixed
//! with a per-check stream, and results are merged in trial order, so the
//! outcome is independent of the thread count.

use std::fmt;

use pcoh::states::{mix_seed, seeded_rng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

mod coherence;
mod correlation;
mod gen;
mod metric;
pub mod oracle;
mod qsd;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub seed: u64,
    /// Overrides every per-check trial count; `None` keeps the suite defaults.
    pub trials: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Self { seed: 7, trials: None }
    }
}

impl Config {
    fn count(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub samples: usize,
    pub failures: usize,
    /// Largest recorded deviation; `inf` after an error or a non-finite sample.
    pub worst: f64,
    pub tolerance: f64,
    /// First library error raised by a trial, if any.
    pub error: Option<String>,
}

impl Check {
    pub fn new(label: &str, tolerance: f64) -> Self {
        Self {
            label: label.to_owned(),
            samples: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
            tolerance,
            error: None,
        }
    }

    /// Counts one sample; it fails when above the tolerance or NaN.
    pub fn record(&mut self, deviation: f64) {
        self.samples += 1;
        let d = if deviation.is_nan() { f64::INFINITY } else { deviation };
        if !(d <= self.tolerance) {
            self.failures += 1;
        }
        self.worst = self.worst.max(d);
    }

    /// Counts one failed sample carrying an error message.
    pub fn fail(&mut self, message: String) {
        self.samples += 1;
        self.failures += 1;
        self.worst = f64::INFINITY;
        self.error.get_or_insert(message);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.samples > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn samples(&self) -> usize {
        self.checks.iter().map(|c| c.samples).sum()
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<36} {} ({} samples, {} failures)",
            self.id,
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.samples(),
            self.failures()
        )?;
        for c in self.checks.iter().filter(|c| !c.passed()) {
            write!(f, "\n    {}: worst {:e} > tol {:e}", c.label, c.worst, c.tolerance)?;
            if let Some(e) = &c.error {
                write!(f, " [{e}]")?;
            }
        }
        Ok(())
    }
}

/// Accumulates the checks of one criterion.
pub(crate) struct Suite {
    id: u32,
    cfg: Config,
    checks: Vec<Check>,
}

impl Suite {
    pub(crate) fn new(id: u32, cfg: Config) -> Self {
        Self { id, cfg, checks: Vec::new() }
    }

    /// Runs `f` on `default` trials (or the configured override); each trial
    /// returns the deviations it observed.
    pub(crate) fn run<F>(&mut self, label: &str, tolerance: f64, default: usize, f: F)
    where
        F: Fn(&mut ChaCha8Rng, usize) -> pcoh::Result<Vec<f64>> + Sync,
    {
        let stream = ((self.id as u64) << 16) | self.checks.len() as u64;
        let seed = self.cfg.seed;
        let results: Vec<_> = (0..self.cfg.count(default))
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded_rng(mix_seed(seed ^ t as u64, stream));
                f(&mut rng, t)
            })
            .collect();
        let mut check = Check::new(label, tolerance);
        for (t, r) in results.into_iter().enumerate() {
            match r {
                Ok(devs) => devs.into_iter().for_each(|d| check.record(d)),
                Err(e) => check.fail(format!("trial {t}: {e}")),
            }
        }
        self.checks.push(check);
    }

    /// A deterministic check without random trials.
    pub(crate) fn single(&mut self, label: &str, tolerance: f64, f: impl FnOnce() -> pcoh::Result<Vec<f64>>) {
        let mut check = Check::new(label, tolerance);
        match f() {
            Ok(devs) => devs.into_iter().for_each(|d| check.record(d)),
            Err(e) => check.fail(e.to_string()),
        }
        self.checks.push(check);
    }

    pub(crate) fn finish(self, name: &'static str) -> Outcome {
        Outcome {
            id: self.id,
            name,
            checks: self.checks,
        }
    }
}

/// Identifiers and names of the in-process criteria.
pub const CRITERIA: [(u32, &str); 11] = [
    (1, "metric axioms"),
    (2, "strong contractibility"),
    (3, "overlap properties"),
    (4, "two-block fidelity reduction"),
    (5, "affinity closed form"),
    (6, "x-state closed form"),
    (7, "discrimination-state embedding"),
    (8, "least-square measurement identity"),
    (9, "helstrom versus scan"),
    (10, "coherence measure axioms"),
    (11, "correlated coherence"),
];

/// Runs criterion `id`; `None` for an unknown identifier.
pub fn run(id: u32, cfg: &Config) -> Option<Outcome> {
    let cfg = *cfg;
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let suite = Suite::new(id, cfg);
    let suite = match id {
        1 => metric::axioms(suite),
        2 => metric::contractibility(suite),
        3 => metric::properties(suite),
        4 => qsd::two_block_reduction(suite),
        5 => coherence::affinity_closed_form(suite),
        6 => coherence::xstate_closed_form(suite),
        7 => qsd::embedding(suite),
        8 => qsd::lsm_identity(suite),
        9 => qsd::helstrom_scan(suite),
        10 => coherence::measure_axioms(suite),
        11 => correlation::correlated(suite),
        _ => return None,
    };
    Some(suite.finish(name))
}

pub fn run_all(cfg: &Config) -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|&(id, _)| run(id, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_accounting() {
        let mut c = Check::new("x", 1e-3);
        c.record(1e-4);
        c.record(-5.0);
        assert!(c.passed());
        c.record(f64::NAN);
        assert_eq!((c.samples, c.failures), (3, 1));
        assert_eq!(c.worst, f64::INFINITY);
    }

    #[test]
    fn empty_check_does_not_pass() {
        assert!(!Check::new("x", 1.0).passed());
    }

    #[test]
    fn unknown_criterion() {
        assert!(run(99, &Config::default()).is_none());
    }

    #[test]
    fn suites_are_deterministic() {
        let cfg = Config { seed: 3, trials: Some(4) };
        assert_eq!(run(1, &cfg), run(1, &cfg));
    }
}
