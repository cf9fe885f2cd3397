//! Subcommand parsing and execution.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcoh::correlations::{correlated_coherence, discord_estimate, gcc, BasisSearchReport};
use pcoh::metrics::{distance, overlap_with_diagnostics};
use pcoh::partialcoh::{affinity_partial_coherence, coherence, fidelity_partial_coherence_with, xstate_fidelity_pc};
use pcoh::qsd::{helstrom, lsm, optimal_vn_with};
use pcoh::qsdstate::{build_qsd_state, discrimination_bound_check, qsd_state_roundtrip};
use pcoh::{BipartiteState64, Certificate, ComplexMatrix64, CoherenceReport64, DiscriminationResult, Kind, VnOptions};
use serde_json::{json, Value};
use thiserror::Error;

use crate::document::{parse_document, DocumentError, StateDocument};
use crate::report::{inputs_digest, ResultDocument};

/// File access for commands; lets the same code run against the real
/// filesystem or an in-memory map.
pub trait Workspace {
    fn read(&self, path: &str) -> std::io::Result<Vec<u8>>;
    fn write(&mut self, path: &str, bytes: &[u8]) -> std::io::Result<()>;
}

pub struct FileSystem;

impl Workspace for FileSystem {
    fn read(&self, path: &str) -> std::io::Result<Vec<u8>> {
        fs::read(path)
    }

    fn write(&mut self, path: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::write(path, bytes)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MemoryWorkspace {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Workspace for MemoryWorkspace {
    fn read(&self, path: &str) -> std::io::Result<Vec<u8>> {
        self.files
            .get(path)
            .cloned()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"))
    }

    fn write(&mut self, path: &str, bytes: &[u8]) -> std::io::Result<()> {
        self.files.insert(path.to_owned(), bytes.to_vec());
        Ok(())
    }
}

pub const EXIT_OK: i32 = 0;
/// A check or verification suite reported a failure.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Library(#[from] pcoh::Error),
    #[error("cannot access '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        let lib = match self {
            CommandError::Library(e) | CommandError::Document(DocumentError::Validation(e)) => e,
            _ => return EXIT_VALIDATION,
        };
        if lib.is_validation() {
            EXIT_VALIDATION
        } else {
            EXIT_NUMERICAL
        }
    }

    fn category(&self) -> &'static str {
        match self {
            CommandError::Document(DocumentError::Syntax(_)) => "syntax",
            CommandError::Document(DocumentError::Schema { .. }) => "schema",
            CommandError::Document(DocumentError::Validation(_)) => "validation",
            CommandError::Library(e) if e.is_validation() => "validation",
            CommandError::Library(_) => "numerical",
            CommandError::Io { .. } => "io",
            CommandError::Usage(_) => "usage",
        }
    }
}

type Outcome<T> = std::result::Result<T, CommandError>;

#[derive(Parser, Debug)]
#[command(name = "pcoh", version, about = "Partial coherence and state discrimination tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Fidelity,
    Affinity,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Fidelity => Kind::Fidelity,
            KindArg::Affinity => Kind::Affinity,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct KindOpt {
    #[arg(long, value_enum, default_value_t = KindArg::Fidelity)]
    pub kind: KindArg,
}

#[derive(Args, Debug, Clone)]
pub struct SearchOpt {
    /// Random restarts of the optimizer.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct TolOpt {
    /// Absolute accuracy attached to reported values.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutOpt {
    /// Write the produced state document here instead of embedding it.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct BasisOpt {
    /// Channel document with one unitary operator whose columns form the
    /// reference basis.
    #[arg(long)]
    pub basis: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Distance 1 - X^2 between two states.
    Distance {
        #[command(flatten)]
        kind: KindOpt,
        #[command(flatten)]
        tol: TolOpt,
        a: String,
        b: String,
    },
    /// Coherence of a single system.
    Coherence {
        #[command(flatten)]
        kind: KindOpt,
        #[command(flatten)]
        search: SearchOpt,
        #[command(flatten)]
        tol: TolOpt,
        #[command(flatten)]
        basis: BasisOpt,
        #[command(flatten)]
        out: OutOpt,
        state: String,
    },
    /// Partial coherence of a bipartite state with its closest
    /// partial-incoherent state.
    PartialCoherence {
        #[command(flatten)]
        kind: KindOpt,
        #[command(flatten)]
        search: SearchOpt,
        #[command(flatten)]
        tol: TolOpt,
        #[command(flatten)]
        basis: BasisOpt,
        #[command(flatten)]
        out: OutOpt,
        state: String,
    },
    /// Minimum-error discrimination of an ensemble.
    Qsd {
        #[command(subcommand)]
        which: QsdCommand,
    },
    /// Discrimination-state embedding of an ensemble.
    QsdState {
        #[command(subcommand)]
        which: QsdStateCommand,
    },
    /// Closed-form fidelity partial coherence of a 2 x n X-state.
    Xstate {
        #[command(flatten)]
        tol: TolOpt,
        #[command(flatten)]
        basis: BasisOpt,
        #[command(flatten)]
        out: OutOpt,
        state: String,
    },
    /// Generalized correlated coherence.
    Gcc {
        #[command(flatten)]
        kind: KindOpt,
        #[command(flatten)]
        tol: TolOpt,
        #[command(flatten)]
        basis: BasisOpt,
        state: String,
    },
    /// Correlated coherence over marginal eigenbases.
    Cc {
        #[command(flatten)]
        kind: KindOpt,
        #[command(flatten)]
        search: SearchOpt,
        #[command(flatten)]
        tol: TolOpt,
        state: String,
    },
    /// Upper bound on the discord over all local bases.
    Discord {
        #[command(flatten)]
        kind: KindOpt,
        #[command(flatten)]
        search: SearchOpt,
        #[command(flatten)]
        tol: TolOpt,
        state: String,
    },
    /// Runs the acceptance suites.
    Verify {
        /// `all` or a criterion number.
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Trials per check; defaults to each suite's own count.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum QsdCommand {
    /// Exact two-member optimum.
    Helstrom {
        #[command(flatten)]
        tol: TolOpt,
        ensemble: String,
    },
    /// Least-square measurement.
    Lsm {
        #[command(flatten)]
        tol: TolOpt,
        ensemble: String,
    },
    /// Best projective measurement found by the optimizer.
    OptimalVn {
        #[command(flatten)]
        search: SearchOpt,
        #[command(flatten)]
        tol: TolOpt,
        ensemble: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum QsdStateCommand {
    /// Builds the embedding state.
    Build {
        #[command(flatten)]
        tol: TolOpt,
        #[command(flatten)]
        out: OutOpt,
        ensemble: String,
    },
    /// Checks prior recovery, spectra and the discrimination identities.
    Check {
        #[command(flatten)]
        tol: TolOpt,
        ensemble: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    One(u32),
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    if s == "all" {
        return Ok(Suite::All);
    }
    match s.parse::<u32>() {
        Ok(id) if crate::criterion_ids().contains(&id) => Ok(Suite::One(id)),
        _ => Err(format!("expected 'all' or a criterion number in 1..={}", crate::criterion_ids().len())),
    }
}

/// Result of [`run_command`]: the document for stdout (absent for help and
/// usage errors), human-readable lines for stderr, and the exit code.
#[derive(Debug)]
pub struct Execution {
    pub document: Option<ResultDocument>,
    pub log: Vec<String>,
    pub exit_code: i32,
}

/// Parses `args` (without the program name) and runs the subcommand
/// against `ws`.
pub fn run_command(args: &[String], ws: &mut dyn Workspace) -> Execution {
    let start = Instant::now();
    let cli = match Cli::try_parse_from(std::iter::once("pcoh".to_owned()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            return Execution {
                document: None,
                log: vec![e.render().to_string()],
                exit_code: code,
            };
        }
    };
    let mut ctx = Context {
        ws,
        inputs: Vec::new(),
        log: Vec::new(),
    };
    let name = command_name(&cli.command);
    let (mut doc, code) = match execute(&cli.command, &mut ctx) {
        Ok((doc, code)) => (doc, code),
        Err(e) => {
            let mut doc = ResultDocument::new(&name);
            doc.diagnostic("error", e.to_string());
            doc.diagnostic("error_kind", e.category());
            ctx.log.push(format!("error: {e}"));
            (doc, e.exit_code())
        }
    };
    doc.inputs_digest = inputs_digest(args, &ctx.inputs);
    doc.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    Execution {
        document: Some(doc),
        log: ctx.log,
        exit_code: code,
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Distance { .. } => "distance".into(),
        Command::Coherence { .. } => "coherence".into(),
        Command::PartialCoherence { .. } => "partial-coherence".into(),
        Command::Qsd { which } => match which {
            QsdCommand::Helstrom { .. } => "qsd helstrom".into(),
            QsdCommand::Lsm { .. } => "qsd lsm".into(),
            QsdCommand::OptimalVn { .. } => "qsd optimal-vn".into(),
        },
        Command::QsdState { which } => match which {
            QsdStateCommand::Build { .. } => "qsd-state build".into(),
            QsdStateCommand::Check { .. } => "qsd-state check".into(),
        },
        Command::Xstate { .. } => "xstate".into(),
        Command::Gcc { .. } => "gcc".into(),
        Command::Cc { .. } => "cc".into(),
        Command::Discord { .. } => "discord".into(),
        Command::Verify { .. } => "verify".into(),
    }
}

struct Context<'a> {
    ws: &'a mut dyn Workspace,
    inputs: Vec<(String, Vec<u8>)>,
    log: Vec<String>,
}

impl Context<'_> {
    fn load(&mut self, path: &str) -> Outcome<StateDocument> {
        let bytes = self.ws.read(path).map_err(|source| CommandError::Io {
            path: path.to_owned(),
            source,
        })?;
        self.inputs.push((path.to_owned(), bytes.clone()));
        Ok(parse_document(&bytes)?)
    }

    fn bipartite(&mut self, path: &str, basis: &BasisOpt) -> Outcome<BipartiteState64> {
        let rho = self.load(path)?.to_bipartite()?;
        Ok(match self.basis(basis)? {
            Some(u) => rho.rebased(u)?,
            None => rho,
        })
    }

    fn basis(&mut self, basis: &BasisOpt) -> Outcome<Option<ComplexMatrix64>> {
        match &basis.basis {
            Some(p) => Ok(Some(self.load(p)?.to_basis()?)),
            None => Ok(None),
        }
    }

    /// Writes `doc` to `out` when given, otherwise embeds it under `name`.
    fn artifact(&mut self, result: &mut ResultDocument, name: &str, doc: &StateDocument, out: &OutOpt) -> Outcome<()> {
        match &out.out {
            Some(path) => {
                self.ws.write(path, &doc.to_bytes()).map_err(|source| CommandError::Io {
                    path: path.clone(),
                    source,
                })?;
                result.diagnostic(&format!("{name}_path"), path.clone());
            }
            None => {
                result.diagnostic(name, serde_json::to_value(doc).expect("serializing plain data cannot fail"));
            }
        }
        Ok(())
    }
}

fn vn_options(search: &SearchOpt) -> VnOptions {
    VnOptions {
        restarts: search.restarts,
        seed: search.seed,
        ..VnOptions::default()
    }
}

fn matrix_json(m: &ComplexMatrix64) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())
            .collect(),
    )
}

fn certificate_json(c: &Certificate<f64>) -> Value {
    json!({
        "restarts": c.restarts,
        "best_restart": c.best_restart,
        "converged": c.converged,
        "compositions": c.compositions,
        "ranks": c.ranks,
        "dual_bound": c.dual_bound,
    })
}

fn coherence_result(name: &str, rep: &CoherenceReport64, tol: f64) -> ResultDocument {
    let mut doc = ResultDocument::new(name);
    doc.real("value", rep.value, tol);
    doc.real("witness_distance", rep.witness_distance, tol);
    doc.method = Some(rep.method.as_str().into());
    doc.exactness = Some(rep.exactness.as_str().into());
    doc.diagnostic("kind", rep.kind.as_str());
    if let Some(c) = &rep.certificate {
        doc.diagnostic("certificate", certificate_json(c));
    }
    doc
}

fn partial_coherence_of(rho: &BipartiteState64, kind: Kind, search: &SearchOpt) -> pcoh::Result<CoherenceReport64> {
    match kind {
        Kind::Fidelity => fidelity_partial_coherence_with(rho, &vn_options(search)),
        Kind::Affinity => affinity_partial_coherence(rho),
    }
}

fn discrimination_result(name: &str, r: &DiscriminationResult<f64>, exact: bool, tol: f64) -> ResultDocument {
    let mut doc = ResultDocument::new(name);
    doc.real("success_prob", r.success_prob, tol);
    doc.real("error_prob", r.error_prob, tol);
    doc.method = Some(r.method.as_str().into());
    doc.exactness = Some(if exact { "exact" } else { "error_upper_bound" }.into());
    if let Some(c) = &r.certificate {
        doc.diagnostic("certificate", certificate_json(c));
    }
    doc.diagnostic(
        "measurement",
        Value::Array(r.measurement.effects().iter().map(matrix_json).collect()),
    );
    doc
}

fn search_result(name: &str, rep: &BasisSearchReport<f64>, kind: Kind, tol: f64) -> ResultDocument {
    let mut doc = ResultDocument::new(name);
    doc.real("value", rep.value, tol);
    doc.method = Some("basis_search".into());
    doc.exactness = Some(rep.exactness.as_str().into());
    doc.diagnostic("kind", kind.as_str());
    doc.diagnostic("basis", matrix_json(&rep.basis));
    doc.diagnostic("clusters", json!(rep.clusters));
    doc.diagnostic("evaluations", rep.evaluations);
    doc
}

fn execute(cmd: &Command, ctx: &mut Context<'_>) -> Outcome<(ResultDocument, i32)> {
    let name = command_name(cmd);
    let doc = match cmd {
        Command::Distance { kind, tol, a, b } => {
            let kind = Kind::from(kind.kind);
            let rho = ctx.load(a)?.to_density()?;
            let sigma = ctx.load(b)?.to_density()?;
            if rho.dim() != sigma.dim() {
                return Err(CommandError::Usage(format!(
                    "states have dimensions {} and {}",
                    rho.dim(),
                    sigma.dim()
                )));
            }
            let ov = overlap_with_diagnostics(kind, &rho, &sigma)?;
            let mut doc = ResultDocument::new(&name);
            doc.real("distance", distance(&rho, &sigma, kind)?, tol.tol);
            doc.real("overlap", ov.value, tol.tol);
            doc.method = Some("closed_form".into());
            doc.exactness = Some("exact".into());
            doc.diagnostic("kind", kind.as_str());
            doc.diagnostic("overlap_raw", ov.raw);
            doc.diagnostic("clamp_overshoot", ov.overshoot);
            doc
        }
        Command::Coherence {
            kind,
            search,
            tol,
            basis,
            out,
            state,
        } => {
            let kind = Kind::from(kind.kind);
            let rho = ctx.load(state)?.to_density()?;
            let u = ctx.basis(basis)?.unwrap_or_else(|| ComplexMatrix64::identity(rho.dim()));
            let rep = match kind {
                Kind::Fidelity => {
                    fidelity_partial_coherence_with(&BipartiteState64::with_basis(rho, u.rows(), 1, u)?, &vn_options(search))?
                }
                Kind::Affinity => coherence(&rho, &u, kind)?,
            };
            let mut doc = coherence_result(&name, &rep, tol.tol);
            ctx.artifact(&mut doc, "closest_incoherent", &StateDocument::density(&rep.cpis), out)?;
            doc
        }
        Command::PartialCoherence {
            kind,
            search,
            tol,
            basis,
            out,
            state,
        } => {
            let rho = ctx.bipartite(state, basis)?;
            let rep = partial_coherence_of(&rho, kind.kind.into(), search)?;
            let mut doc = coherence_result(&name, &rep, tol.tol);
            ctx.artifact(&mut doc, "cpis", &StateDocument::bipartite(&rho.with_state(rep.cpis.clone())?), out)?;
            doc
        }
        Command::Qsd { which } => match which {
            QsdCommand::Helstrom { tol, ensemble } => {
                let e = ctx.load(ensemble)?.to_ensemble()?;
                discrimination_result(&name, &helstrom(&e)?, true, tol.tol)
            }
            QsdCommand::Lsm { tol, ensemble } => {
                let e = ctx.load(ensemble)?.to_ensemble()?;
                discrimination_result(&name, &lsm(&e)?, true, tol.tol)
            }
            QsdCommand::OptimalVn { search, tol, ensemble } => {
                let e = ctx.load(ensemble)?.to_ensemble()?;
                let r = optimal_vn_with(&e, &vn_options(search))?;
                let exact = r.method == pcoh::Method::HelstromExact;
                discrimination_result(&name, &r, exact, tol.tol)
            }
        },
        Command::QsdState { which } => match which {
            QsdStateCommand::Build { tol, out, ensemble } => {
                let e = ctx.load(ensemble)?.to_ensemble()?;
                let rho = build_qsd_state(&e)?;
                let mut doc = ResultDocument::new(&name);
                doc.real("trace", rho.matrix().trace_re(), tol.tol);
                doc.real("min_eigenvalue", rho.state().spectrum()?.min(), tol.tol);
                doc.method = Some("closed_form".into());
                doc.exactness = Some("exact".into());
                doc.diagnostic("dims", json!([rho.n_a(), rho.n_b()]));
                ctx.artifact(&mut doc, "qsd_state", &StateDocument::bipartite(&rho), out)?;
                doc
            }
            QsdStateCommand::Check { tol, ensemble } => {
                let e = ctx.load(ensemble)?.to_ensemble()?;
                let bound = discrimination_bound_check(&e)?;
                let trip = qsd_state_roundtrip(&e)?;
                let mut doc = ResultDocument::new(&name);
                doc.real("fidelity_partial_coherence", bound.fidelity_pc.value, tol.tol);
                doc.real("reference_error", bound.reference_error, tol.tol);
                doc.real("lsm_error", bound.lsm_error, tol.tol);
                doc.real("affinity_partial_coherence", bound.affinity_pc, tol.tol);
                doc.real("max_prior_error", trip.max_prior_error, tol.tol);
                doc.real("max_spectrum_error", trip.max_spectrum_error, tol.tol);
                doc.method = Some(bound.fidelity_pc.method.as_str().into());
                doc.exactness = Some(bound.fidelity_pc.exactness.as_str().into());
                doc.diagnostic("reference_method", bound.reference_method.as_str());
                doc.diagnostic("linearly_independent", bound.linearly_independent);
                doc.diagnostic("bound_holds", bound.bound_holds);
                doc.diagnostic("equality", json!(bound.equality));
                doc.diagnostic("lsm_identity_holds", bound.lsm_identity_holds);
                doc.diagnostic("roundtrip_passed", trip.passed);
                let ok = bound.bound_holds && bound.equality != Some(false) && bound.lsm_identity_holds && trip.passed;
                doc.diagnostic("passed", ok);
                return Ok((doc, if ok { EXIT_OK } else { EXIT_CHECK_FAILED }));
            }
        },
        Command::Xstate { tol, basis, out, state } => {
            let rho = ctx.bipartite(state, basis)?;
            let rep = xstate_fidelity_pc(&rho, true)?;
            let mut doc = coherence_result(&name, &rep, tol.tol);
            ctx.artifact(&mut doc, "cpis", &StateDocument::bipartite(&rho.with_state(rep.cpis.clone())?), out)?;
            doc
        }
        Command::Gcc { kind, tol, basis, state } => {
            let kind = Kind::from(kind.kind);
            let rho = ctx.bipartite(state, basis)?;
            let mut doc = ResultDocument::new(&name);
            doc.real("gcc", gcc(&rho, kind)?, tol.tol);
            doc.method = Some("difference".into());
            // the fidelity terms come from the projective optimizer beyond two blocks
            let exact = kind == Kind::Affinity || rho.n_a() <= 2;
            doc.exactness = Some(if exact { "exact" } else { "estimate" }.into());
            doc.diagnostic("kind", kind.as_str());
            doc
        }
        Command::Cc {
            kind,
            search,
            tol,
            state,
        } => {
            let kind = Kind::from(kind.kind);
            let rho = ctx.load(state)?.to_bipartite()?;
            let rep = correlated_coherence(&rho, kind, search.restarts, search.seed)?;
            search_result(&name, &rep, kind, tol.tol)
        }
        Command::Discord {
            kind,
            search,
            tol,
            state,
        } => {
            let kind = Kind::from(kind.kind);
            let rho = ctx.load(state)?.to_bipartite()?;
            let rep = discord_estimate(&rho, kind, search.restarts, search.seed)?;
            search_result(&name, &rep, kind, tol.tol)
        }
        Command::Verify { suite, seed, trials } => return Ok(verify(ctx, *suite, *seed, *trials)),
    };
    Ok((doc, EXIT_OK))
}

fn verify(ctx: &mut Context<'_>, suite: Suite, seed: u64, trials: Option<usize>) -> (ResultDocument, i32) {
    let cfg = pcoh_verify::Config { seed, trials };
    let ids = match suite {
        Suite::All => crate::criterion_ids(),
        Suite::One(id) => vec![id],
    };
    let mut doc = ResultDocument::new("verify");
    let mut listing = Vec::new();
    let mut passed = 0usize;
    for id in &ids {
        let outcome = crate::run_criterion(*id, &cfg).expect("ids come from the criterion list");
        for c in &outcome.checks {
            ctx.log.push(format!(
                "criterion {:>2}  {:<55} {} n={} failures={} worst={:e} tol={:e}",
                outcome.id,
                c.label,
                if c.passed() { "ok  " } else { "FAIL" },
                c.samples,
                c.failures,
                c.worst,
                c.tolerance
            ));
        }
        ctx.log.push(outcome.to_string());
        passed += usize::from(outcome.passed());
        listing.push(json!({
            "id": outcome.id,
            "name": outcome.name,
            "passed": outcome.passed(),
            "samples": outcome.samples(),
            "failures": outcome.failures(),
            "checks": outcome.checks.iter().map(|c| json!({
                "label": c.label,
                "passed": c.passed(),
                "samples": c.samples,
                "failures": c.failures,
                "worst": finite_or_label(c.worst),
                "tolerance": c.tolerance,
                "error": c.error,
            })).collect::<Vec<_>>(),
        }));
    }
    doc.real("criteria_passed", passed as f64, 0.0);
    doc.real("criteria_failed", (ids.len() - passed) as f64, 0.0);
    doc.method = Some("property_suites".into());
    doc.diagnostic("seed", seed);
    doc.diagnostic("trials", json!(trials));
    doc.diagnostic("criteria", Value::Array(listing));
    let code = if passed == ids.len() { EXIT_OK } else { EXIT_CHECK_FAILED };
    (doc, code)
}

/// JSON has no infinities; they are written as strings.
fn finite_or_label(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}
