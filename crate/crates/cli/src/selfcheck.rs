//! Front-end acceptance checks: repeatable result documents, agreement
//! with direct library calls, and bit-exact document round trips.

use num_complex::Complex64;
use pcoh::correlations::correlated_coherence;
use pcoh::metrics::distance;
use pcoh::partialcoh::affinity_partial_coherence;
use pcoh::qsd::helstrom;
use pcoh::states::{
    mix_seed, random_channel_with, random_density_with, random_pure_with, random_unitary_with, random_xstate_with,
    seeded_rng,
};
use pcoh::{BipartiteState64, DensityMatrix64, Ensemble64, Kind, KrausChannel64};
use pcoh_verify::{Check, Config, Outcome};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::command::{run_command, MemoryWorkspace, EXIT_OK, EXIT_VALIDATION};
use crate::document::{parse_document, parse_unvalidated, Data, Entry, StateDocument};
use crate::report::ResultDocument;

pub const ID: u32 = 12;
pub const NAME: &str = "cli determinism and round-trip";
const ROUNDTRIPS: usize = 200;
const RAW_ROUNDTRIPS: usize = 50;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    seeded_rng(mix_seed(seed, (u64::from(ID) << 16) | stream))
}

fn put(ws: &mut MemoryWorkspace, path: &str, doc: &StateDocument) {
    ws.files.insert(path.to_owned(), doc.to_bytes());
}

fn priors(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn ensemble(rng: &mut ChaCha8Rng, n: usize, d: usize) -> pcoh::Result<Ensemble64> {
    let p = priors(rng, n);
    let members = p
        .into_iter()
        .map(|q| Ok((q, random_density_with(d, d, rng)?)))
        .collect::<pcoh::Result<Vec<_>>>()?;
    Ensemble64::new(members)
}

fn fixtures(seed: u64) -> pcoh::Result<MemoryWorkspace> {
    let rng = &mut rng_for(seed, 0);
    let mut ws = MemoryWorkspace::default();
    put(&mut ws, "a.json", &StateDocument::density(&random_density_with(3, 3, rng)?));
    put(&mut ws, "b.json", &StateDocument::density(&random_density_with(3, 2, rng)?));
    let rho = BipartiteState64::new(random_density_with(4, 4, rng)?, 2, 2)?;
    put(&mut ws, "rho.json", &StateDocument::bipartite(&rho));
    let rho3 = BipartiteState64::new(random_density_with(6, 6, rng)?, 3, 2)?;
    put(&mut ws, "rho3.json", &StateDocument::bipartite(&rho3));
    put(&mut ws, "ens2.json", &StateDocument::ensemble(&ensemble(rng, 2, 2)?));
    put(&mut ws, "ens3.json", &StateDocument::ensemble(&ensemble(rng, 3, 2)?));
    put(&mut ws, "x.json", &StateDocument::bipartite(&random_xstate_with(3, true, rng)));
    for d in [2, 3] {
        let u = KrausChannel64::unitary(random_unitary_with(d, rng))?;
        put(&mut ws, &format!("basis{d}.json"), &StateDocument::channel(&u));
    }
    Ok(ws)
}

/// Argument lists with their expected exit codes.
fn commands() -> Vec<(Vec<&'static str>, i32)> {
    vec![
        (vec!["distance", "--kind", "fidelity", "a.json", "b.json"], EXIT_OK),
        (vec!["distance", "--kind", "affinity", "a.json", "b.json"], EXIT_OK),
        (vec!["coherence", "--kind", "fidelity", "--basis", "basis3.json", "a.json"], EXIT_OK),
        (vec!["coherence", "--kind", "affinity", "--out", "coh.json", "a.json"], EXIT_OK),
        (vec!["partial-coherence", "--kind", "affinity", "--out", "cpis.json", "rho.json"], EXIT_OK),
        (vec!["partial-coherence", "--kind", "fidelity", "--seed", "5", "rho3.json"], EXIT_OK),
        (vec!["partial-coherence", "--kind", "fidelity", "--basis", "basis2.json", "rho.json"], EXIT_OK),
        (vec!["qsd", "helstrom", "ens2.json"], EXIT_OK),
        (vec!["qsd", "lsm", "ens3.json"], EXIT_OK),
        (vec!["qsd", "optimal-vn", "--seed", "3", "--restarts", "4", "ens3.json"], EXIT_OK),
        (vec!["qsd-state", "build", "--out", "q.json", "ens3.json"], EXIT_OK),
        (vec!["qsd-state", "check", "ens2.json"], EXIT_OK),
        (vec!["xstate", "x.json"], EXIT_OK),
        (vec!["gcc", "--kind", "affinity", "rho3.json"], EXIT_OK),
        (vec!["cc", "--kind", "fidelity", "--seed", "9", "rho.json"], EXIT_OK),
        (vec!["discord", "--kind", "affinity", "--seed", "9", "--restarts", "2", "rho.json"], EXIT_OK),
        (vec!["verify", "--suite", "1", "--trials", "3", "--seed", "11"], EXIT_OK),
        (vec!["distance", "a.json", "missing.json"], EXIT_VALIDATION),
        (vec!["qsd", "helstrom", "a.json"], EXIT_VALIDATION),
    ]
}

fn run_in(ws: &MemoryWorkspace, args: &[&str]) -> (Option<ResultDocument>, i32, MemoryWorkspace) {
    let mut ws = ws.clone();
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let ex = run_command(&args, &mut ws);
    (ex.document, ex.exit_code, ws)
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn same_bits(doc: &Option<ResultDocument>, name: &str, expected: f64) -> f64 {
    let got = doc.as_ref().and_then(|d| d.real_value(name));
    flag(got.map(f64::to_bits) == Some(expected.to_bits()))
}

fn determinism(seed: u64, exit_codes: &mut Check, repeat: &mut Check) -> pcoh::Result<()> {
    let ws = fixtures(seed)?;
    for (args, expected) in commands() {
        let (d1, c1, w1) = run_in(&ws, &args);
        let (d2, c2, w2) = run_in(&ws, &args);
        exit_codes.record(flag(c1 == expected && c2 == expected));
        let bytes = |d: &Option<ResultDocument>| d.as_ref().map(ResultDocument::canonical_bytes);
        repeat.record(flag(d1.is_some() && bytes(&d1) == bytes(&d2) && w1 == w2));
    }
    Ok(())
}

fn library_agreement(seed: u64, check: &mut Check) -> pcoh::Result<()> {
    let ws = fixtures(seed)?;
    let load = |p: &str| parse_document(&ws.files[p]).expect("fixtures are valid");
    let a = load("a.json").to_density().expect("fixture");
    let b = load("b.json").to_density().expect("fixture");
    let rho = load("rho.json").to_bipartite().expect("fixture");
    let ens2 = load("ens2.json").to_ensemble().expect("fixture");

    for kind in Kind::ALL {
        let (doc, ..) = run_in(&ws, &["distance", "--kind", kind.as_str(), "a.json", "b.json"]);
        check.record(same_bits(&doc, "distance", distance(&a, &b, kind)?));
    }
    let (doc, ..) = run_in(&ws, &["partial-coherence", "--kind", "affinity", "rho.json"]);
    check.record(same_bits(&doc, "value", affinity_partial_coherence(&rho)?.value));
    let (doc, ..) = run_in(&ws, &["qsd", "helstrom", "ens2.json"]);
    check.record(same_bits(&doc, "error_prob", helstrom(&ens2)?.error_prob));
    let (doc, ..) = run_in(&ws, &["cc", "--kind", "fidelity", "--seed", "9", "--restarts", "3", "rho.json"]);
    check.record(same_bits(&doc, "value", correlated_coherence(&rho, Kind::Fidelity, 3, 9)?.value));

    let (_, _, out) = run_in(&ws, &["partial-coherence", "--kind", "affinity", "--out", "c.json", "rho.json"]);
    let written = out.files.get("c.json").map(|b| parse_document(b));
    let expected = StateDocument::bipartite(&rho.with_state(affinity_partial_coherence(&rho)?.cpis)?);
    check.record(flag(matches!(written, Some(Ok(d)) if d.bit_identical(&expected))));
    Ok(())
}

/// A valid document of a kind chosen by `t`.
fn random_document(rng: &mut ChaCha8Rng, t: usize) -> pcoh::Result<StateDocument> {
    Ok(match t % 5 {
        0 => {
            let d = rng.random_range(1..=6);
            StateDocument::density(&random_density_with(d, rng.random_range(1..=d), rng)?)
        }
        1 => {
            let (n_a, n_b) = [(2, 2), (2, 3), (3, 2), (1, 4), (4, 1)][rng.random_range(0..5)];
            let state: DensityMatrix64 = random_density_with(n_a * n_b, rng.random_range(1..=n_a * n_b), rng)?;
            let rho = if rng.random_bool(0.5) {
                BipartiteState64::with_basis(state, n_a, n_b, random_unitary_with(n_a, rng))?
            } else {
                BipartiteState64::new(state, n_a, n_b)?
            };
            StateDocument::bipartite(&rho)
        }
        2 => {
            let n = rng.random_range(1..=4);
            let d = rng.random_range(1..=4);
            StateDocument::ensemble(&ensemble(rng, n, d)?)
        }
        3 => {
            let d = rng.random_range(1..=4);
            StateDocument::channel(&random_channel_with(d, rng.random_range(1..=4), rng))
        }
        _ => {
            let (n_a, n_b) = [(2, 2), (3, 2), (2, 4)][rng.random_range(0..3)];
            let psi = random_pure_with::<f64, _>(n_a * n_b, rng);
            let split = rng.random_bool(0.5).then_some((n_a, n_b));
            StateDocument::pure(&psi, split)
        }
    })
}

fn roundtrips(cfg: &Config, check: &mut Check) {
    for t in 0..cfg.trials.unwrap_or(ROUNDTRIPS) {
        let rng = &mut rng_for(cfg.seed ^ t as u64, 1);
        let doc = match random_document(rng, t) {
            Ok(d) => d,
            Err(e) => {
                check.fail(format!("document {t}: {e}"));
                continue;
            }
        };
        let bytes = doc.to_bytes();
        match parse_document(&bytes) {
            Ok(back) => check.record(flag(back.bit_identical(&doc) && back.to_bytes() == bytes)),
            Err(e) => check.fail(format!("document {t}: {e}")),
        }
    }
}

/// Any finite double, including subnormals and signed zeros.
fn raw_double(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x = f64::from_bits(rng.random());
        if x.is_finite() {
            return x;
        }
    }
}

/// Schema-level round trips of documents whose entries are arbitrary bit
/// patterns.
fn raw_roundtrips(cfg: &Config, check: &mut Check) {
    for t in 0..cfg.trials.unwrap_or(RAW_ROUNDTRIPS) {
        let rng = &mut rng_for(cfg.seed ^ t as u64, 2);
        let d = rng.random_range(1..=4);
        let mut entry = || -> Entry { [raw_double(rng), raw_double(rng)] };
        let mut doc = StateDocument::density(&DensityMatrix64::maximally_mixed(d));
        doc.data = Data::Matrix((0..d).map(|_| (0..d).map(|_| entry()).collect()).collect());
        let bytes = doc.to_bytes();
        match parse_unvalidated(&bytes) {
            Ok(back) => check.record(flag(back.bit_identical(&doc) && back.to_bytes() == bytes)),
            Err(e) => check.fail(format!("document {t}: {e}")),
        }
    }
    let specials = [0.0, -0.0, f64::MIN_POSITIVE, 5e-324, -5e-324, f64::MAX, f64::MIN, 0.1, 1.0 / 3.0, 1e23];
    let doc = StateDocument::pure(&specials.map(|x| Complex64::new(x, -x)), None);
    let back = parse_unvalidated(&doc.to_bytes());
    check.record(flag(matches!(back, Ok(b) if b.bit_identical(&doc))));
}

pub fn run(cfg: &Config) -> Outcome {
    let mut exit_codes = Check::new("commands exit with the expected code", 0.0);
    let mut repeat = Check::new("repeated runs give identical documents", 0.0);
    let mut agree = Check::new("values equal direct library calls bit for bit", 0.0);
    let mut trips = Check::new("random state documents round-trip bit-exactly", 0.0);
    let mut raw = Check::new("arbitrary doubles round-trip bit-exactly", 0.0);
    if let Err(e) = determinism(cfg.seed, &mut exit_codes, &mut repeat) {
        exit_codes.fail(e.to_string());
    }
    if let Err(e) = library_agreement(cfg.seed, &mut agree) {
        agree.fail(e.to_string());
    }
    roundtrips(cfg, &mut trips);
    raw_roundtrips(cfg, &mut raw);
    Outcome {
        id: ID,
        name: NAME,
        checks: vec![exit_codes, repeat, agree, trips, raw],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let out = run(&Config { seed: 1, trials: Some(10) });
        assert!(out.passed(), "{out}");
    }
}
