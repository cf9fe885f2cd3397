use std::path::Path;
use std::process::{Command, Output};

use pcoh::states::{random_density, random_unitary};
use pcoh::{BipartiteState64, DensityMatrix64, Ensemble64, KrausChannel64};
use pcoh_cli::{parse_document, ResultDocument, StateDocument};

fn pcoh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcoh"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn result(out: &Output) -> ResultDocument {
    serde_json::from_slice(&out.stdout).expect("stdout holds a result document")
}

fn write(dir: &Path, name: &str, doc: &StateDocument) {
    std::fs::write(dir.join(name), doc.to_bytes()).unwrap();
}

#[test]
fn distance_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = random_density::<f64>(3, 3, 1).unwrap();
    let b = random_density::<f64>(3, 1, 2).unwrap();
    write(dir.path(), "a.json", &StateDocument::density(&a));
    write(dir.path(), "b.json", &StateDocument::density(&b));
    let out = pcoh(dir.path(), &["distance", "--kind", "affinity", "a.json", "b.json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = result(&out);
    let expected = pcoh::metrics::distance(&a, &b, pcoh::Kind::Affinity).unwrap();
    assert_eq!(doc.real_value("distance").unwrap().to_bits(), expected.to_bits());
    assert_eq!(doc.inputs_digest.len(), 64);
    assert!(doc.elapsed_ms.is_some());
}

#[test]
fn partial_coherence_writes_cpis() {
    let dir = tempfile::tempdir().unwrap();
    let rho = BipartiteState64::new(random_density(6, 6, 3).unwrap(), 2, 3).unwrap();
    write(dir.path(), "rho.json", &StateDocument::bipartite(&rho));
    write(
        dir.path(),
        "u.json",
        &StateDocument::channel(&KrausChannel64::unitary(random_unitary(2, 4)).unwrap()),
    );
    let out = pcoh(
        dir.path(),
        &["partial-coherence", "--kind", "fidelity", "--basis", "u.json", "--out", "cpis.json", "rho.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = result(&out);
    assert_eq!(doc.diagnostics["cpis_path"], "cpis.json");
    assert_eq!(doc.exactness.as_deref(), Some("exact"));
    let cpis = parse_document(&std::fs::read(dir.path().join("cpis.json")).unwrap())
        .unwrap()
        .to_bipartite()
        .unwrap();
    assert!(pcoh::states::is_partial_incoherent(&cpis, 1e-9));
    assert!(!cpis.has_computational_basis());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), b"{not json").unwrap();
    let mut doc = StateDocument::density(&DensityMatrix64::maximally_mixed(2));
    if let pcoh_cli::document::Data::Matrix(m) = &mut doc.data {
        m[0][0][0] = 0.4;
    }
    write(dir.path(), "trace.json", &doc);
    write(dir.path(), "ok.json", &StateDocument::density(&DensityMatrix64::maximally_mixed(2)));

    let out = pcoh(dir.path(), &["distance", "bad.json", "ok.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(result(&out).diagnostics["error_kind"], "syntax");
    let out = pcoh(dir.path(), &["distance", "trace.json", "ok.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(result(&out).diagnostics["error_kind"], "validation");
    let out = pcoh(dir.path(), &["distance", "--kind", "bogus", "ok.json", "ok.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = pcoh(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("partial-coherence"));
}

#[test]
fn qsd_state_build_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let zero = DensityMatrix64::pure(&pcoh::states::basis_vector(2, 0)).unwrap();
    let mixed = DensityMatrix64::maximally_mixed(2);
    let e = Ensemble64::new(vec![(0.3, zero), (0.7, mixed)]).unwrap();
    write(dir.path(), "e.json", &StateDocument::ensemble(&e));
    let out = pcoh(dir.path(), &["qsd-state", "build", "--out", "q.json", "e.json"]);
    assert_eq!(out.status.code(), Some(0));
    let q = parse_document(&std::fs::read(dir.path().join("q.json")).unwrap()).unwrap();
    assert_eq!(q.dims, vec![2, 2]);
    let out = pcoh(dir.path(), &["qsd-state", "check", "e.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(result(&out).diagnostics["passed"], true);
}

#[test]
fn verify_reports_per_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = pcoh(dir.path(), &["verify", "--suite", "6", "--seed", "3", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().all(|l| l.starts_with("criterion  6")), "{stderr}");
    let doc = result(&out);
    assert_eq!(doc.real_value("criteria_passed"), Some(1.0));
    let again = result(&pcoh(dir.path(), &["verify", "--suite", "6", "--seed", "3", "--trials", "5"]));
    assert_eq!(doc.canonical_bytes(), again.canonical_bytes());
}
