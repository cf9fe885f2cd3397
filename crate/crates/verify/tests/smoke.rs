use pcoh_verify::{run, run_all, Config, CRITERIA};

#[test]
fn every_criterion_runs_with_small_counts() {
    let outcomes = run_all(&Config { seed: 21, trials: Some(2) });
    assert_eq!(outcomes.len(), CRITERIA.len());
    for o in &outcomes {
        assert!(o.samples() > 0, "{o}");
        assert!(o.passed(), "{o}");
    }
}

#[test]
fn trial_override_changes_counts_only() {
    let small = run(3, &Config { seed: 5, trials: Some(2) }).unwrap();
    let larger = run(3, &Config { seed: 5, trials: Some(4) }).unwrap();
    assert_eq!(small.checks.len(), larger.checks.len());
    assert!(larger.samples() > small.samples());
}
