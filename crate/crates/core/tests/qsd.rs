use num_complex::Complex64;
use pcoh::linalg::unitary_exp;
use pcoh::qsd::{helstrom, lsm, lsm_error, maximize_projective, optimal_vn_with, refine_projective, success_probability};
use pcoh::states::{gaussian_matrix, random_density_with, random_pure_with, random_unitary_with, seeded_rng};
use pcoh::{ComplexMatrix64, DensityMatrix64, Ensemble64, Error, Method, VnOptions};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type M = ComplexMatrix64;

fn random_ensemble(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Ensemble64 {
    let w: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    let members = w
        .iter()
        .map(|x| (x / s, random_density_with(d, rng.random_range(1..=d), rng).unwrap()))
        .collect();
    Ensemble64::new(members).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn helstrom_is_consistent(d in 2usize..=6, seed in any::<u64>()) {
        let e = random_ensemble(&mut seeded_rng(seed), 2, d);
        let h = helstrom(&e).unwrap();
        let best_prior = e.prior(0).max(e.prior(1));
        prop_assert!(h.success_prob >= best_prior - 1e-10);
        prop_assert!((success_probability(&e, &h.measurement).unwrap() - h.success_prob).abs() <= 1e-10);
        prop_assert!(h.measurement.completeness_defect() <= 1e-10);
        prop_assert!(lsm_error(&e).unwrap() >= h.error_prob - 1e-9);
        prop_assert_eq!(h.method, Method::HelstromExact);
    }

    #[test]
    fn lsm_is_a_povm(n in 1usize..=4, d in 1usize..=4, seed in any::<u64>()) {
        let e = random_ensemble(&mut seeded_rng(seed), n, d);
        let r = lsm(&e).unwrap();
        prop_assert!(r.measurement.completeness_defect() <= 1e-9);
        prop_assert!((r.error_prob - lsm_error(&e).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn optimal_vn_monotone_in_restarts() {
    for seed in 0..10 {
        let e = random_ensemble(&mut seeded_rng(seed), 3, 3);
        let opts = |restarts| VnOptions { restarts, seed, ..VnOptions::default() };
        let few = optimal_vn_with(&e, &opts(20)).unwrap();
        let many = optimal_vn_with(&e, &opts(40)).unwrap();
        assert!(many.success_prob >= few.success_prob - 1e-12, "seed {seed}");
        let cert = many.certificate.unwrap();
        assert!(cert.dual_bound >= many.success_prob - 1e-9);
        assert!(many.measurement.is_projective(1e-9));
    }
}

/// Best `sum_i eta_i <u_i|rho_i|u_i>` over orthonormal bases `{u_i}` of
/// `C^3`: Haar sampling followed by random-perturbation hill climbing.
fn qutrit_basis_scan(e: &Ensemble64, rng: &mut ChaCha8Rng) -> f64 {
    let value = |u: &M| (0..3).map(|i| e.prior(i) * u.sandwich_adj(e.state(i).matrix())[(i, i)].re).sum::<f64>();
    let mut pool: Vec<(f64, M)> = (0..3000)
        .map(|_| {
            let u = random_unitary_with::<f64, _>(3, rng);
            (value(&u), u)
        })
        .collect();
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = f64::NEG_INFINITY;
    for (mut f, mut u) in pool.into_iter().take(4) {
        // success-rate rule: shrink when few of a batch of moves improve
        let mut step: f64 = 0.3;
        for _ in 0..4000 {
            let mut hits = 0;
            for _ in 0..30 {
                let h = gaussian_matrix::<f64, _>(3, 3, rng).hermitian_part();
                let cand = &u * &unitary_exp(&h, step).unwrap();
                let fc = value(&cand);
                if fc > f {
                    (f, u) = (fc, cand);
                    hits += 1;
                }
            }
            step = if hits < 6 { step * 0.5 } else { (step * 1.5).min(1.0) };
            if step < 1e-9 {
                break;
            }
        }
        best = best.max(f);
    }
    best
}

#[test]
fn optimal_vn_matches_qutrit_scan() {
    for seed in 0..3 {
        let rng = &mut seeded_rng(100 + seed);
        let states: Vec<DensityMatrix64> = (0..3)
            .map(|_| DensityMatrix64::pure(&random_pure_with::<f64, _>(3, rng)).unwrap())
            .collect();
        let e = Ensemble64::uniform(states).unwrap();
        let found = optimal_vn_with(&e, &VnOptions { seed, ..VnOptions::default() }).unwrap().success_prob;
        let scan = qutrit_basis_scan(&e, rng);
        assert!((found - scan).abs() <= 1e-6, "seed {seed}: optimizer {found}, scan {scan}");
    }
}

#[test]
fn refine_keeps_or_improves() {
    let rng = &mut seeded_rng(4);
    let weights: Vec<M> = (0..3)
        .map(|_| {
            let g = gaussian_matrix::<f64, _>(4, 4, rng);
            (&g * &g.adjoint()).scale(0.1)
        })
        .collect();
    let opts = VnOptions { restarts: 3, ..VnOptions::default() };
    let best = maximize_projective(&weights, &opts).unwrap();
    let again = refine_projective(&weights, &best.certificate.ranks, best.basis.clone(), &opts).unwrap();
    assert!(again.value >= best.value - 1e-12);
    let start = random_unitary_with::<f64, _>(4, rng);
    let from_random = refine_projective(&weights, &[2, 1, 1], start, &opts).unwrap();
    assert!(from_random.value <= best.value + 1e-9 || best.certificate.ranks != vec![2, 1, 1]);
    let total: M = from_random.projectors.iter().fold(M::zeros(4, 4), |acc, p| &acc + p);
    assert!(total.max_abs_diff(&M::identity(4)) <= 1e-9);
}

#[test]
fn refine_rejects_bad_ranks() {
    let w = vec![M::identity(2), M::identity(2)];
    let opts = VnOptions::default();
    assert!(matches!(
        refine_projective(&w, &[1, 2], M::identity(2), &opts),
        Err(Error::InvalidArgument(_))
    ));
    assert!(refine_projective(&w, &[1, 1], M::identity(3), &opts).is_err());
}

#[test]
fn orthogonal_pair_is_perfectly_distinguishable() {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let e = Ensemble64::uniform(vec![
        DensityMatrix64::pure(&[o, z]).unwrap(),
        DensityMatrix64::pure(&[z, o]).unwrap(),
    ])
    .unwrap();
    assert!(helstrom(&e).unwrap().error_prob.abs() <= 1e-12);
    assert!(lsm_error(&e).unwrap().abs() <= 1e-12);
}
