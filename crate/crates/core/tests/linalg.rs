use num_complex::Complex64;
use pcoh::linalg::{
    eigh, kron, orthonormalize_columns, partial_trace, positive_part, psd_sqrt, svd, trace_norm, unitary_exp,
};
use pcoh::states::{gaussian_matrix, random_density, random_unitary, seeded_rng};
use pcoh::{ComplexMatrix64, Party};
use proptest::prelude::*;

type M = ComplexMatrix64;

fn hermitian(dim: usize, seed: u64) -> M {
    gaussian_matrix::<f64, _>(dim, dim, &mut seeded_rng(seed)).hermitian_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigh_reconstructs(dim in 2usize..=8, seed in any::<u64>()) {
        let h = hermitian(dim, seed);
        let s = eigh(&h).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&h) <= 1e-9);
        prop_assert!(s.eigenvectors.unitarity_defect() <= 1e-10);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_sqrt_squares_back(dim in 2usize..=8, rank in 1usize..=8, seed in any::<u64>()) {
        let rho = random_density::<f64>(dim, rank.min(dim), seed).unwrap();
        let r = psd_sqrt(rho.matrix()).unwrap();
        prop_assert!((&r * &r).max_abs_diff(rho.matrix()) <= 1e-9);
        prop_assert!(r.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn trace_norm_unitarily_invariant(dim in 2usize..=6, seed in any::<u64>()) {
        let m = gaussian_matrix::<f64, _>(dim, dim, &mut seeded_rng(seed));
        let u = random_unitary::<f64>(dim, seed ^ 1);
        let w = random_unitary::<f64>(dim, seed ^ 2);
        let a = trace_norm(&m).unwrap();
        let b = trace_norm(&(&(&u * &m) * &w)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn svd_reconstructs(rows in 1usize..=6, cols in 1usize..=6, seed in any::<u64>()) {
        let m = gaussian_matrix::<f64, _>(rows, cols, &mut seeded_rng(seed));
        let s = svd(&m).unwrap();
        let sigma = M::from_fn(cols, cols, |i, j| {
            if i == j { Complex64::new(s.singular_values[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let back = &(&s.u * &sigma) * &s.v.adjoint();
        prop_assert!(back.max_abs_diff(&m) <= 1e-9);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn jordan_decomposition(dim in 2usize..=8, seed in any::<u64>()) {
        let h = hermitian(dim, seed);
        let plus = positive_part(&h).unwrap().matrix;
        let minus = positive_part(&h.scale(-1.0)).unwrap().matrix;
        prop_assert!((&plus - &minus).max_abs_diff(&h) <= 1e-10);
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>()) {
        let rng = &mut seeded_rng(seed);
        let a = gaussian_matrix::<f64, _>(2, 3, rng);
        let b = gaussian_matrix::<f64, _>(3, 2, rng);
        let c = gaussian_matrix::<f64, _>(3, 2, rng);
        let d = gaussian_matrix::<f64, _>(2, 4, rng);
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn partial_traces_preserve_trace(n_a in 1usize..=4, n_b in 1usize..=4, seed in any::<u64>()) {
        let rho = random_density::<f64>(n_a * n_b, n_a * n_b, seed).unwrap();
        for keep in [Party::A, Party::B] {
            let r = partial_trace(rho.matrix(), n_a, n_b, keep).unwrap();
            prop_assert!((r.trace_re() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn exponential_is_unitary(dim in 1usize..=8, t in -10.0f64..10.0, seed in any::<u64>()) {
        let u = unitary_exp(&hermitian(dim, seed), t).unwrap();
        prop_assert!(u.unitarity_defect() <= 1e-10);
    }

    #[test]
    fn gram_schmidt_orthonormal(rows in 2usize..=8, seed in any::<u64>()) {
        let m = gaussian_matrix::<f64, _>(rows, rows, &mut seeded_rng(seed));
        let (q, _) = orthonormalize_columns(&m).unwrap();
        prop_assert!(q.unitarity_defect() <= 1e-10);
    }
}

#[test]
fn kron_examples() {
    assert_eq!(kron(&M::identity(2), &M::identity(3)), M::identity(6));
    assert_eq!(kron(&M::from_diag(&[1.0, 0.0]), &M::identity(2)), M::from_diag(&[1.0, 1.0, 0.0, 0.0]));
    let rng = &mut seeded_rng(3);
    let a = gaussian_matrix::<f64, _>(3, 3, rng);
    let b = gaussian_matrix::<f64, _>(2, 2, rng);
    assert!((kron(&a, &b).trace() - a.trace() * b.trace()).norm() <= 1e-12);
}

#[test]
fn clipping_band() {
    // eigenvalues slightly below zero are clipped, clearly negative ones rejected
    let tiny = M::from_diag(&[1.0, -1e-12]);
    assert!(psd_sqrt(&tiny).is_ok());
    assert!(psd_sqrt(&M::from_diag(&[1.0, -1e-6])).is_err());
}
