//! Optimizers and formulas that share no code path with the library
//! routines they check.

use num_complex::Complex64;
use pcoh::linalg::{orthonormalize_columns, psd_sqrt, unitary_exp, ComplexMatrix};
use pcoh::states::{random_unitary_with, BipartiteState, DensityMatrix};
use pcoh::Result;
use rand::Rng;

type M = ComplexMatrix<f64>;

const ARMIJO: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-9;
const MAX_STEPS: usize = 20_000;
const MAX_STEP_LENGTH: f64 = 1e3;
const REORTHONORMALIZE: usize = 25;
/// Smallest accepted gain that continues the ascent.
const STALL: f64 = 1e-16;

/// Best `tr(W_1 Pi) + tr(W_2 (I - Pi))` over orthogonal projectors `Pi`,
/// by Riemannian gradient ascent on the unitary group from `starts` random
/// points. Start `s` fixes the rank of `Pi` to `s mod (N + 1)`.
///
/// With `U -> U exp(t [M, D])`, `M = U^dag (W_1 - W_2) U`, the step is the
/// steepest ascent direction of `Re tr(M D)`; the step length follows an
/// Armijo backtracking rule.
pub fn two_outcome_ascent<R: Rng + ?Sized>(w1: &M, w2: &M, starts: usize, rng: &mut R) -> Result<f64> {
    let n = w1.rows();
    let lambda = w1 - w2;
    let base = w2.trace_re();
    let mut best = f64::NEG_INFINITY;
    for s in 0..starts {
        let k = s % (n + 1);
        let d = M::from_diag(&(0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect::<Vec<_>>());
        let mut u = random_unitary_with::<f64, _>(n, rng);
        let value = |u: &M| u.sandwich_adj(&lambda).trace_product_re(&d);
        let mut f = value(&u);
        let mut t: f64 = 1.0;
        let mut gain;
        for step in 0..MAX_STEPS {
            if step % REORTHONORMALIZE == 0 {
                u = orthonormalize_columns(&u)?.0;
                f = value(&u);
            }
            let m = u.sandwich_adj(&lambda);
            let x = &(&m * &d) - &(&d * &m);
            let g2 = x.frobenius_norm().powi(2);
            if g2.sqrt() < GRAD_TOL {
                break;
            }
            // exp(t X) = exp(i t H) with H = -i X
            let h = x.scale_c(Complex64::new(0.0, -1.0)).hermitian_part();
            t = (2.0 * t).min(MAX_STEP_LENGTH);
            loop {
                let candidate = &u * &unitary_exp(&h, t)?;
                let fc = value(&candidate);
                if fc >= f + ARMIJO * t * g2 || t < 1e-14 {
                    gain = fc - f;
                    if fc > f {
                        u = candidate;
                        f = fc;
                    }
                    break;
                }
                t *= 0.5;
            }
            if t < 1e-14 || gain < STALL {
                break;
            }
        }
        best = best.max(base + f);
    }
    Ok(best)
}

/// `(cos(theta/2), e^{i phi} sin(theta/2))`
fn bloch_ket(theta: f64, phi: f64) -> [Complex64; 2] {
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

fn expectation(rho: &M, v: &[Complex64; 2]) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += v[i].conj() * rho[(i, j)] * v[j];
        }
    }
    s.re
}

/// Best success probability for two qubit states over all two-outcome
/// projective measurements: the trivial ones and `{|v><v|, I - |v><v|}`,
/// `v` scanned over `samples` uniform Bloch directions and refined by a
/// shrinking compass search.
pub fn qubit_scan<R: Rng + ?Sized>(
    p1: f64,
    rho1: &DensityMatrix<f64>,
    p2: f64,
    rho2: &DensityMatrix<f64>,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let (a, b) = (rho1.matrix(), rho2.matrix());
    let f = |theta: f64, phi: f64| {
        let v = bloch_ket(theta, phi);
        p1 * expectation(a, &v) + p2 * (1.0 - expectation(b, &v))
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for _ in 0..samples {
        let theta = (2.0 * rng.random::<f64>() - 1.0).acos();
        let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let v = f(theta, phi);
        if v > best.0 {
            best = (v, theta, phi);
        }
    }
    let (mut v, mut theta, mut phi) = best;
    let mut step = 0.1;
    while step > 1e-12 {
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let c = f(theta + dt, phi + dp);
            if c > v {
                (v, theta, phi) = (c, theta + dt, phi + dp);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    v.max(p1).max(p2)
}

/// `-1/2 sum_i tr([sqrt(rho), P_i]^2)`
pub fn skew_information_commutator(rho: &BipartiteState<f64>) -> Result<f64> {
    let root = psd_sqrt(rho.matrix())?;
    let mut s = 0.0;
    for i in 0..rho.n_a() {
        let p = rho.projector(i);
        let c = &(&root * &p) - &(&p * &root);
        s -= 0.5 * (&c * &c).trace().re;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcoh::states::seeded_rng;

    #[test]
    fn ascent_finds_positive_eigenspace() {
        let w1 = M::from_diag(&[0.5, 0.1, 0.0]);
        let w2 = M::from_diag(&[0.1, 0.2, 0.1]);
        let v = two_outcome_ascent(&w1, &w2, 8, &mut seeded_rng(1)).unwrap();
        assert!((v - 0.8).abs() < 1e-10, "{v}");
    }

    #[test]
    fn scan_orthogonal_pair() {
        let z = DensityMatrix::new(M::from_diag(&[1.0, 0.0])).unwrap();
        let o = DensityMatrix::new(M::from_diag(&[0.0, 1.0])).unwrap();
        let v = qubit_scan(0.5, &z, 0.5, &o, 200, &mut seeded_rng(2));
        assert!((v - 1.0).abs() < 1e-9);
        let v = qubit_scan(0.3, &z, 0.7, &z, 200, &mut seeded_rng(2));
        assert!((v - 0.7).abs() < 1e-12);
    }
}
