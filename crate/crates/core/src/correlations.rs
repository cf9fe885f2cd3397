//! Correlated coherence and a basis-minimized discord estimate.
//!
//! Both quantities minimize the partial coherence `C^a_X` over reference
//! bases of party `a`: correlated coherence over eigenbases of the marginal,
//! discord over all bases. Minimization uses a pattern search over Givens
//! rotations of pairs of basis vectors; `sqrt(rho)` does not depend on the
//! basis and is computed once.

use num_complex::Complex;

use crate::error::Result;
use crate::linalg::{eigh, psd_sqrt, ComplexMatrix};
use crate::metrics::Kind;
use crate::partialcoh::{affinity_value_from_root, coherence, fidelity_value_two, fidelity_weights, partial_coherence, Exactness};
use crate::qsd::{maximize_projective, refine_value, VnOptions};
use crate::scalar::{clamp_with_overshoot, Real};
use crate::states::{mix_seed, random_unitary_with, schmidt, seeded_rng, BipartiteState};

/// Marginal eigenvalues closer than this form one degenerate cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-7;
const MAX_EVALUATIONS: usize = 20_000;

/// Projective optimizer settings used inside basis searches.
fn inner_vn_options() -> VnOptions {
    VnOptions {
        restarts: 5,
        ..VnOptions::default()
    }
}

/// `C^a_X(rho) - C_X(tr_b rho)` in the state's reference basis.
pub fn gcc<T: Real>(rho: &BipartiteState<T>, kind: Kind) -> Result<T> {
    let joint = partial_coherence(rho, kind)?.value;
    let local = coherence(&rho.marginal_a(), rho.basis_a(), kind)?.value;
    let g = joint - local;
    if g < -T::tol(1e-7) {
        log::warn!("generalized correlated coherence is negative: {g}");
    }
    Ok(g)
}

/// Optimal measurement at the incumbent basis of a search, used as the
/// starting point at nearby bases.
#[derive(Clone)]
struct Warm<T: Real> {
    kept: Vec<usize>,
    ranks: Vec<usize>,
    basis: ComplexMatrix<T>,
}

/// Partial coherence as a function of the reference basis.
struct Evaluator<T: Real> {
    rho: BipartiteState<T>,
    root: ComplexMatrix<T>,
    kind: Kind,
    opts: VnOptions,
}

impl<T: Real> Evaluator<T> {
    fn new(rho: &BipartiteState<T>, kind: Kind) -> Result<Self> {
        Ok(Self {
            root: psd_sqrt(rho.matrix())?,
            rho: rho.clone(),
            kind,
            opts: inner_vn_options(),
        })
    }

    fn value(&self, basis: &ComplexMatrix<T>) -> Result<T> {
        Ok(self.evaluate(basis, None)?.0)
    }

    /// Value at `basis`. With three or more fidelity blocks the value comes
    /// from a single ascent started at `warm` when given, and from the full
    /// optimizer otherwise; either way it bounds the measure from above.
    fn evaluate(&self, basis: &ComplexMatrix<T>, warm: Option<&Warm<T>>) -> Result<(T, Option<Warm<T>>)> {
        let rebased = self.rho.rebased(basis.clone())?;
        if self.kind == Kind::Affinity {
            return Ok((affinity_value_from_root(&rebased, &self.root), None));
        }
        let (kept, weights) = fidelity_weights(&rebased, &self.root);
        if weights.len() <= 2 {
            return Ok((fidelity_value_two(&weights)?, None));
        }
        let (p, ranks, basis) = match warm.filter(|w| w.kept == kept) {
            Some(w) => {
                let (p, basis) = refine_value(&weights, &w.ranks, w.basis.clone(), &self.opts);
                (p, w.ranks.clone(), basis)
            }
            None => {
                let sol = maximize_projective(&weights, &self.opts)?;
                (sol.value, sol.certificate.ranks, sol.basis)
            }
        };
        let value = clamp_with_overshoot(T::one() - p, T::zero(), T::one()).0;
        Ok((value, Some(Warm { kept, ranks, basis })))
    }

    /// Whether a single evaluation is exact rather than an optimizer bound.
    fn is_exact(&self) -> bool {
        self.kind == Kind::Affinity || self.rho.n_a() <= 2
    }
}

/// Rotates columns `p`, `q` of `u` by `[[c, -e^{i phi} s], [e^{-i phi} s, c]]`.
fn givens<T: Real>(u: &ComplexMatrix<T>, p: usize, q: usize, theta: T, phi: T) -> ComplexMatrix<T> {
    let (s, c) = theta.sin_cos();
    let e = Complex::from_polar(T::one(), phi);
    let mut out = u.clone();
    for r in 0..u.rows() {
        let a = u[(r, p)];
        let b = u[(r, q)];
        out[(r, p)] = a * c + b * e.conj() * s;
        out[(r, q)] = b * c - a * e * s;
    }
    out
}

/// Shrinking-step coordinate search over rotations of the given pairs.
/// Optimizer-backed values are re-evaluated from scratch at the final basis.
fn pattern_search<T: Real>(
    eval: &Evaluator<T>,
    start: ComplexMatrix<T>,
    pairs: &[(usize, usize)],
    budget: &mut usize,
) -> Result<(T, ComplexMatrix<T>)> {
    let (mut best, mut warm) = eval.evaluate(&start, None)?;
    let mut basis = start;
    if pairs.is_empty() {
        return Ok((best, basis));
    }
    let half_pi = T::FRAC_PI_2();
    let mut step = T::lit(INITIAL_STEP);
    while step > T::lit(MIN_STEP) && *budget > 0 {
        let mut improved = false;
        for &(p, q) in pairs {
            for (theta, phi) in [(step, T::zero()), (-step, T::zero()), (step, half_pi), (-step, half_pi)] {
                if *budget == 0 {
                    break;
                }
                *budget -= 1;
                let cand = givens(&basis, p, q, theta, phi);
                let (v, w) = eval.evaluate(&cand, warm.as_ref())?;
                if v < best {
                    best = v;
                    basis = cand;
                    warm = w;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= T::lit(0.5);
        }
    }
    if warm.is_some() {
        best = best.min(eval.value(&basis)?);
    }
    Ok((best, basis))
}

/// Result of a basis minimization.
#[derive(Clone, Debug)]
pub struct BasisSearchReport<T: Real> {
    pub value: T,
    /// Best reference basis of `a` found, as columns.
    pub basis: ComplexMatrix<T>,
    pub exactness: Exactness,
    /// Sizes of the marginal eigenvalue clusters.
    pub clusters: Vec<usize>,
    pub evaluations: usize,
}

struct MarginalEigenbasis<T: Real> {
    vectors: ComplexMatrix<T>,
    /// Index ranges of degenerate clusters, ascending eigenvalue.
    clusters: Vec<std::ops::Range<usize>>,
}

fn marginal_eigenbasis<T: Real>(rho: &BipartiteState<T>) -> Result<MarginalEigenbasis<T>> {
    let spec = eigh(rho.marginal_a().matrix())?;
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=spec.dim() {
        if k == spec.dim() || spec.eigenvalues[k] - spec.eigenvalues[k - 1] >= T::lit(CLUSTER_GAP) {
            clusters.push(start..k);
            start = k;
        }
    }
    Ok(MarginalEigenbasis {
        vectors: spec.eigenvectors,
        clusters,
    })
}

/// Minimum of `C^a_X` over eigenbases of the marginal `tr_b rho`.
pub fn correlated_coherence<T: Real>(
    rho: &BipartiteState<T>,
    kind: Kind,
    restarts: usize,
    seed: u64,
) -> Result<BasisSearchReport<T>> {
    let eval = Evaluator::new(rho, kind)?;
    let eig = marginal_eigenbasis(rho)?;
    let sizes: Vec<usize> = eig.clusters.iter().map(|c| c.len()).collect();
    let pairs: Vec<(usize, usize)> = eig
        .clusters
        .iter()
        .flat_map(|c| c.clone().flat_map(move |p| (p + 1..c.end).map(move |q| (p, q))))
        .collect();
    if pairs.is_empty() {
        let value = eval.value(&eig.vectors)?;
        let exactness = if eval.is_exact() { Exactness::Exact } else { Exactness::UpperBound };
        return Ok(BasisSearchReport {
            value,
            basis: eig.vectors,
            exactness,
            clusters: sizes,
            evaluations: 1,
        });
    }
    let mut budget = MAX_EVALUATIONS * restarts.max(1);
    let total = budget;
    let mut best: Option<(T, ComplexMatrix<T>)> = None;
    for r in 0..restarts.max(1) {
        let start = if r == 0 {
            eig.vectors.clone()
        } else {
            let mut rng = seeded_rng(mix_seed(seed, r as u64));
            let n = eig.vectors.rows();
            let mut block = ComplexMatrix::identity(n);
            for c in &eig.clusters {
                if c.len() > 1 {
                    block.set_block(c.start, c.start, &random_unitary_with(c.len(), &mut rng));
                }
            }
            &eig.vectors * &block
        };
        let run = pattern_search(&eval, start, &pairs, &mut budget)?;
        if best.as_ref().is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let (value, basis) = best.expect("at least one restart");
    Ok(BasisSearchReport {
        value,
        basis,
        exactness: Exactness::UpperBound,
        clusters: sizes,
        evaluations: total - budget,
    })
}

/// Closed forms for pure states from the Schmidt weights: `1 - sum lambda^2`
/// (affinity) and `1 - lambda_max` (fidelity).
pub fn pure_cc<T: Real>(psi: &[Complex<T>], n_a: usize, n_b: usize, kind: Kind) -> Result<T> {
    let s = schmidt(psi, n_a, n_b)?;
    Ok(match kind {
        Kind::Affinity => T::one() - s.coefficients.iter().fold(T::zero(), |a, &l| a + l * l),
        Kind::Fidelity => T::one() - s.coefficients.first().copied().unwrap_or_else(T::one),
    })
}

/// Upper bound on the discord: minimum of `C^a_X` over all bases of `a`.
/// The search starts from the best correlated-coherence basis, the
/// computational basis and `restarts` Haar-random bases, so the estimate
/// never exceeds the correlated coherence computed with the same seed.
pub fn discord_estimate<T: Real>(
    rho: &BipartiteState<T>,
    kind: Kind,
    restarts: usize,
    seed: u64,
) -> Result<BasisSearchReport<T>> {
    let cc = correlated_coherence(rho, kind, restarts, seed)?;
    let eval = Evaluator::new(rho, kind)?;
    let n = rho.n_a();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).collect();
    let mut budget = MAX_EVALUATIONS * (restarts + 2);
    let total = budget;
    let mut starts = vec![cc.basis.clone(), ComplexMatrix::identity(n)];
    for r in 0..restarts {
        let mut rng = seeded_rng(mix_seed(seed ^ 0xD15C_0A0D, r as u64));
        starts.push(random_unitary_with(n, &mut rng));
    }
    let mut best = (cc.value, cc.basis.clone());
    for start in starts {
        let run = pattern_search(&eval, start, &pairs, &mut budget)?;
        if run.0 < best.0 {
            best = run;
        }
    }
    Ok(BasisSearchReport {
        value: best.0,
        basis: best.1,
        exactness: Exactness::UpperBound,
        clusters: cc.clusters,
        evaluations: cc.evaluations + total - budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::scalar::cplx;
    use crate::states::{random_density, random_pure_with, random_unitary, DensityMatrix};

    fn ket(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| cplx(x, 0.0)).collect()
    }

    fn bell() -> BipartiteState<f64> {
        let h = 0.5f64.sqrt();
        BipartiteState::from_pure(&ket(&[h, 0.0, 0.0, h]), 2, 2).unwrap()
    }

    fn product(seed: u64) -> BipartiteState<f64> {
        let a = random_density::<f64>(2, 2, seed).unwrap();
        let b = random_density::<f64>(3, 2, seed + 1).unwrap();
        BipartiteState::from_matrix(&kron(a.matrix(), b.matrix()), 2, 3).unwrap()
    }

    fn classical(seed: u64) -> BipartiteState<f64> {
        let u = random_unitary::<f64>(2, seed);
        let mut m = ComplexMatrix::zeros(4, 4);
        for (i, p) in [0.3, 0.7].into_iter().enumerate() {
            let alpha = ComplexMatrix::outer(&u.column(i));
            let sigma = random_density::<f64>(2, 2, seed + 10 + i as u64).unwrap();
            m += &kron(&alpha, sigma.matrix()).scale(p);
        }
        BipartiteState::from_matrix(&m, 2, 2).unwrap()
    }

    #[test]
    fn gcc_examples() {
        let p = product(3);
        assert!(gcc(&p, Kind::Affinity).unwrap().abs() < 1e-8);
        let m = ComplexMatrix::<f64>::from_diag(&[0.1, 0.2, 0.3, 0.4]);
        let pi = BipartiteState::from_matrix(&m, 2, 2).unwrap();
        for kind in Kind::ALL {
            assert!(gcc(&pi, kind).unwrap().abs() < 1e-9);
        }
        assert!((gcc(&bell(), Kind::Fidelity).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bell_values() {
        for kind in Kind::ALL {
            let cc = correlated_coherence(&bell(), kind, 4, 1).unwrap();
            assert!((cc.value - 0.5).abs() < 1e-6, "{kind}: {}", cc.value);
            let d = discord_estimate(&bell(), kind, 4, 1).unwrap();
            assert!((d.value - 0.5).abs() < 1e-6, "{kind}: {}", d.value);
            assert!(d.value <= cc.value + 1e-12);
        }
    }

    #[test]
    fn classical_states_vanish() {
        for kind in Kind::ALL {
            let s = classical(5);
            assert!(correlated_coherence(&s, kind, 2, 0).unwrap().value < 1e-9);
            assert!(discord_estimate(&s, kind, 2, 0).unwrap().value < 1e-8);
            assert!(discord_estimate(&product(8), kind, 2, 0).unwrap().value < 1e-7);
        }
    }

    #[test]
    fn pure_closed_forms() {
        let prod = ket(&[0.0, 1.0, 0.0, 0.0]);
        let s = 1.0 / 3f64.sqrt();
        let ghz3 = ket(&[s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, s]);
        let h = 0.5f64.sqrt();
        let b = ket(&[h, 0.0, 0.0, h]);
        for kind in Kind::ALL {
            assert!(pure_cc(&prod, 2, 2, kind).unwrap().abs() < 1e-12);
            assert!((pure_cc(&b, 2, 2, kind).unwrap() - 0.5).abs() < 1e-12);
            assert!((pure_cc(&ghz3, 3, 3, kind).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn optimizer_matches_pure_closed_form() {
        let mut rng = seeded_rng(3);
        for _ in 0..5 {
            let psi = random_pure_with::<f64, _>(6, &mut rng);
            let s = BipartiteState::from_pure(&psi, 2, 3).unwrap();
            for kind in Kind::ALL {
                let cc = correlated_coherence(&s, kind, 4, 0).unwrap();
                assert!((cc.value - pure_cc(&psi, 2, 3, kind).unwrap()).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn degenerate_marginal_is_searched() {
        // purification of I/2 through a random isometry on b
        let mut rng = seeded_rng(12);
        let v = crate::states::random_isometry_with::<f64, _>(3, 2, &mut rng);
        let h = 0.5f64.sqrt();
        let mut psi = vec![cplx(0.0, 0.0); 6];
        for i in 0..2 {
            for k in 0..3 {
                psi[i * 3 + k] = v[(k, i)] * h;
            }
        }
        let s = BipartiteState::from_pure(&psi, 2, 3).unwrap();
        for kind in Kind::ALL {
            let cc = correlated_coherence(&s, kind, 4, 0).unwrap();
            assert_eq!(cc.clusters, vec![2]);
            assert!((cc.value - 0.5).abs() < 1e-6);
            let d = discord_estimate(&s, kind, 4, 0).unwrap();
            assert!((cc.value - d.value).abs() < 1e-5);
        }
        let mm = BipartiteState::new(DensityMatrix::<f64>::maximally_mixed(4), 2, 2).unwrap();
        let cc = correlated_coherence(&mm, Kind::Affinity, 3, 0).unwrap();
        assert!(cc.value.abs() < 1e-12);
    }
}
