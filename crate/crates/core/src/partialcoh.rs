//! Partial coherence of a bipartite state with respect to a basis of party
//! `a`, measured by fidelity or affinity distance to the nearest
//! partial-incoherent state.
//!
//! The fidelity measure reduces to discriminating the ensemble
//! `omega_i = sqrt(rho) P_i sqrt(rho) / eta_i` with projective measurements on
//! the joint space; with two outcomes this is solved exactly by the Helstrom
//! measurement. The affinity measure has a closed form in the compressions
//! `B_i = E_i^dag sqrt(rho) E_i`.

use crate::error::{Error, Result};
use crate::linalg::{eigh, positive_part, psd_sqrt, trace_norm, ComplexMatrix};
use crate::metrics::{distance, Kind};
use crate::qsd::{helstrom, maximize_projective, Certificate, VnOptions, ZERO_PRIOR};
use crate::scalar::{clamp_with_overshoot, Real};
use crate::states::{is_linearly_independent, BipartiteState, DensityMatrix, Ensemble};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoherenceMethod {
    HelstromReduction,
    VnOptimized,
    ClosedFormAffinity,
    ClosedFormXstate,
}

impl CoherenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CoherenceMethod::HelstromReduction => "helstrom_reduction",
            CoherenceMethod::VnOptimized => "vn_optimized",
            CoherenceMethod::ClosedFormAffinity => "closed_form_affinity",
            CoherenceMethod::ClosedFormXstate => "closed_form_xstate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exactness {
    Exact,
    /// The value is an upper bound on the measure.
    UpperBound,
}

impl Exactness {
    pub fn as_str(self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::UpperBound => "upper_bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoherenceReport<T: Real> {
    pub value: T,
    pub kind: Kind,
    /// Closest partial-incoherent state found.
    pub cpis: DensityMatrix<T>,
    pub method: CoherenceMethod,
    pub exactness: Exactness,
    /// `d_kind(rho, cpis)`
    pub witness_distance: T,
    pub certificate: Option<Certificate<T>>,
}

/// Discrimination task attached to a bipartite state.
#[derive(Clone, Debug)]
pub struct QsdTask<T: Real> {
    pub root: ComplexMatrix<T>,
    /// Indices `i` of party-`a` basis vectors with `eta_i >= 1e-12`.
    pub kept: Vec<usize>,
    /// `sqrt(rho) P_i sqrt(rho)` for kept `i`.
    pub weights: Vec<ComplexMatrix<T>>,
    pub ensemble: Ensemble<T>,
}

pub fn qsd_task_of<T: Real>(rho: &BipartiteState<T>) -> Result<QsdTask<T>> {
    let root = psd_sqrt(rho.matrix())?;
    qsd_task_from_root(rho, root)
}

pub(crate) fn qsd_task_from_root<T: Real>(rho: &BipartiteState<T>, root: ComplexMatrix<T>) -> Result<QsdTask<T>> {
    let total = rho.matrix().trace_re();
    let mut kept = Vec::new();
    let mut weights = Vec::new();
    let mut members = Vec::new();
    for i in 0..rho.n_a() {
        let p = rho.projector(i);
        let eta = p.trace_product_re(rho.matrix()) / total;
        if eta < T::lit(ZERO_PRIOR) {
            continue;
        }
        let w = root.sandwich(&p).hermitian_part();
        let omega = w.scale(T::one() / w.trace_re());
        kept.push(i);
        weights.push(w);
        members.push((eta, DensityMatrix::trusted(omega)));
    }
    Ok(QsdTask {
        root,
        kept,
        weights,
        ensemble: Ensemble::new(members)?,
    })
}

/// Members `(eta_i, omega_i)` with zero-weight members dropped.
pub fn qsd_ensemble_of<T: Real>(rho: &BipartiteState<T>) -> Result<Ensemble<T>> {
    Ok(qsd_task_of(rho)?.ensemble)
}

/// `sum_i P_i sqrt(rho) pi_i sqrt(rho) P_i`, normalized by its trace.
fn cpis_from_projectors<T: Real>(
    rho: &BipartiteState<T>,
    root: &ComplexMatrix<T>,
    kept: &[usize],
    projectors: &[ComplexMatrix<T>],
) -> DensityMatrix<T> {
    let d = rho.dim();
    let mut sigma = ComplexMatrix::zeros(d, d);
    for (&i, pi) in kept.iter().zip(projectors) {
        let p = rho.projector(i);
        let inner = root.sandwich(pi);
        sigma += &p.sandwich(&inner);
    }
    let tr = sigma.trace_re();
    DensityMatrix::trusted(sigma.scale(T::one() / tr))
}

fn report<T: Real>(
    rho: &BipartiteState<T>,
    kind: Kind,
    raw: T,
    cpis: DensityMatrix<T>,
    method: CoherenceMethod,
    exactness: Exactness,
    certificate: Option<Certificate<T>>,
) -> Result<CoherenceReport<T>> {
    let (value, _) = clamp_with_overshoot(raw, T::zero(), T::one());
    let witness_distance = distance(rho.state(), &cpis, kind)?;
    Ok(CoherenceReport {
        value,
        kind,
        cpis,
        method,
        exactness,
        witness_distance,
        certificate,
    })
}

pub fn fidelity_partial_coherence<T: Real>(rho: &BipartiteState<T>) -> Result<CoherenceReport<T>> {
    fidelity_partial_coherence_with(rho, &VnOptions::default())
}

/// Fidelity partial coherence; `opts` only matters when more than two
/// basis blocks carry weight.
pub fn fidelity_partial_coherence_with<T: Real>(rho: &BipartiteState<T>, opts: &VnOptions) -> Result<CoherenceReport<T>> {
    let task = qsd_task_of(rho)?;
    fidelity_from_task(rho, &task, opts)
}

pub(crate) fn fidelity_from_task<T: Real>(rho: &BipartiteState<T>, task: &QsdTask<T>, opts: &VnOptions) -> Result<CoherenceReport<T>> {
    let d = rho.dim();
    match task.kept.len() {
        1 => {
            let proj = vec![ComplexMatrix::identity(d)];
            let cpis = cpis_from_projectors(rho, &task.root, &task.kept, &proj);
            report(rho, Kind::Fidelity, T::zero(), cpis, CoherenceMethod::HelstromReduction, Exactness::Exact, None)
        }
        2 => {
            let h = helstrom(&task.ensemble)?;
            let cpis = cpis_from_projectors(rho, &task.root, &task.kept, h.measurement.effects());
            report(rho, Kind::Fidelity, h.error_prob, cpis, CoherenceMethod::HelstromReduction, Exactness::Exact, None)
        }
        _ => {
            let sol = maximize_projective(&task.weights, opts)?;
            let cpis = cpis_from_projectors(rho, &task.root, &task.kept, &sol.projectors);
            let gap = sol.certificate.dual_bound - sol.value;
            let exact = sol.certificate.converged
                && gap <= T::tol(1e-8)
                && is_linearly_independent(&task.ensemble, T::lit(1e-10))?;
            let exactness = if exact { Exactness::Exact } else { Exactness::UpperBound };
            report(
                rho,
                Kind::Fidelity,
                T::one() - sol.value,
                cpis,
                CoherenceMethod::VnOptimized,
                exactness,
                Some(sol.certificate),
            )
        }
    }
}

/// Indices and weights `sqrt(rho) P_i sqrt(rho)` of the blocks with `eta_i >= 1e-12`.
pub(crate) fn fidelity_weights<T: Real>(rho: &BipartiteState<T>, root: &ComplexMatrix<T>) -> (Vec<usize>, Vec<ComplexMatrix<T>>) {
    (0..rho.n_a())
        .map(|i| (i, root.sandwich(&rho.projector(i)).hermitian_part()))
        .filter(|(_, w)| w.trace_re() >= T::lit(ZERO_PRIOR))
        .unzip()
}

/// Value of `1 - P_S` for at most two weights, where it is exact.
pub(crate) fn fidelity_value_two<T: Real>(weights: &[ComplexMatrix<T>]) -> Result<T> {
    let value = match weights.len() {
        0 | 1 => T::zero(),
        _ => {
            let total = weights[0].trace_re() + weights[1].trace_re();
            T::lit(0.5) * (total - trace_norm(&(&weights[0] - &weights[1]))?)
        }
    };
    Ok(clamp_with_overshoot(value, T::zero(), T::one()).0)
}

/// `B_i = E_i^dag sqrt(rho) E_i` for every basis vector of `a`.
pub fn affinity_blocks<T: Real>(rho: &BipartiteState<T>, root: &ComplexMatrix<T>) -> Vec<ComplexMatrix<T>> {
    (0..rho.n_a())
        .map(|i| rho.embedding(i).sandwich_adj(root).hermitian_part())
        .collect()
}

/// `1 - sum_i tr(B_i^2)` from a precomputed `sqrt(rho)`.
pub(crate) fn affinity_value_from_root<T: Real>(rho: &BipartiteState<T>, root: &ComplexMatrix<T>) -> T {
    let s = affinity_blocks(rho, root)
        .iter()
        .fold(T::zero(), |acc, b| acc + b.trace_product_re(b));
    clamp_with_overshoot(T::one() - s, T::zero(), T::one()).0
}

pub fn affinity_partial_coherence<T: Real>(rho: &BipartiteState<T>) -> Result<CoherenceReport<T>> {
    let root = psd_sqrt(rho.matrix())?;
    let blocks = affinity_blocks(rho, &root);
    let d = rho.dim();
    let mut sigma = ComplexMatrix::zeros(d, d);
    let mut s = T::zero();
    for (i, b) in blocks.iter().enumerate() {
        let b2 = b * b;
        s += b2.trace_re();
        sigma += &rho.embedding(i).sandwich(&b2);
    }
    let cpis = DensityMatrix::trusted(sigma.scale(T::one() / s));
    report(
        rho,
        Kind::Affinity,
        T::one() - s,
        cpis,
        CoherenceMethod::ClosedFormAffinity,
        Exactness::Exact,
        None,
    )
}

pub fn partial_coherence<T: Real>(rho: &BipartiteState<T>, kind: Kind) -> Result<CoherenceReport<T>> {
    match kind {
        Kind::Fidelity => fidelity_partial_coherence(rho),
        Kind::Affinity => affinity_partial_coherence(rho),
    }
}

/// `sum_i [tr(rho P_i) - tr(sqrt(rho) P_i sqrt(rho) P_i)]`
pub fn skew_information_sum<T: Real>(rho: &BipartiteState<T>) -> Result<T> {
    let root = psd_sqrt(rho.matrix())?;
    let mut s = T::zero();
    for i in 0..rho.n_a() {
        let p = rho.projector(i);
        let rp = &root * &p;
        s += p.trace_product_re(rho.matrix()) - rp.trace_product_re(&rp);
    }
    Ok(s)
}

fn single_party<T: Real>(rho: &DensityMatrix<T>, basis: &ComplexMatrix<T>) -> Result<BipartiteState<T>> {
    BipartiteState::with_basis(rho.clone(), rho.dim(), 1, basis.clone())
}

/// Coherence of a single system: the `n_b = 1` case.
pub fn fidelity_coherence<T: Real>(rho: &DensityMatrix<T>, basis: &ComplexMatrix<T>) -> Result<CoherenceReport<T>> {
    fidelity_partial_coherence(&single_party(rho, basis)?)
}

/// `1 - sum_i <i|sqrt(rho)|i>^2`
pub fn affinity_coherence<T: Real>(rho: &DensityMatrix<T>, basis: &ComplexMatrix<T>) -> Result<CoherenceReport<T>> {
    affinity_partial_coherence(&single_party(rho, basis)?)
}

pub fn coherence<T: Real>(rho: &DensityMatrix<T>, basis: &ComplexMatrix<T>, kind: Kind) -> Result<CoherenceReport<T>> {
    match kind {
        Kind::Fidelity => fidelity_coherence(rho, basis),
        Kind::Affinity => affinity_coherence(rho, basis),
    }
}

/// Closed form for states supported on the diagonal and anti-diagonal with
/// `n_a = 2`: `(1 - sum_i sqrt((rho_ii + rho_jj)^2 - 4 |rho_ij|^2)) / 2`,
/// `j = 2n - 1 - i`.
pub fn xstate_fidelity_pc<T: Real>(rho: &BipartiteState<T>, require_invertible: bool) -> Result<CoherenceReport<T>> {
    if rho.n_a() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "closed form needs a 2 x n split, got {} x {}",
            rho.n_a(),
            rho.n_b()
        )));
    }
    let d = rho.dim();
    let m = rho.to_reference(rho.matrix());
    let zero_tol = if rho.has_computational_basis() { T::zero() } else { T::lit(1e-12) };
    for r in 0..d {
        for c in 0..d {
            if r != c && r + c != d - 1 && m[(r, c)].norm() > zero_tol {
                return Err(Error::NotXPattern { row: r, col: c });
            }
        }
    }
    if require_invertible {
        let min = eigh(rho.matrix())?.min();
        if !(min > T::lit(1e-10)) {
            return Err(Error::NotInvertible {
                min_eigenvalue: min.as_f64(),
            });
        }
    }
    let n = rho.n_b();
    let mut s = T::zero();
    for i in 0..n {
        let j = d - 1 - i;
        let sum = m[(i, i)].re + m[(j, j)].re;
        s += (sum * sum - T::lit(4.0) * m[(j, i)].norm_sqr()).max(T::zero()).sqrt();
    }
    let value = T::lit(0.5) * (T::one() - s);

    // optimal first outcome: positive support of sqrt(rho) (P_1 - P_2) sqrt(rho)
    let root = psd_sqrt(rho.matrix())?;
    let lambda = root.sandwich(&(&rho.projector(0) - &rho.projector(1)));
    let pi1 = positive_part(&lambda)?.projector;
    let pi2 = &ComplexMatrix::identity(d) - &pi1;
    let cpis = cpis_from_projectors(rho, &root, &[0, 1], &[pi1, pi2]);
    report(rho, Kind::Fidelity, value, cpis, CoherenceMethod::ClosedFormXstate, Exactness::Exact, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use crate::states::{is_partial_incoherent, random_density, random_partial_incoherent_with, seeded_rng};
    use num_complex::Complex;

    fn ket(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| cplx(x, 0.0)).collect()
    }

    fn bell() -> BipartiteState<f64> {
        let h = 0.5f64.sqrt();
        BipartiteState::from_pure(&ket(&[h, 0.0, 0.0, h]), 2, 2).unwrap()
    }

    fn plus_zero() -> BipartiteState<f64> {
        let h = 0.5f64.sqrt();
        BipartiteState::from_pure(&ket(&[h, 0.0, h, 0.0]), 2, 2).unwrap()
    }

    #[test]
    fn ensemble_examples() {
        let mm = BipartiteState::new(DensityMatrix::<f64>::maximally_mixed(6), 3, 2).unwrap();
        let e = qsd_ensemble_of(&mm).unwrap();
        assert_eq!(e.len(), 3);
        for i in 0..3 {
            assert!((e.prior(i) - 1.0 / 3.0).abs() < 1e-12);
            assert!(e.state(i).matrix().max_abs_diff(&mm.projector(i).scale(0.5)) < 1e-12);
        }

        let pi = random_partial_incoherent_with::<f64, _>(2, 3, &mut seeded_rng(4));
        let e = qsd_ensemble_of(&pi).unwrap();
        let prod = e.state(0).matrix() * e.state(1).matrix();
        assert!(prod.max_abs() < 1e-10);
        assert!(e.average().max_abs_diff(pi.matrix()) < 1e-9);

        let e = qsd_ensemble_of(&plus_zero()).unwrap();
        assert!((e.prior(0) - 0.5).abs() < 1e-12 && (e.prior(1) - 0.5).abs() < 1e-12);
        assert!(e.state(0).matrix().max_abs_diff(plus_zero().matrix()) < 1e-10);
        assert!(e.state(1).matrix().max_abs_diff(plus_zero().matrix()) < 1e-10);
    }

    #[test]
    fn zero_blocks_are_dropped() {
        let s = BipartiteState::from_pure(&ket(&[0.0, 0.0, 0.6, 0.8]), 2, 2).unwrap();
        let e = qsd_ensemble_of(&s).unwrap();
        assert_eq!(e.len(), 1);
        let r = fidelity_partial_coherence(&s).unwrap();
        assert!(r.value < 1e-12);
        assert!(r.witness_distance < 1e-9);
    }

    #[test]
    fn fidelity_examples() {
        let pi = random_partial_incoherent_with::<f64, _>(2, 3, &mut seeded_rng(9));
        assert!(fidelity_partial_coherence(&pi).unwrap().value < 1e-9);
        let b = fidelity_partial_coherence(&bell()).unwrap();
        assert!((b.value - 0.5).abs() < 1e-10);
        assert!((b.witness_distance - 0.5).abs() < 1e-8);
        let p = fidelity_partial_coherence(&plus_zero()).unwrap();
        assert!((p.value - 0.5).abs() < 1e-10);
        assert_eq!(p.exactness, Exactness::Exact);
        assert!(is_partial_incoherent(&b.cpis_state(&bell()), 1e-8));
    }

    impl CoherenceReport<f64> {
        fn cpis_state(&self, like: &BipartiteState<f64>) -> BipartiteState<f64> {
            like.with_state(self.cpis.clone()).unwrap()
        }
    }

    #[test]
    fn affinity_examples() {
        let mm = BipartiteState::new(DensityMatrix::<f64>::maximally_mixed(6), 2, 3).unwrap();
        assert!(affinity_partial_coherence(&mm).unwrap().value.abs() < 1e-12);
        let b = affinity_partial_coherence(&bell()).unwrap();
        assert!((b.value - 0.5).abs() < 1e-10);
        assert!((b.witness_distance - b.value).abs() < 1e-8);
        assert!((skew_information_sum(&bell()).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn three_block_fidelity_is_reported_consistently() {
        let rho = BipartiteState::from_matrix(random_density::<f64>(6, 6, 3).unwrap().matrix(), 3, 2).unwrap();
        let r = fidelity_partial_coherence(&rho).unwrap();
        assert_eq!(r.method, CoherenceMethod::VnOptimized);
        assert!(r.witness_distance >= r.value - 1e-8);
        if r.exactness == Exactness::Exact {
            assert!((r.witness_distance - r.value).abs() < 1e-7);
        }
        let a = affinity_partial_coherence(&rho).unwrap();
        assert!(r.value <= a.value + 1e-9);
    }

    #[test]
    fn single_system_examples() {
        let i2 = ComplexMatrix::<f64>::identity(2);
        let diag = DensityMatrix::new(ComplexMatrix::from_diag(&[0.3, 0.7])).unwrap();
        assert!(fidelity_coherence(&diag, &i2).unwrap().value < 1e-12);
        assert!(affinity_coherence(&diag, &i2).unwrap().value < 1e-12);
        let h = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&ket(&[h, h])).unwrap();
        assert!((fidelity_coherence(&plus, &i2).unwrap().value - 0.5).abs() < 1e-10);
        assert!((affinity_coherence(&plus, &i2).unwrap().value - 0.5).abs() < 1e-10);
        let zero = DensityMatrix::pure(&ket(&[1.0, 0.0])).unwrap();
        assert!(fidelity_coherence(&zero, &i2).unwrap().value < 1e-12);
        let i3 = ComplexMatrix::<f64>::identity(3);
        assert!(affinity_coherence(&DensityMatrix::maximally_mixed(3), &i3).unwrap().value.abs() < 1e-12);
    }

    fn xstate(a: f64, b: f64, c: f64, d: f64, x: f64, y: f64) -> BipartiteState<f64> {
        let m = ComplexMatrix::from_real(
            4,
            4,
            &[a, 0.0, 0.0, y, 0.0, b, x, 0.0, 0.0, x, c, 0.0, y, 0.0, 0.0, d],
        )
        .unwrap();
        BipartiteState::from_matrix(&m, 2, 2).unwrap()
    }

    #[test]
    fn xstate_examples() {
        let r = xstate_fidelity_pc(&xstate(0.25, 0.25, 0.25, 0.25, 0.0, 0.0), true).unwrap();
        assert!(r.value.abs() < 1e-12);
        let s = xstate(0.25, 0.25, 0.25, 0.25, 0.125, 0.125);
        let r = xstate_fidelity_pc(&s, true).unwrap();
        let expect = (1.0 - 3f64.sqrt() / 2.0) / 2.0;
        assert!((r.value - expect).abs() < 1e-12);
        assert!((fidelity_partial_coherence(&s).unwrap().value - expect).abs() < 1e-10);
        assert!((r.witness_distance - expect).abs() < 1e-8);
        assert!(matches!(xstate_fidelity_pc(&bell_like_non_x(), false), Err(Error::NotXPattern { .. })));
        let singular = xstate(0.5, 0.0, 0.0, 0.5, 0.0, 0.5);
        assert!(matches!(xstate_fidelity_pc(&singular, true), Err(Error::NotInvertible { .. })));
    }

    fn bell_like_non_x() -> BipartiteState<f64> {
        plus_zero()
    }
}
