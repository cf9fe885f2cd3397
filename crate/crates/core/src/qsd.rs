//! Minimum-error discrimination.
//!
//! Binary ensembles are solved exactly by the Helstrom measurement. Larger
//! ensembles get a lower bound on the best projective success probability
//! from [`maximize_projective`], a multi-start local ascent over orthonormal
//! bases with every split of the basis into outcome blocks of fixed ranks.
//! Each local move is an exact maximization inside the plane of two basis
//! vectors that belong to different outcomes.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{eigh, eigh2, inner, orthonormalize_columns, positive_part, psd_inv_sqrt_with_support, ComplexMatrix, SUPPORT_REL_TOL};
use crate::scalar::{clamp_with_overshoot, Real};
use crate::states::{mix_seed, random_unitary_with, seeded_rng, Ensemble};

/// Members with a smaller prior are ignored by the optimizers.
pub const ZERO_PRIOR: f64 = 1e-12;

/// Positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<T: Real> {
    effects: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Povm<T> {
    /// Checks each effect is PSD within `1e-9` and the sum is `I` within `1e-8`.
    pub fn new(effects: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, m) in effects.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::InvalidPovm(format!("effect {i} is {}x{}, expected {d}x{d}", m.rows(), m.cols())));
            }
            let min = eigh(m)?.min();
            if min < -T::tol(1e-9) {
                return Err(Error::InvalidPovm(format!("effect {i} has eigenvalue {min}")));
            }
            sum += m;
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if !(defect <= T::tol(1e-8)) {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {defect}")));
        }
        Ok(Self::trusted(effects))
    }

    fn trusted(effects: Vec<ComplexMatrix<T>>) -> Self {
        Self {
            effects: effects.into_iter().map(|m| m.hermitian_part()).collect(),
        }
    }

    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    /// `max |sum M_i - I|`
    pub fn completeness_defect(&self) -> T {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for m in &self.effects {
            sum += m;
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// True when the effects are mutually orthogonal projectors.
    pub fn is_projective(&self, tol: T) -> bool {
        self.effects.iter().enumerate().all(|(i, a)| {
            (a * a).max_abs_diff(a) <= tol
                && self.effects[i + 1..].iter().all(|b| (a * b).max_abs() <= tol)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    HelstromExact,
    VnOptimized,
    Lsm,
    Evaluated,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::HelstromExact => "helstrom_exact",
            Method::VnOptimized => "vn_optimized",
            Method::Lsm => "lsm",
            Method::Evaluated => "evaluated",
        }
    }
}

/// Optimizer metadata for [`maximize_projective`] results.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T> {
    /// Restarts per rank composition.
    pub restarts: usize,
    /// Restart index (within the best composition) that produced the optimum.
    pub best_restart: usize,
    /// Whether the winning restart met the convergence test.
    pub converged: bool,
    /// Number of rank compositions searched.
    pub compositions: usize,
    /// Projector ranks of the optimum, one per outcome.
    pub ranks: Vec<usize>,
    /// Upper bound on the optimal success over all POVMs, from a dual feasible point.
    pub dual_bound: T,
}

#[derive(Clone, Debug)]
pub struct DiscriminationResult<T: Real> {
    pub success_prob: T,
    pub error_prob: T,
    pub measurement: Povm<T>,
    pub method: Method,
    pub certificate: Option<Certificate<T>>,
}

impl<T: Real> DiscriminationResult<T> {
    fn new(success: T, measurement: Povm<T>, method: Method, certificate: Option<Certificate<T>>) -> Self {
        let (success_prob, _) = clamp_with_overshoot(success, T::zero(), T::one());
        Self {
            success_prob,
            error_prob: T::one() - success_prob,
            measurement,
            method,
            certificate,
        }
    }
}

/// `sum_i eta_i tr(M_i rho_i)`
pub fn success_probability<T: Real>(e: &Ensemble<T>, m: &Povm<T>) -> Result<T> {
    if m.len() != e.len() {
        return Err(Error::CountMismatch {
            effects: m.len(),
            members: e.len(),
        });
    }
    if m.dim() != e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional POVM for {}-dimensional states",
            m.dim(),
            e.dim()
        )));
    }
    Ok(e
        .members()
        .iter()
        .zip(m.effects())
        .fold(T::zero(), |acc, ((p, rho), eff)| acc + *p * eff.trace_product_re(rho.matrix())))
}

/// Exact optimum for two members: `P_S = (1 + tr|Lambda|) / 2` with
/// `Lambda = eta_1 rho_1 - eta_2 rho_2`.
pub fn helstrom<T: Real>(e: &Ensemble<T>) -> Result<DiscriminationResult<T>> {
    if e.len() != 2 {
        return Err(Error::WrongMemberCount {
            expected: 2,
            found: e.len(),
        });
    }
    let lambda = &e.weighted(0) - &e.weighted(1);
    let pp = positive_part(&lambda)?;
    let abs_sum = pp.spectrum.eigenvalues.iter().fold(T::zero(), |a, l| a + l.abs());
    let success = T::lit(0.5) * (e.prior(0) + e.prior(1) + abs_sum);
    let complement = &ComplexMatrix::identity(e.dim()) - &pp.projector;
    let measurement = Povm::trusted(vec![pp.projector, complement]);
    Ok(DiscriminationResult::new(success, measurement, Method::HelstromExact, None))
}

/// Least-square measurement `M_i = eta_i R rho_i R`, `R = rho_out^{-1/2}` on
/// the support of `rho_out = sum_i eta_i rho_i`; the kernel projector is
/// added to the first effect.
pub fn lsm_povm<T: Real>(e: &Ensemble<T>) -> Result<Povm<T>> {
    let (r, support) = psd_inv_sqrt_with_support(&e.average(), T::lit(SUPPORT_REL_TOL))?;
    let mut effects: Vec<ComplexMatrix<T>> = (0..e.len()).map(|i| r.sandwich(&e.weighted(i))).collect();
    let kernel = &ComplexMatrix::identity(e.dim()) - &support;
    effects[0] += &kernel;
    Ok(Povm::trusted(effects))
}

pub fn lsm_error<T: Real>(e: &Ensemble<T>) -> Result<T> {
    let p = success_probability(e, &lsm_povm(e)?)?;
    Ok(clamp_with_overshoot(T::one() - p, T::zero(), T::one()).0)
}

pub fn lsm<T: Real>(e: &Ensemble<T>) -> Result<DiscriminationResult<T>> {
    let m = lsm_povm(e)?;
    let p = success_probability(e, &m)?;
    Ok(DiscriminationResult::new(p, m, Method::Lsm, None))
}

/// Evaluates a caller-supplied POVM.
pub fn evaluate<T: Real>(e: &Ensemble<T>, m: Povm<T>) -> Result<DiscriminationResult<T>> {
    let p = success_probability(e, &m)?;
    Ok(DiscriminationResult::new(p, m, Method::Evaluated, None))
}

/// Settings for the projective optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct VnOptions {
    /// Random starts per rank composition.
    pub restarts: usize,
    pub seed: u64,
    /// Enumerate all rank compositions up to this dimension.
    pub enumeration_cap: usize,
    pub max_sweeps: usize,
    /// Total improvement over the trailing window that counts as converged.
    pub tolerance: f64,
    /// Minimum length of the trailing window, in moves.
    pub window: usize,
}

impl Default for VnOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            enumeration_cap: 8,
            max_sweeps: 2000,
            tolerance: 1e-10,
            window: 50,
        }
    }
}

/// Best projective measurement found by [`maximize_projective`].
#[derive(Clone, Debug)]
pub struct VnSolution<T: Real> {
    /// `sum_i tr(pi_i W_i)`
    pub value: T,
    pub projectors: Vec<ComplexMatrix<T>>,
    /// Orthonormal columns spanning the projectors, grouped by block in
    /// order of `certificate.ranks`.
    pub basis: ComplexMatrix<T>,
    pub certificate: Certificate<T>,
}

/// Maximizes `sum_i tr(pi_i W_i)` over complete families of orthogonal
/// projectors, one per Hermitian `W_i`, with free ranks.
pub fn maximize_projective<T: Real>(weights: &[ComplexMatrix<T>], opts: &VnOptions) -> Result<VnSolution<T>> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let d = weights[0].rows();
    for w in weights {
        if w.rows() != d || w.cols() != d {
            return Err(Error::DimensionMismatch("weight operators of different shapes".into()));
        }
    }
    let weights: Vec<ComplexMatrix<T>> = weights.iter().map(|w| w.hermitian_part()).collect();
    let restarts = opts.restarts.max(1);

    let (compositions, warm) = if d <= opts.enumeration_cap {
        (compositions(d, n), None)
    } else {
        let (ranks, basis) = warm_start(&weights)?;
        (vec![ranks], basis)
    };

    let mut best: Option<(T, ComplexMatrix<T>, usize, usize, bool)> = None;
    for (ci, ranks) in compositions.iter().enumerate() {
        let blocks = block_labels(ranks);
        for r in 0..restarts {
            let start = match (&warm, r) {
                (Some(u), 0) => u.clone(),
                _ => random_unitary_with(d, &mut seeded_rng(mix_seed(mix_seed(opts.seed, ci as u64), r as u64))),
            };
            let run = ascend(&weights, &blocks, start, opts);
            if best.as_ref().is_none_or(|b| run.0 > b.0) {
                best = Some((run.0, run.1, ci, r, run.2));
            }
        }
    }
    let (value, basis, ci, r, converged) = best.expect("at least one composition");
    let mut sol = solution(&weights, compositions[ci].clone(), value, basis, converged)?;
    sol.certificate.restarts = restarts;
    sol.certificate.best_restart = r;
    sol.certificate.compositions = compositions.len();
    Ok(sol)
}

/// One ascent from `start` with fixed ranks; the columns of `start` are
/// grouped by block in order of `ranks`.
pub fn refine_projective<T: Real>(
    weights: &[ComplexMatrix<T>],
    ranks: &[usize],
    start: ComplexMatrix<T>,
    opts: &VnOptions,
) -> Result<VnSolution<T>> {
    let d = start.ensure_square()?;
    if ranks.len() != weights.len() || ranks.iter().sum::<usize>() != d {
        return Err(Error::InvalidArgument(format!(
            "ranks {ranks:?} do not partition dimension {d} over {} blocks",
            weights.len()
        )));
    }
    if weights.iter().any(|w| w.rows() != d || w.cols() != d) {
        return Err(Error::DimensionMismatch("weight operators and start basis differ in shape".into()));
    }
    let weights: Vec<ComplexMatrix<T>> = weights.iter().map(|w| w.hermitian_part()).collect();
    let (value, basis, converged) = ascend(&weights, &block_labels(ranks), start, opts);
    solution(&weights, ranks.to_vec(), value, basis, converged)
}

/// [`refine_projective`] without the dual bound, for Hermitian weights.
pub(crate) fn refine_value<T: Real>(
    weights: &[ComplexMatrix<T>],
    ranks: &[usize],
    start: ComplexMatrix<T>,
    opts: &VnOptions,
) -> (T, ComplexMatrix<T>) {
    let (value, basis, _) = ascend(weights, &block_labels(ranks), start, opts);
    (value, basis)
}

fn solution<T: Real>(
    weights: &[ComplexMatrix<T>],
    ranks: Vec<usize>,
    value: T,
    basis: ComplexMatrix<T>,
    converged: bool,
) -> Result<VnSolution<T>> {
    let blocks = block_labels(&ranks);
    let projectors: Vec<ComplexMatrix<T>> = (0..weights.len())
        .map(|i| {
            let cols: Vec<usize> = (0..blocks.len()).filter(|&k| blocks[k] == i).collect();
            let v = basis.columns(&cols);
            &v * &v.adjoint()
        })
        .collect();
    let dual_bound = dual_bound(weights, &projectors)?;
    Ok(VnSolution {
        value,
        projectors,
        basis,
        certificate: Certificate {
            restarts: 1,
            best_restart: 0,
            converged,
            compositions: 1,
            ranks,
            dual_bound,
        },
    })
}

/// All `n`-tuples of nonnegative ranks summing to `d`, lexicographic.
fn compositions(d: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for r in (0..=left).rev() {
            cur.push(r);
            rec(left - r, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, n, &mut Vec::with_capacity(n), &mut out);
    out
}

fn block_labels(ranks: &[usize]) -> Vec<usize> {
    ranks
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| std::iter::repeat_n(i, r))
        .collect()
}

/// Ranks and basis from the leading eigenvectors of the least-square
/// effects `R W_i R`.
fn warm_start<T: Real>(weights: &[ComplexMatrix<T>]) -> Result<(Vec<usize>, Option<ComplexMatrix<T>>)> {
    let d = weights[0].rows();
    let mut total = ComplexMatrix::zeros(d, d);
    for w in weights {
        total += w;
    }
    let (r, _) = psd_inv_sqrt_with_support(&total, T::lit(SUPPORT_REL_TOL))?;
    let mut modes: Vec<(T, usize, Vec<num_complex::Complex<T>>)> = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let spec = eigh(&r.sandwich(w))?;
        for k in 0..d {
            modes.push((spec.eigenvalues[k], i, spec.vector(k)));
        }
    }
    // zero modes of one effect span the supports of the others
    let top = modes.iter().fold(T::zero(), |a, m| a.max(m.0));
    modes.retain(|m| m.0 > T::lit(SUPPORT_REL_TOL) * top);
    modes.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
    modes.truncate(d);
    modes.sort_by_key(|m| m.1);
    let mut ranks = vec![0; weights.len()];
    for m in &modes {
        ranks[m.1] += 1;
    }
    let Ok((q, _)) = orthonormalize_columns(&ComplexMatrix::from_fn(d, modes.len(), |row, col| modes[col].2[row])) else {
        ranks[0] += d - modes.len();
        return Ok((ranks, None));
    };
    // the complement of the supports joins the first block
    let missing = d - modes.len();
    let mut basis = ComplexMatrix::zeros(d, d);
    if missing > 0 {
        let complement = eigh(&(&ComplexMatrix::identity(d) - &(&q * &q.adjoint())))?;
        for c in 0..missing {
            basis.set_column(c, &complement.vector(d - 1 - c));
        }
        ranks[0] += missing;
    }
    for c in 0..modes.len() {
        basis.set_column(missing + c, &q.column(c));
    }
    Ok((ranks, orthonormalize_columns(&basis).ok().map(|(u, _)| u)))
}

/// Pairwise ascent from `u`. Returns the value, the basis and the
/// convergence flag.
fn ascend<T: Real>(
    weights: &[ComplexMatrix<T>],
    blocks: &[usize],
    mut u: ComplexMatrix<T>,
    opts: &VnOptions,
) -> (T, ComplexMatrix<T>, bool) {
    let d = blocks.len();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|k| (k + 1..d).map(move |l| (k, l)))
        .filter(|&(k, l)| blocks[k] != blocks[l])
        .collect();
    let value = |u: &ComplexMatrix<T>| {
        (0..d).fold(T::zero(), |acc, k| {
            let v = u.column(k);
            acc + inner(&v, &weights[blocks[k]].mul_vec(&v)).re
        })
    };
    if pairs.is_empty() {
        return (value(&u), u, true);
    }
    let window = opts.window.max(pairs.len());
    let tol = T::lit(opts.tolerance);
    let mut recent: VecDeque<T> = VecDeque::with_capacity(window + 1);
    let mut recent_sum = T::zero();
    let mut converged = false;
    'sweeps: for _ in 0..opts.max_sweeps {
        for &(k, l) in &pairs {
            let diff = &weights[blocks[k]] - &weights[blocks[l]];
            let uk = u.column(k);
            let ul = u.column(l);
            let duk = diff.mul_vec(&uk);
            let dul = diff.mul_vec(&ul);
            let ckk = inner(&uk, &duk).re;
            let cll = inner(&ul, &dul).re;
            let ckl = inner(&uk, &dul);
            let (vals, vecs) = eigh2(ckk, ckl, cll);
            let gain = (vals[1] - ckk).max(T::zero());
            if gain > T::zero() {
                let (top, other) = (vecs[1], vecs[0]);
                let nk: Vec<_> = uk.iter().zip(&ul).map(|(a, b)| *a * top[0] + *b * top[1]).collect();
                let nl: Vec<_> = uk.iter().zip(&ul).map(|(a, b)| *a * other[0] + *b * other[1]).collect();
                u.set_column(k, &nk);
                u.set_column(l, &nl);
            }
            recent.push_back(gain);
            recent_sum += gain;
            if recent.len() > window {
                recent_sum -= recent.pop_front().expect("nonempty");
            }
            if recent.len() == window && recent_sum < tol {
                converged = true;
                break 'sweeps;
            }
        }
        if let Ok((q, _)) = orthonormalize_columns(&u) {
            u = q;
        }
        // recompute the window sum to shed accumulated rounding
        recent_sum = recent.iter().fold(T::zero(), |a, &g| a + g);
    }
    (value(&u), u, converged)
}

/// `tr Y` for the dual point `Y = herm(sum_i W_i pi_i) + c I` with the
/// smallest `c >= 0` making `Y >= W_i` for all `i`.
fn dual_bound<T: Real>(weights: &[ComplexMatrix<T>], projectors: &[ComplexMatrix<T>]) -> Result<T> {
    let d = weights[0].rows();
    let mut z = ComplexMatrix::zeros(d, d);
    for (w, p) in weights.iter().zip(projectors) {
        z += &(w * p);
    }
    let z = z.hermitian_part();
    let mut c = T::zero();
    for w in weights {
        c = c.max(-eigh(&(&z - w))?.min());
    }
    Ok(z.trace_re() + c * T::of_usize(d))
}

/// Best projective measurement: exact for two members, otherwise a lower
/// bound from [`maximize_projective`] with default options.
pub fn optimal_vn<T: Real>(e: &Ensemble<T>) -> Result<DiscriminationResult<T>> {
    optimal_vn_with(e, &VnOptions::default())
}

pub fn optimal_vn_with<T: Real>(e: &Ensemble<T>, opts: &VnOptions) -> Result<DiscriminationResult<T>> {
    if e.len() < 2 {
        return Err(Error::WrongMemberCount {
            expected: 2,
            found: e.len(),
        });
    }
    let d = e.dim();
    let (kept, members) = e.support(T::lit(ZERO_PRIOR));
    let expand = |effects: Vec<ComplexMatrix<T>>| {
        let mut all = vec![ComplexMatrix::zeros(d, d); e.len()];
        for (slot, m) in kept.iter().zip(effects) {
            all[*slot] = m;
        }
        Povm::trusted(all)
    };
    match members.len() {
        1 => {
            let m = expand(vec![ComplexMatrix::identity(d)]);
            let p = success_probability(e, &m)?;
            Ok(DiscriminationResult::new(p, m, Method::HelstromExact, None))
        }
        2 => {
            let sub = Ensemble::new(members)?;
            let h = helstrom(&sub)?;
            let m = expand(h.measurement.effects().to_vec());
            let p = success_probability(e, &m)?;
            Ok(DiscriminationResult::new(p, m, Method::HelstromExact, None))
        }
        _ => {
            let weights: Vec<ComplexMatrix<T>> = members.iter().map(|(p, rho)| rho.matrix().scale(*p)).collect();
            let sol = maximize_projective(&weights, opts)?;
            let m = expand(sol.projectors);
            let p = success_probability(e, &m)?;
            Ok(DiscriminationResult::new(p, m, Method::VnOptimized, Some(sol.certificate)))
        }
    }
}
