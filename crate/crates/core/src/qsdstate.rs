//! Embedding of a discrimination task into one bipartite state.
//!
//! For an ensemble `{eta_i, rho_i}` of `n` states on `C^m`, the state is
//! `A^dag A` with the block row `A = (sqrt(eta_1 rho_1), ..., sqrt(eta_n rho_n))`,
//! split as `n x m`. Its fidelity partial coherence bounds the optimal error
//! from above and its affinity partial coherence equals the least-square
//! measurement error.

use crate::error::Result;
use crate::linalg::{eigh, psd_sqrt, ComplexMatrix};
use crate::partialcoh::{affinity_partial_coherence, fidelity_partial_coherence, qsd_ensemble_of, CoherenceReport, Exactness};
use crate::qsd::{helstrom, lsm_error, optimal_vn, Method, ZERO_PRIOR};
use crate::scalar::Real;
use crate::states::{is_linearly_independent, validate_density, BipartiteState, Ensemble};

/// The block row `(sqrt(eta_1 rho_1), ..., sqrt(eta_n rho_n))`, `m x nm`.
pub fn qsd_state_factor<T: Real>(e: &Ensemble<T>) -> Result<ComplexMatrix<T>> {
    let m = e.dim();
    let mut a = ComplexMatrix::zeros(m, m * e.len());
    for i in 0..e.len() {
        a.set_block(0, i * m, &psd_sqrt(&e.weighted(i))?);
    }
    Ok(a)
}

pub fn build_qsd_state<T: Real>(e: &Ensemble<T>) -> Result<BipartiteState<T>> {
    let a = qsd_state_factor(e)?;
    let rho = validate_density(&(&a.adjoint() * &a))?;
    BipartiteState::new(rho, e.len(), e.dim())
}

#[derive(Clone, Debug)]
pub struct RoundtripReport<T> {
    /// `(original index, eta_i, recovered p_i)` for members with `eta_i >= 1e-12`.
    pub priors: Vec<(usize, T, T)>,
    pub max_prior_error: T,
    /// Largest sorted-eigenvalue difference between `omega_i` and `rho_i`.
    pub max_spectrum_error: T,
    /// Prior error within `1e-9` and spectrum error within `1e-8`.
    pub passed: bool,
}

/// Rebuilds the ensemble from its embedding and compares priors and spectra.
pub fn qsd_state_roundtrip<T: Real>(e: &Ensemble<T>) -> Result<RoundtripReport<T>> {
    let rho = build_qsd_state(e)?;
    let recovered = qsd_ensemble_of(&rho)?;
    let (kept, _) = e.support(T::lit(ZERO_PRIOR));
    let mut priors = Vec::new();
    let mut max_prior_error = T::zero();
    let mut max_spectrum_error = T::zero();
    let recovered_kept: Vec<usize> = (0..e.len())
        .filter(|&i| rho.projector(i).trace_product_re(rho.matrix()) >= T::lit(ZERO_PRIOR))
        .collect();
    for &i in &kept {
        let Some(pos) = recovered_kept.iter().position(|&k| k == i) else {
            max_prior_error = max_prior_error.max(e.prior(i));
            priors.push((i, e.prior(i), T::zero()));
            continue;
        };
        let p = recovered.prior(pos);
        priors.push((i, e.prior(i), p));
        max_prior_error = max_prior_error.max((p - e.prior(i)).abs());
        let omega = eigh(recovered.state(pos).matrix())?.eigenvalues;
        let orig = eigh(e.state(i).matrix())?.eigenvalues;
        // omega_i lives on the joint space; compare the top m eigenvalues
        let offset = omega.len() - orig.len();
        for (k, &l) in orig.iter().enumerate() {
            max_spectrum_error = max_spectrum_error.max((omega[offset + k] - l).abs());
        }
        for &l in &omega[..offset] {
            max_spectrum_error = max_spectrum_error.max(l.abs());
        }
    }
    let passed = max_prior_error <= T::tol(1e-9) && max_spectrum_error <= T::tol(1e-8);
    Ok(RoundtripReport {
        priors,
        max_prior_error,
        max_spectrum_error,
        passed,
    })
}

#[derive(Clone, Debug)]
pub struct BoundReport<T: Real> {
    pub fidelity_pc: CoherenceReport<T>,
    /// Helstrom error for two members, otherwise the projective optimizer's error.
    pub reference_error: T,
    pub reference_method: Method,
    /// `C_F >= P_ref - 1e-8`
    pub bound_holds: bool,
    pub linearly_independent: bool,
    /// `|C_F - P_ref| <= 1e-7`, reported for linearly independent ensembles.
    pub equality: Option<bool>,
    pub lsm_error: T,
    pub affinity_pc: T,
    /// `|P_lsm - C_A| <= 1e-8`
    pub lsm_identity_holds: bool,
}

pub fn discrimination_bound_check<T: Real>(e: &Ensemble<T>) -> Result<BoundReport<T>> {
    let rho = build_qsd_state(e)?;
    let fidelity_pc = fidelity_partial_coherence(&rho)?;
    let reference = if e.len() == 2 { helstrom(e)? } else { optimal_vn(e)? };
    let reference_error = reference.error_prob;
    let linearly_independent = is_linearly_independent(e, T::lit(1e-10))?;
    let c_f = fidelity_pc.value;
    let equality = (linearly_independent && fidelity_pc.exactness == Exactness::Exact)
        .then(|| (c_f - reference_error).abs() <= T::tol(1e-7));
    let lsm_error = lsm_error(e)?;
    let affinity_pc = affinity_partial_coherence(&rho)?.value;
    Ok(BoundReport {
        bound_holds: c_f >= reference_error - T::tol(1e-8),
        fidelity_pc,
        reference_error,
        reference_method: reference.method,
        linearly_independent,
        equality,
        lsm_error,
        affinity_pc,
        lsm_identity_holds: (lsm_error - affinity_pc).abs() <= T::tol(1e-8),
    })
}
