//! Fidelity, affinity and the distances `d = 1 - X^2` built from them, plus
//! channel application, subselection and the strong-contractibility slack.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, trace_norm, ComplexMatrix};
use crate::scalar::{clamp_with_overshoot, Real};
use crate::states::{DensityMatrix, KrausChannel};

/// Branches lighter than this are null.
pub const NULL_BRANCH: f64 = 1e-12;

/// Total null-branch weight that may be dropped from an average.
pub const MAX_EXCLUDED_MASS: f64 = 1e-10;

/// Which overlap a distance or coherence measure is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    /// `F = ||sqrt(rho) sqrt(sigma)||_1`
    Fidelity,
    /// `A = tr(sqrt(rho) sqrt(sigma))`
    Affinity,
}

impl Kind {
    pub const ALL: [Kind; 2] = [Kind::Fidelity, Kind::Affinity];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Fidelity => "fidelity",
            Kind::Affinity => "affinity",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fidelity" => Ok(Kind::Fidelity),
            "affinity" => Ok(Kind::Affinity),
            other => Err(Error::InvalidArgument(format!(
                "unknown kind {other:?}, expected fidelity or affinity"
            ))),
        }
    }
}

/// Overlap value clamped into `[0, 1]` with the clamped-away excess.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap<T> {
    pub value: T,
    pub raw: T,
    pub overshoot: T,
}

impl<T: Real> Overlap<T> {
    fn clamped(raw: T) -> Self {
        let (value, overshoot) = clamp_with_overshoot(raw, T::zero(), T::one());
        if overshoot > T::tol(1e-9) {
            log::warn!("overlap {raw} outside [0, 1] by {overshoot}");
        }
        Self { value, raw, overshoot }
    }
}

fn same_dim<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} and {}x{} operators",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `||R S||_1` for precomputed square roots.
pub fn fidelity_of_roots<T: Real>(root_rho: &ComplexMatrix<T>, root_sigma: &ComplexMatrix<T>) -> Result<T> {
    same_dim(root_rho, root_sigma)?;
    trace_norm(&(root_rho * root_sigma))
}

/// `Re tr(R S)` for precomputed square roots.
pub fn affinity_of_roots<T: Real>(root_rho: &ComplexMatrix<T>, root_sigma: &ComplexMatrix<T>) -> Result<T> {
    same_dim(root_rho, root_sigma)?;
    Ok(root_rho.trace_product_re(root_sigma))
}

pub fn overlap_of_roots<T: Real>(kind: Kind, root_rho: &ComplexMatrix<T>, root_sigma: &ComplexMatrix<T>) -> Result<T> {
    match kind {
        Kind::Fidelity => fidelity_of_roots(root_rho, root_sigma),
        Kind::Affinity => affinity_of_roots(root_rho, root_sigma),
    }
}

/// Unclamped overlap of two PSD operators of any trace.
pub fn overlap_psd<T: Real>(kind: Kind, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    same_dim(a, b)?;
    overlap_of_roots(kind, &psd_sqrt(a)?, &psd_sqrt(b)?)
}

pub fn overlap_with_diagnostics<T: Real>(
    kind: Kind,
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<Overlap<T>> {
    Ok(Overlap::clamped(overlap_psd(kind, rho.matrix(), sigma.matrix())?))
}

pub fn overlap<T: Real>(kind: Kind, rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    Ok(overlap_with_diagnostics(kind, rho, sigma)?.value)
}

pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    overlap(Kind::Fidelity, rho, sigma)
}

pub fn affinity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    overlap(Kind::Affinity, rho, sigma)
}

/// `tr sqrt(sqrt(sigma) rho sqrt(sigma))`, unclamped.
pub fn fidelity_nested<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    same_dim(rho.matrix(), sigma.matrix())?;
    let s = sigma.sqrt()?;
    let inner = s.sandwich(rho.matrix()).hermitian_part();
    Ok(psd_sqrt(&inner)?.trace_re())
}

/// `1 - X(rho, sigma)^2`
pub fn distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>, kind: Kind) -> Result<T> {
    let x = overlap(kind, rho, sigma)?;
    Ok(T::one() - x * x)
}

/// `1 - X^2` from precomputed square roots, with the overlap clamped.
pub fn distance_of_roots<T: Real>(kind: Kind, root_rho: &ComplexMatrix<T>, root_sigma: &ComplexMatrix<T>) -> Result<T> {
    let x = Overlap::clamped(overlap_of_roots(kind, root_rho, root_sigma)?).value;
    Ok(T::one() - x * x)
}

fn check_channel_input<T: Real>(channel: &KrausChannel<T>, dim: usize) -> Result<()> {
    if channel.dim_in() != dim {
        return Err(Error::DimensionMismatch(format!(
            "channel on dimension {} applied to dimension {dim}",
            channel.dim_in()
        )));
    }
    Ok(())
}

/// `sum_n K_n X K_n^dag`
pub fn apply_channel_operator<T: Real>(x: &ComplexMatrix<T>, channel: &KrausChannel<T>) -> Result<ComplexMatrix<T>> {
    check_channel_input(channel, x.rows())?;
    let n = channel.dim_out();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in channel.operators() {
        out += &k.sandwich(x);
    }
    Ok(out.hermitian_part())
}

pub fn apply_channel<T: Real>(rho: &DensityMatrix<T>, channel: &KrausChannel<T>) -> Result<DensityMatrix<T>> {
    DensityMatrix::new(apply_channel_operator(rho.matrix(), channel)?)
}

/// One outcome of a subselection.
#[derive(Clone, Debug)]
pub struct Branch<T: Real> {
    /// `tr(K rho K^dag)`
    pub probability: T,
    /// Post-selected state; `None` marks a null branch.
    pub state: Option<DensityMatrix<T>>,
    /// Unnormalized `K rho K^dag`.
    pub unnormalized: ComplexMatrix<T>,
}

pub fn subselect<T: Real>(rho: &DensityMatrix<T>, channel: &KrausChannel<T>) -> Result<Vec<Branch<T>>> {
    check_channel_input(channel, rho.dim())?;
    Ok(channel
        .operators()
        .iter()
        .map(|k| {
            let unnormalized = k.sandwich(rho.matrix()).hermitian_part();
            let probability = unnormalized.trace_re().max(T::zero());
            let state = (probability >= T::lit(NULL_BRANCH))
                .then(|| DensityMatrix::trusted(unnormalized.scale(T::one() / probability)));
            Branch {
                probability,
                state,
                unnormalized,
            }
        })
        .collect())
}

/// Whose subselection probabilities weight the branch average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Rho,
    Sigma,
}

/// `d(rho, sigma) - sum_i p_i d(rho_i, sigma_i)` with `p` from `rho`.
pub fn contractibility_slack<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    channel: &KrausChannel<T>,
    kind: Kind,
) -> Result<T> {
    contractibility_slack_weighted(rho, sigma, channel, kind, Weighting::Rho)
}

pub fn contractibility_slack_weighted<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    channel: &KrausChannel<T>,
    kind: Kind,
    weighting: Weighting,
) -> Result<T> {
    same_dim(rho.matrix(), sigma.matrix())?;
    let before = distance(rho, sigma, kind)?;
    let rb = subselect(rho, channel)?;
    let sb = subselect(sigma, channel)?;
    let mut average = T::zero();
    let mut excluded = T::zero();
    for (r, s) in rb.iter().zip(&sb) {
        let w = match weighting {
            Weighting::Rho => r.probability,
            Weighting::Sigma => s.probability,
        };
        match (&r.state, &s.state) {
            (Some(ri), Some(si)) => average += w * distance(ri, si, kind)?,
            _ => excluded += w,
        }
    }
    if excluded >= T::lit(MAX_EXCLUDED_MASS) {
        return Err(Error::ExcludedMass { mass: excluded.as_f64() });
    }
    Ok(before - average)
}
