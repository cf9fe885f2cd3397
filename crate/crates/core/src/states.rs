//! Validated states, ensembles and channels, seeded random generators, and
//! structural predicates.
//!
//! Bipartite index convention: `|i>_a |k>_b` is basis vector `i * n_b + k`.
//! Partial incoherence is always relative to [`BipartiteState::basis_a`].

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, kron, orthonormalize_columns, singular_values, svd, ComplexMatrix, Party, Spectrum};
use crate::scalar::{cplx, one, zero, Real};

const HERMITIAN_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-8;
const TRACE_TOL: f64 = 1e-8;
const UNITARY_TOL: f64 = 1e-10;
const PRIOR_SUM_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;
const KRAUS_TOL: f64 = 1e-8;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Same as [`validate_density`].
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        validate_density(&m)
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        check_normalized(psi)?;
        Ok(Self {
            matrix: ComplexMatrix::outer(psi).hermitian_part(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(T::one() / T::of_usize(dim)),
        }
    }

    /// Wraps a matrix the caller has already established to be a state.
    pub(crate) fn trusted(m: ComplexMatrix<T>) -> Self {
        Self {
            matrix: m.hermitian_part(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn spectrum(&self) -> Result<Spectrum<T>> {
        eigh(&self.matrix)
    }

    pub fn sqrt(&self) -> Result<ComplexMatrix<T>> {
        linalg::psd_sqrt(&self.matrix)
    }

    /// `U rho U^dag`
    pub fn conjugated(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} unitary for a {}-dimensional state",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Ok(Self::trusted(u.sandwich(&self.matrix)))
    }

    /// `sum_i p_i rho_i` for nonnegative weights summing to one.
    pub fn mixture(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyEnsemble)?;
        let mut m = ComplexMatrix::zeros(first.1.dim(), first.1.dim());
        for (p, rho) in parts {
            if rho.dim() != first.1.dim() {
                return Err(Error::DimensionMismatch("mixture of states of different dimension".into()));
            }
            m += &rho.matrix.scale(*p);
        }
        validate_density(&m)
    }
}

fn check_normalized<T: Real>(psi: &[Complex<T>]) -> Result<()> {
    let n = linalg::norm(psi);
    if !((n - T::one()).abs() <= T::tol(NORM_TOL)) {
        return Err(Error::NotNormalized { norm: n.as_f64() });
    }
    Ok(())
}

/// Checks Hermiticity, positivity and unit trace, in that order, and stores
/// the symmetrized matrix.
pub fn validate_density<T: Real>(m: &ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    m.ensure_square()?;
    let deviation = m.hermiticity_defect();
    if !(deviation <= T::tol(HERMITIAN_TOL)) {
        return Err(Error::NonHermitian {
            deviation: deviation.as_f64(),
        });
    }
    let h = m.hermitian_part();
    let spec = eigh(&h)?;
    if spec.dim() > 0 && spec.min() < -T::tol(PSD_TOL) {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min().as_f64(),
        });
    }
    let tr = h.trace_re();
    if !((tr - T::one()).abs() <= T::tol(TRACE_TOL)) {
        return Err(Error::TraceNotOne { trace: tr.as_f64() });
    }
    Ok(DensityMatrix { matrix: h })
}

/// Density matrix with a declared tensor split and a reference basis on `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState<T: Real> {
    n_a: usize,
    n_b: usize,
    state: DensityMatrix<T>,
    basis_a: ComplexMatrix<T>,
    computational: bool,
}

impl<T: Real> BipartiteState<T> {
    /// State with the computational reference basis.
    pub fn new(state: DensityMatrix<T>, n_a: usize, n_b: usize) -> Result<Self> {
        check_split(state.dim(), n_a, n_b)?;
        Ok(Self {
            n_a,
            n_b,
            state,
            basis_a: ComplexMatrix::identity(n_a),
            computational: true,
        })
    }

    pub fn with_basis(state: DensityMatrix<T>, n_a: usize, n_b: usize, basis_a: ComplexMatrix<T>) -> Result<Self> {
        check_split(state.dim(), n_a, n_b)?;
        check_unitary(&basis_a, n_a)?;
        let computational = basis_a == ComplexMatrix::identity(n_a);
        Ok(Self {
            n_a,
            n_b,
            state,
            basis_a,
            computational,
        })
    }

    pub fn from_matrix(m: &ComplexMatrix<T>, n_a: usize, n_b: usize) -> Result<Self> {
        Self::new(validate_density(m)?, n_a, n_b)
    }

    pub fn from_pure(psi: &[Complex<T>], n_a: usize, n_b: usize) -> Result<Self> {
        Self::new(DensityMatrix::pure(psi)?, n_a, n_b)
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn dim(&self) -> usize {
        self.n_a * self.n_b
    }

    pub fn state(&self) -> &DensityMatrix<T> {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.state.matrix()
    }

    pub fn basis_a(&self) -> &ComplexMatrix<T> {
        &self.basis_a
    }

    pub fn has_computational_basis(&self) -> bool {
        self.computational
    }

    /// Same state, different reference basis.
    pub fn rebased(&self, basis_a: ComplexMatrix<T>) -> Result<Self> {
        Self::with_basis(self.state.clone(), self.n_a, self.n_b, basis_a)
    }

    pub fn marginal(&self, keep: Party) -> DensityMatrix<T> {
        let m = linalg::partial_trace(self.matrix(), self.n_a, self.n_b, keep).expect("split checked");
        DensityMatrix::trusted(m)
    }

    pub fn marginal_a(&self) -> DensityMatrix<T> {
        self.marginal(Party::A)
    }

    /// `U_a (x) I_b` for the reference basis.
    pub fn basis_operator(&self) -> ComplexMatrix<T> {
        kron(&self.basis_a, &ComplexMatrix::identity(self.n_b))
    }

    /// `E_i = |b_i> (x) I_b`, an `(n_a n_b) x n_b` isometry.
    pub fn embedding(&self, i: usize) -> ComplexMatrix<T> {
        let b = self.basis_a.column(i);
        let n_b = self.n_b;
        ComplexMatrix::from_fn(self.dim(), n_b, |r, c| if r % n_b == c { b[r / n_b] } else { zero() })
    }

    /// `P_i = |b_i><b_i| (x) I_b`
    pub fn projector(&self, i: usize) -> ComplexMatrix<T> {
        let e = self.embedding(i);
        &e * &e.adjoint()
    }

    /// Matrix of an operator in reference-basis coordinates, `(U^dag (x) I) X (U (x) I)`.
    pub fn to_reference(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        if self.computational {
            x.clone()
        } else {
            self.basis_operator().sandwich_adj(x)
        }
    }

    /// Inverse of [`Self::to_reference`].
    pub fn from_reference(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        if self.computational {
            x.clone()
        } else {
            self.basis_operator().sandwich(x)
        }
    }

    /// Same split and basis, different state.
    pub fn with_state(&self, state: DensityMatrix<T>) -> Result<Self> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional state for a {}x{} split",
                state.dim(),
                self.n_a,
                self.n_b
            )));
        }
        Ok(Self {
            state,
            ..self.clone()
        })
    }
}

fn check_split(dim: usize, n_a: usize, n_b: usize) -> Result<()> {
    if n_a == 0 || n_b == 0 || n_a * n_b != dim {
        return Err(Error::DimensionMismatch(format!(
            "{n_a}x{n_b} split of a {dim}-dimensional state"
        )));
    }
    Ok(())
}

fn check_unitary<T: Real>(u: &ComplexMatrix<T>, n: usize) -> Result<()> {
    if u.rows() != n || u.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} basis for a {n}-dimensional party",
            u.rows(),
            u.cols()
        )));
    }
    let defect = u.unitarity_defect();
    if !(defect <= T::tol(UNITARY_TOL)) {
        return Err(Error::NotUnitary {
            defect: defect.as_f64(),
        });
    }
    Ok(())
}

/// Prior-weighted list of equal-dimension states.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T: Real> {
    members: Vec<(T, DensityMatrix<T>)>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(members: Vec<(T, DensityMatrix<T>)>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyEnsemble)?;
        let dim = first.1.dim();
        let mut sum = T::zero();
        for (i, (p, rho)) in members.iter().enumerate() {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "member {i} has dimension {}, member 0 has {dim}",
                    rho.dim()
                )));
            }
            if !(*p >= T::zero()) {
                return Err(Error::NegativePrior {
                    index: i,
                    value: p.as_f64(),
                });
            }
            sum += *p;
        }
        if !((sum - T::one()).abs() <= T::tol(PRIOR_SUM_TOL)) {
            return Err(Error::PriorsSum { sum: sum.as_f64() });
        }
        Ok(Self { members })
    }

    pub fn uniform(states: Vec<DensityMatrix<T>>) -> Result<Self> {
        let p = T::one() / T::of_usize(states.len().max(1));
        Self::new(states.into_iter().map(|s| (p, s)).collect())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn members(&self) -> &[(T, DensityMatrix<T>)] {
        &self.members
    }

    pub fn prior(&self, i: usize) -> T {
        self.members[i].0
    }

    pub fn state(&self, i: usize) -> &DensityMatrix<T> {
        &self.members[i].1
    }

    pub fn priors(&self) -> Vec<T> {
        self.members.iter().map(|m| m.0).collect()
    }

    /// `eta_i rho_i`
    pub fn weighted(&self, i: usize) -> ComplexMatrix<T> {
        self.members[i].1.matrix().scale(self.members[i].0)
    }

    /// `sum_i eta_i rho_i`
    pub fn average(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.len() {
            m += &self.weighted(i);
        }
        m
    }

    /// Members with prior at least `min_prior`, with their original indices.
    /// Priors are not renormalized.
    pub fn support(&self, min_prior: T) -> (Vec<usize>, Vec<(T, DensityMatrix<T>)>) {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.0 >= min_prior)
            .map(|(i, m)| (i, m.clone()))
            .unzip()
    }
}

/// Schmidt decomposition `psi = sum_j sqrt(lambda_j) |x_j> |y_j>`.
#[derive(Clone, Debug)]
pub struct SchmidtForm<T: Real> {
    /// Probability weights `lambda_j`, descending.
    pub coefficients: Vec<T>,
    /// `n_a x r`, columns `|x_j>`.
    pub basis_a: ComplexMatrix<T>,
    /// `n_b x r`, columns `|y_j>`.
    pub basis_b: ComplexMatrix<T>,
}

impl<T: Real> SchmidtForm<T> {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> Vec<Complex<T>> {
        let (n_a, n_b) = (self.basis_a.rows(), self.basis_b.rows());
        let mut psi = vec![zero(); n_a * n_b];
        for (j, &l) in self.coefficients.iter().enumerate() {
            let amp = l.sqrt();
            for i in 0..n_a {
                for k in 0..n_b {
                    psi[i * n_b + k] += self.basis_a[(i, j)] * self.basis_b[(k, j)] * amp;
                }
            }
        }
        psi
    }
}

pub fn schmidt<T: Real>(psi: &[Complex<T>], n_a: usize, n_b: usize) -> Result<SchmidtForm<T>> {
    check_split(psi.len(), n_a, n_b)?;
    check_normalized(psi)?;
    let m = ComplexMatrix::from_fn(n_a, n_b, |i, k| psi[i * n_b + k]);
    let d = svd(&m)?;
    let s_max = d.singular_values.first().copied().unwrap_or_else(T::zero);
    let cut = T::lit(8.0) * T::epsilon() * s_max;
    let keep: Vec<usize> = (0..n_a.min(n_b)).filter(|&j| d.singular_values[j] > cut).collect();
    let norm2 = keep.iter().fold(T::zero(), |a, &j| a + d.singular_values[j].powi(2));
    Ok(SchmidtForm {
        coefficients: keep.iter().map(|&j| d.singular_values[j].powi(2) / norm2).collect(),
        basis_a: d.u.columns(&keep),
        basis_b: d.v.columns(&keep).map(|z| z.conj()),
    })
}

/// Kraus representation `rho -> sum_n K_n rho K_n^dag`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel<T: Real> {
    operators: Vec<ComplexMatrix<T>>,
}

impl<T: Real> KrausChannel<T> {
    /// Checks shapes and `sum K^dag K = I`.
    pub fn new(operators: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel needs at least one Kraus operator".into()))?;
        let shape = (first.rows(), first.cols());
        if operators.iter().any(|k| (k.rows(), k.cols()) != shape) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        let ch = Self { operators };
        let defect = ch.completeness_defect();
        if !(defect <= T::tol(KRAUS_TOL)) {
            return Err(Error::IncompleteKraus {
                defect: defect.as_f64(),
            });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn unitary(u: ComplexMatrix<T>) -> Result<Self> {
        let n = u.rows();
        check_unitary(&u, n)?;
        Ok(Self { operators: vec![u] })
    }

    /// Luders measurement `{|b_i><b_i| (x) I_b}` of a bipartite state's basis.
    pub fn luders(state: &BipartiteState<T>) -> Self {
        Self {
            operators: (0..state.n_a()).map(|i| state.projector(i)).collect(),
        }
    }

    /// `I_a (x) K_n` for a channel acting on party `b`.
    pub fn local_b(n_a: usize, channel_b: &KrausChannel<T>) -> Self {
        let ia = ComplexMatrix::identity(n_a);
        Self {
            operators: channel_b.operators.iter().map(|k| kron(&ia, k)).collect(),
        }
    }

    /// `V K_n W^dag` for unitaries `V` (output) and `W` (input).
    pub fn conjugated(&self, v: &ComplexMatrix<T>, w: &ComplexMatrix<T>) -> Self {
        let wd = w.adjoint();
        Self {
            operators: self.operators.iter().map(|k| &(v * k) * &wd).collect(),
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix<T>] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn dim_out(&self) -> usize {
        self.operators[0].rows()
    }

    /// `max |sum K^dag K - I|`
    pub fn completeness_defect(&self) -> T {
        let n = self.dim_in();
        let mut s = ComplexMatrix::zeros(n, n);
        for k in &self.operators {
            s += &(&k.adjoint() * k);
        }
        s.max_abs_diff(&ComplexMatrix::identity(n))
    }
}

/// Deterministic generator for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer of `seed` combined with `stream`.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian entry.
pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    cplx(T::lit(re), T::lit(im))
}

pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniformly random unit vector.
pub fn random_pure_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = linalg::norm(&v);
        if n > T::lit(1e-6) {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `G G^dag / tr(G G^dag)` for a `dim x rank` complex Gaussian `G`.
pub fn random_density_with<T: Real, R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = gaussian_matrix::<T, R>(dim, rank, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace_re();
    Ok(DensityMatrix::trusted(w.scale(T::one() / tr)))
}

pub fn random_density<T: Real>(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix<T>> {
    random_density_with(dim, rank, &mut seeded_rng(seed))
}

/// Haar-random `rows x cols` isometry (`cols <= rows`).
pub fn random_isometry_with<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<T> {
    loop {
        let g = gaussian_matrix::<T, R>(rows, cols, rng);
        if let Ok((q, _)) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

pub fn random_unitary_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    random_isometry_with(dim, dim, rng)
}

/// Haar-random unitary: Gram-Schmidt of a complex Gaussian matrix.
pub fn random_unitary<T: Real>(dim: usize, seed: u64) -> ComplexMatrix<T> {
    random_unitary_with(dim, &mut seeded_rng(seed))
}

/// Kraus operators sliced from a Haar isometry `C^dim -> C^(dim k)`.
pub fn random_channel_with<T: Real, R: Rng + ?Sized>(dim: usize, kraus_count: usize, rng: &mut R) -> KrausChannel<T> {
    let k = kraus_count.max(1);
    let v = random_isometry_with::<T, R>(dim * k, dim, rng);
    KrausChannel {
        operators: (0..k).map(|n| v.block(n * dim, 0, dim, dim)).collect(),
    }
}

pub fn random_channel<T: Real>(dim: usize, kraus_count: usize, seed: u64) -> KrausChannel<T> {
    random_channel_with(dim, kraus_count, &mut seeded_rng(seed))
}

/// Channel with Kraus operators `K_n = sum_i |pi_n(i)><i| (x) B_{n,i}`, where
/// each `pi_n` is a permutation and `{B_{n,i}}_n` is a Kraus set on `b` for
/// every `i`. Computational basis on `a`.
pub fn random_partial_incoherent_channel_with<T: Real, R: Rng + ?Sized>(
    n_a: usize,
    n_b: usize,
    kraus_count: usize,
    rng: &mut R,
) -> KrausChannel<T> {
    let k = kraus_count.max(1);
    let local: Vec<KrausChannel<T>> = (0..n_a).map(|_| random_channel_with(n_b, k, rng)).collect();
    let mut operators = Vec::with_capacity(k);
    for n in 0..k {
        let mut perm: Vec<usize> = (0..n_a).collect();
        perm.shuffle(rng);
        let mut op = ComplexMatrix::zeros(n_a * n_b, n_a * n_b);
        for (i, &target) in perm.iter().enumerate() {
            op.set_block(target * n_b, i * n_b, &local[i].operators[n]);
        }
        operators.push(op);
    }
    KrausChannel { operators }
}

pub fn random_partial_incoherent_channel<T: Real>(n_a: usize, n_b: usize, kraus_count: usize, seed: u64) -> KrausChannel<T> {
    random_partial_incoherent_channel_with(n_a, n_b, kraus_count, &mut seeded_rng(seed))
}

/// `sum_i p_i |i><i| (x) sigma_i` with random weights and random-rank blocks.
pub fn random_partial_incoherent_with<T: Real, R: Rng + ?Sized>(n_a: usize, n_b: usize, rng: &mut R) -> BipartiteState<T> {
    let weights: Vec<f64> = (0..n_a).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = ComplexMatrix::zeros(n_a * n_b, n_a * n_b);
    for (i, w) in weights.iter().enumerate() {
        let rank = rng.random_range(1..=n_b);
        let sigma = random_density_with::<T, R>(n_b, rank, rng).expect("valid rank");
        m.set_block(i * n_b, i * n_b, &sigma.matrix.scale(T::lit(w / total)));
    }
    BipartiteState::new(DensityMatrix::trusted(m), n_a, n_b).expect("split matches")
}

/// Random state supported on the diagonal and anti-diagonal of a
/// `2n x 2n` matrix, split as `2 x n`.
pub fn random_xstate_with<T: Real, R: Rng + ?Sized>(n: usize, full_rank: bool, rng: &mut R) -> BipartiteState<T> {
    let d = 2 * n;
    loop {
        let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = weights.iter().sum();
        let mut m = ComplexMatrix::zeros(d, d);
        let mut min_eig = T::infinity();
        for (i, w) in weights.iter().enumerate() {
            let j = d - 1 - i;
            let block = random_density_with::<T, R>(2, 2, rng).expect("rank 2").into_matrix();
            let block = block.scale(T::lit(w / total));
            m[(i, i)] = block[(0, 0)];
            m[(i, j)] = block[(0, 1)];
            m[(j, i)] = block[(1, 0)];
            m[(j, j)] = block[(1, 1)];
            if full_rank {
                min_eig = min_eig.min(eigh(&block).expect("hermitian").min());
            }
        }
        if !full_rank || min_eig >= T::lit(1e-6) {
            return BipartiteState::new(DensityMatrix::trusted(m), 2, n).expect("split matches");
        }
    }
}

pub fn random_xstate<T: Real>(n: usize, seed: u64, full_rank: bool) -> BipartiteState<T> {
    random_xstate_with(n, full_rank, &mut seeded_rng(seed))
}

/// Zeroes the off-diagonal `a` blocks of a matrix given in reference coordinates.
pub(crate) fn pinch<T: Real>(m: &ComplexMatrix<T>, n_b: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| if r / n_b == c / n_b { m[(r, c)] } else { zero() })
}

/// `sum_i P_i X P_i` for `P_i = |b_i><b_i| (x) I_b`.
pub fn luders_operator<T: Real>(reference: &BipartiteState<T>, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    reference.from_reference(&pinch(&reference.to_reference(x), reference.n_b()))
}

pub fn luders_project<T: Real>(rho: &BipartiteState<T>) -> DensityMatrix<T> {
    DensityMatrix::trusted(luders_operator(rho, rho.matrix()))
}

/// True iff `max |X - Pi_L(X)| <= tol`, also for subnormalized operators.
pub fn is_partial_incoherent_operator<T: Real>(reference: &BipartiteState<T>, x: &ComplexMatrix<T>, tol: T) -> bool {
    x.max_abs_diff(&luders_operator(reference, x)) <= tol
}

pub fn is_partial_incoherent<T: Real>(rho: &BipartiteState<T>, tol: T) -> bool {
    is_partial_incoherent_operator(rho, rho.matrix(), tol)
}

/// True iff the eigenvectors (eigenvalue above `tol`) of all members are
/// jointly linearly independent.
pub fn is_linearly_independent<T: Real>(e: &Ensemble<T>, tol: T) -> Result<bool> {
    let dim = e.dim();
    let mut cols: Vec<Vec<Complex<T>>> = Vec::new();
    for (_, rho) in e.members() {
        let spec = rho.spectrum()?;
        for (k, &l) in spec.eigenvalues.iter().enumerate() {
            if l > tol {
                cols.push(spec.vector(k));
            }
        }
    }
    if cols.is_empty() {
        return Ok(true);
    }
    if cols.len() > dim {
        return Ok(false);
    }
    let m = ComplexMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    let s = singular_values(&m)?;
    let cut = T::lit(1e-8) * s[0];
    Ok(s.iter().filter(|&&x| x > cut).count() == cols.len())
}

/// Computational basis vector.
pub fn basis_vector<T: Real>(dim: usize, i: usize) -> Vec<Complex<T>> {
    (0..dim).map(|k| if k == i { one() } else { zero() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        cplx(re, 0.0)
    }

    fn bell() -> Vec<Complex<f64>> {
        let h = 0.5f64.sqrt();
        vec![c(h), c(0.0), c(0.0), c(h)]
    }

    fn plus() -> Vec<Complex<f64>> {
        let h = 0.5f64.sqrt();
        vec![c(h), c(h)]
    }

    #[test]
    fn validation_examples() {
        let half = ComplexMatrix::<f64>::identity(2).scale(0.5);
        assert!(validate_density(&half).is_ok());
        assert!(matches!(
            validate_density(&ComplexMatrix::<f64>::from_diag(&[1.5, -0.5])),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            validate_density(&ComplexMatrix::<f64>::from_diag(&[0.6, 0.6])),
            Err(Error::TraceNotOne { .. })
        ));
        let skew = ComplexMatrix::<f64>::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(validate_density(&skew), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn random_density_examples() {
        let pure = random_density::<f64>(2, 1, 1).unwrap();
        let s = pure.spectrum().unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-10 && (s.eigenvalues[1] - 1.0).abs() < 1e-10);
        assert_eq!(random_density::<f64>(4, 4, 5).unwrap(), random_density::<f64>(4, 4, 5).unwrap());
        let r2 = random_density::<f64>(3, 2, 8).unwrap();
        assert!(r2.spectrum().unwrap().min() <= 1e-10);
        assert!(matches!(random_density::<f64>(3, 4, 0), Err(Error::BadRank { .. })));
        assert!(matches!(random_density::<f64>(3, 0, 0), Err(Error::BadRank { .. })));
    }

    #[test]
    fn random_unitary_examples() {
        let u1 = random_unitary::<f64>(1, 3);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(random_unitary::<f64>(4, 3).unitarity_defect() <= 1e-10);
        assert_ne!(random_unitary::<f64>(3, 1), random_unitary::<f64>(3, 2));
    }

    #[test]
    fn random_channel_examples() {
        let ch = random_channel::<f64>(3, 1, 4);
        assert_eq!(ch.len(), 1);
        assert!(ch.operators()[0].unitarity_defect() < 1e-10);
        let ch = random_channel::<f64>(3, 4, 4);
        assert!(ch.completeness_defect() < 1e-10);
        assert_eq!(ch, random_channel::<f64>(3, 4, 4));
    }

    #[test]
    fn partial_incoherent_channel_closure() {
        let mut rng = seeded_rng(11);
        for k in 1..=3 {
            let ch = random_partial_incoherent_channel::<f64>(3, 2, k, 100 + k as u64);
            assert!(ch.completeness_defect() < 1e-10);
            for _ in 0..5 {
                let sigma = random_partial_incoherent_with::<f64, _>(3, 2, &mut rng);
                for op in ch.operators() {
                    let out = op.sandwich(sigma.matrix());
                    assert!(is_partial_incoherent_operator(&sigma, &out, 1e-12));
                }
            }
        }
        let probe = BipartiteState::new(DensityMatrix::<f64>::maximally_mixed(4), 2, 2).unwrap();
        assert!(KrausChannel::luders(&probe).completeness_defect() < 1e-15);
    }

    #[test]
    fn xstate_pattern() {
        let x = random_xstate::<f64>(2, 7, true);
        let m = x.matrix();
        assert_eq!(m[(0, 1)], c(0.0));
        for r in 0..4 {
            for col in 0..4 {
                if r != col && r + col != 3 {
                    assert_eq!(m[(r, col)], c(0.0));
                }
            }
        }
        assert!(x.state().spectrum().unwrap().min() >= 1e-6);
        assert!((m.trace_re() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let prod = kron_vec_helper(&[c(1.0), c(0.0)], &[c(0.0), c(1.0)]);
        let s = schmidt(&prod, 2, 2).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
        let s = schmidt(&bell(), 2, 2).unwrap();
        assert!((s.coefficients[0] - 0.5).abs() < 1e-12 && (s.coefficients[1] - 0.5).abs() < 1e-12);
        let psi = random_pure_with::<f64, _>(12, &mut seeded_rng(2));
        let s = schmidt(&psi, 3, 4).unwrap();
        let back = s.reconstruct();
        assert!(back.iter().zip(&psi).all(|(a, b)| (a - b).norm() < 1e-9));
        let marg = linalg::partial_trace(&ComplexMatrix::outer(&psi), 3, 4, Party::A).unwrap();
        let spec = eigh(&marg).unwrap();
        for (k, &l) in s.coefficients.iter().enumerate() {
            assert!((spec.eigenvalues[2 - k] - l).abs() < 1e-9);
        }
        let bad = vec![c(1.0), c(1.0), c(0.0), c(0.0)];
        assert!(matches!(schmidt(&bad, 2, 2), Err(Error::NotNormalized { .. })));
    }

    fn kron_vec_helper(a: &[Complex<f64>], b: &[Complex<f64>]) -> Vec<Complex<f64>> {
        linalg::kron_vec(a, b)
    }

    #[test]
    fn luders_examples() {
        let b = BipartiteState::from_pure(&bell(), 2, 2).unwrap();
        let p = luders_project(&b);
        let expect = ComplexMatrix::from_diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!(p.matrix().max_abs_diff(&expect) < 1e-15);
        assert!(!is_partial_incoherent(&b, 1e-9));
        let pb = b.with_state(p.clone()).unwrap();
        assert!(is_partial_incoherent(&pb, 1e-12));
        assert!(luders_project(&pb).matrix().max_abs_diff(p.matrix()) < 1e-12);

        let mm = BipartiteState::new(DensityMatrix::<f64>::maximally_mixed(6), 2, 3).unwrap();
        assert!(is_partial_incoherent(&mm, 1e-12));

        // rotated reference basis: |+> basis makes |+>|0> incoherent
        let h = 0.5f64.sqrt();
        let hadamard = ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap();
        let state = BipartiteState::from_pure(&linalg::kron_vec(&plus(), &[c(1.0), c(0.0)]), 2, 2).unwrap();
        assert!(!is_partial_incoherent(&state, 1e-9));
        assert!(is_partial_incoherent(&state.rebased(hadamard).unwrap(), 1e-12));
    }

    #[test]
    fn linear_independence_examples() {
        let z = DensityMatrix::pure(&[c(1.0), c(0.0)]).unwrap();
        let o = DensityMatrix::pure(&[c(0.0), c(1.0)]).unwrap();
        let p = DensityMatrix::pure(&plus()).unwrap();
        let e = |a: &DensityMatrix<f64>, b: &DensityMatrix<f64>| Ensemble::uniform(vec![a.clone(), b.clone()]).unwrap();
        assert!(is_linearly_independent(&e(&z, &o), 1e-10).unwrap());
        assert!(!is_linearly_independent(&e(&z, &z), 1e-10).unwrap());
        assert!(is_linearly_independent(&e(&z, &p), 1e-10).unwrap());
    }

    #[test]
    fn ensemble_validation() {
        let z = DensityMatrix::<f64>::pure(&[c(1.0), c(0.0)]).unwrap();
        assert!(matches!(Ensemble::new(vec![(0.5, z.clone()), (0.3, z.clone())]), Err(Error::PriorsSum { .. })));
        assert!(matches!(
            Ensemble::new(vec![(1.5, z.clone()), (-0.5, z.clone())]),
            Err(Error::NegativePrior { index: 1, .. })
        ));
        assert!(matches!(Ensemble::<f64>::new(vec![]), Err(Error::EmptyEnsemble)));
        let w = DensityMatrix::<f64>::maximally_mixed(3);
        assert!(matches!(Ensemble::new(vec![(0.5, z), (0.5, w)]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn single_precision_generators() {
        let rho = random_density::<f32>(3, 3, 1).unwrap();
        assert!(validate_density(rho.matrix()).is_ok());
        assert!(random_unitary::<f32>(4, 2).unitarity_defect() < 1e-5);
    }
}
