//! Dense complex matrix kernels.
//!
//! The eigensolver is a cyclic complex Jacobi method and singular values come
//! from one-sided (Hestenes) Jacobi. Both are slow compared to Householder
//! based solvers but are accurate to a few ulps of the matrix norm, keep small
//! singular values to full relative accuracy, and are deterministic. Matrices
//! in this crate rarely exceed 16x16.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{one, real, zero, Real};

const MAX_SWEEPS: usize = 80;

/// Eigenvalues of a Hermitian operator counted as positive by [`positive_part`].
pub const POSITIVE_TIE: f64 = 1e-12;

/// Default relative support threshold for pseudo-inverses.
pub const SUPPORT_REL_TOL: f64 = 1e-10;

/// Eigenvalues below this many ulps of the spectral radius are treated as
/// exact zeros by the square-root kernels.
const NOISE_ULPS: f64 = 64.0;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: fmt::Display> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let bad = data
            .iter()
            .filter(|z| !(z.re.is_finite() && z.im.is_finite()))
            .count();
        if bad > 0 {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| real(x)).collect())
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = real(d);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// `|u><v|`
    pub fn outer2(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(zero(), |acc, i| acc + self[(i, i)])
    }

    /// Real part of the trace; the imaginary part of a Hermitian trace is noise.
    pub fn trace_re(&self) -> T {
        self.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |s, z| s + z.norm_sqr())
            .sqrt()
    }

    /// `max |H - H^dag|`
    pub fn hermiticity_defect(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    /// `(H + H^dag) / 2`
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    /// `max |U^dag U - I|`
    pub fn unitarity_defect(&self) -> T {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.cols))
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex<T>]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// `A X A^dag`
    pub fn sandwich(&self, x: &Self) -> Self {
        &(self * x) * &self.adjoint()
    }

    /// `A^dag X A`
    pub fn sandwich_adj(&self, x: &Self) -> Self {
        &(&self.adjoint() * x) * self
    }

    /// `Re tr(A B)` without forming the product.
    pub fn trace_product_re(&self, other: &Self) -> T {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut s = T::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                s += (self[(i, k)] * other[(k, i)]).re;
            }
        }
        s
    }

    fn apply_right_rotation(&mut self, p: usize, q: usize, g: &Rot2<T>) {
        for r in 0..self.rows {
            let a = self.data[r * self.cols + p];
            let b = self.data[r * self.cols + q];
            self.data[r * self.cols + p] = a * g.pp + b * g.qp;
            self.data[r * self.cols + q] = a * g.pq + b * g.qq;
        }
    }

    fn apply_left_rotation_adj(&mut self, p: usize, q: usize, g: &Rot2<T>) {
        let (gpp, gqp, gpq, gqq) = (g.pp.conj(), g.qp.conj(), g.pq.conj(), g.qq.conj());
        for c in 0..self.cols {
            let a = self.data[p * self.cols + c];
            let b = self.data[q * self.cols + c];
            self.data[p * self.cols + c] = gpp * a + gqp * b;
            self.data[q * self.cols + c] = gpq * a + gqq * b;
        }
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * *b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> AddAssign<&ComplexMatrix<T>> for ComplexMatrix<T> {
    fn add_assign(&mut self, rhs: &ComplexMatrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += *b;
        }
    }
}

impl<T: Real> SubAssign<&ComplexMatrix<T>> for ComplexMatrix<T> {
    fn sub_assign(&mut self, rhs: &ComplexMatrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= *b;
        }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

/// `<a|b>`
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(zero(), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}

/// 2x2 unitary acting on coordinates `p`, `q`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Rot2<T> {
    pp: Complex<T>,
    pq: Complex<T>,
    qp: Complex<T>,
    qq: Complex<T>,
}

/// Rotation `G` with `G^dag [[app, apq], [conj(apq), aqq]] G` diagonal.
/// Returns the rotation and `t`, with new diagonal `app - t|apq|`, `aqq + t|apq|`.
fn jacobi_rotation<T: Real>(app: T, aqq: T, apq: Complex<T>) -> (Rot2<T>, T) {
    let abs = apq.norm();
    let phase = apq / abs;
    let theta = (aqq - app) / (T::lit(2.0) * abs);
    let t = if theta.abs() > T::lit(1e150) {
        T::lit(0.5) / theta
    } else {
        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let pc = phase.conj();
    (
        Rot2 {
            pp: real(c),
            pq: real(s),
            qp: pc * (-s),
            qq: pc * c,
        },
        t,
    )
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum<T: fmt::Display> {
    pub eigenvalues: Vec<T>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(k)
    }

    /// `V diag(f(lambda)) V^dag`
    pub fn apply(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.dim();
        let vals: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in vals.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    /// `V diag(g(lambda)) V^dag` for a complex-valued spectral function.
    pub fn apply_complex(&self, g: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let w = g(self.eigenvalues[k]);
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.apply(|l| l)
    }
}

fn check_hermitian<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    h.ensure_square()?;
    let defect = h.hermiticity_defect();
    if !(defect <= T::tol(1e-8)) {
        return Err(Error::NonHermitian {
            deviation: defect.as_f64(),
        });
    }
    Ok(h.hermitian_part())
}

/// Hermitian eigen-decomposition. The input is symmetrized first.
pub fn eigh<T: Real>(h: &ComplexMatrix<T>) -> Result<Spectrum<T>> {
    let a = check_hermitian(h)?;
    jacobi_eigh(a)
}

fn jacobi_eigh<T: Real>(mut a: ComplexMatrix<T>) -> Result<Spectrum<T>> {
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)].im = T::zero();
    }
    let eps = T::epsilon();
    let norm = a.frobenius_norm();
    let abs_floor = eps * T::lit(1e-3) * norm;
    let mut converged = norm == T::zero() || n < 2;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence(format!(
                "Jacobi eigensolver exceeded {MAX_SWEEPS} sweeps on a {n}x{n} matrix"
            )));
        }
        sweep += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if abs <= abs_floor || abs <= eps * T::lit(0.5) * (app.abs() * aqq.abs()).sqrt() {
                    a[(p, q)] = zero();
                    a[(q, p)] = zero();
                    continue;
                }
                rotated = true;
                let (g, t) = jacobi_rotation(app, aqq, apq);
                a.apply_right_rotation(p, q, &g);
                a.apply_left_rotation_adj(p, q, &g);
                a[(p, p)] = real(app - t * abs);
                a[(q, q)] = real(aqq + t * abs);
                a[(p, q)] = zero();
                a[(q, p)] = zero();
                v.apply_right_rotation(p, q, &g);
            }
        }
        converged = !rotated;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| a[(i, i)].re).collect(),
        eigenvectors: v.columns(&order),
    })
}

/// Thin singular value decomposition `M = U diag(s) V^dag`, `s` descending.
#[derive(Clone, Debug)]
pub struct Svd<T: fmt::Display> {
    /// `rows x cols`; columns for zero singular values are zero.
    pub u: ComplexMatrix<T>,
    pub singular_values: Vec<T>,
    /// `cols x cols` unitary.
    pub v: ComplexMatrix<T>,
}

/// One-sided Jacobi SVD.
pub fn svd<T: Real>(m: &ComplexMatrix<T>) -> Result<Svd<T>> {
    let (rows, n) = (m.rows, m.cols);
    let mut w = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();
    let frob = m.frobenius_norm();
    // pairs whose inner product is below this are orthogonal up to rounding
    let abs_floor = T::of_usize(n.max(1)) * eps * eps * frob * frob;
    let mut sweep = 0;
    loop {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence(format!(
                "one-sided Jacobi SVD exceeded {MAX_SWEEPS} sweeps on a {rows}x{n} matrix"
            )));
        }
        sweep += 1;
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), zero::<T>());
                for r in 0..rows {
                    let a = w[(r, p)];
                    let b = w[(r, q)];
                    alpha += a.norm_sqr();
                    beta += b.norm_sqr();
                    gamma += a.conj() * b;
                }
                let g = gamma.norm();
                if g <= abs_floor || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (rot, _) = jacobi_rotation(alpha, beta, gamma);
                w.apply_right_rotation(p, q, &rot);
                v.apply_right_rotation(p, q, &rot);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = (0..n).map(|j| norm(&w.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));
    let mut u = ComplexMatrix::zeros(rows, n);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > T::zero() {
            let inv = T::one() / norms[j];
            let col: Vec<_> = w.column(j).into_iter().map(|z| z * inv).collect();
            u.set_column(k, &col);
        }
    }
    Ok(Svd {
        u,
        singular_values: order.iter().map(|&j| norms[j]).collect(),
        v: v.columns(&order),
    })
}

pub fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(m)?.singular_values)
}

/// Sum of singular values.
pub fn trace_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    m.ensure_square()?;
    Ok(singular_values(m)?.into_iter().fold(T::zero(), |a, s| a + s))
}

/// Smallest eigenvalue accepted as a clipped zero: `-1e-10 max(1, lambda_max)`.
fn psd_band<T: Real>(spec: &Spectrum<T>) -> T {
    T::tol(1e-10) * spec.max().max(T::one())
}

fn ensure_psd<T: Real>(spec: &Spectrum<T>) -> Result<()> {
    let min = spec.min();
    if min < -psd_band(spec) {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(())
}

fn noise_floor<T: Real>(spec: &Spectrum<T>) -> T {
    let radius = spec.max().abs().max(spec.min().abs());
    T::lit(NOISE_ULPS) * T::epsilon() * radius
}

/// Principal square root of a PSD matrix.
pub fn psd_sqrt<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let spec = eigh(h)?;
    psd_sqrt_of(&spec)
}

/// Square root from an existing decomposition.
pub fn psd_sqrt_of<T: Real>(spec: &Spectrum<T>) -> Result<ComplexMatrix<T>> {
    ensure_psd(spec)?;
    let floor = noise_floor(spec);
    Ok(spec.apply(|l| if l > floor { l.sqrt() } else { T::zero() }))
}

/// `H^{-1/2}` on the support `lambda > rel_tol * lambda_max`, zero elsewhere.
pub fn psd_inv_sqrt<T: Real>(h: &ComplexMatrix<T>, rel_tol: T) -> Result<ComplexMatrix<T>> {
    Ok(psd_inv_sqrt_with_support(h, rel_tol)?.0)
}

/// Like [`psd_inv_sqrt`], also returning the support projector.
pub fn psd_inv_sqrt_with_support<T: Real>(
    h: &ComplexMatrix<T>,
    rel_tol: T,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let spec = eigh(h)?;
    ensure_psd(&spec)?;
    let cut = rel_tol * spec.max();
    let on = |l: T| l > cut && l > T::zero();
    let inv = spec.apply(|l| if on(l) { T::one() / l.sqrt() } else { T::zero() });
    let support = spec.apply(|l| if on(l) { T::one() } else { T::zero() });
    Ok((inv, support))
}

/// Jordan positive part of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct PositivePart<T: fmt::Display> {
    /// `sum_{lambda > 0} lambda v v^dag`
    pub matrix: ComplexMatrix<T>,
    /// `sum_{lambda > 1e-12} v v^dag`
    pub projector: ComplexMatrix<T>,
    pub spectrum: Spectrum<T>,
}

pub fn positive_part<T: Real>(h: &ComplexMatrix<T>) -> Result<PositivePart<T>> {
    let spectrum = eigh(h)?;
    let tie = T::tol(POSITIVE_TIE);
    let matrix = spectrum.apply(|l| if l > T::zero() { l } else { T::zero() });
    let projector = spectrum.apply(|l| if l > tie { T::one() } else { T::zero() });
    Ok(PositivePart {
        matrix,
        projector,
        spectrum,
    })
}

/// `exp(i t H)` for Hermitian `H`.
pub fn unitary_exp<T: Real>(h: &ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>> {
    let spec = eigh(h)?;
    Ok(spec.apply_complex(|l| Complex::from_polar(T::one(), t * l)))
}

/// Which tensor factor of a bipartite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    A,
    B,
}

/// Partial trace over one factor of an `(n_a n_b)`-dimensional operator,
/// keeping the other. Index convention: `|i>_a |k>_b -> i * n_b + k`.
pub fn partial_trace<T: Real>(
    rho: &ComplexMatrix<T>,
    n_a: usize,
    n_b: usize,
    keep: Party,
) -> Result<ComplexMatrix<T>> {
    let n = n_a * n_b;
    if rho.rows != n || rho.cols != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for a {n_a}x{n_b} split",
            rho.rows, rho.cols
        )));
    }
    Ok(match keep {
        Party::A => ComplexMatrix::from_fn(n_a, n_a, |i, j| {
            (0..n_b).fold(zero(), |acc, k| acc + rho[(i * n_b + k, j * n_b + k)])
        }),
        Party::B => ComplexMatrix::from_fn(n_b, n_b, |k, l| {
            (0..n_a).fold(zero(), |acc, i| acc + rho[(i * n_b + k, i * n_b + l)])
        }),
    })
}

pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

pub fn kron_vec<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Gram-Schmidt with one re-orthogonalization pass. Returns `Q` and the
/// (positive) diagonal of `R`.
pub fn orthonormalize_columns<T: Real>(m: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, Vec<T>)> {
    let (rows, cols) = (m.rows, m.cols);
    if cols > rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot orthonormalize {cols} columns in dimension {rows}"
        )));
    }
    let mut q = ComplexMatrix::zeros(rows, cols);
    let mut diag = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = m.column(j);
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.column(k);
                let c = inner(&qk, &v);
                for (vi, qi) in v.iter_mut().zip(&qk) {
                    *vi -= *qi * c;
                }
            }
        }
        let nv = norm(&v);
        if !(nv > T::epsilon()) {
            return Err(Error::InvalidArgument("columns are linearly dependent".into()));
        }
        let inv = T::one() / nv;
        let col: Vec<_> = v.into_iter().map(|z| z * inv).collect();
        q.set_column(j, &col);
        diag.push(nv);
    }
    Ok((q, diag))
}

/// Closed-form eigen-decomposition of a 2x2 Hermitian matrix
/// `[[a, b], [conj(b), d]]`, eigenvalues ascending, eigenvectors as columns.
pub(crate) fn eigh2<T: Real>(a: T, b: Complex<T>, d: T) -> ([T; 2], [[Complex<T>; 2]; 2]) {
    let abs = b.norm();
    if abs == T::zero() {
        return if a <= d {
            ([a, d], [[one(), zero()], [zero(), one()]])
        } else {
            ([d, a], [[zero(), one()], [one(), zero()]])
        };
    }
    let (g, t) = jacobi_rotation(a, d, b);
    let lp = a - t * abs;
    let lq = d + t * abs;
    // columns of g are the eigenvectors for lp and lq
    let vp = [g.pp, g.qp];
    let vq = [g.pq, g.qq];
    if lp <= lq {
        ([lp, lq], [vp, vq])
    } else {
        ([lq, lp], [vq, vp])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            cplx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&g + &g.adjoint()).scale(0.5)
    }

    #[test]
    fn diagonal_spectrum() {
        let s = eigh(&ComplexMatrix::<f64>::from_diag(&[3.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 3.0]);
        assert!((s.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((s.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::<f64>::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = eigh(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        for n in 2..=8 {
            for seed in 0..100 {
                let h = random_hermitian(n, seed * 31 + n as u64);
                let s = eigh(&h).unwrap();
                assert!(s.reconstruct().max_abs_diff(&h) <= 1e-9);
                assert!(s.eigenvectors.unitarity_defect() <= 1e-10);
                assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn eigh_rejects_bad_input() {
        let m = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(eigh(&m), Err(Error::NonSquare { .. })));
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn sqrt_kernels() {
        let r = psd_sqrt(&ComplexMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
        let i3 = ComplexMatrix::<f64>::identity(3);
        assert!(psd_sqrt(&i3).unwrap().max_abs_diff(&i3) < 1e-15);
        let h = 0.5f64.sqrt();
        let plus = ComplexMatrix::outer(&[cplx(h, 0.0), cplx(h, 0.0)]);
        assert!(psd_sqrt(&plus).unwrap().max_abs_diff(&plus) < 1e-14);
        assert!(matches!(
            psd_sqrt(&ComplexMatrix::from_diag(&[1.0, -1e-3])),
            Err(Error::NotPsd { .. })
        ));
        // inside the clipping band
        let clipped = psd_sqrt(&ComplexMatrix::from_diag(&[1.0, -1e-12])).unwrap();
        assert_eq!(clipped[(1, 1)].re, 0.0);
    }

    #[test]
    fn inverse_sqrt_on_support() {
        let r = psd_inv_sqrt(&ComplexMatrix::from_diag(&[4.0, 0.0]), 1e-10).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diag(&[0.5, 0.0])) < 1e-15);
        let i2 = ComplexMatrix::<f64>::identity(2);
        assert!(psd_inv_sqrt(&i2, 1e-10).unwrap().max_abs_diff(&i2) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ComplexMatrix::from_fn(4, 4, |_, _| cplx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let p = &g * &g.adjoint();
        let r = psd_inv_sqrt(&p, 1e-10).unwrap();
        let prod = &(&r * &r) * &p;
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-8);
    }

    #[test]
    fn trace_norm_values() {
        assert!((trace_norm(&ComplexMatrix::<f64>::from_diag(&[1.0, -2.0])).unwrap() - 3.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        let plus = ComplexMatrix::outer(&[cplx(h, 0.0), cplx(h, 0.0)]);
        let zero_proj = ComplexMatrix::from_diag(&[1.0, 0.0]);
        let lambda = (&zero_proj - &plus).scale(0.5);
        assert!((trace_norm(&lambda).unwrap() - h).abs() < 1e-14);
        let x = ComplexMatrix::<f64>::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((trace_norm(&x).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            trace_norm(&ComplexMatrix::<f64>::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = ComplexMatrix::from_fn(3, 5, |_, _| cplx(rng.random::<f64>() - 0.5, rng.random::<f64>()));
        let s = svd(&m).unwrap();
        let sig = ComplexMatrix::from_diag(&s.singular_values);
        let back = &(&s.u * &sig) * &s.v.adjoint();
        assert!(back.max_abs_diff(&m) < 1e-13);
        assert!(s.singular_values[3] < 1e-14 && s.singular_values[4] < 1e-14);
    }

    #[test]
    fn positive_part_cases() {
        let pp = positive_part(&ComplexMatrix::from_diag(&[2.0, -3.0])).unwrap();
        assert!(pp.matrix.max_abs_diff(&ComplexMatrix::from_diag(&[2.0, 0.0])) < 1e-15);
        assert!(pp.projector.max_abs_diff(&ComplexMatrix::from_diag(&[1.0, 0.0])) < 1e-15);
        let z = ComplexMatrix::<f64>::zeros(3, 3);
        let pz = positive_part(&z).unwrap();
        assert_eq!(pz.matrix.max_abs(), 0.0);
        assert_eq!(pz.projector.max_abs(), 0.0);
        let psd = ComplexMatrix::from_diag(&[0.3, 0.7]);
        assert!(positive_part(&psd).unwrap().matrix.max_abs_diff(&psd) < 1e-15);
    }

    #[test]
    fn kron_and_partial_trace() {
        let i2 = ComplexMatrix::<f64>::identity(2);
        let i3 = ComplexMatrix::<f64>::identity(3);
        assert_eq!(kron(&i2, &i3), ComplexMatrix::identity(6));
        let p0 = ComplexMatrix::from_diag(&[1.0, 0.0]);
        assert_eq!(kron(&p0, &i2), ComplexMatrix::from_diag(&[1.0, 1.0, 0.0, 0.0]));

        let h = 0.5f64.sqrt();
        let bell = ComplexMatrix::outer(&[cplx(h, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(h, 0.0)]);
        let ra = partial_trace(&bell, 2, 2, Party::A).unwrap();
        assert!(ra.max_abs_diff(&i2.scale(0.5)) < 1e-15);

        let a = ComplexMatrix::from_diag(&[0.25, 0.75]);
        let b = ComplexMatrix::from_diag(&[0.5, 0.2, 0.3]);
        let ab = kron(&a, &b);
        assert!(partial_trace(&ab, 2, 3, Party::A).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(partial_trace(&ab, 2, 3, Party::B).unwrap().max_abs_diff(&b) < 1e-15);
        assert!(partial_trace(&ab, 3, 3, Party::A).is_err());
    }

    #[test]
    fn eigh2_matches_general_solver() {
        let (vals, vecs) = eigh2(0.3f64, cplx(0.1, -0.2), 0.9);
        let full = eigh(&ComplexMatrix::from_vec(2, 2, vec![cplx(0.3, 0.0), cplx(0.1, -0.2), cplx(0.1, 0.2), cplx(0.9, 0.0)]).unwrap()).unwrap();
        assert!((vals[0] - full.eigenvalues[0]).abs() < 1e-15);
        assert!((vals[1] - full.eigenvalues[1]).abs() < 1e-15);
        let m = ComplexMatrix::from_vec(2, 2, vec![cplx(0.3, 0.0), cplx(0.1, -0.2), cplx(0.1, 0.2), cplx(0.9, 0.0)]).unwrap();
        for k in 0..2 {
            let v = [vecs[k][0], vecs[k][1]];
            let mv = m.mul_vec(&v);
            assert!((mv[0] - v[0] * vals[k]).norm() < 1e-14);
            assert!((mv[1] - v[1] * vals[k]).norm() < 1e-14);
        }
    }
}
