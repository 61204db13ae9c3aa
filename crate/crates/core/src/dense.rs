//! Self-contained dense symmetric linear algebra.
//!
//! Everything here is the exact oracle path: a cyclic Jacobi
//! eigendecomposition, matrix functions built on it, Cholesky factorization
//! for the accelerated integer-power routes, and the subspace geometry used
//! to compare eigenspaces. No external linear algebra backend is involved,
//! so the Krylov solvers elsewhere in the crate can be validated against a
//! fully independent computation.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense symmetric matrix, row-major storage of the full square.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Real> SymMatrix<F> {
    /// Zero matrix of order `n`.
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![F::zero(); n * n] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds from a generator; the entry stored at `(i, j)` and `(j, i)` is
    /// `f(i, j)` with `i <= j`, so symmetry holds by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Builds from row-major raw data, enforcing exact symmetry and
    /// finiteness.
    pub fn from_rows(n: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v != data[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    /// Sets entry `(i, j)` and its mirror.
    pub fn set_sym(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    /// `self + c*I`.
    pub fn add_scaled_identity(&self, c: F) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += c;
        }
        out
    }

    /// `self + other`, checked dimensions.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self { n: self.n, data })
    }

    /// `self - other`, checked dimensions.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self { n: self.n, data })
    }

    /// `c * self`.
    pub fn scale(&self, c: F) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| a * c).collect() }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[F], y: &mut [F]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let mut acc = F::zero();
            for j in 0..n {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
    }

    /// Symmetric product `A * B` symmetrized against roundoff; intended for
    /// products that are symmetric in exact arithmetic (powers of `A`,
    /// congruences).
    pub fn mul_sym(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let n = self.n;
        let mut raw = vec![F::zero(); n * n];
        for i in 0..n {
            let arow = &self.data[i * n..(i + 1) * n];
            let out_row = &mut raw[i * n..(i + 1) * n];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == F::zero() {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for j in 0..n {
                    out_row[j] += aik * brow[j];
                }
            }
        }
        let half = F::real(0.5);
        let mut m = Self { n, data: raw };
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (m.data[i * n + j] + m.data[j * n + i]) * half;
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        Ok(m)
    }

    /// Congruence `S X S` for symmetric `S = self` and symmetric `X`; the
    /// non-symmetric intermediate `S X` is kept in full, only the final
    /// (symmetric in exact arithmetic) product is symmetrized.
    pub fn congruence(&self, inner: &Self) -> Result<Self> {
        if self.n != inner.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: inner.n });
        }
        let n = self.n;
        let mut tmp = vec![F::zero(); n * n];
        for i in 0..n {
            let srow = &self.data[i * n..(i + 1) * n];
            let out_row = &mut tmp[i * n..(i + 1) * n];
            for (k, &sik) in srow.iter().enumerate() {
                if sik == F::zero() {
                    continue;
                }
                let xrow = &inner.data[k * n..(k + 1) * n];
                for j in 0..n {
                    out_row[j] += sik * xrow[j];
                }
            }
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            let trow = &tmp[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &tik) in trow.iter().enumerate() {
                if tik == F::zero() {
                    continue;
                }
                let srow = &self.data[k * n..(k + 1) * n];
                for j in 0..n {
                    out_row[j] += tik * srow[j];
                }
            }
        }
        let half = F::real(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (out.data[i * n + j] + out.data[j * n + i]) * half;
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        Ok(out)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> F {
        self.data.iter().map(|&a| a * a).sum::<F>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |m, &a| m.max(a.abs()))
    }

    /// Checks all entries are finite.
    pub fn validate_finite(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.get(i, j).is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

/// Column-major block of vectors: eigenvector bases, embeddings, Krylov
/// bases. Column `j` is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> ColMat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<F>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, got: c.len() });
            }
            m.col_mut(j).copy_from_slice(c);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[F] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [F] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Entry at `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[j * self.rows + i]
    }

    /// Keeps the first `k` columns.
    pub fn truncated(&self, k: usize) -> Self {
        let mut out = Self::zeros(self.rows, k);
        out.data.copy_from_slice(&self.data[..self.rows * k]);
        out
    }

    /// Appends a column.
    pub fn push_col(&mut self, c: &[F]) {
        debug_assert_eq!(c.len(), self.rows);
        self.data.extend_from_slice(c);
        self.cols += 1;
    }

    /// Row `i` gathered into a vector (rows are strided).
    pub fn row_vec(&self, i: usize) -> Vec<F> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// `self * small` where `small` is `cols x k`, row-major.
    pub fn mul_small(&self, small: &[F], k: usize) -> Self {
        debug_assert_eq!(small.len(), self.cols * k);
        let mut out = Self::zeros(self.rows, k);
        for j in 0..k {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for l in 0..self.cols {
                let c = small[l * k + j];
                if c == F::zero() {
                    continue;
                }
                let col_l = &self.data[l * self.rows..(l + 1) * self.rows];
                for (o, &v) in out_col.iter_mut().zip(col_l) {
                    *o += c * v;
                }
            }
        }
        out
    }

    /// `self^T * other`, returned row-major as `(self.cols x other.cols)`.
    pub fn transpose_mul(&self, other: &Self) -> Vec<F> {
        debug_assert_eq!(self.rows, other.rows);
        let mut out = vec![F::zero(); self.cols * other.cols];
        for a in 0..self.cols {
            let ca = self.col(a);
            for b in 0..other.cols {
                let cb = other.col(b);
                out[a * other.cols + b] = dot(ca, cb);
            }
        }
        out
    }

    /// Max-abs deviation of `self^T self` from the identity.
    pub fn orthonormality_defect(&self) -> F {
        let g = self.transpose_mul(self);
        let mut worst = F::zero();
        for a in 0..self.cols {
            for b in 0..self.cols {
                let target = if a == b { F::one() } else { F::zero() };
                worst = worst.max((g[a * self.cols + b] - target).abs());
            }
        }
        worst
    }

    /// In-place modified Gram-Schmidt with a second pass. Columns that lose
    /// rank are replaced by a deterministic fill derived from `fill_seed`
    /// and re-orthonormalized; returns how many were replaced.
    pub fn orthonormalize(&mut self, fill_seed: u64) -> usize {
        let mut replaced = 0;
        for j in 0..self.cols {
            let mut attempt = 0u64;
            loop {
                for _pass in 0..2 {
                    for l in 0..j {
                        let r = dot(self.col(l), self.col(j));
                        let (head, tail) = self.data.split_at_mut(j * self.rows);
                        let cl = &head[l * self.rows..(l + 1) * self.rows];
                        let cj = &mut tail[..self.rows];
                        for (x, &y) in cj.iter_mut().zip(cl) {
                            *x -= r * y;
                        }
                    }
                }
                let norm = norm2(self.col(j));
                if norm > F::real(1e-14) {
                    let inv = F::one() / norm;
                    for x in self.col_mut(j) {
                        *x *= inv;
                    }
                    break;
                }
                // Rank loss: refill deterministically and retry.
                replaced += 1;
                attempt += 1;
                let seed = fill_seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(j as u64)
                    .wrapping_add(attempt << 32);
                let mut state = seed | 1;
                for x in self.col_mut(j) {
                    // xorshift64* stream; quality is irrelevant, determinism is not
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                    *x = F::real(2.0 * u - 1.0);
                }
            }
        }
        replaced
    }
}

#[inline]
pub(crate) fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    let mut acc = F::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

#[inline]
pub(crate) fn norm2<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Full spectral factorization `A = V diag(values) V^T`.
///
/// `values` ascend; column `j` of `vectors` pairs with `values[j]`. Within a
/// numerically tied group the column order is whatever the Jacobi sweep
/// produced, so consumers must be span-invariant.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<F> {
    pub values: Vec<F>,
    pub vectors: ColMat<F>,
}

impl<F: Real> EigenDecomposition<F> {
    /// Reassembles `V diag(f(values)) V^T`.
    pub fn assemble(&self, f: impl Fn(F) -> F) -> SymMatrix<F> {
        let n = self.vectors.rows();
        let mut m = SymMatrix::zeros(n);
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == F::zero() {
                continue;
            }
            let v = self.vectors.col(j);
            for i in 0..n {
                let c = w * v[i];
                let row = &mut m.data[i * n..(i + 1) * n];
                for (r, &vk) in row.iter_mut().zip(v) {
                    *r += c * vk;
                }
            }
        }
        let half = F::real(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (m.data[i * n + j] + m.data[j * n + i]) * half;
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// First `k` eigenvectors as a column block.
    pub fn bottom_vectors(&self, k: usize) -> ColMat<F> {
        self.vectors.truncated(k)
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps
/// with a small-element threshold.
///
/// Sweeps continue past the `1e-12 * ||A||_F` off-diagonal level down to
/// machine scale while quadratic convergence keeps paying off; matrices
/// with a wide eigenvalue spread (powered operators) need the extra sweep
/// for their small-eigenvalue eigenvectors to come out to full relative
/// accuracy. Deterministic for fixed input.
pub fn eigh<F: Real>(a: &SymMatrix<F>) -> Result<EigenDecomposition<F>> {
    a.validate_finite()?;
    let n = a.order();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: ColMat::zeros(0, 0) });
    }
    let norm_f = a.frobenius_norm();
    let tol = norm_f * F::real(1e-12).max(F::epsilon() * F::real(4.0));
    let tol_hard = norm_f * (F::epsilon() * F::real(2.0)).max(F::real(1e-15));

    let mut work = a.data.clone();
    // Eigenvector accumulator stored transposed: row j holds eigenvector j,
    // so the Jacobi column rotation touches two contiguous rows.
    let mut vt = vec![F::zero(); n * n];
    for i in 0..n {
        vt[i * n + i] = F::one();
    }

    let tiny = F::epsilon() * F::real(0.5);
    let mut sweeps = 0;
    let mut prev_off = F::infinity();
    loop {
        let mut off2 = F::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = work[i * n + j];
                off2 += v * v;
            }
        }
        let off = (off2 + off2).sqrt();
        if off <= tol_hard || norm_f == F::zero() {
            break;
        }
        // past the nominal tolerance, stop once progress stalls
        if off <= tol && off > prev_off * F::real(0.25) {
            break;
        }
        if sweeps >= MAX_JACOBI_SWEEPS {
            if off <= tol {
                break;
            }
            return Err(Error::EigensolverStalled { sweeps });
        }
        prev_off = off;
        sweeps += 1;

        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = work[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let app = work[p * n + p];
                let aqq = work[q * n + q];
                if apq.abs() <= tiny * (app.abs() + aqq.abs()) {
                    work[p * n + q] = F::zero();
                    work[q * n + p] = F::zero();
                    continue;
                }
                let theta = (aqq - app) / (apq + apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + F::one()).sqrt();
                    if theta < F::zero() {
                        -(F::one() / denom)
                    } else {
                        F::one() / denom
                    }
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;

                // Rows p and q of the working matrix.
                rotate_pair(&mut work, n, p, q, c, s);
                // Columns p and q (mirror of the rows by symmetry).
                for i in 0..n {
                    let aip = work[i * n + p];
                    let aiq = work[i * n + q];
                    work[i * n + p] = c * aip - s * aiq;
                    work[i * n + q] = s * aip + c * aiq;
                }
                work[p * n + q] = F::zero();
                work[q * n + p] = F::zero();
                // Accumulate the rotation into the (transposed) basis.
                rotate_pair(&mut vt, n, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        work[i * n + i].partial_cmp(&work[j * n + j]).expect("finite eigenvalues")
    });
    let values: Vec<F> = order.iter().map(|&i| work[i * n + i]).collect();
    let mut vectors = ColMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(&vt[src * n..(src + 1) * n]);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Applies the plane rotation to rows `p`, `q` of a row-major square matrix.
#[inline]
fn rotate_pair<F: Real>(m: &mut [F], n: usize, p: usize, q: usize, c: F, s: F) {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = m.split_at_mut(hi * n);
    let row_lo = &mut head[lo * n..(lo + 1) * n];
    let row_hi = &mut tail[..n];
    if lo == p {
        for (a, b) in row_lo.iter_mut().zip(row_hi.iter_mut()) {
            let x = *a;
            let y = *b;
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    } else {
        for (a, b) in row_hi.iter_mut().zip(row_lo.iter_mut()) {
            let x = *a;
            let y = *b;
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    }
}

/// `A^p` through the spectral map `V diag(lambda^p) V^T`.
///
/// For `p < 0` or fractional `p` every eigenvalue must be at least `floor`,
/// which must be positive. Eigenvalues within `1e-12 * floor` below the
/// floor are treated as roundoff and clamped to it; anything lower is a
/// domain error carrying the offending eigenvalue.
pub fn sym_power<F: Real>(a: &SymMatrix<F>, p: F, floor: F) -> Result<SymMatrix<F>> {
    let needs_floor = p < F::zero() || p.fract() != F::zero();
    let eig = eigh(a)?;
    let mut lambdas = eig.values.clone();
    if needs_floor {
        if floor <= F::zero() {
            return Err(Error::Parameter(format!(
                "sym_power with p={p} requires a positive eigenvalue floor"
            )));
        }
        let rescue = floor * F::real(1e-12);
        for l in lambdas.iter_mut() {
            if *l < floor {
                if floor - *l <= rescue {
                    *l = floor;
                } else {
                    return Err(Error::EigenvalueBelowFloor {
                        value: l.to_f64().unwrap_or(f64::NAN),
                        floor: floor.to_f64().unwrap_or(f64::NAN),
                        exponent: p.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
    }
    let integral = p.fract() == F::zero();
    let rebuilt = EigenDecomposition { values: lambdas, vectors: eig.vectors };
    Ok(rebuilt.assemble(|l| {
        if integral {
            l.powi64(p.to_i64().unwrap_or(0))
        } else {
            l.powf(p)
        }
    }))
}

/// Largest absolute eigenvalue.
///
/// Small matrices go through the full eigendecomposition; larger ones run
/// the orthogonalized power iteration of the Krylov module against both
/// ends of the spectrum.
pub fn spectral_norm<F: Real>(a: &SymMatrix<F>) -> Result<F> {
    a.validate_finite()?;
    let n = a.order();
    if n == 0 {
        return Ok(F::zero());
    }
    if n <= 128 {
        let eig = eigh(a)?;
        return Ok(eig
            .values
            .iter()
            .fold(F::zero(), |m, &l| m.max(l.abs())));
    }
    crate::krylov::extreme_magnitude(a)
}

/// Geometric mean of two symmetric positive definite matrices,
/// `A^(1/2) (A^(-1/2) B A^(-1/2))^(1/2) A^(1/2)`.
///
/// Singular (or indefinite) input is a domain error.
pub fn geometric_mean<F: Real>(a: &SymMatrix<F>, b: &SymMatrix<F>) -> Result<SymMatrix<F>> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch { expected: a.order(), got: b.order() });
    }
    let ea = eigh(a)?;
    check_positive_definite(&ea.values, "geometric_mean first argument")?;
    let half = F::real(0.5);
    let a_sqrt = ea.assemble(|l| l.powf(half));
    let a_isqrt = ea.assemble(|l| l.powf(-half));
    let inner = a_isqrt.congruence(b)?;
    let ei = eigh(&inner)?;
    check_positive_definite(&ei.values, "geometric_mean second argument")?;
    let inner_sqrt = ei.assemble(|l| l.max(F::zero()).sqrt());
    a_sqrt.congruence(&inner_sqrt)
}

fn check_positive_definite<F: Real>(values: &[F], what: &str) -> Result<()> {
    match values.first() {
        Some(&min) if min <= F::zero() => Err(Error::Parameter(format!(
            "{what} is not positive definite (smallest eigenvalue {min})"
        ))),
        None => Err(Error::Parameter(format!("{what} is empty"))),
        _ => Ok(()),
    }
}

/// Distance `min_O ||U - V O||_2` over orthogonal `O`, i.e.
/// `sqrt(2 (1 - cos(theta_max)))` in terms of the largest principal angle
/// between the column spans.
///
/// Both inputs must have orthonormal columns (checked to `1e-8`) and equal
/// shapes. A rank-deficient `V^T U` is fine; the distance is still defined.
pub fn subspace_distance<F: Real>(u: &ColMat<F>, v: &ColMat<F>) -> Result<F> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch { expected: u.rows() * u.cols(), got: v.rows() * v.cols() });
    }
    let check = F::real(1e-8);
    for m in [u, v] {
        let defect = m.orthonormality_defect();
        if defect > check {
            return Err(Error::NotOrthonormal { deviation: defect.to_f64().unwrap_or(f64::NAN) });
        }
    }
    let k = u.cols();
    if k == 0 {
        return Ok(F::zero());
    }
    // Smallest singular value of V^T U via the Gram matrix.
    let m = v.transpose_mul(u);
    let mut gram = SymMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let mut acc = F::zero();
            for l in 0..k {
                acc += m[l * k + i] * m[l * k + j];
            }
            gram.set_sym(i, j, acc);
        }
    }
    let eig = eigh(&gram)?;
    let sigma_min = eig.values[0].max(F::zero()).sqrt().min(F::one());
    Ok(((F::one() - sigma_min) * F::real(2.0)).sqrt())
}

/// Cholesky factorization `A = L L^T` of a symmetric positive definite
/// matrix; the backbone of the accelerated integer-power routes.
#[derive(Debug, Clone)]
pub struct Cholesky<F> {
    n: usize,
    lower: Vec<F>,
}

impl<F: Real> Cholesky<F> {
    pub fn factor(a: &SymMatrix<F>) -> Result<Self> {
        let n = a.order();
        let mut l = vec![F::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= F::zero() {
                        return Err(Error::NotPositiveDefinite {
                            index: i,
                            value: sum.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { n, lower: l })
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [F]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.lower[i * n + k] * b[k];
            }
            b[i] = sum / self.lower[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in (i + 1)..n {
                sum -= self.lower[k * n + i] * b[k];
            }
            b[i] = sum / self.lower[i * n + i];
        }
    }

    /// Dense inverse `A^{-1}`.
    pub fn inverse(&self) -> SymMatrix<F> {
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        let mut col = vec![F::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = F::zero());
            col[j] = F::one();
            self.solve_in_place(&mut col);
            for i in 0..n {
                out.data[i * n + j] = col[i];
            }
        }
        // Symmetrize the roundoff.
        let half = F::real(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (out.data[i * n + j] + out.data[j * n + i]) * half;
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }
}

/// `A^m` for integer `m >= 1` by repeated squaring.
pub fn sym_int_pow<F: Real>(a: &SymMatrix<F>, m: u32) -> Result<SymMatrix<F>> {
    assert!(m >= 1);
    let mut result: Option<SymMatrix<F>> = None;
    let mut base = a.clone();
    let mut exp = m;
    loop {
        if exp & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.mul_sym(&base)?,
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        base = base.mul_sym(&base)?;
    }
    Ok(result.expect("m >= 1"))
}
