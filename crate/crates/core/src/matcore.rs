//! Small dense complex matrices (d = 2, 3, 4), hermitian validation, trace
//! splitting, and the spectral exponential used as ground truth.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_DIM: usize = 4;

/// Absolute per-entry tolerance on `M[j][i] == conj(M[i][j])`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on `|Tr(A)|` for inputs that must be traceless.
pub const TRACELESS_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn check_dim(dim: usize) -> Result<usize> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(dim)
    } else {
        Err(Error::BadDimension(dim))
    }
}

/// A `dim × dim` complex matrix stored in a fixed 4×4 buffer.
///
/// Entries outside the leading `dim × dim` block are always zero, so the
/// derived equality and the arithmetic below never see stale data.
#[derive(Clone, Copy, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: [[C64; MAX_DIM]; MAX_DIM],
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        debug_assert!(dim <= MAX_DIM);
        CMatrix {
            dim,
            data: [[ZERO; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let dim = check_dim(diag.len())?;
        let mut m = Self::zeros(dim);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i][i] = C64::new(x, 0.0);
        }
        Ok(m)
    }

    /// Builds a square matrix from rows; the dimension must be 2, 3 or 4.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = check_dim(rows.len())?;
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::BadShape(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            m.data[i][..dim].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim)
            .map(|i| self.data[i][..self.dim].to_vec())
            .collect()
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i][i]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = self.data[j][i].conj();
            }
        }
        m
    }

    #[inline]
    pub fn scale(&self, c: C64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] *= c;
            }
        }
        m
    }

    #[inline]
    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `Tr(self · other)` without forming the product.
    #[inline]
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.data[i][j] * other.data[j][i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.data[i][j].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Largest `|M[j][i] - conj(M[i][j])|` and where it occurs.
    pub fn max_asymmetry(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let gap = (self.data[j][i] - self.data[i][j].conj()).norm();
                if gap > worst.0 {
                    worst = (gap, j, i);
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        (*self - *other)
            .entries()
            .map(|(_, _, z)| z.norm())
            .fold(0.0, f64::max)
    }

    /// Iterates `(row, col, value)` over the active block in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let d = self.dim;
        (0..d).flat_map(move |i| (0..d).map(move |j| (i, j, self.data[i][j])))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = f(self.data[i][j]);
            }
        }
        m
    }

    fn to_nalgebra(self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.data[i][j])
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i][j]
    }
}

impl Add for CMatrix {
    type Output = CMatrix;

    #[inline]
    fn add(mut self, rhs: CMatrix) -> CMatrix {
        self += rhs;
        self
    }
}

impl AddAssign for CMatrix {
    #[inline]
    fn add_assign(&mut self, rhs: CMatrix) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] += rhs.data[i][j];
            }
        }
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;

    #[inline]
    fn sub(mut self, rhs: CMatrix) -> CMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i][j] -= rhs.data[i][j];
            }
        }
        self
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;

    #[inline]
    fn mul(self, rhs: CMatrix) -> CMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i][k];
                for j in 0..d {
                    out.data[i][j] += a * rhs.data[k][j];
                }
            }
        }
        out
    }
}

impl Mul<CMatrix> for C64 {
    type Output = CMatrix;

    #[inline]
    fn mul(self, rhs: CMatrix) -> CMatrix {
        rhs.scale(self)
    }
}

impl Mul<CMatrix> for f64 {
    type Output = CMatrix;

    #[inline]
    fn mul(self, rhs: CMatrix) -> CMatrix {
        rhs.scale_real(self)
    }
}

/// Wire format shared by every file and report: `{"dim", "re", "im"}` with
/// row-major `dim × dim` real arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        check_dim(self.dim)?;
        if self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::BadShape(format!(
                "expected {d} rows in \"re\" and \"im\", got {} and {}",
                self.re.len(),
                self.im.len(),
                d = self.dim
            )));
        }
        let mut rows = Vec::with_capacity(self.dim);
        for (i, (re, im)) in self.re.iter().zip(&self.im).enumerate() {
            if re.len() != self.dim || im.len() != self.dim {
                return Err(Error::BadShape(format!(
                    "row {i} must have {} entries in both \"re\" and \"im\"",
                    self.dim
                )));
            }
            rows.push(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect());
        }
        CMatrix::from_rows(&rows)
    }
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let rows = m.rows();
        MatrixJson {
            dim: m.dim(),
            re: rows
                .iter()
                .map(|r| r.iter().map(|z| z.re).collect())
                .collect(),
            im: rows
                .iter()
                .map(|r| r.iter().map(|z| z.im).collect())
                .collect(),
        }
    }
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }
}

/// A matrix checked to be hermitian within [`HERMITIAN_TOL`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        validate_hermitian(m)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Ok(HermitianMatrix(CMatrix::zeros(check_dim(dim)?)))
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        Ok(HermitianMatrix(CMatrix::from_diag(diag)?))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        validate_hermitian(CMatrix::from_real_rows(rows)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr(A^2)`, from the matrix product.
    pub fn trace_sq(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// `Tr(A^3)`, from the matrix product.
    pub fn trace_cube(&self) -> f64 {
        (self.0 * self.0).trace_product(&self.0).re
    }

    pub fn is_traceless(&self) -> bool {
        self.trace().abs() <= TRACELESS_TOL
    }

    /// `U A U†`; the caller supplies a unitary `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> HermitianMatrix {
        HermitianMatrix(*u * self.0 * u.adjoint())
    }

    /// Real eigenvalues in ascending order and the unitary whose columns are
    /// the matching eigenvectors.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        let eig = SymmetricEigen::try_new(self.0.to_nalgebra(), 1e-15, 10_000)
            .ok_or(Error::EigenFailure)?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = CMatrix::zeros(self.dim());
        for (col, &k) in order.iter().enumerate() {
            for row in 0..self.dim() {
                vectors[(row, col)] = eig.eigenvectors[(row, k)];
            }
        }
        Ok((values, vectors))
    }
}

impl From<HermitianMatrix> for CMatrix {
    fn from(h: HermitianMatrix) -> CMatrix {
        h.0
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(d)?;
        validate_hermitian(m).map_err(serde::de::Error::custom)
    }
}

/// Accepts `m` unchanged if it is hermitian within tolerance. Nothing is
/// symmetrized.
pub fn validate_hermitian(m: CMatrix) -> Result<HermitianMatrix> {
    check_dim(m.dim())?;
    let (gap, row, col) = m.max_asymmetry();
    if gap > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            max_asymmetry: gap,
            row,
            col,
        });
    }
    Ok(HermitianMatrix(m))
}

/// `A = mu·I + A0` with `Tr(A0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSplit {
    pub mu: f64,
    pub traceless_part: HermitianMatrix,
}

impl TraceSplit {
    pub fn reconstruct(&self) -> HermitianMatrix {
        let d = self.traceless_part.dim();
        HermitianMatrix(self.traceless_part.0 + CMatrix::identity(d).scale_real(self.mu))
    }
}

pub fn trace_split(a: &HermitianMatrix) -> TraceSplit {
    let d = a.dim();
    let mu = a.trace() / d as f64;
    let mut a0 = a.0;
    for i in 0..d {
        a0[(i, i)] -= C64::new(mu, 0.0);
    }
    TraceSplit {
        mu,
        traceless_part: HermitianMatrix(a0),
    }
}

/// Which exponential: `exp(A)` or the unitary `exp(iA)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpMode {
    Exp,
    Fourier,
}

impl ExpMode {
    /// The scalar `e^x` or `e^{ix}`.
    #[inline]
    pub fn weight(self, x: f64) -> C64 {
        match self {
            ExpMode::Exp => C64::new(x.exp(), 0.0),
            ExpMode::Fourier => C64::from_polar(1.0, x),
        }
    }

    /// The multiplier applied to `A` before it enters the bracket.
    #[inline]
    pub fn generator_factor(self) -> C64 {
        match self {
            ExpMode::Exp => ONE,
            ExpMode::Fourier => C64::i(),
        }
    }
}

/// `U diag(f(a_k)) U†` with `f = exp` or `f = exp(i·)`.
pub fn expm_reference(a: &HermitianMatrix, mode: ExpMode) -> Result<CMatrix> {
    let (values, u) = a.eigh()?;
    let d = a.dim();
    let mut diag = CMatrix::zeros(d);
    for (k, &x) in values.iter().enumerate() {
        diag[(k, k)] = mode.weight(x);
    }
    Ok(u * diag * u.adjoint())
}

/// Cayley–Hamilton for traceless 3×3: `A0^3 = c_A·A0 + c_I·I` with
/// `c_A = Tr(A0^2)/2`, `c_I = Tr(A0^3)/3`.
pub fn ch_reduce_traceless3(a0: &HermitianMatrix) -> Result<(f64, f64)> {
    if a0.dim() != 3 {
        return Err(Error::DimensionMismatch(a0.dim(), 3));
    }
    if !a0.is_traceless() {
        return Err(Error::NotTraceless(a0.trace().abs()));
    }
    Ok((a0.trace_sq() / 2.0, a0.trace_cube() / 3.0))
}
