//! Dense complex matrices, quantum states and the entropy functionals built on them.
//!
//! Storage is row-major everywhere. Tensor products index the pair `(i_a, i_b)`
//! as `i_a * d_b + i_b`, which `kron`, `partial_trace` and the coupled-basis
//! construction in [`crate::spin`] all rely on.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on Hermiticity, trace and positivity of density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance on the norm of pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues below `-HARD_NEGATIVE` are a positivity violation, not rounding.
pub const HARD_NEGATIVE: f64 = 1e-8;

/// Logarithm base used when reporting entropies. Computation is always in nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "e" | "nats" | "ln" => Ok(LogBase::E),
            "2" | "bits" => Ok(LogBase::Two),
            other => Err(format!("unknown log base {other:?} (expected e or 2)")),
        }
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_row_major(n_rows, n_cols, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&diag)
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Complex64::conj).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "mat_vec dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    /// `max |M - M^dagger|`, or infinity for a non-square matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `max |U^dagger U - I|`, or infinity for a non-square matrix.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Hermitian part `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Checks positivity of a Hermitian matrix: the smallest eigenvalue is at least `-tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        hermitian_eigensystem(self)
            .map(|e| e.values[0] >= -tol)
            .unwrap_or(false)
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Applies `f` to the eigenvalues of a Hermitian matrix.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let eig = hermitian_eigensystem(self)?;
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for (k, &lambda) in eig.values.iter().enumerate() {
            let fk = f(lambda);
            for r in 0..n {
                let vr = eig.vectors[(r, k)] * fk;
                for c in 0..n {
                    out[(r, c)] += vr * eig.vectors[(c, k)].conj();
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

// JSON form: an array of rows, each entry a two-element array [re, im].
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// Kronecker product; row `(i_a, i_b)` maps to `i_a * rows(b) + i_b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ra in 0..a.rows {
        for ca in 0..a.cols {
            let x = a[(ra, ca)];
            if x == ZERO {
                continue;
            }
            for rb in 0..b.rows {
                for cb in 0..b.cols {
                    out[(ra * b.rows + rb, ca * b.cols + cb)] = x * b[(rb, cb)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Inner product `<u, v>`, antilinear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, aligned with `values`.
    pub vectors: ComplexMatrix,
}

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let deviation = m.hermiticity_deviation();
    if deviation > STATE_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, old_col)];
        }
    }
    Ok(Eigensystem { values, vectors })
}

// One complex Jacobi rotation annihilating a[(p, q)].
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let modulus = apq.norm();
    if modulus == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Fold the phase of a_pq into column q, then rotate as a real symmetric pair.
    let phase = apq / modulus;
    let tau = (aqq - app) / (2.0 * modulus);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let j00 = Complex64::new(c, 0.0);
    let j01 = Complex64::new(s, 0.0);
    let j10 = -phase.conj() * s;
    let j11 = phase.conj() * c;

    let n = a.rows;
    // A <- A J
    for r in 0..n {
        let x = a[(r, p)];
        let y = a[(r, q)];
        a[(r, p)] = x * j00 + y * j10;
        a[(r, q)] = x * j01 + y * j11;
    }
    // A <- J^dagger A
    for c in 0..n {
        let x = a[(p, c)];
        let y = a[(q, c)];
        a[(p, c)] = j00.conj() * x + j10.conj() * y;
        a[(q, c)] = j01.conj() * x + j11.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for r in 0..n {
        let x = v[(r, p)];
        let y = v[(r, q)];
        v[(r, p)] = x * j00 + y * j10;
        v[(r, q)] = x * j01 + y * j11;
    }
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let gram = &m.adjoint() * m;
    let eig = hermitian_eigensystem(&gram).expect("M^dagger M is Hermitian");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let gram = if m.rows <= m.cols {
        m * &m.adjoint()
    } else {
        &m.adjoint() * m
    };
    let eig = hermitian_eigensystem(&gram).expect("Gram matrix is Hermitian");
    eig.values
        .iter()
        .rev()
        .map(|&x| x.max(0.0).sqrt())
        .collect()
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureState {
    #[serde(serialize_with = "serialize_vector")]
    amplitudes: Vec<Complex64>,
}

fn serialize_vector<S: Serializer>(
    v: &[Complex64],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(serializer)
}

impl PureState {
    /// Accepts amplitudes whose norm is within 1e-12 of one.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if amplitudes.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if amplitudes.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// Schmidt coefficients (singular values of the amplitude matrix), descending.
    pub fn schmidt_coefficients(&self, dim_a: usize, dim_b: usize) -> Result<Vec<f64>> {
        if dim_a * dim_b != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "schmidt_coefficients",
                expected: dim_a * dim_b,
                found: self.dim(),
            });
        }
        let amp = ComplexMatrix::from_row_major(dim_a, dim_b, self.amplitudes.clone())?;
        Ok(singular_values(&amp))
    }
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity at 1e-10.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let matrix = matrix.hermitian_part();
        let lowest = hermitian_eigensystem(&matrix)?.values[0];
        if lowest < -STATE_TOL {
            return Err(Error::NegativeEigenvalue { value: lowest });
        }
        Ok(Self { matrix })
    }

    /// Normalizes a positive semidefinite Hermitian matrix by its trace.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let trace = matrix.trace().re;
        if !(trace > 0.0) {
            return Err(Error::TraceNotOne { trace });
        }
        Self::new(matrix.scale_real(1.0 / trace))
    }

    /// For results that are density matrices by construction; only symmetrizes.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigensystem(&self.matrix)
            .expect("density matrices are Hermitian")
            .values
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_trusted(&(u * &self.matrix) * &u.adjoint())
    }
}

/// Which tensor factor `partial_trace` keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Marginal of a bipartite state on `d_a * d_b` dimensions.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Keep,
) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if rho.dim() != da * db {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: da * db,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let out = match keep {
        Keep::A => {
            let mut out = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    out[(i, j)] = (0..db).map(|k| m[(i * db + k, j * db + k)]).sum();
                }
            }
            out
        }
        Keep::B => {
            let mut out = ComplexMatrix::zeros(db, db);
            for i in 0..db {
                for j in 0..db {
                    out[(i, j)] = (0..da).map(|k| m[(k * db + i, k * db + j)]).sum();
                }
            }
            out
        }
    };
    Ok(DensityMatrix::from_trusted(out))
}

/// `-sum p log p` over a list of eigenvalues, with noise clamping.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lambda in eigenvalues {
        if lambda < -HARD_NEGATIVE {
            return Err(Error::NegativeEigenvalue { value: lambda });
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy `-tr(rho log rho)`, reported in `base`.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> Result<f64> {
    Ok(base.from_nats(spectrum_entropy(&rho.spectrum())?))
}

/// Entropy of a Hermitian PSD unit-trace matrix that has not been wrapped as a state.
pub(crate) fn matrix_entropy_nats(m: &ComplexMatrix) -> Result<f64> {
    spectrum_entropy(&hermitian_eigensystem(m)?.values)
}

/// Support threshold used by `relative_entropy`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Relative entropy `tr(rho log rho - rho log sigma)`; infinite when the
/// support of `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, base: LogBase) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative_entropy",
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let er = hermitian_eigensystem(rho.matrix())?;
    let es = hermitian_eigensystem(sigma.matrix())?;
    let mut neg_entropy = 0.0;
    for &lambda in &er.values {
        if lambda < -HARD_NEGATIVE {
            return Err(Error::NegativeEigenvalue { value: lambda });
        }
        if lambda > 0.0 {
            neg_entropy += lambda * lambda.ln();
        }
    }

    // Weight of rho along each eigenvector of sigma: <w_j| rho |w_j>.
    let mut cross = 0.0;
    for (j, &mu) in es.values.iter().enumerate() {
        let w = es.vectors.column(j);
        let weight = inner(&w, &rho.matrix().mat_vec(&w)).re;
        if mu <= SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok(base.from_nats(neg_entropy - cross))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_density, random_hermitian, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eigensystem_of_identity() {
        let e = hermitian_eigensystem(&ComplexMatrix::identity(3)).unwrap();
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eigensystem_of_spin_one_s3() {
        let s3 = ComplexMatrix::from_real_diag(&[1.0, 0.0, -1.0]);
        let e = hermitian_eigensystem(&s3).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn eigensystem_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=9 {
            let m = random_hermitian(&mut rng, n);
            let e = hermitian_eigensystem(&m).unwrap();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            assert!(e.vectors.unitarity_deviation() < 1e-9);
            let lambda = ComplexMatrix::from_real_diag(&e.values);
            let back = &(&e.vectors * &lambda) * &e.vectors.adjoint();
            assert!(back.max_abs_diff(&m) < 1e-9, "n={n}");
            for (k, &l) in e.values.iter().enumerate() {
                let v = e.vectors.column(k);
                let mv = m.mat_vec(&v);
                let res = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * l).norm())
                    .fold(0.0, f64::max);
                assert!(res < 1e-9);
            }
            let tr: f64 = e.values.iter().sum();
            assert!((tr - m.trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn eigensystem_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eigensystem(&rect),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(0.5);
        match hermitian_eigensystem(&m) {
            Err(Error::NotHermitian { deviation }) => assert!((deviation - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert_eq!(
            kron(&z, &i2),
            ComplexMatrix::from_real_diag(&[1.0, 1.0, -1.0, -1.0])
        );
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m: Vec<ComplexMatrix> = (0..4)
            .map(|_| crate::sampling::random_matrix(&mut rng, 2, 2))
            .collect();
        let lhs = &kron(&m[0], &m[1]) * &kron(&m[2], &m[3]);
        let rhs = kron(&(&m[0] * &m[2]), &(&m[1] * &m[3]));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn partial_trace_of_products_and_singlet() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 3);
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, (2, 3), Keep::A).unwrap();
        let rb = partial_trace(&ab, (2, 3), Keep::B).unwrap();
        assert!(ra.matrix().max_abs_diff(a.matrix()) < 1e-12);
        assert!(rb.matrix().max_abs_diff(b.matrix()) < 1e-12);

        let h = 1.0 / 2f64.sqrt();
        let singlet = PureState::new(vec![ZERO, c(h), c(-h), ZERO]).unwrap();
        let marginal = partial_trace(&singlet.projector(), (2, 2), Keep::A).unwrap();
        assert!(
            marginal
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
                < 1e-12
        );
    }

    #[test]
    fn partial_trace_matches_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = random_density(&mut rng, 6);
        let m = rho.matrix();
        // Brute force: expand to a rank-4 tensor and sum the traced index.
        let mut oracle_a = [[ZERO; 2]; 2];
        let mut oracle_b = [[ZERO; 3]; 3];
        for ia in 0..2 {
            for ib in 0..3 {
                for ja in 0..2 {
                    for jb in 0..3 {
                        let x = m[(ia * 3 + ib, ja * 3 + jb)];
                        if ib == jb {
                            oracle_a[ia][ja] += x;
                        }
                        if ia == ja {
                            oracle_b[ib][jb] += x;
                        }
                    }
                }
            }
        }
        let ra = partial_trace(&rho, (2, 3), Keep::A).unwrap();
        let rb = partial_trace(&rho, (2, 3), Keep::B).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ra.matrix()[(i, j)] - oracle_a[i][j]).norm() < 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((rb.matrix()[(i, j)] - oracle_b[i][j]).norm() < 1e-12);
            }
        }
        assert!((ra.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(partial_trace(&rho, (2, 2), Keep::A).is_err());
    }

    #[test]
    fn entropy_examples() {
        let pure = PureState::basis(3, 1).projector();
        assert!(von_neumann_entropy(&pure, LogBase::E).unwrap().abs() < 1e-12);
        for d in 1..6 {
            let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(d), LogBase::E).unwrap();
            assert!((s - (d as f64).ln()).abs() < 1e-12);
        }
        let rho =
            DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.0 / 3.0, 2.0 / 3.0])).unwrap();
        let s = von_neumann_entropy(&rho, LogBase::E).unwrap();
        assert!((s - (3f64.ln() - 2.0 / 3.0 * 2f64.ln())).abs() < 1e-14);
        assert!((s - 0.6365141682948128).abs() < 1e-12);
        let bits = von_neumann_entropy(&DensityMatrix::maximally_mixed(4), LogBase::Two).unwrap();
        assert!((bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        assert!(matches!(
            spectrum_entropy(&[0.5, 0.6, -1e-7]),
            Err(Error::NegativeEigenvalue { .. })
        ));
        assert!(spectrum_entropy(&[1.0, -5e-11]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density(&mut rng, 3);
        assert!(relative_entropy(&rho, &rho, LogBase::E).unwrap().abs() < 1e-10);
        let pure = PureState::basis(3, 0).projector();
        let mixed = DensityMatrix::maximally_mixed(3);
        let s = relative_entropy(&pure, &mixed, LogBase::E).unwrap();
        assert!((s - 3f64.ln()).abs() < 1e-12);
        assert_eq!(
            relative_entropy(&mixed, &pure, LogBase::E).unwrap(),
            f64::INFINITY
        );
        assert!(relative_entropy(&mixed, &DensityMatrix::maximally_mixed(2), LogBase::E).is_err());
    }

    #[test]
    fn relative_entropy_matches_matrix_log_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let rho = random_density(&mut rng, 3);
            let sigma = random_density(&mut rng, 3);
            // Full matrix logarithms, then tr(rho (log rho - log sigma)).
            let log_rho = rho.matrix().hermitian_function(|x| c(x.ln())).unwrap();
            let log_sigma = sigma.matrix().hermitian_function(|x| c(x.ln())).unwrap();
            let oracle = (rho.matrix() * &(&log_rho - &log_sigma)).trace().re;
            let got = relative_entropy(&rho, &sigma, LogBase::E).unwrap();
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
            assert!(got >= -1e-10);
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(3)) - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::from_real_diag(&[1.0 / 3.0, 2.0 / 3.0]);
        assert!((operator_norm(&d) - 2.0 / 3.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = crate::sampling::random_matrix(&mut rng, 3, 3);
        let norm = operator_norm(&m);
        let mut best: f64 = 0.0;
        for _ in 0..1000 {
            let x = crate::sampling::random_vector(&mut rng, 3);
            let n = vec_norm(&x);
            let x: Vec<Complex64> = x.iter().map(|z| z / n).collect();
            best = best.max(vec_norm(&m.mat_vec(&x)));
        }
        assert!(best <= norm + 1e-12);
        assert!(best >= 0.9 * norm, "{best} vs {norm}");
        // The top right-singular vector attains the norm.
        let e = hermitian_eigensystem(&(&m.adjoint() * &m)).unwrap();
        let top = e.vectors.column(2);
        assert!((vec_norm(&m.mat_vec(&top)) - norm).abs() < 1e-12);
    }

    #[test]
    fn entropy_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for d in 2..=5 {
            let rho = random_density(&mut rng, d);
            let u = random_unitary(&mut rng, d);
            let s0 = von_neumann_entropy(&rho, LogBase::E).unwrap();
            let s1 = von_neumann_entropy(&rho.conjugate_by(&u), LogBase::E).unwrap();
            assert!((s0 - s1).abs() < 1e-10);

            let other = random_density(&mut rng, 2);
            let prod = rho.tensor(&other);
            let sp = von_neumann_entropy(&prod, LogBase::E).unwrap();
            let so = von_neumann_entropy(&other, LogBase::E).unwrap();
            assert!((sp - s0 - so).abs() < 1e-10);
        }
    }

    #[test]
    fn density_matrix_validation() {
        let m = ComplexMatrix::from_real_diag(&[0.5, 0.6]);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::TraceNotOne { .. })
        ));
        let m = ComplexMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NegativeEigenvalue { .. })
        ));
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        assert!(PureState::normalized(vec![ZERO, ZERO]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0), Complex64::new(0.0, -2.5)],
            vec![c(0.25), ZERO],
        ])
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,0.0],[0.0,-2.5]],[[0.25,0.0],[0.0,0.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>("[[[1,0]],[[1,0],[2,0]]]").is_err());
    }
}
