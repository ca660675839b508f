//! Spin operators, rotations and the total-spin decomposition of `s ⊗ s`.
//!
//! Single-spin basis order is `m = +s, s-1, ..., -s`, so index `i` carries
//! `m = s - i`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigensystem, inner, kron, vec_norm, ComplexMatrix, PureState, ONE, ZERO,
};

/// Half-integer spin stored as `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLabel {
    twice_s: u32,
}

impl SpinLabel {
    pub const HALF: SpinLabel = SpinLabel { twice_s: 1 };
    pub const ONE: SpinLabel = SpinLabel { twice_s: 2 };

    pub fn from_twice(twice_s: u32) -> Self {
        Self { twice_s }
    }

    pub fn twice_s(self) -> u32 {
        self.twice_s
    }

    pub fn s(self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    /// `2s + 1`
    pub fn dim(self) -> usize {
        self.twice_s as usize + 1
    }

    /// `s(s + 1)`
    pub fn casimir(self) -> f64 {
        let s = self.s();
        s * (s + 1.0)
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m_of(self, index: usize) -> f64 {
        self.s() - index as f64
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_s.is_multiple_of(2) {
            write!(f, "{}", self.twice_s / 2)
        } else {
            write!(f, "{}/2", self.twice_s)
        }
    }
}

impl FromStr for SpinLabel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let bad = || Error::InvalidSpin(text.to_string());
        if let Some((num, den)) = t.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            let den: u32 = den.trim().parse().map_err(|_| bad())?;
            return match den {
                1 => Ok(Self::from_twice(num.checked_mul(2).ok_or_else(bad)?)),
                2 => Ok(Self::from_twice(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(n) = t.parse::<u32>() {
            return Ok(Self::from_twice(n.checked_mul(2).ok_or_else(bad)?));
        }
        let x: f64 = t.parse().map_err(|_| bad())?;
        let twice = 2.0 * x;
        if !x.is_finite() || x < 0.0 || twice != twice.round() || twice > u32::MAX as f64 {
            return Err(bad());
        }
        Ok(Self::from_twice(twice as u32))
    }
}

impl Serialize for SpinLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `(S1, S2, S3)` for spin `s`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: SpinLabel,
    pub ops: [ComplexMatrix; 3],
}

impl SpinOperators {
    /// `n · S`
    pub fn along(&self, axis: [f64; 3]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.spin.dim(), self.spin.dim());
        for (k, &nk) in axis.iter().enumerate() {
            out = &out + &self.ops[k].scale_real(nk);
        }
        out
    }
}

/// Raising operator `S+` with `<m+1|S+|m> = sqrt(s(s+1) - m(m+1))`.
pub fn raising_operator(spin: SpinLabel) -> ComplexMatrix {
    let d = spin.dim();
    let mut sp = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        let m = spin.m_of(i);
        sp[(i - 1, i)] = Complex64::new((spin.casimir() - m * (m + 1.0)).sqrt(), 0.0);
    }
    sp
}

pub fn spin_operators(spin: SpinLabel) -> SpinOperators {
    let d = spin.dim();
    let sp = raising_operator(spin);
    let sm = sp.adjoint();
    let s1 = (&sp + &sm).scale_real(0.5);
    // (S+ - S-) / (2i)
    let s2 = (&sp - &sm).scale(Complex64::new(0.0, -0.5));
    let mut s3 = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        s3[(i, i)] = Complex64::new(spin.m_of(i), 0.0);
    }
    SpinOperators {
        spin,
        ops: [s1, s2, s3],
    }
}

/// `exp(-i angle (n · S))` via the eigen-decomposition of the generator.
pub fn rotation_unitary(spin: SpinLabel, axis: [f64; 3], angle: f64) -> Result<ComplexMatrix> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitAxis { norm });
    }
    let generator = spin_operators(spin).along(axis);
    generator.hermitian_function(|lambda| Complex64::from_polar(1.0, -angle * lambda))
}

/// Total angular momentum components `J_k = S_k ⊗ I + I ⊗ S_k` on `s ⊗ s`.
pub fn total_spin_components(spin: SpinLabel) -> [ComplexMatrix; 3] {
    let ops = spin_operators(spin).ops;
    let id = ComplexMatrix::identity(spin.dim());
    ops.map(|s| &kron(&s, &id) + &kron(&id, &s))
}

/// `J^2 = sum_k J_k^2` on `s ⊗ s`.
pub fn total_spin_squared(spin: SpinLabel) -> ComplexMatrix {
    let j = total_spin_components(spin);
    let mut out = &j[0] * &j[0];
    out = &out + &(&j[1] * &j[1]);
    &out + &(&j[2] * &j[2])
}

/// Maps a `J^2` eigenvalue to its total spin `j`, within 1e-6 of `j(j+1)`.
fn cluster_total_spin(value: f64, max_j: usize) -> Result<usize> {
    let j = (-0.5 + (0.25 + value.max(0.0)).sqrt()).round();
    let ju = j as usize;
    if ju > max_j || (value - j * (j + 1.0)).abs() > 1e-6 {
        return Err(Error::EigenvalueClustering { value });
    }
    Ok(ju)
}

/// The `|j; 0>` state of `s ⊗ s`, phased so the `|s>|-s>` coefficient is real positive.
pub fn coupled_zero_m_state(spin: SpinLabel, j: usize) -> Result<PureState> {
    let d = spin.dim();
    let max_j = spin.twice_s as usize;
    if j > max_j {
        return Err(Error::OutOfRange {
            what: "total spin j",
            value: j as i64,
            min: 0,
            max: max_j as i64,
        });
    }
    // The J_z = 0 sector is spanned by |m>|-m>, i.e. index pairs (i, d-1-i).
    let sector: Vec<usize> = (0..d).map(|i| i * d + (d - 1 - i)).collect();
    let j2 = total_spin_squared(spin);
    let mut block = ComplexMatrix::zeros(d, d);
    for (a, &ia) in sector.iter().enumerate() {
        for (b, &ib) in sector.iter().enumerate() {
            block[(a, b)] = j2[(ia, ib)];
        }
    }
    let eig = hermitian_eigensystem(&block)?;
    let mut column = None;
    for (k, &value) in eig.values.iter().enumerate() {
        if cluster_total_spin(value, max_j)? == j {
            column = Some(k);
        }
    }
    let k = column.ok_or(Error::EigenvalueClustering {
        value: (j * (j + 1)) as f64,
    })?;

    let mut amplitudes = vec![ZERO; d * d];
    for (a, &ia) in sector.iter().enumerate() {
        amplitudes[ia] = eig.vectors[(a, k)];
    }
    let lead = amplitudes[sector[0]];
    let phase = if lead.norm() > 0.0 {
        lead.conj() / lead.norm()
    } else {
        ONE
    };
    for z in &mut amplitudes {
        *z *= phase;
    }
    let state = PureState::normalized(amplitudes)?;

    // Certify against the full J^2 and J_z.
    let jj = (j * (j + 1)) as f64;
    let v = state.amplitudes();
    let j2v = j2.mat_vec(v);
    let jz = &total_spin_components(spin)[2];
    let jzv = jz.mat_vec(v);
    let residual = j2v
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b * jj).norm())
        .chain(jzv.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::Inconsistent {
            what: format!("|{j};0> eigen-residual"),
            deviation: residual,
        });
    }
    Ok(state)
}

/// Rotation-invariant `|0; 0>` of two spin-`s` systems.
pub fn singlet_state(spin: SpinLabel) -> PureState {
    coupled_zero_m_state(spin, 0).expect("j = 0 is always in range")
}

/// Orthogonal projectors `P_j` onto the total-spin-`j` blocks of `s ⊗ s`, for `j = 0..=2s`.
pub fn casimir_projectors(spin: SpinLabel) -> Result<Vec<ComplexMatrix>> {
    let d = spin.dim();
    let n = d * d;
    let max_j = spin.twice_s as usize;
    let eig = hermitian_eigensystem(&total_spin_squared(spin))?;
    let mut projectors = vec![ComplexMatrix::zeros(n, n); max_j + 1];
    let mut counts = vec![0usize; max_j + 1];
    for (k, &value) in eig.values.iter().enumerate() {
        let j = cluster_total_spin(value, max_j)?;
        let v = eig.vectors.column(k);
        projectors[j] = &projectors[j] + &ComplexMatrix::outer(&v, &v);
        counts[j] += 1;
    }
    for (j, (&count, p)) in counts.iter().zip(&projectors).enumerate() {
        let tr = p.trace().re;
        if count != 2 * j + 1 || (tr - (2 * j + 1) as f64).abs() > 1e-9 {
            return Err(Error::Inconsistent {
                what: format!("rank of P_{j}"),
                deviation: (tr - (2 * j + 1) as f64)
                    .abs()
                    .max((count as f64 - (2 * j + 1) as f64).abs()),
            });
        }
    }
    Ok(projectors)
}

/// Euclidean distance between `a` and `b` after removing their relative global phase.
pub fn phase_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap = inner(a, b);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * phase - y).collect();
    vec_norm(&diff)
}
