//! Completely positive trace-preserving maps in Kraus form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    kron, matrix_entropy_nats, von_neumann_entropy, ComplexMatrix, DensityMatrix, LogBase,
    PureState,
};
use crate::sampling::{orthonormalize_columns, random_matrix, rng};
use crate::spin::{spin_operators, SpinLabel};

/// Trace-preservation tolerance enforced at construction.
pub const TP_TOL: f64 = 1e-10;

/// Ordered Kraus set `{X_k}` with `sum_k X_k^dagger X_k = I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

/// On-disk channel description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes and trace preservation.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Shape("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if let Some(bad) = kraus
            .iter()
            .find(|x| (x.rows(), x.cols()) != (dim_out, dim_in))
        {
            return Err(Error::Shape(format!(
                "Kraus operators must all be {dim_out}x{dim_in}, found {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        let channel = Self {
            dim_in,
            dim_out,
            kraus,
        };
        let residual = channel.trace_preservation_residual();
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(channel)
    }

    pub fn from_file(file: ChannelFile) -> Result<Self> {
        let channel = Self::new(file.kraus)?;
        if channel.dim_in != file.dim_in {
            return Err(Error::DimensionMismatch {
                context: "channel file dim_in",
                expected: file.dim_in,
                found: channel.dim_in,
            });
        }
        if channel.dim_out != file.dim_out {
            return Err(Error::DimensionMismatch {
                context: "channel file dim_out",
                expected: file.dim_out,
                found: channel.dim_out,
            });
        }
        Ok(channel)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrices serialize")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn n_kraus(&self) -> usize {
        self.kraus.len()
    }

    /// `max |sum_k X_k^dagger X_k - I|`
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for x in &self.kraus {
            sum = &sum + &(&x.adjoint() * x);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    /// `max |sum_k X_k X_k^dagger - I|`, infinite when the map is not square.
    pub fn unitality_residual(&self) -> f64 {
        if self.dim_in != self.dim_out {
            return f64::INFINITY;
        }
        let mut sum = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for x in &self.kraus {
            sum = &sum + &(x * &x.adjoint());
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_out))
    }

    pub fn is_bistochastic(&self, tol: f64) -> bool {
        self.unitality_residual() <= tol
    }

    /// `sum_k X_k M X_k^dagger` on an arbitrary square matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for x in &self.kraus {
            out = &out + &(&(x * m) * &x.adjoint());
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "apply",
                expected: self.dim_in,
                found: rho.dim(),
            });
        }
        Ok(DensityMatrix::from_trusted(self.apply_matrix(rho.matrix())))
    }

    /// Output on a pure input `|φ><φ|`.
    pub fn apply_pure(&self, phi: &PureState) -> Result<DensityMatrix> {
        self.apply(&phi.projector())
    }

    /// Kraus set `{X_k ⊗ Y_l}` of the parallel channel.
    pub fn tensor(&self, other: &Self) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|x| other.kraus.iter().map(move |y| kron(x, y)))
            .collect();
        Self {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    /// Gram matrix `Ω_kl = <X_l φ, X_k φ>`; its nonzero spectrum is that of the output on `|φ><φ|`.
    pub fn output_gram(&self, phi: &PureState) -> Result<ComplexMatrix> {
        if phi.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "output_gram",
                expected: self.dim_in,
                found: phi.dim(),
            });
        }
        Ok(self.gram_unchecked(phi.amplitudes()))
    }

    pub(crate) fn gram_unchecked(&self, phi: &[Complex64]) -> ComplexMatrix {
        let images: Vec<Vec<Complex64>> = self.kraus.iter().map(|x| x.mat_vec(phi)).collect();
        let n = images.len();
        let mut omega = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            for l in k..n {
                let z: Complex64 = images[l]
                    .iter()
                    .zip(&images[k])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                omega[(k, l)] = z;
                omega[(l, k)] = z.conj();
            }
        }
        omega
    }

    /// Output entropy in nats of `|φ><φ|` for a normalized amplitude vector,
    /// through the Gram matrix when it is the smaller of the two.
    pub(crate) fn pure_output_entropy_nats(&self, phi: &[Complex64]) -> Result<f64> {
        if self.n_kraus() <= self.dim_out {
            matrix_entropy_nats(&self.gram_unchecked(phi))
        } else {
            matrix_entropy_nats(&self.apply_matrix(&ComplexMatrix::outer(phi, phi)))
        }
    }

    /// `F(ρ) = S(Λ(ρ)) - S(ρ)`.
    pub fn entropy_gain(&self, rho: &DensityMatrix, base: LogBase) -> Result<f64> {
        let out = self.apply(rho)?;
        Ok(von_neumann_entropy(&out, base)? - von_neumann_entropy(rho, base)?)
    }
}

/// `Λ_s(ρ) = (1 / s(s+1)) sum_k S_k ρ S_k`.
pub fn isotropic_channel(spin: SpinLabel) -> Result<KrausChannel> {
    if spin.twice_s() == 0 {
        return Err(Error::ZeroSpin);
    }
    let norm = 1.0 / spin.casimir().sqrt();
    let kraus = spin_operators(spin)
        .ops
        .iter()
        .map(|s| s.scale_real(norm))
        .collect();
    KrausChannel::new(kraus)
}

/// Single unitary Kraus operator.
pub fn unitary_channel(u: ComplexMatrix) -> Result<KrausChannel> {
    KrausChannel::new(vec![u])
}

pub fn identity_channel(dim: usize) -> KrausChannel {
    KrausChannel::new(vec![ComplexMatrix::identity(dim)]).expect("identity is trace preserving")
}

/// Maps every input to `|ψ><ψ|`, with Kraus operators `|ψ><i|`.
pub fn replacement_channel(target: &PureState, dim_in: usize) -> KrausChannel {
    let kraus = (0..dim_in)
        .map(|i| {
            let mut x = ComplexMatrix::zeros(target.dim(), dim_in);
            for (r, &z) in target.amplitudes().iter().enumerate() {
                x[(r, i)] = z;
            }
            x
        })
        .collect();
    KrausChannel::new(kraus).expect("replacement channel is trace preserving")
}

/// Seeded random channel on `d` dimensions: a Haar-like isometry `C^d -> C^(n d)` sliced into blocks.
pub fn random_channel(dim: usize, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    if n_kraus == 0 || dim == 0 {
        return Err(Error::Config(
            "random_channel needs dim >= 1 and n_kraus >= 1".into(),
        ));
    }
    let mut r = rng(seed);
    let isometry = orthonormalize_columns(&random_matrix(&mut r, n_kraus * dim, dim));
    let kraus = (0..n_kraus)
        .map(|k| {
            let mut x = ComplexMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    x[(i, j)] = isometry[(k * dim + i, j)];
                }
            }
            x
        })
        .collect();
    KrausChannel::new(kraus)
}

/// `(tr ρ) I/3 + (1/3) T ρ T^dagger` with the spin-1/2 time reversal
/// `T|+1/2> = |-1/2>`, `T|-1/2> = -|+1/2>`.
pub fn time_reversal_apply(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "time_reversal_apply",
            expected: 2,
            found: rho.dim(),
        });
    }
    // T = K ∘ conj with K = [[0, -1], [1, 0]]; T ρ T^dagger = K conj(ρ) K^T.
    let k = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).expect("2x2");
    let flipped = &(&k * &rho.matrix().conj()) * &k.transpose();
    let tr = rho.matrix().trace();
    let mut out = flipped.scale_real(1.0 / 3.0);
    for i in 0..2 {
        out[(i, i)] += tr / 3.0;
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Fixed point of `ρ <- Λ(ρ)` from `I/d`, or `None` without convergence to `tol`.
pub fn fixed_point_iteration(
    ch: &KrausChannel,
    tol: f64,
    max_iter: usize,
) -> Option<DensityMatrix> {
    if ch.dim_in != ch.dim_out {
        return None;
    }
    let mut rho = ComplexMatrix::identity(ch.dim_in).scale_real(1.0 / ch.dim_in as f64);
    for _ in 0..max_iter {
        let next = ch.apply_matrix(&rho);
        let residual = next.max_abs_diff(&rho);
        rho = next;
        if residual <= tol {
            return DensityMatrix::new(rho).ok();
        }
    }
    // A damped iteration converges for periodic channels where the plain one cycles.
    let mut avg = ComplexMatrix::identity(ch.dim_in).scale_real(1.0 / ch.dim_in as f64);
    for _ in 0..max_iter {
        let next = (&avg + &ch.apply_matrix(&avg)).scale_real(0.5);
        let residual = ch.apply_matrix(&next).max_abs_diff(&next);
        avg = next;
        if residual <= tol {
            return DensityMatrix::new(avg).ok();
        }
    }
    None
}
