//! Block analysis of rotation-invariant states of two spin-`s` systems.
//!
//! Such a state is constant on each total-spin block: `ρ = sum_j p_j P_j / (2j+1)`.
//! The weights `p_j` are computed three ways (projector traces, the `|j;0>`
//! matrix element, and the spin-operator moment formula for the decohered
//! singlet) and cross-checked.

use serde::Serialize;

use crate::channel::isotropic_channel;
use crate::error::{Error, Result};
use crate::linalg::{inner, kron, von_neumann_entropy, ComplexMatrix, DensityMatrix, LogBase};
use crate::sampling::{random_rotation, rng};
use crate::spin::{
    casimir_projectors, coupled_zero_m_state, rotation_unitary, singlet_state, spin_operators,
    SpinLabel,
};

/// Tolerance of the sampled rotation-invariance precondition.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Required agreement between the independent `p_j` evaluations.
pub const CROSS_CHECK_TOL: f64 = 1e-9;
/// Required agreement between the closed-form and diagonalized entropies.
pub const ENTROPY_CHECK_TOL: f64 = 1e-10;
const INVARIANCE_SAMPLES: usize = 10;
const INVARIANCE_SEED: u64 = 0x005E_ED0F_1507;

/// Weights `p_j`, `j = 0..=2s`, of an invariant state over the total-spin blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotypicDistribution {
    pub spin: SpinLabel,
    pub probs: Vec<f64>,
}

impl IsotypicDistribution {
    /// Validates nonnegativity (at -1e-10) and normalization (at 1e-10).
    pub fn new(spin: SpinLabel, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != spin.twice_s() as usize + 1 {
            return Err(Error::DimensionMismatch {
                context: "isotypic distribution",
                expected: spin.twice_s() as usize + 1,
                found: probs.len(),
            });
        }
        if let Some(&p) = probs.iter().find(|&&p| p < -1e-10) {
            return Err(Error::NegativeEigenvalue { value: p });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::TraceNotOne { trace: total });
        }
        let probs = probs.into_iter().map(|p| p.max(0.0)).collect();
        Ok(Self { spin, probs })
    }

    /// `sum_j p_j P_j / (2j + 1)`.
    pub fn block_state(&self) -> Result<DensityMatrix> {
        let projectors = casimir_projectors(self.spin)?;
        let n = self.spin.dim() * self.spin.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (j, (p, proj)) in self.probs.iter().zip(&projectors).enumerate() {
            m = &m + &proj.scale_real(p / (2 * j + 1) as f64);
        }
        DensityMatrix::new(m)
    }
}

/// Worst `max |(U⊗U) ρ (U⊗U)^dagger - ρ|` over a fixed sample of rotations.
pub fn invariance_deviation(rho: &DensityMatrix, spin: SpinLabel) -> Result<f64> {
    let mut r = rng(INVARIANCE_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..INVARIANCE_SAMPLES {
        let (axis, angle) = random_rotation(&mut r);
        let u = rotation_unitary(spin, axis, angle)?;
        let uu = kron(&u, &u);
        worst = worst.max(rho.conjugate_by(&uu).matrix().max_abs_diff(rho.matrix()));
    }
    Ok(worst)
}

/// `p_j = (2j + 1) <j;0|ρ|j;0>`, valid for invariant states only.
pub fn matrix_element_probabilities(rho: &DensityMatrix, spin: SpinLabel) -> Result<Vec<f64>> {
    (0..=spin.twice_s() as usize)
        .map(|j| {
            let state = coupled_zero_m_state(spin, j)?;
            let v = state.amplitudes();
            Ok((2 * j + 1) as f64 * inner(v, &rho.matrix().mat_vec(v)).re)
        })
        .collect()
}

/// `p_j = tr(P_j ρ)`.
pub fn projector_probabilities(rho: &DensityMatrix, spin: SpinLabel) -> Result<Vec<f64>> {
    Ok(casimir_projectors(spin)?
        .iter()
        .map(|p| (p * rho.matrix()).trace().re)
        .collect())
}

fn worst_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Block weights of a rotation-invariant state on `(2s+1)^2` dimensions.
pub fn isotypic_probabilities(
    rho: &DensityMatrix,
    spin: SpinLabel,
) -> Result<IsotypicDistribution> {
    let d = spin.dim();
    if rho.dim() != d * d {
        return Err(Error::DimensionMismatch {
            context: "isotypic_probabilities",
            expected: d * d,
            found: rho.dim(),
        });
    }
    let deviation = invariance_deviation(rho, spin)?;
    if deviation > INVARIANCE_TOL {
        return Err(Error::NotInvariant { deviation });
    }
    let by_projector = projector_probabilities(rho, spin)?;
    let by_element = matrix_element_probabilities(rho, spin)?;
    let disagreement = worst_difference(&by_projector, &by_element);
    if disagreement > CROSS_CHECK_TOL {
        return Err(Error::Inconsistent {
            what: "projector-trace vs matrix-element p_j".into(),
            deviation: disagreement,
        });
    }
    IsotypicDistribution::new(spin, by_projector)
}

/// `p_j = (2j+1) / [s(s+1)]^2 · sum_{k,l} |<j;0| S_k ⊗ S_l |0;0>|^2` for the decohered singlet.
pub fn moment_probabilities(spin: SpinLabel) -> Result<IsotypicDistribution> {
    if spin.twice_s() == 0 {
        return Err(Error::ZeroSpin);
    }
    let ops = spin_operators(spin).ops;
    let singlet = singlet_state(spin);
    let norm = spin.casimir() * spin.casimir();
    let images: Vec<Vec<_>> = ops
        .iter()
        .flat_map(|a| ops.iter().map(move |b| kron(a, b)))
        .map(|skl| skl.mat_vec(singlet.amplitudes()))
        .collect();
    let probs = (0..=spin.twice_s() as usize)
        .map(|j| {
            let state = coupled_zero_m_state(spin, j)?;
            let moment: f64 = images
                .iter()
                .map(|img| inner(state.amplitudes(), img).norm_sqr())
                .sum();
            Ok((2 * j + 1) as f64 * moment / norm)
        })
        .collect::<Result<Vec<f64>>>()?;
    IsotypicDistribution::new(spin, probs)
}

/// `S = sum_j (p_j log(2j+1) - p_j log p_j)`, reported in `base`.
pub fn invariant_state_entropy(dist: &IsotypicDistribution, base: LogBase) -> f64 {
    let nats: f64 = dist
        .probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(j, &p)| p * ((2 * j + 1) as f64).ln() - p * p.ln())
        .sum();
    base.from_nats(nats)
}

/// An exact value with its symbolic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub expr: &'static str,
    /// In nats.
    pub nats: f64,
}

/// Known minimum output entropy of the isotropic channel (spin 1/2 and 1 only).
pub fn exact_min_output_entropy(spin: SpinLabel) -> Option<ClosedForm> {
    let (ln2, ln3) = (2f64.ln(), 3f64.ln());
    match spin.twice_s() {
        1 => Some(ClosedForm {
            expr: "ln 3 - (2/3) ln 2",
            nats: ln3 - 2.0 / 3.0 * ln2,
        }),
        2 => Some(ClosedForm {
            expr: "ln 2",
            nats: ln2,
        }),
        _ => None,
    }
}

/// Known output entropy of the decohered singlet (spin 1/2 and 1 only).
pub fn exact_singlet_entropy(spin: SpinLabel) -> Option<ClosedForm> {
    let (ln2, ln3) = (2f64.ln(), 3f64.ln());
    match spin.twice_s() {
        1 => Some(ClosedForm {
            expr: "(5/3) ln 3 - (2/3) ln 2",
            nats: 5.0 / 3.0 * ln3 - 2.0 / 3.0 * ln2,
        }),
        2 => Some(ClosedForm {
            expr: "ln 3 + (4/3) ln 2",
            nats: ln3 + 4.0 / 3.0 * ln2,
        }),
        _ => None,
    }
}

/// Decohered-singlet analysis. Entropies are in `log_base`.
#[derive(Debug, Clone, Serialize)]
pub struct SingletReport {
    pub spin: SpinLabel,
    pub probs: Vec<f64>,
    pub entropy: f64,
    pub entropy_closed_form: Option<&'static str>,
    /// `S[Λ_s]` from its closed form, when known.
    pub single_channel_min: Option<f64>,
    pub single_channel_min_closed_form: Option<&'static str>,
    /// `2 S[Λ_s]`.
    pub two_channel_reference: Option<f64>,
    /// `entropy - 2 S[Λ_s]`.
    pub excess: Option<f64>,
    /// Worst disagreement among the three `p_j` evaluations.
    pub probability_cross_check: f64,
    /// Disagreement between the block formula and direct diagonalization, in nats.
    pub entropy_cross_check: f64,
    pub log_base: LogBase,
}

/// `Λ_s ⊗ Λ_s` applied to `|0;0><0;0|`.
pub fn decohered_singlet(spin: SpinLabel) -> Result<DensityMatrix> {
    let ch = isotropic_channel(spin)?;
    ch.tensor(&ch).apply(&singlet_state(spin).projector())
}

pub fn singlet_decoherence(spin: SpinLabel, base: LogBase) -> Result<SingletReport> {
    let rho = decohered_singlet(spin)?;
    let dist = isotypic_probabilities(&rho, spin)?;
    let by_element = matrix_element_probabilities(&rho, spin)?;
    let by_moment = moment_probabilities(spin)?;
    let prob_check = worst_difference(&dist.probs, &by_element)
        .max(worst_difference(&dist.probs, &by_moment.probs));
    if prob_check > CROSS_CHECK_TOL {
        return Err(Error::Inconsistent {
            what: "three-path p_j agreement".into(),
            deviation: prob_check,
        });
    }

    let closed = invariant_state_entropy(&dist, LogBase::E);
    let direct = von_neumann_entropy(&rho, LogBase::E)?;
    let entropy_check = (closed - direct).abs();
    if entropy_check > ENTROPY_CHECK_TOL {
        return Err(Error::Inconsistent {
            what: "block entropy vs diagonalization".into(),
            deviation: entropy_check,
        });
    }

    let reference = exact_min_output_entropy(spin);
    let excess = reference.map(|r| closed - 2.0 * r.nats);
    if let Some(e) = excess {
        if !(e > 0.0) {
            return Err(Error::Inconsistent {
                what: "decohered singlet does not exceed twice the single-channel minimum".into(),
                deviation: e,
            });
        }
    }
    Ok(SingletReport {
        spin,
        probs: dist.probs,
        entropy: base.from_nats(closed),
        entropy_closed_form: exact_singlet_entropy(spin).map(|c| c.expr),
        single_channel_min: reference.map(|r| base.from_nats(r.nats)),
        single_channel_min_closed_form: reference.map(|r| r.expr),
        two_channel_reference: reference.map(|r| base.from_nats(2.0 * r.nats)),
        excess: excess.map(|e| base.from_nats(e)),
        probability_cross_check: prob_check,
        entropy_cross_check: entropy_check,
        log_base: base,
    })
}
