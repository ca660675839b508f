//! Isotropic quantum spin channels.
//!
//! Builds the rotation-covariant channels `Λ_s(ρ) = Σ_k S_k ρ S_k / s(s+1)`,
//! searches their minimum output entropy and minimum entropy gain, and
//! decomposes rotation-invariant two-spin outputs into total-spin blocks.

pub mod channel;
pub mod error;
pub mod invariant;
pub mod linalg;
pub mod optimize;
pub mod sampling;
pub mod simplex;
pub mod spin;
pub mod verify;

pub use channel::{isotropic_channel, random_channel, KrausChannel};
pub use error::{Error, Result};
pub use invariant::{singlet_decoherence, IsotypicDistribution, SingletReport};
pub use linalg::{ComplexMatrix, DensityMatrix, LogBase, PureState};
pub use optimize::{
    additivity_probe, min_entropy_gain, min_output_entropy, ProbeReport, SearchConfig, SearchReport,
};
pub use spin::SpinLabel;
