//! Multi-start simplex searches for the minimum output entropy, the minimum
//! entropy gain, and the additivity probe on parallel channels.
//!
//! Every reported minimum is a heuristic upper bound: the searches are local
//! and restarts only make a miss less likely.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{fixed_point_iteration, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigensystem, matrix_entropy_nats, vec_norm, ComplexMatrix, DensityMatrix, LogBase,
    PureState, ONE, ZERO,
};
use crate::sampling::{complex_gaussian, random_pure, rng, sub_seed};
use crate::simplex::{nelder_mead, SimplexOptions};

/// Slack on the `[-log d, 0]` bounds of the minimum entropy gain.
pub const GAIN_BOUND_TOL: f64 = 1e-8;
/// A probe gap below `-PROBE_FINDING_TOL` is flagged as an additivity violation.
pub const PROBE_FINDING_TOL: f64 = 1e-6;

const INITIAL_STEP: f64 = 0.25;
/// Objective value used where a parameter vector has no valid state.
const INVALID_POINT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations_per_restart: usize,
    pub simplex_tolerance: f64,
    pub objective_tolerance: f64,
    pub log_base: LogBase,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            max_iterations_per_restart: 2000,
            simplex_tolerance: 1e-9,
            objective_tolerance: 1e-12,
            log_base: LogBase::E,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.simplex_tolerance > 0.0) || !(self.objective_tolerance > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn simplex_options(&self) -> SimplexOptions {
        SimplexOptions {
            max_iterations: self.max_iterations_per_restart,
            diameter_tolerance: self.simplex_tolerance,
            spread_tolerance: self.objective_tolerance,
            initial_step: INITIAL_STEP,
        }
    }
}

/// Outcome of a multi-start search. Values are in `log_base`.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport<A> {
    pub value: f64,
    pub argmin: A,
    /// Best value of every restart, ascending.
    pub restart_values: Vec<f64>,
    pub converged_fraction: f64,
    pub evaluations: usize,
    pub log_base: LogBase,
}

/// Haar-random pure state from a seed.
pub fn haar_pure(dim: usize, seed: u64) -> PureState {
    assert!(dim >= 1, "dimension must be positive");
    random_pure(&mut rng(seed), dim)
}

struct RestartOutcome {
    x: Vec<f64>,
    value: f64,
    converged: bool,
    evaluations: usize,
}

/// Simplex search from `x0`, re-seeded from its own optimum until a round
/// stops improving or the iteration budget is spent.
fn local_search<F>(objective: &F, x0: Vec<f64>, cfg: &SearchConfig) -> RestartOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let mut budget = cfg.max_iterations_per_restart;
    let mut x = x0;
    let mut value = f64::INFINITY;
    let mut evaluations = 0;
    let converged = loop {
        let opts = SimplexOptions {
            max_iterations: budget,
            ..cfg.simplex_options()
        };
        let round = nelder_mead(objective, &x, &opts);
        evaluations += round.evaluations;
        budget = budget.saturating_sub(round.iterations.max(1));
        let improvement = value - round.value;
        if round.value <= value {
            x = round.x;
            value = round.value;
        }
        if !round.converged || budget == 0 || improvement <= cfg.objective_tolerance {
            break round.converged;
        }
    };
    RestartOutcome {
        x,
        value,
        converged,
        evaluations,
    }
}

fn multistart<F, S>(objective: F, start: S, cfg: &SearchConfig) -> Vec<RestartOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(usize) -> Vec<f64> + Sync,
{
    (0..cfg.restarts)
        .into_par_iter()
        .map(|i| local_search(&objective, start(i), cfg))
        .collect()
}

fn summarize<A>(
    outcomes: &[RestartOutcome],
    argmin: A,
    value_nats: f64,
    base: LogBase,
) -> SearchReport<A> {
    let mut restart_values: Vec<f64> = outcomes.iter().map(|o| base.from_nats(o.value)).collect();
    restart_values.sort_by(f64::total_cmp);
    let converged = outcomes.iter().filter(|o| o.converged).count();
    SearchReport {
        value: base.from_nats(value_nats),
        argmin,
        restart_values,
        converged_fraction: converged as f64 / outcomes.len() as f64,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        log_base: base,
    }
}

fn best_index(outcomes: &[RestartOutcome]) -> usize {
    // Ties resolve to the lowest restart index, independent of scheduling.
    (0..outcomes.len())
        .min_by(|&a, &b| {
            outcomes[a]
                .value
                .total_cmp(&outcomes[b].value)
                .then(a.cmp(&b))
        })
        .expect("at least one restart")
}

fn state_to_params(state: &[Complex64]) -> Vec<f64> {
    state.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn params_to_vector(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Projects a real parameter vector onto the unit sphere of `C^d`.
fn params_to_state(x: &[f64]) -> Option<Vec<Complex64>> {
    let mut v = params_to_vector(x);
    let norm = vec_norm(&v);
    if !(norm > 1e-150) || !norm.is_finite() {
        return None;
    }
    for z in &mut v {
        *z /= norm;
    }
    Some(v)
}

fn pure_objective(ch: &KrausChannel) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    move |x: &[f64]| match params_to_state(x) {
        Some(phi) => ch.pure_output_entropy_nats(&phi).unwrap_or(INVALID_POINT),
        None => INVALID_POINT,
    }
}

fn pure_search(
    ch: &KrausChannel,
    cfg: &SearchConfig,
    fixed_starts: &[Vec<Complex64>],
) -> Result<SearchReport<PureState>> {
    cfg.validate()?;
    let dim = ch.dim_in();
    let objective = pure_objective(ch);
    let start = |i: usize| -> Vec<f64> {
        if let Some(s) = fixed_starts.get(i) {
            return state_to_params(s);
        }
        state_to_params(haar_pure(dim, sub_seed(cfg.seed, i as u64)).amplitudes())
    };
    let outcomes = multistart(&objective, start, cfg);
    let best = &outcomes[best_index(&outcomes)];
    let argmin = PureState::normalized(params_to_vector(&best.x))?;
    Ok(summarize(&outcomes, argmin, best.value, cfg.log_base))
}

/// Minimum output entropy `S[Λ]`, searched over pure inputs.
///
/// Restart 0 always starts from the computational basis state `|0>`, which is
/// the highest-weight (coherent) state for the isotropic spin channels.
pub fn min_output_entropy(
    ch: &KrausChannel,
    cfg: &SearchConfig,
) -> Result<SearchReport<PureState>> {
    let basis = PureState::basis(ch.dim_in(), 0).amplitudes().to_vec();
    pure_search(ch, cfg, &[basis])
}

/// Output entropy of a pure input in nats, on the same evaluation path as the search.
pub fn output_entropy_nats(ch: &KrausChannel, phi: &PureState) -> Result<f64> {
    if phi.dim() != ch.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "output_entropy",
            expected: ch.dim_in(),
            found: phi.dim(),
        });
    }
    ch.pure_output_entropy_nats(phi.amplitudes())
}

fn params_to_mixed(x: &[f64], dim: usize) -> Option<ComplexMatrix> {
    let a = ComplexMatrix::from_row_major(dim, dim, params_to_vector(x)).ok()?;
    let aa = &a * &a.adjoint();
    let tr = aa.trace().re;
    if !(tr > 1e-150) || !tr.is_finite() {
        return None;
    }
    Some(aa.scale_real(1.0 / tr))
}

fn gain_nats(ch: &KrausChannel, rho: &ComplexMatrix) -> Result<f64> {
    Ok(matrix_entropy_nats(&ch.apply_matrix(rho))? - matrix_entropy_nats(rho)?)
}

/// `A` with `A A^dagger = rho`.
fn square_root_factor(rho: &DensityMatrix) -> ComplexMatrix {
    rho.matrix()
        .hermitian_function(|x| Complex64::new(x.max(0.0).sqrt(), 0.0))
        .expect("density matrices are Hermitian")
}

/// Minimum entropy gain `G[Λ]` over mixed inputs `ρ = A A^dagger / tr(A A^dagger)`.
///
/// Fixed starts: the maximally mixed state, the channel's fixed point when
/// the power iteration converges, and the pure state `|0><0|`.
pub fn min_entropy_gain(
    ch: &KrausChannel,
    cfg: &SearchConfig,
) -> Result<SearchReport<DensityMatrix>> {
    cfg.validate()?;
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::DimensionMismatch {
            context: "min_entropy_gain (needs dim_in = dim_out)",
            expected: ch.dim_in(),
            found: ch.dim_out(),
        });
    }
    let dim = ch.dim_in();
    let mut fixed_starts = vec![ComplexMatrix::identity(dim)];
    if let Some(fixed) = fixed_point_iteration(ch, 1e-12, 10_000) {
        fixed_starts.push(square_root_factor(&fixed));
    }
    let mut pure = ComplexMatrix::zeros(dim, dim);
    pure[(0, 0)] = ONE;
    fixed_starts.push(pure);

    let objective = |x: &[f64]| match params_to_mixed(x, dim) {
        Some(rho) => gain_nats(ch, &rho).unwrap_or(INVALID_POINT),
        None => INVALID_POINT,
    };
    let start = |i: usize| -> Vec<f64> {
        if let Some(a) = fixed_starts.get(i) {
            return state_to_params(a.as_slice());
        }
        let mut r = rng(sub_seed(cfg.seed, i as u64));
        (0..dim * dim)
            .flat_map(|_| {
                let z = complex_gaussian(&mut r);
                [z.re, z.im]
            })
            .collect()
    };
    let outcomes = multistart(objective, start, cfg);
    let best = &outcomes[best_index(&outcomes)];
    let rho = params_to_mixed(&best.x, dim).ok_or_else(|| Error::Inconsistent {
        what: "minimum entropy gain argmin is not a state".into(),
        deviation: f64::NAN,
    })?;
    let argmin = DensityMatrix::new(rho)?;

    let lower = -(dim as f64).ln() - GAIN_BOUND_TOL;
    if best.value < lower || best.value > GAIN_BOUND_TOL {
        return Err(Error::Inconsistent {
            what: format!("minimum entropy gain {} outside [-ln {dim}, 0]", best.value),
            deviation: (best.value - lower)
                .min(0.0)
                .abs()
                .max(best.value - GAIN_BOUND_TOL),
        });
    }
    Ok(summarize(&outcomes, argmin, best.value, cfg.log_base))
}

/// Evidence on `S[Λ ⊗ Λ'] = S[Λ] + S[Λ']` from a joint search over entangled inputs.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub joint_min: f64,
    pub sum_of_singles: f64,
    /// `joint_min - sum_of_singles`; never above zero up to rounding, since
    /// the joint search starts from the product of the single minimizers.
    pub gap: f64,
    pub argmin: PureState,
    /// Singular values of the argmin's amplitude matrix, descending.
    pub schmidt_coefficients: Vec<f64>,
    /// Set when `gap < -PROBE_FINDING_TOL`: an entangled input beat every product input.
    pub additivity_violation: bool,
    pub joint: SearchReport<PureState>,
    pub singles: [SearchReport<PureState>; 2],
    pub log_base: LogBase,
}

/// `sum_i (-1)^i |i>|d-1-i> / sqrt(d)`; the singlet in the `m = s..-s` ordering.
pub fn antisymmetric_maximally_entangled(d: usize) -> Vec<Complex64> {
    let norm = 1.0 / (d as f64).sqrt();
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        let sign = if i % 2 == 0 { norm } else { -norm };
        v[i * d + (d - 1 - i)] = Complex64::new(sign, 0.0);
    }
    v
}

fn maximally_entangled(da: usize, db: usize) -> Vec<Complex64> {
    if da == db {
        return antisymmetric_maximally_entangled(da);
    }
    let k = da.min(db);
    let norm = 1.0 / (k as f64).sqrt();
    let mut v = vec![ZERO; da * db];
    for i in 0..k {
        v[i * db + i] = Complex64::new(norm, 0.0);
    }
    v
}

pub fn additivity_probe(
    ch: &KrausChannel,
    ch2: &KrausChannel,
    cfg: &SearchConfig,
) -> Result<ProbeReport> {
    cfg.validate()?;
    let nats = SearchConfig {
        log_base: LogBase::E,
        ..*cfg
    };
    let first = min_output_entropy(ch, &nats)?;
    let second = min_output_entropy(ch2, &nats)?;
    let sum = first.value + second.value;

    let joint_channel = ch.tensor(ch2);
    let (da, db) = (ch.dim_in(), ch2.dim_in());
    let product = first.argmin.tensor(&second.argmin).amplitudes().to_vec();
    let starts = [
        product,
        maximally_entangled(da, db),
        PureState::basis(da * db, 0).amplitudes().to_vec(),
    ];
    let joint = pure_search(&joint_channel, &nats, &starts)?;
    let schmidt = joint.argmin.schmidt_coefficients(da, db)?;
    let gap = joint.value - sum;

    let base = cfg.log_base;
    let rebase = |r: SearchReport<PureState>| SearchReport {
        value: base.from_nats(r.value),
        restart_values: r
            .restart_values
            .iter()
            .map(|&v| base.from_nats(v))
            .collect(),
        log_base: base,
        ..r
    };
    Ok(ProbeReport {
        joint_min: base.from_nats(joint.value),
        sum_of_singles: base.from_nats(sum),
        gap: base.from_nats(gap),
        argmin: joint.argmin.clone(),
        schmidt_coefficients: schmidt,
        additivity_violation: gap < -PROBE_FINDING_TOL,
        joint: rebase(joint),
        singles: [rebase(first), rebase(second)],
        log_base: base,
    })
}

/// Output spectrum of a pure input, ascending.
pub fn output_spectrum(ch: &KrausChannel, phi: &PureState) -> Result<Vec<f64>> {
    let out = ch.apply_pure(phi)?;
    Ok(hermitian_eigensystem(out.matrix())?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{isotropic_channel, random_channel, replacement_channel, unitary_channel};
    use crate::sampling::random_unitary;
    use crate::spin::SpinLabel;

    fn quick(restarts: usize, seed: u64) -> SearchConfig {
        SearchConfig {
            restarts,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn haar_pure_examples() {
        let one = haar_pure(1, 3);
        assert!((one.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(haar_pure(4, 9), haar_pure(4, 9));
        // Mean Bloch vector of 10^4 qubit samples.
        let mut mean = [0.0; 3];
        let n = 10_000;
        for i in 0..n {
            let a = haar_pure(2, sub_seed(77, i));
            let (u, d) = (a.amplitudes()[0], a.amplitudes()[1]);
            let cross = u.conj() * d;
            mean[0] += 2.0 * cross.re / n as f64;
            mean[1] += 2.0 * cross.im / n as f64;
            mean[2] += (u.norm_sqr() - d.norm_sqr()) / n as f64;
        }
        let norm = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
        assert!(norm <= 0.05, "{norm}");
    }

    #[test]
    fn unitary_channel_has_zero_output_entropy() {
        let u = random_unitary(&mut rng(5), 3);
        let ch = unitary_channel(u).unwrap();
        let report = min_output_entropy(&ch, &quick(4, 1)).unwrap();
        assert!(report.value.abs() < 1e-10);
    }

    #[test]
    fn spin_half_output_is_constant() {
        let ch = isotropic_channel(SpinLabel::HALF).unwrap();
        let report = min_output_entropy(&ch, &quick(16, 2)).unwrap();
        let exact = 3f64.ln() - 2.0 / 3.0 * 2f64.ln();
        assert!((report.value - exact).abs() < 1e-8);
        let spread = report.restart_values.last().unwrap() - report.restart_values[0];
        assert!(spread < 1e-9);
    }

    #[test]
    fn report_invariants() {
        let ch = random_channel(3, 2, 19).unwrap();
        let cfg = quick(8, 4);
        let report = min_output_entropy(&ch, &cfg).unwrap();
        assert_eq!(report.value, report.restart_values[0]);
        assert!(report.restart_values.windows(2).all(|w| w[0] <= w[1]));
        let again = output_entropy_nats(&ch, &report.argmin).unwrap();
        assert!((again - report.value).abs() < 1e-10);
        assert!((0.0..=1.0).contains(&report.converged_fraction));

        let twice = min_output_entropy(&ch, &cfg).unwrap();
        assert_eq!(report.value.to_bits(), twice.value.to_bits());
        assert_eq!(report.argmin, twice.argmin);
        assert_eq!(report.evaluations, twice.evaluations);
    }

    #[test]
    fn more_restarts_never_hurt() {
        let ch = random_channel(3, 2, 23).unwrap();
        let mut last = f64::INFINITY;
        for restarts in [1, 2, 4, 8] {
            let v = min_output_entropy(&ch, &quick(restarts, 6)).unwrap().value;
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn gain_examples() {
        let half = isotropic_channel(SpinLabel::HALF).unwrap();
        let g = min_entropy_gain(&half, &quick(8, 1)).unwrap();
        assert!(g.value.abs() < 1e-8);

        let target = PureState::basis(3, 2);
        let replace = replacement_channel(&target, 3);
        let g = min_entropy_gain(&replace, &quick(8, 1)).unwrap();
        assert!((g.value + 3f64.ln()).abs() < 1e-6, "{}", g.value);
    }

    #[test]
    fn config_validation() {
        let ch = isotropic_channel(SpinLabel::HALF).unwrap();
        assert!(min_output_entropy(&ch, &quick(0, 1)).is_err());
        let bad = SearchConfig {
            simplex_tolerance: 0.0,
            ..Default::default()
        };
        assert!(min_entropy_gain(&ch, &bad).is_err());
    }

    #[test]
    fn probe_never_loses_to_products() {
        let a = random_channel(2, 2, 3).unwrap();
        let b = random_channel(2, 3, 4).unwrap();
        let report = additivity_probe(&a, &b, &quick(6, 2)).unwrap();
        assert!(report.gap <= 1e-8);
        assert!((report.gap - (report.joint_min - report.sum_of_singles)).abs() < 1e-15);
        let s2: f64 = report.schmidt_coefficients.iter().map(|s| s * s).sum();
        assert!((s2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entangled_starts() {
        let v = antisymmetric_maximally_entangled(2);
        let expect = crate::spin::singlet_state(SpinLabel::HALF);
        assert!(crate::spin::phase_deviation(&v, expect.amplitudes()) < 1e-12);
        let w = maximally_entangled(2, 3);
        assert!((vec_norm(&w) - 1.0).abs() < 1e-15);
    }
}
