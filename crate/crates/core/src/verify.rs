//! Property suites behind the `verify` command.
//!
//! Each check samples seeded random inputs, records the worst residual it
//! observed, and compares it with a fixed tolerance.

use rand::Rng;
use serde::Serialize;

use crate::channel::{
    isotropic_channel, random_channel, replacement_channel, time_reversal_apply, KrausChannel,
};
use crate::error::Result;
use crate::invariant::{
    decohered_singlet, exact_min_output_entropy, exact_singlet_entropy, invariant_state_entropy,
    isotypic_probabilities, matrix_element_probabilities, moment_probabilities,
    singlet_decoherence,
};
use crate::linalg::{
    hermitian_eigensystem, inner, kron, operator_norm, partial_trace, relative_entropy,
    von_neumann_entropy, ComplexMatrix, DensityMatrix, Keep, LogBase, PureState,
};
use crate::optimize::{additivity_probe, min_entropy_gain, min_output_entropy, SearchConfig};
use crate::sampling::{
    random_density, random_hermitian, random_pure, random_rotation, random_unitary, rng,
};
use crate::spin::{
    casimir_projectors, coupled_zero_m_state, phase_deviation, rotation_unitary, singlet_state,
    spin_operators, SpinLabel,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub check: &'static str,
    /// Worst residual observed (for bounds: the worst excess over the bound).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(suite: &'static str, check: &'static str, worst: f64, tolerance: f64) -> Self {
        Self {
            suite,
            check,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }
}

fn spins(max_twice: u32) -> impl Iterator<Item = SpinLabel> {
    (1..=max_twice).map(SpinLabel::from_twice)
}

/// Nonzero part of a spectrum (eigenvalues above `tol`), ascending.
pub fn nonzero_spectrum(values: &[f64], tol: f64) -> Vec<f64> {
    values.iter().copied().filter(|&x| x > tol).collect()
}

/// Worst difference between two nonzero spectra; infinite if their lengths differ.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn linalg_suite() -> Result<Vec<CheckResult>> {
    let mut r = rng(101);
    let mut recon: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for n in 1..=9 {
        for _ in 0..5 {
            let m = random_hermitian(&mut r, n);
            let e = hermitian_eigensystem(&m)?;
            let back =
                &(&e.vectors * &ComplexMatrix::from_real_diag(&e.values)) * &e.vectors.adjoint();
            recon = recon
                .max(back.max_abs_diff(&m))
                .max(e.vectors.unitarity_deviation());
            trace = trace.max((e.values.iter().sum::<f64>() - m.trace().re).abs());
        }
    }
    let mut unitary_inv: f64 = 0.0;
    let mut ptrace: f64 = 0.0;
    let mut additivity: f64 = 0.0;
    let mut klein: f64 = 0.0;
    for _ in 0..20 {
        let (da, db) = (2 + r.random_range(0..3usize), 2 + r.random_range(0..3usize));
        let a = random_density(&mut r, da);
        let b = random_density(&mut r, db);
        let u = random_unitary(&mut r, da);
        let sa = von_neumann_entropy(&a, LogBase::E)?;
        let sb = von_neumann_entropy(&b, LogBase::E)?;
        unitary_inv =
            unitary_inv.max((von_neumann_entropy(&a.conjugate_by(&u), LogBase::E)? - sa).abs());
        let ab = a.tensor(&b);
        ptrace = ptrace
            .max(
                partial_trace(&ab, (da, db), Keep::A)?
                    .matrix()
                    .max_abs_diff(a.matrix()),
            )
            .max(
                partial_trace(&ab, (da, db), Keep::B)?
                    .matrix()
                    .max_abs_diff(b.matrix()),
            );
        additivity = additivity.max((von_neumann_entropy(&ab, LogBase::E)? - sa - sb).abs());
        let other = random_density(&mut r, da);
        let rel = relative_entropy(&a, &other, LogBase::E)?;
        if rel.is_finite() {
            klein = klein.max(-rel);
        }
    }
    Ok(vec![
        CheckResult::new("linalg", "eigensystem reconstruction", recon, 1e-9),
        CheckResult::new("linalg", "eigenvalue sum equals trace", trace, 1e-10),
        CheckResult::new("linalg", "entropy unitary invariance", unitary_inv, 1e-10),
        CheckResult::new("linalg", "partial trace of products", ptrace, 1e-12),
        CheckResult::new(
            "linalg",
            "entropy additivity on products",
            additivity,
            1e-10,
        ),
        CheckResult::new(
            "linalg",
            "relative entropy nonnegativity",
            klein.max(0.0),
            1e-10,
        ),
    ])
}

pub fn spin_suite() -> Result<Vec<CheckResult>> {
    let mut r = rng(202);
    let mut comm: f64 = 0.0;
    let mut casimir: f64 = 0.0;
    let mut rep: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let mut decomposition: f64 = 0.0;
    let mut singlet_inv: f64 = 0.0;
    let mut explicit: f64 = 0.0;

    let s1 = spin_operators(SpinLabel::ONE).ops;
    let h = 1.0 / 2f64.sqrt();
    let x = ComplexMatrix::from_real_rows(&[&[0.0, h, 0.0], &[h, 0.0, h], &[0.0, h, 0.0]])?;
    explicit = explicit
        .max(s1[0].max_abs_diff(&x))
        .max(s1[2].max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0, -1.0])));

    for spin in spins(5) {
        let [a, b, c] = spin_operators(spin).ops;
        let i = crate::linalg::I;
        comm = comm
            .max(a.commutator(&b).max_abs_diff(&c.scale(i)))
            .max(b.commutator(&c).max_abs_diff(&a.scale(i)))
            .max(c.commutator(&a).max_abs_diff(&b.scale(i)));
        let cas = &(&(&a * &a) + &(&b * &b)) + &(&c * &c);
        casimir = casimir
            .max(cas.max_abs_diff(&ComplexMatrix::identity(spin.dim()).scale_real(spin.casimir())));

        for _ in 0..5 {
            let (axis, t1) = random_rotation(&mut r);
            let (_, t2) = random_rotation(&mut r);
            let u = &rotation_unitary(spin, axis, t1)? * &rotation_unitary(spin, axis, t2)?;
            rep = rep.max(u.max_abs_diff(&rotation_unitary(spin, axis, t1 + t2)?));
        }

        let states: Vec<PureState> = (0..=spin.twice_s() as usize)
            .map(|j| coupled_zero_m_state(spin, j))
            .collect::<Result<_>>()?;
        for (ia, a) in states.iter().enumerate() {
            for b in states.iter().skip(ia + 1) {
                ortho = ortho.max(inner(a.amplitudes(), b.amplitudes()).norm());
            }
        }

        let ps = casimir_projectors(spin)?;
        let n = spin.dim() * spin.dim();
        let mut sum = ComplexMatrix::zeros(n, n);
        for p in &ps {
            sum = &sum + p;
        }
        decomposition = decomposition.max(sum.max_abs_diff(&ComplexMatrix::identity(n)));

        let singlet = singlet_state(spin);
        for _ in 0..5 {
            let (axis, angle) = random_rotation(&mut r);
            let u = rotation_unitary(spin, axis, angle)?;
            let rotated = kron(&u, &u).mat_vec(singlet.amplitudes());
            singlet_inv = singlet_inv.max(phase_deviation(singlet.amplitudes(), &rotated));
        }
    }
    Ok(vec![
        CheckResult::new("spin", "explicit spin-1 matrices", explicit, 1e-15),
        CheckResult::new("spin", "commutation relations", comm, 1e-12),
        CheckResult::new("spin", "Casimir identity", casimir, 1e-12),
        CheckResult::new("spin", "rotation group law", rep, 1e-9),
        CheckResult::new("spin", "coupled states orthogonal", ortho, 1e-10),
        CheckResult::new(
            "spin",
            "block projectors sum to identity",
            decomposition,
            1e-10,
        ),
        CheckResult::new("spin", "singlet rotation invariance", singlet_inv, 1e-10),
    ])
}

/// Worst `max |Λ(UρU†) - UΛ(ρ)U†|` over `samples` random rotations and states.
pub fn covariance_deviation(spin: SpinLabel, samples: usize, seed: u64) -> Result<f64> {
    let ch = isotropic_channel(spin)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (axis, angle) = random_rotation(&mut r);
        let u = rotation_unitary(spin, axis, angle)?;
        let rho = random_density(&mut r, spin.dim());
        let lhs = ch.apply(&rho.conjugate_by(&u))?;
        let rhs = ch.apply(&rho)?.conjugate_by(&u);
        worst = worst.max(lhs.matrix().max_abs_diff(rhs.matrix()));
    }
    Ok(worst)
}

/// Worst distance between the nonzero spectra of `Ω` and of `Λ(|φ><φ|)`.
pub fn gram_spectrum_deviation(ch: &KrausChannel, phi: &PureState) -> Result<f64> {
    let omega = hermitian_eigensystem(&ch.output_gram(phi)?)?.values;
    let out = ch.apply_pure(phi)?.spectrum();
    Ok(spectrum_distance(
        &nonzero_spectrum(&omega, 1e-12),
        &nonzero_spectrum(&out, 1e-12),
    ))
}

/// Excess of the monotonicity and superadditivity inequalities on one instance:
/// `(monotonicity excess, superadditivity deficit)`; both should be `<= 0`.
pub fn gain_inequalities(
    ch: &KrausChannel,
    ch2: &KrausChannel,
    rho: &DensityMatrix,
) -> Result<(f64, f64)> {
    let dims = (ch.dim_in(), ch2.dim_in());
    let ra = partial_trace(rho, dims, Keep::A)?;
    let rb = partial_trace(rho, dims, Keep::B)?;
    let joint = ch.tensor(ch2);
    let out = joint.apply(rho)?;
    let out_product = ch.apply(&ra)?.tensor(&ch2.apply(&rb)?);
    let before = relative_entropy(rho, &ra.tensor(&rb), LogBase::E)?;
    let after = relative_entropy(&out, &out_product, LogBase::E)?;
    let monotonicity = after - before;
    let superadditivity = ch.entropy_gain(&ra, LogBase::E)? + ch2.entropy_gain(&rb, LogBase::E)?
        - joint.entropy_gain(rho, LogBase::E)?;
    Ok((monotonicity, superadditivity))
}

pub fn channel_suite() -> Result<Vec<CheckResult>> {
    let mut r = rng(303);
    let mut bistochastic: f64 = 0.0;
    let mut covariance: f64 = 0.0;
    for spin in spins(5) {
        let ch = isotropic_channel(spin)?;
        bistochastic = bistochastic
            .max(ch.trace_preservation_residual())
            .max(ch.unitality_residual());
        covariance = covariance.max(covariance_deviation(spin, 20, 303 + spin.twice_s() as u64)?);
    }

    let mut gram: f64 = 0.0;
    let mut trace: f64 = 0.0;
    let mut positivity: f64 = 0.0;
    for seed in 0..30 {
        let d = 2 + seed as usize % 3;
        let ch = random_channel(d, 1 + seed as usize % 4, 3030 + seed)?;
        let phi = random_pure(&mut r, d);
        gram = gram.max(gram_spectrum_deviation(&ch, &phi)?);
        let out = ch.apply(&random_density(&mut r, d))?;
        trace = trace.max((out.matrix().trace().re - 1.0).abs());
        positivity = positivity.max(-out.spectrum()[0]);
    }

    let half = isotropic_channel(SpinLabel::HALF)?;
    let mut reversal: f64 = 0.0;
    for _ in 0..50 {
        let rho = random_density(&mut r, 2);
        reversal = reversal.max(
            time_reversal_apply(&rho)?
                .matrix()
                .max_abs_diff(half.apply(&rho)?.matrix()),
        );
    }

    let one = isotropic_channel(SpinLabel::ONE)?;
    let mut norm = f64::NEG_INFINITY;
    for _ in 0..500 {
        let phi = random_pure(&mut r, 3);
        norm = norm.max(operator_norm(&one.output_gram(&phi)?));
    }

    let mut monotonicity = f64::NEG_INFINITY;
    let mut superadditivity = f64::NEG_INFINITY;
    for seed in 0..40u64 {
        let a = random_channel(2, 1 + seed as usize % 3, 4040 + seed)?;
        let b = random_channel(2, 1 + (seed as usize + 1) % 3, 5050 + seed)?;
        let rho = random_density(&mut r, 4);
        let (m, s) = gain_inequalities(&a, &b, &rho)?;
        monotonicity = monotonicity.max(m);
        superadditivity = superadditivity.max(s);
    }

    let mut gain_sign = f64::NEG_INFINITY;
    for _ in 0..20 {
        gain_sign = gain_sign.max(-one.entropy_gain(&random_density(&mut r, 3), LogBase::E)?);
    }

    Ok(vec![
        CheckResult::new(
            "channel",
            "isotropic channels bistochastic",
            bistochastic,
            1e-12,
        ),
        CheckResult::new("channel", "rotational covariance", covariance, 1e-10),
        CheckResult::new(
            "channel",
            "Gram spectrum equals output spectrum",
            gram,
            1e-9,
        ),
        CheckResult::new("channel", "apply preserves trace", trace, 1e-12),
        CheckResult::new(
            "channel",
            "apply preserves positivity",
            positivity.max(0.0),
            1e-10,
        ),
        CheckResult::new(
            "channel",
            "time reversal form of spin-1/2 map",
            reversal,
            1e-12,
        ),
        CheckResult::new(
            "channel",
            "spin-1 Gram norm bound (excess over 1/2)",
            (norm - 0.5).max(0.0),
            1e-12,
        ),
        CheckResult::new(
            "channel",
            "relative entropy monotonicity",
            monotonicity.max(0.0),
            1e-8,
        ),
        CheckResult::new(
            "channel",
            "entropy gain superadditivity",
            superadditivity.max(0.0),
            1e-8,
        ),
        CheckResult::new(
            "channel",
            "bistochastic gain nonnegative",
            gain_sign.max(0.0),
            1e-10,
        ),
    ])
}

pub fn invariant_suite() -> Result<Vec<CheckResult>> {
    let mut three_path: f64 = 0.0;
    let mut entropy: f64 = 0.0;
    let mut reconstruction: f64 = 0.0;
    for spin in spins(5) {
        let rho = decohered_singlet(spin)?;
        let dist = isotypic_probabilities(&rho, spin)?;
        let element = matrix_element_probabilities(&rho, spin)?;
        let moment = moment_probabilities(spin)?;
        three_path = three_path
            .max(spectrum_distance(&dist.probs, &element))
            .max(spectrum_distance(&dist.probs, &moment.probs));
        entropy = entropy.max(
            (invariant_state_entropy(&dist, LogBase::E) - von_neumann_entropy(&rho, LogBase::E)?)
                .abs(),
        );
        reconstruction =
            reconstruction.max(dist.block_state()?.matrix().max_abs_diff(rho.matrix()));
    }
    let mut closed_forms: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for spin in [SpinLabel::HALF, SpinLabel::ONE] {
        let report = singlet_decoherence(spin, LogBase::E)?;
        let exact = exact_singlet_entropy(spin)
            .expect("closed form exists")
            .nats;
        closed_forms = closed_forms.max((report.entropy - exact).abs());
        margin = margin.min(report.excess.unwrap_or(f64::NEG_INFINITY));
    }
    Ok(vec![
        CheckResult::new("invariant", "three-path block weights", three_path, 1e-9),
        CheckResult::new(
            "invariant",
            "block entropy equals diagonalization",
            entropy,
            1e-10,
        ),
        CheckResult::new(
            "invariant",
            "block-constant reconstruction",
            reconstruction,
            1e-9,
        ),
        CheckResult::new(
            "invariant",
            "decohered singlet closed forms",
            closed_forms,
            1e-10,
        ),
        CheckResult::new(
            "invariant",
            "singlet excess strictly positive (negated margin)",
            -margin,
            0.0,
        ),
    ])
}

pub fn optimize_suite() -> Result<Vec<CheckResult>> {
    let cfg = SearchConfig {
        restarts: 16,
        seed: 606,
        ..Default::default()
    };
    let half = isotropic_channel(SpinLabel::HALF)?;
    let one = isotropic_channel(SpinLabel::ONE)?;
    let s_half = min_output_entropy(&half, &cfg)?;
    let s_one = min_output_entropy(&one, &cfg)?;
    let exact_half = exact_min_output_entropy(SpinLabel::HALF)
        .expect("closed form")
        .nats;
    let exact_one = exact_min_output_entropy(SpinLabel::ONE)
        .expect("closed form")
        .nats;
    let spread = s_half.restart_values.last().copied().unwrap_or(0.0) - s_half.restart_values[0];

    let mut bounds = f64::NEG_INFINITY;
    for seed in 0..4u64 {
        let d = 2 + seed as usize % 2;
        let ch = random_channel(d, 2, 6060 + seed)?;
        let g = min_entropy_gain(&ch, &cfg)?.value;
        bounds = bounds.max(g - 1e-8).max(-(d as f64).ln() - 1e-8 - g);
    }
    let iso_gain = min_entropy_gain(&half, &cfg)?.value.abs();
    let replace = replacement_channel(&PureState::basis(3, 0), 3);
    let replace_gain = (min_entropy_gain(&replace, &cfg)?.value + 3f64.ln()).abs();

    let probe = additivity_probe(&half, &half, &cfg)?;
    let again = min_output_entropy(&one, &cfg)?;
    let determinism =
        if again.value.to_bits() == s_one.value.to_bits() && again.argmin == s_one.argmin {
            0.0
        } else {
            1.0
        };
    Ok(vec![
        CheckResult::new(
            "optimize",
            "S[spin-1/2 channel] closed form",
            (s_half.value - exact_half).abs(),
            1e-8,
        ),
        CheckResult::new("optimize", "spin-1/2 restart values agree", spread, 1e-9),
        CheckResult::new(
            "optimize",
            "S[spin-1 channel] closed form",
            (s_one.value - exact_one).abs(),
            1e-6,
        ),
        CheckResult::new(
            "optimize",
            "G within [-ln d, 0] (excess)",
            bounds.max(0.0),
            0.0,
        ),
        CheckResult::new(
            "optimize",
            "G of bistochastic channel is zero",
            iso_gain,
            1e-8,
        ),
        CheckResult::new(
            "optimize",
            "G of replacement channel is -ln d",
            replace_gain,
            1e-6,
        ),
        CheckResult::new(
            "optimize",
            "probe subadditivity gap",
            probe.gap.max(0.0),
            1e-8,
        ),
        CheckResult::new("optimize", "search determinism", determinism, 0.0),
    ])
}

/// Runs every suite.
pub fn run_all() -> Result<Vec<CheckResult>> {
    let mut out = linalg_suite()?;
    out.extend(spin_suite()?);
    out.extend(channel_suite()?);
    out.extend(invariant_suite()?);
    out.extend(optimize_suite()?);
    Ok(out)
}
