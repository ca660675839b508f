//! Acceptance criteria, one printed PASS/FAIL line each.
//!
//! Runs without the libtest harness so the table is always shown.

use std::process::Command;

use serde_json::Value;

use spinchan::channel::replacement_channel;
use spinchan::invariant::{
    decohered_singlet, matrix_element_probabilities, moment_probabilities, projector_probabilities,
};
use spinchan::linalg::{
    hermitian_eigensystem, operator_norm, partial_trace, relative_entropy, Keep,
};
use spinchan::sampling::{random_density, random_pure, random_rotation, rng};
use spinchan::spin::rotation_unitary;
use spinchan::{
    isotropic_channel, min_entropy_gain, random_channel, KrausChannel, LogBase, PureState,
    SearchConfig, SpinLabel,
};

type Verdict = (bool, String);

fn ln(x: f64) -> f64 {
    x.ln()
}

fn cli(args: &[&str]) -> Value {
    let mut full = vec!["spinchan"];
    full.extend_from_slice(args);
    let out = spinchan_cli::run(full);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("json report")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_f64().expect("number"))
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn c1() -> Verdict {
    let r = cli(&["min-output", "--spin", "1/2"]);
    let want = ln(3.0) - 2.0 / 3.0 * ln(2.0);
    let err = (r["value"].as_f64().unwrap() - want).abs();
    let restarts = floats(&r["restart_values"]);
    let spread = restarts.last().unwrap() - restarts[0];
    (
        err <= 1e-8 && spread <= 1e-9 && r["log_base"] == "e",
        format!("|S - (ln3 - 2/3 ln2)| = {err:.2e}, restart spread = {spread:.2e}"),
    )
}

fn c2() -> Verdict {
    let r = cli(&["min-output", "--spin", "1"]);
    let err = (r["value"].as_f64().unwrap() - ln(2.0)).abs();
    let spec_err = max_diff(&floats(&r["output_spectrum"]), &[0.0, 0.5, 0.5]);
    (
        err <= 1e-6 && spec_err <= 1e-6,
        format!("|S - ln2| = {err:.2e}, spectrum deviation = {spec_err:.2e}"),
    )
}

fn c3() -> Verdict {
    let ch = isotropic_channel(SpinLabel::ONE).unwrap();
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let phi = random_pure(&mut r, 3);
        worst = worst.max(operator_norm(&ch.output_gram(&phi).unwrap()));
    }
    (
        worst <= 0.5 + 1e-12 && worst > 0.45,
        format!("max ||Omega|| over 1000 states = {worst:.6}"),
    )
}

fn singlet_checks(spin: &str, probs: &[f64], entropy: f64) -> (f64, f64, Value) {
    let r = cli(&["singlet", "--spin", spin]);
    let p_err = max_diff(&floats(&r["probs"]), probs);
    let s_err = (r["entropy"].as_f64().unwrap() - entropy).abs();
    (p_err, s_err, r)
}

fn c4() -> Verdict {
    let entropy = 5.0 / 3.0 * ln(3.0) - 2.0 / 3.0 * ln(2.0);
    let (p_err, s_err, r) = singlet_checks("1/2", &[1.0 / 3.0, 2.0 / 3.0], entropy);
    let excess = r["excess"].as_f64().unwrap();
    let x_err = (excess - ln(4.0 / 3.0) / 3.0).abs();
    (
        p_err <= 1e-10 && s_err <= 1e-10 && x_err <= 1e-9 && excess > 0.0,
        format!("p err {p_err:.2e}, entropy err {s_err:.2e}, excess {excess:.7} (err {x_err:.2e})"),
    )
}

fn c5() -> Verdict {
    let entropy = ln(3.0) + 4.0 / 3.0 * ln(2.0);
    let (p_err, s_err, r) = singlet_checks("1", &[1.0 / 3.0, 0.25, 5.0 / 12.0], entropy);
    let s = r["entropy"].as_f64().unwrap();
    (
        p_err <= 1e-10 && s_err <= 1e-10 && s > 2.0 * ln(2.0),
        format!(
            "p err {p_err:.2e}, entropy {s:.7} (err {s_err:.2e}) vs 2 ln2 = {:.7}",
            2.0 * ln(2.0)
        ),
    )
}

fn c6() -> Verdict {
    let mut worst = 0.0f64;
    for twice in 1..=4 {
        let spin = SpinLabel::from_twice(twice);
        let rho = decohered_singlet(spin).unwrap();
        let a = projector_probabilities(&rho, spin).unwrap();
        let b = matrix_element_probabilities(&rho, spin).unwrap();
        let c = moment_probabilities(spin).unwrap().probs;
        worst = worst
            .max(max_diff(&a, &b))
            .max(max_diff(&a, &c))
            .max(max_diff(&b, &c));
    }
    (
        worst <= 1e-9,
        format!("worst disagreement for s = 1/2..2: {worst:.2e}"),
    )
}

fn c7() -> Verdict {
    let mut worst = 0.0f64;
    let mut r = rng(7);
    for twice in 1..=3 {
        let spin = SpinLabel::from_twice(twice);
        let ch = isotropic_channel(spin).unwrap();
        for _ in 0..100 {
            let (axis, angle) = random_rotation(&mut r);
            let u = rotation_unitary(spin, axis, angle).unwrap();
            let rho = random_density(&mut r, spin.dim());
            let lhs = ch.apply(&rho.conjugate_by(&u)).unwrap();
            let rhs = ch.apply(&rho).unwrap().conjugate_by(&u);
            worst = worst.max(lhs.matrix().max_abs_diff(rhs.matrix()));
        }
    }
    (
        worst <= 1e-10,
        format!("worst covariance deviation: {worst:.2e}"),
    )
}

fn c8() -> Verdict {
    let mut worst = 0.0f64;
    let mut r = rng(8);
    for i in 0..100u64 {
        let d = 2 + (i % 4) as usize;
        let ch = random_channel(d, 1 + (i % 5) as usize, 800 + i).unwrap();
        let phi = random_pure(&mut r, d);
        let nonzero = |v: Vec<f64>| v.into_iter().filter(|&x| x > 1e-12).collect::<Vec<_>>();
        let omega = nonzero(
            hermitian_eigensystem(&ch.output_gram(&phi).unwrap())
                .unwrap()
                .values,
        );
        let out = nonzero(ch.apply_pure(&phi).unwrap().spectrum());
        worst = worst.max(max_diff(&omega, &out));
    }
    (
        worst <= 1e-9,
        format!("worst spectrum mismatch over 100 pairs: {worst:.2e}"),
    )
}

fn c9() -> Verdict {
    let cfg = SearchConfig::default();
    let mut outside = 0.0f64;
    for d in [2usize, 3] {
        for i in 0..20u64 {
            let ch = random_channel(d, 1 + (i % 3) as usize, 900 + 100 * d as u64 + i).unwrap();
            let g = min_entropy_gain(&ch, &cfg).unwrap().value;
            outside = outside.max(g - 1e-8).max(-ln(d as f64) - 1e-8 - g);
        }
    }
    let iso = ["1/2", "1", "3/2"]
        .iter()
        .map(|s| cli(&["gain", "--spin", s])["value"].as_f64().unwrap().abs())
        .fold(0.0, f64::max);
    let dir = std::env::temp_dir().join(format!("spinchan-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("replacement.json");
    std::fs::write(
        &path,
        replacement_channel(&PureState::basis(3, 0), 3).to_json(),
    )
    .unwrap();
    let g = cli(&["gain", "--channel", path.to_str().unwrap()])["value"]
        .as_f64()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    let rep_err = (g + ln(3.0)).abs();
    (
        outside <= 0.0 && iso <= 1e-8 && rep_err <= 1e-6,
        format!("40 random channels inside bounds: {}, max |G_iso| = {iso:.2e}, |G_rep + ln3| = {rep_err:.2e}", outside <= 0.0),
    )
}

fn gain_nats(ch: &KrausChannel, rho: &spinchan::DensityMatrix) -> f64 {
    ch.entropy_gain(rho, LogBase::E).unwrap()
}

fn c10() -> Verdict {
    let mut r = rng(10);
    let mut mono = f64::NEG_INFINITY;
    let mut superadd = f64::NEG_INFINITY;
    for i in 0..200u64 {
        let a = random_channel(2, 1 + (i % 3) as usize, 10_000 + i).unwrap();
        let b = random_channel(2, 1 + ((i / 3) % 3) as usize, 20_000 + i).unwrap();
        let rho = random_density(&mut r, 4);
        let ra = partial_trace(&rho, (2, 2), Keep::A).unwrap();
        let rb = partial_trace(&rho, (2, 2), Keep::B).unwrap();
        let ab = a.tensor(&b);
        let out = ab.apply(&rho).unwrap();
        let out_prod = a.apply(&ra).unwrap().tensor(&b.apply(&rb).unwrap());
        let before = relative_entropy(&rho, &ra.tensor(&rb), LogBase::E).unwrap();
        let after = relative_entropy(&out, &out_prod, LogBase::E).unwrap();
        mono = mono.max(after - before);
        superadd = superadd.max(gain_nats(&a, &ra) + gain_nats(&b, &rb) - gain_nats(&ab, &rho));
    }
    let cfg = SearchConfig::default();
    let mut additivity = 0.0f64;
    for i in 0..10u64 {
        let a = random_channel(2, 2, 1000 + i).unwrap();
        let b = random_channel(2, 2, 2000 + i).unwrap();
        let ga = min_entropy_gain(&a, &cfg).unwrap().value;
        let gb = min_entropy_gain(&b, &cfg).unwrap().value;
        let gab = min_entropy_gain(&a.tensor(&b), &cfg).unwrap().value;
        additivity = additivity.max((gab - ga - gb).abs());
    }
    (
        mono <= 1e-8 && superadd <= 1e-8 && additivity <= 1e-3,
        format!("monotonicity excess {mono:.2e}, superadditivity excess {superadd:.2e}, worst |G_AB - G_A - G_B| = {additivity:.2e}"),
    )
}

fn c11() -> Verdict {
    let r = cli(&["probe", "--spin", "1/2", "--restarts", "256"]);
    let want = 2.0 * (ln(3.0) - 2.0 / 3.0 * ln(2.0));
    let err = (r["joint_min"].as_f64().unwrap() - want).abs();
    let schmidt = floats(&r["schmidt_coefficients"]);
    let smaller = schmidt.iter().copied().fold(f64::INFINITY, f64::min);
    let gap = r["gap"].as_f64().unwrap();
    (
        err <= 1e-6 && smaller <= 1e-3 && gap <= 1e-8,
        format!(
            "|joint - 2 S| = {err:.2e}, smaller Schmidt coefficient {smaller:.2e}, gap {gap:.2e}"
        ),
    )
}

fn c12() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_spinchan");
    let invocations: [&[&str]; 6] = [
        &[
            "min-output",
            "--spin",
            "1",
            "--seed",
            "7",
            "--log-base",
            "2",
        ],
        &["gain", "--spin", "1/2", "--restarts", "8"],
        &["singlet", "--spin", "3/2"],
        &["probe", "--spin", "1/2", "--restarts", "16"],
        &[
            "min-output",
            "--spin",
            "3/2",
            "--restarts",
            "8",
            "--output",
            "csv",
        ],
        &["verify", "--output", "json"],
    ];
    let mut identical = 0;
    for args in invocations {
        let a = Command::new(bin).args(args).output().unwrap();
        let b = Command::new(bin).args(args).output().unwrap();
        if a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty() {
            identical += 1;
        }
    }
    (
        identical == invocations.len(),
        format!(
            "{identical}/{} invocations byte-identical across two runs",
            invocations.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("spin-1/2 minimum output entropy", c1),
        ("spin-1 minimum output entropy", c2),
        ("spin-1 Gram operator norm bound", c3),
        ("spin-1/2 decohered singlet", c4),
        ("spin-1 decohered singlet", c5),
        ("three-path block weights", c6),
        ("rotational covariance", c7),
        ("Gram spectrum shortcut", c8),
        ("entropy gain bounds", c9),
        ("entropy gain additivity", c10),
        ("additivity probe on product states", c11),
        ("deterministic output", c12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
