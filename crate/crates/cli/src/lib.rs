//! Command-line front end for `spinchan`.
//!
//! All work happens in [`run`], which returns the exit status and the text that
//! `main` writes to stdout/stderr; tests drive it directly.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spinchan::invariant::{exact_min_output_entropy, ClosedForm};
use spinchan::optimize::output_spectrum;
use spinchan::verify::{run_all, CheckResult};
use spinchan::{
    additivity_probe, isotropic_channel, min_entropy_gain, min_output_entropy, singlet_decoherence,
    DensityMatrix, Error, KrausChannel, LogBase, ProbeReport, PureState, SearchConfig,
    SearchReport, SingletReport, SpinLabel,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "spinchan",
    version,
    about = "Entropy of rotationally invariant spin channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum output entropy over pure inputs.
    MinOutput {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Minimum entropy gain over all inputs.
    Gain {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Block decomposition of the decohered singlet.
    Singlet {
        #[arg(long, allow_hyphen_values = true)]
        spin: String,
        #[arg(long, value_enum, default_value_t = Base::E)]
        log_base: Base,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        output: Format,
    },
    /// Search for an additivity violation on a channel pair.
    Probe {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Second channel as a spin (defaults to the first channel).
        #[arg(long, conflicts_with = "channel2", allow_hyphen_values = true)]
        spin2: Option<String>,
        /// Second channel as a file (defaults to the first channel).
        #[arg(long)]
        channel2: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Run every property suite and print a pass/fail table.
    Verify {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        output: Format,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ChannelArgs {
    /// Isotropic channel of this spin, e.g. 1/2, 1, 3/2.
    #[arg(long, allow_hyphen_values = true)]
    pub spin: Option<String>,
    /// JSON channel file.
    #[arg(long)]
    pub channel: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simplex termination tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Base::E)]
    pub log_base: Base,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::E => LogBase::E,
            Base::Two => LogBase::Two,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    match execute(&cli.command) {
        Ok(out) => out,
        Err(e) => Outcome {
            code: EXIT_INVALID,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Where a channel came from, echoed into every report.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSource {
    Isotropic {
        spin: SpinLabel,
        dim: usize,
    },
    File {
        path: String,
        dim_in: usize,
        dim_out: usize,
        n_kraus: usize,
    },
}

struct LoadedChannel {
    channel: KrausChannel,
    source: ChannelSource,
    spin: Option<SpinLabel>,
}

fn load_spin(text: &str) -> spinchan::Result<LoadedChannel> {
    let spin: SpinLabel = text.parse()?;
    Ok(LoadedChannel {
        channel: isotropic_channel(spin)?,
        source: ChannelSource::Isotropic {
            spin,
            dim: spin.dim(),
        },
        spin: Some(spin),
    })
}

fn load_file(path: &PathBuf) -> spinchan::Result<LoadedChannel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let channel = KrausChannel::from_json(&text)?;
    Ok(LoadedChannel {
        source: ChannelSource::File {
            path: path.display().to_string(),
            dim_in: channel.dim_in(),
            dim_out: channel.dim_out(),
            n_kraus: channel.n_kraus(),
        },
        channel,
        spin: None,
    })
}

fn load(args: &ChannelArgs) -> spinchan::Result<LoadedChannel> {
    match (&args.spin, &args.channel) {
        (Some(s), None) => load_spin(s),
        (None, Some(p)) => load_file(p),
        _ => Err(Error::Config(
            "give exactly one of --spin or --channel".into(),
        )),
    }
}

fn config(args: &SearchArgs) -> spinchan::Result<SearchConfig> {
    let cfg = SearchConfig {
        restarts: args.restarts,
        seed: args.seed,
        simplex_tolerance: args.tolerance,
        log_base: args.log_base.into(),
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Closed-form reference value, as an expression plus its decimal in the report's base.
#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    pub expr: String,
    pub value: f64,
    pub deviation: f64,
}

impl Reference {
    fn new(expr: impl Into<String>, nats: f64, base: LogBase, measured: f64) -> Self {
        let value = base.from_nats(nats);
        Self {
            expr: expr.into(),
            value,
            deviation: (measured - value).abs(),
        }
    }
}

#[derive(Debug, Serialize)]
struct MinOutputJson<'a> {
    command: &'static str,
    channel: &'a ChannelSource,
    log_base: LogBase,
    value: f64,
    reference: Option<Reference>,
    argmin: &'a PureState,
    output_spectrum: Vec<f64>,
    restart_values: &'a [f64],
    converged_fraction: f64,
    evaluations: usize,
    config: &'a SearchConfig,
}

#[derive(Debug, Serialize)]
struct GainJson<'a> {
    command: &'static str,
    channel: &'a ChannelSource,
    log_base: LogBase,
    value: f64,
    lower_bound: f64,
    upper_bound: f64,
    bistochastic: bool,
    reference: Option<Reference>,
    argmin: &'a DensityMatrix,
    argmin_spectrum: Vec<f64>,
    restart_values: &'a [f64],
    converged_fraction: f64,
    evaluations: usize,
    config: &'a SearchConfig,
}

#[derive(Debug, Serialize)]
struct SingletJson<'a> {
    command: &'static str,
    #[serde(flatten)]
    report: &'a SingletReport,
}

#[derive(Debug, Serialize)]
struct ProbeJson<'a> {
    command: &'static str,
    channels: [&'a ChannelSource; 2],
    reference: Option<Reference>,
    #[serde(flatten)]
    report: &'a ProbeReport,
    config: &'a SearchConfig,
}

#[derive(Debug, Serialize)]
struct VerifyJson<'a> {
    command: &'static str,
    passed: bool,
    checks: &'a [CheckResult],
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Shortest round-trip decimal, matching the JSON output.
fn num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

fn unit(base: LogBase) -> &'static str {
    match base {
        LogBase::E => "nats",
        LogBase::Two => "bits",
    }
}

fn restart_csv(values: &[f64], base: LogBase) -> String {
    let mut s = format!("restart,value_{}\n", unit(base));
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{i},{}", num(*v));
    }
    s
}

fn execute(command: &Command) -> spinchan::Result<Outcome> {
    match command {
        Command::MinOutput { channel, search } => min_output(channel, search),
        Command::Gain { channel, search } => gain(channel, search),
        Command::Singlet {
            spin,
            log_base,
            output,
        } => singlet(spin, (*log_base).into(), *output),
        Command::Probe {
            channel,
            spin2,
            channel2,
            search,
        } => {
            let first = load(channel)?;
            let second = match (spin2, channel2) {
                (Some(s), _) => Some(load_spin(s)?),
                (None, Some(p)) => Some(load_file(p)?),
                (None, None) => None,
            };
            probe(&first, second.as_ref().unwrap_or(&first), search)
        }
        Command::Verify { output } => verify(*output),
    }
}

fn min_output(args: &ChannelArgs, search: &SearchArgs) -> spinchan::Result<Outcome> {
    let loaded = load(args)?;
    let cfg = config(search)?;
    let report: SearchReport<PureState> = min_output_entropy(&loaded.channel, &cfg)?;
    let base = cfg.log_base;
    let reference = loaded
        .spin
        .and_then(exact_min_output_entropy)
        .map(|c| Reference::new(c.expr, c.nats, base, report.value));
    let spectrum = output_spectrum(&loaded.channel, &report.argmin)?;
    let out = match search.output {
        Format::Json => to_json(&MinOutputJson {
            command: "min-output",
            channel: &loaded.source,
            log_base: base,
            value: report.value,
            reference: reference.clone(),
            argmin: &report.argmin,
            output_spectrum: spectrum.clone(),
            restart_values: &report.restart_values,
            converged_fraction: report.converged_fraction,
            evaluations: report.evaluations,
            config: &cfg,
        }),
        Format::Csv => restart_csv(&report.restart_values, base),
        Format::Text => {
            let mut s = format!(
                "minimum output entropy: {:.12} {}\n",
                report.value,
                unit(base)
            );
            if let Some(r) = &reference {
                let _ = writeln!(
                    s,
                    "closed form: {} = {:.12} (deviation {:.3e})",
                    r.expr, r.value, r.deviation
                );
            }
            let _ = writeln!(s, "output spectrum at argmin: {spectrum:?}");
            let _ = writeln!(
                s,
                "restarts: {} (converged {:.0}%)",
                report.restart_values.len(),
                100.0 * report.converged_fraction
            );
            s
        }
    };
    Ok(Outcome::ok(out))
}

fn gain(args: &ChannelArgs, search: &SearchArgs) -> spinchan::Result<Outcome> {
    let loaded = load(args)?;
    let cfg = config(search)?;
    let report = min_entropy_gain(&loaded.channel, &cfg)?;
    let base = cfg.log_base;
    let d = loaded.channel.dim_in() as f64;
    let bistochastic = loaded.channel.is_bistochastic(1e-10);
    let reference = bistochastic.then(|| Reference::new("0", 0.0, base, report.value));
    let spectrum = report.argmin.spectrum();
    let lower = base.from_nats(-d.ln());
    let out = match search.output {
        Format::Json => to_json(&GainJson {
            command: "gain",
            channel: &loaded.source,
            log_base: base,
            value: report.value,
            lower_bound: lower,
            upper_bound: 0.0,
            bistochastic,
            reference: reference.clone(),
            argmin: &report.argmin,
            argmin_spectrum: spectrum.clone(),
            restart_values: &report.restart_values,
            converged_fraction: report.converged_fraction,
            evaluations: report.evaluations,
            config: &cfg,
        }),
        Format::Csv => restart_csv(&report.restart_values, base),
        Format::Text => {
            let mut s = format!(
                "minimum entropy gain: {:.12} {}\n",
                report.value,
                unit(base)
            );
            let _ = writeln!(s, "bounds: [{lower:.12}, 0] {}", unit(base));
            let _ = writeln!(s, "bistochastic: {bistochastic}");
            let _ = writeln!(s, "argmin spectrum: {spectrum:?}");
            s
        }
    };
    Ok(Outcome::ok(out))
}

fn singlet(spin: &str, base: LogBase, output: Format) -> spinchan::Result<Outcome> {
    let spin: SpinLabel = spin.parse()?;
    let report = singlet_decoherence(spin, base)?;
    let out = match output {
        Format::Json => to_json(&SingletJson {
            command: "singlet",
            report: &report,
        }),
        Format::Csv => {
            let mut s = String::from("j,p_j\n");
            for (j, p) in report.probs.iter().enumerate() {
                let _ = writeln!(s, "{j},{}", num(*p));
            }
            s
        }
        Format::Text => {
            let u = unit(base);
            let mut s = format!("spin {spin}: block weights p_j = {:?}\n", report.probs);
            let _ = writeln!(s, "output entropy: {:.12} {u}", report.entropy);
            if let (Some(r), Some(x)) = (report.two_channel_reference, report.excess) {
                let _ = writeln!(s, "2 x single-channel minimum: {r:.12} {u}");
                let _ = writeln!(s, "excess: {x:.12} {u}");
            }
            s
        }
    };
    Ok(Outcome::ok(out))
}

fn probe_reference(
    a: &LoadedChannel,
    b: &LoadedChannel,
    base: LogBase,
    measured: f64,
) -> Option<Reference> {
    let fa: ClosedForm = a.spin.and_then(exact_min_output_entropy)?;
    let fb: ClosedForm = b.spin.and_then(exact_min_output_entropy)?;
    let expr = if fa == fb {
        format!("2 ({})", fa.expr)
    } else {
        format!("({}) + ({})", fa.expr, fb.expr)
    };
    Some(Reference::new(expr, fa.nats + fb.nats, base, measured))
}

fn probe(a: &LoadedChannel, b: &LoadedChannel, search: &SearchArgs) -> spinchan::Result<Outcome> {
    let cfg = config(search)?;
    let base = cfg.log_base;
    let report = additivity_probe(&a.channel, &b.channel, &cfg)?;
    let reference = probe_reference(a, b, base, report.joint_min);
    let out = match search.output {
        Format::Json => to_json(&ProbeJson {
            command: "probe",
            channels: [&a.source, &b.source],
            reference,
            report: &report,
            config: &cfg,
        }),
        Format::Csv => {
            let mut s = format!("series,index,value_{}\n", unit(base));
            let _ = writeln!(s, "joint_min,0,{}", num(report.joint_min));
            let _ = writeln!(s, "sum_of_singles,0,{}", num(report.sum_of_singles));
            let _ = writeln!(s, "gap,0,{}", num(report.gap));
            for (name, r) in [
                ("joint", &report.joint),
                ("single_a", &report.singles[0]),
                ("single_b", &report.singles[1]),
            ] {
                for (i, v) in r.restart_values.iter().enumerate() {
                    let _ = writeln!(s, "{name},{i},{}", num(*v));
                }
            }
            s
        }
        Format::Text => {
            let u = unit(base);
            let mut s = format!("joint minimum: {:.12} {u}\n", report.joint_min);
            let _ = writeln!(s, "sum of single minima: {:.12} {u}", report.sum_of_singles);
            let _ = writeln!(s, "gap: {:.3e} {u}", report.gap);
            let _ = writeln!(
                s,
                "argmin Schmidt coefficients: {:?}",
                report.schmidt_coefficients
            );
            let _ = writeln!(s, "violation found by search: {}", report.additivity_violation);
            s
        }
    };
    Ok(Outcome::ok(out))
}

fn verify(output: Format) -> spinchan::Result<Outcome> {
    let checks = run_all()?;
    let passed = checks.iter().all(|c| c.passed);
    let stdout = match output {
        Format::Json => to_json(&VerifyJson {
            command: "verify",
            passed,
            checks: &checks,
        }),
        Format::Csv => {
            let mut s = String::from("suite,check,worst,tolerance,passed\n");
            for c in &checks {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    c.suite,
                    c.check,
                    num(c.worst),
                    num(c.tolerance),
                    c.passed
                );
            }
            s
        }
        Format::Text => {
            let width = checks.iter().map(|c| c.check.len()).max().unwrap_or(0);
            let mut s = String::new();
            for c in &checks {
                let _ = writeln!(
                    s,
                    "{} {:<9} {:<width$} worst {:>10.3e}  tol {:>8.1e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.suite,
                    c.check,
                    c.worst,
                    c.tolerance,
                );
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            let _ = writeln!(s, "{} checks, {} failed", checks.len(), failed);
            s
        }
    };
    Ok(Outcome {
        code: if passed { EXIT_OK } else { EXIT_INVALID },
        stdout,
        stderr: String::new(),
    })
}
