//! Command-line interface. Every run produces an [`ExperimentReport`] whose `config` field
//! replays it through the `replay` subcommand.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::experiment::{
    chain_report, generate_ensemble, predicted_lower_bound, proportion_in_br, universality_proportion,
    weyl_check, EnsembleMode, EnsembleSpec, LMode,
};
use crate::fit::{fit_omegas, fit_omegas_structured, FitOptions, OmegaAssignment, TargetSpec};
use crate::hecke::MaassFormData;
use crate::io::lmfdb::DEFAULT_BASE_URL;
use crate::io::record::now_rfc3339;
use crate::io::report::RunMeta;
use crate::io::{bundled_fixture, load_dataset, save_dataset, ExperimentReport, LmfdbClient, Selector};
use crate::lfunc::afe::{choose_n, AfeEvaluator, AfeParams};
use crate::lfunc::DiscK;
use crate::rng;
use crate::sarnak::{ks_critical_99, ks_distance, BoxFamily, SarnakMeasure};
use crate::Complex64;

#[derive(Debug, Parser)]
#[command(name = "maass-universality", version, about = "Hecke-Maass L-function universality experiments")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "cache")]
    pub cache_dir: PathBuf,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Fetch, validate and cache LMFDB forms.
    Ingest(IngestArgs),
    /// Generate a synthetic Weyl-law ensemble.
    Sample(SampleArgs),
    /// Fit omega_p so that the model Euler product approximates a target on K.
    Fit(FitArgs),
    /// Evaluate L(s) on the boundary of K for one dataset form.
    Eval(EvalArgs),
    /// Equidistribution: KS tests of the mu_p sampler and box proportions.
    Equi(EquiArgs),
    /// Approximation chain for every form in a dataset.
    Chain(ChainArgs),
    /// Headline proportion of forms with sup_K |L - f| < eps.
    Universality(UniversalityArgs),
    /// Weyl-law counting check on a synthetic ensemble.
    Weyl(WeylArgs),
    /// Rerun a saved report from its config and compare the results.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    #[arg(long, conflicts_with_all = ["r_min", "r_max"])]
    pub label: Option<String>,
    #[arg(long, requires = "r_max")]
    pub r_min: Option<f64>,
    #[arg(long, requires = "r_min")]
    pub r_max: Option<f64>,
    #[arg(long, default_value = DEFAULT_BASE_URL)]
    pub base_url: String,
    /// Also write the records as a dataset file.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub r_max: f64,
    #[arg(long, default_value_t = 100)]
    pub p_cap: u64,
    /// Condition lambda(p) on boxes around the omega of a fit report.
    #[arg(long)]
    pub omega: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DiscArgs {
    #[arg(long, default_value_t = 0.1)]
    pub radius: f64,
    /// Points on the boundary grid of K.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
}

impl DiscArgs {
    fn disc(&self) -> crate::Result<DiscK> {
        DiscK::new(self.radius, self.grid)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// log f(s) = sum_k a_k (s - 3/4)^k.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub target_coeffs: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub disc: DiscArgs,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long = "Y", default_value_t = 100)]
    pub y: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 400)]
    pub max_sweeps: usize,
    /// Use the split-at-Z route (linear least squares above Z, then polishing).
    #[arg(long = "Z")]
    pub z: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Dataset file (default: the bundled fixture catalog).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub label: String,
    /// Main-sum length; chosen automatically when absent.
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub disc: DiscArgs,
    /// Error target for the automatic choice of N.
    #[arg(long, default_value_t = 1e-8)]
    pub error_target: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EquiArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Ensemble radius for the box-proportion test.
    #[arg(long, default_value_t = 346.41)]
    pub r_max: f64,
    /// Box centre used for every prime.
    #[arg(long, default_value_t = 0.0)]
    pub center: f64,
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Model,
    Genuine,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ChainArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Fit report supplying omega and the target.
    #[arg(long)]
    pub omega: PathBuf,
    #[arg(long = "X", default_value_t = 1000)]
    pub x: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Genuine)]
    pub mode: ModeArg,
    #[arg(long = "N")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct UniversalityArgs {
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Model)]
    pub mode: ModeArg,
    /// Fit report supplying omega and the target.
    #[arg(long)]
    pub omega: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Model mode: synthetic ensemble radius.
    #[arg(long, default_value_t = 109.55)]
    pub r_max: f64,
    /// Model mode: L is replaced by 1 / L_X.
    #[arg(long = "X")]
    pub x: Option<u64>,
    /// Genuine mode: dataset file (default: the bundled fixture catalog).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long = "N")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WeylArgs {
    #[arg(long, default_value_t = 120.0)]
    pub r_max: f64,
    /// Counting radius (default R_max / 2).
    #[arg(long = "R")]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub report: PathBuf,
}

/// What a report's `config` holds: enough to rerun the command bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Invocation {
    pub seed: u64,
    pub cache_dir: PathBuf,
    pub command: Command,
}

/// Exit status for an error chain: 2 validation, 3 network, 1 anything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Validation { .. } | Error::BoundViolation { .. } | Error::Parse { .. } | Error::SchemaDrift(_)) => 2,
        Some(Error::Network(_)) => 3,
        _ => 1,
    }
}

pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{}", report.render_table());
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<ExperimentReport> {
    if let Some(n) = cli.threads {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = match cli.command {
        Command::Replay(args) => replay(&args.report)?,
        command => execute(&Invocation { seed: cli.seed, cache_dir: cli.cache_dir, command })?,
    };
    if let Some(out) = &cli.out {
        report.save(out).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(report)
}

pub fn execute(inv: &Invocation) -> anyhow::Result<ExperimentReport> {
    let started_at = now_rfc3339();
    let clock = Instant::now();
    let (name, results) = match &inv.command {
        Command::Ingest(a) => ("ingest", ingest(inv, a)?),
        Command::Sample(a) => ("sample", sample(inv, a)?),
        Command::Fit(a) => ("fit", fit(inv, a)?),
        Command::Eval(a) => ("eval", eval(a)?),
        Command::Equi(a) => ("equi", equi(inv, a)?),
        Command::Chain(a) => ("chain", chain(a)?),
        Command::Universality(a) => ("universality", universality(inv, a)?),
        Command::Weyl(a) => ("weyl", weyl(inv, a)?),
        Command::Replay(_) => bail!("replay cannot be nested"),
    };
    Ok(ExperimentReport {
        command: name.to_string(),
        config: serde_json::to_value(inv)?,
        results,
        meta: RunMeta {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
        },
    })
}

/// Rerun a report and compare every serialized result field.
pub fn replay(path: &Path) -> anyhow::Result<ExperimentReport> {
    let saved = ExperimentReport::load(path).with_context(|| format!("reading report {}", path.display()))?;
    let inv: Invocation = serde_json::from_value(saved.config.clone()).context("report config is not replayable")?;
    let fresh = execute(&inv)?;
    let mut mismatches = Vec::new();
    let compared = diff("", &saved.results, &fresh.results, &mut mismatches);
    if !mismatches.is_empty() {
        return Err(Error::validation(
            path.display().to_string(),
            format!("replay differs in {} of {compared} fields: {}", mismatches.len(), mismatches.join(", ")),
        )
        .into());
    }
    Ok(ExperimentReport {
        command: "replay".into(),
        config: json!({ "report": path }),
        results: json!({ "replayed": saved.command, "fields_compared": compared, "identical": true }),
        meta: fresh.meta,
    })
}

fn diff(prefix: &str, a: &Value, b: &Value, out: &mut Vec<String>) -> usize {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => x
            .iter()
            .map(|(k, v)| match y.get(k) {
                Some(w) => diff(&format!("{prefix}.{k}"), v, w, out),
                None => {
                    out.push(format!("{prefix}.{k}"));
                    1
                }
            })
            .sum(),
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            x.iter().zip(y).enumerate().map(|(i, (v, w))| diff(&format!("{prefix}[{i}]"), v, w, out)).sum()
        }
        _ => {
            if a != b {
                out.push(if prefix.is_empty() { "<root>".into() } else { prefix.to_string() });
            }
            1
        }
    }
}

fn dataset(path: &Option<PathBuf>) -> anyhow::Result<Vec<MaassFormData>> {
    let p = path.clone().unwrap_or_else(bundled_fixture);
    load_dataset(&p).with_context(|| format!("loading dataset {}", p.display()))
}

/// Fit report -> (target, omega, disc).
fn load_fit(path: &Path) -> anyhow::Result<(TargetSpec, OmegaAssignment, DiscK)> {
    let report = ExperimentReport::load(path).with_context(|| format!("reading fit report {}", path.display()))?;
    if report.command != "fit" {
        bail!("{} is a `{}` report, not a `fit` report", path.display(), report.command);
    }
    let inv: Invocation = serde_json::from_value(report.config)?;
    let Command::Fit(args) = inv.command else { bail!("fit report has a foreign config") };
    let omega: OmegaAssignment = serde_json::from_value(report.results["omega"].clone())?;
    Ok((TargetSpec::new(args.target_coeffs)?, omega, args.disc.disc()?))
}

fn afe_n(form: &MaassFormData, k: &DiscK, n: Option<u64>) -> anyhow::Result<u64> {
    Ok(match n {
        Some(n) => n,
        None => choose_n(form, k, 1e-8)?,
    })
}

fn ingest(inv: &Invocation, a: &IngestArgs) -> anyhow::Result<Value> {
    let sel = match (&a.label, a.r_min, a.r_max) {
        (Some(l), None, None) => Selector::Label { label: l.clone() },
        (None, Some(lo), Some(hi)) => Selector::Range { r_min: lo, r_max: hi },
        _ => bail!(Error::invalid("ingest needs --label or both --r-min and --r-max")),
    };
    let client = LmfdbClient::new(a.base_url.clone(), inv.cache_dir.clone())?;
    let forms = client.fetch(&sel)?;
    if let Some(path) = &a.save {
        save_dataset(path, &forms, &now_rfc3339())?;
    }
    Ok(json!({
        "selector": sel,
        "count": forms.len(),
        "forms": forms.iter().map(|f| json!({
            "label": f.label, "r": f.r, "parity": f.parity.epsilon(), "p_cap": f.p_cap(),
        })).collect::<Vec<_>>(),
    }))
}

fn sample(inv: &Invocation, a: &SampleArgs) -> anyhow::Result<Value> {
    let mode = match &a.omega {
        Some(path) => {
            let (_, omega, _) = load_fit(path)?;
            EnsembleMode::Conditioned { boxes: BoxFamily::new(&omega.values, a.delta)? }
        }
        None => EnsembleMode::Unconditional,
    };
    let spec = EnsembleSpec::new(a.r_max, a.p_cap, inv.seed, mode);
    let forms = generate_ensemble(&spec)?;
    if let Some(path) = &a.save {
        // Fixed timestamp keeps synthetic datasets byte-identical across runs.
        save_dataset(path, &forms, "1970-01-01T00:00:00Z")?;
    }
    let lambda2: Vec<f64> = forms.iter().map(|f| f.lambda_p(2)).collect::<crate::Result<_>>()?;
    let mu2 = SarnakMeasure::new(2)?;
    Ok(json!({
        "count": forms.len(),
        "r_min": forms.first().map(|f| f.r),
        "r_max": forms.last().map(|f| f.r),
        "ks_lambda2": ks_distance(&lambda2, |x| mu2.cdf(x)),
        "ks_critical_99": ks_critical_99(forms.len().max(1)),
    }))
}

fn fit(inv: &Invocation, a: &FitArgs) -> anyhow::Result<Value> {
    let target = TargetSpec::new(a.target_coeffs.clone())?;
    let k = a.disc.disc()?;
    let opts = FitOptions { restarts: a.restarts, seed: inv.seed, max_sweeps: a.max_sweeps };
    Ok(match a.z {
        None => {
            let r = fit_omegas(&target, &k, a.eps, a.y, &opts)?;
            json!({
                "achieved_error": r.achieved_error,
                "converged": r.converged,
                "optimizer_converged": r.optimizer_converged,
                "restart_objectives": r.restart_objectives,
                "sweeps": r.history.len() - 1,
                "omega": r.omega,
            })
        }
        Some(z) => {
            let r = fit_omegas_structured(&target, &k, a.eps, a.y, z, &opts)?;
            json!({
                "achieved_error": r.fit.achieved_error,
                "converged": r.fit.converged,
                "optimizer_converged": r.fit.optimizer_converged,
                "z": r.z,
                "linear_residual": r.linear_residual,
                "tail_bound": r.tail_bound,
                "initial_objective": r.initial_objective,
                "sweeps": r.fit.history.len() - 1,
                "omega": r.fit.omega,
            })
        }
    })
}

fn eval(a: &EvalArgs) -> anyhow::Result<Value> {
    let forms = dataset(&a.dataset)?;
    let form = forms
        .iter()
        .find(|f| f.label == a.label)
        .ok_or_else(|| Error::invalid(format!("no form labelled {:?} in the dataset", a.label)))?;
    let k = a.disc.disc()?;
    let n = match a.n {
        Some(n) => n,
        None => choose_n(form, &k, a.error_target)?,
    };
    let pts = k.boundary();
    let values = AfeEvaluator::new(form, AfeParams::new(n))?.evaluate_many(&pts)?;
    let table: Vec<Value> = pts.iter().zip(&values).map(|(s, l)| json!([s.re, s.im, l.re, l.im])).collect();
    Ok(json!({
        "label": form.label,
        "n_cutoff": n,
        "max_abs": values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        "values": table,
    }))
}

fn equi(inv: &Invocation, a: &EquiArgs) -> anyhow::Result<Value> {
    let mut ks = Vec::new();
    for &p in &a.primes {
        let m = SarnakMeasure::new(p)?;
        let mut g = rng::stream(inv.seed, rng::prime_stream(p));
        let xs: Vec<f64> = (0..a.samples).map(|_| m.sample(&mut g)).collect();
        let d = ks_distance(&xs, |x| m.cdf(x));
        let crit = ks_critical_99(a.samples);
        ks.push(json!({ "p": p, "ks": d, "critical_99": crit, "pass": d < crit }));
    }
    let omega: Vec<(u64, f64)> = a.primes.iter().map(|&p| (p, a.center)).collect();
    let boxes = BoxFamily::new(&omega, a.delta)?;
    let p_cap = a.primes.iter().copied().max().unwrap_or(2);
    let forms = generate_ensemble(&EnsembleSpec::new(a.r_max, p_cap, inv.seed, EnsembleMode::Unconditional))?;
    let prop = proportion_in_br(&forms, &boxes)?;
    let pred = predicted_lower_bound(&boxes)?;
    Ok(json!({
        "ks": ks,
        "box": {
            "proportion": prop,
            "product": pred.product,
            "floor": pred.floor,
            "product_in_ci": prop.contains(pred.product),
            "above_floor": prop.fraction > pred.floor,
        },
    }))
}

fn chain(a: &ChainArgs) -> anyhow::Result<Value> {
    let (target, omega, k) = load_fit(&a.omega)?;
    let forms = dataset(&a.dataset)?;
    let mut rows = Vec::with_capacity(forms.len());
    for f in &forms {
        let mode = match a.mode {
            ModeArg::Model => LMode::Model,
            ModeArg::Genuine => LMode::Genuine { params: AfeParams::new(afe_n(f, &k, a.n)?) },
        };
        let r = chain_report(f, &target, &omega, &k, a.x, &mode)?;
        rows.push(json!({ "label": f.label, "report": r }));
    }
    Ok(json!({ "x": a.x, "y": omega.y, "forms": rows }))
}

fn universality(inv: &Invocation, a: &UniversalityArgs) -> anyhow::Result<Value> {
    let (target, omega, k) = load_fit(&a.omega)?;
    match a.mode {
        ModeArg::Model => {
            let x = a.x.unwrap_or(omega.y);
            let boxes = BoxFamily::new(&omega.values, a.delta)?;
            let run = |mode: EnsembleMode| -> anyhow::Result<_> {
                let forms = generate_ensemble(&EnsembleSpec::new(a.r_max, x.max(omega.y), inv.seed, mode))?;
                Ok(universality_proportion(&forms, &target, &k, a.eps, x, &LMode::Model)?)
            };
            let conditioned = run(EnsembleMode::Conditioned { boxes })?;
            let unconditioned = run(EnsembleMode::Unconditional)?;
            Ok(json!({
                "mode": "model",
                "x": x,
                "conditioned": conditioned,
                "unconditioned": unconditioned,
                "selection_effect": conditioned.fraction > unconditioned.fraction,
            }))
        }
        ModeArg::Genuine => {
            let forms = dataset(&a.dataset)?;
            let mut hits = 0;
            let mut rows = Vec::new();
            for f in &forms {
                let params = AfeParams::new(afe_n(f, &k, a.n)?);
                let values = AfeEvaluator::new(f, params)?.evaluate_many(&k.boundary())?;
                let d = k
                    .boundary()
                    .iter()
                    .zip(values)
                    .map(|(&s, l): (&Complex64, Complex64)| (l - target.value(s)).norm())
                    .fold(0.0, f64::max);
                hits += usize::from(d < a.eps);
                rows.push(json!({ "label": f.label, "sup_distance": d }));
            }
            Ok(json!({
                "mode": "genuine",
                "proportion": crate::experiment::Proportion::new(hits, forms.len()),
                "forms": rows,
            }))
        }
    }
}

fn weyl(inv: &Invocation, a: &WeylArgs) -> anyhow::Result<Value> {
    let forms = generate_ensemble(&EnsembleSpec::new(a.r_max, 2, inv.seed, EnsembleMode::Unconditional))?;
    let r = a.r.unwrap_or(a.r_max / 2.0);
    Ok(json!({ "count": forms.len(), "check": weyl_check(&forms, r)? }))
}
