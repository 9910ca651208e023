//! `lrll` — command-line front end: deterministic experiment execution with
//! CSV/JSON artifact emission.
//!
//! Every run writes its fully resolved configuration beside its outputs;
//! identical (config, seed, thread count) produce byte-identical artifacts.
//! Exit codes: 0 success, 1 input error (bad flags, malformed specs, domain
//! violations), 2 numerical failure (divergence, capacity).

mod objectives;

use clap::{Args, Parser, Subcommand};
use lrll::certify::{
    correlation_bound, criticality_report, svp_fixed_point_check, witness_check,
    witness_construct_objective, SpuriousWitness,
};
use lrll::counterexamples::{rank1_example, rankr_linear_example, theorem_witness_example};
use lrll::estimate::{bdp_estimate, rip_estimate};
use lrll::factorized::FactorizedProblem;
use lrll::linalg::balanced_factorize;
use lrll::objectives::Objective;
use lrll::report::{stringify_numbers, to_report_json, write_atomic};
use lrll::scan::{strict_saddle_scan, SamplingSpec};
use lrll::solvers::{
    gd_factorized, perturbed_gd, svp, Manifold, PerturbSchedule, SolverTrace, Status,
};
use lrll::{Error, Mat, Result};
use objectives::{
    build_point, parse_sensing_spec, row_major, tensor_spec_json, BuiltObjective, ObjectiveSelector,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "lrll",
    version,
    about = "Low-rank landscape lab: projected and factorized solvers, criticality certification, spurious-point witnesses and counterexample construction"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Singular value projection on a low-rank manifold
    Svp(SvpArgs),
    /// Plain gradient descent on the factorized problem
    Gd(GdArgs),
    /// Perturbed gradient descent with saddle-escape schedule
    Pgd(PgdArgs),
    /// First/second-order criticality certification of a point
    Certify(CertifyArgs),
    /// Witness feasibility checking and constructive realization
    Witness(WitnessArgs),
    /// Exact counterexample constructors
    Counterexample(CounterexampleArgs),
    /// Empirical restricted-isometry / bounded-difference estimation
    Rip(RipArgs),
    /// Strict-saddle trichotomy scan
    #[command(name = "strict-saddle")]
    StrictSaddle(ScanArgs),
    /// Symmetric/asymmetric liftings with isometry checks
    Lift(LiftArgs),
    /// Micro-benchmarks of the core primitives (timings to stdout)
    Bench(BenchArgs),
}

#[derive(Args, Serialize, Deserialize, Clone, Default)]
struct Common {
    /// Output directory (default: $LRLL_OUTPUT_DIR, else ./lrll-out)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Global seed for all random streams
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Parallelism level recorded in the output metadata (execution is
    /// currently serial, so outputs do not depend on it)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", skip_deserializing)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Clone, Default)]
struct ObjFlags {
    /// Objective family: rank1 | rankr | dialed | identity | witness-example4
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<String>,
    /// Gaussian sensing instance, e.g. n=30,m=30,r=3,p=900
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sensing: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl ObjFlags {
    fn resolve(&self, seed: u64) -> Result<ObjectiveSelector> {
        match (&self.objective, &self.sensing) {
            (Some(_), Some(_)) => {
                Err(Error::Input("pass either --objective or --sensing, not both".into()))
            }
            (None, Some(spec)) => {
                Ok(ObjectiveSelector::Sensing { spec: parse_sensing_spec(spec)?, seed })
            }
            (None, None) => Err(Error::Input(
                "an objective is required: --objective <family> or --sensing <spec>".into(),
            )),
            (Some(name), None) => {
                let n = self.n;
                match name.as_str() {
                    "rank1" => Ok(ObjectiveSelector::Rank1 { n: n.unwrap_or(3) }),
                    "rankr" => {
                        let r = self.r.unwrap_or(2);
                        Ok(ObjectiveSelector::Rankr { r, n: n.unwrap_or(2 * r) })
                    }
                    "dialed" => Ok(ObjectiveSelector::Dialed {
                        theta: self
                            .theta
                            .ok_or_else(|| Error::Input("--objective dialed needs --theta".into()))?,
                        n: n.unwrap_or(3),
                    }),
                    "identity" => {
                        let nn = n.unwrap_or(4);
                        Ok(ObjectiveSelector::Identity { n: nn, m: self.m.unwrap_or(nn) })
                    }
                    "witness-example4" => {
                        Ok(ObjectiveSelector::WitnessExample4 { r: self.r.unwrap_or(2) })
                    }
                    other => Err(Error::Input(format!("unknown objective family `{other}`"))),
                }
            }
        }
    }
}

fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("LRLL_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lrll-out"))
}

/// Loads the config file (when given) and overlays the explicitly passed
/// flags on top of it.
fn merge_config<T: Serialize + DeserializeOwned>(cli: T, config: Option<PathBuf>) -> Result<T> {
    let Some(path) = config else { return Ok(cli) };
    let mut base: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let over = serde_json::to_value(&cli)?;
    deep_merge(&mut base, over);
    Ok(serde_json::from_value(base)?)
}

fn deep_merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn write_config<T: Serialize>(dir: &Path, name: &str, resolved: &T) -> Result<()> {
    let mut v = serde_json::to_value(resolved)?;
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("generator".into(), serde_json::Value::String(lrll::rng::GENERATOR.into()));
    }
    write_atomic(
        &dir.join(format!("{name}-config.json")),
        serde_json::to_string_pretty(&v)?.as_bytes(),
    )
}

fn write_report<T: Serialize>(dir: &Path, file: &str, schema: &str, payload: &T) -> Result<()> {
    write_atomic(&dir.join(file), to_report_json(schema, payload)?.as_bytes())
}

#[derive(Serialize)]
struct SolverSummary {
    status: Status,
    iterations: usize,
    final_f: f64,
    final_grad_norm: f64,
    contraction_max: Option<f64>,
    contraction_ratios: Vec<f64>,
    perturbations: usize,
}

fn summarize(trace: &SolverTrace, with_ratios: bool) -> SolverSummary {
    let ratios = if with_ratios { trace.gap_ratios(0.0) } else { Vec::new() };
    SolverSummary {
        status: trace.status,
        iterations: trace.rows.len().saturating_sub(1),
        final_f: trace.final_value(),
        final_grad_norm: trace.rows.last().map(|r| r.grad_norm).unwrap_or(f64::NAN),
        contraction_max: ratios.iter().cloned().reduce(f64::max),
        contraction_ratios: ratios,
        perturbations: trace.rows.iter().filter(|r| r.event == "perturb").count(),
    }
}

fn trace_exit(trace: &SolverTrace) -> Result<()> {
    if trace.status == Status::Diverged {
        Err(Error::Divergence("solver diverged".into()))
    } else {
        Ok(())
    }
}

// ─── svp ─────────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct SvpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    obj: ObjFlags,
    /// Target rank (default: the family's natural rank)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    /// Step size; default (1+δ̂)⁻¹ with δ̂ estimated at rank 2r
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    /// Known isometry constant (skips estimation when η is defaulted)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    /// Initial point: zero | global | spurious
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<String>,
    /// Manifold: asym | sym
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    manifold: Option<String>,
    /// Also write the sensing ensemble (JSON header + CSV payload)
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    save_ensemble: bool,
}

fn run_svp(args: SvpArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let sel = args.obj.resolve(seed)?;
    let built = sel.build()?;
    let obj = built.as_dyn();
    let rank = args.rank.unwrap_or_else(|| sel.default_rank());
    let manifold = match args.manifold.as_deref().unwrap_or("asym") {
        "asym" => Manifold::Asymmetric,
        "sym" => Manifold::Symmetric,
        other => return Err(Error::Input(format!("unknown manifold `{other}`"))),
    };

    let (eta, delta_hat) = match (args.eta, args.delta) {
        (Some(e), d) => (e, d),
        (None, Some(d)) => (1.0 / (1.0 + d), Some(d)),
        (None, None) => {
            let d = rip_estimate(obj, 2 * rank, 32, 32, seed)?;
            (1.0 / (1.0 + d), Some(d))
        }
    };
    let t_max = args.t_max.unwrap_or(500);
    let tol = args.tol.unwrap_or(1e-8);
    let init = args.init.as_deref().unwrap_or("zero");
    let m0 = match init {
        "zero" => Mat::zeros(obj.dims().0, obj.dims().1),
        name => build_point(name, &sel, &built, rank, seed)?.product(),
    };

    let trace = svp(obj, manifold, rank, &m0, eta, t_max, tol)?;
    std::fs::create_dir_all(&dir)?;
    if args.save_ensemble {
        if let BuiltObjective::Linear(lin) = &built {
            let mut buf = Vec::new();
            lin.ensemble().save(&mut buf)?;
            write_atomic(&dir.join("sensing-ensemble.txt"), &buf)?;
        } else {
            return Err(Error::Input("--save-ensemble requires a sensing objective".into()));
        }
    }
    write_config(
        &dir,
        "svp",
        &serde_json::json!({
            "subcommand": "svp", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "objective": sel, "rank": rank, "eta": eta, "delta_hat": delta_hat,
            "t_max": t_max, "tol": tol, "init": init,
            "manifold": if manifold == Manifold::Asymmetric { "asym" } else { "sym" },
        }),
    )?;
    write_atomic(&dir.join("svp-trace.csv"), trace.to_csv().as_bytes())?;
    write_report(&dir, "svp-summary.json", "svp-summary", &summarize(&trace, true))?;
    println!(
        "svp: {:?} after {} iterations, f = {:e}",
        trace.status,
        trace.rows.len() - 1,
        trace.final_value()
    );
    trace_exit(&trace)
}

// ─── gd / pgd ────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct GdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    obj: ObjFlags,
    /// Balance regularization weight μ (asymmetric problems)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    /// Use the symmetric factorized problem h_s(U) = f(UUᵀ)
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    symmetric: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    /// Initial point: random | global | spurious | e2-over-sqrt2 | zero
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

struct GdSetup {
    sel: ObjectiveSelector,
    built: BuiltObjective,
    mu: f64,
    rank: usize,
    init: String,
    step: f64,
    t_max: usize,
    tol: f64,
}

fn gd_setup(args: &GdArgs, seed: u64) -> Result<GdSetup> {
    let sel = args.obj.resolve(seed)?;
    let built = sel.build()?;
    Ok(GdSetup {
        rank: args.rank.unwrap_or_else(|| sel.default_rank()),
        sel,
        built,
        mu: args.mu.unwrap_or(0.5),
        init: args.init.clone().unwrap_or_else(|| "random".into()),
        step: args.step.unwrap_or(0.1),
        t_max: args.t_max.unwrap_or(100_000),
        tol: args.tol.unwrap_or(1e-9),
    })
}

fn factor_problem(obj: &dyn Objective, symmetric: bool, mu: f64) -> FactorizedProblem<'_> {
    if symmetric {
        FactorizedProblem::Symmetric { obj }
    } else {
        FactorizedProblem::Asymmetric { obj, mu }
    }
}

fn gd_config_json(name: &str, seed: u64, threads: usize, s: &GdSetup, symmetric: bool) -> serde_json::Value {
    serde_json::json!({
        "subcommand": name, "seed": seed, "threads": threads,
        "objective": s.sel, "mu": s.mu, "symmetric": symmetric, "rank": s.rank,
        "init": s.init, "step": s.step, "t_max": s.t_max, "tol": s.tol,
    })
}

fn run_gd(args: GdArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let s = gd_setup(&args, seed)?;
    let prob = factor_problem(s.built.as_dyn(), args.symmetric, s.mu);
    let mut f0 = build_point(&s.init, &s.sel, &s.built, s.rank, seed)?;
    if args.symmetric {
        f0 = lrll::linalg::FactorPair::new_symmetric(f0.u)?;
    }
    let trace = gd_factorized(&prob, &f0, s.step, s.t_max, s.tol)?;
    std::fs::create_dir_all(&dir)?;
    write_config(&dir, "gd", &gd_config_json("gd", seed, args.common.threads.unwrap_or(1), &s, args.symmetric))?;
    write_atomic(&dir.join("gd-trace.csv"), trace.to_csv().as_bytes())?;
    write_report(&dir, "gd-summary.json", "gd-summary", &summarize(&trace, false))?;
    println!(
        "gd: {:?} after {} iterations, f = {:e}",
        trace.status,
        trace.rows.len() - 1,
        trace.final_value()
    );
    trace_exit(&trace)
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct PgdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    gd: GdArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_thres: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    f_thres: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    g_thres: Option<f64>,
    /// Stop when the objective reaches this value
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    f_target: Option<f64>,
}

fn run_pgd(args: PgdArgs) -> Result<()> {
    let config = args.gd.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.gd.common.seed.unwrap_or(0);
    let dir = out_dir(&args.gd.common);
    let s = gd_setup(&args.gd, seed)?;
    let prob = factor_problem(s.built.as_dyn(), args.gd.symmetric, s.mu);
    let mut f0 = build_point(&s.init, &s.sel, &s.built, s.rank, seed)?;
    if args.gd.symmetric {
        f0 = lrll::linalg::FactorPair::new_symmetric(f0.u)?;
    }
    let defaults = PerturbSchedule::default();
    let sched = PerturbSchedule {
        radius: args.radius.unwrap_or(defaults.radius),
        t_thres: args.t_thres.unwrap_or(defaults.t_thres),
        f_thres: args.f_thres.unwrap_or(defaults.f_thres),
        g_thres: args.g_thres.unwrap_or(defaults.g_thres),
    };
    let f_target = args.f_target.unwrap_or(1e-8);
    let trace = perturbed_gd(&prob, &f0, s.step, &sched, s.t_max, f_target, seed)?;
    std::fs::create_dir_all(&dir)?;
    let mut cfg = gd_config_json("pgd", seed, args.gd.common.threads.unwrap_or(1), &s, args.gd.symmetric);
    if let serde_json::Value::Object(map) = &mut cfg {
        map.insert("schedule".into(), serde_json::to_value(&sched)?);
        map.insert("f_target".into(), serde_json::to_value(f_target)?);
    }
    write_config(&dir, "pgd", &cfg)?;
    write_atomic(&dir.join("pgd-trace.csv"), trace.to_csv().as_bytes())?;
    write_report(&dir, "pgd-summary.json", "pgd-summary", &summarize(&trace, false))?;
    println!(
        "pgd: {:?} after {} iterations, f = {:e}",
        trace.status,
        trace.rows.len() - 1,
        trace.final_value()
    );
    trace_exit(&trace)
}

// ─── certify ─────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct CertifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    obj: ObjFlags,
    /// Point to certify: global | spurious | e2-over-sqrt2 | random | zero
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    symmetric: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_grad: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_eig: Option<f64>,
    /// Also run the projected-method fixed-point check at this δ
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

fn run_certify(args: CertifyArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let sel = args.obj.resolve(seed)?;
    let built = sel.build()?;
    let rank = args.rank.unwrap_or_else(|| sel.default_rank());
    let point_name = args.point.clone().unwrap_or_else(|| "spurious".into());
    let mut point = build_point(&point_name, &sel, &built, rank, seed)?;
    if args.symmetric {
        point = lrll::linalg::FactorPair::new_symmetric(point.u)?;
    }
    let mu = args.mu.unwrap_or(0.0);
    let tol_grad = args.tol_grad.unwrap_or(1e-8);
    let tol_eig = args.tol_eig.unwrap_or(1e-9);
    let prob = factor_problem(built.as_dyn(), args.symmetric, mu);
    let report = criticality_report(&prob, &point, &built.mstar()?, tol_grad, tol_eig)?;

    let fixed_point = match args.delta {
        Some(d) => Some(svp_fixed_point_check(
            built.as_dyn(),
            &point.product(),
            rank,
            d,
            if args.symmetric { Manifold::Symmetric } else { Manifold::Asymmetric },
        )?),
        None => None,
    };

    #[derive(Serialize)]
    struct CertifyReport<'a> {
        objective: &'a ObjectiveSelector,
        point: &'a str,
        mu: f64,
        symmetric: bool,
        tol_grad: f64,
        tol_eig: f64,
        criticality: &'a lrll::certify::CriticalityReport,
        fixed_point: &'a Option<lrll::certify::FixedPointReport>,
    }

    std::fs::create_dir_all(&dir)?;
    write_config(
        &dir,
        "certify",
        &serde_json::json!({
            "subcommand": "certify", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "objective": sel, "point": point_name, "mu": mu, "symmetric": args.symmetric,
            "rank": rank, "tol_grad": tol_grad, "tol_eig": tol_eig, "delta": args.delta,
        }),
    )?;
    write_report(
        &dir,
        "certify-report.json",
        "certify-report",
        &CertifyReport {
            objective: &sel,
            point: &point_name,
            mu,
            symmetric: args.symmetric,
            tol_grad,
            tol_eig,
            criticality: &report,
            fixed_point: &fixed_point,
        },
    )?;
    println!(
        "certify: {:?} (grad {:e}, λ_min {:e}, gap {:e})",
        report.classification, report.problem_grad_norm, report.hessian_lambda_min, report.value_gap
    );
    Ok(())
}

// ─── witness ─────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct WitnessArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Built-in family: example4
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    /// Custom witness JSON file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<PathBuf>,
    /// Realize the witness as a constant-Hessian objective
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    construct: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
}

fn diag_from(values: &[f64]) -> Mat {
    let mut m = Mat::zeros(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

fn mat_from(values: &[f64], rows: usize, cols: usize, what: &str) -> Result<Mat> {
    if values.len() != rows * cols {
        return Err(Error::Input(format!("{what}: expected {rows}×{cols} entries")));
    }
    Ok(Mat::from_row_slice(rows, cols, values))
}

#[derive(Deserialize)]
struct WitnessFile {
    delta: f64,
    alpha: f64,
    #[serde(default)]
    variant: Option<String>,
    sigma: Vec<f64>,
    lambda: Vec<f64>,
    a: Vec<f64>,
    #[serde(default)]
    b: Option<Vec<f64>>,
    c: Vec<f64>,
    #[serde(default)]
    d: Option<Vec<f64>>,
}

fn load_witness(path: &Path) -> Result<SpuriousWitness> {
    let wf: WitnessFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let r = wf.sigma.len();
    let tail = wf.lambda.len();
    let sym = matches!(wf.variant.as_deref(), Some("sym") | Some("symmetric"));
    let a = mat_from(&wf.a, r, r, "witness A")?;
    let c = mat_from(&wf.c, tail, r, "witness C")?;
    if sym {
        SpuriousWitness::new_symmetric(wf.delta, wf.alpha, diag_from(&wf.sigma), diag_from(&wf.lambda), a, c)
    } else {
        let b = wf.b.ok_or_else(|| Error::Input("asymmetric witness needs B".into()))?;
        let d = wf.d.ok_or_else(|| Error::Input("asymmetric witness needs D".into()))?;
        SpuriousWitness::new_asymmetric(
            wf.delta,
            wf.alpha,
            diag_from(&wf.sigma),
            diag_from(&wf.lambda),
            a,
            mat_from(&b, r, r, "witness B")?,
            c,
            mat_from(&d, tail, r, "witness D")?,
        )
    }
}

fn run_witness(args: WitnessArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let witness = match (&args.family, &args.file) {
        (Some(_), Some(_)) => return Err(Error::Input("pass either --family or --file".into())),
        (Some(name), None) => match name.as_str() {
            "example4" => theorem_witness_example(args.r.unwrap_or(2))?,
            other => return Err(Error::Input(format!("unknown witness family `{other}`"))),
        },
        (None, Some(path)) => load_witness(path)?,
        (None, None) => {
            return Err(Error::Input("a witness is required: --family example4 or --file <json>".into()))
        }
    };
    let report = witness_check(&witness);
    std::fs::create_dir_all(&dir)?;
    write_config(
        &dir,
        "witness",
        &serde_json::json!({
            "subcommand": "witness", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "family": args.family, "file": args.file, "r": witness.r(), "delta": witness.delta,
            "alpha": witness.alpha, "construct": args.construct,
        }),
    )?;
    write_report(&dir, "witness-report.json", "witness-report", &report)?;
    println!(
        "witness: feasible = {}, sufficiency flags = ({}, {})",
        report.feasible, report.sufficiency_cb, report.sufficiency_ad
    );

    if args.construct {
        let r = witness.r();
        let n = args.n.unwrap_or(2 * r);
        let m = args.m.unwrap_or(2 * r);
        let c = witness_construct_objective(&witness, n, m)?;
        write_atomic(
            &dir.join("witness-objective.json"),
            serde_json::to_string_pretty(&stringify_numbers(tensor_spec_json(&c.objective)))?.as_bytes(),
        )?;
        let f = balanced_factorize(&c.mtilde, r)?;
        let prob = FactorizedProblem::Asymmetric { obj: &c.objective, mu: 0.0 };
        let cert = criticality_report(&prob, &f, &c.mstar, 1e-8, 1e-9)?;

        #[derive(Serialize)]
        struct ConstructReport<'a> {
            lambda1: f64,
            lambda2: f64,
            mtilde: Vec<f64>,
            mstar: Vec<f64>,
            criticality: &'a lrll::certify::CriticalityReport,
        }
        write_report(
            &dir,
            "witness-construct-report.json",
            "witness-construct",
            &ConstructReport {
                lambda1: c.lambda1,
                lambda2: c.lambda2,
                mtilde: row_major(&c.mtilde),
                mstar: row_major(&c.mstar),
                criticality: &cert,
            },
        )?;
        println!(
            "construct: λ = ({:.6}, {:.6}), point classified {:?}",
            c.lambda1, c.lambda2, cert.classification
        );
    }
    Ok(())
}

// ─── counterexample ──────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct CounterexampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Family: rank1 | rankr | witness | dialed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

fn run_counterexample(args: CounterexampleArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let dir = out_dir(&args.common);
    let family = args.family.clone().unwrap_or_else(|| "rank1".into());
    std::fs::create_dir_all(&dir)?;
    let spec = match family.as_str() {
        "rank1" => tensor_spec_json(&rank1_example(args.n.unwrap_or(3))?),
        "rankr" => {
            let r = args.r.unwrap_or(2);
            tensor_spec_json(&rankr_linear_example(r, args.n.unwrap_or(2 * r))?)
        }
        "dialed" => {
            let theta = args.theta.ok_or_else(|| Error::Input("--family dialed needs --theta".into()))?;
            tensor_spec_json(&rank1_example(args.n.unwrap_or(3))?.dial(theta)?)
        }
        "witness" => {
            let w = theorem_witness_example(args.r.unwrap_or(2))?;
            serde_json::json!({
                "schema": "witness-spec/1",
                "delta": w.delta,
                "alpha": w.alpha,
                "variant": "asym",
                "sigma": (0..w.r()).map(|i| w.sigma[(i, i)]).collect::<Vec<_>>(),
                "lambda": (0..w.tail()).map(|i| w.lambda[(i, i)]).collect::<Vec<_>>(),
                "a": row_major(&w.a), "b": row_major(&w.b),
                "c": row_major(&w.c), "d": row_major(&w.d),
            })
        }
        other => return Err(Error::Input(format!("unknown counterexample family `{other}`"))),
    };
    write_config(
        &dir,
        "counterexample",
        &serde_json::json!({
            "subcommand": "counterexample", "seed": args.common.seed.unwrap_or(0),
            "threads": args.common.threads.unwrap_or(1),
            "family": family, "n": args.n, "r": args.r, "theta": args.theta,
        }),
    )?;
    let file = format!("counterexample-{family}.json");
    write_atomic(&dir.join(&file), serde_json::to_string_pretty(&stringify_numbers(spec))?.as_bytes())?;
    println!("counterexample: wrote {file}");
    Ok(())
}

// ─── rip ─────────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct RipArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    obj: ObjFlags,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    refine: Option<usize>,
    /// Also estimate the bounded-difference constant
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    bdp: bool,
}

fn run_rip(args: RipArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let sel = args.obj.resolve(seed)?;
    let built = sel.build()?;
    let rank = args.rank.unwrap_or_else(|| 2 * sel.default_rank());
    let samples = args.samples.unwrap_or(64);
    let refine = args.refine.unwrap_or(48);
    let delta = rip_estimate(built.as_dyn(), rank, samples, refine, seed)?;
    let kappa = if args.bdp { Some(bdp_estimate(built.as_dyn(), rank, samples, seed)?) } else { None };

    #[derive(Serialize)]
    struct RipReport<'a> {
        objective: &'a ObjectiveSelector,
        rank: usize,
        samples: usize,
        refine: usize,
        delta_lower_bound: f64,
        kappa_lower_bound: Option<f64>,
    }
    std::fs::create_dir_all(&dir)?;
    write_config(
        &dir,
        "rip",
        &serde_json::json!({
            "subcommand": "rip", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "objective": sel, "rank": rank, "samples": samples, "refine": refine, "bdp": args.bdp,
        }),
    )?;
    write_report(
        &dir,
        "rip.json",
        "rip-estimate",
        &RipReport { objective: &sel, rank, samples, refine, delta_lower_bound: delta, kappa_lower_bound: kappa },
    )?;
    println!("rip: δ̂ ≥ {delta}{}", kappa.map(|k| format!(", κ̂ ≥ {k}")).unwrap_or_default());
    Ok(())
}

// ─── strict-saddle ───────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    obj: ObjFlags,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[arg(long, default_value_t = false)]
    #[serde(default)]
    symmetric: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ball_radius: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gd_fraction: Option<f64>,
}

fn run_scan(args: ScanArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let sel = args.obj.resolve(seed)?;
    let built = sel.build()?;
    let rank = args.rank.unwrap_or_else(|| sel.default_rank());
    let mu = args.mu.unwrap_or(0.5);
    let prob = factor_problem(built.as_dyn(), args.symmetric, mu);
    let alpha = args.alpha.unwrap_or(0.1);
    let beta = args.beta.unwrap_or(1e-3);
    let gamma = args.gamma.unwrap_or(1e-3);
    let points = args.points.unwrap_or(500);
    let defaults = SamplingSpec::default();
    let spec = SamplingSpec {
        ball_radius: args.ball_radius.unwrap_or(defaults.ball_radius),
        gd_fraction: args.gd_fraction.unwrap_or(defaults.gd_fraction),
        ..defaults
    };
    let report = strict_saddle_scan(&prob, &built.mstar()?, rank, alpha, beta, gamma, points, &spec, seed)?;

    std::fs::create_dir_all(&dir)?;
    write_config(
        &dir,
        "strict-saddle",
        &serde_json::json!({
            "subcommand": "strict-saddle", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "objective": sel, "mu": mu, "symmetric": args.symmetric, "rank": rank,
            "alpha": alpha, "beta": beta, "gamma": gamma, "points": points,
            "ball_radius": spec.ball_radius, "gd_fraction": spec.gd_fraction,
        }),
    )?;
    let mut csv = String::from("index,dist,grad_norm,hessian_lambda_min,source,violates\n");
    for p in &report.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.index, p.dist, p.grad_norm, p.hessian_lambda_min, p.source, p.violates
        ));
    }
    write_atomic(&dir.join("strict-saddle-points.csv"), csv.as_bytes())?;
    write_report(&dir, "strict-saddle.json", "strict-saddle-scan", &report)?;
    println!(
        "strict-saddle: {} points, {} violations, {} frontier vertices",
        report.n_points, report.violation_count, report.frontier.len()
    );
    Ok(())
}

// ─── lift ────────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct LiftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    obj: ObjFlags,
    /// Direction: to-sym | to-asym
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<String>,
    /// Isometry constant for the symmetric lift (default: estimated)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    refine: Option<usize>,
}

fn run_lift(args: LiftArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let sel = args.obj.resolve(seed)?;
    let built = sel.build()?;
    let rank = sel.default_rank();
    let samples = args.samples.unwrap_or(64);
    let refine = args.refine.unwrap_or(48);
    let direction = args.direction.clone().unwrap_or_else(|| "to-sym".into());

    let base: std::sync::Arc<dyn Objective> = match built {
        BuiltObjective::Tensor(t) => std::sync::Arc::new(t),
        BuiltObjective::Linear(l) => std::sync::Arc::new(l),
    };
    let base_delta = match args.delta {
        Some(d) => d,
        None => rip_estimate(base.as_ref(), 2 * rank, samples, refine, seed)?,
    };

    #[derive(Serialize)]
    struct LiftReport<'a> {
        objective: &'a ObjectiveSelector,
        direction: &'a str,
        base_delta: f64,
        mu: Option<f64>,
        scale: Option<f64>,
        lifted_delta: f64,
        bound: Option<f64>,
        within_bound: bool,
    }

    let report = match direction.as_str() {
        "to-sym" => {
            let lifted = lrll::lift::lift_to_symmetric(base, base_delta)?;
            let lifted_delta = rip_estimate(&lifted, 2 * rank, samples, refine, seed)?;
            let bound = 2.0 * base_delta / (1.0 + base_delta) + 0.02;
            LiftReport {
                objective: &sel,
                direction: "to-sym",
                base_delta,
                mu: Some(lifted.mu()),
                scale: Some(lifted.scale()),
                lifted_delta,
                bound: Some(bound),
                within_bound: lifted_delta <= bound,
            }
        }
        "to-asym" => {
            let lifted = lrll::lift::lift_to_asymmetric(base)?;
            let lifted_delta = rip_estimate(&lifted, 2 * rank, samples, refine, seed)?;
            LiftReport {
                objective: &sel,
                direction: "to-asym",
                base_delta,
                mu: None,
                scale: None,
                lifted_delta,
                bound: None,
                within_bound: (lifted_delta - base_delta).abs() <= 0.02,
            }
        }
        other => return Err(Error::Input(format!("unknown lift direction `{other}`"))),
    };

    std::fs::create_dir_all(&dir)?;
    write_config(
        &dir,
        "lift",
        &serde_json::json!({
            "subcommand": "lift", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "objective": sel, "direction": direction, "delta": args.delta,
            "samples": samples, "refine": refine,
        }),
    )?;
    write_report(&dir, "lift.json", "lift-report", &report)?;
    println!("lift {direction}: base δ̂ = {base_delta}, lifted δ̂ = {}", report.lifted_delta);
    Ok(())
}

// ─── bench ───────────────────────────────────────────────────────────

#[derive(Args, Serialize, Deserialize, Clone)]
struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Matrix sizes to exercise
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    sizes: Option<Vec<usize>>,
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let config = args.common.config.clone();
    let args = merge_config(args, config)?;
    let seed = args.common.seed.unwrap_or(0);
    let dir = out_dir(&args.common);
    let sizes = args.sizes.clone().unwrap_or_else(|| vec![10, 20, 40]);
    std::fs::create_dir_all(&dir)?;
    write_config(
        &dir,
        "bench",
        &serde_json::json!({
            "subcommand": "bench", "seed": seed, "threads": args.common.threads.unwrap_or(1),
            "sizes": sizes,
        }),
    )?;
    // timings go to stdout only: artifacts must stay byte-reproducible
    println!("benchmark,size,seconds");
    for &n in &sizes {
        let mut rng = lrll::rng::stream_rng(seed, n as u64);
        let m = lrll::rng::gaussian_mat(n, n, &mut rng);
        let t0 = std::time::Instant::now();
        let mut guard = 0.0;
        for _ in 0..20 {
            guard += lrll::linalg::truncated_svd_project(&m, 2)?.norm();
        }
        println!("truncated_svd_project,{n},{:.6}", t0.elapsed().as_secs_f64() / 20.0);
        assert!(guard.is_finite());

        let obj = rank1_example(n.max(2))?;
        let t1 = std::time::Instant::now();
        let _ = rip_estimate(&obj, 2, 8, 10, seed)?;
        println!("rip_estimate,{n},{:.6}", t1.elapsed().as_secs_f64());
    }
    println!("correlation_bound(0.4) = {}", correlation_bound(0.4)?);
    Ok(())
}

// ─── entry ───────────────────────────────────────────────────────────

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Svp(a) => run_svp(a),
        Cmd::Gd(a) => run_gd(a),
        Cmd::Pgd(a) => run_pgd(a),
        Cmd::Certify(a) => run_certify(a),
        Cmd::Witness(a) => run_witness(a),
        Cmd::Counterexample(a) => run_counterexample(a),
        Cmd::Rip(a) => run_rip(a),
        Cmd::StrictSaddle(a) => run_scan(a),
        Cmd::Lift(a) => run_lift(a),
        Cmd::Bench(a) => run_bench(a),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Rank(_) | Error::Domain(_) => 1,
        Error::Capacity(_) | Error::Divergence(_) | Error::Construction(_) | Error::Io(_) | Error::Serde(_) => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                // unknown flags and malformed values are input errors
                eprint!("{e}");
                std::process::exit(1);
            }
            // --help / --version
            print!("{e}");
            std::process::exit(0);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
