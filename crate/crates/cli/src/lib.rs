pub mod checks;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nclp_core::copies::{clt_moment_finite_s, clt_moment_limit, clt_moment_simulated, rosenthal_bound_check, rosenthal_classical_mc, CopySystem, Distribution};
use nclp_core::matcore::{random_matrix_rng, random_state_rng};
use nclp_core::normlib::{conditional_lp_norm, factorization_norm, placed_lp_norm, schatten_norm, DensityJson};
use nclp_core::spaces::dimension_budget;
use nclp_core::{ComplexMatrix, Density, Error, Exponent, MatrixJson, NormSpec, Placement};
use rayon::prelude::*;

use checks::Ctx;
pub use report::{CheckOutcome, Format, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nclp", version, about = "Noncommutative L_p norms and verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalOpts {
    /// Master seed; every check draws from its own named stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the primary tolerance of the selected checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Checks run concurrently up to this many threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm of a matrix read from --input.
    Norm(NormArgs),
    /// Runs one named check.
    Verify(VerifyArgs),
    /// Rosenthal-type bound for tensor copies, or the classical Monte Carlo version.
    Rosenthal(RosenthalArgs),
    /// Finite-s central-limit moments against the tensor simulation.
    Moments(MomentsArgs),
    /// Dimension chain n ~ m ln m.
    Budget(BudgetArgs),
    /// Runs a named group of checks.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Matrix JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Plain Schatten norm (the default).
    #[arg(long, group = "kind")]
    pub schatten: bool,
    /// Density-weighted L_p norm; needs --density.
    #[arg(long, group = "kind")]
    pub state: bool,
    /// Factorization norm inf ‖α‖_u ‖β‖_v; needs -u and -v.
    #[arg(long, group = "kind")]
    pub factorization: bool,
    /// Conditional norm described by a NormSpec JSON file.
    #[arg(long, group = "kind", value_name = "SPEC")]
    pub conditional: Option<PathBuf>,
    #[arg(short = 'p', default_value = "2")]
    pub p: Exponent,
    #[arg(short = 'u')]
    pub u: Option<Exponent>,
    #[arg(short = 'v')]
    pub v: Option<Exponent>,
    /// Density JSON file ({"matrix": ..., "mass": ...}).
    #[arg(long)]
    pub density: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlacementArg::Symmetric)]
    pub placement: PlacementArg,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PlacementArg {
    Symmetric,
    Left,
    Right,
    BothQuarter,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Placement {
        match p {
            PlacementArg::Symmetric => Placement::Symmetric,
            PlacementArg::Left => Placement::Left,
            PlacementArg::Right => Placement::Right,
            PlacementArg::BothQuarter => Placement::BothQuarter,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of the check names listed by `suite all`.
    pub check: String,
    /// Size for graph-tensor and oh-graph.
    #[arg(long)]
    pub n: Option<usize>,
    /// Amplification level for graph-tensor and oh-graph.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RosenthalArgs {
    /// Number of copies.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(short = 'p', default_value = "1.5")]
    pub p: Exponent,
    /// Base matrix; random 2×2 when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Base state; random when absent.
    #[arg(long)]
    pub density: Option<PathBuf>,
    /// Classical Monte Carlo inequality instead of tensor copies.
    #[arg(long)]
    pub classical: bool,
    #[arg(long, default_value = "gaussian")]
    pub dist: Distribution,
    /// Number of classical variables.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(short = 'q', default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Moment order.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Number of slots.
    #[arg(long, default_value_t = 5)]
    pub s: usize,
    /// Base dimension of the random inputs.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// closed-forms, interpolation, graphs, copies or all.
    pub name: String,
}

/// Failure before a report exists: bad arguments or unreadable input.
#[derive(Debug)]
pub struct UsageError(pub String);

impl From<Error> for UsageError {
    fn from(e: Error) -> UsageError {
        UsageError(e.to_string())
    }
}

fn read_text(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, UsageError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

pub fn load_matrix(path: &Path) -> Result<ComplexMatrix, UsageError> {
    let mj: MatrixJson = parse_json(path)?;
    mj.to_matrix().map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

pub fn load_density(path: &Path) -> Result<Density, UsageError> {
    let dj: DensityJson = parse_json(path)?;
    Density::try_from(dj).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn ctx(g: &GlobalOpts) -> Ctx {
    Ctx { seed: g.seed, tol: g.tol, cache_dir: std::env::var_os("NCLP_CACHE_DIR").map(PathBuf::from) }
}

fn run_checks(command: &str, names: &[&str], g: &GlobalOpts) -> Result<Report, UsageError> {
    let c = ctx(g);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.jobs.max(1))
        .build()
        .map_err(|e| UsageError(format!("thread pool: {e}")))?;
    let outcomes = pool.install(|| names.par_iter().map(|n| checks::run(n, &c)).collect());
    Ok(Report::new(command, g.seed, outcomes))
}

fn norm(a: &NormArgs, g: &GlobalOpts) -> Result<Report, UsageError> {
    let x = load_matrix(&a.input)?;
    let density = a.density.as_deref().map(load_density).transpose()?;
    let mut out = CheckOutcome::new("norm");
    if let Some(spec_path) = &a.conditional {
        let spec: NormSpec = parse_json(spec_path)?;
        let opts = ctx(g).opts("norm");
        let rep = conditional_lp_norm(&x, &spec, &opts)?;
        out.require("conditional", "value", rep.value, rep.converged);
        out.details = serde_json::to_value(&rep).ok();
    } else if a.factorization {
        let (Some(u), Some(v)) = (a.u, a.v) else {
            return Err(UsageError("--factorization needs -u and -v".into()));
        };
        let rep = factorization_norm(&x, u, v, &ctx(g).opts("norm"))?;
        out.require(format!("factorization u={u} v={v}"), "value", rep.value, true);
        out.details = serde_json::to_value(&rep).ok();
    } else if a.state {
        let d = density.ok_or_else(|| UsageError("--state needs --density".into()))?;
        let v = placed_lp_norm(&x, &d, a.p, a.placement.into())?;
        out.log(format!("state p={}", a.p), "value", v);
    } else {
        out.log(format!("schatten p={}", a.p), "value", schatten_norm(&x, a.p)?);
    }
    Ok(Report::new("norm", g.seed, vec![out]))
}

fn verify(a: &VerifyArgs, g: &GlobalOpts) -> Result<Report, UsageError> {
    if checks::find(&a.check).is_none() {
        let names: Vec<&str> = checks::CHECKS.iter().map(|c| c.0).collect();
        return Err(UsageError(format!("unknown check {:?}; expected one of {}", a.check, names.join(", "))));
    }
    let custom = a.n.is_some() || a.m.is_some() || a.samples.is_some();
    if !custom {
        return run_checks("verify", &[a.check.as_str()], g);
    }
    let c = ctx(g);
    let m = a.m.unwrap_or(1);
    let outcome = match a.check.as_str() {
        "graph-tensor" => {
            let n = a.n.unwrap_or(3);
            if !(1..=6).contains(&n) || !(1..=3).contains(&m) {
                return Err(UsageError("graph-tensor needs 1 ≤ n ≤ 6 and 1 ≤ m ≤ 3".into()));
            }
            checks::graph_tensor_custom(&c, n, m, a.samples.unwrap_or(4))
        }
        "oh-graph" => {
            let n = a.n.unwrap_or(4);
            if !(1..=16).contains(&n) || !(1..=4).contains(&m) {
                return Err(UsageError("oh-graph needs 1 ≤ n ≤ 16 and 1 ≤ m ≤ 4".into()));
            }
            checks::oh_graph_custom(&c, n, m, a.samples.unwrap_or(100))
        }
        other => return Err(UsageError(format!("{other} takes no --n/--m/--samples"))),
    };
    let outcome = outcome.unwrap_or_else(|e| CheckOutcome::failed(&a.check, e.to_string()));
    Ok(Report::new("verify", g.seed, vec![outcome]))
}

fn rosenthal(a: &RosenthalArgs, g: &GlobalOpts) -> Result<Report, UsageError> {
    let c = ctx(g);
    let mut out = CheckOutcome::new("rosenthal");
    if a.classical {
        let rep = rosenthal_classical_mc(a.dist, a.n, a.p.value(), a.q, a.samples, c.seed)?;
        out.log(format!("{:?} n={}", a.dist, a.n).to_lowercase(), "ratio", rep.ratio);
        out.log("ci", "low", rep.ci.0);
        out.log("ci", "high", rep.ci.1);
        out.details = serde_json::to_value(&rep).ok();
        return Ok(Report::new("rosenthal", g.seed, vec![out]));
    }
    let mut r = c.rng("rosenthal");
    let d = match &a.density {
        Some(p) => load_density(p)?,
        None => random_state_rng(&mut r, 2),
    };
    let x = match &a.input {
        Some(p) => load_matrix(p)?,
        None => random_matrix_rng(&mut r, d.dim(), d.dim()),
    };
    let sys = CopySystem::new(&d, a.k, true)?;
    let rep = rosenthal_bound_check(&x, &sys, a.p, &c.opts("rosenthal"))?;
    let item = format!("k={} p={}", a.k, a.p);
    out.log(&item, "lhs", rep.lhs);
    out.log(&item, "rhs", rep.rhs);
    out.at_least(&item, "ratio-low", rep.ratio, 0.1);
    out.at_most(&item, "ratio-high", rep.ratio, 10.0);
    out.details = serde_json::to_value(&rep).ok();
    Ok(Report::new("rosenthal", g.seed, vec![out]))
}

fn moments(a: &MomentsArgs, g: &GlobalOpts) -> Result<Report, UsageError> {
    if a.m == 0 || a.m > 6 || a.s == 0 || a.dim == 0 || a.dim > 4 {
        return Err(UsageError("moments needs 1 ≤ m ≤ 6, s ≥ 1 and 1 ≤ dim ≤ 4".into()));
    }
    let c = ctx(g);
    let mut r = c.rng("moments");
    let d = random_state_rng(&mut r, a.dim);
    let xs: Vec<ComplexMatrix> = (0..a.m).map(|_| random_matrix_rng(&mut r, a.dim, a.dim)).collect();
    let fin = clt_moment_finite_s(&xs, &d, a.s)?;
    let sim = clt_moment_simulated(&xs, &d, a.s)?;
    let lim = clt_moment_limit(&xs, &d)?;
    let mut out = CheckOutcome::new("moments");
    let item = format!("m={} s={}", a.m, a.s);
    out.log(&item, "finite-s-re", fin.re);
    out.log(&item, "finite-s-im", fin.im);
    out.log(&item, "limit-re", lim.re);
    out.log(&item, "limit-im", lim.im);
    let scale = xs.iter().map(|x| schatten_norm(x, Exponent::INF)).product::<nclp_core::Result<f64>>()?.max(1.0);
    out.at_most(&item, "simulation-err", (fin - sim).norm() / scale, c.tol(1e-10));
    Ok(Report::new("moments", g.seed, vec![out]))
}

fn budget(a: &BudgetArgs, g: &GlobalOpts) -> Result<Report, UsageError> {
    let b = dimension_budget(a.m, a.alpha, a.beta, a.gamma)?;
    let mut out = CheckOutcome::new("budget");
    let item = format!("m={}", a.m);
    out.log(&item, "n", b.n as f64);
    out.log(&item, "k_n", b.k_n as f64);
    out.log(&item, "ln_w_n", b.ln_w_n);
    out.log(&item, "ln_M", b.ln_big_m);
    out.details = serde_json::to_value(&b).ok();
    Ok(Report::new("budget", g.seed, vec![out]))
}

fn suite(a: &SuiteArgs, g: &GlobalOpts) -> Result<Report, UsageError> {
    let names = checks::suite_checks(&a.name)
        .ok_or_else(|| UsageError(format!("unknown suite {:?}; expected one of {}", a.name, checks::SUITES.join(", "))))?;
    run_checks(&format!("suite {}", a.name), &names, g)
}

/// Builds the report for a parsed command line.
pub fn execute(cli: &Cli) -> Result<Report, UsageError> {
    let g = &cli.global;
    if let Some(t) = g.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(UsageError(format!("--tol must be positive, got {t}")));
        }
    }
    if let Some(out) = &g.output {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            if !parent.is_dir() {
                return Err(UsageError(format!("output directory {} does not exist", parent.display())));
            }
        }
    }
    match &cli.command {
        Command::Norm(a) => norm(a, g),
        Command::Verify(a) => verify(a, g),
        Command::Rosenthal(a) => rosenthal(a, g),
        Command::Moments(a) => moments(a, g),
        Command::Budget(a) => budget(a, g),
        Command::Suite(a) => suite(a, g),
    }
}

/// Runs a command line and returns `(exit code, stdout text, stderr text)`.
pub fn run_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if code == EXIT_PASS { (code, text, String::new()) } else { (code, String::new(), text) };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(UsageError(msg)) => return (EXIT_USAGE, String::new(), format!("error: {msg}\n")),
    };
    let text = match report.render(cli.global.format) {
        Ok(t) => t,
        Err(e) => return (EXIT_USAGE, String::new(), format!("error: {e}\n")),
    };
    let mut err = String::new();
    for c in report.checks.iter().filter(|c| !c.pass) {
        err.push_str(&format!("{}\n", c.summary()));
    }
    let stdout = match &cli.global.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return (EXIT_USAGE, String::new(), format!("error: cannot write {}: {e}\n", path.display()));
            }
            String::new()
        }
        None => text,
    };
    (if report.pass { EXIT_PASS } else { EXIT_FAIL }, stdout, err)
}
