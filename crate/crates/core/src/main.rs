use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use skewsplit::bench::{self, Experiment, ExperimentConfig, InnerPreset, OcpMode, OutputFormat, RhsKind};
use skewsplit::discretize::{assemble, ProblemKind, ProblemSpec};
use skewsplit::krylov::Method;
use skewsplit::sparse::write_matrix_market;
use skewsplit::spectra::{EstimateMethod, Target};
use skewsplit::{PrecondSpec, SolverConfig};

/// Condition number studies, solver benchmarks and optimal control
/// pipeline sweeps for split positive real systems.
#[derive(Parser)]
#[command(name = "skewsplit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condition numbers over a sequence of refined meshes.
    Cond(Overrides),
    /// Iteration counts and timings of linear solvers.
    Solve(Overrides),
    /// Outer/inner iteration counts of optimal control pipelines.
    Ocp(Overrides),
    /// Writes the assembled matrix of a built-in problem in Matrix Market format.
    Export(ExportArgs),
    /// Prints the effective configuration as JSON without running it.
    ShowConfig {
        #[arg(value_parser = ["cond", "solve", "ocp"])]
        experiment: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args, Clone, Default)]
struct ProblemArgs {
    /// advdiff, stokes, oseen, wave or beam.
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    dim: Option<usize>,
    /// Cells per side on the coarsest level.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    /// Advection vector, comma separated.
    #[arg(long, value_delimiter = ',')]
    advection: Option<Vec<f64>>,
}

/// Flags override the corresponding fields of the config file.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    refinements: Option<usize>,
    /// Operators for cond, comma separated (A, H, S, HinvA, PinvA, A11, ...).
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<Target>>,
    /// dense or power.
    #[arg(long)]
    cond_method: Option<EstimateMethod>,
    /// Solver methods, comma separated.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    /// Preconditioner: none, jacobi, exact, ichol[:tol], ilu[:tol], mg[:cycles[:levels[:weight]]].
    #[arg(long)]
    precond: Option<PrecondSpec>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Regularization parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// condensed, ppcg or schur, comma separated.
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<OcpMode>>,
    /// Inner solver presets, comma separated.
    #[arg(long, value_delimiter = ',')]
    inner: Option<Vec<InnerPreset>>,
    /// Outer tolerances, comma separated.
    #[arg(long, value_delimiter = ',')]
    cgtol: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix Market system matrix (solve only).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Matrix Market right-hand side for --matrix.
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Use a seeded random right-hand side instead of all ones.
    #[arg(long)]
    random_rhs: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    out: PathBuf,
}

fn default_dim(kind: ProblemKind) -> usize {
    match kind {
        ProblemKind::Stokes | ProblemKind::Oseen => 2,
        _ => 1,
    }
}

/// Applies problem flags on top of `base`. Returns `None` when neither
/// gives a problem.
fn problem_from(args: &ProblemArgs, base: Option<ProblemSpec>) -> Option<ProblemSpec> {
    let mut spec = match (args.problem, base) {
        (Some(kind), Some(b)) if b.kind == kind => b,
        (Some(kind), _) => {
            let dim = args.dim.unwrap_or(default_dim(kind));
            ProblemSpec::new(kind, dim, 16)
        }
        (None, Some(b)) => b,
        (None, None) => return None,
    };
    if let Some(d) = args.dim {
        spec.dim = d;
    }
    if let Some(c) = args.cells {
        spec.cells_per_side = c;
    }
    if let Some(nu) = args.nu {
        spec.params.nu = nu;
    }
    if let Some(b) = &args.advection {
        spec.params.b = b.clone();
    }
    Some(spec)
}

fn effective_config(experiment: Experiment, o: &Overrides) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::new(experiment),
    };
    if cfg.experiment != experiment {
        if o.config.is_some() {
            bail!("config file describes a {:?} experiment", cfg.experiment);
        }
        cfg.experiment = experiment;
    }
    if o.matrix.is_some() {
        cfg.matrix = o.matrix.clone();
        cfg.problem = None;
    }
    if o.rhs.is_some() {
        cfg.rhs = o.rhs.clone();
    }
    if o.matrix.is_none() {
        cfg.problem = problem_from(&o.problem, cfg.problem.take());
    }
    if o.random_rhs {
        cfg.rhs_kind = RhsKind::Random;
    }
    if let Some(r) = o.refinements {
        cfg.refinements = r;
    }
    if let Some(t) = &o.targets {
        cfg.targets = t.clone();
    }
    if o.cond_method.is_some() {
        cfg.cond_method = o.cond_method;
    }
    if let Some(methods) = &o.method {
        let precond = o.precond.clone().unwrap_or(PrecondSpec::ExactSym);
        cfg.solvers = methods
            .iter()
            .map(|&m| SolverConfig::new(m, precond.clone(), o.tol.unwrap_or(1e-8)))
            .collect();
    } else if let Some(p) = &o.precond {
        cfg.solvers.iter_mut().for_each(|s| s.precond = p.clone());
        cfg.study_precond = p.clone();
    }
    for s in &mut cfg.solvers {
        if let Some(t) = o.tol {
            s.tol = t;
        }
        if let Some(m) = o.max_iter {
            s.max_iter = m;
        }
    }
    if experiment == Experiment::Ocp {
        let mut sweep = cfg.ocp.take().unwrap_or_default();
        if let Some(l) = &o.lambda {
            sweep.lambdas = l.clone();
        }
        if let Some(m) = &o.mode {
            sweep.modes = m.clone();
        }
        if let Some(i) = &o.inner {
            sweep.inner = i.clone();
        }
        if let Some(c) = &o.cgtol {
            sweep.cgtols = c.clone();
        }
        if let Some(m) = o.max_iter {
            sweep.max_outer = m;
        }
        cfg.ocp = Some(sweep);
    }
    if o.out.is_some() {
        cfg.output = o.out.clone();
    }
    if let Some(f) = o.format {
        cfg.format = f;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(experiment: Experiment, o: &Overrides) -> anyhow::Result<ExitCode> {
    let cfg = effective_config(experiment, o)?;
    let table = bench::run(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            table.write(&mut w, cfg.format)?;
            w.flush()?;
        }
        None => table.write(io::stdout().lock(), cfg.format)?,
    }
    let failed = table.failures();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", table.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn export(args: &ExportArgs) -> anyhow::Result<ExitCode> {
    let spec = problem_from(&args.problem, None).context("--problem is required")?;
    let assembled = assemble(&spec)?;
    let a = bench::system_matrix(&assembled)?;
    write_matrix_market(&a, &args.out)?;
    eprintln!("wrote {}x{} matrix with {} entries", a.nrows(), a.ncols(), a.nnz());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cond(o) => run_experiment(Experiment::Cond, o),
        Command::Solve(o) => run_experiment(Experiment::Solve, o),
        Command::Ocp(o) => run_experiment(Experiment::Ocp, o),
        Command::Export(a) => export(a),
        Command::ShowConfig { experiment, overrides } => {
            let e = match experiment.as_str() {
                "cond" => Experiment::Cond,
                "solve" => Experiment::Solve,
                _ => Experiment::Ocp,
            };
            effective_config(e, overrides).and_then(|cfg| {
                println!("{}", cfg.to_json()?);
                Ok(ExitCode::SUCCESS)
            })
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
