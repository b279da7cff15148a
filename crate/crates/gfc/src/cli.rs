//! The `gfc` command line.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfc_core::counting::{pgf, pmf_no_inverse, pmf_time_changed, PmfOptions, NMAX_CAP};
use gfc_core::gfcalc::{eigen_residual, ResidualOptions};
use gfc_core::laplace::{density_grid, DensityOptions, DEFAULT_INVERSION_ORDER};
use gfc_core::pathsim::{empirical_pmf, sample_inverse_passage, sample_subordinator_path, sample_time_changed_count, StreamPlan};
use gfc_core::specfun::{self, WrightParams};
use gfc_core::{PmfMethod, PmfTable, ProcessSpec, SimOptions, TildeEllMethod, UniformGrid};
use serde::Serialize;
use serde_json::{json, Value};

use crate::batch::{default_threads, run_parallel};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};
use crate::output::{emit_json, emit_table, fmt_float, pmf_metadata, pmf_table, ResidualReportJson, Table};
use crate::repro::{self, ReproOptions, DEFAULT_SEED};
use crate::spec::{bernstein_to_json, parse_bernstein, parse_process, process_to_json};

/// Largest tolerance a verification may be loosened to.
pub const MAX_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Parser, Serialize)]
#[command(name = "gfc", version, about = "Time-changed counting processes: evaluation, simulation and verification")]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "GFC_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for Monte Carlo (defaults to the machine's parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; tables also get a `<out>.json` metadata sidecar.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Bernstein functions: values, derivatives and Lévy tails.
    #[command(subcommand)]
    Bernstein(BernsteinCmd),
    /// Mittag-Leffler and Wright functions.
    #[command(subcommand)]
    Specfun(SpecfunCmd),
    /// Monte Carlo draws.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Probability mass function of a counting process.
    Pmf(PmfArgs),
    /// Probability generating function.
    Pgf(PgfArgs),
    /// Density of an inverse subordinator.
    Density(DensityArgs),
    /// Residual checks of the governing equations.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run a reproduction criterion (`c1`..`c10`) or `all`.
    Repro { id: String },
}

#[derive(Debug, Args, Serialize)]
pub struct ProcessArgs {
    /// Outer law: `poisson:λ`, `gcp:λ1,λ2,...` or `@file.json`.
    #[arg(long)]
    pub process: String,
    /// Subordinator exponent ψ applied to the outer law.
    #[arg(long, alias = "psi")]
    pub inner: Option<String>,
    /// Exponent f of the inverse subordinator clock.
    #[arg(long, alias = "f")]
    pub inverse: Option<String>,
}

impl ProcessArgs {
    fn resolve(&self) -> Result<ProcessSpec, CliError> {
        parse_process(&self.process, self.inner.as_deref(), self.inverse.as_deref())
    }
}

#[derive(Debug, Subcommand, Serialize)]
pub enum BernsteinCmd {
    /// f(x).
    Eval {
        #[arg(long, alias = "spec")]
        f: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// m-th derivative f^(m)(x).
    Deriv {
        #[arg(long, alias = "spec")]
        f: String,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long)]
        order: usize,
    },
    /// Lévy tail ν(s).
    Tail {
        #[arg(long, alias = "spec")]
        f: String,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum SpecfunCmd {
    /// E_{α,β}(z).
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        z: Vec<f64>,
    },
    /// Three-parameter E^γ_{ρ,δ}(z).
    Ml3 {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        z: Vec<f64>,
    },
    /// Generalized Wright function with `a,α` upper and `b,β` lower pairs.
    Wright {
        #[arg(long, required = true)]
        upper: Vec<String>,
        #[arg(long)]
        lower: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        z: Vec<f64>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum SimulateCmd {
    /// Subordinator paths on a grid.
    Paths {
        #[arg(long, alias = "spec")]
        f: String,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// First-passage times Y(t).
    Inverse {
        #[arg(long, alias = "spec")]
        f: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        refine_eps: f64,
    },
    /// Composed counts N(H(Y(t))).
    Counts {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        refine_eps: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    /// Generator exponential without an inverse clock, resolvent otherwise.
    Auto,
    Generator,
    Resolvent,
    Montecarlo,
    Stable,
}

#[derive(Debug, Args, Serialize)]
pub struct PmfArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Draws for the Monte Carlo method.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Inversion order (even, 8..=20).
    #[arg(long, default_value_t = DEFAULT_INVERSION_ORDER)]
    pub order: usize,
    /// Keep `nmax` fixed instead of growing it until the mass is captured.
    #[arg(long)]
    pub fixed_nmax: bool,
    /// Print every computed row, including guard rows.
    #[arg(long)]
    pub all_rows: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformArg {
    /// Mittag-Leffler closed form for stable clocks, inversion otherwise.
    Auto,
    Inversion,
    Montecarlo,
}

#[derive(Debug, Args, Serialize)]
pub struct PgfArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub u: Vec<f64>,
    #[arg(long, value_enum, default_value_t = TransformArg::Auto)]
    pub method: TransformArg,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long, alias = "spec")]
    pub f: String,
    #[arg(long)]
    pub t: f64,
    /// Evaluation points; defaults to `--points` equispaced values in (0, x-max].
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_INVERSION_ORDER)]
    pub order: usize,
    #[arg(long)]
    pub allow_custom: bool,
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_min: f64,
    /// Residual tolerance, at most 1e-2.
    #[arg(long, default_value_t = 5e-3)]
    pub tolerance: f64,
}

impl GridArgs {
    fn resolve(&self) -> Result<(UniformGrid, ResidualOptions), CliError> {
        check_tolerance(self.tolerance)?;
        let grid = UniformGrid::covering(self.h, self.t_end)?;
        Ok((
            grid,
            ResidualOptions {
                t_min: self.t_min,
                tolerance: self.tolerance,
            },
        ))
    }
}

#[derive(Debug, Subcommand, Serialize)]
pub enum VerifyCmd {
    /// Residual of the eigenvalue equation for the inverse-subordinator transform.
    Eigen {
        #[arg(long, alias = "spec")]
        f: String,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Residual of the governing equation for p_n.
    Governing {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Mass deficit of a pmf table.
    Normalization {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

fn check_tolerance(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 && tol <= MAX_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::Usage(format!("tolerance must lie in (0, {MAX_TOLERANCE}], got {tol}")))
    }
}

struct Ctx {
    seed: u64,
    threads: usize,
    out: Option<PathBuf>,
    config: Value,
}

impl Ctx {
    fn meta(&self, extra: Value) -> Value {
        json!({"config": self.config, "seed": self.seed, "threads": self.threads, "result": extra})
    }

    fn table(&self, table: &Table, extra: Value) -> Result<i32, CliError> {
        emit_table(table, self.out.as_deref(), &self.meta(extra))?;
        Ok(EXIT_OK)
    }
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let ctx = Ctx {
        seed: cli.seed,
        threads: cli.threads.unwrap_or_else(default_threads),
        out: cli.out.clone(),
        config: serde_json::to_value(&cli)?,
    };
    if ctx.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    match cli.command {
        Command::Bernstein(cmd) => bernstein(&ctx, cmd),
        Command::Specfun(cmd) => specfun_cmd(&ctx, cmd),
        Command::Simulate(cmd) => simulate(&ctx, cmd),
        Command::Pmf(args) => pmf(&ctx, args),
        Command::Pgf(args) => pgf_cmd(&ctx, args),
        Command::Density(args) => density(&ctx, args),
        Command::Verify(cmd) => verify(&ctx, cmd),
        Command::Repro { id } => repro_cmd(&ctx, &id),
    }
}

fn bernstein(ctx: &Ctx, cmd: BernsteinCmd) -> Result<i32, CliError> {
    let (spec_text, points, header) = match &cmd {
        BernsteinCmd::Eval { f, x } => (f, x, ["x", "value"]),
        BernsteinCmd::Deriv { f, x, .. } => (f, x, ["x", "derivative"]),
        BernsteinCmd::Tail { f, s } => (f, s, ["s", "tail"]),
    };
    let spec = parse_bernstein(spec_text)?;
    let mut table = Table::new(&header);
    for &x in points {
        let v = match &cmd {
            BernsteinCmd::Eval { .. } => spec.eval(x)?,
            BernsteinCmd::Deriv { order, .. } => spec.derivative(*order, x)?,
            BernsteinCmd::Tail { .. } => spec.levy_tail(x)?,
        };
        table.push(vec![fmt_float(x), fmt_float(v)]);
    }
    ctx.table(&table, json!({"spec": bernstein_to_json(&spec)}))
}

fn pair(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("expected a pair 'a,α', got '{text}'"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn specfun_cmd(ctx: &Ctx, cmd: SpecfunCmd) -> Result<i32, CliError> {
    let mut table = Table::new(&["z", "value", "error"]);
    match &cmd {
        SpecfunCmd::Ml { alpha, beta, z } => {
            for &z in z {
                let (v, err) = if *beta == 1.0 {
                    (specfun::mittag_leffler(*alpha, z)?, specfun::mittag_leffler_estimate(*alpha, z)?.error)
                } else {
                    let est = specfun::ml_three_param_estimate(*alpha, *beta, 1.0, z)?;
                    (specfun::mittag_leffler2(*alpha, *beta, z)?, est.error)
                };
                table.push(vec![fmt_float(z), fmt_float(v), fmt_float(err)]);
            }
        }
        SpecfunCmd::Ml3 { rho, delta, gamma, z } => {
            for &z in z {
                let v = specfun::ml_three_param(*rho, *delta, *gamma, z)?;
                let err = specfun::ml_three_param_estimate(*rho, *delta, *gamma, z)?.error;
                table.push(vec![fmt_float(z), fmt_float(v), fmt_float(err)]);
            }
        }
        SpecfunCmd::Wright { upper, lower, z } => {
            let upper = upper.iter().map(|s| pair(s)).collect::<Result<Vec<_>, _>>()?;
            let lower = lower.iter().map(|s| pair(s)).collect::<Result<Vec<_>, _>>()?;
            let params = WrightParams::new(upper, lower)?;
            for &z in z {
                let v = specfun::wright_psi(&params, z)?;
                let err = specfun::wright_psi_estimate(&params, z)?.error;
                table.push(vec![fmt_float(z), fmt_float(v), fmt_float(err)]);
            }
        }
    }
    ctx.table(&table, Value::Null)
}

fn simulate(ctx: &Ctx, cmd: SimulateCmd) -> Result<i32, CliError> {
    match cmd {
        SimulateCmd::Paths { f, horizon, step, n } => {
            let spec = parse_bernstein(&f)?;
            let batch = run_parallel(StreamPlan::new(ctx.seed, n), ctx.threads, |rng| {
                sample_subordinator_path(&spec, horizon, step, rng)
            })?;
            let mut table = Table::new(&["stream_id", "draw_index", "time", "value"]);
            for (s, paths) in batch.streams.iter().enumerate() {
                for (i, p) in paths.iter().enumerate() {
                    for (t, v) in p.times.iter().zip(&p.values) {
                        table.push(vec![s.to_string(), i.to_string(), fmt_float(*t), fmt_float(*v)]);
                    }
                }
            }
            ctx.table(&table, json!({"spec": bernstein_to_json(&spec)}))
        }
        SimulateCmd::Inverse { f, t, n, refine_eps } => {
            let spec = parse_bernstein(&f)?;
            let sim = SimOptions {
                refine_eps,
                ..SimOptions::default()
            };
            let batch = run_parallel(StreamPlan::new(ctx.seed, n), ctx.threads, |rng| sample_inverse_passage(&spec, t, rng, &sim))?;
            let summary = batch.summary();
            if ctx.out.is_none() {
                eprintln!("mean {:.16e} stderr {:.16e}", summary.mean, summary.stderr);
            }
            ctx.table(&batch.table(), json!({"spec": bernstein_to_json(&spec), "summary": summary}))
        }
        SimulateCmd::Counts { process, t, n, refine_eps } => {
            let spec = process.resolve()?;
            let sim = SimOptions {
                refine_eps,
                ..SimOptions::default()
            };
            let batch = run_parallel(StreamPlan::new(ctx.seed, n), ctx.threads, |rng| sample_time_changed_count(&spec, t, rng, &sim))?;
            let values: Vec<f64> = batch.flatten().into_iter().map(|c| c as f64).collect();
            let summary = gfc_core::pathsim::Summary::of(&values);
            ctx.table(
                &batch.table_with(|c| c.to_string()),
                json!({"process": process_to_json(&spec), "mean": summary.mean, "stderr": summary.stderr}),
            )
        }
    }
}

fn compute_pmf(ctx: &Ctx, spec: &ProcessSpec, t: f64, nmax: usize, method: MethodArg, samples: usize, opts: &PmfOptions) -> Result<PmfTable, CliError> {
    Ok(match method {
        MethodArg::Auto if spec.inverse.is_none() => pmf_no_inverse(spec, t, nmax, opts)?,
        MethodArg::Generator => pmf_no_inverse(spec, t, nmax, opts)?,
        MethodArg::Auto | MethodArg::Resolvent => pmf_time_changed(spec, t, nmax, PmfMethod::Resolvent, opts)?,
        MethodArg::Stable => pmf_time_changed(spec, t, nmax, PmfMethod::StableClosedForm, opts)?,
        MethodArg::Montecarlo => {
            if samples < 2 {
                return Err(CliError::Usage("Monte Carlo needs at least 2 samples".into()));
            }
            let batch = run_parallel(StreamPlan::new(ctx.seed, samples), ctx.threads, |rng| {
                sample_time_changed_count(spec, t, rng, &opts.sim)
            })?;
            let (probs, se) = empirical_pmf(&batch.flatten(), nmax);
            let mass: f64 = probs.iter().sum();
            PmfTable {
                t,
                probs,
                stderr: Some(se),
                mass_deficit: 1.0 - mass,
                method: PmfMethod::MonteCarlo { n: samples, seed: ctx.seed },
                requested: nmax,
                capped: false,
            }
        }
    })
}

fn pmf(ctx: &Ctx, args: PmfArgs) -> Result<i32, CliError> {
    let spec = args.process.resolve()?;
    if args.nmax > NMAX_CAP {
        return Err(CliError::Usage(format!("--nmax is capped at {NMAX_CAP}")));
    }
    let opts = PmfOptions {
        order: args.order,
        adaptive: !args.fixed_nmax,
        ..PmfOptions::default()
    };
    let table = compute_pmf(ctx, &spec, args.t, args.nmax, args.method, args.samples, &opts)?;
    if table.capped {
        eprintln!("warning: nmax reached the cap with mass deficit {:.3e}", table.mass_deficit);
    }
    let mut meta = pmf_metadata(&table);
    meta["process"] = process_to_json(&spec);
    ctx.table(&pmf_table(&table, args.all_rows), meta)
}

fn pgf_cmd(ctx: &Ctx, args: PgfArgs) -> Result<i32, CliError> {
    let spec = args.process.resolve()?;
    let method = match args.method {
        TransformArg::Auto => match spec.inverse.as_ref().and_then(|f| f.stable_index()) {
            Some(_) => TildeEllMethod::ClosedFormStable,
            None => TildeEllMethod::default(),
        },
        TransformArg::Inversion => TildeEllMethod::default(),
        TransformArg::Montecarlo => TildeEllMethod::MonteCarlo {
            n: args.samples,
            seed: ctx.seed,
        },
    };
    let mut table = Table::new(&["u", "pgf"]);
    for &u in &args.u {
        table.push(vec![fmt_float(u), fmt_float(pgf(&spec, u, args.t, method)?)]);
    }
    ctx.table(&table, json!({"process": process_to_json(&spec), "method": format!("{method:?}")}))
}

fn density(ctx: &Ctx, args: DensityArgs) -> Result<i32, CliError> {
    let spec = parse_bernstein(&args.f)?;
    let xs = if args.x.is_empty() {
        if args.points == 0 || args.x_max.is_nan() || args.x_max <= 0.0 {
            return Err(CliError::Usage("--points and --x-max must be positive".into()));
        }
        (1..=args.points).map(|i| args.x_max * i as f64 / args.points as f64).collect()
    } else {
        args.x.clone()
    };
    let opts = DensityOptions {
        order: args.order,
        allow_custom: args.allow_custom,
        raw: args.raw,
    };
    let values = density_grid(&spec, args.t, &xs, &opts)?;
    let mut table = Table::new(&["x", "density"]);
    for (x, v) in xs.iter().zip(values) {
        table.push(vec![fmt_float(*x), fmt_float(v)]);
    }
    ctx.table(&table, json!({"spec": bernstein_to_json(&spec)}))
}

fn report(ctx: &Ctx, pass: bool, body: Value) -> Result<i32, CliError> {
    emit_json(&ctx.meta(body), ctx.out.as_deref())?;
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn verify(ctx: &Ctx, cmd: VerifyCmd) -> Result<i32, CliError> {
    match cmd {
        VerifyCmd::Eigen { f, lambda, grid } => {
            let spec = parse_bernstein(&f)?;
            let (g, opts) = grid.resolve()?;
            let r = eigen_residual(&spec, lambda, g, &opts)?;
            report(ctx, r.pass, serde_json::to_value(ResidualReportJson::from(&r))?)
        }
        VerifyCmd::Governing { process, n, grid } => {
            let spec = process.resolve()?;
            let (g, opts) = grid.resolve()?;
            let r = gfc_core::counting::governing_residual(&spec, g, n, &opts)?;
            report(ctx, r.pass, serde_json::to_value(ResidualReportJson::from(&r))?)
        }
        VerifyCmd::Normalization {
            process,
            t,
            nmax,
            method,
            tolerance,
        } => {
            check_tolerance(tolerance)?;
            if method == MethodArg::Montecarlo {
                return Err(CliError::Usage("normalization is checked for deterministic methods only".into()));
            }
            let spec = process.resolve()?;
            let table = compute_pmf(ctx, &spec, t, nmax, method, 0, &PmfOptions::default())?;
            let pass = table.mass_deficit.abs() <= tolerance;
            let mut body = pmf_metadata(&table);
            body["tolerance"] = json!(tolerance);
            body["pass"] = json!(pass);
            report(ctx, pass, body)
        }
    }
}

fn repro_cmd(ctx: &Ctx, id: &str) -> Result<i32, CliError> {
    let opts = ReproOptions {
        seed: ctx.seed,
        threads: ctx.threads,
    };
    let outcomes = if id == "all" {
        repro::run_all(&opts)
    } else {
        vec![repro::run(id, &opts).ok_or_else(|| CliError::Usage(format!("unknown criterion '{id}'")))?]
    };
    for o in &outcomes {
        println!("{o}");
    }
    let pass = outcomes.iter().all(|o| o.pass);
    if let Some(path) = &ctx.out {
        crate::output::write_json(path, &ctx.meta(serde_json::to_value(&outcomes)?))?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
