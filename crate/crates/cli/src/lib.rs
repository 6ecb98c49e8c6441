//! `ski-tail` command line: solve, verify, sweep and export.

pub mod solution;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ski_tail::lp::LpBackend;
use ski_tail::ratio::CrEvaluator;
use ski_tail::verify::{compare_results, ExpSegment};
use ski_tail::{
    bad_interval, binary_search, build_lp, mass_in, solve_lp, structure_report, verify_cr,
    verify_feasibility, ConfigError, DenseSimplex, ProblemConfig, SolveError, SolveResult,
    StopTime, World,
};
use ski_tail_highs::HighsBackend;

use crate::solution::{solver_label, Dec, SolutionFile};

/// Overrides the default `x_max` of every solve.
pub const X_MAX_ENV: &str = "SKI_TAIL_X_MAX";

#[derive(Debug, Parser)]
#[command(
    name = "ski-tail",
    version,
    about = "Two-slope ski rental under a tail-risk constraint"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and write the solution file(s).
    Solve(SolveArgs),
    /// Check a solution file; exits 1 if it fails.
    Verify(VerifyArgs),
    /// Solve across a range of delta or gamma values.
    Sweep(SweepArgs),
    /// Write plot data (t, f, cr, badmass) for a solution file.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Binsearch,
    Lp,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Highs,
    Simplex,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = SolverChoice::Binsearch)]
    pub solver: SolverChoice,
    /// LP engine.
    #[arg(long, value_enum, default_value_t = BackendChoice::Highs)]
    pub backend: BackendChoice,
    /// With `--solver both`, PATH.binsearch.json and PATH.lp.json are written.
    #[arg(long, default_value = "solution.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub solution: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Delta,
    Gamma,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub a: f64,
    /// Fixed gamma (required when sweeping delta).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fixed delta (required when sweeping gamma).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = SweepParam::Delta)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = SolverChoice::Binsearch)]
    pub solver: SolverChoice,
    #[arg(long, value_enum, default_value_t = BackendChoice::Highs)]
    pub backend: BackendChoice,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub solution: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Verification(anyhow::Error),
    Config(anyhow::Error),
    Solver(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Verification(e) | Failure::Config(e) | Failure::Solver(e) => e,
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Config(c) => Failure::Config(c.into()),
            other => Failure::Solver(other.into()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

fn io_fail(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Solver(e.into())
}

pub fn main_with(cli: Cli, out: &mut dyn Write) -> ExitCode {
    match run(cli, out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(args) => cmd_solve(&args, out),
        Command::Verify(args) => cmd_verify(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Export(args) => cmd_export(&args, out),
    }
}

/// Builds and validates a config, applying the `x_max` override.
pub fn make_config(p: &ProblemArgs) -> Result<ProblemConfig, Failure> {
    let cfg = ProblemConfig::new(p.a, p.gamma, p.delta, p.tau, p.epsilon)?;
    let cfg = match std::env::var(X_MAX_ENV) {
        Ok(v) => {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|e| Failure::Config(anyhow!("{X_MAX_ENV}={v:?}: {e}")))?;
            cfg.with_x_max(x)?
        }
        Err(_) => cfg,
    };
    cfg.check_alignment()?;
    Ok(cfg)
}

fn backend(choice: BackendChoice) -> Box<dyn LpBackend<f64> + Send + Sync> {
    match choice {
        BackendChoice::Highs => Box::new(HighsBackend::new()),
        BackendChoice::Simplex => Box::new(DenseSimplex::default()),
    }
}

fn run_lp(cfg: &ProblemConfig, choice: BackendChoice) -> Result<SolveResult, Failure> {
    let inst = build_lp(cfg)?;
    Ok(solve_lp(&inst, backend(choice).as_ref())?)
}

/// Solves with the chosen solver(s); `both` runs the two concurrently.
pub fn solve(
    cfg: &ProblemConfig,
    solver: SolverChoice,
    choice: BackendChoice,
) -> Result<Vec<SolveResult>, Failure> {
    match solver {
        SolverChoice::Binsearch => Ok(vec![binary_search(cfg)?]),
        SolverChoice::Lp => Ok(vec![run_lp(cfg, choice)?]),
        SolverChoice::Both => thread::scope(|s| {
            let lp = s.spawn(|| run_lp(cfg, choice));
            let bs = binary_search(cfg);
            let lp = lp
                .join()
                .map_err(|_| Failure::Solver(anyhow!("LP thread panicked")))?;
            Ok(vec![bs?, lp?])
        }),
    }
}

fn with_suffix(path: &Path, label: &str) -> PathBuf {
    let stem = path.with_extension("");
    let mut name = stem.into_os_string();
    name.push(format!(".{label}.json"));
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(io_fail)
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = make_config(&args.problem)?;
    let results = solve(&cfg, args.solver, args.backend)?;
    for r in &results {
        let path = if results.len() > 1 {
            with_suffix(&args.out, solver_label(r.solver))
        } else {
            args.out.clone()
        };
        let text = SolutionFile::from_result(&cfg, r)
            .to_json()
            .map_err(io_fail)?;
        write_file(&path, &text)?;
        writeln!(
            out,
            "solver={} opt={} world={} iterations={} suffix_mass={} file={}",
            solver_label(r.solver),
            Dec(r.opt_estimate),
            r.world.number(),
            r.iterations,
            Dec(r.report.suffix_mass),
            path.display()
        )
        .map_err(io_fail)?;
    }
    if let [bs, lp] = results.as_slice() {
        let gap = compare_results(&cfg, bs, lp);
        let within = gap.objective_gap.abs() <= cfg.epsilon + 1e-6;
        writeln!(
            out,
            "gap objective={} prefix_sup_norm={} beyond_one_sup_norm={} within_epsilon={}",
            Dec(gap.objective_gap),
            Dec(gap.prefix_sup_norm),
            Dec(gap.beyond_one_sup_norm),
            within
        )
        .map_err(io_fail)?;
        if let Some((lo, hi)) = gap.disagreement {
            writeln!(out, "gap disagreement={lo}..{hi}").map_err(io_fail)?;
        }
    }
    Ok(())
}

/// JSON verdict of `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub normalized: bool,
    pub total: f64,
    pub max_cr: f64,
    pub cr_excess: f64,
    pub max_mass_violation: f64,
    pub worst_mass_at: Option<f64>,
    pub world: u8,
    pub p: Option<f64>,
    pub suffix_mass: f64,
    pub segments: Vec<ExpSegment<f64>>,
}

fn load(path: &Path) -> Result<SolutionFile, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)?;
    SolutionFile::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Config)
}

pub fn verify_file(file: &SolutionFile) -> Result<VerifyReport, Failure> {
    let cfg = file.config()?;
    if file.masses.len() != file.grid.count || file.grid.tau.0 != cfg.tau {
        return Err(Failure::Config(anyhow!(
            "grid does not match the masses or config"
        )));
    }
    let f = file
        .distribution()
        .map_err(|e| Failure::Verification(e.into()))?;
    let normalized = f.check_normalized().is_ok();
    let feas = verify_feasibility(&f, &cfg);
    let cr = verify_cr(&f, &cfg, file.opt.0);
    let report = structure_report(&f, &cfg, file.opt.0);
    Ok(VerifyReport {
        pass: normalized && feas.pass && cr.pass,
        normalized,
        total: f.total(),
        max_cr: report.max_cr,
        cr_excess: cr.worst,
        max_mass_violation: feas.worst,
        worst_mass_at: feas.at.finite(),
        world: report.world.number(),
        p: report.p,
        suffix_mass: report.suffix_mass,
        segments: report.segments,
    })
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let file = load(&args.solution)?;
    let report = verify_file(&file)?;
    let text = serde_json::to_string_pretty(&report).map_err(io_fail)?;
    writeln!(out, "{text}").map_err(io_fail)?;
    if report.pass {
        Ok(())
    } else {
        let mut why = Vec::new();
        if !report.normalized {
            why.push(format!("total mass {} is not 1", report.total));
        }
        if report.max_mass_violation > ski_tail::tol::FEASIBILITY {
            why.push(format!(
                "mass constraint exceeded by {}",
                report.max_mass_violation
            ));
        }
        if report.cr_excess > ski_tail::tol::CR_BOUND {
            why.push(format!("ratio exceeds opt by {}", report.cr_excess));
        }
        Err(Failure::Verification(anyhow!("{}", why.join("; "))))
    }
}

/// One line of sweep output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub opt: f64,
    pub world: World,
    pub suffix_mass: f64,
}

/// Evenly spaced values from `from` to `to`, both ends included.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Runs the sweep. Gamma values whose boundaries miss the grid are skipped
/// and listed in the second return value.
pub fn sweep(args: &SweepArgs) -> Result<(Vec<SweepRow>, Vec<String>), Failure> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let solver = match args.solver {
        SolverChoice::Both => {
            return Err(Failure::Config(anyhow!("sweep takes one solver")));
        }
        s => s,
    };
    for v in sweep_values(args.from, args.to, args.steps) {
        let (gamma, delta) = match args.param {
            SweepParam::Delta => (
                args.gamma
                    .ok_or_else(|| Failure::Config(anyhow!("--gamma is required")))?,
                v,
            ),
            SweepParam::Gamma => (
                v,
                args.delta
                    .ok_or_else(|| Failure::Config(anyhow!("--delta is required")))?,
            ),
        };
        let p = ProblemArgs {
            a: args.a,
            gamma,
            delta,
            tau: args.tau,
            epsilon: args.epsilon,
        };
        let cfg = match make_config(&p) {
            Ok(c) => c,
            Err(Failure::Config(e)) if args.param == SweepParam::Gamma => {
                skipped.push(format!("gamma={v}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let r = solve(&cfg, solver, args.backend)?.remove(0);
        rows.push(SweepRow {
            param: v,
            opt: r.opt_estimate,
            world: r.world,
            suffix_mass: r.report.suffix_mass,
        });
    }
    Ok((rows, skipped))
}

fn csv_writer<'a>(
    path: Option<&Path>,
    out: &'a mut dyn Write,
) -> Result<csv::Writer<Box<dyn Write + 'a>>, Failure> {
    let sink: Box<dyn Write + 'a> = match path {
        Some(p) => Box::new(
            fs::File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(io_fail)?,
        ),
        None => Box::new(out),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (rows, skipped) = sweep(args)?;
    for s in &skipped {
        eprintln!("skipped {s}");
    }
    let mut w = csv_writer(args.out.as_deref(), out)?;
    w.write_record(["param", "opt", "world", "suffix_mass"])
        .map_err(io_fail)?;
    for r in &rows {
        w.write_record([
            Dec(r.param).to_string(),
            Dec(r.opt).to_string(),
            r.world.number().to_string(),
            Dec(r.suffix_mass).to_string(),
        ])
        .map_err(io_fail)?;
    }
    w.flush().map_err(io_fail)
}

/// One line of plot data; `t = None` is the row at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportRow {
    pub t: Option<f64>,
    pub f: f64,
    pub cr: f64,
    pub badmass: f64,
}

/// Plot rows over the grid, extended past `L5` so every bad-interval shape
/// shows up, then infinity.
pub fn export_rows(file: &SolutionFile) -> Result<Vec<ExportRow>, Failure> {
    let cfg = file.config()?;
    let f = file
        .distribution()
        .map_err(|e| Failure::Verification(e.into()))?;
    let l5 = cfg.boundaries().l5;
    let end = f.len().max((l5 / cfg.tau).ceil() as usize + 1);
    let f = f.resized(end);
    let ev = CrEvaluator::unchecked(&f, cfg.a);
    let bad = |x: StopTime<f64>| -> Result<f64, Failure> {
        let iv = bad_interval(x, cfg.a, cfg.gamma).map_err(|e| Failure::Config(e.into()))?;
        Ok(mass_in(&f, &iv))
    };
    let mut rows = Vec::with_capacity(end + 1);
    for k in 1..=end {
        let t = k as f64 * cfg.tau;
        rows.push(ExportRow {
            t: Some(t),
            f: f.masses[k - 1],
            cr: ev.at_index(k),
            badmass: bad(StopTime::Finite(t))?,
        });
    }
    rows.push(ExportRow {
        t: None,
        f: f.mass_inf,
        cr: ev.at_infinity(),
        badmass: bad(StopTime::Infinity)?,
    });
    Ok(rows)
}

pub fn cmd_export(args: &ExportArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let file = load(&args.solution)?;
    let rows = export_rows(&file)?;
    let mut w = csv_writer(args.out.as_deref(), out)?;
    w.write_record(["t", "f", "cr", "badmass"])
        .map_err(io_fail)?;
    for r in &rows {
        let t =
            r.t.map_or_else(|| "inf".to_string(), |t| Dec(t).to_string());
        w.write_record([
            t,
            Dec(r.f).to_string(),
            Dec(r.cr).to_string(),
            Dec(r.badmass).to_string(),
        ])
        .map_err(io_fail)?;
    }
    w.flush().map_err(io_fail)
}
