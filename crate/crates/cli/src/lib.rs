//! `pinnbench` command-line front end.

pub mod config;
pub mod io;
pub mod plot;
pub mod sweep;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pinnbench_core::fdm::{self, presets, Axis, FdError, FieldGrid, Grid, Snapshots};
use pinnbench_core::problems::{Params, PdeProblem, ProblemId};
use pinnbench_core::trainer::{self, References, Rmse, StdClock, TrainReport};

use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: m.into() }
    }
    pub fn refusal(m: impl Into<String>) -> Self {
        CliError { code: EXIT_REFUSED, message: m.into() }
    }
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<FdError> for CliError {
    fn from(e: FdError) -> Self {
        match e {
            FdError::Unstable { .. } => CliError::refusal(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<trainer::TrainError> for CliError {
    fn from(e: trainer::TrainError) -> Self {
        match e {
            trainer::TrainError::Fd(fd) => fd.into(),
            trainer::TrainError::Config(_) | trainer::TrainError::Sampling(_) | trainer::TrainError::Network(_) => {
                CliError::usage(e.to_string())
            }
            _ => CliError { code: 1, message: e.to_string() },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pinnbench", version, about = "Oracle, finite-difference and PINN solvers for a catalogue of PDEs")]
struct Cli {
    /// Output root (default: $PINNBENCH_OUT, else ./pinnbench-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List problem ids.
    List,
    /// Run a finite-difference reference solver.
    SolveFd(SolveArgs),
    /// Train PINNs for one architecture and every configured seed.
    Train(RunArgs),
    /// Train the full layers × neurons × seeds cross product.
    Sweep(SweepArgs),
    /// RMSE between two saved FieldGrid (.fgrd) files.
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    /// Spatial step (all axes).
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Keep every n-th time level.
    #[arg(long)]
    every: Option<usize>,
    /// Noise seed for the Turing-2 start.
    #[arg(long)]
    seed: Option<u64>,
    /// Thin the written grid by this stride in space and time.
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Skip the PNG.
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "problem")]
    config: Option<PathBuf>,
    /// Use the built-in preset for this problem instead of a config file.
    #[arg(long)]
    problem: Option<String>,
    /// Replace the config's seed list with one seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Desk-scale divisor.
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Print the resolved config and exit.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Cells trained concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("PINNBENCH_OUT").map(PathBuf::from)).unwrap_or_else(|| "pinnbench-out".into())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let root = out_root(cli.out);
    match cli.cmd {
        Cmd::List => {
            for id in ProblemId::ALL {
                println!("{:<12} {}", id.name(), id.description());
            }
            Ok(EXIT_OK)
        }
        Cmd::SolveFd(a) => solve_fd(&a, &root, cli.force),
        Cmd::Train(a) => train(&a, &root, cli.force),
        Cmd::Sweep(a) => {
            let Some(cfg) = resolve(&a.run)? else { return Ok(EXIT_OK) };
            sweep::run_sweep(&cfg, &root, a.jobs.max(1), cli.force)
        }
        Cmd::Compare { a, b } => {
            let (ga, gb) = (io::read_grid(&a)?, io::read_grid(&b)?);
            let r = Rmse::between(&ga, &gb).map_err(|e| CliError::usage(e.to_string()))?;
            println!("rmse={}", r.all);
            for (f, v) in r.per_field.iter().enumerate() {
                println!("rmse_{}={v}", ["u", "v"][f.min(1)]);
            }
            Ok(EXIT_OK)
        }
    }
}

fn parse_problem(s: &str) -> Result<ProblemId, CliError> {
    ProblemId::parse(s).map_err(|_| {
        let ids: Vec<_> = ProblemId::ALL.iter().map(|p| p.name()).collect();
        CliError::usage(format!("unknown problem '{s}' (known: {})", ids.join(", ")))
    })
}

/// Load the config, apply flag overrides; `None` after a dry run.
fn resolve(a: &RunArgs) -> Result<Option<ExperimentConfig>, CliError> {
    let mut cfg = match (&a.config, &a.problem) {
        (Some(path), _) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        (None, Some(p)) => ExperimentConfig::preset(parse_problem(p)?),
        (None, None) => return Err(CliError::usage("give --config FILE or --problem ID")),
    };
    if let Some(s) = a.seed {
        cfg.seeds = vec![s];
    }
    if let Some(s) = a.scale {
        cfg.scale = s;
    }
    if let Some(n) = a.iterations {
        cfg.iterations = n;
    }
    cfg.validate()?;
    if a.dry_run {
        print!("{}", cfg.to_json());
        return Ok(None);
    }
    Ok(Some(cfg))
}

fn out_dir(cfg: &ExperimentConfig, root: &Path) -> PathBuf {
    match &cfg.output_dir {
        Some(d) => root.join(d),
        None => root.to_path_buf(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

fn report_text(cfg: &ExperimentConfig, cell: &config::Cell, r: &TrainReport) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| s.push_str(&format!("{k}={v}\n"));
    kv("problem", cfg.problem.clone());
    kv("layers", cell.layers.to_string());
    kv("neurons", cell.neurons.to_string());
    kv("activation", cfg.activation.clone());
    kv("seed", cell.seed.to_string());
    kv("scale", cfg.scale.to_string());
    kv("iterations_run", r.iterations_run.to_string());
    kv("final_loss", format!("{}", r.final_loss.total));
    kv("final_loss_initial", format!("{}", r.final_loss.initial));
    kv("final_loss_boundary", format!("{}", r.final_loss.boundary));
    kv("final_loss_residual", format!("{}", r.final_loss.residual));
    kv("rmse_oracle", fmt_opt(r.rmse_oracle.as_ref().map(|x| x.all)));
    kv("rmse_fd", fmt_opt(r.rmse_fd.as_ref().map(|x| x.all)));
    for (name, rm) in [("oracle", &r.rmse_oracle), ("fd", &r.rmse_fd)] {
        if let Some(rm) = rm {
            for (f, v) in rm.per_field.iter().enumerate() {
                kv(&format!("rmse_{name}_{}", ["u", "v"][f.min(1)]), format!("{v}"));
            }
        }
    }
    kv("diverged", r.diverged().to_string());
    kv("diverged_at", r.diverged_at.map_or("NA".into(), |d| d.to_string()));
    kv("wall_seconds", format!("{:.3}", r.seconds));
    s
}

fn loss_csv(r: &TrainReport) -> String {
    let mut s = String::from("iteration,initial,boundary,residual,total\n");
    for h in &r.history {
        let t = h.terms;
        s.push_str(&format!("{},{},{},{},{}\n", h.iteration, t.initial, t.boundary, t.residual, t.total));
    }
    s
}

/// Write every artefact of one trained cell under `dir` with suffix `tag`.
pub(crate) fn write_run(
    dir: &Path,
    tag: &str,
    cfg: &ExperimentConfig,
    cell: &config::Cell,
    r: &TrainReport,
    refs: &References,
    plots: bool,
) -> Result<(), CliError> {
    io::write_file(&dir.join(format!("report_{tag}.txt")), report_text(cfg, cell, r).as_bytes())?;
    io::write_file(&dir.join(format!("loss_{tag}.csv")), loss_csv(r).as_bytes())?;
    io::write_file(&dir.join(format!("params_{tag}.bin")), &r.params.to_bytes())?;
    if let Some(pred) = &r.prediction {
        io::write_file(&dir.join(format!("eval_{tag}.csv")), io::grid_to_csv(pred).as_bytes())?;
        io::write_file(&dir.join(format!("eval_{tag}.fgrd")), &io::grid_to_bytes(pred))?;
    }
    if plots {
        let iters: Vec<f64> = r.history.iter().map(|h| h.iteration as f64).collect();
        let terms: Vec<Vec<f64>> = vec![
            r.history.iter().map(|h| h.terms.total).collect(),
            r.history.iter().map(|h| h.terms.initial).collect(),
            r.history.iter().map(|h| h.terms.boundary).collect(),
            r.history.iter().map(|h| h.terms.residual).collect(),
        ];
        plot::save(&plot::loss_plot(&iters, &terms), &dir.join(format!("loss_{tag}.png")))?;
        if let (Some(pred), Some(reference)) = (&r.prediction, refs.oracle.as_ref().or(refs.fd.as_ref())) {
            plot::save(&plot::comparison(pred, reference), &dir.join(format!("compare_{tag}.png")))?;
        }
    }
    Ok(())
}

fn train(a: &RunArgs, root: &Path, force: bool) -> Result<i32, CliError> {
    let Some(cfg) = resolve(a)? else { return Ok(EXIT_OK) };
    if cfg.layers.len() != 1 || cfg.neurons.len() != 1 {
        return Err(CliError::usage("train takes one layers value and one neurons value; use sweep for more"));
    }
    let dir = out_dir(&cfg, root);
    let cells = cfg.cells()?;
    let reports: Vec<PathBuf> =
        cells.iter().map(|c| dir.join(format!("report_{}_s{}.txt", cfg.problem, c.seed))).collect();
    io::check_fresh(&reports.iter().map(|p| p.as_path()).collect::<Vec<_>>(), force)?;
    let refs = trainer::references(&cells[0].train.problem, cfg.scale)?;
    let mut code = EXIT_OK;
    for cell in &cells {
        let tag = format!("{}_s{}", cfg.problem, cell.seed);
        let r = trainer::train_with(&cell.train, Some(&refs), &StdClock::default())?;
        write_run(&dir, &tag, &cfg, cell, &r, &refs, !a.no_plot)?;
        println!(
            "{tag}: loss={:.3e} rmse_oracle={} rmse_fd={} diverged={} ({:.1}s)",
            r.final_loss.total,
            fmt_opt(r.rmse_oracle.as_ref().map(|x| x.all)),
            fmt_opt(r.rmse_fd.as_ref().map(|x| x.all)),
            r.diverged(),
            r.seconds
        );
        if r.diverged() {
            code = EXIT_DIVERGED;
        }
    }
    Ok(code)
}

/// Default grid, stored-level stride and solver for each problem.
fn default_grid(p: &PdeProblem) -> Option<(Grid, usize)> {
    let t = p.domain.time.hi;
    Some(match p.id {
        ProblemId::Toy => (presets::toy(), 1),
        ProblemId::Burgers => (presets::burgers_coarse(), 10),
        ProblemId::Heat2d => (presets::heat2d(), 10),
        ProblemId::Kdv => (presets::kdv(), 1),
        ProblemId::Fisher => (presets::fisher(t), 10),
        ProblemId::Turing1 => (presets::turing1(t), 10),
        ProblemId::Turing2 => (presets::turing2(t), 1000),
        ProblemId::ExpOde => return None,
    })
}

fn solve_fd(a: &SolveArgs, root: &Path, force: bool) -> Result<i32, CliError> {
    let id = parse_problem(&a.problem)?;
    let mut problem = PdeProblem::preset(id);
    if let Some(s) = a.seed {
        problem.noise_seed = s;
    }
    let Some((mut grid, every)) = default_grid(&problem) else {
        return Err(CliError::usage(format!("{} has no spatial grid; no finite-difference solver", id.name())));
    };
    if let Some(dx) = a.dx {
        if !(dx > 0.0) {
            return Err(CliError::usage("--dx must be positive"));
        }
        for ax in grid.space.iter_mut() {
            *ax = if id == ProblemId::Turing2 {
                // Cell centres on [-1, 1].
                let n = (2.0 / dx).round() as usize;
                Axis::new(-1.0 + 0.5 * dx, dx, n)
            } else {
                Axis::new(ax.origin, dx, ((ax.last() - ax.origin) / dx).round() as usize + 1)
            };
        }
    }
    let t_end = a.t_end.unwrap_or((grid.time.count - 1) as f64 * grid.time.step);
    let dt = a.dt.unwrap_or(grid.time.step);
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(CliError::usage("--dt must be positive and --t-end non-negative"));
    }
    grid.time = Axis::new(0.0, dt, (t_end / dt).round() as usize + 1);
    let snaps = Snapshots::Every(a.every.unwrap_or(every).max(1));
    let stem = root.join(format!("fd_{}", id.name()));
    let csv = stem.with_extension("csv");
    let bin = stem.with_extension("fgrd");
    let png = stem.with_extension("png");
    io::check_fresh(&[&csv, &bin], force)?;

    let sol = match problem.params {
        Params::Toy(p) => fdm::solve_toy_fd(&grid, &p, &snaps)?,
        Params::Burgers(p) => fdm::solve_burgers_fd(&grid, &p, &snaps)?,
        Params::Heat(p) => fdm::solve_heat2d_fd(&grid, &p, &snaps)?,
        Params::Kdv(p) => fdm::solve_kdv_fd(&grid, &p, &snaps)?,
        Params::Fisher(p) => fdm::solve_fisher_fd(&grid, &p, &snaps)?,
        Params::Turing1(p) => fdm::solve_turing1_fd(&grid, &p, &snaps)?,
        Params::Turing2(p) => fdm::solve_turing2_fd(&grid, &p, problem.noise_seed, &snaps)?,
        Params::ExpOde(_) => unreachable!("no grid for ODE problems"),
    };
    let sol = thin(&sol, a.scale);
    io::write_file(&csv, io::grid_to_csv(&sol).as_bytes())?;
    io::write_file(&bin, &io::grid_to_bytes(&sol))?;
    if !a.no_plot {
        plot::save(&plot::heatmap(&sol), &png)?;
    }
    println!("{}: {} nodes x {} stored times -> {}", id.name(), sol.slice_len(), sol.times.len(), csv.display());
    if let Some(step) = sol.diverged_at {
        eprintln!("solution stopped being finite at step {step}");
        return Ok(EXIT_DIVERGED);
    }
    Ok(EXIT_OK)
}

fn thin(g: &FieldGrid, scale: usize) -> FieldGrid {
    if scale <= 1 {
        return g.clone();
    }
    let bounds: Vec<_> = g.space.iter().map(|a| (a.origin, a.last())).collect();
    g.restrict(&bounds, scale, scale)
}
