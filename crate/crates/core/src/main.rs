use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use rpteng::driver::{
    analytic_reference, compare, fit_initial, run, write_compare_csv, ConfigOverrides, Reference, RunSinks,
    SnapshotTable,
};
use rpteng::integrators::{check_quadratic_condition, ButcherTableau, TableauKind};
use rpteng::network::write_params;
use rpteng::problems::{ProblemKind, ReferenceKind, ReferenceSolution};
use rpteng::{QuadratureGrid, Result};

#[derive(Parser)]
#[command(name = "rpteng", version, about = "Invariant-preserving neural time stepping for 1-D periodic PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the initial condition and write the parameter snapshot.
    FitInit(RunArgs),
    /// Fit, then run the time loop; writes the step CSV.
    Solve(RunArgs),
    /// Write the reference solution on its own grid.
    Reference(RunArgs),
    /// Score a snapshot CSV against a reference CSV.
    Compare {
        #[arg(long, default_value = "burgers")]
        problem: ProblemKind,
        /// Snapshot CSV written by `solve --snapshots`.
        #[arg(long)]
        run: PathBuf,
        /// Reference CSV written by `reference`.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report whether a tableau satisfies the quadratic-invariant condition.
    CheckTableau {
        #[arg(long, value_enum)]
        tableau: TableauChoice,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableauChoice {
    Euler,
    Rk4,
    ImplicitMidpoint,
    DormandPrince,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    tableau: Option<TableauKind>,
    #[arg(long, value_enum)]
    relaxation: Option<Switch>,
    #[arg(long, value_enum)]
    tangent_proj: Option<Switch>,
    #[arg(long, value_enum)]
    manifold_proj: Option<Switch>,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    nm: Option<usize>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rcond: Option<f64>,
    /// TOML file with the same keys as the run configuration; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a field snapshot every k steps next to `--out` (`<out>.snapshots.csv`).
    #[arg(long)]
    snapshots: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Result<ConfigOverrides> {
        let file = match &self.config {
            Some(p) => ConfigOverrides::from_file(p)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            problem: self.problem,
            dt: self.dt,
            t_end: self.t_end,
            tableau: self.tableau,
            relaxation: self.relaxation.map(Into::into),
            tangent_projection: self.tangent_proj.map(Into::into),
            manifold_projection: self.manifold_proj.map(Into::into),
            n_s: self.ns,
            n_m: self.nm,
            n_e: self.ne,
            seed: self.seed,
            rcond: self.rcond,
            snapshot_every: self.snapshots,
            ..Default::default()
        };
        Ok(file.merge(flags))
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::FitInit(args) => {
            let cfg = args.overrides()?.resolve(ProblemKind::Burgers)?;
            let spec = cfg.network()?;
            let problem = cfg.problem_spec();
            let grid = QuadratureGrid::new(problem.a, problem.b, cfg.n_s)?;
            let fit = fit_initial(&spec, &problem, &grid, cfg.seed, cfg.fit_tol, cfg.fit_max_iters, cfg.fit_rcond)?;
            eprintln!("fit error {:e} (seed {}, {} iterations)", fit.error, fit.seed, fit.iterations);
            let mut w = output(&args.out)?;
            write_params(&mut w, &spec, &fit.params)?;
            w.flush()?;
        }
        Command::Solve(args) => {
            let cfg = args.overrides()?.resolve(ProblemKind::Burgers)?;
            let mut steps = output(&args.out)?;
            let mut snaps: Option<Box<dyn Write>> = match (&args.out, cfg.snapshot_every) {
                (Some(p), k) if k > 0 => {
                    let mut name = p.clone().into_os_string();
                    name.push(".snapshots.csv");
                    Some(Box::new(BufWriter::new(File::create(PathBuf::from(name))?)))
                }
                _ => None,
            };
            let sinks = RunSinks { steps: Some(&mut steps), snapshots: snaps.as_mut().map(|w| w as &mut dyn Write) };
            let out = run(&cfg, sinks)?;
            steps.flush()?;
            for (name, v0) in out.invariant_names.iter().zip(&out.initial_invariants) {
                eprintln!("{name}: initial {v0:e}, max drift {:e}", out.max_drift(name).unwrap_or(0.0));
            }
            if let Some(e) = out.final_error() {
                eprintln!("relative error at t = {}: {e:e}", out.final_time());
            }
        }
        Command::Reference(args) => {
            let cfg = args.overrides()?.resolve(ProblemKind::Burgers)?;
            let problem = cfg.problem_spec();
            let solution = match problem.reference_kind() {
                ReferenceKind::Analytic => {
                    let n = (cfg.t_end / cfg.dt).round() as usize;
                    let times: Vec<f64> = (0..=n).map(|k| k as f64 * cfg.dt).collect();
                    analytic_reference(&problem, cfg.reference_grid, &times)?
                }
                ReferenceKind::Spectral => match Reference::for_config(&cfg)? {
                    Reference::Grid { solution, .. } => solution,
                    Reference::Analytic(_) => unreachable!("spectral problems build grid references"),
                },
            };
            info!("{} reference snapshots", solution.times.len());
            solution.write_csv(output(&args.out)?)?;
        }
        Command::Compare { problem, run, reference, dt, out } => {
            let problem = rpteng::ProblemSpec::from_kind(problem);
            let table = SnapshotTable::read_csv(BufReader::new(File::open(run)?))?;
            let reference = ReferenceSolution::read_csv(BufReader::new(File::open(reference)?))?;
            let rows = compare(&problem, &table, &reference, dt)?;
            write_compare_csv(output(&out)?, &problem, &rows)?;
        }
        Command::CheckTableau { tableau } => {
            let tab = match tableau {
                TableauChoice::Euler => ButcherTableau::euler(),
                TableauChoice::Rk4 => ButcherTableau::rk4(),
                TableauChoice::ImplicitMidpoint => ButcherTableau::implicit_midpoint(),
                TableauChoice::DormandPrince => ButcherTableau::dormand_prince(),
            };
            let (ok, violation) = check_quadratic_condition(&tab);
            println!("{}: preserves quadratic invariants = {ok}, max violation = {violation:e}", tab.name);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
