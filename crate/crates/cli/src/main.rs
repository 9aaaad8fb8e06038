//! `hho-plate`: batch driver for plate-bending convergence studies.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, Subcommand};
use hho_plate::{run_study, Parallelism, StudyConfig};

#[derive(Parser, Debug)]
#[command(name = "hho-plate", version, about = "HHO discretization of clamped Kirchhoff-Love plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a convergence study and write one CSV row per solve.
    Run(RunArgs),
}

#[derive(clap::Args, Debug)]
#[command(group(ArgGroup::new("eta_choice").args(["eta", "eta_sweep"])))]
struct RunArgs {
    /// key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Polynomial degree (k >= 1).
    #[arg(long)]
    k: Option<usize>,
    /// Mesh family: triangular, cartesian or hexagonal.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    /// Stabilization parameter.
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Comma-separated list of stabilization parameters.
    #[arg(long, allow_negative_numbers = true)]
    eta_sweep: Option<String>,
    /// Polygonal mesh file, refined once per additional level.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// CSV output path (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    flux_report: bool,
    /// Matrix Market file for the condensed matrix of the finest level.
    #[arg(long)]
    export_matrix: Option<PathBuf>,
    /// Backward-error tolerance of the linear solve.
    #[arg(long)]
    tol: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::from_file(path)?,
            None => StudyConfig::default(),
        };
        let mut set = |key: &str, value: String| cfg.set(key, &value);
        if let Some(k) = self.k {
            set("k", k.to_string())?;
        }
        if let Some(f) = &self.family {
            set("family", f.clone())?;
        }
        if let Some(l) = self.levels {
            set("levels", l.to_string())?;
        }
        if let Some(e) = self.eta {
            set("eta", e.to_string())?;
        }
        if let Some(s) = &self.eta_sweep {
            set("eta_sweep", s.clone())?;
        }
        if let Some(m) = &self.mesh {
            set("mesh", m.display().to_string())?;
        }
        if let Some(o) = &self.out {
            set("out", o.display().to_string())?;
        }
        if let Some(p) = &self.export_matrix {
            set("export_matrix", p.display().to_string())?;
        }
        if let Some(t) = self.tol {
            set("tol", format!("{t:e}"))?;
        }
        if self.flux_report {
            cfg.flux_report = true;
        }
        if std::env::var_os("HHO_THREADS").is_some() {
            cfg.parallelism = Parallelism::from_env();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &RunArgs) -> Result<bool> {
    let cfg = args.config()?;
    let report = match &cfg.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            run_study(&cfg, Some(BufWriter::new(file)))?
        }
        None => run_study(&cfg, Some(std::io::stdout().lock()))?,
    };
    eprint!("{}", report.summary());
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
