use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{ConvergeConfig, RunConfig, Settings};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DFSPHERE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dfsphere", version, about = "Stiff PDEs on the unit sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a problem and write snapshots plus a manifest.
    Run(RunArgs),
    /// Error-versus-step-size table as CSV.
    Converge(ConvergeArgs),
    /// Render a snapshot file as a PPM image.
    Render(RenderArgs),
    /// Spectrum of the discrete Laplacian as JSON.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// allen-cahn, nls, ginzburg-landau, heat or custom.
    #[arg(long)]
    pub problem: Option<String>,
    /// Harmonic degree for the heat problem.
    #[arg(long)]
    pub l: Option<String>,
    /// Diffusion coefficient, e.g. `0.01` or `1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Pointwise expression in u, e.g. `u - u^3`.
    #[arg(long, allow_hyphen_values = true)]
    pub nonlinearity: Option<String>,
    /// `harmonic(l, order)`, `constant(c)` or a built-in problem name.
    #[arg(long)]
    pub initial: Option<String>,
    /// If set, the exact solution is exp(rate·t)·u0.
    #[arg(long, allow_hyphen_values = true)]
    pub exact_rate: Option<String>,
    /// Latitude grid size (defaults to n).
    #[arg(long)]
    pub m: Option<String>,
    /// Longitude grid size.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, num_args = 2, value_names = ["T0", "T1"], allow_negative_numbers = true)]
    pub tspan: Option<Vec<String>>,
    #[arg(long)]
    pub cf_poles: Option<String>,
    #[arg(long)]
    pub contour_points: Option<String>,
}

fn put(s: &mut Settings, key: &str, v: &Option<String>) -> Result<()> {
    if let Some(v) = v {
        s.set(key, v.clone())?;
    }
    Ok(())
}

fn put_list(s: &mut Settings, key: &str, v: &Option<Vec<String>>) -> Result<()> {
    if let Some(v) = v {
        s.set(key, v.join(" "))?;
    }
    Ok(())
}

impl ProblemArgs {
    pub fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::new(),
        };
        put(&mut s, "problem", &self.problem)?;
        put(&mut s, "l", &self.l)?;
        put(&mut s, "alpha", &self.alpha)?;
        put(&mut s, "nonlinearity", &self.nonlinearity)?;
        put(&mut s, "initial", &self.initial)?;
        put(&mut s, "exact_rate", &self.exact_rate)?;
        put(&mut s, "m", &self.m)?;
        put(&mut s, "n", &self.n)?;
        put_list(&mut s, "tspan", &self.tspan)?;
        put(&mut s, "cf_poles", &self.cf_poles)?;
        put(&mut s, "contour_points", &self.contour_points)?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub h: Option<String>,
    /// etdrk4-cf, etdrk4-eig, imex-bdf4 or lirk4.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Times to record (default: the final time).
    #[arg(long, num_args = 1..)]
    pub snapshots: Option<Vec<String>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Comma-separated subset of bin, ppm.
    #[arg(long)]
    pub formats: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, num_args = 1..)]
    pub schemes: Option<Vec<String>>,
    /// Step sizes; ratios such as 1/25 are accepted.
    #[arg(long, num_args = 1..)]
    pub hs: Option<Vec<String>>,
    /// auto, exact or eig-half-step.
    #[arg(long)]
    pub reference: Option<String>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub input: PathBuf,
    /// Image path (default: the input with a .ppm extension).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Bilinear upscale factor.
    #[arg(long, default_value_t = 1)]
    pub scale: usize,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Also write every eigenvalue to this CSV file.
    #[arg(long)]
    pub eigenvalues: Option<PathBuf>,
}

/// Sizes the global rayon pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        if k == 0 {
            anyhow::bail!("{THREADS_ENV} must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()?;
    }
    Ok(())
}

pub fn execute(cli: Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut s = args.problem.settings()?;
            put(&mut s, "h", &args.h)?;
            put(&mut s, "scheme", &args.scheme)?;
            put_list(&mut s, "snapshots", &args.snapshots)?;
            put(&mut s, "out", &args.out)?;
            put(&mut s, "formats", &args.formats)?;
            let config = RunConfig::from_settings(&s)?;
            let m = commands::run(&config)?;
            writeln!(
                stdout,
                "{} with {}: {} steps in {:.3}s (precompute {:.3}s), output in {}",
                m.problem.name,
                m.scheme,
                m.steps,
                m.wall_seconds,
                m.precompute_seconds,
                config.out.display()
            )?;
            if let Some(e) = m.final_error_vs_exact {
                writeln!(stdout, "relative error vs exact solution: {e:.3e}")?;
            }
        }
        Command::Converge(args) => {
            let mut s = args.problem.settings()?;
            put_list(&mut s, "schemes", &args.schemes)?;
            put_list(&mut s, "hs", &args.hs)?;
            put(&mut s, "reference", &args.reference)?;
            let table = commands::converge(&ConvergeConfig::from_settings(&s)?)?;
            match &args.output {
                Some(path) => commands::write_csv(&table, std::fs::File::create(path)?)?,
                None => commands::write_csv(&table, &mut *stdout)?,
            }
            for (scheme, slope) in &table.slopes {
                writeln!(stderr, "{scheme}: observed order {slope:.3}")?;
            }
        }
        Command::Render(args) => {
            let (img, path) =
                commands::render_file(&args.input, args.output.as_deref(), args.scale)?;
            writeln!(
                stdout,
                "wrote {}x{} image to {}",
                img.width,
                img.height,
                path.display()
            )?;
        }
        Command::Diagnose(args) => {
            let d = commands::diagnose(&args.problem.settings()?)?;
            if let Some(path) = &args.eigenvalues {
                commands::write_eigenvalues(&d.eigenvalues, std::fs::File::create(path)?)?;
            }
            writeln!(stdout, "{}", serde_json::to_string_pretty(&d)?)?;
        }
    }
    Ok(())
}
