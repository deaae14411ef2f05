use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dfsphere::dfs::{double_up_coeffs, restrict};
use dfsphere::laplacian::spectral_diagnostics;
use dfsphere::problems::{convergence_study, relative_error, ConvergenceTable};
use dfsphere::stepping::integrate_from;
use dfsphere::{BlockPencil, CoeffGrid, Error, GridSpec, Transform, C64};
use serde::Serialize;

use crate::config::{grid_size, problem_from, problem_hash, ConvergeConfig, RunConfig, Settings};
use crate::render::{render, Image};
use crate::snapshot::SnapshotFile;

#[derive(Debug, Clone, Serialize)]
pub struct ProblemInfo {
    pub name: String,
    pub alpha: [f64; 2],
    pub linear: bool,
    pub dispersive: bool,
    pub hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotInfo {
    pub t: f64,
    pub file: Option<String>,
    pub image: Option<String>,
    pub pole_residual: f64,
    pub symmetry_residual: f64,
    pub max_abs: f64,
    /// Relative error against the exact solution, when the problem has one.
    pub error_vs_exact: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counts {
    pub ffts: u64,
    pub solves: u64,
    pub nonlinear_evals: u64,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub format_version: u32,
    pub problem: ProblemInfo,
    pub m: usize,
    pub n: usize,
    pub scheme: String,
    pub h: f64,
    pub t_span: [f64; 2],
    pub steps: usize,
    pub cf_poles: usize,
    pub contour_points: usize,
    pub precompute_seconds: f64,
    /// Stepping only; precomputation is reported separately.
    pub wall_seconds: f64,
    pub counters: Counts,
    pub snapshots: Vec<SnapshotInfo>,
    pub final_error_vs_exact: Option<f64>,
    /// The settings this run was made from; `config.txt` holds the same.
    pub settings: std::collections::BTreeMap<String, String>,
}

fn engine_error(e: Error, scheme: &str) -> anyhow::Error {
    match e {
        Error::NonFinite { t } => anyhow!(
            "unstable run: non-finite values at t = {t} with {scheme}; reduce h or raise m, n"
        ),
        Error::DispersiveIncompatible { scheme } => {
            anyhow!(
                "scheme {scheme} is incompatible with dispersive problems; use etdrk4-eig or lirk4"
            )
        }
        other => anyhow!(other),
    }
}

/// Integrates, writes snapshots, `manifest.json` and `config.txt` into the
/// output directory, and returns the manifest.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    let spec = GridSpec::new(config.m, config.n)?;
    let problem = &config.problem;
    let hash = problem_hash(&config.settings);
    let scheme = config.scheme.scheme.name();
    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))?;

    let pencil = std::sync::Arc::new(BlockPencil::new(spec, problem.alpha)?);
    let initial = double_up_coeffs(&problem.initial, spec);
    let result = integrate_from(pencil, problem, &config.scheme, initial.clone())
        .map_err(|e| engine_error(e, scheme))?;
    let t0 = config.scheme.t_span.0;
    let exact = |t: f64| -> Option<CoeffGrid> {
        problem.exact_rate.map(|rate| {
            let mut u = initial.clone();
            u.scale((rate * (t - t0)).exp());
            u
        })
    };
    let error_at = |u: &CoeffGrid, t: f64| -> Result<Option<f64>> {
        exact(t)
            .map(|e| relative_error(u, &e))
            .transpose()
            .map_err(Into::into)
    };

    let transform = Transform::new(spec);
    let mut snapshots = Vec::new();
    for (k, snap) in result.snapshots.iter().enumerate() {
        let values = transform.to_values(&snap.coeffs);
        let file = SnapshotFile::from_samples(&restrict(&values), snap.t, hash);
        let stem = format!("snapshot_{k:04}");
        let bin = config.write_binary.then(|| format!("{stem}.bin"));
        if let Some(name) = &bin {
            file.save(&config.out.join(name))?;
        }
        let ppm = config.write_ppm.then(|| format!("{stem}.ppm"));
        if let Some(name) = &ppm {
            render(&file, 1).save(&config.out.join(name))?;
        }
        snapshots.push(SnapshotInfo {
            t: snap.t,
            file: bin,
            image: ppm,
            pole_residual: snap.pole_residual,
            symmetry_residual: snap.symmetry_residual,
            max_abs: values.max_abs(),
            error_vs_exact: error_at(&snap.coeffs, snap.t)?,
        });
    }

    let manifest = Manifest {
        format_version: 1,
        problem: ProblemInfo {
            name: problem.name.clone(),
            alpha: [problem.alpha.re, problem.alpha.im],
            linear: problem.nonlinearity.is_none(),
            dispersive: problem.alpha.im != 0.0,
            hash: format!("{hash:016x}"),
        },
        m: config.m,
        n: config.n,
        scheme: scheme.to_string(),
        h: config.scheme.h,
        t_span: [config.scheme.t_span.0, config.scheme.t_span.1],
        steps: result.steps,
        cf_poles: config.scheme.cf_poles,
        contour_points: config.scheme.contour_points,
        precompute_seconds: result.precompute_seconds,
        wall_seconds: result.wall_seconds,
        counters: Counts {
            ffts: result.counters.ffts,
            solves: result.counters.solves,
            nonlinear_evals: result.counters.nonlinear_evals,
        },
        snapshots,
        final_error_vs_exact: error_at(&result.final_state, result.t_final)?,
        settings: config
            .settings
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(config.out.join("manifest.json"), json + "\n")?;
    std::fs::write(config.out.join("config.txt"), config.settings.to_text())?;
    Ok(manifest)
}

pub fn converge(config: &ConvergeConfig) -> Result<ConvergenceTable> {
    let spec = GridSpec::new(config.m, config.n)?;
    Ok(convergence_study(
        &config.problem,
        &config.schemes,
        &config.hs,
        spec,
        config.t_span,
        config.reference,
    )?)
}

pub const CSV_HEADER: [&str; 6] = [
    "scheme",
    "h",
    "h_over_T",
    "E",
    "wall_seconds",
    "precompute_seconds",
];

pub fn write_csv(table: &ConvergenceTable, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in &table.rows {
        out.write_record([
            r.scheme.to_string(),
            r.h.to_string(),
            r.h_over_t.to_string(),
            format!("{:e}", r.error),
            r.wall_seconds.to_string(),
            r.precompute_seconds.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn render_file(input: &Path, output: Option<&Path>, scale: usize) -> Result<(Image, PathBuf)> {
    let snap = SnapshotFile::load(input)?;
    if snap.rows < 2 || snap.cols == 0 {
        bail!("{} holds no image data", input.display());
    }
    let img = render(&snap, scale);
    let path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| input.with_extension("ppm"));
    img.save(&path)?;
    Ok((img, path))
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub m: usize,
    pub n: usize,
    pub alpha: [f64; 2],
    pub max_abs_eig: f64,
    pub max_imag: f64,
    pub max_positive_real: f64,
    pub all_real: bool,
    pub all_nonpositive: bool,
    pub cond_v: f64,
    #[serde(skip)]
    pub eigenvalues: Vec<C64>,
}

/// Spectrum of the discrete Laplacian (scaled by the problem's `alpha`, or
/// 1 when no problem is given).
pub fn diagnose(settings: &Settings) -> Result<Diagnostics> {
    let alpha = if settings.get("problem").is_some() || settings.get("alpha").is_some() {
        let mut s = settings.clone();
        if s.get("problem").is_none() && s.get("initial").is_none() {
            s.set("initial", "constant(0)")?;
        }
        problem_from(&s)?.alpha
    } else {
        C64::new(1.0, 0.0)
    };
    let (m, n) = grid_size(settings)?;
    let pencil = BlockPencil::new(GridSpec::new(m, n)?, alpha)?;
    let d = spectral_diagnostics(&pencil)?;
    Ok(Diagnostics {
        m,
        n,
        alpha: [alpha.re, alpha.im],
        max_abs_eig: d.max_abs_eig,
        max_imag: d.max_imag,
        max_positive_real: d.max_positive_real,
        all_real: d.all_real,
        all_nonpositive: d.all_nonpositive,
        cond_v: d.cond_v,
        eigenvalues: d.eigenvalues,
    })
}

pub fn write_eigenvalues(eigs: &[C64], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["re", "im"])?;
    for z in eigs {
        out.write_record([z.re.to_string(), z.im.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
