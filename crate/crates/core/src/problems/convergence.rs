//! Error-versus-step-size tables.

use std::sync::Arc;

use crate::dfs::double_up_coeffs;
use crate::error::{Error, Result};
use crate::fourier::{CoeffGrid, GridSpec};
use crate::laplacian::BlockPencil;
use crate::problems::{relative_error, ProblemSpec};
use crate::stepping::{integrate_from, Scheme, SchemeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `e^{rate·T} u_0`; requires a problem with a known exact solution.
    Exact,
    /// ETDRK4-EIG with half the smallest step.
    EigHalfStep,
    /// Exact when available, otherwise [`Reference::EigHalfStep`].
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub h: f64,
    pub h_over_t: f64,
    pub error: f64,
    pub wall_seconds: f64,
    pub precompute_seconds: f64,
    pub max_pole_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log E` against `log h`, per scheme.
    pub slopes: Vec<(Scheme, f64)>,
}

impl ConvergenceTable {
    pub fn slope(&self, scheme: Scheme) -> Option<f64> {
        self.slopes.iter().find(|s| s.0 == scheme).map(|s| s.1)
    }

    pub fn rows_for(&self, scheme: Scheme) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs every `(scheme, h)` pair to `t_span.1` and measures the relative
/// error at the final time.
pub fn convergence_study(
    problem: &ProblemSpec,
    schemes: &[Scheme],
    steps: &[f64],
    spec: GridSpec,
    t_span: (f64, f64),
    reference: Reference,
) -> Result<ConvergenceTable> {
    if steps.is_empty() || schemes.is_empty() {
        return Err(Error::InvalidSchedule("empty scheme or step list"));
    }
    let pencil = Arc::new(BlockPencil::new(spec, problem.alpha)?);
    let initial = double_up_coeffs(&problem.initial, spec);
    let span = t_span.1 - t_span.0;
    let h_min = steps.iter().copied().fold(f64::INFINITY, f64::min);

    let reference_state: CoeffGrid = match (reference, problem.exact_rate) {
        (Reference::Exact | Reference::Auto, Some(rate)) => {
            let mut u = initial.clone();
            u.scale((rate * span).exp());
            u
        }
        (Reference::Exact, None) => {
            return Err(Error::InvalidSchedule("problem has no exact solution"))
        }
        _ => {
            let config = SchemeConfig::new(Scheme::Etdrk4Eig, 0.5 * h_min, t_span);
            integrate_from(pencil.clone(), problem, &config, initial.clone())?.final_state
        }
    };

    let mut rows = Vec::new();
    for &scheme in schemes {
        let mut hs = steps.to_vec();
        hs.sort_by(f64::total_cmp);
        for h in hs {
            let config = SchemeConfig::new(scheme, h, t_span).with_snapshots(vec![t_span.1]);
            let run = integrate_from(pencil.clone(), problem, &config, initial.clone())?;
            rows.push(ConvergenceRow {
                scheme,
                h,
                h_over_t: h / span,
                error: relative_error(&run.final_state, &reference_state)?,
                wall_seconds: run.wall_seconds,
                precompute_seconds: run.precompute_seconds,
                max_pole_residual: run
                    .snapshots
                    .iter()
                    .map(|s| s.pole_residual)
                    .fold(0.0, f64::max),
            });
        }
    }
    let slopes = schemes
        .iter()
        .map(|&s| {
            let (x, y): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.scheme == s)
                .map(|r| (r.h.ln(), r.error.ln()))
                .unzip();
            (s, fit_slope(&x, &y))
        })
        .collect();
    Ok(ConvergenceTable { rows, slopes })
}
