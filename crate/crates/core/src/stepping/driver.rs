//! Scheme state for a PDE on the grid and the integration loop.

use std::sync::Arc;
use std::time::Instant;

use crate::dfs::{double_up_coeffs, pole_residual, symmetry_residual};
use crate::error::{Error, Result};
use crate::fourier::{CoeffGrid, GridSpec, Transform};
use crate::laplacian::BlockPencil;
use crate::linsolve::BlockLu;
use crate::phi::cf::{cf_build, CfPhi};
use crate::phi::eig::EigPhiData;
use crate::phi::eig::DEFAULT_CONTOUR_RADIUS;
use crate::problems::{GridNonlinearity, ProblemSpec};
use crate::stepping::schemes::{etdrk4_step, imex_bdf4_step, lirk4_step, History};
use crate::stepping::{CounterSnapshot, Counters, LinearPart, Scheme, SchemeConfig};
use crate::C64;

/// Delegates to a linear part and counts shifted solves.
pub struct Counted<L> {
    inner: Arc<L>,
    counters: Arc<Counters>,
}

impl<L> Counted<L> {
    pub fn new(inner: Arc<L>, counters: Arc<Counters>) -> Self {
        Self { inner, counters }
    }
}

impl<S, L: LinearPart<S>> LinearPart<S> for Counted<L> {
    type Factor = L::Factor;

    fn factor(&self, z: C64, w: C64) -> Result<L::Factor> {
        self.inner.factor(z, w)
    }

    fn solve_pre(&self, f: &L::Factor, rhs: &S) -> Result<S> {
        self.counters.add_solves(1);
        self.inner.solve_pre(f, rhs)
    }

    fn premultiply(&self, x: &S) -> S {
        self.inner.premultiply(x)
    }

    fn apply_pre(&self, x: &S) -> S {
        self.inner.apply_pre(x)
    }

    fn unpremultiply(&self, r: &S) -> Result<S> {
        self.inner.unpremultiply(r)
    }

    fn is_dispersive(&self) -> bool {
        self.inner.is_dispersive()
    }
}

type GridLinear = Counted<BlockPencil>;

enum Kind {
    Cf(CfPhi<CoeffGrid, GridLinear>),
    Eig(EigPhiData),
    Bdf {
        factor: BlockLu,
        start: CfPhi<CoeffGrid, GridLinear>,
        history: History<CoeffGrid>,
    },
    Lirk {
        factor: BlockLu,
    },
}

/// A scheme with all factorizations and φ data precomputed for one pencil
/// and step size.
pub struct Stepper {
    scheme: Scheme,
    h: f64,
    linear: Arc<GridLinear>,
    nonlinear: GridNonlinearity,
    counters: Arc<Counters>,
    kind: Kind,
    precompute_seconds: f64,
}

impl Stepper {
    pub fn new(
        pencil: Arc<BlockPencil>,
        problem: &ProblemSpec,
        config: &SchemeConfig,
    ) -> Result<Self> {
        let scheme = config.scheme;
        if pencil.is_dispersive() && !scheme.supports_dispersive() {
            return Err(Error::DispersiveIncompatible {
                scheme: scheme.name(),
            });
        }
        let started = Instant::now();
        let h = config.h;
        let counters = Arc::new(Counters::default());
        let linear = Arc::new(Counted::new(pencil.clone(), counters.clone()));
        let cf = || -> Result<CfPhi<CoeffGrid, GridLinear>> {
            CfPhi::new(linear.clone(), cf_build(config.cf_poles)?, h)
        };
        let re = |x: f64| C64::new(x, 0.0);
        let kind = match scheme {
            Scheme::Etdrk4Cf => Kind::Cf(cf()?),
            Scheme::Etdrk4Eig => Kind::Eig(EigPhiData::new(
                &pencil,
                h,
                config.contour_points,
                DEFAULT_CONTOUR_RADIUS,
            )?),
            Scheme::ImexBdf4 => Kind::Bdf {
                factor: BlockLu::factor(&pencil, re(25.0), re(-12.0 * h))?,
                start: cf()?,
                history: History::default(),
            },
            Scheme::Lirk4 => Kind::Lirk {
                factor: BlockLu::factor(&pencil, re(1.0), re(-0.25 * h))?,
            },
        };
        let nonlinear =
            GridNonlinearity::new(problem, Transform::new(pencil.spec()), counters.clone());
        Ok(Self {
            scheme,
            h,
            linear,
            nonlinear,
            counters,
            kind,
            precompute_seconds: started.elapsed().as_secs_f64(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn precompute_seconds(&self) -> f64 {
        self.precompute_seconds
    }

    pub fn counters(&self) -> CounterSnapshot {
        self.counters.snapshot()
    }

    /// Forgets multistep history.
    pub fn reset(&mut self) {
        if let Kind::Bdf { history, .. } = &mut self.kind {
            history.clear();
        }
    }

    /// Number of multistep history entries (always 0 for one-step schemes).
    pub fn history_len(&self) -> usize {
        match &self.kind {
            Kind::Bdf { history, .. } => history.len(),
            _ => 0,
        }
    }

    pub fn step(&mut self, u: &CoeffGrid) -> Result<CoeffGrid> {
        let nl = &self.nonlinear;
        let n = |c: &CoeffGrid| nl.eval(c);
        match &mut self.kind {
            Kind::Cf(phi) => etdrk4_step(phi, u, &n(u), &n),
            Kind::Eig(phi) => etdrk4_step(phi, u, &n(u), &n),
            Kind::Bdf {
                factor,
                start,
                history,
            } => {
                let nu = n(u);
                let next = if history.is_full() {
                    imex_bdf4_step(self.linear.as_ref(), factor, self.h, u, &nu, history)?
                } else {
                    etdrk4_step(start, u, &nu, &n)?
                };
                history.push(u.clone(), nu);
                Ok(next)
            }
            Kind::Lirk { factor } => lirk4_step(self.linear.as_ref(), factor, self.h, u, &n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub coeffs: CoeffGrid,
    pub pole_residual: f64,
    pub symmetry_residual: f64,
}

impl Snapshot {
    fn new(t: f64, coeffs: CoeffGrid) -> Self {
        Self {
            t,
            pole_residual: pole_residual(&coeffs),
            symmetry_residual: symmetry_residual(&coeffs),
            coeffs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub initial: CoeffGrid,
    pub final_state: CoeffGrid,
    pub t_final: f64,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
    pub precompute_seconds: f64,
    /// Stepping time only.
    pub wall_seconds: f64,
    pub counters: CounterSnapshot,
}

/// Advances `problem` over `config.t_span` on the grid `spec`.
pub fn integrate(
    problem: &ProblemSpec,
    config: &SchemeConfig,
    spec: GridSpec,
) -> Result<IntegrationResult> {
    config.validate()?;
    let pencil = Arc::new(BlockPencil::new(spec, problem.alpha)?);
    let initial = double_up_coeffs(&problem.initial, spec);
    integrate_from(pencil, problem, config, initial)
}

/// Like [`integrate`] with a prebuilt pencil and initial coefficients.
pub fn integrate_from(
    pencil: Arc<BlockPencil>,
    problem: &ProblemSpec,
    config: &SchemeConfig,
    initial: CoeffGrid,
) -> Result<IntegrationResult> {
    config.validate()?;
    initial.check_shape(pencil.spec())?;
    let steps = config.step_count()?;
    let mut stepper = Stepper::new(pencil, problem, config)?;
    let (t0, h) = (config.t_span.0, config.h);
    let mut wanted: Vec<(usize, f64)> = config
        .snapshots
        .iter()
        .map(|&t| Ok((crate::stepping::whole_steps(t - t0, h)?, t)))
        .collect::<Result<_>>()?;
    wanted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let started = Instant::now();
    let mut recorded = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    let mut u = initial.clone();
    for k in 0..=steps {
        while let Some(&&(idx, t)) = next.peek() {
            if idx != k {
                break;
            }
            recorded.push((t, u.clone()));
            next.next();
        }
        if k == steps {
            break;
        }
        u = stepper.step(&u)?;
        if !u.is_finite() {
            return Err(Error::NonFinite {
                t: t0 + (k + 1) as f64 * h,
            });
        }
    }
    let wall_seconds = started.elapsed().as_secs_f64();
    let snapshots = recorded
        .into_iter()
        .map(|(t, c)| Snapshot::new(t, c))
        .collect();
    Ok(IntegrationResult {
        initial,
        final_state: u,
        t_final: config.t_span.1,
        steps,
        snapshots,
        precompute_seconds: stepper.precompute_seconds(),
        wall_seconds,
        counters: stepper.counters(),
    })
}
