//! Carathéodory–Fejér rational approximation of `e^z` on `(-∞, 0]` and the
//! resulting φ-actions through shifted linear solves with common poles.
//!
//! The half-line is mapped to the unit circle by `z = s(w-1)²/(w+1)²`
//! (Möbius map followed by the Joukowski-type substitution `t = Re w`).
//! The Chebyshev-like coefficients of the transplanted exponential fill a
//! Hankel matrix whose `p`-th singular pair determines the poles; residues
//! follow from the error-corrected numerator.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::phi::{PhiProvider, PhiTerm};
use crate::stepping::{LinearPart, State};
use crate::C64;

const TRUNCATION: usize = 75;
const FFT_POINTS: usize = 1024;
const MAP_SCALE: f64 = 9.0;
/// Default pole count.
pub const DEFAULT_POLES: usize = 12;
/// Default shift of the approximation interval.
pub const DEFAULT_SHIFT: f64 = 1.0;

/// `e^z ≈ r_∞ + Σ_j c_j/(z - z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfApproximant {
    pub p: usize,
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
    pub r_inf: f64,
    pub shift: f64,
}

impl CfApproximant {
    /// The rational approximation of `e^z`.
    pub fn eval_exp(&self, z: C64) -> C64 {
        self.eval_phi(0, z) + self.r_inf
    }

    /// `Σ_j c_j z_j^{-l}/(z - z_j)`, the pole part of the approximation of
    /// `φ_l` (for `l = 0` the constant `r_∞` is not included).
    pub fn eval_phi(&self, l: usize, z: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&zj, &cj)| cj * zj.powi(-(l as i32)) / (z - zj))
            .sum()
    }

    /// Weight of pole `j` in the approximation of `Σ_l w_l φ_l`.
    pub fn pole_weight(&self, j: usize, w: [f64; 4]) -> C64 {
        let zj = self.poles[j];
        self.residues[j] * crate::phi::combine(w, |l| zj.powi(-(l as i32)))
    }
}

fn polyval(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Highest-degree-first coefficients of `Π (z - r)`.
fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        p = next;
    }
    p
}

/// Roots of a highest-degree-first polynomial via companion eigenvalues,
/// polished by Newton's method.
fn roots(coeffs: &[f64]) -> Option<Vec<C64>> {
    let start = coeffs.iter().position(|c| *c != 0.0)?;
    let c = &coeffs[start..];
    let deg = c.len() - 1;
    if deg == 0 {
        return Some(Vec::new());
    }
    let lead = c[0];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            C64::new(-c[j + 1] / lead, 0.0)
        } else if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let schur = nalgebra::Schur::try_new(comp, f64::EPSILON, 1000 * deg)?;
    let (_, t) = schur.unpack();
    let cc: Vec<C64> = c.iter().map(|&v| C64::new(v, 0.0)).collect();
    let dc: Vec<C64> = cc[..deg]
        .iter()
        .enumerate()
        .map(|(i, v)| v * (deg - i) as f64)
        .collect();
    Some(
        (0..deg)
            .map(|i| {
                let mut z = t[(i, i)];
                for _ in 0..3 {
                    let d = polyval(&dc, z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = polyval(&cc, z) / d;
                    if !step.is_finite() {
                        break;
                    }
                    z -= step;
                }
                z
            })
            .collect(),
    )
}

/// Builds the type-`(p, p)` approximant, shifted so that it is accurate on
/// `(-∞, shift]`.
pub fn cf_build(p: usize) -> Result<CfApproximant> {
    cf_build_shifted(p, DEFAULT_SHIFT)
}

pub fn cf_build_shifted(p: usize, shift: f64) -> Result<CfApproximant> {
    if !matches!(p, 10 | 12 | 14) {
        return Err(Error::UnsupportedCfDegree(p));
    }
    let (k, nf) = (TRUNCATION, FFT_POINTS);
    let w: Vec<C64> = (0..nf)
        .map(|i| C64::from_polar(1.0, 2.0 * PI * i as f64 / nf as f64))
        .collect();
    let mut buf: Vec<C64> = w
        .iter()
        .map(|wi| {
            let t = wi.re;
            C64::new((MAP_SCALE * (t - 1.0) / (t + 1.0 + 1e-16)).exp(), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nf);
    fft.process(&mut buf);
    let c: Vec<f64> = buf.iter().map(|z| z.re / nf as f64).collect();
    let series: Vec<C64> = (0..=k).rev().map(|i| C64::new(c[i], 0.0)).collect();
    let f: Vec<C64> = w.iter().map(|&wi| polyval(&series, wi)).collect();

    let hankel = DMatrix::from_fn(k, k, |i, j| if 1 + i + j <= k { c[1 + i + j] } else { 0.0 });
    let eig = SymmetricEigen::new(hankel);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
    });
    let idx = order[p];
    let lam = eig.eigenvalues[idx];
    let s = lam.abs();
    if s == 0.0 || !s.is_finite() {
        return Err(Error::CfConstruction(format!(
            "singular value {p} vanishes"
        )));
    }
    let q: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    let sign = lam.signum();
    let u: Vec<f64> = q.iter().rev().map(|x| sign * x).collect();
    let v = q;

    let padded = |x: &[f64]| {
        let mut b: Vec<C64> = x.iter().map(|&r| C64::new(r, 0.0)).collect();
        b.resize(nf, C64::new(0.0, 0.0));
        fft.process(&mut b);
        b
    };
    let (fu, fv) = (padded(&u), padded(&v));
    let rt: Vec<C64> = (0..nf)
        .map(|i| f[i] - s * w[i].powi(k as i32) * fu[i] / fv[i])
        .collect();

    let all = roots(&v).ok_or_else(|| Error::CfConstruction("root finding failed".into()))?;
    let qk: Vec<C64> = all.into_iter().filter(|z| z.norm() > 1.0).collect();
    if qk.len() != p {
        return Err(Error::CfConstruction(format!(
            "expected {p} poles outside the disk, found {}",
            qk.len()
        )));
    }
    let qpoly = poly_from_roots(&qk);
    let mut pt: Vec<C64> = (0..nf).map(|i| rt[i] * polyval(&qpoly, w[i])).collect();
    fft.process(&mut pt);
    let ptc: Vec<C64> = (0..=p)
        .rev()
        .map(|i| C64::new(pt[i].re / nf as f64, 0.0))
        .collect();

    let mut poles = Vec::with_capacity(p);
    let mut residues = Vec::with_capacity(p);
    for (j, &qj) in qk.iter().enumerate() {
        let others: Vec<C64> = qk
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, z)| *z)
            .collect();
        let ck = polyval(&ptc, qj) / polyval(&poly_from_roots(&others), qj);
        let zk = MAP_SCALE * (qj - 1.0).powi(2) / (qj + 1.0).powi(2);
        poles.push(zk);
        residues.push(4.0 * ck * zk / (qj * qj - 1.0));
    }
    let r_inf = 0.5
        * (1.0
            + residues
                .iter()
                .zip(&poles)
                .map(|(c, z)| c / z)
                .sum::<C64>()
                .re);

    let e = shift.exp();
    let appr = CfApproximant {
        p,
        poles: poles.iter().map(|z| z + shift).collect(),
        residues: residues.iter().map(|c| c * e).collect(),
        r_inf: r_inf * e,
        shift,
    };
    if !appr
        .poles
        .iter()
        .chain(&appr.residues)
        .all(|z| z.is_finite())
        || !appr.r_inf.is_finite()
    {
        return Err(Error::CfConstruction("non-finite pole or residue".into()));
    }
    Ok(appr)
}

/// Max `|r(x) - e^x|` over `count` points log-spaced in `[-10^hi, -10^lo]`.
pub fn cf_max_error(appr: &CfApproximant, lo: f64, hi: f64, count: usize) -> f64 {
    (0..count)
        .map(|i| {
            let e = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let x = -(10f64.powf(e));
            (appr.eval_exp(C64::new(x, 0.0)) - x.exp()).norm()
        })
        .fold(0.0, f64::max)
}

/// φ-actions from shifted solves `(hL - z_j)x = b`, with the factors for
/// all poles at both `h` and `h/2` computed up front.
pub struct CfPhi<S, L: LinearPart<S>> {
    lin: Arc<L>,
    appr: CfApproximant,
    h: f64,
    full: Vec<L::Factor>,
    half: Vec<L::Factor>,
    _state: std::marker::PhantomData<fn(&S)>,
}

impl<S: State, L: LinearPart<S>> CfPhi<S, L> {
    pub fn new(lin: Arc<L>, appr: CfApproximant, h: f64) -> Result<Self> {
        if lin.is_dispersive() {
            return Err(Error::DispersiveIncompatible {
                scheme: "etdrk4-cf",
            });
        }
        let factors = |step: f64| -> Result<Vec<L::Factor>> {
            appr.poles
                .iter()
                .map(|&zj| lin.factor(-zj, C64::new(step, 0.0)))
                .collect()
        };
        let full = factors(h)?;
        let half = factors(0.5 * h)?;
        Ok(Self {
            lin,
            appr,
            h,
            full,
            half,
            _state: std::marker::PhantomData,
        })
    }

    pub fn approximant(&self) -> &CfApproximant {
        &self.appr
    }

    /// Applies `Σ_l w_l φ_l(step·L)` to `x` with `p` solves.
    pub fn apply_weights(&self, w: [f64; 4], half: bool, x: &S) -> Result<S> {
        let factors = if half { &self.half } else { &self.full };
        let bx = self.lin.premultiply(x);
        let mut out = x.clone();
        out.scale(C64::new(self.appr.r_inf * w[0], 0.0));
        for (j, f) in factors.iter().enumerate() {
            let y = self.lin.solve_pre(f, &bx)?;
            out.axpy(self.appr.pole_weight(j, w), &y);
        }
        Ok(out)
    }
}

impl<S: State, L: LinearPart<S>> PhiProvider<S> for CfPhi<S, L> {
    fn step_size(&self) -> f64 {
        self.h
    }

    fn apply(&self, term: PhiTerm, x: &S) -> Result<S> {
        self.apply_weights(term.weights(), term.is_half_step(), x)
    }
}
