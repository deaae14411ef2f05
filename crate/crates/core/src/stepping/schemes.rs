//! One step of each scheme.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::phi::{PhiProvider, PhiTerm};
use crate::stepping::{LinearPart, State};
use crate::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `Σ a_i x_i`
fn lincomb<S: State>(terms: &[(f64, &S)]) -> S {
    let mut out = terms[0].1.clone();
    out.scale(re(terms[0].0));
    for &(a, x) in &terms[1..] {
        out.axpy(re(a), x);
    }
    out
}

/// ETDRK4. `nu` is `N(u)`, already evaluated by the caller. Uses nine
/// φ-applications and three further nonlinear evaluations.
pub fn etdrk4_step<S: State, P: PhiProvider<S> + ?Sized>(
    phi: &P,
    u: &S,
    nu: &S,
    n: &dyn Fn(&S) -> S,
) -> Result<S> {
    let h = phi.step_size();
    let half = re(0.5 * h);
    let eu = phi.apply(PhiTerm::ExpHalf, u)?;

    let mut a = eu.clone();
    a.axpy(half, &phi.apply(PhiTerm::Phi1Half, nu)?);
    let na = n(&a);

    let mut b = eu;
    b.axpy(half, &phi.apply(PhiTerm::Phi1Half, &na)?);
    let nb = n(&b);

    let mut c = phi.apply(PhiTerm::ExpHalf, &a)?;
    c.axpy(
        half,
        &phi.apply(PhiTerm::Phi1Half, &lincomb(&[(2.0, &nb), (-1.0, nu)]))?,
    );
    let nc = n(&c);

    let mut out = phi.apply(PhiTerm::Exp, u)?;
    out.axpy(re(h), &phi.apply(PhiTerm::F1, nu)?);
    out.axpy(
        re(h),
        &phi.apply(PhiTerm::F2, &lincomb(&[(1.0, &na), (1.0, &nb)]))?,
    );
    out.axpy(re(h), &phi.apply(PhiTerm::F3, &nc)?);
    Ok(out)
}

/// The last three `(u, N(u))` pairs, newest first.
#[derive(Debug, Clone)]
pub struct History<S> {
    entries: VecDeque<(S, S)>,
}

impl<S> Default for History<S> {
    fn default() -> Self {
        Self {
            entries: VecDeque::with_capacity(4),
        }
    }
}

impl<S> History<S> {
    pub fn push(&mut self, u: S, nu: S) {
        self.entries.push_front((u, nu));
        self.entries.truncate(3);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == 3
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn get(&self, i: usize) -> Option<&(S, S)> {
        self.entries.get(i)
    }
}

/// IMEX-BDF4: `(25 - 12hL)u⁺ = 48u - 36u₋₁ + 16u₋₂ - 3u₋₃
/// + h(48N - 72N₋₁ + 48N₋₂ - 12N₋₃)`. `factor` must hold `25B - 12hA`.
pub fn imex_bdf4_step<S: State, L: LinearPart<S> + ?Sized>(
    lin: &L,
    factor: &L::Factor,
    h: f64,
    u: &S,
    nu: &S,
    history: &History<S>,
) -> Result<S> {
    if !history.is_full() {
        return Err(Error::MissingHistory(history.len()));
    }
    let (u1, n1) = &history.entries[0];
    let (u2, n2) = &history.entries[1];
    let (u3, n3) = &history.entries[2];
    let rhs = lincomb(&[
        (48.0, u),
        (-36.0, u1),
        (16.0, u2),
        (-3.0, u3),
        (48.0 * h, nu),
        (-72.0 * h, n1),
        (48.0 * h, n2),
        (-12.0 * h, n3),
    ]);
    lin.solve_pre(factor, &lin.premultiply(&rhs))
}

/// LIRK4 with stage systems `(B - h/4·A)x = r`; `factor` must hold
/// `B - (h/4)A`.
pub fn lirk4_step<S: State, L: LinearPart<S> + ?Sized>(
    lin: &L,
    factor: &L::Factor,
    h: f64,
    u: &S,
    n: &dyn Fn(&S) -> S,
) -> Result<S> {
    // B(u + h·Σ β N) + h·A(Σ γ stage)
    let stage = |nl: &[(f64, &S)], lv: &[(f64, &S)]| -> Result<S> {
        let mut x = u.clone();
        for &(b, v) in nl {
            x.axpy(re(h * b), v);
        }
        let mut r = lin.premultiply(&x);
        if !lv.is_empty() {
            r.axpy(re(h), &lin.apply_pre(&lincomb(lv)));
        }
        lin.solve_pre(factor, &r)
    };
    let nv = n(u);
    let a = stage(&[(0.25, &nv)], &[])?;
    let na = n(&a);
    let b = stage(&[(-0.25, &nv), (1.0, &na)], &[(0.5, &a)])?;
    let nb = n(&b);
    let c = stage(
        &[(-13.0 / 100.0, &nv), (43.0 / 75.0, &na), (8.0 / 75.0, &nb)],
        &[(17.0 / 50.0, &a), (-1.0 / 25.0, &b)],
    )?;
    let nc = n(&c);
    let d = stage(
        &[
            (-6.0 / 85.0, &nv),
            (42.0 / 85.0, &na),
            (179.0 / 1360.0, &nb),
            (-15.0 / 272.0, &nc),
        ],
        &[
            (371.0 / 1360.0, &a),
            (-137.0 / 2720.0, &b),
            (15.0 / 544.0, &c),
        ],
    )?;
    let nd = n(&d);
    let e = stage(
        &[
            (79.0 / 24.0, &na),
            (-5.0 / 8.0, &nb),
            (25.0 / 2.0, &nc),
            (-85.0 / 6.0, &nd),
        ],
        &[
            (25.0 / 24.0, &a),
            (-49.0 / 48.0, &b),
            (125.0 / 16.0, &c),
            (-85.0 / 12.0, &d),
        ],
    )?;
    let ne = n(&e);
    let final_weights = [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25];
    let lin_part = lin.unpremultiply(&lin.apply_pre(&lincomb(&[
        (final_weights[0], &a),
        (final_weights[1], &b),
        (final_weights[2], &c),
        (final_weights[3], &d),
        (final_weights[4], &e),
    ])))?;
    let mut out = u.clone();
    out.axpy(re(h), &lin_part);
    for (wgt, v) in final_weights.iter().zip([&na, &nb, &nc, &nd, &ne]) {
        out.axpy(re(h * wgt), v);
    }
    Ok(out)
}
