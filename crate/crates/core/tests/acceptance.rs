//! The acceptance criteria, run in order. Each prints one PASS or FAIL line
//! with its measured values and wall time; the test fails if any criterion
//! misses its tolerance or its runtime budget.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::*;
use dfsphere::dfs::{pole_residual, sphere_l2_norm, SphereFunction};
use dfsphere::fourier::{coeffs_to_vals, vals_to_coeffs, wavenumber};
use dfsphere::laplacian::spectral_diagnostics;
use dfsphere::mult::{build_tsin2, naive_msin2};
use dfsphere::phi::cf::{cf_build, cf_max_error, CfPhi};
use dfsphere::phi::eig::EigPhiData;
use dfsphere::phi::phi_scalar;
use dfsphere::problems::{
    allen_cahn, convergence_study, fit_slope, heat, heat_with, nls, relative_error,
    spherical_harmonic, PoissonSolver, Reference,
};
use dfsphere::stepping::{integrate, Scheme};
use dfsphere::{BlockLu, BlockPencil, CoeffGrid, GridSpec, SchemeConfig, ValueGrid, C64};
use nalgebra::DMatrix;

const ALL: [Scheme; 4] = [
    Scheme::Etdrk4Cf,
    Scheme::Etdrk4Eig,
    Scheme::ImexBdf4,
    Scheme::Lirk4,
];
const HEAT_STEPS: [f64; 4] = [1.0 / 25.0, 1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn worked_example() -> Outcome {
    let r = |x: f64| c(x, 0.0);
    let t = build_tsin2(6).unwrap().to_dense();
    let expect = [
        [0.5, 0.0, -0.25, 0.0, -0.25, 0.0],
        [0.0, 0.5, 0.0, -0.25, 0.0, 0.0],
        [-0.125, 0.0, 0.5, 0.0, -0.25, 0.0],
        [0.0, -0.25, 0.0, 0.5, 0.0, -0.25],
        [-0.125, 0.0, -0.25, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, -0.25, 0.0, 0.5],
    ];
    let entries = (0..36)
        .filter(|&k| t[(k / 6, k % 6)] == r(expect[k / 6][k % 6]))
        .count();
    let x: Vec<C64> = [0.0, 0.0, 0.5, 0.0, 0.5, 0.0].map(r).to_vec();
    let d = build_tsin2(6).unwrap().mul_vec(&x);
    let naive = naive_msin2(6).unwrap().mul_vec(&x);
    let good = d == [-0.25, 0.0, 0.125, 0.0, 0.125, 0.0].map(r).to_vec();
    let wrong = naive == [-0.125, 0.0, 0.125, 0.0, 0.125, 0.0].map(r).to_vec();
    outcome(
        entries == 36 && good && wrong,
        format!("{entries}/36 entries, T·c exact: {good}, naive reproduces (-1/8,...): {wrong}"),
    )
}

fn sectoral_family() -> Outcome {
    let spec = GridSpec::square(128).unwrap();
    let solver = PoissonSolver::new(spec).unwrap();
    let (mut worst_e, mut worst_p) = (0.0f64, 0.0f64);
    for l in 1..=32 {
        let (f, exact) = sectoral_pair(l, spec);
        let u = solver.solve(&f).unwrap();
        worst_e = worst_e.max(relative_error(&u, &exact).unwrap());
        worst_p = worst_p.max(pole_residual(&u));
    }
    outcome(
        worst_e <= 1e-8 && worst_p <= 1e-8,
        format!("max E = {worst_e:.2e}, max P = {worst_p:.2e} over l = 1..32"),
    )
}

fn poisson_eigenfunction() -> Outcome {
    let spec = GridSpec::square(64).unwrap();
    let f = spherical_harmonic(7, 3, spec).unwrap();
    let u = PoissonSolver::new(spec).unwrap().solve(&f).unwrap();
    let mut want = f.clone();
    want.scale(c(-1.0 / 56.0, 0.0));
    let e = relative_error(&u, &want).unwrap();
    outcome(e <= 1e-10, format!("E = {e:.2e}"))
}

fn heat_convergence() -> Outcome {
    let spec = GridSpec::square(64).unwrap();
    let table = convergence_study(
        &heat(8),
        &[Scheme::ImexBdf4],
        &HEAT_STEPS,
        spec,
        (0.0, 1.0),
        Reference::Exact,
    )
    .unwrap();
    let slope = table.slope(Scheme::ImexBdf4).unwrap();
    let p = table
        .rows
        .iter()
        .map(|r| r.max_pole_residual)
        .fold(0.0, f64::max);
    let errors: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{:.2e}", r.error))
        .collect();
    outcome(
        (slope - 4.0).abs() <= 0.2 && p <= 1e-8,
        format!(
            "slope {slope:.3}, max P = {p:.2e}, E = [{}]",
            errors.join(", ")
        ),
    )
}

fn sci(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn log_slope(ms: &[usize], values: &[f64]) -> f64 {
    let x: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_slope(&x, &y)
}

fn spectra() -> (Outcome, Outcome) {
    let ms = [16usize, 32, 64];
    let mut max_eig = Vec::new();
    let mut cond = Vec::new();
    let mut signs_ok = true;
    for &m in &ms {
        let pencil = BlockPencil::new(GridSpec::square(m).unwrap(), c(1.0, 0.0)).unwrap();
        let d = spectral_diagnostics(&pencil).unwrap();
        signs_ok &=
            d.max_imag <= 1e-8 * d.max_abs_eig && d.max_positive_real <= 1e-8 * d.max_abs_eig;
        max_eig.push(d.max_abs_eig);
        cond.push(d.cond_v);
    }
    let (s_eig, s_cond) = (log_slope(&ms, &max_eig), log_slope(&ms, &cond));
    (
        outcome(
            (s_eig - 4.0).abs() <= 0.3 && signs_ok,
            format!(
                "slope {s_eig:.3}, max|λ| = [{}], real and nonpositive: {signs_ok}",
                sci(&max_eig)
            ),
        ),
        outcome(
            (s_cond - 1.0).abs() <= 0.3,
            format!("slope {s_cond:.3}, cond(V) = [{}]", sci(&cond)),
        ),
    )
}

fn cf_accuracy() -> Outcome {
    let e12 = cf_max_error(&cf_build(12).unwrap(), -6.0, 6.0, 1000);
    let e10 = cf_max_error(&cf_build(10).unwrap(), -6.0, 6.0, 1000);
    let predicted = 9.289f64.powi(2);
    let ratio = e10 / e12;
    let consistent = ratio >= predicted / 10.0 && ratio <= predicted * 10.0;
    outcome(
        e12 <= 1e-9 && consistent,
        format!("p = 12: {e12:.2e}, p = 10: {e10:.2e}, ratio {ratio:.1} (9.289² = {predicted:.1})"),
    )
}

fn phi_cross_validation() -> Outcome {
    let spec = GridSpec::square(16).unwrap();
    let pencil = Arc::new(BlockPencil::new(spec, c(1.0, 0.0)).unwrap());
    let h = 0.1;
    let cf = CfPhi::new(pencil.clone(), cf_build(12).unwrap(), h).unwrap();
    let eig = EigPhiData::new(&pencil, h, 32, 1.0).unwrap();
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let x = random_grid(spec, &mut r);
        for l in 0..4 {
            let mut w = [0.0; 4];
            w[l] = 1.0;
            let a = cf.apply_weights(w, false, &x).unwrap();
            let b = eig.phi_action(l, &x);
            worst = worst.max((&a - &b).max_abs() / x.max_abs());
        }
    }
    outcome(worst <= 1e-7, format!("max difference {worst:.2e}"))
}

fn odd_parity_entries(g: &CoeffGrid) -> usize {
    let (m, n) = g.shape();
    (0..m * n)
        .filter(|&q| {
            let (jj, kk) = (q % m, q / m);
            (wavenumber(jj, m) - wavenumber(kk, n)).rem_euclid(2) != 0 && g[(jj, kk)] != c(0.0, 0.0)
        })
        .count()
}

fn oracle_equivalence() -> Outcome {
    let spec = GridSpec::square(8).unwrap();
    let (m, n) = spec.shape();
    let mut r = rng(102);
    let (mut apply_err, mut solve_err) = (0.0f64, 0.0f64);
    let mut parity_broken = 0;
    for alpha in [c(1.0, 0.0), c(0.0, 1.0)] {
        let pencil = BlockPencil::new(spec, alpha).unwrap();
        let dense = dense_laplacian(spec, alpha);
        let x = random_grid(spec, &mut r);
        apply_err = apply_err.max(rel_diff(
            &pencil.apply(&x),
            &grid_of(spec, &(&dense * vec_of(&x))),
        ));
        for (z, w) in [
            (c(1.0, 0.0), c(-0.025, 0.0)),
            (c(25.0, 0.0), c(-1.2, 0.0)),
            (c(3.2, -1.7), c(0.05, 0.0)),
        ] {
            let op = DMatrix::<C64>::identity(m * n, m * n) * z + &dense * w;
            let want = grid_of(spec, &op.lu().solve(&vec_of(&x)).unwrap());
            let f = BlockLu::factor(&pencil, z, w).unwrap();
            solve_err = solve_err.max(rel_diff(&f.solve(&pencil, &x).unwrap(), &want));
            let mut even = x.clone();
            for q in 0..m * n {
                if (wavenumber(q % m, m) - wavenumber(q / m, n)).rem_euclid(2) != 0 {
                    even[(q % m, q / m)] = c(0.0, 0.0);
                }
            }
            parity_broken += odd_parity_entries(&f.solve(&pencil, &even).unwrap());
            parity_broken += odd_parity_entries(&pencil.apply(&even));
        }
    }
    outcome(
        apply_err <= 1e-12 && solve_err <= 1e-12 && parity_broken == 0,
        format!("apply {apply_err:.2e}, solve {solve_err:.2e}, parity violations {parity_broken}"),
    )
}

fn order_sweep() -> Outcome {
    let spec = GridSpec::square(32).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut record = |label: String, problem, scheme| {
        let table = convergence_study(
            problem,
            &[scheme],
            &HEAT_STEPS,
            spec,
            (0.0, 1.0),
            Reference::Exact,
        )
        .unwrap();
        let slope = table.slope(scheme).unwrap();
        let errors: Vec<String> = table
            .rows
            .iter()
            .map(|r| format!("{:.1e}", r.error))
            .collect();
        pass &= (slope - 4.0).abs() <= 0.2;
        lines.push(format!("{label} {slope:.2} [{}]", errors.join(" ")));
    };
    let diffusive = heat(4);
    let dispersive = heat_with(4, 4, c(0.0, 1.0));
    for scheme in ALL {
        record(scheme.to_string(), &diffusive, scheme);
    }
    for scheme in [Scheme::Etdrk4Eig, Scheme::Lirk4] {
        record(format!("{scheme} (dispersive)"), &dispersive, scheme);
    }
    outcome(pass, format!("slopes: {}", lines.join("; ")))
}

fn rankings() -> Outcome {
    let spec = GridSpec::square(64).unwrap();
    let ac = convergence_study(
        &allen_cahn(),
        &ALL,
        &[0.01],
        spec,
        (0.0, 0.5),
        Reference::EigHalfStep,
    )
    .unwrap();
    let row = |s| ac.rows_for(s).next().unwrap();
    let bdf = row(Scheme::ImexBdf4);
    let others = [Scheme::Etdrk4Cf, Scheme::Etdrk4Eig, Scheme::Lirk4];
    let largest_error = others.iter().all(|&s| row(s).error < bdf.error);
    let fastest = others
        .iter()
        .all(|&s| row(s).wall_seconds > bdf.wall_seconds);
    let ac_detail: Vec<String> = ALL
        .iter()
        .map(|&s| format!("{s} E {:.1e} {:.2}s", row(s).error, row(s).wall_seconds))
        .collect();

    let config = |s| SchemeConfig::new(s, 1e-3, (0.0, 0.25));
    let eig = integrate(&nls(), &config(Scheme::Etdrk4Eig), spec).unwrap();
    let lirk = integrate(&nls(), &config(Scheme::Lirk4), spec).unwrap();
    let nls_ok = lirk.wall_seconds < eig.wall_seconds;
    outcome(
        largest_error && fastest && nls_ok,
        format!(
            "Allen-Cahn: {}; NLS stepping: lirk4 {:.2}s vs etdrk4-eig {:.2}s",
            ac_detail.join(", "),
            lirk.wall_seconds,
            eig.wall_seconds
        ),
    )
}

fn invariants() -> Outcome {
    let mut failures = Vec::new();

    let spec = GridSpec::square(128).unwrap();
    let mut problem = allen_cahn();
    problem.initial =
        SphereFunction::from_fn(|lam, th| c((1.0 + lam.cos() * (2.0 * th).sin()).cos(), 0.0));
    let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
    let (mut p, mut s) = (0.0f64, 0.0f64);
    for scheme in ALL {
        let run = integrate(
            &problem,
            &SchemeConfig::new(scheme, 0.1, (0.0, 1.0)).with_snapshots(times.clone()),
            spec,
        )
        .unwrap();
        for snap in &run.snapshots {
            p = p.max(snap.pole_residual);
            s = s.max(snap.symmetry_residual);
        }
    }
    if p > 1e-8 || s > 1e-8 {
        failures.push("residuals");
    }

    let mut r = rng(103);
    let mut round_trip = 0.0f64;
    for m in [8usize, 16, 64] {
        let gs = GridSpec::square(m).unwrap();
        let v = ValueGrid::from_fn(gs, |_, _| {
            c(
                rand::Rng::gen_range(&mut r, -1.0..1.0),
                rand::Rng::gen_range(&mut r, -1.0..1.0),
            )
        });
        round_trip =
            round_trip.max((&coeffs_to_vals(&vals_to_coeffs(&v)) - &v).max_abs() / v.max_abs());
    }
    if round_trip > 1e-13 {
        failures.push("fft round trip");
    }

    let mut scalar_rec = 0.0f64;
    for k in 0..200 {
        let z = c(-(10f64).powf(-6.0 + 12.0 * k as f64 / 199.0), 0.0);
        for (l, fact) in [(0, 1.0), (1, 1.0), (2, 2.0)] {
            let d = z * phi_scalar(l + 1, z) - (phi_scalar(l, z) - 1.0 / fact);
            scalar_rec = scalar_rec.max(d.norm() / phi_scalar(l, z).norm().max(1.0));
        }
    }

    let gs = GridSpec::square(16).unwrap();
    let pencil = BlockPencil::new(gs, c(1.0, 0.0)).unwrap();
    let h = 0.05;
    let data = EigPhiData::new(&pencil, h, 32, 1.0).unwrap();
    let b = pencil.b_matrix().to_dense().lu();
    let id = DMatrix::<C64>::identity(gs.m(), gs.m());
    let (mut matrix_rec, mut f_identity) = (0.0f64, 0.0f64);
    for i in 0..gs.n() {
        let hl = b.solve(&pencil.a_block(i).to_dense()).unwrap() * c(h, 0.0);
        let phis: Vec<_> = (0..4).map(|l| data.block_phi(i, l)).collect();
        for (l, fact) in [(0, 1.0), (1, 1.0), (2, 2.0)] {
            let d = &phis[l + 1] * &hl - (&phis[l] - &id * c(1.0 / fact, 0.0));
            matrix_rec = matrix_rec.max(d.camax() / phis[l].camax().max(1.0));
        }
        let f1 = &phis[1] - &phis[2] * c(3.0, 0.0) + &phis[3] * c(4.0, 0.0);
        let f2 = &phis[2] * c(2.0, 0.0) - &phis[3] * c(4.0, 0.0);
        let f3 = &phis[3] * c(4.0, 0.0) - &phis[2];
        f_identity =
            f_identity.max((f1 + f2 * c(2.0, 0.0) + f3 - &phis[1]).camax() / phis[1].camax());
    }
    if scalar_rec > 1e-12 || matrix_rec > 1e-9 {
        failures.push("phi recurrences");
    }
    if f_identity > 1e-10 {
        failures.push("f1 + 2 f2 + f3");
    }

    let nls_spec = GridSpec::square(64).unwrap();
    let run = integrate(
        &nls(),
        &SchemeConfig::new(Scheme::Lirk4, 1e-3, (0.0, 0.25)),
        nls_spec,
    )
    .unwrap();
    let (a, z) = (
        sphere_l2_norm(&run.initial),
        sphere_l2_norm(&run.final_state),
    );
    let drift = ((z - a) / a).abs();
    if drift > 1e-6 {
        failures.push("nls drift");
    }

    outcome(
        failures.is_empty(),
        format!(
            "P {p:.1e}, S {s:.1e}, round trip {round_trip:.1e}, recurrences {scalar_rec:.1e}/{matrix_rec:.1e}, \
             f identity {f_identity:.1e}, NLS drift {drift:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn run(
    results: &mut Vec<bool>,
    id: usize,
    name: &str,
    budget: Option<f64>,
    f: impl FnOnce() -> Outcome,
) {
    let started = Instant::now();
    let o = f();
    let secs = started.elapsed().as_secs_f64();
    let in_budget = budget.map_or(true, |b| secs < b);
    let pass = o.pass && in_budget;
    let limit = budget.map_or(String::new(), |b| format!(" / {b:.0}s"));
    println!(
        "criterion {id:>2} {} {name}: {} ({secs:.2}s{limit})",
        if pass { "PASS" } else { "FAIL" },
        o.detail
    );
    results.push(pass);
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    run(&mut results, 1, "worked example", Some(1.0), worked_example);
    run(
        &mut results,
        2,
        "Poisson spectral accuracy",
        Some(30.0),
        sectoral_family,
    );
    run(
        &mut results,
        3,
        "Poisson eigenfunction",
        Some(5.0),
        poisson_eigenfunction,
    );
    run(
        &mut results,
        4,
        "heat h^4 convergence",
        Some(60.0),
        heat_convergence,
    );
    let mut cond = None;
    run(&mut results, 5, "eigenvalue bound", Some(60.0), || {
        let (eig, c) = spectra();
        cond = Some(c);
        eig
    });
    // reuses the eigendecompositions timed under criterion 5
    run(&mut results, 6, "cond(V) growth", Some(60.0), || {
        cond.take().unwrap()
    });
    run(&mut results, 7, "CF accuracy", Some(5.0), cf_accuracy);
    run(
        &mut results,
        8,
        "phi-action cross-validation",
        Some(10.0),
        phi_cross_validation,
    );
    run(
        &mut results,
        9,
        "oracle equivalence",
        Some(5.0),
        oracle_equivalence,
    );
    run(
        &mut results,
        10,
        "scheme order sweep",
        Some(120.0),
        order_sweep,
    );
    run(&mut results, 11, "qualitative rankings", None, rankings);
    run(&mut results, 12, "invariant suite", Some(120.0), invariants);
    let failed: Vec<usize> = (1..=results.len()).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
