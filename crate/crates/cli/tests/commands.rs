use std::path::Path;
use std::process::Command;

use clap::Parser;
use dfsphere::dfs::{double_up, restrict};
use dfsphere::problems::spherical_harmonic;
use dfsphere::{GridSpec, Transform, C64};
use dfsphere_cli::cli::{execute, Cli};
use dfsphere_cli::commands::render_file;
use dfsphere_cli::snapshot::SnapshotFile;
use serde_json::Value;

fn cli(args: &[&str]) -> anyhow::Result<(String, String)> {
    let parsed = Cli::try_parse_from(std::iter::once("dfsphere").chain(args.iter().copied()))?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    execute(parsed, &mut out, &mut err)?;
    Ok((String::from_utf8(out)?, String::from_utf8(err)?))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dfsphere"))
}

#[test]
fn heat_run_records_error_against_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("heat");
    let args = "run --problem heat --l 4 --n 32 --h 0.01 --tspan 0 1 --scheme imex-bdf4 --out";
    let mut argv: Vec<&str> = args.split(' ').collect();
    argv.push(out.to_str().unwrap());
    cli(&argv).unwrap();
    let m = manifest(&out);
    let e = m["final_error_vs_exact"].as_f64().unwrap();
    assert!(e <= 1e-8, "E = {e:e}");
    assert_eq!(m["steps"], 100);
    assert_eq!(m["scheme"], "imex-bdf4");
    let snap = &m["snapshots"][0];
    assert_eq!(snap["t"], 1.0);
    assert!(snap["pole_residual"].as_f64().unwrap() <= 1e-10);
    assert!(snap["symmetry_residual"].as_f64().unwrap() <= 1e-10);
    let file = SnapshotFile::load(&out.join(snap["file"].as_str().unwrap())).unwrap();
    assert_eq!((file.rows, file.cols), (17, 32));
    assert_eq!(file.t, 1.0);
    // Y_4^4 carries e^{4iλ}
    assert!(file.complex);
    assert_eq!(
        format!("{:016x}", file.problem_hash),
        m["problem"]["hash"].as_str().unwrap()
    );
}

#[test]
fn allen_cahn_run_stays_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    cli(&[
        "run",
        "--problem",
        "allen-cahn",
        "--n",
        "64",
        "--h",
        "0.01",
        "--tspan",
        "0",
        "1",
        "--scheme",
        "lirk4",
        "--out",
        out,
    ])
    .unwrap();
    let m = manifest(dir.path());
    assert!(m["final_error_vs_exact"].is_null());
    assert!(m["snapshots"][0]["max_abs"].as_f64().unwrap() <= 1.5);
}

#[test]
fn dispersive_problem_with_bdf_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary()
        .args([
            "run",
            "--scheme",
            "imex-bdf4",
            "--problem",
            "nls",
            "--n",
            "16",
            "--h",
            "0.01",
            "--tspan",
            "0",
            "0.1",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("dispersive"), "{msg}");
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn bad_input_exits_nonzero() {
    for args in [
        vec![
            "run",
            "--problem",
            "nope",
            "--n",
            "16",
            "--h",
            "0.1",
            "--tspan",
            "0",
            "1",
            "--scheme",
            "lirk4",
        ],
        vec![
            "run",
            "--problem",
            "heat",
            "--n",
            "16",
            "--h",
            "0.3",
            "--tspan",
            "0",
            "1",
            "--scheme",
            "lirk4",
        ],
        vec![
            "run",
            "--problem",
            "heat",
            "--n",
            "16",
            "--h",
            "0.1",
            "--tspan",
            "0",
            "1",
            "--scheme",
            "rk4",
        ],
        vec![
            "run",
            "--problem",
            "heat",
            "--n",
            "16",
            "--h",
            "0.1",
            "--tspan",
            "0",
            "1",
        ],
        vec!["render", "/nonexistent/snapshot.bin"],
    ] {
        let out = binary().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "{args:?}"
        );
    }
}

#[test]
fn unstable_runs_are_reported() {
    // explicit treatment of a large reaction term blows up
    let dir = tempfile::tempdir().unwrap();
    let err = cli(&[
        "run",
        "--problem",
        "custom",
        "--alpha",
        "0.01",
        "--nonlinearity",
        "u^5 * 1e6",
        "--initial",
        "allen-cahn",
        "--n",
        "16",
        "--h",
        "0.5",
        "--tspan",
        "0",
        "5",
        "--scheme",
        "lirk4",
        "--out",
        dir.path().to_str().unwrap(),
    ])
    .unwrap_err();
    assert!(format!("{err:#}").contains("non-finite"), "{err:#}");
}

#[test]
fn config_file_with_flag_override_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gl.cfg");
    let first = dir.path().join("first");
    std::fs::write(
        &cfg,
        format!(
            "# Ginzburg-Landau, coarse\nproblem = ginzburg-landau\nn = 32\nh = 0.1\ntspan = 0 1\nscheme = lirk4\n\
             snapshots = 0.5, 1\nout = {}\n",
            first.display()
        ),
    )
    .unwrap();
    cli(&["run", "--config", cfg.to_str().unwrap(), "--h", "0.05"]).unwrap();
    let m = manifest(&first);
    assert_eq!(m["h"], 0.05);
    assert_eq!(m["steps"], 20);
    assert_eq!(m["snapshots"].as_array().unwrap().len(), 2);

    let second = dir.path().join("second");
    cli(&[
        "run",
        "--config",
        first.join("config.txt").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ])
    .unwrap();
    for name in ["snapshot_0000.bin", "snapshot_0001.bin"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
    let file = SnapshotFile::load(&second.join("snapshot_0001.bin")).unwrap();
    assert!(file.complex);
    let real = dir.path().join("real");
    cli(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--problem",
        "allen-cahn",
        "--out",
        real.to_str().unwrap(),
    ])
    .unwrap();
    assert!(
        !SnapshotFile::load(&real.join("snapshot_0000.bin"))
            .unwrap()
            .complex
    );
}

#[test]
fn custom_problem_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], sub: &str| {
        let out = dir.path().join(sub);
        let mut argv = vec![
            "run",
            "--n",
            "32",
            "--h",
            "0.05",
            "--tspan",
            "0",
            "0.5",
            "--scheme",
            "etdrk4-eig",
        ];
        argv.extend_from_slice(extra);
        argv.extend(["--out", out.to_str().unwrap()]);
        cli(&argv).unwrap();
        std::fs::read(out.join("snapshot_0000.bin")).unwrap()
    };
    let builtin = run(&["--problem", "nls"], "builtin");
    let custom = run(
        &[
            "--alpha",
            "1i",
            "--nonlinearity",
            "i*|u|^2*u",
            "--initial",
            "nls",
        ],
        "custom",
    );
    // identical dynamics; only the problem hash in the header differs
    assert_eq!(builtin.len(), custom.len());
    assert_ne!(builtin[32..40], custom[32..40]);
    let body = |b: &[u8]| b[40..].to_vec();
    let (a, b) = (body(&builtin), body(&custom));
    let worst = a
        .chunks(8)
        .zip(b.chunks(8))
        .map(|(x, y)| {
            (f64::from_le_bytes(x.try_into().unwrap()) - f64::from_le_bytes(y.try_into().unwrap()))
                .abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst:e}");
}

fn strip_timings(csv: &str) -> String {
    csv.lines()
        .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn converge_writes_deterministic_csv() {
    let args = [
        "converge",
        "--problem",
        "heat",
        "--l",
        "4",
        "--n",
        "32",
        "--tspan",
        "0",
        "1",
        "--schemes",
        "imex-bdf4",
        "lirk4",
        "--hs",
        "1/25",
        "1/50",
        "1/100",
        "1/200",
    ];
    let (first, slopes) = cli(&args).unwrap();
    let (second, _) = cli(&args).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(
        lines[0],
        "scheme,h,h_over_T,E,wall_seconds,precompute_seconds"
    );
    assert_eq!(lines.len(), 9);
    assert!(
        lines[1].starts_with("imex-bdf4,0.005,0.005,"),
        "{}",
        lines[1]
    );
    assert_eq!(strip_timings(&first), strip_timings(&second));
    for line in slopes.lines() {
        let order: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!((order - 4.0).abs() <= 0.2, "{line}");
    }
}

#[test]
fn converge_to_file_with_reference_solution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ac.csv");
    cli(&[
        "converge",
        "--problem",
        "allen-cahn",
        "--n",
        "32",
        "--tspan",
        "0",
        "0.2",
        "--schemes",
        "lirk4",
        "--hs",
        "0.02",
        "0.01",
        "--reference",
        "eig-half-step",
        "--output",
        path.to_str().unwrap(),
    ])
    .unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    let e: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(e[0] < e[1], "{e:?}");
}

fn write_snapshot(
    dir: &Path,
    name: &str,
    spec: GridSpec,
    f: impl Fn(usize, usize) -> C64,
) -> std::path::PathBuf {
    let samples = restrict(&dfsphere::ValueGrid::from_fn(spec, f));
    let path = dir.join(name);
    SnapshotFile::from_samples(&samples, 0.0, 0)
        .save(&path)
        .unwrap();
    path
}

#[test]
fn constant_snapshot_renders_uniformly() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::square(16).unwrap();
    let path = write_snapshot(dir.path(), "one.bin", spec, |_, _| C64::new(1.0, 0.0));
    let (img, out) = render_file(&path, None, 1).unwrap();
    assert_eq!(out, dir.path().join("one.ppm"));
    assert_eq!((img.width, img.height), (16, 9));
    assert!(img.pixels.iter().all(|p| *p == img.pixels[0]));
    let bytes = std::fs::read(&out).unwrap();
    assert!(bytes.starts_with(b"P6\n16 9\n255\n"));
    assert_eq!(bytes.len(), 12 + 16 * 9 * 3);
}

#[test]
fn zonal_harmonic_renders_as_symmetric_bands() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::square(32).unwrap();
    let values = Transform::new(spec).to_values(&spherical_harmonic(2, 0, spec).unwrap());
    let path = write_snapshot(dir.path(), "y20.bin", spec, |i, j| values[(i, j)]);
    let (img, _) = render_file(&path, Some(&dir.path().join("y20.ppm")), 1).unwrap();
    for y in 0..img.height {
        for x in 0..img.width {
            assert_eq!(img.pixel(x, y), img.pixel(0, y), "row {y} is not constant");
            assert_eq!(
                img.pixel(x, y),
                img.pixel(x, img.height - 1 - y),
                "row {y} is not mirrored"
            );
        }
    }
    assert_ne!(img.pixel(0, 0), img.pixel(0, img.height / 2));
    let (big, _) = render_file(&path, Some(&dir.path().join("big.ppm")), 4).unwrap();
    assert_eq!((big.width, big.height), (128, 65));
}

#[test]
fn ginzburg_landau_snapshot_renders_nonuniformly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    cli(&[
        "run",
        "--problem",
        "ginzburg-landau",
        "--n",
        "128",
        "--h",
        "0.1",
        "--tspan",
        "0",
        "10",
        "--scheme",
        "lirk4",
        "--out",
        out,
        "--formats",
        "bin,ppm",
    ])
    .unwrap();
    let (img, _) = render_file(
        &dir.path().join("snapshot_0000.bin"),
        Some(&dir.path().join("gl.ppm")),
        1,
    )
    .unwrap();
    assert_eq!((img.width, img.height), (128, 65));
    let distinct: std::collections::HashSet<_> = img.pixels.iter().collect();
    assert!(distinct.len() > 50, "{} colours", distinct.len());
    assert_eq!(
        std::fs::read(dir.path().join("gl.ppm")).unwrap(),
        std::fs::read(dir.path().join("snapshot_0000.ppm")).unwrap()
    );
}

#[test]
fn diagnose_reports_a_nonpositive_real_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let eig_path = dir.path().join("eig.csv");
    let (out, _) = cli(&[
        "diagnose",
        "--n",
        "16",
        "--eigenvalues",
        eig_path.to_str().unwrap(),
    ])
    .unwrap();
    let d: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(d["all_real"], true);
    assert_eq!(d["all_nonpositive"], true);
    assert!(d["max_abs_eig"].as_f64().unwrap() > 1e3);
    assert!(d["cond_v"].as_f64().unwrap() >= 1.0);
    assert_eq!(
        std::fs::read_to_string(&eig_path).unwrap().lines().count(),
        1 + 16 * 16
    );

    let (out, _) = cli(&["diagnose", "--problem", "allen-cahn", "--n", "16"]).unwrap();
    let scaled: Value = serde_json::from_str(&out).unwrap();
    let ratio = scaled["max_abs_eig"].as_f64().unwrap() / d["max_abs_eig"].as_f64().unwrap();
    assert!((ratio - 0.01).abs() < 1e-12);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let run = |threads: &str| {
        binary()
            .env("DFSPHERE_THREADS", threads)
            .args(["diagnose", "--n", "8"])
            .output()
            .unwrap()
    };
    assert!(run("2").status.success());
    let bad = run("zero");
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("DFSPHERE_THREADS"));
}

#[test]
fn round_trip_of_doubled_function_through_snapshot() {
    let spec = GridSpec::square(16).unwrap();
    let f = dfsphere::dfs::SphereFunction::from_fn(|lam, th| {
        C64::new(th.cos() + lam.sin() * th.sin(), 0.0)
    });
    let samples = restrict(&double_up(&f, spec));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    SnapshotFile::from_samples(&samples, 0.5, 7)
        .save(&path)
        .unwrap();
    let back = SnapshotFile::load(&path).unwrap();
    for r in 0..back.rows {
        for c in 0..back.cols {
            let (th, lam) = (samples.theta[r], samples.lambda[c]);
            assert!((back.get(r, c).re - (th.cos() + lam.sin() * th.sin())).abs() < 1e-14);
        }
    }
}
