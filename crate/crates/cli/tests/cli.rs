use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soliton-squeeze"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const SMALL: [&str; 4] = ["--set", "grid.n=128", "--set", "grid.length=20"];

#[test]
fn help_lists_all_keys() {
    let out = bin().args(["squeeze", "--help"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["mu", "delta1", "grid.n", "omega.points", "lof.kind", "detector.sigma", "sweep.key", "oracle.dt"] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn eigs_at_the_tangent_bifurcation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["eigs", "--set", "mu=1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("goldstone residual"));
    assert!(stdout.contains("momentum residual"));
    let table = fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
    assert!(table.contains("# mu = 1\n"));
    let lam: Vec<(f64, f64)> = table
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(lam.len(), 1024);
    for target in [0.0, -2.0] {
        let close = lam.iter().filter(|(re, im)| (re - target).abs() < 1e-6 && im.abs() < 1e-6).count();
        assert!(close >= 2, "{close} eigenvalues at {target}");
    }
    let modes = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    assert!(modes.contains("goldstone,") && modes.contains("momentum,"));
}

#[test]
fn below_tangent_bifurcation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["eigs", "--set", "mu=0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("below tangent bifurcation"));
    assert!(!dir.path().join("eigenvalues.csv").exists());
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["squeeze", "--set", "gamma=3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nmu = 1.4\ngrid.n = 256\ngrid.length = 20\nomega.points = 11\n").unwrap();
    let out = bin()
        .args(["squeeze", "--config"])
        .arg(&cfg)
        .args(["--set", "delta1=1.6", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("squeeze.csv")).unwrap();
    assert!(text.contains("# mu = 1.4\n") && text.contains("# delta1 = 1.6\n"));
    assert_eq!(data_rows(&text).len(), 11);
}

#[test]
fn momentum_spectrum_is_the_lorentzian() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["squeeze", "--set", "lof.kind=momentum", "--set", "mu=1.2", "--set", "delta1=0.8"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("squeeze.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 401);
    for r in rows {
        assert!((r[1] + 1.0 / (1.0 + r[0] * r[0] / 4.0)).abs() < 1e-6, "{r:?}");
    }
    // 17 significant digits
    let first = text.lines().find(|l| !l.starts_with('#') && !l.starts_with("omega")).unwrap();
    assert_eq!(first.split(',').nth(1).unwrap().split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
}

#[test]
fn every_lof_kind_runs() {
    for kind in ["plane-wave", "gh1", "w3", "soliton"] {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec!["squeeze", "--set", "omega.points=6"];
        args.extend(SMALL);
        let set = format!("lof.kind={kind}");
        args.extend(["--set", set.as_str()]);
        let out = run(&args, dir.path());
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let rows = data_rows(&fs::read_to_string(dir.path().join("squeeze.csv")).unwrap());
        assert!(rows.iter().all(|r| r[1] >= -1.0 - 1e-6), "{kind}");
    }
}

#[test]
fn hopf_sum_spectrum_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["squeeze", "--set", "lof.kind=hopf-sum", "--set", "delta1=0.5", "--set", "mu=1.05", "--set", "omega.points=5"];
    let out = run(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("squeeze.csv")).unwrap();
    assert!(text.contains("# lof = partner-of(hopf-pair)\n"));
    assert!(data_rows(&text).iter().all(|r| r[1] >= -1.0 - 1e-6));
}

#[test]
fn detector_position_sweep_peaks_at_the_center() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "squeeze",
            "--set", "lof.kind=plane-wave",
            "--set", "omega.max=0",
            "--set", "omega.points=1",
            "--set", "detector.sigma=1.5",
            "--set", "sweep.key=detector.x0",
            "--set", "sweep.from=-3",
            "--set", "sweep.to=3",
            "--set", "sweep.points=7",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("squeeze.csv")).unwrap();
    assert!(text.contains("detector.x0,omega,S,theta\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 7);
    let best = rows.iter().min_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    assert_eq!(best[0], 0.0);
    // symmetric in x0
    assert!((rows[0][2] - rows[6][2]).abs() < 1e-6);
}

#[test]
fn detector_size_sweep_is_not_monotonic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "squeeze",
            "--set", "lof.kind=plane-wave",
            "--set", "omega.max=0",
            "--set", "omega.points=1",
            "--set", "detector.sigma=1",
            "--set", "sweep.key=detector.sigma",
            "--set", "sweep.from=1.5",
            "--set", "sweep.to=3",
            "--set", "sweep.points=4",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&fs::read_to_string(dir.path().join("squeeze.csv")).unwrap());
    let s: Vec<f64> = rows.iter().map(|r| r[2].abs()).collect();
    assert!(s.windows(2).any(|w| w[1] < w[0]), "{s:?}");
}

#[test]
fn oracle_rejects_a_large_step() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["oracle", "--set", "oracle.dt=0.5"];
    args.extend(SMALL);
    let out = run(&args, dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_is_deterministic_and_agrees() {
    let args = {
        let mut a = vec!["oracle", "--set", "oracle.n_traj=8", "--set", "oracle.t_total=1000", "--set", "seed=7"];
        a.extend(SMALL);
        a
    };
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o1 = run(&args, d1.path());
    assert!(o1.status.success(), "{}", String::from_utf8_lossy(&o1.stderr));
    let o2 = run(&args, d2.path());
    assert!(o2.status.success());
    let a = fs::read(d1.path().join("oracle.csv")).unwrap();
    let b = fs::read(d2.path().join("oracle.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("# seed = 7\n"));
    assert!(data_rows(&text).iter().all(|r| r[5].abs() < 4.0));
}

#[test]
fn oracle_default_configuration_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("oracle.csv").exists());
}
