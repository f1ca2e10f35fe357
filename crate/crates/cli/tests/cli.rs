use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ioncavity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(dir: &Path, args: &[&str]) -> Output {
    let mut full = vec!["--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Column `name` of a CSV file, skipping `#` comment lines.
fn column(path: &Path, name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().to_owned())
        .collect()
}

#[test]
fn critical_frequency_of_the_four_ion_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig4b");
    let out = run_into(dir.path(), &["critical", "--config", cfg.to_str().unwrap()]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("omega_crit/2pi = 2.03"), "{stdout}");
    let mhz: f64 = column(&dir.path().join("critical.csv"), "omega_crit_over_2pi_mhz")[0]
        .parse()
        .unwrap();
    assert!((mhz - 2.04).abs() < 0.01, "{mhz}");
}

#[test]
fn dark_cavity_leaves_the_chain_on_axis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig4b");
    run_into(
        dir.path(),
        &[
            "equilibrium",
            "--config",
            cfg.to_str().unwrap(),
            "--power",
            "0",
        ],
    );
    let xs = column(&dir.path().join("equilibrium.csv"), "x_m");
    assert_eq!(xs.len(), 4);
    for x in xs {
        assert!(x.parse::<f64>().unwrap().abs() < 1e-15, "{x}");
    }
}

#[test]
fn spectrum_peaks_match_the_coupled_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig7b");
    let modes_dir = dir.path().join("modes");
    let spec_dir = dir.path().join("spectrum");
    run_into(&modes_dir, &["modes", "--config", cfg.to_str().unwrap()]);
    run_into(&spec_dir, &["spectrum", "--config", cfg.to_str().unwrap()]);

    let modes = modes_dir.join("modes.csv");
    let coupled: BTreeSet<String> = column(&modes, "mode")
        .into_iter()
        .zip(column(&modes, "coupled"))
        .filter(|(_, c)| c == "true")
        .map(|(m, _)| m)
        .collect();
    let peaks: BTreeSet<String> = column(&spec_dir.join("peaks.csv"), "mode")
        .into_iter()
        .collect();
    let expected: BTreeSet<String> = ["2", "4", "5", "8"].map(String::from).into();
    assert_eq!(coupled, expected);
    assert_eq!(peaks, expected);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig4b");
    let args = [
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--points",
        "30",
        "--p-min",
        "0.02",
        "--p-max",
        "0.3",
    ];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_into(&a, &args);
    run_into(&b, &args);
    for file in ["branches.csv", "positions.csv", "hysteresis.csv"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn tables_carry_the_manifest_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig6");
    run_into(
        dir.path(),
        &["steadystate", "--config", cfg.to_str().unwrap()],
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let hash = manifest["hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let csv = std::fs::read_to_string(dir.path().join("occupations.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        format!("# manifest sha256 {hash}")
    );
    assert!(manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "occupations.csv"));
}

#[test]
fn json_format_mirrors_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig6");
    run_into(
        dir.path(),
        &[
            "--format",
            "json",
            "steadystate",
            "--config",
            cfg.to_str().unwrap(),
        ],
    );
    let v: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("occupations.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert!(!dir.path().join("occupations.csv").exists());
}

#[test]
fn plot_flag_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("fig6");
    run_into(
        dir.path(),
        &["--plot", "steadystate", "--config", cfg.to_str().unwrap()],
    );
    let svgs: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "svg"))
        .collect();
    assert!(!svgs.is_empty());
    let text = std::fs::read_to_string(svgs[0].path()).unwrap();
    assert!(text.starts_with("<svg"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["critical"]).status.code(), Some(2));
}

#[test]
fn physics_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    // Axial confinement stronger than transverse: no linear chain exists.
    std::fs::write(
        &cfg,
        "n_ions = 4\nomega_x_mhz = 0.5\nomega_y_mhz = 1.0\nwaist_um = 4.1\n\
         kappa_mhz = 1.0\ndelta_0_mhz = 500.0\ngamma_mhz = 10.0\ncooperativity = 3.0\n",
    )
    .unwrap();
    let out = run(&[
        "modes",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "linear",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().any(|l| l.starts_with("error:")), "{stderr}");
}

#[test]
fn missing_config_file_is_an_error() {
    let out = run(&["critical", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(1));
}
