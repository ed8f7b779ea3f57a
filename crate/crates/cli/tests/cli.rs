//! Black-box checks of the `srb-sim` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_srb-sim"))
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("srb-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_scenario(dir: &Path) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(
        &path,
        r#"
duration_s = 0.4
seed = 9

[[reference]]
t_s = 0.0
xyz_m = [1.14, 0.0, 0.80]

[[reference]]
t_s = 0.4
xyz_m = [1.10, 0.05, 0.78]
"#,
    )
    .unwrap();
    path
}

#[test]
fn run_metrics_and_plot_round_trip() {
    let dir = work_dir("round-trip");
    let scenario = write_scenario(&dir);
    let trace = dir.join("trace.csv");

    let out = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("400 ticks"));

    let out = bin()
        .args(["metrics", "--trace"])
        .arg(&trace)
        .args(["--d0", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("a_bar"), "{text}");

    let plot = dir.join("f.csv");
    let out = bin()
        .args(["plot-data", "--trace"])
        .arg(&trace)
        .args(["--quantity", "f", "--out"])
        .arg(&plot)
        .output()
        .unwrap();
    assert!(out.status.success());
    let plot_text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot_text.lines().next().unwrap(), "t_s,f");
    assert_eq!(plot_text.lines().count(), 401);

    // unknown quantity is a clean error
    let out = bin()
        .args(["plot-data", "--trace"])
        .arg(&trace)
        .args(["--quantity", "warp", "--out"])
        .arg(dir.join("warp.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = work_dir("determinism");
    let scenario = write_scenario(&dir);
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for out_path in [&a, &b] {
        let out = bin()
            .args(["run", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(out_path)
            .args(["--seed", "5"])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn baseline_flag_changes_the_run() {
    let dir = work_dir("baseline");
    let scenario = write_scenario(&dir);
    let (normal, baseline) = (dir.join("n.csv"), dir.join("b.csv"));
    for (path, extra) in [(&normal, None), (&baseline, Some("--baseline"))] {
        let mut cmd = bin();
        cmd.args(["run", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(path);
        if let Some(flag) = extra {
            cmd.arg(flag);
        }
        assert!(cmd.output().unwrap().status.success());
    }
    assert_ne!(
        std::fs::read(&normal).unwrap(),
        std::fs::read(&baseline).unwrap()
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_scenario_fails_with_field_name() {
    let dir = work_dir("malformed");
    let path = dir.join("bad.toml");
    std::fs::write(&path, "duration_s = \"soon\"\n").unwrap();
    let out = bin()
        .args(["run", "--scenario"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("t.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration_s"));
    std::fs::remove_dir_all(&dir).ok();
}
