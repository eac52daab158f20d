use std::path::Path;
use std::process::{Command, Output};

fn sbm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn sbm")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn eta_at_zero_coupling_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbm(&["eta", "--alpha", "0"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let row = text.lines().last().unwrap();
    assert_eq!(row.split(',').nth(2), Some("1.0000000000000000e0"));
    assert!(text.starts_with("# sbm "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(sbm(&["--no-such-flag"], p).status.code(), Some(1));
    assert_eq!(sbm(&["dynamics"], p).status.code(), Some(1));
    assert_eq!(
        sbm(&["eta", "--alpha", "0.3", "--grid-alpha", "0:1"], p).status.code(),
        Some(1)
    );

    let o = sbm(&["eta", "--alpha", "0.3", "--s", "0.5"], p);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("s = 1"));
    let o = sbm(&["bound-state", "--alpha", "0.3", "--epsilon", "0.1"], p);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("epsilon"));
    let o = sbm(&["ground-energy", "--delta", "0.001", "--grid-alpha", "1.1:1.2:2"], p);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("localized"));
    assert_eq!(stderr(&o).lines().count(), 1);

    let o = sbm(&["eta", "--alpha", "0.55", "--max-iter", "3"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("did not converge"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("run.cfg"), "command = bound-state\ndelta = 0.1\nalpha = 0.25\n").unwrap();
    let from_file = sbm(&["--config", "run.cfg", "--out", "a.csv"], p);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    let a = std::fs::read_to_string(p.join("a.csv")).unwrap();
    assert!(a.lines().last().unwrap().split(',').nth(3) == Some("0"));

    let overridden = sbm(&["--config", "run.cfg", "--alpha", "0.55", "--out", "b.csv"], p);
    assert!(overridden.status.success());
    let b = std::fs::read_to_string(p.join("b.csv")).unwrap();
    assert!(b.contains("# alpha = 5.5000000000000004e-1"));
    assert!(b.lines().last().unwrap().split(',').nth(3) == Some("1"));
}

#[test]
fn json_output_round_trips_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let first = sbm(
        &[
            "ground-energy",
            "--grid-alpha",
            "0.4:0.6:9",
            "--format",
            "json",
            "--out",
            "first.json",
        ],
        p,
    );
    assert!(first.status.success(), "{}", stderr(&first));
    let again = sbm(
        &["--config", "first.json", "--format", "json", "--out", "second.json"],
        p,
    );
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(
        std::fs::read(p.join("first.json")).unwrap(),
        std::fs::read(p.join("second.json")).unwrap()
    );
}

#[test]
fn output_is_byte_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let runs: [&[&str]; 3] = [
        &[
            "phase-diagram",
            "--grid-delta",
            "0.01:0.3:6",
            "--grid-alpha",
            "0:1.3:14",
        ],
        &["ground-energy", "--grid-alpha", "0.3:0.7:21"],
        &["dynamics", "--alpha", "0.25", "--tmax", "20"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "4"] {
            let name = format!("run{k}_{jobs}_{}.csv", outputs.len());
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--jobs", jobs, "--out", &name]);
            let o = sbm(&full, p);
            assert!(o.status.success(), "{}", stderr(&o));
            outputs.push(std::fs::read(p.join(&name)).unwrap());
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "run {k} differs");
    }
}

#[test]
fn dynamics_columns_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = sbm(
        &[
            "dynamics",
            "--alpha",
            "0.55",
            "--tmax",
            "5",
            "--out",
            "dyn.csv",
            "--emit-plot",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(p.join("dyn.csv")).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,re_c,im_c,abs_c,omega,gamma,pz,rate_valid");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 251);
    let script = std::fs::read_to_string(p.join("dyn.csv.gp")).unwrap();
    assert!(script.contains("'dyn.csv' using 1:7"));
}

#[test]
fn phase_diagram_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = sbm(
        &[
            "phase-diagram",
            "--grid-delta",
            "0.05:0.2:4",
            "--grid-alpha",
            "0:1.3:14",
            "--out",
            "pd.csv",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = std::fs::read_to_string(p.join("pd.csv")).unwrap();
    assert_eq!(grid.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4 * 14);
    let curves = std::fs::read_to_string(p.join("pd.boundaries.csv")).unwrap();
    assert!(curves.contains("delta,boundary_bs,boundary_dl"));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbm(&["verify"], dir.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}{}", stderr(&o));
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
