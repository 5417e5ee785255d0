use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polar-bd"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn construct_small_code() {
    // Bhattacharyya parameters at 0 dB for N=8 give the order 7,6,5,3,4,2,1,0.
    let out = stdout(&run(&[
        "construct",
        "--n",
        "8",
        "--k",
        "2",
        "--id-len",
        "2",
    ]));
    assert_eq!(
        out,
        "N=8\nK=2\nid_mode=1\ninfo=6,7\nid=3,5\nfrozen=0,1,2,4\n"
    );
    let out = stdout(&run(&[
        "construct",
        "--n",
        "8",
        "--k",
        "2",
        "--id-len",
        "2",
        "--id-mode",
        "2",
    ]));
    assert!(out.contains("info=3,5\nid=6,7\n"));
}

#[test]
fn latency_rows() {
    let out = stdout(&run(&["latency", "--decoders", "1,5"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "n_scl_max,worst_cycles,worst_us,average_cycles,average_us"
    );
    // 3 * (583 + 1095) / 2 + 5 + 1095
    assert!(lines[2].starts_with("5,3617,3.617,"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small code\nn = 16\nk=4\nid-len = 2\nid_mode=3\n").unwrap();
    let out = stdout(&run(&["construct", "--config", cfg.to_str().unwrap()]));
    assert!(out.starts_with("N=16\nK=4\nid_mode=3\n"));
    let out = stdout(&run(&[
        "construct",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "32",
    ]));
    assert!(out.starts_with("N=32\n"));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = run(&[
        "simulate",
        "--n1",
        "64",
        "--n2",
        "128",
        "--k",
        "16",
        "--c1",
        "8",
        "--c2",
        "3",
        "--trials",
        "20",
        "--snr-start",
        "1",
        "--snr-stop",
        "2",
        "--snr-step",
        "1",
        "--seed",
        "3",
        "--early-stop",
        "off",
        "--out",
        out.to_str().unwrap(),
    ]);
    stdout(&o);
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("snr_db,trials,bler,mdr,far_type1"));
    assert!(lines[1].starts_with("1.0000,20,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Eb/N0"));
}

#[test]
fn bad_parameters_exit_nonzero() {
    for args in [
        &["construct", "--n", "12"][..],
        &["construct", "--n", "64", "--k", "60"],
        &["construct", "--id-mode", "4"],
        &["latency", "--decoders", "0"],
        &["simulate", "--l1", "8", "--lmax", "8", "--trials", "1"],
        &["simulate", "--early-stop", "maybe", "--trials", "1"],
        &["simulate", "--c1", "7", "--trials", "1"],
        &["simulate", "--trials", "0"],
        &["construct", "--config", "/nonexistent/file"],
    ] {
        let o = run(args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty());
    }
}
