use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_homcomb");

fn homcomb(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("HOMCOMB_CONFIG").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let head = r.headers().unwrap().iter().map(str::to_owned).collect();
    let body = r.records().map(|x| x.unwrap().iter().map(str::to_owned).collect()).collect();
    (head, body)
}

fn col(body: &[Vec<String>], i: usize) -> Vec<f64> {
    body.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn predict_default_matches_golden() {
    let o = homcomb(&["predict"]);
    assert_eq!(o.status.code(), Some(0));
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/predict_default.csv")).unwrap();
    assert_eq!(stdout(&o), golden);
}

#[test]
fn golden_agrees_with_hand_formula() {
    // 0-RT scan: f = e^{-x}(1 + x)·max(0, 1 − πδν|2Δt|/2.783), x = 2πγ|Δt|
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/predict_default.csv")).unwrap();
    let (head, body) = rows(&golden);
    assert_eq!(head, ["delay_s", "coarse_rt", "phase_rad", "p_coincidence", "p_postselected", "singles1", "singles2"]);
    for r in &body {
        let dt: f64 = r[0].parse().unwrap();
        let x = 2.0 * PI * 666e3 * dt.abs();
        let h = (1.0 - PI * 100e9 * 2.0 * dt.abs() / 2.783).max(0.0);
        let f = (-x).exp() * (1.0 + x) * h;
        let p: f64 = r[4].parse().unwrap();
        assert!((p - 0.5 * (1.0 - f)).abs() < 1e-12, "{dt}: {p}");
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.5 * p);
    }
}

#[test]
fn emitted_csv_reparses_identically() {
    let o = homcomb(&["predict", "--coarse", "1,84", "--points", "41", "--phase", "0,1.1"]);
    let (_, body) = rows(&stdout(&o));
    assert_eq!(body.len(), 2 * 2 * 41);
    for r in &body {
        for cell in r {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(&v.to_string(), cell);
        }
    }
}

#[test]
fn predict_examples() {
    let (_, body) = rows(&stdout(&homcomb(&["predict", "--coarse", "84", "--points", "601"])));
    let min = col(&body, 4).into_iter().fold(f64::INFINITY, f64::min);
    assert!((min - 0.2135).abs() < 1e-4, "{min}");

    // half-RT singles vs phase at the dip centre
    let phases: Vec<String> = (0..32).map(|i| (2.0 * PI * i as f64 / 32.0).to_string()).collect();
    let o = homcomb(&["predict", "--coarse", "1", "--from-s", "0", "--to-s", "0", "--points", "1", "--phase", &phases.join(",")]);
    let (_, body) = rows(&stdout(&o));
    let s1 = col(&body, 5);
    let (lo, hi) = s1.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(((hi - lo) / (hi + lo) - 0.99996).abs() < 1e-5);

    // locked 0-RT dip has unit visibility
    let (_, body) = rows(&stdout(&homcomb(&["predict"])));
    let p = col(&body, 3);
    let max = p.iter().cloned().fold(0.0, f64::max);
    let min = p.iter().cloned().fold(1.0, f64::min);
    assert_eq!((max - min) / max, 1.0);
}

#[test]
fn table_modes() {
    let (head, body) = rows(&stdout(&homcomb(&["table", "--paper"])));
    assert_eq!(head, ["delay_rt", "v_theory_percent"]);
    let want = [100.0, 99.99, 99.94, 99.77, 99.12, 59.7, 57.3];
    for (v, w) in col(&body, 1).into_iter().zip(want) {
        assert!((v - w).abs() <= 0.05);
    }
    assert_eq!(stdout(&homcomb(&["table"])), stdout(&homcomb(&["table", "--paper"])));
    assert_eq!(stdout(&homcomb(&["table", "--delays", ""])), "delay_rt,v_theory_percent\n");
    let (_, body) = rows(&stdout(&homcomb(&["table", "--delays", "1/2,84"])));
    assert_eq!(body[0][0], "0.5");
    // the closed form gives 21.3 % at 84 T
    assert_eq!(body[1][1], "21.292");
}

#[test]
fn exit_codes() {
    assert_eq!(homcomb(&[]).status.code(), Some(1));
    assert_eq!(homcomb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(homcomb(&["predict", "--points", "0"]).status.code(), Some(1));
    assert_eq!(homcomb(&["table", "--delays", "x"]).status.code(), Some(1));
    assert_eq!(homcomb(&["simulate"]).status.code(), Some(1));
    assert_eq!(homcomb(&["--help"]).status.code(), Some(0));
    assert_eq!(homcomb(&["analyze", "/nonexistent/file.bin"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(homcomb(&["--config", cfg.to_str().unwrap(), "table"]).status.code(), Some(1));
}

#[test]
fn config_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "gamma_cavity_hz = 1.332e6\n").unwrap();
    let plain = homcomb(&["table", "--delays", "42"]);
    let o = Command::new(BIN).args(["table", "--delays", "42"]).env("HOMCOMB_CONFIG", &cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(stdout(&o), stdout(&plain));
    let missing = Command::new(BIN).args(["table"]).env("HOMCOMB_CONFIG", dir.path().join("nope")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> (String, Output) {
    let path = dir.join(name).display().to_string();
    let mut args = vec!["simulate", "-o", &path, "--jitter-s", "0"];
    args.extend_from_slice(extra);
    let o = homcomb(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    (path, o)
}

#[test]
fn simulate_is_deterministic_and_writes_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, out) = simulate(dir.path(), "a.bin", &["--seed", "9", "--duration-s", "0.3"]);
    let (b, _) = simulate(dir.path(), "b.bin", &["--seed", "9", "--duration-s", "0.3"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(stdout(&out).contains("seed=9\n"));
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2);
}

#[test]
fn zero_duration_file_has_header_and_no_events() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = simulate(dir.path(), "empty.bin", &["--duration-s", "0"]);
    let bytes = std::fs::read(&p).unwrap();
    assert_eq!(&bytes[..8], b"HOMCOMB\0");
    assert_eq!(&bytes[bytes.len() - 8..], &0u64.to_le_bytes());
    let o = homcomb(&["analyze", &p]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_config_reaches_count_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/revival_42t.conf");
    let out = dir.path().join("run.bin");
    let o = homcomb(&["--config", cfg.to_str().unwrap(), "simulate", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for line in stdout(&o).lines().filter(|l| l.starts_with("events_ch")) {
        let n: f64 = line.split('=').nth(1).unwrap().parse().unwrap();
        assert!((n - 3e5).abs() <= 3.0 * 3e5f64.sqrt(), "{line}");
    }
}

#[test]
fn csv_event_files_analyze_like_binary() {
    let dir = tempfile::tempdir().unwrap();
    let mut bin = Vec::new();
    let mut csv = Vec::new();
    for (i, off) in ["0", "-5e-11", "3e-11", "8e-11"].iter().enumerate() {
        let seed = (i + 1).to_string();
        let common = ["--seed", seed.as_str(), "--duration-s", "0.5", "--phase", "0"];
        let int = format!("--intermediate-s={off}");
        let mut a = common.to_vec();
        a.push(&int);
        bin.push(simulate(dir.path(), &format!("f{i}.bin"), &a).0);
        csv.push(simulate(dir.path(), &format!("f{i}.csv"), &a).0);
    }
    let run = |files: &[String]| {
        let mut args = vec!["analyze"];
        args.extend(files.iter().map(String::as_str));
        let o = homcomb(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let (_, body) = rows(&stdout(&o));
        col(&body, 6)
    };
    assert_eq!(run(&bin), run(&csv));
}

#[test]
fn corrupt_files_are_skipped_then_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, b"HOMCOMB\0\x07\x00garbage").unwrap();
    let bad = bad.to_str().unwrap().to_owned();
    let mut good = Vec::new();
    for (i, off) in ["0", "-5e-11", "3e-11", "8e-11"].iter().enumerate() {
        let int = format!("--intermediate-s={off}");
        good.push(simulate(dir.path(), &format!("g{i}.bin"), &["--seed", &i.to_string(), "--duration-s", "0.3", &int]).0);
    }
    let mut args = vec!["analyze", bad.as_str()];
    args.extend(good.iter().map(String::as_str));
    let o = homcomb(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("skipped"));
    assert_eq!(rows(&stdout(&o)).1.len(), 4);
    let o = homcomb(&["analyze", &bad, &bad]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn half_round_trip_odd_windows() {
    // NOON pairs share the odd windows; the predicted HH/VV share is removed
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, off) in ["0", "-5e-11", "3e-11", "8e-11"].iter().enumerate() {
        let int = format!("--intermediate-s={off}");
        let seed = (20 + i).to_string();
        files.push(simulate(dir.path(), &format!("h{i}.bin"), &["--coarse", "1", "--phase", "0.9", "--seed", &seed, "--duration-s", "7.5", &int]).0);
    }
    let mut args = vec!["analyze", "--parity", "odd"];
    args.extend(files.iter().map(String::as_str));
    let o = homcomb(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, body) = rows(&stdout(&o));
    let (p, sigma, theory) = (col(&body, 6), col(&body, 7), col(&body, 9));
    assert!((p[0] - theory[0]).abs() <= 4.0 * sigma[0], "{} vs {}", p[0], theory[0]);
    for i in 1..4 {
        assert!((p[i] - 0.5).abs() <= 4.0 * sigma[i] + 0.01);
    }
}

#[test]
fn noon_fringe_fit() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for k in 0..10 {
        let phase = (PI * k as f64 / 10.0).to_string();
        files.push(simulate(dir.path(), &format!("n{k}.bin"), &["--coarse", "1", "--intermediate-s=5e-11", "--phase", &phase, "--seed", &k.to_string(), "--duration-s", "0.5"]).0);
    }
    let mut args = vec!["analyze", "--parity", "odd", "--fit-fringe"];
    args.extend(files.iter().map(String::as_str));
    let o = homcomb(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stderr(&o).lines().find(|l| l.starts_with("fringe")).unwrap().to_owned();
    let v: f64 = line.split_whitespace().find_map(|t| t.strip_prefix("visibility=")).unwrap().parse().unwrap();
    // odd windows off the dip: ¼ even-comb share plus ½sin²φ, V = 0.5
    assert!((v - 0.5).abs() < 0.05, "{line}");
    // too few phases for a fit
    let mut args = vec!["analyze", "--fit-fringe"];
    args.extend(files[..4].iter().map(String::as_str));
    assert_eq!(homcomb(&args).status.code(), Some(1));
}
