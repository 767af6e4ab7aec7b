use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hessmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hessmin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn report_value(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .map(str::to_string)
}

#[test]
fn solve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "n = 2\nN = 65\np = 2\nboundary = \"saddle\"\n");
    let out_dir = dir.path().join("out");
    let out = hessmin(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(out_dir.join("report.txt")).unwrap();
    let beta: f64 = report_value(&report, "beta").unwrap().parse().unwrap();
    assert!((beta - 2.0).abs() < 0.1, "{beta}");
    assert!(fs::read_to_string(out_dir.join("profile.csv")).unwrap().starts_with("r,phi,sigma\n"));
    assert!(fs::read_to_string(out_dir.join("minimizer.field")).unwrap().starts_with("HESSMIN-FIELD 1\n"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "n = 2\nN = 17\np = 2\nboundary = \"cubic\"\nseed = 4\ninit = \"seeded-random\"\n",
    );
    let out = hessmin(&["--seed", "11", "solve", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_value(&String::from_utf8_lossy(&out.stdout), "seed").as_deref(), Some("11"));
}

#[test]
fn exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let bad_p = write_config(d, "p.toml", "n = 2\nN = 17\np = 1.5\nboundary = \"saddle\"\n");
    let out = hessmin(&["solve", "--config", &bad_p]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));

    let malformed = write_config(d, "m.toml", "n = = 2\n");
    assert_eq!(code(&hessmin(&["solve", "--config", &malformed])), 2);

    // |D²g|^p overflows for this coefficient, so the first energy is infinite.
    let overflow = write_config(d, "o.toml", "n = 2\nN = 17\np = 2\nboundary = [[1e200, 4, 0]]\n");
    assert_eq!(code(&hessmin(&["solve", "--config", &overflow])), 3);

    let off_center = write_config(d, "c.toml", "n = 2\nN = 17\np = 2\nboundary = \"saddle\"\ncenter = [0.8, 0.0]\n");
    assert_eq!(code(&hessmin(&["solve", "--config", &off_center])), 4);

    let missing = d.join("nope.toml");
    assert_eq!(code(&hessmin(&["solve", "--config", missing.to_str().unwrap()])), 5);

    let blocker = d.join("blocker");
    fs::write(&blocker, "").unwrap();
    let ok = write_config(d, "ok.toml", "n = 2\nN = 17\np = 2\nboundary = \"saddle\"\n");
    let out = hessmin(&["solve", "--config", &ok, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 5);
}

#[test]
fn oracle_is_p2_only() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), "a.toml", "n = 2\nN = 17\np = 2\nboundary = \"cubic\"\n");
    let out = hessmin(&["oracle", "--config", &ok, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("oracle.field").exists());
    let p3 = write_config(dir.path(), "b.toml", "n = 2\nN = 17\np = 3\nboundary = \"cubic\"\n");
    assert_eq!(code(&hessmin(&["oracle", "--config", &p3])), 2);
}

#[test]
fn diagnose_reads_a_solved_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", "n = 2\nN = 129\np = 2\nboundary = \"saddle\"\n");
    let out = hessmin(&["oracle", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let field = dir.path().join("oracle.field");
    let diag = dir.path().join("diag");
    let out = hessmin(&[
        "diagnose",
        "--field",
        field.to_str().unwrap(),
        "--center",
        "0,0",
        "--rmin",
        "0.1",
        "--rmax",
        "0.4",
        "--levels",
        "5",
        "--out",
        diag.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(diag.join("profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let report = fs::read_to_string(diag.join("report.txt")).unwrap();
    let beta: f64 = report_value(&report, "beta").unwrap().parse().unwrap();
    assert!((beta - 2.0).abs() < 0.05, "{beta}");
}

#[test]
fn lemmas_on_a_power_law_profile() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("r,phi,sigma\n");
    for j in 0..8 {
        let r = 0.4 * 0.75f64.powi(7 - j);
        csv.push_str(&format!("{r:.16e},{:.16e},{:.16e}\n", r.powf(1.5), r * r));
    }
    let path = dir.path().join("profile.csv");
    fs::write(&path, csv).unwrap();
    let args = [
        "lemmas", "--profile", path.to_str().unwrap(), "--c1", "1", "--alpha", "1.5", "--beta", "1", "--mu", "0",
        "--c2", "0", "--sigma", "1", "--out", dir.path().to_str().unwrap(),
    ];
    let out = hessmin(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let verdict = fs::read_to_string(dir.path().join("lemmas.txt")).unwrap();
    assert_eq!(report_value(&verdict, "hypothesis_ok").as_deref(), Some("true"));

    let mut bad = args.to_vec();
    bad[8] = "2";
    assert_eq!(code(&hessmin(&bad)), 4);
}

#[test]
fn selftest_passes() {
    let out = hessmin(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
}
