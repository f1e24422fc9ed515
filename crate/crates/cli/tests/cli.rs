use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heegner-lab"))
        .args(args)
        .env_remove("HEEGNER_LAB_DATA")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn mass_for_ell_11() {
    let o = run(&["mass", "--ell", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "mass = 5/12, expected 5/12, OK");
}

#[test]
fn split_prime_is_a_usage_error() {
    let o = run(&["equidist", "--ell", "13", "--D", "-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("inert"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["mass", "--ell", "11", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn injected_fault_exits_with_violation() {
    assert_eq!(run(&["brandt", "--ell", "11"]).status.code(), Some(0));
    let o = run(&["brandt", "--ell", "11", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("row 0"));
}

#[test]
fn goursat_reports_five_subgroups() {
    let o = run(&["goursat", "--r", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5 subgroups (expected 5)"), "{}", stdout(&o));
}

fn report(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", &p]);
    let o = run(&full);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    fs::read_to_string(path).unwrap()
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["galois", "--ell", "11", "--D", "-3", "--n", "1,5,17", "--twists", "1,7"];
    let one = report(dir.path(), "a.json", &[&args[..], &["--workers", "1"]].concat());
    let four = report(dir.path(), "b.json", &[&args[..], &["--workers", "4"]].concat());
    assert_eq!(one, four);
    let v: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["command"], "galois");
    assert_eq!(v["config"]["D"], -3);
    assert!(v["config"].get("workers").is_none());
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn csv_output_has_one_row_per_class() {
    let dir = tempfile::tempdir().unwrap();
    let text = report(dir.path(), "c.csv", &["classes", "--ell", "37", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,weight,norm,theta");
    assert_eq!(lines.len(), 4);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# defaults\nell = 13\nlevel = 1\n").unwrap();
    let o = run(&["mass", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "mass = 1/2, expected 1/2, OK");
    let o = run(&["mass", "--config", cfg.to_str().unwrap(), "--ell", "11"]);
    assert_eq!(stdout(&o).trim(), "mass = 5/12, expected 5/12, OK");
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(run(&["mass", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn data_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["ss", "--ell", "11", "--n", "2"];
    let bundled = run(&base);
    assert_eq!(bundled.status.code(), Some(0));
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data");
    for p in [2, 3, 5, 7] {
        let name = format!("phi_{p}.txt");
        fs::copy(data.join(&name), dir.path().join(&name)).unwrap();
    }
    let from_env = Command::new(env!("CARGO_BIN_EXE_heegner-lab"))
        .args(base)
        .env("HEEGNER_LAB_DATA", dir.path())
        .output()
        .unwrap();
    assert_eq!(from_env.stdout, bundled.stdout);
    fs::write(dir.path().join("phi_2.txt"), "2 3\n0 0 1\n").unwrap();
    let broken = Command::new(env!("CARGO_BIN_EXE_heegner-lab"))
        .args(base)
        .env("HEEGNER_LAB_DATA", dir.path())
        .output()
        .unwrap();
    assert_ne!(broken.status.code(), Some(0));
    let flag = run(&[&base[..], &["--modpoly-dir", dir.path().to_str().unwrap()]].concat());
    assert_ne!(flag.status.code(), Some(0));
}

#[test]
fn classpoly_and_select_ell() {
    let o = run(&["classpoly", "--D", "-23", "--ell", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("-23 12771880859375 -5151296875 3491750 1"));
    let o = run(&["select-ell", "--D", "-4"]);
    assert!(stdout(&o).starts_with("ell = 11:"), "{}", stdout(&o));
}
