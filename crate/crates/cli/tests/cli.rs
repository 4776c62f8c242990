use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyrig"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("spawn polyrig")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn body(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    let (header, rest) = text.split_once('\n').unwrap();
    assert!(header.starts_with("# polyrig report generated "));
    rest.to_string()
}

fn report(out: &Path) -> toml::Value {
    toml::from_str(&body(&out.join("report.toml"))).unwrap()
}

const SMALL_FLAT: &str = r#"
n = 4
resolutions = [4, 8]
suites = ["algebra", "dec", "faces"]
[polyhedron]
shape = "cube"
[fields]
preset = "flat"
"#;

#[test]
fn flat_all_suites_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&configs().join("flat_all.toml"), tmp.path(), &["--resolution", "4", "--resolution", "8", "--resolution", "16"]);
    assert!(o.status.success(), "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["summary"]["pass"].as_bool(), Some(true));
    assert_eq!(r["summary"]["suites"].as_array().unwrap().len(), 7);
    assert_eq!(r["environment"]["grid"]["resolutions"].as_array().unwrap().len(), 3);
    for c in r["check"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let v = c["value"].as_float().unwrap();
        let residual = c["comparison"].as_str() == Some("<=") && !name.contains("hausdorff");
        if residual {
            assert!(v <= 1e-10, "{name} = {v}");
        }
        if name.contains("margin") || name.starts_with("tilted_dec") {
            assert!(v.abs() <= 1e-10, "{name} = {v}");
        }
    }
}

#[test]
fn hyperbolic_dec_tables_show_second_order() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&configs().join("hyperbolic_dec.toml"), tmp.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mu = fs::read_to_string(tmp.path().join("tables/dec_mu_error.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(mu.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["resolution", "h", "residual", "order"]);
    let orders: Vec<f64> = rdr
        .records()
        .filter_map(|r| r.unwrap()[3].parse().ok())
        .collect();
    assert_eq!(orders.len(), 2);
    assert!(orders.iter().all(|&p| p >= 1.7), "{orders:?}");
    let res: Vec<usize> = csv::Reader::from_reader(mu.as_bytes())
        .records()
        .map(|r| r.unwrap()[0].parse().unwrap())
        .collect();
    assert_eq!(res, vec![16, 32, 64]);
}

#[test]
fn tilted_dec_violation_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&configs().join("tilted_dec_violation.toml"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(tmp.path());
    assert_eq!(r["summary"]["pass"].as_bool(), Some(false));
    let failed: Vec<&toml::Value> =
        r["check"].as_array().unwrap().iter().filter(|c| c["pass"].as_bool() == Some(false)).collect();
    let tilted = failed
        .iter()
        .find(|c| c["name"].as_str().unwrap().starts_with("tilted_dec_face_"))
        .expect("a failing tilted check");
    let loc = tilted["location"].as_str().unwrap();
    assert!(loc.contains("face=") && loc.contains("at=("), "{loc}");
    assert!(tilted["value"].as_float().unwrap() < 0.0);
    let dec = r["check"].as_array().unwrap().iter().find(|c| c["name"].as_str() == Some("dec_margin")).unwrap();
    assert_eq!(dec["pass"].as_bool(), Some(true));
}

#[test]
fn reports_are_deterministic_apart_from_header() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_FLAT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&cfg, &a, &["--seed", "11"]).status.success());
    assert!(run(&cfg, &b, &["--seed", "11"]).status.success());
    assert_eq!(body(&a.join("report.toml")), body(&b.join("report.toml")));
    for entry in fs::read_dir(a.join("tables")).unwrap() {
        let p = entry.unwrap().path();
        let q = b.join("tables").join(p.file_name().unwrap());
        assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }
    assert_eq!(report(&a)["environment"]["seed"].as_integer(), Some(11));
}

#[test]
fn suite_flag_replaces_configured_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_FLAT);
    let o = run(&cfg, tmp.path(), &["--suite", "algebra"]);
    assert!(o.status.success());
    let r = report(tmp.path());
    let suites = r["summary"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert!(r["check"].as_array().unwrap().iter().all(|c| c["suite"].as_str() == Some("algebra")));
}

#[test]
fn unsupported_suite_is_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n = 3\nresolutions = [4, 8]\nsuites = [\"sl\"]\n[polyhedron]\nshape = \"simplex\"\n[fields]\npreset = \"flat\"\n",
    );
    let o = run(&cfg, tmp.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["summary"]["skipped"].as_array().unwrap().len(), 1);
}

fn config_error(text: &str) -> String {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), text);
    let o = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("out/report.toml").exists());
    stderr(&o)
}

#[test]
fn malformed_configs_name_the_key() {
    let e = config_error(&format!("{SMALL_FLAT}\nbogus_key = 1\n"));
    assert!(e.contains("bogus_key"), "{e}");
    let e = config_error(&SMALL_FLAT.replace("[4, 8]", "[8, 4]"));
    assert!(e.contains("resolutions"), "{e}");
    let e = config_error(&SMALL_FLAT.replace("n = 4", "n = 4\nn0 = [1.0, 1.0, 0.0, 0.0]"));
    assert!(e.contains("n0"), "{e}");
    let e = config_error(&SMALL_FLAT.replace("n = 4", "n = 4\nparity = \"odd\""));
    assert!(e.contains("parity"), "{e}");
    let e = config_error(&SMALL_FLAT.replace("\"faces\"", "\"nonsense\""));
    assert!(e.contains("suites") && e.contains("nonsense"), "{e}");
    let e = config_error(&SMALL_FLAT.replace("\"cube\"", "\"dodecahedron\""));
    assert!(e.contains("dodecahedron"), "{e}");
    let e = config_error(&SMALL_FLAT.replace("\"flat\"", "\"flat\"\nparams = { q_matrix = [[1.0]] }"));
    assert!(e.contains("fields"), "{e}");
    let e = config_error("n = 4\n");
    assert!(e.contains("polyhedron"), "{e}");
}

#[test]
fn explain_prints_formulas() {
    for (name, needle) in [("sl", "D̂σ"), ("tilt-dec", "cos θ_ℓ"), ("rigidity", "R̂_ijkl"), ("dec", "μ")] {
        let o = bin().args(["explain", name]).output().unwrap();
        assert!(o.status.success());
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with(name), "{text}");
        assert!(text.contains(needle), "{name}: {text}");
    }
    for name in polyrig_cli::explain::names() {
        assert!(bin().args(["explain", name]).output().unwrap().status.success());
    }
}

#[test]
fn explain_unknown_lists_valid_names() {
    let o = bin().args(["explain", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    for name in ["algebra", "tilt-dec", "sl-inequality", "boundary-2ff"] {
        assert!(e.contains(name), "{e}");
    }
}
