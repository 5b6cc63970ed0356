use std::process::{Command, Output};

use iml_core::driver::{execute_with_threads, ExperimentConfig, Format, Operation};

fn iml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iml")).args(args).env_remove("IML_THREADS").output().expect("run iml")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn metric_on_the_polydisc() {
    let o = iml(&["metric", "--domain", "polydisc", "--z", "0,0", "--X", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let row = r.records().next().unwrap().unwrap();
    assert_eq!(&row[5], "2");
    assert_eq!(&row[6], "oracle-exact");
}

#[test]
fn theorem1_on_the_disc_passes() {
    let o = iml(&["verify", "theorem1", "--domain", "unit-disc", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 60);
    for r in rows {
        let k = r["kappa_m"].as_f64().unwrap();
        for key in ["upper", "lower"] {
            assert!((r[key].as_f64().unwrap() / k - 1.0).abs() <= 0.03);
        }
    }
    assert_eq!(v["traces"].as_array().unwrap().len(), 60);
    assert_eq!(v["traces"][0]["levels"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_statuses() {
    assert_eq!(iml(&["metric", "--domain", "annulus", "--X", "1"]).status.code(), Some(3));
    assert_eq!(iml(&["metric", "--domain", "{ kind = \"balanced\" }", "--X", "1,1"]).status.code(), Some(3));
    assert_eq!(iml(&["metric", "--X", "1+"]).status.code(), Some(2));
    assert_eq!(iml(&["metric"]).status.code(), Some(2));
    assert_eq!(iml(&["metric", "--X", "1,2"]).status.code(), Some(2));
    assert_eq!(iml(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(iml(&[]).status.code(), Some(2));
    assert_eq!(iml(&["hull", "--domain", "{ kind = \"balanced\", h = \"euclidean\" }", "--X", "1,1"]).status.code(), Some(0));
    assert_eq!(iml(&["hull", "--domain", "unit-disc", "--X", "1"]).status.code(), Some(3));
}

#[test]
fn malformed_config_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "seed = [oops\n").unwrap();
    let o = iml(&["--config", p.to_str().unwrap(), "metric", "--X", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    std::fs::write(&p, "no_such_key = 1\n").unwrap();
    assert_eq!(iml(&["--config", p.to_str().unwrap(), "metric", "--X", "1"]).status.code(), Some(2));
    std::fs::write(&p, "domain = { kind = \"torus\" }\n").unwrap();
    assert_eq!(iml(&["--config", p.to_str().unwrap(), "metric", "--X", "1"]).status.code(), Some(3));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("report.csv");
    std::fs::write(
        &cfg,
        format!(
            "operation = \"metric\"\nX = \"1,1\"\nout = {:?}\ndomain = {{ kind = \"balanced\", h = \"max-geo\", c = 2.0 }}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = iml(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",2,oracle-exact,"), "{text}");
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("strict.toml");
    std::fs::write(&p, "[check]\ntheorem1_tol = 1e-12\n[verify]\ndirections = 2\nm = [1]\n").unwrap();
    let o = iml(&["--config", p.to_str().unwrap(), "verify", "theorem1", "--domain", "ball"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("false"));
}

#[test]
fn printed_defaults_parse_back() {
    let o = iml(&["--print-defaults"]);
    assert_eq!(o.status.code(), Some(0));
    let cfg = ExperimentConfig::from_toml(&stdout(&o)).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    let text = stdout(&o);
    assert!(text.contains("K = 200") && text.contains("J = 60") && text.contains("[search]"));
}

#[test]
fn output_is_identical_across_worker_counts() {
    let mut cfg = ExperimentConfig::default();
    cfg.verify.directions = 3;
    cfg.verify.prop2_domains = vec!["max-geo".into(), "ball".into()];
    cfg.seed = 17;
    let a = execute_with_threads(Operation::VerifyProp2, &cfg, Some(1)).unwrap();
    let b = execute_with_threads(Operation::VerifyProp2, &cfg, Some(4)).unwrap();
    for f in [Format::Csv, Format::Json] {
        assert_eq!(a.render(f), b.render(f));
    }
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_iml"))
            .args(["derivative", "--domain", "geo-mean", "--X", "1,0.5i", "--m", "2", "--format", "json"])
            .env("IML_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn example3_subcommands() {
    let o = iml(&["example3", "--J", "20", "--K", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let total = text.lines().last().unwrap();
    assert!(total.starts_with("total,chain,"), "{text}");
    let o = iml(&["example3-dump", "--J", "10", "--K", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 100);
    let o = iml(&["example3", "--t0", "0.2", "--t1", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curve_lengths() {
    let o = iml(&["curve-length", "--curve", "segment", "--domain", "unit-disc", "--z", "0", "--w", "0.5", "--mode", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    for row in r.records() {
        let row = row.unwrap();
        let l: f64 = row[2].parse().unwrap();
        assert!((l - 0.5f64.atanh()).abs() < 1e-4, "{row:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("curve.toml");
    std::fs::write(&p, "[curve]\ndoublings = 1\n").unwrap();
    let dom = "{ kind = \"example3\", K = 200, J = 20 }";
    let o = iml(&["--config", p.to_str().unwrap(), "curve-length", "--domain", dom, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    // a single chain between the end points
    assert!(rows[0]["length"].as_f64().unwrap() < 0.02, "{v}");
}

#[test]
fn lempert_and_higher() {
    let o = iml(&["lempert", "--domain", "ball", "--z", "0,0", "--w", "0.3,0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("lempert_star,") && text.contains(",0.5,oracle-exact,"), "{text}");
    let o = iml(&["higher", "--domain", "max-geo", "--X", "1,1", "--m", "3"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().last().unwrap().contains(",3,1.6,"), "{text}");
}
