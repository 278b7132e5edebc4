use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn summary(&self) -> Value {
        serde_json::from_str(&self.text("summary.json")).unwrap()
    }

    fn text(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn files(&self) -> Vec<String> {
        let mut v: Vec<String> = fs::read_dir(&self.out)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    }
}

fn hamsys(cache: &Path, out: &Path, args: &[&str]) -> Run {
    let Output { status, stderr, .. } = Command::new(env!("CARGO_BIN_EXE_hamsys"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HAMSYS_CACHE_DIR", cache)
        .output()
        .unwrap();
    Run { code: status.code().unwrap(), stderr: String::from_utf8_lossy(&stderr).into_owned(), out: out.to_path_buf() }
}

fn fresh(args: &[&str]) -> (TempDir, Run) {
    let dir = TempDir::new().unwrap();
    let run = hamsys(&dir.path().join("cache"), &dir.path().join("out"), args);
    (dir, run)
}

fn schema(command: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/schemas/{command}.schema.json"));
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&value).unwrap()
}

fn assert_valid(command: &str, summary: &Value) {
    let compiled = schema(command);
    if let Err(errors) = compiled.validate(summary) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{command}: {msgs:#?}");
    };
}

#[test]
fn every_command_matches_its_schema() {
    let cases: [(&str, &[&str], &[&str]); 8] = [
        ("ground-state", &[], &["profile.csv"]),
        ("check-lemmas", &["--samples", "500"], &[]),
        ("sobolev", &[], &[]),
        ("mp-level", &["--deltas", "0.1,0.05"], &["margin.dat", "mp_level.csv"]),
        ("rayleigh", &["--samples", "120"], &["rayleigh_r.csv", "rayleigh_s.csv"]),
        ("solve-ball", &["--lambda", "5", "--mu", "5"], &["ball_profile.csv", "trace.csv"]),
        ("sweep", &["--grid", "p=3,4;lambda=0.5"], &["sweep.csv"]),
        ("classify", &["--p", "4", "--r", "0.5", "--s", "2"], &[]),
    ];
    for (command, extra, files) in cases {
        let mut args = vec![command, "--no-cache"];
        args.extend_from_slice(extra);
        let (_dir, run) = fresh(&args);
        assert_eq!(run.code, 0, "{command}: {}", run.stderr);
        let summary = run.summary();
        assert_valid(command, &summary);
        let mut expected: Vec<String> = files.iter().map(|f| f.to_string()).collect();
        expected.push("summary.json".into());
        expected.sort();
        assert_eq!(run.files(), expected, "{command}");
    }
}

#[test]
fn schemas_reject_malformed_summaries() {
    let (_dir, run) = fresh(&["classify", "--no-cache"]);
    let good = run.summary();
    assert_valid("classify", &good);
    let compiled = schema("classify");
    let mut missing = good.clone();
    missing["result"].as_object_mut().unwrap().remove("region");
    assert!(!compiled.is_valid(&missing));
    let mut wrong = good.clone();
    wrong["command"] = "sweep".into();
    assert!(!compiled.is_valid(&wrong));
    let mut extra = good;
    extra["timestamp"] = 0.into();
    assert!(!compiled.is_valid(&extra));
}

#[test]
fn sobolev_matches_the_closed_form() {
    let (_dir, run) = fresh(&["sobolev", "--no-cache"]);
    let r = &run.summary()["result"];
    let exact = 0.75 * (2.0 * std::f64::consts::PI.powi(2)).powf(2.0 / 3.0);
    assert!((r["closed_form"].as_f64().unwrap() / exact - 1.0).abs() < 1e-14);
    assert!(r["relative_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn solve_ball_reports_a_positive_decreasing_solution() {
    let (_dir, run) = fresh(&["solve-ball", "--no-cache", "--lambda", "5", "--mu", "5"]);
    let r = &run.summary()["result"];
    assert_eq!(r["verdict"], "found");
    assert_eq!(r["positive"], true);
    assert_eq!(r["decreasing"], true);
    let profile = run.text("ball_profile.csv");
    let last = profile.lines().last().unwrap();
    let r_end: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert!((r_end - 1.0).abs() < 1e-12);
}

#[test]
fn cache_hits_misses_and_evicts() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let first = hamsys(&cache, &dir.path().join("a"), &["sobolev"]);
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert!(!first.stderr.contains("cache hit"));

    let second = hamsys(&cache, &dir.path().join("b"), &["sobolev"]);
    assert!(second.stderr.contains("cache hit"), "{}", second.stderr);
    assert_eq!(first.text("summary.json"), second.text("summary.json"));

    let other = hamsys(&cache, &dir.path().join("c"), &["sobolev", "--tol", "1e-9"]);
    assert!(!other.stderr.contains("cache hit"));
    assert_ne!(first.summary()["config_hash"], other.summary()["config_hash"]);

    let key = first.summary()["config_hash"].as_str().unwrap().to_string();
    let entry = cache.join(format!("{key}.json"));
    let body = fs::read(&entry).unwrap();
    fs::write(&entry, &body[..body.len() / 3]).unwrap();
    let healed = hamsys(&cache, &dir.path().join("d"), &["sobolev"]);
    assert_eq!(healed.code, 0);
    assert!(healed.stderr.contains("evicted"), "{}", healed.stderr);
    assert_eq!(first.text("summary.json"), healed.text("summary.json"));
    assert_eq!(fs::read(&entry).unwrap(), body);

    let bypass = hamsys(&cache, &dir.path().join("e"), &["sobolev", "--no-cache"]);
    assert!(!bypass.stderr.contains("cache hit"));
    assert_eq!(first.text("summary.json"), bypass.text("summary.json"));
}

#[test]
fn exit_codes_distinguish_input_from_numerics() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("out");
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "p = 4\nbogus = 1\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let cases: [(&[&str], i32); 9] = [
        (&["no-such-command"], 1),
        (&["classify", "--p", "abc"], 1),
        (&["classify", "--unknown-flag", "1"], 1),
        (&["classify", "--r", "7"], 1),
        (&["classify", "--q", "2"], 1),
        (&["mp-level", "--rho", "2"], 1),
        (&["classify", "--config", cfg], 1),
        (&["sweep", "--grid", "p=3;subcritical=1.5"], 1),
        (&["mp-level", "--no-cache", "--deltas", "1e-9"], 2),
    ];
    for (args, code) in cases {
        let run = hamsys(&cache, &out, args);
        assert_eq!(run.code, code, "{args:?}: {}", run.stderr);
        assert!(!run.stderr.is_empty());
    }
    assert!(!out.join("summary.json").exists());
    for flag in ["--help", "--version"] {
        assert_eq!(hamsys(&cache, &out, &[flag]).code, 0);
    }
}

#[test]
fn rayleigh_is_reproducible_for_a_seed() {
    let args = ["rayleigh", "--no-cache", "--samples", "120", "--seed", "11"];
    let (_a, one) = fresh(&args);
    let (_b, two) = fresh(&args);
    assert_eq!(one.code, 0, "{}", one.stderr);
    for name in ["summary.json", "rayleigh_r.csv", "rayleigh_s.csv"] {
        assert_eq!(one.text(name), two.text(name), "{name}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# classify a point\np = 3\nr = 0.5\ns = 2\n").unwrap();
    let run = hamsys(
        &dir.path().join("cache"),
        &dir.path().join("out"),
        &["classify", "--no-cache", "--config", cfg.to_str().unwrap(), "--p", "4"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let s = &run.summary()["settings"];
    assert_eq!((s["p"].as_f64(), s["r"].as_f64(), s["s"].as_f64()), (Some(4.0), Some(0.5), Some(2.0)));
    assert_eq!(s["lambda"].as_f64(), Some(1.0));
}

#[test]
fn summary_does_not_depend_on_output_location() {
    let (_a, one) = fresh(&["classify", "--no-cache", "--p", "6"]);
    let (_b, two) = fresh(&["classify", "--no-cache", "--p", "6"]);
    assert_eq!(one.text("summary.json"), two.text("summary.json"));
    assert!(!one.text("summary.json").contains(one.out.to_str().unwrap()));
}
