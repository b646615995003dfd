use std::path::{Path, PathBuf};
use std::process::Command;

use semidyn_cli::{run_command, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

const SCENE: &str = "\
[semigroup]
label = annulus
generator = power d=2 b=1
generator = power d=2 b=2

[grid]
re_min = -3
re_max = 3
im_min = -3
im_max = 3
width = 48
height = 48

[ifs]
count = 500
burn_in = 10
";

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("scene.cfg"), SCENE).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> i32 {
        let cfg = self.path("scene.cfg");
        let mut argv: Vec<String> = vec!["semidyn".into()];
        for a in args {
            argv.push(a.replace("{cfg}", cfg.to_str().unwrap()).replace("{dir}", self.dir.path().to_str().unwrap()));
        }
        run_command(argv)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn happy_paths_exit_zero() {
    let f = Fixture::new();
    assert_eq!(f.run(&["render-julia", "--config", "{cfg}", "--out", "{dir}/j.pgm"]), EXIT_OK);
    assert!(std::fs::read(f.path("j.pgm")).unwrap().starts_with(b"P5\n48 48\n255\n"));
    assert_eq!(f.run(&["render-escaping", "--config", "{cfg}", "--out", "{dir}/e.pgm", "--threads", "2"]), EXIT_OK);
    assert_eq!(f.run(&["sample-ifs", "--config", "{cfg}", "--out", "{dir}/p.csv", "--seed", "5"]), EXIT_OK);
    let csv = std::fs::read_to_string(f.path("p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 501);
    for suite in ["invariance", "identities", "references", "all"] {
        let report = format!("{{dir}}/{suite}.txt");
        assert_eq!(
            f.run(&["check", "--config", "{cfg}", "--suite", suite, "--report", &report]),
            EXIT_OK,
            "{suite}"
        );
    }
    assert!(std::fs::read_to_string(f.path("all.txt")).unwrap().contains("check=annulus-reference"));
    assert_eq!(f.run(&["catalog"]), EXIT_OK);
    assert_eq!(f.run(&["--help"]), EXIT_OK);
}

#[test]
fn failing_check_exits_one() {
    // the pixel-level union identity misses on the Tchebyshev segment
    let f = Fixture::new();
    let report = f.path("r.txt");
    let failing = f.write(
        "tcheb.cfg",
        &SCENE
            .replace("generator = power d=2 b=1\ngenerator = power d=2 b=2", "generator = tcheb n=2\ngenerator = tcheb n=3")
            .replace("label = annulus", "label = tcheb")
            .replace("width = 48", "width = 120")
            .replace("height = 48", "height = 120")
            .replace("-3", "-2")
            .replace("= 3", "= 2"),
    );
    let code = run_command(["semidyn", "check", "--config", s(&failing), "--suite", "identities", "--report", s(&report)]);
    assert!(std::fs::read_to_string(&report).unwrap().contains("verdict=fail"));
    assert_eq!(code, EXIT_CHECK_FAILED);
}

#[test]
fn usage_and_config_errors_exit_two() {
    let f = Fixture::new();
    let cases: Vec<Vec<String>> = vec![
        vec!["bogus".into()],
        vec!["render-julia".into()],
        vec!["check".into(), "--config".into(), "{cfg}".into(), "--suite".into(), "nope".into()],
        vec!["render-julia".into(), "--config".into(), "{cfg}".into()],
        vec!["sample-ifs".into(), "--config".into(), "{cfg}".into(), "--threads".into(), "-1".into()],
        vec!["render-julia".into(), "--config".into(), "{dir}/missing.cfg".into(), "--out".into(), "{dir}/x.pgm".into()],
        vec!["render-julia".into(), "--config".into(), "{cfg}".into(), "--out".into(), "{dir}/no/such/dir/x.pgm".into()],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(f.run(&refs), EXIT_USAGE, "{args:?}");
    }
    let bad = f.write("bad.cfg", &SCENE.replace("width = 48", "width = zero"));
    assert_eq!(run_command(["semidyn", "render-julia", "--config", s(&bad), "--out", "x.pgm"]), EXIT_USAGE);
    let sine = f.write(
        "sine.cfg",
        &SCENE.replace("generator = power d=2 b=2", "generator = sine gamma=0.5 c=0 s=+"),
    );
    // backward sampling needs power maps only
    assert_eq!(
        run_command(["semidyn", "sample-ifs", "--config", s(&sine), "--out", s(&f.path("s.csv"))]),
        EXIT_USAGE
    );
}

#[test]
fn binary_names_the_missing_config() {
    let out = Command::new(env!("CARGO_BIN_EXE_semidyn"))
        .args(["check", "--config", "/definitely/not/here.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/not/here.cfg"));
}

#[test]
fn usage_error_prints_the_grammar() {
    let out = Command::new(env!("CARGO_BIN_EXE_semidyn")).arg("render-julia").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage: semidyn render-julia --config <CONFIG>"), "{err}");
}

#[test]
fn threads_env_is_a_fallback() {
    let f = Fixture::new();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_semidyn"));
        cmd.args(["render-escaping", "--config", s(&f.path("scene.cfg")), "--out", s(&f.path("t.pgm"))]);
        cmd.args(extra);
        match env {
            Some(v) => cmd.env("SEMIDYN_THREADS", v),
            None => cmd.env_remove("SEMIDYN_THREADS"),
        };
        cmd.output().unwrap().status.code()
    };
    assert_eq!(run(Some("3"), &[]), Some(EXIT_OK));
    assert_eq!(run(Some("many"), &[]), Some(EXIT_USAGE));
    assert_eq!(run(Some("many"), &["--threads", "2"]), Some(EXIT_OK));
    assert_eq!(run(None, &[]), Some(EXIT_OK));
}
