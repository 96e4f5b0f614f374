use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bdp_cli::{parse_config, parse_config_str, run_verify};
use bdp_core::Error;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdp"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn sample() -> String {
    configs().join("constant_rate.cfg").display().to_string()
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn sample_config_verifies() {
    let cfg = parse_config(&configs().join("constant_rate.cfg")).unwrap();
    let report = run_verify(&cfg).unwrap();
    assert!(report.passed(), "{report:?}");
    let transition = report
        .rows
        .iter()
        .find(|r| r.check == "transition_product_form")
        .unwrap();
    assert!(transition.value < 1e-8);
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn table_config_verifies() {
    let cfg = parse_config(&configs().join("table_recurrence.cfg")).unwrap();
    assert!(run_verify(&cfg).unwrap().passed());
}

#[test]
fn equal_rates_give_a_clean_error() {
    let cfg = parse_config_str(
        "lambda = 1.5\nmu = 1.5\nnu_mode = constant_ratio\nbeta = 1\n",
        None,
    )
    .unwrap();
    let err = run_verify(&cfg).unwrap_err();
    assert_eq!(
        err.downcast_ref::<Error>(),
        Some(&Error::NoNonConstantSolution)
    );
    assert!(format!("{err:#}").contains("no positive non-constant solution"));
    assert!(format!("{err:#}").contains("config line 3"));
}

#[test]
fn corrupted_nu_is_rejected() {
    let mut text = String::from("lambda = 1\nmu = 2\nnu_mode = explicit\n");
    for n in -20..=20 {
        let mut v = 1.0 + 2f64.powi(n);
        if n == 3 {
            v *= 1.0 + 1e-6;
        }
        text.push_str(&format!("nu {n} {v:.16e}\n"));
    }
    let cfg = parse_config_str(&text, None).unwrap();
    let err = run_verify(&cfg).unwrap_err();
    assert!(
        matches!(
            err.downcast_ref::<Error>(),
            Some(Error::IncompatibleNu { state: 2, .. })
        ),
        "{err:#}"
    );
}

#[test]
fn explicit_nu_matching_the_closed_form_verifies() {
    let mut text = String::from("lambda = 1\nmu = 2\nnu_mode = explicit\n");
    for n in -30..=30 {
        text.push_str(&format!("nu {n} {:.16e}\n", 1.0 + 2f64.powi(n)));
    }
    let cfg = parse_config_str(&text, None).unwrap();
    assert!(run_verify(&cfg).unwrap().passed());
}

#[test]
fn verify_exit_status_follows_the_report() {
    let ok = bdp(&["verify", &sample()]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("check,value,tolerance,status\n"));
    assert!(!stdout(&ok).contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    let strict = dir.path().join("strict.cfg");
    let text = std::fs::read_to_string(configs().join("constant_rate.cfg")).unwrap()
        + "tol_renewal = 1e-15\n";
    std::fs::write(&strict, text).unwrap();
    let failed = bdp(&["verify", strict.to_str().unwrap()]);
    assert_eq!(failed.status.code(), Some(1));
    assert!(stdout(&failed).contains("renewal_original"));
    assert!(stdout(&failed).contains("FAIL"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "lambda = 1\nmu = 2\nlamda = 3\n").unwrap();
    let out = bdp(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("lamda"), "{err}");
}

#[test]
fn spec_file_is_resolved_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("rates.cfg"),
        "kind = constant\nlambda = 1\nmu = 2\n",
    )
    .unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "spec_file = rates.cfg\nnu_mode = constant_ratio\nbeta = 1\nt_max = 1\n",
    )
    .unwrap();
    let cfg = parse_config(&path).unwrap();
    assert_eq!(cfg.spec, bdp_core::ProcessSpec::constant(1.0, 2.0).unwrap());
    assert!(run_verify(&cfg).unwrap().passed());
}

#[test]
fn example_ratio_column_is_the_nu_ratio() {
    let out = bdp(&["example", &sample(), "--grid", "11", "--t-max", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,p,p_tilde,g,g_tilde,ratio"));
    // nu_2 / nu_0 = 5 / 2 for nu_n = 1 + 2^n.
    for line in lines.skip(1) {
        assert!(
            (field(line, 5) - 2.5).abs() <= 4.0 * f64::EPSILON * 2.5,
            "{line}"
        );
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = bdp(&["fpt", &sample(), "--grid", "5"]);
    let text = stdout(&out);
    assert!(text.starts_with("t,g,absorbed_mass\n"));
    let value = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{value}");
}

#[test]
fn solve_matches_closed_form() {
    let out = bdp(&["solve", &sample(), "--grid", "3", "--t-max", "1"]);
    for line in stdout(&out).lines().skip(1) {
        let (t, n, p) = (field(line, 0), field(line, 1) as i64, field(line, 2));
        let exact = bdp_core::analytic::transition_prob_const(1.0, 2.0, 0, n, t).unwrap();
        assert!((p - exact).abs() < 1e-8, "{line}");
    }
}

#[test]
fn nu_and_transform_round_trip() {
    let out = bdp(&["nu", &sample(), "--window", "-4", "4"]);
    let text = stdout(&out);
    assert!(text.starts_with("n,nu,d,residual\n"));
    let row = text.lines().find(|l| l.starts_with("2,")).unwrap();
    assert_eq!(field(row, 1), 5.0);
    assert_eq!(field(row, 2), 4.0);

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.cfg");
    let out = bdp(&[
        "transform",
        &sample(),
        "--window",
        "-4",
        "4",
        "-o",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let cfg = parse_config(&table).unwrap();
    let (l, m) = cfg.spec.rates_at(0).unwrap();
    assert_eq!((l, m), (1.5, 1.5));
    assert_eq!(
        cfg.spec.domain(),
        Some(bdp_core::StateWindow::new(-3, 3).unwrap())
    );
}

#[test]
fn simulate_is_deterministic_and_thread_independent() {
    let args = |threads: &'static str| {
        bdp(&[
            "simulate",
            &sample(),
            "--trials",
            "5000",
            "--t-end",
            "20",
            "--bins",
            "8",
            "--threads",
            threads,
        ])
    };
    let (a, b) = (args("1"), args("4"));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let summary = String::from_utf8(a.stderr).unwrap();
    assert!(summary.starts_with("point,ci_half_width,censored_fraction,hits,trials,horizon\n"));
    let point = field(summary.lines().nth(1).unwrap(), 0);
    assert!((point - 0.5).abs() < 0.03, "{point}");
}

#[test]
fn help_lists_every_subcommand() {
    let text = stdout(&bdp(&["--help"]));
    for sub in [
        "nu",
        "transform",
        "solve",
        "fpt",
        "simulate",
        "example",
        "verify",
    ] {
        assert!(text.contains(sub), "{sub}");
    }
}
