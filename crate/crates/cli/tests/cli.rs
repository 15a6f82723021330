use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn lzsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lzsm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_kind(out: &Output) -> String {
    let line = String::from_utf8(out.stderr.clone()).unwrap();
    let line = line.lines().last().expect("an error line");
    let v: serde_json::Value = serde_json::from_str(line).expect("error line is JSON");
    v["error"]["kind"].as_str().unwrap().to_string()
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Table {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .unwrap()
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Table { header, rows }
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

/// `# series` sections of a `reproduce` run.
fn series(text: &str) -> BTreeMap<String, Table> {
    let mut out = BTreeMap::new();
    for chunk in text.split("# series ").filter(|c| !c.is_empty()) {
        let (name, body) = chunk.split_once('\n').unwrap();
        out.insert(name.to_string(), Table::parse(body));
    }
    out
}

const TANH: &[&str] = &[
    "-s",
    "profile.family=tanh-modulated",
    "-s",
    "profile.alpha=0.5",
    "-s",
    "profile.T=10/x",
    "-s",
    "grid.axis=v0",
    "-s",
    "grid.min=0.2",
    "-s",
    "grid.max=5",
    "-s",
    "grid.points=9",
    "-s",
    "grid.scale=log",
    "-s",
    "methods=integrator,closed-form:quadratic,ddp:1",
];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = with(&["sweep"], TANH);
    assert_eq!(stdout(&lzsm(&args)), stdout(&lzsm(&args)));
}

#[test]
fn serial_and_parallel_agree_bitwise() {
    let args = with(&["sweep"], TANH);
    let serial = with(&args, &["--serial"]);
    assert_eq!(stdout(&lzsm(&args)), stdout(&lzsm(&serial)));
}

#[test]
fn csv_layout() {
    let t = Table::parse(&stdout(&lzsm(&with(&["sweep"], TANH))));
    assert_eq!(
        t.header,
        [
            "grid_value",
            "integrator",
            "closed-form:quadratic",
            "ddp:1",
            "delta_p:integrator",
            "delta_p:closed-form:quadratic",
            "delta_p:ddp:1",
            "status"
        ]
    );
    assert_eq!(t.rows.len(), 9);
    for r in &t.rows {
        assert_eq!(r.last().unwrap(), "ok");
        let mantissa = r[1].split('e').next().unwrap();
        assert_eq!(mantissa.replace(['.', '-'], "").len(), 17, "{}", r[1]);
    }
}

#[test]
fn delta_p_matches_recomputed_reference() {
    let args = [
        "sweep",
        "-s",
        "profile.family=linear",
        "-s",
        "profile.gap=1.3",
        "-s",
        "grid.axis=v",
        "-s",
        "grid.min=0.1",
        "-s",
        "grid.max=10",
        "-s",
        "grid.points=12",
        "-s",
        "grid.scale=log",
    ];
    let t = Table::parse(&stdout(&lzsm(&args)));
    for ((v, p), dp) in t
        .col("grid_value")
        .iter()
        .zip(t.col("integrator"))
        .zip(t.col("delta_p:integrator"))
    {
        let delta = 1.3 * 1.3 / (4.0 * v);
        assert!((dp - (p - (-2.0 * std::f64::consts::PI * delta).exp())).abs() <= 1e-12);
    }
}

#[test]
fn linear_sweep_against_lzsm() {
    let args = [
        "compare",
        "-s",
        "profile.family=linear",
        "-s",
        "grid.axis=v",
        "-s",
        "grid.min=0.05",
        "-s",
        "grid.max=20",
        "-s",
        "grid.points=20",
        "-s",
        "grid.scale=log",
        "-s",
        "methods=integrator,closed-form:lzsm,ddp:1",
    ];
    let t = Table::parse(&stdout(&lzsm(&args)));
    assert_eq!(
        t.header,
        [
            "method_a",
            "method_b",
            "max_abs_dev",
            "mean_abs_dev",
            "points"
        ]
    );
    for dev in t.col("max_abs_dev") {
        assert!(dev <= 1e-3, "{dev}");
    }
}

#[test]
fn demkov_kunike_against_closed_form() {
    let args = [
        "compare",
        "-s",
        "profile.family=demkov-kunike",
        "-s",
        "profile.A=0.5",
        "-s",
        "profile.T=1",
        "-s",
        "grid.axis=B",
        "-s",
        "grid.min=0.2",
        "-s",
        "grid.max=2",
        "-s",
        "grid.points=6",
        "-s",
        "integrator.rtol=1e-12",
        "-s",
        "window.tol=1e-9",
        "-s",
        "methods=integrator,closed-form:demkov_kunike",
    ];
    let t = Table::parse(&stdout(&lzsm(&args)));
    assert!(t.col("max_abs_dev")[0] <= 1e-6);
}

#[test]
fn rotating_field_against_closed_form() {
    let args = [
        "compare",
        "-s",
        "profile.family=rotating-field",
        "-s",
        "profile.Omega=1",
        "-s",
        "profile.omega=x",
        "-s",
        "grid.min=0.1",
        "-s",
        "grid.max=10",
        "-s",
        "grid.points=8",
        "-s",
        "grid.scale=log",
        "-s",
        "integrator.rtol=1e-12",
        "-s",
        "methods=integrator,closed-form:rotating-field",
    ];
    let t = Table::parse(&stdout(&lzsm(&args)));
    assert!(t.col("max_abs_dev")[0] <= 1e-8);
}

#[test]
fn quadratic_formula_holds_only_at_small_rates() {
    let args = [
        "sweep",
        "-s",
        "profile.family=tanh-modulated",
        "-s",
        "profile.alpha=0.5",
        "-s",
        "profile.T=10/x",
        "-s",
        "grid.axis=v0",
        "-s",
        "grid.min=0.3",
        "-s",
        "grid.max=20",
        "-s",
        "grid.points=2",
        "-s",
        "grid.scale=log",
        "-s",
        "window.tol=1e-9",
        "-s",
        "methods=integrator,closed-form:quadratic",
    ];
    let t = Table::parse(&stdout(&lzsm(&args)));
    let (num, th) = (
        t.col("delta_p:integrator"),
        t.col("delta_p:closed-form:quadratic"),
    );
    let rel = |i: usize| ((num[i] - th[i]) / th[i]).abs();
    assert!(rel(0) < 0.1, "{}", rel(0));
    assert!(rel(1) > 0.5, "{}", rel(1));
}

#[test]
fn single_point_grid_is_rejected() {
    let out = lzsm(&[
        "sweep",
        "-s",
        "profile.family=linear",
        "-s",
        "grid.min=1",
        "-s",
        "grid.max=2",
        "-s",
        "grid.points=1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "config");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_input_and_runtime_errors_have_distinct_codes() {
    let unknown = lzsm(&[
        "simulate",
        "-s",
        "profile.family=linear",
        "-s",
        "profile.v=1",
        "-s",
        "profile.bogus=2",
    ]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(error_kind(&unknown), "config");

    let usage = lzsm(&["no-such-command"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(error_kind(&usage), "usage");

    let figure = lzsm(&["reproduce", "fig1"]);
    assert_eq!(figure.status.code(), Some(2));

    let runtime = lzsm(&[
        "simulate",
        "-s",
        "profile.family=linear",
        "-s",
        "profile.v=0",
    ]);
    assert_eq!(runtime.status.code(), Some(1));
    assert_eq!(error_kind(&runtime), "invalid-parameter");

    assert!(lzsm(&["--help"]).status.success());
}

#[test]
fn per_point_failures_do_not_abort_the_grid() {
    let args = [
        "sweep",
        "-s",
        "profile.family=linear",
        "-s",
        "grid.axis=v",
        "-s",
        "grid.min=0.5",
        "-s",
        "grid.max=1",
        "-s",
        "grid.points=2",
        "-s",
        "methods=integrator,closed-form:rosen-zener",
    ];
    let t = Table::parse(&stdout(&lzsm(&args)));
    for r in &t.rows {
        assert_eq!(r[2], "");
        assert_eq!(r.last().unwrap(), "closed-form:rosen-zener=unsupported");
    }
}

#[test]
fn config_file_with_overrides_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "methods = [\"integrator\"]\n[profile]\nfamily = \"linear\"\n[grid]\naxis = \"v\"\nmin = 0.5\nmax = 4.0\npoints = 3\n[output]\npath = {:?}\n",
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = lzsm(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "grid.points=4",
    ]);
    assert!(stdout(&out).is_empty());
    let t = Table::parse(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(t.rows.len(), 4);
}

#[test]
fn single_point_commands() {
    let sim = Table::parse(&stdout(&lzsm(&[
        "simulate",
        "-s",
        "profile.family=linear",
        "-s",
        "profile.v=x",
        "--x",
        "2",
    ])));
    assert!((sim.col("probability")[0] - (-std::f64::consts::PI / 4.0).exp()).abs() < 1e-5);

    let zeros = Table::parse(&stdout(&lzsm(&[
        "ddp-zeros",
        "-s",
        "profile.family=tanh-modulated",
        "-s",
        "profile.v0=1",
        "-s",
        "profile.alpha=0.8",
        "-s",
        "profile.T=0.3",
        "-s",
        "ddp.n_zeros=3",
        "-s",
        "ddp.box=[-4, 4, 0, 6]",
    ])));
    assert_eq!(zeros.rows.len(), 3);
    assert!(zeros.col("im").iter().all(|&y| y > 0.0));

    let prob = Table::parse(&stdout(&lzsm(&[
        "ddp-prob",
        "-s",
        "profile.family=linear",
        "-s",
        "profile.v=1",
    ])));
    let p = prob.col("probability");
    assert!((p[0] - (-std::f64::consts::PI / 2.0).exp()).abs() < 1e-12);
    assert!((p[1] - p[0]).abs() < 1e-12);

    let cf = stdout(&lzsm(&[
        "closed-form",
        "rosen-zener",
        "-s",
        "profile.family=rosen-zener",
        "-s",
        "profile.a=0.3",
        "-s",
        "profile.b=0.5",
        "-s",
        "profile.T=1",
    ]));
    assert!(cf.starts_with("formula,probability,status\nrosen-zener,"));

    let gap = Table::parse(&stdout(&lzsm(&[
        "transform-gap",
        "-s",
        "profile.family=tanh-gap",
        "-s",
        "profile.v=1",
        "-s",
        "profile.gap0=1",
        "-s",
        "profile.alpha=0.5",
        "-s",
        "profile.T=3",
        "-s",
        "grid.min=-2",
        "-s",
        "grid.max=2",
        "-s",
        "grid.points=5",
    ])));
    assert_eq!(gap.header, ["t_tilde", "eps_tilde", "gap_tilde", "t"]);
    assert!(gap.col("gap_tilde").iter().all(|&g| g == 1.0));
    assert_eq!(gap.col("t")[2], 0.0);
}

#[test]
fn reproduce_fig12_curves_coincide() {
    let s = series(&stdout(&lzsm(&["reproduce", "fig12"])));
    assert_eq!(s.len(), 5);
    let pl = s["power-law-a0.001"].col("integrator");
    let er = s["erf-sigma0.001"].col("integrator");
    let lim = s["limit"].col("closed-form:square-pulse");
    assert_eq!(pl.len(), 60);
    let spread = (0..pl.len())
        .map(|i| {
            let v = [pl[i], er[i], lim[i]];
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        })
        .fold(0.0, f64::max);
    assert!(spread <= 1e-2, "{spread}");
}

#[test]
fn reproduce_fig7_has_six_series() {
    let s = series(&stdout(&lzsm(&[
        "reproduce",
        "fig7",
        "-s",
        "grid.points=3",
    ])));
    let t = &s["alpha0.8-T0.3"];
    for m in ["integrator", "ddp:1", "ddp:2", "ddp:3", "ddp:4", "ddp:5"] {
        assert_eq!(t.col(m).len(), 3);
    }
}

#[test]
fn reproduce_fig13_narrow_gap_raises_transition_probability() {
    let s = series(&stdout(&lzsm(&["reproduce", "fig13"])));
    let (narrow, wide) = (s["T0.1"].col("integrator"), s["T0.5"].col("integrator"));
    let reference = s["T0.1"].col("closed-form:lzsm");
    for i in 0..narrow.len() {
        assert!(narrow[i] >= wide[i] && wide[i] >= reference[i], "row {i}");
    }
    // slow sweeps see only the pulse area √π Δ0 T of the gap
    for (p, t) in [(narrow[0], 0.1), (wide[0], 0.5)] {
        let plateau = (std::f64::consts::PI.sqrt() * t / 2.0).cos().powi(2);
        assert!((p - plateau).abs() < 5e-3, "{p} vs {plateau}");
    }
}

#[test]
fn reproduce_writes_one_file_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("fig11.csv");
    let arg = format!("output.path={}", base.display());
    stdout(&lzsm(&[
        "reproduce",
        "fig11",
        "-s",
        "grid.points=4",
        "-s",
        &arg,
    ]));
    for name in ["rotating-field", "linear"] {
        let path = dir.path().join(format!("fig11-{name}.csv"));
        assert!(Path::new(&path).exists(), "{}", path.display());
    }
}
