//! Experiment specs, grid evaluation and CSV tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use lzsm::batch::{map_grid, map_grid_serial, spaced};
use lzsm::closed_form::{self as cf, FormulaId};
use lzsm::ddp::{self, SearchBox};
use lzsm::schrodinger;
use lzsm::{make_profile, Family, Readout, Settings, Sweep, SweepProfile};
use toml::Value;

use crate::config::Config;
use crate::error::{CliError, Result};

const KNOWN_KEYS: [&str; 18] = [
    "name",
    "grid.axis",
    "grid.min",
    "grid.max",
    "grid.points",
    "grid.scale",
    "methods",
    "integrator.rtol",
    "integrator.readout",
    "window.tol",
    "window.max_doublings",
    "window.t1",
    "ddp.n_zeros",
    "ddp.box",
    "output.path",
    "transform.target_gap",
    "transform.span",
    "profile.family",
];

/// A number, or an expression in the grid value `x` (also reachable under
/// the axis name).
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Value(f64),
    Expr { text: String, expr: meval::Expr },
}

impl Param {
    fn from_value(key: &str, v: &Value) -> Result<Self> {
        match v {
            Value::Float(x) => Ok(Param::Value(*x)),
            Value::Integer(i) => Ok(Param::Value(*i as f64)),
            Value::String(s) => {
                let expr = s.parse::<meval::Expr>().map_err(|e| CliError::Expression {
                    expr: s.clone(),
                    reason: e.to_string(),
                })?;
                Ok(Param::Expr {
                    text: s.clone(),
                    expr,
                })
            }
            other => Err(CliError::Config(format!(
                "`{key}` must be a number or an expression, got {other}"
            ))),
        }
    }

    pub fn eval(&self, axis: &str, x: Option<f64>) -> Result<f64> {
        match self {
            Param::Value(v) => Ok(*v),
            Param::Expr { text, expr } => {
                let vars: Vec<(&str, f64)> =
                    x.map(|x| vec![("x", x), (axis, x)]).unwrap_or_default();
                expr.eval_with_context((vars, meval::Context::new()))
                    .map_err(|e| CliError::Expression {
                        expr: text.clone(),
                        reason: e.to_string(),
                    })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTemplate {
    pub family: Family,
    params: BTreeMap<String, Param>,
}

impl ProfileTemplate {
    fn from_config(cfg: &Config) -> Result<Self> {
        let name = cfg
            .str("profile.family")?
            .ok_or_else(|| CliError::Config("`profile.family` is required".into()))?;
        let family: Family = name.parse()?;
        let mut params = BTreeMap::new();
        for (k, v) in cfg.section("profile").filter(|(k, _)| *k != "family") {
            if !family.keys().contains(&k) {
                return Err(CliError::Config(format!(
                    "`profile.{k}` is not a parameter of the {family} family (expected one of {:?})",
                    family.keys()
                )));
            }
            params.insert(
                k.to_string(),
                Param::from_value(&format!("profile.{k}"), v)?,
            );
        }
        Ok(ProfileTemplate { family, params })
    }

    /// Binds the grid value. A family parameter named like the axis and left
    /// unset takes the grid value itself.
    pub fn instantiate(&self, axis: &str, x: Option<f64>) -> Result<SweepProfile> {
        let mut values = BTreeMap::new();
        for (k, p) in &self.params {
            values.insert(k.clone(), p.eval(axis, x)?);
        }
        if let Some(x) = x {
            if self.family.keys().contains(&axis) && !values.contains_key(axis) {
                values.insert(axis.to_string(), x);
            }
        }
        Ok(make_profile(self.family, &values)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    fn from_config(cfg: &Config) -> Result<Self> {
        let need = |k: &str| -> Result<f64> {
            cfg.f64(k)?
                .ok_or_else(|| CliError::Config(format!("`{k}` is required")))
        };
        let (min, max) = (need("grid.min")?, need("grid.max")?);
        let points = cfg
            .usize("grid.points")?
            .ok_or_else(|| CliError::Config("`grid.points` is required".into()))?;
        let log = match cfg.str("grid.scale")?.unwrap_or("lin") {
            "lin" | "linear" => false,
            "log" => true,
            other => {
                return Err(CliError::Config(format!(
                    "`grid.scale` must be lin or log, got `{other}`"
                )))
            }
        };
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(CliError::Config(format!(
                "grid needs min < max, got [{min}, {max}]"
            )));
        }
        if points < 2 {
            return Err(CliError::Config(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        if log && min <= 0.0 {
            return Err(CliError::Config(format!(
                "log grid needs min > 0, got {min}"
            )));
        }
        Ok(GridSpec {
            axis: axis_name(cfg)?,
            min,
            max,
            points,
            log,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        spaced(self.min, self.max, self.points, self.log)
    }
}

fn axis_name(cfg: &Config) -> Result<String> {
    Ok(cfg.str("grid.axis")?.unwrap_or("x").to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    /// Persistence in the diabatic state, or the finite-time transition for
    /// the rotating field.
    Integrator,
    /// `1 −` persistence: the transfer probability of a double passage.
    Transfer,
    Ddp(usize),
    DdpStandard,
    ClosedForm(FormulaId),
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Integrator => f.write_str("integrator"),
            MethodSpec::Transfer => f.write_str("integrator:transfer"),
            MethodSpec::Ddp(n) => write!(f, "ddp:{n}"),
            MethodSpec::DdpStandard => f.write_str("ddp:standard"),
            MethodSpec::ClosedForm(id) => write!(f, "closed-form:{id}"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || CliError::Config(format!("unknown method `{s}`"));
        match s.split_once(':') {
            None if s == "integrator" => Ok(MethodSpec::Integrator),
            Some(("integrator", "transfer")) => Ok(MethodSpec::Transfer),
            Some(("ddp", "standard")) => Ok(MethodSpec::DdpStandard),
            Some(("ddp", n)) => match n.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(MethodSpec::Ddp(n)),
                _ => Err(bad()),
            },
            Some(("closed-form" | "closed_form", id)) => {
                id.parse().map(MethodSpec::ClosedForm).map_err(|_| bad())
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: Option<String>,
    pub profile: ProfileTemplate,
    pub axis: String,
    pub grid: Option<GridSpec>,
    pub methods: Vec<MethodSpec>,
    pub settings: Settings,
    pub n_zeros: usize,
    pub search: Option<SearchBox>,
    /// Final time of finite-time runs; half a turn when unset.
    pub t1: Option<Param>,
    pub target_gap: Option<f64>,
    pub span: Option<f64>,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Reads a spec; `need_grid` makes the grid section mandatory.
    pub fn from_config(cfg: &Config, need_grid: bool) -> Result<Self> {
        for k in cfg.keys() {
            if !KNOWN_KEYS.contains(&k) && !k.starts_with("profile.") {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
        }
        let profile = ProfileTemplate::from_config(cfg)?;
        let has_grid = cfg
            .keys()
            .any(|k| k.starts_with("grid.") && k != "grid.axis");
        let grid = if need_grid || has_grid {
            Some(GridSpec::from_config(cfg)?)
        } else {
            None
        };

        let n_zeros = cfg.usize("ddp.n_zeros")?.unwrap_or(1);
        if n_zeros == 0 {
            return Err(CliError::Config("`ddp.n_zeros` must be at least 1".into()));
        }
        let names = cfg
            .strings("methods")?
            .unwrap_or_else(|| vec!["integrator".into()]);
        let mut methods = Vec::with_capacity(names.len());
        for name in &names {
            let m = if name.trim() == "ddp" {
                MethodSpec::Ddp(n_zeros)
            } else {
                name.parse()?
            };
            if methods.contains(&m) {
                return Err(CliError::Config(format!("method `{m}` listed twice")));
            }
            methods.push(m);
        }
        if methods.is_empty() {
            return Err(CliError::Config("at least one method is required".into()));
        }

        let mut settings = Settings::default();
        if let Some(r) = cfg.f64("integrator.rtol")? {
            settings.rtol = r;
        }
        if let Some(t) = cfg.f64("window.tol")? {
            settings.tol = t;
        }
        if let Some(n) = cfg.usize("window.max_doublings")? {
            settings.max_doublings = n;
        }
        settings.readout = match cfg.str("integrator.readout")?.unwrap_or("adiabatic") {
            "adiabatic" => Readout::Adiabatic,
            "diabatic" => Readout::Diabatic,
            other => {
                return Err(CliError::Config(format!(
                    "`integrator.readout` must be adiabatic or diabatic, got `{other}`"
                )))
            }
        };
        if !(settings.rtol > 0.0 && settings.tol > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }

        let search = match cfg.numbers("ddp.box")? {
            None => None,
            Some(b) if b.len() == 4 => Some(SearchBox::new(b[0], b[1], b[2], b[3])?),
            Some(b) => {
                return Err(CliError::Config(format!(
                    "`ddp.box` needs 4 numbers, got {}",
                    b.len()
                )))
            }
        };
        let t1 = cfg
            .get("window.t1")
            .map(|v| Param::from_value("window.t1", v))
            .transpose()?;

        Ok(ExperimentSpec {
            name: cfg.str("name")?.map(str::to_string),
            profile,
            axis: axis_name(cfg)?,
            grid,
            methods,
            settings,
            n_zeros,
            search,
            t1,
            target_gap: cfg.f64("transform.target_gap")?,
            span: cfg.f64("transform.span")?,
            output: cfg.str("output.path")?.map(PathBuf::from),
        })
    }

    pub fn profile_at(&self, x: Option<f64>) -> Result<SweepProfile> {
        self.profile.instantiate(&self.axis, x)
    }

    /// Final time for the rotating field.
    fn final_time(&self, p: &SweepProfile, x: Option<f64>) -> Result<Option<f64>> {
        match *p.sweep() {
            Sweep::RotatingField { omega, .. } => match &self.t1 {
                Some(t) => t.eval(&self.axis, x).map(Some),
                None => Ok(Some(std::f64::consts::PI / omega)),
            },
            _ => Ok(None),
        }
    }

    /// Full integrator report at one point.
    pub fn simulate(&self, p: &SweepProfile, x: Option<f64>) -> Result<lzsm::TransitionResult> {
        Ok(match self.final_time(p, x)? {
            Some(t1) => {
                schrodinger::adiabatic_transition_probability(p, 0.0, t1, self.settings.rtol)?
            }
            None => schrodinger::diabatic_persistence_probability(p, &self.settings)?,
        })
    }

    pub fn evaluate(&self, m: MethodSpec, p: &SweepProfile, x: Option<f64>) -> Result<f64> {
        Ok(match m {
            MethodSpec::Integrator => self.simulate(p, x)?.probability,
            MethodSpec::Transfer => 1.0 - self.simulate(p, x)?.probability,
            MethodSpec::Ddp(n) => ddp::generalized_probability(p, n, self.search)?.probability,
            MethodSpec::DdpStandard => ddp::standard_probability(p, self.search)?.probability,
            MethodSpec::ClosedForm(FormulaId::RotatingField) if self.t1.is_some() => {
                match (p.sweep(), self.final_time(p, x)?) {
                    (&Sweep::RotatingField { omega_field, omega }, Some(t1)) => {
                        cf::rotating_field(omega / omega_field, omega_field.hypot(omega) * t1)
                    }
                    _ => cf::evaluate(FormulaId::RotatingField, p)?,
                }
            }
            MethodSpec::ClosedForm(id) => cf::evaluate(id, p)?,
        })
    }

    pub fn row(&self, x: f64) -> ResultRow {
        let p = match self.profile_at(Some(x)) {
            Ok(p) => p,
            Err(e) => {
                return ResultRow {
                    grid_value: x,
                    values: vec![None; self.methods.len()],
                    reference: None,
                    status: format!("profile={}", e.kind()),
                }
            }
        };
        let mut failures = Vec::new();
        let values = self
            .methods
            .iter()
            .map(|&m| match self.evaluate(m, &p, Some(x)) {
                Ok(v) => Some(v),
                Err(e) => {
                    failures.push(format!("{m}={}", e.kind()));
                    None
                }
            })
            .collect();
        let reference = p
            .crossing_derivatives()
            .ok()
            .and_then(|d| d.delta)
            .map(cf::lzsm);
        let status = if failures.is_empty() {
            "ok".to_string()
        } else {
            failures.join(";")
        };
        ResultRow {
            grid_value: x,
            values,
            reference,
            status,
        }
    }

    /// One row per grid point, in grid order.
    pub fn run_grid(&self, serial: bool) -> Result<Vec<ResultRow>> {
        let grid = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a grid".into()))?;
        let xs = grid.values();
        let f = |x: &f64| self.row(*x);
        Ok(if serial {
            map_grid_serial(&xs, f)
        } else {
            map_grid(&xs, f)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub grid_value: f64,
    pub values: Vec<Option<f64>>,
    /// `P_LZSM` for the crossing's adiabaticity parameter.
    pub reference: Option<f64>,
    pub status: String,
}

impl ResultRow {
    pub fn delta_p(&self, i: usize) -> Option<f64> {
        Some(self.values[i]? - self.reference?)
    }
}

/// Seventeen significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn write_table(
    methods: &[MethodSpec],
    rows: &[ResultRow],
    out: &mut (impl Write + ?Sized),
) -> io::Result<()> {
    let mut header = vec!["grid_value".to_string()];
    header.extend(methods.iter().map(|m| m.to_string()));
    header.extend(methods.iter().map(|m| format!("delta_p:{m}")));
    header.push("status".into());
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let mut line = vec![fmt_num(r.grid_value)];
        line.extend(r.values.iter().map(|v| cell(*v)));
        line.extend((0..methods.len()).map(|i| cell(r.delta_p(i))));
        line.push(r.status.clone());
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    pub a: MethodSpec,
    pub b: MethodSpec,
    pub max_abs_dev: f64,
    pub mean_abs_dev: f64,
    pub points: usize,
}

/// Deviations between every method pair over the rows where both succeeded.
pub fn compare(methods: &[MethodSpec], rows: &[ResultRow]) -> Result<Vec<PairStats>> {
    if methods.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two methods".into(),
        ));
    }
    let mut out = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let devs: Vec<f64> = rows
                .iter()
                .filter_map(|r| Some((r.values[i]? - r.values[j]?).abs()))
                .collect();
            let n = devs.len();
            out.push(PairStats {
                a: methods[i],
                b: methods[j],
                max_abs_dev: devs
                    .iter()
                    .cloned()
                    .fold(if n > 0 { 0.0 } else { f64::NAN }, f64::max),
                mean_abs_dev: devs.iter().sum::<f64>() / n as f64,
                points: n,
            });
        }
    }
    Ok(out)
}

pub fn write_comparison(stats: &[PairStats], out: &mut (impl Write + ?Sized)) -> io::Result<()> {
    writeln!(out, "method_a,method_b,max_abs_dev,mean_abs_dev,points")?;
    for s in stats {
        let (mx, mn) = if s.points > 0 {
            (fmt_num(s.max_abs_dev), fmt_num(s.mean_abs_dev))
        } else {
            Default::default()
        };
        writeln!(out, "{},{},{mx},{mn},{}", s.a, s.b, s.points)?;
    }
    Ok(())
}
