//! `lzsm`: transition probabilities for nonlinear avoided-crossing sweeps.

mod config;
mod error;
mod experiment;
mod presets;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lzsm::closed_form::FormulaId;
use lzsm::ddp::{self, SearchBox};
use lzsm::gap_transform;

use config::Config;
use error::{CliError, Result};
use experiment::{fmt_num, ExperimentSpec, MethodSpec};

#[derive(Debug, Parser)]
#[command(
    name = "lzsm",
    version,
    about = "Transition probabilities for nonlinear avoided-crossing sweeps"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", short = 's', global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Grid value bound to `x` for single-point commands.
    #[arg(long, global = true, allow_negative_numbers = true)]
    x: Option<f64>,

    /// Evaluate grid points one after another.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the Schrödinger equation at one parameter point.
    Simulate,
    /// List the transition points in the upper half plane.
    DdpZeros,
    /// Single-zero and multi-zero contour probabilities.
    DdpProb,
    /// Evaluate one closed form, or all of them.
    ClosedForm { id: Option<String> },
    /// Evaluate every method over the grid.
    Sweep,
    /// Deviation statistics between method pairs over the grid.
    Compare,
    /// Emit the data behind a figure (fig3 to fig13).
    Reproduce { figure: String },
    /// Tabulate the constant-gap equivalent of a time-dependent gap.
    TransformGap,
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for s in &cli.set {
        cfg.set(s)?;
    }
    Ok(cfg)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes to `path`, or to stdout when unset.
fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(io_err(p))?);
            write(&mut f).and_then(|_| f.flush()).map_err(io_err(p))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
                .and_then(|_| lock.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn simulate(spec: &ExperimentSpec, x: Option<f64>) -> Result<()> {
    let p = spec.profile_at(x)?;
    let r = spec.simulate(&p, x)?;
    emit(spec.output.as_deref(), |out| {
        writeln!(out, "probability,window,converged,residual,norm_defect")?;
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(r.probability),
            opt(r.window),
            r.converged,
            fmt_num(r.residual),
            fmt_num(r.norm_defect)
        )
    })
}

fn search_box(spec: &ExperimentSpec, p: &lzsm::SweepProfile) -> Result<SearchBox> {
    Ok(match spec.search {
        Some(b) => b,
        None => SearchBox::around(p)?,
    })
}

fn ddp_zeros(spec: &ExperimentSpec, x: Option<f64>) -> Result<()> {
    let p = spec.profile_at(x)?;
    let set = ddp::find_upper_zeros(&p, &search_box(spec, &p)?, spec.n_zeros)?;
    if set.zeros.is_empty() {
        let why = set
            .diagnostic
            .unwrap_or_else(|| "no zeros in the search box".into());
        return Err(lzsm::Error::SearchFailure(why).into());
    }
    emit(spec.output.as_deref(), |out| {
        writeln!(
            out,
            "index,re,im,factor,action_re,action_im,gamma_re,gamma_im,multiple,newton_residual"
        )?;
        for (i, z) in set.zeros.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                i + 1,
                fmt_num(z.t_c.re),
                fmt_num(z.t_c.im),
                z.factor,
                fmt_num(z.action.re),
                fmt_num(z.action.im),
                fmt_num(z.gamma.re),
                fmt_num(z.gamma.im),
                z.multiplicity_flag,
                fmt_num(z.newton_residual)
            )?;
        }
        Ok(())
    })
}

fn ddp_prob(spec: &ExperimentSpec, x: Option<f64>) -> Result<()> {
    let p = spec.profile_at(x)?;
    let standard = ddp::standard_probability(&p, spec.search)?.probability;
    let general = ddp::generalized_probability(&p, spec.n_zeros, spec.search)?.probability;
    emit(spec.output.as_deref(), |out| {
        writeln!(out, "method,probability")?;
        writeln!(out, "{},{}", MethodSpec::DdpStandard, fmt_num(standard))?;
        writeln!(
            out,
            "{},{}",
            MethodSpec::Ddp(spec.n_zeros),
            fmt_num(general)
        )
    })
}

fn closed_form(spec: &ExperimentSpec, x: Option<f64>, id: Option<&str>) -> Result<()> {
    let p = spec.profile_at(x)?;
    let ids = match id {
        Some(id) => vec![id
            .parse::<FormulaId>()
            .map_err(|_| CliError::Usage(format!("unknown closed form `{id}`")))?],
        None => FormulaId::ALL.to_vec(),
    };
    let results: Vec<(FormulaId, Result<f64>)> = ids
        .iter()
        .map(|&f| (f, spec.evaluate(MethodSpec::ClosedForm(f), &p, x)))
        .collect();
    if let [(_, Err(_))] = results.as_slice() {
        let (_, e) = results.into_iter().next().unwrap();
        return Err(e.unwrap_err());
    }
    emit(spec.output.as_deref(), |out| {
        writeln!(out, "formula,probability,status")?;
        for (f, r) in &results {
            match r {
                Ok(v) => writeln!(out, "{f},{},ok", fmt_num(*v))?,
                Err(e) => writeln!(out, "{f},,{}", e.kind())?,
            }
        }
        Ok(())
    })
}

fn sweep(spec: &ExperimentSpec, serial: bool) -> Result<()> {
    let rows = spec.run_grid(serial)?;
    emit(spec.output.as_deref(), |out| {
        experiment::write_table(&spec.methods, &rows, out)
    })
}

fn compare(spec: &ExperimentSpec, serial: bool) -> Result<()> {
    if spec.methods.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two methods".into(),
        ));
    }
    let rows = spec.run_grid(serial)?;
    let stats = experiment::compare(&spec.methods, &rows)?;
    emit(spec.output.as_deref(), |out| {
        experiment::write_comparison(&stats, out)
    })
}

/// `dir/stem-series.ext` next to the requested output path.
fn series_path(base: &Path, series: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{series}.{ext}"))
}

fn reproduce(cli: &Cli, figure: &str) -> Result<()> {
    let overrides = load_config(cli)?;
    let mut specs = Vec::new();
    for s in presets::load(figure)? {
        let mut cfg = s.config;
        cfg.merge(&overrides);
        specs.push((s.name, ExperimentSpec::from_config(&cfg, true)?));
    }
    let mut tables = Vec::new();
    for (name, spec) in &specs {
        let mut buf = Vec::new();
        let rows = spec.run_grid(cli.serial)?;
        experiment::write_table(&spec.methods, &rows, &mut buf)
            .map_err(io_err(Path::new("<buffer>")))?;
        tables.push((name, spec.output.clone(), buf));
    }
    match tables.first().and_then(|t| t.1.clone()) {
        Some(base) => {
            for (name, _, buf) in &tables {
                let path = series_path(&base, name);
                std::fs::write(&path, buf).map_err(io_err(&path))?;
            }
            Ok(())
        }
        None => emit(None, |out| {
            for (name, _, buf) in &tables {
                writeln!(out, "# series {name}")?;
                out.write_all(buf)?;
            }
            Ok(())
        }),
    }
}

fn transform_gap(spec: &ExperimentSpec, x: Option<f64>) -> Result<()> {
    let p = spec.profile_at(x)?;
    let target = match spec.target_gap {
        Some(g) => g,
        None => p.gap(0.0)?,
    };
    let span = spec.span.unwrap_or_else(|| gap_transform::default_span(&p));
    let map = gap_transform::build_time_map(&p, target, span)?;
    let (lo, hi) = match &spec.grid {
        Some(g) => (g.min, g.max),
        None => {
            let (a, b) = map.physical_range();
            (map.inverse(a.max(-10.0))?, map.inverse(b.min(10.0))?)
        }
    };
    let n = spec.grid.as_ref().map_or(201, |g| g.points);
    let rows = lzsm::batch::spaced(lo, hi, n, false)
        .into_iter()
        .map(|tt| {
            let (e, g) = map.equivalent_fields(tt)?;
            Ok((tt, e, g, map.forward(tt)?))
        })
        .collect::<Result<Vec<_>>>()?;
    emit(spec.output.as_deref(), |out| {
        writeln!(out, "t_tilde,eps_tilde,gap_tilde,t")?;
        for (tt, e, g, t) in rows {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_num(tt),
                fmt_num(e),
                fmt_num(g),
                fmt_num(t)
            )?;
        }
        Ok(())
    })
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Reproduce { figure } = &cli.command {
        return reproduce(cli, figure);
    }
    let cfg = load_config(cli)?;
    let need_grid = matches!(cli.command, Command::Sweep | Command::Compare);
    let spec = ExperimentSpec::from_config(&cfg, need_grid)?;
    let x = cli.x;
    match &cli.command {
        Command::Simulate => simulate(&spec, x),
        Command::DdpZeros => ddp_zeros(&spec, x),
        Command::DdpProb => ddp_prob(&spec, x),
        Command::ClosedForm { id } => closed_form(&spec, x, id.as_deref()),
        Command::Sweep => sweep(&spec, cli.serial),
        Command::Compare => compare(&spec, cli.serial),
        Command::TransformGap => transform_gap(&spec, x),
        Command::Reproduce { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{}", CliError::Usage(first).to_json());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
