//! Direct integration of `i dψ/dt = Hψ` with `H = ½[[ε, Δ], [Δ, −ε]]`.
//!
//! Asymptotic probabilities are read in the instantaneous eigenbasis at the
//! window edges: the run starts in the eigenstate continuously connected to
//! the diabatic `(1, 0)` and reports the weight left in that same branch at
//! the end. For single-passage sweeps this is the persistence probability of
//! the diabatic state in the infinite-window limit, and it converges much
//! faster in the window than the raw `|ψ↑|²`.
//!
//! The tangent family is integrated in the clock `τ = T asinh(tan(t/T))`,
//! in which its Hamiltonian (times `dt/dτ`) is bounded; windows for that
//! family are measured in `τ`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, Amplitudes, StepControl};
use crate::sweep::{crossing_duration, Sweep, SweepProfile};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub amp_up: C,
    pub amp_down: C,
    pub t: f64,
}

impl TwoLevelState {
    pub fn diabatic_up(t: f64) -> Self {
        TwoLevelState {
            amp_up: C::new(1.0, 0.0),
            amp_down: C::new(0.0, 0.0),
            t,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_up.norm_sqr() + self.amp_down.norm_sqr()
    }

    fn amps(&self) -> Amplitudes {
        [self.amp_up, self.amp_down]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Integrator,
    /// Generalized contour formula with this many zeros.
    Ddp(usize),
    /// Single-zero `exp(−2 Im D)`.
    StandardDdp,
    ClosedForm(&'static str),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Integrator => f.write_str("integrator"),
            Method::Ddp(n) => write!(f, "ddp:{n}"),
            Method::StandardDdp => f.write_str("ddp:standard"),
            Method::ClosedForm(id) => write!(f, "closed-form:{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionResult {
    pub probability: f64,
    pub method: Method,
    /// Half-width of the final symmetric window, or the final time for
    /// finite-time runs.
    pub window: Option<f64>,
    pub converged: bool,
    pub residual: f64,
    pub norm_defect: f64,
}

impl TransitionResult {
    pub fn exact(probability: f64, method: Method) -> Self {
        TransitionResult {
            probability,
            method,
            window: None,
            converged: true,
            residual: 0.0,
            norm_defect: 0.0,
        }
    }
}

/// How the asymptotic probability is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// Start and project on the `↑`-connected instantaneous eigenstate.
    #[default]
    Adiabatic,
    /// Start in `(1, 0)` and report `|ψ↑|²`.
    Diabatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub rtol: f64,
    /// Window-doubling tolerance on the probability.
    pub tol: f64,
    pub readout: Readout,
    pub max_doublings: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rtol: 1e-10,
            tol: 1e-6,
            readout: Readout::Adiabatic,
            max_doublings: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evolution {
    pub state: TwoLevelState,
    pub norm_defect: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowReport {
    pub window: f64,
    pub probability: f64,
    pub residual: f64,
    pub doublings: usize,
    pub norm_defect: f64,
}

enum Clock {
    Physical,
    /// Tangent family in `τ`; carries `(A, B, T)`.
    Gudermannian(f64, f64, f64),
}

fn clock(p: &SweepProfile) -> Clock {
    match *p.sweep() {
        Sweep::Tangent { a, b, t } => Clock::Gudermannian(a, b, t),
        _ => Clock::Physical,
    }
}

impl Clock {
    /// Bias and gap, multiplied by `dt/ds`, at clock time `s`.
    fn fields(&self, p: &SweepProfile, s: f64) -> Result<(f64, f64)> {
        match *self {
            Clock::Physical => p.fields(s),
            Clock::Gudermannian(a, b, t) => {
                let x = s / t;
                Ok((2.0 * b * x.tanh(), 2.0 * a / x.cosh()))
            }
        }
    }

    fn clock_time(&self, t: f64) -> f64 {
        match *self {
            Clock::Physical => t,
            Clock::Gudermannian(_, _, tt) => tt * (t / tt).tan().asinh(),
        }
    }
}

fn check_rtol(rtol: f64) -> Result<()> {
    if (1e-13..=1e-6).contains(&rtol) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "rtol must lie in [1e-13, 1e-6], got {rtol}"
        )))
    }
}

/// Largest rotation angle `|E| h` allowed in one step; the error estimate
/// is unreliable when a step wraps the Bloch sphere many times.
const MAX_PHASE: f64 = 1.0;

fn evolve_clock(
    p: &SweepProfile,
    clk: &Clock,
    s0: f64,
    s1: f64,
    y0: Amplitudes,
    rtol: f64,
) -> Result<Evolution> {
    let fields = |s: f64| clk.fields(p, s);
    let cap = |s: f64| match clk.fields(p, s) {
        Ok((e, g)) => {
            let en = e.hypot(g);
            if en > 0.0 {
                MAX_PHASE / en
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    };
    let ctl = StepControl { rtol, atol: rtol };
    // Split at the crossing so kinks and steep fronts at t = 0 land on a step edge.
    let mut cuts = vec![s0];
    if (s0 < 0.0 && s1 > 0.0) || (s0 > 0.0 && s1 < 0.0) {
        cuts.push(0.0);
    }
    cuts.push(s1);
    let mut y = y0;
    let n0 = y0[0].norm_sqr() + y0[1].norm_sqr();
    let (mut defect, mut steps) = (0.0f64, 0usize);
    for w in cuts.windows(2) {
        let (yn, st) = ode::integrate(&fields, &cap, w[0], w[1], y, ctl)?;
        y = yn;
        steps += st.accepted;
        defect = defect
            .max(st.norm_defect)
            .max((y[0].norm_sqr() + y[1].norm_sqr() - n0).abs());
    }
    Ok(Evolution {
        state: TwoLevelState {
            amp_up: y[0],
            amp_down: y[1],
            t: s1,
        },
        norm_defect: defect,
        steps,
    })
}

/// Evolves `psi0` from `t0` to `t1` (physical times; either direction).
pub fn evolve(
    p: &SweepProfile,
    t0: f64,
    t1: f64,
    psi0: TwoLevelState,
    rtol: f64,
) -> Result<Evolution> {
    check_rtol(rtol)?;
    if (psi0.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "initial state not normalized: {}",
            psi0.norm_sqr()
        )));
    }
    let clk = clock(p);
    let mut ev = evolve_clock(
        p,
        &clk,
        clk.clock_time(t0),
        clk.clock_time(t1),
        psi0.amps(),
        rtol,
    )?;
    ev.state.t = t1;
    Ok(ev)
}

/// Eigenvector of `ε σz + Δ σx` continuously connected to `(1, 0)`.
fn up_like(e: f64, g: f64) -> Amplitudes {
    let phi = if e == 0.0 {
        std::f64::consts::FRAC_PI_2 * g.signum()
    } else {
        (g / e).atan()
    };
    let (s, c) = (0.5 * phi).sin_cos();
    [C::new(c, 0.0), C::new(s, 0.0)]
}

/// `up_like` corrected to first order in the adiabatic coupling, so the
/// readout stops oscillating with the window edge much sooner.
fn superadiabatic(p: &SweepProfile, clk: &Clock, s: f64) -> Result<Amplitudes> {
    let (e, g) = clk.fields(p, s)?;
    let u = up_like(e, g);
    if e == 0.0 {
        return Ok(u);
    }
    let h = 1e-5 * s.abs().max(1.0);
    let angle = |x: f64| -> Result<f64> {
        let (e, g) = clk.fields(p, x)?;
        Ok((g / e).atan())
    };
    let (a, b) = (angle(s + h), angle(s - h));
    let (a, b) = match (a, b) {
        (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => (a, b),
        _ => return Ok(u),
    };
    let dphi = (a - b) / (2.0 * h);
    let en = e.hypot(g);
    let lambda = e.signum() * en;
    let beta = C::new(0.0, -dphi / (2.0 * lambda));
    let perp = [-u[1], u[0]];
    let y = [u[0] + beta * perp[0], u[1] + beta * perp[1]];
    let n = (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
    Ok([y[0] / n, y[1] / n])
}

fn overlap2(u: &Amplitudes, y: &Amplitudes) -> f64 {
    (u[0].conj() * y[0] + u[1].conj() * y[1]).norm_sqr()
}

/// Starting window half-width `max(10 τ, 20/√v0, 5 T)` in clock units.
pub fn initial_window(p: &SweepProfile) -> f64 {
    let mut w: f64 = 0.0;
    if let Ok(d) = p.crossing_derivatives() {
        if d.v0 > 0.0 {
            if let Ok(tau) = crossing_duration(d.v0, d.gap0.abs()) {
                w = w.max(10.0 * tau);
            }
            w = w.max(20.0 / d.v0.sqrt());
        }
        if w == 0.0 && d.gap0 > 0.0 {
            w = 20.0 / d.gap0;
        }
    }
    if let Some(t) = p.time_scale() {
        w = w.max(5.0 * t);
    }
    if w == 0.0 {
        w = 20.0;
    }
    w
}

/// Probability of remaining on the `↑`-connected branch across `[−w, w]`
/// (clock units).
pub fn window_probability(
    p: &SweepProfile,
    w: f64,
    rtol: f64,
    readout: Readout,
) -> Result<(f64, f64)> {
    clock_interval_probability(p, &clock(p), -w, w, rtol, readout)
}

/// Same as [`window_probability`] over an arbitrary physical interval `[t0, t1]`.
pub fn interval_probability(
    p: &SweepProfile,
    t0: f64,
    t1: f64,
    rtol: f64,
    readout: Readout,
) -> Result<(f64, f64)> {
    let clk = clock(p);
    clock_interval_probability(
        p,
        &clk,
        clk.clock_time(t0),
        clk.clock_time(t1),
        rtol,
        readout,
    )
}

fn clock_interval_probability(
    p: &SweepProfile,
    clk: &Clock,
    s0: f64,
    s1: f64,
    rtol: f64,
    readout: Readout,
) -> Result<(f64, f64)> {
    check_rtol(rtol)?;
    let y0 = match readout {
        Readout::Adiabatic => superadiabatic(p, clk, s0)?,
        Readout::Diabatic => [C::new(1.0, 0.0), C::new(0.0, 0.0)],
    };
    let ev = evolve_clock(p, clk, s0, s1, y0, rtol)?;
    let y = ev.state.amps();
    let prob = match readout {
        Readout::Adiabatic => overlap2(&superadiabatic(p, clk, s1)?, &y),
        Readout::Diabatic => y[0].norm_sqr(),
    };
    Ok((prob, ev.norm_defect))
}

/// Bias reached at the first window edge, in units of `max(Δ(0), √v0)`,
/// beyond which the edge stops following the time rule.
const EDGE_BIAS: f64 = 1e3;

fn bias_unit(p: &SweepProfile) -> f64 {
    let d = p.crossing_derivatives().ok();
    let g = d
        .map(|d| d.gap0)
        .or_else(|| p.gap(0.0).ok())
        .unwrap_or(0.0)
        .abs();
    let v = d.map(|d| d.v0.abs().sqrt()).unwrap_or(0.0);
    let u = g.max(v);
    if u > 0.0 && u.is_finite() {
        u
    } else {
        1.0
    }
}

/// Half-width `w`, pulled in to where `min(|ε(−t)|, |ε(t)|)` first reaches
/// `level`. Leaves sweeps whose bias grows slowly or saturates untouched and
/// keeps exponentially growing ones from outrunning the stepper.
fn window_edge(p: &SweepProfile, clk: &Clock, w: f64, level: f64) -> f64 {
    if !matches!(clk, Clock::Physical) {
        return w;
    }
    let reach = |t: f64| match (p.bias(t), p.bias(-t)) {
        (Ok(a), Ok(b)) => a.abs().min(b.abs()),
        _ => f64::INFINITY,
    };
    if reach(w) <= level {
        return w;
    }
    let (mut lo, mut hi) = (0.0, w);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if reach(mid) > level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Doubles the symmetric window until the probability settles within `tol`.
pub fn converge_window(p: &SweepProfile, settings: &Settings) -> Result<WindowReport> {
    let clk = clock(p);
    let (mut w_time, mut level) = (initial_window(p), EDGE_BIAS * bias_unit(p));
    let mut w = window_edge(p, &clk, w_time, level);
    let (mut prev, mut defect) = window_probability(p, w, settings.rtol, settings.readout)?;
    let mut residual = f64::INFINITY;
    for k in 1..=settings.max_doublings {
        w_time *= 2.0;
        level *= 2.0;
        w = window_edge(p, &clk, w_time, level);
        let (prob, d) = window_probability(p, w, settings.rtol, settings.readout)?;
        defect = defect.max(d);
        residual = (prob - prev).abs();
        if residual < settings.tol {
            return Ok(WindowReport {
                window: w,
                probability: prob,
                residual,
                doublings: k,
                norm_defect: defect,
            });
        }
        prev = prob;
    }
    Err(Error::NonAsymptotic {
        doublings: settings.max_doublings,
        residual,
    })
}

/// Asymptotic probability of staying in the initial diabatic state.
pub fn diabatic_persistence_probability(
    p: &SweepProfile,
    settings: &Settings,
) -> Result<TransitionResult> {
    let r = converge_window(p, settings)?;
    Ok(TransitionResult {
        probability: r.probability,
        method: Method::Integrator,
        window: Some(r.window),
        converged: true,
        residual: r.residual,
        norm_defect: r.norm_defect,
    })
}

/// Starts in the ground state of `H(t0)` and returns the population of the
/// excited state of `H(t1)`.
pub fn adiabatic_transition_probability(
    p: &SweepProfile,
    t0: f64,
    t1: f64,
    rtol: f64,
) -> Result<TransitionResult> {
    check_rtol(rtol)?;
    let clk = clock(p);
    let (s0, s1) = (clk.clock_time(t0), clk.clock_time(t1));
    let (e0, g0) = clk.fields(p, s0)?;
    let th0 = g0.atan2(e0);
    let ground = [
        C::new((0.5 * th0).sin(), 0.0),
        C::new(-(0.5 * th0).cos(), 0.0),
    ];
    let ev = evolve_clock(p, &clk, s0, s1, ground, rtol)?;
    let (e1, g1) = clk.fields(p, s1)?;
    let th1 = g1.atan2(e1);
    let excited = [
        C::new((0.5 * th1).cos(), 0.0),
        C::new((0.5 * th1).sin(), 0.0),
    ];
    Ok(TransitionResult {
        probability: overlap2(&excited, &ev.state.amps()),
        method: Method::Integrator,
        window: Some(t1),
        converged: true,
        residual: 0.0,
        norm_defect: ev.norm_defect,
    })
}
