//! Adaptive unitary stepper for `i dψ/dt = ½(ε σz + Δ σx) ψ`.
//!
//! Each step applies the exact exponential of the fourth-order Magnus
//! expansion (two Gauss nodes plus the commutator term), so the propagator is
//! in SU(2) by construction and the norm only drifts by rounding. The local
//! error is estimated by step doubling.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;
pub type Amplitudes = [C; 2];

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NODE_LO: f64 = 0.5 - SQRT3 / 6.0;
const NODE_HI: f64 = 0.5 + SQRT3 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest `| ‖y‖² − ‖y0‖² |` seen at accepted steps.
    pub norm_defect: f64,
}

fn norm2(y: &Amplitudes) -> f64 {
    y[0].norm_sqr() + y[1].norm_sqr()
}

/// One Magnus step of signed length `h` from `t`.
fn step(
    fields: &impl Fn(f64) -> Result<(f64, f64)>,
    t: f64,
    h: f64,
    y: &Amplitudes,
) -> Result<Amplitudes> {
    let (e1, g1) = fields(t + NODE_LO * h)?;
    let (e2, g2) = fields(t + NODE_HI * h)?;
    // Ω = −i (ax σx + ay σy + az σz)
    let az = 0.25 * h * (e1 + e2);
    let ax = 0.25 * h * (g1 + g2);
    let ay = SQRT3 * h * h * (e2 * g1 - e1 * g2) / 24.0;
    let theta = (ax * ax + ay * ay + az * az).sqrt();
    let (s, c) = theta.sin_cos();
    let k = if theta > 0.0 { s / theta } else { 1.0 };
    let (nx, ny, nz) = (k * ax, k * ay, k * az);
    let i = C::new(0.0, 1.0);
    let u00 = C::new(c, -nz);
    let u11 = C::new(c, nz);
    let u01 = -i * C::new(nx, -ny);
    let u10 = -i * C::new(nx, ny);
    Ok([u00 * y[0] + u01 * y[1], u10 * y[0] + u11 * y[1]])
}

/// Integrates from `t0` to `t1` (either direction) for the Hamiltonian
/// `½[[ε, Δ], [Δ, −ε]]` with `fields(t) = (ε, Δ)`.
/// `max_step(t)` bounds the step magnitude at time `t`.
pub fn integrate(
    fields: &impl Fn(f64) -> Result<(f64, f64)>,
    max_step: &impl Fn(f64) -> f64,
    t0: f64,
    t1: f64,
    y0: Amplitudes,
    ctl: StepControl,
) -> Result<(Amplitudes, Stats)> {
    let mut stats = Stats::default();
    if t0 == t1 {
        return Ok((y0, stats));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let n0 = norm2(&y0);
    let mut t = t0;
    let mut y = y0;
    let mut h = (0.01 * span).min(max_step(t));
    loop {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-15 * t1.abs().max(1.0) {
            break;
        }
        h = h.min(max_step(t)).min(remaining);
        if h <= 1e-14 * t.abs().max(1e-3) {
            return Err(Error::IntegrationFailure {
                t,
                reason: "step size underflow".into(),
            });
        }
        let hs = dir * h;
        let full = step(fields, t, hs, &y)?;
        let mid = step(fields, t, 0.5 * hs, &y)?;
        let fine = step(fields, t + 0.5 * hs, 0.5 * hs, &mid)?;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let sc = ctl.atol + ctl.rtol * y[i].norm().max(fine[i].norm());
            err = err.max((fine[i] - full[i]).norm() / (15.0 * sc));
        }
        if !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: "non-finite state".into(),
            });
        }
        if err <= 1.0 {
            t = if h == remaining { t1 } else { t + hs };
            y = fine;
            stats.accepted += 1;
            stats.norm_defect = stats.norm_defect.max((norm2(&y) - n0).abs());
            h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok((y, stats))
}
