//! Eliminating a time-dependent gap by a change of clock.
//!
//! With `dt̃/dt = Δ(t)/Δ̃` the Hamiltonian `½[[ε, Δ], [Δ, −ε]]` becomes
//! `½[[ε̃, Δ̃], [Δ̃, −ε̃]]` in `t̃`, where `ε̃ = Δ̃ ε/Δ`. The map `t ↦ t̃` is
//! tabulated once; `G = t̃⁻¹` is recovered by a bracketed Newton solve.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::sweep::{Reparameterized, Sweep, SweepProfile};

/// Gap ratio below which the clock is considered stopped.
const STALL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TimeMap {
    source: SweepProfile,
    target_gap: f64,
    /// Physical times, ascending, containing 0.
    t: Vec<f64>,
    /// `t̃` at each node.
    tt: Vec<f64>,
}

fn tight() -> Tolerance {
    Tolerance::new(1e-15, 1e-13)
}

impl TimeMap {
    pub fn target_gap(&self) -> f64 {
        self.target_gap
    }

    pub fn source(&self) -> &SweepProfile {
        &self.source
    }

    /// Covered range of `t̃`.
    pub fn range(&self) -> (f64, f64) {
        (self.tt[0], self.tt[self.tt.len() - 1])
    }

    /// Covered range of physical `t`.
    pub fn physical_range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    fn rate(&self, t: f64) -> f64 {
        self.source
            .gap(t)
            .map(|g| g / self.target_gap)
            .unwrap_or(f64::NAN)
    }

    fn partial(&self, i: usize, t: f64) -> Result<f64> {
        Ok(self.tt[i] + quadrature::integrate(|s| self.rate(s), self.t[i], t, tight())?)
    }

    /// `t̃(t)`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.physical_range();
        if !(t >= lo && t <= hi) {
            return Err(Error::Coverage(format!(
                "t = {t} outside the tabulated range [{lo}, {hi}]"
            )));
        }
        let i = self
            .t
            .partition_point(|&x| x <= t)
            .saturating_sub(1)
            .min(self.t.len() - 2);
        self.partial(i, t)
    }

    /// `G(t̃)`, the physical time reached at clock value `t̃`.
    pub fn forward(&self, tt: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(tt >= lo && tt <= hi) {
            return Err(Error::Coverage(format!(
                "t̃ = {tt} outside the reachable range [{lo}, {hi}]"
            )));
        }
        let i = self
            .tt
            .partition_point(|&x| x <= tt)
            .saturating_sub(1)
            .min(self.tt.len() - 2);
        if tt == self.tt[i] {
            return Ok(self.t[i]);
        }
        let (mut a, mut b) = (self.t[i], self.t[i + 1]);
        let (ya, yb) = (self.tt[i], self.tt[i + 1]);
        let mut x = a + (b - a) * (tt - ya) / (yb - ya);
        for _ in 0..100 {
            let f = self.partial(i, x)? - tt;
            if f == 0.0 {
                return Ok(x);
            }
            if f > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let d = self.rate(x);
            let newton = x - f / d;
            let next = if d > 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if (next - x).abs() <= 1e-15 * x.abs().max(1e-300)
                || b - a <= 4.0 * f64::EPSILON * x.abs()
            {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// `(ε̃(t̃), Δ̃)`.
    pub fn equivalent_fields(&self, tt: f64) -> Result<(f64, f64)> {
        let t = self.forward(tt)?;
        let (e, g) = self.source.fields(t)?;
        if g <= 0.0 {
            if e == 0.0 {
                return Ok((0.0, self.target_gap));
            }
            return Err(Error::Domain(format!("gap vanishes at t = {t}")));
        }
        Ok((self.target_gap * e / g, self.target_gap))
    }
}

fn base_scale(p: &SweepProfile) -> f64 {
    let mut s = f64::INFINITY;
    if let Some(t) = p.time_scale() {
        s = s.min(t);
    }
    if let Ok(d) = p.crossing_derivatives() {
        if d.v0 > 0.0 {
            s = s.min(1.0 / d.v0.sqrt());
        }
        if d.gap0 > 0.0 {
            s = s.min(1.0 / d.gap0);
        }
    }
    if s.is_finite() {
        s
    } else {
        1.0
    }
}

/// Tabulates `t̃(t) = ∫₀ᵗ Δ/Δ̃` over the physical range `[−t_span, t_span]`,
/// stopping early on a side where the gap dies out.
pub fn build_time_map(p: &SweepProfile, target_gap: f64, t_span: f64) -> Result<TimeMap> {
    if !(target_gap > 0.0 && target_gap.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target gap must be > 0, got {target_gap}"
        )));
    }
    if !(t_span > 0.0 && t_span.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time span must be > 0, got {t_span}"
        )));
    }
    let (dlo, dhi) = p.domain();
    if dlo.is_finite() || dhi.is_finite() {
        return Err(Error::Unsupported(format!(
            "{}: bounded time domain",
            p.family()
        )));
    }
    let g0 = p.gap(0.0)?;
    let scale = base_scale(p);
    let reference = [g0, p.gap(scale)?, p.gap(-scale)?]
        .into_iter()
        .fold(0.0f64, f64::max);
    if reference <= 0.0 {
        return Err(Error::Domain("gap vanishes around the crossing".into()));
    }
    let h0 = scale / 16.0;
    let mut sides: [(Vec<f64>, Vec<f64>); 2] = Default::default();
    for (side, dir) in [(0usize, -1.0f64), (1, 1.0)] {
        let (ts, tts) = &mut sides[side];
        let (mut t, mut acc) = (0.0f64, 0.0f64);
        while t.abs() < t_span {
            let h = h0.max(0.05 * t.abs()).min(t_span - t.abs());
            let next = t + dir * h;
            let g = p.gap(next)?;
            if g < 0.0 || !g.is_finite() {
                return Err(Error::Domain(format!("gap is {g} at t = {next}")));
            }
            let piece = quadrature::integrate(
                |s| p.gap(s).unwrap_or(f64::NAN) / target_gap,
                t,
                next,
                tight(),
            )?;
            if piece * dir <= 0.0 {
                return Err(Error::Domain(format!("gap vanishes on [{t}, {next}]")));
            }
            acc += piece;
            t = next;
            ts.push(t);
            tts.push(acc);
            if g < STALL * reference {
                break;
            }
        }
    }
    let [(lt, ltt), (rt, rtt)] = sides;
    let t: Vec<f64> = lt
        .iter()
        .rev()
        .copied()
        .chain(std::iter::once(0.0))
        .chain(rt)
        .collect();
    let tt: Vec<f64> = ltt
        .iter()
        .rev()
        .copied()
        .chain(std::iter::once(0.0))
        .chain(rtt)
        .collect();
    Ok(TimeMap {
        source: p.clone(),
        target_gap,
        t,
        tt,
    })
}

/// Physical half-span tabulated by [`equivalent_profile`].
pub fn default_span(p: &SweepProfile) -> f64 {
    let mut s = base_scale(p);
    if let Some(t) = p.time_scale() {
        s = s.max(t);
    }
    if let Ok(d) = p.crossing_derivatives() {
        if d.v0 > 0.0 {
            s = s.max(1.0 / d.v0.sqrt()).max(d.gap0 / d.v0);
        }
    }
    1e4 * s
}

/// Constant-gap equivalent with `Δ̃ = Δ(0)`.
pub fn equivalent_profile(p: &SweepProfile) -> Result<SweepProfile> {
    let g0 = p.gap(0.0)?;
    if g0 <= 0.0 {
        return Err(Error::Domain(
            "Δ(0) = 0; pass an explicit target gap".into(),
        ));
    }
    equivalent_profile_with(p, g0, default_span(p))
}

pub fn equivalent_profile_with(
    p: &SweepProfile,
    target_gap: f64,
    t_span: f64,
) -> Result<SweepProfile> {
    let map = build_time_map(p, target_gap, t_span)?;
    SweepProfile::new(Sweep::Reparameterized(Reparameterized {
        map: Arc::new(map),
    }))
}

/// `(dε̃/dt̃, d²ε̃/dt̃², d³ε̃/dt̃³)` at the crossing, with `Δ̃ = Δ(0)`.
pub fn equivalent_derivatives(p: &SweepProfile) -> Result<(f64, f64, f64)> {
    let d = p.crossing_derivatives()?;
    if p.bias(0.0)? != 0.0 {
        return Err(Error::Unsupported(format!("{}: ε(0) ≠ 0", p.family())));
    }
    if d.gap0 <= 0.0 {
        return Err(Error::Domain("Δ(0) = 0".into()));
    }
    let (e1, e2, e3) = (d.v0, d.eps2, d.eps3);
    let (g, g1, g2) = (d.gap0, d.gap1, d.gap2);
    let r = 1.0 / g;
    // Δ̃ = Δ, so the Δ̃ⁿ prefactors cancel one power of Δ per order.
    let first = e1;
    let second = e2 - 3.0 * e1 * g1 * r;
    let third = e3 - 6.0 * e2 * g1 * r - 4.0 * e1 * g2 * r + 15.0 * e1 * g1 * g1 * r * r;
    Ok((first, second, third))
}

/// `(χ₂, χ₃)` of the constant-gap equivalent.
pub fn equivalent_nonlinearity(p: &SweepProfile) -> Result<(f64, f64)> {
    let (d1, d2, d3) = equivalent_derivatives(p)?;
    if d1 == 0.0 {
        return Err(Error::Unsupported(format!(
            "{}: vanishing sweep rate at the crossing",
            p.family()
        )));
    }
    let g = p.gap(0.0)?;
    Ok((g * d2 / (d1 * d1), g * g * d3 / (d1 * d1 * d1)))
}
