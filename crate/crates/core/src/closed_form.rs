//! Closed-form and perturbative transition probabilities.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::sweep::{Sweep, SweepProfile};

/// Inputs to the perturbative formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeInput {
    pub delta: f64,
    pub chi2: f64,
    pub chi3: f64,
}

impl PerturbativeInput {
    pub fn new(delta: f64, chi2: f64, chi3: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {delta}"
            )));
        }
        Ok(PerturbativeInput { delta, chi2, chi3 })
    }

    pub fn from_profile(p: &SweepProfile) -> Result<Self> {
        let d = p.crossing_derivatives()?;
        let delta = d
            .delta
            .ok_or_else(|| Error::Unsupported("vanishing sweep rate at the crossing".into()))?;
        let (chi2, chi3) = p.nonlinearity_params()?;
        PerturbativeInput::new(delta, chi2, chi3)
    }

    /// True when the nonlinearity is too strong for the expansions to be trusted.
    pub fn outside_regime(&self) -> bool {
        self.chi2.abs() >= 0.3 || self.chi3.abs() >= 0.3
    }
}

pub fn lzsm(delta: f64) -> f64 {
    (-2.0 * PI * delta).exp()
}

pub fn quadratic_corrected(delta: f64, chi2: f64) -> f64 {
    (-2.0 * PI * delta * (1.0 - 3.0 * chi2 * chi2 / 8.0)).exp()
}

pub fn quadratic_corrected_alt(delta: f64, chi2: f64) -> f64 {
    lzsm(delta) * (1.0 + 0.75 * PI * delta * chi2 * chi2)
}

pub fn cubic_corrected(delta: f64, chi3: f64) -> f64 {
    (-2.0 * PI * delta * (1.0 + chi3 / 8.0)).exp()
}

/// First-order expansion of [`cubic_corrected`] in `χ₃`.
pub fn cubic_corrected_linear(delta: f64, chi3: f64) -> f64 {
    lzsm(delta) * (1.0 - PI * delta * chi3 / 4.0)
}

pub fn unified_corrected(delta: f64, chi2: f64, chi3: f64) -> f64 {
    (-2.0 * PI * delta * (1.0 - 3.0 * chi2 * chi2 / 8.0 + chi3 / 8.0)).exp()
}

/// Linear bias with a gap of slope `Δ′`; `slope` is `Δ′/v`.
pub fn variable_gap_corrected(delta: f64, slope: f64) -> f64 {
    (-2.0 * PI * delta * (1.0 - 1.5 * slope * slope)).exp()
}

pub fn demkov_kunike(a: f64, b: f64, t: f64) -> f64 {
    let d = b * b - a * a;
    let num = if d >= 0.0 {
        (PI * d.sqrt() * t).cosh()
    } else {
        (PI * (-d).sqrt() * t).cos()
    };
    (num / (PI * b * t).cosh()).powi(2)
}

pub fn rosen_zener(a: f64, b: f64, t: f64) -> f64 {
    1.0 - ((PI * b * t).sin() / (PI * a * t).cosh()).powi(2)
}

/// Transition probability for the rotating field, `x = ω/Ω`, phase
/// `θ = √(Ω² + ω²)·t`.
pub fn rotating_field(x: f64, theta: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    0.5 * x * x / (1.0 + x * x) * (1.0 - theta.cos())
}

/// [`rotating_field`] after half a turn of the field, `t = π/ω`.
pub fn rotating_field_half_turn(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    rotating_field(x, PI * (1.0 + 1.0 / (x * x)).sqrt())
}

pub fn square_pulse_limit(amp: f64, gap: f64) -> f64 {
    if amp == 0.0 {
        return 0.0;
    }
    amp * amp / (gap * gap + amp * amp)
}

/// Two-zero DDP result for `ε = A sinh(t/T)` with `ξ = Δ/A > 1`, from
/// one-dimensional quadratures along `0 → ν → ν + iπT/2`.
pub fn sinh_large_xi(amp: f64, t: f64, gap: f64) -> Result<f64> {
    let (re, im) = sinh_large_xi_action(amp, t, gap)?;
    Ok(2.0 * (-2.0 * im).exp() * (1.0 + (2.0 * re).cos()))
}

/// `(Re D, Im D)` at the zero `ν + iπT/2`.
pub fn sinh_large_xi_action(amp: f64, t: f64, gap: f64) -> Result<(f64, f64)> {
    if !(amp > 0.0 && t > 0.0 && gap > 0.0) {
        return Err(Error::InvalidParameter("A, T and Δ must be > 0".into()));
    }
    let xi = gap / amp;
    if xi == 1.0 {
        return Err(Error::MultipleZero(num_complex::Complex64::new(
            0.0,
            PI * t / 2.0,
        )));
    }
    if xi < 1.0 {
        return Err(Error::Domain(format!(
            "ξ = {xi} < 1 has a single lowest zero; use the standard formula"
        )));
    }
    let s = (xi * xi - 1.0).sqrt();
    // On the vertical leg E²/A² = w(y) = (2ξ² − 1)cos²y + iξ√(ξ² − 1)sin 2y.
    let w = |y: f64| {
        (
            (2.0 * xi * xi - 1.0) * y.cos().powi(2),
            xi * s * (2.0 * y).sin(),
        )
    };
    let j = |y: f64| {
        let (u1, u2) = w(y);
        (0.5 * (u1 + u1.hypot(u2))).max(0.0).sqrt()
    };
    let r = |y: f64| {
        let (u1, u2) = w(y);
        let jj = j(y);
        if jj > 0.0 {
            u2 / (2.0 * jj)
        } else {
            (-u1).max(0.0).sqrt()
        }
    };
    let tol = Tolerance::new(1e-14, 1e-12);
    let horizontal = quadrature::integrate(
        |x| (xi * xi + x.sinh().powi(2)).sqrt(),
        0.0,
        xi.acosh(),
        tol,
    )?;
    let re = amp * t * (horizontal - quadrature::integrate(r, 0.0, PI / 2.0, tol)?);
    let im = amp * t * quadrature::integrate(j, 0.0, PI / 2.0, tol)?;
    Ok((re, im))
}

/// Names accepted by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaId {
    Lzsm,
    Quadratic,
    QuadraticAlt,
    Cubic,
    Unified,
    VariableGap,
    DemkovKunike,
    RosenZener,
    RotatingField,
    SquarePulse,
    SinhLargeXi,
    DoublePassage,
}

impl FormulaId {
    pub const ALL: [FormulaId; 12] = [
        FormulaId::Lzsm,
        FormulaId::Quadratic,
        FormulaId::QuadraticAlt,
        FormulaId::Cubic,
        FormulaId::Unified,
        FormulaId::VariableGap,
        FormulaId::DemkovKunike,
        FormulaId::RosenZener,
        FormulaId::RotatingField,
        FormulaId::SquarePulse,
        FormulaId::SinhLargeXi,
        FormulaId::DoublePassage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaId::Lzsm => "lzsm",
            FormulaId::Quadratic => "quadratic",
            FormulaId::QuadraticAlt => "quadratic-alt",
            FormulaId::Cubic => "cubic",
            FormulaId::Unified => "unified",
            FormulaId::VariableGap => "variable-gap",
            FormulaId::DemkovKunike => "demkov-kunike",
            FormulaId::RosenZener => "rosen-zener",
            FormulaId::RotatingField => "rotating-field",
            FormulaId::SquarePulse => "square-pulse",
            FormulaId::SinhLargeXi => "sinh-large-xi",
            FormulaId::DoublePassage => "double-passage",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        FormulaId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown closed form `{s}`")))
    }
}

/// Evaluates a formula with its arguments read off the profile. The rotating
/// field is evaluated after half a turn.
pub fn evaluate(id: FormulaId, p: &SweepProfile) -> Result<f64> {
    let mismatch = || {
        Err(Error::Unsupported(format!(
            "closed form `{id}` does not apply to the {} family",
            p.family()
        )))
    };
    let pert = || PerturbativeInput::from_profile(p);
    match id {
        FormulaId::Lzsm => Ok(lzsm(pert()?.delta)),
        FormulaId::Quadratic => pert().map(|q| quadratic_corrected(q.delta, q.chi2)),
        FormulaId::QuadraticAlt => pert().map(|q| quadratic_corrected_alt(q.delta, q.chi2)),
        FormulaId::Cubic => pert().map(|q| cubic_corrected(q.delta, q.chi3)),
        FormulaId::Unified => pert().map(|q| unified_corrected(q.delta, q.chi2, q.chi3)),
        FormulaId::VariableGap => {
            let d = p.crossing_derivatives()?;
            let q = pert()?;
            Ok(variable_gap_corrected(q.delta, d.gap1 / d.v0))
        }
        FormulaId::DemkovKunike => match *p.sweep() {
            Sweep::DemkovKunike { a, b, t } | Sweep::Tangent { a, b, t } => {
                Ok(demkov_kunike(a, b, t))
            }
            _ => mismatch(),
        },
        FormulaId::RosenZener => match *p.sweep() {
            Sweep::RosenZener { a, b, t } => Ok(rosen_zener(a, b, t)),
            _ => mismatch(),
        },
        FormulaId::RotatingField => match *p.sweep() {
            Sweep::RotatingField { omega_field, omega } => {
                Ok(rotating_field_half_turn(omega / omega_field))
            }
            _ => mismatch(),
        },
        FormulaId::SquarePulse => match *p.sweep() {
            Sweep::PowerLaw { amp, gap, .. } | Sweep::Erf { amp, gap, .. } => {
                Ok(square_pulse_limit(amp, gap))
            }
            _ => mismatch(),
        },
        FormulaId::SinhLargeXi => match *p.sweep() {
            Sweep::Sinh { amp, t, gap } => sinh_large_xi(amp, t, gap),
            _ => mismatch(),
        },
        FormulaId::DoublePassage => match *p.sweep() {
            Sweep::Quadratic { v0, v1, gap } => {
                Ok(crate::ddp::double_passage_probability(v0, v1, gap)?.probability)
            }
            _ => mismatch(),
        },
    }
}
