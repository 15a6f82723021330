//! Catalog of bias/gap profiles `(ε(t), Δ(t))`.
//!
//! Every family crosses at `t = 0` unless it has no crossing at all
//! (Rosen-Zener, rotating field) or is deliberately double-passage
//! (quadratic, parabolic). Real arguments always go through the real
//! formulas; complex arguments use the analytic continuation.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gap_transform::TimeMap;

type C = Complex64;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Linear,
    TanhModulated,
    Quadratic,
    Parabolic,
    Cubic,
    Superlinear,
    Sublinear,
    Sine,
    Sinh,
    Tanh,
    DemkovKunike,
    Tangent,
    RosenZener,
    PowerLaw,
    Erf,
    RotatingField,
    GaussianGap,
    TanhGap,
    PowerGap,
    Reparameterized,
}

impl Family {
    pub const ALL: [Family; 20] = [
        Family::Linear,
        Family::TanhModulated,
        Family::Quadratic,
        Family::Parabolic,
        Family::Cubic,
        Family::Superlinear,
        Family::Sublinear,
        Family::Sine,
        Family::Sinh,
        Family::Tanh,
        Family::DemkovKunike,
        Family::Tangent,
        Family::RosenZener,
        Family::PowerLaw,
        Family::Erf,
        Family::RotatingField,
        Family::GaussianGap,
        Family::TanhGap,
        Family::PowerGap,
        Family::Reparameterized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::TanhModulated => "tanh-modulated",
            Family::Quadratic => "quadratic",
            Family::Parabolic => "parabolic",
            Family::Cubic => "cubic",
            Family::Superlinear => "superlinear",
            Family::Sublinear => "sublinear",
            Family::Sine => "sine",
            Family::Sinh => "sinh",
            Family::Tanh => "tanh",
            Family::DemkovKunike => "demkov-kunike",
            Family::Tangent => "tangent",
            Family::RosenZener => "rosen-zener",
            Family::PowerLaw => "power-law",
            Family::Erf => "erf",
            Family::RotatingField => "rotating-field",
            Family::GaussianGap => "gaussian-gap",
            Family::TanhGap => "tanh-gap",
            Family::PowerGap => "power-gap",
            Family::Reparameterized => "reparameterized",
        }
    }

    /// Parameter names accepted by [`make_profile`], in paper notation.
    /// `gap`, where listed, defaults to 1.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Family::Linear => &["v", "gap"],
            Family::TanhModulated => &["v0", "alpha", "T", "gap"],
            Family::Quadratic => &["v0", "v1", "gap"],
            Family::Parabolic => &["eps0", "alpha", "gap"],
            Family::Cubic => &["v0", "chi3", "gap"],
            Family::Superlinear | Family::Sublinear => &["v", "lambda", "gap"],
            Family::Sine | Family::Sinh | Family::Tanh => &["A", "T", "gap"],
            Family::DemkovKunike | Family::Tangent => &["A", "B", "T"],
            Family::RosenZener => &["a", "b", "T"],
            Family::PowerLaw => &["A", "T", "a", "gap"],
            Family::Erf => &["A", "sigma", "T", "gap"],
            Family::RotatingField => &["Omega", "omega"],
            Family::GaussianGap => &["v", "gap0", "T"],
            Family::TanhGap => &["v", "gap0", "alpha", "T"],
            Family::PowerGap => &["v", "gap0", "d0", "a", "T"],
            Family::Reparameterized => &[],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Family parameters. Field names follow the paper's symbols; `amp` is `A`.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Linear {
        v: f64,
        gap: f64,
    },
    TanhModulated {
        v0: f64,
        alpha: f64,
        t: f64,
        gap: f64,
    },
    Quadratic {
        v0: f64,
        v1: f64,
        gap: f64,
    },
    Parabolic {
        eps0: f64,
        alpha: f64,
        gap: f64,
    },
    Cubic {
        v0: f64,
        chi3: f64,
        gap: f64,
    },
    Superlinear {
        v: f64,
        lambda: f64,
        gap: f64,
    },
    Sublinear {
        v: f64,
        lambda: f64,
        gap: f64,
    },
    Sine {
        amp: f64,
        t: f64,
        gap: f64,
    },
    Sinh {
        amp: f64,
        t: f64,
        gap: f64,
    },
    Tanh {
        amp: f64,
        t: f64,
        gap: f64,
    },
    DemkovKunike {
        a: f64,
        b: f64,
        t: f64,
    },
    Tangent {
        a: f64,
        b: f64,
        t: f64,
    },
    RosenZener {
        a: f64,
        b: f64,
        t: f64,
    },
    PowerLaw {
        amp: f64,
        t: f64,
        a: f64,
        gap: f64,
    },
    Erf {
        amp: f64,
        sigma: f64,
        t: f64,
        gap: f64,
    },
    RotatingField {
        omega_field: f64,
        omega: f64,
    },
    GaussianGap {
        v: f64,
        gap0: f64,
        t: f64,
    },
    TanhGap {
        v: f64,
        gap0: f64,
        alpha: f64,
        t: f64,
    },
    PowerGap {
        v: f64,
        gap0: f64,
        d0: f64,
        a: f64,
        t: f64,
    },
    Reparameterized(Reparameterized),
}

/// Constant-gap profile produced by eliminating a time-dependent gap.
#[derive(Debug, Clone)]
pub struct Reparameterized {
    pub map: Arc<TimeMap>,
}

impl PartialEq for Reparameterized {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.map, &other.map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analyticity {
    /// Analytic except for isolated singularities at least this far from
    /// the real axis (`f64::INFINITY` for entire functions).
    Analytic { singularity_distance: f64 },
    /// Real-axis evaluation only.
    NonAnalytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    Constant,
    TimeDependent,
}

/// Derivatives of bias and gap at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingData {
    pub v0: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub gap0: f64,
    pub gap1: f64,
    pub gap2: f64,
    /// `gap0² / (4 v0)`; `None` when `v0 <= 0`.
    pub delta: Option<f64>,
}

/// Value and first derivative of bias and gap at a complex time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub eps: C,
    pub deps: C,
    pub gap: C,
    pub dgap: C,
}

impl Jet {
    /// `E² = ε² + Δ²`.
    pub fn e2(&self) -> C {
        self.eps * self.eps + self.gap * self.gap
    }

    /// `d(E²)/dt`.
    pub fn de2(&self) -> C {
        2.0 * (self.eps * self.deps + self.gap * self.dgap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepProfile {
    sweep: Sweep,
    analyticity: Analyticity,
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {x}"
        )))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    finite(name, x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be > 0, got {x}"
        )))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    finite(name, x)?;
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be >= 0, got {x}"
        )))
    }
}

fn below_one(name: &str, x: f64) -> Result<()> {
    finite(name, x)?;
    if x.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "|{name}| must be < 1 so the rate keeps its sign, got {x}"
        )))
    }
}

fn is_odd_integer(a: f64) -> bool {
    a.fract() == 0.0 && (a as i64) % 2 == 1
}

fn is_even_integer(a: f64) -> bool {
    a.fract() == 0.0 && (a as i64) % 2 == 0
}

fn sech_c(z: C) -> Result<C> {
    let c = z.cosh();
    if c.norm() < 1e-14 {
        return Err(Error::Singularity(z));
    }
    Ok(c.inv())
}

/// Builds a profile from a family name and a key/value parameter record.
pub fn make_profile(family: Family, params: &BTreeMap<String, f64>) -> Result<SweepProfile> {
    for k in params.keys() {
        if !family.keys().contains(&k.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "`{k}` is not a parameter of the {family} family (expected {:?})",
                family.keys()
            )));
        }
    }
    let get = |k: &str| -> Result<f64> {
        params
            .get(k)
            .copied()
            .or(if k == "gap" { Some(1.0) } else { None })
            .ok_or_else(|| Error::InvalidParameter(format!("{family} requires `{k}`")))
    };
    let sweep = match family {
        Family::Linear => Sweep::Linear {
            v: get("v")?,
            gap: get("gap")?,
        },
        Family::TanhModulated => Sweep::TanhModulated {
            v0: get("v0")?,
            alpha: get("alpha")?,
            t: get("T")?,
            gap: get("gap")?,
        },
        Family::Quadratic => Sweep::Quadratic {
            v0: get("v0")?,
            v1: get("v1")?,
            gap: get("gap")?,
        },
        Family::Parabolic => Sweep::Parabolic {
            eps0: get("eps0")?,
            alpha: get("alpha")?,
            gap: get("gap")?,
        },
        Family::Cubic => Sweep::Cubic {
            v0: get("v0")?,
            chi3: get("chi3")?,
            gap: get("gap")?,
        },
        Family::Superlinear => Sweep::Superlinear {
            v: get("v")?,
            lambda: get("lambda")?,
            gap: get("gap")?,
        },
        Family::Sublinear => Sweep::Sublinear {
            v: get("v")?,
            lambda: get("lambda")?,
            gap: get("gap")?,
        },
        Family::Sine => Sweep::Sine {
            amp: get("A")?,
            t: get("T")?,
            gap: get("gap")?,
        },
        Family::Sinh => Sweep::Sinh {
            amp: get("A")?,
            t: get("T")?,
            gap: get("gap")?,
        },
        Family::Tanh => Sweep::Tanh {
            amp: get("A")?,
            t: get("T")?,
            gap: get("gap")?,
        },
        Family::DemkovKunike => Sweep::DemkovKunike {
            a: get("A")?,
            b: get("B")?,
            t: get("T")?,
        },
        Family::Tangent => Sweep::Tangent {
            a: get("A")?,
            b: get("B")?,
            t: get("T")?,
        },
        Family::RosenZener => Sweep::RosenZener {
            a: get("a")?,
            b: get("b")?,
            t: get("T")?,
        },
        Family::PowerLaw => Sweep::PowerLaw {
            amp: get("A")?,
            t: get("T")?,
            a: get("a")?,
            gap: get("gap")?,
        },
        Family::Erf => Sweep::Erf {
            amp: get("A")?,
            sigma: get("sigma")?,
            t: get("T")?,
            gap: get("gap")?,
        },
        Family::RotatingField => Sweep::RotatingField {
            omega_field: get("Omega")?,
            omega: get("omega")?,
        },
        Family::GaussianGap => Sweep::GaussianGap {
            v: get("v")?,
            gap0: get("gap0")?,
            t: get("T")?,
        },
        Family::TanhGap => Sweep::TanhGap {
            v: get("v")?,
            gap0: get("gap0")?,
            alpha: get("alpha")?,
            t: get("T")?,
        },
        Family::PowerGap => Sweep::PowerGap {
            v: get("v")?,
            gap0: get("gap0")?,
            d0: get("d0")?,
            a: get("a")?,
            t: get("T")?,
        },
        Family::Reparameterized => {
            return Err(Error::InvalidParameter(
                "reparameterized profiles are built from a time map, not parameters".into(),
            ))
        }
    };
    SweepProfile::new(sweep)
}

/// `τ = (1/√v)·max(1, Δ/(2√v))`.
pub fn crossing_duration(v: f64, gap: f64) -> Result<f64> {
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::Domain(format!("sweep rate must be > 0, got {v}")));
    }
    if gap.is_nan() || gap < 0.0 {
        return Err(Error::Domain(format!("gap must be >= 0, got {gap}")));
    }
    let s = v.sqrt();
    Ok((1.0 / s) * f64::max(1.0, gap / (2.0 * s)))
}

impl SweepProfile {
    pub fn new(sweep: Sweep) -> Result<Self> {
        use Sweep::*;
        let inf = f64::INFINITY;
        let strip = |t: f64| Analyticity::Analytic {
            singularity_distance: FRAC_PI_2 * t,
        };
        let entire = Analyticity::Analytic {
            singularity_distance: inf,
        };
        let analyticity = match &sweep {
            Linear { v, gap } => {
                positive("v", *v)?;
                non_negative("gap", *gap)?;
                entire
            }
            TanhModulated { v0, alpha, t, gap } => {
                positive("v0", *v0)?;
                below_one("alpha", *alpha)?;
                positive("T", *t)?;
                non_negative("gap", *gap)?;
                strip(*t)
            }
            Quadratic { v0, v1, gap } => {
                positive("v0", *v0)?;
                finite("v1", *v1)?;
                non_negative("gap", *gap)?;
                entire
            }
            Parabolic { eps0, alpha, gap } => {
                finite("eps0", *eps0)?;
                finite("alpha", *alpha)?;
                if *alpha == 0.0 {
                    return Err(Error::InvalidParameter("alpha must be nonzero".into()));
                }
                non_negative("gap", *gap)?;
                entire
            }
            Cubic { v0, chi3, gap } => {
                positive("v0", *v0)?;
                finite("chi3", *chi3)?;
                positive("gap", *gap)?;
                entire
            }
            Superlinear { v, lambda, gap } => {
                positive("v", *v)?;
                non_negative("lambda", *lambda)?;
                non_negative("gap", *gap)?;
                Analyticity::Analytic {
                    singularity_distance: 1.0 / lambda.sqrt(),
                }
            }
            Sublinear { v, lambda, gap } => {
                positive("v", *v)?;
                non_negative("lambda", *lambda)?;
                non_negative("gap", *gap)?;
                Analyticity::Analytic {
                    singularity_distance: 1.0 / (2.0 * lambda).sqrt(),
                }
            }
            Sine { amp, t, gap } | Sinh { amp, t, gap } => {
                positive("A", *amp)?;
                positive("T", *t)?;
                non_negative("gap", *gap)?;
                entire
            }
            Tanh { amp, t, gap } => {
                positive("A", *amp)?;
                positive("T", *t)?;
                non_negative("gap", *gap)?;
                strip(*t)
            }
            DemkovKunike { a, b, t } => {
                non_negative("A", *a)?;
                non_negative("B", *b)?;
                positive("T", *t)?;
                strip(*t)
            }
            Tangent { a, b, t } => {
                non_negative("A", *a)?;
                non_negative("B", *b)?;
                positive("T", *t)?;
                entire
            }
            RosenZener { a, b, t } => {
                finite("a", *a)?;
                non_negative("b", *b)?;
                positive("T", *t)?;
                strip(*t)
            }
            PowerLaw { amp, t, a, gap } => {
                positive("A", *amp)?;
                positive("T", *t)?;
                positive("a", *a)?;
                non_negative("gap", *gap)?;
                if is_odd_integer(*a) {
                    entire
                } else {
                    Analyticity::NonAnalytic
                }
            }
            Erf { amp, sigma, t, gap } => {
                positive("A", *amp)?;
                positive("sigma", *sigma)?;
                positive("T", *t)?;
                non_negative("gap", *gap)?;
                entire
            }
            RotatingField { omega_field, omega } => {
                positive("Omega", *omega_field)?;
                non_negative("omega", *omega)?;
                entire
            }
            GaussianGap { v, gap0, t } => {
                positive("v", *v)?;
                positive("gap0", *gap0)?;
                positive("T", *t)?;
                entire
            }
            TanhGap { v, gap0, alpha, t } => {
                positive("v", *v)?;
                positive("gap0", *gap0)?;
                below_one("alpha", *alpha)?;
                positive("T", *t)?;
                strip(*t)
            }
            PowerGap { v, gap0, d0, a, t } => {
                positive("v", *v)?;
                non_negative("gap0", *gap0)?;
                non_negative("d0", *d0)?;
                positive("a", *a)?;
                positive("T", *t)?;
                if *gap0 + *d0 <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "gap0 and d0 cannot both vanish".into(),
                    ));
                }
                if is_even_integer(*a) {
                    entire
                } else {
                    Analyticity::NonAnalytic
                }
            }
            Reparameterized(_) => Analyticity::NonAnalytic,
        };
        Ok(SweepProfile { sweep, analyticity })
    }

    pub fn sweep(&self) -> &Sweep {
        &self.sweep
    }

    pub fn family(&self) -> Family {
        use Sweep::*;
        match self.sweep {
            Linear { .. } => Family::Linear,
            TanhModulated { .. } => Family::TanhModulated,
            Quadratic { .. } => Family::Quadratic,
            Parabolic { .. } => Family::Parabolic,
            Cubic { .. } => Family::Cubic,
            Superlinear { .. } => Family::Superlinear,
            Sublinear { .. } => Family::Sublinear,
            Sine { .. } => Family::Sine,
            Sinh { .. } => Family::Sinh,
            Tanh { .. } => Family::Tanh,
            DemkovKunike { .. } => Family::DemkovKunike,
            Tangent { .. } => Family::Tangent,
            RosenZener { .. } => Family::RosenZener,
            PowerLaw { .. } => Family::PowerLaw,
            Erf { .. } => Family::Erf,
            RotatingField { .. } => Family::RotatingField,
            GaussianGap { .. } => Family::GaussianGap,
            TanhGap { .. } => Family::TanhGap,
            PowerGap { .. } => Family::PowerGap,
            Reparameterized(_) => Family::Reparameterized,
        }
    }

    pub fn analyticity(&self) -> Analyticity {
        self.analyticity
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.analyticity, Analyticity::Analytic { .. })
    }

    pub fn gap_kind(&self) -> GapKind {
        use Sweep::*;
        match self.sweep {
            DemkovKunike { .. }
            | RosenZener { .. }
            | RotatingField { .. }
            | GaussianGap { .. }
            | TanhGap { .. }
            | PowerGap { .. } => GapKind::TimeDependent,
            _ => GapKind::Constant,
        }
    }

    /// Real-time domain; only the tangent family is bounded.
    pub fn domain(&self) -> (f64, f64) {
        match self.sweep {
            Sweep::Tangent { t, .. } => (-FRAC_PI_2 * t, FRAC_PI_2 * t),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Characteristic time of the family's own shape, if it has one.
    pub fn time_scale(&self) -> Option<f64> {
        use Sweep::*;
        match &self.sweep {
            Linear { .. } | Reparameterized(_) => None,
            TanhModulated { t, .. }
            | Sine { t, .. }
            | Sinh { t, .. }
            | Tanh { t, .. }
            | DemkovKunike { t, .. }
            | Tangent { t, .. }
            | RosenZener { t, .. }
            | PowerLaw { t, .. }
            | GaussianGap { t, .. }
            | TanhGap { t, .. }
            | PowerGap { t, .. } => Some(*t),
            Quadratic { v0, v1, .. } => (*v1 != 0.0).then(|| (v0 / v1).abs()),
            Parabolic { eps0, alpha, .. } => (*eps0 != 0.0).then(|| (eps0 / alpha).abs().sqrt()),
            Cubic { v0, chi3, gap } => (*chi3 != 0.0).then(|| gap / v0 * (6.0 / chi3.abs()).sqrt()),
            Superlinear { lambda, .. } => (*lambda > 0.0).then(|| 1.0 / lambda.sqrt()),
            Sublinear { lambda, .. } => (*lambda > 0.0).then(|| 1.0 / (2.0 * lambda).sqrt()),
            Erf { sigma, t, .. } => Some(sigma * t),
            RotatingField { omega, .. } => (*omega > 0.0).then(|| 1.0 / omega),
        }
    }

    /// Poles of ε or Δ in the closed upper half plane up to `im_max`.
    pub fn poles(&self, im_max: f64) -> Vec<C> {
        use Sweep::*;
        match self.sweep {
            TanhModulated { t, .. }
            | Tanh { t, .. }
            | DemkovKunike { t, .. }
            | RosenZener { t, .. }
            | TanhGap { t, .. } => (0..)
                .map(|k| C::new(0.0, PI * t * (k as f64 + 0.5)))
                .take_while(|z| z.im <= im_max)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Real bias and gap at real time `t`.
    pub fn fields(&self, t: f64) -> Result<(f64, f64)> {
        use Sweep::*;
        Ok(match &self.sweep {
            Linear { v, gap } => (v * t, *gap),
            TanhModulated {
                v0,
                alpha,
                t: tt,
                gap,
            } => (v0 * t * (1.0 + alpha * (t / tt).tanh()), *gap),
            Quadratic { v0, v1, gap } => (v0 * t + v1 * t * t, *gap),
            Parabolic { eps0, alpha, gap } => (eps0 + alpha * t * t, *gap),
            Cubic { v0, chi3, gap } => {
                let x = v0 * t;
                (x + chi3 * x * x * x / (6.0 * gap * gap), *gap)
            }
            Superlinear { v, lambda, gap } => (v * t * (1.0 + lambda * t * t).sqrt(), *gap),
            Sublinear { v, lambda, gap } => {
                (v * t * (1.0 + 2.0 * lambda * t * t).powf(-0.25), *gap)
            }
            Sine { amp, t: tt, gap } => (amp * (t / tt).sin(), *gap),
            Sinh { amp, t: tt, gap } => (amp * (t / tt).sinh(), *gap),
            Tanh { amp, t: tt, gap } => (amp * (t / tt).tanh(), *gap),
            DemkovKunike { a, b, t: tt } => {
                let x = t / tt;
                (2.0 * b * x.tanh(), 2.0 * a / x.cosh())
            }
            Tangent { a, b, t: tt } => {
                let (lo, hi) = self.domain();
                if !(t > lo && t < hi) {
                    return Err(Error::OutsideDomain {
                        family: "tangent",
                        t,
                    });
                }
                (2.0 * b * (t / tt).tan(), 2.0 * a)
            }
            RosenZener { a, b, t: tt } => (2.0 * a, 2.0 * b / (t / tt).cosh()),
            PowerLaw { amp, t: tt, a, gap } => (amp * t.signum() * (t / tt).abs().powf(*a), *gap),
            Erf {
                amp,
                sigma,
                t: tt,
                gap,
            } => (
                amp * RealErrorFunctions::erf(t / (std::f64::consts::SQRT_2 * sigma * tt)),
                *gap,
            ),
            RotatingField { omega_field, omega } => {
                let (s, c) = (omega * t).sin_cos();
                (omega_field * c, omega_field * s)
            }
            GaussianGap { v, gap0, t: tt } => {
                let x = t / tt;
                (v * t, gap0 * (-x * x).exp())
            }
            TanhGap {
                v,
                gap0,
                alpha,
                t: tt,
            } => (v * t, gap0 * (1.0 + alpha * (t / tt).tanh())),
            PowerGap {
                v,
                gap0,
                d0,
                a,
                t: tt,
            } => (v * t, gap0 + d0 * (t / tt).abs().powf(*a)),
            Reparameterized(r) => r.map.equivalent_fields(t)?,
        })
    }

    pub fn bias(&self, t: f64) -> Result<f64> {
        Ok(self.fields(t)?.0)
    }

    pub fn gap(&self, t: f64) -> Result<f64> {
        Ok(self.fields(t)?.1)
    }

    /// ε and Δ with their first derivatives at complex `z`.
    pub fn jet(&self, z: C) -> Result<Jet> {
        if !self.is_analytic() {
            return Err(Error::UnsupportedEvaluation(self.family().name()));
        }
        use Sweep::*;
        let zero = C::new(0.0, 0.0);
        let konst = |g: f64| (C::new(g, 0.0), zero);
        let ((eps, deps), (gap, dgap)) = match &self.sweep {
            Linear { v, gap } => ((z * v, C::new(*v, 0.0)), konst(*gap)),
            TanhModulated { v0, alpha, t, gap } => {
                let s = sech_c(z / t)?;
                let th = (z / t).tanh();
                let e = z * v0 * (th * alpha + 1.0);
                let de = (th * alpha + 1.0) * v0 + z * v0 * alpha * s * s / t;
                ((e, de), konst(*gap))
            }
            Quadratic { v0, v1, gap } => ((z * v0 + z * z * v1, z * (2.0 * v1) + v0), konst(*gap)),
            Parabolic { eps0, alpha, gap } => {
                ((z * z * alpha + eps0, z * (2.0 * alpha)), konst(*gap))
            }
            Cubic { v0, chi3, gap } => {
                let c = chi3 * v0.powi(3) / (6.0 * gap * gap);
                (
                    (z * v0 + z * z * z * c, z * z * (3.0 * c) + v0),
                    konst(*gap),
                )
            }
            Superlinear { v, lambda, gap } => {
                let w = (z * z * lambda + 1.0).sqrt();
                ((z * w * v, w * v + z * z * v * lambda / w), konst(*gap))
            }
            Sublinear { v, lambda, gap } => {
                let w = z * z * (2.0 * lambda) + 1.0;
                let e = z * v * w.powf(-0.25);
                let de = (z * z * lambda + 1.0) * v * w.powf(-1.25);
                ((e, de), konst(*gap))
            }
            Sine { amp, t, gap } => {
                let x = z / t;
                ((x.sin() * amp, x.cos() * (amp / t)), konst(*gap))
            }
            Sinh { amp, t, gap } => {
                let x = z / t;
                ((x.sinh() * amp, x.cosh() * (amp / t)), konst(*gap))
            }
            Tanh { amp, t, gap } => {
                let s = sech_c(z / t)?;
                (((z / t).tanh() * amp, s * s * (amp / t)), konst(*gap))
            }
            DemkovKunike { a, b, t } => {
                let s = sech_c(z / t)?;
                let th = (z / t).tanh();
                (
                    (th * (2.0 * b), s * s * (2.0 * b / t)),
                    (s * (2.0 * a), -s * th * (2.0 * a / t)),
                )
            }
            Tangent { a, b, t } => {
                let c = (z / t).cos();
                if c.norm() < 1e-14 {
                    return Err(Error::Singularity(z));
                }
                let sec = c.inv();
                (
                    ((z / t).tan() * (2.0 * b), sec * sec * (2.0 * b / t)),
                    konst(2.0 * a),
                )
            }
            RosenZener { a, b, t } => {
                let s = sech_c(z / t)?;
                let th = (z / t).tanh();
                (konst(2.0 * a), (s * (2.0 * b), -s * th * (2.0 * b / t)))
            }
            PowerLaw { amp, t, a, gap } => {
                let n = *a as i32;
                let x = z / t;
                (
                    (x.powi(n) * amp, x.powi(n - 1) * (amp * a / t)),
                    konst(*gap),
                )
            }
            Erf { amp, sigma, t, gap } => {
                let s = std::f64::consts::SQRT_2 * sigma * t;
                let x = z / s;
                let e = x.erf() * amp;
                let de = (-x * x).exp() * (2.0 * amp / (SQRT_PI * s));
                ((e, de), konst(*gap))
            }
            RotatingField { omega_field, omega } => {
                let x = z * omega;
                (
                    (x.cos() * omega_field, -x.sin() * (omega_field * omega)),
                    (x.sin() * omega_field, x.cos() * (omega_field * omega)),
                )
            }
            GaussianGap { v, gap0, t } => {
                let x = z / t;
                let g = (-x * x).exp() * gap0;
                ((z * v, C::new(*v, 0.0)), (g, -g * x * (2.0 / t)))
            }
            TanhGap { v, gap0, alpha, t } => {
                let s = sech_c(z / t)?;
                let th = (z / t).tanh();
                (
                    (z * v, C::new(*v, 0.0)),
                    ((th * alpha + 1.0) * gap0, s * s * (gap0 * alpha / t)),
                )
            }
            PowerGap { v, gap0, d0, a, t } => {
                let n = *a as i32;
                let x = z / t;
                (
                    (z * v, C::new(*v, 0.0)),
                    (x.powi(n) * d0 + gap0, x.powi(n - 1) * (d0 * a / t)),
                )
            }
            Reparameterized(_) => unreachable!("reparameterized profiles are non-analytic"),
        };
        Ok(Jet {
            eps,
            deps,
            gap,
            dgap,
        })
    }

    fn complex_or_real(
        &self,
        z: C,
        pick: impl Fn(&Jet) -> C,
        real: impl Fn(f64, f64) -> f64,
    ) -> Result<C> {
        if z.im == 0.0 {
            let (e, g) = self.fields(z.re)?;
            return Ok(C::new(real(e, g), 0.0));
        }
        Ok(pick(&self.jet(z)?))
    }

    pub fn eval_bias(&self, z: C) -> Result<C> {
        self.complex_or_real(z, |j| j.eps, |e, _| e)
    }

    pub fn eval_gap(&self, z: C) -> Result<C> {
        self.complex_or_real(z, |j| j.gap, |_, g| g)
    }

    /// `√(ε² + Δ²)` on the principal branch, which is positive on the real axis.
    pub fn quasi_energy(&self, z: C) -> Result<C> {
        self.complex_or_real(z, |j| j.e2().sqrt(), |e, g| e.hypot(g))
    }

    pub fn crossing_derivatives(&self) -> Result<CrossingData> {
        use Sweep::*;
        let unsupported = |why: &str| Err(Error::Unsupported(format!("{}: {why}", self.family())));
        // (v0, eps2, eps3, gap0, gap1, gap2)
        let d = match &self.sweep {
            Linear { v, gap } => (*v, 0.0, 0.0, *gap, 0.0, 0.0),
            TanhModulated { v0, alpha, t, gap } => (*v0, 2.0 * v0 * alpha / t, 0.0, *gap, 0.0, 0.0),
            Quadratic { v0, v1, gap } => (*v0, 2.0 * v1, 0.0, *gap, 0.0, 0.0),
            Parabolic { alpha, gap, .. } => (0.0, 2.0 * alpha, 0.0, *gap, 0.0, 0.0),
            Cubic { v0, chi3, gap } => (*v0, 0.0, chi3 * v0.powi(3) / (gap * gap), *gap, 0.0, 0.0),
            Superlinear { v, lambda, gap } => (*v, 0.0, 3.0 * v * lambda, *gap, 0.0, 0.0),
            Sublinear { v, lambda, gap } => (*v, 0.0, -3.0 * v * lambda, *gap, 0.0, 0.0),
            Sine { amp, t, gap } => (amp / t, 0.0, -amp / t.powi(3), *gap, 0.0, 0.0),
            Sinh { amp, t, gap } => (amp / t, 0.0, amp / t.powi(3), *gap, 0.0, 0.0),
            Tanh { amp, t, gap } => (amp / t, 0.0, -2.0 * amp / t.powi(3), *gap, 0.0, 0.0),
            DemkovKunike { a, b, t } => (
                2.0 * b / t,
                0.0,
                -4.0 * b / t.powi(3),
                2.0 * a,
                0.0,
                -2.0 * a / (t * t),
            ),
            Tangent { a, b, t } => (2.0 * b / t, 0.0, 4.0 * b / t.powi(3), 2.0 * a, 0.0, 0.0),
            RosenZener { b, t, .. } => (0.0, 0.0, 0.0, 2.0 * b, 0.0, -2.0 * b / (t * t)),
            PowerLaw { amp, t, a, gap } => {
                if *a == 1.0 {
                    (amp / t, 0.0, 0.0, *gap, 0.0, 0.0)
                } else if *a == 3.0 {
                    (0.0, 0.0, 6.0 * amp / t.powi(3), *gap, 0.0, 0.0)
                } else if *a > 3.0 {
                    (0.0, 0.0, 0.0, *gap, 0.0, 0.0)
                } else {
                    return unsupported("not three times differentiable at the crossing");
                }
            }
            Erf { amp, sigma, t, gap } => {
                let s = std::f64::consts::SQRT_2 * sigma * t;
                (
                    2.0 * amp / (SQRT_PI * s),
                    0.0,
                    -4.0 * amp / (SQRT_PI * s.powi(3)),
                    *gap,
                    0.0,
                    0.0,
                )
            }
            RotatingField { omega_field, omega } => (
                0.0,
                -omega_field * omega * omega,
                0.0,
                0.0,
                omega_field * omega,
                0.0,
            ),
            GaussianGap { v, gap0, t } => (*v, 0.0, 0.0, *gap0, 0.0, -2.0 * gap0 / (t * t)),
            TanhGap { v, gap0, alpha, t } => (*v, 0.0, 0.0, *gap0, gap0 * alpha / t, 0.0),
            PowerGap { v, gap0, d0, a, t } => {
                if *a == 2.0 {
                    (*v, 0.0, 0.0, *gap0, 0.0, 2.0 * d0 / (t * t))
                } else if *a > 2.0 {
                    (*v, 0.0, 0.0, *gap0, 0.0, 0.0)
                } else {
                    return unsupported("gap not twice differentiable at the crossing");
                }
            }
            Reparameterized(_) => return unsupported("numeric profile"),
        };
        let (v0, eps2, eps3, gap0, gap1, gap2) = d;
        Ok(CrossingData {
            v0,
            eps2,
            eps3,
            gap0,
            gap1,
            gap2,
            delta: (v0 > 0.0).then(|| gap0 * gap0 / (4.0 * v0)),
        })
    }

    /// `(χ₂, χ₃) = (Δ·ε''/v0², Δ²·ε'''/v0³)` at the crossing.
    pub fn nonlinearity_params(&self) -> Result<(f64, f64)> {
        let d = self.crossing_derivatives()?;
        if d.v0 <= 0.0 {
            return Err(Error::Unsupported(format!(
                "{}: vanishing sweep rate at the crossing",
                self.family()
            )));
        }
        Ok((
            d.gap0 * d.eps2 / (d.v0 * d.v0),
            d.gap0 * d.gap0 * d.eps3 / d.v0.powi(3),
        ))
    }
}
