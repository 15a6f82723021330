//! Dykhne-Davis-Pechukas machinery: transition points, actions, Γ factors.
//!
//! Transition points are the zeros of `E² = (ε − iΔ)(ε + iΔ)`. The search
//! runs Newton on each factor separately, which keeps the zeros simple and
//! tells us the sign of Γ for free.
//!
//! For the multi-zero sum each action is taken along a path that goes out
//! along the real axis, up a vertical leg that passes every lower zero on one
//! side, then across to the zero. Both sides are tried and the one with the
//! larger `Im D` (the smaller contribution) is kept.

use num_complex::Complex64;

use crate::closed_form;
use crate::error::{Error, Result};
use crate::quadrature::{self, branch_path_integral, Tolerance};
use crate::schrodinger::{Method, TransitionResult};
use crate::sweep::{Analyticity, SweepProfile};

type C = Complex64;

const GRID_RE: usize = 40;
const GRID_IM: usize = 20;
const NEWTON_ITERS: usize = 80;

/// Axis-aligned rectangle in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && 0.0 <= im_min && im_min < im_max) || !(re_max - re_min).is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "bad search box [{re_min}, {re_max}] x ({im_min}, {im_max}]"
            )));
        }
        Ok(SearchBox {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// `Re ∈ ±10L`, `Im ∈ (0, 10L]` with `L = max(T, Δ/v0, 1/√v0)`, capped
    /// below any branch point of the profile.
    pub fn around(p: &SweepProfile) -> Result<Self> {
        let mut l: f64 = p.time_scale().unwrap_or(0.0);
        if let Ok(d) = p.crossing_derivatives() {
            if d.v0 > 0.0 {
                l = l.max(d.gap0 / d.v0).max(1.0 / d.v0.sqrt());
            }
        }
        if !(l > 0.0 && l.is_finite()) {
            l = 1.0;
        }
        let mut im_max = 10.0 * l;
        if let Analyticity::Analytic {
            singularity_distance,
        } = p.analyticity()
        {
            // Poles are harmless (seeded around, passed by the contour);
            // branch points are not.
            if p.poles(singularity_distance * 1.01).is_empty() {
                im_max = im_max.min(0.95 * singularity_distance);
            }
        }
        SearchBox::new(-10.0 * l, 10.0 * l, 0.0, im_max)
    }

    pub fn diagonal(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn contains(&self, z: C) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im > self.im_min && z.im <= self.im_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpZero {
    pub t_c: C,
    /// Contour action `D(t_c)` on the side chosen for the multi-zero sum.
    pub action: C,
    pub gamma: C,
    pub multiplicity_flag: bool,
    /// `|ε ∓ iΔ|` at `t_c` for the vanishing factor.
    pub newton_residual: f64,
    /// `+1` for zeros of `ε − iΔ`, `−1` for zeros of `ε + iΔ`.
    pub factor: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<DdpZero>,
    /// Set when the search came back empty.
    pub diagnostic: Option<String>,
}

fn factor_value(p: &SweepProfile, z: C, s: f64) -> Result<(C, C)> {
    let j = p.jet(z)?;
    let i = C::new(0.0, s);
    Ok((j.eps - i * j.gap, j.deps - i * j.dgap))
}

enum Newton {
    Root(C, f64),
    Diverged,
}

fn newton(p: &SweepProfile, seed: C, s: f64, b: &SearchBox) -> Newton {
    let cap = 0.1 * b.diagonal();
    let mut z = seed;
    for _ in 0..NEWTON_ITERS {
        let Ok((f, df)) = factor_value(p, z, s) else {
            return Newton::Diverged;
        };
        if df.norm() == 0.0 || !f.is_finite() {
            return Newton::Diverged;
        }
        let mut dz = f / df;
        if dz.norm() > cap {
            dz *= cap / dz.norm();
        }
        z -= dz;
        if z.im < -0.5 * b.diagonal()
            || (z.re - 0.5 * (b.re_min + b.re_max)).abs() > 2.0 * b.diagonal()
        {
            return Newton::Diverged;
        }
        if dz.norm() <= 1e-14 * z.norm().max(1e-3 * b.diagonal()) {
            return match factor_value(p, z, s) {
                Ok((f, _)) => Newton::Root(z, f.norm()),
                Err(_) => Newton::Diverged,
            };
        }
    }
    Newton::Diverged
}

fn seeds(p: &SweepProfile, b: &SearchBox) -> Vec<C> {
    let mut out = Vec::with_capacity(GRID_RE * GRID_IM + 64);
    for i in 0..GRID_RE {
        let x = b.re_min + (b.re_max - b.re_min) * (i as f64 + 0.5) / GRID_RE as f64;
        for k in 0..GRID_IM {
            let y = b.im_min + (b.im_max - b.im_min) * (k as f64 + 0.5) / GRID_IM as f64;
            out.push(C::new(x, y));
        }
    }
    // Zeros crowd around poles of ε; ring each pole with extra seeds.
    let spacing = p.time_scale().unwrap_or(1.0);
    for pole in p.poles(b.im_max) {
        for r in [0.01, 0.05, 0.2] {
            for k in 0..8 {
                let phi = std::f64::consts::PI * (k as f64 + 0.5) / 4.0;
                out.push(pole + C::from_polar(r * spacing, phi));
            }
        }
    }
    out
}

/// Zeros of `E²` in `search`, sorted by imaginary part (then real part),
/// with actions and Γ factors filled in for up to `max_count` of them.
pub fn find_upper_zeros(p: &SweepProfile, search: &SearchBox, max_count: usize) -> Result<ZeroSet> {
    if !p.is_analytic() {
        return Err(Error::UnsupportedEvaluation(p.family().name()));
    }
    let diag = search.diagonal();
    let dedup = 1e-8 * diag;
    let mut raw: Vec<(C, f64, i8)> = Vec::new();
    let mut converged_any = false;
    let mut evaluated_any = false;
    for seed in seeds(p, search) {
        for s in [1.0, -1.0] {
            if factor_value(p, seed, s).is_ok() {
                evaluated_any = true;
            }
            if let Newton::Root(z, res) = newton(p, seed, s, search) {
                converged_any = true;
                if search.contains(z)
                    && !raw
                        .iter()
                        .any(|(q, _, f)| *f as f64 == s && (q - z).norm() <= dedup)
                {
                    raw.push((z, res, s as i8));
                }
            }
        }
    }
    if !evaluated_any {
        return Err(Error::SearchFailure(
            "the profile cannot be evaluated anywhere in the search box".into(),
        ));
    }
    raw.sort_by(|a, b| a.0.im.total_cmp(&b.0.im).then(a.0.re.total_cmp(&b.0.re)));
    if raw.is_empty() {
        let why = if converged_any {
            "no zeros of E² inside the search box"
        } else {
            "Newton iteration found no zeros of E² from any seed"
        };
        return Ok(ZeroSet {
            zeros: Vec::new(),
            diagnostic: Some(why.into()),
        });
    }
    let coincide = 1e-4 * diag;
    let points: Vec<C> = raw.iter().map(|r| r.0).collect();
    let mut zeros = Vec::new();
    for (k, &(z, res, f)) in raw.iter().enumerate().take(max_count) {
        let close = points
            .iter()
            .enumerate()
            .any(|(m, q)| m != k && (q - z).norm() <= coincide);
        let (_, df) = factor_value(p, z, f as f64)?;
        let j = p.jet(z)?;
        let degenerate = df.norm() <= 1e-6 * (j.eps.norm() + j.gap.norm()) / z.norm();
        let multiplicity_flag = close || degenerate;
        let (action, gamma) = if multiplicity_flag {
            (C::new(f64::NAN, f64::NAN), C::new(f64::NAN, f64::NAN))
        } else {
            (
                side_action(p, z, &points, &pole_list(p, z.im))?,
                gamma_factor(p, z)?,
            )
        };
        zeros.push(DdpZero {
            t_c: z,
            action,
            gamma,
            multiplicity_flag,
            newton_residual: res,
            factor: f,
        });
    }
    Ok(ZeroSet {
        zeros,
        diagnostic: None,
    })
}

fn pole_list(p: &SweepProfile, below: f64) -> Vec<C> {
    p.poles(below)
}

fn action_tol() -> Tolerance {
    Tolerance::new(1e-13, 1e-11)
}

fn e2_of(p: &SweepProfile) -> impl Fn(C) -> Result<C> + '_ {
    move |z: C| Ok(p.jet(z)?.e2())
}

fn start_branch(p: &SweepProfile) -> Result<C> {
    let (e, g) = p.fields(0.0)?;
    Ok(C::new(e.hypot(g), 0.0))
}

/// Fraction of the last leg replaced by the local square-root law. Right at
/// the zero `E²` is pure cancellation noise.
const TAIL: f64 = 1e-7;

/// Integral of `E` along `path`, whose last vertex is a zero of `E²`.
fn polygon_action(p: &SweepProfile, path: &[C]) -> Result<C> {
    let start = start_branch(p)?;
    if start.norm() == 0.0 {
        return Err(Error::Contour("E vanishes at the contour origin".into()));
    }
    let n = path.len();
    let (a, t_c) = (path[n - 2], path[n - 1]);
    let z0 = t_c + (a - t_c) * TAIL;
    let mut trimmed = path.to_vec();
    trimmed[n - 1] = z0;
    let (body, w0) = branch_path_integral(&e2_of(p), &trimmed, start, action_tol())?;
    // E ≈ w0 √((t_c − z)/(t_c − z0)) on the remaining piece
    Ok(body + w0 * (t_c - z0) * (2.0 / 3.0))
}

/// `D(t_c) = ∫₀^{t_c} E dt` along the straight segment, falling back to the
/// detour `0 → Re t_c → t_c` when the segment runs too close to another
/// transition point.
pub fn action_integral(p: &SweepProfile, t_c: C) -> Result<C> {
    if t_c == C::new(0.0, 0.0) {
        return Ok(t_c);
    }
    match polygon_action(p, &[C::new(0.0, 0.0), t_c]) {
        Ok(d) => Ok(d),
        Err(Error::Contour(_)) | Err(Error::Singularity(_)) => {
            polygon_action(p, &[C::new(0.0, 0.0), C::new(t_c.re, 0.0), t_c]).map_err(|e| match e {
                Error::Contour(m) => Error::Contour(format!("detour also failed: {m}")),
                other => other,
            })
        }
        Err(e) => Err(e),
    }
}

/// Action along the side path that keeps every zero in `all` lying below
/// `t_c` on the same side; the side with the larger `Im D` is returned.
pub fn side_action(p: &SweepProfile, t_c: C, all: &[C], poles: &[C]) -> Result<C> {
    let lower: Vec<C> = all
        .iter()
        .copied()
        .filter(|q| q.im < t_c.im - 1e-12 * t_c.norm())
        .collect();
    let mut singular: Vec<C> = lower.clone();
    singular.push(t_c);
    singular.extend(poles.iter().copied().filter(|q| q.im <= t_c.im));
    let mut dmin = f64::INFINITY;
    for (i, a) in singular.iter().enumerate() {
        for b in &singular[i + 1..] {
            dmin = dmin.min((a - b).norm());
        }
    }
    let margin = match p.time_scale() {
        Some(t) if !poles.is_empty() => 2.0 * t / 3.0,
        _ => {
            let scale = t_c.norm().max(1e-3);
            if dmin.is_finite() {
                (0.5 * dmin).min(scale)
            } else {
                0.5 * scale
            }
        }
    };
    let xs = lower.iter().map(|q| q.re).chain(std::iter::once(t_c.re));
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let mut best: Option<C> = None;
    let mut last_err = None;
    for mut x in [lo - margin, hi + margin] {
        // Keep the vertical leg off any pole without changing which side it passes.
        for q in poles.iter().filter(|q| q.im <= t_c.im) {
            let gap = 0.25 * margin;
            if (x - q.re).abs() < gap {
                x = if x >= q.re { q.re + gap } else { q.re - gap };
            }
        }
        let path = [C::new(0.0, 0.0), C::new(x, 0.0), C::new(x, t_c.im), t_c];
        match polygon_action(p, &path) {
            Ok(d) => {
                if best.is_none_or(|b| d.im > b.im) {
                    best = Some(d);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Contour("no admissible contour".into())))
}

/// `Γ = 2i(ε̇Δ − εΔ̇)/(E²)'` at a simple zero: `+1` on zeros of `ε − iΔ`,
/// `−1` on zeros of `ε + iΔ`.
pub fn gamma_factor(p: &SweepProfile, t_c: C) -> Result<C> {
    let j = p.jet(t_c)?;
    let de2 = j.de2();
    // Natural size of (E²)′ near a zero: |ε|·|ε|/|t_c|.
    let scale = 2.0 * (j.eps.norm_sqr() + j.gap.norm_sqr()) / t_c.norm().max(f64::MIN_POSITIVE);
    if de2.norm() <= 1e-5 * scale {
        return Err(Error::MultipleZero(t_c));
    }
    Ok(C::new(0.0, 2.0) * (j.deps * j.gap - j.eps * j.dgap) / de2)
}

/// `|Σ_k Γ_k e^{iD_k}|²` over the `n_zeros` lowest zeros. Not clamped.
pub fn generalized_probability(
    p: &SweepProfile,
    n_zeros: usize,
    search: Option<SearchBox>,
) -> Result<TransitionResult> {
    if n_zeros == 0 {
        return Err(Error::InvalidParameter("n_zeros must be at least 1".into()));
    }
    let b = match search {
        Some(b) => b,
        None => SearchBox::around(p)?,
    };
    let set = find_upper_zeros(p, &b, n_zeros)?;
    if set.zeros.len() < n_zeros {
        return Err(Error::NotEnoughZeros {
            requested: n_zeros,
            found: set.zeros.len(),
        });
    }
    let mut sum = C::new(0.0, 0.0);
    for z in &set.zeros[..n_zeros] {
        if z.multiplicity_flag {
            return Err(Error::MultipleZero(z.t_c));
        }
        sum += z.gamma * (C::new(0.0, 1.0) * z.action).exp();
    }
    Ok(TransitionResult::exact(
        sum.norm_sqr(),
        Method::Ddp(n_zeros),
    ))
}

/// `exp(−2 Im D)` for the lowest zero, with `D` on the straight segment.
pub fn standard_probability(
    p: &SweepProfile,
    search: Option<SearchBox>,
) -> Result<TransitionResult> {
    let b = match search {
        Some(b) => b,
        None => SearchBox::around(p)?,
    };
    let set = find_upper_zeros(p, &b, 1)?;
    let z = set.zeros.first().ok_or(Error::NotEnoughZeros {
        requested: 1,
        found: 0,
    })?;
    if z.multiplicity_flag {
        return Err(Error::MultipleZero(z.t_c));
    }
    let d = action_integral(p, z.t_c)?;
    Ok(TransitionResult::exact(
        (-2.0 * d.im).exp(),
        Method::StandardDdp,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublePassage {
    pub probability: f64,
    pub phi: f64,
    /// False in the fast-passage regime (`δ < 1`) where the formula is known
    /// to misbehave.
    pub reliable: bool,
}

/// Double-passage estimate for `ε = v0 t + v1 t²`.
pub fn double_passage_probability(v0: f64, v1: f64, gap: f64) -> Result<DoublePassage> {
    for (name, x) in [("v0", v0), ("v1", v1), ("gap", gap)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be > 0, got {x}"
            )));
        }
    }
    let delta = gap * gap / (4.0 * v0);
    let chi2 = 2.0 * v1 * gap / (v0 * v0);
    let e = |s: f64| {
        let b = v0 * s + v1 * s * s;
        b.hypot(gap)
    };
    let far = quadrature::integrate(e, 0.0, -v0 / v1, Tolerance::new(1e-14, 1e-13))?;
    let phi = (2.0 / 3.0) * (gap * gap / v0) * chi2 - far;
    let single = closed_form::quadratic_corrected_alt(delta, chi2);
    let interference = (C::new(1.0, 0.0) - C::from_polar(1.0, phi)).norm_sqr();
    Ok(DoublePassage {
        probability: single * interference,
        phi,
        reliable: delta >= 1.0,
    })
}
