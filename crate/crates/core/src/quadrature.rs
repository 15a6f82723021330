//! Adaptive Gauss-Kronrod (7/15) quadrature on real intervals and on
//! polygonal paths in the complex plane with a tracked square-root branch.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

// Gauss-Kronrod 7-15 nodes and weights, kept at full published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Nodes on [-1, 1] in ascending order with Kronrod and Gauss weights.
fn ordered_rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..8 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], wg);
        out[14 - i] = (XGK[i], WGK[i], wg);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-13,
            rel: 1e-11,
        }
    }
}

fn gk_real(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let (mut k, mut g) = (0.0, 0.0);
    for (x, wk, wg) in ordered_rule() {
        let y = f(c + h * x);
        k += wk * y;
        g += wg * y;
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive integral of a real function over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let (v, e) = gk_real(&f, a, b);
    heap.push(Piece {
        a,
        b,
        value: v,
        error: e,
    });
    let (mut total, mut err) = (v, e);
    for _ in 0..20_000 {
        if !total.is_finite() {
            break;
        }
        if err <= tol.target(total.abs()) {
            return Ok(total);
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk_real(&f, p.a, m);
        let (v2, e2) = gk_real(&f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
    // Recompute from the pieces to shed accumulated rounding.
    let err: f64 = heap.iter().map(|p| p.error).sum();
    let total: f64 = heap.iter().map(|p| p.value).sum();
    if err <= 10.0 * tol.target(total.abs()) && total.is_finite() {
        return Ok(total);
    }
    Err(Error::IntegrationFailure {
        t: a,
        reason: format!("quadrature did not reach tolerance (estimate {total}, error {err:e})"),
    })
}

/// Picks the square root of `w2` closest to `prev`.
pub fn continue_sqrt(w2: C, prev: C) -> C {
    let w = w2.sqrt();
    if (w - prev).norm_sqr() <= (w + prev).norm_sqr() {
        w
    } else {
        -w
    }
}

/// Integrates `E = √(E²)` along a polygon, continuing the square root from
/// `start` (the branch value at `path[0]`). Returns the integral and the
/// branch value reached at the final vertex.
pub fn branch_path_integral(
    e2: &impl Fn(C) -> Result<C>,
    path: &[C],
    start: C,
    tol: Tolerance,
) -> Result<(C, C)> {
    let mut w = start;
    let mut total = C::new(0.0, 0.0);
    let length: f64 = path.windows(2).map(|s| (s[1] - s[0]).norm()).sum();
    if length == 0.0 {
        return Ok((total, start));
    }
    let scale = start.norm().max(1e-300);
    let abs = tol.abs.max(tol.rel * scale * length);
    let mut budget = PATH_BUDGET;
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let pieces = 32;
        for k in 0..pieces {
            let za = a + (b - a) * (k as f64 / pieces as f64);
            let zb = a + (b - a) * ((k + 1) as f64 / pieces as f64);
            let piece_tol = abs * (zb - za).norm() / length;
            let (v, wb) = tracked(e2, za, zb, w, piece_tol, 0, &mut budget)?;
            total += v;
            w = wb;
        }
    }
    Ok((total, w))
}

/// Gauss-Kronrod panels allowed for one path.
const PATH_BUDGET: usize = 200_000;

fn tracked(
    e2: &impl Fn(C) -> Result<C>,
    a: C,
    b: C,
    wa: C,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> Result<(C, C)> {
    if *budget == 0 {
        return Err(Error::Contour(format!(
            "quadrature budget exhausted near {a}"
        )));
    }
    *budget -= 1;
    let (c, h) = ((a + b) * 0.5, (b - a) * 0.5);
    let mut prev = wa;
    let (mut k, mut g) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    let mut ambiguous = false;
    for (x, wk, wg) in ordered_rule() {
        let w = continue_sqrt(e2(c + h * x)?, prev);
        if (w - prev).norm() > 0.6 * (w + prev).norm() && prev.norm() > 0.0 {
            ambiguous = true;
        }
        k += w * wk;
        g += w * wg;
        prev = w;
    }
    let wb = continue_sqrt(e2(b)?, prev);
    let err = ((k - g) * h).norm();
    if (err <= tol && !ambiguous) || depth >= 48 {
        if depth >= 48 && err > 1e3 * tol.max(1e-300) {
            return Err(Error::Contour(format!(
                "branch-tracked quadrature failed to converge near {}",
                c
            )));
        }
        return Ok((k * h, wb));
    }
    let m = c;
    let (v1, wm) = tracked(e2, a, m, wa, 0.5 * tol, depth + 1, budget)?;
    let (v2, wb) = tracked(e2, m, b, wm, 0.5 * tol, depth + 1, budget)?;
    Ok((v1 + v2, wb))
}
