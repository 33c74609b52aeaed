//! Globally adaptive Gauss–Kronrod (10/21) quadrature over real or complex integrands.
//!
//! A [`Quad`] context carries the tolerance and records the worst error estimate
//! seen across every integral evaluated through it, including nested ones. Callers
//! evaluate freely and then ask [`Quad::check`] once at the end.

use std::cell::Cell;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{LevyError, Result};

/// Default absolute tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
/// Default relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Field scalars the integrator accepts.
pub trait Scalar: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_660,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Process-wide default tolerance, overridable through `LEVYCALC_TOL` (absolute
/// tolerance; the relative tolerance is kept 100 times looser).
pub fn default_tolerance() -> (f64, f64) {
    static TOL: OnceLock<(f64, f64)> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("LEVYCALC_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .map(|t| (t, (100.0 * t).min(1e-2)))
            .unwrap_or((DEFAULT_ABS_TOL, DEFAULT_REL_TOL))
    })
}

/// One 21-point Kronrod rule on [a, b]: (integral, error estimate).
fn gk21<T: Scalar>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::default();
    let mut abs_sum = fc.modulus() * WGK[10];
    let mut values = [T::default(); 21];
    values[10] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = f1;
        values[20 - j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_sum += WGK[j] * (f1.modulus() + f2.modulus());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).modulus();
    for j in 0..10 {
        asc += WGK[j] * ((values[j] - mean).modulus() + (values[20 - j] - mean).modulus());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).modulus();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !result.modulus().is_finite() {
        err = f64::INFINITY;
    }
    (result, err)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive integrator over the pieces delimited by `points` (sorted, finite).
pub fn adaptive<T: Scalar>(f: impl Fn(f64) -> T, points: &[f64], abs_tol: f64, rel_tol: f64, limit: usize) -> QuadResult<T> {
    let mut heap = BinaryHeap::new();
    let mut total = T::default();
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk21(&f, w[0], w[1]);
        total = total + v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, err: e });
    }
    let mut count = heap.len();
    loop {
        let tol = abs_tol.max(rel_tol * total.modulus());
        if total_err <= tol {
            return QuadResult { value: total, error: total_err, converged: true };
        }
        if count >= limit {
            break;
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b || (seg.b - seg.a) < 1e-15 * (seg.a.abs() + seg.b.abs()) {
            // Cannot split further; keep it and stop refining.
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk21(&f, seg.a, mid);
        let (v2, e2) = gk21(&f, mid, seg.b);
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
        count += 1;
    }
    // Re-sum to shed accumulated rounding in the running totals.
    let mut value = T::default();
    let mut error = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        error += s.err;
    }
    let tol = abs_tol.max(rel_tol * value.modulus());
    QuadResult { value, error, converged: error <= tol }
}

/// Tolerance-carrying quadrature context.
#[derive(Debug)]
pub struct Quad {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub limit: usize,
    worst: Cell<f64>,
    failed: Cell<bool>,
}

impl Default for Quad {
    fn default() -> Self {
        let (a, r) = default_tolerance();
        Self::new(a, r)
    }
}

impl Quad {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, limit: 2000, worst: Cell::new(0.0), failed: Cell::new(false) }
    }

    /// Same tolerance, fresh bookkeeping.
    pub fn fork(&self) -> Self {
        Self { limit: self.limit, ..Self::new(self.abs_tol, self.rel_tol) }
    }

    fn record<T: Scalar>(&self, r: &QuadResult<T>) -> T {
        if r.error > self.worst.get() || r.error.is_nan() {
            self.worst.set(r.error);
        }
        // Non-convergence within a hundredfold of the target is treated as noise.
        let slack = 100.0 * self.abs_tol.max(self.rel_tol * r.value.modulus());
        if !r.converged && !(r.error <= slack) {
            self.failed.set(true);
        }
        r.value
    }

    /// Integral over the consecutive pieces of `points`.
    pub fn integrate<T: Scalar>(&self, f: impl Fn(f64) -> T, points: &[f64]) -> T {
        let r = adaptive(f, points, self.abs_tol, self.rel_tol, self.limit);
        self.record(&r)
    }

    /// Integral over [a, b] with interior breakpoints (silently dropped if outside).
    pub fn integrate_with_breaks<T: Scalar>(&self, f: impl Fn(f64) -> T, a: f64, b: f64, breaks: &[f64]) -> T {
        let pts = sorted_points(a, b, breaks);
        self.integrate(f, &pts)
    }

    /// Integral over [a, ∞) with interior breakpoints; the last piece is mapped
    /// onto [0, 1) by x = x0 + s / (1 − s).
    pub fn integrate_to_inf<T: Scalar>(&self, f: impl Fn(f64) -> T, a: f64, breaks: &[f64]) -> T {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| b.is_finite() && *b > a).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let last = pts.last().copied().unwrap_or(a);
        let mut total = T::default();
        if !pts.is_empty() {
            let mut finite = vec![a];
            finite.extend(pts.iter().copied());
            total = total + self.integrate(&f, &finite);
        }
        let mapped = |s: f64| {
            let one_minus = 1.0 - s;
            f(last + s / one_minus) * (1.0 / (one_minus * one_minus))
        };
        total + self.integrate(mapped, &[0.0, 1.0])
    }

    pub fn worst_error(&self) -> f64 {
        self.worst.get()
    }

    pub fn failed(&self) -> bool {
        self.failed.get()
    }

    /// Turn the accumulated bookkeeping into a result.
    pub fn check<T>(&self, value: T) -> Result<T> {
        if self.failed.get() {
            Err(LevyError::QuadratureFailure { estimate: self.worst.get() })
        } else {
            Ok(value)
        }
    }
}

/// Sorted, deduplicated breakpoints strictly inside (a, b), framed by a and b.
pub fn sorted_points(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    pts
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}
