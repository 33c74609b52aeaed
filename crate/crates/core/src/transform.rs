//! Random-integral transforms of Lévy triples.
//!
//! A triple [a, R, M] drives a Lévy process Y; these maps return the triple of
//! ∫ h(t) dY(r(t)) for the integrands used in the library.

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{check_tabulation, Direction, LevyMeasure, StableAtom, LOG_MOMENT_CEILING};
use crate::quad::{default_tolerance, Quad};
use crate::special::{g_moment, g_partial_moment, gamma_q};
use crate::triple::LevyTriple;

/// Tolerance for shift integrals, which are reported as exact fields.
fn shift_quad() -> Quad {
    let (a, r) = default_tolerance();
    Quad::new(a.min(1e-14), r.min(1e-13))
}

/// A function on (knots[0], knots[n−1]], linear between knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl Tabulated {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(LevyError::InvalidParameter("tabulated function needs ≥ 2 knots and as many values".into()));
        }
        Ok(Tabulated { knots, values })
    }

    /// Tabulates `f` on `n + 1` equally spaced knots of [a, b].
    pub fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let knots: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let values = knots.iter().map(|&t| f(t)).collect();
        Tabulated { knots, values }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0] {
            return self.values[0];
        }
        if t >= k[k.len() - 1] {
            return self.values[k.len() - 1];
        }
        let i = k.partition_point(|x| *x <= t) - 1;
        let u = (t - k[i]) / (k[i + 1] - k[i]);
        self.values[i] + u * (self.values[i + 1] - self.values[i])
    }

    /// Values at another set of knots.
    fn resample(&self, knots: &[f64]) -> Vec<f64> {
        knots.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Triple of ∫_{(a,b]} h(t) dY(r(t)), with h and r linear between their knots.
pub fn general_transform(t: &LevyTriple, h: &Tabulated, r: &Tabulated) -> Result<LevyTriple> {
    t.check_structure()?;
    let mut knots: Vec<f64> = h.knots.iter().chain(&r.knots).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let (lo, hi) = (h.knots[0].max(r.knots[0]), h.knots[h.knots.len() - 1].min(r.knots[r.knots.len() - 1]));
    knots.retain(|x| *x >= lo && *x <= hi);
    let hv = h.resample(&knots);
    let rv = r.resample(&knots);
    check_tabulation(&knots, &hv, &rv)?;

    // h² is quadratic on each cell, so two-point Gauss is exact.
    let g = 0.5 / 3f64.sqrt();
    let mut h2 = 0.0;
    for k in 0..knots.len() - 1 {
        let dr = rv[k + 1] - rv[k];
        let at = |u: f64| hv[k] + (hv[k + 1] - hv[k]) * u;
        h2 += 0.5 * dr * (at(0.5 - g).powi(2) + at(0.5 + g).powi(2));
    }

    let identity = hv.iter().all(|v| *v == 1.0) && rv[rv.len() - 1] - rv[0] == 1.0;
    let measure = if identity || t.measure.is_zero() {
        t.measure.clone()
    } else {
        LevyMeasure::Tabulated { knots: knots.clone(), h: hv.clone(), r: rv.clone(), seed: Box::new(t.measure.clone()) }
    };

    // a' = ∫ h(t)[a + Δ(1/|h(t)|)] dr(t) with Δ the truncation shift of the seed.
    let q = shift_quad();
    let shift = if identity {
        t.shift
    } else {
        let kernel = LevyMeasure::Tabulated { knots, h: hv, r: rv, seed: Box::new(LevyMeasure::zero()) };
        let (_, k) = kernel.kernel().expect("tabulated kernel");
        let breaks = t.measure.kink_radii().iter().map(|x| 1.0 / x).collect::<Vec<_>>();
        k.integrate(&q, |s: f64| s * (t.shift + t.measure.truncation_shift(1.0 / s.abs(), &q)), &breaks)
    };
    if q.failed() {
        return Err(LevyError::GridTooCoarse { change: q.worst_error() });
    }
    Ok(LevyTriple::new(shift, h2 * t.gauss_var, measure))
}

/// 𝒥^α: triple of ∫_{(0,1)} t dY(τ_α(t)). α = 0 is the identity.
pub fn j_alpha(t: &LevyTriple, alpha: f64) -> Result<LevyTriple> {
    t.check_structure()?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(LevyError::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(t.clone());
    }
    let q = shift_quad();
    let tail_shift = t.measure.moment(&|x: f64| x * gamma_q(alpha, 2.0 * x.abs().ln()), 1.0, f64::INFINITY, &q);
    let shift = g_moment(alpha, 1.0) * (t.shift + tail_shift);
    let measure = if t.measure.is_zero() {
        LevyMeasure::zero()
    } else {
        LevyMeasure::JTransformed { alpha, seed: Box::new(t.measure.clone()) }
    };
    q.check(LevyTriple::new(shift, g_moment(alpha, 2.0) * t.gauss_var, measure))
}

/// Shift of 𝒥^m for integer m written as a finite sum:
/// 2^{−m}[a + ∫_{|x|>1} x|x|^{−2} Σ_{j<m} (2 ln|x|)^j / j! M(dx)].
pub fn j_integer_shift(t: &LevyTriple, m: u32) -> Result<f64> {
    if m == 0 {
        return Ok(t.shift);
    }
    let q = shift_quad();
    let poly = |x: f64| {
        let l = 2.0 * x.abs().ln();
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..m {
            term *= l / j as f64;
            sum += term;
        }
        sum / x
    };
    let tail = t.measure.moment(&poly, 1.0, f64::INFINITY, &q);
    q.check(0.5f64.powi(m as i32) * (t.shift + tail))
}

/// Triple of ∫_{[c,1)} t dY(t).
pub fn partial_integral_triple(t: &LevyTriple, c: f64) -> Result<LevyTriple> {
    t.check_structure()?;
    if !(c > 0.0 && c < 1.0) {
        return Err(LevyError::InvalidParameter(format!("cut must lie in (0, 1), got {c}")));
    }
    // ∫_c^1 t^s dt through the α = 1 moment and its partial complement.
    let restricted = |s: f64| g_moment(1.0, s) - g_partial_moment(1.0, s, c);
    let q = shift_quad();
    let tail = t.measure.moment(&|x: f64| 0.5 * x * (x.powi(-2) - c * c), 1.0, 1.0 / c, &q);
    let measure = if t.measure.is_zero() {
        LevyMeasure::zero()
    } else {
        LevyMeasure::PartialIntegral { c, seed: Box::new(t.measure.clone()) }
    };
    q.check(LevyTriple::new(restricted(1.0) * t.shift + tail, restricted(2.0) * t.gauss_var, measure))
}

/// ℐ: triple of ∫_0^∞ e^{−s} dY(s). Needs a finite logarithmic moment.
pub fn i_transform(t: &LevyTriple) -> Result<LevyTriple> {
    t.check_structure()?;
    let q = shift_quad();
    let lm = t.measure.log_moment(&q);
    if !lm.is_finite() || lm > LOG_MOMENT_CEILING {
        return Err(LevyError::LogMomentDiverges(format!("∫_{{|x|>1}} ln|x| M(dx) ≈ {lm:.3e}")));
    }
    // ∫_0^∞ e^{−s}·x 1{e^{−s}|x| ≤ 1 < |x|} ds = sign x
    let shift = t.shift + t.measure.tail(Direction::Pos, 1.0, &q) - t.measure.tail(Direction::Neg, 1.0, &q);
    let measure = match &t.measure {
        LevyMeasure::StableMixture { atoms } => LevyMeasure::StableMixture {
            atoms: atoms.iter().map(|a| StableAtom { weight: a.weight / a.z, ..*a }).collect(),
        },
        m if m.is_zero() => LevyMeasure::zero(),
        m => LevyMeasure::ITransformed { seed: Box::new(m.clone()) },
    };
    q.check(LevyTriple::new(shift, 0.5 * t.gauss_var, measure))
}

/// 𝒥^α on a stable mixture: weights scale by (z + 1)^{−α}.
pub fn stable_mixture_j(sigma: &LevyMeasure, alpha: f64) -> Result<LevyMeasure> {
    let LevyMeasure::StableMixture { atoms } = sigma else {
        return Err(LevyError::InvalidMeasure("expected a stable mixture".into()));
    };
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(LevyError::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    Ok(LevyMeasure::StableMixture {
        atoms: atoms.iter().map(|a| StableAtom { weight: a.weight * g_moment(alpha, a.z), ..*a }).collect(),
    })
}

/// ℐ on a stable mixture: weights scale by z^{−1}.
pub fn stable_mixture_i(sigma: &LevyMeasure) -> Result<LevyMeasure> {
    let LevyMeasure::StableMixture { atoms } = sigma else {
        return Err(LevyError::InvalidMeasure("expected a stable mixture".into()));
    };
    Ok(LevyMeasure::StableMixture { atoms: atoms.iter().map(|a| StableAtom { weight: a.weight / a.z, ..*a }).collect() })
}
