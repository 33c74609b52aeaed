//! Lévy exponents Φ(y) = log E[e^{iyX}] and the differential operators that
//! invert 𝒥 on exponents (𝒟) and on spectral functions (𝒜).

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{Direction, LevyMeasure};
use crate::quad::Quad;
use crate::special::{g_char_fn, g_moment, integrate_tau};
use crate::triple::{LevyTriple, SpectralFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    Kernel,
    Derived,
}

type ExponentFn = dyn Fn(f64) -> Result<Complex64> + Send + Sync;

/// A complex-valued exponent y ↦ Φ(y).
#[derive(Clone)]
pub struct LevyExponent {
    f: Arc<ExponentFn>,
    provenance: Provenance,
}

impl fmt::Debug for LevyExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyExponent").field("provenance", &self.provenance).finish_non_exhaustive()
    }
}

impl LevyExponent {
    pub fn new(provenance: Provenance, f: impl Fn(f64) -> Result<Complex64> + Send + Sync + 'static) -> Self {
        LevyExponent { f: Arc::new(f), provenance }
    }

    /// Wraps an infallible closure.
    pub fn from_fn(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        LevyExponent::new(Provenance::Derived, move |y| Ok(f(y)))
    }

    pub fn eval(&self, y: f64) -> Result<Complex64> {
        (self.f)(y)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Φ(0) = 0, Φ(−y) = conj Φ(y) and Re Φ ≤ 0 on `grid`, each up to `slack`.
    pub fn check_invariants(&self, grid: &[f64], slack: f64) -> Result<bool> {
        if self.eval(0.0)?.norm() > slack {
            return Ok(false);
        }
        for &y in grid {
            let p = self.eval(y)?;
            let m = self.eval(-y)?;
            if (p - m.conj()).norm() > slack * (1.0 + p.norm()) || p.re > slack * (1.0 + p.norm()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Φ(y) = iay − ½Ry² + ∫(e^{iyx} − 1 − iyx·1{|x| ≤ 1}) M(dx).
pub fn exponent(t: &LevyTriple) -> Result<LevyExponent> {
    t.check_structure()?;
    let t = Arc::new(t.clone());
    let provenance = if t.measure.is_closed_form() { Provenance::ClosedForm } else { Provenance::Quadrature };
    Ok(LevyExponent::new(provenance, move |y| {
        let q = Quad::default();
        let jump = t.measure.jump_exponent(y, &q);
        q.check(Complex64::new(-0.5 * t.gauss_var * y * y, t.shift * y) + jump)
    }))
}

/// y ↦ ∫_{(0,1)} Ψ(ty) dτ_α(t): the exponent of ∫ t dY(τ_α(t)) when Ψ drives Y.
pub fn exponent_transform(psi: &LevyExponent, alpha: f64) -> Result<LevyExponent> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(LevyError::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(psi.clone());
    }
    let psi = psi.clone();
    Ok(LevyExponent::new(Provenance::Quadrature, move |y| {
        if y == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let q = Quad::default();
        let failure = RefCell::new(None);
        let v = integrate_tau(
            &q,
            alpha,
            |s| match psi.eval(s * y) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            &[],
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        q.check(v)
    }))
}

/// Exponent of 𝒥^m(t) written through the characteristic function of g_m:
/// i 2^{−m} a y − ½ 3^{−m} R y² + Σ mass·[ĝ_m(yx) − 1 − i 2^{−m} y x 1{|x| ≤ 1}].
pub fn kernel_cf(t: &LevyTriple, m: u32) -> Result<LevyExponent> {
    t.check_structure()?;
    if m == 0 {
        return Err(LevyError::InvalidParameter("kernel order must be at least 1".into()));
    }
    let atoms = match &t.measure {
        LevyMeasure::Discrete { atoms } => atoms.clone(),
        other if other.is_zero() => Vec::new(),
        _ => return Err(LevyError::UnsupportedSeed("the g-kernel form needs a discrete seed measure".into())),
    };
    let alpha = m as f64;
    let (c1, c2) = (g_moment(alpha, 1.0), g_moment(alpha, 2.0));
    let (a, r) = (t.shift, t.gauss_var);
    Ok(LevyExponent::new(Provenance::Kernel, move |y| {
        let mut v = Complex64::new(-0.5 * c2 * r * y * y, c1 * a * y);
        for at in &atoms {
            let comp = if at.x.abs() <= 1.0 { c1 * y * at.x } else { 0.0 };
            v += (g_char_fn(alpha, y * at.x) - Complex64::new(1.0, comp)) * at.mass;
        }
        Ok(v)
    }))
}

/// A derivative-based value with its Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    /// True when a one-sided stencil was used next to a kink.
    pub flagged: bool,
}

const RICHARDSON_TOL: f64 = 1e-4;

/// (𝒟g)(y) = g(y) + y g′(y), central differences with one Richardson step.
/// `step` defaults to 10⁻²·max(1, |y|).
pub fn d_operator(g: &LevyExponent, y: f64, step: Option<f64>) -> Result<Estimate<Complex64>> {
    let h = step.unwrap_or(1e-2 * y.abs().max(1.0));
    let central = |h: f64| -> Result<Complex64> { Ok((g.eval(y + h)? - g.eval(y - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    let deriv = (fine * 4.0 - coarse) / 3.0;
    let value = g.eval(y)? + deriv * y;
    let error = (deriv - fine).norm() * y.abs();
    if !(error <= RICHARDSON_TOL * value.norm().max(1.0)) {
        return Err(LevyError::DifferentiationUnstable { disagreement: error });
    }
    Ok(Estimate { value, error, flagged: false })
}

/// The exponent y ↦ (𝒟g)(y).
pub fn d_exponent(g: &LevyExponent) -> LevyExponent {
    let g = g.clone();
    LevyExponent::new(Provenance::Derived, move |y| Ok(d_operator(&g, y, None)?.value))
}

/// (𝒜L)(r) = r L′(r) − L(r) for a real function of r > 0.
///
/// Differences are taken in ln r with relative step `step` (default 10⁻³).
/// Within two steps of a radius in `kinks` the stencil becomes one-sided,
/// pointing away from the kink, and the estimate is flagged.
pub fn a_operator_fn(
    f: impl Fn(f64) -> Result<f64>,
    r: f64,
    kinks: &[f64],
    step: Option<f64>,
) -> Result<Estimate<f64>> {
    if !(r > 0.0) {
        return Err(LevyError::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let h = step.unwrap_or(1e-3);
    let s0 = r.ln();
    let at = |ds: f64| f((s0 + ds).exp());
    let nearest = kinks.iter().filter(|k| **k > 0.0).map(|k| k.ln() - s0).min_by(|a, b| a.abs().total_cmp(&b.abs()));
    let (deriv, error, flagged) = match nearest {
        Some(d) if d.abs() <= 2.0 * h => {
            // one-sided, second order, away from the kink
            let dir = if d > 0.0 { -1.0 } else { 1.0 };
            let f0 = at(0.0)?;
            let side = |h: f64| -> Result<f64> { Ok(dir * (-3.0 * f0 + 4.0 * at(dir * h)? - at(2.0 * dir * h)?) / (2.0 * h)) };
            let coarse = side(h)?;
            let fine = side(0.5 * h)?;
            let d = (4.0 * fine - coarse) / 3.0;
            (d, (d - fine).abs(), true)
        }
        _ => {
            let central = |h: f64| -> Result<f64> { Ok((at(h)? - at(-h)?) / (2.0 * h)) };
            let coarse = central(h)?;
            let fine = central(0.5 * h)?;
            let d = (4.0 * fine - coarse) / 3.0;
            (d, (d - fine).abs(), false)
        }
    };
    let value = deriv - f(r)?;
    if !(error <= RICHARDSON_TOL * value.abs().max(1.0)) {
        return Err(LevyError::DifferentiationUnstable { disagreement: error });
    }
    Ok(Estimate { value, error, flagged })
}

/// 𝒜 applied to a spectral function; kinks are taken from the measure.
pub fn a_operator(l: &SpectralFunction, dir: Direction, r: f64, step: Option<f64>) -> Result<Estimate<f64>> {
    let kinks = l.measure().kink_radii();
    a_operator_fn(|x| l.try_evaluate(dir, x), r, &kinks, step)
}
