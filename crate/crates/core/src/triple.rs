//! Lévy triples [a, R, M], the spectral function and the triple algebra.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{Direction, LevyMeasure, ValidationReport};
use crate::quad::Quad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyTriple {
    pub shift: f64,
    pub gauss_var: f64,
    #[serde(default)]
    pub measure: LevyMeasure,
}

impl LevyTriple {
    pub fn new(shift: f64, gauss_var: f64, measure: LevyMeasure) -> Self {
        LevyTriple { shift, gauss_var, measure }
    }

    pub fn gaussian(gauss_var: f64) -> Self {
        LevyTriple::new(0.0, gauss_var, LevyMeasure::zero())
    }

    pub fn drift(shift: f64) -> Self {
        LevyTriple::new(shift, 0.0, LevyMeasure::zero())
    }

    pub fn pure_jump(measure: LevyMeasure) -> Self {
        LevyTriple::new(0.0, 0.0, measure)
    }

    /// Poisson law with jumps of size 1 and intensity λ: [λ, 0, λ·δ₁].
    pub fn poisson(lambda: f64) -> Self {
        LevyTriple::new(lambda, 0.0, LevyMeasure::discrete(&[(1.0, lambda)]))
    }

    /// Cheap structural checks.
    pub fn check_structure(&self) -> Result<()> {
        if !self.shift.is_finite() {
            return Err(LevyError::InvalidParameter(format!("shift must be finite, got {}", self.shift)));
        }
        if !(self.gauss_var.is_finite() && self.gauss_var >= 0.0) {
            return Err(LevyError::InvalidParameter(format!(
                "gauss_var must be finite and nonnegative, got {}",
                self.gauss_var
            )));
        }
        self.measure.check_structure()
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_structure()?;
        self.measure.validate()
    }

    pub fn spectral_function(&self) -> SpectralFunction {
        SpectralFunction::new(self.measure.clone())
    }

    /// Law of d·X: Φ_{T_d μ}(y) = Φ_μ(d y).
    pub fn dilate(&self, d: f64) -> Result<LevyTriple> {
        if !(d.is_finite() && d != 0.0) {
            return Err(LevyError::InvalidParameter(format!("dilation factor must be finite and nonzero, got {d}")));
        }
        let q = Quad::default();
        let correction = if self.measure.is_zero() { 0.0 } else { d * self.measure.truncation_shift(1.0 / d.abs(), &q) };
        let out = LevyTriple::new(d * self.shift + correction, d * d * self.gauss_var, self.measure.dilate(d));
        q.check(out)
    }

    /// Convolution power μ^{*s}.
    pub fn conv_power(&self, s: f64) -> Result<LevyTriple> {
        if !(s.is_finite() && s > 0.0) {
            return Err(LevyError::InvalidParameter(format!("convolution power must be positive, got {s}")));
        }
        Ok(LevyTriple::new(s * self.shift, s * self.gauss_var, self.measure.scale_mass(s)))
    }

    pub fn convolve(&self, other: &LevyTriple) -> LevyTriple {
        LevyTriple::new(self.shift + other.shift, self.gauss_var + other.gauss_var, self.measure.add(&other.measure))
    }
}

/// L(D, r) = −M{|x| > r, sign x = D}.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    measure: Arc<LevyMeasure>,
    tol: (f64, f64),
}

impl SpectralFunction {
    pub fn new(measure: LevyMeasure) -> Self {
        SpectralFunction { measure: Arc::new(measure), tol: crate::quad::default_tolerance() }
    }

    pub fn with_tolerance(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.tol = (abs_tol, rel_tol);
        self
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }

    pub fn try_evaluate(&self, dir: Direction, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(LevyError::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        let q = Quad::new(self.tol.0, self.tol.1);
        let v = -self.measure.tail(dir, r, &q);
        q.check(v)
    }

    /// Evaluates without surfacing quadrature diagnostics.
    pub fn evaluate(&self, dir: Direction, r: f64) -> f64 {
        let q = Quad::new(self.tol.0, self.tol.1);
        -self.measure.tail(dir, r, &q)
    }

    /// Error floor for values produced by this evaluator.
    pub fn noise_floor(&self) -> f64 {
        if self.measure.has_closed_form_tail() {
            1e-15
        } else {
            self.tol.0.max(1e-15)
        }
    }
}

/// Geometric grid of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    pub radii: Vec<f64>,
}

impl RadiusGrid {
    pub fn geometric(lo: f64, hi: f64, per_decade: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && per_decade > 0) {
            return Err(LevyError::InvalidParameter(format!("bad radius grid [{lo}, {hi}] with {per_decade}/decade")));
        }
        let n = ((hi / lo).log10() * per_decade as f64).ceil() as usize;
        let step = (hi / lo).ln() / n as f64;
        Ok(RadiusGrid { radii: (0..=n).map(|i| lo * (step * i as f64).exp()).collect() })
    }

    /// Default grid for a measure: [min scale/100, 1000·max scale].
    pub fn for_measure(m: &LevyMeasure, per_decade: usize) -> Self {
        let scales = m.scale_radii();
        let (lo, hi) = match (scales.first(), scales.last()) {
            (Some(a), Some(b)) => (a * 1e-2, b * 1e3),
            _ => (1e-2, 1e3),
        };
        RadiusGrid::geometric(lo, hi, per_decade).expect("positive scales")
    }

    /// Spacing in ln r.
    pub fn log_step(&self) -> f64 {
        if self.radii.len() < 2 {
            return 0.0;
        }
        (self.radii[1] / self.radii[0]).ln()
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Sign and monotonicity of tabulated spectral data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCheck {
    pub passed: bool,
    /// Largest positive value or largest decrease between neighbours.
    pub worst_violation: f64,
    pub radius_of_worst: Option<f64>,
}

/// Checks that `values` on `radii` could be a spectral function: nonpositive
/// and nondecreasing, each up to `slack`. Points with `skip[i]` set are left
/// out of the monotonicity comparison.
pub fn check_spectral_values(radii: &[f64], values: &[f64], slack: f64, skip: &[bool]) -> SpectralCheck {
    let mut worst = 0.0f64;
    let mut at = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return SpectralCheck { passed: false, worst_violation: f64::INFINITY, radius_of_worst: Some(radii[i]) };
        }
        if v > worst {
            worst = v;
            at = Some(radii[i]);
        }
        if i > 0 && !skip.get(i).copied().unwrap_or(false) && !skip.get(i - 1).copied().unwrap_or(false) {
            let drop = values[i - 1] - v;
            if drop > worst {
                worst = drop;
                at = Some(radii[i]);
            }
        }
    }
    SpectralCheck { passed: worst <= slack, worst_violation: worst, radius_of_worst: at }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CofactorReport {
    pub c: f64,
    pub passed: bool,
    pub positive: SpectralCheck,
    pub negative: SpectralCheck,
}

impl CofactorReport {
    pub fn worst_violation(&self) -> f64 {
        self.positive.worst_violation.max(self.negative.worst_violation)
    }
}

/// Tests whether M − c·M∘(x ↦ x/c) is a Lévy measure by checking the spectral
/// data L(D, r) − c·L(D, r/c) on `grid`.
pub fn cofactor_exponent_check(t: &LevyTriple, c: f64, grid: &RadiusGrid) -> Result<CofactorReport> {
    if !(c > 0.0 && c < 1.0) {
        return Err(LevyError::InvalidParameter(format!("cofactor parameter must lie in (0, 1), got {c}")));
    }
    let sf = t.spectral_function();
    let check = |dir: Direction| -> Result<SpectralCheck> {
        let values = grid
            .radii
            .iter()
            .map(|&r| Ok(sf.try_evaluate(dir, r)? - c * sf.try_evaluate(dir, r / c)?))
            .collect::<Result<Vec<f64>>>()?;
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let slack = 10.0 * sf.noise_floor() * (1.0 + scale) + 1e-12 * scale;
        Ok(check_spectral_values(&grid.radii, &values, slack, &[]))
    };
    let positive = check(Direction::Pos)?;
    let negative = check(Direction::Neg)?;
    Ok(CofactorReport { c, passed: positive.passed && negative.passed, positive, negative })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_examples() {
        let t = LevyTriple::new(1.0, 2.0, LevyMeasure::zero());
        assert_eq!(t.conv_power(3.0).unwrap(), LevyTriple::new(3.0, 6.0, LevyMeasure::zero()));
        let g = LevyTriple::gaussian(1.0).dilate(-2.0).unwrap();
        assert_eq!((g.shift, g.gauss_var), (0.0, 4.0));
        let p = LevyTriple::pure_jump(LevyMeasure::discrete(&[(2.0, 1.0)])).dilate(0.25).unwrap();
        assert_eq!(p.measure, LevyMeasure::discrete(&[(0.5, 1.0)]));
        assert!((p.shift - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dilating_stable_flips_direction() {
        let t = LevyTriple::pure_jump(LevyMeasure::stable(&[(Direction::Pos, 1.5, 1.0)]));
        let d = t.dilate(-2.0).unwrap();
        let expect = LevyMeasure::stable(&[(Direction::Neg, 1.5, 2f64.powf(1.5))]);
        assert_eq!(d.measure, expect);
    }

    #[test]
    fn cofactor_examples() {
        let grid = RadiusGrid::geometric(0.01, 100.0, 50).unwrap();
        assert!(cofactor_exponent_check(&LevyTriple::gaussian(2.0), 0.3, &grid).unwrap().passed);
        let poisson = LevyTriple::poisson(1.0);
        let r = cofactor_exponent_check(&poisson, 0.5, &grid).unwrap();
        assert!(!r.passed);
        assert!((r.positive.worst_violation - 0.5).abs() < 1e-12);
        let stable = LevyTriple::pure_jump(LevyMeasure::stable(&[(Direction::Pos, 1.0, 1.0)]));
        let r = cofactor_exponent_check(&stable, 0.5, &grid).unwrap();
        assert!(r.passed);
        let sf = stable.spectral_function();
        let v = sf.evaluate(Direction::Pos, 2.0) - 0.5 * sf.evaluate(Direction::Pos, 4.0);
        assert!((v + (1.0 - 0.25) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_is_geometric() {
        let g = RadiusGrid::geometric(1e-2, 1e3, 200).unwrap();
        assert_eq!(g.len(), 1001);
        assert!((g.radii[1000] - 1e3).abs() < 1e-9);
        assert!((g.log_step() - 10f64.ln() / 200.0).abs() < 1e-12);
    }

    #[test]
    fn triple_document_fields() {
        let t: LevyTriple = serde_json::from_str(r#"{"shift":1,"gauss_var":2,"measure":{"type":"discrete","atoms":[{"x":1,"mass":1}]}}"#).unwrap();
        assert_eq!(t, LevyTriple::new(1.0, 2.0, LevyMeasure::discrete(&[(1.0, 1.0)])));
        assert!(serde_json::from_str::<LevyTriple>(r#"{"shift":1,"gauss_var":2,"measure":{"type":"discrete","atoms":[]},"x":0}"#).is_err());
        assert!(LevyTriple::gaussian(-1.0).validate().is_err());
    }
}
