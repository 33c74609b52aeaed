//! Numerical membership tests for the classes reached by iterating 𝒥.
//!
//! A triple lies in the m-th class when its spectral function can be hit by
//! (−𝒜)^m and every intermediate result is again a spectral function. On a
//! geometric grid −𝒜 becomes F ↦ F − dF/ds with s = ln r, taken by five-point
//! central differences, so each order costs roughly two digits.

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{Direction, LevyMeasure};
use crate::transform::{i_transform, j_alpha};
use crate::triple::{LevyTriple, RadiusGrid, SpectralFunction};

pub const MAX_ORDER_CAP: u32 = 6;

/// Points per decade of the default grid.
pub const DEFAULT_PER_DECADE: usize = 200;

/// Tolerance of lazily evaluated tails inside the classifier.
const TAIL_TOL: f64 = 1e-13;

/// A flagged value may exceed the unflagged range by this factor before it is
/// read as a point mass produced by differentiating a jump.
const SPIKE_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderDiagnostic {
    pub order: u32,
    pub passed: bool,
    pub worst_violation: f64,
    /// Kink radii whose neighbourhoods were excused from the monotonicity test.
    pub flagged_radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    /// Largest m such that orders 0..=m all passed.
    pub order: u32,
    pub max_order: u32,
    pub diagnostics: Vec<OrderDiagnostic>,
    pub completely_s: Verdict,
}

/// Checks one tabulated candidate. Returns (passed, worst violation).
fn check_candidate(values: &[f64], flagged: &[bool], slack: f64) -> (bool, f64) {
    let unflagged_max = values.iter().zip(flagged).filter(|(_, f)| !**f).fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    let spike_limit = SPIKE_FACTOR * unflagged_max + slack;
    let mut worst = 0.0f64;
    let mut passed = true;
    let mut prev_unflagged: Option<f64> = None;
    for (i, (&v, &f)) in values.iter().zip(flagged).enumerate() {
        if !v.is_finite() {
            return (false, f64::INFINITY);
        }
        if f {
            let drop = if i > 0 { values[i - 1] - v } else { 0.0 };
            let excess = v.max(drop).max(v.abs() - unflagged_max).max(0.0);
            if excess > spike_limit {
                passed = false;
                worst = worst.max(excess);
            }
            continue;
        }
        let mut violation = v.max(0.0);
        if let Some(p) = prev_unflagged {
            violation = violation.max(p - v);
        }
        if violation > slack {
            passed = false;
        }
        worst = worst.max(violation);
        prev_unflagged = Some(v);
    }
    (passed, worst)
}

/// Iterates −𝒜 on the spectral function of `t` up to `max_order` times.
pub fn classify_order(t: &LevyTriple, max_order: u32, grid: &RadiusGrid) -> Result<ClassReport> {
    t.check_structure()?;
    if max_order == 0 || max_order > MAX_ORDER_CAP {
        return Err(LevyError::InvalidParameter(format!("max order must lie in 1..={MAX_ORDER_CAP}, got {max_order}")));
    }
    if grid.len() < 3 {
        return Err(LevyError::InvalidParameter("radius grid needs at least three points".into()));
    }
    let measure = t.measure.simplified();
    let sf = SpectralFunction::new(measure.clone()).with_tolerance(TAIL_TOL, TAIL_TOL);
    let eps = if measure.has_closed_form_tail() { 2e-16 } else { 1e-12 };
    let kinks = measure.kink_radii();

    let ds = grid.log_step();
    let ext = 2 * max_order as usize;
    let first = grid.radii[0].ln();
    let radii: Vec<f64> = (0..grid.len() + 2 * ext).map(|i| (first + (i as f64 - ext as f64) * ds).exp()).collect();
    let in_range: Vec<f64> = kinks.iter().copied().filter(|k| *k >= grid.radii[0] && *k <= grid.radii[grid.len() - 1]).collect();

    let mut diagnostics: Vec<OrderDiagnostic> = (0..=max_order)
        .map(|order| OrderDiagnostic { order, passed: true, worst_violation: 0.0, flagged_radii: in_range.clone() })
        .collect();

    for dir in Direction::BOTH {
        let mut f = radii.iter().map(|&r| sf.try_evaluate(dir, r)).collect::<Result<Vec<f64>>>()?;
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        for k in 0..=max_order as usize {
            if k > 0 {
                f = (2..f.len() - 2)
                    .map(|i| f[i] - (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * ds))
                    .collect();
            }
            let offset = ext - 2 * k;
            let window = &f[offset..offset + grid.len()];
            let reach = (2.0 * k as f64 + 2.0) * ds * (1.0 + 1e-9);
            let flagged: Vec<bool> =
                grid.radii.iter().map(|r| kinks.iter().any(|kk| (r.ln() - kk.ln()).abs() <= reach)).collect();
            // rounding noise amplified by each stencil, plus truncation error
            let slack = scale * (10.0 * eps * (1.0 + 1.5 / ds).powi(k as i32) + 1e-12 + 1e-9 * k as f64);
            let (passed, worst) = check_candidate(window, &flagged, slack);
            let d = &mut diagnostics[k];
            d.passed &= passed;
            d.worst_violation = d.worst_violation.max(worst);
        }
    }

    let order = diagnostics.iter().take_while(|d| d.passed).count().saturating_sub(1) as u32;
    let completely_s = match stable_moment(&measure) {
        Some(_) => Verdict::Yes,
        None if order < max_order => Verdict::No,
        None => Verdict::Unknown,
    };
    Ok(ClassReport { order, max_order, diagnostics, completely_s })
}

/// Σ weight/(2 − z) when the measure is a stable mixture (or zero).
fn stable_moment(m: &LevyMeasure) -> Option<f64> {
    match m {
        LevyMeasure::StableMixture { atoms } => Some(atoms.iter().map(|a| a.weight / (2.0 - a.z)).sum()),
        m if m.is_zero() => Some(0.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletelySReport {
    pub verdict: Verdict,
    /// Σ weight/(2 − z) for stable-mixture representations.
    pub moment: Option<f64>,
    pub verified_order: Option<u32>,
}

/// Is the measure that of a completely selfdecomposable law?
pub fn classify_completely_s(m: &LevyMeasure) -> Result<CompletelySReport> {
    m.check_structure()?;
    let simple = m.simplified();
    if let Some(moment) = stable_moment(&simple) {
        let verdict = if moment.is_finite() { Verdict::Yes } else { Verdict::No };
        return Ok(CompletelySReport { verdict, moment: Some(moment), verified_order: None });
    }
    let grid = RadiusGrid::for_measure(&simple, DEFAULT_PER_DECADE);
    let report = classify_order(&LevyTriple::pure_jump(simple), MAX_ORDER_CAP, &grid)?;
    Ok(CompletelySReport { verdict: report.completely_s, moment: None, verified_order: Some(report.order) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionEntry {
    pub label: String,
    pub required_order: u32,
    pub verified_order: u32,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub passed: bool,
    pub entries: Vec<InclusionEntry>,
}

/// For each seed: 𝒥^{m+1}(seed) must verify order m + 1 (hence m), and the
/// ℐ image, when it exists, must verify order 1.
pub fn inclusion_chain_check(seeds: &[LevyTriple], m: u32) -> Result<InclusionReport> {
    if m + 1 > MAX_ORDER_CAP {
        return Err(LevyError::InvalidParameter(format!("m + 1 must not exceed {MAX_ORDER_CAP}")));
    }
    let mut entries = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        let image = j_alpha(seed, (m + 1) as f64)?;
        let cap = (m + 2).min(MAX_ORDER_CAP);
        let grid = RadiusGrid::for_measure(&image.measure.simplified(), DEFAULT_PER_DECADE);
        let r = classify_order(&image, cap, &grid)?;
        for required in [m + 1, m] {
            entries.push(InclusionEntry {
                label: format!("seed {i}: 𝒥^{} image at order {required}", m + 1),
                required_order: required,
                verified_order: r.order,
                passed: r.order >= required,
            });
        }
        if let Ok(sd) = i_transform(seed) {
            let grid = RadiusGrid::for_measure(&sd.measure.simplified(), DEFAULT_PER_DECADE);
            let r = classify_order(&sd, 1, &grid)?;
            entries.push(InclusionEntry {
                label: format!("seed {i}: ℐ image at order 1"),
                required_order: 1,
                verified_order: r.order,
                passed: r.order >= 1,
            });
        }
    }
    Ok(InclusionReport { passed: entries.iter().all(|e| e.passed), entries })
}
