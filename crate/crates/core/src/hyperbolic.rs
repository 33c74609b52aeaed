//! Hyperbolic characteristic functions t/sinh t and 1/cosh t, the
//! characteristic functions exp(tφ′/φ) of their background driving laws, and
//! a numerical check of closed forms for 𝒟 log ψ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::exponent::{d_operator, LevyExponent};

/// Below this |t| every expression switches to its Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

pub fn phi_s(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0 - 31.0 * t2 * t2 * t2 / 15120.0
    } else {
        t / t.sinh()
    }
}

pub fn phi_c(t: f64) -> f64 {
    1.0 / t.cosh()
}

fn phi_s_prime(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        -t / 3.0 + 7.0 * t * t2 / 90.0 - 31.0 * t * t2 * t2 / 2520.0
    } else {
        let s = t.sinh();
        (s - t * t.cosh()) / (s * s)
    }
}

fn phi_c_prime(t: f64) -> f64 {
    -t.tanh() / t.cosh()
}

/// 1 − t coth t.
fn one_minus_t_coth(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        -t2 / 3.0 + t2 * t2 / 45.0 - 2.0 * t2 * t2 * t2 / 945.0
    } else {
        1.0 - t / t.tanh()
    }
}

/// ψ_S(t) = exp(1 − t coth t).
pub fn psi_s(t: f64) -> f64 {
    one_minus_t_coth(t).exp()
}

/// ψ_C(t) = exp(−t tanh t).
pub fn psi_c(t: f64) -> f64 {
    (-t * t.tanh()).exp()
}

/// A real characteristic function with an optional exact derivative.
#[derive(Clone, Copy)]
pub struct ScalarCf {
    pub name: &'static str,
    pub value: fn(f64) -> f64,
    pub derivative: Option<fn(f64) -> f64>,
}

impl ScalarCf {
    pub const SINH: ScalarCf = ScalarCf { name: "t/sinh t", value: phi_s, derivative: Some(phi_s_prime) };
    pub const COSH: ScalarCf = ScalarCf { name: "1/cosh t", value: phi_c, derivative: Some(phi_c_prime) };

    /// The same function with the derivative left to finite differences.
    pub fn numeric(self) -> ScalarCf {
        ScalarCf { derivative: None, ..self }
    }
}

/// exp(t φ′(t)/φ(t)).
pub fn bdlp_cf(phi: &ScalarCf, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    let v = (phi.value)(t);
    if v == 0.0 {
        return Err(LevyError::InvalidParameter(format!("{} vanishes at t = {t}", phi.name)));
    }
    let dv = match phi.derivative {
        Some(d) => d(t),
        None => {
            let h = 1e-3 * t.abs().max(1.0);
            let c = |h: f64| ((phi.value)(t + h) - (phi.value)(t - h)) / (2.0 * h);
            let (coarse, fine) = (c(h), c(0.5 * h));
            let d = (4.0 * fine - coarse) / 3.0;
            let err = (d - fine).abs();
            if err > 1e-4 * d.abs().max(1.0) {
                return Err(LevyError::DifferentiationUnstable { disagreement: err });
            }
            d
        }
    };
    Ok((t * dv / v).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi {
    Sinh,
    Cosh,
}

impl Psi {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Psi::Sinh => psi_s(t),
            Psi::Cosh => psi_c(t),
        }
    }

    /// log ψ as an exponent.
    pub fn log_exponent(self) -> LevyExponent {
        match self {
            Psi::Sinh => LevyExponent::from_fn(|t| Complex64::new(one_minus_t_coth(t), 0.0)),
            Psi::Cosh => LevyExponent::from_fn(|t| Complex64::new(-t * t.tanh(), 0.0)),
        }
    }
}

/// (𝒟 log ψ)(t), numerically.
pub fn d_log_psi(psi: Psi, t: f64) -> Result<f64> {
    Ok(d_operator(&psi.log_exponent(), t, None)?.value.re)
}

/// −2t tanh t − t²/cosh²t.
pub fn d_log_psi_c_closed(t: f64) -> f64 {
    -2.0 * t * t.tanh() - (t / t.cosh()).powi(2)
}

/// 1 − 2 coth t + t²/sinh²t.
pub fn d_log_psi_s_candidate_a(t: f64) -> f64 {
    1.0 - 2.0 / t.tanh() + (t / t.sinh()).powi(2)
}

/// 1 − 2t coth t + t²/sinh²t.
pub fn d_log_psi_s_candidate_b(t: f64) -> f64 {
    1.0 - 2.0 * t / t.tanh() + (t / t.sinh()).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub t: f64,
    pub numeric: f64,
    pub candidate_a: f64,
    pub candidate_b: f64,
    pub error_a: f64,
    pub error_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Match {
    CandidateA,
    CandidateB,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictTable {
    pub candidate_a: String,
    pub candidate_b: String,
    pub tolerance: f64,
    pub rows: Vec<VerdictRow>,
    pub matches: Match,
}

pub const VERDICT_POINTS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

/// Compares numeric 𝒟 log ψ_S with the two candidate closed forms at
/// several points. A single point does not separate them: they agree at t = 1.
pub fn psi_s_verdict(points: &[f64], tolerance: f64) -> Result<VerdictTable> {
    let rows = points
        .iter()
        .map(|&t| {
            let numeric = d_log_psi(Psi::Sinh, t)?;
            let (a, b) = (d_log_psi_s_candidate_a(t), d_log_psi_s_candidate_b(t));
            Ok(VerdictRow { t, numeric, candidate_a: a, candidate_b: b, error_a: (numeric - a).abs(), error_b: (numeric - b).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let a_ok = rows.iter().all(|r| r.error_a <= tolerance);
    let b_ok = rows.iter().all(|r| r.error_b <= tolerance);
    let matches = match (a_ok, b_ok) {
        (true, true) => Match::Both,
        (true, false) => Match::CandidateA,
        (false, true) => Match::CandidateB,
        (false, false) => Match::Neither,
    };
    Ok(VerdictTable {
        candidate_a: "1 - 2 coth t + t^2/sinh^2 t".into(),
        candidate_b: "1 - 2t coth t + t^2/sinh^2 t".into(),
        tolerance,
        rows,
        matches,
    })
}
