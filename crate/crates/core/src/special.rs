//! Incomplete gamma, the time change τ_α and the law of g_α = exp(−G_α).
//!
//! τ_α(t) = Γ(α, −ln t)/Γ(α) is the distribution function of g_α, so every
//! integral against dτ_α is an expectation over a standard gamma variable.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{LevyError, Result};
use crate::quad::{Quad, Scalar};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for real x away from the non-positive integers.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 171.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    ln_gamma(x).exp()
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_continued_fraction(a, x)
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_continued_fraction(a, x)
    }
}

/// Upper incomplete gamma Γ(α, x) = ∫_x^∞ e^{−t} t^{α−1} dt; x = 0 gives Γ(α).
pub fn incomplete_gamma(alpha: f64, x: f64) -> f64 {
    gamma_q(alpha, x) * gamma(alpha)
}

/// τ_α(t) = P{g_α ≤ t} for t in (0, 1].
pub fn tau_cdf(alpha: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        gamma_q(alpha, -t.ln())
    }
}

/// E[g_α^s] = (s + 1)^{−α}.
pub fn g_moment(alpha: f64, s: f64) -> f64 {
    (s + 1.0).powf(-alpha)
}

/// ∫_0^c t^s dτ_α(t) = (s + 1)^{−α} Q(α, −(s + 1) ln c).
pub fn g_partial_moment(alpha: f64, s: f64, c: f64) -> f64 {
    if c >= 1.0 {
        return g_moment(alpha, s);
    }
    if c <= 0.0 {
        return 0.0;
    }
    g_moment(alpha, s) * gamma_q(alpha, -(s + 1.0) * c.ln())
}

/// Largest |t| evaluated by the power series; beyond it the alternating terms
/// cancel badly and the expectation is integrated directly.
const SERIES_LIMIT: f64 = 8.0;

/// Characteristic function E[exp(i t g_α)].
pub fn g_char_fn(alpha: f64, t: f64) -> Complex64 {
    if t.abs() <= SERIES_LIMIT {
        let mut sum = Complex64::new(0.0, 0.0);
        // term_n = (it)^n / n!
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..500 {
            let contrib = term * (n as f64 + 1.0).powf(-alpha);
            sum += contrib;
            if contrib.norm() < 1e-16 && n as f64 > t.abs() {
                break;
            }
            term *= Complex64::new(0.0, t) / (n as f64 + 1.0);
        }
        sum
    } else {
        let q = Quad::new(1e-14, 1e-13);
        integrate_tau(&q, alpha, |g| Complex64::new(0.0, t * g).exp(), &[])
    }
}

/// ∫_{(0,1)} f(t) dτ_α(t), with `breaks` marking kinks of f in t.
///
/// For α ≥ 1 the integral is taken in u = −ln t against the gamma density; for
/// α < 1 in v = u^α, where the density becomes exp(−v^{1/α})/Γ(α + 1) and the
/// singularity at u = 0 disappears.
pub fn integrate_tau<T: Scalar>(q: &Quad, alpha: f64, f: impl Fn(f64) -> T, breaks: &[f64]) -> T {
    let inner: Vec<f64> = breaks.iter().copied().filter(|t| *t > 0.0 && *t < 1.0).collect();
    if alpha >= 1.0 {
        let norm = 1.0 / gamma(alpha);
        let mut ub: Vec<f64> = inner.iter().map(|t| -t.ln()).collect();
        ub.push(alpha);
        ub.push(2.0 * alpha + 10.0);
        q.integrate_to_inf(
            |u: f64| {
                let w = if u == 0.0 {
                    if alpha == 1.0 { 1.0 } else { 0.0 }
                } else {
                    ((alpha - 1.0) * u.ln() - u).exp()
                };
                f((-u).exp()) * (w * norm)
            },
            0.0,
            &ub,
        )
    } else {
        let norm = 1.0 / gamma(alpha + 1.0);
        let inv = 1.0 / alpha;
        let mut vb: Vec<f64> = inner.iter().map(|t| (-t.ln()).powf(alpha)).collect();
        vb.push(1.0);
        q.integrate_to_inf(
            |v: f64| {
                let u = v.powf(inv);
                f((-u).exp()) * ((-u).exp() * norm)
            },
            0.0,
            &vb,
        )
    }
}

/// Draw n variates of g_α = exp(−G_α).
pub fn sample_g<R: Rng + ?Sized>(alpha: f64, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    let law = GammaTimeLaw::new(alpha)?;
    Ok((0..n).map(|_| law.sample(rng)).collect())
}

/// The time change τ_α on (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeChange {
    alpha: f64,
}

impl TimeChange {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(LevyError::InvalidParameter(format!("time-change index must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, t: f64) -> f64 {
        tau_cdf(self.alpha, t)
    }
}

/// Law of g_α.
#[derive(Debug, Clone, Copy)]
pub struct GammaTimeLaw {
    alpha: f64,
    gamma: Gamma<f64>,
}

impl GammaTimeLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        let tc = TimeChange::new(alpha)?;
        let gamma = Gamma::new(tc.alpha, 1.0).map_err(|e| LevyError::InvalidParameter(e.to_string()))?;
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cdf(&self, t: f64) -> f64 {
        tau_cdf(self.alpha, t)
    }

    pub fn moment(&self, s: f64) -> f64 {
        g_moment(self.alpha, s)
    }

    pub fn partial_moment(&self, s: f64, c: f64) -> f64 {
        g_partial_moment(self.alpha, s, c)
    }

    pub fn char_fn(&self, t: f64) -> Complex64 {
        g_char_fn(self.alpha, t)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let g = (-self.gamma.sample(rng)).exp();
            if g > 0.0 && g < 1.0 {
                return g;
            }
        }
    }
}
