//! Self-checks grouped into suites, each reported as one PASS/FAIL line.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_completely_s, classify_order, Verdict, DEFAULT_PER_DECADE};
use crate::error::{LevyError, Result};
use crate::exponent::{a_operator, d_operator, exponent, exponent_transform, kernel_cf};
use crate::hyperbolic::{bdlp_cf, d_log_psi, d_log_psi_c_closed, psi_s_verdict, Match, Psi, ScalarCf, VERDICT_POINTS};
use crate::measure::{Direction, LevyMeasure, StableAtom};
use crate::quad::Quad;
use crate::simulate::{compare_cf, empirical_cf, linear_grid, sample_integral_exact};
use crate::special::{g_moment, g_partial_moment, incomplete_gamma, integrate_tau, tau_cdf};
use crate::transform::{i_transform, j_alpha, j_integer_shift, partial_integral_triple, stable_mixture_j};
use crate::triple::{LevyTriple, RadiusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Special,
    Transform,
    Inverse,
    Mc,
    Hyperbolic,
    Classify,
    All,
}

impl FromStr for Suite {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "special" => Suite::Special,
            "transform" => Suite::Transform,
            "inverse" => Suite::Inverse,
            "mc" => Suite::Mc,
            "hyperbolic" => Suite::Hyperbolic,
            "classify" => Suite::Classify,
            "all" => Suite::All,
            other => return Err(LevyError::InvalidParameter(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Draws per (seed, α) pair in the Monte Carlo suite.
    pub mc_samples: usize,
    pub seed: u64,
    /// Size of the randomized classifier corpus.
    pub corpus: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mc_samples: 1_000_000, seed: 20_240_601, corpus: 200 }
    }
}

fn line(name: &str, outcome: Result<(bool, String)>) -> CheckLine {
    match outcome {
        Ok((passed, detail)) => CheckLine { name: name.to_string(), passed, detail },
        Err(e) => CheckLine { name: name.to_string(), passed: false, detail: format!("error: {e}") },
    }
}

/// Standard seeds: Gaussian with drift, Poisson, two-atom discrete, two-atom stable.
pub fn standard_seeds() -> Vec<(&'static str, LevyTriple)> {
    vec![
        ("gaussian", LevyTriple::new(0.3, 2.0, LevyMeasure::zero())),
        ("poisson", LevyTriple::poisson(1.0)),
        ("two-atom", LevyTriple::new(-0.2, 0.5, LevyMeasure::discrete(&[(2.5, 0.7), (-0.6, 1.3)]))),
        ("stable", LevyTriple::new(0.1, 0.0, LevyMeasure::stable(&[(Direction::Pos, 0.7, 1.0), (Direction::Neg, 1.4, 0.5)]))),
    ]
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<CheckLine> {
    match suite {
        Suite::Special => vec![
            line("moment identities", check_moments()),
            line("integer incomplete gamma", check_integer_gamma()),
            line("partial moments", check_partial_moments()),
            line("time-change semigroup", check_tau_semigroup()),
        ],
        Suite::Transform => vec![
            line("semigroup", check_semigroup()),
            line("recursion", check_recursion()),
            line("finite-sum shift", check_finite_sum_shift()),
            line("factorization", check_factorization()),
        ],
        Suite::Inverse => vec![
            line("D inverts J", check_d_inversion()),
            line("A inverts J", check_a_inversion()),
            line("cross-engine CF", check_cross_engine()),
        ],
        Suite::Mc => vec![line("Monte Carlo law", check_monte_carlo(opts))],
        Suite::Hyperbolic => vec![
            line("BDLP closed forms", check_bdlp()),
            line("D log psi_C", check_d_log_psi_c()),
            line("psi_S verdict", check_psi_s_verdict()),
        ],
        Suite::Classify => vec![
            line("classifier corpus", check_corpus(opts)),
            line("Poisson order", check_poisson_order()),
            line("stable closure", check_stable_closure()),
        ],
        Suite::All => [Suite::Special, Suite::Transform, Suite::Inverse, Suite::Mc, Suite::Hyperbolic, Suite::Classify]
            .into_iter()
            .flat_map(|s| run_suite(s, opts))
            .collect(),
    }
}

pub const MOMENT_PAIRS: [(f64, f64); 12] = [
    (0.5, 0.5),
    (0.5, 1.0),
    (0.5, 3.0),
    (1.0, 0.5),
    (1.0, 1.0),
    (1.0, 3.0),
    (2.0, 0.5),
    (2.0, 1.0),
    (2.0, 3.0),
    (3.5, 0.5),
    (3.5, 1.0),
    (3.5, 3.0),
];

fn check_moments() -> Result<(bool, String)> {
    let q = Quad::new(1e-13, 1e-13);
    let mut worst = 0.0f64;
    for (alpha, s) in MOMENT_PAIRS {
        let v: f64 = integrate_tau(&q, alpha, |t: f64| t.powf(s), &[]);
        worst = worst.max((v - g_moment(alpha, s)).abs());
    }
    Ok((worst <= 1e-8, format!("max abs error {worst:.2e} over 12 pairs")))
}

/// Γ(m, x) = (m − 1)! e^{−x} Σ_{k<m} x^k/k!.
pub fn integer_gamma_sum(m: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    (1..m).fold(1.0, |a, k| a * k as f64) * (-x).exp() * sum
}

fn check_integer_gamma() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in 1..=6u32 {
        for x in [0.1, 1.0, 10.0] {
            let exact = integer_gamma_sum(m, x);
            worst = worst.max(((incomplete_gamma(m as f64, x) - exact) / exact).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max rel error {worst:.2e}")))
}

fn check_partial_moments() -> Result<(bool, String)> {
    let q = Quad::new(1e-13, 1e-13);
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.5] {
        for s in [0.0, 1.0, 2.0] {
            for c in [0.1, 0.5, 0.9] {
                let v: f64 = integrate_tau(&q, alpha, |t: f64| if t <= c { t.powf(s) } else { 0.0 }, &[c]);
                worst = worst.max((v - g_partial_moment(alpha, s, c)).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max abs error {worst:.2e}")))
}

fn check_tau_semigroup() -> Result<(bool, String)> {
    let q = Quad::new(1e-12, 1e-12);
    let mut worst = 0.0f64;
    let tests: [&dyn Fn(f64) -> f64; 3] = [&|t| t.powf(1.5), &|t| (3.0 * t).cos(), &|t| (7.0 * t).cos()];
    for (alpha, beta) in [(0.5, 1.0), (1.0, 1.5), (2.0, 0.5)] {
        for h in tests {
            let nested: f64 = integrate_tau(&q, beta, |s: f64| integrate_tau(&q, alpha, |t: f64| h(s * t), &[]), &[]);
            let direct: f64 = integrate_tau(&q, alpha + beta, h, &[]);
            worst = worst.max((nested - direct).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max abs error {worst:.2e}")))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn spectral_gap(a: &LevyTriple, b: &LevyTriple, radii: &[f64]) -> Result<f64> {
    let (fa, fb) = (a.spectral_function(), b.spectral_function());
    let mut worst = 0.0f64;
    for &r in radii {
        for d in Direction::BOTH {
            worst = worst.max((fa.try_evaluate(d, r)? - fb.try_evaluate(d, r)?).abs());
        }
    }
    Ok(worst)
}

fn check_semigroup() -> Result<(bool, String)> {
    let seeds = [
        LevyTriple::gaussian(1.7),
        LevyTriple::new(0.4, 0.0, LevyMeasure::discrete(&[(2.5, 0.7), (-0.6, 1.3)])),
        LevyTriple::pure_jump(LevyMeasure::stable(&[(Direction::Pos, 0.7, 1.0), (Direction::Neg, 1.4, 0.5)])),
    ];
    let radii = RadiusGrid::geometric(0.05, 20.0, 15)?.radii;
    let radii = &radii[..40.min(radii.len())];
    let (mut exact, mut spectral) = (0.0f64, 0.0f64);
    for seed in &seeds {
        for (alpha, beta) in [(1.0, 1.0), (0.5, 1.5), (2.0, 1.0)] {
            let nested = j_alpha(&j_alpha(seed, beta)?, alpha)?;
            let direct = j_alpha(seed, alpha + beta)?;
            exact = exact.max(rel(nested.shift, direct.shift)).max(rel(nested.gauss_var, direct.gauss_var));
            spectral = spectral.max(spectral_gap(&nested, &direct, radii)?);
        }
    }
    Ok((exact <= 1e-12 && spectral <= 1e-7, format!("shift/variance {exact:.2e}, spectral {spectral:.2e}")))
}

fn recursion_seed() -> LevyTriple {
    LevyTriple::new(0.3, 1.2, LevyMeasure::discrete(&[(std::f64::consts::E, 1.0), (-3.5, 0.4), (0.6, 2.0), (1.8, 0.3)]))
}

fn check_recursion() -> Result<(bool, String)> {
    let seed = recursion_seed();
    let mut worst = 0.0f64;
    for m in 1..=3 {
        let stepped = j_alpha(&j_alpha(&seed, m as f64)?, 1.0)?;
        let closed = j_alpha(&seed, (m + 1) as f64)?;
        worst = worst.max(rel(stepped.shift, closed.shift)).max(rel(stepped.gauss_var, closed.gauss_var));
    }
    Ok((worst <= 1e-10, format!("max rel error {worst:.2e}")))
}

fn check_finite_sum_shift() -> Result<(bool, String)> {
    let seed = recursion_seed();
    let mut worst = 0.0f64;
    for m in 1..=4 {
        let a = j_alpha(&seed, m as f64)?.shift;
        worst = worst.max((a - j_integer_shift(&seed, m)?).abs() / a.abs());
    }
    Ok((worst <= 1e-12, format!("max rel error {worst:.2e}")))
}

fn exponent_gap(a: &LevyTriple, b: &LevyTriple, ys: &[f64]) -> Result<f64> {
    let (pa, pb) = (exponent(a)?, exponent(b)?);
    let mut worst = 0.0f64;
    for &y in ys {
        worst = worst.max((pa.eval(y)? - pb.eval(y)?).norm());
    }
    Ok(worst)
}

fn check_factorization() -> Result<(bool, String)> {
    let ys = linear_grid(-5.0, 5.0, 11);
    let mut worst = 0.0f64;
    for (_, seed) in standard_seeds() {
        let j = j_alpha(&seed, 1.0)?;
        for c in [0.25, 0.5, 0.9] {
            let left = j.conv_power(c)?.dilate(c)?.convolve(&partial_integral_triple(&seed, c)?);
            worst = worst.max(exponent_gap(&left, &j, &ys)?);
        }
    }
    Ok((worst <= 1e-8, format!("max |ΔΦ| {worst:.2e}")))
}

pub const INVERSION_POINTS: [f64; 8] = [-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0];

fn check_d_inversion() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (_, seed) in standard_seeds() {
        let psi = exponent(&seed)?;
        let phi = exponent_transform(&psi, 1.0)?;
        for y in INVERSION_POINTS {
            let d = d_operator(&phi, y, None)?.value;
            let want = psi.eval(y)?;
            worst = worst.max((d - want).norm() / want.norm().max(1.0));
        }
    }
    Ok((worst <= 1e-4, format!("max error {worst:.2e} at 8 points, 4 seeds")))
}

fn check_a_inversion() -> Result<(bool, String)> {
    let radii = RadiusGrid::geometric(0.05, 20.0, 7)?.radii;
    let radii = &radii[..20.min(radii.len())];
    let (mut worst, mut flagged, mut used) = (0.0f64, 0, 0);
    for (_, seed) in standard_seeds().into_iter().skip(1) {
        let l = j_alpha(&seed, 1.0)?.spectral_function();
        let ls = seed.spectral_function();
        for &r in radii {
            for d in Direction::BOTH {
                let a = a_operator(&l, d, r, None)?;
                if a.flagged {
                    flagged += 1;
                    continue;
                }
                let want = -ls.try_evaluate(d, r)?;
                worst = worst.max((a.value - want).abs() / want.abs().max(1e-3));
                used += 1;
            }
        }
    }
    Ok((worst <= 1e-4, format!("max rel error {worst:.2e} over {used} points ({flagged} flagged)")))
}

fn check_cross_engine() -> Result<(bool, String)> {
    let ys = linear_grid(-10.0, 10.0, 41);
    let mut worst = 0.0f64;
    for (_, seed) in standard_seeds().into_iter().take(3) {
        for m in [1u32, 2] {
            let direct = exponent(&j_alpha(&seed, m as f64)?)?;
            let quad = exponent_transform(&exponent(&seed)?, m as f64)?;
            let kern = kernel_cf(&seed, m)?;
            for &y in &ys {
                let (a, b, c) = (direct.eval(y)?, quad.eval(y)?, kern.eval(y)?);
                worst = worst.max((a - b).norm()).max((b - c).norm()).max((a - c).norm());
            }
        }
    }
    Ok((worst <= 1e-6, format!("max pairwise |ΔΦ| {worst:.2e} on |y| ≤ 10")))
}

fn check_monte_carlo(opts: &VerifyOptions) -> Result<(bool, String)> {
    let seeds = [LevyTriple::poisson(1.0), LevyTriple::new(-0.2, 0.5, LevyMeasure::discrete(&[(2.5, 0.7), (-0.6, 1.3)]))];
    let ys = linear_grid(-5.0, 5.0, 41);
    let mut worst = 1.0f64;
    let mut all = true;
    for (i, seed) in seeds.iter().enumerate() {
        for (k, alpha) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            let batch = sample_integral_exact(seed, alpha, opts.mc_samples, opts.seed + (3 * i + k) as u64)?;
            let emp = empirical_cf(&batch, &ys)?;
            let cmp = compare_cf(&emp, &exponent(&j_alpha(seed, alpha)?)?, 3.0, opts.mc_samples)?;
            worst = worst.min(cmp.fraction_within());
            all &= cmp.fraction_within() >= 0.9;
        }
    }
    Ok((all, format!("worst fraction within 3σ {:.3} ({} draws each)", worst, opts.mc_samples)))
}

fn check_bdlp() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for t in linear_grid(-10.0, 10.0, 401) {
        if t.abs() < 1e-3 {
            continue;
        }
        worst = worst.max((bdlp_cf(&ScalarCf::SINH, t)? - (1.0 - t / t.tanh()).exp()).abs());
        worst = worst.max((bdlp_cf(&ScalarCf::COSH, t)? - (-t * t.tanh()).exp()).abs());
    }
    Ok((worst <= 1e-10, format!("max error {worst:.2e} on |t| ≤ 10")))
}

fn check_d_log_psi_c() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for t in [0.25, 0.5, 1.0, 2.0, 3.0, 5.0] {
        worst = worst.max((d_log_psi(Psi::Cosh, t)? - d_log_psi_c_closed(t)).abs());
    }
    Ok((worst <= 1e-6, format!("max error {worst:.2e}")))
}

fn check_psi_s_verdict() -> Result<(bool, String)> {
    let table = psi_s_verdict(&VERDICT_POINTS, 1e-6)?;
    let text = match table.matches {
        Match::CandidateA => format!("matches {}", table.candidate_a),
        Match::CandidateB => format!("matches {}", table.candidate_b),
        Match::Both => "both candidates match".to_string(),
        Match::Neither => "neither candidate matches".to_string(),
    };
    Ok((matches!(table.matches, Match::CandidateA | Match::CandidateB), text))
}

/// Random discrete seed: 1–4 atoms in [−5, 5] \ {0}, masses in (0, 2].
pub fn random_discrete_seed<R: rand::Rng + ?Sized>(rng: &mut R) -> LevyTriple {
    let n = rng.random_range(1..=4);
    let atoms: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let mut x = 0.0;
            while x == 0.0 {
                x = rng.random_range(-5.0..=5.0);
            }
            (x, 2.0 - rng.random_range(0.0..2.0))
        })
        .collect();
    LevyTriple::pure_jump(LevyMeasure::discrete(&atoms))
}

fn check_corpus(opts: &VerifyOptions) -> Result<(bool, String)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let seeds: Vec<LevyTriple> = (0..opts.corpus).map(|_| random_discrete_seed(&mut rng)).collect();
    let mut misses = 0;
    for seed in &seeds {
        for m in 1..=3u32 {
            let image = j_alpha(seed, m as f64)?;
            let grid = RadiusGrid::for_measure(&image.measure, DEFAULT_PER_DECADE);
            if classify_order(&image, m + 1, &grid)?.order < m {
                misses += 1;
            }
        }
    }
    Ok((misses == 0, format!("{misses} false negatives over {} seeds × m ≤ 3", seeds.len())))
}

fn check_poisson_order() -> Result<(bool, String)> {
    let p = LevyTriple::poisson(1.0);
    let grid = RadiusGrid::for_measure(&p.measure, DEFAULT_PER_DECADE);
    let order = classify_order(&p, 6, &grid)?.order;
    Ok((order == 0, format!("order {order}")))
}

fn weights(m: &LevyMeasure) -> Vec<StableAtom> {
    match m {
        LevyMeasure::StableMixture { atoms } => atoms.clone(),
        _ => Vec::new(),
    }
}

fn check_stable_closure() -> Result<(bool, String)> {
    let sigma = LevyMeasure::stable(&[(Direction::Pos, 0.5, 1.0), (Direction::Neg, 1.5, 2.0), (Direction::Pos, 1.0, 0.25)]);
    let cs = classify_completely_s(&sigma)?.verdict == Verdict::Yes;
    let j = weights(&stable_mixture_j(&sigma, 1.0)?);
    let i = weights(&i_transform(&LevyTriple::pure_jump(sigma.clone()))?.measure);
    let base = weights(&sigma);
    let j_ok = j.len() == base.len() && j.iter().zip(&base).all(|(a, b)| (a.weight - b.weight / (b.z + 1.0)).abs() <= 1e-15 * b.weight);
    let i_ok = i.len() == base.len() && i.iter().zip(&base).all(|(a, b)| a.weight == b.weight / b.z);
    let lazy = LevyMeasure::JTransformed { alpha: 1.0, seed: Box::new(sigma) };
    let lazy_ok = classify_completely_s(&lazy)?.verdict == Verdict::Yes;
    Ok((cs && j_ok && i_ok && lazy_ok, format!("completely-s {cs}, J weights {j_ok}, I weights {i_ok}, lazy J {lazy_ok}")))
}

/// τ_α at a few points, for quick display.
pub fn tau_table(alpha: f64, points: &[f64]) -> Vec<(f64, f64)> {
    points.iter().map(|&t| (t, tau_cdf(alpha, t))).collect()
}

/// exp Φ on a grid.
pub fn characteristic_function(t: &LevyTriple, ys: &[f64]) -> Result<Vec<Complex64>> {
    let phi = exponent(t)?;
    ys.iter().map(|&y| Ok(phi.eval(y)?.exp())).collect()
}
