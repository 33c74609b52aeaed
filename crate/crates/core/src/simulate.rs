//! Monte Carlo draws of random integrals driven by finite-activity seeds.
//!
//! Draws are produced in fixed-size batches; batch b uses the ChaCha8 stream b
//! of the user seed, so the output does not depend on how batches are spread
//! over threads.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::exponent::LevyExponent;
use crate::measure::{Atom, LevyMeasure};
use crate::special::{g_moment, GammaTimeLaw};
use crate::transform::Tabulated;
use crate::triple::LevyTriple;

pub const BATCH_SIZE: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed_spec: LevyTriple,
    /// Time-change index; absent for tabulated Riemann–Stieltjes draws.
    pub alpha: Option<f64>,
    pub rng_seed: u64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCF {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub stderr: Vec<f64>,
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

/// Runs `draw` over all batches and concatenates in batch order.
fn run_batches<F>(n: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<f64> + Sync,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let size = |b: usize| BATCH_SIZE.min(n - b * BATCH_SIZE);
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map(|b| draw(&mut batch_rng(seed, b), size(b))).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<f64>> = (0..batches).map(|b| draw(&mut batch_rng(seed, b), size(b))).collect();
    parts.concat()
}

/// Compound-Poisson description of a finite-activity seed.
struct FiniteSeed {
    /// Drift with no compensation: a − Σ_{|x|≤1} mass·x.
    drift: f64,
    sd: f64,
    atoms: Vec<Atom>,
    total_mass: f64,
    jumps: Option<(Poisson<f64>, WeightedIndex<f64>)>,
}

impl FiniteSeed {
    fn new(t: &LevyTriple) -> Result<Self> {
        t.check_structure()?;
        let atoms = match &t.measure {
            LevyMeasure::Discrete { atoms } => atoms.clone(),
            m if m.is_zero() => Vec::new(),
            _ => {
                return Err(LevyError::UnsupportedSeed(
                    "exact sampling needs a discrete (finite-activity) seed measure".into(),
                ))
            }
        };
        let drift = t.shift - atoms.iter().filter(|a| a.x.abs() <= 1.0).map(|a| a.mass * a.x).sum::<f64>();
        let total_mass: f64 = atoms.iter().map(|a| a.mass).sum();
        let jumps = if atoms.is_empty() {
            None
        } else {
            let w = WeightedIndex::new(atoms.iter().map(|a| a.mass)).map_err(|e| LevyError::InvalidMeasure(e.to_string()))?;
            Some((Poisson::new(total_mass).map_err(|e| LevyError::InvalidMeasure(e.to_string()))?, w))
        };
        Ok(FiniteSeed { drift, sd: t.gauss_var.sqrt(), atoms, total_mass, jumps })
    }

    fn jump_count<R: Rng + ?Sized>(&self, rng: &mut R, intensity_scale: f64) -> u64 {
        match &self.jumps {
            None => 0,
            Some((p, _)) if intensity_scale == 1.0 => p.sample(rng) as u64,
            Some(_) => {
                let lambda = self.total_mass * intensity_scale;
                if lambda <= 0.0 {
                    0
                } else {
                    Poisson::new(lambda).map(|p| p.sample(rng) as u64).unwrap_or(0)
                }
            }
        }
    }

    fn jump_size<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (_, w) = self.jumps.as_ref().expect("jumps present");
        self.atoms[w.sample(rng)].x
    }
}

/// Exact draws of ∫_{(0,1)} t dY(τ_α(t)) where Y has the finite-activity seed
/// triple `t`: jump locations in t are i.i.d. copies of g_α.
pub fn sample_integral_exact(t: &LevyTriple, alpha: f64, n: usize, rng_seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(LevyError::InvalidParameter("sample count must be at least 1".into()));
    }
    let seed = FiniteSeed::new(t)?;
    let law = GammaTimeLaw::new(alpha)?;
    let center = seed.drift * g_moment(alpha, 1.0);
    let sd = seed.sd * g_moment(alpha, 2.0).sqrt();
    let values = run_batches(n, rng_seed, |rng, size| {
        (0..size)
            .map(|_| {
                let mut v = center;
                if sd > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    v += sd * z;
                }
                for _ in 0..seed.jump_count(rng, 1.0) {
                    let g = law.sample(rng);
                    v += g * seed.jump_size(rng);
                }
                v
            })
            .collect()
    });
    Ok(SampleBatch { values, seed_spec: t.clone(), alpha: Some(alpha), rng_seed, n })
}

/// Draws of h(b)Y(r(b)) − h(a)Y(r(a)) − ∫ Y(r(t)) dh(t) on `n_steps` equal
/// cells of the domain of h, with Y simulated at the times r(t_k) and the
/// Stieltjes integral taken by the trapezoidal rule.
pub fn sample_integral_rs(
    t: &LevyTriple,
    h: &Tabulated,
    r: &Tabulated,
    n_steps: usize,
    n: usize,
    rng_seed: u64,
) -> Result<SampleBatch> {
    if n_steps < 10 {
        return Err(LevyError::InvalidParameter(format!("need at least 10 steps, got {n_steps}")));
    }
    if n == 0 {
        return Err(LevyError::InvalidParameter("sample count must be at least 1".into()));
    }
    let seed = FiniteSeed::new(t)?;
    let (a, b) = (h.knots[0], h.knots[h.knots.len() - 1]);
    let times: Vec<f64> = (0..=n_steps).map(|k| a + (b - a) * k as f64 / n_steps as f64).collect();
    let rt: Vec<f64> = times.iter().map(|&x| r.eval(x)).collect();
    if rt[0] < 0.0 || rt.windows(2).any(|w| w[1] < w[0]) {
        return Err(LevyError::InvalidParameter("time change must be nonnegative and nondecreasing".into()));
    }
    let ht: Vec<f64> = times.iter().map(|&x| h.eval(x)).collect();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let horizon = rt[n_steps];

    let values = run_batches(n, rng_seed, |rng, size| {
        let mut path = vec![0.0; n_steps + 1];
        let mut jump_times: Vec<(f64, f64)> = Vec::new();
        (0..size)
            .map(|_| {
                // Y at r(t_0), then increments
                path[0] = seed.drift * rt[0];
                if seed.sd > 0.0 {
                    path[0] += seed.sd * rt[0].sqrt() * normal.sample(rng);
                }
                for k in 1..=n_steps {
                    let dr = rt[k] - rt[k - 1];
                    let mut inc = seed.drift * dr;
                    if seed.sd > 0.0 && dr > 0.0 {
                        inc += seed.sd * dr.sqrt() * normal.sample(rng);
                    }
                    path[k] = path[k - 1] + inc;
                }
                jump_times.clear();
                for _ in 0..seed.jump_count(rng, horizon) {
                    let u: f64 = rng.random::<f64>() * horizon;
                    jump_times.push((u, seed.jump_size(rng)));
                }
                for &(u, x) in &jump_times {
                    let first = rt.partition_point(|v| *v < u);
                    for p in path.iter_mut().skip(first) {
                        *p += x;
                    }
                }
                let mut stieltjes = 0.0;
                for k in 1..=n_steps {
                    stieltjes += 0.5 * (path[k] + path[k - 1]) * (ht[k] - ht[k - 1]);
                }
                ht[n_steps] * path[n_steps] - ht[0] * path[0] - stieltjes
            })
            .collect()
    });
    Ok(SampleBatch { values, seed_spec: t.clone(), alpha: None, rng_seed, n })
}

/// Mean of e^{iyX} over the batch with its standard error √((1 − |φ|²)/n).
pub fn empirical_cf(batch: &SampleBatch, grid: &[f64]) -> Result<EmpiricalCF> {
    let xs = &batch.values;
    if xs.is_empty() {
        return Err(LevyError::InvalidParameter("empty sample batch".into()));
    }
    let n = xs.len() as f64;
    let mean_at = |y: f64| -> Complex64 {
        if y == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let ay = y.abs();
        let chunk_sum = |c: &[f64]| c.iter().fold(Complex64::new(0.0, 0.0), |acc, x| acc + Complex64::from_polar(1.0, ay * x));
        #[cfg(feature = "parallel")]
        let partial: Vec<Complex64> = {
            use rayon::prelude::*;
            xs.par_chunks(BATCH_SIZE).map(chunk_sum).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let partial: Vec<Complex64> = xs.chunks(BATCH_SIZE).map(chunk_sum).collect();
        let m = partial.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b) / n;
        if y < 0.0 {
            m.conj()
        } else {
            m
        }
    };
    let values: Vec<Complex64> = grid.iter().map(|&y| mean_at(y)).collect();
    let stderr = values.iter().map(|v| ((1.0 - v.norm_sqr()).max(0.0) / n).sqrt()).collect();
    Ok(EmpiricalCF { grid: grid.to_vec(), values, stderr })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfComparison {
    pub points: usize,
    pub within: usize,
    /// Largest |φ̂ − φ| in units of the standard error (floored at 1/n).
    pub worst_z: f64,
}

impl CfComparison {
    pub fn fraction_within(&self) -> f64 {
        self.within as f64 / self.points as f64
    }
}

/// Counts grid points where the empirical CF lies within `k` standard errors
/// of exp Φ.
pub fn compare_cf(emp: &EmpiricalCF, phi: &LevyExponent, k: f64, n: usize) -> Result<CfComparison> {
    let mut within = 0;
    let mut worst = 0.0f64;
    for ((&y, v), &se) in emp.grid.iter().zip(&emp.values).zip(&emp.stderr) {
        let exact = phi.eval(y)?.exp();
        let z = (v - exact).norm() / se.max(1.0 / n as f64);
        worst = worst.max(z);
        if z <= k {
            within += 1;
        }
    }
    Ok(CfComparison { points: emp.grid.len(), within, worst_z: worst })
}

/// Uniform grid of `points` values on [lo, hi].
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}
