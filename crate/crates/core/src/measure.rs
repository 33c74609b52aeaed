//! Lévy measures on the real line.
//!
//! Finite atom lists and stable mixtures are stored explicitly. Everything the
//! random-integral transforms produce is a *scale mixture* of a seed measure,
//! M'(A) = ∫ seed(s⁻¹A) K(ds), kept lazily and evaluated by quadrature over the
//! scale kernel K. The kernels are the gamma time change (𝒥^α), the uniform law
//! on [c, 1) (partial integrals), ds/s on (0, 1] (the ℐ mapping) and the image
//! of dr under a tabulated integrand h (general transforms).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LevyError, Result};
use crate::quad::{Quad, Scalar};
use crate::special::{gamma, integrate_tau, tau_cdf};

/// Direction on the unit sphere of ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Pos,
    Neg,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Pos, Direction::Neg];

    pub fn sign(self) -> f64 {
        match self {
            Direction::Pos => 1.0,
            Direction::Neg => -1.0,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Direction::Neg
        } else {
            Direction::Pos
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Pos => Direction::Neg,
            Direction::Neg => Direction::Pos,
        }
    }

    /// Direction of s·x for x in direction `self`.
    fn scaled(self, s: f64) -> Self {
        if s < 0.0 {
            self.flip()
        } else {
            self
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if v == 1.0 {
            Ok(Direction::Pos)
        } else if v == -1.0 {
            Ok(Direction::Neg)
        } else {
            Err(serde::de::Error::custom(format!("direction must be +1 or -1, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// One stable component: weight · w^{−(z+1)} dw along `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableAtom {
    pub direction: Direction,
    pub z: f64,
    pub weight: f64,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyMeasure {
    Discrete { atoms: Vec<Atom> },
    StableMixture { atoms: Vec<StableAtom> },
    JTransformed { alpha: f64, seed: Box<LevyMeasure> },
    ITransformed { seed: Box<LevyMeasure> },
    PartialIntegral { c: f64, seed: Box<LevyMeasure> },
    /// Image of dr(t) under t ↦ h(t); h and r are linear between knots.
    Tabulated { knots: Vec<f64>, h: Vec<f64>, r: Vec<f64>, seed: Box<LevyMeasure> },
    Sum { terms: Vec<LevyMeasure> },
}

impl Default for LevyMeasure {
    fn default() -> Self {
        LevyMeasure::zero()
    }
}

/// Scale kernel of a lazily transformed measure.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel<'a> {
    /// dτ_α on (0, 1).
    Gamma(f64),
    /// Lebesgue on [c, 1).
    Uniform(f64),
    /// ds/s on (0, 1], i.e. Lebesgue in −ln s on (0, ∞).
    LogUniform,
    Tabulated { knots: &'a [f64], h: &'a [f64], r: &'a [f64] },
}

impl Kernel<'_> {
    /// ∫ f(s) K(ds); `breaks` are kink locations of f in s.
    pub(crate) fn integrate<T: Scalar>(&self, q: &Quad, f: impl Fn(f64) -> T, breaks: &[f64]) -> T {
        // s = 0 carries no mass; the Gamma and LogUniform maps reach it in floating point
        let f = |s: f64| if s == 0.0 { T::default() } else { f(s) };
        match *self {
            Kernel::Gamma(alpha) => integrate_tau(q, alpha, f, breaks),
            Kernel::Uniform(c) => q.integrate_with_breaks(f, c, 1.0, breaks),
            Kernel::LogUniform => {
                let sb: Vec<f64> = breaks.iter().filter(|s| **s > 0.0 && **s < 1.0).map(|s| -s.ln()).collect();
                q.integrate_to_inf(|u: f64| f((-u).exp()), 0.0, &sb)
            }
            Kernel::Tabulated { knots, h, r } => {
                let mut total = T::default();
                for k in 0..knots.len().saturating_sub(1) {
                    let (t0, t1) = (knots[k], knots[k + 1]);
                    let dr = r[k + 1] - r[k];
                    if dr == 0.0 || t1 <= t0 {
                        continue;
                    }
                    let (h0, h1) = (h[k], h[k + 1]);
                    let at = |t: f64| h0 + (h1 - h0) * (t - t0) / (t1 - t0);
                    let mut tb = Vec::new();
                    if h1 != h0 {
                        for b in breaks.iter().flat_map(|b| [*b, -*b]).chain([0.0]) {
                            let u = (b - h0) / (h1 - h0);
                            if u > 0.0 && u < 1.0 {
                                tb.push(t0 + u * (t1 - t0));
                            }
                        }
                    }
                    let piece: T = q.integrate_with_breaks(
                        |t: f64| {
                            let s = at(t);
                            if s == 0.0 {
                                T::default()
                            } else {
                                f(s)
                            }
                        },
                        t0,
                        t1,
                        &tb,
                    );
                    total = total + piece * (dr / (t1 - t0));
                }
                total
            }
        }
    }

    /// K({s : sign·s > lower}) for lower > 0.
    fn mass_beyond(&self, lower: f64, sign: f64) -> f64 {
        match *self {
            Kernel::Tabulated { knots, h, r } => {
                let mut total = 0.0;
                for k in 0..knots.len().saturating_sub(1) {
                    let dr = r[k + 1] - r[k];
                    let (a, b) = (sign * h[k], sign * h[k + 1]);
                    let frac = match (a > lower, b > lower) {
                        (true, true) => 1.0,
                        (false, false) => 0.0,
                        (true, false) => (lower - a) / (b - a),
                        (false, true) => 1.0 - (lower - a) / (b - a),
                    };
                    total += frac * dr;
                }
                total
            }
            _ if sign < 0.0 || lower >= 1.0 => 0.0,
            Kernel::Gamma(alpha) => 1.0 - tau_cdf(alpha, lower),
            Kernel::Uniform(c) => 1.0 - lower.max(c),
            Kernel::LogUniform => -lower.ln(),
        }
    }

    fn scale_points(&self) -> Vec<f64> {
        match *self {
            Kernel::Gamma(_) | Kernel::LogUniform => vec![1.0],
            Kernel::Uniform(c) => vec![c, 1.0],
            Kernel::Tabulated { h, .. } => h.iter().map(|s| s.abs()).filter(|s| *s > 0.0).collect(),
        }
    }
}

fn scaled_breaks(numerators: &[f64], radii: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(numerators.len() * radii.len());
    for n in numerators {
        for r in radii {
            if *r > 0.0 && n.is_finite() && *n > 0.0 {
                out.push(n / r);
            }
        }
    }
    out
}

/// ∫_0^∞ (e^{iyu} − 1 − iyu·1{u ≤ 1}) u^{−z−1} du.
pub fn stable_exponent(z: f64, y: f64) -> Complex64 {
    if y == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let ay = y.abs();
    if (z - 1.0).abs() < 1e-7 {
        const EULER: f64 = 0.577_215_664_901_532_9;
        return Complex64::new(-0.5 * PI * ay, -y * ay.ln() + y * (1.0 - EULER));
    }
    let phase = -0.5 * PI * z * y.signum();
    let power = Complex64::from_polar(ay.powf(z), phase);
    power * gamma(-z) - Complex64::new(0.0, y / (1.0 - z))
}

/// ∫_a^b u^{−z} du.
fn stable_power_integral(z: f64, a: f64, b: f64) -> f64 {
    if (z - 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(1.0 - z) - a.powf(1.0 - z)) / (1.0 - z)
    }
}

/// ∫_{lo<u≤hi} g(u) u^{−z−1} du for a single stable radial density. When lo = 0
/// g(u)/u² must stay bounded near 0.
fn stable_radial_moment(q: &Quad, z: f64, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut total = 0.0;
    let (mut a, b) = (lo, hi);
    if a == 0.0 {
        let top = b.min(1.0);
        let p = 1.0 / (2.0 - z);
        let head: f64 = q.integrate(
            |v: f64| {
                let u = top * v.powf(p);
                if u == 0.0 {
                    0.0
                } else {
                    g(u) / (u * u)
                }
            },
            &[0.0, 1.0],
        );
        total += p * top.powf(2.0 - z) * head;
        a = top;
    }
    if !(b > a) {
        return total;
    }
    if b.is_infinite() {
        let start = if a < 1.0 {
            total += q.integrate(|u: f64| g(u) * u.powf(-z - 1.0), &[a, 1.0]);
            1.0
        } else {
            a
        };
        let tail: f64 = q.integrate(|v: f64| if v == 0.0 { 0.0 } else { g(start * v.powf(-1.0 / z)) }, &[0.0, 1.0]);
        total += start.powf(-z) / z * tail;
    } else {
        total += q.integrate(|u: f64| g(u) * u.powf(-z - 1.0), &[a, b]);
    }
    total
}

impl LevyMeasure {
    pub fn zero() -> Self {
        LevyMeasure::Discrete { atoms: Vec::new() }
    }

    pub fn discrete(atoms: &[(f64, f64)]) -> Self {
        LevyMeasure::Discrete { atoms: atoms.iter().map(|&(x, mass)| Atom { x, mass }).collect() }
    }

    pub fn stable(atoms: &[(Direction, f64, f64)]) -> Self {
        LevyMeasure::StableMixture {
            atoms: atoms.iter().map(|&(direction, z, weight)| StableAtom { direction, z, weight }).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LevyMeasure::Discrete { atoms } => atoms.is_empty(),
            LevyMeasure::StableMixture { atoms } => atoms.is_empty(),
            LevyMeasure::Sum { terms } => terms.iter().all(|t| t.is_zero()),
            LevyMeasure::Tabulated { knots, r, seed, .. } => knots.len() < 2 || r.first() == r.last() || seed.is_zero(),
            LevyMeasure::JTransformed { seed, .. }
            | LevyMeasure::ITransformed { seed }
            | LevyMeasure::PartialIntegral { seed, .. } => seed.is_zero(),
        }
    }

    pub(crate) fn kernel(&self) -> Option<(&LevyMeasure, Kernel<'_>)> {
        match self {
            LevyMeasure::JTransformed { alpha, seed } => Some((seed, Kernel::Gamma(*alpha))),
            LevyMeasure::ITransformed { seed } => Some((seed, Kernel::LogUniform)),
            LevyMeasure::PartialIntegral { c, seed } => Some((seed, Kernel::Uniform(*c))),
            LevyMeasure::Tabulated { knots, h, r, seed } => Some((seed, Kernel::Tabulated { knots, h, r })),
            _ => None,
        }
    }

    /// Structural parameter checks (no integrals).
    pub fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(LevyError::InvalidMeasure(msg));
        match self {
            LevyMeasure::Discrete { atoms } => {
                for a in atoms {
                    if !(a.x.is_finite() && a.x != 0.0) {
                        return bad(format!("atom position must be finite and nonzero, got {}", a.x));
                    }
                    if !(a.mass.is_finite() && a.mass > 0.0) {
                        return bad(format!("atom mass must be positive, got {}", a.mass));
                    }
                }
                Ok(())
            }
            LevyMeasure::StableMixture { atoms } => {
                for a in atoms {
                    if !(a.z > 0.0 && a.z < 2.0) {
                        return bad(format!("stable index must lie in (0, 2), got {}", a.z));
                    }
                    if !(a.weight.is_finite() && a.weight > 0.0) {
                        return bad(format!("stable weight must be positive, got {}", a.weight));
                    }
                }
                Ok(())
            }
            LevyMeasure::JTransformed { alpha, seed } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad(format!("alpha must be positive, got {alpha}"));
                }
                seed.check_structure()
            }
            LevyMeasure::ITransformed { seed } => seed.check_structure(),
            LevyMeasure::PartialIntegral { c, seed } => {
                if !(*c > 0.0 && *c < 1.0) {
                    return bad(format!("partial-integral cut must lie in (0, 1), got {c}"));
                }
                seed.check_structure()
            }
            LevyMeasure::Tabulated { knots, h, r, seed } => {
                check_tabulation(knots, h, r).map_err(|e| LevyError::InvalidMeasure(e.to_string()))?;
                seed.check_structure()
            }
            LevyMeasure::Sum { terms } => terms.iter().try_for_each(|t| t.check_structure()),
        }
    }

    /// M({|x| > r, sign x = D}); the spectral function is its negative.
    pub fn tail(&self, dir: Direction, r: f64, q: &Quad) -> f64 {
        match self {
            LevyMeasure::Discrete { atoms } => {
                atoms.iter().filter(|a| Direction::of(a.x) == dir && a.x.abs() > r).map(|a| a.mass).sum()
            }
            LevyMeasure::StableMixture { atoms } => {
                atoms.iter().filter(|a| a.direction == dir).map(|a| a.weight * r.powf(-a.z) / a.z).sum()
            }
            LevyMeasure::Sum { terms } => terms.iter().map(|t| t.tail(dir, r, q)).sum(),
            _ => {
                let (seed, kernel) = self.kernel().expect("scale mixture");
                if let LevyMeasure::Discrete { atoms } = seed {
                    return atoms
                        .iter()
                        .map(|a| {
                            let sign = if Direction::of(a.x) == dir { 1.0 } else { -1.0 };
                            a.mass * kernel.mass_beyond(r / a.x.abs(), sign)
                        })
                        .sum();
                }
                let breaks = scaled_breaks(&[r], &seed.kink_radii());
                kernel.integrate(q, |s: f64| seed.tail(dir.scaled(s), r / s.abs(), q), &breaks)
            }
        }
    }

    /// ∫_{lo<|x|≤hi} g(x) M(dx).
    pub fn moment(&self, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, q: &Quad) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        match self {
            LevyMeasure::Discrete { atoms } => {
                atoms.iter().filter(|a| a.x.abs() > lo && a.x.abs() <= hi).map(|a| a.mass * g(a.x)).sum()
            }
            LevyMeasure::StableMixture { atoms } => atoms
                .iter()
                .map(|a| {
                    let sgn = a.direction.sign();
                    a.weight * stable_radial_moment(q, a.z, &|u| g(sgn * u), lo, hi)
                })
                .sum(),
            LevyMeasure::Sum { terms } => terms.iter().map(|t| t.moment(g, lo, hi, q)).sum(),
            _ => {
                let (seed, kernel) = self.kernel().expect("scale mixture");
                let breaks = scaled_breaks(&[lo, hi], &seed.kink_radii());
                kernel.integrate(
                    q,
                    |s: f64| {
                        let scaled = |x: f64| g(s * x);
                        seed.moment(&scaled, lo / s.abs(), hi / s.abs(), q)
                    },
                    &breaks,
                )
            }
        }
    }

    /// ∫_{lo<|x|≤hi} x M(dx).
    pub fn first_moment(&self, lo: f64, hi: f64, q: &Quad) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        match self {
            LevyMeasure::Discrete { atoms } => {
                atoms.iter().filter(|a| a.x.abs() > lo && a.x.abs() <= hi).map(|a| a.mass * a.x).sum()
            }
            LevyMeasure::StableMixture { atoms } => atoms
                .iter()
                .map(|a| a.direction.sign() * a.weight * stable_power_integral(a.z, lo, hi))
                .sum(),
            LevyMeasure::Sum { terms } => terms.iter().map(|t| t.first_moment(lo, hi, q)).sum(),
            _ => {
                let (seed, kernel) = self.kernel().expect("scale mixture");
                let breaks = scaled_breaks(&[lo, hi], &seed.kink_radii());
                kernel.integrate(q, |s: f64| s * seed.first_moment(lo / s.abs(), hi / s.abs(), q), &breaks)
            }
        }
    }

    /// ∫ x (1{|x| ≤ c} − 1{|x| ≤ 1}) M(dx): the drift change when the
    /// truncation radius moves from 1 to c.
    pub fn truncation_shift(&self, c: f64, q: &Quad) -> f64 {
        if c >= 1.0 {
            self.first_moment(1.0, c, q)
        } else {
            -self.first_moment(c, 1.0, q)
        }
    }

    /// ∫ (e^{iyx} − 1 − iyx·1{|x| ≤ 1}) M(dx).
    pub fn jump_exponent(&self, y: f64, q: &Quad) -> Complex64 {
        if y == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self {
            LevyMeasure::Discrete { atoms } => atoms
                .iter()
                .map(|a| {
                    let comp = if a.x.abs() <= 1.0 { y * a.x } else { 0.0 };
                    (Complex64::new(0.0, y * a.x).exp() - 1.0 - Complex64::new(0.0, comp)) * a.mass
                })
                .sum(),
            LevyMeasure::StableMixture { atoms } => {
                atoms.iter().map(|a| stable_exponent(a.z, a.direction.sign() * y) * a.weight).sum()
            }
            LevyMeasure::Sum { terms } => terms.iter().map(|t| t.jump_exponent(y, q)).sum(),
            _ => {
                let (seed, kernel) = self.kernel().expect("scale mixture");
                let breaks = scaled_breaks(&[1.0], &seed.kink_radii());
                kernel.integrate(
                    q,
                    |s: f64| {
                        seed.jump_exponent(s * y, q) - Complex64::new(0.0, s * y * seed.truncation_shift(1.0 / s.abs(), q))
                    },
                    &breaks,
                )
            }
        }
    }

    /// Radii at which the tail function may fail to be smooth.
    pub fn kink_radii(&self) -> Vec<f64> {
        let mut out = match self {
            LevyMeasure::Discrete { atoms } => atoms.iter().map(|a| a.x.abs()).collect(),
            LevyMeasure::StableMixture { .. } => Vec::new(),
            LevyMeasure::Sum { terms } => terms.iter().flat_map(|t| t.kink_radii()).collect(),
            _ => {
                let (seed, kernel) = self.kernel().expect("scale mixture");
                let inner = seed.kink_radii();
                let mut v = Vec::new();
                for s in kernel.scale_points() {
                    v.extend(inner.iter().map(|r| r * s));
                }
                v
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Characteristic radii used to place evaluation grids.
    pub fn scale_radii(&self) -> Vec<f64> {
        let mut out = match self {
            LevyMeasure::Discrete { atoms } => atoms.iter().map(|a| a.x.abs()).collect(),
            LevyMeasure::StableMixture { atoms } if !atoms.is_empty() => vec![1.0],
            LevyMeasure::StableMixture { .. } => Vec::new(),
            LevyMeasure::Sum { terms } => terms.iter().flat_map(|t| t.scale_radii()).collect(),
            _ => {
                let (seed, kernel) = self.kernel().expect("scale mixture");
                let inner = seed.scale_radii();
                let mut v = Vec::new();
                for s in kernel.scale_points() {
                    v.extend(inner.iter().map(|r| r * s));
                }
                v
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// True when every functional is evaluated without quadrature.
    pub fn is_closed_form(&self) -> bool {
        match self {
            LevyMeasure::Discrete { .. } | LevyMeasure::StableMixture { .. } => true,
            LevyMeasure::Sum { terms } => terms.iter().all(|t| t.is_closed_form()),
            _ => false,
        }
    }

    /// True when the tail function is evaluated without quadrature.
    pub fn has_closed_form_tail(&self) -> bool {
        match self {
            LevyMeasure::Discrete { .. } | LevyMeasure::StableMixture { .. } => true,
            LevyMeasure::Sum { terms } => terms.iter().all(|t| t.has_closed_form_tail()),
            _ => {
                let (seed, _) = self.kernel().expect("scale mixture");
                matches!(seed, LevyMeasure::Discrete { .. })
            }
        }
    }

    /// Image under x ↦ d·x.
    pub fn dilate(&self, d: f64) -> LevyMeasure {
        match self {
            LevyMeasure::Discrete { atoms } => {
                LevyMeasure::Discrete { atoms: atoms.iter().map(|a| Atom { x: d * a.x, mass: a.mass }).collect() }
            }
            LevyMeasure::StableMixture { atoms } => LevyMeasure::StableMixture {
                atoms: atoms
                    .iter()
                    .map(|a| StableAtom { direction: a.direction.scaled(d), z: a.z, weight: a.weight * d.abs().powf(a.z) })
                    .collect(),
            },
            LevyMeasure::JTransformed { alpha, seed } => {
                LevyMeasure::JTransformed { alpha: *alpha, seed: Box::new(seed.dilate(d)) }
            }
            LevyMeasure::ITransformed { seed } => LevyMeasure::ITransformed { seed: Box::new(seed.dilate(d)) },
            LevyMeasure::PartialIntegral { c, seed } => {
                LevyMeasure::PartialIntegral { c: *c, seed: Box::new(seed.dilate(d)) }
            }
            LevyMeasure::Tabulated { knots, h, r, seed } => LevyMeasure::Tabulated {
                knots: knots.clone(),
                h: h.clone(),
                r: r.clone(),
                seed: Box::new(seed.dilate(d)),
            },
            LevyMeasure::Sum { terms } => LevyMeasure::Sum { terms: terms.iter().map(|t| t.dilate(d)).collect() },
        }
    }

    /// s·M.
    pub fn scale_mass(&self, s: f64) -> LevyMeasure {
        match self {
            LevyMeasure::Discrete { atoms } => {
                LevyMeasure::Discrete { atoms: atoms.iter().map(|a| Atom { x: a.x, mass: a.mass * s }).collect() }
            }
            LevyMeasure::StableMixture { atoms } => LevyMeasure::StableMixture {
                atoms: atoms.iter().map(|a| StableAtom { weight: a.weight * s, ..*a }).collect(),
            },
            LevyMeasure::JTransformed { alpha, seed } => {
                LevyMeasure::JTransformed { alpha: *alpha, seed: Box::new(seed.scale_mass(s)) }
            }
            LevyMeasure::ITransformed { seed } => LevyMeasure::ITransformed { seed: Box::new(seed.scale_mass(s)) },
            LevyMeasure::PartialIntegral { c, seed } => {
                LevyMeasure::PartialIntegral { c: *c, seed: Box::new(seed.scale_mass(s)) }
            }
            LevyMeasure::Tabulated { knots, h, r, seed } => LevyMeasure::Tabulated {
                knots: knots.clone(),
                h: h.clone(),
                r: r.clone(),
                seed: Box::new(seed.scale_mass(s)),
            },
            LevyMeasure::Sum { terms } => LevyMeasure::Sum { terms: terms.iter().map(|t| t.scale_mass(s)).collect() },
        }
    }

    /// M1 + M2. Like variants are merged; anything else becomes a formal sum.
    pub fn add(&self, other: &LevyMeasure) -> LevyMeasure {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        match (self, other) {
            (LevyMeasure::Discrete { atoms: a }, LevyMeasure::Discrete { atoms: b }) => {
                LevyMeasure::Discrete { atoms: a.iter().chain(b).copied().collect() }
            }
            (LevyMeasure::StableMixture { atoms: a }, LevyMeasure::StableMixture { atoms: b }) => {
                LevyMeasure::StableMixture { atoms: a.iter().chain(b).copied().collect() }
            }
            (LevyMeasure::Sum { terms: a }, LevyMeasure::Sum { terms: b }) => {
                LevyMeasure::Sum { terms: a.iter().chain(b).cloned().collect() }
            }
            (LevyMeasure::Sum { terms }, m) => {
                let mut t = terms.clone();
                t.push(m.clone());
                LevyMeasure::Sum { terms: t }
            }
            (m, LevyMeasure::Sum { terms }) => {
                let mut t = vec![m.clone()];
                t.extend(terms.iter().cloned());
                LevyMeasure::Sum { terms: t }
            }
            (a, b) => LevyMeasure::Sum { terms: vec![a.clone(), b.clone()] },
        }
    }

    /// Rewrites transforms of stable mixtures as stable mixtures and merges
    /// sums of them. The measure is unchanged; only its representation is.
    pub fn simplified(&self) -> LevyMeasure {
        let stable_with = |seed: &LevyMeasure, factor: &dyn Fn(f64) -> f64| match seed.simplified() {
            LevyMeasure::StableMixture { atoms } => Some(LevyMeasure::StableMixture {
                atoms: atoms.iter().map(|a| StableAtom { weight: a.weight * factor(a.z), ..*a }).collect(),
            }),
            m if m.is_zero() => Some(LevyMeasure::zero()),
            _ => None,
        };
        let lazy = match self {
            LevyMeasure::JTransformed { alpha, seed } => stable_with(seed, &|z| (z + 1.0).powf(-alpha)),
            LevyMeasure::ITransformed { seed } => stable_with(seed, &|z| 1.0 / z),
            LevyMeasure::PartialIntegral { c, seed } => stable_with(seed, &|z| (1.0 - c.powf(z + 1.0)) / (z + 1.0)),
            LevyMeasure::Sum { terms } => {
                let parts: Vec<LevyMeasure> = terms.iter().map(|t| t.simplified()).filter(|t| !t.is_zero()).collect();
                Some(parts.iter().fold(LevyMeasure::zero(), |acc, t| acc.add(t)))
            }
            _ => None,
        };
        lazy.unwrap_or_else(|| self.clone())
    }

    /// Integrability diagnostics for a Lévy measure.
    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_structure()?;
        let q = Quad::default();
        let small = self.moment(&|x| x * x, 0.0, 1.0, &q);
        let large = self.tail(Direction::Pos, 1.0, &q) + self.tail(Direction::Neg, 1.0, &q);
        let log_moment = match self {
            LevyMeasure::ITransformed { seed } => {
                let lm = seed.log_moment(&q);
                if !lm.is_finite() || lm > LOG_MOMENT_CEILING {
                    return Err(LevyError::NonFinite(format!("seed logarithmic moment {lm:.3e}")));
                }
                Some(lm)
            }
            _ => None,
        };
        let integrability = small + large;
        if !integrability.is_finite() || integrability > LOG_MOMENT_CEILING {
            return Err(LevyError::NonFinite(format!("∫ min(1, x²) dM ≈ {integrability:.3e}")));
        }
        q.check(())?;
        Ok(ValidationReport {
            small_jump_second_moment: small,
            large_jump_mass: large,
            integrability,
            log_moment,
            passed: true,
        })
    }

    /// ∫_{|x|>1} ln|x| M(dx).
    pub fn log_moment(&self, q: &Quad) -> f64 {
        self.moment(&|x: f64| x.abs().ln(), 1.0, f64::INFINITY, q)
    }
}

/// Knots strictly increasing, matching lengths, finite values, r nondecreasing.
pub fn check_tabulation(knots: &[f64], h: &[f64], r: &[f64]) -> Result<()> {
    let bad = |m: &str| Err(LevyError::InvalidParameter(m.to_string()));
    if knots.len() < 2 || h.len() != knots.len() || r.len() != knots.len() {
        return bad("tabulation needs at least two knots and equally long h and r columns");
    }
    if knots.iter().chain(h).chain(r).any(|v| !v.is_finite()) {
        return bad("tabulated values must be finite");
    }
    if knots.windows(2).any(|w| w[1] <= w[0]) {
        return bad("knots must be strictly increasing");
    }
    if r.windows(2).any(|w| w[1] < w[0]) {
        return bad("time change r must be nondecreasing");
    }
    Ok(())
}

/// Numerical stand-in for "infinite" in integrability checks.
pub const LOG_MOMENT_CEILING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// ∫_{|x|≤1} x² M(dx)
    pub small_jump_second_moment: f64,
    /// M(|x| > 1)
    pub large_jump_mass: f64,
    /// ∫ min(1, x²) M(dx)
    pub integrability: f64,
    pub log_moment: Option<f64>,
    pub passed: bool,
}

/// Free-function form of [`LevyMeasure::validate`].
pub fn validate_measure(m: &LevyMeasure) -> Result<ValidationReport> {
    m.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> Quad {
        Quad::new(1e-12, 1e-12)
    }

    /// ∫_1^∞ e^{iyu} u^{−z−1} du, rotated onto u = 1 + i s/y where it decays
    /// like e^{−s}.
    fn oscillatory_tail_oracle(z: f64, y: f64) -> Complex64 {
        let q = tight();
        let i = Complex64::new(0.0, 1.0);
        let body: Complex64 = q.integrate_to_inf(
            |s: f64| (Complex64::new(1.0, s / y)).powf(-z - 1.0) * (-s).exp(),
            0.0,
            &[],
        );
        i / y * (i * y).exp() * body
    }

    fn stable_oracle(z: f64, y: f64) -> Complex64 {
        let q = tight();
        // u = v² removes the integrable singularity at the origin
        let head: Complex64 = q.integrate(
            |v: f64| {
                let u = v * v;
                let th = y * u;
                let sin_defect = if th.abs() < 1e-2 {
                    -th.powi(3) / 6.0 + th.powi(5) / 120.0 - th.powi(7) / 5040.0
                } else {
                    th.sin() - th
                };
                let cos_defect = -2.0 * (0.5 * th).sin().powi(2);
                Complex64::new(cos_defect, sin_defect) * (2.0 * v * u.powf(-z - 1.0))
            },
            &[0.0, 0.5, 1.0],
        );
        head + oscillatory_tail_oracle(z, y) - 1.0 / z
    }

    #[test]
    fn stable_exponent_matches_contour_oracle() {
        for z in [0.3, 0.5, 1.0, 1.5, 1.8] {
            for y in [0.2, 1.0, 3.0, 10.0] {
                let closed = stable_exponent(z, y);
                let oracle = stable_oracle(z, y);
                assert!((closed - oracle).norm() < 1e-8, "z={z} y={y}: {closed} vs {oracle}");
                assert!((stable_exponent(z, -y) - closed.conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn validation_examples() {
        let r = LevyMeasure::discrete(&[(1.0, 2.0)]).validate().unwrap();
        assert_eq!(r.integrability, 2.0);
        let r = LevyMeasure::stable(&[(Direction::Pos, 1.0, 1.0)]).validate().unwrap();
        assert!((r.small_jump_second_moment - 1.0).abs() < 1e-9);
        assert!((r.large_jump_mass - 1.0).abs() < 1e-12);
        let r = LevyMeasure::ITransformed { seed: Box::new(LevyMeasure::discrete(&[(1.0, 1.0)])) }.validate().unwrap();
        assert_eq!(r.log_moment, Some(0.0));
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(LevyMeasure::discrete(&[(0.0, 1.0)]).validate().is_err());
        assert!(LevyMeasure::discrete(&[(1.0, -1.0)]).validate().is_err());
        assert!(LevyMeasure::stable(&[(Direction::Pos, 2.0, 1.0)]).validate().is_err());
        let nearly_flat = LevyMeasure::ITransformed { seed: Box::new(LevyMeasure::stable(&[(Direction::Pos, 1e-7, 1.0)])) };
        assert!(matches!(nearly_flat.validate(), Err(LevyError::NonFinite(_))));
    }

    #[test]
    fn stable_log_moment_is_weight_over_z_squared() {
        let q = tight();
        for z in [0.5, 1.0, 1.5] {
            let m = LevyMeasure::stable(&[(Direction::Neg, z, 2.0)]);
            assert!((m.log_moment(&q) - 2.0 / (z * z)).abs() < 1e-9, "z={z}");
        }
    }

    #[test]
    fn tail_examples() {
        let q = tight();
        let m = LevyMeasure::stable(&[(Direction::Pos, 1.0, 1.0)]);
        assert!((m.tail(Direction::Pos, 2.0, &q) - 0.5).abs() < 1e-15);
        let m = LevyMeasure::discrete(&[(2.0, 1.0)]);
        assert_eq!(m.tail(Direction::Pos, 1.0, &q), 1.0);
        assert_eq!(m.tail(Direction::Neg, 1.0, &q), 0.0);
        let j = LevyMeasure::JTransformed { alpha: 1.0, seed: Box::new(m) };
        assert!((j.tail(Direction::Pos, 1.0, &q) - 0.5).abs() < 1e-15);
        let i = LevyMeasure::ITransformed { seed: Box::new(LevyMeasure::discrete(&[(1.0, 1.0)])) };
        assert!((i.tail(Direction::Pos, (-1.0f64).exp(), &q) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lazy_tail_matches_closed_form_route() {
        // A Sum wrapper pushes the discrete seed through the generic quadrature.
        let q = tight();
        let seed = LevyMeasure::discrete(&[(2.0, 1.0), (-0.7, 0.5)]);
        let direct = LevyMeasure::JTransformed { alpha: 1.5, seed: Box::new(seed.clone()) };
        let wrapped = LevyMeasure::JTransformed { alpha: 1.5, seed: Box::new(LevyMeasure::Sum { terms: vec![seed] }) };
        for r in [0.1, 0.5, 1.0, 1.9, 3.0] {
            for d in Direction::BOTH {
                let a = direct.tail(d, r, &q);
                let b = wrapped.tail(d, r, &q);
                assert!((a - b).abs() < 1e-10, "r={r} {d:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dilation_of_stable_tail() {
        let q = tight();
        let m = LevyMeasure::stable(&[(Direction::Pos, 0.7, 1.3)]);
        let d = m.dilate(-2.5);
        for r in [0.3, 1.0, 4.0] {
            assert!((d.tail(Direction::Neg, r, &q) - m.tail(Direction::Pos, r / 2.5, &q)).abs() < 1e-13);
            assert_eq!(d.tail(Direction::Pos, r, &q), 0.0);
        }
    }

    #[test]
    fn document_shape_round_trips() {
        let m = LevyMeasure::Sum {
            terms: vec![
                LevyMeasure::discrete(&[(1.5, 0.25)]),
                LevyMeasure::JTransformed { alpha: 0.5, seed: Box::new(LevyMeasure::stable(&[(Direction::Neg, 1.2, 3.0)])) },
            ],
        };
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"type\":\"sum\""));
        assert!(s.contains("\"direction\":-1"));
        let back: LevyMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<LevyMeasure>(r#"{"type":"discrete","atoms":[],"extra":1}"#).is_err());
        assert!(serde_json::from_str::<LevyMeasure>(r#"{"type":"stable_mixture","atoms":[{"direction":2,"z":1,"weight":1}]}"#).is_err());
    }
}
