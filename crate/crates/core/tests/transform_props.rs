use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levycalc::classify::{classify_completely_s, classify_order, Verdict, DEFAULT_PER_DECADE, MAX_ORDER_CAP};
use levycalc::exponent::exponent;
use levycalc::measure::{Direction, LevyMeasure};
use levycalc::quad::Quad;
use levycalc::special::{integrate_tau, sample_g, tau_cdf};
use levycalc::transform::{i_transform, j_alpha, j_integer_shift, partial_integral_triple, stable_mixture_j};
use levycalc::triple::{LevyTriple, RadiusGrid};

fn atom() -> impl Strategy<Value = (f64, f64)> {
    (prop_oneof![-5.0..-0.05f64, 0.05..5.0f64], 0.01..2.0f64)
}

fn discrete_seed() -> impl Strategy<Value = LevyTriple> {
    (-1.0..1.0f64, 0.0..1.5f64, prop::collection::vec(atom(), 1..5))
        .prop_map(|(a, r, atoms)| LevyTriple::new(a, r, LevyMeasure::discrete(&atoms)))
}

fn stable_measure() -> impl Strategy<Value = LevyMeasure> {
    let dir = prop_oneof![Just(Direction::Pos), Just(Direction::Neg)];
    prop::collection::vec((dir, 0.2..1.9f64, 0.05..2.0f64), 1..4).prop_map(|a| LevyMeasure::stable(&a))
}

const ALPHAS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tau_semigroup(i in 0..4usize, j in 0..4usize, s in 0.2..3.0f64, k in 0.5..8.0f64) {
        let (alpha, beta) = (ALPHAS[i], ALPHAS[j]);
        let q = Quad::new(1e-12, 1e-12);
        let tests: [&dyn Fn(f64) -> f64; 2] = [&|t: f64| t.powf(s), &|t: f64| (k * t).cos()];
        for h in tests {
            let nested: f64 = integrate_tau(&q, beta, |v: f64| integrate_tau(&q, alpha, |t: f64| h(v * t), &[]), &[]);
            let direct: f64 = integrate_tau(&q, alpha + beta, h, &[]);
            prop_assert!((nested - direct).abs() <= 1e-8, "{nested} vs {direct}");
        }
    }

    #[test]
    fn tau_is_a_cdf(alpha in 0.1..4.0f64) {
        prop_assert!(tau_cdf(alpha, 1e-300) < 1e-6);
        prop_assert_eq!(tau_cdf(alpha, 1.0), 1.0);
        let v: Vec<f64> = (1..=200).map(|k| tau_cdf(alpha, k as f64 / 200.0)).collect();
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn shift_forms_agree(seed in discrete_seed()) {
        for m in 1..=4u32 {
            let a = j_alpha(&seed, m as f64).unwrap().shift;
            let b = j_integer_shift(&seed, m).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3), "m = {m}: {a} vs {b}");
        }
    }

    #[test]
    fn factorization(seed in discrete_seed()) {
        let j = j_alpha(&seed, 1.0).unwrap();
        let pj = exponent(&j).unwrap();
        for c in [0.25, 0.5, 0.9] {
            let left = j.conv_power(c).unwrap().dilate(c).unwrap().convolve(&partial_integral_triple(&seed, c).unwrap());
            let pl = exponent(&left).unwrap();
            for y in [-6.0, -2.0, -0.5, 0.5, 1.0, 3.0, 8.0] {
                prop_assert!((pl.eval(y).unwrap() - pj.eval(y).unwrap()).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn semigroup_on_random_seeds(seed in discrete_seed(), alpha in 0.3..2.0f64, beta in 0.3..2.0f64) {
        let nested = j_alpha(&j_alpha(&seed, beta).unwrap(), alpha).unwrap();
        let direct = j_alpha(&seed, alpha + beta).unwrap();
        prop_assert!((nested.shift - direct.shift).abs() <= 1e-12 * direct.shift.abs().max(1.0));
        prop_assert!((nested.gauss_var - direct.gauss_var).abs() <= 1e-12 * direct.gauss_var.max(1.0));
        let (f, g) = (nested.spectral_function(), direct.spectral_function());
        for r in [0.07, 0.3, 1.0, 2.2, 4.0] {
            for d in Direction::BOTH {
                prop_assert!((f.try_evaluate(d, r).unwrap() - g.try_evaluate(d, r).unwrap()).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn stable_closure_keeps_completely_s(sigma in stable_measure(), alpha in 0.2..3.0f64) {
        prop_assert_eq!(classify_completely_s(&sigma).unwrap().verdict, Verdict::Yes);
        let j = stable_mixture_j(&sigma, alpha).unwrap();
        let closed = matches!(j, LevyMeasure::StableMixture { .. });
        prop_assert!(closed);
        prop_assert_eq!(classify_completely_s(&j).unwrap().verdict, Verdict::Yes);
        let i = i_transform(&LevyTriple::pure_jump(sigma)).unwrap().measure;
        let closed = matches!(i, LevyMeasure::StableMixture { .. });
        prop_assert!(closed);
        prop_assert_eq!(classify_completely_s(&i).unwrap().verdict, Verdict::Yes);
    }
}

fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sampled_g_follows_tau() {
    let n = 100_000;
    for (k, seed) in [1u64, 2, 3, 4, 5].into_iter().enumerate() {
        let alpha = [0.3, 0.5, 1.0, 2.0, 3.7][k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = sample_g(alpha, &mut rng, n).unwrap();
        assert!(draws.iter().all(|&g| g > 0.0 && g < 1.0));
        let d = ks_one_sample(draws, |t| tau_cdf(alpha, t));
        assert!(d < 1.95 / (n as f64).sqrt(), "alpha {alpha}: KS {d}");
    }
}

#[test]
fn j_image_tail_is_a_g_average() {
    // L_image(r) = E L_seed(r/g_m)
    let seed = LevyTriple::pure_jump(LevyMeasure::discrete(&[(2.5, 0.7), (-0.6, 1.3), (4.0, 0.2)]));
    let sf = seed.spectral_function();
    let n = 100_000;
    for m in [1u32, 2, 3] {
        let image = j_alpha(&seed, m as f64).unwrap().spectral_function();
        let g = sample_g(m as f64, &mut ChaCha8Rng::seed_from_u64(40 + m as u64), n).unwrap();
        for r in [0.1, 0.5, 1.0, 2.0] {
            for d in Direction::BOTH {
                let vals: Vec<f64> = g.iter().map(|&g| sf.evaluate(d, r / g)).collect();
                let mean = vals.iter().sum::<f64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let exact = image.try_evaluate(d, r).unwrap();
                assert!((mean - exact).abs() <= 3.0 * se + 1e-12, "m {m}, r {r}: {mean} vs {exact} (se {se})");
            }
        }
    }
}

#[test]
fn classifier_orders_are_downward_closed_and_grow_under_j() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..40 {
        let seed = discrete_seed().new_tree(&mut runner).unwrap().current();
        let mut prev = 0;
        for m in 0..=3u32 {
            let t = if m == 0 { seed.clone() } else { j_alpha(&seed, m as f64).unwrap() };
            let grid = RadiusGrid::for_measure(&t.measure, DEFAULT_PER_DECADE);
            let report = classify_order(&t, MAX_ORDER_CAP.min(m + 2), &grid).unwrap();
            // passing order k implies passing every lower order
            for (k, d) in report.diagnostics.iter().enumerate() {
                if d.passed {
                    assert!(report.diagnostics[..k].iter().all(|e| e.passed), "order {k} passed above a failure");
                }
            }
            if m > 0 {
                assert!(report.order >= (prev + 1).min(m + 2), "order {} after {}", report.order, prev);
            }
            prev = report.order;
        }
    }
}

#[test]
fn poisson_has_order_zero() {
    let p = LevyTriple::poisson(3.0);
    let grid = RadiusGrid::for_measure(&p.measure, DEFAULT_PER_DECADE);
    assert_eq!(classify_order(&p, 4, &grid).unwrap().order, 0);
}
