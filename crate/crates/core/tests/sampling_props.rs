use num_complex::Complex64;

use levycalc::exponent::exponent;
use levycalc::measure::LevyMeasure;
use levycalc::simulate::{compare_cf, empirical_cf, linear_grid, sample_integral_exact, sample_integral_rs, SampleBatch};
use levycalc::special::tau_cdf;
use levycalc::transform::{j_alpha, partial_integral_triple, Tabulated};
use levycalc::triple::LevyTriple;
use levycalc::LevyError;

fn two_atom() -> LevyTriple {
    LevyTriple::new(-0.2, 0.5, LevyMeasure::discrete(&[(2.5, 0.7), (-0.6, 1.3)]))
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[test]
fn drift_seed_integrates_to_half() {
    let b = sample_integral_exact(&LevyTriple::drift(1.0), 1.0, 1000, 9).unwrap();
    assert!(b.values.iter().all(|&v| v == 0.5));
    let emp = empirical_cf(&b, &[std::f64::consts::PI]).unwrap();
    assert!((emp.values[0] - Complex64::i()).norm() < 1e-15);
}

#[test]
fn gaussian_variance_is_a_third() {
    let n = 1_000_000;
    let b = sample_integral_exact(&LevyTriple::gaussian(1.0), 1.0, n, 3).unwrap();
    let mean = b.values.iter().sum::<f64>() / n as f64;
    let var = b.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // Var of a sample variance of normals is 2σ⁴/(n − 1)
    let se = (2.0 / (n - 1) as f64).sqrt() / 3.0;
    assert!((var - 1.0 / 3.0).abs() <= 3.0 * se, "{var}");
}

#[test]
fn non_discrete_seeds_are_rejected() {
    let t = LevyTriple::pure_jump(LevyMeasure::stable(&[(levycalc::Direction::Pos, 1.0, 1.0)]));
    assert!(matches!(sample_integral_exact(&t, 1.0, 10, 0), Err(LevyError::UnsupportedSeed(_))));
}

#[test]
fn samples_are_reproducible_across_thread_counts() {
    let t = two_atom();
    let n = 50_000;
    let one = with_threads(1, || sample_integral_exact(&t, 0.7, n, 11).unwrap());
    let four = with_threads(4, || sample_integral_exact(&t, 0.7, n, 11).unwrap());
    let again = sample_integral_exact(&t, 0.7, n, 11).unwrap();
    let bits = |b: &SampleBatch| b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one), bits(&four));
    assert_eq!(bits(&one), bits(&again));
    assert_ne!(bits(&one), bits(&sample_integral_exact(&t, 0.7, n, 12).unwrap()));

    let id = Tabulated::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
    let rs1 = with_threads(1, || sample_integral_rs(&t, &id, &id, 64, 20_000, 5).unwrap());
    let rs3 = with_threads(3, || sample_integral_rs(&t, &id, &id, 64, 20_000, 5).unwrap());
    assert_eq!(bits(&rs1), bits(&rs3));
}

#[test]
fn empirical_cf_is_one_at_zero_and_hermitian() {
    let b = sample_integral_exact(&two_atom(), 1.3, 10_000, 1).unwrap();
    let emp = empirical_cf(&b, &[-2.0, -0.5, 0.0, 0.5, 2.0]).unwrap();
    assert_eq!(emp.values[2], Complex64::new(1.0, 0.0));
    assert_eq!(emp.values[0], emp.values[4].conj());
    assert_eq!(emp.values[1], emp.values[3].conj());
}

#[test]
fn law_factorizes() {
    // J(t) = T_c(J(t)^{*c}) * (partial integral over (c, 1))
    let n = 400_000;
    let ys = linear_grid(-5.0, 5.0, 41);
    for (t, seed) in [(LevyTriple::poisson(1.0), 21), (two_atom(), 22)] {
        let j = j_alpha(&t, 1.0).unwrap();
        for c in [0.25, 0.5, 0.9] {
            let a = exponent(&j.conv_power(c).unwrap().dilate(c).unwrap()).unwrap();
            let b = exponent(&partial_integral_triple(&t, c).unwrap()).unwrap();
            let product = levycalc::exponent::LevyExponent::from_fn(move |y| a.eval(y).unwrap() + b.eval(y).unwrap());
            let batch = sample_integral_exact(&t, 1.0, n, seed).unwrap();
            let cmp = compare_cf(&empirical_cf(&batch, &ys).unwrap(), &product, 3.0, n).unwrap();
            assert!(cmp.fraction_within() >= 0.9, "c = {c}: {}/{}", cmp.within, cmp.points);
        }
    }
}

#[test]
fn exact_sampler_matches_cf_for_fractional_alpha() {
    let n = 200_000;
    let ys = linear_grid(-5.0, 5.0, 41);
    for alpha in [0.3, 0.75, 2.5] {
        let t = two_atom();
        let batch = sample_integral_exact(&t, alpha, n, 77).unwrap();
        let phi = exponent(&j_alpha(&t, alpha).unwrap()).unwrap();
        let cmp = compare_cf(&empirical_cf(&batch, &ys).unwrap(), &phi, 3.0, n).unwrap();
        assert!(cmp.fraction_within() >= 0.9, "alpha {alpha}: {}/{}", cmp.within, cmp.points);
    }
}

#[test]
fn riemann_stieltjes_drift_and_gaussian() {
    let id = Tabulated::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
    let b = sample_integral_rs(&LevyTriple::drift(1.0), &id, &id, 100, 10, 0).unwrap();
    assert!(b.values.iter().all(|v| (v - 0.5).abs() < 1e-12));

    let n = 200_000;
    let b = sample_integral_rs(&LevyTriple::gaussian(1.0), &id, &id, 2048, n, 4).unwrap();
    let mean = b.values.iter().sum::<f64>() / n as f64;
    let var = b.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((var * 3.0 - 1.0).abs() < 0.01, "{var}");
    assert!(matches!(sample_integral_rs(&LevyTriple::drift(1.0), &id, &id, 9, 10, 0), Err(LevyError::InvalidParameter(_))));
}

#[test]
fn riemann_stieltjes_converges_to_exact() {
    let n = 100_000;
    let h = Tabulated::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
    for (alpha, t) in [(1.0, LevyTriple::poisson(1.0)), (2.0, two_atom())] {
        let r = Tabulated::sample(|x| tau_cdf(alpha, x), 0.0, 1.0, 4097);
        let rs = sample_integral_rs(&t, &h, &r, 4096, n, 31).unwrap();
        let exact = sample_integral_exact(&t, alpha, n, 32).unwrap();
        let d = ks_two_sample(&rs.values, &exact.values);
        assert!(d < 0.01, "alpha {alpha}: KS {d}");
    }
}
