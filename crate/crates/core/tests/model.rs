use std::path::PathBuf;

use races_core::model::*;
use races_core::race::RaceConfig;
use races_core::zeros::{load_zeros_expecting, ZeroSet, DEFAULT_STEP};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn q4(height: f64) -> ZeroSet {
    ZeroSet::builtin(4, height, DEFAULT_STEP).unwrap()
}

fn q5() -> ZeroSet {
    let mut set = ZeroSet::new(5);
    for chi in 1..4 {
        set.insert(load_zeros_expecting(&data(&format!("q5_chi{chi}.zeros")), 5, chi).unwrap()).unwrap();
    }
    set
}

fn rv(zeros: &ZeroSet, a: u64, b: u64) -> LimitRV {
    build_limit_rv(&RaceConfig::new(zeros.q(), a, b).unwrap(), zeros).unwrap()
}

#[test]
fn sample_mean_and_symmetry() {
    let x = rv(&q4(100.0), 3, 1);
    let n = 1_000_000;
    let xs = sample(&x, n, 11);
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    assert!((mean - x.mean).abs() < 4.0 * sd / 1000.0, "{mean}");
    assert!((sd * sd / x.variance() - 1.0).abs() < 0.01);
    for t in [0.5, 1.0, 2.0] {
        let above = xs.iter().filter(|&&v| v > x.mean + t).count() as f64 / n as f64;
        let below = xs.iter().filter(|&&v| v < x.mean - t).count() as f64 / n as f64;
        let p = 0.5 * (above + below);
        let binom_sd = (2.0 * p * (1.0 - p) / n as f64).sqrt();
        assert!((above - below).abs() <= 3.0 * binom_sd, "t={t}: {above} vs {below}");
    }
}

#[test]
fn reproducible_and_thread_independent() {
    let x = rv(&q4(50.0), 3, 1);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| density_delta2(&x, 300_000, 5).unwrap());
    let b = four.install(|| density_delta2(&x, 300_000, 5).unwrap());
    assert_eq!(a, b);
    let s1 = one.install(|| sample(&x, 70_000, 9));
    let s2 = four.install(|| sample(&x, 70_000, 9));
    assert_eq!(s1, s2);
    assert_ne!(density_delta2(&x, 300_000, 6).unwrap().value, a.value);
}

#[test]
fn swapped_races_are_complementary() {
    let zeros = q4(100.0);
    let (ab, ba) = (rv(&zeros, 3, 1), rv(&zeros, 1, 3));
    assert_eq!(ab.mean, -ba.mean);
    let n = 400_000;
    let d = density_delta(&ab, n, 1).unwrap();
    let e = density_delta(&ba, n, 2).unwrap();
    assert!((d.value + e.value - 1.0).abs() <= 2.0 * (d.half_width + e.half_width));
    let d2 = density_delta2(&ab, n, 3).unwrap();
    let e2 = density_delta2(&ba, n, 4).unwrap();
    assert!((d2.value + e2.value - 1.0).abs() <= 2.0 * (d2.half_width + e2.half_width));
}

#[test]
fn threshold_invariance_is_exact() {
    let x = rv(&q4(50.0), 3, 1);
    let base = density_delta2(&x, 100_000, 8).unwrap();
    for lambda in [2.0, 0.5, 0.25] {
        let y = x.scaled(lambda);
        let got = density_delta2(&y, 100_000, 8).unwrap();
        assert_eq!(got.value, base.value, "lambda={lambda}");
    }
}

#[test]
fn single_pair_joint_reduces_to_delta2() {
    let x = rv(&q4(100.0), 3, 1);
    let d2 = density_delta2(&x, 200_000, 21).unwrap();
    let pos = joint_probability(&[&x], &[Sign::Positive], 200_000, 21).unwrap();
    let neg = joint_probability(&[&x], &[Sign::Negative], 200_000, 21).unwrap();
    assert_eq!(pos.value, d2.value);
    assert_eq!(pos.value + neg.value, 1.0);
}

#[test]
fn unbiased_race_is_even() {
    let zeros = q5();
    // 1 and 4 are both squares mod 5
    let x = rv(&zeros, 1, 4);
    assert_eq!(x.mean, 0.0);
    let n = 400_000;
    let d = density_delta(&x, n, 31).unwrap();
    let d2 = density_delta2(&x, n, 32).unwrap();
    assert!((d.value - 0.5).abs() <= d.half_width, "{d:?}");
    assert!((d2.value - 0.5).abs() <= d2.half_width, "{d2:?}");
}

#[test]
fn q5_joint_below_marginals() {
    let zeros = q5();
    let (x, y) = (rv(&zeros, 2, 1), rv(&zeros, 3, 1));
    assert_eq!(x.mean, 0.5);
    let n = 400_000;
    let joint = joint_probability(&[&x, &y], &[Sign::Positive, Sign::Positive], n, 41).unwrap();
    let mx = joint_probability(&[&x], &[Sign::Positive], n, 41).unwrap();
    let my = joint_probability(&[&y], &[Sign::Positive], n, 41).unwrap();
    assert!(joint.value <= mx.value.min(my.value), "{joint:?} {mx:?} {my:?}");
    let total: f64 = [Sign::Positive, Sign::Negative]
        .iter()
        .flat_map(|&s| [Sign::Positive, Sign::Negative].map(|t| (s, t)))
        .map(|(s, t)| joint_probability(&[&x, &y], &[s, t], n, 41).unwrap().value)
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn joint_rejects_mismatched_inputs() {
    let (a, b) = (rv(&q4(50.0), 3, 1), rv(&q5(), 2, 1));
    assert!(joint_probability(&[&a, &b], &[Sign::Positive, Sign::Positive], 20_000, 0).is_err());
    let c = rv(&q4(40.0), 3, 1);
    assert!(joint_probability(&[&a, &c], &[Sign::Positive, Sign::Positive], 20_000, 0).is_err());
    assert!(joint_probability(&[&a], &[Sign::Positive, Sign::Positive], 20_000, 0).is_err());
    assert!(build_limit_rv(&RaceConfig::new(5, 2, 1).unwrap(), &ZeroSet::new(5)).is_err());
}

#[test]
fn height_convergence() {
    let n = 400_000;
    let lo = rv(&q4(100.0), 3, 1);
    let hi = rv(&q4(300.0), 3, 1);
    assert!(hi.tail_sigma < lo.tail_sigma);
    for f in [density_delta, density_delta2] {
        let a = f(&lo, n, 51).unwrap();
        let b = f(&hi, n, 52).unwrap();
        assert!((a.value - b.value).abs() < 3.0 * (a.half_width + b.half_width), "{a:?} {b:?}");
    }
}
