use proptest::prelude::*;

use races_core::arith::gcd;
use races_core::explicit::{ExplicitModel, Kappa};
use races_core::model::tail_integral;
use races_core::race::RaceConfig;
use races_core::zeros::{CharacterGroup, ZeroSet, DEFAULT_STEP};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_completely_multiplicative(q in 3u64..300, m in 1u64..10_000, n in 1u64..10_000) {
        let group = CharacterGroup::new(q).unwrap();
        for chi in group.iter() {
            let lhs = chi.value(m * n);
            let rhs = chi.value(m) * chi.value(n);
            prop_assert!((lhs - rhs).norm() < 1e-12);
            let expect_unit = gcd(m, q) == 1;
            prop_assert_eq!((chi.value(m).norm() - 1.0).abs() < 1e-12, expect_unit);
            prop_assert!((chi.conj_value(m) - chi.value(m).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn conjugate_index_is_an_involution(q in 3u64..300) {
        let group = CharacterGroup::new(q).unwrap();
        for chi in group.iter() {
            let c = group.conjugate_index(chi.index).unwrap();
            prop_assert_eq!(group.conjugate_index(c).unwrap(), chi.index);
            prop_assert_eq!(c == chi.index, chi.is_real);
        }
    }

    #[test]
    fn tail_variance_decreases_with_height(f in 3u64..200, t in 1.0f64..400.0, dt in 0.5f64..100.0) {
        let lo = tail_integral(f, t);
        let hi = tail_integral(f, t + dt);
        prop_assert!(hi > 0.0 && hi < lo);
    }
}

#[test]
fn explicit_predictions_are_antisymmetric() {
    let zeros = ZeroSet::builtin(4, 40.0, DEFAULT_STEP).unwrap();
    let ab = RaceConfig::new(4, 3, 1).unwrap();
    let m = ExplicitModel::new(&ab, &zeros, 40.0).unwrap();
    let n = ExplicitModel::new(&ab.swapped(), &zeros, 40.0).unwrap();
    for x in [10.0, 1234.5, 1e5, 3.3e7] {
        for k in [Kappa::InversePhi, Kappa::One] {
            let (p, r) = (m.predict(x, k).unwrap(), n.predict(x, k).unwrap());
            assert!((p.predicted_delta_norm + r.predicted_delta_norm).abs() < 1e-12);
            assert!((p.predicted_delta2_norm + r.predicted_delta2_norm).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn truncation_height_zero_leaves_only_bias(x in 10.0f64..1e9) {
        let zeros = ZeroSet::builtin(4, 10.0, DEFAULT_STEP).unwrap();
        let cfg = RaceConfig::new(4, 3, 1).unwrap();
        let m = ExplicitModel::new(&cfg, &zeros, 0.0).unwrap();
        let p = m.predict(x, Kappa::InversePhi).unwrap();
        prop_assert_eq!(p.predicted_delta_norm, cfg.prime_bias());
        prop_assert_eq!(p.predicted_delta2_norm, m.semiprime_bias());
    }
}
