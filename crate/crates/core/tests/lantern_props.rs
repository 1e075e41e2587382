use crcond_core::lantern::{
    classify_sequence, classify_sequence_with, lantern_area, lantern_circumradius, lantern_oracle, LanternParams,
    LimitClass, SequenceRule,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn formula_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.gen_range(2..=100u64);
        let m = rng.gen_range(1..=10_000 / n);
        let p = LanternParams::new(m, n, rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
        let o = lantern_oracle(&p).unwrap();
        assert_eq!(o.triangles, 2 * m * n);
        assert!(rel(lantern_area(&p), o.area) <= 1e-10, "{p:?}");
        assert!(rel(lantern_circumradius(&p), o.max_circumradius) <= 1e-10, "{p:?}");
    }
}

#[test]
fn unit_lantern_with_m_equal_n_approaches_cylinder() {
    let a = lantern_area(&LanternParams::unit(400, 400));
    assert!((a - 2.0 * std::f64::consts::PI).abs() < 5e-3, "{a}");
}

#[test]
fn classifier_verdicts_agree() {
    let expect = [
        (0.5, LimitClass::ConvergesToCylinder),
        (1.0, LimitClass::ConvergesToCylinder),
        (1.5, LimitClass::ConvergesToCylinder),
        (2.0, LimitClass::ConvergesElsewhere),
        (2.5, LimitClass::Diverges),
        (3.0, LimitClass::Diverges),
    ];
    for (beta, want) in expect {
        let c = classify_sequence(&SequenceRule::power(beta).unwrap(), 4096).unwrap();
        assert_eq!(c.verdict(), want, "beta {beta}");
        assert!(c.equivalence_holds(), "beta {beta}: {c:?}");
        assert_eq!(c.radius_to_zero, want == LimitClass::ConvergesToCylinder);
    }
    let c = classify_sequence_with(&SequenceRule::power(1.0).unwrap(), 1024, 2.0, 0.5).unwrap();
    assert_eq!(c.verdict(), LimitClass::ConvergesToCylinder);
}

proptest! {
    #[test]
    fn area_nondecreasing_in_m(n in 2u64..500, m in 1u64..5000, r in 0.1f64..10.0, h in 0.1f64..10.0) {
        let a = lantern_area(&LanternParams::new(m, n, r, h).unwrap());
        let b = lantern_area(&LanternParams::new(m + 1, n, r, h).unwrap());
        prop_assert!(b >= a * (1.0 - 1e-15), "m {m}: {a} -> {b}");
    }

    #[test]
    fn area_at_least_cylinder_projection(n in 3u64..500, m in 1u64..5000) {
        // Every triangle spans at least its vertical extent times its chord.
        let p = LanternParams::unit(m, n);
        let chord_perimeter = n as f64 * 2.0 * (std::f64::consts::PI / n as f64).sin();
        prop_assert!(lantern_area(&p) >= chord_perimeter * (1.0 - 1e-12));
    }
}
