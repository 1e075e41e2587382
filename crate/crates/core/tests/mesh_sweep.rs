use crcond_core::mesh::{gen_aniso, gen_aniso_capped, validate, AnisoLayout};
use crcond_core::Error;
use std::f64::consts::PI;

const NS: [usize; 5] = [8, 16, 32, 64, 128];

#[test]
fn generated_meshes_are_valid() {
    for alpha in [1.0, 1.2, 1.5, 1.6, 1.8, 2.0, 2.1] {
        for n in [4, 8, 12, 16, 32] {
            let mesh = gen_aniso(n, alpha).unwrap();
            let layout = AnisoLayout::new(n, alpha).unwrap();
            let report = validate(&mesh).unwrap_or_else(|e| panic!("alpha {alpha} N {n}: {e}"));
            assert_eq!(mesh.num_triangles() as u64, layout.triangle_count());
            assert_eq!(layout.triangle_count(), ((2 * n + 1) * layout.strips) as u64);
            assert!(report.quality.r_max > 0.0);
        }
    }
}

#[test]
fn strip_count_for_the_figure_mesh() {
    let layout = AnisoLayout::new(12, 1.6).unwrap();
    assert_eq!(layout.strips, 35);
    assert_eq!(gen_aniso(12, 1.6).unwrap().num_triangles(), 25 * 35);
}

#[test]
fn interior_triangle_matches_closed_form_from_n16() {
    for alpha in [1.1, 1.2, 1.3, 1.5, 1.7, 1.9, 2.0, 2.1] {
        for n in [16, 32, 64, 128] {
            let layout = AnisoLayout::new(n, alpha).unwrap();
            let h = layout.base;
            let closed = h.powf(alpha) / 2.0 + h.powf(2.0 - alpha) / 8.0;
            let rel = (layout.interior_circumradius() - closed).abs() / closed;
            assert!(rel < 2e-2, "alpha {alpha} N {n}: {rel}");
        }
    }
}

#[test]
fn coarse_interior_triangle_deviates_from_closed_form() {
    let layout = AnisoLayout::new(4, 1.2).unwrap();
    let h = layout.base;
    let closed = h.powf(1.2) / 2.0 + h.powf(0.8) / 8.0;
    let rel = (layout.interior_circumradius() - closed).abs() / closed;
    assert!(rel > 2e-2 && rel < 0.1, "{rel}");
}

fn quality_series(alpha: f64, ns: &[usize]) -> Vec<(f64, f64)> {
    ns.iter()
        .map(|&n| {
            let q = gen_aniso(n, alpha).unwrap().quality().unwrap();
            (q.r_max, q.theta_max_global)
        })
        .collect()
}

#[test]
fn circumradius_condition_holds_while_maximum_angle_fails() {
    for (alpha, ns) in [(1.2, &NS[..]), (1.5, &NS[..]), (1.8, &NS[..4])] {
        let s = quality_series(alpha, ns);
        for w in s.windows(2) {
            assert!(w[1].0 < w[0].0, "alpha {alpha}: r_max {:?}", s);
            assert!(w[1].1 >= w[0].1, "alpha {alpha}: theta_max {:?}", s);
        }
        let (r_last, th_last) = *s.last().unwrap();
        assert!(r_last < 0.5 * s[0].0);
        assert!(th_last > s[0].1, "alpha {alpha}: {s:?}");
    }
    let s = quality_series(1.5, &NS);
    assert!(s[4].0 < 0.04);
    assert!(s[4].1 > 0.8 * PI);
}

/// Apex angle of the interior triangles, followed far past mesh-building scale.
#[test]
fn interior_apex_angle_tends_to_pi() {
    for alpha in [1.2, 1.5, 1.8] {
        let apex: Vec<f64> = (3..=20)
            .map(|e| {
                let l = AnisoLayout::new(1 << e, alpha).unwrap();
                2.0 * (0.5 * l.base / l.height).atan()
            })
            .collect();
        for w in apex.windows(2) {
            assert!(w[1] >= w[0], "alpha {alpha}: {apex:?}");
        }
        assert!(PI - apex[apex.len() - 1] < 0.5 * (PI - apex[0]), "alpha {alpha}: {apex:?}");
    }
}

#[test]
fn circumradius_does_not_decay_beyond_two() {
    // The floor in the strip count makes N = 8 an outlier; from N = 16 on
    // r_max grows.
    let s = quality_series(2.1, &NS[..4]);
    for w in s[1..].windows(2) {
        assert!(w[1].0 >= w[0].0, "{s:?}");
    }
    assert!(s.iter().all(|q| q.0 > 0.15), "{s:?}");
    let r128 = AnisoLayout::new(128, 2.1).unwrap().interior_circumradius();
    assert!(r128 > s[3].0);
}

#[test]
fn triangle_cap_is_enforced() {
    match gen_aniso_capped(128, 2.1, 1_000_000) {
        Err(Error::TooFine { triangles, cap }) => {
            assert_eq!(cap, 1_000_000);
            assert_eq!(triangles, AnisoLayout::new(128, 2.1).unwrap().triangle_count());
        }
        other => panic!("{other:?}"),
    }
}
