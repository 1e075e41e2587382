use crcond_core::area::{
    area_convergence_study, exact_graph_area, graph_area_quadrature, AreaProvenance, AreaStudy, AreaVerdict,
};
use crcond_core::field::{Affine, Cylinder, Paraboloid};
use crcond_core::mesh::Rect;

const NS: [usize; 5] = [8, 16, 32, 64, 128];

fn gaps(alpha: f64, ns: &[usize]) -> Vec<f64> {
    let cyl = Cylinder::new(1.1);
    let report = area_convergence_study(&AreaStudy::new(&cyl, alpha, ns.to_vec())).unwrap();
    for r in &report.records {
        assert!(r.within_bound(), "alpha {alpha} N {}: gap {} > {}", r.n, r.gap, r.w11_error);
        assert!(r.a_e >= 4.0);
        assert!(r.exact > 4.0);
    }
    report.records.iter().map(|r| r.gap).collect()
}

#[test]
fn cylinder_exact_area_closed_form() {
    let e = exact_graph_area(&Cylinder::new(1.1), &Rect::symmetric_square()).unwrap();
    assert_eq!(e.provenance, AreaProvenance::ClosedForm);
    assert!((e.value - 4.4 * (10.0f64 / 11.0).asin()).abs() < 1e-13);
    let gl = graph_area_quadrature(&Cylinder::new(1.1), &Rect::symmetric_square(), 64).unwrap();
    assert!((gl - e.value).abs() < 1e-6 * e.value, "{gl} vs {}", e.value);
}

#[test]
fn gap_shrinks_monotonically_from_n16() {
    for alpha in [1.0, 1.5] {
        let g = gaps(alpha, &NS);
        for (i, w) in g[1..].windows(2).enumerate() {
            assert!(w[1] <= 1.1 * w[0], "alpha {alpha}, step {}: {g:?}", i + 1);
        }
    }
}

/// Consecutive gaps that grow by more than 10%, kept as observed.
#[test]
fn observed_violations_of_the_loose_monotonicity_guard() {
    let g = gaps(1.5, &[8, 16]);
    assert!(g[1] > 1.5 * g[0], "{g:?}");
    let g = gaps(2.0, &[8, 16, 32, 64]);
    for w in g.windows(2) {
        assert!(w[1] > w[0], "{g:?}");
    }
}

#[test]
fn violating_sequence_does_not_converge() {
    let cyl = Cylinder::new(1.1);
    let report = area_convergence_study(&AreaStudy::new(&cyl, 2.1, vec![8, 16, 32, 64])).unwrap();
    assert_eq!(report.verdict, AreaVerdict::NoConvergence);
    assert!(report.records.iter().all(|r| r.within_bound()));
    let report = area_convergence_study(&AreaStudy::new(&cyl, 1.5, NS.to_vec())).unwrap();
    assert_eq!(report.verdict, AreaVerdict::Converges);
}

#[test]
fn affine_and_paraboloid_fields() {
    let plane = Affine::new(1.0, 0.3, -0.4);
    let report = area_convergence_study(&AreaStudy::new(&plane, 2.1, vec![8, 16])).unwrap();
    assert_eq!(report.verdict, AreaVerdict::Exact);
    let want = 4.0 * (1.0f64 + 0.09 + 0.16).sqrt();
    for r in &report.records {
        assert!((r.a_e - want).abs() < 1e-12 * want);
        assert!(r.within_bound());
    }
    let report = area_convergence_study(&AreaStudy::new(&Paraboloid, 1.5, NS.to_vec())).unwrap();
    assert_eq!(report.verdict, AreaVerdict::Converges);
    assert!(report.records.iter().all(|r| r.within_bound() && r.a_e > 4.0));
    // R_max tends to 1/8 at alpha = 2 and the gap levels off.
    let report = area_convergence_study(&AreaStudy::new(&Paraboloid, 2.0, NS.to_vec())).unwrap();
    assert_eq!(report.verdict, AreaVerdict::NoConvergence);
    assert!(report.records.iter().all(|r| r.within_bound()));
}
