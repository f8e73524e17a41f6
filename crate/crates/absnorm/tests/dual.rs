use absnorm::dual::{bidual_check, dual, duality_chain_check, sc_defect, smoothness_proxy, DualTable};
use absnorm::norm2::AbsoluteNorm;
use absnorm::verify::Verdict;
use approx::assert_abs_diff_eq;

fn p1() -> AbsoluteNorm {
    AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.5, 0.75], [0.0, 1.0]]).unwrap()
}

fn assert_arcs_match(got: &[[f64; 2]], want: &[[f64; 2]], tol: f64) {
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (g, w) in got.iter().zip(want) {
        assert_abs_diff_eq!(g[0], w[0], epsilon = tol);
        assert_abs_diff_eq!(g[1], w[1], epsilon = tol);
    }
}

#[test]
fn dual_of_polygon_is_exact() {
    let d = dual(&p1(), 64);
    let vs = d.as_polygon().expect("polygon dual stays polygonal");
    assert_arcs_match(
        &vs,
        &[[1.0, 0.0], [1.0, 2.0 / 3.0], [0.5, 1.0], [0.0, 1.0]],
        1e-12,
    );
}

#[test]
fn double_dual_of_polygon_returns_the_arc() {
    let dd = dual(&dual(&p1(), 64), 64);
    let vs = dd.as_polygon().unwrap();
    assert_arcs_match(&vs, &[[1.0, 0.0], [0.5, 0.75], [0.0, 1.0]], 1e-12);
}

#[test]
fn extreme_polygons_dualise_to_each_other() {
    let l1 = AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let li = dual(&l1, 64);
    assert_arcs_match(
        &li.as_polygon().unwrap(),
        &[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        1e-12,
    );
    let back = dual(&li, 64);
    assert_arcs_match(&back.as_polygon().unwrap(), &[[1.0, 0.0], [0.0, 1.0]], 1e-12);
}

#[test]
fn numeric_dual_matches_conjugate_exponent() {
    // p and q = p/(p-1) are dual pairs; spot-check values off the axes.
    let cases = [
        (1.0, f64::INFINITY),
        (2.0, 2.0),
        (3.0, 1.5),
        (f64::INFINITY, 1.0),
    ];
    for (p, q) in cases {
        let d = dual(&AbsoluteNorm::p_norm(p).unwrap(), 4096);
        let expect = AbsoluteNorm::p_norm(q).unwrap();
        for (a, b) in [(1.0, 1.0), (0.3, 0.8), (1.7, 0.4)] {
            assert_abs_diff_eq!(d.evaluate(a, b), expect.evaluate(a, b), epsilon = 1e-6);
        }
    }
}

#[test]
fn dual_table_basics() {
    let t = DualTable::new(AbsoluteNorm::p_norm(2.0).unwrap(), 512);
    assert_eq!(t.resolution(), 512);
    assert_eq!(t.evaluate(0.0, 0.0), 0.0);
    assert_abs_diff_eq!(t.evaluate(3.0, 4.0), 5.0, epsilon = 1e-6);
    // Resolution floor.
    assert_eq!(DualTable::new(AbsoluteNorm::p_norm(2.0).unwrap(), 1).resolution(), 8);
}

#[test]
fn dual_round_trip_reports() {
    let cases = [
        AbsoluteNorm::p_norm(1.0).unwrap(),
        AbsoluteNorm::p_norm(2.0).unwrap(),
        AbsoluteNorm::p_norm(3.0).unwrap(),
        AbsoluteNorm::p_norm(f64::INFINITY).unwrap(),
        p1(),
    ];
    for f in &cases {
        let report = bidual_check(f, 2048);
        assert_eq!(report.verdict, Verdict::Pass, "{f}: {:?}", report.notes);
        assert!(report.worst_margin >= 0.0);
        assert!(report.counterexample.is_none());
        assert_eq!(report.claim_id, "dual-roundtrip");
    }
}

#[test]
fn corner_detection() {
    assert!(smoothness_proxy(&AbsoluteNorm::p_norm(2.0).unwrap(), 1024));
    assert!(smoothness_proxy(&AbsoluteNorm::p_norm(3.0).unwrap(), 1024));
    // Corners at the axes (sum norm), the diagonal (max norm), and the
    // vertices (polygon).
    assert!(!smoothness_proxy(&AbsoluteNorm::p_norm(1.0).unwrap(), 1024));
    assert!(!smoothness_proxy(&AbsoluteNorm::p_norm(f64::INFINITY).unwrap(), 1024));
    assert!(!smoothness_proxy(&p1(), 1024));
}

#[test]
fn convexity_defect_signs() {
    let l2 = AbsoluteNorm::p_norm(2.0).unwrap();
    assert!(sc_defect(&l2, [1.0, 0.0], 512) > 1e-9);
    assert!(sc_defect(&l2, [0.6, 0.8], 512) > 1e-9);
    let l1 = AbsoluteNorm::p_norm(1.0).unwrap();
    assert!(sc_defect(&l1, [1.0, 0.0], 512) <= 1e-9);
    assert!(sc_defect(&p1(), [0.75, 0.375], 512) <= 1e-9);
}

#[test]
fn duality_chain_on_round_norms() {
    for p in [2.0, 3.0] {
        let report = duality_chain_check(&AbsoluteNorm::p_norm(p).unwrap(), 1024).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "p={p}: {:?}", report.notes);
        assert!(report.worst_margin >= 0.0);
    }
}

#[test]
fn duality_chain_vacuous_on_square_norms() {
    for f in [
        AbsoluteNorm::p_norm(1.0).unwrap(),
        AbsoluteNorm::p_norm(f64::INFINITY).unwrap(),
        p1(),
    ] {
        let report = duality_chain_check(&f, 1024).unwrap();
        assert_eq!(report.verdict, Verdict::Vacuous, "{f}: {:?}", report.notes);
        assert!(report.counterexample.is_none());
    }
}
