use absnorm::norm2::{boundary_curve, validate, AbsoluteNorm, NormError};
use absnorm::verify::Verdict;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn p1() -> AbsoluteNorm {
    AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.5, 0.75], [0.0, 1.0]]).unwrap()
}

fn dented_chain() -> AbsoluteNorm {
    // Passes the constructor (angles strictly increase) but is not convex,
    // hence not a norm; validate() must catch it.
    AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.5, 0.5], [0.4, 0.9], [0.0, 1.0]]).unwrap()
}

#[test]
fn p_norm_closed_forms() {
    let l1 = AbsoluteNorm::p_norm(1.0).unwrap();
    let l2 = AbsoluteNorm::p_norm(2.0).unwrap();
    let li = AbsoluteNorm::p_norm(f64::INFINITY).unwrap();
    assert_eq!(l1.evaluate(3.0, -4.0), 7.0);
    assert_eq!(l2.evaluate(3.0, 4.0), 5.0);
    assert_eq!(li.evaluate(3.0, -4.0), 4.0);
    let l3 = AbsoluteNorm::p_norm(3.0).unwrap();
    assert_abs_diff_eq!(l3.evaluate(1.0, 1.0), 2f64.powf(1.0 / 3.0), epsilon = 1e-15);
    // Axis values are exact for every representation.
    for f in [&l1, &l2, &l3, &li, &p1()] {
        assert_eq!(f.evaluate(0.7, 0.0), 0.7);
        assert_eq!(f.evaluate(0.0, -0.7), 0.7);
        assert_eq!(f.evaluate(0.0, 0.0), 0.0);
    }
}

#[test]
fn p_norm_rejects_bad_exponents() {
    assert!(matches!(
        AbsoluteNorm::p_norm(0.5),
        Err(NormError::InvalidP(_))
    ));
    assert!(matches!(
        AbsoluteNorm::p_norm(f64::NAN),
        Err(NormError::InvalidP(_))
    ));
    assert!(AbsoluteNorm::p_norm(1.0).is_ok());
    assert!(AbsoluteNorm::p_norm(f64::INFINITY).is_ok());
}

#[test]
fn polygon_constructor_invariants() {
    // Wrong endpoints.
    assert!(AbsoluteNorm::polygonal(vec![[0.9, 0.0], [0.0, 1.0]]).is_err());
    assert!(AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.0, 0.9]]).is_err());
    // Too short.
    assert!(AbsoluteNorm::polygonal(vec![[1.0, 0.0]]).is_err());
    // First coordinate increases.
    assert!(
        AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.5, 0.5], [0.6, 0.9], [0.0, 1.0]]).is_err()
    );
    // Angle fails to increase (collinear with the origin).
    assert!(
        AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.6, 0.6], [0.3, 0.3], [0.0, 1.0]]).is_err()
    );
    // Negative coordinate.
    assert!(AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.5, -0.2], [0.0, 1.0]]).is_err());
    assert!(AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.0, 1.0]]).is_ok());
}

#[test]
fn polygon_gauge_values() {
    let f = p1();
    // Vertices and axes sit exactly on the sphere.
    assert_eq!(f.evaluate(1.0, 0.0), 1.0);
    assert_eq!(f.evaluate(0.5, 0.75), 1.0);
    assert_eq!(f.evaluate(0.0, 1.0), 1.0);
    // The diagonal crosses the first edge at (0.6, 0.6).
    assert_abs_diff_eq!(f.evaluate(1.0, 1.0), 5.0 / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(f.evaluate(0.6, 0.6), 1.0, epsilon = 1e-15);
    // Scaled vertex.
    assert_abs_diff_eq!(f.evaluate(1.0, 1.5), 2.0, epsilon = 1e-15);
    // Sum-norm polygon.
    let l1 = AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
    assert_abs_diff_eq!(l1.evaluate(0.3, 0.4), 0.7, epsilon = 1e-15);
    assert_eq!(l1.evaluate(1.0, 1.0), 2.0);
    // Max-norm polygon agrees with the max norm exactly.
    let li = AbsoluteNorm::polygonal(vec![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    for (a, b) in [(0.3, 0.9), (1.2, 0.4), (0.7, 0.7), (1.0, 1.0)] {
        assert_eq!(li.evaluate(a, b), a.max(b));
    }
}

#[test]
fn boundary_values() {
    let l2 = AbsoluteNorm::p_norm(2.0).unwrap();
    assert_abs_diff_eq!(l2.boundary(0.0, 1e-9), 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(l2.boundary(0.5, 1e-9), 0.75f64.sqrt(), epsilon = 1e-9);
    // At the endpoint the sphere touches the axis. The bisection's lower
    // bracket crawls up the plateau where 1 + b^2 still rounds to 1, so the
    // result is a tiny positive number rather than an exact zero.
    let end = l2.boundary(1.0, 1e-9);
    assert!((0.0..=2e-8).contains(&end), "f(1) = {end}");
    assert_eq!(l2.boundary(-1.0, 1e-9), end);

    let l1 = AbsoluteNorm::p_norm(1.0).unwrap();
    assert_abs_diff_eq!(l1.boundary(0.25, 1e-9), 0.75, epsilon = 5e-10);
    // For the sum norm the plateau is a single ulp wide.
    let end1 = l1.boundary(1.0, 1e-9);
    assert!((0.0..=1e-15).contains(&end1), "f(1) = {end1}");

    // The max norm has a vertical sphere segment at t = 1.
    let li = AbsoluteNorm::p_norm(f64::INFINITY).unwrap();
    assert_eq!(li.boundary(1.0, 1e-9), 1.0);
    assert_abs_diff_eq!(li.boundary(0.3, 1e-9), 1.0, epsilon = 1e-9);

    let f = p1();
    assert_abs_diff_eq!(f.boundary(0.75, 1e-9), 0.375, epsilon = 5e-10);
    assert_abs_diff_eq!(f.boundary(0.25, 1e-9), 0.875, epsilon = 5e-10);
    assert_abs_diff_eq!(f.boundary(0.5, 1e-9), 0.75, epsilon = 5e-10);
    // Evenness is structural (|t| is taken first).
    assert_eq!(f.boundary(-0.25, 1e-9), f.boundary(0.25, 1e-9));
}

#[test]
fn boundary_curve_grid() {
    let l2 = AbsoluteNorm::p_norm(2.0).unwrap();
    let curve = boundary_curve(&l2, 4, 1e-9);
    assert_eq!(curve.samples.len(), 5);
    // Endpoint heights carry the 1 + b^2 == 1 rounding plateau, so they get
    // a looser bound than the interior grid points.
    let expect = [0.0, 0.8660254037844386, 1.0, 0.8660254037844386, 0.0];
    for (k, &(t, v)) in curve.samples.iter().enumerate() {
        assert_abs_diff_eq!(t, -1.0 + 0.5 * k as f64, epsilon = 1e-15);
        let eps = if k == 0 || k == 4 { 2e-8 } else { 1e-9 };
        assert_abs_diff_eq!(v, expect[k], epsilon = eps);
    }
    assert_eq!(curve.tolerance, 1e-9);
}

#[test]
fn swap_round_trip_is_exact() {
    let f = p1();
    let s = f.swap();
    let ss = s.swap();
    for (a, b) in [(0.3, 0.9), (1.7, 0.2), (0.6, 0.6)] {
        assert_eq!(s.evaluate(a, b), f.evaluate(b, a));
        assert_eq!(ss.evaluate(a, b), f.evaluate(a, b));
    }
    // as_polygon mirrors and reverses the arc.
    let vs = s.as_polygon().unwrap();
    assert_eq!(vs, vec![[1.0, 0.0], [0.75, 0.5], [0.0, 1.0]]);
    assert!(AbsoluteNorm::p_norm(2.0).unwrap().as_polygon().is_none());
}

#[test]
fn validate_accepts_genuine_norms() {
    let cases = [
        AbsoluteNorm::p_norm(1.0).unwrap(),
        AbsoluteNorm::p_norm(1.5).unwrap(),
        AbsoluteNorm::p_norm(2.0).unwrap(),
        AbsoluteNorm::p_norm(f64::INFINITY).unwrap(),
        p1(),
        p1().swap(),
    ];
    for f in &cases {
        let report = validate(f, 64);
        assert_eq!(report.verdict, Verdict::Pass, "{f}: {:?}", report.notes);
        assert!(report.worst_margin >= 0.0);
        assert!(report.counterexample.is_none());
    }
}

#[test]
fn validate_rejects_dented_chain() {
    let report = validate(&dented_chain(), 64);
    assert_eq!(report.verdict, Verdict::Fail);
    assert!(report.worst_margin < 0.0);
    let ce = report.counterexample.expect("failing report carries a witness");
    assert!(!ce.coords.is_empty());
}

#[test]
fn display_forms() {
    assert_eq!(AbsoluteNorm::p_norm(2.0).unwrap().to_string(), "p(2)");
    assert_eq!(
        AbsoluteNorm::p_norm(f64::INFINITY).unwrap().to_string(),
        "p(inf)"
    );
    assert_eq!(
        p1().to_string(),
        "polygon[(1,0),(0.5,0.75),(0,1)]"
    );
    assert!(p1().swap().to_string().starts_with("swap("));
}

fn arb_norm() -> impl Strategy<Value = AbsoluteNorm> {
    prop_oneof![
        (1.0f64..8.0).prop_map(|p| AbsoluteNorm::p_norm(p).unwrap()),
        Just(AbsoluteNorm::p_norm(f64::INFINITY).unwrap()),
        Just(p1()),
        Just(p1().swap()),
        Just(AbsoluteNorm::polygonal(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap()),
    ]
}

proptest! {
    #[test]
    fn sandwich_between_max_and_sum(f in arb_norm(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let v = f.evaluate(a, b);
        prop_assert!(v >= a.max(b) - 1e-9 * (1.0 + a + b));
        prop_assert!(v <= a + b + 1e-9 * (1.0 + a + b));
    }

    #[test]
    fn evenness_is_exact(f in arb_norm(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        prop_assert_eq!(f.evaluate(a, b), f.evaluate(-a, b));
        prop_assert_eq!(f.evaluate(a, b), f.evaluate(a, -b));
        prop_assert_eq!(f.evaluate(a, b), f.evaluate(-a, -b));
    }

    #[test]
    fn positive_homogeneity(f in arb_norm(), a in 0.0f64..3.0, b in 0.0f64..3.0, lam in 0.01f64..10.0) {
        let lhs = f.evaluate(lam * a, lam * b);
        let rhs = lam * f.evaluate(a, b);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn monotone_and_lipschitz_per_coordinate(
        f in arb_norm(),
        a in 0.0f64..3.0,
        b in 0.0f64..3.0,
        d in 0.0f64..2.0,
    ) {
        let base = f.evaluate(a, b);
        let bumped = f.evaluate(a + d, b);
        prop_assert!(bumped >= base - 1e-12 * (1.0 + base));
        prop_assert!(bumped - base <= d + 1e-12 * (1.0 + bumped));
        let bumped_b = f.evaluate(a, b + d);
        prop_assert!(bumped_b >= base - 1e-12 * (1.0 + base));
        prop_assert!(bumped_b - base <= d + 1e-12 * (1.0 + bumped_b));
    }

    #[test]
    fn boundary_point_sits_on_sphere(f in arb_norm(), t in -0.999f64..0.999) {
        let v = f.boundary(t, 1e-9);
        prop_assert!((f.evaluate(t, v) - 1.0).abs() <= 1e-9);
    }
}
