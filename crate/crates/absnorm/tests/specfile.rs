use absnorm::specfile::{NormSpec, SpaceSpec, SpecError};
use absnorm::space::SpaceError;
use approx::assert_abs_diff_eq;
use serde_json::json;

#[test]
fn norm_specs_parse_and_build() {
    let two: NormSpec = serde_json::from_value(json!({"type": "p", "p": 2})).unwrap();
    assert_eq!(two.to_norm().unwrap().evaluate(3.0, 4.0), 5.0);

    let max: NormSpec = serde_json::from_value(json!({"type": "p", "p": "inf"})).unwrap();
    assert_eq!(max.to_norm().unwrap().evaluate(3.0, 4.0), 4.0);

    let polygon: NormSpec = serde_json::from_value(json!({
        "type": "polygon",
        "vertices": [[1.0, 0.0], [0.5, 0.75], [0.0, 1.0]],
    }))
    .unwrap();
    assert_abs_diff_eq!(
        polygon.to_norm().unwrap().evaluate(1.0, 1.0),
        5.0 / 3.0,
        epsilon = 1e-15
    );

    let swapped: NormSpec = serde_json::from_value(json!({
        "type": "swap",
        "inner": {"type": "polygon", "vertices": [[1.0, 0.0], [0.5, 0.75], [0.0, 1.0]]},
    }))
    .unwrap();
    assert_abs_diff_eq!(
        swapped.to_norm().unwrap().evaluate(0.5, 1.0),
        4.0 / 3.0,
        epsilon = 1e-15
    );
}

#[test]
fn dual_spec_defaults_its_resolution() {
    // No "resolution" key: the default must kick in and the polygon path
    // still produces the exact dual arc.
    let spec: NormSpec = serde_json::from_value(json!({
        "type": "dual",
        "inner": {"type": "polygon", "vertices": [[1.0, 0.0], [0.5, 0.75], [0.0, 1.0]]},
    }))
    .unwrap();
    let dual = spec.to_norm().unwrap();
    assert_abs_diff_eq!(dual.evaluate(1.0, 2.0 / 3.0), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(dual.evaluate(0.5, 1.0), 1.0, epsilon = 1e-12);

    let coarse: NormSpec = serde_json::from_value(json!({
        "type": "dual",
        "inner": {"type": "p", "p": 2},
        "resolution": 4,
    }))
    .unwrap();
    assert!(matches!(
        coarse.to_norm(),
        Err(SpecError::DualResolution(4))
    ));
}

#[test]
fn norm_spec_errors_surface() {
    let word: NormSpec = serde_json::from_value(json!({"type": "p", "p": "two"})).unwrap();
    assert!(matches!(word.to_norm(), Err(SpecError::BadP(w)) if w == "two"));

    let small: NormSpec = serde_json::from_value(json!({"type": "p", "p": 0.5})).unwrap();
    assert!(matches!(small.to_norm(), Err(SpecError::Norm(_))));

    assert!(serde_json::from_value::<NormSpec>(json!({"type": "frob"})).is_err());
}

#[test]
fn space_specs_parse_and_build() {
    let cube: SpaceSpec =
        serde_json::from_value(json!({"type": "p", "p": "inf", "dim": 3})).unwrap();
    assert_eq!(cube.to_space().unwrap().norm(&[1.0, -2.0, 0.5]), 2.0);

    let poly: SpaceSpec = serde_json::from_value(json!({
        "type": "polyhedral",
        "functionals": [[1.0, 0.0], [0.0, 1.0], [0.7, 0.7]],
    }))
    .unwrap();
    assert_abs_diff_eq!(poly.to_space().unwrap().norm(&[1.0, 1.0]), 1.4, epsilon = 1e-15);

    let sum: SpaceSpec = serde_json::from_value(json!({
        "type": "fsum",
        "left": {"type": "p", "p": 1, "dim": 1},
        "right": {"type": "p", "p": 1, "dim": 1},
        "F": {"type": "p", "p": 2},
    }))
    .unwrap();
    assert_abs_diff_eq!(sum.to_space().unwrap().norm(&[3.0, -4.0]), 5.0, epsilon = 1e-15);
}

#[test]
fn space_spec_errors_surface() {
    let flat: SpaceSpec = serde_json::from_value(json!({
        "type": "polyhedral",
        "functionals": [[1.0, 1.0], [2.0, 2.0]],
    }))
    .unwrap();
    assert!(matches!(
        flat.to_space(),
        Err(SpecError::Space(SpaceError::RankDeficient { rank: 1, dim: 2 }))
    ));

    let bad_p: SpaceSpec =
        serde_json::from_value(json!({"type": "p", "p": 0.0, "dim": 2})).unwrap();
    assert!(matches!(bad_p.to_space(), Err(SpecError::Space(_))));
}

#[test]
fn helper_constructors_round_trip() {
    let inf = NormSpec::p(f64::INFINITY);
    assert_eq!(
        serde_json::to_value(&inf).unwrap(),
        json!({"type": "p", "p": "inf"})
    );
    let back: NormSpec = serde_json::from_value(serde_json::to_value(&inf).unwrap()).unwrap();
    assert_eq!(back.to_norm().unwrap().evaluate(0.3, 0.8), 0.8);

    let plane = SpaceSpec::p(2.0, 2);
    let val = serde_json::to_value(&plane).unwrap();
    assert_eq!(val, json!({"type": "p", "p": 2.0, "dim": 2}));
    let parsed: SpaceSpec = serde_json::from_value(val).unwrap();
    assert_eq!(parsed.to_space().unwrap().norm(&[3.0, 4.0]), 5.0);
}
