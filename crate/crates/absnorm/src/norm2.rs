//! Absolute normalised norms on R^2.
//!
//! A norm F here always satisfies F(a, b) = F(|a|, |b|) and
//! F(1, 0) = F(0, 1) = 1. Consequences used throughout without further
//! comment: max(|a|,|b|) <= F(a,b) <= |a| + |b|, F is non-decreasing in each
//! absolute coordinate, and F is 1-Lipschitz in each coordinate separately.

use std::fmt;
use std::sync::Arc;

use crate::dual::DualTable;
use crate::verify::{Counterexample, VerificationReport, Verdict};

/// Default bracket width for boundary-curve bisection.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum NormError {
    #[error("p must satisfy 1 <= p (or be infinite), got {0}")]
    InvalidP(f64),
    #[error("bad polygon: {0}")]
    BadPolygon(String),
}

/// An absolute normalised norm on R^2.
///
/// `Polygonal` stores the vertices of the first-quadrant arc of the unit
/// sphere, listed with strictly increasing angle, starting at (1, 0) and
/// ending at (0, 1). `Swapped` evaluates the inner norm with the coordinates
/// exchanged. `DualNumeric` evaluates a numerically tabulated dual norm.
#[derive(Clone)]
pub enum AbsoluteNorm {
    PNorm { p: f64 },
    Polygonal { vertices: Vec<[f64; 2]> },
    Swapped { inner: Box<AbsoluteNorm> },
    DualNumeric { table: Arc<DualTable> },
}

fn cross(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

impl AbsoluteNorm {
    /// The p-norm on R^2; `p = f64::INFINITY` is the max norm, stored exactly.
    pub fn p_norm(p: f64) -> Result<Self, NormError> {
        if p.is_nan() || p < 1.0 {
            return Err(NormError::InvalidP(p));
        }
        Ok(AbsoluteNorm::PNorm { p })
    }

    /// Gauge of the symmetric polygon with the given first-quadrant arc.
    ///
    /// Structural requirements checked here: endpoints (1,0) and (0,1),
    /// non-negative coordinates, non-increasing first coordinate, strictly
    /// increasing angles. Convexity is deliberately not required; `validate`
    /// detects non-convex chains via the sandwich and midpoint checks.
    pub fn polygonal(vertices: Vec<[f64; 2]>) -> Result<Self, NormError> {
        if vertices.len() < 2 {
            return Err(NormError::BadPolygon("need at least two vertices".into()));
        }
        let first = vertices[0];
        let last = vertices[vertices.len() - 1];
        if (first[0] - 1.0).abs() > 1e-12 || first[1].abs() > 1e-12 {
            return Err(NormError::BadPolygon(format!(
                "first vertex must be (1, 0), got ({}, {})",
                first[0], first[1]
            )));
        }
        if last[0].abs() > 1e-12 || (last[1] - 1.0).abs() > 1e-12 {
            return Err(NormError::BadPolygon(format!(
                "last vertex must be (0, 1), got ({}, {})",
                last[0], last[1]
            )));
        }
        for w in vertices.windows(2) {
            let (v, u) = (w[0], w[1]);
            if u[0] < -1e-15 || u[1] < -1e-15 || v[0] < -1e-15 || v[1] < -1e-15 {
                return Err(NormError::BadPolygon("negative coordinate".into()));
            }
            if u[0] > v[0] + 1e-12 {
                return Err(NormError::BadPolygon(format!(
                    "first coordinates must be non-increasing, got {} after {}",
                    u[0], v[0]
                )));
            }
            if cross(v, u) <= 1e-12 {
                return Err(NormError::BadPolygon(format!(
                    "vertex angles must strictly increase, offending pair ({}, {}) -> ({}, {})",
                    v[0], v[1], u[0], u[1]
                )));
            }
        }
        Ok(AbsoluteNorm::Polygonal { vertices })
    }

    /// The norm (a, b) -> F(b, a). Applying `swap` twice returns the original
    /// representation, so round-trips are exact.
    pub fn swap(&self) -> Self {
        match self {
            AbsoluteNorm::Swapped { inner } => (**inner).clone(),
            other => AbsoluteNorm::Swapped {
                inner: Box::new(other.clone()),
            },
        }
    }

    /// First-quadrant sphere arc when this norm is an explicit polygon
    /// (directly or under `swap`). Numeric representations return None.
    pub fn as_polygon(&self) -> Option<Vec<[f64; 2]>> {
        match self {
            AbsoluteNorm::Polygonal { vertices } => Some(vertices.clone()),
            AbsoluteNorm::Swapped { inner } => inner.as_polygon().map(|vs| {
                let mut out: Vec<[f64; 2]> = vs.into_iter().map(|v| [v[1], v[0]]).collect();
                out.reverse();
                out
            }),
            _ => None,
        }
    }

    /// Norm value at (a, b).
    pub fn evaluate(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.abs(), b.abs());
        // Axis shortcuts keep F(x, 0) = |x| exact; direct-sum norms rely on it.
        if b == 0.0 {
            return a;
        }
        if a == 0.0 {
            return b;
        }
        match self {
            AbsoluteNorm::PNorm { p } => {
                if p.is_infinite() {
                    a.max(b)
                } else if *p == 1.0 {
                    a + b
                } else if *p == 2.0 {
                    (a * a + b * b).sqrt()
                } else {
                    // Scale by the max so powf stays in [0, 1]; keeps the
                    // evaluation stable and exactly 1-homogeneous up to one
                    // rounding of the final product.
                    let m = a.max(b);
                    m * ((a / m).powf(*p) + (b / m).powf(*p)).powf(1.0 / *p)
                }
            }
            AbsoluteNorm::Polygonal { vertices } => polygon_gauge(vertices, a, b),
            AbsoluteNorm::Swapped { inner } => inner.evaluate(b, a),
            AbsoluteNorm::DualNumeric { table } => table.evaluate(a, b),
        }
    }

    /// Height f(t) of the unit-sphere boundary curve: for |t| < 1 the unique
    /// f(t) in (0, 1] with F(t, f(t)) = 1, and at |t| = 1 the largest b with
    /// F(1, b) <= 1 (0 when the sphere touches the axis only at (1, 0)).
    ///
    /// Bisection halts when the bracket is narrower than `tol`; since F is
    /// 1-Lipschitz in b, the returned midpoint satisfies |F(t, f) - 1| <= tol.
    pub fn boundary(&self, t: f64, tol: f64) -> f64 {
        assert!(tol > 0.0, "tolerance must be positive");
        let t = t.abs();
        assert!(t <= 1.0 + 1e-9, "|t| must not exceed 1, got {t}");
        let t = t.min(1.0);
        if t < 1.0 {
            // F(t, 0) = t < 1 <= F(t, 1): the root is bracketed by [0, 1].
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if self.evaluate(t, mid) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        } else {
            // Endpoint: sup of the exact predicate F(1, b) <= 1. Bisection on
            // a predicate needs no Lipschitz argument; return the inner point.
            if self.evaluate(1.0, 1.0) <= 1.0 {
                return 1.0;
            }
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if self.evaluate(1.0, mid) <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }
}

/// Gauge of the symmetric polygon: locate the angular sector of (a, b) by
/// binary search on cross-product signs, then evaluate the supporting
/// functional of that edge. Exact on the axes and at the vertices.
fn polygon_gauge(vertices: &[[f64; 2]], a: f64, b: f64) -> f64 {
    let p = [a, b];
    // Vertices have strictly increasing angles; cross(v, p) > 0 exactly while
    // angle(v) < angle(p), so the predicate is monotone along the list.
    let k = vertices.partition_point(|v| cross(*v, p) > 0.0);
    let i = k.saturating_sub(1).min(vertices.len() - 2);
    let (v, w) = (vertices[i], vertices[i + 1]);
    // n is the outward edge normal scaled so that <n, v> = <n, w> = cross(v, w),
    // which is positive by the constructor invariant.
    let n = [w[1] - v[1], v[0] - w[0]];
    (n[0] * p[0] + n[1] * p[1]) / cross(v, w)
}

impl fmt::Display for AbsoluteNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsoluteNorm::PNorm { p } => {
                if p.is_infinite() {
                    write!(f, "p(inf)")
                } else {
                    write!(f, "p({p})")
                }
            }
            AbsoluteNorm::Polygonal { vertices } => {
                write!(f, "polygon[")?;
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({},{})", v[0], v[1])?;
                }
                write!(f, "]")
            }
            AbsoluteNorm::Swapped { inner } => write!(f, "swap({inner})"),
            AbsoluteNorm::DualNumeric { table } => {
                write!(f, "dual({},{})", table.inner(), table.resolution())
            }
        }
    }
}

impl fmt::Debug for AbsoluteNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Sampled boundary curve on t in [-1, 1].
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundaryCurve {
    /// (t, f(t)) pairs at n+1 evenly spaced t.
    pub samples: Vec<(f64, f64)>,
    pub tolerance: f64,
}

/// Sample the boundary curve at n+1 evenly spaced points of [-1, 1].
pub fn boundary_curve(f: &AbsoluteNorm, n: usize, tol: f64) -> BoundaryCurve {
    assert!(n >= 1);
    let samples = (0..=n)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            (t, f.boundary(t, tol))
        })
        .collect();
    BoundaryCurve {
        samples,
        tolerance: tol,
    }
}

/// Grid audit of the structural facts every absolute normalised norm must
/// satisfy: normalisation at the axis points, the max/sum sandwich,
/// coordinatewise monotonicity, and midpoint convexity. Returns a failing
/// report with the offending sample instead of panicking, so intentionally
/// broken inputs (non-convex polygon chains) can be exercised.
pub fn validate(f: &AbsoluteNorm, resolution: usize) -> VerificationReport {
    let res = resolution.max(8);
    let span = 1.5_f64; // audit beyond the unit ball to exercise homogeneity
    let g = |i: usize| span * i as f64 / res as f64;
    let mut samples: u64 = 0;
    let mut worst = f64::INFINITY;
    let mut counterexample: Option<Counterexample> = None;
    let mut notes = Vec::new();

    let record = |margin: f64,
                      what: &str,
                      coords: Vec<f64>,
                      values: Vec<(String, f64)>,
                      worst: &mut f64,
                      counterexample: &mut Option<Counterexample>,
                      notes: &mut Vec<String>| {
        if margin < *worst {
            *worst = margin;
            if margin < 0.0 {
                *counterexample = Some(Counterexample { coords, values });
                if notes.is_empty() {
                    notes.push(format!("violated: {what}"));
                } else {
                    notes[0] = format!("violated: {what}");
                }
            }
        }
    };

    // Normalisation.
    for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
        samples += 1;
        let v = f.evaluate(a, b);
        record(
            1e-9 - (v - 1.0).abs(),
            "axis normalisation F(1,0) = F(0,1) = 1",
            vec![a, b],
            vec![("F".into(), v)],
            &mut worst,
            &mut counterexample,
            &mut notes,
        );
    }

    // Sandwich max <= F <= sum, with a small slack for rounding.
    for i in 0..=res {
        for j in 0..=res {
            let (a, b) = (g(i), g(j));
            samples += 1;
            let v = f.evaluate(a, b);
            let lo = a.max(b);
            let hi = a + b;
            let m = (v - lo + 1e-9).min(hi - v + 1e-9);
            record(
                m,
                "sandwich max <= F <= sum",
                vec![a, b],
                vec![("F".into(), v), ("max".into(), lo), ("sum".into(), hi)],
                &mut worst,
                &mut counterexample,
                &mut notes,
            );
        }
    }

    // Coordinatewise monotonicity on adjacent grid nodes (adjacent pairs
    // generate all comparisons by transitivity).
    for i in 0..res {
        for j in 0..=res {
            let (a0, a1, b) = (g(i), g(i + 1), g(j));
            samples += 2;
            let m1 = f.evaluate(a1, b) - f.evaluate(a0, b) + 1e-12;
            let m2 = f.evaluate(b, a1) - f.evaluate(b, a0) + 1e-12;
            record(
                m1.min(m2),
                "monotone in each coordinate",
                vec![a0, a1, b],
                vec![
                    ("F(lo,b)".into(), f.evaluate(a0, b)),
                    ("F(hi,b)".into(), f.evaluate(a1, b)),
                ],
                &mut worst,
                &mut counterexample,
                &mut notes,
            );
        }
    }

    // Midpoint convexity on a coarse subgrid; O(res^2) pairs would be too
    // many, and a dent wide enough to matter shows up at this scale.
    let step = (res / 12).max(1);
    let coarse: Vec<f64> = (0..=res).step_by(step).map(g).collect();
    let pts: Vec<[f64; 2]> = coarse
        .iter()
        .flat_map(|&a| coarse.iter().map(move |&b| [a, b]))
        .collect();
    for (idx, x) in pts.iter().enumerate() {
        for y in &pts[idx + 1..] {
            samples += 1;
            let mid = f.evaluate(0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]));
            let avg = 0.5 * (f.evaluate(x[0], x[1]) + f.evaluate(y[0], y[1]));
            record(
                avg - mid + 1e-9,
                "midpoint convexity",
                vec![x[0], x[1], y[0], y[1]],
                vec![("F(mid)".into(), mid), ("avg".into(), avg)],
                &mut worst,
                &mut counterexample,
                &mut notes,
            );
        }
    }

    let verdict = if counterexample.is_some() {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    VerificationReport {
        claim_id: "norm-structure".into(),
        instance: f.to_string(),
        samples,
        worst_margin: worst,
        verdict,
        counterexample,
        notes,
    }
}
