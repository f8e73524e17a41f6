//! Quantities attached to a single absolute normalised norm: extreme-norm
//! classification, the octahedrality threshold r_F, strict-convexity probes,
//! and the certified squareness moduli used by the direct-sum checks.

use serde::Serialize;

use crate::norm2::AbsoluteNorm;
use crate::par;
use crate::EQ_TAU;

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("the max norm is excluded for this operation")]
    InfinityNormExcluded,
    #[error("refinement cap reached without certifying a positive modulus")]
    ResolutionExhausted,
    #[error(
        "F(1,1) matches an extreme value but the norm deviates from that extreme \
         norm by {deviation} at ({a}, {b})"
    )]
    Inconsistent { a: f64, b: f64, deviation: f64 },
}

/// Outcome of testing F against the two extreme absolute norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExtremeClass {
    #[serde(rename = "InfinityNorm")]
    IsInfinityNorm,
    #[serde(rename = "OneNorm")]
    IsOneNorm,
    Neither,
}

/// Classify by the value at (1, 1), which pins the extremes: F(1,1) = 1 only
/// for the max norm and F(1,1) = 2 only for the sum norm. A grid cross-check
/// guards against inputs that hit the extreme value at (1, 1) without being
/// that norm (possible for non-convex chains); such inputs are rejected as
/// `Inconsistent` rather than misclassified.
pub fn classify_extremes(
    f: &AbsoluteNorm,
    resolution: usize,
) -> Result<ExtremeClass, GeomError> {
    let f11 = f.evaluate(1.0, 1.0);
    let target: Option<(f64, fn(f64, f64) -> f64)> = if (f11 - 1.0).abs() <= EQ_TAU {
        Some((1.0, |a, b| a.max(b)))
    } else if (f11 - 2.0).abs() <= EQ_TAU {
        Some((2.0, |a, b| a + b))
    } else {
        None
    };
    let Some((value, reference)) = target else {
        return Ok(ExtremeClass::Neither);
    };
    let res = resolution.max(16);
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..=res {
        for j in 0..=res {
            let (a, b) = (1.5 * i as f64 / res as f64, 1.5 * j as f64 / res as f64);
            let dev = (f.evaluate(a, b) - reference(a, b)).abs();
            if dev > worst.0 {
                worst = (dev, a, b);
            }
        }
    }
    if worst.0 > 1e-6 {
        return Err(GeomError::Inconsistent {
            a: worst.1,
            b: worst.2,
            deviation: worst.0,
        });
    }
    Ok(if value == 1.0 {
        ExtremeClass::IsInfinityNorm
    } else {
        ExtremeClass::IsOneNorm
    })
}

fn cross(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Exact octahedrality threshold for explicit polygons: walk the maximal run
/// of initial vertices collinear with the edge leaving (1, 0); the threshold
/// is the first coordinate of the far endpoint of that run. A sphere with no
/// flat piece at (1, 0) (the sum-norm polygon has its flat piece elsewhere)
/// yields the second vertex, whose first coordinate is the correct value only
/// when the run is genuinely flat; for the two-vertex polygon the single edge
/// is the flat piece through (1, 0) itself and the far endpoint is (0, 1),
/// giving 0.
fn r_of_polygon(vertices: &[[f64; 2]]) -> f64 {
    let v0 = vertices[0];
    let v1 = vertices[1];
    let dir = [v1[0] - v0[0], v1[1] - v0[1]];
    let mut far = v1;
    for v in &vertices[2..] {
        let rel = [v[0] - v0[0], v[1] - v0[1]];
        if cross(dir, rel).abs() <= 1e-12 {
            far = *v;
        } else {
            break;
        }
    }
    // The run starting at (1, 0) is flat only if the edge is not tangent to
    // the axis; the edge leaving (1, 0) always has positive angle by the
    // constructor invariant, so its far endpoint's first coordinate is the
    // infimum of first coordinates still connected to (1, 0) by a sphere
    // segment, which is exactly the threshold.
    far[0]
}

/// Octahedrality threshold r_F: the smallest a in [0, 1] such that
/// F(a + 1, f(a)) = 2, where f is the boundary curve. Polygons are resolved
/// exactly from their vertex data; all other representations go through
/// predicate bisection (`r_of_bisection`).
pub fn r_of(f: &AbsoluteNorm, tol: f64) -> f64 {
    if let Some(vs) = f.as_polygon() {
        return r_of_polygon(&vs);
    }
    r_of_bisection(f, tol)
}

/// Generic path for the octahedrality threshold, exposed so the exact
/// polygonal path can be cross-checked against it.
///
/// The predicate "F(a + 1, f(a)) >= 2 - tau" with tau = tol/10 is monotone in
/// a (the defect 2 - F(a+1, f(a)) is non-increasing) and true at a = 1, where
/// F(2, f(1)) = 2 holds for every absolute normalised norm. The relaxation tau
/// shifts the located edge by at most a few tau for norms whose defect decays
/// at unit-order rate, which together with the tol/2 bracket keeps the result
/// within tol of the true threshold.
pub fn r_of_bisection(f: &AbsoluteNorm, tol: f64) -> f64 {
    assert!(tol > 0.0);
    let tau = tol / 10.0;
    let f_tol = tol / 100.0;
    let qualifies = |a: f64| f.evaluate(a + 1.0, f.boundary(a, f_tol)) >= 2.0 - tau;
    if qualifies(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol / 2.0 {
        let mid = 0.5 * (lo + hi);
        if qualifies(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Whether `point` (normalised onto the sphere internally) is a strict
/// convexity point: no other sphere point y has F(point + y) = 2. The scan
/// walks an angular grid of the sphere arc, flips signs to cover all four
/// quadrants, and skips a 2-mesh neighbourhood of the point itself, where the
/// defect vanishes quadratically and equality is never certified.
pub fn is_sc_point(f: &AbsoluteNorm, point: [f64; 2], resolution: usize) -> bool {
    let scale = f.evaluate(point[0], point[1]);
    assert!(scale > 0.0, "cannot normalise the origin");
    let p = [point[0] / scale, point[1] / scale];
    let res = resolution.max(64);
    let pts: Vec<[f64; 2]> = (0..=res)
        .map(|j| {
            let th = std::f64::consts::FRAC_PI_2 * j as f64 / res as f64;
            let d = [th.cos(), th.sin()];
            let s = f.evaluate(d[0], d[1]);
            [d[0] / s, d[1] / s]
        })
        .collect();
    let mesh = pts
        .windows(2)
        .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
        .fold(0.0_f64, f64::max);
    let skip = 2.0 * mesh;
    for y in &pts {
        for (s0, s1) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let yy = [s0 * y[0], s1 * y[1]];
            let d = ((yy[0] - p[0]).powi(2) + (yy[1] - p[1]).powi(2)).sqrt();
            if d <= skip {
                continue;
            }
            if f.evaluate(p[0] + yy[0], p[1] + yy[1]) >= 2.0 - EQ_TAU {
                return false;
            }
        }
    }
    true
}

/// Certified lower squareness modulus: a delta > 0 such that any sphere point
/// (a, b) with F(a, 1) <= 1 + delta must have b >= 1 - eps.
///
/// Soundness of the grid certificate: f is non-increasing, so any a with
/// f(a) < 1 - eps has a right grid neighbour a_i that also qualifies, and
/// F(a, 1) >= F(a_i, 1) - h >= 1 + 2 delta - h by the 1-Lipschitz bound.
/// The returned delta is accepted only once h <= delta / 2, which leaves
/// F(a, 1) >= 1 + 1.5 delta > 1 + delta for every qualifying a.
pub fn lasq2_modulus(
    f: &AbsoluteNorm,
    eps: f64,
    resolution: usize,
) -> Result<f64, GeomError> {
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    if classify_extremes(f, 64)? == ExtremeClass::IsInfinityNorm {
        return Err(GeomError::InfinityNormExcluded);
    }
    const F_TOL: f64 = 1e-9;
    // If even f(1) >= 1 - eps then no sphere point has second coordinate
    // below 1 - eps and the implication holds vacuously for every delta;
    // report the natural one coming from the corner value.
    if f.boundary(1.0, F_TOL) >= 1.0 - eps {
        return Ok(0.5 * (f.evaluate(1.0, 1.0) - 1.0));
    }
    let mut res = resolution.max(16);
    loop {
        let delta = par::map_reduce(
            res + 1,
            f64::INFINITY,
            |i| {
                let a = i as f64 / res as f64;
                // Inclusive margin: borderline nodes only shrink delta, never
                // hide a qualifying point.
                if f.boundary(a, F_TOL) < 1.0 - eps + 1e-9 {
                    0.5 * (f.evaluate(a, 1.0) - 1.0)
                } else {
                    f64::INFINITY
                }
            },
            f64::min,
        );
        // a = 1 always qualifies here because the vacuous case returned above.
        assert!(delta.is_finite());
        if 1.0 / res as f64 <= delta / 2.0 {
            return Ok(delta);
        }
        if res >= 1 << 23 {
            return Err(GeomError::ResolutionExhausted);
        }
        res *= 2;
    }
}

/// Certified modulus for the region below the octahedrality threshold: a
/// delta > 0 with F(c, f(a)) <= 2 - delta whenever c <= min(1 + a, 1 + r_F - eps).
///
/// On each grid cell [a_i, a_{i+1}] the supremum of F(c, f(a)) over the region
/// is bounded by F(min(1 + a_{i+1}, c_max), f(a_i) + f_tol) using monotonicity
/// of F in both coordinates and monotonicity of f; the bracket therefore
/// covers every admissible (a, c), not just grid samples.
pub fn loh3_modulus(
    f: &AbsoluteNorm,
    eps: f64,
    resolution: usize,
) -> Result<f64, GeomError> {
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    const F_TOL: f64 = 1e-9;
    let r_hi = (r_of(f, 1e-7) + 1e-7).min(1.0);
    let c_max = 1.0 + r_hi - eps;
    let mut res = resolution.max(64);
    loop {
        let bracket = par::map_reduce(
            res,
            0.0_f64,
            |i| {
                let a_lo = i as f64 / res as f64;
                let a_hi = (i + 1) as f64 / res as f64;
                let fa = (f.boundary(a_lo, F_TOL) + F_TOL).min(1.0);
                f.evaluate((1.0 + a_hi).min(c_max), fa)
            },
            f64::max,
        );
        let delta = 2.0 - bracket;
        if delta > 1e-9 {
            return Ok(delta);
        }
        if res >= 1 << 22 {
            return Err(GeomError::ResolutionExhausted);
        }
        res *= 2;
    }
}

/// Search for a sphere point (c, d) with F(c + 1, d) = F(c, d + 1) = 2. Such a
/// point certifies the strongest octahedrality behaviour; absence at this
/// resolution is reported as None and is not a certificate of non-existence.
pub fn positive_octahedrality(
    f: &AbsoluteNorm,
    resolution: usize,
) -> Option<(f64, f64)> {
    let res = resolution.max(64);
    let mut candidates: Vec<[f64; 2]> = Vec::with_capacity(res + 8);
    for j in 0..=res {
        let th = std::f64::consts::FRAC_PI_2 * j as f64 / res as f64;
        candidates.push([th.cos(), th.sin()]);
    }
    // The corners of the extreme norms must be hit exactly, not through trig.
    candidates.push([1.0, 0.0]);
    candidates.push([0.0, 1.0]);
    candidates.push([1.0, 1.0]);
    if let Some(vs) = f.as_polygon() {
        candidates.extend(vs);
    }
    let mut best: Option<(f64, (f64, f64))> = None;
    for dir in candidates {
        let s = f.evaluate(dir[0], dir[1]);
        if s <= 0.0 {
            continue;
        }
        let (c, d) = (dir[0] / s, dir[1] / s);
        let residual = (f.evaluate(c + 1.0, d) - 2.0)
            .abs()
            .max((f.evaluate(c, d + 1.0) - 2.0).abs());
        if best.map_or(true, |(r, _)| residual < r) {
            best = Some((residual, (c, d)));
        }
    }
    match best {
        Some((r, w)) if r <= EQ_TAU => Some(w),
        _ => None,
    }
}

/// Obstruction to almost-squareness derived from the value at (1, 1): with
/// eps = (1 - 1/F(1,1)) / 2, the smaller of the two lower squareness moduli
/// (for F and its swap) bounds how far any candidate square configuration
/// must push some norm above 1. Excluded for the max norm, where F(1,1) = 1.
pub fn asq_obstruction(f: &AbsoluteNorm) -> Result<f64, GeomError> {
    if classify_extremes(f, 64)? == ExtremeClass::IsInfinityNorm {
        return Err(GeomError::InfinityNormExcluded);
    }
    let f11 = f.evaluate(1.0, 1.0);
    let eps = 0.5 * (1.0 - 1.0 / f11);
    let d1 = lasq2_modulus(f, eps, 4096)?;
    let d2 = lasq2_modulus(&f.swap(), eps, 4096)?;
    Ok(d1.min(d2))
}

/// Summary of the scalar geometry of one norm.
#[derive(Clone, Debug, Serialize)]
pub struct NormProfile {
    #[serde(rename = "F11")]
    pub f11: f64,
    #[serde(rename = "rF")]
    pub r_f: f64,
    #[serde(rename = "rF_swapped")]
    pub r_f_swapped: f64,
    pub sc_at_10: bool,
    pub sc_at_01: bool,
    pub f_at_1: f64,
    /// Witness of the two-sided equality F(c+1, d) = F(c, d+1) = 2 if one was
    /// found at this resolution.
    pub po_witness: Option<(f64, f64)>,
    pub tolerance: f64,
}

pub fn norm_profile(f: &AbsoluteNorm, tol: f64, resolution: usize) -> NormProfile {
    NormProfile {
        f11: f.evaluate(1.0, 1.0),
        r_f: r_of(f, tol),
        r_f_swapped: r_of(&f.swap(), tol),
        sc_at_10: is_sc_point(f, [1.0, 0.0], resolution),
        sc_at_01: is_sc_point(f, [0.0, 1.0], resolution),
        f_at_1: f.boundary(1.0, DEFAULT_PROFILE_F_TOL),
        po_witness: positive_octahedrality(f, resolution),
        tolerance: tol,
    }
}

const DEFAULT_PROFILE_F_TOL: f64 = 1e-9;
