//! Deterministic sphere covers with certified cover radii.
//!
//! A cover is a finite set of unit vectors (in the space norm) such that
//! every unit vector is within `radius` of some cover point, again in the
//! space norm. All certified scans in `space` and `bm` rest on this radius
//! plus a Lipschitz bound on the scanned quantity.
//!
//! Certification argument for the angular product grids (dims >= 3) and the
//! streamed circle (dim 2): write u(d) = d / ||d||_X for a euclidean unit
//! direction d. For two directions, ||u(a) - u(b)||_X <= 2 ||a - b||_X / ||a||_X.
//! The euclidean-to-X conversion uses E = sqrt(sum_i ||e_i||_X^2) (Cauchy-
//! Schwarz), and every direction lies within path length `de` of a grid node
//! because each angular coordinate moves the direction with speed at most 1.
//! With m_lo a lower bound for ||d||_X over all directions (grid minimum minus
//! E * de, since d -> ||d||_X is E-Lipschitz), the cover radius is
//! 2 * E * de / m_lo.
//!
//! For the listed dim-2 cover the sharper measured radius is used: if x is a
//! unit vector between adjacent cover points u_j, u_{j+1}, the segment
//! [u_j, u_{j+1}] meets the ray of x at a point q = t x with
//! ||q - nearer endpoint|| <= h/2 and |t - 1| = | ||q||_X - 1 | <= h/2 where
//! h = ||u_{j+1} - u_j||_X, so ||x - nearer endpoint||_X <= h.

use crate::space::{FiniteSpace, SpaceError};
use crate::par;

const PI: f64 = std::f64::consts::PI;

enum CoverKind {
    /// Explicit points, flattened row-major; dim 1 and moderate dim 2 covers.
    List { pts: Vec<f64>, dim: usize },
    /// Streamed circle, points computed per index; large dim-2 covers.
    Circle { n: usize },
    /// Angular product grid for dim >= 3: tables hold (sin, cos) per node for
    /// each of the dim-1 angles; the last angle runs over [0, 2 pi).
    Product { tables: Vec<Vec<(f64, f64)>> },
}

pub struct SphereCover {
    kind: CoverKind,
    len: usize,
    /// Certified cover radius in the space norm; infinite when uncertified
    /// (dimension above 4).
    radius: f64,
}

impl SphereCover {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn certified(&self) -> bool {
        self.radius.is_finite()
    }

    /// Write the idx-th cover point (unit in the space norm) into `out`.
    pub fn point_into(&self, space: &FiniteSpace, idx: usize, out: &mut Vec<f64>) {
        match &self.kind {
            CoverKind::List { pts, dim } => {
                out.clear();
                out.extend_from_slice(&pts[idx * dim..(idx + 1) * dim]);
            }
            CoverKind::Circle { n } => {
                let th = 2.0 * PI * idx as f64 / *n as f64;
                let (s, c) = th.sin_cos();
                let nm = space.norm(&[c, s]);
                out.clear();
                out.push(c / nm);
                out.push(s / nm);
            }
            CoverKind::Product { tables } => {
                direction_into(tables, idx, out);
                let nm = space.norm(out);
                for v in out.iter_mut() {
                    *v /= nm;
                }
            }
        }
    }

    pub fn point(&self, space: &FiniteSpace, idx: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(space.dim());
        self.point_into(space, idx, &mut out);
        out
    }

    /// Materialise all points as a flat row-major buffer. Quadratic scans use
    /// this; callers must keep the cover small enough for it to fit.
    pub fn materialize(&self, space: &FiniteSpace) -> Vec<f64> {
        let dim = space.dim();
        match &self.kind {
            CoverKind::List { pts, .. } => pts.clone(),
            _ => {
                let mut flat = vec![0.0; self.len * dim];
                let mut buf = Vec::with_capacity(dim);
                for idx in 0..self.len {
                    self.point_into(space, idx, &mut buf);
                    flat[idx * dim..(idx + 1) * dim].copy_from_slice(&buf);
                }
                flat
            }
        }
    }
}

/// Euclidean direction of the idx-th node of an angular product grid.
fn direction_into(tables: &[Vec<(f64, f64)>], idx: usize, out: &mut Vec<f64>) {
    let k = tables.len(); // number of angles = dim - 1
    out.clear();
    out.resize(k + 1, 0.0);
    let mut rest = idx;
    let mut sin_prod = 1.0;
    for (a, table) in tables.iter().enumerate() {
        let stride: usize = tables[a + 1..].iter().map(|t| t.len()).product();
        let node = rest / stride;
        rest %= stride;
        let (s, c) = table[node];
        out[a] = sin_prod * c;
        sin_prod *= s;
    }
    out[k] = sin_prod;
    let _ = rest;
}

fn basis_constant(space: &FiniteSpace) -> f64 {
    let dim = space.dim();
    let mut e = vec![0.0; dim];
    let mut sum = 0.0;
    for i in 0..dim {
        e[i] = 1.0;
        let n = space.norm(&e);
        sum += n * n;
        e[i] = 0.0;
    }
    sum.sqrt()
}

fn min_direction_norm(space: &FiniteSpace, cover: &SphereCover) -> f64 {
    // Minimum of ||d||_X over the *unnormalised* grid directions.
    match &cover.kind {
        CoverKind::Circle { n } => par::map_reduce(
            *n,
            f64::INFINITY,
            |j| {
                let th = 2.0 * PI * j as f64 / *n as f64;
                let (s, c) = th.sin_cos();
                space.norm(&[c, s])
            },
            f64::min,
        ),
        CoverKind::Product { tables } => {
            let tables = tables.clone();
            let space = space.clone();
            par::map_reduce(
                cover.len,
                f64::INFINITY,
                move |idx| {
                    let mut buf = Vec::new();
                    direction_into(&tables, idx, &mut buf);
                    space.norm(&buf)
                },
                f64::min,
            )
        }
        CoverKind::List { .. } => 1.0,
    }
}

/// Largest listed dim-2 cover; beyond this the streamed circle is used.
const LIST_LIMIT: usize = 1 << 20;

/// Build a deterministic cover of the unit sphere. The resolution is the
/// approximate number of points: exact for dim 2 (rounded up to a multiple of
/// 8 so the axis and diagonal directions are hit exactly), approximate for the
/// product grids. Dimensions above 4 yield an uncertified cover
/// (infinite radius); operations that need certification turn that into
/// `SpaceError::CertificationUnavailable`.
pub fn build_cover(space: &FiniteSpace, resolution: usize) -> Result<SphereCover, SpaceError> {
    let dim = space.dim();
    match dim {
        1 => Ok(SphereCover {
            kind: CoverKind::List {
                pts: vec![1.0, -1.0],
                dim: 1,
            },
            len: 2,
            radius: 0.0,
        }),
        2 => {
            let n = resolution.max(16).div_ceil(8) * 8;
            if n <= LIST_LIMIT {
                let mut pts = Vec::with_capacity(2 * n);
                for j in 0..n {
                    let th = 2.0 * PI * j as f64 / n as f64;
                    let (s, c) = th.sin_cos();
                    let nm = space.norm(&[c, s]);
                    pts.push(c / nm);
                    pts.push(s / nm);
                }
                let radius = par::map_reduce(
                    n,
                    0.0_f64,
                    |j| {
                        let k = (j + 1) % n;
                        let d = [pts[2 * j] - pts[2 * k], pts[2 * j + 1] - pts[2 * k + 1]];
                        space.norm(&d)
                    },
                    f64::max,
                );
                Ok(SphereCover {
                    kind: CoverKind::List { pts, dim: 2 },
                    len: n,
                    radius,
                })
            } else {
                let cover = SphereCover {
                    kind: CoverKind::Circle { n },
                    len: n,
                    radius: f64::INFINITY,
                };
                let e = basis_constant(space);
                let de = PI / n as f64; // half the angular step, speed 1
                let m_lo = min_direction_norm(space, &cover) - e * de;
                if m_lo <= 0.0 {
                    return Err(SpaceError::ResolutionTooCoarse);
                }
                Ok(SphereCover {
                    radius: 2.0 * e * de / m_lo,
                    ..cover
                })
            }
        }
        _ => {
            // dim - 1 angles; first dim - 2 over [0, pi] inclusive, last over
            // [0, 2 pi). n is a multiple of 4 so that axes and diagonals are
            // grid nodes.
            let angles = dim - 1;
            let target = (resolution.max(64) as f64 / 2.0).powf(1.0 / angles as f64);
            let n = ((target / 4.0).round() as usize).max(2) * 4;
            let mut tables = Vec::with_capacity(angles);
            for a in 0..angles {
                // Node spacing is pi / n for every angle; the last angle wraps
                // around the full circle instead of stopping at pi.
                let size = if a + 1 == angles { 2 * n } else { n + 1 };
                let table: Vec<(f64, f64)> = (0..size)
                    .map(|i| (PI * i as f64 / n as f64).sin_cos())
                    .collect();
                tables.push(table);
            }
            let len = tables.iter().map(|t| t.len()).product();
            let mut cover = SphereCover {
                kind: CoverKind::Product { tables },
                len,
                radius: f64::INFINITY,
            };
            if dim <= 4 {
                let e = basis_constant(space);
                let de = angles as f64 * (PI / n as f64) / 2.0;
                let m_lo = min_direction_norm(space, &cover) - e * de;
                if m_lo <= 0.0 {
                    return Err(SpaceError::ResolutionTooCoarse);
                }
                cover.radius = 2.0 * e * de / m_lo;
            }
            Ok(cover)
        }
    }
}
