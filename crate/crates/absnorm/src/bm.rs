//! Operator norms and Banach-Mazur distance upper bounds for the small
//! dimensions handled by this crate.
//!
//! `bm_upper` is a best-found bound, never claimed tight: a deterministic
//! multistart coordinate descent over invertible matrices minimises an
//! uncertified sampled objective, and only the winner is certified by the
//! self-bounding cover estimate of `operator_norm`.

use crate::par;
use crate::sampling::{build_cover, SphereCover};
use crate::space::{FiniteSpace, Interval, SpaceError};

#[derive(Debug, thiserror::Error)]
pub enum BmError {
    #[error("matrix is singular (best pivot {0:.3e})")]
    Singular(f64),
    #[error("dimension mismatch: {0}")]
    Dims(String),
    #[error("dimension {0} not supported here (max 3)")]
    DimTooLarge(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A square matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    pub matrix: Vec<Vec<f64>>,
}

impl LinearMap {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, BmError> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(BmError::Dims("matrix must be square and non-empty".into()));
        }
        Ok(LinearMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            matrix: (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Gauss-Jordan inverse with partial pivoting. Hand-rolled on purpose:
    /// the crate only ever inverts 2x2 and 3x3 matrices, which does not
    /// justify a linear-algebra dependency.
    pub fn inverse(&self) -> Result<LinearMap, BmError> {
        let n = self.dim();
        let mut a: Vec<Vec<f64>> = self.matrix.clone();
        let mut b: Vec<Vec<f64>> = LinearMap::identity(n).matrix;
        let scale = self
            .matrix
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            let pv = a[pivot][col];
            if pv.abs() < 1e-12 * scale {
                return Err(BmError::Singular(pv.abs()));
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            let inv = 1.0 / a[col][col];
            for c in 0..n {
                a[col][c] *= inv;
                b[col][c] *= inv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r][col];
                if f == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a[r][c] -= f * a[col][c];
                    b[r][c] -= f * b[col][c];
                }
            }
        }
        Ok(LinearMap { matrix: b })
    }
}

const BLOCK: usize = 4096;

fn sup_image_norm(
    map: &LinearMap,
    from: &FiniteSpace,
    to: &FiniteSpace,
    cover: &SphereCover,
) -> f64 {
    let dim = from.dim();
    let blocks = cover.len().div_ceil(BLOCK);
    par::map_reduce(
        blocks,
        f64::NEG_INFINITY,
        |b| {
            let mut buf = Vec::with_capacity(dim);
            let mut img = vec![0.0; dim];
            let mut best = f64::NEG_INFINITY;
            let end = ((b + 1) * BLOCK).min(cover.len());
            for idx in b * BLOCK..end {
                cover.point_into(from, idx, &mut buf);
                map.apply_into(&buf, &mut img);
                best = best.max(to.norm(&img));
            }
            best
        },
        f64::max,
    )
}

/// Certified bracket of the operator norm of `map : from -> to`.
///
/// The sampled maximum over the cover is attained, hence a lower bound. For
/// any unit x there is a cover point u with ||x - u||_from <= rho, so
/// ||T x||_to <= ||T u||_to + ||T|| rho, giving sup <= lo / (1 - rho).
pub fn operator_norm(
    map: &LinearMap,
    from: &FiniteSpace,
    to: &FiniteSpace,
    resolution: usize,
) -> Result<Interval, BmError> {
    if map.dim() != from.dim() || from.dim() != to.dim() {
        return Err(BmError::Dims(format!(
            "map {}, from {}, to {}",
            map.dim(),
            from.dim(),
            to.dim()
        )));
    }
    let cover = build_cover(from, resolution)?;
    if !cover.certified() {
        return Err(BmError::Space(SpaceError::CertificationUnavailable {
            dim: from.dim(),
            estimate: sup_image_norm(map, from, to, &cover),
        }));
    }
    let rho = cover.radius();
    if rho >= 0.5 {
        return Err(BmError::Space(SpaceError::ResolutionTooCoarse));
    }
    let lo = sup_image_norm(map, from, to, &cover);
    Ok(Interval {
        lo,
        hi: lo / (1.0 - rho),
    })
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const HALTON_BASES: [usize; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..n {
            let mut q: Vec<usize> = p.iter().map(|&v| if v >= slot { v + 1 } else { v }).collect();
            q.insert(0, slot);
            out.push(q);
        }
    }
    out
}

/// Deterministic start schedule: the identity, all signed permutation
/// matrices, all invertible sign matrices (these contain the exact isometries
/// between the extreme p-norms), then Halton-filled matrices.
fn default_starts(dim: usize, restarts: usize) -> Vec<LinearMap> {
    let mut starts = vec![LinearMap::identity(dim)];
    for perm in permutations(dim) {
        for signs in 0..(1usize << dim) {
            let m: Vec<Vec<f64>> = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            if perm[i] == j {
                                if signs >> i & 1 == 1 {
                                    -1.0
                                } else {
                                    1.0
                                }
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            starts.push(LinearMap { matrix: m });
        }
    }
    'sign: for bits in 0..(1usize << (dim * dim)) {
        if starts.len() >= restarts {
            break 'sign;
        }
        let m: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if bits >> (i * dim + j) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        let map = LinearMap { matrix: m };
        if map.inverse().is_ok() {
            starts.push(map);
        }
    }
    let mut k = 1;
    while starts.len() < restarts {
        let m: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| 3.0 * halton(k + 7, HALTON_BASES[i * dim + j]) - 1.5)
                    .collect()
            })
            .collect();
        k += 1;
        let map = LinearMap { matrix: m };
        if map.inverse().is_ok() {
            starts.push(map);
        }
    }
    starts.truncate(restarts.max(1));
    starts
}

/// Banach-Mazur distance upper bound with an explicit start schedule. The
/// search objective is the product of *sampled* operator norms (cheap, not
/// certified); only the final winner is certified at `resolution` via
/// `operator_norm`, so the returned value is a true upper bound up to the
/// cover certification.
pub fn bm_upper_with_starts(
    x: &FiniteSpace,
    y: &FiniteSpace,
    starts: &[LinearMap],
    resolution: usize,
) -> Result<f64, BmError> {
    let dim = x.dim();
    if dim != y.dim() {
        return Err(BmError::Dims(format!("{} vs {}", dim, y.dim())));
    }
    if dim > 3 {
        return Err(BmError::DimTooLarge(dim));
    }
    if starts.is_empty() {
        return Err(BmError::Dims("need at least one start".into()));
    }
    let search_res = 1024;
    let cov_x = build_cover(x, search_res)?;
    let cov_y = build_cover(y, search_res)?;
    let pts_x = cov_x.materialize(x);
    let pts_y = cov_y.materialize(y);
    let sampled_sup = |map: &LinearMap, pts: &[f64], to: &FiniteSpace| -> f64 {
        let mut img = vec![0.0; dim];
        let mut best = f64::NEG_INFINITY;
        for chunk in pts.chunks_exact(dim) {
            map.apply_into(chunk, &mut img);
            best = best.max(to.norm(&img));
        }
        best
    };
    let objective = |map: &LinearMap| -> Option<f64> {
        let inv = map.inverse().ok()?;
        Some(sampled_sup(map, &pts_x, y) * sampled_sup(&inv, &pts_y, x))
    };

    let mut winner: Option<(f64, LinearMap)> = None;
    for start in starts {
        let Some(mut best) = objective(start) else {
            continue;
        };
        let mut m = start.clone();
        let mut step = 0.25;
        while step > 1e-7 {
            let mut pass = 0;
            loop {
                let mut improved = false;
                for r in 0..dim {
                    for c in 0..dim {
                        for sgn in [1.0, -1.0] {
                            let mut cand = m.clone();
                            cand.matrix[r][c] += sgn * step;
                            if let Some(v) = objective(&cand) {
                                if v < best - 1e-15 {
                                    best = v;
                                    m = cand;
                                    improved = true;
                                }
                            }
                        }
                    }
                }
                pass += 1;
                if !improved || pass >= 20 {
                    break;
                }
            }
            step *= 0.5;
        }
        if winner.as_ref().map_or(true, |(w, _)| best < *w) {
            winner = Some((best, m));
        }
        // The product of operator norms never drops below 1; stop once the
        // sampled objective cannot meaningfully improve.
        if winner.as_ref().unwrap().0 <= 1.0 + 1e-9 {
            break;
        }
    }
    let (_, m) = winner.ok_or_else(|| BmError::Dims("all starts singular".into()))?;
    let inv = m.inverse()?;
    let fwd = operator_norm(&m, x, y, resolution)?;
    let bwd = operator_norm(&inv, y, x, resolution)?;
    Ok(fwd.hi * bwd.hi)
}

/// Banach-Mazur distance upper bound with the default deterministic start
/// schedule.
pub fn bm_upper(
    x: &FiniteSpace,
    y: &FiniteSpace,
    restarts: usize,
    resolution: usize,
) -> Result<f64, BmError> {
    let starts = default_starts(x.dim(), restarts.max(1));
    bm_upper_with_starts(x, y, &starts, resolution)
}
