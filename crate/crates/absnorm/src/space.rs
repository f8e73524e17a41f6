//! Finite-dimensional normed spaces assembled from p-norms, polyhedral norms,
//! and two-term direct sums weighted by an absolute normalised norm, together
//! with the sampled-and-certified moduli used by the verification checks.

use std::fmt;

use serde::Serialize;

use crate::bm::LinearMap;
use crate::norm2::AbsoluteNorm;
use crate::par;
use crate::sampling::{build_cover, SphereCover};

#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error("p must satisfy 1 <= p (or be infinite), got {0}")]
    InvalidP(f64),
    #[error("dimension must be between 1 and 16, got {0}")]
    BadDimension(usize),
    #[error("functional rows must be non-empty and of equal positive length")]
    BadFunctionals,
    #[error("functionals do not span the space (rank {rank} < dim {dim}), so the formula is not a norm")]
    RankDeficient { rank: usize, dim: usize },
    #[error("vector length {got} does not match space dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no certified sphere cover in dimension {dim}; sampled estimate {estimate} (certified upper bound 2)")]
    CertificationUnavailable { dim: usize, estimate: f64 },
    #[error("cover too coarse to certify; raise the resolution")]
    ResolutionTooCoarse,
    #[error("functional is not dual-unit within 0.02 (sampled dual norm {0})")]
    InvalidFunctional(f64),
    #[error("no sample fell inside the slice; raise the resolution or eps")]
    EmptySample,
    #[error("{0}")]
    BadParameter(String),
    #[error("map is numerically singular (best pivot {0:.3e})")]
    Singular(f64),
}

/// A finite-dimensional space with an explicitly computable norm.
#[derive(Clone)]
pub enum FiniteSpace {
    PSpace {
        p: f64,
        dim: usize,
    },
    /// max_i |<functionals[i], x>|; the rows must span the space.
    Polyhedral {
        functionals: Vec<Vec<f64>>,
    },
    /// Direct sum with ||(x, y)|| = F(||x||_left, ||y||_right).
    FSum {
        left: Box<FiniteSpace>,
        right: Box<FiniteSpace>,
        f: AbsoluteNorm,
    },
    /// Image of `inner` under an invertible map T: ||y|| = ||T^{-1} y||_inner.
    /// Built by `FiniteSpace::pushforward`; an isometric copy by construction.
    Mapped {
        inner: Box<FiniteSpace>,
        inv: LinearMap,
    },
}

impl FiniteSpace {
    pub fn p_space(p: f64, dim: usize) -> Result<Self, SpaceError> {
        if p.is_nan() || p < 1.0 {
            return Err(SpaceError::InvalidP(p));
        }
        if dim == 0 || dim > 16 {
            return Err(SpaceError::BadDimension(dim));
        }
        Ok(FiniteSpace::PSpace { p, dim })
    }

    pub fn polyhedral(functionals: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        let Some(first) = functionals.first() else {
            return Err(SpaceError::BadFunctionals);
        };
        let dim = first.len();
        if dim == 0 || dim > 16 || functionals.iter().any(|r| r.len() != dim) {
            return Err(SpaceError::BadFunctionals);
        }
        let rank = row_rank(&functionals, dim);
        if rank < dim {
            return Err(SpaceError::RankDeficient { rank, dim });
        }
        Ok(FiniteSpace::Polyhedral { functionals })
    }

    pub fn fsum(left: FiniteSpace, right: FiniteSpace, f: AbsoluteNorm) -> Self {
        FiniteSpace::FSum {
            left: Box::new(left),
            right: Box::new(right),
            f,
        }
    }

    /// Isometric copy carried forward by an invertible map.
    pub fn pushforward(inner: FiniteSpace, map: &LinearMap) -> Result<Self, SpaceError> {
        if map.dim() != inner.dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: inner.dim(),
                got: map.dim(),
            });
        }
        let inv = map.inverse().map_err(|e| match e {
            crate::bm::BmError::Singular(pivot) => SpaceError::Singular(pivot),
            other => SpaceError::BadParameter(other.to_string()),
        })?;
        Ok(FiniteSpace::Mapped {
            inner: Box::new(inner),
            inv,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            FiniteSpace::PSpace { dim, .. } => *dim,
            FiniteSpace::Polyhedral { functionals } => functionals[0].len(),
            FiniteSpace::FSum { left, right, .. } => left.dim() + right.dim(),
            FiniteSpace::Mapped { inner, .. } => inner.dim(),
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            FiniteSpace::PSpace { p, .. } => {
                if p.is_infinite() {
                    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
                } else if *p == 1.0 {
                    x.iter().map(|v| v.abs()).sum()
                } else if *p == 2.0 {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt()
                } else {
                    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    if m == 0.0 {
                        return 0.0;
                    }
                    m * x
                        .iter()
                        .map(|v| (v.abs() / m).powf(*p))
                        .sum::<f64>()
                        .powf(1.0 / *p)
                }
            }
            FiniteSpace::Polyhedral { functionals } => functionals
                .iter()
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs())
                .fold(0.0_f64, f64::max),
            FiniteSpace::FSum { left, right, f } => {
                let l = left.dim();
                f.evaluate(left.norm(&x[..l]), right.norm(&x[l..]))
            }
            FiniteSpace::Mapped { inner, inv } => inner.norm(&inv.apply(x)),
        }
    }
}

fn row_rank(rows: &[Vec<f64>], dim: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..dim {
        let Some(pivot) = (rank..m.len())
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
        else {
            break;
        };
        if m[pivot][col].abs() < 1e-10 {
            continue;
        }
        m.swap(rank, pivot);
        for r in rank + 1..m.len() {
            let f = m[r][col] / m[rank][col];
            for c in col..dim {
                m[r][c] -= f * m[rank][c];
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteSpace::PSpace { p, dim } => {
                if p.is_infinite() {
                    write!(f, "p(inf,{dim})")
                } else {
                    write!(f, "p({p},{dim})")
                }
            }
            FiniteSpace::Polyhedral { functionals } => {
                write!(f, "polyhedral({}x{})", functionals.len(), functionals[0].len())
            }
            FiniteSpace::FSum { left, right, f: nf } => {
                write!(f, "fsum({left},{right};{nf})")
            }
            FiniteSpace::Mapped { inner, .. } => write!(f, "pushforward({inner})"),
        }
    }
}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Certified interval bracket.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Brackets for the two moduli of one space at one resolution.
#[derive(Clone, Debug, Serialize)]
pub struct ModuliReport {
    pub s_lower: f64,
    pub s_upper: f64,
    pub lasq_defect_lower: f64,
    pub lasq_defect_upper: f64,
    pub resolution: usize,
    /// Certified half-width budget: twice the cover radius of the finest scan.
    pub lipschitz_margin: f64,
}

/// Suggested cover size per dimension; chosen so the quadratic moduli scans
/// finish in seconds in dim 2 and the linear scans stay cheap above.
pub fn default_resolution(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 2048,
        3 => 40_000,
        4 => 250_000,
        _ => 100_000,
    }
}

pub(crate) struct ModuliScan {
    pub report: ModuliReport,
    pub s_witness: Vec<f64>,
    pub lam_witness: Vec<f64>,
}

#[derive(Clone, Copy)]
struct ScanAcc {
    s_hat: f64,
    s_arg: usize,
    lam_hat: f64,
    lam_arg: usize,
}

/// One quadratic sweep over a materialised cover: for every cover point x,
/// the inner loop computes the sampled sup over y of min(||x+y||, ||x-y||)
/// (whose infimum over x estimates s) and the sampled inf over y of
/// max(|..+..| - 1| deviations (whose supremum over x estimates the defect
/// modulus).
fn sweep(space: &FiniteSpace, pts: &[f64], dim: usize) -> ScanAcc {
    let n = pts.len() / dim;
    let id = ScanAcc {
        s_hat: f64::INFINITY,
        s_arg: 0,
        lam_hat: f64::NEG_INFINITY,
        lam_arg: 0,
    };
    par::map_reduce(
        n,
        id,
        |i| {
            let x = &pts[i * dim..(i + 1) * dim];
            let mut plus = vec![0.0; dim];
            let mut minus = vec![0.0; dim];
            let mut m_hat = f64::NEG_INFINITY;
            let mut d_hat = f64::INFINITY;
            for j in 0..n {
                let y = &pts[j * dim..(j + 1) * dim];
                for k in 0..dim {
                    plus[k] = x[k] + y[k];
                    minus[k] = x[k] - y[k];
                }
                let np = space.norm(&plus);
                let nm = space.norm(&minus);
                m_hat = m_hat.max(np.min(nm));
                d_hat = d_hat.min((np - 1.0).abs().max((nm - 1.0).abs()));
            }
            ScanAcc {
                s_hat: m_hat,
                s_arg: i,
                lam_hat: d_hat,
                lam_arg: i,
            }
        },
        |a, b| {
            let (s_hat, s_arg) = par::min_arg((a.s_hat, a.s_arg), (b.s_hat, b.s_arg));
            let (lam_hat, lam_arg) = par::max_arg((a.lam_hat, a.lam_arg), (b.lam_hat, b.lam_arg));
            ScanAcc {
                s_hat,
                s_arg,
                lam_hat,
                lam_arg,
            }
        },
    )
}

/// The scans behind `s_modulus` and `lasq_defect`, with argmin/argmax
/// witnesses. Uses a dyadic ladder of resolutions and intersects the
/// per-resolution brackets, so refining the resolution can only tighten the
/// reported intervals (the true value lies in every rung's bracket).
pub(crate) fn moduli_scan(
    space: &FiniteSpace,
    resolution: usize,
) -> Result<ModuliScan, SpaceError> {
    let dim = space.dim();
    if dim == 1 {
        // y = +-x are the only unit vectors: min(||x+y||, ||x-y||) = 0 and
        // max(| ||x+y|| - 1 |, ..) = 1 exactly, for either unit x.
        return Ok(ModuliScan {
            report: ModuliReport {
                s_lower: 0.0,
                s_upper: 0.0,
                lasq_defect_lower: 1.0,
                lasq_defect_upper: 1.0,
                resolution,
                lipschitz_margin: 0.0,
            },
            s_witness: vec![1.0],
            lam_witness: vec![1.0],
        });
    }
    if dim > 4 {
        let cover = build_cover(space, resolution.min(8192))?;
        let pts = cover.materialize(space);
        let acc = sweep(space, &pts, dim);
        return Err(SpaceError::CertificationUnavailable {
            dim,
            estimate: acc.s_hat,
        });
    }
    let mut rungs = vec![resolution.max(64)];
    while *rungs.last().unwrap() / 4 >= 64 {
        rungs.push(rungs.last().unwrap() / 4);
    }
    rungs.reverse();

    let mut s = Interval { lo: 0.0, hi: 2.0 };
    let mut lam = Interval { lo: 0.0, hi: 1.0 };
    let mut margin = f64::INFINITY;
    let mut s_witness = Vec::new();
    let mut lam_witness = Vec::new();
    for rung in rungs {
        let cover = build_cover(space, rung)?;
        if cover.len() > 4_000_000 {
            return Err(SpaceError::BadParameter(
                "cover too large for the quadratic moduli scan".into(),
            ));
        }
        let pts = cover.materialize(space);
        let acc = sweep(space, &pts, dim);
        let rho = cover.radius();
        // Sampled sup is within rho below the true sup (the scanned
        // quantities are 1-Lipschitz in both x and y), and the sampled inf is
        // within rho above the true inf; both estimates therefore sit within
        // rho of the true modulus.
        s.lo = s.lo.max((acc.s_hat - rho).max(0.0));
        s.hi = s.hi.min((acc.s_hat + rho).min(2.0));
        lam.lo = lam.lo.max((acc.lam_hat - rho).max(0.0));
        lam.hi = lam.hi.min((acc.lam_hat + rho).min(1.0));
        margin = 2.0 * rho;
        s_witness = pts[acc.s_arg * dim..(acc.s_arg + 1) * dim].to_vec();
        lam_witness = pts[acc.lam_arg * dim..(acc.lam_arg + 1) * dim].to_vec();
    }
    Ok(ModuliScan {
        report: ModuliReport {
            s_lower: s.lo,
            s_upper: s.hi,
            lasq_defect_lower: lam.lo,
            lasq_defect_upper: lam.hi,
            resolution,
            lipschitz_margin: margin,
        },
        s_witness,
        lam_witness,
    })
}

/// Bracket of s(X) = inf over unit x of sup over unit y of
/// min(||x + y||, ||x - y||), together with the defect modulus bracket.
pub fn s_modulus(space: &FiniteSpace, resolution: usize) -> Result<ModuliReport, SpaceError> {
    Ok(moduli_scan(space, resolution)?.report)
}

/// Bracket of the defect modulus sup over unit x of inf over unit y of
/// max(| ||x+y|| - 1 |, | ||x-y|| - 1 |). Same scan as `s_modulus`; both
/// brackets come from one sweep.
pub fn lasq_defect(space: &FiniteSpace, resolution: usize) -> Result<ModuliReport, SpaceError> {
    s_modulus(space, resolution)
}

fn normalize(space: &FiniteSpace, x: &[f64]) -> Result<Vec<f64>, SpaceError> {
    if x.len() != space.dim() {
        return Err(SpaceError::DimensionMismatch {
            expected: space.dim(),
            got: x.len(),
        });
    }
    let n = space.norm(x);
    if n <= 0.0 || !n.is_finite() {
        return Err(SpaceError::BadParameter(
            "cannot normalise the zero vector".into(),
        ));
    }
    Ok(x.iter().map(|v| v / n).collect())
}

fn certified_cover(
    space: &FiniteSpace,
    resolution: usize,
    estimate: impl FnOnce(&SphereCover) -> f64,
) -> Result<SphereCover, SpaceError> {
    let cover = build_cover(space, resolution)?;
    if !cover.certified() {
        let est = estimate(&cover);
        return Err(SpaceError::CertificationUnavailable {
            dim: space.dim(),
            estimate: est,
        });
    }
    Ok(cover)
}

/// Bracket of m(x) = sup over unit y of min(||x + y||, ||x - y||) for one
/// point x (normalised internally). The sampled sup is attained, hence a true
/// lower bound; the cover radius bounds the gap to the supremum because the
/// objective is 1-Lipschitz in y.
pub fn m_of_x(space: &FiniteSpace, x: &[f64], resolution: usize) -> Result<Interval, SpaceError> {
    let dim = space.dim();
    if dim == 1 {
        return Ok(Interval { lo: 0.0, hi: 0.0 });
    }
    let x = normalize(space, x)?;
    let scan = |cover: &SphereCover| {
        let space = space.clone();
        let x = x.clone();
        par::map_reduce(
            cover.len(),
            f64::NEG_INFINITY,
            move |idx| {
                let y = cover.point(&space, idx);
                let plus: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let minus: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                space.norm(&plus).min(space.norm(&minus))
            },
            f64::max,
        )
    };
    let cover = certified_cover(space, resolution, &scan)?;
    let lo = scan(&cover);
    Ok(Interval {
        lo,
        hi: (lo + cover.radius()).min(2.0),
    })
}

/// Bracket of the octahedrality radius of a finite point set: the sup over
/// unit y of min_i ||x_i + y||. Points are normalised internally.
pub fn oh_radius(
    space: &FiniteSpace,
    points: &[Vec<f64>],
    resolution: usize,
) -> Result<Interval, SpaceError> {
    if points.is_empty() {
        return Err(SpaceError::BadParameter("need at least one point".into()));
    }
    let normalized: Vec<Vec<f64>> = points
        .iter()
        .map(|p| normalize(space, p))
        .collect::<Result<_, _>>()?;
    let scan = |cover: &SphereCover| {
        let space = space.clone();
        let normalized = normalized.clone();
        par::map_reduce(
            cover.len(),
            f64::NEG_INFINITY,
            move |idx| {
                let y = cover.point(&space, idx);
                normalized
                    .iter()
                    .map(|x| {
                        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                        space.norm(&s)
                    })
                    .fold(f64::INFINITY, f64::min)
            },
            f64::max,
        )
    };
    let cover = certified_cover(space, resolution, &scan)?;
    let lo = scan(&cover);
    Ok(Interval {
        lo,
        hi: (lo + cover.radius()).min(2.0),
    })
}

/// A slice query: the part of the unit ball where the functional exceeds
/// 1 - eps.
#[derive(Clone, Debug, serde::Deserialize, Serialize)]
pub struct SliceQuery {
    pub functional: Vec<f64>,
    pub eps: f64,
}

/// Bracket of the diameter of the slice
/// { z in ball : <functional, z> > 1 - eps }.
///
/// The extreme points of the slice closure lie on the unit sphere (the cut
/// face's own extreme points are sphere points in any dimension's
/// intersection with the supporting structure of the ball), and the diameter
/// of a convex set is attained at extreme points, so sampling the sphere arc
/// inside the slice suffices. Lower bound: the best pair of strict members.
/// Upper bound: every extreme point is within the cover radius of a sampled
/// point whose functional value passes the relaxed filter, so the relaxed
/// best pair plus twice the radius dominates.
pub fn slice_diameter(
    space: &FiniteSpace,
    query: &SliceQuery,
    resolution: usize,
) -> Result<Interval, SpaceError> {
    let dim = space.dim();
    if query.functional.len() != dim {
        return Err(SpaceError::DimensionMismatch {
            expected: dim,
            got: query.functional.len(),
        });
    }
    if !(query.eps > 0.0 && query.eps < 2.0) {
        return Err(SpaceError::BadParameter("eps must lie in (0, 2)".into()));
    }
    let phi = &query.functional;
    let cover = certified_cover(space, resolution, |_| f64::NAN)?;
    let rho = cover.radius();
    let pts = cover.materialize(space);
    let n = cover.len();
    let value = |i: usize| -> f64 {
        phi.iter()
            .zip(&pts[i * dim..(i + 1) * dim])
            .map(|(a, b)| a * b)
            .sum()
    };
    let dual_hat = (0..n).map(|i| value(i).abs()).fold(0.0_f64, f64::max);
    if (dual_hat - 1.0).abs() > 0.02 {
        return Err(SpaceError::InvalidFunctional(dual_hat));
    }
    let strict: Vec<usize> = (0..n).filter(|&i| value(i) > 1.0 - query.eps).collect();
    if strict.is_empty() {
        return Err(SpaceError::EmptySample);
    }
    // 1.1 * rho absorbs the sampled dual norm being up to 0.02 above 1.
    let relaxed: Vec<usize> = (0..n)
        .filter(|&i| value(i) >= 1.0 - query.eps - 1.1 * rho)
        .collect();
    if strict.len().max(relaxed.len()) > 20_000 {
        return Err(SpaceError::BadParameter(
            "slice sample too large for the pairwise scan; lower the resolution".into(),
        ));
    }
    let max_pairwise = |idx: &[usize]| -> f64 {
        let mut best = 0.0_f64;
        let mut d = vec![0.0; dim];
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                for k in 0..dim {
                    d[k] = pts[i * dim + k] - pts[j * dim + k];
                }
                best = best.max(space.norm(&d));
            }
        }
        best
    };
    let lo = max_pairwise(&strict);
    let hi = (max_pairwise(&relaxed) + 2.0 * rho).min(2.0);
    Ok(Interval { lo, hi: hi.max(lo) })
}

/// Search the sphere cover for a y with min(||x+y||, ||x-y||) >= target,
/// up to the cover radius. Returns the best witness if one qualifies.
pub fn exact_witness(
    space: &FiniteSpace,
    x: &[f64],
    target: f64,
    resolution: usize,
) -> Result<Option<Vec<f64>>, SpaceError> {
    let x = normalize(space, x)?;
    let cover = certified_cover(space, resolution, |_| f64::NAN)?;
    let dim = space.dim();
    let best = par::map_reduce(
        cover.len(),
        (f64::NEG_INFINITY, 0usize),
        |idx| {
            let y = cover.point(space, idx);
            let mut plus = vec![0.0; dim];
            let mut minus = vec![0.0; dim];
            for k in 0..dim {
                plus[k] = x[k] + y[k];
                minus[k] = x[k] - y[k];
            }
            (space.norm(&plus).min(space.norm(&minus)), idx)
        },
        par::max_arg,
    );
    if best.0 >= target - cover.radius() - 1e-9 {
        Ok(Some(cover.point(space, best.1)))
    } else {
        Ok(None)
    }
}
