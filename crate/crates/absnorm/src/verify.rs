//! Claim replays: each check re-tests a proved statement on sampled data and
//! reports a margin. A failing check therefore indicates an implementation
//! fault (or a genuinely false claim instance), never mere sampling noise:
//! every tolerance below is backed by a Lipschitz or cover argument.

use serde::{Deserialize, Serialize};

use crate::bm::{operator_norm, BmError, LinearMap};
use crate::geometry::{asq_obstruction, lasq2_modulus, loh3_modulus, r_of, GeomError};
use crate::norm2::AbsoluteNorm;
use crate::par;
use crate::sampling::build_cover;
use crate::space::{moduli_scan, s_modulus, FiniteSpace, SpaceError};
use crate::EQ_TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// The claim's hypothesis was not met by any sample; nothing was tested.
    Vacuous,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub coords: Vec<f64>,
    pub values: Vec<(String, f64)>,
}

/// Outcome of one claim replay.
///
/// Invariants: `verdict == Fail` exactly when `counterexample` is present,
/// and `worst_margin >= 0` exactly when the verdict is not `Fail`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub instance: String,
    pub samples: u64,
    pub worst_margin: f64,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub notes: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Bm(#[from] BmError),
    #[error("{0}")]
    Unsupported(String),
}

/// Biconditional between "F(1,1) = 1" and "F is the max norm": each direction
/// is replayed on a grid. The analogous sum-norm diagnostics go to the notes.
pub fn check_lemma_infty(f: &AbsoluteNorm, resolution: usize) -> VerificationReport {
    let res = resolution.max(16);
    let d11 = (f.evaluate(1.0, 1.0) - 1.0).abs();
    let mut dmax = (0.0_f64, 0.0, 0.0);
    let mut dsum = (0.0_f64, 0.0, 0.0);
    let mut samples = 0u64;
    for i in 0..=res {
        for j in 0..=res {
            let (a, b) = (1.5 * i as f64 / res as f64, 1.5 * j as f64 / res as f64);
            samples += 1;
            let v = f.evaluate(a, b);
            let dm = (v - a.max(b)).abs();
            let ds = (v - (a + b)).abs();
            if dm > dmax.0 {
                dmax = (dm, a, b);
            }
            if ds > dsum.0 {
                dsum = (ds, a, b);
            }
        }
    }
    // Hypothesis thresholds at EQ_TAU, conclusion thresholds at 1e-6: a norm
    // within 1e-9 of the extreme value at (1,1) must agree with the extreme
    // norm on the whole grid to 1e-6, and conversely.
    let mut margins: Vec<f64> = Vec::new();
    if d11 <= EQ_TAU {
        margins.push(1e-6 - dmax.0);
    }
    if dmax.0 <= EQ_TAU {
        margins.push(1e-6 - d11);
    }
    let worst = margins
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min((d11 - EQ_TAU).abs().max(1e-6));
    let failed = worst < 0.0;
    VerificationReport {
        claim_id: "corner-value-pins-max-norm".into(),
        instance: f.to_string(),
        samples,
        worst_margin: worst,
        verdict: if failed { Verdict::Fail } else { Verdict::Pass },
        counterexample: if failed {
            Some(Counterexample {
                coords: vec![dmax.1, dmax.2],
                values: vec![
                    ("F(1,1) deviation from 1".into(), d11),
                    ("grid deviation from max norm".into(), dmax.0),
                ],
            })
        } else {
            None
        },
        notes: vec![
            format!(
                "deviation from max norm: {:.3e} at ({:.4},{:.4})",
                dmax.0, dmax.1, dmax.2
            ),
            format!(
                "deviation from sum norm: {:.3e} at ({:.4},{:.4})",
                dsum.0, dsum.1, dsum.2
            ),
        ],
    }
}

/// Sphere points can only reach the doubled value against the shifted corner:
/// whenever F(c, f(a)) = 2 with c in [0, 1 + a], necessarily c = 1 + a and a
/// lies at or beyond the octahedrality threshold.
pub fn check_loh2(f: &AbsoluteNorm, samples: usize) -> VerificationReport {
    let n = samples.max(64);
    let c_grid = 1024usize;
    let r = r_of(f, 1e-7);
    #[derive(Clone, Copy)]
    struct Acc {
        margin: f64,
        coords: [f64; 2],
        qualifying: u64,
    }
    let id = Acc {
        margin: f64::INFINITY,
        coords: [0.0; 2],
        qualifying: 0,
    };
    let acc = par::map_reduce(
        n,
        id,
        |i| {
            let a = i as f64 / (n - 1) as f64;
            let b = f.boundary(a, 1e-9);
            let mut out = id;
            for j in 0..=c_grid {
                let c = (1.0 + a) * j as f64 / c_grid as f64;
                if f.evaluate(c, b) >= 2.0 - EQ_TAU {
                    out.qualifying += 1;
                    let m = (1e-6 - (c - (1.0 + a)).abs()).min(a - (r - 1e-6));
                    if m < out.margin {
                        out.margin = m;
                        out.coords = [a, c];
                    }
                }
            }
            out
        },
        |a, b| {
            let mut out = if b.margin < a.margin { b } else { a };
            out.qualifying = a.qualifying + b.qualifying;
            out
        },
    );
    let worst = if acc.qualifying == 0 {
        0.0
    } else {
        acc.margin
    };
    let verdict = if acc.qualifying == 0 {
        Verdict::Vacuous
    } else if worst < 0.0 {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    VerificationReport {
        claim_id: "doubling-forces-corner".into(),
        instance: f.to_string(),
        samples: (n as u64) * (c_grid as u64 + 1),
        worst_margin: worst,
        verdict,
        counterexample: if verdict == Verdict::Fail {
            Some(Counterexample {
                coords: acc.coords.to_vec(),
                values: vec![
                    ("threshold".into(), r),
                    ("F(c, f(a))".into(), f.evaluate(acc.coords[1], f.boundary(acc.coords[0], 1e-9))),
                ],
            })
        } else {
            None
        },
        notes: vec![format!("{} qualifying samples", acc.qualifying)],
    }
}

/// Replay of the certified region bound behind `loh3_modulus` on an
/// independent, finer, half-offset grid: any sample with F(c, f(a)) >= 2 -
/// delta must have c beyond 1 + r_F - eps.
pub fn check_loh3(
    f: &AbsoluteNorm,
    eps: f64,
    resolution: usize,
) -> Result<VerificationReport, GeomError> {
    let delta = loh3_modulus(f, eps, resolution)?;
    // Same region cap as the modulus computation.
    let r_hi = (r_of(f, 1e-7) + 1e-7).min(1.0);
    let c_max = 1.0 + r_hi - eps;
    let n = 2 * resolution.max(64);
    let c_grid = 512usize;
    #[derive(Clone, Copy)]
    struct Acc {
        margin: f64,
        coords: [f64; 2],
        qualifying: u64,
    }
    let id = Acc {
        margin: f64::INFINITY,
        coords: [0.0; 2],
        qualifying: 0,
    };
    let acc = par::map_reduce(
        n + 1,
        id,
        |i| {
            // Offset by a third of a step so the nodes differ from the ones
            // the modulus bracket used.
            let a = (i as f64 / n as f64 + 1.0 / (3.0 * n as f64)).min(1.0);
            let b = f.boundary(a, 1e-9);
            let mut out = id;
            for j in 0..=c_grid {
                let c = (1.0 + a) * j as f64 / c_grid as f64;
                if f.evaluate(c, b) >= 2.0 - delta {
                    out.qualifying += 1;
                    let m = c - c_max + 1e-6;
                    if m < out.margin {
                        out.margin = m;
                        out.coords = [a, c];
                    }
                }
            }
            out
        },
        |a, b| {
            let mut out = if b.margin < a.margin { b } else { a };
            out.qualifying = a.qualifying + b.qualifying;
            out
        },
    );
    let (worst, verdict) = if acc.qualifying == 0 {
        (0.0, Verdict::Vacuous)
    } else if acc.margin < 0.0 {
        (acc.margin, Verdict::Fail)
    } else {
        (acc.margin, Verdict::Pass)
    };
    Ok(VerificationReport {
        claim_id: "modulus-region-replay".into(),
        instance: format!("{f}, eps={eps}"),
        samples: (n as u64 + 1) * (c_grid as u64 + 1),
        worst_margin: worst,
        verdict,
        counterexample: if verdict == Verdict::Fail {
            Some(Counterexample {
                coords: acc.coords.to_vec(),
                values: vec![("delta".into(), delta), ("region cap".into(), c_max)],
            })
        } else {
            None
        },
        notes: vec![format!(
            "delta={delta:.6}, {} qualifying samples",
            acc.qualifying
        )],
    })
}

const SCAN_BLOCK: usize = 8192;

/// Direct-sum pushout: on X (+)_F Y, any unit vector (u, v) that keeps
/// F(||x +- u||, ||v||) within delta of 2 *for both signs* pushes the unit
/// vector x at least to 2 r_F - eps in both directions u/||u||. Additionally,
/// when the sampled s-modulus of X sits below that threshold, the embedded
/// witness certifies that the sum's s-modulus stays below 2 - delta (the
/// contrapositive of the pushout read globally).
pub fn check_prop_loh(
    x: &FiniteSpace,
    y: &FiniteSpace,
    f: &AbsoluteNorm,
    eps: f64,
    resolution: usize,
) -> Result<VerificationReport, CheckError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CheckError::Unsupported("eps must lie in (0, 1)".into()));
    }
    let sum_dim = x.dim() + y.dim();
    if sum_dim > 4 {
        return Err(CheckError::Unsupported(format!(
            "sum dimension {sum_dim} exceeds the certified range (4)"
        )));
    }
    let instance = format!("X={x}, Y={y}, F={f}, eps={eps}");
    let r = r_of(f, 1e-7);
    let threshold = 2.0 * r - eps;
    if threshold <= 0.0 {
        return Ok(VerificationReport {
            claim_id: "sum-pushout".into(),
            instance,
            samples: 0,
            worst_margin: -threshold,
            verdict: Verdict::Vacuous,
            counterexample: None,
            notes: vec![format!(
                "threshold 2 r - eps = {threshold:.6} is not positive; the conclusion is trivial"
            )],
        });
    }
    let delta = loh3_modulus(f, eps / 2.0, 2048)?;
    let sum = FiniteSpace::fsum(x.clone(), y.clone(), f.clone());
    let ldim = x.dim();
    let x_cover = build_cover(x, 128)?;
    let x_pts = x_cover.materialize(x);
    let nx = x_cover.len();
    let sum_cover = build_cover(&sum, resolution)?;
    let rho = sum_cover.radius();
    let total = sum_cover.len();

    #[derive(Clone, Copy)]
    struct Acc {
        margin: f64,
        w_idx: usize,
        x_idx: usize,
        qualifying: u64,
        skipped: u64,
    }
    let id = Acc {
        margin: f64::INFINITY,
        w_idx: 0,
        x_idx: 0,
        qualifying: 0,
        skipped: 0,
    };
    let blocks = total.div_ceil(SCAN_BLOCK);
    let acc = par::map_reduce(
        blocks,
        id,
        |blk| {
            let mut out = id;
            let mut w = Vec::with_capacity(sum_dim);
            let mut shifted = vec![0.0; ldim];
            let end = ((blk + 1) * SCAN_BLOCK).min(total);
            for idx in blk * SCAN_BLOCK..end {
                sum_cover.point_into(&sum, idx, &mut w);
                let (u, v) = w.split_at(ldim);
                let nv = y.norm(v);
                let nu = x.norm(u);
                if nu <= 1e-12 {
                    out.skipped += 1;
                    continue;
                }
                for xi in 0..nx {
                    let xp = &x_pts[xi * ldim..(xi + 1) * ldim];
                    for k in 0..ldim {
                        shifted[k] = xp[k] + u[k];
                    }
                    let n_plus = x.norm(&shifted);
                    for k in 0..ldim {
                        shifted[k] = xp[k] - u[k];
                    }
                    let n_minus = x.norm(&shifted);
                    if f.evaluate(n_plus, nv) >= 2.0 - delta
                        && f.evaluate(n_minus, nv) >= 2.0 - delta
                    {
                        out.qualifying += 1;
                        let mut pushed = f64::INFINITY;
                        for sgn in [1.0, -1.0] {
                            for k in 0..ldim {
                                shifted[k] = xp[k] + sgn * u[k] / nu;
                            }
                            pushed = pushed.min(x.norm(&shifted));
                        }
                        let m = pushed - threshold;
                        if m < out.margin {
                            out.margin = m;
                            out.w_idx = idx;
                            out.x_idx = xi;
                        }
                    }
                }
            }
            out
        },
        |a, b| {
            let mut out = if (b.margin, b.w_idx) < (a.margin, a.w_idx) { b } else { a };
            out.qualifying = a.qualifying + b.qualifying;
            out.skipped = a.skipped + b.skipped;
            out
        },
    );

    let mut notes = vec![format!(
        "delta={delta:.6}, threshold={threshold:.6}, cover radius={rho:.4}, {} qualifying pairs, {} zero-u points skipped",
        acc.qualifying, acc.skipped
    )];
    let mut worst = if acc.qualifying == 0 {
        notes.push("no sample passed the two-sided filter; pushout not exercised".into());
        0.0
    } else {
        acc.margin + 1e-9
    };
    let mut counterexample = None;
    if acc.qualifying > 0 && worst < 0.0 {
        let w = sum_cover.point(&sum, acc.w_idx);
        let mut coords = x_pts[acc.x_idx * ldim..(acc.x_idx + 1) * ldim].to_vec();
        coords.extend_from_slice(&w);
        counterexample = Some(Counterexample {
            coords,
            values: vec![("pushed distance".into(), acc.margin + threshold)],
        });
    }

    // Global contrapositive at the sampled witness of X.
    let scan_x = moduli_scan(x, 2048)?;
    if scan_x.report.s_upper < threshold {
        let mut w0 = scan_x.s_witness.clone();
        w0.resize(sum_dim, 0.0);
        let m_hat = par::map_reduce(
            blocks,
            f64::NEG_INFINITY,
            |blk| {
                let mut w = Vec::with_capacity(sum_dim);
                let mut plus = vec![0.0; sum_dim];
                let mut minus = vec![0.0; sum_dim];
                let mut best = f64::NEG_INFINITY;
                let end = ((blk + 1) * SCAN_BLOCK).min(total);
                for idx in blk * SCAN_BLOCK..end {
                    sum_cover.point_into(&sum, idx, &mut w);
                    for k in 0..sum_dim {
                        plus[k] = w0[k] + w[k];
                        minus[k] = w0[k] - w[k];
                    }
                    best = best.max(sum.norm(&plus).min(sum.norm(&minus)));
                }
                best
            },
            f64::max,
        );
        let sum_upper = m_hat + rho;
        let margin2 = (2.0 - delta) - sum_upper;
        notes.push(format!(
            "contrapositive: s upper bound of X {:.4} < threshold, embedded witness gives sum s upper bound {:.4} against 2 - delta = {:.4}",
            scan_x.report.s_upper,
            sum_upper,
            2.0 - delta
        ));
        if margin2 < worst {
            worst = margin2;
            if margin2 < 0.0 {
                counterexample = Some(Counterexample {
                    coords: w0,
                    values: vec![("sum s upper bound".into(), sum_upper)],
                });
            }
        }
    } else {
        notes.push(
            "s-modulus of X does not sit below the threshold; contrapositive not applicable"
                .into(),
        );
    }

    let verdict = if counterexample.is_some() {
        Verdict::Fail
    } else if acc.qualifying == 0 {
        Verdict::Vacuous
    } else {
        Verdict::Pass
    };
    Ok(VerificationReport {
        claim_id: "sum-pushout".into(),
        instance,
        samples: total as u64 * nx as u64,
        worst_margin: worst,
        verdict,
        counterexample,
        notes,
    })
}

/// Defect transfer into a direct sum: if Y holds a unit vector whose sampled
/// squareness defect is at least mu, then the embedded copy (0, y) keeps a
/// defect of at least g(mu) = min(lasq2(F, mu/2), mu/2) in X (+)_F Y.
///
/// Why g works: suppose some unit (u, v) had both || (0,y) +- (u,v) || within
/// g of 1. Averaging gives both values >= 1 - g and at least one >= 1, hence
/// F(||u||, 1) <= 1 + g (monotonicity through ||y +- v|| whose max is >= 1),
/// so lasq2 forces ||v|| >= 1 - mu/2; renormalising v moves each norm by at
/// most mu/2, producing a unit v' with both ||y +- v'|| within g + mu/2 <= mu
/// of 1, contradicting the defect of y.
pub fn check_sum_lasq_transfer(
    x: &FiniteSpace,
    y: &FiniteSpace,
    f: &AbsoluteNorm,
    mu: f64,
    resolution: usize,
) -> Result<VerificationReport, CheckError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(CheckError::Unsupported("mu must lie in (0, 1)".into()));
    }
    let sum_dim = x.dim() + y.dim();
    if sum_dim > 4 {
        return Err(CheckError::Unsupported(format!(
            "sum dimension {sum_dim} exceeds the certified range (4)"
        )));
    }
    let instance = format!("X={x}, Y={y}, F={f}, mu={mu}");
    let g = lasq2_modulus(f, mu / 2.0, 4096)?.min(mu / 2.0);
    let scan_y = moduli_scan(y, crate::space::default_resolution(y.dim()))?;
    if scan_y.report.lasq_defect_lower < mu {
        return Ok(VerificationReport {
            claim_id: "sum-defect-transfer".into(),
            instance,
            samples: 0,
            worst_margin: 0.0,
            verdict: Verdict::Vacuous,
            counterexample: None,
            notes: vec![format!(
                "certified defect lower bound {:.4} of Y does not reach mu={mu}; hypothesis not met",
                scan_y.report.lasq_defect_lower
            )],
        });
    }
    let sum = FiniteSpace::fsum(x.clone(), y.clone(), f.clone());
    let mut x0 = vec![0.0; x.dim()];
    x0.extend_from_slice(&scan_y.lam_witness);
    let sum_cover = build_cover(&sum, resolution)?;
    let total = sum_cover.len();
    let blocks = total.div_ceil(SCAN_BLOCK);
    let acc = par::map_reduce(
        blocks,
        (f64::INFINITY, 0usize),
        |blk| {
            let mut w = Vec::with_capacity(sum_dim);
            let mut plus = vec![0.0; sum_dim];
            let mut minus = vec![0.0; sum_dim];
            let mut best = (f64::INFINITY, 0usize);
            let end = ((blk + 1) * SCAN_BLOCK).min(total);
            for idx in blk * SCAN_BLOCK..end {
                sum_cover.point_into(&sum, idx, &mut w);
                for k in 0..sum_dim {
                    plus[k] = x0[k] + w[k];
                    minus[k] = x0[k] - w[k];
                }
                let defect = (sum.norm(&plus) - 1.0)
                    .abs()
                    .max((sum.norm(&minus) - 1.0).abs());
                if defect < best.0 {
                    best = (defect, idx);
                }
            }
            best
        },
        par::min_arg,
    );
    let worst = acc.0 - g + 1e-9;
    let verdict = if worst < 0.0 {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(VerificationReport {
        claim_id: "sum-defect-transfer".into(),
        instance,
        samples: total as u64,
        worst_margin: worst,
        verdict,
        counterexample: if verdict == Verdict::Fail {
            Some(Counterexample {
                coords: sum_cover.point(&sum, acc.1),
                values: vec![("defect".into(), acc.0), ("g".into(), g)],
            })
        } else {
            None
        },
        notes: vec![format!(
            "g={g:.6}, embedded witness defect lower bound {:.4}",
            scan_y.report.lasq_defect_lower
        )],
    })
}

/// No square configurations in a direct sum whose weight norm is bounded away
/// from the max norm: for every sampled unit (u, v) of the sum, either every
/// unit x of X is pushed above 1 + delta by u (in the stronger two-sided
/// sense through F), or every unit y of Y is pushed above 1 + delta by v.
///
/// The quantified claim "for all x and y, one of the four norms exceeds
/// 1 + delta" decomposes as max(min over x of the u-side pair maximum, min
/// over y of the v-side pair maximum) >= 1 + delta, which is what the scan
/// computes per sum sample.
pub fn check_asq_impossible(
    x: &FiniteSpace,
    y: &FiniteSpace,
    f: &AbsoluteNorm,
    resolution: usize,
) -> Result<VerificationReport, CheckError> {
    let sum_dim = x.dim() + y.dim();
    if sum_dim > 4 {
        return Err(CheckError::Unsupported(format!(
            "sum dimension {sum_dim} exceeds the certified range (4)"
        )));
    }
    let delta = asq_obstruction(f)?;
    let instance = format!("X={x}, Y={y}, F={f}");
    let ldim = x.dim();
    let x_cover = build_cover(x, 64)?;
    let y_cover = build_cover(y, 64)?;
    let x_pts = x_cover.materialize(x);
    let y_pts = y_cover.materialize(y);
    let (nx, ny) = (x_cover.len(), y_cover.len());
    let sum = FiniteSpace::fsum(x.clone(), y.clone(), f.clone());
    let sum_cover = build_cover(&sum, resolution)?;
    let total = sum_cover.len();
    let blocks = total.div_ceil(SCAN_BLOCK);
    let acc = par::map_reduce(
        blocks,
        (f64::INFINITY, 0usize),
        |blk| {
            let mut w = Vec::with_capacity(sum_dim);
            let mut shifted = vec![0.0; sum_dim];
            let mut best = (f64::INFINITY, 0usize);
            let end = ((blk + 1) * SCAN_BLOCK).min(total);
            for idx in blk * SCAN_BLOCK..end {
                sum_cover.point_into(&sum, idx, &mut w);
                let (u, v) = w.split_at(ldim);
                let nu = x.norm(u);
                let nv = y.norm(v);
                let mut u_side = f64::INFINITY;
                for xp in x_pts.chunks_exact(ldim) {
                    let mut pair = f64::NEG_INFINITY;
                    for sgn in [1.0, -1.0] {
                        for k in 0..ldim {
                            shifted[k] = xp[k] + sgn * u[k];
                        }
                        pair = pair.max(f.evaluate(x.norm(&shifted[..ldim]), nv));
                    }
                    u_side = u_side.min(pair);
                }
                let rdim = sum_dim - ldim;
                let mut v_side = f64::INFINITY;
                for yp in y_pts.chunks_exact(rdim) {
                    let mut pair = f64::NEG_INFINITY;
                    for sgn in [1.0, -1.0] {
                        for k in 0..rdim {
                            shifted[k] = yp[k] + sgn * v[k];
                        }
                        pair = pair.max(f.evaluate(nu, y.norm(&shifted[..rdim])));
                    }
                    v_side = v_side.min(pair);
                }
                let score = u_side.max(v_side);
                if score < best.0 {
                    best = (score, idx);
                }
            }
            best
        },
        par::min_arg,
    );
    let worst = acc.0 - (1.0 + delta) + 1e-9;
    let verdict = if worst < 0.0 {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(VerificationReport {
        claim_id: "sum-never-square".into(),
        instance,
        samples: total as u64 * (nx + ny) as u64,
        worst_margin: worst,
        verdict,
        counterexample: if verdict == Verdict::Fail {
            Some(Counterexample {
                coords: sum_cover.point(&sum, acc.1),
                values: vec![("score".into(), acc.0), ("delta".into(), delta)],
            })
        } else {
            None
        },
        notes: vec![format!("delta={delta:.6}")],
    })
}

/// The s-modulus only sees the isometry class: an invertible image of X
/// carries the same modulus. Asserted twice: the certified brackets of X and
/// its pushforward must overlap, and the midpoint gap must respect the
/// quantitative bound 4 d with d the measured norm distortion of T inside X.
///
/// Why the constant 4: scale T so ||T|| = 1, ||T^{-1}|| = 1 + d (d <= 1/2).
/// Unit vectors map to norms in [1/(1+d), 1]; renormalising the image moves
/// it by at most d. For unit x, z: ||Tx +- Tz|| >= ||x +- z|| / (1 + d), so
/// the renormalised images satisfy ||x' +- z'|| >= ||x +- z|| - 2d -
/// 2 d/(1+d) >= ||x +- z|| - 4 d (using ||x +- z|| <= 2). All min/max/inf/sup
/// steps defining the modulus preserve such a uniform shift.
pub fn check_s_isometry_invariance(
    x: &FiniteSpace,
    map: &LinearMap,
    resolution: usize,
) -> Result<VerificationReport, CheckError> {
    let y = FiniteSpace::pushforward(x.clone(), map)?;
    let rx = s_modulus(x, resolution)?;
    let ry = s_modulus(&y, resolution)?;
    let overlap_margin = (ry.s_upper - rx.s_lower).min(rx.s_upper - ry.s_lower);
    let d = (operator_norm(map, x, x, 4096)?.hi
        * operator_norm(&map.inverse().map_err(CheckError::Bm)?, x, x, 4096)?.hi
        - 1.0)
        .max(0.0);
    let mid_x = 0.5 * (rx.s_lower + rx.s_upper);
    let mid_y = 0.5 * (ry.s_lower + ry.s_upper);
    let half_widths = 0.5 * (rx.s_upper - rx.s_lower) + 0.5 * (ry.s_upper - ry.s_lower);
    let quant_margin = 4.0 * d + half_widths - (mid_x - mid_y).abs();
    let worst = overlap_margin.min(quant_margin);
    let verdict = if worst < 0.0 {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(VerificationReport {
        claim_id: "modulus-isometry-invariance".into(),
        instance: format!("X={x}, T={:?}", map.matrix),
        samples: 2 * resolution as u64,
        worst_margin: worst,
        verdict,
        counterexample: if verdict == Verdict::Fail {
            Some(Counterexample {
                coords: vec![],
                values: vec![
                    ("s bracket X lo".into(), rx.s_lower),
                    ("s bracket X hi".into(), rx.s_upper),
                    ("s bracket image lo".into(), ry.s_lower),
                    ("s bracket image hi".into(), ry.s_upper),
                    ("distortion d".into(), d),
                ],
            })
        } else {
            None
        },
        notes: vec![format!(
            "X bracket [{:.6}, {:.6}], image bracket [{:.6}, {:.6}], distortion {:.3e}",
            rx.s_lower, rx.s_upper, ry.s_lower, ry.s_upper, d
        )],
    })
}
