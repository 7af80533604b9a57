//! Preference revelation without distributional assumptions: the scaled
//! first-order stochastic dominance test on conditional response-time
//! distributions, the pointwise choice-odds curve, the density-ratio
//! sufficient condition, and the induced relation with its transitive
//! closure.

use serde::{Deserialize, Serialize};

use crate::data_model::OptionId;
use crate::dataset::{AnalysisError, Dataset, RtCdf};
use crate::exec;
use crate::math;
use crate::relations::{Provenance, Relation, RevelationEdge, Strength};

/// Tolerances and grid resolution for dominance checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominanceOptions {
    /// Slack allowed when testing G(t) <= q H(t): the test passes when
    /// q H(t) - G(t) >= -tol everywhere.
    pub tol: f64,
    /// Margin required somewhere for a strict verdict.
    pub strict_tol: f64,
    /// Number of log-spaced points for comparisons involving smooth CDFs.
    pub grid_points: usize,
}

impl Default for DominanceOptions {
    fn default() -> Self {
        DominanceOptions {
            tol: 0.0,
            strict_tol: 0.0,
            grid_points: 10_000,
        }
    }
}

/// Outcome of a scaled dominance comparison `G <= q H`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub holds: bool,
    pub strict: bool,
    pub q: f64,
    /// min over checked t of q H(t) - G(t); negative values mean violation.
    pub worst_margin: f64,
    /// Location where the worst margin is attained.
    pub witness_t: f64,
    /// A location with strictly positive margin, when one exists.
    pub strict_witness_t: Option<f64>,
}

/// Shared grid for comparisons against smooth CDFs: log-spaced over the
/// combined reference span widened by two decades each way.
fn smooth_grid(g: &RtCdf, h: &RtCdf, points: usize) -> Vec<f64> {
    let (g_lo, g_hi) = g.span();
    let (h_lo, h_hi) = h.span();
    let lo = (g_lo.min(h_lo) * 1e-2).max(1e-300);
    let hi = (g_hi.max(h_hi) * 1e2).max(lo * 2.0);
    math::log_grid(lo, hi, points.max(2))
}

/// Tests whether `G(t) <= q * H(t)` at every response time, with strictness
/// when the inequality has slack somewhere.
///
/// For step CDFs the binding points are G's jump points (G is constant
/// between its jumps and H is nondecreasing); strictness is additionally
/// checked at H's jumps. Smooth comparisons run on a dense log grid.
pub fn q_fsd(g: &RtCdf, h: &RtCdf, q: f64, opts: &DominanceOptions) -> DominanceVerdict {
    assert!(q > 0.0, "dominance ratio must be positive");
    let margin_at = |t: f64| q * h.eval(t) - g.eval(t);

    let (hold_points, strict_points): (Vec<f64>, Vec<f64>) =
        match (g.jump_points(), h.jump_points()) {
            (Some(gj), Some(hj)) => {
                let mut union: Vec<f64> = gj.iter().chain(hj.iter()).copied().collect();
                union.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                union.dedup();
                (gj.to_vec(), union)
            }
            _ => {
                let grid = smooth_grid(g, h, opts.grid_points);
                (grid.clone(), grid)
            }
        };

    let mut worst = f64::INFINITY;
    let mut witness = f64::NAN;
    for &t in &hold_points {
        let m = margin_at(t);
        if m < worst {
            worst = m;
            witness = t;
        }
    }
    let mut strict_witness = None;
    for &t in &strict_points {
        if margin_at(t) > opts.strict_tol {
            strict_witness = Some(t);
            break;
        }
    }

    let holds = worst >= -opts.tol;
    DominanceVerdict {
        holds,
        strict: holds && strict_witness.is_some(),
        q,
        worst_margin: worst,
        witness_t: witness,
        strict_witness_t: strict_witness,
    }
}

/// A dominance verdict for one directed pair together with the edge it
/// induces, when any.
#[derive(Debug, Clone, Serialize)]
pub struct PairDominance {
    pub x: OptionId,
    pub y: OptionId,
    pub p: f64,
    pub verdict: DominanceVerdict,
    pub edge: Option<RevelationEdge>,
}

/// Applies the dominance criterion to one observed directed pair: the
/// response times of the less-favored direction must not be too much faster,
/// scaled by the choice odds q = p(x,y)/p(y,x).
pub fn reveal_unrestricted(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    opts: &DominanceOptions,
) -> Result<PairDominance, AnalysisError> {
    let p = ds.prob(x, y)?;
    let q = p / (1.0 - p);
    let g = ds.rt_cdf(y, x)?;
    let h = ds.rt_cdf(x, y)?;
    let verdict = q_fsd(&g, &h, q, opts);
    let edge = verdict.holds.then(|| RevelationEdge {
        from: x.clone(),
        to: y.clone(),
        strength: if verdict.strict {
            Strength::Strict
        } else {
            Strength::Weak
        },
        provenance: Provenance::RtDominance,
    });
    Ok(PairDominance {
        x: x.clone(),
        y: y.clone(),
        p,
        verdict,
        edge,
    })
}

/// One point of the conditional choice-odds curve Q(x,y)(t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QRatioPoint {
    pub t: f64,
    /// None when the ratio is infinite (positive mass over zero).
    pub q: Option<f64>,
    /// False when both numerator and denominator vanish at t.
    pub defined: bool,
}

/// Q(x,y)(t) = p(x,y) F(x,y)(t) / (p(y,x) F(y,x)(t)) over a caller-supplied
/// grid. Undefined points (0/0) are flagged rather than skipped so the grid
/// is preserved.
pub fn q_ratio_curve(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    grid: &[f64],
) -> Result<Vec<QRatioPoint>, AnalysisError> {
    let p = ds.prob(x, y)?;
    let f_xy = ds.rt_cdf(x, y)?;
    let f_yx = ds.rt_cdf(y, x)?;
    Ok(grid
        .iter()
        .map(|&t| {
            let num = p * f_xy.eval(t);
            let den = (1.0 - p) * f_yx.eval(t);
            if den > 0.0 {
                QRatioPoint {
                    t,
                    q: Some(num / den),
                    defined: true,
                }
            } else if num > 0.0 {
                QRatioPoint {
                    t,
                    q: None,
                    defined: true,
                }
            } else {
                QRatioPoint {
                    t,
                    q: None,
                    defined: false,
                }
            }
        })
        .collect())
}

/// Options for the binned density-ratio check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityRatioOptions {
    /// Number of equal-count bins over the pooled response times.
    pub bins: usize,
    /// Bins with fewer pooled observations than this are not trusted.
    pub min_count: usize,
    /// Relative slack: a bin fails only when ratio < 1 - tol.
    pub tol: f64,
    /// Grid resolution for the closed-form route.
    pub grid_points: usize,
}

impl Default for DensityRatioOptions {
    fn default() -> Self {
        DensityRatioOptions {
            bins: 32,
            min_count: 10,
            tol: 0.0,
            grid_points: 10_000,
        }
    }
}

/// Three-way outcome of the density-ratio condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioVerdict {
    Holds { strict: bool },
    Fails,
    Inconclusive { reason: String },
}

/// One bin of the empirical weighted-histogram comparison. The ratio of
/// weighted densities reduces to the raw count ratio because both sides share
/// the pooled denominator and bin width.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioBin {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Mean pooled response time inside the bin.
    pub t_mean: f64,
    pub count_favored: usize,
    pub count_other: usize,
    /// count_favored / count_other; None when the other side is empty.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityRatioReport {
    pub verdict: RatioVerdict,
    /// Smallest finite ratio seen, with its location.
    pub min_ratio: Option<f64>,
    pub witness_t: Option<f64>,
    /// Populated for the empirical route only.
    pub bins: Vec<RatioBin>,
}

/// Checks whether x is at least as likely as y to be chosen at (almost)
/// every response time: the instantaneous weighted density of x-choices must
/// dominate y-choices.
///
/// Empirical data is compared on equal-count bins of the pooled response
/// times; closed-form fixtures are compared pointwise on a dense grid.
pub fn density_ratio_check(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    opts: &DensityRatioOptions,
) -> Result<DensityRatioReport, AnalysisError> {
    ds.prob(x, y)?; // validates the pair
    match (ds.rt_samples(x, y), ds.rt_samples(y, x)) {
        (Some(sx), Some(sy)) => Ok(binned_ratio_check(sx, sy, opts)),
        _ => pointwise_ratio_check(ds, x, y, opts),
    }
}

fn binned_ratio_check(sx: &[f64], sy: &[f64], opts: &DensityRatioOptions) -> DensityRatioReport {
    let mut pooled: Vec<f64> = sx.iter().chain(sy.iter()).copied().collect();
    pooled.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = pooled.len();
    let k = opts.bins.max(1).min(n);
    // equal-count edges over the pooled sample
    let mut edges: Vec<f64> = (1..k).map(|i| pooled[i * n / k]).collect();
    edges.dedup();
    let lo = pooled[0];
    let hi = pooled[n - 1];

    let bin_of = |t: f64| edges.partition_point(|&e| e <= t);
    let n_bins = edges.len() + 1;
    let mut cx = vec![0usize; n_bins];
    let mut cy = vec![0usize; n_bins];
    let mut t_sum = vec![0.0f64; n_bins];
    for &t in sx {
        let b = bin_of(t);
        cx[b] += 1;
        t_sum[b] += t;
    }
    for &t in sy {
        let b = bin_of(t);
        cy[b] += 1;
        t_sum[b] += t;
    }

    let mut bins = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let total = cx[b] + cy[b];
        let t_lo = if b == 0 { lo } else { edges[b - 1] };
        let t_hi = if b == n_bins - 1 { hi } else { edges[b] };
        bins.push(RatioBin {
            t_lo,
            t_hi,
            t_mean: if total > 0 {
                t_sum[b] / total as f64
            } else {
                0.5 * (t_lo + t_hi)
            },
            count_favored: cx[b],
            count_other: cy[b],
            ratio: if cy[b] > 0 {
                Some(cx[b] as f64 / cy[b] as f64)
            } else {
                None
            },
        });
    }

    let populated: Vec<&RatioBin> = bins
        .iter()
        .filter(|b| b.count_favored + b.count_other >= opts.min_count)
        .collect();
    let thin_violation = bins
        .iter()
        .filter(|b| b.count_favored + b.count_other < opts.min_count)
        .any(|b| (b.count_favored as f64) < (1.0 - opts.tol) * b.count_other as f64);

    let mut min_ratio = None;
    let mut witness = None;
    let mut failed = false;
    let mut strict = false;
    for b in &populated {
        if let Some(r) = b.ratio {
            if min_ratio.is_none_or(|m| r < m) {
                min_ratio = Some(r);
                witness = Some(b.t_mean);
            }
            if r < 1.0 - opts.tol {
                failed = true;
            }
            if r > 1.0 + opts.tol {
                strict = true;
            }
        }
    }

    let verdict = if populated.len() < 2 {
        RatioVerdict::Inconclusive {
            reason: "fewer than two populated bins".into(),
        }
    } else if failed {
        RatioVerdict::Fails
    } else if thin_violation {
        RatioVerdict::Inconclusive {
            reason: "violation inside an under-populated bin".into(),
        }
    } else {
        RatioVerdict::Holds { strict }
    };
    let witness_t = if failed { witness } else { None };
    DensityRatioReport {
        verdict,
        min_ratio,
        witness_t,
        bins,
    }
}

fn pointwise_ratio_check(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    opts: &DensityRatioOptions,
) -> Result<DensityRatioReport, AnalysisError> {
    let (fx, fy) = match (ds.rt_density(x, y), ds.rt_density(y, x)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Ok(DensityRatioReport {
                verdict: RatioVerdict::Inconclusive {
                    reason: "no closed-form densities available".into(),
                },
                min_ratio: None,
                witness_t: None,
                bins: vec![],
            })
        }
    };
    let p = ds.prob(x, y)?;
    let g = RtCdf::Smooth(fx);
    let h = RtCdf::Smooth(fy);
    let grid = smooth_grid(&g, &h, opts.grid_points);

    let mut min_ratio: Option<f64> = None;
    let mut witness = None;
    let mut failed = false;
    let mut strict = false;
    let mut seen = 0usize;
    for &t in &grid {
        let num = p * fx.pdf(t).unwrap_or(0.0);
        let den = (1.0 - p) * fy.pdf(t).unwrap_or(0.0);
        if den <= 0.0 {
            if num > 0.0 {
                strict = true; // infinite ratio
                seen += 1;
            }
            continue;
        }
        seen += 1;
        let r = num / den;
        if min_ratio.is_none_or(|m| r < m) {
            min_ratio = Some(r);
            witness = Some(t);
        }
        if r < 1.0 - opts.tol {
            failed = true;
        }
        if r > 1.0 + opts.tol {
            strict = true;
        }
    }
    let verdict = if seen < 2 {
        RatioVerdict::Inconclusive {
            reason: "densities vanish over the whole grid".into(),
        }
    } else if failed {
        RatioVerdict::Fails
    } else {
        RatioVerdict::Holds { strict }
    };
    Ok(DensityRatioReport {
        verdict,
        min_ratio,
        witness_t: if failed { witness } else { None },
        bins: vec![],
    })
}

/// The dominance-revealed relation over the whole dataset, with its closure.
#[derive(Debug, Clone, Serialize)]
pub struct UnrestrictedAnalysis {
    /// Both orientations of every observed pair.
    pub reveals: Vec<PairDominance>,
    /// Directly revealed relation (reflexive edges included).
    pub relation: Relation,
    /// Transitive closure; its strict part is the asymmetric part.
    pub closure: Relation,
}

/// Runs the dominance criterion over every observed pair (both orientations)
/// and closes the revealed relation transitively.
pub fn build_rt_relation(ds: &Dataset, opts: &DominanceOptions) -> UnrestrictedAnalysis {
    let mut directed: Vec<(OptionId, OptionId)> = Vec::new();
    for key in ds.observed_pairs() {
        directed.push((key.first().clone(), key.second().clone()));
        directed.push((key.second().clone(), key.first().clone()));
    }
    let reveals: Vec<PairDominance> = exec::map_items(&directed, |(x, y)| {
        reveal_unrestricted(ds, x, y, opts).expect("observed pairs are queryable")
    });

    let mut relation = Relation::from_edges(reveals.iter().filter_map(|r| r.edge.as_ref()));
    for o in ds.options() {
        relation.insert_reflexive(o);
    }
    let closure = relation.transitive_closure();
    UnrestrictedAnalysis {
        reveals,
        relation,
        closure,
    }
}
