//! Inference when every pair shares one shifted noise shape: cross-pair
//! frequency comparisons through a shared pivot extend the ordinal relation,
//! and the half-odds percentile of the pivot pairs turns into a closed-form
//! out-of-sample choice-probability predictor.

use serde::{Deserialize, Serialize};

use crate::data_model::OptionId;
use crate::dataset::{AnalysisError, Dataset};
use crate::exec;
use crate::relations::{Provenance, Relation, RevelationEdge, Strength};
use crate::symmetric::{build_symmetric_relation, SymmetricAnalysis, SymmetricOptions};

/// Options for cross-pivot reveals and probability prediction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FechnerOptions {
    /// Strictness margin on cross-pair probability comparisons.
    pub prob_margin: f64,
    /// Width of the tie band around 1/2 for case routing. `None` chooses
    /// 2/sqrt(n) on empirical data and exact ties on analytic data.
    pub tie_tol: Option<f64>,
    /// Pivot predictions further apart than this are flagged inconsistent.
    pub spread_tol: f64,
}

impl Default for FechnerOptions {
    fn default() -> Self {
        FechnerOptions {
            prob_margin: 0.0,
            tie_tol: None,
            spread_tol: 0.05,
        }
    }
}

/// The half-odds percentile of a favored direction: the response time by
/// which probability mass 1/(2 p(x,y)) of x-choices has accrued. Under the
/// shared-shape assumption it estimates the response time at the underlying
/// utility difference itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaStat {
    pub x: OptionId,
    pub y: OptionId,
    /// Percentile level 1/(2 p(x,y)), in (1/2, 1).
    pub target_alpha: f64,
    pub theta: f64,
}

/// The half-odds percentile theta(x,y), defined only when p(x,y) > 1/2.
pub fn theta_percentile(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
) -> Result<ThetaStat, AnalysisError> {
    let p = ds.prob(x, y)?;
    if !(p > 0.5) {
        return Err(AnalysisError::PercentileUndefined {
            x: x.to_string(),
            y: y.to_string(),
            p,
            threshold: 0.5,
        });
    }
    let alpha = 1.0 / (2.0 * p);
    let theta = ds.rt_cdf(x, y)?.quantile(alpha)?;
    Ok(ThetaStat {
        x: x.clone(),
        y: y.clone(),
        target_alpha: alpha,
        theta,
    })
}

/// Cross-pivot reveal for an unobserved pair (x,y): any pivot z with both
/// pairs observed and p(x,z) >= p(y,z) reveals a weak preference for x.
pub fn reveal_fechner(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    opts: &FechnerOptions,
) -> Result<Option<(RevelationEdge, OptionId)>, AnalysisError> {
    if x == y {
        return Err(AnalysisError::DegeneratePair(x.to_string()));
    }
    if ds.contains_pair(x, y) {
        return Err(AnalysisError::PairObserved(x.to_string(), y.to_string()));
    }
    let mut best: Option<(RevelationEdge, OptionId)> = None;
    for z in ds.options() {
        if &z == x || &z == y || !ds.contains_pair(x, &z) || !ds.contains_pair(y, &z) {
            continue;
        }
        let p_xz = ds.prob(x, &z)?;
        let p_yz = ds.prob(y, &z)?;
        if p_xz < p_yz {
            continue;
        }
        let strict = p_xz > p_yz + opts.prob_margin;
        let edge = RevelationEdge {
            from: x.clone(),
            to: y.clone(),
            strength: if strict {
                Strength::Strict
            } else {
                Strength::Weak
            },
            provenance: Provenance::CrossPivot,
        };
        match &best {
            Some((e, _)) if e.strength == Strength::Strict => break,
            _ => {
                let replace = best.is_none() || strict;
                if replace {
                    best = Some((edge, z.clone()));
                }
            }
        }
    }
    Ok(best)
}

/// Cross-pivot relation plus the closure of (frequency union cross-pivot).
#[derive(Debug, Clone, Serialize)]
pub struct FechnerAnalysis {
    /// Cross-pivot edges with their witnessing pivot.
    pub cross_pivot_edges: Vec<(RevelationEdge, OptionId)>,
    pub r_cross_pivot: Relation,
    /// T(frequency union cross-pivot).
    pub closure: Relation,
    /// The symmetric-class analysis this builds on.
    pub symmetric: SymmetricAnalysis,
}

/// Builds the cross-pivot relation over all unobserved pairs and closes it
/// jointly with the frequency relation.
pub fn build_fechner_relation(
    ds: &Dataset,
    sym_opts: &SymmetricOptions,
    opts: &FechnerOptions,
) -> Result<FechnerAnalysis, AnalysisError> {
    let symmetric = build_symmetric_relation(ds, sym_opts)?;
    let unobserved = ds.unobserved_pairs();
    let mut work: Vec<(OptionId, OptionId)> = Vec::new();
    for key in &unobserved {
        work.push((key.first().clone(), key.second().clone()));
        work.push((key.second().clone(), key.first().clone()));
    }
    let found: Vec<Option<(RevelationEdge, OptionId)>> = exec::map_items(&work, |(x, y)| {
        reveal_fechner(ds, x, y, opts).expect("pairs validated")
    });

    let mut cross_pivot_edges = Vec::new();
    let mut r_cross_pivot = Relation::new();
    for item in found.into_iter().flatten() {
        r_cross_pivot.insert(item.0.from.clone(), item.0.to.clone(), item.0.strength);
        cross_pivot_edges.push(item);
    }
    let closure = symmetric
        .r_frequency
        .union(&r_cross_pivot)
        .transitive_closure();
    Ok(FechnerAnalysis {
        cross_pivot_edges,
        r_cross_pivot,
        closure,
        symmetric,
    })
}

/// Where the weaker spoke's frequency against the pivot sits relative to 1/2,
/// which decides the prediction formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionCase {
    /// p(y,z) > 1/2: discount p(x,z) by the mass of x-choices faster than
    /// theta(y,z).
    WeakerAboveHalf,
    /// p(y,z) = 1/2 within the tie band: the prediction is p(x,z) itself.
    WeakerAtHalf,
    /// p(y,z) < 1/2: predict through the complementary direction.
    WeakerBelowHalf,
}

/// Inputs consumed by one prediction, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionInputs {
    pub p_xz: f64,
    pub p_yz: f64,
    /// CDF value at the percentile actually used, when a percentile is used.
    pub cdf_at_theta: Option<f64>,
}

/// An out-of-sample choice-probability prediction through one pivot.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionResult {
    pub x: OptionId,
    pub y: OptionId,
    pub pivot: OptionId,
    pub case: PredictionCase,
    /// Predicted p(x,y).
    pub p_bar: f64,
    /// True when the pair was reoriented so that p(x,z) >= p(y,z) internally
    /// and the reported value is the complement.
    pub swapped: bool,
    pub theta_used: Option<ThetaStat>,
    pub inputs: PredictionInputs,
    /// False when the prediction leaves (0,1): evidence against the
    /// shared-shape assumption. Never clamped.
    pub in_range: bool,
}

fn effective_tie_tol(ds: &Dataset, y: &OptionId, z: &OptionId, opts: &FechnerOptions) -> f64 {
    match opts.tie_tol {
        Some(t) => t,
        None => match ds.trial_count(y, z) {
            Some(n) if n > 0 => 2.0 / (n as f64).sqrt(),
            _ => 0.0,
        },
    }
}

/// Predicts p(x,y) for an unobserved pair from the observed pairs (x,z) and
/// (y,z).
///
/// With the orientation normalized so p(x,z) >= p(y,z), the prediction is
/// p(x,z) F(x,z)(theta(y,z)) when p(y,z) > 1/2, p(x,z) at the tie, and the
/// complement route 1 - p(z,x) F(z,x)(theta(z,y)) when p(y,z) < 1/2.
pub fn predict_probability(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    z: &OptionId,
    opts: &FechnerOptions,
) -> Result<PredictionResult, AnalysisError> {
    if x == y || x == z || y == z {
        return Err(AnalysisError::DegeneratePair(
            if x == y { x } else { z }.to_string(),
        ));
    }
    if ds.contains_pair(x, y) {
        return Err(AnalysisError::PairObserved(x.to_string(), y.to_string()));
    }
    let p_xz = ds.prob(x, z)?;
    let p_yz = ds.prob(y, z)?;
    if p_xz < p_yz {
        let inner = predict_normalized(ds, y, x, z, opts)?;
        return Ok(PredictionResult {
            x: x.clone(),
            y: y.clone(),
            pivot: z.clone(),
            case: inner.case,
            p_bar: 1.0 - inner.p_bar,
            swapped: true,
            theta_used: inner.theta_used,
            inputs: inner.inputs,
            in_range: inner.in_range,
        });
    }
    predict_normalized(ds, x, y, z, opts)
}

fn predict_normalized(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    z: &OptionId,
    opts: &FechnerOptions,
) -> Result<PredictionResult, AnalysisError> {
    let p_xz = ds.prob(x, z)?;
    let p_yz = ds.prob(y, z)?;
    let tie = effective_tie_tol(ds, y, z, opts);

    let (case, p_bar, theta_used, cdf_at_theta) = if (p_yz - 0.5).abs() <= tie {
        (PredictionCase::WeakerAtHalf, p_xz, None, None)
    } else if p_yz > 0.5 {
        let theta = theta_percentile(ds, y, z)?;
        let f = ds.rt_cdf(x, z)?.eval(theta.theta);
        (
            PredictionCase::WeakerAboveHalf,
            p_xz * f,
            Some(theta),
            Some(f),
        )
    } else {
        let theta = theta_percentile(ds, z, y)?;
        let f = ds.rt_cdf(z, x)?.eval(theta.theta);
        (
            PredictionCase::WeakerBelowHalf,
            1.0 - (1.0 - p_xz) * f,
            Some(theta),
            Some(f),
        )
    };

    let in_range = p_bar > 0.0 && p_bar < 1.0;
    Ok(PredictionResult {
        x: x.clone(),
        y: y.clone(),
        pivot: z.clone(),
        case,
        p_bar,
        swapped: false,
        theta_used,
        inputs: PredictionInputs {
            p_xz,
            p_yz,
            cdf_at_theta,
        },
        in_range,
    })
}

/// All predictions for one unobserved pair, one per admissible pivot, plus
/// the spread across pivots as a shared-shape consistency diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct PairPredictions {
    pub x: OptionId,
    pub y: OptionId,
    pub predictions: Vec<PredictionResult>,
    /// max - min of the pivot predictions.
    pub spread: f64,
    /// False when the spread exceeds the tolerance: the pivots disagree more
    /// than a single shared noise shape allows.
    pub consistent: bool,
}

/// Predicts every unobserved pair that has at least one pivot. Multiple
/// pivots are all reported; disagreement is surfaced, never averaged away.
pub fn predict_all(ds: &Dataset, opts: &FechnerOptions) -> Vec<PairPredictions> {
    let options = ds.options();
    let unobserved = ds.unobserved_pairs();
    let work: Vec<_> = unobserved
        .iter()
        .map(|k| (k.first().clone(), k.second().clone()))
        .collect();
    let results: Vec<Option<PairPredictions>> = exec::map_items(&work, |(x, y)| {
        let mut predictions = Vec::new();
        for z in &options {
            if z == x || z == y || !ds.contains_pair(x, z) || !ds.contains_pair(y, z) {
                continue;
            }
            if let Ok(p) = predict_probability(ds, x, y, z, opts) {
                predictions.push(p);
            }
        }
        if predictions.is_empty() {
            return None;
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &predictions {
            lo = lo.min(p.p_bar);
            hi = hi.max(p.p_bar);
        }
        let spread = hi - lo;
        Some(PairPredictions {
            x: x.clone(),
            y: y.clone(),
            predictions,
            spread,
            consistent: spread <= opts.spread_tol,
        })
    });
    results.into_iter().flatten().collect()
}
