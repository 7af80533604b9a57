//! Inference under symmetric utility noise: choice frequencies reveal
//! observed pairs directly, and choice-odds percentiles of the response-time
//! distributions extend the revelation to unobserved pairs by triangulating
//! through a shared third option.

use serde::{Deserialize, Serialize};

use crate::data_model::OptionId;
use crate::dataset::{AnalysisError, Dataset};
use crate::exec;
use crate::relations::{Provenance, Relation, RevelationEdge, Strength};

/// Margins for frequency and percentile comparisons.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SymmetricOptions {
    /// Strictness margin on p(x,y) - p(y,x).
    pub prob_margin: f64,
    /// Strictness margin on percentile comparisons, in seconds.
    pub percentile_margin: f64,
}

impl Default for SymmetricOptions {
    fn default() -> Self {
        SymmetricOptions {
            prob_margin: 0.0,
            percentile_margin: 0.0,
        }
    }
}

/// The choice-odds percentile of a favored direction: the response time by
/// which the probability mass p(y,x)/p(x,y) of x-choices has accrued.
/// Small values indicate a strong preference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PercentileStat {
    pub x: OptionId,
    pub y: OptionId,
    /// Percentile level p(y,x)/p(x,y), in (0,1).
    pub target_alpha: f64,
    /// The percentile itself, in seconds.
    pub t: f64,
}

/// The odds percentile t(x,y), defined only when x is the more frequently
/// chosen option of an observed pair.
pub fn t_percentile(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
) -> Result<PercentileStat, AnalysisError> {
    let p = ds.prob(x, y)?;
    if !(p > 0.5) {
        return Err(AnalysisError::PercentileUndefined {
            x: x.to_string(),
            y: y.to_string(),
            p,
            threshold: 0.5,
        });
    }
    let alpha = (1.0 - p) / p;
    let t = ds.rt_cdf(x, y)?.quantile(alpha)?;
    Ok(PercentileStat {
        x: x.clone(),
        y: y.clone(),
        target_alpha: alpha,
        t,
    })
}

/// Frequency reveal on an observed pair: weak when p(x,y) >= p(y,x), strict
/// when the gap exceeds the margin.
pub fn reveal_symmetric_pair(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    opts: &SymmetricOptions,
) -> Result<Option<RevelationEdge>, AnalysisError> {
    let p = ds.prob(x, y)?;
    let gap = 2.0 * p - 1.0; // p(x,y) - p(y,x)
    if gap < 0.0 {
        return Ok(None);
    }
    Ok(Some(RevelationEdge {
        from: x.clone(),
        to: y.clone(),
        strength: if gap > opts.prob_margin {
            Strength::Strict
        } else {
            Strength::Weak
        },
        provenance: Provenance::ChoiceFrequency,
    }))
}

/// Which percentile comparison produced a triangulated edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangulationBranch {
    /// Compared t(x,z) against t(y,z): both spokes beat the pivot.
    SpokesOverPivot,
    /// Compared t(z,x) against t(z,y): the pivot beats both spokes.
    PivotOverSpokes,
}

/// Evidence for one triangulated reveal.
#[derive(Debug, Clone, Serialize)]
pub struct TriangulationWitness {
    pub pivot: OptionId,
    pub branch: TriangulationBranch,
    /// The percentile involving x (t(x,z) or t(z,x) depending on branch).
    pub stat_x: PercentileStat,
    /// The percentile involving y.
    pub stat_y: PercentileStat,
}

/// Outcome of triangulating one unobserved directed pair through one pivot.
#[derive(Debug, Clone, Serialize)]
pub struct TriangulationOutcome {
    pub edge: Option<RevelationEdge>,
    pub witness: Option<TriangulationWitness>,
    /// Why no verdict was reached, when applicable.
    pub diagnostic: Option<String>,
}

/// Triangulates the unobserved pair (x,y) through pivot z: a weak preference
/// for x is revealed when x reaches its odds percentile against z no later
/// than y does (or z reaches it against x no earlier than against y); strict
/// under strict inequality.
pub fn reveal_triangulate(
    ds: &Dataset,
    x: &OptionId,
    y: &OptionId,
    z: &OptionId,
    opts: &SymmetricOptions,
) -> Result<TriangulationOutcome, AnalysisError> {
    if x == y {
        return Err(AnalysisError::DegeneratePair(x.to_string()));
    }
    if ds.contains_pair(x, y) {
        return Err(AnalysisError::PairObserved(x.to_string(), y.to_string()));
    }
    // both pairs with the pivot must be observed
    ds.prob(x, z)?;
    ds.prob(y, z)?;

    // spokes-over-pivot branch: t(x,z) <= t(y,z)
    match (t_percentile(ds, x, z), t_percentile(ds, y, z)) {
        (Ok(sx), Ok(sy)) => {
            if sx.t <= sy.t {
                let strict = sx.t < sy.t - opts.percentile_margin;
                return Ok(TriangulationOutcome {
                    edge: Some(RevelationEdge {
                        from: x.clone(),
                        to: y.clone(),
                        strength: if strict {
                            Strength::Strict
                        } else {
                            Strength::Weak
                        },
                        provenance: Provenance::Triangulation,
                    }),
                    witness: Some(TriangulationWitness {
                        pivot: z.clone(),
                        branch: TriangulationBranch::SpokesOverPivot,
                        stat_x: sx,
                        stat_y: sy,
                    }),
                    diagnostic: None,
                });
            }
            return Ok(TriangulationOutcome {
                edge: None,
                witness: None,
                diagnostic: None,
            });
        }
        (Err(AnalysisError::PercentileUndefined { .. }), _)
        | (_, Err(AnalysisError::PercentileUndefined { .. })) => {}
        (Err(e), _) | (_, Err(e)) => return Err(e),
    }

    // pivot-over-spokes branch: t(z,x) >= t(z,y)
    match (t_percentile(ds, z, x), t_percentile(ds, z, y)) {
        (Ok(sx), Ok(sy)) => {
            if sx.t >= sy.t {
                let strict = sx.t > sy.t + opts.percentile_margin;
                Ok(TriangulationOutcome {
                    edge: Some(RevelationEdge {
                        from: x.clone(),
                        to: y.clone(),
                        strength: if strict { Strength::Strict } else { Strength::Weak },
                        provenance: Provenance::Triangulation,
                    }),
                    witness: Some(TriangulationWitness {
                        pivot: z.clone(),
                        branch: TriangulationBranch::PivotOverSpokes,
                        stat_x: sx,
                        stat_y: sy,
                    }),
                    diagnostic: None,
                })
            } else {
                Ok(TriangulationOutcome { edge: None, witness: None, diagnostic: None })
            }
        }
        (Err(AnalysisError::PercentileUndefined { .. }), _)
        | (_, Err(AnalysisError::PercentileUndefined { .. })) => Ok(TriangulationOutcome {
            edge: None,
            witness: None,
            diagnostic: Some(format!(
                "pivot {z}: required odds percentiles undefined (choice frequencies on the wrong side of 1/2)"
            )),
        }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// An edge of the triangulated relation together with every witness that
/// produced it.
#[derive(Debug, Clone, Serialize)]
pub struct TriangulatedEdge {
    pub from: OptionId,
    pub to: OptionId,
    pub strength: Strength,
    pub witnesses: Vec<TriangulationWitness>,
}

/// Frequency relation, triangulated relation, and their joint closure.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetricAnalysis {
    /// Frequency reveals over observed pairs (both orientations).
    pub frequency_edges: Vec<RevelationEdge>,
    /// Triangulated reveals over unobserved pairs, with witnesses.
    pub triangulated: Vec<TriangulatedEdge>,
    /// Diagnostics for pivots that could not be used.
    pub diagnostics: Vec<String>,
    /// Frequency relation (reflexive edges included).
    pub r_frequency: Relation,
    /// Triangulated relation.
    pub r_triangulated: Relation,
    /// T(frequency union triangulated); strict part is the asymmetric part.
    pub closure: Relation,
}

/// Builds the symmetric-class revealed relations: frequency edges on observed
/// pairs, triangulated edges on unobserved pairs scanning every admissible
/// pivot, and the transitive closure of their union.
///
/// Conflicting pivots both emit edges; cycle diagnostics downstream surface
/// the inconsistency rather than silently reconciling it.
pub fn build_symmetric_relation(
    ds: &Dataset,
    opts: &SymmetricOptions,
) -> Result<SymmetricAnalysis, AnalysisError> {
    let mut frequency_edges = Vec::new();
    for key in ds.observed_pairs() {
        for (x, y) in [
            (key.first().clone(), key.second().clone()),
            (key.second().clone(), key.first().clone()),
        ] {
            if let Some(e) = reveal_symmetric_pair(ds, &x, &y, opts)? {
                frequency_edges.push(e);
            }
        }
    }

    let options = ds.options();
    let unobserved = ds.unobserved_pairs();
    let mut work: Vec<(OptionId, OptionId)> = Vec::new();
    for key in &unobserved {
        work.push((key.first().clone(), key.second().clone()));
        work.push((key.second().clone(), key.first().clone()));
    }

    type FoundEdge = (OptionId, OptionId, Strength, TriangulationWitness);
    let per_pair: Vec<(Vec<FoundEdge>, Vec<String>)> = exec::map_items(&work, |(x, y)| {
        let mut found = Vec::new();
        let mut diags = Vec::new();
        for z in &options {
            if z == x || z == y {
                continue;
            }
            if !ds.contains_pair(x, z) || !ds.contains_pair(y, z) {
                continue;
            }
            match reveal_triangulate(ds, x, y, z, opts) {
                Ok(outcome) => {
                    if let (Some(edge), Some(witness)) = (outcome.edge, outcome.witness) {
                        found.push((x.clone(), y.clone(), edge.strength, witness));
                    } else if let Some(d) = outcome.diagnostic {
                        diags.push(format!("({x},{y}): {d}"));
                    }
                }
                Err(e) => diags.push(format!("({x},{y}) via {z}: {e}")),
            }
        }
        (found, diags)
    });

    let mut triangulated: Vec<TriangulatedEdge> = Vec::new();
    let mut diagnostics = Vec::new();
    for (found, diags) in per_pair {
        diagnostics.extend(diags);
        for (x, y, strength, witness) in found {
            match triangulated.iter_mut().find(|e| e.from == x && e.to == y) {
                Some(entry) => {
                    if strength == Strength::Strict {
                        entry.strength = Strength::Strict;
                    }
                    entry.witnesses.push(witness);
                }
                None => triangulated.push(TriangulatedEdge {
                    from: x,
                    to: y,
                    strength,
                    witnesses: vec![witness],
                }),
            }
        }
    }

    let mut r_frequency = Relation::from_edges(frequency_edges.iter());
    for o in ds.options() {
        r_frequency.insert_reflexive(o);
    }
    let mut r_triangulated = Relation::new();
    for e in &triangulated {
        r_triangulated.insert(e.from.clone(), e.to.clone(), e.strength);
    }
    let closure = r_frequency.union(&r_triangulated).transitive_closure();

    Ok(SymmetricAnalysis {
        frequency_edges,
        triangulated,
        diagnostics,
        r_frequency,
        r_triangulated,
        closure,
    })
}

/// Ordinal out-of-sample prediction for an unobserved pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPrediction {
    /// p(x,y) > 1/2 predicted.
    FirstOverSecond,
    /// p(y,x) > 1/2 predicted.
    SecondOverFirst,
    /// p(x,y) = p(y,x) = 1/2 predicted exactly.
    Indifferent,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignForecast {
    pub x: OptionId,
    pub y: OptionId,
    pub prediction: SignPrediction,
    /// The predicted probability when the prediction pins one down.
    pub p_hint: Option<f64>,
}

/// Maps the symmetric closure to a sign forecast for one unobserved pair:
/// a strict closure edge predicts the frequency ordering, mutual weak edges
/// predict exact indifference.
pub fn predict_sign_out_of_sample(
    analysis: &SymmetricAnalysis,
    x: &OptionId,
    y: &OptionId,
) -> SignForecast {
    let fwd = analysis.closure.contains(x, y);
    let bwd = analysis.closure.contains(y, x);
    let (prediction, p_hint) = match (fwd, bwd) {
        (true, true) => (SignPrediction::Indifferent, Some(0.5)),
        (true, false) => (SignPrediction::FirstOverSecond, None),
        (false, true) => (SignPrediction::SecondOverFirst, None),
        (false, false) => (SignPrediction::Unknown, None),
    };
    SignForecast {
        x: x.clone(),
        y: y.clone(),
        prediction,
        p_hint,
    }
}
