//! Constructive rationalization: build a random utility model matching any
//! choice frequencies at any target utility function, build a full
//! chronometric model for a single observed pair from any boundary family,
//! and run the necessary acyclicity checks that falsify a model class.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_model::{OptionId, PairKey};
use crate::dataset::{AnalysisError, Dataset};
use crate::fechner::{build_fechner_relation, FechnerOptions};
use crate::generators::{
    boundary_to_chronometric, Boundary, Chronometric, DiffFamily, RumCfSpec, SpecError,
    TabulatedCdf,
};
use crate::math;
use crate::relations::Relation;
use crate::symmetric::{build_symmetric_relation, SymmetricOptions};
use crate::unrestricted::{build_rt_relation, DominanceOptions};

#[derive(Debug, Error)]
pub enum RationalizeError {
    #[error("choice table: {0}")]
    BadScf(String),
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("the two-option construction needs exactly one observed pair, got {0}")]
    NotTwoOptions(usize),
}

/// Choice frequencies over unordered pairs, stored for the canonical
/// orientation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScfTable {
    probs: BTreeMap<PairKey, f64>,
}

impl ScfTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: OptionId, y: OptionId, p_xy: f64) -> Result<(), RationalizeError> {
        if !(p_xy > 0.0 && p_xy < 1.0) {
            return Err(RationalizeError::BadScf(format!(
                "p({x},{y}) = {p_xy} must lie strictly inside (0,1)"
            )));
        }
        let flip = x > y;
        let key = PairKey::new(x, y)
            .ok_or_else(|| RationalizeError::BadScf("pair options must be distinct".into()))?;
        self.probs.insert(key, if flip { 1.0 - p_xy } else { p_xy });
        Ok(())
    }

    pub fn from_dataset(ds: &Dataset) -> Self {
        let mut t = ScfTable::new();
        for key in ds.observed_pairs() {
            let p = ds.prob(key.first(), key.second()).expect("observed");
            t.probs.insert(key, p);
        }
        t
    }

    pub fn prob(&self, x: &OptionId, y: &OptionId) -> Option<f64> {
        let key = PairKey::new(x.clone(), y.clone())?;
        let p = *self.probs.get(&key)?;
        Some(if x == key.first() { p } else { 1.0 - p })
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PairKey> {
        self.probs.keys()
    }
}

/// One constant-height segment of a piecewise density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub height: f64,
}

/// Piecewise-constant density over contiguous segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity {
    pub segments: Vec<Segment>,
}

impl PiecewiseDensity {
    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.height * (s.hi - s.lo)).sum()
    }

    /// Exact first moment of the density.
    pub fn mean(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.height * 0.5 * (s.hi * s.hi - s.lo * s.lo))
            .sum()
    }

    pub fn cdf(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            if v >= s.hi {
                acc += s.height * (s.hi - s.lo);
            } else if v > s.lo {
                acc += s.height * (v - s.lo);
                break;
            } else {
                break;
            }
        }
        acc
    }

    /// The equivalent piecewise-linear CDF (exact).
    pub fn to_tabulated(&self) -> Result<TabulatedCdf, SpecError> {
        let mut knots = Vec::with_capacity(self.segments.len() + 1);
        let mut acc = 0.0;
        knots.push([self.segments[0].lo, 0.0]);
        for s in &self.segments {
            acc += s.height * (s.hi - s.lo);
            knots.push([s.hi, acc.min(1.0)]);
        }
        if let Some(last) = knots.last_mut() {
            last[1] = 1.0;
        }
        TabulatedCdf::new(knots)
    }
}

/// The constructed difference density for one pair, oriented so the favored
/// side has the nonnegative target difference.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructedPair {
    /// Orientation: the density describes the difference of `favored` minus
    /// the other option.
    pub favored: OptionId,
    pub other: OptionId,
    /// Target utility difference v = u(favored) - u(other) >= 0.
    pub v: f64,
    /// Probability of choosing `favored`.
    pub p: f64,
    pub density: PiecewiseDensity,
}

/// A random utility model built to match the given frequencies at the given
/// utilities.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructedRum {
    pub utilities: BTreeMap<OptionId, f64>,
    pub pairs: Vec<ConstructedPair>,
}

/// Builds, for every pair in the table, a two-segment density whose mass
/// below zero equals the unfavored frequency and whose mean equals the
/// target utility difference. Total for any valid input: frequencies alone
/// never pin down the utilities.
pub fn construct_rum(
    scf: &ScfTable,
    utilities: &BTreeMap<OptionId, f64>,
) -> Result<ConstructedRum, RationalizeError> {
    let mut pairs = Vec::new();
    for key in scf.pairs() {
        let (a, b) = (key.first().clone(), key.second().clone());
        let ua = *utilities
            .get(&a)
            .ok_or_else(|| RationalizeError::BadScf(format!("no utility for {a}")))?;
        let ub = *utilities
            .get(&b)
            .ok_or_else(|| RationalizeError::BadScf(format!("no utility for {b}")))?;
        let (favored, other) = if ua >= ub { (a, b) } else { (b, a) };
        let v = (ua - ub).abs();
        let p = scf.prob(&favored, &other).expect("pair present");
        let p_other = 1.0 - p;
        let height = p * p / (p_other + 2.0 * v);
        let delta = (p_other + 2.0 * v) / p;
        let density = PiecewiseDensity {
            segments: vec![
                Segment {
                    lo: -1.0,
                    hi: 0.0,
                    height: p_other,
                },
                Segment {
                    lo: 0.0,
                    hi: delta,
                    height,
                },
            ],
        };
        pairs.push(ConstructedPair {
            favored,
            other,
            v,
            p,
            density,
        });
    }
    Ok(ConstructedRum {
        utilities: utilities.clone(),
        pairs,
    })
}

impl ConstructedRum {
    /// A simulation spec that re-draws from the constructed densities with
    /// the given chronometric function.
    pub fn to_spec(
        &self,
        chronometric: Chronometric,
        trials_per_pair: usize,
    ) -> Result<RumCfSpec, RationalizeError> {
        let mut diff_overrides = Vec::new();
        let mut pairs = Vec::new();
        let mut default_knots = None;
        for cp in &self.pairs {
            let key = PairKey::new(cp.favored.clone(), cp.other.clone())
                .expect("constructed pairs are distinct");
            let tab = cp.density.to_tabulated()?;
            let knots = if &cp.favored == key.first() {
                tab.knots().to_vec()
            } else {
                mirror_knots(tab.knots())
            };
            if default_knots.is_none() {
                default_knots = Some(knots.clone());
            }
            diff_overrides.push(crate::generators::DiffOverride {
                options: [key.first().clone(), key.second().clone()],
                family: DiffFamily::Tabulated { knots },
            });
            pairs.push([key.first().clone(), key.second().clone()]);
        }
        let default_knots =
            default_knots.ok_or_else(|| RationalizeError::BadScf("no pairs constructed".into()))?;
        Ok(RumCfSpec {
            utilities: self.utilities.clone(),
            // every simulated pair carries an override; the default is inert
            diff: DiffFamily::Tabulated {
                knots: default_knots,
            },
            diff_overrides,
            chronometric,
            noise: None,
            pairs,
            trials_per_pair,
        })
    }
}

fn mirror_knots(knots: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = knots.iter().rev().map(|k| [-k[0], 1.0 - k[1]]).collect();
    if let Some(first) = out.first_mut() {
        first[1] = 0.0;
    }
    if let Some(last) = out.last_mut() {
        last[1] = 1.0;
    }
    out
}

/// A chronometric model for a single observed pair, constructed so that
/// re-simulation reproduces the input frequencies and conditional
/// response-time distributions exactly.
#[derive(Debug, Clone)]
pub struct ConstructedRumCf {
    pub pair: PairKey,
    /// Probability of the canonical first option in the input.
    pub p_first: f64,
    /// Derived utility difference u(first) - u(second): the mean of the
    /// constructed difference distribution.
    pub v_first: f64,
    pub chronometric: Chronometric,
    /// The constructed difference CDF for the canonical orientation,
    /// tabulated on equal-probability knots.
    pub tabulated: TabulatedCdf,
    boundary: Boundary,
}

/// Number of equal-probability knots used to tabulate the constructed CDF.
const CONSTRUCTION_KNOTS: usize = 8192;
/// Probability clip for unbounded supports.
const P_CLIP: f64 = 1e-12;

/// Builds a chronometric model for a dataset containing exactly one pair:
/// fix the boundary, read its inverse as the chronometric function, and let
/// the difference distribution place the unfavored response times below zero
/// and the favored ones above, each mapped through the boundary.
pub fn construct_rum_cf_two_options(
    ds: &Dataset,
    boundary: &Boundary,
) -> Result<ConstructedRumCf, RationalizeError> {
    let pairs = ds.observed_pairs();
    if pairs.len() != 1 {
        return Err(RationalizeError::NotTwoOptions(pairs.len()));
    }
    let chronometric = boundary_to_chronometric(boundary)?;
    let pair = pairs.into_iter().next().unwrap();
    let (a, b) = (pair.first().clone(), pair.second().clone());
    let p = ds.prob(&a, &b)?;
    let f_ab = ds.rt_cdf(&a, &b)?;
    let f_ba = ds.rt_cdf(&b, &a)?;

    // exact quantile of the constructed difference distribution
    let quantile = |u: f64| -> Result<f64, AnalysisError> {
        if u <= 1.0 - p {
            let alpha = (u / (1.0 - p)).clamp(P_CLIP, 1.0);
            let t = f_ba.quantile(alpha)?;
            Ok(-boundary.at(t))
        } else {
            let alpha = ((1.0 - u) / p).clamp(P_CLIP, 1.0);
            let t = f_ab.quantile(alpha)?;
            Ok(boundary.at(t))
        }
    };

    let k = CONSTRUCTION_KNOTS;
    let mut knots = Vec::with_capacity(k + 1);
    let b0 = boundary.initial();
    for i in 0..=k {
        let u = i as f64 / k as f64;
        let v = if i == 0 && b0.is_finite() {
            -b0
        } else if i == k && b0.is_finite() {
            b0
        } else {
            quantile(u.clamp(P_CLIP, 1.0 - P_CLIP))?
        };
        knots.push([v, u]);
    }
    // enforce monotone values against floating noise
    for i in 1..knots.len() {
        if knots[i][0] < knots[i - 1][0] {
            knots[i][0] = knots[i - 1][0];
        }
    }
    let tabulated = TabulatedCdf::new(knots)?;

    let v_first = constructed_mean(ds, &pair, p, boundary)?;
    Ok(ConstructedRumCf {
        pair,
        p_first: p,
        v_first,
        chronometric,
        tabulated,
        boundary: boundary.clone(),
    })
}

/// Mean of the constructed difference distribution. Exact summation over
/// atoms for empirical inputs; adaptive quadrature in probability space for
/// smooth inputs.
fn constructed_mean(
    ds: &Dataset,
    pair: &PairKey,
    p: f64,
    boundary: &Boundary,
) -> Result<f64, RationalizeError> {
    let (a, b) = (pair.first(), pair.second());
    match (ds.rt_samples(a, b), ds.rt_samples(b, a)) {
        (Some(sa), Some(sb)) => {
            let pos: f64 = sa.iter().map(|&t| boundary.at(t)).sum::<f64>() * p / sa.len() as f64;
            let neg: f64 =
                sb.iter().map(|&t| boundary.at(t)).sum::<f64>() * (1.0 - p) / sb.len() as f64;
            Ok(pos - neg)
        }
        _ => {
            let f_ab = ds.rt_cdf(a, b)?;
            let f_ba = ds.rt_cdf(b, a)?;
            // E[V] = int_0^1 Ginv(u) du, split at the sign change u = 1-p
            let lower = math::integrate(
                |u| {
                    let alpha = (u / (1.0 - p)).clamp(P_CLIP, 1.0);
                    -boundary.at(f_ba.quantile(alpha).unwrap_or(f64::INFINITY))
                },
                P_CLIP,
                1.0 - p,
                1e-10,
            );
            let upper = math::integrate(
                |u| {
                    let alpha = ((1.0 - u) / p).clamp(P_CLIP, 1.0);
                    boundary.at(f_ab.quantile(alpha).unwrap_or(f64::INFINITY))
                },
                1.0 - p,
                1.0 - P_CLIP,
                1e-10,
            );
            Ok(lower + upper)
        }
    }
}

impl ConstructedRumCf {
    /// The constructed difference CDF, evaluated exactly (not through the
    /// tabulation).
    pub fn diff_cdf(&self, ds: &Dataset, v: f64) -> Result<f64, RationalizeError> {
        let (a, b) = (self.pair.first(), self.pair.second());
        let b0 = self.boundary.initial();
        if v <= -b0 {
            return Ok(0.0);
        }
        if v >= b0 {
            return Ok(1.0);
        }
        if v < 0.0 {
            let t = self.chronometric.rt(-v);
            Ok((1.0 - self.p_first) * ds.rt_cdf(b, a)?.eval(t))
        } else if v == 0.0 {
            Ok(1.0 - self.p_first)
        } else {
            let t = self.chronometric.rt(v);
            Ok(1.0 - self.p_first * ds.rt_cdf(a, b)?.eval(t))
        }
    }

    /// A simulation spec drawing from the tabulated construction.
    pub fn to_spec(&self, trials_per_pair: usize) -> RumCfSpec {
        let mut utilities = BTreeMap::new();
        utilities.insert(self.pair.first().clone(), self.v_first);
        utilities.insert(self.pair.second().clone(), 0.0);
        RumCfSpec {
            // utilities are reported but the tabulated family pins the mean;
            // leave them out of the spec to avoid a consistency veto from
            // tabulation error
            utilities: BTreeMap::new(),
            diff: DiffFamily::Tabulated {
                knots: self.tabulated.knots().to_vec(),
            },
            diff_overrides: vec![],
            chronometric: self.chronometric.clone(),
            noise: None,
            pairs: vec![[self.pair.first().clone(), self.pair.second().clone()]],
            trials_per_pair,
        }
    }
}

/// Which model class a falsification check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    Unrestricted,
    Symmetric,
    Fechner,
}

/// One acyclicity check.
#[derive(Debug, Clone, Serialize)]
pub struct CycleCheck {
    pub relation: String,
    pub consistent: bool,
    pub witness: Option<Vec<OptionId>>,
}

/// Outcome of the necessary-condition falsification for one class.
#[derive(Debug, Clone, Serialize)]
pub struct RationalizabilityReport {
    pub class: ModelClass,
    pub pass: bool,
    pub checks: Vec<CycleCheck>,
}

fn check_relation(name: &str, rel: &Relation) -> CycleCheck {
    let witness = rel.inconsistent_cycle();
    CycleCheck {
        relation: name.to_string(),
        consistent: witness.is_none(),
        witness,
    }
}

/// Tests the necessary condition for a class to rationalize the data: the
/// class's revealed relations must be free of cycles that contain a strict
/// edge. A failing check means no model in the class matches the data.
pub fn check_necessary_rationalizability(
    ds: &Dataset,
    class: ModelClass,
    dominance: &DominanceOptions,
    symmetric: &SymmetricOptions,
    fechner: &FechnerOptions,
) -> Result<RationalizabilityReport, RationalizeError> {
    let mut checks = Vec::new();
    match class {
        ModelClass::Unrestricted => {
            let analysis = build_rt_relation(ds, dominance);
            checks.push(check_relation("rt_dominance", &analysis.relation));
        }
        ModelClass::Symmetric => {
            let analysis = build_symmetric_relation(ds, symmetric)?;
            checks.push(check_relation("frequency", &analysis.r_frequency));
            checks.push(check_relation("triangulated", &analysis.r_triangulated));
            checks.push(check_relation(
                "frequency_union_triangulated",
                &analysis.r_frequency.union(&analysis.r_triangulated),
            ));
        }
        ModelClass::Fechner => {
            let analysis = build_fechner_relation(ds, symmetric, fechner)?;
            checks.push(check_relation("frequency", &analysis.symmetric.r_frequency));
            checks.push(check_relation("cross_pivot", &analysis.r_cross_pivot));
            checks.push(check_relation(
                "frequency_union_cross_pivot",
                &analysis
                    .symmetric
                    .r_frequency
                    .union(&analysis.r_cross_pivot),
            ));
        }
    }
    let pass = checks.iter().all(|c| c.consistent);
    Ok(RationalizabilityReport {
        class,
        pass,
        checks,
    })
}
