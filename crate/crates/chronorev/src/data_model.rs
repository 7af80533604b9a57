//! Observable choice data: trials, per-pair statistics, and the empirical
//! response-time distributions they induce.
//!
//! A dataset is a finite option set together with, for every unordered pair
//! that was observed, the count of choices in each direction and the response
//! times conditional on each direction. Both directions of a pair must be
//! populated: a pair chosen only one way carries no usable frequency
//! information and is rejected at load time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Expected header of the trials CSV format.
pub const TRIALS_CSV_HEADER: [&str; 5] =
    ["trial_id", "option_a", "option_b", "choice", "rt_seconds"];

/// Default floor below which response times are rejected as nonpositive.
pub const DEFAULT_RT_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    MalformedRow { line: u64, msg: String },
    #[error("line {line}: rt_seconds {rt} is below the positivity floor {floor}")]
    NonPositiveRt { line: u64, rt: f64, floor: f64 },
    #[error("line {line}: choice `{choice}` is not one of the pair options")]
    ChoiceNotInPair { line: u64, choice: String },
    #[error("line {line}: option_a and option_b are identical (`{id}`)")]
    IdenticalOptions { line: u64, id: String },
    #[error("no trials")]
    NoTrials,
    #[error("pair ({a},{b}) is one-directional: no trials chose `{missing}`")]
    OneDirectional {
        a: String,
        b: String,
        missing: String,
    },
    #[error("pair ({x},{y}) is not in the dataset")]
    UnknownPair { x: String, y: String },
    #[error("empty sample set")]
    EmptySamples,
    #[error("response-time sample {0} is not a positive finite number")]
    BadSample(f64),
    #[error("quantile level {alpha} outside (0, 1]")]
    BadQuantileLevel { alpha: f64 },
    #[error("option id must be non-empty")]
    EmptyOptionId,
}

/// Opaque label of an option, unique within a dataset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OptionId(String);

impl OptionId {
    pub fn new(id: impl Into<String>) -> Result<Self, DataError> {
        let id = id.into();
        if id.is_empty() {
            return Err(DataError::EmptyOptionId);
        }
        Ok(OptionId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for OptionId {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OptionId::new(s)
    }
}

/// Unordered pair of distinct options; stored orientation is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    a: OptionId,
    b: OptionId,
}

impl PairKey {
    /// Canonicalizes to lexicographic order. Returns `None` when both ids
    /// are equal.
    pub fn new(x: OptionId, y: OptionId) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(PairKey { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(PairKey { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> &OptionId {
        &self.a
    }

    pub fn second(&self) -> &OptionId {
        &self.b
    }

    pub fn contains(&self, id: &OptionId) -> bool {
        &self.a == id || &self.b == id
    }

    /// The member of the pair that is not `id`.
    pub fn other(&self, id: &OptionId) -> Option<&OptionId> {
        if id == &self.a {
            Some(&self.b)
        } else if id == &self.b {
            Some(&self.a)
        } else {
            None
        }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// One observed decision: which option of the pair was chosen and how long
/// it took, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub pair: PairKey,
    pub chosen: OptionId,
    pub rt: f64,
}

impl TrialRecord {
    pub fn new(x: OptionId, y: OptionId, chosen: OptionId, rt: f64) -> Option<Self> {
        let pair = PairKey::new(x, y)?;
        if !pair.contains(&chosen) || !(rt > 0.0) {
            return None;
        }
        Some(TrialRecord { pair, chosen, rt })
    }
}

/// Right-continuous step CDF over a non-empty sorted sample of positive reals.
///
/// `eval(t)` is the fraction of samples `<= t`; `quantile(alpha)` is the
/// smallest sample whose CDF value reaches `alpha`, so the quantile is the
/// left-continuous generalized inverse restricted to sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self, DataError> {
        if samples.is_empty() {
            return Err(DataError::EmptySamples);
        }
        if let Some(&bad) = samples.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
            return Err(DataError::BadSample(bad));
        }
        samples.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(EmpiricalCdf { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        *self.samples.last().unwrap()
    }

    /// F(t) = #{samples <= t} / n.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.samples.partition_point(|&s| s <= t);
        k as f64 / self.samples.len() as f64
    }

    /// Smallest sample point whose CDF value is at least `alpha`.
    pub fn quantile(&self, alpha: f64) -> Result<f64, DataError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(DataError::BadQuantileLevel { alpha });
        }
        let n = self.samples.len();
        // smallest i with (i+1)/n >= alpha, evaluated in the same arithmetic
        // as eval() so the roundtrip invariants hold exactly
        let mut lo = 0usize;
        let mut hi = n - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if (mid + 1) as f64 / n as f64 >= alpha {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(self.samples[lo])
    }
}

/// Counts and conditional response-time distributions for one unordered pair.
#[derive(Debug, Clone)]
pub struct PairStats {
    pair: PairKey,
    cdf_first: EmpiricalCdf,
    cdf_second: EmpiricalCdf,
}

impl PairStats {
    pub fn pair(&self) -> &PairKey {
        &self.pair
    }

    /// Number of trials in which `id` was chosen.
    pub fn count_for(&self, id: &OptionId) -> Option<usize> {
        if id == self.pair.first() {
            Some(self.cdf_first.len())
        } else if id == self.pair.second() {
            Some(self.cdf_second.len())
        } else {
            None
        }
    }

    pub fn total(&self) -> usize {
        self.cdf_first.len() + self.cdf_second.len()
    }

    /// Empirical probability of choosing `id` within this pair. The second
    /// orientation is the complement of the first, so the two probabilities
    /// sum to one exactly (independent divisions would not: 1/3 + 2/3
    /// rounds below 1 in binary floating point).
    pub fn prob_for(&self, id: &OptionId) -> Option<f64> {
        let p_first = self.cdf_first.len() as f64 / self.total() as f64;
        if id == self.pair.first() {
            Some(p_first)
        } else if id == self.pair.second() {
            Some(1.0 - p_first)
        } else {
            None
        }
    }

    /// Response-time CDF conditional on `id` being chosen.
    pub fn rt_cdf_for(&self, id: &OptionId) -> Option<&EmpiricalCdf> {
        if id == self.pair.first() {
            Some(&self.cdf_first)
        } else if id == self.pair.second() {
            Some(&self.cdf_second)
        } else {
            None
        }
    }
}

/// Options for trial ingestion.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Response times below this floor are rejected, not clamped.
    pub rt_floor: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            rt_floor: DEFAULT_RT_FLOOR,
        }
    }
}

/// A validated dataset: options, the symmetric set of observed pairs, and
/// per-pair statistics.
#[derive(Debug, Clone)]
pub struct ChoiceDataset {
    options: BTreeSet<OptionId>,
    stats: BTreeMap<PairKey, PairStats>,
}

impl ChoiceDataset {
    /// Groups raw trials by unordered pair and validates both directions
    /// are populated.
    pub fn from_trials(trials: Vec<TrialRecord>) -> Result<Self, DataError> {
        if trials.is_empty() {
            return Err(DataError::NoTrials);
        }
        let mut options = BTreeSet::new();
        let mut grouped: BTreeMap<PairKey, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for t in trials {
            options.insert(t.pair.first().clone());
            options.insert(t.pair.second().clone());
            let slot = grouped.entry(t.pair.clone()).or_default();
            if &t.chosen == t.pair.first() {
                slot.0.push(t.rt);
            } else {
                slot.1.push(t.rt);
            }
        }
        let mut stats = BTreeMap::new();
        for (pair, (first, second)) in grouped {
            if first.is_empty() || second.is_empty() {
                let missing = if first.is_empty() {
                    pair.first()
                } else {
                    pair.second()
                };
                return Err(DataError::OneDirectional {
                    a: pair.first().to_string(),
                    b: pair.second().to_string(),
                    missing: missing.to_string(),
                });
            }
            let cdf_first = EmpiricalCdf::new(first)?;
            let cdf_second = EmpiricalCdf::new(second)?;
            stats.insert(
                pair.clone(),
                PairStats {
                    pair,
                    cdf_first,
                    cdf_second,
                },
            );
        }
        Ok(ChoiceDataset { options, stats })
    }

    /// Parses the trials CSV format.
    pub fn load_trials(reader: impl Read, opts: &LoadOptions) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        {
            let headers = rdr.headers()?;
            if headers.len() != TRIALS_CSV_HEADER.len()
                || headers
                    .iter()
                    .zip(TRIALS_CSV_HEADER)
                    .any(|(h, want)| h != want)
            {
                return Err(DataError::MalformedRow {
                    line: 1,
                    msg: format!(
                        "header must be `{}`, got `{}`",
                        TRIALS_CSV_HEADER.join(","),
                        headers.iter().collect::<Vec<_>>().join(",")
                    ),
                });
            }
        }
        let mut trials = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != 5 {
                return Err(DataError::MalformedRow {
                    line,
                    msg: format!("expected 5 fields, got {}", rec.len()),
                });
            }
            let a = OptionId::new(&rec[1]).map_err(|_| DataError::MalformedRow {
                line,
                msg: "option_a is empty".into(),
            })?;
            let b = OptionId::new(&rec[2]).map_err(|_| DataError::MalformedRow {
                line,
                msg: "option_b is empty".into(),
            })?;
            if a == b {
                return Err(DataError::IdenticalOptions {
                    line,
                    id: a.to_string(),
                });
            }
            let choice = OptionId::new(&rec[3]).map_err(|_| DataError::MalformedRow {
                line,
                msg: "choice is empty".into(),
            })?;
            if choice != a && choice != b {
                return Err(DataError::ChoiceNotInPair {
                    line,
                    choice: choice.to_string(),
                });
            }
            let rt: f64 = rec[4].parse().map_err(|e| DataError::MalformedRow {
                line,
                msg: format!("rt_seconds `{}`: {e}", &rec[4]),
            })?;
            if !rt.is_finite() || rt < opts.rt_floor {
                return Err(DataError::NonPositiveRt {
                    line,
                    rt,
                    floor: opts.rt_floor,
                });
            }
            let pair = PairKey::new(a, b).expect("distinct checked above");
            trials.push(TrialRecord {
                pair,
                chosen: choice,
                rt,
            });
        }
        Self::from_trials(trials)
    }

    /// Writes the dataset back out in the trials CSV format, deterministically:
    /// pairs in canonical order, first direction then second, response times
    /// ascending, trial ids renumbered from 1.
    pub fn emit_trials(&self, writer: impl Write) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRIALS_CSV_HEADER)?;
        let mut id = 0u64;
        for (pair, st) in &self.stats {
            for (chooser, cdf) in [
                (pair.first(), &st.cdf_first),
                (pair.second(), &st.cdf_second),
            ] {
                for &rt in cdf.samples() {
                    id += 1;
                    w.write_record([
                        id.to_string().as_str(),
                        pair.first().as_str(),
                        pair.second().as_str(),
                        chooser.as_str(),
                        &format!("{rt}"),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn options(&self) -> &BTreeSet<OptionId> {
        &self.options
    }

    /// Canonical unordered pairs with data.
    pub fn pairs(&self) -> impl Iterator<Item = &PairKey> {
        self.stats.keys()
    }

    pub fn n_pairs(&self) -> usize {
        self.stats.len()
    }

    pub fn contains_pair(&self, x: &OptionId, y: &OptionId) -> bool {
        PairKey::new(x.clone(), y.clone()).is_some_and(|k| self.stats.contains_key(&k))
    }

    pub fn pair_stats(&self, x: &OptionId, y: &OptionId) -> Option<&PairStats> {
        let key = PairKey::new(x.clone(), y.clone())?;
        self.stats.get(&key)
    }

    fn require_stats(&self, x: &OptionId, y: &OptionId) -> Result<&PairStats, DataError> {
        self.pair_stats(x, y).ok_or_else(|| DataError::UnknownPair {
            x: x.to_string(),
            y: y.to_string(),
        })
    }

    /// Empirical choice probability p(x,y) = n_x / (n_x + n_y).
    pub fn prob(&self, x: &OptionId, y: &OptionId) -> Result<f64, DataError> {
        let st = self.require_stats(x, y)?;
        Ok(st.prob_for(x).expect("x is in the pair"))
    }

    /// Trial count with `x` chosen over `y`.
    pub fn count(&self, x: &OptionId, y: &OptionId) -> Result<usize, DataError> {
        let st = self.require_stats(x, y)?;
        Ok(st.count_for(x).expect("x is in the pair"))
    }

    /// Response-time CDF conditional on `x` chosen over `y`.
    pub fn rt_cdf(&self, x: &OptionId, y: &OptionId) -> Result<&EmpiricalCdf, DataError> {
        let st = self.require_stats(x, y)?;
        Ok(st.rt_cdf_for(x).expect("x is in the pair"))
    }
}
