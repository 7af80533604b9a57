//! A uniform view over the two kinds of choice data the analysis layer
//! accepts: finite trial datasets (step CDFs) and closed-form fixtures
//! (smooth CDFs from a generating model).

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::data_model::{ChoiceDataset, DataError, EmpiricalCdf, OptionId, PairKey};
use crate::generators::{analytic_cdfs, AnalyticPair, ModelSpec, RumCfSpec, SmoothCdf, SpecError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("pair ({0},{1}) is not in the dataset")]
    PairNotObserved(String, String),
    #[error("pair ({0},{1}) is observed; the operation applies to unobserved pairs")]
    PairObserved(String, String),
    #[error("percentile undefined for ({x},{y}): requires p({x},{y}) > {threshold}, got {p}")]
    PercentileUndefined {
        x: String,
        y: String,
        p: f64,
        threshold: f64,
    },
    #[error("no pivot option shares data with both {0} and {1}")]
    NoPivot(String, String),
    #[error("options must be distinct, got `{0}` twice")]
    DegeneratePair(String),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("spec: {0}")]
    Spec(#[from] SpecError),
}

/// Response-time CDF of one choice direction, either a step function over
/// observed samples or a smooth closed form.
#[derive(Debug, Clone)]
pub enum RtCdf<'a> {
    Step(&'a EmpiricalCdf),
    Smooth(&'a SmoothCdf),
}

impl RtCdf<'_> {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RtCdf::Step(c) => c.eval(t),
            RtCdf::Smooth(c) => c.eval(t),
        }
    }

    /// Smallest t with F(t) >= alpha (sample point for step CDFs).
    pub fn quantile(&self, alpha: f64) -> Result<f64, DataError> {
        match self {
            RtCdf::Step(c) => c.quantile(alpha),
            RtCdf::Smooth(c) => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(DataError::BadQuantileLevel { alpha });
                }
                Ok(c.quantile(alpha))
            }
        }
    }

    /// Reference range of response times carrying essentially all mass.
    pub fn span(&self) -> (f64, f64) {
        match self {
            RtCdf::Step(c) => (c.min(), c.max()),
            RtCdf::Smooth(c) => c.hint_range(),
        }
    }

    /// Points at which a dominance comparison against this CDF must be
    /// checked: the jump points for a step CDF, none for a smooth one
    /// (smooth comparisons run on a shared grid instead).
    pub fn jump_points(&self) -> Option<&[f64]> {
        match self {
            RtCdf::Step(c) => Some(c.samples()),
            RtCdf::Smooth(_) => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, RtCdf::Smooth(_))
    }
}

/// Closed-form dataset built by evaluating a generating model exactly.
#[derive(Debug, Clone)]
pub struct AnalyticDataset {
    options: BTreeSet<OptionId>,
    pairs: BTreeMap<PairKey, AnalyticPair>,
}

impl AnalyticDataset {
    /// Evaluates every pair of the spec in closed form. Fails when the spec
    /// carries response-time noise or a family without closed forms.
    pub fn from_rum_cf(spec: &RumCfSpec) -> Result<Self, SpecError> {
        let mut options = BTreeSet::new();
        let mut pairs = BTreeMap::new();
        for key in spec.pair_keys()? {
            options.insert(key.first().clone());
            options.insert(key.second().clone());
            let analytic = analytic_cdfs(spec, &key)?;
            pairs.insert(key, analytic);
        }
        if pairs.is_empty() {
            return Err(SpecError::Invalid("spec lists no pairs".into()));
        }
        Ok(AnalyticDataset { options, pairs })
    }

    pub fn pair(&self, key: &PairKey) -> Option<&AnalyticPair> {
        self.pairs.get(key)
    }
}

/// The input to every analysis operation.
#[derive(Debug, Clone)]
pub enum Dataset {
    Empirical(ChoiceDataset),
    Analytic(AnalyticDataset),
}

impl From<ChoiceDataset> for Dataset {
    fn from(d: ChoiceDataset) -> Self {
        Dataset::Empirical(d)
    }
}

impl Dataset {
    /// Builds the matching dataset view for a model spec: analytic when
    /// closed forms exist.
    pub fn analytic_from_spec(spec: &ModelSpec) -> Result<Self, SpecError> {
        match spec {
            ModelSpec::RumCf(s) => Ok(Dataset::Analytic(AnalyticDataset::from_rum_cf(s)?)),
            ModelSpec::RumNcf(_) => Err(SpecError::Unsupported(
                "noisy chronometric models have no closed forms; simulate instead".into(),
            )),
            ModelSpec::Ddm(_) => Err(SpecError::Unsupported(
                "diffusion models have no closed-form response-time CDFs; simulate instead".into(),
            )),
        }
    }

    pub fn options(&self) -> Vec<OptionId> {
        match self {
            Dataset::Empirical(d) => d.options().iter().cloned().collect(),
            Dataset::Analytic(d) => d.options.iter().cloned().collect(),
        }
    }

    /// Canonical unordered pairs with data (the observed set D).
    pub fn observed_pairs(&self) -> Vec<PairKey> {
        match self {
            Dataset::Empirical(d) => d.pairs().cloned().collect(),
            Dataset::Analytic(d) => d.pairs.keys().cloned().collect(),
        }
    }

    pub fn contains_pair(&self, x: &OptionId, y: &OptionId) -> bool {
        match PairKey::new(x.clone(), y.clone()) {
            Some(key) => match self {
                Dataset::Empirical(d) => d.contains_pair(key.first(), key.second()),
                Dataset::Analytic(d) => d.pairs.contains_key(&key),
            },
            None => false,
        }
    }

    fn key_checked(&self, x: &OptionId, y: &OptionId) -> Result<PairKey, AnalysisError> {
        let key = PairKey::new(x.clone(), y.clone())
            .ok_or_else(|| AnalysisError::DegeneratePair(x.to_string()))?;
        if !self.contains_pair(x, y) {
            return Err(AnalysisError::PairNotObserved(x.to_string(), y.to_string()));
        }
        Ok(key)
    }

    /// p(x,y): probability of choosing x against y.
    pub fn prob(&self, x: &OptionId, y: &OptionId) -> Result<f64, AnalysisError> {
        let key = self.key_checked(x, y)?;
        match self {
            Dataset::Empirical(d) => Ok(d.prob(x, y)?),
            Dataset::Analytic(d) => Ok(d.pairs[&key].prob_of(x).expect("x is in the pair")),
        }
    }

    /// Response-time CDF conditional on x chosen over y.
    pub fn rt_cdf(&self, x: &OptionId, y: &OptionId) -> Result<RtCdf<'_>, AnalysisError> {
        let key = self.key_checked(x, y)?;
        match self {
            Dataset::Empirical(d) => Ok(RtCdf::Step(d.rt_cdf(x, y)?)),
            Dataset::Analytic(d) => Ok(RtCdf::Smooth(
                d.pairs[&key].rt_cdf_of(x).expect("x is in the pair"),
            )),
        }
    }

    /// Number of trials behind p(x,y)'s denominator, when finite data backs
    /// the pair. Analytic fixtures return None (probabilities are exact).
    pub fn trial_count(&self, x: &OptionId, y: &OptionId) -> Option<usize> {
        match self {
            Dataset::Empirical(d) => d.pair_stats(x, y).map(|s| s.total()),
            Dataset::Analytic(_) => None,
        }
    }

    /// Raw response-time samples for x chosen over y (empirical only).
    pub fn rt_samples(&self, x: &OptionId, y: &OptionId) -> Option<&[f64]> {
        match self {
            Dataset::Empirical(d) => d.rt_cdf(x, y).ok().map(|c| c.samples()),
            Dataset::Analytic(_) => None,
        }
    }

    /// Response-time density for x chosen over y (analytic only, when the
    /// family has closed forms).
    pub fn rt_density(&self, x: &OptionId, y: &OptionId) -> Option<&SmoothCdf> {
        match self {
            Dataset::Empirical(_) => None,
            Dataset::Analytic(d) => {
                let key = PairKey::new(x.clone(), y.clone())?;
                let pair = d.pairs.get(&key)?;
                let cdf = pair.rt_cdf_of(x)?;
                cdf.has_pdf().then_some(cdf)
            }
        }
    }

    /// All unordered pairs of options without data (the set C \ D, one entry
    /// per unordered pair).
    pub fn unobserved_pairs(&self) -> Vec<PairKey> {
        let opts = self.options();
        let mut out = Vec::new();
        for i in 0..opts.len() {
            for j in (i + 1)..opts.len() {
                let key = PairKey::new(opts[i].clone(), opts[j].clone()).unwrap();
                if !self.contains_pair(key.first(), key.second()) {
                    out.push(key);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::LoadOptions;
    use crate::generators::{Chronometric, DiffFamily};

    fn id(s: &str) -> OptionId {
        OptionId::new(s).unwrap()
    }

    fn empirical() -> Dataset {
        let csv = "trial_id,option_a,option_b,choice,rt_seconds\n\
                   1,a,b,a,1.0\n2,a,b,b,2.0\n3,b,c,b,0.5\n4,b,c,c,0.7\n";
        Dataset::Empirical(
            ChoiceDataset::load_trials(csv.as_bytes(), &LoadOptions::default()).unwrap(),
        )
    }

    #[test]
    fn unobserved_pairs_complement_observed() {
        let ds = empirical();
        let unobserved = ds.unobserved_pairs();
        assert_eq!(unobserved.len(), 1);
        assert_eq!(unobserved[0], PairKey::new(id("a"), id("c")).unwrap());
    }

    #[test]
    fn queries_accept_either_orientation() {
        let ds = empirical();
        let p_ab = ds.prob(&id("a"), &id("b")).unwrap();
        let p_ba = ds.prob(&id("b"), &id("a")).unwrap();
        assert_eq!(p_ab + p_ba, 1.0);
        assert!(ds.rt_cdf(&id("c"), &id("b")).is_ok());
        assert!(matches!(
            ds.prob(&id("a"), &id("c")),
            Err(AnalysisError::PairNotObserved(..))
        ));
    }

    #[test]
    fn analytic_fixture_exposes_smooth_cdfs() {
        let mut utilities = BTreeMap::new();
        utilities.insert(id("x"), 0.5);
        utilities.insert(id("y"), 0.0);
        let spec = RumCfSpec {
            utilities,
            diff: DiffFamily::Bimodal,
            diff_overrides: vec![],
            chronometric: Chronometric::Reciprocal { kappa: 1.0 },
            noise: None,
            pairs: vec![[id("x"), id("y")]],
            trials_per_pair: 1,
        };
        let ds = Dataset::Analytic(AnalyticDataset::from_rum_cf(&spec).unwrap());
        assert!((ds.prob(&id("x"), &id("y")).unwrap() - 0.75).abs() < 1e-12);
        let f_yx = ds.rt_cdf(&id("y"), &id("x")).unwrap();
        assert!(f_yx.is_smooth());
        // frozen closed form: t^4 / (1+t)^4
        for t in [0.25f64, 0.5, 1.0, 2.0, 10.0] {
            let want = (t / (1.0 + t)).powi(4);
            assert!((f_yx.eval(t) - want).abs() < 1e-12, "t={t}");
        }
        assert!(ds.rt_density(&id("x"), &id("y")).is_some());
        assert!(ds.trial_count(&id("x"), &id("y")).is_none());
    }
}
