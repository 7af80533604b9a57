//! Sampling from random utility models with chronometric functions, and the
//! closed-form choice probabilities / response-time CDFs they induce.
//!
//! The rationalization identity behind both paths: conditional on the first
//! option being chosen, the probability of responding within t equals the
//! probability that the realized difference exceeds r^{-1}(t), renormalized
//! by the probability of a positive difference.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use crate::data_model::{PairKey, TrialRecord};
use crate::exec;
use crate::math;

use super::{trial_rng, PairDiff, PairSample, RumCfSpec, SampleDiagnostics, SpecError};

const MAX_REDRAWS: u32 = 10_000;
const MAX_BATCH_SALTS: u64 = 64;

/// Draws `n` trials for one pair. Deterministic in (spec, pair, n, seed) and
/// independent of the execution strategy.
///
/// Zero utility-difference draws and zero response times are redrawn (and
/// counted); if an entire batch comes out one-directional the batch is
/// regenerated under a new salt so the result always passes dataset
/// validation.
pub fn sample_rum_cf(
    spec: &RumCfSpec,
    pair: &PairKey,
    n: usize,
    seed: u64,
) -> Result<PairSample, SpecError> {
    sample_rum_cf_with(spec, pair, n, seed, true)
}

/// Sequential twin of [`sample_rum_cf`], bit-identical output; exists so
/// benchmarks can compare the execution strategies directly.
pub fn sample_rum_cf_seq(
    spec: &RumCfSpec,
    pair: &PairKey,
    n: usize,
    seed: u64,
) -> Result<PairSample, SpecError> {
    sample_rum_cf_with(spec, pair, n, seed, false)
}

fn sample_rum_cf_with(
    spec: &RumCfSpec,
    pair: &PairKey,
    n: usize,
    seed: u64,
    parallel: bool,
) -> Result<PairSample, SpecError> {
    spec.chronometric.validate()?;
    if let Some(noise) = &spec.noise {
        noise.validate()?;
    }
    let diff = spec.resolve(pair)?;
    if n == 0 {
        return Err(SpecError::Invalid("cannot sample zero trials".into()));
    }

    let chron = spec.chronometric.clone();
    let noise = spec
        .noise
        .map(|n| LogNormal::new(-0.5 * n.sigma_log * n.sigma_log, n.sigma_log))
        .transpose()
        .map_err(|e| SpecError::Invalid(format!("noise: {e}")))?;

    for salt in 0..MAX_BATCH_SALTS {
        let drawn = exec::map_indexed_with(parallel, n, |i| {
            let mut rng = trial_rng(seed, pair, i as u64, salt);
            draw_trial(&diff, &chron, noise.as_ref(), pair, &mut rng)
        });
        let mut diagnostics = SampleDiagnostics {
            regenerated_batches: salt,
            ..Default::default()
        };
        let mut trials = Vec::with_capacity(n);
        let mut first = 0usize;
        for (record, zero_diff, zero_rt) in drawn {
            diagnostics.resampled_zero_diff += zero_diff;
            diagnostics.resampled_zero_rt += zero_rt;
            if &record.chosen == pair.first() {
                first += 1;
            }
            trials.push(record);
        }
        if first > 0 && first < n {
            return Ok(PairSample {
                pair: pair.clone(),
                trials,
                diagnostics,
            });
        }
        if n == 1 {
            // a single trial can never populate both directions
            return Err(SpecError::Degenerate(
                pair.to_string(),
                "one trial cannot cover both directions".into(),
            ));
        }
    }
    Err(SpecError::Degenerate(
        pair.to_string(),
        format!("one-directional after {MAX_BATCH_SALTS} regenerations"),
    ))
}

fn draw_trial<R: Rng>(
    diff: &PairDiff,
    chron: &super::Chronometric,
    noise: Option<&LogNormal<f64>>,
    pair: &PairKey,
    rng: &mut R,
) -> (TrialRecord, u64, u64) {
    let mut zero_diff = 0u64;
    let mut zero_rt = 0u64;
    for _ in 0..MAX_REDRAWS {
        let v = diff.sample(rng);
        if v == 0.0 {
            zero_diff += 1;
            continue;
        }
        let base_rt = chron.rt(v.abs());
        if !(base_rt > 0.0) {
            zero_rt += 1;
            continue;
        }
        let rt = match noise {
            Some(dist) => base_rt * dist.sample(rng),
            None => base_rt,
        };
        let chosen = if v > 0.0 {
            pair.first().clone()
        } else {
            pair.second().clone()
        };
        let record = TrialRecord {
            pair: pair.clone(),
            chosen,
            rt,
        };
        return (record, zero_diff, zero_rt);
    }
    // the resampling guard only trips for distributions concentrated where
    // the chronometric function is zero; treat as unreachable in practice
    panic!("exhausted redraws for pair {pair}: difference mass sits at zero response time");
}

/// Smooth CDF handle with optional density, usable wherever an empirical step
/// CDF is: evaluation, quantiles, and grid hints for dominance checks.
#[derive(Clone)]
pub struct SmoothCdf {
    cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pdf: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// Exact inverse, when the generating family has one. Bisection otherwise.
    quantile: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// (quantile(1e-3), quantile(1-1e-3)) reference range for grids.
    hint: (f64, f64),
}

impl std::fmt::Debug for SmoothCdf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothCdf")
            .field("hint", &self.hint)
            .field("has_pdf", &self.pdf.is_some())
            .finish()
    }
}

impl SmoothCdf {
    pub fn new(
        cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        pdf: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        quantile: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Self {
        let q = |alpha: f64| match &quantile {
            Some(f) => f(alpha),
            None => invert_cdf(&cdf, alpha),
        };
        let hint = (q(1e-3), q(1.0 - 1e-3));
        SmoothCdf {
            cdf,
            pdf,
            quantile,
            hint,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (self.cdf)(t)
        }
    }

    pub fn pdf(&self, t: f64) -> Option<f64> {
        self.pdf.as_ref().map(|f| f(t.max(0.0)))
    }

    pub fn has_pdf(&self) -> bool {
        self.pdf.is_some()
    }

    /// The alpha-quantile: exact inverse when available, otherwise the
    /// smallest t with F(t) >= alpha to ~1e-13 relative precision.
    pub fn quantile(&self, alpha: f64) -> f64 {
        match &self.quantile {
            Some(f) => f(alpha),
            None => invert_cdf(&self.cdf, alpha),
        }
    }

    /// Reference response-time range covering the central 99.8% of mass.
    pub fn hint_range(&self) -> (f64, f64) {
        self.hint
    }
}

fn invert_cdf(cdf: &Arc<dyn Fn(f64) -> f64 + Send + Sync>, alpha: f64) -> f64 {
    let f = |t: f64| cdf(t);
    let hi = math::expand_upper(f, alpha, 1.0);
    math::monotone_inverse(f, alpha, 0.0, hi, 1e-14)
}

/// Closed-form description of one simulated pair: choice probability and the
/// conditional response-time distributions for both directions.
#[derive(Debug, Clone)]
pub struct AnalyticPair {
    pub pair: PairKey,
    /// Probability that the canonical first option is chosen.
    pub p_first: f64,
    pub rt_first: SmoothCdf,
    pub rt_second: SmoothCdf,
}

impl AnalyticPair {
    pub fn prob_of(&self, id: &crate::data_model::OptionId) -> Option<f64> {
        if id == self.pair.first() {
            Some(self.p_first)
        } else if id == self.pair.second() {
            Some(1.0 - self.p_first)
        } else {
            None
        }
    }

    pub fn rt_cdf_of(&self, id: &crate::data_model::OptionId) -> Option<&SmoothCdf> {
        if id == self.pair.first() {
            Some(&self.rt_first)
        } else if id == self.pair.second() {
            Some(&self.rt_second)
        } else {
            None
        }
    }
}

/// Exact choice probability and conditional response-time CDFs implied by a
/// model without response-time noise.
///
/// When the chronometric function reaches zero at some finite difference, the
/// model is conditioned on the redraws the sampler performs, i.e. on the
/// difference staying inside the positive-response-time band.
pub fn analytic_cdfs(spec: &RumCfSpec, pair: &PairKey) -> Result<AnalyticPair, SpecError> {
    if spec.noise.is_some() {
        return Err(SpecError::Unsupported(
            "closed forms are not available with response-time noise".into(),
        ));
    }
    spec.chronometric.validate()?;
    let diff = spec.resolve(pair)?;
    let chron = spec.chronometric.clone();
    let v_max = chron.positive_range();
    // survival form keeps the (small) upper tails exact; the lower tails are
    // already small numbers under the plain CDF
    let (sf_hi, g_lo) = if v_max.is_finite() {
        (diff.sf(v_max), diff.cdf(-v_max))
    } else {
        (0.0, 0.0)
    };
    let g_hi = 1.0 - sf_hi;
    let mass_pos = diff.sf(0.0) - sf_hi;
    let mass_neg = diff.cdf(0.0) - g_lo;
    if !(mass_pos > 0.0) || !(mass_neg > 0.0) {
        return Err(SpecError::Degenerate(
            pair.to_string(),
            "a direction has zero probability under the spec".into(),
        ));
    }
    let p_first = mass_pos / (mass_pos + mass_neg);

    let diff_a = diff.clone();
    let chron_a = chron.clone();
    let cdf_first: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        ((diff_a.sf(chron_a.inverse(t)) - sf_hi) / mass_pos).clamp(0.0, 1.0)
    });
    let diff_b = diff.clone();
    let chron_b = chron.clone();
    let cdf_second: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        ((diff_b.cdf(-chron_b.inverse(t)) - g_lo) / mass_neg).clamp(0.0, 1.0)
    });

    // exact quantiles: F(t) = alpha solves to t = r(Ginv(...)); the family
    // quantile is closed-form, so tangencies of F cost no precision
    let diff_qa = diff.clone();
    let chron_qa = chron.clone();
    let q_first: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |alpha: f64| {
        let v = diff_qa.quantile(g_hi - alpha.clamp(0.0, 1.0) * mass_pos);
        chron_qa.rt(v.max(f64::MIN_POSITIVE))
    });
    let diff_qb = diff.clone();
    let chron_qb = chron.clone();
    let q_second: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |alpha: f64| {
        let v = -diff_qb.quantile(g_lo + alpha.clamp(0.0, 1.0) * mass_neg);
        chron_qb.rt(v.max(f64::MIN_POSITIVE))
    });

    let pdf_first = pdf_closure(&diff, &chron, mass_pos, false);
    let pdf_second = pdf_closure(&diff, &chron, mass_neg, true);

    Ok(AnalyticPair {
        pair: pair.clone(),
        p_first,
        rt_first: SmoothCdf::new(cdf_first, pdf_first, Some(q_first)),
        rt_second: SmoothCdf::new(cdf_second, pdf_second, Some(q_second)),
    })
}

fn pdf_closure(
    diff: &PairDiff,
    chron: &super::Chronometric,
    mass: f64,
    negate: bool,
) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    // require both a difference density and a differentiable inverse
    diff.pdf(0.0)?;
    chron.inverse_decay(1.0)?;
    let diff = diff.clone();
    let chron = chron.clone();
    Some(Arc::new(move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let v = chron.inverse(t);
        let v = if negate { -v } else { v };
        let g = diff.pdf(v).unwrap_or(0.0);
        let jac = chron.inverse_decay(t).unwrap_or(0.0);
        g * jac / mass
    }))
}

/// Mean-one multiplicative noise draw matching the sampler's parameterization.
#[cfg(test)]
pub(crate) fn noise_draw<R: Rng>(sigma_log: f64, rng: &mut R) -> f64 {
    let dist = LogNormal::new(-0.5 * sigma_log * sigma_log, sigma_log).unwrap();
    dist.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::OptionId;
    use crate::generators::{Boundary, Chronometric, DiffFamily, RtNoise};
    use std::collections::BTreeMap;

    fn id(s: &str) -> OptionId {
        OptionId::new(s).unwrap()
    }

    fn pair_xy() -> PairKey {
        PairKey::new(id("x"), id("y")).unwrap()
    }

    fn logit_spec(vx: f64, vy: f64, scale: f64) -> RumCfSpec {
        let mut utilities = BTreeMap::new();
        utilities.insert(id("x"), vx);
        utilities.insert(id("y"), vy);
        RumCfSpec {
            utilities,
            diff: DiffFamily::Logistic { scale },
            diff_overrides: vec![],
            chronometric: Chronometric::Reciprocal { kappa: 1.0 },
            noise: None,
            pairs: vec![[id("x"), id("y")]],
            trials_per_pair: 1000,
        }
    }

    #[test]
    fn logit_choice_frequency_converges() {
        let spec = logit_spec(1.0, 0.5, 1.0);
        let pair = pair_xy();
        let n = 100_000;
        let sample = sample_rum_cf(&spec, &pair, n, 7).unwrap();
        let px = sample.trials.iter().filter(|t| t.chosen == id("x")).count() as f64 / n as f64;
        let want = math::logistic_cdf(0.5);
        assert!((px - want).abs() < 0.006, "px={px} want {want}");
        assert!(sample.trials.iter().all(|t| t.rt > 0.0));
    }

    #[test]
    fn zero_difference_gives_symmetric_choices() {
        let spec = logit_spec(0.7, 0.7, 1.0);
        let pair = pair_xy();
        let sample = sample_rum_cf(&spec, &pair, 50_000, 3).unwrap();
        let px = sample.trials.iter().filter(|t| t.chosen == id("x")).count() as f64 / 50_000.0;
        assert!((px - 0.5).abs() < 0.012, "px={px}");
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let spec = logit_spec(1.0, 0.5, 1.0);
        let pair = pair_xy();
        let a = sample_rum_cf(&spec, &pair, 500, 42).unwrap();
        let b = sample_rum_cf(&spec, &pair, 500, 42).unwrap();
        let c = sample_rum_cf(&spec, &pair, 500, 43).unwrap();
        assert_eq!(a.trials, b.trials);
        assert_ne!(a.trials, c.trials);
    }

    #[test]
    fn parallel_and_sequential_sampling_are_bit_identical() {
        let mut spec = logit_spec(1.0, 0.5, 1.0);
        spec.noise = Some(RtNoise { sigma_log: 0.5 });
        let pair = pair_xy();
        let par = sample_rum_cf(&spec, &pair, 2_000, 17).unwrap();
        let seq = sample_rum_cf_seq(&spec, &pair, 2_000, 17).unwrap();
        assert_eq!(par.trials, seq.trials);
        assert_eq!(par.diagnostics, seq.diagnostics);
    }

    #[test]
    fn analytic_matches_empirical_cdf() {
        let spec = logit_spec(1.0, 0.5, 1.0);
        let pair = pair_xy();
        let analytic = analytic_cdfs(&spec, &pair).unwrap();
        assert!((analytic.p_first - math::logistic_cdf(0.5)).abs() < 1e-12);

        let n = 100_000;
        let sample = sample_rum_cf(&spec, &pair, n, 11).unwrap();
        let mut rts_x: Vec<f64> = sample
            .trials
            .iter()
            .filter(|t| t.chosen == id("x"))
            .map(|t| t.rt)
            .collect();
        rts_x.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let nx = rts_x.len() as f64;
        // sup-norm distance within twice the one-sample DKW bound at 1e-3
        let bound = 2.0 * (f64::ln(2.0 / 1e-3) / (2.0 * nx)).sqrt();
        let mut worst = 0.0f64;
        for (i, &t) in rts_x.iter().enumerate() {
            let emp = (i + 1) as f64 / nx;
            let diff = (emp - analytic.rt_first.eval(t)).abs();
            worst = worst.max(diff);
        }
        assert!(worst < bound, "sup distance {worst} exceeds {bound}");
    }

    #[test]
    fn truncated_chronometric_conditions_the_model() {
        // inverse boundary b(t) = 1/(1+t): differences above 1 are redrawn
        let mut spec = logit_spec(0.5, 0.0, 1.0);
        spec.chronometric = Chronometric::InverseBoundary {
            boundary: Boundary::Hyperbolic {
                scale: 1.0,
                shift: 1.0,
            },
        };
        let pair = pair_xy();
        let analytic = analytic_cdfs(&spec, &pair).unwrap();
        // p(x,y) = (G(1) - G(0)) / (G(1) - G(-1)) for logistic centered at 0.5
        let g = |v: f64| math::logistic_cdf(v - 0.5);
        let want = (g(1.0) - g(0.0)) / (g(1.0) - g(-1.0));
        assert!((analytic.p_first - want).abs() < 1e-12);

        let sample = sample_rum_cf(&spec, &pair, 50_000, 5).unwrap();
        let px = sample.trials.iter().filter(|t| t.chosen == id("x")).count() as f64 / 50_000.0;
        assert!((px - want).abs() < 0.012, "px={px} want {want}");
        assert!(sample.diagnostics.resampled_zero_rt > 0);
    }

    #[test]
    fn noise_keeps_choices_and_preserves_mean_rt() {
        let mut spec = logit_spec(1.0, 0.5, 1.0);
        spec.noise = Some(RtNoise { sigma_log: 0.5 });
        let pair = pair_xy();
        let noisy = sample_rum_cf(&spec, &pair, 80_000, 9).unwrap();
        spec.noise = None;
        let clean = sample_rum_cf(&spec, &pair, 80_000, 9).unwrap();
        // same utility draws, same choices
        for (a, b) in noisy.trials.iter().zip(clean.trials.iter()) {
            assert_eq!(a.chosen, b.chosen);
        }
        let mean = |s: &[TrialRecord]| s.iter().map(|t| t.rt).sum::<f64>() / s.len() as f64;
        let (mn, mc) = (mean(&noisy.trials), mean(&clean.trials));
        assert!(
            (mn / mc - 1.0).abs() < 0.05,
            "noisy mean {mn} clean mean {mc}"
        );
        assert!(analytic_cdfs(&spec_with_noise(), &pair).is_err());
    }

    fn spec_with_noise() -> RumCfSpec {
        let mut s = logit_spec(1.0, 0.5, 1.0);
        s.noise = Some(RtNoise { sigma_log: 0.25 });
        s
    }

    #[test]
    fn noise_draws_have_mean_one() {
        let mut rng = crate::generators::trial_rng(1, &pair_xy(), 0, 0);
        let m: f64 = (0..200_000).map(|_| noise_draw(0.5, &mut rng)).sum::<f64>() / 200_000.0;
        assert!((m - 1.0).abs() < 0.01, "mean {m}");
    }

    #[test]
    fn smooth_quantile_inverts_eval() {
        let spec = logit_spec(1.0, 0.5, 1.0);
        let analytic = analytic_cdfs(&spec, &pair_xy()).unwrap();
        for alpha in [0.05, 0.3, 0.5, 0.9, 0.999] {
            let t = analytic.rt_first.quantile(alpha);
            assert!(
                (analytic.rt_first.eval(t) - alpha).abs() < 1e-9,
                "alpha={alpha}"
            );
        }
    }
}
