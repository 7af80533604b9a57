//! End-to-end simulation runs: a model spec in, a trial stream plus a
//! ground-truth sidecar out.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::data_model::{OptionId, PairKey, TrialRecord};
use crate::generators::{
    analytic_cdfs, constant_boundary_hit_prob, sample_ddm, sample_rum_cf, Boundary, DdmSpec,
    ModelSpec, RumCfSpec, SampleDiagnostics, SpecError,
};

/// Ground truth for one simulated pair, canonical orientation.
#[derive(Debug, Clone, Serialize)]
pub struct PairTruth {
    pub x: OptionId,
    pub y: OptionId,
    /// Mean utility difference of the generating distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Exact choice probability p(x,y), when closed forms exist.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Odds percentile t(x,y) of the favored direction, when defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odds_percentile: Option<f64>,
    /// Half-odds percentile theta(x,y) of the favored direction, when defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_odds_percentile: Option<f64>,
    /// Drift of the diffusion model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    /// Closed-form hit probability (constant boundaries only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_prob: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub schema: &'static str,
    pub model: &'static str,
    pub seed: u64,
    pub trials_per_pair: usize,
    /// Utilities as specified (may be empty when families pin their means).
    pub utilities: BTreeMap<OptionId, f64>,
    pub pairs: Vec<PairTruth>,
    pub diagnostics: SampleDiagnostics,
    /// Fraction of diffusion paths discarded at the horizon.
    pub truncation_resample_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub trials: Vec<TrialRecord>,
    pub sidecar: Sidecar,
}

/// Runs the model over every spec pair. Deterministic for a given
/// (spec, seed); `n_override` replaces the spec's per-pair trial count.
pub fn simulate(
    spec: &ModelSpec,
    seed: u64,
    n_override: Option<usize>,
) -> Result<SimulationOutput, SpecError> {
    spec.validate()?;
    match spec {
        ModelSpec::RumCf(s) => run_rum(s, seed, n_override, "rum_cf"),
        ModelSpec::RumNcf(s) => run_rum(s, seed, n_override, "rum_ncf"),
        ModelSpec::Ddm(s) => run_ddm(s, seed, n_override),
    }
}

fn run_rum(
    spec: &RumCfSpec,
    seed: u64,
    n_override: Option<usize>,
    model: &'static str,
) -> Result<SimulationOutput, SpecError> {
    let n = n_override.unwrap_or(spec.trials_per_pair);
    let mut trials = Vec::new();
    let mut diagnostics = SampleDiagnostics::default();
    let mut pairs = Vec::new();
    // ground truth comes from the noise-free model; noise leaves choice
    // frequencies untouched
    let clean = RumCfSpec {
        noise: None,
        ..spec.clone()
    };
    for key in spec.pair_keys()? {
        let sample = sample_rum_cf(spec, &key, n, seed)?;
        diagnostics.absorb(&sample.diagnostics);
        trials.extend(sample.trials);
        pairs.push(rum_pair_truth(&clean, &key));
    }
    Ok(SimulationOutput {
        trials,
        sidecar: Sidecar {
            schema: "1",
            model,
            seed,
            trials_per_pair: n,
            utilities: spec.utilities.clone(),
            pairs,
            diagnostics,
            truncation_resample_rate: 0.0,
        },
    })
}

fn rum_pair_truth(clean: &RumCfSpec, key: &PairKey) -> PairTruth {
    let v = clean.resolve(key).ok().map(|d| d.mean());
    let mut truth = PairTruth {
        x: key.first().clone(),
        y: key.second().clone(),
        v,
        p: None,
        odds_percentile: None,
        half_odds_percentile: None,
        drift: None,
        hit_prob: None,
    };
    if let Ok(analytic) = analytic_cdfs(clean, key) {
        truth.p = Some(analytic.p_first);
        // percentiles of the favored direction
        let (p_fav, fav_cdf) = if analytic.p_first >= 0.5 {
            (analytic.p_first, &analytic.rt_first)
        } else {
            (1.0 - analytic.p_first, &analytic.rt_second)
        };
        if p_fav > 0.5 {
            truth.odds_percentile = Some(fav_cdf.quantile((1.0 - p_fav) / p_fav));
            truth.half_odds_percentile = Some(fav_cdf.quantile(1.0 / (2.0 * p_fav)));
        }
    }
    truth
}

fn run_ddm(
    spec: &DdmSpec,
    seed: u64,
    n_override: Option<usize>,
) -> Result<SimulationOutput, SpecError> {
    let n = n_override.unwrap_or(spec.trials_per_pair);
    let mut trials = Vec::new();
    let mut diagnostics = SampleDiagnostics::default();
    let mut pairs = Vec::new();
    for key in spec.pair_keys()? {
        let sample = sample_ddm(spec, &key, n, seed)?;
        diagnostics.absorb(&sample.diagnostics);
        trials.extend(sample.trials);
        let mu = spec.drift(&key)?;
        pairs.push(PairTruth {
            x: key.first().clone(),
            y: key.second().clone(),
            v: Some(mu / spec.drift_scale),
            p: match spec.boundary {
                Boundary::Constant { level } => {
                    Some(constant_boundary_hit_prob(mu, spec.sigma2, level))
                }
                _ => None,
            },
            odds_percentile: None,
            half_odds_percentile: None,
            drift: Some(mu),
            hit_prob: match spec.boundary {
                Boundary::Constant { level } => {
                    Some(constant_boundary_hit_prob(mu, spec.sigma2, level))
                }
                _ => None,
            },
        });
    }
    let total = trials.len() as f64;
    let rate =
        diagnostics.truncated_paths as f64 / (total + diagnostics.truncated_paths as f64).max(1.0);
    Ok(SimulationOutput {
        trials,
        sidecar: Sidecar {
            schema: "1",
            model: "ddm",
            seed,
            trials_per_pair: n,
            utilities: spec.utilities.clone(),
            pairs,
            diagnostics,
            truncation_resample_rate: rate,
        },
    })
}
