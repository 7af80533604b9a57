//! Simulators for the data-generating processes the analysis layer is tested
//! against: random utility models with (noisy) chronometric functions, and
//! drift-diffusion models with constant or collapsing boundaries. Where the
//! model has closed forms, exact choice probabilities and response-time CDFs
//! are exposed alongside the samplers.
//!
//! Trial generation is deterministic-parallel: every trial draws from its own
//! substream keyed by (seed, pair, trial index), so any partition of indices
//! across workers reassembles into bit-identical output.

mod chronometric;
mod ddm;
mod families;
mod rum;

pub use chronometric::{boundary_to_chronometric, Boundary, Chronometric};
pub use ddm::{constant_boundary_hit_prob, ddm_likelihood_ratio, sample_ddm, sample_ddm_seq};
pub use families::{CrraUniform, DiffFamily, PairDiff, TabulatedCdf};
pub use rum::{analytic_cdfs, sample_rum_cf, sample_rum_cf_seq, AnalyticPair, SmoothCdf};

use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_model::{OptionId, PairKey, TrialRecord};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid model spec: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("spec json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("degenerate pair {0}: {1}")]
    Degenerate(String, String),
    #[error("unknown option `{0}` (missing utility)")]
    UnknownOption(String),
}

/// Multiplicative response-time noise: lognormal with log-scale `sigma_log`
/// and location -sigma_log^2/2, so the mean is exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtNoise {
    pub sigma_log: f64,
}

impl RtNoise {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.sigma_log > 0.0 && self.sigma_log.is_finite() {
            Ok(())
        } else {
            Err(SpecError::Invalid(
                "noise sigma_log must be positive".into(),
            ))
        }
    }
}

/// Per-pair override of the default difference family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffOverride {
    pub options: [OptionId; 2],
    #[serde(flatten)]
    pub family: DiffFamily,
}

/// Random utility model with a chronometric function (optionally a noisy one).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RumCfSpec {
    /// Deterministic utilities. May be omitted for pairs whose family pins
    /// its own mean.
    #[serde(default)]
    pub utilities: BTreeMap<OptionId, f64>,
    pub diff: DiffFamily,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diff_overrides: Vec<DiffOverride>,
    pub chronometric: Chronometric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<RtNoise>,
    /// Unordered pairs to simulate.
    pub pairs: Vec<[OptionId; 2]>,
    pub trials_per_pair: usize,
}

impl RumCfSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        self.diff.validate()?;
        self.chronometric.validate()?;
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        if self.pairs.is_empty() {
            return Err(SpecError::Invalid("spec lists no pairs".into()));
        }
        if self.trials_per_pair == 0 {
            return Err(SpecError::Invalid(
                "trials_per_pair must be positive".into(),
            ));
        }
        for o in &self.diff_overrides {
            o.family.validate()?;
        }
        for p in &self.pairs {
            let key = PairKey::new(p[0].clone(), p[1].clone()).ok_or_else(|| {
                SpecError::Invalid(format!("pair ({},{}) is degenerate", p[0], p[1]))
            })?;
            self.resolve(&key)?;
        }
        Ok(())
    }

    pub fn pair_keys(&self) -> Result<Vec<PairKey>, SpecError> {
        self.pairs
            .iter()
            .map(|p| {
                PairKey::new(p[0].clone(), p[1].clone()).ok_or_else(|| {
                    SpecError::Invalid(format!("pair ({},{}) is degenerate", p[0], p[1]))
                })
            })
            .collect()
    }

    pub fn family_for(&self, pair: &PairKey) -> &DiffFamily {
        self.diff_overrides
            .iter()
            .find(|o| {
                PairKey::new(o.options[0].clone(), o.options[1].clone()).as_ref() == Some(pair)
            })
            .map(|o| &o.family)
            .unwrap_or(&self.diff)
    }

    /// u(first) - u(second) for the canonical orientation, when both
    /// utilities are known.
    pub fn canonical_diff(&self, pair: &PairKey) -> Option<f64> {
        let ua = self.utilities.get(pair.first())?;
        let ub = self.utilities.get(pair.second())?;
        Some(ua - ub)
    }

    /// The difference distribution of the canonical orientation.
    pub fn resolve(&self, pair: &PairKey) -> Result<PairDiff, SpecError> {
        let family = self.family_for(pair);
        let v = self.canonical_diff(pair);
        if !family.has_intrinsic_mean() && v.is_none() {
            let missing = if self.utilities.contains_key(pair.first()) {
                pair.second()
            } else {
                pair.first()
            };
            return Err(SpecError::UnknownOption(missing.to_string()));
        }
        family.resolve(v)
    }
}

/// Drift-diffusion model: Brownian evidence with drift proportional to the
/// utility difference, absorbed at symmetric constant or collapsing
/// boundaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdmSpec {
    pub utilities: BTreeMap<OptionId, f64>,
    /// Drift per unit of utility difference: mu(x,y) = drift_scale * (u(x)-u(y)).
    #[serde(default = "default_drift_scale")]
    pub drift_scale: f64,
    pub sigma2: f64,
    pub boundary: Boundary,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    pub pairs: Vec<[OptionId; 2]>,
    pub trials_per_pair: usize,
}

fn default_drift_scale() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_max() -> f64 {
    50.0
}

impl DdmSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        self.boundary.validate()?;
        if !(self.sigma2 > 0.0) {
            return Err(SpecError::Invalid("sigma2 must be positive".into()));
        }
        if !(self.drift_scale > 0.0) {
            return Err(SpecError::Invalid("drift_scale must be positive".into()));
        }
        if !(self.dt > 0.0 && self.t_max > self.dt) {
            return Err(SpecError::Invalid("need 0 < dt < t_max".into()));
        }
        if self.pairs.is_empty() || self.trials_per_pair == 0 {
            return Err(SpecError::Invalid(
                "spec lists no pairs or no trials".into(),
            ));
        }
        for p in &self.pairs {
            let key = PairKey::new(p[0].clone(), p[1].clone()).ok_or_else(|| {
                SpecError::Invalid(format!("pair ({},{}) is degenerate", p[0], p[1]))
            })?;
            self.drift(&key)?;
        }
        Ok(())
    }

    pub fn pair_keys(&self) -> Result<Vec<PairKey>, SpecError> {
        self.pairs
            .iter()
            .map(|p| {
                PairKey::new(p[0].clone(), p[1].clone()).ok_or_else(|| {
                    SpecError::Invalid(format!("pair ({},{}) is degenerate", p[0], p[1]))
                })
            })
            .collect()
    }

    /// mu for the canonical orientation: positive drifts favor `pair.first()`.
    pub fn drift(&self, pair: &PairKey) -> Result<f64, SpecError> {
        let ua = self
            .utilities
            .get(pair.first())
            .ok_or_else(|| SpecError::UnknownOption(pair.first().to_string()))?;
        let ub = self
            .utilities
            .get(pair.second())
            .ok_or_else(|| SpecError::UnknownOption(pair.second().to_string()))?;
        Ok(self.drift_scale * (ua - ub))
    }
}

/// Top-level model description as stored in spec JSON files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    RumCf(RumCfSpec),
    RumNcf(RumCfSpec),
    Ddm(DdmSpec),
}

impl ModelSpec {
    pub fn from_json(json: &str) -> Result<Self, SpecError> {
        let spec: ModelSpec = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        match self {
            ModelSpec::RumCf(s) => {
                if s.noise.is_some() {
                    return Err(SpecError::Invalid(
                        "rum_cf must not set noise; use model rum_ncf".into(),
                    ));
                }
                s.validate()
            }
            ModelSpec::RumNcf(s) => {
                if s.noise.is_none() {
                    return Err(SpecError::Invalid("rum_ncf requires a noise block".into()));
                }
                s.validate()
            }
            ModelSpec::Ddm(s) => s.validate(),
        }
    }
}

/// Counters for the guarded resampling steps a sampler may take.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    /// Utility-difference draws that hit exactly zero and were redrawn.
    pub resampled_zero_diff: u64,
    /// Draws whose chronometric response time was zero and were redrawn.
    pub resampled_zero_rt: u64,
    /// Whole-pair regenerations because one direction ended up empty.
    pub regenerated_batches: u64,
    /// Diffusion paths discarded for exceeding the time horizon.
    pub truncated_paths: u64,
}

impl SampleDiagnostics {
    pub fn absorb(&mut self, other: &SampleDiagnostics) {
        self.resampled_zero_diff += other.resampled_zero_diff;
        self.resampled_zero_rt += other.resampled_zero_rt;
        self.regenerated_batches += other.regenerated_batches;
        self.truncated_paths += other.truncated_paths;
    }
}

/// Trials for one pair along with the sampler's diagnostics.
#[derive(Debug, Clone)]
pub struct PairSample {
    pub pair: PairKey,
    pub trials: Vec<TrialRecord>,
    pub diagnostics: SampleDiagnostics,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fnv1a(h: &mut u64, bytes: &[u8]) {
    for b in bytes {
        *h = (*h ^ u64::from(*b)).wrapping_mul(0x100000001b3);
    }
}

/// Independent generator for one trial, keyed by (seed, pair, index, salt).
pub(crate) fn trial_rng(seed: u64, pair: &PairKey, index: u64, salt: u64) -> ChaCha8Rng {
    let mut h = 0xcbf29ce484222325u64;
    fnv1a(&mut h, pair.first().as_str().as_bytes());
    fnv1a(&mut h, &[0x1f]);
    fnv1a(&mut h, pair.second().as_str().as_bytes());
    let mut state = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    state = mix64(state ^ h);
    state = mix64(state ^ index);
    state = mix64(state ^ salt.wrapping_mul(0xd134_2543_de82_ef95));
    let mut key = [0u8; 32];
    let mut s = state;
    for chunk in key.chunks_mut(8) {
        s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
        chunk.copy_from_slice(&mix64(s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
