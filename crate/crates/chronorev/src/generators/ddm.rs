//! First-passage sampling for drift-diffusion evidence accumulation with
//! symmetric constant or collapsing boundaries.
//!
//! Euler-Maruyama stepping with linear interpolation of the crossing time
//! within the final step. Paths that outlive the horizon are discarded and
//! redrawn (counted in the diagnostics) so the emitted response-time
//! distributions are not censored.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data_model::{PairKey, TrialRecord};
use crate::exec;

use super::{trial_rng, Boundary, DdmSpec, PairSample, SampleDiagnostics, SpecError};

const MAX_PATH_RETRIES: u32 = 1_000;
const MAX_BATCH_SALTS: u64 = 64;

/// Closed-form probability of absorbing at the upper of two symmetric
/// constant boundaries +-level, starting from zero.
pub fn constant_boundary_hit_prob(mu: f64, sigma2: f64, level: f64) -> f64 {
    if mu == 0.0 {
        0.5
    } else {
        1.0 / (1.0 + (-2.0 * mu * level / sigma2).exp())
    }
}

/// Theoretical instantaneous choice-odds ratio at response time `t` for a
/// collapsing-boundary model: exp(mu * b(t) / (sigma^2 / 2)). Only defined
/// for collapsing boundaries.
pub fn ddm_likelihood_ratio(spec: &DdmSpec, pair: &PairKey, t: f64) -> Result<f64, SpecError> {
    if !spec.boundary.is_collapsing() {
        return Err(SpecError::Unsupported(
            "the odds-ratio formula applies to collapsing boundaries only".into(),
        ));
    }
    if t < 0.0 {
        return Err(SpecError::Invalid("t must be nonnegative".into()));
    }
    let mu = spec.drift(pair)?;
    Ok((mu * spec.boundary.at(t) / (spec.sigma2 / 2.0)).exp())
}

/// Simulates `n` first-passage trials for one pair. Deterministic in
/// (spec, pair, n, seed); the path for trial i draws only from substream i.
pub fn sample_ddm(
    spec: &DdmSpec,
    pair: &PairKey,
    n: usize,
    seed: u64,
) -> Result<PairSample, SpecError> {
    sample_ddm_with(spec, pair, n, seed, true)
}

/// Sequential twin of [`sample_ddm`], bit-identical output, for benchmarks.
pub fn sample_ddm_seq(
    spec: &DdmSpec,
    pair: &PairKey,
    n: usize,
    seed: u64,
) -> Result<PairSample, SpecError> {
    sample_ddm_with(spec, pair, n, seed, false)
}

fn sample_ddm_with(
    spec: &DdmSpec,
    pair: &PairKey,
    n: usize,
    seed: u64,
    parallel: bool,
) -> Result<PairSample, SpecError> {
    spec.boundary.validate()?;
    if !(spec.sigma2 > 0.0) || !(spec.dt > 0.0) || !(spec.t_max > spec.dt) {
        return Err(SpecError::Invalid(
            "need sigma2 > 0 and 0 < dt < t_max".into(),
        ));
    }
    if n == 0 {
        return Err(SpecError::Invalid("cannot sample zero trials".into()));
    }
    let mu = spec.drift(pair)?;
    let sigma = spec.sigma2.sqrt();

    for salt in 0..MAX_BATCH_SALTS {
        let drawn = exec::map_indexed_with(parallel, n, |i| {
            let mut rng = trial_rng(seed, pair, i as u64, salt);
            walk_to_boundary(mu, sigma, &spec.boundary, spec.dt, spec.t_max, &mut rng)
        });
        let mut diagnostics = SampleDiagnostics {
            regenerated_batches: salt,
            ..Default::default()
        };
        let mut trials = Vec::with_capacity(n);
        let mut first = 0usize;
        for (upper, rt, truncated) in drawn {
            diagnostics.truncated_paths += truncated;
            let chosen = if upper {
                pair.first().clone()
            } else {
                pair.second().clone()
            };
            if upper {
                first += 1;
            }
            trials.push(TrialRecord {
                pair: pair.clone(),
                chosen,
                rt,
            });
        }
        if first > 0 && first < n {
            return Ok(PairSample {
                pair: pair.clone(),
                trials,
                diagnostics,
            });
        }
        if n == 1 {
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

/// One absorbed path: returns (hit upper boundary, response time, number of
/// truncated attempts before this one was absorbed).
fn walk_to_boundary<R: Rng>(
    mu: f64,
    sigma: f64,
    boundary: &Boundary,
    dt: f64,
    t_max: f64,
    rng: &mut R,
) -> (bool, f64, u64) {
    let sqrt_dt = dt.sqrt();
    let mut truncated = 0u64;
    for _ in 0..MAX_PATH_RETRIES {
        let mut z = 0.0f64;
        let mut t = 0.0f64;
        let mut b_t = boundary.at(0.0);
        loop {
            let eps: f64 = StandardNormal.sample(rng);
            let z_next = z + mu * dt + sigma * sqrt_dt * eps;
            let t_next = t + dt;
            let b_next = boundary.at(t_next);
            let crossed_up = z_next >= b_next;
            let crossed_down = z_next <= -b_next;
            if crossed_up || crossed_down {
                let db = b_next - b_t;
                let dz = z_next - z;
                let theta_up = if crossed_up {
                    crossing_fraction(b_t - z, dz - db)
                } else {
                    f64::INFINITY
                };
                let theta_down = if crossed_down {
                    crossing_fraction(z + b_t, -db - dz)
                } else {
                    f64::INFINITY
                };
                let (upper, theta) = if theta_up <= theta_down {
                    (true, theta_up)
                } else {
                    (false, theta_down)
                };
                let rt = t + theta.clamp(0.0, 1.0) * dt;
                return (upper, rt.max(f64::MIN_POSITIVE), truncated);
            }
            if t_next >= t_max {
                truncated += 1;
                break;
            }
            z = z_next;
            t = t_next;
            b_t = b_next;
        }
    }
    panic!("path never absorbed within {MAX_PATH_RETRIES} horizon retries");
}

/// Fraction of the step at which a linear path covers `gap` at closing speed
/// `speed`; both are positive when a crossing was detected.
fn crossing_fraction(gap: f64, speed: f64) -> f64 {
    if speed <= 0.0 {
        // boundary collapsed past the path without relative motion; the
        // crossing is effectively at the step end
        1.0
    } else {
        (gap / speed).clamp(0.0, 1.0)
    }
}
