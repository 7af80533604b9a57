//! Utility-difference distributions. Each family describes the density
//! g(a,b) of the realized utility difference for the canonical orientation
//! of one pair; the opposite orientation is the sign-flipped mirror.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::math;

use super::SpecError;

/// Uniform draw in the open interval (0, 1).
pub(crate) fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// Serialized family description. Location-scale families take their mean
/// from the spec's utilities; the remaining families pin their own mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiffFamily {
    /// Normally distributed difference (probit-style), standard deviation `sigma`.
    Normal { sigma: f64 },
    /// Logistically distributed difference (logit-style), scale `scale`.
    Logistic { scale: f64 },
    /// Random-coefficient CRRA lottery-versus-safe difference:
    /// v(alpha) = high_prob * high_payoff^alpha - safe_payoff^alpha with
    /// alpha uniform on [alpha_lo, alpha_hi].
    CrraUniform {
        alpha_lo: f64,
        alpha_hi: f64,
        high_payoff: f64,
        high_prob: f64,
        safe_payoff: f64,
    },
    /// Symmetric bimodal difference with mean 1/2: tent-shaped dip between
    /// the modes and quartic power tails.
    Bimodal,
    /// Piecewise-linear CDF through `knots` of (value, cumulative probability).
    Tabulated { knots: Vec<[f64; 2]> },
}

impl DiffFamily {
    /// Whether the family's mean is pinned by the family itself rather than
    /// taken from the utility function.
    pub fn has_intrinsic_mean(&self) -> bool {
        !matches!(
            self,
            DiffFamily::Normal { .. } | DiffFamily::Logistic { .. }
        )
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        match self {
            DiffFamily::Normal { sigma } if !(*sigma > 0.0) => Err(SpecError::Invalid(format!(
                "normal sigma must be positive, got {sigma}"
            ))),
            DiffFamily::Logistic { scale } if !(*scale > 0.0) => Err(SpecError::Invalid(format!(
                "logistic scale must be positive, got {scale}"
            ))),
            DiffFamily::CrraUniform {
                alpha_lo,
                alpha_hi,
                high_payoff,
                high_prob,
                safe_payoff,
            } => {
                if !(alpha_hi > alpha_lo) {
                    return Err(SpecError::Invalid(
                        "alpha range must be non-degenerate".into(),
                    ));
                }
                if !(*high_payoff > 1.0) || !(*high_prob > 0.0) || !(*safe_payoff >= 1.0) {
                    return Err(SpecError::Invalid(
                        "crra parameters need high_payoff > 1, high_prob > 0, safe_payoff >= 1"
                            .into(),
                    ));
                }
                Ok(())
            }
            DiffFamily::Tabulated { knots } => TabulatedCdf::new(knots.clone()).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Resolves against the utility difference of the canonical orientation.
    /// For intrinsic-mean families, `v` may be `None` (the family's own mean
    /// is used); when present its sign decides whether the family is mirrored.
    pub fn resolve(&self, v: Option<f64>) -> Result<PairDiff, SpecError> {
        self.validate()?;
        let diff = match self {
            DiffFamily::Normal { sigma } => {
                let mean =
                    v.ok_or_else(|| SpecError::Invalid("normal family needs utilities".into()))?;
                PairDiff::Normal {
                    mean,
                    sigma: *sigma,
                }
            }
            DiffFamily::Logistic { scale } => {
                let mean =
                    v.ok_or_else(|| SpecError::Invalid("logistic family needs utilities".into()))?;
                PairDiff::Logistic {
                    mean,
                    scale: *scale,
                }
            }
            DiffFamily::CrraUniform {
                alpha_lo,
                alpha_hi,
                high_payoff,
                high_prob,
                safe_payoff,
            } => PairDiff::Crra(CrraUniform {
                alpha_lo: *alpha_lo,
                alpha_hi: *alpha_hi,
                high_payoff: *high_payoff,
                high_prob: *high_prob,
                safe_payoff: *safe_payoff,
            }),
            DiffFamily::Bimodal => PairDiff::Bimodal,
            DiffFamily::Tabulated { knots } => {
                PairDiff::Tabulated(TabulatedCdf::new(knots.clone())?)
            }
        };
        if self.has_intrinsic_mean() {
            if let Some(v) = v {
                let m = diff.mean();
                if (v - m).abs() > 1e-9 && (v + m).abs() <= 1e-9 {
                    return Ok(PairDiff::Mirrored(Box::new(diff)));
                }
                if (v - m).abs() > 1e-9 {
                    return Err(SpecError::Invalid(format!(
                        "utility difference {v} conflicts with family mean {m}"
                    )));
                }
            }
        }
        Ok(diff)
    }
}

/// A difference distribution resolved for one pair's canonical orientation.
#[derive(Debug, Clone)]
pub enum PairDiff {
    Normal {
        mean: f64,
        sigma: f64,
    },
    Logistic {
        mean: f64,
        scale: f64,
    },
    Crra(CrraUniform),
    Bimodal,
    Tabulated(TabulatedCdf),
    /// Sign-flipped wrapper: describes -V where V follows the inner family.
    Mirrored(Box<PairDiff>),
}

impl PairDiff {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PairDiff::Normal { mean, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sigma * z
            }
            PairDiff::Logistic { mean, scale } => {
                let u = uniform_open01(rng);
                mean + scale * (u / (1.0 - u)).ln()
            }
            PairDiff::Crra(c) => {
                c.value(c.alpha_lo + (c.alpha_hi - c.alpha_lo) * uniform_open01(rng))
            }
            PairDiff::Bimodal => bimodal_quantile(uniform_open01(rng)),
            PairDiff::Tabulated(t) => t.quantile(uniform_open01(rng)),
            PairDiff::Mirrored(inner) => -inner.sample(rng),
        }
    }

    /// G(v), the CDF of the difference.
    pub fn cdf(&self, v: f64) -> f64 {
        match self {
            PairDiff::Normal { mean, sigma } => math::normal_cdf((v - mean) / sigma),
            PairDiff::Logistic { mean, scale } => math::logistic_cdf((v - mean) / scale),
            PairDiff::Crra(c) => c.cdf(v),
            PairDiff::Bimodal => bimodal_cdf(v),
            PairDiff::Tabulated(t) => t.cdf(v),
            PairDiff::Mirrored(inner) => 1.0 - inner.cdf(-v),
        }
    }

    /// P(V > v), computed without forming 1 - G(v), so upper tails keep full
    /// floating-point resolution.
    pub fn sf(&self, v: f64) -> f64 {
        match self {
            PairDiff::Normal { mean, sigma } => math::normal_cdf(-(v - mean) / sigma),
            PairDiff::Logistic { mean, scale } => math::logistic_cdf(-(v - mean) / scale),
            // symmetric around 1/2: P(V > v) = P(V < 1 - v)
            PairDiff::Bimodal => bimodal_cdf(1.0 - v),
            // bounded supports: direct complement is exact at the endpoints
            PairDiff::Crra(c) => 1.0 - c.cdf(v),
            PairDiff::Tabulated(t) => 1.0 - t.cdf(v),
            PairDiff::Mirrored(inner) => inner.cdf(-v),
        }
    }

    /// g(v), the density, where a closed form exists.
    pub fn pdf(&self, v: f64) -> Option<f64> {
        match self {
            PairDiff::Normal { mean, sigma } => {
                let z = (v - mean) / sigma;
                Some((-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
            }
            PairDiff::Logistic { mean, scale } => {
                let z = (v - mean) / scale;
                let e = (-z.abs()).exp();
                Some(e / (scale * (1.0 + e) * (1.0 + e)))
            }
            PairDiff::Crra(c) => c.pdf(v),
            PairDiff::Bimodal => Some(bimodal_pdf(v)),
            PairDiff::Tabulated(t) => t.pdf(v),
            PairDiff::Mirrored(inner) => inner.pdf(-v),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            PairDiff::Normal { mean, .. } | PairDiff::Logistic { mean, .. } => *mean,
            PairDiff::Crra(c) => c.mean(),
            PairDiff::Bimodal => 0.5,
            PairDiff::Tabulated(t) => t.mean(),
            PairDiff::Mirrored(inner) => -inner.mean(),
        }
    }

    /// G^{-1}(p) for p in (0,1). Closed form except for the normal family,
    /// which bisects its own smooth strictly-monotone CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            PairDiff::Normal { mean, sigma } => {
                let f = |v: f64| math::normal_cdf((v - mean) / sigma);
                math::monotone_inverse(f, p, mean - 10.0 * sigma, mean + 10.0 * sigma, 1e-15)
            }
            PairDiff::Logistic { mean, scale } => mean + scale * (p / (1.0 - p)).ln(),
            PairDiff::Crra(c) => c.value(c.alpha_lo + p * (c.alpha_hi - c.alpha_lo)),
            PairDiff::Bimodal => bimodal_quantile(p),
            PairDiff::Tabulated(t) => t.quantile(p),
            PairDiff::Mirrored(inner) => -inner.quantile(1.0 - p),
        }
    }

    /// Closed support bounds (may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            PairDiff::Normal { .. } | PairDiff::Logistic { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            PairDiff::Crra(c) => (c.value(c.alpha_lo), c.value(c.alpha_hi)),
            PairDiff::Bimodal => (f64::NEG_INFINITY, f64::INFINITY),
            PairDiff::Tabulated(t) => t.support(),
            PairDiff::Mirrored(inner) => {
                let (lo, hi) = inner.support();
                (-hi, -lo)
            }
        }
    }
}

/// Random-coefficient CRRA difference between a two-outcome lottery and a
/// safe payment. `value` is strictly increasing in alpha for the parameter
/// ranges admitted by validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CrraUniform {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub high_payoff: f64,
    pub high_prob: f64,
    pub safe_payoff: f64,
}

impl CrraUniform {
    /// Example-style defaults: lottery paying 20 with probability 1/20
    /// against a safe payment of 1, alpha uniform on [0.4, 1.4].
    pub fn standard() -> Self {
        CrraUniform {
            alpha_lo: 0.4,
            alpha_hi: 1.4,
            high_payoff: 20.0,
            high_prob: 0.05,
            safe_payoff: 1.0,
        }
    }

    pub fn value(&self, alpha: f64) -> f64 {
        self.high_prob * self.high_payoff.powf(alpha) - self.safe_payoff.powf(alpha)
    }

    fn dvalue(&self, alpha: f64) -> f64 {
        self.high_prob * self.high_payoff.powf(alpha) * self.high_payoff.ln()
            - self.safe_payoff.powf(alpha) * self.safe_payoff.ln()
    }

    /// alpha with value(alpha) = v, clamped to the alpha range.
    fn alpha_at(&self, v: f64) -> f64 {
        math::monotone_inverse(|a| self.value(a), v, self.alpha_lo, self.alpha_hi, 1e-14)
    }

    pub fn cdf(&self, v: f64) -> f64 {
        let (lo, hi) = (self.value(self.alpha_lo), self.value(self.alpha_hi));
        if v < lo {
            return 0.0;
        }
        if v >= hi {
            return 1.0;
        }
        (self.alpha_at(v) - self.alpha_lo) / (self.alpha_hi - self.alpha_lo)
    }

    pub fn pdf(&self, v: f64) -> Option<f64> {
        let (lo, hi) = (self.value(self.alpha_lo), self.value(self.alpha_hi));
        if v < lo || v > hi {
            return Some(0.0);
        }
        let a = self.alpha_at(v);
        Some(1.0 / ((self.alpha_hi - self.alpha_lo) * self.dvalue(a)))
    }

    pub fn mean(&self) -> f64 {
        math::integrate(|a| self.value(a), self.alpha_lo, self.alpha_hi, 1e-12)
            / (self.alpha_hi - self.alpha_lo)
    }
}

// Symmetric bimodal fixture: density 1/(1-v)^5 below zero, a tent between the
// modes at 0 and 1, and 1/v^5 above one. Mean 1/2, G(0) = 1/4.
fn bimodal_pdf(v: f64) -> f64 {
    if v <= 0.0 {
        (1.0 - v).powi(-5)
    } else if v <= 0.5 {
        1.0 - 2.0 * v
    } else if v <= 1.0 {
        2.0 * v - 1.0
    } else {
        v.powi(-5)
    }
}

fn bimodal_cdf(v: f64) -> f64 {
    if v <= 0.0 {
        0.25 * (1.0 - v).powi(-4)
    } else if v <= 0.5 {
        0.25 + v * (1.0 - v)
    } else if v <= 1.0 {
        0.75 - v * (1.0 - v)
    } else {
        1.0 - 0.25 * v.powi(-4)
    }
}

fn bimodal_quantile(u: f64) -> f64 {
    if u <= 0.25 {
        1.0 - (4.0 * u).powf(-0.25)
    } else if u <= 0.5 {
        0.5 * (1.0 - (2.0 - 4.0 * u).max(0.0).sqrt())
    } else if u <= 0.75 {
        0.5 * (1.0 + (4.0 * u - 2.0).max(0.0).sqrt())
    } else {
        (4.0 * (1.0 - u)).powf(-0.25)
    }
}

/// Piecewise-linear CDF described by knots of (value, cumulative probability).
/// Repeated values encode jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    knots: Vec<[f64; 2]>,
}

impl TabulatedCdf {
    pub fn new(knots: Vec<[f64; 2]>) -> Result<Self, SpecError> {
        if knots.len() < 2 {
            return Err(SpecError::Invalid(
                "tabulated cdf needs at least two knots".into(),
            ));
        }
        let ok_v = knots.windows(2).all(|w| w[0][0] <= w[1][0]);
        let ok_p = knots.windows(2).all(|w| w[0][1] <= w[1][1]);
        let ends = knots[0][1] == 0.0 && knots.last().unwrap()[1] == 1.0;
        let finite = knots.iter().all(|k| k[0].is_finite() && k[1].is_finite());
        if !(ok_v && ok_p && ends && finite) {
            return Err(SpecError::Invalid(
                "tabulated cdf knots must be sorted, within [0,1], and span 0..1".into(),
            ));
        }
        Ok(TabulatedCdf { knots })
    }

    pub fn knots(&self) -> &[[f64; 2]] {
        &self.knots
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v < self.knots[0][0] {
            return 0.0;
        }
        if v >= self.knots.last().unwrap()[0] {
            return 1.0;
        }
        // right-continuous: take the highest probability at ties
        let i = self.knots.partition_point(|k| k[0] <= v);
        let (a, b) = (&self.knots[i - 1], &self.knots[i]);
        if b[0] == a[0] {
            return b[1];
        }
        a[1] + (b[1] - a[1]) * (v - a[0]) / (b[0] - a[0])
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let i = self.knots.partition_point(|k| k[1] < p);
        if i == 0 {
            return self.knots[0][0];
        }
        if i == self.knots.len() {
            return self.knots.last().unwrap()[0];
        }
        let (a, b) = (&self.knots[i - 1], &self.knots[i]);
        if b[1] == a[1] {
            return b[0];
        }
        a[0] + (b[0] - a[0]) * (p - a[1]) / (b[1] - a[1])
    }

    pub fn pdf(&self, v: f64) -> Option<f64> {
        if v < self.knots[0][0] || v > self.knots.last().unwrap()[0] {
            return Some(0.0);
        }
        let i = self
            .knots
            .partition_point(|k| k[0] <= v)
            .min(self.knots.len() - 1);
        let (a, b) = (&self.knots[i.saturating_sub(1)], &self.knots[i]);
        if b[0] == a[0] {
            return None; // atom
        }
        Some((b[1] - a[1]) / (b[0] - a[0]))
    }

    /// Exact mean of the piecewise-linear CDF (uniform mass on each segment,
    /// atoms at repeated values).
    pub fn mean(&self) -> f64 {
        let mut m = 0.0;
        for w in self.knots.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            m += (b[1] - a[1]) * 0.5 * (a[0] + b[0]);
        }
        m
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0][0], self.knots.last().unwrap()[0])
    }
}
