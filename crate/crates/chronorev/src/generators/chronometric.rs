//! Chronometric functions (realized utility difference -> response time) and
//! decision-boundary families, which are two views of the same object: a
//! collapsing boundary is the inverse of a chronometric function.

use serde::{Deserialize, Serialize};

use super::SpecError;

/// Decision boundary b(t) for diffusion stopping, or equivalently the inverse
/// of a chronometric function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Boundary {
    /// Constant level B > 0. Valid for diffusion stopping, not invertible
    /// into a chronometric function.
    Constant { level: f64 },
    /// b(t) = scale / (shift + t); shift = 0 makes b unbounded near zero.
    Hyperbolic { scale: f64, shift: f64 },
    /// b(t) = scale * exp(-rate * t).
    Exponential { scale: f64, rate: f64 },
}

impl Boundary {
    pub fn validate(&self) -> Result<(), SpecError> {
        let ok = match self {
            Boundary::Constant { level } => *level > 0.0,
            Boundary::Hyperbolic { scale, shift } => *scale > 0.0 && *shift >= 0.0,
            Boundary::Exponential { scale, rate } => *scale > 0.0 && *rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SpecError::Invalid(format!(
                "invalid boundary parameters: {self:?}"
            )))
        }
    }

    pub fn is_collapsing(&self) -> bool {
        !matches!(self, Boundary::Constant { .. })
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Boundary::Constant { level } => *level,
            Boundary::Hyperbolic { scale, shift } => scale / (shift + t),
            Boundary::Exponential { scale, rate } => scale * (-rate * t).exp(),
        }
    }

    /// b(0); infinite for the hyperbolic family with shift 0.
    pub fn initial(&self) -> f64 {
        match self {
            Boundary::Constant { level } => *level,
            Boundary::Hyperbolic { scale, shift } => {
                if *shift == 0.0 {
                    f64::INFINITY
                } else {
                    scale / shift
                }
            }
            Boundary::Exponential { scale, .. } => *scale,
        }
    }

    /// t with b(t) = v, defined for collapsing families and 0 < v <= b(0).
    pub fn inverse(&self, v: f64) -> Result<f64, SpecError> {
        match self {
            Boundary::Constant { .. } => Err(SpecError::Unsupported(
                "constant boundary has no inverse".into(),
            )),
            Boundary::Hyperbolic { scale, shift } => Ok((scale / v - shift).max(0.0)),
            Boundary::Exponential { scale, rate } => Ok(((scale / v).ln() / rate).max(0.0)),
        }
    }

    /// -b'(t), positive for collapsing families.
    pub fn decay_rate(&self, t: f64) -> f64 {
        match self {
            Boundary::Constant { .. } => 0.0,
            Boundary::Hyperbolic { scale, shift } => scale / ((shift + t) * (shift + t)),
            Boundary::Exponential { scale, rate } => rate * scale * (-rate * t).exp(),
        }
    }
}

/// Strictly decreasing map from absolute realized utility difference to
/// response time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chronometric {
    /// r(v) = kappa / v.
    Reciprocal { kappa: f64 },
    /// r = b^{-1} for a collapsing boundary b; r(v) = 0 for v >= b(0).
    InverseBoundary { boundary: Boundary },
    /// Piecewise-linear decreasing table of (v, r(v)) pairs, extended
    /// hyperbolically (r ~ knot_rt * knot_v / v) beyond both end knots so the
    /// map stays continuous, strictly decreasing, and positive.
    Table { knots: Vec<[f64; 2]> },
}

impl Chronometric {
    pub fn validate(&self) -> Result<(), SpecError> {
        match self {
            Chronometric::Reciprocal { kappa } => {
                if *kappa > 0.0 {
                    Ok(())
                } else {
                    Err(SpecError::Invalid(
                        "reciprocal kappa must be positive".into(),
                    ))
                }
            }
            Chronometric::InverseBoundary { boundary } => {
                boundary.validate()?;
                if boundary.is_collapsing() {
                    Ok(())
                } else {
                    Err(SpecError::Invalid(
                        "chronometric inverse requires a collapsing boundary".into(),
                    ))
                }
            }
            Chronometric::Table { knots } => {
                let ok = knots.len() >= 2
                    && knots
                        .windows(2)
                        .all(|w| w[0][0] < w[1][0] && w[0][1] > w[1][1])
                    && knots.iter().all(|k| k[0] > 0.0 && k[1] > 0.0);
                if ok {
                    Ok(())
                } else {
                    Err(SpecError::Invalid(
                        "chronometric table must be strictly decreasing over positive knots".into(),
                    ))
                }
            }
        }
    }

    /// r(v) for v > 0.
    pub fn rt(&self, v: f64) -> f64 {
        match self {
            Chronometric::Reciprocal { kappa } => kappa / v,
            Chronometric::InverseBoundary { boundary } => {
                if v >= boundary.initial() {
                    0.0
                } else {
                    boundary.inverse(v).expect("validated collapsing boundary")
                }
            }
            Chronometric::Table { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if v <= first[0] {
                    return first[1] * first[0] / v;
                }
                if v >= last[0] {
                    return last[1] * last[0] / v;
                }
                let i = knots.partition_point(|k| k[0] <= v);
                let (a, b) = (knots[i - 1], knots[i]);
                a[1] + (b[1] - a[1]) * (v - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// r^{-1}(t) for t > 0, mapping into the strictly-positive branch.
    pub fn inverse(&self, t: f64) -> f64 {
        match self {
            Chronometric::Reciprocal { kappa } => kappa / t,
            Chronometric::InverseBoundary { boundary } => boundary.at(t),
            Chronometric::Table { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t >= first[1] {
                    return first[1] * first[0] / t;
                }
                if t <= last[1] {
                    return last[1] * last[0] / t;
                }
                let i = knots.partition_point(|k| k[1] > t);
                let (a, b) = (knots[i - 1], knots[i]);
                a[0] + (b[0] - a[0]) * (t - a[1]) / (b[1] - a[1])
            }
        }
    }

    /// sup { v : r(v) > 0 }; infinite when r stays positive.
    pub fn positive_range(&self) -> f64 {
        match self {
            Chronometric::Reciprocal { .. } => f64::INFINITY,
            Chronometric::InverseBoundary { boundary } => boundary.initial(),
            // both tails extend hyperbolically, so r never reaches zero
            Chronometric::Table { .. } => f64::INFINITY,
        }
    }

    /// -d r^{-1}/dt at t > 0, used for analytic response-time densities.
    pub fn inverse_decay(&self, t: f64) -> Option<f64> {
        match self {
            Chronometric::Reciprocal { kappa } => Some(kappa / (t * t)),
            Chronometric::InverseBoundary { boundary } => Some(boundary.decay_rate(t)),
            Chronometric::Table { .. } => None,
        }
    }
}

/// Interprets a collapsing boundary as a chronometric function. Fails for
/// boundaries that are not strictly decreasing to zero.
pub fn boundary_to_chronometric(boundary: &Boundary) -> Result<Chronometric, SpecError> {
    boundary.validate()?;
    if !boundary.is_collapsing() {
        return Err(SpecError::Invalid(
            "only a collapsing boundary can be read as a chronometric function".into(),
        ));
    }
    Ok(Chronometric::InverseBoundary {
        boundary: boundary.clone(),
    })
}
