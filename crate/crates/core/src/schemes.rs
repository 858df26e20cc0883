//! Mixing schemes: distributions `gamma^t` over past posteriors `0..=t`.
//!
//! All three kinds put mass `1 - alpha` on the current posterior and differ
//! in how the remaining `alpha` is spread over the past.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{LowerBounds, SimplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingScheme {
    /// `alpha / t` on each past posterior.
    Uniform { alpha: f64 },
    /// Past posterior `q` weighted by `(t - q)^-exponent`, normalized.
    PowerDecay { alpha: f64, exponent: f64 },
    /// Geometric decay `theta (1 - theta)^(t-q-1) alpha`, with the leftover
    /// tail on the initial uniform posterior. This is the scheme Share-theta
    /// implements implicitly.
    Geometric { alpha: f64, theta: f64 },
}

impl MixingScheme {
    pub fn uniform(alpha: f64) -> Result<Self> {
        let s = MixingScheme::Uniform { alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn power_decay(alpha: f64, exponent: f64) -> Result<Self> {
        let s = MixingScheme::PowerDecay { alpha, exponent };
        s.validate()?;
        Ok(s)
    }

    pub fn geometric(alpha: f64, theta: f64) -> Result<Self> {
        let s = MixingScheme::Geometric { alpha, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            MixingScheme::Uniform { alpha }
            | MixingScheme::PowerDecay { alpha, .. }
            | MixingScheme::Geometric { alpha, .. } => alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::param(name, x, "must lie in [0, 1]"))
            }
        };
        unit("alpha", self.alpha())?;
        match *self {
            MixingScheme::Uniform { .. } => Ok(()),
            MixingScheme::PowerDecay { exponent, .. } => {
                if exponent >= 0.0 && exponent.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("exponent", exponent, "must be finite and >= 0"))
                }
            }
            MixingScheme::Geometric { theta, .. } => unit("theta", theta),
        }
    }
}

/// Refresh interval for the running power in the geometric scheme.
const POWER_REFRESH: usize = 64;

/// `(gamma_0^t, ..., gamma_t^t)` for trial `t >= 1`.
pub fn scheme_weights(scheme: &MixingScheme, t: usize) -> Result<Vec<f64>> {
    scheme.validate()?;
    if t == 0 {
        return Err(Error::param("t", 0.0, "mixing schemes start at t = 1"));
    }
    let mut gamma = vec![0.0; t + 1];
    gamma[t] = 1.0 - scheme.alpha();
    match *scheme {
        MixingScheme::Uniform { alpha } => {
            let share = alpha / t as f64;
            gamma[..t].iter_mut().for_each(|g| *g = share);
        }
        MixingScheme::PowerDecay { alpha, exponent } => {
            let z: f64 = (1..=t).map(|d| (d as f64).powf(-exponent)).sum();
            for (q, g) in gamma[..t].iter_mut().enumerate() {
                *g = alpha * ((t - q) as f64).powf(-exponent) / z;
            }
        }
        MixingScheme::Geometric { alpha, theta } => {
            let decay = 1.0 - theta;
            // power = (1 - theta)^(t - q - 1), walking q downward from t - 1.
            let mut power = 1.0;
            for (j, q) in (1..t).rev().enumerate() {
                if j > 0 && j % POWER_REFRESH == 0 {
                    power = decay.powi(j as i32);
                }
                gamma[q] = theta * power * alpha;
                power *= decay;
            }
            gamma[0] = decay.powi(t as i32 - 1) * alpha;
        }
    }
    Ok(gamma)
}

/// Lower bounds `beta_i = max_q gamma_q^t * w_hat_{q,i}` turning a mixing
/// scheme into the constraint set of its projection analogue. `history`
/// holds the posteriors `w_hat_0..=w_hat_t`, so `t = history.len() - 1`.
pub fn beta_from_scheme(history: &[SimplexVector], scheme: &MixingScheme) -> Result<LowerBounds> {
    let first = history
        .first()
        .ok_or(Error::param("history", 0.0, "must hold at least w_hat_0"))?;
    let t = history.len() - 1;
    let gamma = scheme_weights(scheme, t)?;
    let n = first.len();
    let mut beta = vec![0.0f64; n];
    for (g, post) in gamma.iter().zip(history) {
        if post.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: post.len(),
            });
        }
        for (b, &x) in beta.iter_mut().zip(post.iter()) {
            *b = b.max(g * x);
        }
    }
    LowerBounds::new_relaxed(beta)
}
