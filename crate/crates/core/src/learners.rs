//! Per-trial state and update rules of the expert-tracking learners.
//!
//! Every learner starts a trial from its current weights `w`, applies the
//! exponential-weights loss update to get the posterior `w_hat`, then moves
//! to the next trial's weights by its own rule:
//!
//! | learner      | next weights                                     |
//! |--------------|--------------------------------------------------|
//! | EW           | `w_hat`                                          |
//! | Fixed-Share  | `(1 - alpha) w_hat + alpha / n`                  |
//! | Share-theta  | `(1 - alpha) w_hat + alpha v`, `v` a running mix |
//! | PoDS-theta   | projection of `w_hat` onto `C(beta)`             |
//! | MPP          | explicit mixture of all past posteriors          |
//! | specialists  | awake mass of a two-state Markov prior           |
//!
//! States are values: stepping borrows a state and returns the next one.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::project;
use crate::schemes::{scheme_weights, MixingScheme};
use crate::simplex::{dot, normalize, InteriorSimplexVector, LowerBounds, SimplexVector};

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn unit_param(name: &'static str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::param(name, x, "must lie in [0, 1]"))
    }
}

/// Exponential-weights update `w_hat_i ∝ w_i exp(-eta l_i)`, evaluated in
/// log space so large `eta * l` cannot underflow the whole vector.
pub fn loss_update(w: &SimplexVector, losses: &[f64], eta: f64) -> Result<SimplexVector> {
    check_len(w.len(), losses.len())?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", eta, "must be finite and >= 0"));
    }
    if let Some(index) = losses.iter().position(|l| !l.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let log_w: Vec<f64> = w
        .iter()
        .zip(losses)
        .map(|(&wi, &li)| if wi > 0.0 { wi.ln() - eta * li } else { f64::NEG_INFINITY })
        .collect();
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Numeric("all weights underflowed to zero".into()));
    }
    let unnorm: Vec<f64> = log_w.iter().map(|&x| (x - top).exp()).collect();
    normalize(&unnorm).map_err(|e| Error::Numeric(format!("loss update: {e}")))
}

/// `(1 - alpha) w_hat + alpha * uniform`.
pub fn fixed_share_update(w_hat: &SimplexVector, alpha: f64) -> Result<SimplexVector> {
    unit_param("alpha", alpha)?;
    let share = alpha / w_hat.len() as f64;
    Ok(SimplexVector::from_trusted(
        w_hat.iter().map(|&x| (1.0 - alpha) * x + share).collect(),
    ))
}

/// The weighted-average prediction `w · x`.
pub fn predict(w: &SimplexVector, expert_predictions: &[f64]) -> Result<f64> {
    check_len(w.len(), expert_predictions.len())?;
    Ok(dot(w, expert_predictions))
}

fn mix(a: &[f64], wa: f64, b: &[f64], wb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
}

/// Exponential weights with no switching mechanism.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EwState {
    pub w: SimplexVector,
}

impl EwState {
    pub fn new(n: usize) -> Result<Self> {
        Ok(EwState {
            w: SimplexVector::uniform(n)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedShareState {
    pub w: SimplexVector,
    alpha: f64,
}

impl FixedShareState {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        Ok(FixedShareState {
            w: SimplexVector::uniform(n)?,
            alpha: unit_param("alpha", alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// PoDS-theta: projection onto a dynamic constraint set whose bounds
/// `beta` (total mass `alpha`) drift toward recent posteriors at rate `theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PodsState {
    pub w: SimplexVector,
    beta: Vec<f64>,
    alpha: f64,
    theta: f64,
}

impl PodsState {
    pub fn new(n: usize, alpha: f64, theta: f64) -> Result<Self> {
        let alpha = unit_param("alpha", alpha)?;
        Ok(PodsState {
            w: SimplexVector::uniform(n)?,
            beta: vec![alpha / n as f64; n],
            alpha,
            theta: unit_param("theta", theta)?,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn advance(&self, losses: &[f64], eta: f64) -> Result<(Self, SimplexVector)> {
        let w_hat = loss_update(&self.w, losses, eta)?;
        let w_next = if self.alpha == 0.0 {
            w_hat.clone()
        } else {
            let interior = InteriorSimplexVector::try_from(w_hat.clone())
                .map_err(|e| Error::Numeric(format!("posterior left the interior: {e}")))?;
            let bounds = LowerBounds::new_relaxed(self.beta.clone())?;
            project(&interior, &bounds)?.p
        };
        let mut beta = mix(&self.beta, 1.0 - self.theta, &w_hat, self.theta * self.alpha);
        // Both terms carry mass alpha; pin the sum against rounding drift.
        let mass: f64 = beta.iter().sum();
        if mass > 0.0 {
            beta.iter_mut().for_each(|b| *b *= self.alpha / mass);
        }
        let next = PodsState {
            w: w_next,
            beta,
            alpha: self.alpha,
            theta: self.theta,
        };
        Ok((next, w_hat))
    }
}

/// Share-theta: the generalized share update with a sharing vector `v`
/// that mixes in each posterior at rate `theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareState {
    pub w: SimplexVector,
    pub v: SimplexVector,
    alpha: f64,
    theta: f64,
}

impl ShareState {
    pub fn new(n: usize, alpha: f64, theta: f64) -> Result<Self> {
        Ok(ShareState {
            w: SimplexVector::uniform(n)?,
            v: SimplexVector::uniform(n)?,
            alpha: unit_param("alpha", alpha)?,
            theta: unit_param("theta", theta)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn advance(&self, losses: &[f64], eta: f64) -> Result<(Self, SimplexVector)> {
        let w_hat = loss_update(&self.w, losses, eta)?;
        let w = mix(&w_hat, 1.0 - self.alpha, &self.v, self.alpha);
        // v moves toward the posterior, not toward the shared weights.
        let v = mix(&self.v, 1.0 - self.theta, &w_hat, self.theta);
        let next = ShareState {
            w: SimplexVector::from_trusted(w),
            v: SimplexVector::from_trusted(v),
            alpha: self.alpha,
            theta: self.theta,
        };
        Ok((next, w_hat))
    }
}

/// Partition specialists under a two-state (awake/asleep) Markov prior,
/// collapsed to per-expert awake mass `a` and asleep mass `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialistState {
    pub a: Vec<f64>,
    pub s: Vec<f64>,
    p_ww: f64,
    p_ws: f64,
    p_sw: f64,
    p_ss: f64,
    pi_w: f64,
    pi_s: f64,
}

impl SpecialistState {
    /// `p_ws`: awake → asleep, `p_sw`: asleep → awake, `pi_w`: initial awake
    /// probability. The prior must be stationary (detailed balance).
    pub fn new(n: usize, p_ws: f64, p_sw: f64, pi_w: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewExperts { min: 2, got: n });
        }
        let p_ws = unit_param("p_ws", p_ws)?;
        let p_sw = unit_param("p_sw", p_sw)?;
        if !(pi_w > 0.0 && pi_w < 1.0) {
            return Err(Error::param("pi_w", pi_w, "must lie in (0, 1)"));
        }
        let pi_s = 1.0 - pi_w;
        if (p_ws * pi_w - p_sw * pi_s).abs() > 1e-12 {
            return Err(Error::param(
                "pi_w",
                pi_w,
                "prior is not stationary: p_ws * pi_w != p_sw * pi_s",
            ));
        }
        let nf = n as f64;
        Ok(SpecialistState {
            a: vec![pi_w / nf; n],
            s: vec![pi_s / nf; n],
            p_ww: 1.0 - p_ws,
            p_ws,
            p_sw,
            p_ss: 1.0 - p_sw,
            pi_w,
            pi_s,
        })
    }

    /// The prior under which the specialists predict exactly as
    /// Share-theta: `p_sw = theta`, `p_ws = alpha`, `pi_w = theta / (alpha + theta)`.
    pub fn from_share_params(n: usize, alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param("alpha", alpha, "must lie in (0, 1)"));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::param("theta", theta, "must lie in (0, 1)"));
        }
        SpecialistState::new(n, alpha, theta, theta / (alpha + theta))
    }

    pub fn pi_w(&self) -> f64 {
        self.pi_w
    }

    pub fn pi_s(&self) -> f64 {
        self.pi_s
    }

    /// Transition probabilities `(p_ww, p_ws, p_sw, p_ss)`.
    pub fn transitions(&self) -> (f64, f64, f64, f64) {
        (self.p_ww, self.p_ws, self.p_sw, self.p_ss)
    }

    /// The awake vector normalized for prediction.
    pub fn awake_weights(&self) -> Result<SimplexVector> {
        normalize(&self.a).map_err(|e| Error::Numeric(format!("awake mass: {e}")))
    }

    fn advance(&self, losses: &[f64], eta: f64) -> Result<(Self, SimplexVector)> {
        let awake_mass: f64 = self.a.iter().sum();
        let w_hat = loss_update(&self.awake_weights()?, losses, eta)?;
        let (a, s) = w_hat
            .iter()
            .zip(&self.s)
            .map(|(&h, &si)| {
                let updated = awake_mass * h;
                (
                    self.p_ww * updated + self.p_sw * si,
                    self.p_ws * updated + self.p_ss * si,
                )
            })
            .unzip();
        let next = SpecialistState { a, s, ..self.clone() };
        Ok((next, w_hat))
    }
}

/// Mixing past posteriors with an explicit mixture. Keeps the whole
/// posterior history, so each step costs `O(n t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MppState {
    pub w: SimplexVector,
    history: Vec<Arc<SimplexVector>>,
    scheme: MixingScheme,
}

impl MppState {
    pub fn new(n: usize, scheme: MixingScheme) -> Result<Self> {
        scheme.validate()?;
        let u = SimplexVector::uniform(n)?;
        Ok(MppState {
            w: u.clone(),
            history: vec![Arc::new(u)],
            scheme,
        })
    }

    /// Posteriors `w_hat_0..=w_hat_t`, with `w_hat_0` uniform.
    pub fn history(&self) -> &[Arc<SimplexVector>] {
        &self.history
    }

    pub fn scheme(&self) -> &MixingScheme {
        &self.scheme
    }

    fn advance(&self, losses: &[f64], eta: f64) -> Result<(Self, SimplexVector)> {
        let w_hat = loss_update(&self.w, losses, eta)?;
        let mut history = self.history.clone();
        history.push(Arc::new(w_hat.clone()));
        let t = history.len() - 1;
        let gamma = scheme_weights(&self.scheme, t)?;
        let total: f64 = gamma.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numeric(format!("mixing weights sum to {total}")));
        }
        let mut w = vec![0.0; w_hat.len()];
        for (g, post) in gamma.iter().zip(&history) {
            for (wi, &x) in w.iter_mut().zip(post.iter()) {
                *wi += g * x;
            }
        }
        let next = MppState {
            w: SimplexVector::new(w)?,
            history,
            scheme: self.scheme,
        };
        Ok((next, w_hat))
    }
}

pub fn ew_step(state: &EwState, losses: &[f64], eta: f64) -> Result<EwState> {
    Ok(EwState {
        w: loss_update(&state.w, losses, eta)?,
    })
}

pub fn fixed_share_step(state: &FixedShareState, losses: &[f64], eta: f64) -> Result<FixedShareState> {
    let w_hat = loss_update(&state.w, losses, eta)?;
    Ok(FixedShareState {
        w: fixed_share_update(&w_hat, state.alpha)?,
        alpha: state.alpha,
    })
}

pub fn pods_step(state: &PodsState, losses: &[f64], eta: f64) -> Result<PodsState> {
    state.advance(losses, eta).map(|(s, _)| s)
}

pub fn share_step(state: &ShareState, losses: &[f64], eta: f64) -> Result<ShareState> {
    state.advance(losses, eta).map(|(s, _)| s)
}

pub fn specialists_step(state: &SpecialistState, losses: &[f64], eta: f64) -> Result<SpecialistState> {
    state.advance(losses, eta).map(|(s, _)| s)
}

pub fn mpp_step(state: &MppState, losses: &[f64], eta: f64) -> Result<MppState> {
    state.advance(losses, eta).map(|(s, _)| s)
}

/// Which learner to run, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Ew,
    FixedShare { alpha: f64 },
    Pods { alpha: f64, theta: f64 },
    Share { alpha: f64, theta: f64 },
    /// Specialists with the prior mapped from Share-theta's `(alpha, theta)`.
    Specialists { alpha: f64, theta: f64 },
    Mpp { scheme: MixingScheme },
}

impl LearnerSpec {
    pub fn init(&self, n: usize) -> Result<LearnerState> {
        Ok(match *self {
            LearnerSpec::Ew => LearnerState::Ew(EwState::new(n)?),
            LearnerSpec::FixedShare { alpha } => {
                LearnerState::FixedShare(FixedShareState::new(n, alpha)?)
            }
            LearnerSpec::Pods { alpha, theta } => LearnerState::Pods(PodsState::new(n, alpha, theta)?),
            LearnerSpec::Share { alpha, theta } => {
                LearnerState::Share(ShareState::new(n, alpha, theta)?)
            }
            LearnerSpec::Specialists { alpha, theta } => {
                LearnerState::Specialists(SpecialistState::from_share_params(n, alpha, theta)?)
            }
            LearnerSpec::Mpp { scheme } => LearnerState::Mpp(MppState::new(n, scheme)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Ew => "ew",
            LearnerSpec::FixedShare { .. } => "fixed_share",
            LearnerSpec::Pods { .. } => "pods",
            LearnerSpec::Share { .. } => "share",
            LearnerSpec::Specialists { .. } => "specialists",
            LearnerSpec::Mpp { .. } => "mpp",
        }
    }
}

/// Any learner's per-trial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerState {
    Ew(EwState),
    FixedShare(FixedShareState),
    Pods(PodsState),
    Share(ShareState),
    Specialists(SpecialistState),
    Mpp(MppState),
}

/// One trial's worth of learner movement.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Loss-updated weights, before sharing or projection.
    pub posterior: SimplexVector,
    pub next: LearnerState,
}

impl LearnerState {
    /// Weights used to predict on the current trial.
    pub fn weights(&self) -> Result<SimplexVector> {
        Ok(match self {
            LearnerState::Ew(s) => s.w.clone(),
            LearnerState::FixedShare(s) => s.w.clone(),
            LearnerState::Pods(s) => s.w.clone(),
            LearnerState::Share(s) => s.w.clone(),
            LearnerState::Specialists(s) => s.awake_weights()?,
            LearnerState::Mpp(s) => s.w.clone(),
        })
    }

    pub fn step(&self, losses: &[f64], eta: f64) -> Result<Transition> {
        let (next, posterior) = match self {
            LearnerState::Ew(s) => {
                let w = loss_update(&s.w, losses, eta)?;
                (LearnerState::Ew(EwState { w: w.clone() }), w)
            }
            LearnerState::FixedShare(s) => {
                let w_hat = loss_update(&s.w, losses, eta)?;
                let next = FixedShareState {
                    w: fixed_share_update(&w_hat, s.alpha)?,
                    alpha: s.alpha,
                };
                (LearnerState::FixedShare(next), w_hat)
            }
            LearnerState::Pods(s) => {
                let (n, p) = s.advance(losses, eta)?;
                (LearnerState::Pods(n), p)
            }
            LearnerState::Share(s) => {
                let (n, p) = s.advance(losses, eta)?;
                (LearnerState::Share(n), p)
            }
            LearnerState::Specialists(s) => {
                let (n, p) = s.advance(losses, eta)?;
                (LearnerState::Specialists(n), p)
            }
            LearnerState::Mpp(s) => {
                let (n, p) = s.advance(losses, eta)?;
                (LearnerState::Mpp(n), p)
            }
        };
        Ok(Transition { posterior, next })
    }
}
