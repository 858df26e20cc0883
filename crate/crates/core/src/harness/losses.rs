use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::predict;
use crate::simplex::SimplexVector;

use super::comparator::ComparatorSequence;
use super::rng;

/// Expert predictions are clipped to `[CLIP, 1 - CLIP]` wherever a log is taken.
pub const CLIP: f64 = 1e-3;

/// A `(c, eta)`-realizable loss and prediction pair with `c * eta = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossModel {
    /// Log loss on binary outcomes, weighted-average prediction. `c = 1`.
    Log,
    /// Square loss on binary outcomes with the aggregating-algorithm
    /// substitution prediction. `c = 1/2`.
    Square,
    /// Mix loss `-ln sum_i w_i exp(-l_i)` applied directly to expert losses. `c = 1`.
    Mix,
}

impl LossModel {
    pub fn c(&self) -> f64 {
        match self {
            LossModel::Log | LossModel::Mix => 1.0,
            LossModel::Square => 0.5,
        }
    }

    pub fn eta(&self) -> f64 {
        1.0 / self.c()
    }

    /// Loss of a single expert predicting `x` when the outcome is `y`.
    pub fn expert_loss(&self, x: f64, y: f64) -> f64 {
        match self {
            LossModel::Log | LossModel::Mix => log_loss(x, y),
            LossModel::Square => (x - y) * (x - y),
        }
    }

    /// `-c ln sum_i w_i exp(-eta l_i)`: the most a realizable learner may lose.
    pub fn mix_value(&self, w: &[f64], losses: &[f64]) -> f64 {
        let eta = self.eta();
        let top = losses.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let s: f64 = w
            .iter()
            .zip(losses)
            .map(|(wi, li)| wi * (-eta * (li - top)).exp())
            .sum();
        self.c() * (eta * top - s.ln())
    }
}

/// `-ln` of the probability the prediction assigns to the outcome.
pub fn log_loss(x: f64, y: f64) -> f64 {
    -(if y >= 0.5 { x } else { 1.0 - x }).ln()
}

/// One trial sequence: binary outcomes, expert predictions and their
/// losses. Imported loss matrices carry losses only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trials {
    pub losses: Vec<Vec<f64>>,
    pub predictions: Option<Vec<Vec<f64>>>,
    pub outcomes: Option<Vec<f64>>,
}

impl Trials {
    pub fn from_losses(losses: Vec<Vec<f64>>) -> Result<Self> {
        let n = losses.first().map(Vec::len).unwrap_or(0);
        if n < 2 {
            return Err(Error::TooFewExperts { min: 2, got: n });
        }
        for row in &losses {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if let Some(index) = row.iter().position(|l| !l.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Trials {
            losses,
            predictions: None,
            outcomes: None,
        })
    }

    pub fn horizon(&self) -> usize {
        self.losses.len()
    }

    pub fn experts(&self) -> usize {
        self.losses.first().map(Vec::len).unwrap_or(0)
    }

    /// The learner's loss on trial `t` when predicting from weights `w`.
    pub fn learner_loss(&self, model: LossModel, w: &SimplexVector, t: usize) -> Result<f64> {
        let losses = &self.losses[t];
        let loss = match model {
            LossModel::Mix => model.mix_value(w, losses),
            LossModel::Log | LossModel::Square => {
                let (x, y) = match (&self.predictions, &self.outcomes) {
                    (Some(p), Some(o)) => (&p[t], o[t]),
                    _ => {
                        return Err(Error::param(
                            "loss",
                            0.0,
                            "log and square loss need expert predictions; use mix loss for loss matrices",
                        ))
                    }
                };
                let pred = match model {
                    LossModel::Log => predict(w, x)?,
                    _ => square_substitution(w, x, y)?,
                };
                model.expert_loss(pred, y)
            }
        };
        debug_assert!(
            loss <= model.mix_value(w, losses) + 1e-9,
            "realizability violated on trial {t}: {loss} > {}",
            model.mix_value(w, losses)
        );
        Ok(loss)
    }
}

/// Aggregating-algorithm prediction for square loss on binary outcomes:
/// `(1 + g(0) - g(1)) / 2` with `g(y) = -1/2 ln sum_i w_i exp(-2 (x_i - y)^2)`,
/// clipped to `[0, 1]`.
pub fn square_substitution(w: &SimplexVector, x: &[f64], _y: f64) -> Result<f64> {
    if w.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: x.len(),
        });
    }
    let model = LossModel::Square;
    let g = |y: f64| {
        let l: Vec<f64> = x.iter().map(|&xi| model.expert_loss(xi, y)).collect();
        model.mix_value(w, &l)
    };
    Ok(((1.0 + g(0.0) - g(1.0)) / 2.0).clamp(0.0, 1.0))
}

/// Synthetic trials in which the comparator's expert is right with
/// probability `1 - noise` and every other expert is a fair coin.
pub fn generate_losses(
    comparator: &ComparatorSequence,
    n: usize,
    model: LossModel,
    noise: f64,
    seed: u64,
) -> Result<Trials> {
    if !(0.0..0.5).contains(&noise) {
        return Err(Error::param("noise", noise, "must lie in [0, 0.5)"));
    }
    if n < 2 {
        return Err(Error::TooFewExperts { min: 2, got: n });
    }
    if let Some(&bad) = comparator.ids().iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange { k: bad, len: n });
    }
    let mut rng = rng(seed);
    let horizon = comparator.horizon();
    let mut outcomes = Vec::with_capacity(horizon);
    let mut predictions = Vec::with_capacity(horizon);
    let mut losses = Vec::with_capacity(horizon);
    for &best in comparator.ids() {
        let y = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let p_right = if i == best { 1.0 - noise } else { 0.5 };
                let guess: f64 = if rng.random_bool(p_right) { y } else { 1.0 - y };
                match model {
                    LossModel::Square => guess,
                    LossModel::Log | LossModel::Mix => guess.clamp(CLIP, 1.0 - CLIP),
                }
            })
            .collect();
        losses.push(x.iter().map(|&xi| model.expert_loss(xi, y)).collect());
        outcomes.push(y);
        predictions.push(x);
    }
    Ok(Trials {
        losses,
        predictions: Some(predictions),
        outcomes: Some(outcomes),
    })
}
