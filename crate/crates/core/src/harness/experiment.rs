use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundInputs};
use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, LearnerState};
use crate::projection::project;
use crate::schemes::MixingScheme;
use crate::simplex::{l1_distance, InteriorSimplexVector, LowerBounds};

use super::comparator::{generate_comparator, ComparatorSequence};
use super::losses::{generate_losses, LossModel, Trials};
use super::{derive_seed, RNG_ALGORITHM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub learner_loss: f64,
    pub comparator_loss: f64,
    /// `||w_{t+1} - w_hat_t||_1`: how far sharing or projection moved the posterior.
    pub l1_update_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentParams {
    pub learner: LearnerSpec,
    pub n: usize,
    pub horizon: usize,
    pub k: usize,
    pub m: usize,
    pub loss: LossModel,
    pub c: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub params: ExperimentParams,
    pub per_trial: Vec<TrialRecord>,
    pub cumulative_regret: f64,
    /// Which regret bound `bound_value` is.
    pub bound_name: &'static str,
    pub bound_value: f64,
}

/// Relative slack for summation rounding when regret meets a bound with equality.
pub const BOUND_SLACK: f64 = 1e-9;

impl ExperimentResult {
    pub fn within_bound(&self) -> bool {
        self.cumulative_regret <= self.bound_value + BOUND_SLACK * self.bound_value.abs().max(1.0)
    }

    pub fn total_update_cost(&self) -> f64 {
        self.per_trial.iter().map(|r| r.l1_update_cost).sum()
    }
}

/// The regret bound each learner carries under optimal tuning. Plain EW
/// only has the static `c ln n`, which holds when the comparator never switches.
pub fn bound_for(spec: &LearnerSpec, inp: &BoundInputs) -> Result<(&'static str, f64)> {
    Ok(match spec {
        LearnerSpec::Ew => ("static", inp.c * (inp.n as f64).ln()),
        LearnerSpec::FixedShare { .. } => ("fixed_share", bounds::fixed_share_bound(inp)?),
        LearnerSpec::Pods { .. } | LearnerSpec::Share { .. } | LearnerSpec::Specialists { .. } => {
            ("pods", bounds::pods_bound(inp)?)
        }
        LearnerSpec::Mpp { scheme } => match scheme {
            MixingScheme::Geometric { .. } => ("pods", bounds::pods_bound(inp)?),
            MixingScheme::Uniform { .. } => ("mpp_uniform", bounds::mpp_uniform_bound(inp)?),
            MixingScheme::PowerDecay { .. } => ("mpp_decay", bounds::mpp_decay_bound(inp)?),
        },
    })
}

/// Runs the trial loop of `spec` over `trials`, scoring against `comparator`.
pub fn run_experiment(
    spec: &LearnerSpec,
    trials: &Trials,
    comparator: &ComparatorSequence,
    model: LossModel,
) -> Result<ExperimentResult> {
    let n = trials.experts();
    let horizon = trials.horizon();
    if comparator.horizon() != horizon {
        return Err(Error::DimensionMismatch {
            expected: horizon,
            got: comparator.horizon(),
        });
    }
    if let Some(&bad) = comparator.ids().iter().find(|&&i| i >= n) {
        return Err(Error::OutOfRange { k: bad, len: n });
    }
    let inp = BoundInputs::new(n, horizon.max(2), comparator.switches(), comparator.pool_size(), model.c())?;
    let (bound_name, bound_value) = bound_for(spec, &inp)?;

    let eta = model.eta();
    let mut state: LearnerState = spec.init(n)?;
    let mut per_trial = Vec::with_capacity(horizon);
    let mut regret = 0.0;
    for (t, &best) in comparator.ids().iter().enumerate() {
        let w = state.weights()?;
        let learner_loss = trials.learner_loss(model, &w, t)?;
        let comparator_loss = trials.losses[t][best];
        let step = state.step(&trials.losses[t], eta)?;
        let next_w = step.next.weights()?;
        per_trial.push(TrialRecord {
            learner_loss,
            comparator_loss,
            l1_update_cost: l1_distance(&next_w, &step.posterior),
        });
        regret += learner_loss - comparator_loss;
        state = step.next;
    }
    Ok(ExperimentResult {
        params: ExperimentParams {
            learner: *spec,
            n,
            horizon,
            k: comparator.switches(),
            m: comparator.pool_size(),
            loss: model,
            c: model.c(),
            eta,
        },
        per_trial,
        cumulative_regret: regret,
        bound_name,
        bound_value,
    })
}

/// A self-contained synthetic experiment: comparator, losses and learner
/// all derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSetup {
    pub n: usize,
    pub horizon: usize,
    pub k: usize,
    pub m: usize,
    pub loss: LossModel,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSetup {
    pub fn bound_inputs(&self) -> Result<BoundInputs> {
        BoundInputs::new(self.n, self.horizon, self.k, self.m, self.loss.c())
    }

    pub fn comparator(&self) -> Result<ComparatorSequence> {
        generate_comparator(self.n, self.horizon, self.k, self.m, derive_seed(self.seed, 0))
    }

    pub fn trials(&self, comparator: &ComparatorSequence) -> Result<Trials> {
        generate_losses(comparator, self.n, self.loss, self.noise, derive_seed(self.seed, 1))
    }

    pub fn run(&self, spec: &LearnerSpec) -> Result<ExperimentResult> {
        let comparator = self.comparator()?;
        let trials = self.trials(&comparator)?;
        run_experiment(spec, &trials, &comparator, self.loss)
    }
}

/// Runs every `(learner, setup)` cell; cells are independent and may run in parallel.
pub fn run_cells(cells: &[(LearnerSpec, SyntheticSetup)]) -> Vec<Result<ExperimentResult>> {
    crate::batch::map_slice(cells, |(spec, setup)| setup.run(spec))
}

/// Records the generator used for a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RngInfo {
    pub algorithm: &'static str,
    pub seed: u64,
}

impl RngInfo {
    pub fn new(seed: u64) -> Self {
        RngInfo {
            algorithm: RNG_ALGORITHM,
            seed,
        }
    }
}

/// L1 moves of projection onto `C(alpha v)` and of sharing toward `v`,
/// both starting from the same posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedCosts {
    pub projection: Vec<f64>,
    pub shared: Vec<f64>,
    pub projection_move: f64,
    pub sharing_move: f64,
}

pub fn matched_state_cost_compare(
    w_hat: &InteriorSimplexVector,
    v: &InteriorSimplexVector,
    alpha: f64,
) -> Result<MatchedCosts> {
    if w_hat.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: w_hat.len(),
            got: v.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", alpha, "must lie in (0, 1)"));
    }
    let beta = LowerBounds::new(v.iter().map(|vi| alpha * vi).collect())?;
    let p = project(w_hat, &beta)?.p.into_vec();
    let shared: Vec<f64> = w_hat
        .iter()
        .zip(v.iter())
        .map(|(w, vi)| (1.0 - alpha) * w + alpha * vi)
        .collect();
    Ok(MatchedCosts {
        projection_move: l1_distance(&p, w_hat),
        sharing_move: l1_distance(&shared, w_hat),
        projection: p,
        shared,
    })
}

/// Steps Share-theta over `losses` and at every trial compares, from its
/// posterior and sharing vector, the projection move with the sharing move.
/// Returns the per-trial `(projection_move, sharing_move)`.
pub fn matched_state_run(
    losses: &[Vec<f64>],
    alpha: f64,
    theta: f64,
    eta: f64,
) -> Result<Vec<(f64, f64)>> {
    let n = losses.first().map(Vec::len).unwrap_or(0);
    let mut state = LearnerSpec::Share { alpha, theta }.init(n)?;
    let mut out = Vec::with_capacity(losses.len());
    for row in losses {
        let v = match &state {
            LearnerState::Share(s) => s.v.clone(),
            _ => unreachable!("initialised as share"),
        };
        let step = state.step(row, eta)?;
        let w_hat = InteriorSimplexVector::try_from(step.posterior)?;
        let v = InteriorSimplexVector::try_from(v)?;
        let c = matched_state_cost_compare(&w_hat, &v, alpha)?;
        out.push((c.projection_move, c.sharing_move));
        state = step.next;
    }
    Ok(out)
}
