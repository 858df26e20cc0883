use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, LearnerState, SpecialistState};
use crate::schemes::MixingScheme;
use crate::simplex::SimplexVector;

use super::{derive_seed, rng, RngInfo};

pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// Uniform `[0, 1)` losses for `horizon` trials over `n` experts.
pub fn random_losses(n: usize, horizon: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..horizon)
        .map(|_| (0..n).map(|_| r.random::<f64>()).collect())
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_open_unit(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, x, "must lie in (0, 1)"))
    }
}

fn share_parts(state: &LearnerState) -> (&SimplexVector, &SimplexVector) {
    match state {
        LearnerState::Share(s) => (&s.w, &s.v),
        _ => unreachable!("initialised as share"),
    }
}

/// Largest componentwise gap between Share-theta and MPP with the
/// geometric scheme over the weights of every trial.
pub fn share_vs_geometric_mpp(losses: &[Vec<f64>], alpha: f64, theta: f64) -> Result<f64> {
    let n = losses.first().map(Vec::len).unwrap_or(2);
    let mut share = LearnerSpec::Share { alpha, theta }.init(n)?;
    let mut mpp = LearnerSpec::Mpp {
        scheme: MixingScheme::geometric(alpha, theta)?,
    }
    .init(n)?;
    let mut worst = max_abs_diff(&share.weights()?, &mpp.weights()?);
    for row in losses {
        share = share.step(row, 1.0)?.next;
        mpp = mpp.step(row, 1.0)?.next;
        worst = worst.max(max_abs_diff(&share.weights()?, &mpp.weights()?));
    }
    Ok(worst)
}

/// Largest gaps between the specialists prior mapped from `(alpha, theta)`
/// and Share-theta: normalized awake mass against `w_t`, and asleep mass
/// over `pi_s` against `v_t`.
pub fn specialists_vs_share(losses: &[Vec<f64>], alpha: f64, theta: f64) -> Result<(f64, f64)> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("theta", theta)?;
    let n = losses.first().map(Vec::len).unwrap_or(2);
    let mut share = LearnerSpec::Share { alpha, theta }.init(n)?;
    let mut spec = SpecialistState::from_share_params(n, alpha, theta)?;
    let gaps = |share: &LearnerState, spec: &SpecialistState| -> Result<(f64, f64)> {
        let (w, v) = share_parts(share);
        let asleep: Vec<f64> = spec.s.iter().map(|s| s / spec.pi_s()).collect();
        Ok((max_abs_diff(&spec.awake_weights()?, w), max_abs_diff(&asleep, v)))
    };
    let (mut awake, mut asleep) = gaps(&share, &spec)?;
    for row in losses {
        share = share.step(row, 1.0)?.next;
        spec = crate::learners::specialists_step(&spec, row, 1.0)?;
        let (a, s) = gaps(&share, &spec)?;
        awake = awake.max(a);
        asleep = asleep.max(s);
    }
    Ok((awake, asleep))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceCase {
    pub alpha: f64,
    pub theta: f64,
    pub seed: u64,
    pub share_vs_mpp: f64,
    pub specialists_awake: f64,
    pub specialists_asleep: f64,
}

impl EquivalenceCase {
    pub fn max_deviation(&self) -> f64 {
        self.share_vs_mpp
            .max(self.specialists_awake)
            .max(self.specialists_asleep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub horizon: usize,
    pub rng: RngInfo,
    pub tolerance: f64,
    pub max_share_vs_mpp: f64,
    pub max_specialists: f64,
    pub passed: bool,
    pub cases: Vec<EquivalenceCase>,
}

/// Runs both suites on `cases` random `(alpha, theta, seed)` triples, or on
/// the given `(alpha, theta)` with `cases` different loss seeds.
pub fn run_equivalence(
    n: usize,
    horizon: usize,
    cases: usize,
    seed: u64,
    fixed: Option<(f64, f64)>,
) -> Result<EquivalenceReport> {
    if n < 2 {
        return Err(Error::TooFewExperts { min: 2, got: n });
    }
    if let Some((alpha, theta)) = fixed {
        check_open_unit("alpha", alpha)?;
        check_open_unit("theta", theta)?;
    }
    let mut r = rng(seed);
    let triples: Vec<(f64, f64, u64)> = (0..cases)
        .map(|i| {
            let (a, t) = fixed.unwrap_or_else(|| (r.random_range(0.05..0.95), r.random_range(0.05..0.95)));
            (a, t, derive_seed(seed, i as u64 + 1))
        })
        .collect();
    let results = crate::batch::map_slice(&triples, |&(alpha, theta, s)| -> Result<EquivalenceCase> {
        let losses = random_losses(n, horizon, s);
        let share_vs_mpp = share_vs_geometric_mpp(&losses, alpha, theta)?;
        let (awake, asleep) = specialists_vs_share(&losses, alpha, theta)?;
        Ok(EquivalenceCase {
            alpha,
            theta,
            seed: s,
            share_vs_mpp,
            specialists_awake: awake,
            specialists_asleep: asleep,
        })
    });
    let cases = results.into_iter().collect::<Result<Vec<_>>>()?;
    let max_share_vs_mpp = cases.iter().map(|c| c.share_vs_mpp).fold(0.0, f64::max);
    let max_specialists = cases
        .iter()
        .map(|c| c.specialists_awake.max(c.specialists_asleep))
        .fold(0.0, f64::max);
    Ok(EquivalenceReport {
        n,
        horizon,
        rng: RngInfo::new(seed),
        tolerance: EQUIVALENCE_TOL,
        passed: max_share_vs_mpp < EQUIVALENCE_TOL && max_specialists < EQUIVALENCE_TOL,
        max_share_vs_mpp,
        max_specialists,
        cases,
    })
}
