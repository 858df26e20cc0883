//! Synthetic experiments: comparator and loss generation, the trial loop
//! with regret and update-cost bookkeeping, and the equivalence suites.

mod comparator;
mod equivalence;
mod experiment;
pub mod io;
mod losses;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use comparator::{check_feasible, generate_comparator, ComparatorSequence};
pub use equivalence::{
    random_losses, run_equivalence, share_vs_geometric_mpp, specialists_vs_share, EquivalenceCase,
    EquivalenceReport, EQUIVALENCE_TOL,
};
pub use experiment::{
    bound_for, BOUND_SLACK, matched_state_cost_compare, matched_state_run, run_cells, run_experiment,
    ExperimentParams, ExperimentResult, MatchedCosts, RngInfo, SyntheticSetup, TrialRecord,
};
pub use losses::{generate_losses, log_loss, square_substitution, LossModel, Trials, CLIP};

/// Identifies the generator behind every seeded draw.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from a run seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
