use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::rng;

/// The hindsight sequence of experts `i_1..i_T` regret is measured against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparatorSequence {
    ids: Vec<usize>,
    k: usize,
    m: usize,
}

impl ComparatorSequence {
    /// Wraps an explicit sequence, counting its switches and pool size.
    pub fn from_ids(ids: Vec<usize>, n: usize) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::param("T", 0.0, "comparator sequence is empty"));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
            return Err(Error::OutOfRange { k: bad, len: n });
        }
        let k = ids.windows(2).filter(|w| w[0] != w[1]).count();
        let mut pool = ids.clone();
        pool.sort_unstable();
        pool.dedup();
        Ok(ComparatorSequence {
            k,
            m: pool.len(),
            ids,
        })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn switches(&self) -> usize {
        self.k
    }

    pub fn pool_size(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.ids.len()
    }
}

/// Checks that `k` switches among a pool of `m` of `n` experts fit in `T` trials.
pub fn check_feasible(n: usize, horizon: usize, k: usize, m: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewExperts { min: 2, got: n });
    }
    if horizon == 0 {
        return Err(Error::param("T", 0.0, "horizon must be positive"));
    }
    if k > horizon - 1 {
        return Err(Error::param("k", k as f64, "at most T - 1 switches"));
    }
    if m == 0 || m > n.min(k + 1) {
        return Err(Error::param("m", m as f64, "pool size must lie in [1, min(n, k + 1)]"));
    }
    if m == 1 && k > 0 {
        return Err(Error::param("m", 1.0, "a single expert cannot switch"));
    }
    Ok(())
}

/// Random comparator with exactly `k` switches and exactly `m` distinct
/// experts. Switch positions are drawn without replacement; each new
/// segment either introduces the next pool member or revisits a uniformly
/// chosen earlier one other than the current expert.
pub fn generate_comparator(
    n: usize,
    horizon: usize,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<ComparatorSequence> {
    check_feasible(n, horizon, k, m)?;
    let mut rng = rng(seed);
    let pool: Vec<usize> = sample(&mut rng, n, m).into_vec();

    // Segment boundaries: trial index (0-based) at which each later segment starts.
    let mut starts: Vec<usize> = sample(&mut rng, horizon - 1, k)
        .into_iter()
        .map(|p| p + 1)
        .collect();
    starts.sort_unstable();

    // Which of segments 1..=k introduce a new expert. With a single expert
    // seen there is nothing to revisit, so segment 1 always introduces.
    let mut introduces = vec![false; k + 1];
    if m >= 2 {
        introduces[1] = true;
        for s in sample(&mut rng, k - 1, m - 2) {
            introduces[s + 2] = true;
        }
    }

    let mut segment_ids = Vec::with_capacity(k + 1);
    segment_ids.push(pool[0]);
    let mut seen = 1;
    for &intro in &introduces[1..] {
        let current = *segment_ids.last().expect("non-empty");
        let next = if intro {
            seen += 1;
            pool[seen - 1]
        } else {
            // Uniform over seen experts other than the current one.
            let others: Vec<usize> = pool[..seen].iter().copied().filter(|&e| e != current).collect();
            others[rng.random_range(0..others.len())]
        };
        segment_ids.push(next);
    }
    debug_assert_eq!(seen, m);

    let mut ids = Vec::with_capacity(horizon);
    let mut bounds = starts.clone();
    bounds.push(horizon);
    let mut begin = 0;
    for (expert, end) in segment_ids.into_iter().zip(bounds) {
        ids.extend(std::iter::repeat_n(expert, end - begin));
        begin = end;
    }
    ComparatorSequence::from_ids(ids, n)
}
