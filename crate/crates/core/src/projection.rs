//! Relative-entropy projection onto the simplex with non-uniform lower box
//! constraints, `C(beta) = { x in simplex : x_i >= beta_i }`.
//!
//! The projection of an interior point `w` has the form
//! `p_i = max(beta_i, lambda * w_i)`: every index either sits on its bound
//! (the bound set) or is rescaled by one shared factor `lambda <= 1`. The
//! bound set is exactly the indices whose ratio `w_i / beta_i` falls below a
//! threshold, so finding the projection reduces to finding that threshold.
//! [`project`] does this by repeated median bisection of the ratios in
//! worst-case `O(n)`; [`project_oracle`] sorts the ratios and scans prefixes,
//! and exists to check the fast path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::select::lower_median;
use crate::simplex::{InteriorSimplexVector, LowerBounds, SimplexVector};

/// Tolerance used by [`verify_kkt_form`].
pub const KKT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    /// The projected point.
    pub p: SimplexVector,
    /// Indices (0-based, ascending) held at their lower bound.
    pub bound_set: Vec<usize>,
    /// Shared rescaling factor of the free components.
    pub lambda: f64,
    /// Ratio threshold: `i` is bound iff `w_i / beta_i < threshold`.
    /// Infinite when the constraint set is the single point `beta`.
    pub threshold: f64,
}

/// Work counters from one run of [`project_with_stats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProjectionStats {
    /// Scalar comparisons between ratios (selection, partitioning, scans).
    pub comparisons: u64,
    /// Bisection rounds of the threshold search.
    pub rounds: u32,
}

/// Projects `w` onto `C(beta)` in worst-case linear time.
pub fn project(w: &InteriorSimplexVector, beta: &LowerBounds) -> Result<ProjectionResult> {
    project_with_stats(w, beta).map(|(r, _)| r)
}

/// [`project`] together with the work it performed.
pub fn project_with_stats(
    w: &InteriorSimplexVector,
    beta: &LowerBounds,
) -> Result<(ProjectionResult, ProjectionStats)> {
    check_dims(w, beta)?;
    let mut stats = ProjectionStats::default();
    let result = threshold_search(w, beta, &mut stats);
    Ok((result, stats))
}

fn check_dims(w: &[f64], beta: &LowerBounds) -> Result<()> {
    if w.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: beta.len(),
        });
    }
    if beta.total_mass() > 1.0 + 1e-12 {
        return Err(Error::Infeasible {
            sum: beta.total_mass(),
        });
    }
    Ok(())
}

fn is_single_point(beta: &LowerBounds) -> bool {
    (beta.total_mass() - 1.0).abs() <= 1e-12
}

/// `C(beta) = {beta}`: the only feasible point is `beta` itself.
fn single_point(w: &[f64], beta: &LowerBounds) -> ProjectionResult {
    let lambda = w
        .iter()
        .zip(beta.iter())
        .map(|(wi, bi)| bi / wi)
        .fold(f64::INFINITY, f64::min);
    ProjectionResult {
        p: SimplexVector::from_trusted(beta.to_vec()),
        bound_set: (0..w.len()).collect(),
        lambda,
        threshold: f64::INFINITY,
    }
}

fn threshold_search(w: &[f64], beta: &LowerBounds, stats: &mut ProjectionStats) -> ProjectionResult {
    if is_single_point(beta) {
        return single_point(w, beta);
    }
    let n = w.len();
    let b = beta.as_slice();
    let ratio: Vec<f64> = w.iter().zip(b).map(|(wi, bi)| wi / bi).collect();
    let w_total: f64 = w.iter().sum();

    // Mass already committed to the bound set.
    let mut s_w = 0.0;
    let mut s_b = 0.0;
    let mut threshold = 0.0;

    let mut work: Vec<usize> = (0..n).collect();
    let mut scratch: Vec<f64> = Vec::with_capacity(n);
    let mut low: Vec<usize> = Vec::with_capacity(n / 2 + 1);
    let mut high: Vec<usize> = Vec::with_capacity(n / 2 + 1);

    while !work.is_empty() {
        stats.rounds += 1;
        scratch.clear();
        scratch.extend(work.iter().map(|&i| ratio[i]));
        threshold = lower_median(&mut scratch, &mut stats.comparisons);

        low.clear();
        high.clear();
        let (mut l_w, mut l_b, mut m_w, mut m_b) = (0.0, 0.0, 0.0, 0.0);
        for &i in &work {
            stats.comparisons += 1;
            if ratio[i] < threshold {
                low.push(i);
                l_w += w[i];
                l_b += b[i];
                continue;
            }
            stats.comparisons += 1;
            if ratio[i] > threshold {
                high.push(i);
            } else {
                m_w += w[i];
                m_b += b[i];
            }
        }

        let lambda = (1.0 - s_b - l_b) / (w_total - s_w - l_w);
        stats.comparisons += 1;
        if threshold * lambda < 1.0 {
            // Everything at or below the candidate must be bound too.
            s_w += l_w + m_w;
            s_b += l_b + m_b;
            if high.is_empty() {
                match next_ratio_above(&ratio, threshold, &mut stats.comparisons) {
                    Some(next) => threshold = next,
                    None => {
                        // No larger ratio exists; keep the ties free so the
                        // bound set stays {r < threshold}.
                        s_w -= m_w;
                        s_b -= m_b;
                    }
                }
            }
            std::mem::swap(&mut work, &mut high);
        } else {
            std::mem::swap(&mut work, &mut low);
        }
    }

    let lambda = (1.0 - s_b) / (w_total - s_w);
    let mut bound_set = Vec::new();
    let p: Vec<f64> = (0..n)
        .map(|i| {
            stats.comparisons += 1;
            if ratio[i] < threshold {
                bound_set.push(i);
                b[i]
            } else {
                lambda * w[i]
            }
        })
        .collect();

    ProjectionResult {
        p: SimplexVector::from_trusted(p),
        bound_set,
        lambda,
        threshold,
    }
}

fn next_ratio_above(ratio: &[f64], threshold: f64, comparisons: &mut u64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &r in ratio {
        *comparisons += 1;
        if r > threshold {
            *comparisons += 1;
            if best.is_none_or(|b| r < b) {
                best = Some(r);
            }
        }
    }
    best
}

/// Sort-based reference projection: order the ratios, then grow the bound
/// set one prefix at a time until renormalizing the rest keeps every free
/// component above its bound. `O(n log n)`.
pub fn project_oracle(w: &InteriorSimplexVector, beta: &LowerBounds) -> Result<ProjectionResult> {
    check_dims(w, beta)?;
    if is_single_point(beta) {
        return Ok(single_point(w, beta));
    }
    let n = w.len();
    let b = beta.as_slice();
    let ratio: Vec<f64> = w.iter().zip(b).map(|(wi, bi)| wi / bi).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ratio[i].total_cmp(&ratio[j]));

    let w_total: f64 = w.iter().sum();
    let mut fixed_w = 0.0;
    let mut fixed_b = 0.0;
    let mut prefix = 0;
    let mut lambda = 1.0;
    // An empty prefix is valid iff w already satisfies every bound.
    while prefix < n {
        lambda = (1.0 - fixed_b) / (w_total - fixed_w);
        if lambda * ratio[order[prefix]] >= 1.0 {
            break;
        }
        fixed_w += w[order[prefix]];
        fixed_b += b[order[prefix]];
        prefix += 1;
    }
    if prefix == n {
        // Only reachable through rounding when sum(beta) is within an ulp of 1.
        return Ok(single_point(w, beta));
    }
    let threshold = ratio[order[prefix]];

    let mut p: Vec<f64> = w.iter().map(|wi| lambda * wi).collect();
    let mut bound_set: Vec<usize> = order[..prefix].to_vec();
    for &i in &bound_set {
        p[i] = b[i];
    }
    bound_set.sort_unstable();
    Ok(ProjectionResult {
        p: SimplexVector::from_trusted(p),
        bound_set,
        lambda,
        threshold,
    })
}

/// Checks the optimality conditions of a claimed projection of `w` onto
/// `C(beta)`: `p` is feasible, sums to one, and `p_i = max(beta_i, lambda w_i)`
/// for a single `lambda <= 1`. Malformed input yields `false`.
pub fn verify_kkt_form(w: &[f64], beta: &[f64], p: &[f64]) -> bool {
    let n = w.len();
    if n < 2 || beta.len() != n || p.len() != n {
        return false;
    }
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !finite(w) || !finite(beta) || !finite(p) {
        return false;
    }
    if w.iter().any(|&x| x <= 0.0) || beta.iter().any(|&x| x < 0.0) {
        return false;
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > KKT_TOL {
        return false;
    }
    if p.iter().zip(beta).any(|(pi, bi)| *pi < bi - KKT_TOL) {
        return false;
    }

    // Components strictly above their bound determine lambda.
    let free: Vec<usize> = (0..n).filter(|&i| p[i] > beta[i] + KKT_TOL).collect();
    let lambda = match free.first() {
        Some(&i) => p[i] / w[i],
        // p == beta, which is only feasible when beta has unit mass.
        None => return (beta.iter().sum::<f64>() - 1.0).abs() <= KKT_TOL,
    };
    if lambda > 1.0 + KKT_TOL {
        return false;
    }
    let consistent = free
        .iter()
        .all(|&i| (p[i] - lambda * w[i]).abs() <= KKT_TOL * p[i].max(1.0));
    let bound_ok = (0..n)
        .filter(|i| !free.contains(i))
        .all(|i| lambda * w[i] <= beta[i] + KKT_TOL);
    consistent && bound_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn w(v: &[f64]) -> InteriorSimplexVector {
        InteriorSimplexVector::new(v.to_vec()).unwrap()
    }

    fn lb(v: &[f64]) -> LowerBounds {
        LowerBounds::new(v.to_vec()).unwrap()
    }

    fn both(wv: &[f64], bv: &[f64]) -> [ProjectionResult; 2] {
        let (w, b) = (w(wv), lb(bv));
        [project(&w, &b).unwrap(), project_oracle(&w, &b).unwrap()]
    }

    #[test]
    fn feasible_point_is_fixed() {
        for r in both(&[0.5, 0.5], &[0.1, 0.2]) {
            assert_eq!(r.p.as_slice(), &[0.5, 0.5]);
            assert!(r.bound_set.is_empty());
            assert_eq!(r.lambda, 1.0);
        }
    }

    #[test]
    fn single_binding_constraint() {
        for r in both(&[0.5, 0.5], &[0.6, 0.1]) {
            assert_abs_diff_eq!(r.p[0], 0.6, epsilon = 1e-15);
            assert_abs_diff_eq!(r.p[1], 0.4, epsilon = 1e-15);
            assert_eq!(r.bound_set, vec![0]);
            assert_abs_diff_eq!(r.lambda, 0.8, epsilon = 1e-15);
        }
    }

    #[test]
    fn cascade_binds_second_index() {
        // Fixing index 0 alone rescales index 1 to 0.2 * 0.9 / 0.95 < 0.25.
        for r in both(&[0.05, 0.2, 0.75], &[0.1, 0.25, 0.05]) {
            assert_abs_diff_eq!(r.p[0], 0.1, epsilon = 1e-15);
            assert_abs_diff_eq!(r.p[1], 0.25, epsilon = 1e-15);
            assert_abs_diff_eq!(r.p[2], 0.65, epsilon = 1e-14);
            assert_eq!(r.bound_set, vec![0, 1]);
            assert_abs_diff_eq!(r.lambda, 0.65 / 0.75, epsilon = 1e-14);
            assert!(verify_kkt_form(&[0.05, 0.2, 0.75], &[0.1, 0.25, 0.05], &r.p));
        }
    }

    #[test]
    fn bound_components_are_exact() {
        let r = project(&w(&[0.05, 0.2, 0.75]), &lb(&[0.1, 0.25, 0.05])).unwrap();
        assert_eq!(r.p[0], 0.1);
        assert_eq!(r.p[1], 0.25);
    }

    #[test]
    fn unit_mass_constraints_return_beta() {
        let beta = vec![0.3, 0.3, 0.4];
        for r in both(&[0.2, 0.2, 0.6], &beta) {
            assert_eq!(r.p.as_slice(), beta.as_slice());
            assert_eq!(r.bound_set, vec![0, 1, 2]);
            assert!(r.threshold.is_infinite());
        }
    }

    #[test]
    fn ties_in_ratios() {
        // All ratios equal and below one; every component ends on its bound
        // or on the shared rescaling, which coincide.
        let wv = [0.25, 0.25, 0.25, 0.25];
        let bv = [0.3, 0.3, 0.3, 0.05];
        let [fast, slow] = both(&wv, &bv);
        for (a, b) in fast.p.iter().zip(slow.p.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert!(verify_kkt_form(&wv, &bv, &fast.p));

        let wv = [0.2, 0.2, 0.2, 0.2, 0.2];
        let bv = [0.1, 0.1, 0.1, 0.1, 0.1];
        let [fast, _] = both(&wv, &bv);
        assert_eq!(fast.p.as_slice(), &wv);
    }

    #[test]
    fn rejects_bad_inputs() {
        let three = w(&[0.2, 0.3, 0.5]);
        assert!(matches!(
            project(&three, &lb(&[0.1, 0.1])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            project_oracle(&three, &lb(&[0.1, 0.1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn near_unit_mass_stays_feasible() {
        // sum(beta) is a hair below one: every ratio but the largest binds
        // and the last component absorbs the leftover mass.
        let eps = 1e-13;
        let wv = [0.6, 0.3, 0.1];
        let bv = [0.1, 0.3, 0.6 - eps];
        for r in both(&wv, &bv) {
            assert!(r.p.iter().zip(&bv).all(|(p, b)| *p >= b - 1e-12));
            assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(verify_kkt_form(&wv, &bv, &r.p));
        }
    }

    #[test]
    fn kkt_examples() {
        assert!(verify_kkt_form(&[0.5, 0.5], &[0.6, 0.1], &[0.6, 0.4]));
        assert!(!verify_kkt_form(&[0.5, 0.5], &[0.6, 0.1], &[0.7, 0.3]));
        assert!(!verify_kkt_form(&[0.5, 0.5], &[0.6, 0.1], &[0.6]));
        assert!(!verify_kkt_form(&[0.5, 0.5], &[0.6, 0.1], &[0.5, 0.5]));
        assert!(!verify_kkt_form(&[0.5, 0.5], &[0.6, 0.1], &[0.6, f64::NAN]));
        // Feasible but not the projection: moves mass without a shared lambda.
        assert!(!verify_kkt_form(&[0.5, 0.3, 0.2], &[0.1, 0.1, 0.1], &[0.4, 0.4, 0.2]));
    }

    #[test]
    fn stats_are_recorded() {
        let (_, stats) = project_with_stats(&w(&[0.05, 0.2, 0.75]), &lb(&[0.1, 0.25, 0.05])).unwrap();
        assert!(stats.rounds >= 1);
        assert!(stats.comparisons > 0);
    }
}
