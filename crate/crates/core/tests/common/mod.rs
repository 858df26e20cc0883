#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use switchtrack::{InteriorSimplexVector, LowerBounds};

/// Dirichlet draw with a random shape, rejecting underflowed components.
pub fn dirichlet(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let shape = [0.3, 1.0, 4.0][r.random_range(0..3)];
    let g = Gamma::new(shape, 1.0).unwrap();
    loop {
        let x: Vec<f64> = (0..n).map(|_| g.sample(r)).collect();
        let s: f64 = x.iter().sum();
        let v: Vec<f64> = x.iter().map(|xi| xi / s).collect();
        if v.iter().all(|&vi| vi > 1e-300) {
            return v;
        }
    }
}

/// `w` interior, `beta = alpha * (simplex point)` with `alpha ~ U(0.01, 0.99)`.
pub fn instance(r: &mut ChaCha8Rng, n: usize) -> (InteriorSimplexVector, LowerBounds) {
    let w = InteriorSimplexVector::new(dirichlet(r, n)).unwrap();
    let alpha = r.random_range(0.01..0.99);
    let beta = LowerBounds::new(dirichlet(r, n).iter().map(|b| alpha * b).collect()).unwrap();
    (w, beta)
}

pub fn kl(p: &[f64], w: &[f64]) -> f64 {
    p.iter()
        .zip(w)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, wi)| pi * (pi / wi).ln())
        .sum()
}

/// Brute-force projection: try every set of components to clamp at
/// `beta`, rescale the rest to unit mass, keep the feasible candidate with
/// the smallest relative entropy.
pub fn exhaustive(w: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let clamped = |i: usize| mask & (1 << i) != 0;
        let sb: f64 = (0..n).filter(|&i| clamped(i)).map(|i| beta[i]).sum();
        let sw: f64 = (0..n).filter(|&i| !clamped(i)).map(|i| w[i]).sum();
        if sw == 0.0 || sb >= 1.0 {
            continue;
        }
        let lambda = (1.0 - sb) / sw;
        let p: Vec<f64> = (0..n)
            .map(|i| if clamped(i) { beta[i] } else { lambda * w[i] })
            .collect();
        if (0..n).any(|i| p[i] < beta[i] - 1e-15) {
            continue;
        }
        let d = kl(&p, w);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, p));
        }
    }
    best.expect("a feasible candidate exists").1
}

pub fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
