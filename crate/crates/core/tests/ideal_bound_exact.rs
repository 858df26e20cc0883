use approx::assert_relative_eq;
use num_bigint::BigUint;
use switchtrack::bounds::{ideal_bound, ln_binomial, BoundInputs};

fn binomial(a: u64, b: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Natural log of an arbitrarily large integer from its top 64 bits.
fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top: BigUint = x >> shift;
    let top = top.to_u64_digits().first().copied().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Number of comparator sequences with `k` switches over a pool of `m` of `n` experts.
fn count(n: u64, k: u64, m: u64, horizon: u64) -> BigUint {
    binomial(n, m) * binomial(horizon - 1, k) * BigUint::from(m) * BigUint::from(m - 1).pow(k as u32)
}

#[test]
fn log_gamma_binomial_matches_exact() {
    for (a, b) in [(10, 3), (60, 30), (4000, 40), (500_000, 41), (3999, 1)] {
        assert_relative_eq!(ln_binomial(a, b), ln_big(&binomial(a, b)), max_relative = 1e-12);
    }
}

#[test]
fn ideal_bound_matches_exact_count() {
    let cases = [(30, 5, 3, 30), (20, 10, 4, 25), (7, 3, 2, 12), (500_000, 40, 2, 4000), (500_000, 40, 41, 4000)];
    for (n, k, m, horizon) in cases {
        let inp = BoundInputs::new(n as usize, horizon as usize, k as usize, m as usize, 1.0).unwrap();
        let exact = ln_big(&count(n, k, m, horizon));
        assert_relative_eq!(ideal_bound(&inp).unwrap(), exact, max_relative = 1e-10);
    }
}

#[test]
fn frozen_small_values() {
    for ((n, k, m, horizon), expected) in [
        ((30, 5, 3, 30), 24.558104270337257),
        ((20, 10, 4, 25), 35.34721541442398),
        ((7, 3, 2, 12), 8.84361509218395),
    ] {
        let inp = BoundInputs::new(n, horizon, k, m, 1.0).unwrap();
        assert_relative_eq!(ideal_bound(&inp).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(ln_big(&count(n as u64, k as u64, m as u64, horizon as u64)), expected, max_relative = 1e-12);
    }
}
