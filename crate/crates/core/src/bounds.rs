//! Closed-form regret bounds for tracking a small pool of experts, and the
//! table comparing them across pool sizes.
//!
//! Every bound is linear in the realizability constant `c`. The entropy
//! forms are the canonical values; the `*_simplified` functions give the
//! looser closed forms obtained from `x H(y/x) <= y ln(x/y) + y`.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::simplex::entropy_unchecked;

/// Problem size for a bound: `n` experts, horizon `horizon` (T), `k`
/// switches, a pool of `m` distinct comparator experts, constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub n: usize,
    pub horizon: usize,
    pub k: usize,
    pub m: usize,
    pub c: f64,
}

impl BoundInputs {
    pub fn new(n: usize, horizon: usize, k: usize, m: usize, c: f64) -> Result<Self> {
        let inp = BoundInputs {
            n,
            horizon,
            k,
            m,
            c,
        };
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, v: usize, reason| Err(Error::param(name, v as f64, reason));
        if self.n < 2 {
            return bad("n", self.n, "need at least 2 experts");
        }
        if self.horizon < 2 {
            return bad("T", self.horizon, "horizon must be at least 2");
        }
        if self.k > self.horizon - 1 {
            return bad("k", self.k, "at most T - 1 switches");
        }
        if self.m < 1 || self.m > self.n {
            return bad("m", self.m, "pool size must lie in [1, n]");
        }
        if self.m > self.k + 1 {
            return bad("m", self.m, "pool cannot exceed the number of segments k + 1");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("c", self.c, "must be positive and finite"));
        }
        Ok(())
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    fn t1(&self) -> f64 {
        (self.horizon - 1) as f64
    }
}

/// `x H(y / x)`, taken as 0 when `x = 0` (which forces `y = 0`).
fn scaled_entropy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * entropy_unchecked((y / x).clamp(0.0, 1.0))
    }
}

/// `y ln(x / y)`, taken as 0 when `y = 0`.
fn y_log_ratio(y: f64, x: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y * (x / y).ln()
    }
}

/// `y ln x`, taken as 0 when `y = 0` even if `x = 0`.
fn y_log(y: f64, x: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y * x.ln()
    }
}

/// Fixed-Share: `c[(k+1) ln n + (T-1) H(k/(T-1))]`.
pub fn fixed_share_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let k = inp.k as f64;
    Ok(inp.c * ((k + 1.0) * inp.ln_n() + scaled_entropy(inp.t1(), k)))
}

pub fn fixed_share_bound_simplified(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let k = inp.k as f64;
    Ok(inp.c * ((k + 1.0) * inp.ln_n() + y_log_ratio(k, inp.t1()) + k))
}

/// `ln C(a, b)` via log-gamma.
pub fn ln_binomial(a: u64, b: u64) -> f64 {
    assert!(b <= a, "ln_binomial needs b <= a");
    let (a, b) = (a as f64, b as f64);
    ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - ln_gamma(a - b + 1.0)
}

/// Information-theoretic ideal `c ln(C(n,m) C(T-1,k) m (m-1)^k)`.
pub fn ideal_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    if inp.m == 1 && inp.k > 0 {
        return Err(Error::param("m", 1.0, "a single expert cannot switch"));
    }
    let (m, k) = (inp.m as f64, inp.k as f64);
    let count = ln_binomial(inp.n as u64, inp.m as u64)
        + ln_binomial((inp.horizon - 1) as u64, inp.k as u64)
        + m.ln()
        + y_log(k, m - 1.0);
    Ok(inp.c * count)
}

/// `c(m ln n + k ln((T-1)/k) + (k-m+1) ln m + k + m)`.
pub fn ideal_bound_simplified(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    Ok(inp.c * (m * inp.ln_n() + y_log_ratio(k, inp.t1()) + (k - m + 1.0) * m.ln() + k + m))
}

fn check_memory_pool(inp: &BoundInputs) -> Result<()> {
    if inp.m < 2 && inp.k > 0 {
        return Err(Error::param("m", inp.m as f64, "need m >= 2 when k > 0"));
    }
    Ok(())
}

/// MPP with the power-law decaying scheme (exponent 1) and `alpha = k/(T-1)`:
/// `c[m ln n + 2k ln((T-1)/k) + k ln(m-1) + (T-k-1) ln((T-1)/(T-k-1)) + k ln ln(eT)]`.
pub fn mpp_decay_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    check_memory_pool(inp)?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    let stay = inp.t1() - k;
    let value = m * inp.ln_n()
        + 2.0 * y_log_ratio(k, inp.t1())
        + y_log(k, m - 1.0)
        + y_log_ratio(stay, inp.t1())
        + k * (1.0 + (inp.horizon as f64).ln()).ln();
    Ok(inp.c * value)
}

/// [`mpp_decay_bound`] with `(T-k-1) ln((T-1)/(T-k-1))` relaxed to `k`.
pub fn mpp_decay_bound_simplified(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    check_memory_pool(inp)?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    let value = m * inp.ln_n()
        + 2.0 * y_log_ratio(k, inp.t1())
        + y_log(k, m - 1.0)
        + k
        + k * (1.0 + (inp.horizon as f64).ln()).ln();
    Ok(inp.c * value)
}

/// MPP with the uniform scheme and `alpha = k/(T-1)`:
/// `c[m ln n + (T-1) H(k/(T-1)) + k ln(T-1)]`.
pub fn mpp_uniform_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    Ok(inp.c * (m * inp.ln_n() + scaled_entropy(inp.t1(), k) + y_log(k, inp.t1())))
}

/// Partition specialists with a Markov prior:
/// `c[m ln(n/m) + m H(1/m) + (T-1) H(k/(T-1)) + (m-1)(T-1) H(k/((m-1)(T-1)))]`.
pub fn specialists_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    let value = m * (inp.n as f64 / m).ln()
        + scaled_entropy(m, 1.0)
        + scaled_entropy(inp.t1(), k)
        + scaled_entropy((m - 1.0) * inp.t1(), k);
    Ok(inp.c * value)
}

/// `c(m ln n + 2k ln((T-1)/k) + (k-m+1) ln m + 2(k+1))`.
pub fn specialists_bound_simplified(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    Ok(inp.c
        * (m * inp.ln_n() + 2.0 * y_log_ratio(k, inp.t1()) + (k - m + 1.0) * m.ln() + 2.0 * (k + 1.0)))
}

/// PoDS-theta / Share-theta with the optimal tuning:
/// `c[m ln n + (T-1) H(k/(T-1)) + (m-1)(T-2) H((k-m+1)/((m-1)(T-2)))]`.
pub fn pods_bound(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    let t2 = (inp.horizon - 2) as f64;
    let value = m * inp.ln_n()
        + scaled_entropy(inp.t1(), k)
        + scaled_entropy((m - 1.0) * t2, k - m + 1.0);
    Ok(inp.c * value)
}

/// `c[m ln n + k ln((T-1)/k) + (k-m+1) ln((T-2)/(k-m+1)) + (k-m+1) ln(m-1) + 2k - m + 1]`.
pub fn pods_bound_simplified(inp: &BoundInputs) -> Result<f64> {
    inp.validate()?;
    let (m, k) = (inp.m as f64, inp.k as f64);
    let remembered = k - m + 1.0;
    let t2 = (inp.horizon - 2) as f64;
    let value = m * inp.ln_n()
        + y_log_ratio(k, inp.t1())
        + y_log_ratio(remembered, t2)
        + y_log(remembered, m - 1.0)
        + 2.0 * k
        - m
        + 1.0;
    Ok(inp.c * value)
}

/// The `(alpha, theta)` at which [`pods_bound`] holds:
/// `alpha = k/(T-1)`, `theta = (k-m+1)/((m-1)(T-2))`, with `theta = 0`
/// whenever the denominator vanishes.
pub fn optimal_tuning(inp: &BoundInputs) -> Result<(f64, f64)> {
    inp.validate()?;
    let alpha = inp.k as f64 / inp.t1();
    let denom = (inp.m.saturating_sub(1) * (inp.horizon - 2)) as f64;
    let theta = if denom == 0.0 {
        0.0
    } else {
        (inp.k + 1 - inp.m) as f64 / denom
    };
    Ok((alpha, theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    pub m: usize,
    pub fixed_share: f64,
    pub mpp_decay: f64,
    pub mpp_uniform: f64,
    pub specialists: f64,
    pub pods: f64,
}

/// All bounds for each pool size in `m_range` at fixed `(n, k, T, c)`.
pub fn figure1_table(
    n: usize,
    k: usize,
    horizon: usize,
    c: f64,
    m_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<Figure1Row>> {
    if m_range.is_empty() {
        return Err(Error::param("m", *m_range.start() as f64, "empty pool-size range"));
    }
    m_range
        .map(|m| {
            let inp = BoundInputs::new(n, horizon, k, m, c)?;
            Ok(Figure1Row {
                m,
                fixed_share: fixed_share_bound(&inp)?,
                mpp_decay: mpp_decay_bound(&inp)?,
                mpp_uniform: mpp_uniform_bound(&inp)?,
                specialists: specialists_bound(&inp)?,
                pods: pods_bound(&inp)?,
            })
        })
        .collect()
}
