//! Probability-simplex types and the information-theoretic primitives the
//! learners and bounds are built from. All logarithms are natural.

use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on `|sum - 1|` for a vector to count as on the simplex.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Inputs whose sum is within this distance of 1 are renormalized on
/// construction; anything further out is rejected.
pub const RENORMALIZE_TOL: f64 = 1e-6;

/// A probability vector over `n >= 2` experts.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Validates `values` and renormalizes away small drift in the sum.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let sum = check_components(&values)?;
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::NotOnSimplex { sum });
        }
        let mut values = values;
        if sum != 1.0 {
            values.iter_mut().for_each(|x| *x /= sum);
        }
        Ok(SimplexVector(values))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewExperts { min: 2, got: n });
        }
        Ok(SimplexVector(vec![1.0 / n as f64; n]))
    }

    /// The `i`-th standard basis vector.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewExperts { min: 2, got: n });
        }
        if i >= n {
            return Err(Error::OutOfRange { k: i, len: n });
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Ok(SimplexVector(v))
    }

    /// Wraps values produced by an update rule that already preserves the
    /// simplex. Skips renormalization so that exact components survive.
    pub(crate) fn from_trusted(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2);
        debug_assert!(values.iter().all(|x| x.is_finite() && *x >= 0.0));
        debug_assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        SimplexVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    /// `self` lies in `C(beta)`, i.e. dominates `beta` componentwise.
    pub fn dominates(&self, beta: &[f64]) -> bool {
        self.0.len() == beta.len() && self.0.iter().zip(beta).all(|(w, b)| w >= b)
    }
}

impl Deref for SimplexVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SimplexVector::new(values)
    }
}

/// A simplex vector with every component strictly positive; the source
/// point of a relative-entropy projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct InteriorSimplexVector(SimplexVector);

impl InteriorSimplexVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        SimplexVector::new(values)?.try_into()
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Ok(InteriorSimplexVector(SimplexVector::uniform(n)?))
    }

    pub fn as_simplex(&self) -> &SimplexVector {
        &self.0
    }

    pub fn into_simplex(self) -> SimplexVector {
        self.0
    }
}

impl Deref for InteriorSimplexVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<SimplexVector> for InteriorSimplexVector {
    type Error = Error;

    fn try_from(v: SimplexVector) -> Result<Self> {
        match v.iter().position(|&x| x <= 0.0) {
            Some(index) => Err(Error::NotInterior { index }),
            None => Ok(InteriorSimplexVector(v)),
        }
    }
}

/// Lower box constraints `beta` defining `C(beta) = { x in simplex : x >= beta }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBounds {
    beta: Vec<f64>,
    total_mass: f64,
}

impl LowerBounds {
    /// Requires `0 < beta_i < 1` and `sum(beta) <= 1`.
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.len() < 2 {
            return Err(Error::TooFewExperts {
                min: 2,
                got: beta.len(),
            });
        }
        for (i, &b) in beta.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if b <= 0.0 || b >= 1.0 {
                return Err(Error::param("beta", b, "each bound must lie in (0, 1)"));
            }
        }
        Self::with_mass(beta)
    }

    /// Like [`LowerBounds::new`] but admits zero components. Learner
    /// states reach this at parameter edge values (`theta = 1` with an
    /// underflowed posterior).
    pub(crate) fn new_relaxed(beta: Vec<f64>) -> Result<Self> {
        if beta.len() < 2 {
            return Err(Error::TooFewExperts {
                min: 2,
                got: beta.len(),
            });
        }
        for (i, &b) in beta.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            if b < 0.0 {
                return Err(Error::Negative { index: i, value: b });
            }
        }
        Self::with_mass(beta)
    }

    fn with_mass(beta: Vec<f64>) -> Result<Self> {
        let total_mass: f64 = beta.iter().sum();
        if total_mass > 1.0 + 1e-12 {
            return Err(Error::Infeasible { sum: total_mass });
        }
        Ok(LowerBounds { beta, total_mass })
    }

    /// `alpha / n` in every component: the constraint set of the
    /// projection analogue of Fixed-Share.
    pub fn uniform(n: usize, alpha: f64) -> Result<Self> {
        LowerBounds::new(vec![alpha / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

impl Deref for LowerBounds {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.beta
    }
}

fn check_components(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewExperts {
            min: 2,
            got: values.len(),
        });
    }
    let mut sum = 0.0;
    for (i, &x) in values.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        if x < 0.0 {
            return Err(Error::Negative { index: i, value: x });
        }
        sum += x;
    }
    Ok(sum)
}

/// `x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Relative entropy `D(u || w) = sum_i u_i ln(u_i / w_i)` in nats.
pub fn kl_divergence(u: &SimplexVector, w: &InteriorSimplexVector) -> Result<f64> {
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: u.len(),
        });
    }
    Ok(kl_unchecked(u, w))
}

/// Relative entropy over raw slices. Callers guarantee equal lengths and
/// `w_i > 0` wherever `u_i > 0`.
pub(crate) fn kl_unchecked(u: &[f64], w: &[f64]) -> f64 {
    let d: f64 = u
        .iter()
        .zip(w)
        .map(|(&ui, &wi)| if ui == 0.0 { 0.0 } else { ui * (ui / wi).ln() })
        .sum();
    // Rounding can push an exact zero slightly negative.
    d.max(0.0)
}

/// Binary entropy `H(p) = -p ln p - (1-p) ln(1-p)` in nats.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", p, "must lie in [0, 1]"));
    }
    Ok(entropy_unchecked(p))
}

#[inline]
pub(crate) fn entropy_unchecked(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    -xlogx(p) - xlogx(1.0 - p)
}

/// Scales non-negative finite `values` onto the simplex.
pub fn normalize(values: &[f64]) -> Result<SimplexVector> {
    let sum = check_components(values)?;
    if sum <= 0.0 {
        return Err(Error::Degenerate);
    }
    Ok(SimplexVector(values.iter().map(|x| x / sum).collect()))
}

/// Componentwise product.
pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
