use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Fixed-dimension vector of 64-bit reals.
///
/// Holds parameters, gradients and velocities alike. The dimension is set at
/// construction and never changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        ParamVector(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, value: f64) {
        self.0.iter_mut().for_each(|x| *x = value);
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &ParamVector) -> ParamVector {
        debug_assert_eq!(self.dim(), other.dim());
        ParamVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Element-wise `self + other`.
    pub fn add(&self, other: &ParamVector) -> ParamVector {
        debug_assert_eq!(self.dim(), other.dim());
        ParamVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: f64) -> ParamVector {
        ParamVector(self.0.iter().map(|x| k * x).collect())
    }

    /// `self - k * other`.
    pub fn sub_scaled(&self, k: f64, other: &ParamVector) -> ParamVector {
        debug_assert_eq!(self.dim(), other.dim());
        ParamVector(self.0.iter().zip(&other.0).map(|(a, b)| a - k * b).collect())
    }

    pub fn distance(&self, other: &ParamVector) -> f64 {
        self.sub(other).norm()
    }

    pub fn distance_sq(&self, other: &ParamVector) -> f64 {
        self.sub(other).norm_sq()
    }

    /// Reorders coordinates: entry `i` of the result is `self[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> ParamVector {
        ParamVector(perm.iter().map(|&j| self.0[j]).collect())
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl<const N: usize> From<[f64; N]> for ParamVector {
    fn from(v: [f64; N]) -> Self {
        ParamVector(v.to_vec())
    }
}

impl From<&[f64]> for ParamVector {
    fn from(v: &[f64]) -> Self {
        ParamVector(v.to_vec())
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<'a> IntoIterator for &'a ParamVector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Sign with `sgn(0) = 0`. `f64::signum` maps `+0.0` to `1.0`, which the
/// sign-gating rules must not see.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgn_of_zero_is_zero() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(-0.0), 0.0);
        assert_eq!(sgn(3.0), 1.0);
        assert_eq!(sgn(-1e-300), -1.0);
    }

    #[test]
    fn arithmetic() {
        let a = ParamVector::from([1.0, 2.0]);
        let b = ParamVector::from([0.5, -1.0]);
        assert_eq!(a.sub(&b), ParamVector::from([0.5, 3.0]));
        assert_eq!(a.add(&b), ParamVector::from([1.5, 1.0]));
        assert_eq!(a.sub_scaled(2.0, &b), ParamVector::from([0.0, 4.0]));
        assert_eq!(ParamVector::from([3.0, 4.0]).norm(), 5.0);
        assert_eq!(a.permuted(&[1, 0]), ParamVector::from([2.0, 1.0]));
    }
}
