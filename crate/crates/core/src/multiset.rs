//! Integer-weighted multisets on Z_m. A multiset doubles as the mask polynomial
//! `A(X) = Σ w_A(x) X^x mod X^m - 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense weight vector on Z_m; `weights.len() == m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Multiset {
    weights: Vec<i64>,
    total: i64,
}

impl Multiset {
    pub fn zero(m: usize) -> Self {
        Self { weights: vec![0; m], total: 0 }
    }

    /// The point mass at `x`.
    pub fn delta(m: usize, x: usize) -> Self {
        let mut w = vec![0; m];
        w[x % m] = 1;
        Self { weights: w, total: 1 }
    }

    pub fn from_weights(weights: Vec<i64>) -> Self {
        let total = weights.iter().sum();
        Self { weights, total }
    }

    /// Set with the given elements; repeated elements are rejected.
    pub fn from_set(m: usize, elements: &[usize]) -> Result<Self> {
        let mut w = vec![0i64; m];
        for &x in elements {
            if x >= m {
                return Err(Error::ElementOutOfRange { element: x as u64, m: m as u64 });
            }
            if w[x] != 0 {
                return Err(Error::NotASet { element: x, weight: 2 });
            }
            w[x] = 1;
        }
        Ok(Self::from_weights(w))
    }

    /// Multiset counting each listed element (reduced mod m) with multiplicity.
    pub fn from_elements(m: usize, elements: impl IntoIterator<Item = usize>) -> Self {
        let mut w = vec![0i64; m];
        for x in elements {
            w[x % m] += 1;
        }
        Self::from_weights(w)
    }

    /// Group order m.
    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> i64 {
        self.weights[x % self.weights.len()]
    }

    /// `A(1)`, the total weight.
    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0)
    }

    pub fn is_set(&self) -> bool {
        self.weights.iter().all(|&w| w == 0 || w == 1)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0)
    }

    pub fn ensure_set(&self) -> Result<()> {
        match self.weights.iter().position(|&w| w != 0 && w != 1) {
            None => Ok(()),
            Some(x) => Err(Error::NotASet { element: x, weight: self.weights[x] }),
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.weight(x) != 0
    }

    /// Elements with nonzero weight, increasing.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(x, _)| x)
            .collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::ModulusMismatch { left: self.order() as u64, right: other.order() as u64 })
        }
    }

    /// Weights folded onto Z_n; `n` must divide the order.
    pub fn reduce_mod(&self, n: usize) -> Result<Self> {
        let m = self.order();
        if n == 0 || m % n != 0 {
            return Err(Error::NotADivisor { d: n as u64, m: m as u64 });
        }
        let mut w = vec![0i64; n];
        for (x, &c) in self.weights.iter().enumerate() {
            w[x % n] += c;
        }
        Ok(Self { weights: w, total: self.total })
    }

    /// Cyclic convolution, i.e. the weighted sumset `A * B`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let m = self.order();
        let mut w = vec![0i64; m];
        let rhs: Vec<(usize, i64)> =
            other.weights.iter().enumerate().filter(|(_, &c)| c != 0).map(|(x, &c)| (x, c)).collect();
        for (x, &a) in self.weights.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(y, b) in &rhs {
                let z = x + y;
                let z = if z >= m { z - m } else { z };
                w[z] += a * b;
            }
        }
        Ok(Self::from_weights(w))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect();
        Ok(Self::from_weights(w))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| a - b).collect();
        Ok(Self::from_weights(w))
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::from_weights(self.weights.iter().map(|w| w * c).collect())
    }

    /// `x + A`.
    pub fn translate(&self, x: usize) -> Self {
        let m = self.order();
        let mut w = vec![0i64; m];
        for (y, &c) in self.weights.iter().enumerate() {
            w[(y + x) % m] = c;
        }
        Self { weights: w, total: self.total }
    }

    /// `-A`.
    pub fn negate(&self) -> Self {
        let m = self.order();
        let mut w = vec![0i64; m];
        for (y, &c) in self.weights.iter().enumerate() {
            w[(m - y) % m] = c;
        }
        Self { weights: w, total: self.total }
    }

    /// Restriction to the elements accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let w = self
            .weights
            .iter()
            .enumerate()
            .map(|(x, &c)| if keep(x) { c } else { 0 })
            .collect();
        Self::from_weights(w)
    }
}
