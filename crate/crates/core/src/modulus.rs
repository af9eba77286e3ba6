//! The cyclic group Z_M together with its factorisation and the geometry
//! (coordinates, grids, lines, planes, fibers) built on it.

use alloc::vec::Vec;

use crate::arith::{self, gcd};
use crate::error::{Error, Result};

/// Largest supported group order; sets are stored densely.
pub const MAX_MODULUS: u64 = 1 << 20;

/// A factored modulus `M = p_1^{n_1} ... p_K^{n_K}` with cached derived data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    m: u64,
    factors: Vec<(u64, u32)>,
    prime_powers: Vec<u64>,
    cofactors: Vec<u64>,
    cofactor_inverses: Vec<u64>,
    divisors: Vec<u64>,
    phis: Vec<u64>,
}

impl Modulus {
    /// Builds a modulus from `(prime, exponent)` pairs listed with increasing primes.
    pub fn new(factors: &[(u64, u32)]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::TrivialModulus);
        }
        let mut m: u64 = 1;
        for (i, &(p, n)) in factors.iter().enumerate() {
            if !arith::is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if i > 0 && factors[i - 1].0 >= p {
                return Err(Error::PrimesNotIncreasing);
            }
            if n == 0 {
                return Err(Error::ZeroExponent { prime: p });
            }
            for _ in 0..n {
                m = m.checked_mul(p).ok_or(Error::ModulusTooLarge(u64::MAX))?;
                if m > MAX_MODULUS {
                    return Err(Error::ModulusTooLarge(m));
                }
            }
        }
        let prime_powers: Vec<u64> = factors.iter().map(|&(p, n)| p.pow(n)).collect();
        let cofactors: Vec<u64> = prime_powers.iter().map(|&q| m / q).collect();
        let cofactor_inverses = cofactors
            .iter()
            .zip(&prime_powers)
            .map(|(&c, &q)| arith::mod_inverse(c, q).expect("coprime cofactor"))
            .collect();
        let divisors = arith::divisors(m);
        let phis = divisors.iter().map(|&d| arith::euler_phi(d)).collect();
        Ok(Self {
            m,
            factors: factors.to_vec(),
            prime_powers,
            cofactors,
            cofactor_inverses,
            divisors,
            phis,
        })
    }

    /// Factors `m` by trial division.
    pub fn from_order(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::TrivialModulus);
        }
        if m > MAX_MODULUS {
            return Err(Error::ModulusTooLarge(m));
        }
        Self::new(&arith::factor(m))
    }

    /// The modulus of the quotient group Z_N for a divisor `N > 1` of `m`.
    pub fn quotient(&self, n: u64) -> Result<Self> {
        self.check_divisor(n)?;
        Self::from_order(n)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Group order as a `usize`, handy for indexing dense arrays.
    pub fn order(&self) -> usize {
        self.m as usize
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct primes.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn prime(&self, nu: usize) -> u64 {
        self.factors[nu].0
    }

    pub fn exponent(&self, nu: usize) -> u32 {
        self.factors[nu].1
    }

    /// `p_ν^{n_ν}`.
    pub fn prime_power(&self, nu: usize) -> u64 {
        self.prime_powers[nu]
    }

    /// `M_ν = M / p_ν^{n_ν}`.
    pub fn cofactor(&self, nu: usize) -> u64 {
        self.cofactors[nu]
    }

    /// `N_ν = M / p_ν`.
    pub fn fiber_scale(&self, nu: usize) -> u64 {
        self.m / self.factors[nu].0
    }

    pub fn direction_of(&self, p: u64) -> Option<usize> {
        self.factors.iter().position(|&(q, _)| q == p)
    }

    pub fn check_direction(&self, nu: usize) -> Result<()> {
        if nu < self.rank() {
            Ok(())
        } else {
            Err(Error::DirectionOutOfRange { direction: nu, rank: self.rank() })
        }
    }

    pub fn is_divisor(&self, d: u64) -> bool {
        d != 0 && self.m % d == 0
    }

    pub fn check_divisor(&self, d: u64) -> Result<()> {
        if self.is_divisor(d) {
            Ok(())
        } else {
            Err(Error::NotADivisor { d, m: self.m })
        }
    }

    pub fn check_element(&self, x: u64) -> Result<usize> {
        if x < self.m {
            Ok(x as usize)
        } else {
            Err(Error::ElementOutOfRange { element: x, m: self.m })
        }
    }

    /// All divisors of `m`, increasing.
    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    /// Position of `d` in [`Self::divisors`].
    pub fn divisor_index(&self, d: u64) -> Option<usize> {
        self.divisors.binary_search(&d).ok()
    }

    /// Euler's totient of a divisor of `m`, from the cached table.
    pub fn phi(&self, d: u64) -> u64 {
        match self.divisor_index(d) {
            Some(i) => self.phis[i],
            None => arith::euler_phi(d),
        }
    }

    /// Exponent vector of a divisor of `m`.
    pub fn exponents_of(&self, d: u64) -> Vec<u32> {
        self.factors
            .iter()
            .map(|&(p, _)| {
                let mut e = 0;
                let mut r = d;
                while r % p == 0 && r > 0 {
                    r /= p;
                    e += 1;
                }
                e
            })
            .collect()
    }

    /// Divisor with the given exponent vector.
    pub fn divisor_from_exponents(&self, exps: &[u32]) -> Result<u64> {
        if exps.len() != self.rank() {
            return Err(Error::CoordinateCount { expected: self.rank(), got: exps.len() });
        }
        let mut d = 1;
        for (&(p, n), &e) in self.factors.iter().zip(exps) {
            if e > n {
                return Err(Error::ExponentOutOfRange { prime: p, exponent: e });
            }
            d *= p.pow(e);
        }
        Ok(d)
    }

    /// `(x, N)` for a divisor `N` of `m`; `(0, N) = N`.
    pub fn gcd_with(&self, x: u64, n: u64) -> u64 {
        gcd(x % self.m, n)
    }

    /// `(x - y, M)` for elements of Z_M.
    pub fn diff_gcd(&self, x: usize, y: usize) -> u64 {
        let m = self.order();
        gcd(((x + m - y) % m) as u64, self.m)
    }

    /// `D(N) = ∏ p^{max(0, α-1)}` for `N = ∏ p^α`.
    pub fn d_of(&self, n: u64) -> u64 {
        self.exponents_of(n)
            .iter()
            .zip(&self.factors)
            .map(|(&a, &(p, _))| p.pow(a.saturating_sub(1)))
            .product()
    }

    /// Array coordinates `π_ν(x) ∈ Z_{p_ν^{n_ν}}` with `x = Σ π_ν(x) M_ν mod M`.
    pub fn coords(&self, x: usize) -> Vec<u64> {
        let x = x as u64 % self.m;
        (0..self.rank())
            .map(|nu| {
                let q = self.prime_powers[nu];
                (x % q) * self.cofactor_inverses[nu] % q
            })
            .collect()
    }

    /// Inverse of [`Self::coords`].
    pub fn from_coords(&self, coords: &[u64]) -> Result<usize> {
        if coords.len() != self.rank() {
            return Err(Error::CoordinateCount { expected: self.rank(), got: coords.len() });
        }
        let mut x: u64 = 0;
        for (nu, &c) in coords.iter().enumerate() {
            let q = self.prime_powers[nu];
            if c >= q {
                return Err(Error::CoordinateOutOfRange { index: nu, value: c, bound: q });
            }
            x = (x + c * self.cofactors[nu]) % self.m;
        }
        Ok(x as usize)
    }

    /// `Λ(x, D) = x + D Z_M`, sorted.
    pub fn grid(&self, x: usize, d: u64) -> Result<Vec<usize>> {
        self.check_divisor(d)?;
        let d = d as usize;
        let start = x % d;
        Ok((start..self.order()).step_by(d).collect())
    }

    /// `ℓ_ν(x) = Λ(x, M_ν)`.
    pub fn line(&self, x: usize, nu: usize) -> Result<Vec<usize>> {
        self.check_direction(nu)?;
        self.grid(x, self.cofactors[nu])
    }

    /// `Π(x, p_ν^α) = Λ(x, p_ν^α)`.
    pub fn plane(&self, x: usize, nu: usize, alpha: u32) -> Result<Vec<usize>> {
        self.check_direction(nu)?;
        let (p, n) = self.factors[nu];
        if alpha > n {
            return Err(Error::ExponentOutOfRange { prime: p, exponent: alpha });
        }
        self.grid(x, p.pow(alpha))
    }

    /// The M-fiber `x * F_ν = Λ(x, M/p_ν)`.
    pub fn fiber(&self, x: usize, nu: usize) -> Result<Vec<usize>> {
        self.check_direction(nu)?;
        self.grid(x, self.fiber_scale(nu))
    }
}
