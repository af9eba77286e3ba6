//! Cyclotomic polynomials and divisibility of mask polynomials, the
//! Coven–Meyerowitz conditions and standard tiling complements.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::arith::{self, mobius};
use crate::error::{precondition, Error, Result};
use crate::modulus::Modulus;
use crate::multiset::Multiset;

/// `Φ_s(X)` with integer coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycloPoly {
    s: u64,
    coeffs: Vec<i64>,
}

impl CycloPoly {
    pub fn index(&self) -> u64 {
        self.s
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Φ_s(1)`.
    pub fn at_one(&self) -> i64 {
        self.coeffs.iter().sum()
    }
}

/// Multiplies `c` by `X^d - 1` in place.
fn mul_binomial(c: &mut Vec<i128>, d: usize) -> Result<()> {
    let old = c.len();
    c.resize(old + d, 0);
    for i in (0..old + d).rev() {
        let hi = if i >= d { c[i - d] } else { 0 };
        let lo = if i < old { c[i] } else { 0 };
        c[i] = hi.checked_sub(lo).ok_or(Error::Overflow)?;
    }
    Ok(())
}

/// Divides `c` by `X^d - 1` in place; `Ok(false)` when the division is not exact.
fn div_binomial(c: &mut Vec<i128>, d: usize) -> Result<bool> {
    while c.last() == Some(&0) {
        c.pop();
    }
    if c.is_empty() {
        return Ok(true);
    }
    if c.len() <= d {
        return Ok(false);
    }
    let deg = c.len() - 1;
    let mut q = vec![0i128; deg - d + 1];
    for i in (d..=deg).rev() {
        let above = if i <= deg - d { q[i] } else { 0 };
        q[i - d] = c[i].checked_add(above).ok_or(Error::Overflow)?;
    }
    for i in 0..d {
        let qi = if i < q.len() { q[i] } else { 0 };
        if c[i] + qi != 0 {
            return Ok(false);
        }
    }
    *c = q;
    Ok(true)
}

/// Divisors `d` of `r` split by the sign of `μ(r/d)`.
fn mobius_split(r: u64) -> (Vec<usize>, Vec<usize>) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for d in arith::divisors(r) {
        match mobius(r / d) {
            1 => plus.push(d as usize),
            -1 => minus.push(d as usize),
            _ => {}
        }
    }
    (plus, minus)
}

/// The `s`-th cyclotomic polynomial, from `Φ_s = ∏_{d|s} (X^d - 1)^{μ(s/d)}`
/// evaluated with exact binomial multiplications and divisions.
pub fn cyclotomic(s: u64) -> Result<CycloPoly> {
    if s == 0 {
        return Err(precondition("cyclotomic index must be positive"));
    }
    let (plus, minus) = mobius_split(s);
    let mut c: Vec<i128> = vec![1];
    for &d in &plus {
        mul_binomial(&mut c, d)?;
    }
    for &d in &minus {
        if !div_binomial(&mut c, d)? {
            return Err(Error::Invariant("cyclotomic product is not exact".into()));
        }
    }
    while c.last() == Some(&0) {
        c.pop();
    }
    let coeffs = c
        .into_iter()
        .map(|x| i64::try_from(x).map_err(|_| Error::Overflow))
        .collect::<Result<Vec<_>>>()?;
    Ok(CycloPoly { s, coeffs })
}

/// Does `Φ_s` divide `A(X) mod X^m - 1`?
///
/// With `r = rad(s)` and `k = s/r` we have `Φ_s(X) = Φ_r(X^k)`, so after folding
/// `A` modulo `X^s - 1` and splitting `A = Σ_{j<k} X^j A_j(X^k)` the question is
/// whether `Φ_r` divides every `A_j`. Writing `Φ_r V = U` with `U, V` products of
/// binomials, `Φ_r | P` iff `U | P V`, which needs only sparse exact divisions.
pub fn phi_divides(modulus: &Modulus, s: u64, a: &Multiset) -> Result<bool> {
    modulus.check_divisor(s)?;
    if a.order() as u64 != modulus.m() {
        return Err(Error::ModulusMismatch { left: modulus.m(), right: a.order() as u64 });
    }
    phi_divides_weights(s, a.weights())
}

/// Same as [`phi_divides`] for a raw weight vector whose length is a multiple of `s`.
pub fn phi_divides_weights(s: u64, weights: &[i64]) -> Result<bool> {
    let su = s as usize;
    if su == 0 || weights.len() % su != 0 {
        return Err(Error::NotADivisor { d: s, m: weights.len() as u64 });
    }
    let mut folded = vec![0i128; su];
    for (x, &w) in weights.iter().enumerate() {
        folded[x % su] += w as i128;
    }
    let r = arith::radical(s);
    let ru = r as usize;
    let k = su / ru;
    let (plus, minus) = mobius_split(r);
    for j in 0..k {
        let mut p: Vec<i128> = (0..ru).map(|t| folded[j + k * t]).collect();
        if p.iter().all(|&c| c == 0) {
            continue;
        }
        for &d in &minus {
            mul_binomial(&mut p, d)?;
        }
        for &d in &plus {
            if !div_binomial(&mut p, d)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `Φ_s` divisibility data of a multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CycloSpectrum {
    /// All `s | m`, `s > 1`, with `Φ_s | A`, increasing.
    pub divisors: Vec<u64>,
    /// The prime powers among them (`S_A`), increasing.
    pub prime_powers: Vec<u64>,
}

impl CycloSpectrum {
    pub fn contains(&self, s: u64) -> bool {
        self.divisors.binary_search(&s).is_ok()
    }

    /// For each direction ν, the exponents α with `p_ν^α ∈ S_A`.
    pub fn families(&self, modulus: &Modulus) -> Vec<Vec<u32>> {
        (0..modulus.rank())
            .map(|nu| {
                let (p, n) = modulus.factors()[nu];
                (1..=n).filter(|&a| self.contains(p.pow(a))).collect()
            })
            .collect()
    }

    /// (T1) for a set of `size` elements with this spectrum.
    pub fn t1(&self, size: u64) -> bool {
        t1_holds(&self.prime_powers, size)
    }

    /// (T2) read off the spectrum; the first missing product, if any.
    pub fn t2_violation(&self) -> Option<u64> {
        first_t2_gap(&self.prime_powers, |s| Ok(self.contains(s))).unwrap_or(None)
    }

    /// The standard set `A^♭` carrying these prime-power divisors.
    pub fn flat(&self, modulus: &Modulus) -> Result<Multiset> {
        standard_complement(modulus, &self.families(modulus))
    }
}

fn is_prime_power(s: u64) -> bool {
    s > 1 && arith::factor(s).len() == 1
}

pub fn spectrum(modulus: &Modulus, a: &Multiset) -> Result<CycloSpectrum> {
    if a.order() as u64 != modulus.m() {
        return Err(Error::ModulusMismatch { left: modulus.m(), right: a.order() as u64 });
    }
    if a.is_zero() {
        return Err(Error::ZeroMultiset);
    }
    let mut divisors = Vec::new();
    for &s in &modulus.divisors()[1..] {
        if phi_divides_weights(s, a.weights())? {
            divisors.push(s);
        }
    }
    let prime_powers = divisors.iter().copied().filter(|&s| is_prime_power(s)).collect();
    Ok(CycloSpectrum { divisors, prime_powers })
}

/// `S_A`: prime powers `s | m` with `Φ_s | A`.
pub fn s_a(modulus: &Modulus, a: &Multiset) -> Result<Vec<u64>> {
    if a.is_zero() {
        return Err(Error::ZeroMultiset);
    }
    let mut out = Vec::new();
    for nu in 0..modulus.rank() {
        let (p, n) = modulus.factors()[nu];
        for alpha in 1..=n {
            let s = p.pow(alpha);
            if phi_divides(modulus, s, a)? {
                out.push(s);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// (T1): `|A| = ∏_{s ∈ S_A} Φ_s(1)`.
pub fn t1_check(modulus: &Modulus, a: &Multiset) -> Result<bool> {
    a.ensure_set()?;
    Ok(t1_holds(&s_a(modulus, a)?, a.total() as u64))
}

fn t1_holds(sa: &[u64], size: u64) -> bool {
    let product: u128 = sa.iter().map(|&s| arith::factor(s)[0].0 as u128).product();
    product == size as u128
}

/// (T2): for prime powers `s_1, …, s_k ∈ S_A` of `k ≥ 2` distinct primes,
/// `Φ_{s_1 ⋯ s_k} | A`.
pub fn t2_check(modulus: &Modulus, a: &Multiset) -> Result<bool> {
    Ok(t2_violation(modulus, a)?.is_none())
}

/// First product `s_1 ⋯ s_k` witnessing a failure of (T2), if any.
pub fn t2_violation(modulus: &Modulus, a: &Multiset) -> Result<Option<u64>> {
    a.ensure_set()?;
    first_t2_gap(&s_a(modulus, a)?, |s| phi_divides(modulus, s, a))
}

fn first_t2_gap(sa: &[u64], mut divides: impl FnMut(u64) -> Result<bool>) -> Result<Option<u64>> {
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &s in sa {
        by_prime.entry(arith::factor(s)[0].0).or_default().push(s);
    }
    let groups: Vec<Vec<u64>> = by_prime.into_values().collect();
    // mixed-radix walk where digit 0 means "prime not used"
    let radices: Vec<usize> = groups.iter().map(|g| g.len() + 1).collect();
    let mut digits = vec![0usize; groups.len()];
    loop {
        let used = digits.iter().filter(|&&d| d > 0).count();
        if used >= 2 {
            let s: u64 = digits
                .iter()
                .zip(&groups)
                .filter(|(&d, _)| d > 0)
                .map(|(&d, g)| g[d - 1])
                .product();
            if !divides(s)? {
                return Ok(Some(s));
            }
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(None);
            }
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// The standard complement `∏_ν ∏_{α ∈ 𝔄_ν} (1 + X^{M_ν p^{α-1}} + … + X^{(p-1) M_ν p^{α-1}})`.
pub fn standard_complement(modulus: &Modulus, families: &[Vec<u32>]) -> Result<Multiset> {
    if families.len() != modulus.rank() {
        return Err(Error::CoordinateCount { expected: modulus.rank(), got: families.len() });
    }
    let m = modulus.order();
    let mut elements = vec![0usize];
    for (nu, family) in families.iter().enumerate() {
        let (p, n) = modulus.factors()[nu];
        let mut alphas = family.clone();
        alphas.sort_unstable();
        alphas.dedup();
        for alpha in alphas {
            if alpha == 0 || alpha > n {
                return Err(Error::ExponentOutOfRange { prime: p, exponent: alpha });
            }
            let step = (modulus.cofactor(nu) * p.pow(alpha - 1)) as usize;
            elements = elements
                .iter()
                .flat_map(|&x| (0..p as usize).map(move |t| (x + t * step) % m))
                .collect();
        }
    }
    Ok(Multiset::from_elements(m, elements))
}

/// Standard complement of a tile `B`: `𝔄_ν = {α : Φ_{p_ν^α} ∤ B}`.
pub fn standard_complement_of(modulus: &Modulus, b: &Multiset) -> Result<Multiset> {
    b.ensure_set()?;
    let spec = s_a(modulus, b)?;
    let families: Vec<Vec<u32>> = (0..modulus.rank())
        .map(|nu| {
            let (p, n) = modulus.factors()[nu];
            (1..=n).filter(|&a| !spec.contains(&p.pow(a))).collect()
        })
        .collect();
    let size: u64 = families
        .iter()
        .enumerate()
        .map(|(nu, f)| modulus.prime(nu).pow(f.len() as u32))
        .product();
    if size * b.total() as u64 != modulus.m() {
        return Err(Error::NotATiling);
    }
    standard_complement(modulus, &families)
}

/// One N-fiber `root + {0, N/p, …, (p-1)N/p}` with a multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FiberTerm {
    pub root: usize,
    pub prime: u64,
    pub multiplicity: i64,
}

/// Writes `A mod N` as a nonnegative combination of N-fibers when `N` has two
/// prime factors and `Φ_N | A`, by greedy peeling from the smallest element.
pub fn decompose_two_prime(modulus: &Modulus, a: &Multiset, n: u64) -> Result<Vec<FiberTerm>> {
    modulus.check_divisor(n)?;
    let primes: Vec<u64> = arith::factor(n).into_iter().map(|(p, _)| p).collect();
    if primes.len() != 2 {
        return Err(precondition("N must have exactly two distinct prime factors"));
    }
    let reduced = a.reduce_mod(n as usize)?;
    if let Some(x) = reduced.weights().iter().position(|&w| w < 0) {
        return Err(Error::NegativeWeight { element: x, weight: reduced.weight(x) });
    }
    if !phi_divides_weights(n, reduced.weights())? {
        return Err(precondition("Phi_N does not divide A"));
    }
    let nu = n as usize;
    let mut w = reduced.weights().to_vec();
    let mut terms = Vec::new();
    for x in 0..nu {
        while w[x] > 0 {
            let mut peeled = false;
            for &p in &primes {
                let step = nu / p as usize;
                let min = (0..p as usize).map(|t| w[(x + t * step) % nu]).min().unwrap_or(0);
                if min > 0 {
                    for t in 0..p as usize {
                        w[(x + t * step) % nu] -= min;
                    }
                    terms.push(FiberTerm { root: x, prime: p, multiplicity: min });
                    peeled = true;
                    break;
                }
            }
            if !peeled {
                return Err(Error::Invariant("no full fiber through a positive point".into()));
            }
        }
    }
    Ok(terms)
}

/// Weighted union of fibers in Z_n.
pub fn fibers_to_multiset(n: usize, terms: &[FiberTerm]) -> Multiset {
    let mut w = vec![0i64; n];
    for t in terms {
        let step = n / t.prime as usize;
        for k in 0..t.prime as usize {
            w[(t.root + k * step) % n] += t.multiplicity;
        }
    }
    Multiset::from_weights(w)
}
