//! Cuboids: signed vertex configurations whose evaluations detect cyclotomic
//! divisibility.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith;
use crate::cyclo;
use crate::error::{precondition, Error, Result};
use crate::modulus::Modulus;
use crate::multiset::Multiset;

/// A cuboid type `(N, δ, T)` on Z_N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuboidType {
    n: u64,
    delta: Vec<u32>,
    template: Multiset,
}

impl CuboidType {
    /// `delta` is indexed by the primes of the ambient modulus; `template` lives on Z_N.
    pub fn new(modulus: &Modulus, n: u64, delta: Vec<u32>, template: Multiset) -> Result<Self> {
        modulus.check_divisor(n)?;
        if delta.len() != modulus.rank() {
            return Err(Error::CoordinateCount { expected: modulus.rank(), got: delta.len() });
        }
        let exps = modulus.exponents_of(n);
        for (nu, (&d, &e)) in delta.iter().zip(&exps).enumerate() {
            if d > e {
                return Err(Error::ExponentOutOfRange { prime: modulus.prime(nu), exponent: d });
            }
        }
        if template.order() as u64 != n {
            return Err(Error::ModulusMismatch { left: n, right: template.order() as u64 });
        }
        if template.is_zero() {
            return Err(Error::ZeroMultiset);
        }
        Ok(Self { n, delta, template })
    }

    /// The N-cuboid type: `δ_ν = 1` for every prime dividing `N`, template `{0}`.
    pub fn n_cuboids(modulus: &Modulus, n: u64) -> Result<Self> {
        modulus.check_divisor(n)?;
        let delta = modulus.exponents_of(n).iter().map(|&e| u32::from(e > 0)).collect();
        Self::new(modulus, n, delta, Multiset::delta(n as usize, 0))
    }

    pub fn scale(&self) -> u64 {
        self.n
    }

    pub fn delta(&self) -> &[u32] {
        &self.delta
    }

    pub fn template(&self) -> &Multiset {
        &self.template
    }

    /// Directions with `δ_ν ≠ 0`.
    pub fn active(&self) -> Vec<usize> {
        (0..self.delta.len()).filter(|&nu| self.delta[nu] != 0).collect()
    }

    /// Admissible offsets in direction ν: `(d, N) = N / p_ν^{δ_ν}`.
    pub fn offsets(&self, modulus: &Modulus, nu: usize) -> Vec<usize> {
        let p = modulus.prime(nu);
        let q = p.pow(self.delta[nu]);
        let base = self.n / q;
        (1..q).filter(|u| u % p != 0).map(|u| (base * u) as usize).collect()
    }
}

/// A concrete cuboid: vertex `c` and one offset per active direction.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Cuboid {
    pub c: usize,
    /// `(ν, d_ν)` for every active direction, in direction order.
    pub offsets: Vec<(usize, usize)>,
}

impl Cuboid {
    /// Vertices `c + Σ ε_ν d_ν` with signs `(-1)^{Σ ε_ν}`, in Z_N.
    pub fn vertices(&self, n: usize) -> Vec<(usize, i64)> {
        let k = self.offsets.len();
        (0..1usize << k)
            .map(|mask| {
                let mut x = self.c;
                let mut sign = 1;
                for (bit, &(_, d)) in self.offsets.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        x += d;
                        sign = -sign;
                    }
                }
                (x % n, sign)
            })
            .collect()
    }

    fn conforms(&self, modulus: &Modulus, ty: &CuboidType) -> Result<()> {
        let active = ty.active();
        let dirs: Vec<usize> = self.offsets.iter().map(|&(nu, _)| nu).collect();
        if dirs != active {
            return Err(precondition("cuboid directions do not match the type"));
        }
        for &(nu, d) in &self.offsets {
            let want = ty.n / modulus.prime(nu).pow(ty.delta[nu]);
            if arith::gcd(d as u64 % ty.n, ty.n) != want {
                return Err(precondition("offset has the wrong gcd with N"));
            }
        }
        Ok(())
    }
}

/// `x ↦ 𝔸^N_N[x * T] = Σ_t w_T(t) w^N_A(x + t)`, tabulated on Z_N.
fn template_table(a: &Multiset, ty: &CuboidType) -> Result<Vec<i64>> {
    let n = ty.n as usize;
    let reduced = a.reduce_mod(n)?;
    let w = reduced.weights();
    let terms: Vec<(usize, i64)> =
        ty.template.weights().iter().enumerate().filter(|(_, &c)| c != 0).map(|(t, &c)| (t, c)).collect();
    Ok((0..n).map(|x| terms.iter().map(|&(t, c)| c * w[(x + t) % n]).sum()).collect())
}

/// `𝔸^𝒯[Δ] = Σ_ε w_Δ(x_ε) 𝔸^N_N[x_ε * T]`.
pub fn eval(modulus: &Modulus, a: &Multiset, ty: &CuboidType, cuboid: &Cuboid) -> Result<i64> {
    cuboid.conforms(modulus, ty)?;
    let table = template_table(a, ty)?;
    Ok(cuboid.vertices(ty.n as usize).iter().map(|&(x, s)| s * table[x]).sum())
}

/// How cuboids are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Every admissible `(c, d)`; authoritative.
    Exhaustive,
    /// `count` cuboids drawn with ChaCha8 seeded from `seed`; heuristic.
    Sampled { seed: u64, count: usize },
}

/// Stream of cuboids of one type.
#[derive(Debug, Clone)]
pub struct CuboidIter {
    centers: Vec<usize>,
    choices: Vec<(usize, Vec<usize>)>,
    state: IterState,
}

#[derive(Debug, Clone)]
enum IterState {
    Exhaustive { center: usize, digits: Vec<usize>, done: bool },
    Sampled { rng: ChaCha8Rng, left: usize },
}

impl Iterator for CuboidIter {
    type Item = Cuboid;

    fn next(&mut self) -> Option<Cuboid> {
        match &mut self.state {
            IterState::Exhaustive { center, digits, done } => {
                if *done || self.centers.is_empty() {
                    return None;
                }
                let cuboid = Cuboid {
                    c: self.centers[*center],
                    offsets: self
                        .choices
                        .iter()
                        .zip(digits.iter())
                        .map(|((nu, opts), &i)| (*nu, opts[i]))
                        .collect(),
                };
                let mut i = 0;
                loop {
                    if i == digits.len() {
                        *center += 1;
                        if *center == self.centers.len() {
                            *done = true;
                        }
                        break;
                    }
                    digits[i] += 1;
                    if digits[i] < self.choices[i].1.len() {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                Some(cuboid)
            }
            IterState::Sampled { rng, left } => {
                if *left == 0 || self.centers.is_empty() {
                    return None;
                }
                *left -= 1;
                let c = self.centers[rng.gen_range(0..self.centers.len())];
                let offsets = self
                    .choices
                    .iter()
                    .map(|(nu, opts)| (*nu, opts[rng.gen_range(0..opts.len())]))
                    .collect();
                Some(Cuboid { c, offsets })
            }
        }
    }
}

/// Cuboids of type `ty`; with `through`, `c` ranges over `Λ(through, D(N))` in Z_N.
pub fn enumerate_cuboids(
    modulus: &Modulus,
    ty: &CuboidType,
    through: Option<usize>,
    mode: Enumeration,
) -> CuboidIter {
    let n = ty.n as usize;
    let centers: Vec<usize> = match through {
        None => (0..n).collect(),
        Some(x) => {
            let d = modulus.d_of(ty.n) as usize;
            (x % d..n).step_by(d).collect()
        }
    };
    let choices: Vec<(usize, Vec<usize>)> =
        ty.active().into_iter().map(|nu| (nu, ty.offsets(modulus, nu))).collect();
    let state = match mode {
        Enumeration::Exhaustive => {
            IterState::Exhaustive { center: 0, digits: vec![0; choices.len()], done: false }
        }
        Enumeration::Sampled { seed, count } => {
            IterState::Sampled { rng: ChaCha8Rng::seed_from_u64(seed), left: count }
        }
    };
    CuboidIter { centers, choices, state }
}

/// First cuboid with nonzero evaluation, with its value.
pub fn first_nonnull(
    modulus: &Modulus,
    a: &Multiset,
    ty: &CuboidType,
    mode: Enumeration,
) -> Result<Option<(Cuboid, i64)>> {
    if a.order() as u64 != modulus.m() {
        return Err(Error::ModulusMismatch { left: modulus.m(), right: a.order() as u64 });
    }
    let table = template_table(a, ty)?;
    let n = ty.n as usize;
    if let Enumeration::Sampled { .. } = mode {
        for cuboid in enumerate_cuboids(modulus, ty, None, mode) {
            let v: i64 = cuboid.vertices(n).iter().map(|&(x, s)| s * table[x]).sum();
            if v != 0 {
                return Ok(Some((cuboid, v)));
            }
        }
        return Ok(None);
    }
    // exhaustive: precompute the signed vertex patterns once and slide them over c
    let shapes: Vec<Cuboid> = enumerate_cuboids(
        modulus,
        &CuboidType { n: ty.n, delta: ty.delta.clone(), template: ty.template.clone() },
        Some(0),
        Enumeration::Exhaustive,
    )
    .take_while(|c| c.c == 0)
    .collect();
    let patterns: Vec<Vec<(usize, i64)>> = shapes.iter().map(|s| s.vertices(n)).collect();
    for c in 0..n {
        for (shape, pattern) in shapes.iter().zip(&patterns) {
            let mut v = 0i64;
            for &(off, s) in pattern {
                let x = c + off;
                v += s * table[if x >= n { x - n } else { x }];
            }
            if v != 0 {
                return Ok(Some((Cuboid { c, offsets: shape.offsets.clone() }, v)));
            }
        }
    }
    Ok(None)
}

/// Is `A` 𝒯-null, i.e. does every enumerated cuboid evaluate to 0?
pub fn is_t_null(modulus: &Modulus, a: &Multiset, ty: &CuboidType, mode: Enumeration) -> Result<bool> {
    Ok(first_nonnull(modulus, a, ty, mode)?.is_none())
}

/// `Φ_s | A` decided by nullity over all s-cuboids.
pub fn phi_divides_via_cuboids(modulus: &Modulus, s: u64, a: &Multiset) -> Result<bool> {
    let ty = CuboidType::n_cuboids(modulus, s)?;
    is_t_null(modulus, a, &ty, Enumeration::Exhaustive)
}

/// `Φ_{p^α} | A` via uniform distribution: the weight of `A` on each residue
/// class mod `p^α` equals `1/p` of its weight on the enclosing class mod `p^{α-1}`.
pub fn phi_divides_uniform(modulus: &Modulus, s: u64, a: &Multiset) -> Result<bool> {
    modulus.check_divisor(s)?;
    let f = arith::factor(s);
    if f.len() != 1 {
        return Err(precondition("s must be a prime power"));
    }
    let (p, alpha) = f[0];
    let reduced = a.reduce_mod(s as usize)?;
    let w = reduced.weights();
    let coarse = p.pow(alpha - 1) as usize;
    Ok((0..coarse).all(|r| (1..p as usize).all(|t| w[r + t * coarse] == w[r])))
}

/// The two multi-divisor cuboid tests in direction ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiPhi {
    /// `Φ_M Φ_{M/p_ν}`, tested with `δ_ν = 2`, other `δ = 1`; needs `n_ν ≥ 2`.
    FiberScale(usize),
    /// `Φ_M Φ_{M/p_ν²}`, tested with `δ_ν = 0`, other `δ = 1` and template
    /// `1 + X^{M/p²} + … + X^{(p-1)M/p²}`; needs `n_ν = 2`.
    SquareScale(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MultiPhiVerdict {
    pub null: bool,
    pub divides: bool,
}

/// The cuboid type attached to a [`MultiPhi`] combination.
pub fn multi_phi_type(modulus: &Modulus, combo: MultiPhi) -> Result<CuboidType> {
    let m = modulus.m();
    match combo {
        MultiPhi::FiberScale(nu) => {
            modulus.check_direction(nu)?;
            if modulus.exponent(nu) < 2 {
                return Err(precondition("the exponent in this direction must be at least 2"));
            }
            let mut delta = vec![1; modulus.rank()];
            delta[nu] = 2;
            CuboidType::new(modulus, m, delta, Multiset::delta(m as usize, 0))
        }
        MultiPhi::SquareScale(nu) => {
            modulus.check_direction(nu)?;
            if modulus.exponent(nu) != 2 {
                return Err(precondition("the exponent in this direction must be exactly 2"));
            }
            let p = modulus.prime(nu);
            let step = (m / (p * p)) as usize;
            let mut delta = vec![1; modulus.rank()];
            delta[nu] = 0;
            let template = Multiset::from_elements(m as usize, (0..p as usize).map(|t| t * step));
            CuboidType::new(modulus, m, delta, template)
        }
    }
}

/// Runs both the cuboid and the polynomial side and checks the relation between them.
pub fn multi_phi_test(modulus: &Modulus, a: &Multiset, combo: MultiPhi) -> Result<MultiPhiVerdict> {
    let ty = multi_phi_type(modulus, combo)?;
    let m = modulus.m();
    let second = match combo {
        MultiPhi::FiberScale(nu) => m / modulus.prime(nu),
        MultiPhi::SquareScale(nu) => m / modulus.prime(nu).pow(2),
    };
    let divides = cyclo::phi_divides(modulus, m, a)? && cyclo::phi_divides(modulus, second, a)?;
    let null = is_t_null(modulus, a, &ty, Enumeration::Exhaustive)?;
    let consistent = match combo {
        MultiPhi::FiberScale(_) => null == divides,
        MultiPhi::SquareScale(_) => !divides || null,
    };
    if !consistent {
        return Err(Error::Invariant(alloc::format!(
            "cuboid test disagrees with divisibility: null={null} divides={divides}"
        )));
    }
    Ok(MultiPhiVerdict { null, divides })
}
