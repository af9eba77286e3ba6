//! Tilings `A ⊕ B = Z_M`: three independent verifiers, divisor sets, boxes,
//! saturating sets and span geometry.

use alloc::vec;
use alloc::vec::Vec;

use crate::arith::gcd;
use crate::cyclo;
use crate::error::{inapplicable, Error, Result};
use crate::modulus::Modulus;
use crate::multiset::Multiset;
use crate::ratio::Ratio;

/// A candidate tiling pair in Z_M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingInstance {
    modulus: Modulus,
    a: Multiset,
    b: Multiset,
}

impl TilingInstance {
    /// Both sides must be nonempty sets on Z_M.
    pub fn new(modulus: Modulus, a: Multiset, b: Multiset) -> Result<Self> {
        for s in [&a, &b] {
            if s.order() as u64 != modulus.m() {
                return Err(Error::ModulusMismatch { left: modulus.m(), right: s.order() as u64 });
            }
            s.ensure_set()?;
            if s.is_zero() {
                return Err(Error::ZeroMultiset);
            }
        }
        Ok(Self { modulus, a, b })
    }

    pub fn from_elements(modulus: Modulus, a: &[usize], b: &[usize]) -> Result<Self> {
        let m = modulus.order();
        let a = Multiset::from_set(m, a)?;
        let b = Multiset::from_set(m, b)?;
        Self::new(modulus, a, b)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn a(&self) -> &Multiset {
        &self.a
    }

    pub fn b(&self) -> &Multiset {
        &self.b
    }

    /// The same pair with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> Self {
        Self { modulus: self.modulus.clone(), a: self.b.clone(), b: self.a.clone() }
    }

    /// Translates both sides so that their least elements are 0.
    pub fn canonical(&self) -> Self {
        let shift = |s: &Multiset| {
            let min = s.support()[0];
            s.translate(s.order() - min)
        };
        Self { modulus: self.modulus.clone(), a: shift(&self.a), b: shift(&self.b) }
    }

    /// Every element of Z_M is hit exactly once by `a + b`.
    pub fn verify_direct(&self) -> bool {
        let m = self.modulus.order();
        let a = self.a.support();
        let b = self.b.support();
        if a.len() * b.len() != m {
            return false;
        }
        let mut hit = vec![false; m];
        for &x in &a {
            for &y in &b {
                let z = (x + y) % m;
                if hit[z] {
                    return false;
                }
                hit[z] = true;
            }
        }
        true
    }

    /// `|A||B| = M` and every `Φ_s`, `1 < s | M`, divides `A(X)` or `B(X)`.
    pub fn verify_poly(&self) -> Result<bool> {
        if self.a.total() * self.b.total() != self.modulus.m() as i64 {
            return Ok(false);
        }
        for &s in &self.modulus.divisors()[1..] {
            if !cyclo::phi_divides(&self.modulus, s, &self.a)?
                && !cyclo::phi_divides(&self.modulus, s, &self.b)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Divisor exclusion `Div(A) ∩ Div(B) = {M}`; needs `|A||B| = M`.
    pub fn verify_sands(&self) -> Result<bool> {
        let product = (self.a.total() * self.b.total()) as u64;
        if product != self.modulus.m() {
            return Err(Error::CardinalityMismatch { product, m: self.modulus.m() });
        }
        let m = self.modulus.m();
        let da = div_set(&self.modulus, &self.a, m)?;
        let db = div_set(&self.modulus, &self.b, m)?;
        Ok(da.members.iter().filter(|d| db.contains(**d)).all(|&d| d == m))
    }

    /// Runs all three verifiers; they must agree.
    pub fn verify(&self) -> Result<bool> {
        let direct = self.verify_direct();
        let poly = self.verify_poly()?;
        let sands = match self.verify_sands() {
            Ok(v) => v,
            Err(Error::CardinalityMismatch { .. }) => false,
            Err(e) => return Err(e),
        };
        if direct != poly || direct != sands {
            return Err(Error::Invariant(alloc::format!(
                "verifiers disagree: direct={direct} poly={poly} sands={sands}"
            )));
        }
        Ok(direct)
    }

    /// Consumes the instance after checking that it tiles.
    pub fn into_verified(self) -> Result<VerifiedTiling> {
        if !self.verify()? {
            return Err(Error::NotATiling);
        }
        let m = self.modulus.m();
        let div_a = div_set(&self.modulus, &self.a, m)?;
        let div_b = div_set(&self.modulus, &self.b, m)?;
        Ok(VerifiedTiling { inst: self, div_a, div_b })
    }
}

/// `Div_N(A)` or `Div_N(A_1, A_2)`: the gcds `(a - a', N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DivSet {
    pub scale: u64,
    /// Increasing.
    pub members: Vec<u64>,
}

impl DivSet {
    pub fn contains(&self, d: u64) -> bool {
        self.members.binary_search(&d).is_ok()
    }
}

/// `Div_N(A) = {(a - a', N) : a, a' ∈ A}`.
pub fn div_set(modulus: &Modulus, a: &Multiset, n: u64) -> Result<DivSet> {
    div_set_local(modulus, a, a, n)
}

/// `Div_N(A_1, A_2) = {(a_1 - a_2, N) : a_1 ∈ A_1, a_2 ∈ A_2}`.
pub fn div_set_local(modulus: &Modulus, a1: &Multiset, a2: &Multiset, n: u64) -> Result<DivSet> {
    modulus.check_divisor(n)?;
    let m = modulus.order();
    let mut seen = vec![false; modulus.divisors().len()];
    let s2 = a2.support();
    for x in a1.support() {
        for &y in &s2 {
            let g = gcd(((x + m - y) % m) as u64, n);
            seen[modulus.divisor_index(g).expect("gcd divides m")] = true;
        }
    }
    let members = modulus
        .divisors()
        .iter()
        .zip(&seen)
        .filter(|(_, &s)| s)
        .map(|(&d, _)| d)
        .collect();
    Ok(DivSet { scale: n, members })
}

/// The N-box of a multiset at `x`: `𝔸^N_m[x]` for every `m | N`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoxView {
    pub scale: u64,
    pub anchor: usize,
    /// `(m, 𝔸^N_m[x])` for each divisor `m` of `N`, increasing in `m`.
    pub entries: Vec<(u64, i64)>,
}

impl BoxView {
    pub fn get(&self, m: u64) -> i64 {
        self.entries
            .binary_search_by_key(&m, |&(d, _)| d)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn column_sum(&self) -> i64 {
        self.entries.iter().map(|&(_, c)| c).sum()
    }
}

/// `𝔸^N_m[x | X] = Σ_{a ∈ X : (x - a, N) = m} w_A(a)`; no window means `X = Z_M`.
pub fn box_view(
    modulus: &Modulus,
    a: &Multiset,
    n: u64,
    x: usize,
    window: Option<&Multiset>,
) -> Result<BoxView> {
    modulus.check_divisor(n)?;
    let m = modulus.order();
    let divs: Vec<u64> = modulus.divisors().iter().copied().filter(|d| n % d == 0).collect();
    let mut counts = vec![0i64; divs.len()];
    for (y, &w) in a.weights().iter().enumerate() {
        if w == 0 || window.is_some_and(|win| !win.contains(y)) {
            continue;
        }
        let g = gcd(((x + m - y) % m) as u64, n);
        counts[divs.binary_search(&g).expect("gcd divides N")] += w;
    }
    Ok(BoxView { scale: n, anchor: x, entries: divs.into_iter().zip(counts).collect() })
}

/// `box_view` at every anchor `x` in `Z_M`, in anchor order.
pub fn box_views(modulus: &Modulus, a: &Multiset, n: u64) -> Result<Vec<BoxView>> {
    modulus.check_divisor(n)?;
    let m = modulus.order();
    let divs: Vec<u64> = modulus.divisors().iter().copied().filter(|d| n % d == 0).collect();
    let slot: Vec<usize> =
        (0..m).map(|t| divs.binary_search(&gcd(t as u64, n)).expect("gcd divides N")).collect();
    let support: Vec<(usize, i64)> = a.weights().iter().copied().enumerate().filter(|&(_, w)| w != 0).collect();
    Ok((0..m)
        .map(|x| {
            let mut counts = vec![0i64; divs.len()];
            for &(y, w) in &support {
                counts[slot[(x + m - y) % m]] += w;
            }
            BoxView { scale: n, anchor: x, entries: divs.iter().copied().zip(counts).collect() }
        })
        .collect())
}

/// `⟨𝔸^N[x], 𝔹^N[y]⟩ = Σ_{m|N} 𝔸_m[x] 𝔹_m[y] / φ(N/m)`.
pub fn box_product(modulus: &Modulus, abox: &BoxView, bbox: &BoxView) -> Result<Ratio> {
    if abox.scale != bbox.scale {
        return Err(Error::ModulusMismatch { left: abox.scale, right: bbox.scale });
    }
    let n = abox.scale;
    let den = abox.entries.iter().fold(1i128, |l, &(d, _)| {
        let q = modulus.phi(n / d);
        l / gcd(l as u64, q) as i128 * q as i128
    });
    let mut num = 0i128;
    for (&(d, ca), &(_, cb)) in abox.entries.iter().zip(&bbox.entries) {
        if ca != 0 && cb != 0 {
            num += ca as i128 * cb as i128 * (den / modulus.phi(n / d) as i128);
        }
    }
    Ok(Ratio::new(num, den))
}

fn span_contains(modulus: &Modulus, x: usize, other: usize, y: usize) -> bool {
    let exps = modulus.exponents_of(modulus.diff_gcd(x, other));
    let dy = modulus.diff_gcd(x, y);
    exps.iter().enumerate().any(|(nu, &alpha)| {
        let (p, n) = modulus.factors()[nu];
        alpha < n && dy % p.pow(alpha + 1) == 0
    })
}

/// `Span(x, x') = ∪_{ν : α_ν < n_ν} Π(x, p_ν^{α_ν + 1})` where `(x - x', M) = ∏ p_ν^{α_ν}`.
/// Empty when `x = x'`.
pub fn span(modulus: &Modulus, x: usize, other: usize) -> Vec<usize> {
    (0..modulus.order()).filter(|&y| span_contains(modulus, x, other, y)).collect()
}

/// `Span(x, x') ∪ Span(x', x)`.
pub fn bispan(modulus: &Modulus, x: usize, other: usize) -> Vec<usize> {
    (0..modulus.order())
        .filter(|&y| span_contains(modulus, x, other, y) || span_contains(modulus, other, x, y))
        .collect()
}

pub fn bispan_contains(modulus: &Modulus, x: usize, other: usize, y: usize) -> bool {
    span_contains(modulus, x, other, y) || span_contains(modulus, other, x, y)
}

/// A tiling whose three verifiers agreed, with `Div(A)` and `Div(B)` cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedTiling {
    inst: TilingInstance,
    div_a: DivSet,
    div_b: DivSet,
}

impl VerifiedTiling {
    pub fn instance(&self) -> &TilingInstance {
        &self.inst
    }

    pub fn modulus(&self) -> &Modulus {
        &self.inst.modulus
    }

    pub fn a(&self) -> &Multiset {
        &self.inst.a
    }

    pub fn b(&self) -> &Multiset {
        &self.inst.b
    }

    pub fn div_a(&self) -> &DivSet {
        &self.div_a
    }

    pub fn div_b(&self) -> &DivSet {
        &self.div_b
    }

    pub fn swapped(&self) -> Self {
        Self { inst: self.inst.swapped(), div_a: self.div_b.clone(), div_b: self.div_a.clone() }
    }

    pub fn into_instance(self) -> TilingInstance {
        self.inst
    }

    /// `A_x`, or `A_{x,y}` when `y` is given.
    pub fn saturating_set(&self, x: usize, y: Option<usize>) -> Vec<usize> {
        let modulus = self.modulus();
        let x = x % modulus.order();
        match y {
            None => self
                .a()
                .support()
                .into_iter()
                .filter(|&a| self.div_b.contains(modulus.diff_gcd(x, a)))
                .collect(),
            Some(y) => {
                let targets: Vec<u64> = {
                    let mut t: Vec<u64> =
                        self.b().support().iter().map(|&b| modulus.diff_gcd(y, b)).collect();
                    t.sort_unstable();
                    t.dedup();
                    t
                };
                self.a()
                    .support()
                    .into_iter()
                    .filter(|&a| targets.binary_search(&modulus.diff_gcd(x, a)).is_ok())
                    .collect()
            }
        }
    }

    /// An element of `A_x` outside `⋂_{a ∈ A, a ≠ x} Bispan(x, a)`, if any.
    pub fn bispan_violation(&self, x: usize) -> Option<usize> {
        let modulus = self.modulus();
        let sat = self.saturating_set(x, None);
        let a = self.a().support();
        sat.into_iter().find(|&s| {
            a.iter().any(|&other| other != x && !bispan_contains(modulus, x, other, s))
        })
    }

    pub fn check_bispan_bound(&self, x: usize) -> bool {
        self.bispan_violation(x).is_none()
    }

    /// Checks `𝔸_m[x] 𝔸_{m'}[x] 𝔹_m[y] 𝔹_{m'}[y] = 0` when the hypotheses hold.
    pub fn enhanced_divisor_exclusion(&self, x: usize, y: usize, m1: u64, m2: u64) -> Result<bool> {
        let modulus = self.modulus();
        exclusion_hypothesis(modulus, m1, m2)?;
        let big = modulus.m();
        let ab = box_view(modulus, self.a(), big, x, None)?;
        let bb = box_view(modulus, self.b(), big, y, None)?;
        Ok(exclusion_holds(&ab, &bb, m1, m2))
    }
}

/// Hypotheses of the enhanced divisor exclusion for the pair `(m, m')`: not both
/// equal to `M`, and in every direction the exponents differ or are both top.
pub fn exclusion_hypothesis(modulus: &Modulus, m1: u64, m2: u64) -> Result<()> {
    modulus.check_divisor(m1)?;
    modulus.check_divisor(m2)?;
    if m1 == modulus.m() && m2 == modulus.m() {
        return Err(inapplicable("both divisors equal M"));
    }
    let e1 = modulus.exponents_of(m1);
    let e2 = modulus.exponents_of(m2);
    for nu in 0..modulus.rank() {
        if e1[nu] == e2[nu] && e1[nu] != modulus.exponent(nu) {
            return Err(inapplicable("exponents agree below the top in some direction"));
        }
    }
    Ok(())
}

/// The exclusion itself on precomputed boxes `𝔸[x]`, `𝔹[y]`.
pub fn exclusion_holds(abox: &BoxView, bbox: &BoxView, m1: u64, m2: u64) -> bool {
    abox.get(m1) * abox.get(m2) * bbox.get(m1) * bbox.get(m2) == 0
}
