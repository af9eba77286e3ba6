//! Brute-force oracles: complements of a set and exhaustive tiling enumeration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::arith;
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::multiset::Multiset;
use crate::tiling::TilingInstance;

pub const DEFAULT_CAP: usize = 400;

const WORDS: usize = 7;

#[derive(Clone, Copy, PartialEq, Eq)]
struct Bits([u64; WORDS]);

impl Bits {
    const EMPTY: Self = Bits([0; WORDS]);

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, o: &Self) -> Self {
        let mut r = *self;
        for w in 0..WORDS {
            r.0[w] &= o.0[w];
        }
        r
    }

    fn and_not(&self, o: &Self) -> Self {
        let mut r = *self;
        for w in 0..WORDS {
            r.0[w] &= !o.0[w];
        }
        r
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first(&self) -> Option<usize> {
        self.0.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

/// Divisor bookkeeping for Z_m: `gcd(x, m)` as an index into the divisor list.
struct DivTable {
    m: usize,
    index_of_gcd: Vec<u8>,
}

impl DivTable {
    fn new(m: usize) -> Self {
        let divs = arith::divisors(m as u64);
        let index_of_gcd = (0..m)
            .map(|x| {
                let g = arith::gcd(x as u64, m as u64);
                divs.binary_search(&g).unwrap_or(0) as u8
            })
            .collect();
        Self { m, index_of_gcd }
    }

    /// Bit of `gcd(x - y, m)`.
    fn bit(&self, x: usize, y: usize) -> u64 {
        1 << self.index_of_gcd[(x + self.m - y) % self.m]
    }

    /// Mask of `Div(A) \ {m}`.
    fn mask(&self, a: &[usize]) -> u64 {
        let mut mask = 0;
        for (i, &x) in a.iter().enumerate() {
            for &y in &a[i + 1..] {
                mask |= self.bit(x, y);
            }
        }
        mask
    }
}

fn check_m(m: usize, cap: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::TrivialModulus);
    }
    if m > cap || m > WORDS * 64 {
        return Err(Error::TooLarge(alloc::format!("m = {m} exceeds the enumeration cap")));
    }
    Ok(())
}

fn sorted_set(m: usize, a: &[usize]) -> Result<Vec<usize>> {
    let mut v = a.to_vec();
    v.sort_unstable();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(Error::NotASet { element: w[0], weight: 2 });
        }
    }
    if let Some(&x) = v.iter().find(|&&x| x >= m) {
        return Err(Error::ElementOutOfRange { element: x as u64, m: m as u64 });
    }
    Ok(v)
}

fn complements_inner(m: usize, a: &[usize], table: &DivTable, limit: Option<usize>) -> Vec<Vec<usize>> {
    let k = a.len();
    if k == 0 || m % k != 0 {
        return Vec::new();
    }
    let forbidden = table.mask(a);
    let l = m / k;
    let mut out = Vec::new();
    let mut covered = Bits::EMPTY;
    let mut chosen: Vec<usize> = Vec::with_capacity(l);
    fn go(
        m: usize,
        a: &[usize],
        l: usize,
        forbidden: u64,
        table: &DivTable,
        covered: &mut Bits,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: Option<usize>,
    ) {
        if limit.is_some_and(|n| out.len() >= n) {
            return;
        }
        if chosen.len() == l {
            let mut b = chosen.clone();
            b.sort_unstable();
            out.push(b);
            return;
        }
        let mut free = *covered;
        for w in 0..WORDS {
            free.0[w] = !free.0[w];
        }
        let Some(r) = free.first() else { return };
        for &x in a {
            let b = (r + m - x) % m;
            if chosen.iter().any(|&c| table.bit(b, c) & forbidden != 0 || c == b) {
                continue;
            }
            if a.iter().any(|&y| covered.get((y + b) % m)) {
                continue;
            }
            let before = *covered;
            for &y in a {
                covered.set((y + b) % m);
            }
            chosen.push(b);
            go(m, a, l, forbidden, table, covered, chosen, out, limit);
            chosen.pop();
            *covered = before;
        }
    }
    // 0 ∈ B: start from the translate A + 0
    for &y in a {
        covered.set(y);
    }
    chosen.push(0);
    go(m, a, l, forbidden, table, &mut covered, &mut chosen, &mut out, limit);
    out.sort();
    out
}

/// Every `B ∋ 0` with `A ⊕ B = Z_m`, in lexicographic order.
pub fn find_complements(m: usize, a: &[usize]) -> Result<Vec<Vec<usize>>> {
    check_m(m, WORDS * 64)?;
    let a = sorted_set(m, a)?;
    Ok(complements_inner(m, &a, &DivTable::new(m), None))
}

/// Whether `A` tiles `Z_m`.
pub fn tiles(m: usize, a: &[usize]) -> Result<bool> {
    check_m(m, WORDS * 64)?;
    let a = sorted_set(m, a)?;
    Ok(!complements_inner(m, &a, &DivTable::new(m), Some(1)).is_empty())
}

/// Lexicographically least translate of `a` that contains 0.
pub fn normalize(m: usize, a: &[usize]) -> Vec<usize> {
    let mut s = a.to_vec();
    s.sort_unstable();
    translates(m, &s).min().unwrap_or_default()
}

/// The translates `s - s_i` of a sorted set, each sorted.
fn translates(m: usize, s: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let n = s.len();
    (0..n).map(move |i| (0..n).map(|k| (s[(i + k) % n] + m - s[i]) % m).collect())
}

/// What to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationTask {
    pub m: usize,
    /// `|A|`; must divide `m`.
    pub size: usize,
    pub cap: usize,
    /// At most this many complements per small-side tile, taken in search order.
    pub complement_cap: Option<usize>,
}

impl EnumerationTask {
    pub fn new(m: usize, size: usize) -> Self {
        Self { m, size, cap: DEFAULT_CAP, complement_cap: None }
    }
}

/// A normalized tiling pair: each side is the least translate containing 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TilingPair {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl TilingPair {
    pub fn to_instance(&self, m: usize) -> Result<TilingInstance> {
        let modulus = Modulus::from_order(m as u64)?;
        TilingInstance::new(modulus, Multiset::from_set(m, &self.a)?, Multiset::from_set(m, &self.b)?)
    }
}

/// Is there a set of `size` elements containing 0 whose differences avoid the divisor mask?
struct CliqueOracle {
    m: usize,
    l: usize,
    neighbours: Vec<Bits>,
    table: DivTable,
    memo: BTreeMap<u64, bool>,
}

impl CliqueOracle {
    fn new(m: usize, l: usize) -> Self {
        let table = DivTable::new(m);
        Self { m, l, neighbours: Vec::new(), table, memo: BTreeMap::new() }
    }

    fn feasible(&mut self, forbidden: u64) -> bool {
        if let Some(&v) = self.memo.get(&forbidden) {
            return v;
        }
        let m = self.m;
        self.neighbours = (0..m)
            .map(|x| {
                let mut b = Bits::EMPTY;
                for y in 0..m {
                    if y != x && self.table.bit(x, y) & forbidden == 0 {
                        b.set(y);
                    }
                }
                b
            })
            .collect();
        let start = self.neighbours[0];
        let v = self.l <= 1 || self.extend(start, 1);
        self.memo.insert(forbidden, v);
        v
    }

    fn extend(&self, cand: Bits, size: usize) -> bool {
        if size >= self.l {
            return true;
        }
        if size + cand.count() < self.l || size + colour_bound(&self.neighbours, cand) < self.l {
            return false;
        }
        let mut cand = cand;
        while let Some(v) = cand.first() {
            if size + cand.count() < self.l {
                return false;
            }
            if self.extend(cand.and(&self.neighbours[v]), size + 1) {
                return true;
            }
            cand.0[v / 64] &= !(1 << (v % 64));
        }
        false
    }
}

/// Greedy colouring of the candidate set; the number of colours bounds any clique in it.
fn colour_bound(neighbours: &[Bits], cand: Bits) -> usize {
    let mut rest = cand;
    let mut colours = 0;
    while !rest.is_empty() {
        colours += 1;
        let mut avail = rest;
        while let Some(v) = avail.first() {
            rest.0[v / 64] &= !(1 << (v % 64));
            avail = avail.and_not(&neighbours[v]);
            avail.0[v / 64] &= !(1 << (v % 64));
        }
    }
    colours
}

/// Every normalized tiling pair with `|A| = size`, in lexicographic order.
pub fn enumerate_tilings(task: &EnumerationTask) -> Result<Vec<TilingPair>> {
    let mut out = Vec::new();
    for_each_tiling(task, |p| out.push(p))?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Calls `f` on every normalized pair with `|A| = size`. Pairs arrive grouped by
/// small-side tile and may repeat across groups.
pub fn for_each_tiling(task: &EnumerationTask, mut f: impl FnMut(TilingPair)) -> Result<()> {
    for small in small_tiles(task)? {
        for pair in pairs_for(task, &small) {
            f(pair);
        }
    }
    Ok(())
}

fn small_side(task: &EnumerationTask) -> Result<usize> {
    let m = task.m;
    check_m(m, task.cap)?;
    if task.size == 0 || m % task.size != 0 {
        return Err(Error::Precondition(alloc::format!("|A| = {} does not divide {m}", task.size)));
    }
    Ok(task.size.min(m / task.size))
}

/// All normalized tiles of the smaller of the two sizes `|A|`, `m/|A|`.
pub fn small_tiles(task: &EnumerationTask) -> Result<Vec<Vec<usize>>> {
    let k = small_side(task)?;
    let mut out = Vec::new();
    for_each_small_tile(task.m, k, |t, _| out.push(t.to_vec()));
    Ok(out)
}

/// The normalized pairs built on one small-side tile, sorted.
pub fn pairs_for(task: &EnumerationTask, small: &[usize]) -> Vec<TilingPair> {
    let m = task.m;
    let swap = small.len() != task.size;
    let table = DivTable::new(m);
    let mut seen = BTreeSet::new();
    let mut partners = Vec::new();
    for mut b in complements_inner(m, small, &table, task.complement_cap) {
        b.sort_unstable();
        if seen.contains(&b) {
            continue;
        }
        let class: Vec<Vec<usize>> = translates(m, &b).collect();
        partners.push(class.iter().min().unwrap().clone());
        seen.extend(class);
    }
    partners.sort();
    partners.dedup();
    partners
        .into_iter()
        .map(|big| {
            if swap {
                TilingPair { a: big, b: small.to_vec() }
            } else {
                TilingPair { a: small.to_vec(), b: big }
            }
        })
        .collect()
}

/// Normalized tiles of size `k ≤ √m`, found by extending sets containing 0 and pruning
/// whenever no set of size `m/k` can avoid the differences seen so far.
fn for_each_small_tile(m: usize, k: usize, mut f: impl FnMut(&[usize], &DivTable)) {
    let l = m / k;
    let mut oracle = CliqueOracle::new(m, l);
    let table = DivTable::new(m);
    let mut cur = vec![0usize];
    fn go(
        m: usize,
        k: usize,
        cur: &mut Vec<usize>,
        mask: u64,
        oracle: &mut CliqueOracle,
        table: &DivTable,
        f: &mut dyn FnMut(&[usize], &DivTable),
    ) {
        if cur.len() == k {
            if normalize(m, cur) == *cur {
                f(cur, table);
            }
            return;
        }
        let last = *cur.last().unwrap_or(&0);
        let need = k - cur.len();
        for x in last + 1..=m - need {
            let mut next = mask;
            for &y in cur.iter() {
                next |= table.bit(x, y);
            }
            if !oracle.feasible(next) {
                continue;
            }
            cur.push(x);
            go(m, k, cur, next, oracle, table, f);
            cur.pop();
        }
    }
    if k == 1 {
        f(&cur, &table);
        return;
    }
    go(m, k, &mut cur, 0, &mut oracle, &table, &mut f);
}
