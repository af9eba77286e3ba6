//! Brute-force references for small moduli (m < 64), written without the library.

use std::collections::HashMap;

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn divisors(m: usize) -> Vec<usize> {
    (1..=m).filter(|d| m % d == 0).collect()
}

/// Φ_n by the literal chain `(X^n - 1) / ∏_{d | n, d < n} Φ_d`.
pub fn cyclotomic(n: usize, memo: &mut HashMap<usize, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in divisors(n) {
        if d < n {
            let den = cyclotomic(d, memo);
            num = divide_exact(&num, &den);
        }
    }
    memo.insert(n, num.clone());
    num
}

fn divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i64; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn] / den[dn];
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    q
}

/// `X^e mod Φ_s` for every `s | m`, `s > 1`, and every exponent `e < m`.
pub struct Residues {
    pub m: usize,
    pub divs: Vec<usize>,
    table: Vec<Vec<Vec<i64>>>,
}

impl Residues {
    pub fn new(m: usize) -> Self {
        let mut memo = HashMap::new();
        let divs: Vec<usize> = divisors(m).into_iter().filter(|&s| s > 1).collect();
        let table = divs
            .iter()
            .map(|&s| {
                let phi = cyclotomic(s, &mut memo);
                let deg = phi.len() - 1;
                let mut r = vec![0i64; deg];
                r[0] = 1;
                let mut rows = Vec::with_capacity(m);
                for _ in 0..m {
                    rows.push(r.clone());
                    let carry = r[deg - 1];
                    for i in (1..deg).rev() {
                        r[i] = r[i - 1];
                    }
                    r[0] = 0;
                    for i in 0..deg {
                        r[i] -= carry * phi[i];
                    }
                }
                rows
            })
            .collect();
        Self { m, divs, table }
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.divs.len()) - 1
    }

    /// Bit `i` set when `Φ_{divs[i]}` divides `Σ w X^e`.
    pub fn spectrum(&self, weights: &[i64]) -> u64 {
        let mut mask = 0;
        for (i, rows) in self.table.iter().enumerate() {
            let mut acc = vec![0i64; rows[0].len()];
            for (e, &w) in weights.iter().enumerate() {
                if w != 0 {
                    for (a, r) in acc.iter_mut().zip(&rows[e % self.m]) {
                        *a += w * r;
                    }
                }
            }
            if acc.iter().all(|&a| a == 0) {
                mask |= 1 << i;
            }
        }
        mask
    }

    pub fn set_spectrum(&self, set: &[usize]) -> u64 {
        let mut w = vec![0i64; self.m];
        for &x in set {
            w[x] += 1;
        }
        self.spectrum(&w)
    }

    fn vector(&self, required: u64, e: usize) -> Vec<i16> {
        let mut v = Vec::new();
        for (i, rows) in self.table.iter().enumerate() {
            if required >> i & 1 == 1 {
                v.extend(rows[e].iter().map(|&c| c as i16));
            }
        }
        v
    }

    /// Every `B ∋ 0` with `|B| = l` and `Φ_s | B` for each `s` in `required`,
    /// by meeting in the middle on the two halves of `{1, …, m-1}`.
    pub fn partners(&self, required: u64, l: usize) -> Vec<Vec<usize>> {
        let m = self.m;
        let h = (m - 1) / 2;
        let vecs: Vec<Vec<i16>> = (0..m).map(|e| self.vector(required, e)).collect();
        let dim = vecs[0].len();
        let mut right: HashMap<(usize, Vec<i16>), Vec<u64>> = HashMap::new();
        let mut acc = vec![0i16; dim];
        halves(&vecs, h + 1, m, 0, l - 1, &mut acc, &mut |cnt, mask, v| {
            right.entry((cnt, v.to_vec())).or_default().push(mask);
        });
        let mut out = Vec::new();
        let mut acc = vecs[0].clone();
        halves(&vecs, 1, h + 1, 0, l - 1, &mut acc, &mut |cnt, mask, v| {
            let key = (l - 1 - cnt, v.iter().map(|&c| -c).collect::<Vec<_>>());
            if let Some(rs) = right.get(&key) {
                for &r in rs {
                    out.push(bits_to_set(mask | r | 1));
                }
            }
        });
        out.sort();
        out
    }
}

fn halves(
    vecs: &[Vec<i16>],
    from: usize,
    to: usize,
    mask: u64,
    budget: usize,
    acc: &mut Vec<i16>,
    f: &mut dyn FnMut(usize, u64, &[i16]),
) {
    f(mask.count_ones() as usize, mask, acc);
    if budget == 0 {
        return;
    }
    for e in from..to {
        for (a, v) in acc.iter_mut().zip(&vecs[e]) {
            *a += v;
        }
        halves(vecs, e + 1, to, mask | 1 << e, budget - 1, acc, f);
        for (a, v) in acc.iter_mut().zip(&vecs[e]) {
            *a -= v;
        }
    }
}

pub fn bits_to_set(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn rotate(mask: u64, b: usize, m: usize) -> u64 {
    let full = (1u64 << m) - 1;
    if b == 0 {
        mask
    } else {
        ((mask << b) | (mask >> (m - b))) & full
    }
}

/// Every `B ∋ 0` with `A + B` an exact cover of `Z_m`.
pub fn complements(m: usize, a: &[usize]) -> Vec<Vec<usize>> {
    fn go(m: usize, a: &[usize], amask: u64, covered: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let full = (1u64 << m) - 1;
        if covered == full {
            let mut b = cur.clone();
            b.sort_unstable();
            out.push(b);
            return;
        }
        let z = (!covered & full).trailing_zeros() as usize;
        for &x in a {
            let b = (z + m - x) % m;
            let t = rotate(amask, b, m);
            if t & covered == 0 {
                cur.push(b);
                go(m, a, amask, covered | t, cur, out);
                cur.pop();
            }
        }
    }
    let amask = a.iter().fold(0u64, |s, &x| s | 1 << x);
    if a.len() != amask.count_ones() as usize || m % a.len() != 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    go(m, a, amask, amask, &mut vec![0], &mut out);
    out.sort();
    out
}

/// Indices into `divisors(m)` of `(a - a', m)` over distinct pairs.
pub fn difference_mask(m: usize, set: &[usize]) -> u64 {
    let divs = divisors(m);
    let mut mask = 0;
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[..i] {
            let g = gcd((x + m - y) % m, m);
            mask |= 1 << divs.iter().position(|&d| d == g).unwrap();
        }
    }
    mask
}

/// Every `B ∋ 0` with `|B| = l` whose differences avoid the divisor mask.
pub fn cliques(m: usize, forbidden: u64, l: usize) -> Vec<Vec<usize>> {
    let divs = divisors(m);
    let adj: Vec<u64> = (0..m)
        .map(|x| {
            (0..m)
                .filter(|&y| {
                    let g = gcd((x + m - y) % m, m);
                    y != x && forbidden >> divs.iter().position(|&d| d == g).unwrap() & 1 == 0
                })
                .fold(0u64, |s, y| s | 1 << y)
        })
        .collect();
    fn go(adj: &[u64], cand: u64, cur: &mut Vec<usize>, l: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        if (cand.count_ones() as usize) < l - cur.len() {
            return;
        }
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            cur.push(v);
            go(adj, rest & adj[v], cur, l, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let start = adj[0] & !1;
    go(&adj, start, &mut vec![0], l, &mut out);
    out
}

/// The lexicographically least translate of `set` containing 0. For sorted
/// sets of one size, lexicographic order is reversed order of bit-reversed masks.
pub fn normalize(m: usize, set: &[usize]) -> Vec<usize> {
    let mask = set.iter().fold(0u64, |s, &x| s | 1 << x);
    let best = set
        .iter()
        .map(|&t| rotate(mask, (m - t) % m, m))
        .max_by_key(|r| r.reverse_bits())
        .unwrap_or(0);
    bits_to_set(best)
}

/// Calls `f` on every set of size `k` containing 0, in lexicographic order.
pub fn for_each_set(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn go(m: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let last = *cur.last().unwrap();
        for x in last + 1..=m - (k - cur.len()) {
            cur.push(x);
            go(m, k, cur, f);
            cur.pop();
        }
    }
    go(m, k, &mut vec![0], &mut f);
}

/// Every normalized tiling pair `(A, B)` with `|A| = k ≤ m/k`.
pub fn tiling_pairs(m: usize, k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for_each_set(m, k, |a| {
        if normalize(m, a) != a {
            return;
        }
        for b in complements(m, a) {
            out.push((a.to_vec(), normalize(m, &b)));
        }
    });
    out.sort();
    out.dedup();
    out
}
