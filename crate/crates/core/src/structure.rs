//! Fibering structure of tiles on `D(M)`-grids: per-grid fibering, the sets
//! `𝓘, 𝓙, 𝓚`, diagonal boxes, corners and the missing-difference taxonomy.
//!
//! A grid `Λ = Λ(x, D(M))` is identified with `Z_{p_1} × … × Z_{p_K}`: the point
//! with local coordinates `λ` is `base + Σ λ_ν M/p_ν`, where `base` is the least
//! element of the grid. Moving along axis ν walks an M-fiber in direction ν.

use alloc::vec;
use alloc::vec::Vec;

use crate::cyclo;
use crate::error::{inapplicable, precondition, Error, Result};
use crate::modulus::Modulus;
use crate::multiset::Multiset;
use crate::tiling::VerifiedTiling;

/// The restriction `A ∩ Λ` in local coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridView {
    m: usize,
    base: usize,
    dims: Vec<usize>,
    steps: Vec<usize>,
    strides: Vec<usize>,
    weights: Vec<i64>,
}

impl GridView {
    /// `A ∩ Λ(x, D(M))` for `A` on Z_M.
    pub fn new(modulus: &Modulus, a: &Multiset, x: usize) -> Result<Self> {
        if a.order() as u64 != modulus.m() {
            return Err(Error::ModulusMismatch { left: modulus.m(), right: a.order() as u64 });
        }
        let m = modulus.order();
        let d = modulus.d_of(modulus.m()) as usize;
        let base = x % d;
        let dims: Vec<usize> = modulus.factors().iter().map(|&(p, _)| p as usize).collect();
        let steps: Vec<usize> = (0..modulus.rank()).map(|nu| modulus.fiber_scale(nu) as usize).collect();
        let mut strides = vec![1usize; dims.len()];
        for nu in 1..dims.len() {
            strides[nu] = strides[nu - 1] * dims[nu - 1];
        }
        let size = dims.iter().product();
        let mut view = Self { m, base, dims, steps, strides, weights: vec![0; size] };
        for idx in 0..size {
            view.weights[idx] = a.weight(view.global(idx));
        }
        Ok(view)
    }

    /// Same grid with replaced local weights.
    pub fn with_weights(&self, weights: Vec<i64>) -> Self {
        assert_eq!(weights.len(), self.weights.len());
        Self { weights, ..self.clone() }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, idx: usize) -> i64 {
        self.weights[idx]
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|&w| w == 0)
    }

    /// Local indices with nonzero weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.weights[i] != 0).collect()
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        self.dims.iter().zip(&self.strides).map(|(&p, &s)| idx / s % p).collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    pub fn coord(&self, idx: usize, nu: usize) -> usize {
        idx / self.strides[nu] % self.dims[nu]
    }

    /// Index reached by setting coordinate ν to `value`.
    pub fn with_coord(&self, idx: usize, nu: usize, value: usize) -> usize {
        idx - self.coord(idx, nu) * self.strides[nu] + value * self.strides[nu]
    }

    /// Element of Z_M at a local index.
    pub fn global(&self, idx: usize) -> usize {
        let off: usize = self
            .coords(idx)
            .iter()
            .zip(&self.steps)
            .map(|(&c, &s)| c * s % self.m)
            .sum();
        (self.base + off) % self.m
    }

    /// Local index of an element of the grid, if it lies on it.
    pub fn local(&self, y: usize) -> Option<usize> {
        (0..self.size()).find(|&i| self.global(i) == y % self.m)
    }

    /// The fiber through `idx` in direction ν, as local indices ordered by coordinate.
    pub fn line(&self, idx: usize, nu: usize) -> Vec<usize> {
        (0..self.dims[nu]).map(|t| self.with_coord(idx, nu, t)).collect()
    }

    /// Common nonzero value of the weights if they only take values in `{0, c0}`.
    pub fn bin_value(&self) -> Option<i64> {
        let mut c0 = None;
        for &w in &self.weights {
            if w == 0 {
                continue;
            }
            match c0 {
                None => c0 = Some(w),
                Some(c) if c != w => return None,
                _ => {}
            }
        }
        c0
    }

    /// Roots (coordinate ν equal to 0) of the fibers making up `A ∩ Λ`, when
    /// `A ∩ Λ` is a disjoint union of equal-multiplicity fibers in direction ν.
    pub fn fibered(&self, nu: usize) -> Option<Vec<usize>> {
        let mut roots = Vec::new();
        let mut common = None;
        for idx in 0..self.size() {
            if self.coord(idx, nu) != 0 {
                continue;
            }
            let line = self.line(idx, nu);
            let w = self.weights[line[0]];
            if line.iter().any(|&i| self.weights[i] != w) {
                return None;
            }
            if w != 0 {
                if *common.get_or_insert(w) != w {
                    return None;
                }
                roots.push(idx);
            }
        }
        Some(roots)
    }

    /// Is a whole fiber through `idx` in direction ν carried by the support?
    pub fn full_line(&self, idx: usize, nu: usize) -> bool {
        self.line(idx, nu).iter().all(|&i| self.weights[i] != 0)
    }

    /// `Div(A ∩ Λ)` at the top scale, i.e. the divisors `D(M) | m | M` realised
    /// by differences inside the grid, increasing.
    pub fn top_divisors_present(&self, modulus: &Modulus) -> Vec<u64> {
        let support = self.support();
        let mut present: Vec<u64> = Vec::new();
        for (n, &x) in support.iter().enumerate() {
            for &y in &support[n..] {
                present.push(self.diff_divisor(modulus, x, y));
            }
        }
        present.sort_unstable();
        present.dedup();
        present
    }

    /// `(x - y, M)` for two grid points: `M / ∏_{λ_ν differ} p_ν`.
    pub fn diff_divisor(&self, modulus: &Modulus, x: usize, y: usize) -> u64 {
        let mut d = modulus.m();
        for nu in 0..self.rank() {
            if self.coord(x, nu) != self.coord(y, nu) {
                d /= self.dims[nu] as u64;
            }
        }
        d
    }

    /// Restriction to the plane through `idx` orthogonal to ν (coordinate ν fixed).
    pub fn plane_points(&self, idx: usize, nu: usize) -> Vec<usize> {
        let c = self.coord(idx, nu);
        (0..self.size()).filter(|&i| self.coord(i, nu) == c).collect()
    }

    /// Is the plane through `idx` orthogonal to `normal` fibered in direction ν?
    fn plane_fibered(&self, idx: usize, normal: usize, nu: usize) -> bool {
        self.plane_points(idx, normal).into_iter().filter(|&i| self.coord(i, nu) == 0).all(|i| {
            let line = self.line(i, nu);
            let w = self.weights[line[0]];
            line.iter().all(|&t| self.weights[t] == w)
        })
    }

    fn as_multiset(&self) -> Multiset {
        let mut w = vec![0i64; self.m];
        for idx in 0..self.size() {
            w[self.global(idx)] = self.weights[idx];
        }
        Multiset::from_weights(w)
    }
}

/// Fibering of `A ∩ Λ` in each direction.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridFiberReport {
    pub base: usize,
    pub empty: bool,
    pub fibered: Vec<bool>,
    /// Global roots of the fibers, per direction (empty when not fibered).
    pub roots: Vec<Vec<usize>>,
}

impl GridFiberReport {
    pub fn fibered_somewhere(&self) -> bool {
        self.fibered.iter().any(|&f| f)
    }
}

pub fn grid_report(view: &GridView) -> GridFiberReport {
    let mut fibered = Vec::new();
    let mut roots = Vec::new();
    for nu in 0..view.rank() {
        match view.fibered(nu) {
            Some(r) => {
                fibered.push(true);
                roots.push(r.into_iter().map(|i| view.global(i)).collect());
            }
            None => {
                fibered.push(false);
                roots.push(Vec::new());
            }
        }
    }
    GridFiberReport { base: view.base(), empty: view.is_empty(), fibered, roots }
}

/// Is `A ∩ Λ(x, D(M))` M-fibered in direction ν? Returns the fiber roots too.
pub fn is_m_fibered_on_grid(
    modulus: &Modulus,
    a: &Multiset,
    x: usize,
    nu: usize,
) -> Result<(bool, Vec<usize>)> {
    modulus.check_direction(nu)?;
    let view = GridView::new(modulus, a, x)?;
    Ok(match view.fibered(nu) {
        Some(r) => (true, r.into_iter().map(|i| view.global(i)).collect()),
        None => (false, Vec::new()),
    })
}

/// Reports for every nonempty `D(M)`-grid, ordered by base.
pub fn grid_reports(modulus: &Modulus, a: &Multiset) -> Result<Vec<GridFiberReport>> {
    let d = modulus.d_of(modulus.m()) as usize;
    let mut out = Vec::new();
    for x in 0..d {
        let view = GridView::new(modulus, a, x)?;
        if !view.is_empty() {
            out.push(grid_report(&view));
        }
    }
    Ok(out)
}

/// Every nonempty `D(M)`-grid of `A` is M-fibered in at least one direction.
pub fn fibered_on_grids(modulus: &Modulus, a: &Multiset) -> Result<bool> {
    Ok(grid_reports(modulus, a)?.iter().all(|r| r.fibered_somewhere()))
}

fn require_three(modulus: &Modulus) -> Result<()> {
    if modulus.rank() == 3 {
        Ok(())
    } else {
        Err(precondition("exactly three distinct primes required"))
    }
}

/// Assumptions under which the fibered classification applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FiberedAssumptions {
    /// Odd square modulus `p_i² p_j² p_k²`, `|A| = |B| = p_i p_j p_k`, `Φ_M | A`,
    /// `A` fibered on `D(M)`-grids.
    pub f: bool,
    /// (F) with `𝓘, 𝓙, 𝓚` pairwise disjoint.
    pub f1: bool,
    /// (F), empty triple intersection, some pairwise intersection nonempty.
    pub f2: bool,
    /// (F), one set empty and both differences of the other two nonempty.
    pub f3: bool,
}

/// The sets `𝓘, 𝓙, 𝓚` of elements whose whole M-fiber in the given direction lies in `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IjkPartition {
    pub sets: [Vec<usize>; 3],
    /// Sizes of `S_ν ∩ S_κ`, indexed by direction pairs.
    pub pairwise: [[usize; 3]; 3],
    pub triple: Vec<usize>,
    /// `A = 𝓘 ∪ 𝓙 ∪ 𝓚`.
    pub covers: bool,
    pub assumptions: FiberedAssumptions,
}

impl IjkPartition {
    pub fn empty_direction(&self) -> Option<usize> {
        (0..3).find(|&nu| self.sets[nu].is_empty())
    }
}

/// Elements of `A` whose M-fiber in direction ν lies in `A`.
pub fn fiber_members(modulus: &Modulus, a: &Multiset, nu: usize) -> Vec<usize> {
    let m = modulus.order();
    let step = modulus.fiber_scale(nu) as usize;
    let p = modulus.prime(nu) as usize;
    a.support()
        .into_iter()
        .filter(|&x| (1..p).all(|t| a.contains((x + t * step) % m)))
        .collect()
}

pub fn ijk_partition(vt: &VerifiedTiling) -> Result<IjkPartition> {
    let modulus = vt.modulus();
    require_three(modulus)?;
    let a = vt.a();
    let sets = [0, 1, 2].map(|nu| fiber_members(modulus, a, nu));
    let inter = |x: &[usize], y: &[usize]| -> Vec<usize> {
        x.iter().copied().filter(|e| y.binary_search(e).is_ok()).collect()
    };
    let mut pairwise = [[0usize; 3]; 3];
    for u in 0..3 {
        for v in 0..3 {
            pairwise[u][v] = inter(&sets[u], &sets[v]).len();
        }
    }
    let triple = inter(&inter(&sets[0], &sets[1]), &sets[2]);
    let support = a.support();
    let covers = support.iter().all(|x| sets.iter().any(|s| s.binary_search(x).is_ok()));
    let odd_square = modulus.factors().iter().all(|&(p, n)| p != 2 && n == 2);
    let rad: i64 = modulus.factors().iter().map(|&(p, _)| p as i64).product();
    let f = odd_square
        && a.total() == rad
        && vt.b().total() == rad
        && cyclo::phi_divides(modulus, modulus.m(), a)?
        && fibered_on_grids(modulus, a)?;
    let disjoint = (0..3).all(|u| (0..3).all(|v| u == v || pairwise[u][v] == 0));
    let some_pair = (0..3).any(|u| (0..3).any(|v| u != v && pairwise[u][v] > 0));
    let f3_shape = (0..3).any(|u| {
        let (v, w) = ((u + 1) % 3, (u + 2) % 3);
        sets[u].is_empty()
            && pairwise[v][v] > pairwise[v][w]
            && pairwise[w][w] > pairwise[v][w]
    });
    let assumptions = FiberedAssumptions {
        f,
        f1: f && disjoint,
        f2: f && triple.is_empty() && some_pair,
        f3: f && f3_shape,
    };
    Ok(IjkPartition { sets, pairwise, triple, covers, assumptions })
}

/// A structure found on a grid, with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum StructureFinding {
    /// `(I × J × K) ∪ (Iᶜ × Jᶜ × Kᶜ)` in local coordinates.
    DiagonalBoxes { base: usize, boxes: [Vec<usize>; 3] },
    Corner { direction: usize, a: usize, partner: usize },
    ExtendedCorner { direction: usize, a: usize, partner: usize },
    /// `x ∉ A` sees a full fiber in `direction` and a full orthogonal plane.
    FullPlane { direction: usize, x: usize },
    /// Points `x_l` along `direction`; `A ∩ Λ` is the punctured fibers through
    /// `x_l` in the first other direction for `l ∈ first`, second otherwise.
    AlmostCorner { direction: usize, points: Vec<usize>, first: Vec<usize>, second: Vec<usize> },
    EvenCorner { direction: usize, a: usize, partner: usize },
    EvenDiagonalBoxes { base: usize, boxes: [Vec<usize>; 3] },
    None,
}

impl StructureFinding {
    pub fn is_none(&self) -> bool {
        matches!(self, StructureFinding::None)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            StructureFinding::DiagonalBoxes { .. } => "diagonal-boxes",
            StructureFinding::Corner { .. } => "corner",
            StructureFinding::ExtendedCorner { .. } => "extended-corner",
            StructureFinding::FullPlane { .. } => "full-plane",
            StructureFinding::AlmostCorner { .. } => "almost-corner",
            StructureFinding::EvenCorner { .. } => "even-corner",
            StructureFinding::EvenDiagonalBoxes { .. } => "even-diagonal-boxes",
            StructureFinding::None => "none",
        }
    }

    /// Re-checks the witness against the defining conditions on `view`.
    pub fn revalidate(&self, modulus: &Modulus, view: &GridView) -> bool {
        match self {
            StructureFinding::DiagonalBoxes { boxes, .. } => boxes_contained(view, boxes),
            StructureFinding::EvenDiagonalBoxes { boxes, .. } => {
                boxes_contained(view, boxes) && box_points(view, boxes).len() == view.support().len()
            }
            StructureFinding::Corner { direction, a, partner }
            | StructureFinding::EvenCorner { direction, a, partner } => {
                match (view.local(*a), view.local(*partner)) {
                    (Some(x), Some(y)) => corner_at(view, *direction, x, y, false),
                    _ => false,
                }
            }
            StructureFinding::ExtendedCorner { direction, a, partner } => {
                match (view.local(*a), view.local(*partner)) {
                    (Some(x), Some(y)) => corner_at(view, *direction, x, y, true),
                    _ => false,
                }
            }
            StructureFinding::FullPlane { direction, x } => {
                view.local(*x).is_some_and(|i| full_plane_at(modulus, view, *direction, i))
            }
            StructureFinding::AlmostCorner { direction, points, first, second } => {
                let locals: Option<Vec<usize>> = points.iter().map(|&p| view.local(p)).collect();
                match locals {
                    Some(l) => almost_corner_matches(view, *direction, &l, first, second),
                    None => false,
                }
            }
            StructureFinding::None => true,
        }
    }
}

fn others(nu: usize) -> (usize, usize) {
    match nu {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn mask_to_vec(mask: u64, p: usize) -> Vec<usize> {
    (0..p).filter(|&t| mask >> t & 1 == 1).collect()
}

fn box_points(view: &GridView, boxes: &[Vec<usize>; 3]) -> Vec<usize> {
    let comp: Vec<Vec<usize>> = (0..3)
        .map(|nu| (0..view.dims[nu]).filter(|t| !boxes[nu].contains(t)).collect())
        .collect();
    let mut pts = Vec::new();
    for sets in [[&boxes[0], &boxes[1], &boxes[2]], [&comp[0], &comp[1], &comp[2]]] {
        for &u in sets[0] {
            for &v in sets[1] {
                for &w in sets[2] {
                    pts.push(view.index(&[u, v, w]));
                }
            }
        }
    }
    pts.sort_unstable();
    pts
}

fn boxes_contained(view: &GridView, boxes: &[Vec<usize>; 3]) -> bool {
    view.rank() == 3
        && (0..3).all(|nu| !boxes[nu].is_empty() && boxes[nu].len() < view.dims[nu])
        && box_points(view, boxes).iter().all(|&i| view.weight(i) != 0)
}

/// Lexicographically least `(I, J, K)` (compared as bitmasks) with
/// `(I×J×K) ∪ (Iᶜ×Jᶜ×Kᶜ) ⊆ A ∩ Λ` and all six sets nonempty.
pub fn detect_diagonal_boxes(view: &GridView) -> Result<StructureFinding> {
    if view.rank() != 3 {
        return Err(precondition("exactly three distinct primes required"));
    }
    let (p0, p1, p2) = (view.dims[0], view.dims[1], view.dims[2]);
    if p0 + p1 > 40 || p2 > 63 {
        return Err(Error::TooLarge("diagonal-box search on a grid this large".into()));
    }
    // column[u][v]: bitmask of third coordinates present above (u, v)
    let mut column = vec![vec![0u64; p1]; p0];
    for idx in view.support() {
        let c = view.coords(idx);
        column[c[0]][c[1]] |= 1 << c[2];
    }
    let full0 = (1u64 << p0) - 1;
    let full1 = (1u64 << p1) - 1;
    let full2 = (1u64 << p2) - 1;
    for imask in 1..full0 {
        for jmask in 1..full1 {
            let mut kmax = full2;
            let mut low = full2;
            for u in 0..p0 {
                for v in 0..p1 {
                    let in_i = imask >> u & 1 == 1;
                    let in_j = jmask >> v & 1 == 1;
                    if in_i && in_j {
                        kmax &= column[u][v];
                    } else if !in_i && !in_j {
                        low &= column[u][v];
                    }
                }
            }
            // K ⊆ kmax and Kᶜ ⊆ low, i.e. full \ low ⊆ K ⊆ kmax
            let forced = full2 & !low;
            let k = if forced != 0 {
                if forced & !kmax != 0 || forced == full2 {
                    continue;
                }
                forced
            } else {
                if kmax == 0 {
                    continue;
                }
                kmax & kmax.wrapping_neg()
            };
            if k == full2 {
                continue;
            }
            return Ok(StructureFinding::DiagonalBoxes {
                base: view.base(),
                boxes: [mask_to_vec(imask, p0), mask_to_vec(jmask, p1), mask_to_vec(k, p2)],
            });
        }
    }
    Ok(StructureFinding::None)
}

/// Corner condition at local points `a`, `partner` differing only in `nu`.
/// Strict: the planes hold exactly one fiber each; otherwise extended.
fn corner_at(view: &GridView, nu: usize, a: usize, partner: usize, extended: bool) -> bool {
    if view.rank() != 3 || a == partner || view.weight(a) == 0 || view.weight(partner) == 0 {
        return false;
    }
    if (0..3).any(|k| k != nu && view.coord(a, k) != view.coord(partner, k)) {
        return false;
    }
    let (j, k) = others(nu);
    if extended {
        view.plane_fibered(a, nu, j)
            && !view.plane_fibered(a, nu, k)
            && view.plane_fibered(partner, nu, k)
            && !view.plane_fibered(partner, nu, j)
    } else {
        let exact = |x: usize, dir: usize| {
            let line = view.line(x, dir);
            view.plane_points(x, nu).into_iter().all(|i| (view.weight(i) != 0) == line.contains(&i))
        };
        exact(a, j) && exact(partner, k)
    }
}

fn detect_corner_kind(view: &GridView, nu: usize, extended: bool) -> Result<StructureFinding> {
    if view.rank() != 3 {
        return Err(precondition("exactly three distinct primes required"));
    }
    let mut support = view.support();
    support.sort_by_key(|&i| view.global(i));
    for &a in &support {
        for t in 0..view.dims[nu] {
            let partner = view.with_coord(a, nu, t);
            if corner_at(view, nu, a, partner, extended) {
                let (a, partner) = (view.global(a), view.global(partner));
                return Ok(if extended {
                    StructureFinding::ExtendedCorner { direction: nu, a, partner }
                } else {
                    StructureFinding::Corner { direction: nu, a, partner }
                });
            }
        }
    }
    Ok(StructureFinding::None)
}

/// A `p_ν` corner: planes through `a` and `a_ν` orthogonal to ν hold exactly one
/// fiber each, in the two other directions.
pub fn detect_corner(view: &GridView, nu: usize) -> Result<StructureFinding> {
    detect_corner_kind(view, nu, false)
}

/// A `p_ν` extended corner: the two planes are fibered in one other direction each, but not the other.
pub fn detect_extended_corner(view: &GridView, nu: usize) -> Result<StructureFinding> {
    detect_corner_kind(view, nu, true)
}

/// Removes whole fibers from the grid until none is left. Points are scanned in
/// increasing order and directions in prime order; the scan restarts after every removal.
/// Fibers are reported by the point with coordinate 0 along their direction.
pub fn remove_fibers(view: &GridView) -> (GridView, Vec<(usize, usize)>) {
    let mut order: Vec<usize> = (0..view.size()).collect();
    order.sort_by_key(|&i| view.global(i));
    let mut w: Vec<i64> = view.weights.iter().map(|&x| i64::from(x != 0)).collect();
    let mut removed = Vec::new();
    'scan: loop {
        for &idx in &order {
            if w[idx] == 0 {
                continue;
            }
            for nu in 0..view.rank() {
                let line = view.line(idx, nu);
                if line.iter().all(|&i| w[i] != 0) {
                    for &i in &line {
                        w[i] = 0;
                    }
                    removed.push((view.global(line[0]), nu));
                    continue 'scan;
                }
            }
        }
        break;
    }
    let rest = view.weights.iter().zip(&w).map(|(&orig, &k)| if k != 0 { orig } else { 0 }).collect();
    (view.with_weights(rest), removed)
}

/// `A₀` as a multiset on Z_M.
pub fn remove_fibers_multiset(modulus: &Modulus, a: &Multiset, x: usize) -> Result<Multiset> {
    let view = GridView::new(modulus, a, x)?;
    Ok(remove_fibers(&view).0.as_multiset())
}

/// Writes the support of `A ∩ Λ` as a disjoint union of fibers, if possible.
pub fn fiber_decomposition(view: &GridView) -> Option<Vec<(usize, usize)>> {
    fn go(view: &GridView, w: &mut [bool], out: &mut Vec<(usize, usize)>) -> bool {
        let Some(idx) = w.iter().position(|&b| b) else {
            return true;
        };
        for nu in 0..view.rank() {
            let line = view.line(idx, nu);
            if line.iter().all(|&i| w[i]) {
                for &i in &line {
                    w[i] = false;
                }
                out.push((line[0], nu));
                if go(view, w, out) {
                    return true;
                }
                out.pop();
                for &i in &line {
                    w[i] = true;
                }
            }
        }
        false
    }
    let mut w: Vec<bool> = view.weights.iter().map(|&x| x != 0).collect();
    let mut out = Vec::new();
    if go(view, &mut w, &mut out) {
        Some(out.into_iter().map(|(i, nu)| (view.global(i), nu)).collect())
    } else {
        None
    }
}

/// Outcome of [`classify_unfibered_grid`].
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridClassification {
    pub base: usize,
    /// Divisors `D(M) | m | M` not realised inside the grid.
    pub missing: Vec<u64>,
    pub finding: StructureFinding,
    /// Fibers removed before the diagonal boxes were located, as `(root, direction)`.
    pub fibers: Vec<(usize, usize)>,
}

fn full_plane_at(modulus: &Modulus, view: &GridView, i: usize, x: usize) -> bool {
    if view.weight(x) != 0 {
        return false;
    }
    let Some(c0) = view.bin_value() else { return false };
    let (j, k) = others(i);
    let m = modulus.m();
    let pi = view.dims[i] as u64;
    let pjk = (view.dims[j] * view.dims[k]) as u64;
    let mut counts: Vec<(u64, i64)> = Vec::new();
    for y in view.support() {
        let d = view.diff_divisor(modulus, x, y);
        match counts.iter_mut().find(|(e, _)| *e == d) {
            Some(c) => c.1 += view.weight(y),
            None => counts.push((d, view.weight(y))),
        }
    }
    counts.iter().all(|&(d, c)| {
        if d == m / pi {
            c == c0 * (pi as i64 - 1)
        } else if d == m / pjk {
            c == c0 * ((view.dims[j] as i64 - 1) * (view.dims[k] as i64 - 1))
        } else {
            c == 0
        }
    }) && counts.iter().any(|&(d, _)| d == m / pi)
        && counts.iter().any(|&(d, _)| d == m / pjk)
}

fn almost_corner_matches(
    view: &GridView,
    k: usize,
    points: &[usize],
    first: &[usize],
    second: &[usize],
) -> bool {
    let (i, j) = others(k);
    if first.len() < 2 || second.len() < 2 || first.len() + second.len() != view.dims[k] {
        return false;
    }
    let Some(c0) = view.bin_value() else { return false };
    let mut expected = vec![0i64; view.size()];
    for (l, &x) in points.iter().enumerate() {
        if view.coord(x, k) != l {
            return false;
        }
        let dir = if first.contains(&l) {
            i
        } else if second.contains(&l) {
            j
        } else {
            return false;
        };
        for z in view.line(x, dir) {
            if z != x {
                expected[z] = c0;
            }
        }
    }
    expected == view.weights
}

fn find_almost_corner(view: &GridView, k: usize) -> StructureFinding {
    let (i, j) = others(k);
    for u in 0..view.dims[i] {
        for v in 0..view.dims[j] {
            let mut coords = vec![0usize; 3];
            coords[i] = u;
            coords[j] = v;
            let points: Vec<usize> = (0..view.dims[k])
                .map(|l| {
                    coords[k] = l;
                    view.index(&coords)
                })
                .collect();
            let mut first = Vec::new();
            let mut second = Vec::new();
            for (l, &x) in points.iter().enumerate() {
                let plane = view.plane_points(x, k);
                let occupied: Vec<usize> = plane.into_iter().filter(|&z| view.weight(z) != 0).collect();
                let punctured = |dir: usize| -> Vec<usize> {
                    let mut line: Vec<usize> = view.line(x, dir).into_iter().filter(|&z| z != x).collect();
                    line.sort_unstable();
                    line
                };
                if occupied == punctured(i) {
                    first.push(l);
                } else if occupied == punctured(j) {
                    second.push(l);
                }
            }
            if almost_corner_matches(view, k, &points, &first, &second) {
                return StructureFinding::AlmostCorner {
                    direction: k,
                    points: points.into_iter().map(|x| view.global(x)).collect(),
                    first,
                    second,
                };
            }
        }
    }
    StructureFinding::None
}

/// Every plane orthogonal to `k` is empty or exactly one fiber in one of the other directions.
fn corner_planes(view: &GridView, k: usize) -> bool {
    let (i, j) = others(k);
    let mut seen = [false, false];
    for l in 0..view.dims[k] {
        let mut coords = vec![0usize; 3];
        coords[k] = l;
        let anchor = view.index(&coords);
        let occupied: Vec<usize> =
            view.plane_points(anchor, k).into_iter().filter(|&z| view.weight(z) != 0).collect();
        if occupied.is_empty() {
            continue;
        }
        let is_line = |dir: usize| {
            let mut line = view.line(occupied[0], dir);
            line.sort_unstable();
            line == occupied
        };
        if is_line(i) {
            seen[0] = true;
        } else if is_line(j) {
            seen[1] = true;
        } else {
            return false;
        }
    }
    seen[0] && seen[1]
}

fn fallback(view: &GridView) -> Result<StructureFinding> {
    let found = detect_diagonal_boxes(view)?;
    if !found.is_none() {
        return Ok(found);
    }
    for nu in 0..3 {
        let found = detect_corner(view, nu)?;
        if !found.is_none() {
            return Ok(found);
        }
    }
    for nu in 0..3 {
        let found = detect_extended_corner(view, nu)?;
        if !found.is_none() {
            return Ok(found);
        }
    }
    Ok(StructureFinding::None)
}

/// Labels an unfibered grid `A ∩ Λ(x, D(M))` with `Φ_M | A ∩ Λ`.
///
/// Weights may be a multiset of constant multiplicity on the grid. The
/// modulus may be any `N` with three prime factors, so this also serves
/// lower scales after reducing `A` mod `N`.
pub fn classify_unfibered_grid(modulus: &Modulus, a: &Multiset, x: usize) -> Result<GridClassification> {
    require_three(modulus)?;
    let view = GridView::new(modulus, a, x)?;
    if view.is_empty() {
        return Err(precondition("empty grid"));
    }
    if view.bin_value().is_none() {
        return Err(precondition("grid weights are not of constant multiplicity"));
    }
    if !cyclo::phi_divides(modulus, modulus.m(), &view.as_multiset())? {
        return Err(precondition("Phi_M does not divide A on this grid"));
    }
    if (0..3).any(|nu| view.fibered(nu).is_some()) {
        return Err(precondition("the grid is M-fibered in some direction"));
    }
    let m = modulus.m();
    let d = modulus.d_of(m);
    let present = view.top_divisors_present(modulus);
    let missing: Vec<u64> = modulus
        .divisors()
        .iter()
        .copied()
        .filter(|&e| e % d == 0 && present.binary_search(&e).is_err())
        .collect();
    let p: Vec<u64> = view.dims.iter().map(|&q| q as u64).collect();
    let base = view.base();
    let done = |finding, fibers| Ok(GridClassification { base, missing: missing.clone(), finding, fibers });

    if missing.is_empty() {
        let (rest, removed) = remove_fibers(&view);
        if !rest.is_empty() {
            let found = detect_diagonal_boxes(&rest)?;
            if !found.is_none() {
                return done(found, removed);
            }
        }
        if fiber_decomposition(&view).is_some() {
            for nu in 0..3 {
                let found = detect_extended_corner(&view, nu)?;
                if !found.is_none() {
                    return done(found, Vec::new());
                }
            }
        }
        return done(fallback(&view)?, Vec::new());
    }

    // the missing set as a pair of directions {u, v} when it is {M/p_u p_v}
    let pair_of = |e: u64| -> Option<(usize, usize)> {
        (0..3).flat_map(|u| (u + 1..3).map(move |v| (u, v))).find(|&(u, v)| e == m / (p[u] * p[v]))
    };
    if p.contains(&2) {
        let tops_present = (0..3).all(|nu| present.binary_search(&(m / p[nu])).is_ok());
        if tops_present {
            if let [e] = missing[..] {
                if let Some((u, v)) = pair_of(e) {
                    let k = 3 - u - v;
                    if corner_planes(&view, k) {
                        if let StructureFinding::Corner { direction, a, partner } = detect_corner(&view, k)? {
                            return done(StructureFinding::EvenCorner { direction, a, partner }, Vec::new());
                        }
                    }
                }
            }
        } else if present.binary_search(&(m / 2)).is_err() {
            {
                if let StructureFinding::DiagonalBoxes { base, boxes } = detect_diagonal_boxes(&view)? {
                    let candidate = StructureFinding::EvenDiagonalBoxes { base, boxes };
                    if candidate.revalidate(modulus, &view) {
                        return done(candidate, Vec::new());
                    }
                }
            }
        }
        return done(fallback(&view)?, Vec::new());
    }

    match missing[..] {
        [e1, e2] => {
            if let (Some((a1, b1)), Some((a2, b2))) = (pair_of(e1), pair_of(e2)) {
                let shared = [a1, b1].into_iter().find(|&t| t == a2 || t == b2);
                if let Some(i) = shared {
                    for idx in 0..view.size() {
                        if full_plane_at(modulus, &view, i, idx) {
                            return done(StructureFinding::FullPlane { direction: i, x: view.global(idx) }, Vec::new());
                        }
                    }
                }
            }
        }
        [e] => {
            if let Some((u, v)) = pair_of(e) {
                let k = 3 - u - v;
                if corner_planes(&view, k) {
                    let found = detect_corner(&view, k)?;
                    if !found.is_none() {
                        return done(found, Vec::new());
                    }
                }
                let found = find_almost_corner(&view, k);
                if !found.is_none() {
                    return done(found, Vec::new());
                }
            }
        }
        _ => {}
    }
    done(fallback(&view)?, Vec::new())
}

/// Where the plane bound `|A ∩ Π(x, p_ν^{n_ν-α})| ≤ p_ν^α ∏_{κ≠ν} p_κ^{β_κ}` fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PlaneBoundViolation {
    pub direction: usize,
    pub alpha: u32,
    pub residue: usize,
    pub count: i64,
    pub bound: u64,
}

/// Checks the plane bound for a set whose size factors over the primes of `M`.
pub fn plane_bound_violation(modulus: &Modulus, a: &Multiset) -> Result<Option<PlaneBoundViolation>> {
    a.ensure_set()?;
    let mut size = a.total() as u64;
    let mut beta = Vec::new();
    for &(p, _) in modulus.factors() {
        let mut e = 0;
        while size > 0 && size % p == 0 {
            size /= p;
            e += 1;
        }
        beta.push(e);
    }
    if size != 1 {
        return Err(precondition("|A| does not factor over the primes of M"));
    }
    for nu in 0..modulus.rank() {
        let (p, n) = modulus.factors()[nu];
        let rest: u64 = (0..modulus.rank())
            .filter(|&k| k != nu)
            .map(|k| modulus.prime(k).pow(beta[k]))
            .product();
        for alpha in 0..=n {
            let q = p.pow(n - alpha) as usize;
            let bound = p.pow(alpha) * rest;
            let mut counts = vec![0i64; q];
            for x in a.support() {
                counts[x % q] += 1;
            }
            if let Some(r) = (0..q).find(|&r| counts[r] as u64 > bound) {
                return Ok(Some(PlaneBoundViolation { direction: nu, alpha, residue: r, count: counts[r], bound }));
            }
        }
    }
    Ok(None)
}

/// The plane bound for both sides of a tiling.
pub fn plane_bound_check(vt: &VerifiedTiling) -> Result<bool> {
    Ok(plane_bound_violation(vt.modulus(), vt.a())?.is_none()
        && plane_bound_violation(vt.modulus(), vt.b())?.is_none())
}

/// Result of checking that missing top differences force fibering.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MissingDifferenceReport {
    /// Grids (bases in Z_N) lacking the difference `N/p_ν`, with the other
    /// directions they are N-fibered in.
    pub grids: Vec<(usize, Vec<usize>)>,
    /// Second odd direction whose top difference is missing globally, and
    /// whether `A` is N-fibered in the remaining direction.
    pub second: Option<(usize, usize, bool)>,
    pub holds: bool,
}

/// Checks on `A mod N` that a missing top difference `N/p_ν` forces fibering in
/// another direction on every affected grid.
pub fn missing_top_difference_fibering(
    modulus: &Modulus,
    a: &Multiset,
    n: u64,
    nu: usize,
) -> Result<MissingDifferenceReport> {
    require_three(modulus)?;
    modulus.check_direction(nu)?;
    let sub = modulus.quotient(n)?;
    if sub.rank() != 3 {
        return Err(inapplicable("every prime of M must divide N"));
    }
    if modulus.prime(nu) == 2 {
        return Err(inapplicable("the missing direction must have an odd prime"));
    }
    let reduced = a.reduce_mod(n as usize)?;
    if !cyclo::phi_divides(&sub, n, &reduced)? {
        return Err(inapplicable("Phi_N does not divide A"));
    }
    let mut c0 = None;
    for &w in reduced.weights() {
        if w != 0 && *c0.get_or_insert(w) != w {
            return Err(inapplicable("weights of A mod N are not in {0, c0}"));
        }
    }
    if c0.is_none() {
        return Err(Error::ZeroMultiset);
    }
    let d = sub.d_of(n) as usize;
    let top = |k: usize| n / sub.prime(k);
    let mut grids = Vec::new();
    let mut holds = true;
    let mut missing_globally = [true; 3];
    for x in 0..d {
        let view = GridView::new(&sub, &reduced, x)?;
        if view.is_empty() {
            continue;
        }
        let present = view.top_divisors_present(&sub);
        for (k, flag) in missing_globally.iter_mut().enumerate() {
            if present.binary_search(&top(k)).is_ok() {
                *flag = false;
            }
        }
        if present.binary_search(&top(nu)).is_ok() {
            continue;
        }
        let dirs: Vec<usize> = (0..3).filter(|&k| k != nu && view.fibered(k).is_some()).collect();
        holds &= !dirs.is_empty();
        grids.push((x, dirs));
    }
    if grids.is_empty() {
        return Err(inapplicable("no grid lacks the top difference in this direction"));
    }
    let mut second = None;
    if missing_globally[nu] {
        if let Some(k) = (0..3).find(|&k| k != nu && missing_globally[k] && sub.prime(k) != 2) {
            let third = 3 - nu - k;
            let mut fibered = true;
            for x in 0..d {
                let view = GridView::new(&sub, &reduced, x)?;
                if !view.is_empty() && view.fibered(third).is_none() {
                    fibered = false;
                }
            }
            holds &= fibered;
            second = Some((k, third, fibered));
        }
    }
    Ok(MissingDifferenceReport { grids, second, holds })
}
