//! Fiber shifts, reduction to a grid, subgroup and slab reductions, and the
//! classification pipeline for tilings of `Z_{(p_i p_j p_k)²}`.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::cyclo;
use crate::error::{inapplicable, precondition, Error, Result};
use crate::modulus::Modulus;
use crate::multiset::Multiset;
use crate::structure::{self, GridClassification, IjkPartition};
use crate::tiling::{TilingInstance, VerifiedTiling};

pub const DEFAULT_BUDGET: usize = 10_000;

/// Moves the M-fiber `root * F_ν ⊆ A` onto `target * F_ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShiftMove {
    pub direction: usize,
    pub root: usize,
    pub target: usize,
}

/// `B` is `M/p_ν`-fibered in direction ν and `A` holds M-fibers in direction ν.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Cofibered {
    pub direction: usize,
    /// Least elements of the `M/p_ν`-fibers making up `B`.
    pub b_roots: Vec<usize>,
    /// Least elements of the M-fibers contained in `A`.
    pub a_fibers: Vec<usize>,
}

/// Least elements of the M-fibers in direction ν contained in `a`.
pub fn m_fibers(modulus: &Modulus, a: &Multiset, nu: usize) -> Vec<usize> {
    let m = modulus.order();
    let step = modulus.fiber_scale(nu) as usize;
    let p = modulus.prime(nu) as usize;
    (0..step).filter(|&x| (0..p).all(|t| a.contains((x + t * step) % m))).collect()
}

/// Starts of the chains `{x, x + M/p², …, x + (p-1)M/p²}` partitioning `B`, if they exist.
fn b_cofibered(modulus: &Modulus, b: &Multiset, nu: usize) -> Option<Vec<usize>> {
    let p = modulus.prime(nu) as usize;
    let m = modulus.order();
    let step = m / (p * p);
    let cycle = p * p;
    let mut roots = Vec::new();
    for coset in 0..step {
        let at = |t: usize| coset + (t % cycle) * step;
        let present: Vec<bool> = (0..cycle).map(|t| b.contains(at(t))).collect();
        let Some(gap) = present.iter().position(|&x| !x) else {
            roots.extend((0..p).map(|r| at(r * p)));
            continue;
        };
        // walk the cycle from a gap so that runs do not wrap
        let mut run = 0;
        for t in gap + 1..=gap + cycle {
            if t < gap + cycle && present[t % cycle] {
                run += 1;
                continue;
            }
            if run % p != 0 {
                return None;
            }
            for r in 0..run / p {
                roots.push(at(t - run + r * p));
            }
            run = 0;
        }
    }
    roots.sort_unstable();
    Some(roots)
}

pub fn detect_cofibered(vt: &VerifiedTiling, nu: usize) -> Result<Option<Cofibered>> {
    let modulus = vt.modulus();
    modulus.check_direction(nu)?;
    if modulus.exponent(nu) != 2 {
        return Err(precondition("the direction must have exponent 2"));
    }
    let Some(b_roots) = b_cofibered(modulus, vt.b(), nu) else {
        return Ok(None);
    };
    let a_fibers = m_fibers(modulus, vt.a(), nu);
    if a_fibers.is_empty() {
        return Ok(None);
    }
    Ok(Some(Cofibered { direction: nu, b_roots, a_fibers }))
}

fn fiber_of(modulus: &Modulus, x: usize, nu: usize) -> impl Iterator<Item = usize> {
    let m = modulus.order();
    let step = modulus.fiber_scale(nu) as usize;
    (0..modulus.prime(nu) as usize).map(move |t| (x + t * step) % m)
}

fn check_move(modulus: &Modulus, a: &Multiset, mv: &ShiftMove) -> Result<()> {
    modulus.check_direction(mv.direction)?;
    modulus.check_element(mv.root as u64)?;
    modulus.check_element(mv.target as u64)?;
    let p = modulus.prime(mv.direction);
    let want = modulus.m() / (p * p);
    if modulus.diff_gcd(mv.root, mv.target) != want {
        return Err(precondition(&format!("shift distance must have gcd {want} with M")));
    }
    if !fiber_of(modulus, mv.root, mv.direction).all(|x| a.contains(x)) {
        return Err(precondition("the root fiber is not contained in A"));
    }
    if fiber_of(modulus, mv.target, mv.direction).any(|x| a.contains(x)) {
        return Err(precondition("the target fiber meets A"));
    }
    Ok(())
}

fn apply_move(modulus: &Modulus, a: &Multiset, mv: &ShiftMove) -> Multiset {
    let mut w = a.weights().to_vec();
    for x in fiber_of(modulus, mv.root, mv.direction) {
        w[x] = 0;
    }
    for x in fiber_of(modulus, mv.target, mv.direction) {
        w[x] = 1;
    }
    Multiset::from_weights(w)
}

/// Applies one shift, re-verifies the tiling and checks that `S_A` is unchanged.
pub fn fiber_shift(vt: &VerifiedTiling, mv: &ShiftMove) -> Result<VerifiedTiling> {
    let modulus = vt.modulus();
    if detect_cofibered(vt, mv.direction)?.is_none() {
        return Err(precondition("the tiling is not cofibered in this direction"));
    }
    check_move(modulus, vt.a(), mv)?;
    let a = apply_move(modulus, vt.a(), mv);
    let inst = TilingInstance::new(modulus.clone(), a, vt.b().clone())?;
    let next = match inst.into_verified() {
        Ok(v) => v,
        Err(Error::NotATiling) => return Err(Error::Invariant("a fiber shift broke the tiling".into())),
        Err(e) => return Err(e),
    };
    if cyclo::s_a(modulus, next.a())? != cyclo::s_a(modulus, vt.a())? {
        return Err(Error::Invariant("a fiber shift changed S_A".into()));
    }
    Ok(next)
}

/// Shifts leading from an instance to one whose `A` is a `D(M)`-grid.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ReductionTrace {
    #[cfg_attr(feature = "serde", serde(skip))]
    pub initial: TilingInstance,
    pub moves: Vec<ShiftMove>,
    pub final_a: Vec<usize>,
    /// Tiling verdict after each move.
    pub verdicts: Vec<bool>,
    /// `S_A` before the first move and after each one.
    pub spectra: Vec<Vec<u64>>,
    pub expanded: usize,
}

fn is_grid(modulus: &Modulus, a: &Multiset) -> bool {
    let d = modulus.d_of(modulus.m()) as usize;
    let support = a.support();
    support.len() as u64 == modulus.m() / d as u64 && support.iter().all(|&x| x % d == support[0] % d)
}

fn state_key(a: &Multiset) -> (u64, u64) {
    let mut h1: u64 = 0xcbf2_9ce4_8422_2325;
    let mut h2: u64 = 0x9e37_79b9_7f4a_7c15;
    for x in a.support() {
        h1 = (h1 ^ x as u64).wrapping_mul(0x0100_0000_01b3);
        h2 = (h2 ^ (x as u64).rotate_left(17)).wrapping_mul(0xff51_afd7_ed55_8ccd).rotate_left(31);
    }
    (h1, h2)
}

struct Node {
    parent: usize,
    mv: Option<ShiftMove>,
    depth: usize,
}

/// Best-first search over fiber shifts for a `D(M)`-grid.
///
/// Children are ranked by how far `A` is from its fullest grid, then by whether
/// the saturating set of the target lies on the line through it in the shift
/// direction. `budget` bounds the number of expanded states.
pub fn reduce_to_grid(vt: &VerifiedTiling, budget: usize) -> Result<Option<ReductionTrace>> {
    let modulus = vt.modulus();
    if modulus.factors().iter().any(|&(_, n)| n != 2) {
        return Err(precondition("every prime must appear squared"));
    }
    let m = modulus.order();
    let d = modulus.d_of(modulus.m()) as usize;
    let directions: Vec<usize> = (0..modulus.rank())
        .filter(|&nu| b_cofibered(modulus, vt.b(), nu).is_some())
        .collect();
    let div_b: Vec<bool> = {
        let mut t = vec![false; m + 1];
        for &e in &vt.div_b().members {
            t[e as usize] = true;
        }
        t
    };
    let distance = |a: &Multiset| -> usize {
        let mut counts = vec![0usize; d];
        for x in a.support() {
            counts[x % d] += 1;
        }
        a.support().len() - counts.into_iter().max().unwrap_or(0)
    };
    let on_line = |a: &Multiset, x: usize, nu: usize| -> bool {
        let step = modulus.cofactor(nu) as usize;
        a.support()
            .into_iter()
            .filter(|&y| div_b[modulus.diff_gcd(x, y) as usize])
            .all(|y| (y + m - x) % m % step == 0)
    };
    let replay = |nodes: &[Node], mut id: usize| -> (Multiset, Vec<ShiftMove>) {
        let mut moves = Vec::new();
        while let Some(mv) = nodes[id].mv {
            moves.push(mv);
            id = nodes[id].parent;
        }
        moves.reverse();
        let mut a = vt.a().clone();
        for mv in &moves {
            a = apply_move(modulus, &a, mv);
        }
        (a, moves)
    };

    let mut nodes = vec![Node { parent: 0, mv: None, depth: 0 }];
    let mut seen = BTreeSet::new();
    seen.insert(state_key(vt.a()));
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((distance(vt.a()), 0u8, 0usize, 0usize)));
    let mut expanded = 0;
    while let Some(Reverse((_, _, _, id))) = heap.pop() {
        let (a, moves) = replay(&nodes, id);
        if is_grid(modulus, &a) {
            return Ok(Some(build_trace(vt, moves, expanded)?));
        }
        if expanded >= budget {
            break;
        }
        expanded += 1;
        for &nu in &directions {
            let p = modulus.prime(nu) as usize;
            let small = m / (p * p);
            for root in m_fibers(modulus, &a, nu) {
                for t in 1..p {
                    let target = (root + t * small) % (m / p);
                    let mv = ShiftMove { direction: nu, root, target };
                    if fiber_of(modulus, target, nu).any(|x| a.contains(x)) {
                        continue;
                    }
                    let child = apply_move(modulus, &a, &mv);
                    if !seen.insert(state_key(&child)) {
                        continue;
                    }
                    let bonus = u8::from(!on_line(&a, target, nu));
                    let depth = nodes[id].depth + 1;
                    nodes.push(Node { parent: id, mv: Some(mv), depth });
                    heap.push(Reverse((distance(&child), bonus, depth, nodes.len() - 1)));
                }
            }
        }
    }
    Ok(None)
}

fn build_trace(vt: &VerifiedTiling, moves: Vec<ShiftMove>, expanded: usize) -> Result<ReductionTrace> {
    let modulus = vt.modulus();
    let mut cur = vt.clone();
    let mut verdicts = Vec::new();
    let mut spectra = vec![cyclo::s_a(modulus, vt.a())?];
    for mv in &moves {
        cur = fiber_shift(&cur, mv)?;
        verdicts.push(true);
        spectra.push(cyclo::s_a(modulus, cur.a())?);
    }
    if !is_grid(modulus, cur.a()) {
        return Err(Error::Invariant("replayed trace does not end on a grid".into()));
    }
    Ok(ReductionTrace {
        initial: vt.instance().clone(),
        moves,
        final_a: cur.a().support(),
        verdicts,
        spectra,
        expanded,
    })
}

/// Direction ν with `A` inside one coset of `p_ν Z_M` and `p_ν ∥ |B|`.
pub fn subgroup_reduction_applies(vt: &VerifiedTiling) -> Option<usize> {
    let modulus = vt.modulus();
    let support = vt.a().support();
    let size = vt.b().total() as u64;
    (0..modulus.rank()).find(|&nu| {
        let p = modulus.prime(nu);
        size % p == 0
            && size / p % p != 0
            && support.iter().all(|&x| x as u64 % p == support[0] as u64 % p)
    })
}

fn require_prime_power_divisor(vt: &VerifiedTiling, nu: usize) -> Result<()> {
    let modulus = vt.modulus();
    modulus.check_direction(nu)?;
    if !cyclo::phi_divides(modulus, modulus.prime_power(nu), vt.a())? {
        return Err(precondition("Phi_{p^n} does not divide A in this direction"));
    }
    Ok(())
}

/// For every `d` with `p_ν^{n_ν} | d | M`: `Φ_d | A` or `Φ_{d/p_ν} ⋯ Φ_{d/p_ν^{n_ν}} | B`.
pub fn subtile_condition(vt: &VerifiedTiling, nu: usize) -> Result<bool> {
    require_prime_power_divisor(vt, nu)?;
    let modulus = vt.modulus();
    let (p, n) = modulus.factors()[nu];
    let q = modulus.prime_power(nu);
    for &d in modulus.divisors().iter().filter(|&&d| d % q == 0) {
        if cyclo::phi_divides(modulus, d, vt.a())? {
            continue;
        }
        let mut s = d;
        for _ in 0..n {
            s /= p;
            if !cyclo::phi_divides(modulus, s, vt.b())? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One translate's slab `A'_{p_ν}` reduced to `Z_{M/p_ν}`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Slab {
    pub translate: usize,
    /// Elements mod `M/p_ν`, increasing, repeated by multiplicity.
    pub elements: Vec<usize>,
    pub tiles: bool,
}

/// Slabs of every translate of `A`, each checked directly against `B mod M/p_ν`.
pub fn slab_extract(vt: &VerifiedTiling, nu: usize) -> Result<Vec<Slab>> {
    require_prime_power_divisor(vt, nu)?;
    let modulus = vt.modulus();
    let m = modulus.order();
    let p = modulus.prime(nu) as usize;
    let q = modulus.prime_power(nu) as usize;
    let inv = modulus.cofactor(nu) as usize;
    let cut = q / p;
    let small = m / p;
    let a = vt.a().support();
    let b: Vec<usize> = vt.b().support().into_iter().map(|x| x % small).collect();
    // π_ν(y) = (y mod q) · M_ν^{-1} mod q
    let inv_cof = {
        let c = inv % q;
        (1..q).find(|&u| c * u % q == 1).unwrap_or(1)
    };
    let mut out = Vec::with_capacity(m);
    let mut counts = vec![0u32; small];
    for t in 0..m {
        let mut elements: Vec<usize> = a
            .iter()
            .map(|&x| (x + t) % m)
            .filter(|&y| (y % q) * inv_cof % q < cut)
            .map(|y| y % small)
            .collect();
        elements.sort_unstable();
        let tiles = elements.len() * b.len() == small && {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut ok = true;
            'fill: for &x in &elements {
                for &y in &b {
                    let z = (x + y) % small;
                    counts[z] += 1;
                    if counts[z] > 1 {
                        ok = false;
                        break 'fill;
                    }
                }
            }
            ok
        };
        out.push(Slab { translate: t, elements, tiles });
    }
    Ok(out)
}

/// `subtile_condition` next to the outcome of checking every slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubtileReport {
    pub direction: usize,
    pub condition: bool,
    pub all_slabs_tile: bool,
    /// First translate whose slab fails to tile.
    pub witness: Option<usize>,
}

impl SubtileReport {
    pub fn agrees(&self) -> bool {
        self.condition == self.all_slabs_tile
    }
}

pub fn subtile_report(vt: &VerifiedTiling, nu: usize) -> Result<SubtileReport> {
    let condition = subtile_condition(vt, nu)?;
    let witness = slab_extract(vt, nu)?.into_iter().find(|s| !s.tiles).map(|s| s.translate);
    Ok(SubtileReport { direction: nu, condition, all_slabs_tile: witness.is_none(), witness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Branch {
    GridReduction,
    SubgroupReduction,
    SlabReduction,
    Unresolved,
}

/// How a grid reduction was entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Route {
    Unfibered,
    FiberedTriple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClassificationReport {
    pub branch: Branch,
    pub route: Option<Route>,
    pub direction: Option<usize>,
    pub prime: Option<u64>,
    /// `A` and `B` were interchanged so that `Φ_M | A`.
    pub swapped: bool,
    /// The slab reduction was run on the interchanged pair.
    pub slab_swapped: bool,
    pub in_scope: bool,
    pub structures: Vec<GridClassification>,
    pub partition: Option<IjkPartition>,
    pub subtile: Option<SubtileReport>,
    pub trace: Option<ReductionTrace>,
    pub t2_a: bool,
    pub t2_b: bool,
    /// `A^♭ ⊕ B` tiles, with `A^♭` the standard set built from `S_A`.
    pub flat_b: bool,
    /// The same check with the roles exchanged.
    pub flat_a: bool,
    pub notes: Vec<String>,
}

/// `A^♭ ⊕ B = Z_M`, with `A^♭` the standard set carrying the prime-power divisors of `A`.
pub fn flat_tiles(modulus: &Modulus, a: &Multiset, b: &Multiset) -> Result<bool> {
    let flat = cyclo::spectrum(modulus, a)?.flat(modulus)?;
    Ok(TilingInstance::new(modulus.clone(), flat, b.clone())?.verify_direct())
}

/// Runs the classification pipeline on a tiling.
pub fn classify(inst: &TilingInstance, budget: usize) -> Result<ClassificationReport> {
    let vt = inst.clone().into_verified()?;
    let modulus = vt.modulus();
    let t2_a = cyclo::t2_check(modulus, vt.a())?;
    let t2_b = cyclo::t2_check(modulus, vt.b())?;
    let mut report = ClassificationReport {
        branch: Branch::Unresolved,
        route: None,
        direction: None,
        prime: None,
        swapped: false,
        slab_swapped: false,
        in_scope: false,
        structures: Vec::new(),
        partition: None,
        subtile: None,
        trace: None,
        t2_a,
        t2_b,
        flat_b: flat_tiles(modulus, vt.a(), vt.b())?,
        flat_a: flat_tiles(modulus, vt.b(), vt.a())?,
        notes: Vec::new(),
    };
    let rad: u64 = modulus.factors().iter().map(|&(p, _)| p).product();
    report.in_scope = modulus.rank() == 3
        && modulus.factors().iter().all(|&(p, n)| p != 2 && n == 2)
        && vt.a().total() as u64 == rad
        && vt.b().total() as u64 == rad;
    if !report.in_scope {
        report.notes.push("modulus or sizes outside the odd three-prime square case".into());
        return Ok(report);
    }
    let m = modulus.m();
    let vt = if cyclo::phi_divides(modulus, m, vt.a())? {
        vt
    } else if cyclo::phi_divides(modulus, m, vt.b())? {
        report.swapped = true;
        vt.swapped()
    } else {
        return Err(Error::Invariant("Phi_M divides neither side of a tiling".into()));
    };
    run_pipeline(&vt, budget, &mut report)?;
    if report.branch != Branch::Unresolved && !(t2_a && t2_b) {
        report.notes.push(format!("branch {:?} reached but (T2) fails on a side", report.branch));
        report.branch = Branch::Unresolved;
    }
    Ok(report)
}

fn run_pipeline(vt: &VerifiedTiling, budget: usize, report: &mut ClassificationReport) -> Result<()> {
    let modulus = vt.modulus();
    let a = vt.a();
    let grids = structure::grid_reports(modulus, a)?;
    let unfibered: Vec<usize> = grids.iter().filter(|g| !g.fibered_somewhere()).map(|g| g.base).collect();
    if !unfibered.is_empty() {
        for base in unfibered {
            match structure::classify_unfibered_grid(modulus, a, base) {
                Ok(c) => report.structures.push(c),
                Err(Error::Precondition(msg)) => report.notes.push(format!("grid {base}: {msg}")),
                Err(e) => return Err(e),
            }
        }
        return grid_branch(vt, budget, Route::Unfibered, report);
    }
    let part = structure::ijk_partition(vt)?;
    let triple = !part.triple.is_empty();
    report.partition = Some(part.clone());
    if triple {
        return grid_branch(vt, budget, Route::FiberedTriple, report);
    }
    // A fibered in a single direction
    let support = a.support();
    if let Some(nu) = (0..3).find(|&nu| part.sets[nu].len() == support.len()) {
        return slab_branch(vt, nu, false, report);
    }
    if let Some(i) = part.empty_direction() {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let differs = |u: usize, v: usize| part.sets[u].iter().any(|x| part.sets[v].binary_search(x).is_err());
        if differs(j, k) && differs(k, j) {
            let p = modulus.prime(i);
            if cyclo::phi_divides(modulus, p, a)? {
                return slab_branch(&vt.swapped(), i, true, report);
            }
            if cyclo::phi_divides(modulus, p * p, a)? && subgroup_reduction_applies(vt) == Some(i) {
                return subgroup_branch(vt, i, report);
            }
        }
    }
    if let Some(nu) = subgroup_reduction_applies(vt) {
        return subgroup_branch(vt, nu, report);
    }
    report.notes.push("no reduction applies".into());
    Ok(())
}

fn grid_branch(vt: &VerifiedTiling, budget: usize, route: Route, report: &mut ClassificationReport) -> Result<()> {
    match reduce_to_grid(vt, budget)? {
        Some(trace) => {
            report.branch = Branch::GridReduction;
            report.route = Some(route);
            report.trace = Some(trace);
        }
        None => report.notes.push(format!("no grid reached within {budget} expanded states")),
    }
    Ok(())
}

fn slab_branch(vt: &VerifiedTiling, nu: usize, swapped: bool, report: &mut ClassificationReport) -> Result<()> {
    let sub = match subtile_report(vt, nu) {
        Ok(s) => s,
        Err(Error::Precondition(msg)) => {
            report.notes.push(msg);
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    if !sub.agrees() {
        return Err(Error::Invariant("subtile condition disagrees with slab verification".into()));
    }
    report.subtile = Some(sub);
    if sub.condition {
        report.branch = Branch::SlabReduction;
        report.direction = Some(nu);
        report.prime = Some(vt.modulus().prime(nu));
        report.slab_swapped = swapped;
    } else {
        report.notes.push("slab condition fails".into());
    }
    Ok(())
}

fn subgroup_branch(vt: &VerifiedTiling, nu: usize, report: &mut ClassificationReport) -> Result<()> {
    report.branch = Branch::SubgroupReduction;
    report.direction = Some(nu);
    report.prime = Some(vt.modulus().prime(nu));
    Ok(())
}

/// Applies seeded random valid shifts, returning the final tiling and the moves.
pub fn random_shifts<R: rand::Rng>(
    vt: &VerifiedTiling,
    count: usize,
    rng: &mut R,
) -> Result<(VerifiedTiling, Vec<ShiftMove>)> {
    let modulus = vt.modulus();
    let m = modulus.order();
    let mut cur = vt.clone();
    let mut moves = Vec::new();
    for _ in 0..count {
        let mut options = Vec::new();
        for nu in 0..modulus.rank() {
            if modulus.exponent(nu) != 2 || b_cofibered(modulus, cur.b(), nu).is_none() {
                continue;
            }
            let p = modulus.prime(nu) as usize;
            for root in m_fibers(modulus, cur.a(), nu) {
                for t in 1..p {
                    let target = (root + t * (m / (p * p))) % (m / p);
                    let mv = ShiftMove { direction: nu, root, target };
                    if check_move(modulus, cur.a(), &mv).is_ok() {
                        options.push(mv);
                    }
                }
            }
        }
        if options.is_empty() {
            return Err(inapplicable("no valid shift"));
        }
        let mv = options[rng.gen_range(0..options.len())];
        cur = fiber_shift(&cur, &mv)?;
        moves.push(mv);
    }
    Ok((cur, moves))
}
