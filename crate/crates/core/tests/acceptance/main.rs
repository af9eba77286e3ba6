//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p cyclotile --test acceptance -- 4 9` runs a subset.

mod oracle;

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cyclotile::cuboid;
use cyclotile::cyclo;
use cyclotile::reduce::{self, Branch, ShiftMove, DEFAULT_BUDGET};
use cyclotile::search::{self, EnumerationTask, TilingPair};
use cyclotile::structure::{self, GridClassification, GridView, StructureFinding};
use cyclotile::tiling::{self, BoxView};
use cyclotile::{Modulus, Multiset, Ratio, TilingInstance, VerifiedTiling};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VERIFIER_MODULI: [usize; 6] = [4, 8, 12, 16, 24, 36];
const VERIFIER_LIMIT: Duration = Duration::from_secs(300);
/// `(m, complements kept per small tile)`; `None` is exhaustive.
const SWEEP: [(usize, Option<usize>); 5] = [(16, None), (24, None), (36, None), (48, Some(1024)), (72, Some(256))];
const SWEEP_LIMIT: Duration = Duration::from_secs(600);
const ROUND_TRIP_LIMIT: Duration = Duration::from_secs(120);
const BOX_SAMPLES: usize = 10_000;
const EXCLUSION_SAMPLES: usize = 100_000;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Counts checks and keeps the first failure.
#[derive(Default)]
struct Tally {
    checked: u64,
    bad: u64,
    first: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.bad += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn check_many(&mut self, n: u64, ok: bool, what: impl FnOnce() -> String) {
        self.check(ok, what);
        self.checked += n - 1;
    }

    fn ok(&self) -> bool {
        self.bad == 0
    }

    fn summary(&self) -> String {
        match &self.first {
            None => format!("{} checks, 0 failures", self.checked),
            Some(f) => format!("{} checks, {} failures, first: {f}", self.checked, self.bad),
        }
    }
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, fn(&mut Shared) -> Verdict); 9] = [
        ("verifier equivalence", verifier_equivalence),
        ("CM necessity", cm_necessity),
        ("flat complement equivalence", flat_equivalence),
        ("box-product identity", box_identity),
        ("cyclotomic dual path", dual_path),
        ("fiber-shift round trip", round_trip),
        ("subtile equivalence", subtile_equivalence),
        ("structure detectors", structure_detectors),
        ("divisor exclusion and plane bound", exclusion_and_planes),
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(|| run(&mut shared)))
            .unwrap_or_else(|_| Verdict { pass: false, detail: "panicked".into() });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

#[derive(Default)]
struct Shared {
    sweep: Option<Sweep>,
}

impl Shared {
    fn sweep(&mut self) -> &Sweep {
        self.sweep.get_or_insert_with(run_sweep)
    }
}

fn set(m: usize, elements: &[usize]) -> Multiset {
    Multiset::from_set(m, elements).unwrap()
}

fn modulus(m: usize) -> Modulus {
    Modulus::from_order(m as u64).unwrap()
}

fn verified(md: &Modulus, a: &[usize], b: &[usize]) -> VerifiedTiling {
    TilingInstance::from_elements(md.clone(), a, b).unwrap().into_verified().unwrap()
}

fn lib_spectrum(md: &Modulus, res: &oracle::Residues, s: &[usize]) -> u64 {
    let spec = cyclo::spectrum(md, &set(md.order(), s)).unwrap();
    res.divs.iter().enumerate().filter(|&(_, &d)| spec.contains(d as u64)).fold(0, |acc, (i, _)| acc | 1 << i)
}

fn lib_verdicts(md: &Modulus, a: &[usize], b: &[usize]) -> [bool; 3] {
    let inst = TilingInstance::from_elements(md.clone(), a, b).unwrap();
    [inst.verify_direct(), inst.verify_poly().unwrap(), inst.verify_sands().unwrap()]
}

fn random_set(rng: &mut ChaCha8Rng, m: usize, size: usize) -> Vec<usize> {
    let mut rest: Vec<usize> = (1..m).collect();
    rest.shuffle(rng);
    let mut s = vec![0];
    s.extend_from_slice(&rest[..size - 1]);
    s.sort_unstable();
    s
}

// ---------------------------------------------------------------- criterion 1

/// For each small side `A` the complements found by exact cover, by the
/// cyclotomic criterion and by the difference-divisor criterion coincide; the
/// library verifiers then agree with them on every positive pair and on
/// seeded negatives. Pairs with `|A| > |B|` are the same pairs read backwards.
fn verifier_equivalence(_: &mut Shared) -> Verdict {
    let start = Instant::now();
    let mut sets = Tally::default();
    let mut positives = Tally::default();
    let mut negatives = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in VERIFIER_MODULI {
        let md = modulus(m);
        let res = oracle::Residues::new(m);
        for k in oracle::divisors(m).into_iter().filter(|k| k * k <= m) {
            let l = m / k;
            let mut poly_memo: HashMap<u64, Vec<Vec<usize>>> = HashMap::new();
            let mut sands_memo: HashMap<u64, Vec<Vec<usize>>> = HashMap::new();
            let mut table: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
            oracle::for_each_set(m, k, |a| {
                let spec = res.set_spectrum(a);
                sets.check(lib_spectrum(&md, &res, a) == spec, || format!("spectrum of {a:?} in Z_{m}"));
                let direct = oracle::complements(m, a);
                let required = res.full_mask() & !spec;
                let poly = poly_memo.entry(required).or_insert_with(|| res.partners(required, l));
                let forbidden = oracle::difference_mask(m, a);
                let sands = sands_memo.entry(forbidden).or_insert_with(|| oracle::cliques(m, forbidden, l));
                sets.check(direct == *poly && direct == *sands, || {
                    format!("complement sets of {a:?} in Z_{m} differ: {} {} {}", direct.len(), poly.len(), sands.len())
                });
                for b in &direct {
                    let ok = lib_verdicts(&md, a, b) == [true; 3] && lib_verdicts(&md, b, a) == [true; 3];
                    positives.check(ok, || format!("{a:?} + {b:?} in Z_{m}"));
                }
                table.push((a.to_vec(), direct));
            });
            for i in 0..4000 {
                let (a, direct) = &table[rng.gen_range(0..table.len())];
                let b = if i % 2 == 1 && !direct.is_empty() {
                    // a complement with one element moved
                    let mut b = direct[rng.gen_range(0..direct.len())].clone();
                    if b.len() > 1 {
                        let at = rng.gen_range(1..b.len());
                        let fresh: Vec<usize> = (1..m).filter(|x| !b.contains(x)).collect();
                        if let Some(&x) = fresh.choose(&mut rng) {
                            b[at] = x;
                            b.sort_unstable();
                        }
                    }
                    b
                } else {
                    random_set(&mut rng, m, l)
                };
                let truth = direct.binary_search(&b).is_ok();
                let ok = lib_verdicts(&md, a, &b) == [truth; 3] && lib_verdicts(&md, &b, a) == [truth; 3];
                negatives.check(ok, || format!("{a:?} + {b:?} in Z_{m} expected {truth}"));
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: sets.ok() && positives.ok() && negatives.ok() && elapsed < VERIFIER_LIMIT,
        detail: format!(
            "m in {VERIFIER_MODULI:?}; small sides: {}; positive pairs: {}; seeded pairs: {}",
            sets.summary(),
            positives.summary(),
            negatives.summary()
        ),
    }
}

// ------------------------------------------------------- shared tiling sweep

struct Side {
    t1: bool,
    t2: bool,
    flat: Multiset,
    plane_ok: bool,
    views: Vec<BoxView>,
    /// Bit `i` set when some box has both divisors of hypothesis `i` present.
    hits: u128,
}

/// The cached small side of the current tile, with the large-side views
/// already checked against it.
struct Small {
    key: Vec<usize>,
    side: Side,
    seen: HashSet<Vec<(u64, i64)>>,
}

/// Everything the sweep needs from one side, with a single spectrum computation.
fn side(md: &Modulus, s: &Multiset, hyp: &[(u64, u64)]) -> Side {
    let views = tiling::box_views(md, s, md.m()).unwrap();
    let mut present: Vec<u64> = views
        .iter()
        .map(|v| v.entries.iter().enumerate().filter(|(_, e)| e.1 != 0).fold(0, |acc, (i, _)| acc | 1 << i))
        .collect();
    present.sort_unstable();
    present.dedup();
    let index = |d: u64| md.divisors().binary_search(&d).unwrap();
    let hits = hyp.iter().enumerate().fold(0u128, |acc, (i, &(m1, m2))| {
        let want = 1 << index(m1) | 1 << index(m2);
        if present.iter().any(|&p| p & want == want) {
            acc | 1 << i
        } else {
            acc
        }
    });
    let spec = cyclo::spectrum(md, s).unwrap();
    Side {
        t1: spec.t1(s.total() as u64),
        t2: spec.t2_violation().is_none(),
        flat: spec.flat(md).unwrap(),
        plane_ok: structure::plane_bound_violation(md, s).unwrap().is_none(),
        views,
        hits,
    }
}

#[derive(Default)]
struct Sweep {
    pairs: Vec<(usize, Option<usize>, u64)>,
    enumeration: Tally,
    tiling: Tally,
    cm: Tally,
    flat: Tally,
    boxes: Tally,
    exclusion: Tally,
    planes: Tally,
    elapsed: Duration,
}

fn run_sweep() -> Sweep {
    let start = Instant::now();
    let mut sw = Sweep::default();
    for (m, cap) in SWEEP {
        let md = modulus(m);
        let divs = md.divisors().to_vec();
        let mut hyp = Vec::new();
        for (i, &m1) in divs.iter().enumerate() {
            for &m2 in &divs[i + 1..] {
                if tiling::exclusion_hypothesis(&md, m1, m2).is_ok() {
                    hyp.push((m1, m2));
                }
            }
        }
        let mut count = 0u64;
        for k in oracle::divisors(m).into_iter().filter(|k| k * k <= m) {
            let task = EnumerationTask { complement_cap: cap, ..EnumerationTask::new(m, k) };
            let mut seen = Vec::new();
            let mut small: Option<Small> = None;
            search::for_each_tiling(&task, |p| {
                count += 1;
                check_pair(&mut sw, &md, &hyp, &p, &mut small);
                if cap.is_none() {
                    seen.push(p);
                }
            })
            .unwrap();
            if cap.is_none() {
                seen.sort();
                seen.dedup();
                let expect = oracle::tiling_pairs(m, k);
                let same = seen.len() == expect.len() && seen.iter().zip(&expect).all(|(p, (a, b))| p.a == *a && p.b == *b);
                sw.enumeration.check(same, || format!("Z_{m}, |A| = {k}: {} pairs, oracle {}", seen.len(), expect.len()));
            }
        }
        sw.pairs.push((m, cap, count));
    }
    sw.elapsed = start.elapsed();
    sw
}

fn check_pair(sw: &mut Sweep, md: &Modulus, hyp: &[(u64, u64)], p: &TilingPair, small: &mut Option<Small>) {
    let m = md.order();
    let (a, b) = (set(m, &p.a), set(m, &p.b));
    let inst = TilingInstance::new(md.clone(), a.clone(), b.clone()).unwrap();
    sw.tiling.check(inst.verify_direct(), || format!("{p:?} does not tile Z_{m}"));
    let a_small = p.a.len() <= p.b.len();
    let (key, other) = if a_small { (&p.a, &b) } else { (&p.b, &a) };
    let fresh_tile = small.as_ref().is_none_or(|c| &c.key != key);
    if fresh_tile {
        let s = set(m, key);
        let mut fresh = side(md, &s, hyp);
        // the spectrum shortcuts against the plain entry points, once per small tile
        let same = cyclo::t1_check(md, &s).unwrap() == fresh.t1 && cyclo::t2_check(md, &s).unwrap() == fresh.t2;
        sw.cm.check(same, || format!("spectrum shortcut on {key:?} in Z_{m}"));
        let (x, y) = if a_small { (&a, &b) } else { (&b, &a) };
        let same = reduce::flat_tiles(md, x, y).unwrap()
            == TilingInstance::new(md.clone(), fresh.flat.clone(), y.clone()).unwrap().verify_direct();
        sw.flat.check(same, || format!("flat shortcut on {key:?} in Z_{m}"));
        fresh.views.sort_by(|u, v| u.entries.cmp(&v.entries));
        fresh.views.dedup_by(|u, v| u.entries == v.entries);
        *small = Some(Small { key: key.clone(), side: fresh, seen: HashSet::new() });
    }
    let cache = small.as_mut().unwrap();
    let s_other = side(md, other, hyp);
    let (sa, sb) = if a_small { (&cache.side, &s_other) } else { (&s_other, &cache.side) };

    sw.cm.check(sa.t1 && sb.t1 && sa.t2 && sb.t2, || format!("{p:?} in Z_{m}"));
    let flat_b = TilingInstance::new(md.clone(), sa.flat.clone(), b.clone()).unwrap().verify_direct();
    let flat_a = TilingInstance::new(md.clone(), sb.flat.clone(), a.clone()).unwrap().verify_direct();
    sw.flat.check(flat_b == sb.t2 && flat_a == sa.t2, || format!("{p:?} in Z_{m}"));
    for vo in &s_other.views {
        if !cache.seen.insert(vo.entries.clone()) {
            continue;
        }
        for vs in &cache.side.views {
            let (va, vb) = if a_small { (vs, vo) } else { (vo, vs) };
            let one = tiling::box_product(md, va, vb).unwrap() == Ratio::ONE;
            sw.boxes.check(one, || format!("{p:?} in Z_{m} at ({}, {})", va.anchor, vb.anchor));
        }
    }
    // a hypothesis fails at some (x, y) exactly when both sides have a box holding both divisors
    let clash = sa.hits & sb.hits;
    sw.exclusion.check_many((m * m * hyp.len()) as u64, clash == 0, || {
        let (m1, m2) = hyp[clash.trailing_zeros() as usize];
        let (xa, xb) = (sa.views.iter(), sb.views.iter());
        let (va, vb) = xa.flat_map(|va| xb.clone().map(move |vb| (va, vb))).find(|(va, vb)| !tiling::exclusion_holds(va, vb, m1, m2)).unwrap();
        format!("{p:?} in Z_{m}, ({m1}, {m2}) at ({}, {})", va.anchor, vb.anchor)
    });
    if fresh_tile {
        let direct = |sd: &Side| {
            hyp.iter().enumerate().fold(0u128, |acc, (i, &(m1, m2))| {
                let hit = sd.views.iter().any(|v| v.get(m1) != 0 && v.get(m2) != 0);
                acc | (hit as u128) << i
            })
        };
        let mut same = direct(sa) == sa.hits && direct(sb) == sb.hits;
        if m <= 36 {
            let holds = sa.views.iter().all(|va| {
                sb.views.iter().all(|vb| hyp.iter().all(|&(m1, m2)| tiling::exclusion_holds(va, vb, m1, m2)))
            });
            same &= holds == (clash == 0);
        }
        sw.exclusion.check(same, || format!("box mask shortcut on {p:?} in Z_{m}"));
    }
    sw.planes.check(sa.plane_ok && sb.plane_ok, || format!("{p:?} in Z_{m}"));
}

fn sweep_scope(sw: &Sweep) -> String {
    let parts: Vec<String> = sw
        .pairs
        .iter()
        .map(|(m, cap, n)| match cap {
            None => format!("Z_{m}: {n}"),
            Some(c) => format!("Z_{m} (<= {c} complements per tile): {n}"),
        })
        .collect();
    format!("pairs {}", parts.join(", "))
}

// ---------------------------------------------------------------- criterion 2

fn cm_necessity(shared: &mut Shared) -> Verdict {
    let sw = shared.sweep();
    Verdict {
        pass: sw.enumeration.ok() && sw.tiling.ok() && sw.cm.ok() && sw.elapsed < SWEEP_LIMIT,
        detail: format!(
            "{}; enumeration vs exact cover: {}; T1 and T2 on both sides: {}; sweep {:.1}s",
            sweep_scope(sw),
            sw.enumeration.summary(),
            sw.cm.summary(),
            sw.elapsed.as_secs_f64()
        ),
    }
}

// ---------------------------------------------------------------- criterion 3

fn flat_equivalence(shared: &mut Shared) -> Verdict {
    let sw = shared.sweep();
    Verdict { pass: sw.flat.ok(), detail: format!("both orientations: {}", sw.flat.summary()) }
}

// ---------------------------------------------------------------- criterion 4

fn flat_pair_225() -> VerifiedTiling {
    let md = Modulus::new(&[(3, 2), (5, 2)]).unwrap();
    let a: Vec<usize> = (0..15).map(|k| 15 * k).collect();
    let mut b: Vec<usize> = (0..3).flat_map(|u| (0..5).map(move |v| 25 * u + 9 * v)).collect();
    b.sort_unstable();
    verified(&md, &a, &b)
}

fn m3() -> Modulus {
    Modulus::new(&[(3, 2), (5, 2), (7, 2)]).unwrap()
}

fn box_b() -> Vec<usize> {
    let mut b: Vec<usize> =
        (0..3).flat_map(|u| (0..5).flat_map(move |v| (0..7).map(move |w| (1225 * u + 441 * v + 225 * w) % 11025))).collect();
    b.sort_unstable();
    b
}

fn flat_pair_11025() -> VerifiedTiling {
    let a: Vec<usize> = (0..105).map(|k| 105 * k).collect();
    verified(&m3(), &a, &box_b())
}

fn all_views(vt: &VerifiedTiling, s: &Multiset) -> Vec<BoxView> {
    let md = vt.modulus();
    (0..md.order()).map(|x| tiling::box_view(md, s, md.m(), x, None).unwrap()).collect()
}

fn box_identity(shared: &mut Shared) -> Verdict {
    let sw = shared.sweep();
    let mut flat = Tally::default();
    let vt = flat_pair_225();
    let (av, bv) = (all_views(&vt, vt.a()), all_views(&vt, vt.b()));
    for va in &av {
        for vb in &bv {
            flat.check(tiling::box_product(vt.modulus(), va, vb).unwrap() == Ratio::ONE, || {
                format!("Z_225 at ({}, {})", va.anchor, vb.anchor)
            });
        }
    }
    let vt = flat_pair_11025();
    let md = vt.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..BOX_SAMPLES {
        let (x, y) = (rng.gen_range(0..11025), rng.gen_range(0..11025));
        let va = tiling::box_view(md, vt.a(), md.m(), x, None).unwrap();
        let vb = tiling::box_view(md, vt.b(), md.m(), y, None).unwrap();
        flat.check(tiling::box_product(md, &va, &vb).unwrap() == Ratio::ONE, || format!("Z_11025 at ({x}, {y})"));
    }
    Verdict {
        pass: sw.boxes.ok() && flat.ok(),
        detail: format!(
            "enumerated tilings, every (x, y) via distinct boxes: {}; flat pairs (all of Z_225^2, {BOX_SAMPLES} seeded in Z_11025): {}",
            sw.boxes.summary(),
            flat.summary()
        ),
    }
}

// ---------------------------------------------------------------- criterion 5

fn random_multiset(rng: &mut ChaCha8Rng, m: usize, structured: bool) -> Vec<i64> {
    let mut w = vec![0i64; m];
    if structured {
        let divs = oracle::divisors(m);
        let primes: Vec<usize> = divs.iter().copied().filter(|&d| d > 1 && oracle::divisors(d).len() == 2).collect();
        for _ in 0..rng.gen_range(1..=4) {
            let p = *primes.choose(rng).unwrap();
            let d = *divs.iter().filter(|&&d| d % p == 0).collect::<Vec<_>>().choose(rng).unwrap();
            let (t, c) = (rng.gen_range(0..m), m / d);
            for j in 0..p {
                w[(t + j * c) % m] += 1;
            }
        }
        for _ in 0..rng.gen_range(0..2) {
            w[rng.gen_range(0..m)] += 1;
        }
    } else {
        for _ in 0..rng.gen_range(1..=m / 3) {
            w[rng.gen_range(0..m)] += rng.gen_range(1..=3);
        }
    }
    w
}

fn dual_path(_: &mut Shared) -> Verdict {
    let mut agree = Tally::default();
    let mut divisible = 0u64;
    for (m, seed) in [(36usize, 36u64), (225, 225)] {
        let md = modulus(m);
        let res = oracle::Residues::new(m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..1000 {
            let w = random_multiset(&mut rng, m, i % 2 == 1);
            let a = Multiset::from_weights(w.clone());
            let spec = res.spectrum(&w);
            for &s in md.divisors() {
                let poly = cyclo::phi_divides(&md, s, &a).unwrap();
                let cub = cuboid::phi_divides_via_cuboids(&md, s, &a).unwrap();
                let truth = match res.divs.iter().position(|&d| d as u64 == s) {
                    Some(idx) => spec >> idx & 1 == 1,
                    None => w.iter().sum::<i64>() == 0,
                };
                divisible += u64::from(truth);
                agree.check(poly == truth && cub == truth, || format!("Φ_{s} on multiset {i} of Z_{m}: {poly} {cub} {truth}"));
            }
        }
    }
    Verdict {
        pass: agree.ok(),
        detail: format!("1000 multisets each in Z_36 and Z_225, every s | m: {} ({divisible} divisible)", agree.summary()),
    }
}

// ---------------------------------------------------------------- criterion 6

fn is_grid(a: &[usize]) -> bool {
    a.len() == 105 && a.iter().all(|&x| x % 105 == a[0] % 105)
}

fn round_trip(_: &mut Shared) -> Verdict {
    let flat = flat_pair_11025();
    let md = flat.modulus().clone();
    let mut steps = Tally::default();
    let mut recovered = Tally::default();
    let mut slowest = Duration::ZERO;
    for k in 1..=5 {
        for seed in 0..2u64 {
            let t = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(100 * k as u64 + seed);
            let (end, moves) = reduce::random_shifts(&flat, k, &mut rng).unwrap();
            steps.check(moves.len() == k, || format!("k = {k}, seed {seed}: {} moves", moves.len()));
            let mut cur = flat.clone();
            for mv in &moves {
                cur = reduce::fiber_shift(&cur, mv).unwrap();
                let ok = cur.instance().verify().unwrap()
                    && cyclo::s_a(&md, cur.a()).unwrap() == vec![9, 25, 49];
                steps.check(ok, || format!("k = {k}, seed {seed}, after {mv:?}"));
            }
            steps.check(cur.a() == end.a(), || format!("k = {k}, seed {seed}: replay differs"));
            let r = reduce::classify(end.instance(), DEFAULT_BUDGET).unwrap();
            let ok = r.branch == Branch::GridReduction
                && r.t2_a
                && r.t2_b
                && r.trace.as_ref().is_some_and(|tr| is_grid(&tr.final_a) && tr.verdicts.iter().all(|&v| v));
            let took = t.elapsed();
            slowest = slowest.max(took);
            recovered.check(ok && took < ROUND_TRIP_LIMIT, || format!("k = {k}, seed {seed}: {:?} in {took:?}", r.branch));
        }
    }
    Verdict {
        pass: steps.ok() && recovered.ok(),
        detail: format!(
            "k = 1..5, two seeds each; intermediates: {}; grid recovered with T2 on both sides: {}; slowest {:.1}s",
            steps.summary(),
            recovered.summary(),
            slowest.as_secs_f64()
        ),
    }
}

// ---------------------------------------------------------------- criterion 7

fn tiles_225() -> Vec<Vec<usize>> {
    let sum = |x: &[usize], y: &[usize]| {
        let mut v: Vec<usize> = x.iter().flat_map(|&a| y.iter().map(move |&b| (a + b) % 225)).collect();
        v.sort_unstable();
        v
    };
    let r = |n: usize, step: usize| (0..n).map(|j| j * step).collect::<Vec<_>>();
    vec![
        r(9, 1),
        sum(&r(3, 1), &r(3, 75)),
        sum(&r(3, 1), &r(3, 25)),
        sum(&r(3, 25), &r(3, 75)),
        sum(&r(3, 3), &r(3, 75)),
        r(15, 1),
        sum(&r(5, 1), &r(3, 75)),
        sum(&r(5, 1), &r(3, 25)),
        sum(&r(5, 9), &r(3, 1)),
        sum(&r(3, 1), &r(5, 45)),
    ]
}

fn subtile_equivalence(_: &mut Shared) -> Verdict {
    let mut instances: Vec<(String, VerifiedTiling)> = Vec::new();
    let flat = flat_pair_225();
    instances.push(("flat Z_225".into(), flat.clone()));
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (vt, _) = reduce::random_shifts(&flat, 1 + seed as usize, &mut rng).unwrap();
        instances.push((format!("shifted Z_225 seed {seed}"), vt));
    }
    let md = flat.modulus().clone();
    for small in tiles_225() {
        let task = EnumerationTask { complement_cap: Some(3), ..EnumerationTask::new(225, small.len()) };
        for p in search::pairs_for(&task, &small) {
            let vt = verified(&md, &p.a, &p.b);
            instances.push((format!("{:?} + ({} elements)", p.a, p.b.len()), vt.swapped()));
            instances.push((format!("{:?} with {} elements", p.a, p.b.len()), vt));
        }
    }
    let big = flat_pair_11025();
    instances.push(("flat Z_11025".into(), big.clone()));
    instances.push(("shifted Z_11025".into(), fixture_shifted()));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    instances.push(("seeded shifts Z_11025".into(), reduce::random_shifts(&big, 4, &mut rng).unwrap().0));
    instances.push(("slab Z_11025".into(), slab_instance()));
    instances.push(("subgroup Z_11025".into(), subgroup_instance()));

    let mut agree = Tally::default();
    let (mut used, mut holds, mut fails, mut fibered) = (0, 0, 0, 0);
    for (name, vt) in &instances {
        let md = vt.modulus();
        let mut any = false;
        for nu in 0..md.rank() {
            if !cyclo::phi_divides(md, md.prime_power(nu), vt.a()).unwrap() {
                continue;
            }
            any = true;
            let r = reduce::subtile_report(vt, nu).unwrap();
            agree.check(r.agrees(), || format!("{name}, direction {nu}: condition {}", r.condition));
            if r.condition {
                holds += 1;
            } else {
                fails += 1;
            }
        }
        if any {
            used += 1;
            if (0..md.rank()).any(|nu| !reduce::m_fibers(md, vt.a(), nu).is_empty()) {
                fibered += 1;
            }
        }
    }
    Verdict {
        pass: agree.ok() && used >= 20 && fibered > 0 && fibered < used,
        detail: format!(
            "{used} instances ({fibered} with an M-fiber), condition true {holds} / false {fails}: {}",
            agree.summary()
        ),
    }
}

fn fixture_shifted() -> VerifiedTiling {
    let mut vt = flat_pair_11025();
    for mv in [ShiftMove { direction: 0, root: 0, target: 1225 }, ShiftMove { direction: 1, root: 105, target: 546 }] {
        vt = reduce::fiber_shift(&vt, &mv).unwrap();
    }
    vt
}

fn slab_instance() -> VerifiedTiling {
    let md = m3();
    let mut a: Vec<usize> = (0..3)
        .flat_map(|x| (0..5).flat_map(move |y| (0..7).map(move |z| [3 * x, 5 * y + (x + z) % 5, 7 * z])))
        .map(|c| md.from_coords(&c).unwrap())
        .collect();
    a.sort_unstable();
    let mut b: Vec<usize> = (0..3)
        .flat_map(|u| (0..5).flat_map(move |v| (0..7).map(move |w| [u, v, w])))
        .map(|c| md.from_coords(&c).unwrap())
        .collect();
    b.sort_unstable();
    verified(&md, &a, &b)
}

fn subgroup_instance() -> VerifiedTiling {
    let md = m3();
    let t = |c: u64| 1 + u64::from(c % 2 == 1);
    let mut pts = Vec::new();
    for y in 0..5 {
        for z in 0..7 {
            pts.push([0, 5 * y, 7 * z]);
            pts.push([3, 5 * y + t(z), 7 * z]);
            pts.push([6, 5 * y, 7 * z + t(y)]);
        }
    }
    let mut a: Vec<usize> = pts.iter().map(|c| md.from_coords(c).unwrap()).collect();
    a.sort_unstable();
    let mut b: Vec<usize> = (0..3)
        .flat_map(|u| (0..5).flat_map(move |v| (0..7).map(move |w| [u, v, w])))
        .map(|c| md.from_coords(&c).unwrap())
        .collect();
    b.sort_unstable();
    verified(&md, &a, &b)
}

// ---------------------------------------------------------------- criterion 8

fn grid_set(md: &Modulus, pts: &[[usize; 3]]) -> Multiset {
    let m = md.order();
    let mut v: Vec<usize> = pts
        .iter()
        .map(|c| c.iter().enumerate().map(|(nu, &t)| t * md.fiber_scale(nu) as usize).sum::<usize>() % m)
        .collect();
    v.sort_unstable();
    v.dedup();
    set(m, &v)
}

struct Fixture {
    label: &'static str,
    modulus: Modulus,
    a: Multiset,
    /// The divisors `D(M) | m | M` that the grid must miss.
    missing: Vec<u64>,
}

fn fixtures() -> Vec<Fixture> {
    let odd = m3();
    let even = Modulus::new(&[(2, 2), (3, 2), (5, 2)]).unwrap();
    let mut out = Vec::new();

    let mut pts = Vec::new();
    for j in 0..2 {
        for k in 0..3 {
            pts.push([0, j, k]);
        }
    }
    for i in 1..3 {
        for j in 2..5 {
            for k in 3..7 {
                pts.push([i, j, k]);
            }
        }
    }
    pts.extend((0..7).map(|l| [1, 0, l]));
    out.push(Fixture { label: "diagonal-boxes", a: grid_set(&odd, &pts), modulus: odd.clone(), missing: vec![] });

    let mut pts: Vec<[usize; 3]> = (0..3).map(|t| [t, 0, 0]).collect();
    pts.extend((0..5).map(|t| [0, t, 1]));
    pts.extend((0..3).map(|t| [t, 2, 4]));
    out.push(Fixture { label: "corner", a: grid_set(&odd, &pts), modulus: odd.clone(), missing: vec![11025 / 15] });

    let mut pts = Vec::new();
    for t in 0..5 {
        pts.extend([[0, t, 0], [0, t, 3], [2, t, 5]]);
    }
    for t in 0..7 {
        pts.extend([[1, 0, t], [1, 2, t]]);
    }
    out.push(Fixture { label: "extended-corner", a: grid_set(&odd, &pts), modulus: odd.clone(), missing: vec![] });

    let mut pts = vec![[1, 0, 0], [2, 0, 0]];
    for j in 1..5 {
        for k in 1..7 {
            pts.push([0, j, k]);
        }
    }
    out.push(Fixture {
        label: "full-plane",
        a: grid_set(&odd, &pts),
        modulus: odd.clone(),
        missing: vec![11025 / 21, 11025 / 15],
    });

    let mut pts = Vec::new();
    for l in 0..3 {
        pts.extend([[1, 0, l], [2, 0, l]]);
    }
    for l in 3..7 {
        pts.extend((1..5).map(|s| [0, s, l]));
    }
    out.push(Fixture { label: "almost-corner", a: grid_set(&odd, &pts), modulus: odd.clone(), missing: vec![11025 / 15] });

    let mut pts: Vec<[usize; 3]> = (0..3).map(|t| [0, t, 0]).collect();
    pts.extend((0..5).map(|t| [1, 0, t]));
    out.push(Fixture { label: "even-corner", a: grid_set(&even, &pts), modulus: even.clone(), missing: vec![900 / 15] });

    let mut pts = vec![[0, 0, 0], [0, 0, 1]];
    for i in 1..3 {
        for j in 2..5 {
            pts.push([1, i, j]);
        }
    }
    out.push(Fixture { label: "even-diagonal-boxes", a: grid_set(&even, &pts), modulus: even, missing: vec![] });
    out
}

/// The divisor profile each label carries, read off the classification.
fn profile_holds(label: &str, md: &Modulus, c: &GridClassification, expected_missing: &[u64]) -> bool {
    let big = md.m();
    let pair = |i: usize, j: usize| big / (md.prime(i) * md.prime(j));
    let mut missing = c.missing.clone();
    missing.sort_unstable();
    match (label, &c.finding) {
        ("full-plane", StructureFinding::FullPlane { direction, .. }) => {
            let others: Vec<usize> = (0..3).filter(|nu| nu != direction).collect();
            let mut want = vec![pair(*direction, others[0]), pair(*direction, others[1])];
            want.sort_unstable();
            missing == want && missing == expected_missing
        }
        ("corner" | "almost-corner", StructureFinding::Corner { direction, .. } | StructureFinding::AlmostCorner { direction, .. }) => {
            let others: Vec<usize> = (0..3).filter(|nu| nu != direction).collect();
            missing == vec![pair(others[0], others[1])] && missing == expected_missing
        }
        ("even-corner", StructureFinding::EvenCorner { .. }) => {
            let two = (0..3).find(|&nu| md.prime(nu) == 2).unwrap();
            let odd: Vec<usize> = (0..3).filter(|&nu| nu != two).collect();
            missing == vec![pair(odd[0], odd[1])] && !missing.contains(&(big / 2)) && missing == expected_missing
        }
        ("even-diagonal-boxes", StructureFinding::EvenDiagonalBoxes { .. }) => missing.contains(&(big / 2)),
        ("diagonal-boxes", StructureFinding::DiagonalBoxes { .. }) => missing.is_empty(),
        ("extended-corner", StructureFinding::ExtendedCorner { .. }) => missing.is_empty(),
        _ => false,
    }
}

fn structure_detectors(_: &mut Shared) -> Verdict {
    let mut t = Tally::default();
    let mut seen = Vec::new();
    for f in fixtures() {
        let c = structure::classify_unfibered_grid(&f.modulus, &f.a, 0).unwrap();
        let view = GridView::new(&f.modulus, &f.a, 0).unwrap();
        let ok = c.finding.kind() == f.label
            && c.finding.revalidate(&f.modulus, &view)
            && profile_holds(f.label, &f.modulus, &c, &f.missing);
        t.check(ok, || format!("{}: got {} missing {:?}", f.label, c.finding.kind(), c.missing));
        seen.push(f.label);
    }
    // an extended corner met inside an actual tiling
    let vt = fixture_shifted();
    let r = reduce::classify(vt.instance(), DEFAULT_BUDGET).unwrap();
    let a = if r.swapped { vt.b() } else { vt.a() };
    let hit = r.structures.iter().any(|c| {
        matches!(c.finding, StructureFinding::ExtendedCorner { .. })
            && c.finding.revalidate(vt.modulus(), &GridView::new(vt.modulus(), a, c.base).unwrap())
    });
    t.check(hit, || "no extended corner in the shifted tiling".into());
    Verdict { pass: t.ok() && seen.len() == 7, detail: format!("labels {seen:?} plus one tiling: {}", t.summary()) }
}

// ---------------------------------------------------------------- criterion 9

fn exclusion_and_planes(shared: &mut Shared) -> Verdict {
    let sw = shared.sweep();
    let md = m3();
    let divs = md.divisors().to_vec();
    let mut hyp = Vec::new();
    for &m1 in &divs {
        for &m2 in &divs {
            if tiling::exclusion_hypothesis(&md, m1, m2).is_ok() {
                hyp.push((m1, m2));
            }
        }
    }
    let mut sampled = Tally::default();
    let mut planes = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut big = vec![("flat", flat_pair_11025()), ("shifted", fixture_shifted())];
    big.push(("seeded shifts", reduce::random_shifts(&big[0].1, 5, &mut rng).unwrap().0));
    for (name, vt) in &big {
        for _ in 0..EXCLUSION_SAMPLES {
            let (x, y) = (rng.gen_range(0..11025), rng.gen_range(0..11025));
            let (m1, m2) = hyp[rng.gen_range(0..hyp.len())];
            let ok = vt.enhanced_divisor_exclusion(x, y, m1, m2).unwrap();
            sampled.check(ok, || format!("{name}: x = {x}, y = {y}, ({m1}, {m2})"));
        }
        planes.check(structure::plane_bound_check(vt).unwrap(), || format!("{name}"));
    }
    Verdict {
        pass: sw.exclusion.ok() && sw.planes.ok() && sampled.ok() && planes.ok(),
        detail: format!(
            "enumerated tilings: exclusion over every (x, y, hypothesis) {}, plane bound {}; Z_11025 ({EXCLUSION_SAMPLES} seeded tuples on each of 3 tilings): exclusion {}, plane bound {}",
            sw.exclusion.summary(),
            sw.planes.summary(),
            sampled.summary(),
            planes.summary()
        ),
    }
}
