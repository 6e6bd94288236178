//! Explicit codebooks for the two presets: the count sequences `a(n)`,
//! `F(n)`, the block families `α_{F(n)}`, their closed-form errors, and greedy
//! block refinement between them.
//!
//! A block is one region address `ω` together with what sits in it: an
//! optimal `m`-point quantizer of ν copied into `C_ω`, the single point
//! `S_ω(E(P))` for `J_ω`, or a copy of the optimal two-point quantizer of P in
//! `J_ω`. A codebook is the union of its blocks.

use crate::error::{Error, Result};
use crate::integrals::descend;
use crate::measure::{CondensationSystem, Preset, RegionKind, Word};
use crate::rational::{int, pow, rat, sq, Rational};
use crate::solver::discrete_nu_closed;
use num::{BigUint, One};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

/// `(a(n), F(n))`: ν block size at the top level and total count.
pub fn seq(case: Preset, n: u32) -> Result<(u64, u64)> {
    match case {
        Preset::Discrete => {
            if n < 1 {
                return Err(Error::DomainTooSmall { n, min: 1 });
            }
            if n > 60 {
                return Err(Error::InvalidArgument(format!("F({n}) does not fit in 64 bits")));
            }
            Ok((2 * n as u64, 5 * (1u64 << n) - 2 * n as u64 - 4))
        }
        Preset::Uniform => {
            if n > 30 {
                return Err(Error::InvalidArgument(format!("F({n}) does not fit in 64 bits")));
            }
            let a = if n == 0 { 0 } else { 2 * n as u64 - 1 };
            Ok((a, (1u64 << (2 * n)) + (1u64 << (n + 1))))
        }
    }
}

/// `F(n)` as a big integer, for levels beyond 64-bit range.
pub fn f_big(case: Preset, n: u32) -> Result<BigUint> {
    check_level(case, n)?;
    let one = BigUint::one();
    Ok(match case {
        Preset::Discrete => (BigUint::from(5u32) << n as usize) - 2 * n - 4u32,
        Preset::Uniform => (&one << (2 * n as usize)) + (&one << (n as usize + 1)),
    })
}

fn check_level(case: Preset, n: u32) -> Result<()> {
    match case {
        Preset::Discrete if n < 1 => Err(Error::DomainTooSmall { n, min: 1 }),
        _ => Ok(()),
    }
}

/// Size of the ν block at the root of `α_{F(n)}`: `a(n)` points for the
/// discrete preset, `2^{a(n)}` for the uniform one.
fn nu_block_size(case: Preset, n: u32) -> Result<u64> {
    let (a, _) = seq(case, n)?;
    Ok(match case {
        Preset::Discrete => a,
        Preset::Uniform => 1u64 << a,
    })
}

/// What a block places in its region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    /// Optimal `m`-point quantizer of ν, copied into `C_ω`.
    NuOptimal(u64),
    /// The single point `S_ω(E(P))`.
    PCenter,
    /// The optimal two-point quantizer of P, copied into `J_ω`.
    PPair,
}

impl Payload {
    pub fn count(self) -> u64 {
        match self {
            Payload::NuOptimal(m) => m,
            Payload::PCenter => 1,
            Payload::PPair => 2,
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::NuOptimal(m) => write!(f, "nu-optimal({m})"),
            Payload::PCenter => write!(f, "p-center"),
            Payload::PPair => write!(f, "p-pair"),
        }
    }
}

/// How many replacements each lineage may receive during [`greedy_refine`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyPolicy {
    /// Always refine the globally worst block.
    Unbounded,
    /// One level's worth of refinement: every block of the starting family
    /// may be replaced twice (ν blocks grow two steps, a centre becomes a
    /// pair and then a three-point structure). Blocks created by splitting a
    /// pair are final, except that the new ν core may grow once more in the
    /// discrete case. This reproduces the passage `α_{F(n)} → α_{F(n+1)}`.
    PaperRound,
}

/// One region and its payload, with exact errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub word: Word,
    pub payload: Payload,
    pub count: u64,
    /// Distortion contributed by the block's region.
    pub total_error: Rational,
    /// `total_error / count`.
    pub per_point_error: Rational,
    /// The error that ranks blocks for refinement: the error attributed to a
    /// single element of the block.
    pub priority: Rational,
    budget: Option<u8>,
}

impl Block {
    /// Sort key: larger priority first, then word, then payload size.
    fn order(&self, other: &Self) -> Ordering {
        other
            .priority
            .cmp(&self.priority)
            .then_with(|| self.word.cmp(&other.word))
            .then_with(|| self.count.cmp(&other.count))
    }

    fn region_kind(&self) -> RegionKind {
        match self.payload {
            Payload::NuOptimal(_) => RegionKind::C,
            _ => RegionKind::J,
        }
    }
}

/// Constants of one preset that the block arithmetic needs.
#[derive(Clone, Debug)]
pub struct Kit {
    pub case: Preset,
    pub sys: CondensationSystem,
    /// The optimal two-point quantizer of P.
    pub pair: [Rational; 2],
    /// Its error, and the error of its worse cell.
    pub pair_error: Rational,
    pub pair_max_cell: Rational,
}

impl Kit {
    pub fn new(case: Preset) -> Self {
        let sys = CondensationSystem::preset(case);
        let pair = match case {
            Preset::Discrete => [rat(659, 2730), rat(1621, 1950)],
            Preset::Uniform => [rat(13, 60), rat(47, 60)],
        };
        // Both pairs are aligned with the region tree, so a shallow descent is exact.
        let d = descend(&sys, &pair[..], 6).expect("valid pair");
        debug_assert_eq!(d.lower, d.upper);
        let pair_max_cell = d.cells.iter().map(|c| c.cost.clone()).max().expect("two cells");
        Kit { case, sys, pair, pair_error: d.upper, pair_max_cell }
    }

    /// Exact `V_m(ν)`.
    pub fn nu_error(&self, m: u64) -> Rational {
        match self.case {
            Preset::Discrete => discrete_nu_closed(m as u32),
            Preset::Uniform => rat(1, 300) / sq(&int(m as i64)),
        }
    }

    /// The optimal `m` points of ν.
    pub fn nu_points(&self, m: u64) -> Vec<Rational> {
        let nu = self.sys.nu();
        match self.case {
            Preset::Discrete => {
                let mut v: Vec<Rational> = (1..m as u32).map(|j| nu.atom(j).expect("valid index")).collect();
                v.push(nu.tail_mean(m as u32).expect("valid index"));
                v
            }
            Preset::Uniform => {
                let (lo, hi) = nu.support();
                let d = hi - lo;
                (1..=m as i64).map(|i| lo + &d * rat(2 * i - 1, 2 * m as i64)).collect()
            }
        }
    }

    fn scale(&self, word: &Word, kind: RegionKind) -> Rational {
        let map = self.sys.word_map(word).expect("preset words are valid");
        self.sys.region_mass(word, kind).expect("valid word") * sq(&map.ratio)
    }

    pub fn block(&self, word: Word, payload: Payload, budget: Option<u8>) -> Block {
        let count = payload.count();
        let (total_error, priority) = match payload {
            Payload::NuOptimal(m) => {
                let total = self.scale(&word, RegionKind::C) * self.nu_error(m);
                // A discrete copy is ranked by its whole error, a uniform one per point.
                let pr = match self.case {
                    Preset::Discrete => total.clone(),
                    Preset::Uniform => &total / int(m as i64),
                };
                (total, pr)
            }
            Payload::PCenter => {
                let t = self.scale(&word, RegionKind::J) * &self.sys.moments().variance;
                (t.clone(), t)
            }
            Payload::PPair => {
                let s = self.scale(&word, RegionKind::J);
                let pr = match self.case {
                    Preset::Discrete => &s * &self.pair_error,
                    Preset::Uniform => &s * &self.pair_max_cell,
                };
                (s * &self.pair_error, pr)
            }
        };
        let per_point_error = &total_error / int(count as i64);
        Block { word, payload, count, total_error, per_point_error, priority, budget }
    }

    /// Points of a block, increasing.
    pub fn block_points(&self, b: &Block) -> Vec<Rational> {
        let map = self.sys.word_map(&b.word).expect("valid word");
        match b.payload {
            Payload::NuOptimal(m) => self.nu_points(m).iter().map(|x| map.apply(x)).collect(),
            Payload::PCenter => vec![map.apply(&self.sys.moments().mean)],
            Payload::PPair => self.pair.iter().map(|x| map.apply(x)).collect(),
        }
    }

    /// The blocks that replace `b` when it is refined, given `room` points
    /// still to add.
    fn refine(&self, b: &Block, room: u64, policy: GreedyPolicy) -> Vec<Block> {
        let next = |budget: Option<u8>| budget.map(|x| x.saturating_sub(1));
        match b.payload {
            Payload::NuOptimal(m) => {
                let step = match self.case {
                    Preset::Discrete => 1,
                    Preset::Uniform => m.min(room),
                };
                vec![self.block(b.word.clone(), Payload::NuOptimal(m + step), next(b.budget))]
            }
            Payload::PCenter => vec![self.block(b.word.clone(), Payload::PPair, next(b.budget))],
            Payload::PPair => {
                let (child, core) = match policy {
                    GreedyPolicy::Unbounded => (None, None),
                    GreedyPolicy::PaperRound => (
                        Some(0),
                        Some(match self.case {
                            Preset::Discrete => 1,
                            Preset::Uniform => 0,
                        }),
                    ),
                };
                let mut out = Vec::new();
                for j in 1..=self.sys.num_maps() as u8 {
                    if j == 2 {
                        out.push(self.block(b.word.clone(), Payload::NuOptimal(1), core));
                    }
                    out.push(self.block(b.word.child(j), Payload::PCenter, child));
                }
                out
            }
        }
    }
}

/// A codebook given as disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFamily {
    pub case: Preset,
    /// Blocks in canonical order (by word, then payload).
    pub blocks: Vec<Block>,
    pub total_count: u64,
    pub total_error: Rational,
}

impl BlockFamily {
    pub fn from_blocks(case: Preset, mut blocks: Vec<Block>) -> Self {
        blocks.sort_by(|a, b| a.word.cmp(&b.word).then(a.payload.cmp(&b.payload)));
        let total_count = blocks.iter().map(|b| b.count).sum();
        let total_error = blocks.iter().map(|b| &b.total_error).sum();
        BlockFamily { case, blocks, total_count, total_error }
    }

    /// Sorted point multiset of the codebook.
    pub fn points(&self, kit: &Kit) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.blocks.iter().flat_map(|b| kit.block_points(b)).collect();
        v.sort();
        v
    }

    /// `(word, payload)` pairs in canonical order.
    pub fn shape(&self) -> Vec<(Word, Payload)> {
        self.blocks.iter().map(|b| (b.word.clone(), b.payload)).collect()
    }

    /// Every block's points own its whole region: the nearest foreign points
    /// on either side are at least as far from the region as the block's own
    /// outermost points (exact midpoint test against the region hull).
    pub fn voronoi_aligned(&self, kit: &Kit) -> bool {
        let all = self.points(kit);
        for b in &self.blocks {
            let pts = kit.block_points(b);
            let (lo, hi) = kit.sys.region_hull(&b.word, b.region_kind()).expect("valid word");
            let first = &pts[0];
            let last = &pts[pts.len() - 1];
            if pts.iter().any(|p| p < &lo || p > &hi) {
                return false;
            }
            let i = all.partition_point(|x| x < first);
            if i > 0 && (&all[i - 1] + first) / int(2) > lo {
                return false;
            }
            let j = all.partition_point(|x| x <= last);
            if j < all.len() && (last + &all[j]) / int(2) < hi {
                return false;
            }
        }
        true
    }

    /// No point inside the gaps `(1/5, 2/5)` and `(3/5, 4/5)` of the first level.
    pub fn avoids_gaps(&self, kit: &Kit) -> bool {
        let gaps = [(rat(1, 5), rat(2, 5)), (rat(3, 5), rat(4, 5))];
        self.points(kit).iter().all(|p| gaps.iter().all(|(a, b)| !(a < p && p < b)))
    }

    /// Splits a family without blocks at the root `J` region into the parts
    /// under `S_1`, under `S_2` (both pulled back to the unit level) and the
    /// ν quantizer at the root. `None` when the root is a centre or a pair.
    pub fn split(&self, kit: &Kit) -> Option<(BlockFamily, BlockFamily, u64)> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut core = None;
        for b in &self.blocks {
            if b.word.is_empty() {
                match b.payload {
                    Payload::NuOptimal(m) => core = Some(m),
                    _ => return None,
                }
                continue;
            }
            let rest = Word::new(b.word.letters()[1..].to_vec()).expect("shorter word");
            let nb = kit.block(rest, b.payload, b.budget);
            match b.word.letters()[0] {
                1 => left.push(nb),
                _ => right.push(nb),
            }
        }
        Some((BlockFamily::from_blocks(self.case, left), BlockFamily::from_blocks(self.case, right), core?))
    }
}

/// `α_{F(n)}`: ν blocks of size `a(n−k)` (discrete) or `2^{a(n−k)}` (uniform)
/// at every word of length `k`, plus centres at the deepest level.
pub fn alpha_f(case: Preset, n: u32) -> Result<BlockFamily> {
    alpha_f_with(&Kit::new(case), n)
}

pub fn alpha_f_with(kit: &Kit, n: u32) -> Result<BlockFamily> {
    let case = kit.case;
    seq(case, n)?;
    let (nu_levels, centre_level) = match case {
        Preset::Discrete => (n, n),
        Preset::Uniform => (n + 1, n + 1),
    };
    let maps = kit.sys.num_maps() as u8;
    let mut blocks = Vec::new();
    for k in 0..nu_levels {
        let m = nu_block_size(case, n - k)?;
        for w in Word::all(maps, k as usize) {
            blocks.push(kit.block(w, Payload::NuOptimal(m), Some(2)));
        }
    }
    for w in Word::all(maps, centre_level as usize) {
        blocks.push(kit.block(w, Payload::PCenter, Some(2)));
    }
    Ok(BlockFamily::from_blocks(case, blocks))
}

/// Closed form of the error of `α_{F(n)}`.
pub fn v_f_closed(case: Preset, n: u32) -> Result<Rational> {
    check_level(case, n)?;
    let n32 = n;
    Ok(match case {
        Preset::Discrete => rat(769208, 5884749) * pow(&rat(2, 75), n32) - rat(64, 3339) * pow(&rat(1, 64), n32),
        Preset::Uniform => match n {
            0 => rat(89, 21900),
            1 => rat(2537, 6570000),
            _ => rat(1, 129) * pow(&rat(1, 16), n32) - rat(3473, 941700) * pow(&rat(2, 75), n32),
        },
    })
}

/// Blocks sorted by decreasing priority; ties by word, then payload size.
pub fn block_order(blocks: &[Block]) -> Vec<Block> {
    let mut v = blocks.to_vec();
    v.sort_by(|a, b| a.order(b));
    v
}

struct Ranked(Block);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: the block that sorts first must compare greatest.
        other.0.order(&self.0)
    }
}

/// Repeatedly replaces the highest-priority block by its next-size payload
/// until the family holds `target` points.
pub fn greedy_refine(family: &BlockFamily, target: u64, policy: GreedyPolicy) -> Result<BlockFamily> {
    greedy_refine_with(&Kit::new(family.case), family, target, policy)
}

pub fn greedy_refine_with(kit: &Kit, family: &BlockFamily, target: u64, policy: GreedyPolicy) -> Result<BlockFamily> {
    if target < family.total_count {
        return Err(Error::CountUnreachable { target, current: family.total_count });
    }
    let eligible = |b: &Block| policy == GreedyPolicy::Unbounded || b.budget.is_some_and(|x| x > 0);
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    for b in &family.blocks {
        let mut b = b.clone();
        if policy == GreedyPolicy::Unbounded {
            b.budget = None;
        }
        if eligible(&b) {
            heap.push(Ranked(b));
        } else {
            done.push(b);
        }
    }
    let mut total = family.total_count;
    while total < target {
        let Some(Ranked(b)) = heap.pop() else {
            return Err(Error::CountUnreachable { target, current: total });
        };
        let room = target - total;
        for nb in kit.refine(&b, room, policy) {
            if eligible(&nb) {
                heap.push(Ranked(nb));
            } else {
                done.push(nb);
            }
        }
        total = total - b.count + kit.refine_count(&b, room);
    }
    done.extend(heap.into_iter().map(|r| r.0));
    Ok(BlockFamily::from_blocks(family.case, done))
}

/// Exact errors of the unrestricted greedy candidates for every count from
/// the family's size up to `target`, from a single trajectory.
///
/// Every replacement adds one point except a uniform ν copy of size `m`,
/// which doubles. A smaller target would follow the same trajectory until
/// such a doubling no longer fits and then grow that copy only partway, so
/// the counts a doubling skips are filled in from partial copies.
pub fn greedy_trace_with(kit: &Kit, family: &BlockFamily, target: u64) -> Result<Vec<(u64, Rational)>> {
    if target < family.total_count {
        return Err(Error::CountUnreachable { target, current: family.total_count });
    }
    let mut heap: BinaryHeap<Ranked> = family.blocks.iter().cloned().map(Ranked).collect();
    let mut total = family.total_count;
    let mut error = family.total_error.clone();
    let mut out = vec![(total, error.clone())];
    while total < target {
        let Some(Ranked(b)) = heap.pop() else {
            return Err(Error::CountUnreachable { target, current: total });
        };
        let room = target - total;
        if let (Preset::Uniform, Payload::NuOptimal(m)) = (kit.case, b.payload) {
            for r in 1..m.min(room) {
                let partial = kit.block(b.word.clone(), Payload::NuOptimal(m + r), None);
                out.push((total + r, &error - &b.total_error + &partial.total_error));
            }
        }
        let added = kit.refine(&b, room, GreedyPolicy::Unbounded);
        error -= &b.total_error;
        for nb in added {
            error += &nb.total_error;
            total += nb.count;
            heap.push(Ranked(nb));
        }
        total -= b.count;
        out.push((total, error.clone()));
    }
    Ok(out)
}

/// Exact errors of [`candidate_optimal`] for every count in `lo..=hi`.
pub fn candidate_errors(case: Preset, lo: u64, hi: u64) -> Result<Vec<(u64, Rational)>> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("empty or invalid count range {lo}..={hi}")));
    }
    let kit = Kit::new(case);
    let first = match case {
        Preset::Discrete => 1,
        Preset::Uniform => 0,
    };
    // Segment starts: the single centre, then every α_F(k).
    let mut starts = vec![(1u64, None)];
    let mut k = first;
    while let Ok((_, f)) = seq(case, k) {
        if f > hi {
            break;
        }
        starts.push((f, Some(k)));
        k += 1;
    }
    let mut out = Vec::new();
    for (i, &(s, level)) in starts.iter().enumerate() {
        let end = starts.get(i + 1).map_or(hi, |&(next, _)| (next - 1).min(hi));
        if end < lo || s > end {
            continue;
        }
        let family = match level {
            Some(k) => alpha_f_with(&kit, k)?,
            None => BlockFamily::from_blocks(case, vec![kit.block(Word::empty(), Payload::PCenter, None)]),
        };
        out.extend(greedy_trace_with(&kit, &family, end)?.into_iter().filter(|(n, _)| *n >= lo && *n <= end));
    }
    Ok(out)
}

impl Kit {
    fn refine_count(&self, b: &Block, room: u64) -> u64 {
        match b.payload {
            Payload::NuOptimal(m) => match self.case {
                Preset::Discrete => m + 1,
                Preset::Uniform => m + m.min(room),
            },
            Payload::PCenter => 2,
            Payload::PPair => 1 + self.sys.num_maps() as u64,
        }
    }
}

/// How far the published results vouch for a codebook.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimality {
    /// The count is one for which the codebook is proved optimal.
    PaperOptimal,
    /// Best construction found; only an upper bound on `V_n`.
    Candidate,
}

impl Optimality {
    pub fn tag(self) -> &'static str {
        match self {
            Optimality::PaperOptimal => "paper-optimal",
            Optimality::Candidate => "candidate upper bound",
        }
    }
}

/// Counts for which optimality is established.
pub fn certified(case: Preset, n: u64) -> bool {
    match case {
        Preset::Discrete => {
            if (1..=4).contains(&n) {
                return true;
            }
            let intermediate = (40..=57u32).any(|k| {
                let k64 = k as u64;
                6 * (1u64 << k) + (1u64 << (k - 30)) * ((1 << 13) + 1) - 2 * k64 - 6 == n
            });
            intermediate || (1..=60).any(|k| seq(case, k).map(|(_, f)| f == n).unwrap_or(false))
        }
        Preset::Uniform => {
            if (1..=7).contains(&n) {
                return true;
            }
            (0..=30).any(|k| {
                let (a, f) = seq(case, k).expect("in range");
                f == n || (k >= 1 && a < 63 && f + (1u64 << a) == n)
            })
        }
    }
}

/// Candidate optimal `n`-point codebook: greedy refinement from the largest
/// `α_{F(k)}` with `F(k) ≤ n`, or from the single centre for small `n`.
pub fn candidate_optimal(case: Preset, n: u64) -> Result<(BlockFamily, Optimality)> {
    let kit = Kit::new(case);
    candidate_optimal_with(&kit, n)
}

pub fn candidate_optimal_with(kit: &Kit, n: u64) -> Result<(BlockFamily, Optimality)> {
    let case = kit.case;
    if n == 0 {
        return Err(Error::EmptyCodebook);
    }
    let first = match case {
        Preset::Discrete => 1,
        Preset::Uniform => 0,
    };
    let mut start: Option<u32> = None;
    let mut k = first;
    while let Ok((_, f)) = seq(case, k) {
        if f > n {
            break;
        }
        start = Some(k);
        k += 1;
    }
    let family = match start {
        Some(k) => alpha_f_with(kit, k)?,
        None => BlockFamily::from_blocks(case, vec![kit.block(Word::empty(), Payload::PCenter, None)]),
    };
    let out = greedy_refine_with(kit, &family, n, GreedyPolicy::Unbounded)?;
    let tag = if certified(case, n) { Optimality::PaperOptimal } else { Optimality::Candidate };
    Ok((out, tag))
}

/// Count and error of the published intermediate codebooks between
/// consecutive `F(n)`.
///
/// Uniform: `F(n) + 2^{a(n)}` points (the root ν block doubled once), error
/// `V_{F(n)} − W/16^n`. Discrete: `2^n(6 + 2^{-30}(2^13+1)) − 2n − 6` points
/// with the published error formula; its derivation relies on ordering
/// chains that are only asserted for `n ≥ 40`.
pub fn intermediate_sequence(case: Preset, n: u32) -> Result<(BigUint, Rational)> {
    match case {
        Preset::Uniform => {
            if n < 1 {
                return Err(Error::DomainTooSmall { n, min: 1 });
            }
            let count = f_big(case, n)? + (BigUint::one() << (2 * n as usize - 1));
            let err = v_f_closed(case, n)? - rat(1, 300) * pow(&rat(1, 16), n);
            Ok((count, err))
        }
        Preset::Discrete => {
            if n < 40 {
                return Err(Error::DomainTooSmall { n, min: 40 });
            }
            let two_n = BigUint::one() << n as usize;
            let count = &two_n * 6u32 + (BigUint::one() << (n as usize - 30)) * ((1u32 << 13) + 1) - 2 * n - 6u32;
            let vf = rat(769208, 5884749) * pow(&rat(2, 75), n) - rat(64, 3339) * pow(&rat(1, 64), n);
            let g = pow(&rat(2, 75), n);
            let r = rat(75, 128);
            let err = vf
                - rat(128, 3975) * &g * (pow(&r, 31) - pow(&r, n + 1))
                - rat(1024, 35775) * &g * (pow(&r, 18) - pow(&r, 31))
                - rat(450241, 5323500) * &g;
            Ok((count, err))
        }
    }
}

/// Splitting identity for a family without a root centre: its error equals
/// `(1/75)(error of left part + error of right part) + (1/3)V_m(ν)`.
pub fn splitting_identity_holds(kit: &Kit, family: &BlockFamily) -> Option<bool> {
    let (l, r, m) = family.split(kit)?;
    let (maps, probs) = (kit.sys.maps(), kit.sys.probs());
    let side = |i: usize| &probs[i] * sq(&maps[i].ratio);
    let rhs = side(0) * &l.total_error + side(1) * &r.total_error + kit.sys.nu_weight() * kit.nu_error(m);
    Some(rhs == family.total_error)
}
