//! Exact quadratic integrals of P and ν over cylinder regions, and rigorous
//! distortion enclosures for arbitrary finite codebooks.
//!
//! The support of P splits as `J_ω = C_ω ∪ ⋃ⱼ J_{ωj}`. A region that sits
//! inside a single Voronoi cell closes in one step with a closed form; ν
//! copies always close exactly (atom groups or interval pieces). Only `J`
//! regions straddling a cell boundary at the depth cap are left open, and they
//! contribute a bracket instead of a value.

use crate::error::{Error, Result};
use crate::measure::{CondensationSystem, NuSpec, RegionKind, Word};
use crate::rational::{int, sq, Rational};
use num::One;
use std::fmt::Debug;

/// Descent depth used when callers do not ask for a specific one.
pub const DEFAULT_DEPTH: u32 = 12;

/// `lower ≤ value ≤ upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lower: Rational,
    pub upper: Rational,
}

impl Enclosure {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        debug_assert!(lower <= upper);
        Self { lower, upper }
    }

    pub fn exact(v: Rational) -> Self {
        Self { lower: v.clone(), upper: v }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lower <= v && v <= &self.upper
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lower + &self.upper) / int(2)
    }

    /// `self ⊆ other`.
    pub fn within(&self, other: &Enclosure) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }
}

/// `∫_{J_ω}(x−x₀)² dP` or `∫_{C_ω}(x−x₀)² dP`, integrating the whole region
/// against the single center `x0`.
pub fn cyl_quadratic(sys: &CondensationSystem, word: &Word, kind: RegionKind, x0: &Rational) -> Result<Rational> {
    let map = sys.word_map(word)?;
    let mass = sys.region_mass(word, kind)?;
    let (mean, var) = match kind {
        RegionKind::J => (&sys.moments().mean, &sys.moments().variance),
        RegionKind::C => (&sys.nu_moments().mean, &sys.nu_moments().variance),
    };
    let shift = map.apply(mean) - x0;
    Ok(mass * (sq(&map.ratio) * var + sq(&shift)))
}

/// `∫_{S_ω(A)}(x−c)² dP` over the image of the atom run `A = {a_k, …, a_end}`
/// (or the infinite tail when `end` is `None`) inside `C_ω`.
pub fn nu_group_cost(
    sys: &CondensationSystem,
    word: &Word,
    k: u32,
    end: Option<u32>,
    c: &Rational,
) -> Result<Rational> {
    let sums = sys.nu().group_sums(k, end)?;
    let map = sys.word_map(word)?;
    let mass = sys.region_mass(word, RegionKind::C)?;
    Ok(mass * sums.cost_about(&map.ratio, &map.offset, c))
}

/// `∫_{[l,r]}(x−c)² dP` for `[l, r] ⊆ C_ω` with uniform ν.
pub fn uniform_interval_cost(
    sys: &CondensationSystem,
    word: &Word,
    l: &Rational,
    r: &Rational,
    c: &Rational,
) -> Result<Rational> {
    let NuSpec::UniformInterval { .. } = sys.nu() else {
        return Err(Error::WrongVariant { expected: "uniform" });
    };
    let (a, b) = sys.region_hull(word, RegionKind::C)?;
    if l > r || l < &a || r > &b {
        return Err(Error::OutOfSupport { lo: l.to_string(), hi: r.to_string() });
    }
    let mass = sys.region_mass(word, RegionKind::C)?;
    let cube = |x: &Rational| x * x * x;
    Ok(mass / (&b - &a) * (cube(&(r - c)) - cube(&(l - c))) / int(3))
}

/// Scalars the region descent can run on: exact rationals for enclosures,
/// doubles for fast Lloyd iterations.
pub trait Scalar: Clone + PartialOrd + Debug + num::Num + std::ops::Neg<Output = Self> {
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// `2^-j`.
    fn pow2_neg(j: u32) -> Self;
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        crate::rational::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pow2_neg(j: u32) -> Self {
        (-(j as f64)).exp2()
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }
    fn pow2_neg(j: u32) -> Self {
        Rational::new(One::one(), num::pow(num::BigInt::from(2), j as usize))
    }
}

fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

fn min_t<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn max_t<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[derive(Clone, Debug)]
enum NuView<T> {
    Discrete { hi: T, d: T },
    Uniform { lo: T, hi: T },
}

/// A condensation system with every constant converted to `T` once.
#[derive(Clone, Debug)]
struct View<T> {
    maps: Vec<(T, T)>,
    probs: Vec<T>,
    p0: T,
    mean: T,
    var: T,
    nu: NuView<T>,
}

impl<T: Scalar> View<T> {
    fn new(sys: &CondensationSystem) -> Self {
        let f = T::from_rational;
        let nu = match sys.nu() {
            NuSpec::DiscreteGeometric { lo, hi } => NuView::Discrete { hi: f(hi), d: f(&(hi - lo)) },
            NuSpec::UniformInterval { lo, hi } => NuView::Uniform { lo: f(lo), hi: f(hi) },
        };
        View {
            maps: sys.maps().iter().map(|m| (f(&m.ratio), f(&m.offset))).collect(),
            probs: sys.probs().iter().map(f).collect(),
            p0: f(sys.nu_weight()),
            mean: f(&sys.moments().mean),
            var: f(&sys.moments().variance),
            nu,
        }
    }

    /// `(Σ m_j, Σ m_j a_j, Σ m_j a_j²)` over atoms `k..=end`.
    fn group(&self, hi: &T, d: &T, k: u32, end: Option<u32>) -> (T, T, T) {
        let pk = T::pow2_neg(k);
        let pe = end.map(T::pow2_neg).unwrap_or_else(T::zero);
        let c = |n: i64| T::from_rational(&int(n));
        let m = two::<T>() * pk.clone() - pe.clone();
        let g = (c(4) * pk.clone() * pk.clone() - pe.clone() * pe.clone()) / c(3);
        let h = (c(8) * pk.clone() * pk.clone() * pk - pe.clone() * pe.clone() * pe) / c(7);
        let s1 = hi.clone() * m.clone() - two::<T>() * d.clone() * g.clone();
        let s2 =
            hi.clone() * hi.clone() * m.clone() - c(4) * hi.clone() * d.clone() * g + c(4) * d.clone() * d.clone() * h;
        (m, s1, s2)
    }

    fn atom(hi: &T, d: &T, j: u32) -> T {
        hi.clone() - two::<T>() * d.clone() * T::pow2_neg(j)
    }
}

/// Per-cell accumulators.
#[derive(Clone, Debug)]
struct CellAcc<T> {
    cost: T,
    mass: T,
    first: T,
    amb_mass: T,
    amb_lo: Option<T>,
    amb_hi: Option<T>,
}

struct Descent<'a, T> {
    view: View<T>,
    pts: &'a [T],
    mids: Vec<T>,
    exact: T,
    open_lower: T,
    open_upper: T,
    cells: Vec<CellAcc<T>>,
}

impl<'a, T: Scalar> Descent<'a, T> {
    fn new(sys: &CondensationSystem, pts: &'a [T]) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedCodebook);
        }
        let mids = pts.windows(2).map(|w| (w[0].clone() + w[1].clone()) / two::<T>()).collect();
        let cells = vec![
            CellAcc {
                cost: T::zero(),
                mass: T::zero(),
                first: T::zero(),
                amb_mass: T::zero(),
                amb_lo: None,
                amb_hi: None
            };
            pts.len()
        ];
        Ok(Self {
            view: View::new(sys),
            pts,
            mids,
            exact: T::zero(),
            open_lower: T::zero(),
            open_upper: T::zero(),
            cells,
        })
    }

    /// Number of boundaries `≤ x`, i.e. the cell owning `x` (ties go right).
    fn count_le(&self, x: &T) -> usize {
        self.mids.partition_point(|m| m <= x)
    }

    fn count_lt(&self, x: &T) -> usize {
        self.mids.partition_point(|m| m < x)
    }

    fn dist2(&self, x: &T) -> T {
        let c = self.count_le(x);
        let u = x.clone() - self.pts[c].clone();
        u.clone() * u
    }

    fn min_f(&self, lo: &T, hi: &T) -> T {
        let i = self.pts.partition_point(|p| p < lo);
        if i < self.pts.len() && &self.pts[i] <= hi {
            return T::zero();
        }
        min_t(self.dist2(lo), self.dist2(hi))
    }

    fn run(&mut self, depth: u32) {
        self.j_region(T::one(), T::zero(), T::one(), depth);
    }

    fn j_region(&mut self, r: T, t: T, m: T, depth_left: u32) {
        let lo = t.clone();
        let hi = r.clone() + t.clone();
        let a = self.count_le(&lo);
        let b = self.count_lt(&hi);
        let center = r.clone() * self.view.mean.clone() + t.clone();
        if a == b {
            let u = center.clone() - self.pts[a].clone();
            let cost = m.clone() * (r.clone() * r.clone() * self.view.var.clone() + u.clone() * u);
            self.exact = self.exact.clone() + cost.clone();
            let cell = &mut self.cells[a];
            cell.cost = cell.cost.clone() + cost;
            cell.mass = cell.mass.clone() + m.clone();
            cell.first = cell.first.clone() + m * center;
            return;
        }
        if depth_left == 0 {
            let lower = m.clone() * self.min_f(&lo, &hi);
            let upper = m.clone() * (r.clone() * r * self.view.var.clone() + self.dist2(&center));
            self.open_lower = self.open_lower.clone() + lower;
            self.open_upper = self.open_upper.clone() + upper;
            for c in a..=b {
                let clo = if c == 0 { lo.clone() } else { max_t(lo.clone(), self.mids[c - 1].clone()) };
                let chi = if c == self.mids.len() { hi.clone() } else { min_t(hi.clone(), self.mids[c].clone()) };
                let cell = &mut self.cells[c];
                cell.amb_mass = cell.amb_mass.clone() + m.clone();
                cell.amb_lo = Some(match cell.amb_lo.take() {
                    Some(v) => min_t(v, clo),
                    None => clo,
                });
                cell.amb_hi = Some(match cell.amb_hi.take() {
                    Some(v) => max_t(v, chi),
                    None => chi,
                });
            }
            return;
        }
        let mc = m.clone() * self.view.p0.clone();
        self.nu_region(&r, &t, mc);
        let maps = self.view.maps.clone();
        let probs = self.view.probs.clone();
        for ((rj, tj), pj) in maps.into_iter().zip(probs) {
            self.j_region(r.clone() * rj, r.clone() * tj + t.clone(), m.clone() * pj, depth_left - 1);
        }
    }

    fn add_exact(&mut self, cell: usize, cost: T, mass: T, first: T) {
        self.exact = self.exact.clone() + cost.clone();
        let c = &mut self.cells[cell];
        c.cost = c.cost.clone() + cost;
        c.mass = c.mass.clone() + mass;
        c.first = c.first.clone() + first;
    }

    fn nu_region(&mut self, r: &T, t: &T, mc: T) {
        match self.view.nu.clone() {
            NuView::Discrete { hi, d } => {
                let img_hi = r.clone() * hi.clone() + t.clone();
                let mut start = 1u32;
                let first_atom = r.clone() * View::<T>::atom(&hi, &d, 1) + t.clone();
                let lo_idx = self.count_lt(&first_atom);
                let hi_idx = self.count_lt(&img_hi);
                for i in lo_idx..hi_idx {
                    let y = (self.mids[i].clone() - t.clone()) / r.clone();
                    if y >= hi {
                        break;
                    }
                    let jstar = first_atom_at_least(&hi, &d, &y, start);
                    if jstar > start {
                        self.close_group(r, t, &mc, &hi, &d, start, Some(jstar - 1));
                        start = jstar;
                    }
                }
                self.close_group(r, t, &mc, &hi, &d, start, None);
            }
            NuView::Uniform { lo, hi } => {
                let a = r.clone() * lo + t.clone();
                let b = r.clone() * hi + t.clone();
                let dens = mc / (b.clone() - a.clone());
                let mut left = a.clone();
                let first = self.count_le(&a);
                let last = self.count_lt(&b);
                for c in first..=last {
                    let right = if c < last { self.mids[c].clone() } else { b.clone() };
                    let p = self.pts[c].clone();
                    let cube = |x: T| x.clone() * x.clone() * x;
                    let three = two::<T>() + T::one();
                    let cost = dens.clone() * (cube(right.clone() - p.clone()) - cube(left.clone() - p)) / three;
                    let mass = dens.clone() * (right.clone() - left.clone());
                    let fm = mass.clone() * (left.clone() + right.clone()) / two::<T>();
                    self.add_exact(c, cost, mass, fm);
                    left = right;
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn close_group(&mut self, r: &T, t: &T, mc: &T, hi: &T, d: &T, k: u32, end: Option<u32>) {
        let x = r.clone() * View::<T>::atom(hi, d, k) + t.clone();
        let cell = self.count_le(&x);
        let (s0, s1, s2) = self.view.group(hi, d, k, end);
        let u = t.clone() - self.pts[cell].clone();
        let cost = mc.clone()
            * (r.clone() * r.clone() * s2
                + two::<T>() * r.clone() * u.clone() * s1.clone()
                + u.clone() * u * s0.clone());
        let mass = mc.clone() * s0.clone();
        let first = mc.clone() * (r.clone() * s1 + t.clone() * s0);
        self.add_exact(cell, cost, mass, first);
    }
}

/// Smallest `j ≥ start` with `a_j ≥ y`, where `a_j = hi − 2d·2^-j` and `y < hi`.
fn first_atom_at_least<T: Scalar>(hi: &T, d: &T, y: &T, start: u32) -> u32 {
    let atom = |j: u32| View::<T>::atom(hi, d, j);
    if &atom(start) >= y {
        return start;
    }
    // 2^-j ≤ (hi − y)/(2d)  ⇔  j ≥ log2(2d/(hi − y)); refine the float guess exactly.
    let gap = (hi.clone() - y.clone()).to_f64();
    let est = (2.0 * d.to_f64() / gap).log2().ceil();
    let mut j = if est.is_finite() { (est.max(start as f64) as u32).min(4000) } else { start };
    while &atom(j) < y {
        j += 1;
    }
    while j > start && &atom(j - 1) >= y {
        j -= 1;
    }
    j
}

/// The result of one descent, exposed in both float and exact flavours.
#[derive(Clone, Debug)]
pub struct CellStats<T> {
    /// Cost of the regions known to lie in the cell.
    pub cost: T,
    /// Mass of regions known to lie in the cell.
    pub mass: T,
    /// First moment of those regions.
    pub first: T,
    /// Mass of open regions that may partly fall into the cell.
    pub open_mass: T,
    /// Hull of the open mass restricted to the cell.
    pub open_range: Option<(T, T)>,
}

impl<T: Scalar> CellStats<T> {
    /// Enclosure of the conditional mean of the cell, or `None` when the cell
    /// might carry no mass at all.
    pub fn mean_bounds(&self) -> Option<(T, T)> {
        let zero = T::zero();
        match &self.open_range {
            None => {
                if self.mass > zero {
                    let m = self.first.clone() / self.mass.clone();
                    Some((m.clone(), m))
                } else {
                    None
                }
            }
            Some((a, b)) => {
                let with_a = (self.first.clone() + self.open_mass.clone() * a.clone())
                    / (self.mass.clone() + self.open_mass.clone());
                let with_b = (self.first.clone() + self.open_mass.clone() * b.clone())
                    / (self.mass.clone() + self.open_mass.clone());
                if self.mass > zero {
                    let m = self.first.clone() / self.mass.clone();
                    Some((min_t(m.clone(), with_a), max_t(m, with_b)))
                } else {
                    Some((a.clone(), b.clone()))
                }
            }
        }
    }
}

/// Distortion bounds and per-cell moments of a codebook at a given depth.
#[derive(Clone, Debug)]
pub struct DescentResult<T> {
    pub lower: T,
    pub upper: T,
    pub cells: Vec<CellStats<T>>,
}

/// Runs the region-tree descent on `pts` (strictly increasing).
pub fn descend<T: Scalar>(sys: &CondensationSystem, pts: &[T], depth: u32) -> Result<DescentResult<T>> {
    let mut d = Descent::new(sys, pts)?;
    d.run(depth);
    let cells = d
        .cells
        .into_iter()
        .map(|c| CellStats {
            cost: c.cost,
            mass: c.mass,
            first: c.first,
            open_mass: c.amb_mass,
            open_range: c.amb_lo.zip(c.amb_hi),
        })
        .collect();
    Ok(DescentResult { lower: d.exact.clone() + d.open_lower, upper: d.exact + d.open_upper, cells })
}

/// Rigorous enclosure of `∫ min_a (x−a)² dP` for a finite codebook.
pub fn distortion_enclosure(codebook: &[Rational], sys: &CondensationSystem, depth: u32) -> Result<Enclosure> {
    let r = descend(sys, codebook, depth)?;
    Ok(Enclosure::new(r.lower, r.upper))
}

/// The exact distortion when the codebook is aligned with the region tree
/// down to `max_depth` (every straddling region closes), else `None`.
pub fn exact_distortion(codebook: &[Rational], sys: &CondensationSystem, max_depth: u32) -> Result<Option<Rational>> {
    let e = distortion_enclosure(codebook, sys, max_depth)?;
    Ok(e.is_exact().then_some(e.lower))
}

/// Per-cell enclosures of mass and conditional mean.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellEnclosure {
    pub mass: Enclosure,
    pub mean: Option<Enclosure>,
}

pub fn region_mean_enclosure(
    codebook: &[Rational],
    sys: &CondensationSystem,
    depth: u32,
) -> Result<Vec<CellEnclosure>> {
    let r = descend(sys, codebook, depth)?;
    Ok(r.cells
        .iter()
        .map(|c| CellEnclosure {
            mass: Enclosure::new(c.mass.clone(), &c.mass + &c.open_mass),
            mean: c.mean_bounds().map(|(a, b)| Enclosure::new(a, b)),
        })
        .collect())
}

/// Convenience for callers holding `f64` codebooks: exact enclosure of the
/// codebook's true distortion (each double is imported exactly).
pub fn distortion_enclosure_f64(codebook: &[f64], sys: &CondensationSystem, depth: u32) -> Result<Enclosure> {
    let pts: Vec<Rational> = codebook.iter().map(|&x| crate::rational::from_f64(x)).collect();
    distortion_enclosure(&pts, sys, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Preset;
    use crate::rational::{from_f64, one, pow, rat};
    use num::Zero;
    use proptest::prelude::*;

    fn disc() -> CondensationSystem {
        CondensationSystem::preset(Preset::Discrete)
    }

    fn unif() -> CondensationSystem {
        CondensationSystem::preset(Preset::Uniform)
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    /// Straightforward distortion: every ν copy down to `depth` summed atom by
    /// atom (discrete) or by a fine midpoint rule (uniform), and each leftover
    /// `J` region collapsed onto its mean.
    fn naive_distortion(sys: &CondensationSystem, pts: &[f64], depth: usize) -> f64 {
        let f = |x: f64| pts.iter().map(|p| (x - p) * (x - p)).fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        let mean = approx(&sys.moments().mean);
        let var = approx(&sys.moments().variance);
        for k in 0..=depth {
            for word in Word::all(2, k) {
                let map = sys.word_map(&word).unwrap();
                let (r, t) = (approx(&map.ratio), approx(&map.offset));
                let mc = approx(&sys.region_mass(&word, RegionKind::C).unwrap());
                match sys.nu() {
                    NuSpec::DiscreteGeometric { .. } => {
                        for j in 1..=60 {
                            let a = approx(&sys.nu_atom(j).unwrap());
                            total += mc * 0.5f64.powi(j as i32) * f(r * a + t);
                        }
                    }
                    NuSpec::UniformInterval { lo, hi } => {
                        let (lo, hi) = (approx(lo), approx(hi));
                        let n = 4000;
                        for i in 0..n {
                            let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                            total += mc / n as f64 * f(r * x + t);
                        }
                    }
                }
                if k == depth {
                    for j in ["1", "2"] {
                        let child = word.child(j.parse().unwrap());
                        let m = sys.word_map(&child).unwrap();
                        let mass = approx(&sys.word_prob(&child).unwrap());
                        let rr = approx(&m.ratio);
                        let c = rr * mean + approx(&m.offset);
                        // Only the centre term is used; the variance part is added
                        // when the region is uncut, which is the typical case.
                        total += mass * (f(c) + rr * rr * var);
                    }
                }
            }
        }
        total
    }

    fn approx(x: &Rational) -> f64 {
        crate::rational::to_f64(x)
    }

    #[test]
    fn cylinder_quadratic_reference_values() {
        let s = disc();
        assert_eq!(cyl_quadratic(&s, &w("1"), RegionKind::J, &rat(2, 5)).unwrap(), rat(47833, 1494675));
        let u = unif();
        assert_eq!(cyl_quadratic(&u, &w("1"), RegionKind::J, &rat(1, 5)).unwrap(), rat(79, 16425));
        for sys in [&s, &u] {
            let m = sys.moments();
            assert_eq!(cyl_quadratic(sys, &Word::empty(), RegionKind::J, &m.mean).unwrap(), m.variance);
        }
    }

    #[test]
    fn group_costs_reference_values() {
        let s = disc();
        let e = Word::empty();
        let full = nu_group_cost(&s, &e, 1, None, &rat(7, 15)).unwrap();
        assert_eq!(full * int(3), rat(8, 1575));
        let c = rat(659, 2730);
        let v21 =
            cyl_quadratic(&s, &w("1"), RegionKind::J, &c).unwrap() + nu_group_cost(&s, &e, 1, Some(2), &c).unwrap();
        assert_eq!(v21, rat(8469163, 466338600));
    }

    #[test]
    fn tail_cost_at_tail_mean_matches_series() {
        let s = disc();
        for k in 1..8u32 {
            let c = s.tail_mean(k).unwrap();
            let closed = nu_group_cost(&s, &Word::empty(), k, None, &c).unwrap() * int(3);
            let mut series = Rational::zero();
            for j in k..k + 110 {
                series += sq(&(s.nu_atom(j).unwrap() - &c)) * s.nu().atom_mass(j).unwrap();
            }
            let gap = &closed - &series;
            assert!(gap >= Rational::zero() && gap < rat(1, 10).pow(30), "k={k}");
        }
    }

    #[test]
    fn interval_costs_reference_values() {
        let u = unif();
        let e = Word::empty();
        let full = uniform_interval_cost(&u, &e, &rat(2, 5), &rat(3, 5), &rat(1, 2)).unwrap();
        assert_eq!(full * int(3), rat(1, 300));
        let two_piece = uniform_interval_cost(&u, &e, &rat(2, 5), &rat(1, 2), &rat(7, 20)).unwrap()
            + uniform_interval_cost(&u, &e, &rat(1, 2), &rat(3, 5), &rat(13, 20)).unwrap();
        assert_eq!(two_piece, rat(13, 3600));
        // The midpoint minimises the cost of a piece.
        let (l, r) = (rat(2, 5), rat(1, 2));
        let mid = rat(9, 20);
        let eps = rat(1, 1000);
        let at = |c: &Rational| uniform_interval_cost(&u, &e, &l, &r, c).unwrap();
        assert!(at(&mid) < at(&(&mid + &eps)) && at(&mid) < at(&(&mid - &eps)));
    }

    #[test]
    fn interval_cost_errors() {
        let u = unif();
        let e = Word::empty();
        assert!(matches!(
            uniform_interval_cost(&u, &e, &rat(1, 5), &rat(1, 2), &rat(1, 2)),
            Err(Error::OutOfSupport { .. })
        ));
        assert!(matches!(
            uniform_interval_cost(&disc(), &e, &rat(2, 5), &rat(1, 2), &rat(1, 2)),
            Err(Error::WrongVariant { .. })
        ));
    }

    #[test]
    fn two_point_codebooks_close_exactly() {
        let d = exact_distortion(&[rat(659, 2730), rat(1621, 1950)], &disc(), 8).unwrap();
        assert_eq!(d, Some(rat(499067, 18505500)));
        let u = exact_distortion(&[rat(13, 60), rat(47, 60)], &unif(), 8).unwrap();
        assert_eq!(u, Some(rat(8003, 262800)));
    }

    #[test]
    fn single_point_codebook() {
        for sys in [disc(), unif()] {
            let m = sys.moments().clone();
            for depth in [0, 3, 12] {
                let e = distortion_enclosure(std::slice::from_ref(&m.mean), &sys, depth).unwrap();
                assert_eq!(e, Enclosure::exact(m.variance.clone()));
            }
            let cells = region_mean_enclosure(std::slice::from_ref(&m.mean), &sys, 4).unwrap();
            assert_eq!(cells[0].mass, Enclosure::exact(one()));
            assert_eq!(cells[0].mean, Some(Enclosure::exact(m.mean.clone())));
        }
    }

    #[test]
    fn empty_and_unsorted_codebooks_are_rejected() {
        assert_eq!(distortion_enclosure(&[], &disc(), 3), Err(Error::EmptyCodebook));
        assert_eq!(distortion_enclosure(&[rat(1, 2), rat(1, 4)], &disc(), 3), Err(Error::UnsortedCodebook));
    }

    #[test]
    fn uniform_half_cells_are_mirror_images() {
        let u = unif();
        let cells = region_mean_enclosure(&[rat(1, 4), rat(3, 4)], &u, 10).unwrap();
        assert_eq!(cells[0].mass, Enclosure::exact(rat(1, 2)));
        assert_eq!(cells[1].mass, Enclosure::exact(rat(1, 2)));
        let m0 = cells[0].mean.clone().unwrap();
        let m1 = cells[1].mean.clone().unwrap();
        assert!(m0.is_exact());
        assert_eq!(&m0.lower + &m1.lower, one());
    }

    #[test]
    fn boundary_inside_a_gap_gives_consistent_masses() {
        // Boundary at 7/10 between points 1/2 and 9/10.
        let s = disc();
        let pts = [rat(1, 2), rat(9, 10)];
        let coarse = region_mean_enclosure(&pts, &s, 6).unwrap();
        let fine = region_mean_enclosure(&pts, &s, 10).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(f.mass.within(&c.mass));
            assert!(f.mean.as_ref().unwrap().within(c.mean.as_ref().unwrap()));
        }
        let total = &fine[0].mass.lower + &fine[1].mass.lower;
        assert!(total <= one() && one() - total < rat(1, 1_000_000));
    }

    #[test]
    fn straddling_codebooks_match_direct_summation() {
        let cases: [(&CondensationSystem, Vec<f64>); 4] = [
            (&disc(), vec![0.1, 0.5, 0.93]),
            (&disc(), vec![0.05, 0.17, 0.44, 0.58, 0.81]),
            (&unif(), vec![0.08, 0.5, 0.92]),
            (&unif(), vec![0.02, 0.15, 0.47, 0.56, 0.85, 0.97]),
        ];
        for (sys, pts) in cases {
            let enc = distortion_enclosure_f64(&pts, sys, DEFAULT_DEPTH).unwrap();
            assert!(approx(&enc.width()) < 1e-15, "{pts:?}");
            let oracle = naive_distortion(sys, &pts, 6);
            let mid = approx(&enc.midpoint());
            assert!((oracle - mid).abs() < 1e-7 * mid, "{pts:?}: {oracle} vs {mid}");
        }
    }

    #[test]
    fn float_descent_tracks_exact_descent() {
        let s = disc();
        let pts = [0.11, 0.37, 0.52, 0.9];
        let exact: Vec<Rational> = pts.iter().map(|&x| from_f64(x)).collect();
        let a = descend(&s, &exact, 9).unwrap();
        let b = descend(&s, &pts[..], 9).unwrap();
        assert!((approx(&a.upper) - b.upper).abs() < 1e-14);
        assert!((approx(&a.lower) - b.lower).abs() < 1e-14);
    }

    fn sorted_points() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..7).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn enclosures_are_nested(pts in sorted_points(), discrete in any::<bool>(), depth in 0u32..6) {
            let sys = if discrete { disc() } else { unif() };
            let a = distortion_enclosure_f64(&pts, &sys, depth).unwrap();
            let b = distortion_enclosure_f64(&pts, &sys, depth + 1).unwrap();
            prop_assert!(b.within(&a));
        }

        #[test]
        fn cost_scales_under_words(word in prop::collection::vec(1u8..=2, 0..5), x in 0.0f64..1.0, discrete in any::<bool>()) {
            let sys = if discrete { disc() } else { unif() };
            let word = Word::new(word).unwrap();
            let k = word.len() as u32;
            let x0 = from_f64(x);
            let map = sys.word_map(&word).unwrap();
            let factor = pow(&rat(1, 75), k);
            for kind in [RegionKind::J, RegionKind::C] {
                let scaled = cyl_quadratic(&sys, &word, kind, &map.apply(&x0)).unwrap();
                let base = cyl_quadratic(&sys, &Word::empty(), kind, &x0).unwrap();
                prop_assert_eq!(scaled, base * &factor);
            }
            if discrete {
                let scaled = nu_group_cost(&sys, &word, 2, Some(5), &map.apply(&x0)).unwrap();
                let base = nu_group_cost(&sys, &Word::empty(), 2, Some(5), &x0).unwrap();
                prop_assert_eq!(scaled, base * &factor);
            } else {
                let (l, r) = (rat(9, 20), rat(11, 20));
                let scaled = uniform_interval_cost(&sys, &word, &map.apply(&l), &map.apply(&r), &map.apply(&x0)).unwrap();
                let base = uniform_interval_cost(&sys, &Word::empty(), &l, &r, &x0).unwrap();
                prop_assert_eq!(scaled, base * &factor);
            }
        }

        #[test]
        fn parallel_axis(word in prop::collection::vec(1u8..=2, 0..4), x in -1.0f64..2.0, discrete in any::<bool>()) {
            let sys = if discrete { disc() } else { unif() };
            let word = Word::new(word).unwrap();
            let c = from_f64(x);
            let map = sys.word_map(&word).unwrap();
            for kind in [RegionKind::J, RegionKind::C] {
                let mean = match kind {
                    RegionKind::J => map.apply(&sys.moments().mean),
                    RegionKind::C => map.apply(&sys.nu_moments().mean),
                };
                let mass = sys.region_mass(&word, kind).unwrap();
                let lhs = cyl_quadratic(&sys, &word, kind, &c).unwrap();
                let rhs = cyl_quadratic(&sys, &word, kind, &mean).unwrap() + mass * sq(&(&c - &mean));
                prop_assert_eq!(lhs, rhs);
            }
            if discrete {
                let g = sys.nu().group_sums(3, None).unwrap();
                let gm = g.mean(&map.ratio, &map.offset);
                let mass = sys.region_mass(&word, RegionKind::C).unwrap() * &g.mass;
                let lhs = nu_group_cost(&sys, &word, 3, None, &c).unwrap();
                let rhs = nu_group_cost(&sys, &word, 3, None, &gm).unwrap() + mass * sq(&(&c - &gm));
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
