//! Condensation systems `P = Σ pⱼ P∘Sⱼ⁻¹ + p₀ ν` on the line: similarity maps,
//! the two supported ν families, cylinder addressing, and exact moments.

use crate::error::{Error, Result};
use crate::rational::{int, pow, rat, sq, Rational};
use num::{One, Signed, Zero};
use std::fmt;

/// Longest word accepted anywhere; `3^-64` is far below every tolerance used.
pub const MAX_WORD_LEN: usize = 64;

/// `x ↦ ratio·x + offset` with `ratio ∈ (0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilarityMap {
    pub ratio: Rational,
    pub offset: Rational,
}

impl SimilarityMap {
    pub fn new(ratio: Rational, offset: Rational) -> Result<Self> {
        if !ratio.is_positive() || ratio >= Rational::one() {
            return Err(Error::BadRatio(ratio.to_string()));
        }
        Ok(Self { ratio, offset })
    }

    pub fn identity() -> Self {
        Self { ratio: Rational::one(), offset: Rational::zero() }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.ratio * x + &self.offset
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimilarityMap) -> SimilarityMap {
        SimilarityMap { ratio: &self.ratio * &inner.ratio, offset: self.apply(&inner.offset) }
    }

    pub fn apply_interval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        (self.apply(lo), self.apply(hi))
    }
}

/// The ν component. Both families live on `[lo, hi]`.
///
/// `DiscreteGeometric` puts mass `2^-j` on `a_j = hi − (hi − lo)·2^-(j-1)`,
/// so `a_1 = lo` and the atoms accumulate at `hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NuSpec {
    DiscreteGeometric { lo: Rational, hi: Rational },
    UniformInterval { lo: Rational, hi: Rational },
}

/// Mean, raw second moment and variance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moments {
    pub mean: Rational,
    pub second: Rational,
    pub variance: Rational,
}

impl Moments {
    fn from_raw(mean: Rational, second: Rational) -> Self {
        let variance = &second - sq(&mean);
        Self { mean, second, variance }
    }
}

/// Closed-form sums `(Σ m_j, Σ m_j a_j, Σ m_j a_j²)` over a run of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSums {
    pub mass: Rational,
    pub first: Rational,
    pub second: Rational,
}

impl GroupSums {
    /// `Σ m_j (r·a_j + t − c)²`, the cost of the image group about `c`.
    pub fn cost_about(&self, ratio: &Rational, offset: &Rational, c: &Rational) -> Rational {
        let u = offset - c;
        ratio * ratio * &self.second + int(2) * ratio * &u * &self.first + &u * &u * &self.mass
    }

    /// Conditional mean of the image group.
    pub fn mean(&self, ratio: &Rational, offset: &Rational) -> Rational {
        ratio * &self.first / &self.mass + offset
    }
}

impl NuSpec {
    pub fn discrete_preset() -> Self {
        NuSpec::DiscreteGeometric { lo: rat(2, 5), hi: rat(3, 5) }
    }

    pub fn uniform_preset() -> Self {
        NuSpec::UniformInterval { lo: rat(2, 5), hi: rat(3, 5) }
    }

    pub fn support(&self) -> (&Rational, &Rational) {
        match self {
            NuSpec::DiscreteGeometric { lo, hi } | NuSpec::UniformInterval { lo, hi } => (lo, hi),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, NuSpec::DiscreteGeometric { .. })
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if lo >= hi {
            return Err(Error::InvalidArgument(format!("empty nu support [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Exact `(E(ν), ∫x² dν, V(ν))`; the discrete series are summed in closed form.
    pub fn moments(&self) -> Moments {
        match self {
            NuSpec::DiscreteGeometric { lo, hi } => {
                let d = hi - lo;
                let mean = hi - int(2) * &d / int(3);
                let second = hi * hi - int(4) * hi * &d / int(3) + int(4) * &d * &d / int(7);
                Moments::from_raw(mean, second)
            }
            NuSpec::UniformInterval { lo, hi } => {
                let mean = (lo + hi) / int(2);
                let variance = sq(&(hi - lo)) / int(12);
                let second = &variance + sq(&mean);
                Moments { mean, second, variance }
            }
        }
    }

    /// The atom `a_j`, `j ≥ 1`.
    pub fn atom(&self, j: u32) -> Result<Rational> {
        match self {
            NuSpec::DiscreteGeometric { lo, hi } => {
                if j == 0 {
                    return Err(Error::InvalidArgument("atoms are indexed from 1".into()));
                }
                Ok(hi - (hi - lo) / pow(&int(2), j - 1))
            }
            _ => Err(Error::WrongVariant { expected: "discrete" }),
        }
    }

    /// Mass `2^-j` of atom `j`.
    pub fn atom_mass(&self, j: u32) -> Result<Rational> {
        match self {
            NuSpec::DiscreteGeometric { .. } => Ok(rat(1, 1) / pow(&int(2), j)),
            _ => Err(Error::WrongVariant { expected: "discrete" }),
        }
    }

    /// Sums over atoms `k..=end` (`end = None` means the infinite tail).
    pub fn group_sums(&self, k: u32, end: Option<u32>) -> Result<GroupSums> {
        let NuSpec::DiscreteGeometric { lo, hi } = self else {
            return Err(Error::WrongVariant { expected: "discrete" });
        };
        if k == 0 || end.is_some_and(|e| e < k) {
            return Err(Error::InvalidArgument(format!("bad atom range {k}..={end:?}")));
        }
        let d = hi - lo;
        // Σ_{j=k}^{e} b^-j = (b^-(k-1) − b^-e) / (b − 1)
        let geo = |b: i64| -> Rational {
            let base = int(b);
            let head = Rational::one() / pow(&base, k - 1);
            let tail = match end {
                Some(e) => Rational::one() / pow(&base, e),
                None => Rational::zero(),
            };
            (head - tail) / int(b - 1)
        };
        let (m, g, h) = (geo(2), geo(4), geo(8));
        let first = hi * &m - int(2) * &d * &g;
        let second = hi * hi * &m - int(4) * hi * &d * &g + int(4) * &d * &d * &h;
        Ok(GroupSums { mass: m, first, second })
    }

    /// `b_k`, the conditional mean of the atoms `j ≥ k`.
    pub fn tail_mean(&self, k: u32) -> Result<Rational> {
        let s = self.group_sums(k, None)?;
        Ok(s.first / s.mass)
    }
}

/// A finite string over `{1..N}`; `S_ω = S_{ω₁} ∘ … ∘ S_{ω_k}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.len() > MAX_WORD_LEN {
            return Err(Error::WordTooLong(letters.len()));
        }
        Ok(Word(letters))
    }

    /// Parses `"21"` style words; digits only, so at most nine maps.
    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&d| d >= 1)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad letter {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `ωj`.
    pub fn child(&self, j: u8) -> Word {
        let mut v = self.0.clone();
        v.push(j);
        Word(v)
    }

    /// All words of length `k` over `{1..n}` in lexicographic order.
    pub fn all(n: u8, k: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..k {
            out = out.iter().flat_map(|w| (1..=n).map(move |j| w.child(j))).collect();
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `J_ω = S_ω([0,1])` (a scaled copy of the whole measure) or `C_ω = S_ω(supp ν)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionKind {
    J,
    C,
}

/// The two worked instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Discrete,
    Uniform,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Discrete => "discrete",
            Preset::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Preset::Discrete),
            "uniform" => Ok(Preset::Uniform),
            _ => Err(Error::InvalidArgument(format!("unknown measure {s:?}"))),
        }
    }
}

/// An immutable condensation system with its exact moments cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondensationSystem {
    maps: Vec<SimilarityMap>,
    probs: Vec<Rational>,
    nu_weight: Rational,
    nu: NuSpec,
    nu_moments: Moments,
    moments: Moments,
    preset: Option<Preset>,
}

impl CondensationSystem {
    /// `S₁(x) = x/5`, `S₂(x) = x/5 + 4/5`, all weights `1/3`, ν on `[2/5, 3/5]`.
    pub fn preset(p: Preset) -> Self {
        let maps = vec![
            SimilarityMap { ratio: rat(1, 5), offset: rat(0, 1) },
            SimilarityMap { ratio: rat(1, 5), offset: rat(4, 5) },
        ];
        let probs = vec![rat(1, 3), rat(1, 3), rat(1, 3)];
        let nu = match p {
            Preset::Discrete => NuSpec::discrete_preset(),
            Preset::Uniform => NuSpec::uniform_preset(),
        };
        let mut sys = Self::custom(maps, probs, nu).expect("presets are valid");
        sys.preset = Some(p);
        sys
    }

    /// `probs = (p₀, p₁, …, p_N)` with `p₀` the weight of ν.
    pub fn custom(maps: Vec<SimilarityMap>, probs: Vec<Rational>, nu: NuSpec) -> Result<Self> {
        if probs.len() != maps.len() + 1 {
            return Err(Error::ShapeMismatch { maps: maps.len(), probs: probs.len() });
        }
        if maps.is_empty() {
            return Err(Error::InvalidArgument("at least one map is required".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_positive()) {
            return Err(Error::NonPositiveProb(p.to_string()));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::ProbSum(total.to_string()));
        }
        for m in &maps {
            if !m.ratio.is_positive() || m.ratio >= Rational::one() {
                return Err(Error::BadRatio(m.ratio.to_string()));
            }
        }
        nu.validate()?;
        check_separation(&maps, &nu)?;

        let nu_weight = probs[0].clone();
        let probs: Vec<Rational> = probs[1..].to_vec();
        let nu_moments = nu.moments();
        let moments = p_moments_of(&maps, &probs, &nu_weight, &nu_moments)?;
        Ok(Self { maps, probs, nu_weight, nu, nu_moments, moments, preset: None })
    }

    pub fn maps(&self) -> &[SimilarityMap] {
        &self.maps
    }

    /// `p₁..p_N`.
    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// `p₀`.
    pub fn nu_weight(&self) -> &Rational {
        &self.nu_weight
    }

    pub fn nu(&self) -> &NuSpec {
        &self.nu
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        self.preset
    }

    pub fn num_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn nu_moments(&self) -> &Moments {
        &self.nu_moments
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }

    /// `(E(P), V(P))`.
    pub fn p_moments(&self) -> (Rational, Rational) {
        (self.moments.mean.clone(), self.moments.variance.clone())
    }

    pub fn word_map(&self, w: &Word) -> Result<SimilarityMap> {
        let mut acc = SimilarityMap::identity();
        for &l in w.letters() {
            let m = self.letter(l)?;
            acc = acc.compose(m);
        }
        Ok(acc)
    }

    fn letter(&self, l: u8) -> Result<&SimilarityMap> {
        if l == 0 || l as usize > self.maps.len() {
            return Err(Error::BadLetter { letter: l, maps: self.maps.len() });
        }
        Ok(&self.maps[l as usize - 1])
    }

    pub fn apply_word(&self, w: &Word, x: &Rational) -> Result<Rational> {
        Ok(self.word_map(w)?.apply(x))
    }

    /// `Π p_{ωᵢ}`.
    pub fn word_prob(&self, w: &Word) -> Result<Rational> {
        let mut p = Rational::one();
        for &l in w.letters() {
            self.letter(l)?;
            p *= &self.probs[l as usize - 1];
        }
        Ok(p)
    }

    /// `P(J_ω) = Π p_{ωᵢ}`, `P(C_ω) = p₀ Π p_{ωᵢ}`.
    pub fn region_mass(&self, w: &Word, kind: RegionKind) -> Result<Rational> {
        let p = self.word_prob(w)?;
        Ok(match kind {
            RegionKind::J => p,
            RegionKind::C => p * &self.nu_weight,
        })
    }

    /// Convex hull of the region: `S_ω([0,1])` or `S_ω([lo, hi])`.
    pub fn region_hull(&self, w: &Word, kind: RegionKind) -> Result<(Rational, Rational)> {
        let m = self.word_map(w)?;
        Ok(match kind {
            RegionKind::J => m.apply_interval(&Rational::zero(), &Rational::one()),
            RegionKind::C => {
                let (lo, hi) = self.nu.support();
                m.apply_interval(lo, hi)
            }
        })
    }

    pub fn nu_atom(&self, j: u32) -> Result<Rational> {
        self.nu.atom(j)
    }

    pub fn tail_mean(&self, k: u32) -> Result<Rational> {
        self.nu.tail_mean(k)
    }
}

/// Strong separation: the images `Sⱼ([0,1])` and the ν support are pairwise
/// disjoint and everything stays inside `[0,1]`.
fn check_separation(maps: &[SimilarityMap], nu: &NuSpec) -> Result<()> {
    let (lo, hi) = nu.support();
    let mut pieces: Vec<(Rational, Rational, String)> = maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (a, b) = m.apply_interval(&Rational::zero(), &Rational::one());
            (a, b, format!("S{}([0,1])", i + 1))
        })
        .collect();
    pieces.push((lo.clone(), hi.clone(), "supp nu".to_string()));
    for (a, b, name) in &pieces {
        if a.is_negative() || b > &Rational::one() {
            return Err(Error::SeparationViolation(format!("{name} leaves [0,1]")));
        }
    }
    pieces.sort();
    for w in pieces.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::SeparationViolation(format!("{} meets {}", w[0].2, w[1].2)));
        }
    }
    Ok(())
}

/// Solves the linear fixed-point equations for the first two moments of P.
fn p_moments_of(maps: &[SimilarityMap], probs: &[Rational], p0: &Rational, nu: &Moments) -> Result<Moments> {
    let mut lin1 = Rational::one();
    let mut lin2 = Rational::one();
    let mut rhs1 = p0 * &nu.mean;
    for (m, p) in maps.iter().zip(probs) {
        lin1 -= p * &m.ratio;
        lin2 -= p * sq(&m.ratio);
        rhs1 += p * &m.offset;
    }
    if lin1.is_zero() || lin2.is_zero() {
        return Err(Error::Degenerate);
    }
    let mean = rhs1 / lin1;
    let mut rhs2 = p0 * &nu.second;
    for (m, p) in maps.iter().zip(probs) {
        rhs2 += p * (int(2) * &m.ratio * &m.offset * &mean + sq(&m.offset));
    }
    let second = rhs2 / lin2;
    Ok(Moments::from_raw(mean, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc() -> CondensationSystem {
        CondensationSystem::preset(Preset::Discrete)
    }

    fn unif() -> CondensationSystem {
        CondensationSystem::preset(Preset::Uniform)
    }

    #[test]
    fn nu_moments_match_closed_forms() {
        let m = NuSpec::discrete_preset().moments();
        assert_eq!((m.mean, m.second, m.variance), (rat(7, 15), rat(39, 175), rat(8, 1575)));
        let u = NuSpec::uniform_preset().moments();
        assert_eq!((u.mean, u.variance), (rat(1, 2), rat(1, 300)));
        let shifted = NuSpec::UniformInterval { lo: rat(0, 1), hi: rat(1, 1) }.moments();
        assert_eq!(shifted.mean, rat(1, 2));
    }

    #[test]
    fn p_moments_of_presets() {
        assert_eq!(disc().p_moments(), (rat(19, 39), rat(86696, 777231)));
        assert_eq!(disc().moments().second, rat(6953, 19929));
        assert_eq!(unif().p_moments(), (rat(1, 2), rat(97, 876)));
        assert_eq!(unif().moments().second, rat(79, 219));
    }

    #[test]
    fn moments_are_fixed_points() {
        for s in [disc(), unif()] {
            let e = &s.moments().mean;
            let e2 = &s.moments().second;
            let mut first = s.nu_weight() * &s.nu_moments().mean;
            let mut second = s.nu_weight() * &s.nu_moments().second;
            for (m, p) in s.maps().iter().zip(s.probs()) {
                first += p * (&m.ratio * e + &m.offset);
                second += p * (&m.ratio * &m.ratio * e2 + int(2) * &m.ratio * &m.offset * e + &m.offset * &m.offset);
            }
            assert_eq!(&first, e);
            assert_eq!(&second, e2);
        }
    }

    #[test]
    fn build_errors() {
        let maps = disc().maps().to_vec();
        let e = CondensationSystem::custom(maps.clone(), vec![rat(1, 2); 3], NuSpec::discrete_preset());
        assert!(matches!(e, Err(Error::ProbSum(_))));
        let e = SimilarityMap::new(rat(1, 1), rat(0, 1));
        assert!(matches!(e, Err(Error::BadRatio(_))));
        let wide = NuSpec::UniformInterval { lo: rat(1, 10), hi: rat(3, 5) };
        let e = CondensationSystem::custom(maps, vec![rat(1, 3); 3], wide);
        assert!(matches!(e, Err(Error::SeparationViolation(_))));
    }

    #[test]
    fn words_apply_left_to_right() {
        let s = disc();
        assert_eq!(s.apply_word(&Word::empty(), &rat(19, 39)).unwrap(), rat(19, 39));
        assert_eq!(s.apply_word(&Word::parse("1").unwrap(), &rat(19, 39)).unwrap(), rat(19, 195));
        let hull = s.region_hull(&Word::parse("21").unwrap(), RegionKind::J).unwrap();
        assert_eq!(hull, (rat(4, 5), rat(21, 25)));
        assert!(Word::new(vec![1; 65]).is_err());
        assert!(s.apply_word(&Word::parse("3").unwrap(), &rat(0, 1)).is_err());
    }

    #[test]
    fn region_masses() {
        let s = disc();
        let w2 = Word::parse("12").unwrap();
        assert_eq!(s.region_mass(&w2, RegionKind::J).unwrap(), rat(1, 9));
        assert_eq!(s.region_mass(&Word::empty(), RegionKind::C).unwrap(), rat(1, 3));
        assert_eq!(s.region_mass(&Word::empty(), RegionKind::J).unwrap(), rat(1, 1));
    }

    #[test]
    fn atoms_and_tail_means() {
        let nu = NuSpec::discrete_preset();
        assert_eq!(nu.atom(1).unwrap(), rat(2, 5));
        assert_eq!(nu.atom(2).unwrap(), rat(1, 2));
        assert_eq!(nu.atom(3).unwrap(), rat(11, 20));
        assert_eq!(nu.tail_mean(1).unwrap(), rat(7, 15));
        assert_eq!(nu.tail_mean(2).unwrap(), rat(8, 15));
        for k in 1..20 {
            let expect = rat(3, 5) - rat(4, 15) / pow(&int(2), k);
            assert_eq!(nu.tail_mean(k).unwrap(), expect);
        }
        assert!(NuSpec::uniform_preset().tail_mean(1).is_err());
        assert!(NuSpec::uniform_preset().atom(1).is_err());
    }

    #[test]
    fn group_sums_match_direct_sums() {
        let nu = NuSpec::discrete_preset();
        let g = nu.group_sums(3, Some(9)).unwrap();
        let (mut m, mut f, mut s) = (Rational::zero(), Rational::zero(), Rational::zero());
        for j in 3..=9 {
            let a = nu.atom(j).unwrap();
            let w = nu.atom_mass(j).unwrap();
            m += &w;
            f += &w * &a;
            s += &w * &a * &a;
        }
        assert_eq!((g.mass, g.first, g.second), (m, f, s));
    }

    #[test]
    fn word_enumeration() {
        let ws = Word::all(2, 2);
        let names: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["11", "12", "21", "22"]);
        assert_eq!(Word::empty().to_string(), "∅");
    }
}
