//! Numerical oracles: Lloyd fixed-point search over P, and exact 1-D k-means
//! by dynamic programming on a discretised copy of P.

mod dp;

pub use dp::{
    discrete_nu_closed, discretize, dp_optimal, dp_optimal_all, nu_dp_exact, DPResult, DiscretizedMeasure, FloatBounds,
};

use crate::error::{Error, Result};
use crate::integrals::{descend, distortion_enclosure, Enclosure, DEFAULT_DEPTH};
use crate::measure::CondensationSystem;
use crate::rational::{from_f64, int, to_f64, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Centroid residual at which a Lloyd run counts as converged.
pub const LLOYD_TOLERANCE: f64 = 1e-12;

/// Iteration cap for a single Lloyd run.
pub const LLOYD_MAX_ITERATIONS: usize = 20_000;

/// Relative gap under which two restarts are considered equally good; the
/// earlier restart wins.
pub const RESTART_TIE_TOLERANCE: f64 = 1e-12;

/// A strictly increasing set of points with an enclosure of its distortion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    pub points: Vec<Rational>,
    pub distortion: Enclosure,
}

impl Codebook {
    /// Evaluates `points` against `sys` with a descent of the given depth.
    pub fn new(points: Vec<Rational>, sys: &CondensationSystem, depth: u32) -> Result<Self> {
        let distortion = distortion_enclosure(&points, sys, depth)?;
        Ok(Self { points, distortion })
    }

    /// Imports doubles exactly and evaluates them.
    pub fn from_f64(points: &[f64], sys: &CondensationSystem, depth: u32) -> Result<Self> {
        Self::new(points.iter().map(|&x| from_f64(x)).collect(), sys, depth)
    }

    pub fn points_f64(&self) -> Vec<f64> {
        self.points.iter().map(to_f64).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Midpoints of consecutive points.
pub fn voronoi_boundaries(points: &[Rational]) -> Vec<Rational> {
    points.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect()
}

/// One float centroid update.
#[derive(Clone, Debug)]
pub struct LloydUpdate {
    pub points: Vec<f64>,
    /// `max |old − new|` over all points.
    pub residual: f64,
    /// Largest half-width of a cell-mean enclosure, i.e. how far a new point
    /// can be from the true centroid (before float rounding).
    pub max_halfwidth: f64,
}

/// Moves each point to the midpoint of its cell-mean enclosure, in doubles.
pub fn lloyd_step_f64(points: &[f64], sys: &CondensationSystem, depth: u32) -> Result<LloydUpdate> {
    let r = descend(sys, points, depth)?;
    let mut next = Vec::with_capacity(points.len());
    let mut residual = 0.0f64;
    let mut max_halfwidth = 0.0f64;
    for (i, (cell, &p)) in r.cells.iter().zip(points).enumerate() {
        let (lo, hi) = cell.mean_bounds().ok_or(Error::EmptyCell(i))?;
        let m = 0.5 * (lo + hi);
        residual = residual.max((m - p).abs());
        max_halfwidth = max_halfwidth.max(0.5 * (hi - lo));
        next.push(m);
    }
    if next.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCodebook);
    }
    Ok(LloydUpdate { points: next, residual, max_halfwidth })
}

/// Exact-evaluated Lloyd step: float centroids, rigorous distortion.
pub fn lloyd_step(codebook: &Codebook, sys: &CondensationSystem, depth: u32) -> Result<Codebook> {
    let u = lloyd_step_f64(&codebook.points_f64(), sys, depth)?;
    Codebook::from_f64(&u.points, sys, depth)
}

/// Outcome of one Lloyd restart.
#[derive(Clone, Debug)]
pub struct LloydRun {
    pub start: Vec<f64>,
    pub codebook: Codebook,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Iterates from `start` until the centroid residual drops below
/// [`LLOYD_TOLERANCE`] or the iteration cap is hit.
pub fn lloyd_from(start: &[f64], sys: &CondensationSystem, depth: u32) -> Result<LloydRun> {
    let mut pts = start.to_vec();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < LLOYD_MAX_ITERATIONS {
        let u = lloyd_step_f64(&pts, sys, depth)?;
        pts = u.points;
        residual = u.residual;
        iterations += 1;
        if residual < LLOYD_TOLERANCE {
            break;
        }
    }
    Ok(LloydRun {
        start: start.to_vec(),
        codebook: Codebook::from_f64(&pts, sys, depth)?,
        iterations,
        residual,
        converged: residual < LLOYD_TOLERANCE,
    })
}

/// Coarse discretisation with at least `4n` atoms, and its cumulative masses.
fn start_measure(n: usize, sys: &CondensationSystem) -> Result<(DiscretizedMeasure, Vec<f64>)> {
    if n == 0 {
        return Err(Error::EmptyCodebook);
    }
    let mut depth = 4;
    let meas = loop {
        let m = discretize(sys, depth, 8)?;
        if m.len() >= 4 * n || depth >= 14 {
            break m;
        }
        depth += 2;
    };
    if meas.len() < n {
        return Err(Error::TooManyCells { cells: n, atoms: meas.len() });
    }
    let mut cum = Vec::with_capacity(meas.len());
    let mut acc = 0.0;
    for &m in &meas.masses {
        acc += m;
        cum.push(acc);
    }
    Ok((meas, cum))
}

/// `n` quantile points of a coarse discretisation, made strictly increasing.
pub fn quantile_start(n: usize, sys: &CondensationSystem) -> Result<Vec<f64>> {
    let (meas, cum) = start_measure(n, sys)?;
    let total = *cum.last().expect("nonempty");
    let mut out = Vec::with_capacity(n);
    let mut prev: Option<usize> = None;
    for i in 0..n {
        let target = (i as f64 + 0.5) / n as f64 * total;
        let mut idx = cum.partition_point(|&c| c < target).min(meas.len() - 1);
        if let Some(p) = prev {
            idx = idx.max(p + 1);
        }
        // Leave room for the remaining points.
        idx = idx.min(meas.len() - (n - i));
        out.push(meas.positions[idx]);
        prev = Some(idx);
    }
    Ok(out)
}

/// `n` distinct atoms of a coarse discretisation drawn with probability
/// proportional to mass.
fn sampled_start(meas: &DiscretizedMeasure, cum: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let total = *cum.last().expect("nonempty");
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < n {
        let u: f64 = rng.gen_range(0.0..total);
        picked.insert(cum.partition_point(|&c| c <= u).min(meas.len() - 1));
    }
    picked.into_iter().map(|i| meas.positions[i]).collect()
}

/// Perturbs every point by up to ±10% of its Voronoi cell width.
fn jitter(points: &[f64], sys: &CondensationSystem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let hull = sys.region_hull(&crate::measure::Word::empty(), crate::measure::RegionKind::J);
    let (lo, hi) = hull.map(|(a, b)| (to_f64(&a), to_f64(&b))).unwrap_or((0.0, 1.0));
    let n = points.len();
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i == 0 { lo } else { 0.5 * (points[i - 1] + points[i]) };
            let right = if i + 1 == n { hi } else { 0.5 * (points[i] + points[i + 1]) };
            let u: f64 = rng.gen_range(-0.1..0.1);
            (points[i] + u * (right - left)).clamp(lo, hi)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Start points for `restarts` runs: the quantile start, then alternately a
/// seeded ±10% jitter of it and a seeded mass-weighted draw of `n` atoms.
/// The draws reach optima whose cell pattern differs from the quantile
/// pattern, which small jitters cannot.
pub fn lloyd_starts(n: usize, sys: &CondensationSystem, restarts: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (meas, cum) = start_measure(n, sys)?;
    let base = quantile_start(n, sys)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![base.clone()];
    while starts.len() < restarts.max(1) {
        let s =
            if starts.len() % 2 == 1 { jitter(&base, sys, &mut rng) } else { sampled_start(&meas, &cum, n, &mut rng) };
        if s.len() == n {
            starts.push(s);
        }
    }
    Ok(starts)
}

/// Runs every restart (in parallel) and returns them in start order. Runs
/// that hit an empty cell are dropped.
pub fn lloyd_runs(n: usize, sys: &CondensationSystem, restarts: usize, depth: u32, seed: u64) -> Result<Vec<LloydRun>> {
    let starts = lloyd_starts(n, sys, restarts, seed)?;
    let runs: Vec<Result<LloydRun>> = starts.par_iter().map(|s| lloyd_from(s, sys, depth)).collect();
    Ok(runs.into_iter().filter_map(|r| r.ok()).collect())
}

/// Multi-start Lloyd; returns the codebook with the smallest upper bound,
/// earliest restart first among near-ties.
pub fn solve_n_means(n: usize, sys: &CondensationSystem, restarts: usize, depth: u32, seed: u64) -> Result<Codebook> {
    let runs = lloyd_runs(n, sys, restarts, depth, seed)?;
    best_run(&runs).map(|r| r.codebook.clone()).ok_or(Error::EmptyCell(0))
}

/// Picks the run with the smallest distortion upper bound, preferring the
/// earlier run when two are within [`RESTART_TIE_TOLERANCE`].
pub fn best_run(runs: &[LloydRun]) -> Option<&LloydRun> {
    let mut best: Option<(&LloydRun, f64)> = None;
    for r in runs {
        let u = to_f64(&r.codebook.distortion.upper);
        match best {
            Some((_, b)) if u >= b * (1.0 - RESTART_TIE_TOLERANCE) => {}
            _ => best = Some((r, u)),
        }
    }
    best.map(|(r, _)| r)
}

/// Convenience wrapper with the default depth.
pub fn solve_n_means_default(n: usize, sys: &CondensationSystem, restarts: usize, seed: u64) -> Result<Codebook> {
    solve_n_means(n, sys, restarts, DEFAULT_DEPTH, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Preset;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn disc() -> CondensationSystem {
        CondensationSystem::preset(Preset::Discrete)
    }

    fn unif() -> CondensationSystem {
        CondensationSystem::preset(Preset::Uniform)
    }

    #[test]
    fn boundaries() {
        assert_eq!(voronoi_boundaries(&[rat(1, 10), rat(1, 2), rat(9, 10)]), vec![rat(3, 10), rat(7, 10)]);
        assert!(voronoi_boundaries(&[rat(1, 3)]).is_empty());
        assert_eq!(voronoi_boundaries(&[rat(0, 1), rat(1, 1)]), vec![rat(1, 2)]);
    }

    #[test]
    fn one_point_jumps_to_the_mean() {
        let s = disc();
        let u = lloyd_step_f64(&[0.9], &s, 12).unwrap();
        assert!((u.points[0] - 19.0 / 39.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_three_means_are_a_fixed_point() {
        let u = unif();
        let p = [0.1, 0.5, 0.9];
        let step = lloyd_step_f64(&p, &u, 12).unwrap();
        for (a, b) in step.points.iter().zip(&p) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbed_two_means_converge() {
        let s = disc();
        let run = lloyd_from(&[0.25, 0.82], &s, 12).unwrap();
        assert!(run.converged);
        let got = run.codebook.points_f64();
        assert!((got[0] - 659.0 / 2730.0).abs() < 1e-10, "{got:?}");
        assert!((got[1] - 1621.0 / 1950.0).abs() < 1e-10, "{got:?}");
    }

    #[test]
    fn degenerate_starts_report_empty_cells() {
        // Both points sit in the gap (1/5, 2/5); the left one owns no mass.
        let s = disc();
        assert_eq!(lloyd_step_f64(&[0.25, 0.3, 0.35], &s, 6).unwrap_err(), Error::EmptyCell(1));
    }

    #[test]
    fn discrete_small_codebooks() {
        let s = disc();
        let one = solve_n_means(1, &s, 4, 12, 7).unwrap();
        assert!((one.points_f64()[0] - 19.0 / 39.0).abs() < 1e-12);
        // The float point is off by an ulp, so the exact cost sits just above V(P).
        let v = rat(86696, 777231);
        assert!(one.distortion.lower >= v && to_f64(&(&one.distortion.upper - &v)) < 1e-30);
        let three = solve_n_means(3, &s, 8, 12, 7).unwrap().points_f64();
        let expect = [19.0 / 195.0, 7.0 / 15.0, 4.0 / 5.0 + 19.0 / 195.0];
        for (a, b) in three.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6, "{three:?}");
        }
    }

    #[test]
    fn uniform_four_means_have_two_optima() {
        let u = unif();
        let target = 59003.0 / 19710000.0;
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for seed in 0..6 {
            let cb = solve_n_means(4, &u, 20, 12, seed).unwrap();
            let mid = to_f64(&cb.distortion.midpoint());
            assert!((mid - target).abs() < 1e-8, "seed {seed}: {mid}");
            let p = cb.points_f64();
            if !seen.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-6)) {
                seen.push(p);
            }
        }
        assert_eq!(seen.len(), 2, "{seen:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let s = disc();
        let a = solve_n_means(4, &s, 6, 10, 42).unwrap();
        let b = solve_n_means(4, &s, 6, 10, 42).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lloyd_does_not_increase_the_upper_bound(seed in any::<u64>(), n in 1usize..6, discrete in any::<bool>()) {
            let sys = if discrete { disc() } else { unif() };
            let depth = 10;
            let starts = lloyd_starts(n, &sys, 2, seed).unwrap();
            let mut pts = starts[1].clone();
            let mut before = Codebook::from_f64(&pts, &sys, depth).unwrap();
            for _ in 0..4 {
                let Ok(u) = lloyd_step_f64(&pts, &sys, depth) else { break };
                let after = Codebook::from_f64(&u.points, &sys, depth).unwrap();
                let slack = to_f64(&after.distortion.width()) + (u.max_halfwidth + 1e-15).powi(2);
                prop_assert!(
                    to_f64(&after.distortion.upper) <= to_f64(&before.distortion.upper) + slack,
                    "{:?} -> {:?}", before.distortion, after.distortion
                );
                pts = u.points;
                before = after;
            }
        }
    }
}
