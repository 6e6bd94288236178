//! Exponent equations, quantization-dimension estimates from error
//! sequences, and quantization-coefficient tables.
//!
//! Errors such as `(2/75)^200` underflow hardware floats, so everything that
//! touches a sequence value works with `ln V` obtained exactly from the
//! rational (see [`ln_abs`]) and only exponentiates quantities of moderate
//! size.

use crate::constructions::{candidate_errors, f_big, intermediate_sequence, seq, v_f_closed};
use crate::error::{Error, Result};
use crate::measure::{CondensationSystem, Preset};
use crate::rational::{big, ln_abs, ln_bigint, pow, rat, to_f64, Rational};
use num::{BigInt, BigUint, Signed, Zero};
use rayon::prelude::*;

/// Residual below which a bisection root is accepted.
pub const EXPONENT_RESIDUAL: f64 = 1e-14;

/// The scalar equation `Σ (p_j s_j^r)^{κ/(r+κ)} = 1` for lower and upper
/// contraction ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentProblem {
    pub probs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub r: f64,
}

impl ExponentProblem {
    pub fn new(probs: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, r: f64) -> Result<Self> {
        if probs.len() != lower.len() || probs.len() != upper.len() {
            return Err(Error::ShapeMismatch { maps: upper.len(), probs: probs.len() });
        }
        if probs.is_empty() {
            return Err(Error::InvalidArgument("no maps".into()));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("order r = {r} must be positive")));
        }
        for &p in &probs {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::NonPositiveProb(p.to_string()));
            }
        }
        for (&a, &b) in lower.iter().zip(&upper) {
            if !(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0) || a > b {
                return Err(Error::BadRatio(format!("[{a}, {b}]")));
            }
        }
        Ok(ExponentProblem { probs, lower, upper, r })
    }

    /// Similitude system: lower and upper ratios coincide.
    pub fn from_system(sys: &CondensationSystem, r: f64) -> Result<Self> {
        let probs: Vec<f64> = sys.probs().iter().map(to_f64).collect();
        let ratios: Vec<f64> = sys.maps().iter().map(|m| to_f64(&m.ratio)).collect();
        Self::new(probs, ratios.clone(), ratios, r)
    }

    fn residual(&self, ratios: &[f64], k: f64) -> f64 {
        let e = k / (self.r + k);
        self.probs.iter().zip(ratios).map(|(p, s)| (p * s.powf(self.r)).powf(e)).sum::<f64>() - 1.0
    }

    fn root(&self, ratios: &[f64]) -> Result<f64> {
        let f = |k: f64| self.residual(ratios, k);
        // f(0) = N − 1 and f decreases to Σ p s^r − 1 < 0.
        if f(0.0) <= 0.0 {
            return Err(Error::NoRoot);
        }
        let mut hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::NoRoot);
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = 0.5 * (lo + hi);
        if f(k).abs() >= EXPONENT_RESIDUAL {
            return Err(Error::NoRoot);
        }
        Ok(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSolution {
    /// Root for the lower ratios.
    pub l: f64,
    /// Root for the upper ratios.
    pub kappa: f64,
    /// `|Σ (p_j b_j^r)^{κ/(r+κ)} − 1|` at the returned κ.
    pub residual: f64,
}

pub fn solve_exponent(problem: &ExponentProblem) -> Result<ExponentSolution> {
    let kappa = problem.root(&problem.upper)?;
    let l = if problem.lower == problem.upper { kappa } else { problem.root(&problem.lower)? };
    Ok(ExponentSolution { l, kappa, residual: problem.residual(&problem.upper, kappa).abs() })
}

/// κ for either preset at `r = 2`.
pub fn preset_kappa() -> f64 {
    let sys = CondensationSystem::preset(Preset::Discrete);
    solve_exponent(&ExponentProblem::from_system(&sys, 2.0).expect("valid preset")).expect("root exists").kappa
}

/// One point of an error sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesPoint {
    pub n: BigUint,
    pub v: Rational,
    pub label: String,
}

/// Errors `V_n` at strictly increasing counts, strictly decreasing and positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSeries {
    points: Vec<SeriesPoint>,
}

impl ErrorSeries {
    pub fn new(points: Vec<SeriesPoint>) -> Result<Self> {
        if points.iter().any(|p| p.v <= Rational::zero() || p.n.is_zero()) {
            return Err(Error::InvalidArgument("series values and counts must be positive".into()));
        }
        for w in points.windows(2) {
            if w[1].n <= w[0].n || w[1].v >= w[0].v {
                return Err(Error::InvalidArgument(format!(
                    "series must have increasing counts and decreasing errors (at {})",
                    w[1].label
                )));
            }
        }
        Ok(ErrorSeries { points })
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(F(n), V_{F(n)})` for `n` in `levels`, from the closed forms.
pub fn closed_form_series(case: Preset, levels: std::ops::RangeInclusive<u32>) -> Result<ErrorSeries> {
    let points = levels
        .map(|n| Ok(SeriesPoint { n: f_big(case, n)?, v: v_f_closed(case, n)?, label: format!("F({n})") }))
        .collect::<Result<Vec<_>>>()?;
    ErrorSeries::new(points)
}

/// The published intermediate counts and errors for `n` in `levels`.
pub fn intermediate_series(case: Preset, levels: std::ops::RangeInclusive<u32>) -> Result<ErrorSeries> {
    let points = levels
        .map(|n| {
            let (count, v) = intermediate_sequence(case, n)?;
            Ok(SeriesPoint { n: count, v, label: format!("I({n})") })
        })
        .collect::<Result<Vec<_>>>()?;
    ErrorSeries::new(points)
}

fn ln_count(n: &BigUint) -> f64 {
    ln_bigint(&BigInt::from(n.clone()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimRow {
    pub n: BigUint,
    pub label: String,
    /// `2 ln n / (−ln V_n)`.
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimTable {
    pub rows: Vec<DimRow>,
    /// Limit of the model `d_n = D − c / ln n` through the last two rows.
    pub extrapolated: Option<f64>,
}

/// Dimension estimates `d_n` with a two-point extrapolation of the tail.
/// Rows with `V_n ≥ 1` or `n = 1` carry no information and give `NaN`.
pub fn dim_table(series: &ErrorSeries) -> DimTable {
    let rows: Vec<DimRow> = series
        .points()
        .par_iter()
        .map(|p| {
            let lv = ln_abs(&p.v);
            let ln_n = ln_count(&p.n);
            let d = if lv < 0.0 && ln_n > 0.0 { 2.0 * ln_n / -lv } else { f64::NAN };
            DimRow { n: p.n.clone(), label: p.label.clone(), d }
        })
        .collect();
    let extrapolated = match rows.len() {
        0 | 1 => None,
        k => {
            let (a, b) = (&rows[k - 2], &rows[k - 1]);
            let (xa, xb) = (1.0 / ln_count(&a.n), 1.0 / ln_count(&b.n));
            let est = (b.d * xa - a.d * xb) / (xa - xb);
            est.is_finite().then_some(est)
        }
    };
    DimTable { rows, extrapolated }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffRow {
    pub n: BigUint,
    pub label: String,
    /// `n^{2/D} V_n`.
    pub value: f64,
    /// The same product as an exact rational when `2/D` is an integer.
    pub exact: Option<Rational>,
}

/// Coefficient values `n^{2/D} V_n` along a series.
pub fn coeff_table(series: &ErrorSeries, d: f64) -> Result<Vec<CoeffRow>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("dimension {d} must be positive")));
    }
    let e = 2.0 / d;
    let integral = (e - e.round()).abs() < 1e-12 && e.round() <= 64.0;
    Ok(series
        .points()
        .par_iter()
        .map(|p| {
            let exact = integral.then(|| pow(&big(BigInt::from(p.n.clone())), e.round() as u32) * &p.v);
            let value = match &exact {
                Some(x) => to_f64(x),
                None => (e * ln_count(&p.n) + ln_abs(&p.v)).exp(),
            };
            CoeffRow { n: p.n.clone(), label: p.label.clone(), value, exact }
        })
        .collect())
}

/// One subsequence whose coefficient limit is known.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsequenceLimit {
    pub label: &'static str,
    pub limit: f64,
    /// The exact limit when it is rational.
    pub exact: Option<Rational>,
}

/// Bracket constants, empirical coefficient range and coefficient existence.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub case: Preset,
    /// Exponent `D` in `n^{2/D} V_n`.
    pub dimension: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_exact: Option<Rational>,
    pub upper_exact: Option<Rational>,
    /// Counts examined: every `n` in `F(2)..=F(8)`.
    pub range: (u64, u64),
    pub empirical_min: f64,
    pub empirical_max: f64,
    /// Worst violation of the bracket, relative to the bracket end it crosses
    /// (zero when all values lie inside).
    pub worst_excess: f64,
    pub limits: [SubsequenceLimit; 2],
    /// Set when the two subsequence limits differ, so the coefficient does not exist.
    pub coefficient_nonexistent: bool,
}

impl BoundsReport {
    /// All empirical values lie inside the bracket up to `slack` (relative).
    pub fn contained(&self, slack: f64) -> bool {
        self.worst_excess <= slack
    }
}

/// `769208/5884749`, the leading constant of the discrete closed form.
pub fn discrete_constant() -> Rational {
    rat(769208, 5884749)
}

/// Relative agreement required before two limits count as equal.
pub const LIMIT_TOLERANCE: f64 = 1e-9;

pub fn bounds_report(case: Preset) -> Result<BoundsReport> {
    let kappa = preset_kappa();
    let (dimension, lower, upper, lower_exact, upper_exact) = match case {
        Preset::Discrete => {
            let c = to_f64(&discrete_constant());
            (kappa, (6.25f64).powf(1.0 / kappa) * c, (100f64).powf(1.0 / kappa) * c, None, None)
        }
        Preset::Uniform => {
            let (lo, hi) = (rat(1, 2064), rat(16, 129));
            (1.0, to_f64(&lo), to_f64(&hi), Some(lo), Some(hi))
        }
    };
    let (lo_n, hi_n) = (seq(case, 2)?.1, seq(case, 8)?.1);
    let trace = candidate_errors(case, lo_n, hi_n)?;
    let e = 2.0 / dimension;
    let values: Vec<f64> = trace
        .par_iter()
        .map(|(n, v)| match case {
            Preset::Uniform => to_f64(&(big(BigInt::from(*n) * BigInt::from(*n)) * v)),
            Preset::Discrete => (e * (*n as f64).ln() + ln_abs(v)).exp(),
        })
        .collect();
    let empirical_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let empirical_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let worst_excess = ((lower - empirical_min) / lower).max((empirical_max - upper) / upper).max(0.0);
    let limits = subsequence_limits(case, kappa)?;
    let gap = (limits[0].limit - limits[1].limit).abs() / limits[0].limit.abs();
    Ok(BoundsReport {
        case,
        dimension,
        lower,
        upper,
        lower_exact,
        upper_exact,
        range: (lo_n, hi_n),
        empirical_min,
        empirical_max,
        worst_excess,
        limits,
        coefficient_nonexistent: gap > 10.0 * LIMIT_TOLERANCE,
    })
}

/// Coefficient limits along the `F(n)` subsequence and along the
/// intermediate counts.
pub fn subsequence_limits(case: Preset, kappa: f64) -> Result<[SubsequenceLimit; 2]> {
    Ok(match case {
        Preset::Uniform => [
            SubsequenceLimit { label: "F(n)", limit: 1.0 / 129.0, exact: Some(rat(1, 129)) },
            SubsequenceLimit { label: "F(n)+2^a(n)", limit: 171.0 / 17200.0, exact: Some(rat(171, 17200)) },
        ],
        Preset::Discrete => {
            let e = 2.0 / kappa;
            let f_limit = 5f64.powf(e) * to_f64(&discrete_constant());
            // The intermediate coefficient converges like (75/128)^n; level 200 is at the limit.
            let (count, v) = intermediate_sequence(case, 200)?;
            let i_limit = (e * ln_count(&count) + ln_abs(&v)).exp();
            [
                SubsequenceLimit { label: "F(n)", limit: f_limit, exact: None },
                SubsequenceLimit { label: "intermediate", limit: i_limit, exact: None },
            ]
        }
    })
}

/// `(l_r, κ_r, max{κ_r, D_r(ν)})` for a preset system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionBounds {
    pub l: f64,
    pub kappa: f64,
    pub nu_dimension: f64,
    pub upper: f64,
}

pub fn dimension_bounds(sys: &CondensationSystem, r: f64) -> Result<DimensionBounds> {
    let nu_dimension = match sys.preset_kind() {
        Some(Preset::Discrete) => 0.0,
        Some(Preset::Uniform) => 1.0,
        None => return Err(Error::UnknownNuDimension),
    };
    let s = solve_exponent(&ExponentProblem::from_system(sys, r)?)?;
    Ok(DimensionBounds { l: s.l, kappa: s.kappa, nu_dimension, upper: s.kappa.max(nu_dimension) })
}

/// Relative difference `|a − b| / |b|`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `|x − y|` for exact values rendered to a float.
pub fn abs_diff(x: &Rational, y: &Rational) -> f64 {
    to_f64(&(x - y).abs())
}
