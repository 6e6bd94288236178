//! Regression suite over the published reference results: exact moments and
//! codebook errors, closed forms, greedy fidelity, numerical oracles,
//! asymptotic limits and the structural property checks.
//!
//! Each criterion yields rows with a status. A row whose published value is
//! known to be misprinted is checked against the corrected value and reported
//! as [`Status::Erratum`]; the suite passes when no row fails and the erratum
//! rows are exactly the documented ones.

use crate::asymptotics::{
    abs_diff, bounds_report, closed_form_series, coeff_table, dim_table, discrete_constant, intermediate_series,
    preset_kappa, rel_diff, subsequence_limits, LIMIT_TOLERANCE,
};
use crate::constructions::{
    alpha_f_with, candidate_optimal_with, greedy_refine_with, intermediate_sequence, seq, splitting_identity_holds,
    v_f_closed, GreedyPolicy, Kit,
};
use crate::integrals::{distortion_enclosure, exact_distortion, Enclosure};
use crate::measure::{CondensationSystem, Preset};
use crate::rational::{pow, rat, to_f64, Rational};
use crate::solver::{
    discretize, dp_optimal, lloyd_starts, lloyd_step_f64, solve_n_means, Codebook, DiscretizedMeasure,
};
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Outcome of a single comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The published value is wrong and the corrected value was confirmed.
    Erratum,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Erratum => "erratum",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub label: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub rows: Vec<Row>,
}

impl CriterionReport {
    pub fn status(&self) -> Status {
        if self.rows.iter().any(|r| r.status == Status::Fail) {
            Status::Fail
        } else if self.rows.iter().any(|r| r.status == Status::Erratum) {
            Status::Erratum
        } else {
            Status::Pass
        }
    }
}

/// Rows whose published value is misprinted: `(criterion, row label)`.
pub const DOCUMENTED_ERRATA: &[(u8, &str)] = &[(2, "uniform V5"), (5, "uniform V5")];

/// The suite succeeds when nothing fails and the erratum rows are exactly
/// [`DOCUMENTED_ERRATA`].
pub fn suite_passes(reports: &[CriterionReport]) -> bool {
    let mut errata: Vec<(u8, &str)> = Vec::new();
    for c in reports {
        for r in &c.rows {
            match r.status {
                Status::Fail => return false,
                Status::Erratum => errata.push((c.id, r.label.as_str())),
                Status::Pass => {}
            }
        }
    }
    let expected: Vec<(u8, &str)> =
        DOCUMENTED_ERRATA.iter().copied().filter(|(id, _)| reports.iter().any(|c| c.id == *id)).collect();
    errata == expected
}

/// Knobs for negative controls.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Added to the computed discrete `V(P)` before it is compared.
    pub perturb_variance: Option<Rational>,
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "exact moments"),
    (2, "published codebook errors"),
    (3, "closed-form consistency"),
    (4, "greedy endpoint fidelity"),
    (5, "dynamic-programming oracle"),
    (6, "Lloyd recovery"),
    (7, "dimension limits"),
    (8, "coefficient subsequence limits"),
    (9, "bracket containment"),
    (10, "property suites"),
];

/// Runs one criterion by number (1–10).
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> Option<CriterionReport> {
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let rows = match id {
        1 => moments(opts),
        2 => codebook_errors(),
        3 => closed_forms(),
        4 => greedy_fidelity(),
        5 => dp_oracle(),
        6 => lloyd_recovery(),
        7 => dimension_limits(),
        8 => coefficient_limits(),
        9 => brackets(),
        10 => properties(),
        _ => return None,
    };
    Some(CriterionReport { id, name, rows })
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0, opts)).collect()
}

fn row(label: impl Into<String>, ok: bool, detail: impl Into<String>) -> Row {
    Row { label: label.into(), status: if ok { Status::Pass } else { Status::Fail }, detail: detail.into() }
}

fn exact_row(label: impl Into<String>, got: &Rational, want: &Rational) -> Row {
    row(label, got == want, format!("got {got}, expected {want}"))
}

fn err_row(label: impl Into<String>, e: impl fmt::Display) -> Row {
    row(label, false, format!("error: {e}"))
}

fn sys(case: Preset) -> CondensationSystem {
    CondensationSystem::preset(case)
}

fn s1(x: Rational) -> Rational {
    x / rat(5, 1)
}

fn s2(x: Rational) -> Rational {
    x / rat(5, 1) + rat(4, 5)
}

// ---------------------------------------------------------------- 1

fn moments(opts: &VerifyOptions) -> Vec<Row> {
    let d = sys(Preset::Discrete);
    let u = sys(Preset::Uniform);
    let mut var = d.moments().variance.clone();
    if let Some(p) = &opts.perturb_variance {
        var += p;
    }
    vec![
        exact_row("discrete E(P)", &d.moments().mean, &rat(19, 39)),
        exact_row("discrete V(P)", &var, &rat(86696, 777231)),
        exact_row("uniform E(P)", &u.moments().mean, &rat(1, 2)),
        exact_row("uniform V(P)", &u.moments().variance, &rat(97, 876)),
        exact_row("uniform W", &u.nu_moments().variance, &rat(1, 300)),
    ]
}

// ---------------------------------------------------------------- 2

/// A published codebook, its printed error and, for misprints, the true error.
pub struct Reference {
    pub case: Preset,
    pub n: usize,
    pub label: &'static str,
    pub points: Vec<Rational>,
    pub printed: Rational,
    pub corrected: Option<Rational>,
}

/// The published small codebooks.
pub fn references() -> Vec<Reference> {
    let u2 = || vec![rat(13, 60), rat(47, 60)];
    let map = |f: fn(Rational) -> Rational, v: Vec<Rational>| v.into_iter().map(f).collect::<Vec<_>>();
    let join = |parts: Vec<Vec<Rational>>| {
        let mut v: Vec<Rational> = parts.into_iter().flatten().collect();
        v.sort();
        v
    };
    let r = |case, n, label, points, printed| Reference { case, n, label, points, printed, corrected: None };
    let half = || vec![rat(1, 2)];
    vec![
        r(Preset::Discrete, 1, "discrete V1", vec![rat(19, 39)], rat(86696, 777231)),
        r(Preset::Discrete, 2, "discrete V2", vec![rat(659, 2730), rat(1621, 1950)], rat(499067, 18505500)),
        r(
            Preset::Discrete,
            3,
            "discrete V3",
            join(vec![vec![s1(rat(19, 39)), rat(7, 15), s2(rat(19, 39))]]),
            rat(30232, 6476925),
        ),
        r(
            Preset::Discrete,
            4,
            "discrete V4",
            join(vec![vec![s1(rat(19, 39)), rat(2, 5), rat(8, 15), s2(rat(19, 39))]]),
            rat(185729, 58292325),
        ),
        r(Preset::Uniform, 1, "uniform V1", half(), rat(97, 876)),
        r(Preset::Uniform, 2, "uniform V2", u2(), rat(8003, 262800)),
        r(Preset::Uniform, 3, "uniform V3", vec![rat(1, 10), rat(1, 2), rat(9, 10)], rat(89, 21900)),
        r(
            Preset::Uniform,
            4,
            "uniform V4",
            join(vec![map(s1, u2()), half(), vec![s2(rat(1, 2))]]),
            rat(59003, 19710000),
        ),
        r(
            Preset::Uniform,
            4,
            "uniform V4 (mirror)",
            join(vec![vec![s1(rat(1, 2))], half(), map(s2, u2())]),
            rat(59003, 19710000),
        ),
        Reference {
            case: Preset::Uniform,
            n: 5,
            label: "uniform V5",
            points: join(vec![map(s1, u2()), half(), map(s2, u2())]),
            printed: rat(29903, 19710000),
            corrected: Some(rat(37906, 19710000)),
        },
        r(
            Preset::Uniform,
            6,
            "uniform V6",
            join(vec![map(s1, u2()), vec![rat(9, 20), rat(11, 20)], map(s2, u2())]),
            rat(21481, 19710000),
        ),
        r(
            Preset::Uniform,
            7,
            "uniform V7",
            join(vec![map(s1, vec![rat(1, 10), rat(1, 2), rat(9, 10)]), vec![rat(9, 20), rat(11, 20)], map(s2, u2())]),
            rat(7273, 9855000),
        ),
    ]
}

/// Compares a computed value with a reference, honouring a documented correction.
fn reference_row(r: &Reference, ok: impl Fn(&Rational) -> bool, detail: String) -> Row {
    let status = match (&r.corrected, ok(&r.printed)) {
        (None, true) => Status::Pass,
        (None, false) => Status::Fail,
        // A documented misprint that reproduces is no longer an erratum: flag it.
        (Some(_), true) => Status::Fail,
        (Some(c), false) => {
            if ok(c) {
                Status::Erratum
            } else {
                Status::Fail
            }
        }
    };
    let note = match &r.corrected {
        Some(c) => format!("{detail}; printed {}, corrected {c}", r.printed),
        None => format!("{detail}; expected {}", r.printed),
    };
    Row { label: r.label.into(), status, detail: note }
}

fn codebook_errors() -> Vec<Row> {
    references()
        .iter()
        .map(|r| match exact_distortion(&r.points, &sys(r.case), 12) {
            Ok(Some(v)) => reference_row(r, |x| *x == v, format!("structured distortion {v}")),
            Ok(None) => err_row(r.label, "distortion did not close exactly"),
            Err(e) => err_row(r.label, e),
        })
        .collect()
}

// ---------------------------------------------------------------- 3

fn closed_forms() -> Vec<Row> {
    let mut rows = Vec::new();
    for (case, lo) in [(Preset::Discrete, 1), (Preset::Uniform, 0)] {
        let kit = Kit::new(case);
        let mut bad = Vec::new();
        for n in lo..=12 {
            match (alpha_f_with(&kit, n), v_f_closed(case, n)) {
                (Ok(f), Ok(v)) if f.total_error == v => {}
                _ => bad.push(n),
            }
        }
        rows.push(row(
            format!("{} n={lo}..12", case.name()),
            bad.is_empty(),
            if bad.is_empty() { "block sums equal closed forms".to_string() } else { format!("mismatch at {bad:?}") },
        ));
    }
    rows
}

// ---------------------------------------------------------------- 4

fn greedy_fidelity() -> Vec<Row> {
    let mut rows = Vec::new();
    for (case, lo, policy) in
        [(Preset::Discrete, 1, GreedyPolicy::Unbounded), (Preset::Uniform, 0, GreedyPolicy::PaperRound)]
    {
        let kit = Kit::new(case);
        let mut bad = Vec::new();
        for n in lo..=8 {
            let ok = (|| -> crate::Result<bool> {
                let f = alpha_f_with(&kit, n)?;
                let next = alpha_f_with(&kit, n + 1)?;
                let g = greedy_refine_with(&kit, &f, next.total_count, policy)?;
                Ok(g.points(&kit) == next.points(&kit))
            })();
            if ok != Ok(true) {
                bad.push(n);
            }
        }
        rows.push(row(
            format!("{} n={lo}..8", case.name()),
            bad.is_empty(),
            if bad.is_empty() { "point multisets equal".to_string() } else { format!("differs at {bad:?}") },
        ));
    }
    let kit = Kit::new(Preset::Uniform);
    let mut bad = Vec::new();
    for n in 2..=8u32 {
        let ok = (|| -> crate::Result<bool> {
            let (a, _) = seq(Preset::Uniform, n)?;
            let f = alpha_f_with(&kit, n)?;
            let g = greedy_refine_with(&kit, &f, f.total_count + (1 << a), GreedyPolicy::PaperRound)?;
            let formula = rat(19, 4300) * pow(&rat(1, 16), n) - rat(3473, 941700) * pow(&rat(2, 75), n);
            Ok(g.total_error == formula && intermediate_sequence(Preset::Uniform, n)?.1 == formula)
        })();
        if ok != Ok(true) {
            bad.push(n);
        }
    }
    rows.push(row(
        "uniform intermediate n=2..8",
        bad.is_empty(),
        if bad.is_empty() { "errors equal the formula".to_string() } else { format!("differs at {bad:?}") },
    ));
    rows
}

// ---------------------------------------------------------------- 5

/// Discretisation depth and resolution used by the oracle rows.
pub fn dp_settings(case: Preset) -> (u32, u32) {
    match case {
        Preset::Uniform => (8, 8),
        Preset::Discrete => (8, 16),
    }
}

fn dp_oracle() -> Vec<Row> {
    let mut rows = Vec::new();
    for case in [Preset::Discrete, Preset::Uniform] {
        let s = sys(case);
        let (m, q) = dp_settings(case);
        let meas = match discretize(&s, m, q) {
            Ok(x) => x,
            Err(e) => {
                rows.push(err_row(format!("{} discretization", case.name()), e));
                continue;
            }
        };
        for r in references().iter().filter(|r| r.case == case && !r.label.contains("mirror")) {
            rows.push(dp_row(&s, &meas, r));
        }
    }
    rows
}

fn dp_row(s: &CondensationSystem, meas: &DiscretizedMeasure, r: &Reference) -> Row {
    let dp = match dp_optimal(meas, r.n) {
        Ok(d) => d,
        Err(e) => return err_row(r.label, e),
    };
    let enc = match distortion_enclosure(&dp.codebook, s, 12) {
        Ok(e) => e,
        Err(e) => return err_row(r.label, e),
    };
    let (lo, hi) = (to_f64(&enc.lower), to_f64(&enc.upper));
    let detail = format!(
        "enclosure [{:.9e}, {:.9e}], codebook distortion in [{lo:.9e}, {hi:.9e}]",
        dp.enclosure.lower, dp.enclosure.upper
    );
    reference_row(
        r,
        |v| {
            let x = to_f64(v);
            dp.enclosure.contains(x) && (lo - x).abs() <= 1e-6 && (hi - x).abs() <= 1e-6
        },
        detail,
    )
}

// ---------------------------------------------------------------- 6

/// Seed of the fixed-seed recovery rows.
pub const LLOYD_SEED: u64 = 2024;

fn close_to(found: &[f64], want: &[Rational], tol: f64) -> bool {
    found.len() == want.len() && found.iter().zip(want).all(|(a, b)| (a - to_f64(b)).abs() <= tol)
}

fn lloyd_recovery() -> Vec<Row> {
    let mut rows = Vec::new();
    let refs = references();
    for (case, max_n) in [(Preset::Discrete, 3), (Preset::Uniform, 5)] {
        let s = sys(case);
        for n in 1..=max_n {
            let label = format!("{} n={n}", case.name());
            let targets: Vec<&Reference> = refs.iter().filter(|r| r.case == case && r.n == n).collect();
            match solve_n_means(n, &s, 20, 12, LLOYD_SEED) {
                Ok(cb) => {
                    let p = cb.points_f64();
                    let ok = targets.iter().any(|r| close_to(&p, &r.points, 1e-5));
                    rows.push(row(label, ok, format!("{p:?}")));
                }
                Err(e) => rows.push(err_row(label, e)),
            }
        }
    }
    // Both published four-point optima show up across seeds.
    let s = sys(Preset::Uniform);
    let four: Vec<&Reference> = refs.iter().filter(|r| r.case == Preset::Uniform && r.n == 4).collect();
    let mut hit = vec![false; four.len()];
    for seed in 0..6 {
        if let Ok(cb) = solve_n_means(4, &s, 20, 12, seed) {
            let p = cb.points_f64();
            for (h, r) in hit.iter_mut().zip(&four) {
                *h |= close_to(&p, &r.points, 1e-5);
            }
        }
    }
    rows.push(row("uniform n=4 two optima (seeds 0..6)", hit.iter().all(|&h| h), format!("found {hit:?}")));
    rows
}

// ---------------------------------------------------------------- 7

fn dimension_limits() -> Vec<Row> {
    let mut rows = Vec::new();
    for (case, lo, target) in [(Preset::Discrete, 1, 0.382496), (Preset::Uniform, 0, 1.0)] {
        let label = format!("{} levels {lo}..200", case.name());
        match closed_form_series(case, lo..=200) {
            Ok(s) => {
                let t = dim_table(&s);
                let est = t.extrapolated.unwrap_or(f64::NAN);
                rows.push(row(
                    label,
                    (est - target).abs() <= 0.005,
                    format!(
                        "extrapolated {est:.6}, last d_n {:.6}, target {target}",
                        t.rows.last().map_or(f64::NAN, |r| r.d)
                    ),
                ));
            }
            Err(e) => rows.push(err_row(label, e)),
        }
    }
    rows
}

// ---------------------------------------------------------------- 8

fn coefficient_limits() -> Vec<Row> {
    let mut rows = Vec::new();
    let r = (|| -> crate::Result<Vec<Row>> {
        let f20 = coeff_table(&closed_form_series(Preset::Uniform, 20..=20)?, 1.0)?;
        let a = f20[0].exact.clone().unwrap_or_else(Rational::zero);
        let i20 = coeff_table(&intermediate_series(Preset::Uniform, 20..=20)?, 1.0)?;
        let b = i20[0].exact.clone().unwrap_or_else(Rational::zero);
        let k = preset_kappa();
        let d30 = coeff_table(&closed_form_series(Preset::Discrete, 30..=30)?, k)?;
        let target = 5f64.powf(2.0 / k) * to_f64(&discrete_constant());
        let da = abs_diff(&a, &rat(1, 129));
        let db = abs_diff(&b, &rat(171, 17200));
        let dd = rel_diff(d30[0].value, target);
        Ok(vec![
            row("uniform F(20)^2 V", da <= 1e-7, format!("{:.12e}, |diff| {da:.3e}", to_f64(&a))),
            row("uniform intermediate count^2 V at 20", db <= 1e-7, format!("{:.12e}, |diff| {db:.3e}", to_f64(&b))),
            row(
                "discrete F(30) coefficient",
                dd <= 1e-3,
                format!("{:.9e} vs {target:.9e}, rel {dd:.3e}", d30[0].value),
            ),
        ])
    })();
    match r {
        Ok(v) => rows.extend(v),
        Err(e) => rows.push(err_row("coefficients", e)),
    }
    let k = preset_kappa();
    for case in [Preset::Discrete, Preset::Uniform] {
        let label = format!("{} non-existence flag", case.name());
        match subsequence_limits(case, k) {
            Ok(l) => {
                let gap = rel_diff(l[0].limit, l[1].limit);
                rows.push(row(
                    label,
                    gap > 10.0 * LIMIT_TOLERANCE,
                    format!("{} → {:.9e}, {} → {:.9e}", l[0].label, l[0].limit, l[1].label, l[1].limit),
                ));
            }
            Err(e) => rows.push(err_row(label, e)),
        }
    }
    rows
}

// ---------------------------------------------------------------- 9

fn brackets() -> Vec<Row> {
    [(Preset::Uniform, 0.0), (Preset::Discrete, 1e-6)]
        .into_iter()
        .map(|(case, slack)| {
            let label = format!("{} n in F(2)..F(8)", case.name());
            match bounds_report(case) {
                Ok(b) => row(
                    label,
                    b.contained(slack),
                    format!(
                        "range {}..{}: values in [{:.6e}, {:.6e}] within [{:.6e}, {:.6e}]",
                        b.range.0, b.range.1, b.empirical_min, b.empirical_max, b.lower, b.upper
                    ),
                ),
                Err(e) => err_row(label, e),
            }
        })
        .collect()
}

// ---------------------------------------------------------------- 10

fn properties() -> Vec<Row> {
    vec![nesting_suite(), lloyd_monotonicity_suite(), dp_exhaustive_suite(), exclusion_suite(), splitting_suite()]
}

fn random_codebook(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let n = rng.gen_range(1..=6);
    let mut v: Vec<Rational> = Vec::new();
    while v.len() < n {
        let x = rat(rng.gen_range(0..=10_000), 10_000);
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v.sort();
    v
}

fn nesting_suite() -> Row {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for i in 0..50 {
        let case = if i % 2 == 0 { Preset::Discrete } else { Preset::Uniform };
        let s = sys(case);
        let cb = random_codebook(&mut rng);
        let mut prev: Option<Enclosure> = None;
        for depth in 4..=12 {
            match distortion_enclosure(&cb, &s, depth) {
                Ok(e) => {
                    if prev.as_ref().is_some_and(|p| !e.within(p)) {
                        bad += 1;
                    }
                    prev = Some(e);
                }
                Err(_) => bad += 1,
            }
        }
    }
    row("enclosure nesting, 50 codebooks, depths 4..12", bad == 0, format!("{bad} violations"))
}

fn lloyd_monotonicity_suite() -> Row {
    let mut bad = 0;
    let mut steps = 0;
    for seed in 0..100u64 {
        let case = if seed % 2 == 0 { Preset::Discrete } else { Preset::Uniform };
        let s = sys(case);
        let n = 1 + (seed as usize / 2) % 6;
        let Ok(starts) = lloyd_starts(n, &s, 2, seed) else {
            bad += 1;
            continue;
        };
        let depth = 10;
        let mut pts = starts[1].clone();
        let Ok(mut before) = Codebook::from_f64(&pts, &s, depth) else {
            bad += 1;
            continue;
        };
        for _ in 0..4 {
            let Ok(u) = lloyd_step_f64(&pts, &s, depth) else { break };
            let Ok(after) = Codebook::from_f64(&u.points, &s, depth) else { break };
            // Float centroids move the new bound by at most the enclosure width
            // plus the squared centroid uncertainty.
            let slack = to_f64(&after.distortion.width()) + (u.max_halfwidth + 1e-15).powi(2);
            if to_f64(&after.distortion.upper) > to_f64(&before.distortion.upper) + slack {
                bad += 1;
            }
            steps += 1;
            pts = u.points;
            before = after;
        }
    }
    row("Lloyd monotonicity, 100 runs", bad == 0 && steps > 0, format!("{steps} steps, {bad} increases"))
}

/// Exact cost of a contiguous partition given its cell starts.
fn partition_cost(meas: &DiscretizedMeasure, starts: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for (i, &a) in starts.iter().enumerate() {
        let b = starts.get(i + 1).copied().unwrap_or(meas.len());
        let cell = &meas.atoms[a..b];
        let mass: Rational = cell.iter().map(|(_, m)| m).sum();
        let first: Rational = cell.iter().map(|(x, m)| x * m).sum();
        let mean = &first / &mass;
        total += cell.iter().map(|(x, m)| m * (x - &mean) * (x - &mean)).sum::<Rational>();
    }
    total
}

/// Minimum over every contiguous partition into `n` cells.
fn exhaustive_min(meas: &DiscretizedMeasure, n: usize) -> Rational {
    fn rec(meas: &DiscretizedMeasure, n: usize, starts: &mut Vec<usize>, best: &mut Option<Rational>) {
        if starts.len() == n {
            let c = partition_cost(meas, starts);
            if best.as_ref().is_none_or(|b| c < *b) {
                *best = Some(c);
            }
            return;
        }
        let last = *starts.last().expect("starts begin at 0");
        let remaining = n - starts.len();
        for s in last + 1..=meas.len() - remaining {
            starts.push(s);
            rec(meas, n, starts, best);
            starts.pop();
        }
    }
    let mut best = None;
    rec(meas, n, &mut vec![0], &mut best);
    best.expect("at least one partition")
}

fn dp_exhaustive_suite() -> Row {
    let mut instances = 0;
    let mut bad = Vec::new();
    for case in [Preset::Discrete, Preset::Uniform] {
        let s = sys(case);
        for m in 1..=4 {
            for q in 1..=12 {
                let Ok(meas) = discretize(&s, m, q) else { continue };
                if meas.len() > 12 {
                    continue;
                }
                for n in 1..=4.min(meas.len()) {
                    instances += 1;
                    let ok = dp_optimal(&meas, n)
                        .is_ok_and(|dp| partition_cost(&meas, &dp.starts) == exhaustive_min(&meas, n));
                    if !ok {
                        bad.push(format!("{} m={m} q={q} n={n}", case.name()));
                    }
                }
            }
        }
    }
    row(
        "DP equals exhaustive search on all measures with at most 12 atoms, n <= 4",
        bad.is_empty() && instances > 0,
        format!("{instances} instances, mismatches {bad:?}"),
    )
}

fn exclusion_suite() -> Row {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (case, lo) in [(Preset::Discrete, 1), (Preset::Uniform, 0)] {
        let kit = Kit::new(case);
        for n in lo..=8 {
            if let Ok(f) = alpha_f_with(&kit, n) {
                checked += 1;
                if !f.avoids_gaps(&kit) {
                    bad.push(format!("{} alpha_F({n})", case.name()));
                }
            }
        }
        for n in 3..=150 {
            if let Ok((f, _)) = candidate_optimal_with(&kit, n) {
                checked += 1;
                if !f.avoids_gaps(&kit) {
                    bad.push(format!("{} candidate n={n}", case.name()));
                }
            }
        }
    }
    row(
        "no constructed point in (1/5,2/5) or (3/5,4/5)",
        bad.is_empty(),
        format!("{checked} codebooks, offenders {bad:?}"),
    )
}

fn splitting_suite() -> Row {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (case, lo) in [(Preset::Discrete, 1), (Preset::Uniform, 0)] {
        let kit = Kit::new(case);
        let mut families = Vec::new();
        for n in lo..=8 {
            if let Ok(f) = alpha_f_with(&kit, n) {
                families.push((format!("alpha_F({n})"), f));
            }
        }
        for n in 3..=150 {
            if let Ok((f, _)) = candidate_optimal_with(&kit, n) {
                families.push((format!("candidate n={n}"), f));
            }
        }
        for (name, f) in &families {
            if let Some(ok) = splitting_identity_holds(&kit, f) {
                checked += 1;
                let aligned = f.voronoi_aligned(&kit);
                if !ok || !aligned {
                    bad.push(format!("{} {name}", case.name()));
                }
            }
        }
        // The block sums used by the identity are the true distortions.
        for n in lo..=3 {
            if let Ok(f) = alpha_f_with(&kit, n) {
                let exact = exact_distortion(&f.points(&kit), &kit.sys, n + 3);
                if exact != Ok(Some(f.total_error.clone())) {
                    bad.push(format!("{} alpha_F({n}) distortion", case.name()));
                }
            }
        }
    }
    row(
        "splitting identity on constructed families",
        bad.is_empty() && checked > 0,
        format!("{checked} families, failures {bad:?}"),
    )
}
