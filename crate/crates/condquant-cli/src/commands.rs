//! Subcommand implementations. Each returns the JSON text to print.

use crate::output::{
    write_csv, Envelope, FloatIntervalJson, FloatJson, IntervalJson, RationalJson, SeriesCsvRow, CSV_DIGITS,
};
use condquant::asymptotics::{
    closed_form_series, coeff_table, dim_table, dimension_bounds, intermediate_series, preset_kappa,
    subsequence_limits, ErrorSeries, LIMIT_TOLERANCE,
};
use condquant::constructions::{candidate_optimal_with, Kit};
use condquant::integrals::{distortion_enclosure, DEFAULT_DEPTH};
use condquant::rational::to_sci;
use condquant::solver::{best_run, discretize, dp_optimal, lloyd_runs, DPResult};
use condquant::verify::{dp_settings, run_criterion, suite_passes, CriterionReport, VerifyOptions, CRITERIA};
use condquant::{CondensationSystem, Error, Preset};
use serde::Serialize;
use std::path::Path;

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
pub enum CommandError {
    /// Bad input: exit code 2.
    Usage(String),
    /// Computation or I/O failure: exit code 1.
    Failed(String),
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::DomainTooSmall { .. }
            | Error::CountUnreachable { .. }
            | Error::EmptyCodebook
            | Error::TooManyCells { .. } => CommandError::Usage(e.to_string()),
            _ => CommandError::Failed(e.to_string()),
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, CommandError>;

fn csv_out<T: Serialize>(path: Option<&Path>, rows: &[T]) -> CmdResult<()> {
    if let Some(p) = path {
        write_csv(p, rows).map_err(|e| CommandError::Failed(format!("writing {}: {e}", p.display())))?;
    }
    Ok(())
}

// ------------------------------------------------------------------ moments

#[derive(Serialize)]
struct MomentsResults {
    mean_p: RationalJson,
    variance_p: RationalJson,
    mean_nu: RationalJson,
    variance_nu: RationalJson,
}

pub fn moments(case: Preset) -> CmdResult<String> {
    let sys = CondensationSystem::preset(case);
    let results = MomentsResults {
        mean_p: RationalJson::new(&sys.moments().mean),
        variance_p: RationalJson::new(&sys.moments().variance),
        mean_nu: RationalJson::new(&sys.nu_moments().mean),
        variance_nu: RationalJson::new(&sys.nu_moments().variance),
    };
    Ok(Envelope::new("moments", case.name(), serde_json::json!({}), results, None).to_json())
}

// ---------------------------------------------------------------- construct

#[derive(Serialize)]
struct BlockJson {
    word: String,
    payload: String,
    count: u64,
    error: RationalJson,
}

#[derive(Serialize)]
struct ConstructResults {
    count: u64,
    points: Vec<RationalJson>,
    error: RationalJson,
    optimality: &'static str,
    blocks: Vec<BlockJson>,
}

#[derive(Serialize)]
struct PointCsvRow {
    index: usize,
    num: String,
    den: String,
    approx: f64,
}

pub fn construct(case: Preset, n: u64, csv: Option<&Path>) -> CmdResult<String> {
    let kit = Kit::new(case);
    let (family, tag) = candidate_optimal_with(&kit, n)?;
    let points = family.points(&kit);
    let rows: Vec<PointCsvRow> = points
        .iter()
        .enumerate()
        .map(|(i, p)| PointCsvRow {
            index: i + 1,
            num: p.numer().to_string(),
            den: p.denom().to_string(),
            approx: condquant::rational::to_f64(p),
        })
        .collect();
    csv_out(csv, &rows)?;
    let results = ConstructResults {
        count: family.total_count,
        points: points.iter().map(RationalJson::new).collect(),
        error: RationalJson::new(&family.total_error),
        optimality: tag.tag(),
        blocks: family
            .blocks
            .iter()
            .map(|b| BlockJson {
                word: b.word.to_string(),
                payload: b.payload.to_string(),
                count: b.count,
                error: RationalJson::new(&b.total_error),
            })
            .collect(),
    };
    Ok(Envelope::new("construct", case.name(), serde_json::json!({ "n": n }), results, None).to_json())
}

// -------------------------------------------------------------------- solve

#[derive(Serialize)]
struct SolveParams {
    n: usize,
    restarts: usize,
    depth: u32,
    resolution: u32,
    region_depth: u32,
}

#[derive(Serialize)]
struct LloydJson {
    points: Vec<FloatJson>,
    distortion: IntervalJson,
    runs: usize,
    converged: bool,
    iterations: usize,
}

#[derive(Serialize)]
struct DpJson {
    points: Vec<RationalJson>,
    discretized_cost: FloatJson,
    enclosure: FloatIntervalJson,
    codebook_distortion: IntervalJson,
    tie: bool,
    atoms: usize,
}

#[derive(Serialize)]
struct SolveResults {
    lloyd: LloydJson,
    dp: DpJson,
    /// Lloyd's distortion interval meets the DP enclosure of `V_n`.
    agreement: bool,
}

pub fn solve(case: Preset, n: usize, restarts: usize, depth: u32, seed: u64) -> CmdResult<String> {
    let sys = CondensationSystem::preset(case);
    let runs = lloyd_runs(n, &sys, restarts, DEFAULT_DEPTH, seed)?;
    let best = best_run(&runs).ok_or_else(|| CommandError::Failed("every Lloyd restart hit an empty cell".into()))?;
    let (_, q) = dp_settings(case);
    let meas = discretize(&sys, depth, q)?;
    let dp: DPResult = dp_optimal(&meas, n)?;
    let dp_dist = distortion_enclosure(&dp.codebook, &sys, DEFAULT_DEPTH)?;
    let lo = condquant::rational::to_f64(&best.codebook.distortion.lower);
    let hi = condquant::rational::to_f64(&best.codebook.distortion.upper);
    let agreement = lo <= dp.enclosure.upper && hi >= dp.enclosure.lower;
    let results = SolveResults {
        lloyd: LloydJson {
            points: best.codebook.points_f64().into_iter().map(FloatJson::new).collect(),
            distortion: IntervalJson {
                lower: RationalJson::new(&best.codebook.distortion.lower),
                upper: RationalJson::new(&best.codebook.distortion.upper),
            },
            runs: runs.len(),
            converged: best.converged,
            iterations: best.iterations,
        },
        dp: DpJson {
            points: dp.codebook.iter().map(RationalJson::new).collect(),
            discretized_cost: FloatJson::new(dp.cost),
            enclosure: FloatIntervalJson {
                lower: FloatJson::new(dp.enclosure.lower),
                upper: FloatJson::new(dp.enclosure.upper),
            },
            codebook_distortion: IntervalJson {
                lower: RationalJson::new(&dp_dist.lower),
                upper: RationalJson::new(&dp_dist.upper),
            },
            tie: dp.tie,
            atoms: meas.len(),
        },
        agreement,
    };
    let params = SolveParams { n, restarts, depth, resolution: q, region_depth: DEFAULT_DEPTH };
    Ok(Envelope::new("solve", case.name(), params, results, Some(seed)).to_json())
}

// ---------------------------------------------------------------- dimension

fn first_level(case: Preset) -> u32 {
    match case {
        Preset::Discrete => 1,
        Preset::Uniform => 0,
    }
}

/// Exponent `D` of the coefficient `n^{2/D} V_n`.
fn coefficient_exponent(case: Preset) -> f64 {
    match case {
        Preset::Discrete => preset_kappa(),
        Preset::Uniform => 1.0,
    }
}

fn series_for(case: Preset, max_level: u32) -> CmdResult<ErrorSeries> {
    if max_level < 1 {
        return Err(CommandError::Usage("empty table: --max-level must be at least 1".into()));
    }
    Ok(closed_form_series(case, first_level(case)..=max_level)?)
}

fn plot_rows(series: &ErrorSeries, case: Preset) -> CmdResult<Vec<SeriesCsvRow>> {
    let dims = dim_table(series);
    let coeffs = coeff_table(series, coefficient_exponent(case))?;
    Ok(series
        .points()
        .iter()
        .zip(dims.rows.iter().zip(&coeffs))
        .map(|(p, (d, c))| SeriesCsvRow { n: p.n.to_string(), v_n: to_sci(&p.v, CSV_DIGITS), d_n: d.d, coeff: c.value })
        .collect())
}

#[derive(Serialize)]
struct DimRowJson {
    level: String,
    n: String,
    error: RationalJson,
    d_n: FloatJson,
}

#[derive(Serialize)]
struct DimensionResults {
    rows: Vec<DimRowJson>,
    extrapolated: Option<FloatJson>,
    /// `max{κ, D(ν)}`, the dimension the estimates approach.
    target: FloatJson,
}

pub fn dimension(case: Preset, max_level: u32, csv: Option<&Path>) -> CmdResult<String> {
    let series = series_for(case, max_level)?;
    csv_out(csv, &plot_rows(&series, case)?)?;
    let t = dim_table(&series);
    let rows = series
        .points()
        .iter()
        .zip(&t.rows)
        .map(|(p, r)| DimRowJson {
            level: p.label.clone(),
            n: p.n.to_string(),
            error: RationalJson::new(&p.v),
            d_n: FloatJson::new(r.d),
        })
        .collect();
    let results = DimensionResults {
        rows,
        extrapolated: t.extrapolated.map(FloatJson::new),
        target: FloatJson::new(dimension_bounds(&CondensationSystem::preset(case), 2.0)?.upper),
    };
    Ok(Envelope::new("dimension", case.name(), serde_json::json!({ "max_level": max_level }), results, None).to_json())
}

// ------------------------------------------------------------- coefficients

#[derive(Serialize)]
struct CoeffRowJson {
    level: String,
    n: String,
    coefficient: FloatJson,
    exact: Option<RationalJson>,
}

#[derive(Serialize)]
struct LimitJson {
    subsequence: &'static str,
    limit: FloatJson,
    exact: Option<RationalJson>,
}

#[derive(Serialize)]
struct CoefficientResults {
    exponent: FloatJson,
    f_subsequence: Vec<CoeffRowJson>,
    intermediate: Vec<CoeffRowJson>,
    limits: Vec<LimitJson>,
    coefficient_nonexistent: bool,
}

fn coeff_rows(series: &ErrorSeries, d: f64) -> CmdResult<Vec<CoeffRowJson>> {
    Ok(coeff_table(series, d)?
        .into_iter()
        .map(|r| CoeffRowJson {
            level: r.label,
            n: r.n.to_string(),
            coefficient: FloatJson::new(r.value),
            exact: r.exact.as_ref().map(RationalJson::new),
        })
        .collect())
}

pub fn coefficients(case: Preset, max_level: u32, csv: Option<&Path>) -> CmdResult<String> {
    let series = series_for(case, max_level)?;
    csv_out(csv, &plot_rows(&series, case)?)?;
    let d = coefficient_exponent(case);
    // Intermediate counts are published from level 1 (uniform) and level 40 (discrete) on.
    let start = match case {
        Preset::Uniform => 1,
        Preset::Discrete => 40,
    };
    let intermediate =
        if max_level >= start { coeff_rows(&intermediate_series(case, start..=max_level)?, d)? } else { Vec::new() };
    let limits = subsequence_limits(case, preset_kappa())?;
    let gap = (limits[0].limit - limits[1].limit).abs() / limits[0].limit.abs();
    let results = CoefficientResults {
        exponent: FloatJson::new(d),
        f_subsequence: coeff_rows(&series, d)?,
        intermediate,
        limits: limits
            .iter()
            .map(|l| LimitJson {
                subsequence: l.label,
                limit: FloatJson::new(l.limit),
                exact: l.exact.as_ref().map(RationalJson::new),
            })
            .collect(),
        coefficient_nonexistent: gap > 10.0 * LIMIT_TOLERANCE,
    };
    Ok(Envelope::new("coefficients", case.name(), serde_json::json!({ "max_level": max_level }), results, None)
        .to_json())
}

// ------------------------------------------------------------------- verify

/// Runs the selected criteria, prints the table and reports overall success.
pub fn verify(only: &[u8], opts: &VerifyOptions) -> CmdResult<(String, bool)> {
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    let mut reports: Vec<CriterionReport> = Vec::new();
    for id in ids {
        let r = run_criterion(id, opts).ok_or_else(|| CommandError::Usage(format!("no criterion {id}")))?;
        reports.push(r);
    }
    let mut out = String::new();
    for r in &reports {
        out.push_str(&format!("{:>2}  {:<32} {}\n", r.id, r.name, r.status()));
        for row in &r.rows {
            out.push_str(&format!("      {:<8} {:<48} {}\n", row.status.to_string(), row.label, row.detail));
        }
    }
    let ok = suite_passes(&reports);
    out.push_str(if ok { "verify: ok\n" } else { "verify: FAILED\n" });
    Ok((out, ok))
}
