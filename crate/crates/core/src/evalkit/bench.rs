use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{median, rank_all, run_d2h, RankedPool};
use crate::baselines::{flash_run, nga_run, FlashConfig, NgaConfig};
use crate::engine::{run_isneak, AutoOracle, RunResult, SearchConfig};
use crate::error::{contract, Error, Result};
use crate::preprocess::EncodedPool;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Isneak,
    Flash,
    Nga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Isneak, Algorithm::Flash, Algorithm::Nga];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Isneak => "isneak",
            Algorithm::Flash => "flash",
            Algorithm::Nga => "nga",
        }
    }

    /// One run with a fresh automatic oracle seeded like the run.
    pub fn run(self, pool: &Arc<EncodedPool>, seed: u64) -> Result<RunResult> {
        match self {
            Algorithm::Isneak => {
                let mut oracle = AutoOracle::new(pool, seed);
                run_isneak(pool.clone(), &mut oracle, SearchConfig::seeded(seed))
            }
            Algorithm::Flash => flash_run(pool, FlashConfig::seeded(seed)),
            Algorithm::Nga => nga_run(pool.pool(), NgaConfig::seeded(seed)),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "isneak" => Ok(Algorithm::Isneak),
            "flash" => Ok(Algorithm::Flash),
            "nga" => Ok(Algorithm::Nga),
            other => Err(contract(format!("unknown algorithm `{other}` (expected isneak, flash or nga)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchModel {
    pub name: String,
    pub pool: Arc<EncodedPool>,
}

/// One run of the benchmark; `error` is set (and the metrics are NaN) for
/// failed runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub model: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub d2h: f64,
    pub interactions: usize,
    pub median_s: f64,
    pub valid_fraction: f64,
    pub y_evals: usize,
    pub ms: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub model: String,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failed: usize,
    pub median_d2h: f64,
    pub median_i: f64,
    pub median_s: f64,
    pub median_valid_fraction: f64,
    pub median_y_evals: f64,
    pub median_ms: f64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Completed runs, parallel to `rows` (`None` where the run failed).
    pub runs: Vec<Option<RunResult>>,
}

impl BenchReport {
    pub const HEADER: [&'static str; 9] =
        ["model", "algorithm", "seed", "d2h", "I", "median_S", "valid_fraction", "y_evals", "ms"];

    /// Report CSV. With `timing` off the `ms` column is left empty so that
    /// identical seeds give identical bytes.
    pub fn to_csv(&self, timing: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::HEADER)?;
        for r in &self.rows {
            let num = |x: f64| if r.error.is_some() { String::new() } else { format!("{x}") };
            w.write_record([
                r.model.clone(),
                r.algorithm.to_string(),
                r.seed.to_string(),
                num(r.d2h),
                if r.error.is_some() { String::new() } else { r.interactions.to_string() },
                num(r.median_s),
                num(r.valid_fraction),
                if r.error.is_some() { String::new() } else { r.y_evals.to_string() },
                if timing { num(r.ms) } else { String::new() },
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }

    /// Medians per (model, algorithm) over completed runs, in first-seen
    /// order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, Algorithm)> = Vec::new();
        for r in &self.rows {
            let k = (r.model.clone(), r.algorithm);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(model, algorithm)| {
                let group: Vec<&BenchRow> =
                    self.rows.iter().filter(|r| r.model == model && r.algorithm == algorithm).collect();
                let ok: Vec<&BenchRow> = group.iter().copied().filter(|r| r.error.is_none()).collect();
                let med = |f: fn(&BenchRow) -> f64| {
                    median(&ok.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap_or(f64::NAN)
                };
                SummaryRow {
                    runs: ok.len(),
                    failed: group.len() - ok.len(),
                    median_d2h: med(|r| r.d2h),
                    median_i: med(|r| r.interactions as f64),
                    median_s: med(|r| r.median_s),
                    median_valid_fraction: med(|r| r.valid_fraction),
                    median_y_evals: med(|r| r.y_evals as f64),
                    median_ms: med(|r| r.ms),
                    model,
                    algorithm,
                }
            })
            .collect()
    }
}

fn row_for(model: &BenchModel, ranked: &RankedPool, algorithm: Algorithm, seed: u64) -> (BenchRow, Option<RunResult>) {
    let outcome = algorithm
        .run(&model.pool, seed)
        .and_then(|run| Ok((run_d2h(&run, model.pool.pool(), ranked)?, run)));
    match outcome {
        Ok((d2h, run)) => {
            let run = run.with_model(&model.name);
            let row = BenchRow {
                model: model.name.clone(),
                algorithm,
                seed,
                d2h,
                interactions: run.log.questions,
                median_s: run.log.median_size(),
                valid_fraction: run.valid_fraction,
                y_evals: run.log.y_evaluations,
                ms: run.wall_ms.unwrap_or(0.0),
                error: None,
            };
            (row, Some(run))
        }
        Err(e) => (
            BenchRow {
                model: model.name.clone(),
                algorithm,
                seed,
                d2h: f64::NAN,
                interactions: 0,
                median_s: f64::NAN,
                valid_fraction: f64::NAN,
                y_evals: 0,
                ms: f64::NAN,
                error: Some(e.to_string()),
            },
            None,
        ),
    }
}

/// Runs every (model, algorithm, seed) combination for seeds
/// `seed0..seed0 + repeats`, in parallel. Rows come back in
/// model, algorithm, seed order; failed runs become error rows.
pub fn bench(models: &[BenchModel], algorithms: &[Algorithm], repeats: usize, seed0: u64) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(contract("repeats must be positive"));
    }
    let ranked: Vec<RankedPool> = models
        .par_iter()
        .map(|m| rank_all(m.pool.pool()))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Algorithm, u64)> = (0..models.len())
        .flat_map(|m| {
            algorithms
                .iter()
                .flat_map(move |&a| (0..repeats as u64).map(move |k| (m, a, seed0 + k)))
        })
        .collect();
    let (rows, runs) = jobs
        .par_iter()
        .map(|&(m, a, seed)| row_for(&models[m], &ranked[m], a, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .unzip();
    Ok(BenchReport { rows, runs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: usize,
    pub median_i: f64,
    pub interactions: Vec<usize>,
}

/// Median interaction count per question-size cap.
pub fn sweep_s(pool: &Arc<EncodedPool>, s_values: &[usize], repeats: usize, seed0: u64) -> Result<Vec<SweepRow>> {
    let attrs = pool.num_attributes();
    if let Some(&bad) = s_values.iter().find(|&&s| s == 0 || s > attrs) {
        return Err(contract(format!("question size {bad} outside [1, {attrs}]")));
    }
    s_values
        .iter()
        .map(|&s| {
            let interactions = (0..repeats as u64)
                .into_par_iter()
                .map(|k| {
                    let seed = seed0 + k;
                    let mut oracle = AutoOracle::new(pool, seed);
                    let config = SearchConfig {
                        seed,
                        question_cap: s,
                    };
                    run_isneak(pool.clone(), &mut oracle, config).map(|r| r.log.questions)
                })
                .collect::<Result<Vec<_>>>()?;
            let v: Vec<f64> = interactions.iter().map(|&i| i as f64).collect();
            Ok(SweepRow {
                s,
                median_i: median(&v).unwrap_or(0.0),
                interactions,
            })
        })
        .collect()
}
