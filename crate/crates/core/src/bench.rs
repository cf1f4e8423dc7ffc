//! Parameter sweeps over the GA and the LIFO comparison, written as CSV.
//!
//! Each suite is a fixed list of cases. An instance is generated once per case
//! from the master seed; repetition `r` runs the GA with seed `seed + r`. Rows
//! come out in case order, then repetition order, whatever order the parallel
//! runs finish in.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::{layout_fitness, FitnessMode};
use crate::ga::{self, GaConfig, GaError};
use crate::io::{comparison_yard, generate_instance, FormatError, GenSpec, DEFAULT_DATE_RANGE, TABLE_IV_COUNTS};
use crate::lifo::{lifo_allocate, LifoError};
use crate::yard::{Instance, YardConfig};

/// Type-mix rows `N_T = 2..=6`.
pub const TABLE_I_COUNTS: [[u32; 6]; 5] = [
    [10, 10, 0, 0, 0, 0],
    [10, 10, 8, 0, 0, 0],
    [10, 10, 8, 8, 0, 0],
    [10, 10, 8, 8, 15, 0],
    [10, 10, 8, 8, 15, 10],
];
pub const STALL_COUNTS: [u32; 6] = [10, 10, 8, 8, 0, 0];
pub const STALL_WINDOWS: [u32; 4] = [25, 50, 100, 150];
pub const POPSIZE_COUNTS: [u32; 6] = [20, 0, 0, 15, 10, 30];
pub const POP_SIZES: [usize; 5] = [20, 40, 50, 70, 100];
pub const COMPARISON_REPS: usize = 15;

fn yard(refrig: u32, reg: u32) -> YardConfig {
    YardConfig {
        n1: 3,
        n2: 3,
        n3: 3,
        n_stock_refrig: refrig,
        n_stock_reg: reg,
    }
}

/// Yard of the type-mix sweep: 4 powered and 4 regular 3×3×3 blocks.
pub fn type_influence_yard() -> YardConfig {
    yard(4, 4)
}

/// Yard of the stall-window and population sweeps: 3 + 3 blocks.
pub fn sweep_yard() -> YardConfig {
    yard(3, 3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    TypeInfluence,
    StallInfluence,
    PopsizeInfluence,
    LifoComparison,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::TypeInfluence,
        Suite::StallInfluence,
        Suite::PopsizeInfluence,
        Suite::LifoComparison,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TypeInfluence => "type-influence",
            Suite::StallInfluence => "stall-influence",
            Suite::PopsizeInfluence => "popsize-influence",
            Suite::LifoComparison => "lifo-comparison",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| BenchError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown suite `{0}` (expected type-influence, stall-influence, popsize-influence or lifo-comparison)")]
    UnknownSuite(String),
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Lifo(#[from] LifoError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("malformed bench CSV")]
    Csv(#[from] csv::Error),
}

/// One sweep point: an instance and the GA settings to run on it.
#[derive(Clone, Debug)]
pub struct BenchCase {
    pub label: String,
    pub instance: Instance,
    pub ga: GaConfig,
    pub baseline: bool,
}

fn counts_label(counts: &[u32; 6]) -> String {
    let parts: Vec<String> = counts.iter().map(u32::to_string).collect();
    let variety = counts.iter().filter(|&&n| n > 0).count();
    format!("nt={variety} counts={}", parts.join("/"))
}

fn instance(config: YardConfig, counts: [u32; 6], seed: u64) -> Result<Instance, BenchError> {
    Ok(generate_instance(&GenSpec {
        config,
        counts,
        date_range: DEFAULT_DATE_RANGE,
        seed,
    })?)
}

/// The cases of `suite`, with instances generated from `seed`. GA seeds are
/// left at zero; [`run_suite`] sets them per repetition.
pub fn suite_cases(suite: Suite, seed: u64) -> Result<Vec<BenchCase>, BenchError> {
    let ga = |pop_size: usize, stall: u32| GaConfig::default().with_pop_size(pop_size).with_stall_window(stall);
    let cases = match suite {
        Suite::TypeInfluence => TABLE_I_COUNTS
            .iter()
            .map(|counts| {
                Ok(BenchCase {
                    label: counts_label(counts),
                    instance: instance(type_influence_yard(), *counts, seed)?,
                    ga: ga(50, 20),
                    baseline: false,
                })
            })
            .collect::<Result<_, BenchError>>()?,
        Suite::StallInfluence => {
            let inst = instance(sweep_yard(), STALL_COUNTS, seed)?;
            STALL_WINDOWS
                .iter()
                .map(|&stall| BenchCase {
                    label: format!("{} stall={stall}", counts_label(&STALL_COUNTS)),
                    instance: inst.clone(),
                    ga: ga(30, stall),
                    baseline: false,
                })
                .collect()
        }
        Suite::PopsizeInfluence => {
            let inst = instance(sweep_yard(), POPSIZE_COUNTS, seed)?;
            POP_SIZES
                .iter()
                .map(|&pop| BenchCase {
                    label: format!("{} pop={pop}", counts_label(&POPSIZE_COUNTS)),
                    instance: inst.clone(),
                    ga: ga(pop, 50),
                    baseline: false,
                })
                .collect()
        }
        Suite::LifoComparison => TABLE_IV_COUNTS
            .iter()
            .enumerate()
            .map(|(i, counts)| {
                Ok(BenchCase {
                    label: format!("case={} {}", i + 1, counts_label(counts)),
                    instance: instance(comparison_yard(), *counts, seed)?,
                    ga: ga(30, 20),
                    baseline: true,
                })
            })
            .collect::<Result<_, BenchError>>()?,
    };
    Ok(cases)
}

/// Seed of repetition `rep` under master seed `seed`.
pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    seed.wrapping_add(rep as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub suite: String,
    pub instance: String,
    pub seed: u64,
    /// Repetition index, or `baseline` for the LIFO row of a case.
    pub rep: String,
    #[serde(rename = "F_i")]
    pub f_initial: Option<f64>,
    #[serde(rename = "F_f")]
    pub f_final: Option<f64>,
    pub generations: Option<u32>,
    pub elapsed_ms: f64,
    pub baseline_fitness: Option<f64>,
}

pub const CSV_HEADER: &str = "suite,instance,seed,rep,F_i,F_f,generations,elapsed_ms,baseline_fitness";

/// LIFO fitness and time in ms. The fitness is `None` when the baseline
/// finds no legal push for some container.
fn baseline_fitness(instance: &Instance, mode: FitnessMode) -> Result<(Option<f64>, f64), BenchError> {
    let start = Instant::now();
    let fitness = match lifo_allocate(instance) {
        Ok(layout) => Some(layout_fitness(&layout, instance, mode).map_err(GaError::from)?.value()),
        Err(LifoError::NoFeasiblePush(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok((fitness, start.elapsed().as_secs_f64() * 1e3))
}

pub fn run_suite(suite: Suite, reps: usize, seed: u64) -> Result<Vec<BenchRow>, BenchError> {
    if reps == 0 {
        return Ok(Vec::new());
    }
    let cases = suite_cases(suite, seed)?;
    let baselines: Vec<Option<(Option<f64>, f64)>> = cases
        .iter()
        .map(|c| c.baseline.then(|| baseline_fitness(&c.instance, c.ga.mode)).transpose())
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..cases.len()).flat_map(|c| (0..reps).map(move |r| (c, r))).collect();
    let mut runs: Vec<(usize, usize, BenchRow)> = jobs
        .into_par_iter()
        .map(|(c, r)| {
            let case = &cases[c];
            let config = GaConfig {
                seed: rep_seed(seed, r),
                ..case.ga.clone()
            };
            let result = ga::run(&case.instance, &config)?;
            Ok((
                c,
                r,
                BenchRow {
                    suite: suite.name().into(),
                    instance: case.label.clone(),
                    seed: config.seed,
                    rep: r.to_string(),
                    f_initial: Some(result.initial_fitness()),
                    f_final: Some(result.final_fitness()),
                    generations: Some(result.generations_run),
                    elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
                    baseline_fitness: baselines[c].and_then(|(f, _)| f),
                },
            ))
        })
        .collect::<Result<_, BenchError>>()?;
    runs.sort_by_key(|&(c, r, _)| (c, r));

    let mut rows = Vec::with_capacity(runs.len() + cases.len());
    let mut runs = runs.into_iter().peekable();
    for (c, case) in cases.iter().enumerate() {
        if let Some((fitness, ms)) = baselines[c] {
            rows.push(BenchRow {
                suite: suite.name().into(),
                instance: case.label.clone(),
                seed,
                rep: "baseline".into(),
                f_initial: None,
                f_final: None,
                generations: None,
                elapsed_ms: ms,
                baseline_fitness: fitness,
            });
        }
        while let Some((_, _, row)) = runs.next_if(|&(rc, _, _)| rc == c) {
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader.deserialize().collect::<Result<Vec<BenchRow>, _>>()?;
    Ok(rows)
}

/// Per-case aggregate of GA rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: String,
    pub instance: String,
    pub runs: usize,
    pub mean_f_i: f64,
    pub mean_f_f: f64,
    pub best_f_f: f64,
    pub mean_generations: f64,
    pub mean_elapsed_ms: f64,
    pub baseline_fitness: Option<f64>,
}

pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let key = (r.suite.as_str(), r.instance.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .filter_map(|(suite, label)| {
            let group: Vec<&BenchRow> = rows.iter().filter(|r| r.suite == suite && r.instance == label).collect();
            let baseline = group.iter().find_map(|r| r.baseline_fitness);
            let runs: Vec<&BenchRow> = group.into_iter().filter(|r| r.f_final.is_some()).collect();
            if runs.is_empty() {
                return None;
            }
            let n = runs.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
            Some(SummaryRow {
                suite: suite.into(),
                instance: label.into(),
                runs: runs.len(),
                mean_f_i: mean(&|r| r.f_initial.unwrap_or(0.0)),
                mean_f_f: mean(&|r| r.f_final.unwrap_or(0.0)),
                best_f_f: runs.iter().filter_map(|r| r.f_final).fold(f64::INFINITY, f64::min),
                mean_generations: mean(&|r| f64::from(r.generations.unwrap_or(0))),
                mean_elapsed_ms: mean(&|r| r.elapsed_ms),
                baseline_fitness: baseline,
            })
        })
        .collect()
}

pub fn write_summary<W: Write>(summary: &[SummaryRow], out: W) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in summary {
        writer.serialize(row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
