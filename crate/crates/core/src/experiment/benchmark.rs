use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::ForwardOperator;
use crate::resolution::{cutoff_frequency, separability, ResolutionReport, SeparabilityVerdict};
use crate::signal::{add_noise, fmt17, NoiseModel};
use crate::solvers::{dr_reconstruct, tsvd_reconstruct};

use super::config::ExperimentConfig;
use super::forward::{noise_reference, noise_seed};
use super::phantom::{generate_phantom, PhantomSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrVerdict {
    pub iterations: usize,
    pub resolved: bool,
    pub valley_ratio: Option<f64>,
    pub resolve_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub separation_factor: f64,
    pub separation_s: f64,
    pub separation_m: f64,
    /// Spacing of the two grid points the sources were snapped to.
    pub realized_separation_s: f64,
    pub tsvd_resolved: bool,
    pub tsvd_valley_ratio: Option<f64>,
    pub tsvd_resolve_rate: f64,
    pub dr: Vec<DrVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub smallest_resolved_s: Option<f64>,
    pub smallest_resolved_m: Option<f64>,
}

/// Two-source resolution benchmark at one distance. `resolved` flags refer to
/// the seeded realization; `resolve_rate` counts all `repeats` realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub r: f64,
    pub snr: f64,
    pub seed: u64,
    pub repeats: usize,
    pub f_cut: f64,
    pub delta_limit_s: f64,
    pub delta_limit_m: f64,
    pub rows: Vec<BenchmarkRow>,
    pub summary: Vec<MethodSummary>,
}

impl BenchmarkResult {
    pub fn smallest_resolved(&self, method: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.method == method)
            .and_then(|s| s.smallest_resolved_s)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "separation_factor,separation_s,separation_m,realized_separation_s,\
             tsvd_resolved,tsvd_valley_ratio,tsvd_resolve_rate",
        );
        if let Some(row) = self.rows.first() {
            for d in &row.dr {
                let k = d.iterations;
                out.push_str(&format!(",dr{k}_resolved,dr{k}_valley_ratio,dr{k}_resolve_rate"));
            }
        }
        out.push('\n');
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}",
                fmt17(row.separation_factor),
                fmt17(row.separation_s),
                fmt17(row.separation_m),
                fmt17(row.realized_separation_s),
                row.tsvd_resolved,
                opt(row.tsvd_valley_ratio),
                fmt17(row.tsvd_resolve_rate)
            ));
            for d in &row.dr {
                out.push_str(&format!(",{},{},{}", d.resolved, opt(d.valley_ratio), fmt17(d.resolve_rate)));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        fs::write(&csv, self.to_csv_string()).map_err(|e| Error::io(&csv, e))?;
        fs::write(&json, self.to_json_string()? + "\n").map_err(|e| Error::io(&json, e))?;
        Ok((csv, json))
    }
}

/// Configured separation factors times the linear limit at the largest `r`, in s.
pub fn benchmark_separations(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let report = cutoff_frequency(&cfg.law, cfg.largest_r(), cfg.snr)?;
    Ok(cfg
        .benchmark
        .separation_factors
        .iter()
        .map(|f| f * report.delta_time)
        .collect())
}

/// Headline benchmark at the largest distance, one noise realization.
pub fn run_benchmark(cfg: &ExperimentConfig, separations: &[f64]) -> Result<BenchmarkResult> {
    let k = (0..cfg.r_list.len())
        .max_by(|&a, &b| cfg.r_list[a].total_cmp(&cfg.r_list[b]))
        .ok_or_else(|| Error::Config("r_list is empty".into()))?;
    run_benchmark_at(cfg, k, separations, 1)
}

struct Cell {
    tsvd: SeparabilityVerdict,
    dr: Vec<SeparabilityVerdict>,
    realized: f64,
}

/// Benchmark at `cfg.r_list[r_index]` over `repeats` noise realizations.
/// Cells run in parallel; assembly order is fixed, so output is deterministic.
pub fn run_benchmark_at(
    cfg: &ExperimentConfig,
    r_index: usize,
    separations: &[f64],
    repeats: usize,
) -> Result<BenchmarkResult> {
    let r = *cfg
        .r_list
        .get(r_index)
        .ok_or_else(|| Error::InvalidInput(format!("no distance with index {r_index}")))?;
    if separations.len() < 3 {
        return Err(Error::InvalidInput("benchmark needs at least 3 separations".into()));
    }
    if separations.iter().any(|s| !(*s > 0.0)) || separations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("separations must be positive and strictly increasing".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidInput("repeats must be >= 1".into()));
    }
    let report = cutoff_frequency(&cfg.law, r, cfg.snr)?;
    let op = cfg.operator(r)?;

    let jobs: Vec<(usize, usize)> = (0..separations.len())
        .flat_map(|i| (0..repeats).map(move |rep| (i, rep)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, rep)| run_cell(cfg, &op, r_index, separations[i], rep))
        .collect::<Result<Vec<_>>>()?;

    let rate = |hits: usize| hits as f64 / repeats as f64;
    let rows: Vec<BenchmarkRow> = separations
        .iter()
        .enumerate()
        .map(|(i, &sep)| {
            let group = &cells[i * repeats..(i + 1) * repeats];
            let first = &group[0];
            let dr = cfg
                .dr
                .iterations
                .iter()
                .enumerate()
                .map(|(j, &iterations)| DrVerdict {
                    iterations,
                    resolved: first.dr[j].resolved,
                    valley_ratio: first.dr[j].valley_ratio,
                    resolve_rate: rate(group.iter().filter(|c| c.dr[j].resolved).count()),
                })
                .collect();
            BenchmarkRow {
                separation_factor: sep / report.delta_time,
                separation_s: sep,
                separation_m: sep * report.c_at_cut,
                realized_separation_s: first.realized,
                tsvd_resolved: first.tsvd.resolved,
                tsvd_valley_ratio: first.tsvd.valley_ratio,
                tsvd_resolve_rate: rate(group.iter().filter(|c| c.tsvd.resolved).count()),
                dr,
            }
        })
        .collect();

    let summary = summarize(cfg, &rows, &report);
    Ok(BenchmarkResult {
        r,
        snr: cfg.snr,
        seed: cfg.seed,
        repeats,
        f_cut: report.f_cut,
        delta_limit_s: report.delta_time,
        delta_limit_m: report.delta_space,
        rows,
        summary,
    })
}

fn run_cell(cfg: &ExperimentConfig, op: &ForwardOperator, r_index: usize, sep: f64, rep: usize) -> Result<Cell> {
    let center = cfg.benchmark_center();
    let phantom = generate_phantom(&PhantomSpec::pair(center - 0.5 * sep, center + 0.5 * sep, 1.0), cfg.grid)?;
    let idx: Vec<usize> = (0..phantom.len()).filter(|&i| phantom.samples()[i] > 0.0).collect();
    let realized = (idx[1] - idx[0]) as f64 * cfg.grid.dt;

    let noise = NoiseModel::new(cfg.snr, noise_seed(cfg.seed, r_index, rep))?;
    let p = add_noise(&op.apply(&phantom)?, &noise, noise_reference(&phantom))?;
    let criteria = cfg.benchmark.criteria;

    let tsvd = tsvd_reconstruct(op, &p, &cfg.tsvd_config()?)?;
    let tsvd = separability(&tsvd.reconstruction, criteria)?;
    let dr = cfg
        .dr
        .iterations
        .iter()
        .map(|&it| {
            let out = dr_reconstruct(op, &p, &cfg.dr_config(op, &p, it)?)?;
            separability(&out.reconstruction, criteria)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Cell { tsvd, dr, realized })
}

fn summarize(cfg: &ExperimentConfig, rows: &[BenchmarkRow], report: &ResolutionReport) -> Vec<MethodSummary> {
    let smallest = |pick: &dyn Fn(&BenchmarkRow) -> bool| -> MethodSummary {
        let s = rows.iter().find(|r| pick(r)).map(|r| r.separation_s);
        MethodSummary {
            method: String::new(),
            smallest_resolved_s: s,
            smallest_resolved_m: s.map(|s| s * report.c_at_cut),
        }
    };
    let mut out = vec![MethodSummary {
        method: "tsvd".into(),
        ..smallest(&|r| r.tsvd_resolved)
    }];
    for (j, it) in cfg.dr.iterations.iter().enumerate() {
        out.push(MethodSummary {
            method: format!("dr{it}"),
            ..smallest(&|r| r.dr[j].resolved)
        });
    }
    out
}

/// Resolution ordering across methods: `None` (never resolved) ranks last.
pub fn resolution_rank(s: Option<f64>) -> f64 {
    s.unwrap_or(f64::INFINITY)
}
