//! Self-contained experiment driver: simulate all four scenarios in both
//! modes with fixed seeds, run every detector at both window lengths, and
//! write per-run metrics CSVs plus a separation summary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::clustering::{DbscanParams, SilhouetteSpace};
use crate::error::Result;
use crate::pipeline::{self, MetricSeries, Method};
use crate::sim::{self, Scenario, ScenarioConfig, SimulationRun};
use crate::trajectory::{self, RunMeta};

pub const WINDOW_LENGTHS: [usize; 2] = [25, 50];
pub const DEFAULT_SMOOTH_SPAN: usize = 11;
pub const DEFAULT_TAU: f64 = 0.01;
pub const DEFAULT_BINS: usize = 32;

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub scenario: Scenario,
    pub method: Method,
    pub window_length: usize,
    pub organized_mean: Option<f64>,
    pub disorganized_mean: Option<f64>,
}

impl SummaryRow {
    /// Organized minus disorganized mean, when both are defined.
    pub fn separation(&self) -> Option<f64> {
        Some(self.organized_mean? - self.disorganized_mean?)
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceReport {
    pub rows: Vec<SummaryRow>,
    pub metrics_files: Vec<PathBuf>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9}")).unwrap_or_default()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("scenario,method,window_length,organized_mean,disorganized_mean,separation\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scenario,
            r.method,
            r.window_length,
            fmt_opt(r.organized_mean),
            fmt_opt(r.disorganized_mean),
            fmt_opt(r.separation()),
        ));
    }
    out
}

/// All detector series for one run at one window length, smoothed.
pub fn detect_all(run_trajectory: &crate::trajectory::TrajectoryTensor, window: usize) -> Result<Vec<MetricSeries>> {
    let mut series = pipeline::run_detectors(
        run_trajectory,
        window,
        &DbscanParams::default(),
        DEFAULT_TAU,
        SilhouetteSpace::Features,
    )?;
    let (bx, by) = pipeline::run_baseline_pipeline(run_trajectory, window, DEFAULT_BINS)?;
    series.push(bx);
    series.push(by);
    series
        .iter()
        .map(|s| pipeline::smooth(s, DEFAULT_SMOOTH_SPAN))
        .collect()
}

pub fn run_name(scenario: Scenario, organized: bool) -> String {
    format!(
        "{}_{}",
        scenario,
        if organized { "organized" } else { "disorganized" }
    )
}

/// Simulate and score the standard eight runs into `out_dir`.
pub fn reproduce(out_dir: &Path, base_seed: u64) -> Result<ReproduceReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| crate::Error::io(out_dir, e))?;

    let mut jobs = Vec::new();
    for scenario in Scenario::ALL {
        for organized in [true, false] {
            jobs.push(ScenarioConfig::new(scenario, organized, base_seed));
        }
    }

    let results: Vec<(ScenarioConfig, SimulationRun, Vec<MetricSeries>, PathBuf)> = jobs
        .into_par_iter()
        .map(|config| {
            let run = sim::run(&config)?;
            let mut all = Vec::new();
            for window in WINDOW_LENGTHS {
                all.extend(detect_all(&run.trajectory, window)?);
            }
            let name = run_name(config.scenario, config.organized);
            let traj_path = out_dir.join(format!("{name}.csv"));
            trajectory::save_trajectory_with_meta(
                &run.trajectory,
                &RunMeta {
                    scenario: config.scenario.to_string(),
                    organized: config.organized,
                    seed: config.seed,
                },
                &traj_path,
            )?;
            trajectory::write_atomic(
                &out_dir.join(format!("{name}_events.csv")),
                run.events_csv().as_bytes(),
            )?;
            let metrics_path = out_dir.join(format!("{name}_metrics.csv"));
            pipeline::write_metrics_csv(&metrics_path, &all)?;
            Ok((config, run, all, metrics_path))
        })
        .collect::<Result<_>>()?;

    let find = |scenario: Scenario, organized: bool, method: Method, window: usize| {
        results
            .iter()
            .find(|(c, _, _, _)| c.scenario == scenario && c.organized == organized)
            .and_then(|(_, _, series, _)| {
                series
                    .iter()
                    .find(|s| s.method == method && s.window_length == window)
            })
            .and_then(|s| s.mean())
    };

    let mut rows = Vec::new();
    for scenario in Scenario::ALL {
        for window in WINDOW_LENGTHS {
            for method in [
                Method::Silhouette,
                Method::GraphEntropy,
                Method::GraphEntropyLiteral,
                Method::BaselineX,
                Method::BaselineY,
            ] {
                rows.push(SummaryRow {
                    scenario,
                    method,
                    window_length: window,
                    organized_mean: find(scenario, true, method, window),
                    disorganized_mean: find(scenario, false, method, window),
                });
            }
        }
    }
    trajectory::write_atomic(&out_dir.join("summary.csv"), summary_csv(&rows).as_bytes())?;

    Ok(ReproduceReport {
        rows,
        metrics_files: results.into_iter().map(|(_, _, _, p)| p).collect(),
    })
}
