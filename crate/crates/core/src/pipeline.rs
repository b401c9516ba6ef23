//! End-to-end per-window orchestration: similarity, detector scores,
//! smoothing, and the metrics CSV format.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use crate::baseline;
use crate::clustering::{self, DbscanParams, SilhouetteSpace};
use crate::error::{Error, Result};
use crate::graph_entropy;
use crate::similarity;
use crate::trajectory::{extract_window, TrajectoryTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Silhouette,
    GraphEntropy,
    GraphEntropyLiteral,
    BaselineX,
    BaselineY,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Silhouette => "silhouette",
            Method::GraphEntropy => "graph_entropy",
            Method::GraphEntropyLiteral => "graph_entropy_literal",
            Method::BaselineX => "baseline_x",
            Method::BaselineY => "baseline_y",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "silhouette" => Some(Method::Silhouette),
            "graph_entropy" => Some(Method::GraphEntropy),
            "graph_entropy_literal" => Some(Method::GraphEntropyLiteral),
            "baseline_x" => Some(Method::BaselineX),
            "baseline_y" => Some(Method::BaselineY),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which network-entropy formula the entropy pipeline reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyVariant {
    /// Mean of per-node `ln(k)/ln(N-1)` over the thresholded graph.
    PerNode,
    /// Log of the raw dissimilarity sum, scaled by `N ln(N-1)`.
    Literal,
}

/// Per-window scalar detector output over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub method: Method,
    pub window_length: usize,
    pub values: Vec<Option<f64>>,
    pub smoothed: Vec<Option<f64>>,
}

impl MetricSeries {
    /// A raw series; `smoothed` starts out identical to `values`.
    pub fn new(method: Method, window_length: usize, values: Vec<Option<f64>>) -> Self {
        let smoothed = values.clone();
        MetricSeries {
            method,
            window_length,
            values,
            smoothed,
        }
    }

    /// Mean of the non-missing raw values.
    pub fn mean(&self) -> Option<f64> {
        let vals: Vec<f64> = self.values.iter().flatten().cloned().collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    pub fn num_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Number of window starts the pipelines produce for a run.
pub fn num_window_starts(num_steps: usize, window_length: usize) -> usize {
    num_steps.saturating_sub(window_length)
}

struct WindowScores {
    silhouette: Option<f64>,
    entropy: f64,
    entropy_literal: Option<f64>,
}

fn score_window(
    t: &TrajectoryTensor,
    start: usize,
    window: usize,
    db: &DbscanParams,
    tau: f64,
    space: SilhouetteSpace,
) -> Result<WindowScores> {
    let slice = extract_window(t, start, window)?;
    let pair = similarity::similarity_pair(&slice);
    let msim = similarity::combine(&pair)?;

    let labeling = clustering::dbscan(&msim, db);
    let silhouette = if labeling.num_clusters() < 2 {
        None
    } else {
        let dist = match space {
            SilhouetteSpace::Features => clustering::feature_distance_matrix(&slice),
            SilhouetteSpace::Msim => msim.matrix().clone(),
        };
        clustering::silhouette(&dist, &labeling).overall
    };

    let graph = graph_entropy::threshold_graph(&msim, tau)?;
    let entropy = graph_entropy::network_entropy(&graph)?.network;
    let entropy_literal = graph_entropy::literal_entropy(&msim)?;

    Ok(WindowScores {
        silhouette,
        entropy,
        entropy_literal,
    })
}

/// Run the windowed detectors once and return all three series
/// (silhouette, per-node entropy, literal entropy), sharing the
/// per-window similarity computation.
pub fn run_detectors(
    t: &TrajectoryTensor,
    window: usize,
    db: &DbscanParams,
    tau: f64,
    space: SilhouetteSpace,
) -> Result<Vec<MetricSeries>> {
    if window >= t.num_steps() {
        return Err(Error::WindowOutOfRange {
            start: 0,
            length: window,
            num_steps: t.num_steps(),
        });
    }
    if t.num_agents() < 3 {
        return Err(Error::TooFewNodes(t.num_agents()));
    }
    let starts = num_window_starts(t.num_steps(), window);
    let scores: Vec<WindowScores> = (0..starts)
        .into_par_iter()
        .map(|start| score_window(t, start, window, db, tau, space))
        .collect::<Result<_>>()?;

    Ok(vec![
        MetricSeries::new(
            Method::Silhouette,
            window,
            scores.iter().map(|s| s.silhouette).collect(),
        ),
        MetricSeries::new(
            Method::GraphEntropy,
            window,
            scores.iter().map(|s| Some(s.entropy)).collect(),
        ),
        MetricSeries::new(
            Method::GraphEntropyLiteral,
            window,
            scores.iter().map(|s| s.entropy_literal).collect(),
        ),
    ])
}

/// Silhouette quality index per window start.
pub fn run_silhouette_pipeline(
    t: &TrajectoryTensor,
    window: usize,
    db: &DbscanParams,
    space: SilhouetteSpace,
) -> Result<MetricSeries> {
    let series = run_detectors(t, window, db, 0.01, space)?;
    Ok(series.into_iter().find(|s| s.method == Method::Silhouette).unwrap())
}

/// Graph entropy per window start.
pub fn run_entropy_pipeline(
    t: &TrajectoryTensor,
    window: usize,
    tau: f64,
    variant: EntropyVariant,
) -> Result<MetricSeries> {
    let series = run_detectors(t, window, &DbscanParams::default(), tau, SilhouetteSpace::Features)?;
    let wanted = match variant {
        EntropyVariant::PerNode => Method::GraphEntropy,
        EntropyVariant::Literal => Method::GraphEntropyLiteral,
    };
    Ok(series.into_iter().find(|s| s.method == wanted).unwrap())
}

/// Baseline histogram-entropy series for both axes.
pub fn run_baseline_pipeline(
    t: &TrajectoryTensor,
    window: usize,
    num_bins: usize,
) -> Result<(MetricSeries, MetricSeries)> {
    baseline::baseline_series(t, window, num_bins)
}

/// Centered moving average skipping missing values. The window shrinks at
/// the series edges, and positions that are missing in the raw series stay
/// missing.
pub fn smooth(s: &MetricSeries, span: usize) -> Result<MetricSeries> {
    if span == 0 || span % 2 == 0 {
        return Err(Error::Config(format!(
            "smoothing span must be odd and >= 1, got {span}"
        )));
    }
    let half = span / 2;
    let n = s.values.len();
    let smoothed = (0..n)
        .map(|i| {
            s.values[i]?;
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n.saturating_sub(1));
            let vals: Vec<f64> = s.values[lo..=hi].iter().flatten().cloned().collect();
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    Ok(MetricSeries {
        method: s.method,
        window_length: s.window_length,
        values: s.values.clone(),
        smoothed,
    })
}

/// First difference of the smoothed series; index 0 is missing.
pub fn first_difference(s: &MetricSeries) -> MetricSeries {
    let n = s.smoothed.len();
    let values: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if i == 0 {
                None
            } else {
                Some(s.smoothed[i]? - s.smoothed[i - 1]?)
            }
        })
        .collect();
    MetricSeries::new(s.method, s.window_length, values)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.9}"),
        None => String::new(),
    }
}

/// Serialize series in the metrics CSV format:
/// `window_start,method,window_length,value,smoothed` with missing values
/// as empty fields.
pub fn metrics_csv(series: &[MetricSeries]) -> String {
    let mut out = String::from("window_start,method,window_length,value,smoothed\n");
    for s in series {
        for (start, (value, smoothed)) in s.values.iter().zip(&s.smoothed).enumerate() {
            out.push_str(&format!(
                "{start},{},{},{},{}\n",
                s.method,
                s.window_length,
                fmt_opt(*value),
                fmt_opt(*smoothed)
            ));
        }
    }
    out
}

pub fn write_metrics_csv(path: &Path, series: &[MetricSeries]) -> Result<()> {
    crate::trajectory::write_atomic(path, metrics_csv(series).as_bytes())
}

/// Parse a metrics CSV back into series (grouped by method and window
/// length, in file order).
pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricSeries>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "window_start,method,window_length,value,smoothed" => {}
        _ => return Err(Error::parse(path, 1, "bad metrics header")),
    }
    let mut order: Vec<(Method, usize)> = Vec::new();
    let mut acc: std::collections::HashMap<(Method, usize), (Vec<Option<f64>>, Vec<Option<f64>>)> =
        std::collections::HashMap::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno, "expected 5 fields"));
        }
        let method = Method::parse(fields[1])
            .ok_or_else(|| Error::parse(path, lineno, format!("unknown method: {}", fields[1])))?;
        let window: usize = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "invalid window_length"))?;
        let parse_opt = |f: &str| -> Result<Option<f64>> {
            if f.is_empty() {
                Ok(None)
            } else {
                f.parse()
                    .map(Some)
                    .map_err(|_| Error::parse(path, lineno, format!("invalid value: {f}")))
            }
        };
        let key = (method, window);
        if !acc.contains_key(&key) {
            order.push(key);
        }
        let entry = acc.entry(key).or_default();
        entry.0.push(parse_opt(fields[3])?);
        entry.1.push(parse_opt(fields[4])?);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let (values, smoothed) = acc.remove(&key).unwrap();
            MetricSeries {
                method: key.0,
                window_length: key.1,
                values,
                smoothed,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{Topology, TrajectoryTensor, WorldSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn tensor(num_agents: usize, steps: Vec<Vec<[f64; 2]>>, w: f64) -> TrajectoryTensor {
        let num_steps = steps.len();
        let world = WorldSpec::new(w, w, Topology::Bounded).unwrap();
        TrajectoryTensor::new(num_agents, num_steps, steps.into_iter().flatten().collect(), world)
            .unwrap()
    }

    fn series(values: Vec<Option<f64>>) -> MetricSeries {
        MetricSeries::new(Method::Silhouette, 4, values)
    }

    #[test]
    fn smooth_span_one_is_identity() {
        let s = series(vec![Some(1.0), None, Some(3.0), Some(4.0)]);
        let sm = smooth(&s, 1).unwrap();
        assert_eq!(sm.smoothed, s.values);
    }

    #[test]
    fn smooth_constant_unchanged() {
        let s = series(vec![Some(2.5); 10]);
        let sm = smooth(&s, 5).unwrap();
        assert!(sm.smoothed.iter().all(|v| (v.unwrap() - 2.5).abs() < 1e-12));
    }

    #[test]
    fn smooth_preserves_missing() {
        let s = series(vec![Some(1.0), None, Some(3.0)]);
        let sm = smooth(&s, 3).unwrap();
        assert_eq!(sm.smoothed[1], None);
        assert!(sm.smoothed[0].is_some() && sm.smoothed[2].is_some());
    }

    #[test]
    fn smooth_rejects_even_span() {
        assert!(smooth(&series(vec![Some(1.0)]), 2).is_err());
        assert!(smooth(&series(vec![Some(1.0)]), 0).is_err());
    }

    #[test]
    fn first_difference_drops_first() {
        let mut s = series(vec![Some(1.0), Some(3.0), Some(6.0)]);
        s.smoothed = s.values.clone();
        let d = first_difference(&s);
        assert_eq!(d.values, vec![None, Some(2.0), Some(3.0)]);
    }

    #[test]
    fn all_identical_agents_give_missing_silhouette_and_unit_entropy() {
        // every agent shares one rigid trajectory
        let steps: Vec<Vec<[f64; 2]>> = (0..12)
            .map(|s| vec![[1.0 + s as f64 * 0.1, 2.0]; 5])
            .collect();
        let t = tensor(5, steps, 10.0);
        let series = run_detectors(&t, 4, &DbscanParams::default(), 0.01, SilhouetteSpace::Features)
            .unwrap();
        let sil = &series[0];
        assert!(sil.values.iter().all(|v| v.is_none()));
        let ent = &series[1];
        assert!(ent.values.iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_rigid_far_groups_silhouette_near_one() {
        // two co-moving groups of 10 agents, far apart
        let steps: Vec<Vec<[f64; 2]>> = (0..20)
            .map(|s| {
                let mut row = Vec::new();
                for a in 0..10 {
                    row.push([80.0 + s as f64 * 0.2 + a as f64 * 0.01, 5.0 + a as f64 * 0.01]);
                }
                for a in 0..10 {
                    row.push([5.0 + s as f64 * 0.2 + a as f64 * 0.01, 80.0 + a as f64 * 0.01]);
                }
                row
            })
            .collect();
        let t = tensor(20, steps, 200.0);
        let s = run_silhouette_pipeline(&t, 10, &DbscanParams::default(), SilhouetteSpace::Features)
            .unwrap();
        for v in &s.values {
            let v = v.expect("two clusters expected");
            assert!(v > 0.9, "{v}");

            // cross-check one value against the direct formula oracle
        }
        // independent check on the first window: direct Eq-style silhouette
        let slice = extract_window(&t, 0, 10).unwrap();
        let msim = similarity::combine(&similarity::similarity_pair(&slice)).unwrap();
        let labeling = clustering::dbscan(&msim, &DbscanParams::default());
        assert_eq!(labeling.num_clusters(), 2);
        let dist = clustering::feature_distance_matrix(&slice);
        let mut total = 0.0;
        let mut count = 0;
        for i in 0..20 {
            let own: Vec<usize> = (0..20)
                .filter(|&j| labeling.labels[j] == labeling.labels[i] && j != i)
                .collect();
            let other: Vec<usize> = (0..20)
                .filter(|&j| labeling.labels[j] != labeling.labels[i] && labeling.labels[j] >= 0)
                .collect();
            if labeling.labels[i] < 0 {
                continue;
            }
            let a = own.iter().map(|&j| dist.get(i, j)).sum::<f64>() / own.len() as f64;
            let b = other.iter().map(|&j| dist.get(i, j)).sum::<f64>() / other.len() as f64;
            total += (b - a) / a.max(b);
            count += 1;
        }
        let oracle = total / count as f64;
        let got = s.values[0].unwrap();
        assert!((oracle - got).abs() < 1e-9, "oracle {oracle} vs {got}");
    }

    #[test]
    fn window_too_long_rejected() {
        let t = tensor(3, vec![vec![[1.0, 1.0]; 3]; 5], 10.0);
        assert!(run_detectors(&t, 5, &DbscanParams::default(), 0.01, SilhouetteSpace::Features)
            .is_err());
    }

    #[test]
    fn too_few_agents_rejected_for_entropy() {
        let t = tensor(2, vec![vec![[1.0, 1.0]; 2]; 10], 10.0);
        assert!(run_entropy_pipeline(&t, 4, 0.01, EntropyVariant::PerNode).is_err());
    }

    #[test]
    fn series_lengths_align_across_methods() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let steps: Vec<Vec<[f64; 2]>> = (0..30)
            .map(|_| (0..6).map(|_| [rng.gen_range(-25.0..25.0), rng.gen_range(-25.0..25.0)]).collect())
            .collect();
        let t = tensor(6, steps, 50.0);
        let detectors =
            run_detectors(&t, 10, &DbscanParams::default(), 0.01, SilhouetteSpace::Features)
                .unwrap();
        let (bx, by) = run_baseline_pipeline(&t, 10, 16).unwrap();
        let expected = num_window_starts(30, 10);
        for s in detectors.iter().chain([&bx, &by]) {
            assert_eq!(s.values.len(), expected);
        }

        // purity: rerun gives identical output
        let again =
            run_detectors(&t, 10, &DbscanParams::default(), 0.01, SilhouetteSpace::Features)
                .unwrap();
        assert_eq!(detectors, again);
    }

    #[test]
    fn metrics_csv_round_trip() {
        let a = series(vec![Some(0.5), None, Some(-0.25)]);
        let b = MetricSeries::new(Method::GraphEntropy, 4, vec![Some(1.0), Some(0.0), None]);
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("metrics.csv");
        write_metrics_csv(&path, &[a.clone(), b.clone()]).unwrap();
        let loaded = read_metrics_csv(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].method, Method::Silhouette);
        assert_eq!(loaded[0].values.len(), 3);
        assert_eq!(loaded[0].values[1], None);
        assert!((loaded[1].values[0].unwrap() - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn smooth_matches_windowed_mean_oracle(
            vals in proptest::collection::vec(proptest::option::weighted(0.8, -5.0f64..5.0), 1..40),
            half in 0usize..4,
        ) {
            let span = 2 * half + 1;
            let s = series(vals.clone());
            let sm = smooth(&s, span).unwrap();
            for i in 0..vals.len() {
                match vals[i] {
                    None => prop_assert_eq!(sm.smoothed[i], None),
                    Some(_) => {
                        let lo = i.saturating_sub(half);
                        let hi = (i + half).min(vals.len() - 1);
                        let window: Vec<f64> = vals[lo..=hi].iter().flatten().cloned().collect();
                        let expected = window.iter().sum::<f64>() / window.len() as f64;
                        prop_assert!((sm.smoothed[i].unwrap() - expected).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
