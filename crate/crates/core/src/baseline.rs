//! Comparison baseline: per-coordinate histogram Shannon entropy over
//! sliding windows, pooled across agents.

use crate::error::{Error, Result};
use crate::pipeline::{Method, MetricSeries};
use crate::trajectory::{TrajectoryTensor, WorldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub num_bins: usize,
    pub min: f64,
    pub max: f64,
}

impl HistogramSpec {
    pub fn new(num_bins: usize, min: f64, max: f64) -> Result<Self> {
        if num_bins < 2 {
            return Err(Error::Config(format!(
                "histogram needs at least 2 bins, got {num_bins}"
            )));
        }
        if !(max > min) {
            return Err(Error::Config(format!(
                "histogram range must satisfy max > min, got [{min}, {max}]"
            )));
        }
        Ok(HistogramSpec { num_bins, min, max })
    }

    /// Span the world extent along one axis.
    pub fn for_world(world: &WorldSpec, axis: Axis, num_bins: usize) -> Result<Self> {
        let (min, max) = match axis {
            Axis::X => (world.x_min(), world.x_max()),
            Axis::Y => (world.y_min(), world.y_max()),
        };
        HistogramSpec::new(num_bins, min, max)
    }

    fn bin(&self, v: f64) -> usize {
        let t = (v - self.min) / (self.max - self.min);
        ((t * self.num_bins as f64) as usize).min(self.num_bins - 1)
    }
}

/// Shannon entropy (nats) of the binned window sample, unnormalized.
pub fn coordinate_entropy_raw(
    t: &TrajectoryTensor,
    start: usize,
    length: usize,
    axis: Axis,
    spec: &HistogramSpec,
) -> Result<f64> {
    if length == 0 || start + length > t.num_steps() {
        return Err(Error::WindowOutOfRange {
            start,
            length,
            num_steps: t.num_steps(),
        });
    }
    let mut counts = vec![0usize; spec.num_bins];
    for step in start..start + length {
        for agent in 0..t.num_agents() {
            let p = t.position(step, agent);
            let v = match axis {
                Axis::X => p[0],
                Axis::Y => p[1],
            };
            counts[spec.bin(v)] += 1;
        }
    }
    let total = (length * t.num_agents()) as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    Ok(h)
}

/// Normalized to `[0, 1]` by `ln(num_bins)`.
pub fn coordinate_entropy(
    t: &TrajectoryTensor,
    start: usize,
    length: usize,
    axis: Axis,
    spec: &HistogramSpec,
) -> Result<f64> {
    Ok(coordinate_entropy_raw(t, start, length, axis, spec)? / (spec.num_bins as f64).ln())
}

/// One entropy value per window start, per axis, aligned with the other
/// detectors' window indexing.
pub fn baseline_series(
    t: &TrajectoryTensor,
    length: usize,
    num_bins: usize,
) -> Result<(MetricSeries, MetricSeries)> {
    if length >= t.num_steps() {
        return Err(Error::WindowOutOfRange {
            start: 0,
            length,
            num_steps: t.num_steps(),
        });
    }
    let spec_x = HistogramSpec::for_world(t.world(), Axis::X, num_bins)?;
    let spec_y = HistogramSpec::for_world(t.world(), Axis::Y, num_bins)?;
    let starts = t.num_steps() - length;
    let mut xs = Vec::with_capacity(starts);
    let mut ys = Vec::with_capacity(starts);
    for start in 0..starts {
        xs.push(Some(coordinate_entropy(t, start, length, Axis::X, &spec_x)?));
        ys.push(Some(coordinate_entropy(t, start, length, Axis::Y, &spec_y)?));
    }
    Ok((
        MetricSeries::new(Method::BaselineX, length, xs),
        MetricSeries::new(Method::BaselineY, length, ys),
    ))
}
