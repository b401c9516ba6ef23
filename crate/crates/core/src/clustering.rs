//! DBSCAN over a precomputed dissimilarity matrix and Silhouette
//! Coefficient scoring of the resulting labeling.

use crate::error::{Error, Result};
use crate::similarity::{DissimilarityMatrix, SquareMatrix};
use crate::trajectory::WindowSlice;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        if min_pts == 0 {
            return Err(Error::Config("min_pts must be at least 1".into()));
        }
        Ok(DbscanParams { eps, min_pts })
    }
}

impl Default for DbscanParams {
    fn default() -> Self {
        DbscanParams {
            eps: 0.01,
            min_pts: 5,
        }
    }
}

pub const NOISE: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRole {
    Core,
    Border,
    Noise,
}

impl PointRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointRole::Core => "core",
            PointRole::Border => "border",
            PointRole::Noise => "noise",
        }
    }
}

/// Per-agent cluster assignment. `labels[i]` is `NOISE` (-1) or a cluster
/// id, contiguous from 0 in first-discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabeling {
    pub labels: Vec<i32>,
    pub point_roles: Vec<PointRole>,
}

impl ClusterLabeling {
    pub fn num_clusters(&self) -> usize {
        self.labels.iter().map(|&l| l + 1).max().unwrap_or(0).max(0) as usize
    }
}

/// Density clustering with the eps-neighborhood counted inclusive of the
/// point itself. Border points reachable from several clusters join the
/// first cluster to claim them during the ascending-index scan.
pub fn dbscan(d: &DissimilarityMatrix, p: &DbscanParams) -> ClusterLabeling {
    let n = d.n();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| d.get(i, j) <= p.eps).collect())
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|ns| ns.len() >= p.min_pts).collect();

    let mut labels = vec![NOISE; n];
    let mut cluster_id = 0i32;
    for start in 0..n {
        if !core[start] || labels[start] != NOISE {
            continue;
        }
        labels[start] = cluster_id;
        let mut queue = vec![start];
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            for &nb in &neighbors[q] {
                if labels[nb] != NOISE {
                    continue;
                }
                labels[nb] = cluster_id;
                if core[nb] {
                    queue.push(nb);
                }
            }
        }
        cluster_id += 1;
    }

    let point_roles = (0..n)
        .map(|i| {
            if core[i] {
                PointRole::Core
            } else if labels[i] != NOISE {
                PointRole::Border
            } else {
                PointRole::Noise
            }
        })
        .collect();
    ClusterLabeling {
        labels,
        point_roles,
    }
}

/// Overall score plus per-agent scores; noise agents carry `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteResult {
    pub overall: Option<f64>,
    pub per_point: Vec<Option<f64>>,
}

/// Which pairwise distances feed the silhouette.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SilhouetteSpace {
    /// Euclidean distance over the per-agent window feature vectors.
    Features,
    /// The same precomputed dissimilarity the clustering used.
    Msim,
}

impl SilhouetteSpace {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "features" => Some(SilhouetteSpace::Features),
            "msim" => Some(SilhouetteSpace::Msim),
            _ => None,
        }
    }
}

/// Euclidean distance matrix over window feature vectors.
pub fn feature_distance_matrix(w: &WindowSlice) -> SquareMatrix {
    let n = w.num_agents();
    SquareMatrix::from_fn(n, |i, j| {
        w.feature(i)
            .iter()
            .zip(w.feature(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

/// Silhouette over an arbitrary distance matrix.
///
/// Noise points are excluded throughout; singleton clusters score 0 per
/// point; the overall score is missing when fewer than two clusters exist.
pub fn silhouette(dist: &SquareMatrix, labeling: &ClusterLabeling) -> SilhouetteResult {
    let n = dist.n();
    debug_assert_eq!(labeling.labels.len(), n);
    let k = labeling.num_clusters();
    if k < 2 {
        return SilhouetteResult {
            overall: None,
            per_point: vec![None; n],
        };
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labeling.labels.iter().enumerate() {
        if l != NOISE {
            members[l as usize].push(i);
        }
    }

    let mut per_point = vec![None; n];
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, &l) in labeling.labels.iter().enumerate() {
        if l == NOISE {
            continue;
        }
        let own = l as usize;
        let s = if members[own].len() == 1 {
            0.0
        } else {
            let a = members[own]
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| dist.get(i, j))
                .sum::<f64>()
                / (members[own].len() - 1) as f64;
            let b = members
                .iter()
                .enumerate()
                .filter(|(c, m)| *c != own && !m.is_empty())
                .map(|(_, m)| m.iter().map(|&j| dist.get(i, j)).sum::<f64>() / m.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        };
        per_point[i] = Some(s);
        sum += s;
        count += 1;
    }

    SilhouetteResult {
        overall: Some(sum / count as f64),
        per_point,
    }
}
