use std::collections::VecDeque;

pub const NOISE: isize = -1;

/// Condensed pairwise Euclidean distances.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(super::kmeans::sq_dist(&points[i], &points[j]).sqrt());
            }
        }
        DistanceMatrix { n, upper }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // Row a starts after a rows of decreasing length.
        let start = a * (2 * self.n - a - 1) / 2;
        self.upper[start + (b - a - 1)]
    }

    pub fn max(&self) -> f64 {
        self.upper.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive distance, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.upper.iter().copied().filter(|&d| d > 0.0).min_by(f64::total_cmp)
    }

    fn neighbors(&self, i: usize, eps: f64) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(i, j) <= eps).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DbscanResult {
    /// Cluster id per point, [`NOISE`] for noise.
    pub labels: Vec<isize>,
    pub n_clusters: usize,
    pub core: Vec<bool>,
    /// Cluster id per point with noise moved to the cluster of the nearest
    /// core point. All zeros when no cluster formed.
    pub assigned: Vec<usize>,
}

impl DbscanResult {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

/// Density clustering. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`.
pub fn dbscan(dist: &DistanceMatrix, eps: f64, min_pts: usize) -> DbscanResult {
    let n = dist.len();
    let neighborhoods: Vec<Vec<usize>> = (0..n).map(|i| dist.neighbors(i, eps)).collect();
    let core: Vec<bool> = neighborhoods.iter().map(|nb| nb.len() >= min_pts.max(1)).collect();
    let mut labels = vec![NOISE; n];
    let mut n_clusters = 0;
    for start in 0..n {
        if labels[start] != NOISE || !core[start] {
            continue;
        }
        let id = n_clusters as isize;
        n_clusters += 1;
        labels[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            if !core[p] {
                continue;
            }
            for &q in &neighborhoods[p] {
                if labels[q] == NOISE {
                    labels[q] = id;
                    queue.push_back(q);
                }
            }
        }
    }

    let cores: Vec<usize> = (0..n).filter(|&i| core[i]).collect();
    let assigned = (0..n)
        .map(|i| {
            if labels[i] != NOISE {
                return labels[i] as usize;
            }
            cores
                .iter()
                .min_by(|&&a, &&b| dist.get(i, a).total_cmp(&dist.get(i, b)))
                .map_or(0, |&c| labels[c] as usize)
        })
        .collect();
    DbscanResult { labels, n_clusters, core, assigned }
}
