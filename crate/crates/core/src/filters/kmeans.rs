//! Seeded k-means with k-means++ initialization.

use rand::Rng;
use rayon::prelude::*;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, STREAM_KMEANS};

/// Lloyd iteration cap used when callers have no reason to pick one.
pub const KMEANS_DEFAULT_MAX_ITERS: usize = 100;

/// A complete clustering: one label per sample, K centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// Row-major K x d centroid matrix.
    pub centroids: Vec<f64>,
    pub n_clusters: usize,
    pub dim: usize,
    pub iterations_run: usize,
}

impl ClusterAssignment {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    /// Total within-cluster squared distance.
    pub fn inertia(&self, data: &Dataset) -> f64 {
        data.rows()
            .zip(&self.labels)
            .map(|(row, &c)| sq_dist(row, self.centroid(c)))
            .sum()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd iterations from k-means++ seeding, deterministic in `seed`.
///
/// Ties in nearest-centroid assignment break toward the lower centroid
/// index. A cluster emptied during iteration is re-seeded at the point
/// currently farthest from its assigned centroid.
pub fn kmeans(data: &Dataset, k: usize, seed: u64, max_iters: usize) -> Result<ClusterAssignment> {
    let n = data.n_rows();
    let d = data.n_cols();
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "K = {k} exceeds the number of samples {n}"
        )));
    }
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }

    let mut rng = rng::substream(seed, STREAM_KMEANS);
    let mut centroids = plus_plus_seeding(data, k, &mut rng);

    let mut labels = assign(data, &centroids, k, d);
    repair_empty_clusters(data, &mut labels, &mut centroids, k, d);
    update_centroids(data, &labels, &mut centroids, k, d);
    let mut iterations_run = 1;

    while iterations_run < max_iters {
        let new_labels = assign(data, &centroids, k, d);
        if new_labels == labels {
            break;
        }
        labels = new_labels;
        repair_empty_clusters(data, &mut labels, &mut centroids, k, d);
        update_centroids(data, &labels, &mut centroids, k, d);
        iterations_run += 1;
    }

    Ok(ClusterAssignment {
        labels,
        centroids,
        n_clusters: k,
        dim: d,
        iterations_run,
    })
}

fn plus_plus_seeding(data: &Dataset, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let n = data.n_rows();
    let d = data.n_cols();
    let mut centroids = Vec::with_capacity(k * d);
    let mut chosen = vec![false; n];

    let first = rng.random_range(0..n);
    chosen[first] = true;
    centroids.extend_from_slice(data.row(first));

    let mut best_d2 = vec![f64::INFINITY; n];
    while centroids.len() < k * d {
        let newest = &centroids[centroids.len() - d..];
        for (best, row) in best_d2.iter_mut().zip(data.rows()) {
            let d2 = sq_dist(row, newest);
            if d2 < *best {
                *best = d2;
            }
        }
        let total: f64 = best_d2.iter().sum();
        let idx = if total > 0.0 && total.is_finite() {
            // Weighted by squared distance to the nearest chosen centroid.
            let r = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = None;
            for (i, &w) in best_d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                cum += w;
                pick = Some(i);
                if cum >= r {
                    break;
                }
            }
            pick.expect("positive total weight implies a candidate")
        } else {
            // Every remaining point duplicates a centroid; any unchosen
            // point keeps the seeding well defined.
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[idx] = true;
        centroids.extend_from_slice(data.row(idx));
    }
    centroids
}

fn assign(data: &Dataset, centroids: &[f64], k: usize, d: usize) -> Vec<usize> {
    (0..data.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = data.row(i);
            let mut best = 0usize;
            let mut best_d2 = f64::INFINITY;
            for c in 0..k {
                let d2 = sq_dist(row, &centroids[c * d..(c + 1) * d]);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn repair_empty_clusters(
    data: &Dataset,
    labels: &mut [usize],
    centroids: &mut [f64],
    k: usize,
    d: usize,
) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        // Steal the point farthest from its assigned centroid, from a
        // cluster that can spare one.
        let mut far_i = None;
        let mut far_d2 = -1.0f64;
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] < 2 {
                continue;
            }
            let d2 = sq_dist(data.row(i), &centroids[l * d..(l + 1) * d]);
            if d2 > far_d2 {
                far_d2 = d2;
                far_i = Some(i);
            }
        }
        let i = far_i.expect("an empty cluster implies another holds two points");
        counts[labels[i]] -= 1;
        counts[c] += 1;
        labels[i] = c;
        centroids[c * d..(c + 1) * d].copy_from_slice(data.row(i));
    }
}

fn update_centroids(data: &Dataset, labels: &[usize], centroids: &mut [f64], k: usize, d: usize) {
    let mut counts = vec![0usize; k];
    centroids.fill(0.0);
    for (row, &l) in data.rows().zip(labels) {
        counts[l] += 1;
        for (acc, x) in centroids[l * d..(l + 1) * d].iter_mut().zip(row) {
            *acc += x;
        }
    }
    for c in 0..k {
        debug_assert!(counts[c] > 0, "clusters are repaired before updating");
        let inv = 1.0 / counts[c] as f64;
        for x in &mut centroids[c * d..(c + 1) * d] {
            *x *= inv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_single_cluster() {
        let d = Dataset::from_rows(&[[2.5, -1.0]], None).unwrap();
        let a = kmeans(&d, 1, 0, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(a.labels, vec![0]);
        assert_eq!(a.centroid(0), &[2.5, -1.0]);
    }

    #[test]
    fn separates_two_far_blobs() {
        use rand::Rng;
        let mut rng = crate::rng::substream(11, 21);
        let mut rows = Vec::new();
        for _ in 0..50 {
            rows.push(vec![rng.random::<f64>(), rng.random::<f64>()]);
        }
        for _ in 0..50 {
            rows.push(vec![
                100.0 + rng.random::<f64>(),
                100.0 + rng.random::<f64>(),
            ]);
        }
        let data = Dataset::from_rows(&rows, None).unwrap();
        let a = kmeans(&data, 2, 3, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        // All of the first blob shares one label, all of the second the other.
        let first = a.labels[0];
        assert!(a.labels[..50].iter().all(|&l| l == first));
        assert!(a.labels[50..].iter().all(|&l| l != first));
        // Within-blob spread is ~1.4 max; between-blob distance ~140.
        assert!(a.inertia(&data) < 100.0);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 3.0, -(i as f64)]).collect();
        let data = Dataset::from_rows(&rows, None).unwrap();
        let a = kmeans(&data, 8, 5, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        let mut seen = [false; 8];
        for &l in &a.labels {
            assert!(!seen[l], "cluster {l} holds two samples");
            seen[l] = true;
        }
        assert_eq!(a.inertia(&data), 0.0);
    }

    #[test]
    fn deterministic_in_seed() {
        use rand::Rng;
        let mut rng = crate::rng::substream(1, 2);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
            .collect();
        let data = Dataset::from_rows(&rows, None).unwrap();
        let a = kmeans(&data, 4, 42, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        let b = kmeans(&data, 4, 42, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_k_larger_than_n() {
        let d = Dataset::from_rows(&[[0.0], [1.0]], None).unwrap();
        assert!(kmeans(&d, 3, 0, KMEANS_DEFAULT_MAX_ITERS).is_err());
        assert!(kmeans(&d, 0, 0, KMEANS_DEFAULT_MAX_ITERS).is_err());
    }

    #[test]
    fn duplicate_points_do_not_break_seeding() {
        let rows = vec![vec![1.0, 1.0]; 6];
        let data = Dataset::from_rows(&rows, None).unwrap();
        let a = kmeans(&data, 3, 7, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(a.labels.len(), 6);
        assert_eq!(a.inertia(&data), 0.0);
    }
}
