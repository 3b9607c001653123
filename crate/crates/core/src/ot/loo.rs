//! Shared-projection fast path for leave-one-out sliced distances.
//!
//! The voting filters compare `SW_t` between pairs of leave-one-out views of
//! one dataset, over one shared [`DirectionSet`]. Per direction, the full
//! dataset is projected and sorted once. Removing the atom ranked `r` from a
//! sorted array shifts every later value down one slot, so two leave-one-out
//! arrays differ only on the index range between the two removal ranks and
//! the 1-D power cost reduces to a sum of consecutive-gap powers over that
//! range. With a prefix table over `gap^t`, each pair distance is O(L).

use rayon::prelude::*;

use super::{check_order, pow_t, root_t, DirectionSet};
use crate::error::{Error, Result};

/// Precomputed per-direction ranks and gap-power prefix sums for one dataset.
#[derive(Debug, Clone)]
pub struct LooProjections {
    n: usize,
    t: f64,
    /// rank[l * n + i] = position of atom i in direction l's sorted projection.
    rank: Vec<usize>,
    /// prefix[l * n + k] = sum of gap^t over the first k gaps of direction l.
    prefix: Vec<f64>,
    n_dirs: usize,
}

impl LooProjections {
    /// Projects the row-major `n x dim` buffer onto every direction.
    pub fn build(data: &[f64], dim: usize, dirs: &DirectionSet, t: f64) -> Result<Self> {
        check_order(t)?;
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid("flat buffer must hold n*dim coordinates"));
        }
        let n = data.len() / dim;
        if n < 2 {
            return Err(Error::invalid(
                "leave-one-out distances need at least two samples",
            ));
        }
        if dirs.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: dirs.dim(),
            });
        }

        let n_dirs = dirs.len();
        let per_dir: Vec<(Vec<usize>, Vec<f64>)> = (0..n_dirs)
            .into_par_iter()
            .map(|l| {
                let theta = dirs.direction(l);
                let mut proj = vec![0.0f64; n];
                for (i, row) in data.chunks_exact(dim).enumerate() {
                    proj[i] = row.iter().zip(theta).map(|(x, y)| x * y).sum();
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_unstable_by(|&a, &b| proj[a].total_cmp(&proj[b]).then(a.cmp(&b)));
                let mut rank = vec![0usize; n];
                for (k, &i) in order.iter().enumerate() {
                    rank[i] = k;
                }
                let mut prefix = vec![0.0f64; n];
                for k in 1..n {
                    let gap = proj[order[k]] - proj[order[k - 1]];
                    prefix[k] = prefix[k - 1] + pow_t(gap, t);
                }
                (rank, prefix)
            })
            .collect();

        let mut rank = Vec::with_capacity(n_dirs * n);
        let mut prefix = Vec::with_capacity(n_dirs * n);
        for (r, p) in per_dir {
            rank.extend_from_slice(&r);
            prefix.extend_from_slice(&p);
        }
        Ok(Self {
            n,
            t,
            rank,
            prefix,
            n_dirs,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `SW_t` between the leave-one-out views that drop atoms `i` and `j`.
    ///
    /// Matches `sliced_wasserstein(loo_i, loo_j, t, dirs)` up to summation
    /// order, and is deterministic on its own.
    pub fn sw_distance(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        if i == j {
            return 0.0;
        }
        let mut acc = 0.0;
        for l in 0..self.n_dirs {
            let base = l * self.n;
            let ri = self.rank[base + i];
            let rj = self.rank[base + j];
            let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
            acc += self.prefix[base + hi] - self.prefix[base + lo];
        }
        let denom = (self.n_dirs * (self.n - 1)) as f64;
        root_t(acc / denom, self.t)
    }
}
