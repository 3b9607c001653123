//! The three anomaly-detection filters, built on one deterministic voting
//! engine.
//!
//! Each sample `z_i` polls `n` other samples drawn without replacement from
//! its own per-sample substream. A vote against `z_j` is positive when the
//! distance between the two leave-one-out views of the dataset reaches the
//! threshold: the sliced transport distance for [`swad_filter`], its
//! closed-form Euclidean stand-in `||z_i - z_j|| / (N-1)^(1/t)` for
//! [`fead_filter`]. A sample is flagged when at least fraction `p` of its
//! votes are positive; both comparisons are non-strict. [`sswad_filter`]
//! runs the same vote independently on cluster-stratified splits with
//! proportionally scaled `n` and `epsilon` and unions the per-split outlier
//! sets.
//!
//! Substreams key on stable row ids, so reports are independent of row
//! order, evaluation order, and thread count.

pub mod kmeans;
pub mod split;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::ot::loo::LooProjections;
use crate::ot::{check_order, root_t, sample_unit_directions, Norm};
use crate::rng::{self, STREAM_VOTES};

pub use kmeans::{kmeans, ClusterAssignment, KMEANS_DEFAULT_MAX_ITERS};
pub use split::{smart_split, smart_split_indices};

/// Which filter produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Swad,
    Sswad,
    Fead,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Swad => "swad",
            Method::Sswad => "sswad",
            Method::Fead => "fead",
        })
    }
}

/// Sliced-distance voting parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwadParams {
    /// Transport order t >= 1.
    pub t: f64,
    /// Distance threshold for a positive vote.
    pub epsilon: f64,
    /// Votes per sample (n), at most N-1 at run time.
    pub n_votes: usize,
    /// Fraction of positive votes that flags a sample (p in [0, 1]).
    pub p_threshold: f64,
    /// Projection directions shared by every distance in the run (L).
    pub n_projections: usize,
    pub seed: u64,
}

impl SwadParams {
    fn validate(&self, n_rows: usize) -> Result<()> {
        check_order(self.t)?;
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::invalid("epsilon must be finite and nonnegative"));
        }
        if self.n_projections == 0 {
            return Err(Error::invalid("need at least one projection"));
        }
        validate_voting(self.n_votes, self.p_threshold, n_rows)
    }
}

/// Euclidean-approximation voting parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeadParams {
    /// Transport order t >= 1, used in the (N-1)^(1/t) scale.
    pub t: f64,
    /// Scaled-Euclidean threshold for a positive vote.
    pub eta: f64,
    pub n_votes: usize,
    pub p_threshold: f64,
    pub seed: u64,
}

impl FeadParams {
    fn validate(&self, n_rows: usize) -> Result<()> {
        check_order(self.t)?;
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::invalid("eta must be finite and nonnegative"));
        }
        validate_voting(self.n_votes, self.p_threshold, n_rows)
    }
}

/// Smart-split parameters. `base` carries the whole-dataset epsilon and n;
/// each split of size m runs with `n_s = max(1, round(n * m / N))` (clamped
/// to m-1) and `epsilon_s = epsilon * m / N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SswadParams {
    pub base: SwadParams,
    /// Clusters formed before splitting (K).
    pub k_clusters: usize,
    /// Splits per cluster (S).
    pub s_splits: usize,
}

fn validate_voting(n_votes: usize, p_threshold: f64, n_rows: usize) -> Result<()> {
    if n_votes == 0 {
        return Err(Error::invalid("need at least one vote per sample"));
    }
    if n_rows < n_votes + 1 {
        return Err(Error::invalid(format!(
            "n_votes = {n_votes} needs at least {} samples, dataset has {n_rows}",
            n_votes + 1
        )));
    }
    if !(0.0..=1.0).contains(&p_threshold) {
        return Err(Error::invalid("p_threshold must lie in [0, 1]"));
    }
    Ok(())
}

/// Exact parameters echoed into a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodParams {
    Swad(SwadParams),
    Sswad(SswadParams),
    Fead(FeadParams),
}

/// Per-sample vote outcome. `vote_fraction` is the filter's confidence in
/// each label; `is_outlier[i]` is `vote_fraction[i] >= p` (for sswad, the
/// decision of the sample's own split).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    pub vote_fraction: Vec<f64>,
    pub is_outlier: Vec<bool>,
    /// Degenerate-split notes from sswad runs; empty otherwise.
    pub warnings: Vec<String>,
    pub params_echo: MethodParams,
    pub seed: u64,
    pub method: Method,
}

impl OutlierReport {
    pub fn len(&self) -> usize {
        self.vote_fraction.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vote_fraction.is_empty()
    }

    pub fn n_flagged(&self) -> usize {
        self.is_outlier.iter().filter(|&&o| o).count()
    }

    pub fn flagged_indices(&self) -> Vec<usize> {
        self.is_outlier
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(i, _)| i)
            .collect()
    }
}

/// The `n_votes` distinct indices `!= i` polled by sample `i` of `n`,
/// drawn uniformly without replacement from the substream keyed on `i`.
///
/// Results depend only on `(i, n, n_votes, seed)`, never on evaluation
/// order.
pub fn vote_indices(i: usize, n: usize, n_votes: usize, seed: u64) -> Result<Vec<usize>> {
    if i >= n {
        return Err(Error::invalid(format!(
            "sample index {i} out of range for {n} samples"
        )));
    }
    if n_votes == 0 {
        return Err(Error::invalid("need at least one vote per sample"));
    }
    if n_votes > n - 1 {
        return Err(Error::invalid(format!(
            "n_votes = {n_votes} exceeds the {} available voters",
            n - 1
        )));
    }
    Ok(vote_ranks_keyed(i as u64, i, n, n_votes, seed))
}

/// Draws `n_votes` distinct ranks from `[0, n) \ {exclude}` out of the
/// substream keyed on `key`. Preconditions are the caller's.
fn vote_ranks_keyed(key: u64, exclude: usize, n: usize, n_votes: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::substream(rng::mix(seed, STREAM_VOTES), key);
    rand::seq::index::sample(&mut rng, n - 1, n_votes)
        .into_iter()
        .map(|r| if r < exclude { r } else { r + 1 })
        .collect()
}

/// Position-space vote targets for every sample, keyed on stable row ids.
///
/// Ranks live in the canonical by-id ordering, so permuting dataset rows
/// permutes the votes identically.
fn build_vote_plan(row_ids: &[u64], n_votes: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = row_ids.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&p| row_ids[p]);
    let mut rank_of = vec![0usize; n];
    for (rank, &p) in order.iter().enumerate() {
        rank_of[p] = rank;
    }
    (0..n)
        .into_par_iter()
        .map(|p| {
            vote_ranks_keyed(row_ids[p], rank_of[p], n, n_votes, seed)
                .into_iter()
                .map(|r| order[r])
                .collect()
        })
        .collect()
}

/// Per-sample distances for each polled vote, in vote order: the sliced
/// transport distance between the two leave-one-out views, computed on one
/// shared direction set through the sorted-projection fast path.
pub(crate) fn swad_vote_distances(data: &Dataset, params: &SwadParams) -> Result<Vec<Vec<f64>>> {
    params.validate(data.n_rows())?;
    let dirs = sample_unit_directions(data.n_cols(), params.n_projections, params.seed)?;
    let table = LooProjections::build(data.data(), data.n_cols(), &dirs, params.t)?;
    let votes = build_vote_plan(data.row_ids(), params.n_votes, params.seed);
    Ok(votes
        .into_par_iter()
        .enumerate()
        .map(|(i, vs)| vs.iter().map(|&j| table.sw_distance(i, j)).collect())
        .collect())
}

/// Per-sample scaled Euclidean distances `||z_i - z_j||_2 / (N-1)^(1/t)`
/// for each polled vote.
pub(crate) fn fead_vote_distances(data: &Dataset, params: &FeadParams) -> Result<Vec<Vec<f64>>> {
    params.validate(data.n_rows())?;
    let denom = root_t((data.n_rows() - 1) as f64, params.t);
    let votes = build_vote_plan(data.row_ids(), params.n_votes, params.seed);
    Ok(votes
        .into_par_iter()
        .enumerate()
        .map(|(i, vs)| {
            let row_i = data.row(i);
            vs.iter()
                .map(|&j| Norm::L2.distance(row_i, data.row(j)) / denom)
                .collect()
        })
        .collect())
}

fn fractions_and_flags(
    distances: &[Vec<f64>],
    threshold: f64,
    p_threshold: f64,
) -> (Vec<f64>, Vec<bool>) {
    let vote_fraction: Vec<f64> = distances
        .iter()
        .map(|ds| ds.iter().filter(|&&d| d >= threshold).count() as f64 / ds.len() as f64)
        .collect();
    let is_outlier = vote_fraction.iter().map(|&f| f >= p_threshold).collect();
    (vote_fraction, is_outlier)
}

/// Sliced-distance voting filter over the whole dataset.
pub fn swad_filter(data: &Dataset, params: &SwadParams) -> Result<OutlierReport> {
    let distances = swad_vote_distances(data, params)?;
    let (vote_fraction, is_outlier) =
        fractions_and_flags(&distances, params.epsilon, params.p_threshold);
    Ok(OutlierReport {
        vote_fraction,
        is_outlier,
        warnings: Vec::new(),
        params_echo: MethodParams::Swad(params.clone()),
        seed: params.seed,
        method: Method::Swad,
    })
}

/// Fast Euclidean filter: the same voting structure with the closed-form
/// leave-one-out bound as the predicate (exact at t = 1).
pub fn fead_filter(data: &Dataset, params: &FeadParams) -> Result<OutlierReport> {
    let distances = fead_vote_distances(data, params)?;
    let (vote_fraction, is_outlier) =
        fractions_and_flags(&distances, params.eta, params.p_threshold);
    Ok(OutlierReport {
        vote_fraction,
        is_outlier,
        warnings: Vec::new(),
        params_echo: MethodParams::Fead(params.clone()),
        seed: params.seed,
        method: Method::Fead,
    })
}

/// Smart-split filter: cluster, deal each cluster round-robin into S splits,
/// run the sliced-distance vote independently per split with scaled
/// parameters, and union the outlier sets. Each sample's vote fraction is
/// the one from its own split. Splits of size <= 1 contribute no outliers
/// and leave a warning in the report.
pub fn sswad_filter(data: &Dataset, params: &SswadParams) -> Result<OutlierReport> {
    let n = data.n_rows();
    params.base.validate(n)?;
    if params.k_clusters == 0 || params.k_clusters > n {
        return Err(Error::invalid(format!(
            "k_clusters = {} must lie in [1, {n}]",
            params.k_clusters
        )));
    }
    if params.s_splits == 0 {
        return Err(Error::invalid("s_splits must be at least 1"));
    }

    let assignment = kmeans(
        data,
        params.k_clusters,
        params.base.seed,
        KMEANS_DEFAULT_MAX_ITERS,
    )?;
    let splits = smart_split_indices(&assignment, params.s_splits, params.base.seed)?;

    let mut vote_fraction = vec![0.0f64; n];
    let mut is_outlier = vec![false; n];
    let mut warnings = Vec::new();
    for (s, indices) in splits.iter().enumerate() {
        let size = indices.len();
        if size <= 1 {
            warnings.push(format!(
                "split {s} holds {size} sample(s) and contributes no outliers"
            ));
            continue;
        }
        let scaled_votes = (params.base.n_votes * size) as f64 / n as f64;
        let n_s = ((scaled_votes + 0.5).floor() as usize).max(1).min(size - 1);
        let epsilon_s = params.base.epsilon * size as f64 / n as f64;

        let sub = data.subset(indices)?;
        let sub_params = SwadParams {
            epsilon: epsilon_s,
            n_votes: n_s,
            ..params.base.clone()
        };
        let distances = swad_vote_distances(&sub, &sub_params)?;
        let (fractions, flags) =
            fractions_and_flags(&distances, epsilon_s, params.base.p_threshold);
        for (local, &orig) in indices.iter().enumerate() {
            vote_fraction[orig] = fractions[local];
            is_outlier[orig] = flags[local];
        }
    }

    Ok(OutlierReport {
        vote_fraction,
        is_outlier,
        warnings,
        params_echo: MethodParams::Sswad(params.clone()),
        seed: params.base.seed,
        method: Method::Sswad,
    })
}
