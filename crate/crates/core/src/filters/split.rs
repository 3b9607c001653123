//! Cluster-stratified splitting.
//!
//! Each cluster's members are shuffled under a per-cluster substream and
//! dealt round-robin into S parts; split s collects part s of every cluster.
//! The splits are disjoint and their union is the whole dataset, so every
//! split is a reduced-cardinality representative of it.

use rand::seq::SliceRandom;

use super::kmeans::ClusterAssignment;
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, STREAM_SPLIT};

/// Row positions per split. A cluster with fewer than S members contributes
/// to only some splits; for small datasets a split may come out empty.
pub fn smart_split_indices(
    assignment: &ClusterAssignment,
    s_splits: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if s_splits == 0 {
        return Err(Error::invalid("need at least one split"));
    }
    let mut splits = vec![Vec::new(); s_splits];
    for c in 0..assignment.n_clusters {
        let mut members: Vec<usize> = assignment
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c)
            .map(|(i, _)| i)
            .collect();
        let mut rng = rng::substream(rng::mix(seed, STREAM_SPLIT), c as u64);
        members.shuffle(&mut rng);
        for (m, &row) in members.iter().enumerate() {
            splits[m % s_splits].push(row);
        }
    }
    Ok(splits)
}

/// The S sub-datasets themselves. Errors if a split would be empty (only
/// possible when S exceeds the cluster sizes); use [`smart_split_indices`]
/// when degenerate splits are acceptable.
pub fn smart_split(
    data: &Dataset,
    assignment: &ClusterAssignment,
    s_splits: usize,
    seed: u64,
) -> Result<Vec<Dataset>> {
    if assignment.labels.len() != data.n_rows() {
        return Err(Error::invalid(format!(
            "assignment covers {} samples but the dataset has {} rows",
            assignment.labels.len(),
            data.n_rows()
        )));
    }
    let splits = smart_split_indices(assignment, s_splits, seed)?;
    splits
        .iter()
        .enumerate()
        .map(|(s, indices)| {
            if indices.is_empty() {
                return Err(Error::invalid(format!(
                    "split {s} is empty: S = {s_splits} exceeds the available cluster sizes"
                )));
            }
            data.subset(indices)
        })
        .collect()
}
