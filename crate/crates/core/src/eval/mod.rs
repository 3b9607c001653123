//! Classification metrics, the transport-bound verification harness, and
//! the epsilon regime sweep.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::filters::{swad_vote_distances, SwadParams};
use crate::ot::{
    exact_wasserstein, single_sample_bounds, EmpiricalDistribution, Norm, Sample, ASSIGNMENT_LIMIT,
};
use crate::rng::{self, STREAM_VERIFY};
use crate::tol;

/// Outliers are the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    /// `(T_p + T_n) / (T_p + F_p + T_n + F_n)`.
    pub fn accuracy(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::invalid("accuracy needs at least one sample"));
        }
        Ok((self.true_pos + self.true_neg) as f64 / total as f64)
    }

    /// `T_p / (T_p + F_p)`, or `None` when nothing was flagged: a sweep can
    /// then tell "nothing flagged" apart from "all flags wrong".
    pub fn precision(&self) -> Result<Option<f64>> {
        if self.total() == 0 {
            return Err(Error::invalid("precision needs at least one sample"));
        }
        let denom = self.true_pos + self.false_pos;
        if denom == 0 {
            return Ok(None);
        }
        Ok(Some(self.true_pos as f64 / denom as f64))
    }
}

/// Standard counts with "outlier" as the positive class.
pub fn confusion(predicted: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_pos += 1,
            (false, false) => c.true_neg += 1,
            (false, true) => c.false_neg += 1,
        }
    }
    Ok(c)
}

/// One checked leave-one-out pair: the closed-form bounds against the exact
/// assignment-solver distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheckRecord {
    pub k: usize,
    pub l: usize,
    pub t: f64,
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
    /// `lower <= exact <= upper` within relative 1e-9 (1e-12 floor).
    pub satisfied: bool,
}

/// Draws `n` standard-Gaussian samples in R^d, picks `n_pairs` distinct
/// unordered pairs (all of them if fewer exist), and checks the closed-form
/// sandwich against the exact oracle for every order in `t_values`.
///
/// Any unsatisfied record is a build-stopping bug, not noise.
pub fn verify_bounds(
    n: usize,
    d: usize,
    t_values: &[f64],
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<BoundCheckRecord>> {
    if n < 2 {
        return Err(Error::invalid(
            "bound verification needs at least two samples",
        ));
    }
    if n > ASSIGNMENT_LIMIT {
        return Err(Error::SizeLimit {
            size: n,
            limit: ASSIGNMENT_LIMIT,
        });
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if t_values.is_empty() {
        return Err(Error::invalid("need at least one order t"));
    }
    for &t in t_values {
        crate::ot::check_order(t)?;
    }
    if n_pairs == 0 {
        return Err(Error::invalid("need at least one pair"));
    }

    let mut rng = rng::substream(seed, STREAM_VERIFY);
    let data: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let full = EmpiricalDistribution::from_flat(data.clone(), d)?;

    let total_pairs = n * (n - 1) / 2;
    let mut pair_indices: Vec<usize> = if n_pairs >= total_pairs {
        (0..total_pairs).collect()
    } else {
        rand::seq::index::sample(&mut rng, total_pairs, n_pairs).into_vec()
    };
    pair_indices.sort_unstable();

    let records: Vec<Vec<BoundCheckRecord>> = pair_indices
        .into_par_iter()
        .map(|flat| -> Result<Vec<BoundCheckRecord>> {
            let (k, l) = unrank_pair(flat, n);
            let z_k = Sample::new(data[k * d..(k + 1) * d].to_vec())?;
            let z_l = Sample::new(data[l * d..(l + 1) * d].to_vec())?;
            let loo_k = full.leave_one_out(k)?;
            let loo_l = full.leave_one_out(l)?;
            t_values
                .iter()
                .map(|&t| {
                    let bounds = single_sample_bounds(&z_k, &z_l, n, t, Norm::L2)?;
                    let exact = exact_wasserstein(&loo_k, &loo_l, t, Norm::L2)?;
                    let satisfied =
                        tol::approx_le(bounds.lower, exact) && tol::approx_le(exact, bounds.upper);
                    Ok(BoundCheckRecord {
                        k,
                        l,
                        t,
                        lower: bounds.lower,
                        exact,
                        upper: bounds.upper,
                        satisfied,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(records.into_iter().flatten().collect())
}

/// Unranks a lexicographic unordered-pair index into (k, l) with k < l.
fn unrank_pair(mut flat: usize, n: usize) -> (usize, usize) {
    for k in 0..n - 1 {
        let row = n - 1 - k;
        if flat < row {
            return (k, k + 1 + flat);
        }
        flat -= row;
    }
    unreachable!("pair index out of range")
}

/// One sweep point: flag count and metrics at a given epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub n_flagged: usize,
    pub accuracy: f64,
    pub precision: Option<f64>,
}

/// Runs the sliced-distance vote once and re-thresholds it at every epsilon
/// in the grid (the vote distances do not depend on epsilon, so this equals
/// one filter run per grid point under the shared seed). Flagged sets are
/// nested along an ascending grid.
pub fn epsilon_sweep(
    data: &Dataset,
    truth: &[bool],
    epsilon_grid: &[f64],
    base: &SwadParams,
) -> Result<Vec<SweepPoint>> {
    if truth.len() != data.n_rows() {
        return Err(Error::invalid(format!(
            "{} truth labels for {} rows",
            truth.len(),
            data.n_rows()
        )));
    }
    for &e in epsilon_grid {
        if !e.is_finite() || e < 0.0 {
            return Err(Error::invalid(
                "epsilon grid values must be finite and nonnegative",
            ));
        }
    }
    let distances = swad_vote_distances(data, base)?;
    epsilon_grid
        .iter()
        .map(|&epsilon| {
            let flags: Vec<bool> = distances
                .iter()
                .map(|ds| {
                    let positive = ds.iter().filter(|&&d| d >= epsilon).count();
                    positive as f64 / ds.len() as f64 >= base.p_threshold
                })
                .collect();
            let counts = confusion(&flags, truth)?;
            Ok(SweepPoint {
                epsilon,
                n_flagged: flags.iter().filter(|&&f| f).count(),
                accuracy: counts.accuracy()?,
                precision: counts.precision()?,
            })
        })
        .collect()
}
