//! Optimal-transport distances between equal-cardinality empirical
//! distributions.
//!
//! The sliced distance is the workhorse: project both point sets onto shared
//! random directions, solve each 1-D problem by sorting, and average the
//! t-th powers. [`exact_wasserstein`] is the desk-scale oracle behind the
//! property and bound checks: exhaustive permutation search for up to
//! [`BRUTE_FORCE_LIMIT`] atoms, a Hungarian assignment solve up to
//! [`ASSIGNMENT_LIMIT`]. [`single_sample_bounds`] gives the closed-form
//! sandwich for leave-one-out pairs that the fast Euclidean filter builds on.

mod assignment;
pub mod loo;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{self, STREAM_DIRECTIONS};

/// Atom budget for the exhaustive permutation route of [`exact_wasserstein`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Atom budget for the assignment-solver route of [`exact_wasserstein`].
pub const ASSIGNMENT_LIMIT: usize = 512;

/// Ground norms for the exact oracle. Sliced distances always project with
/// the Euclidean inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    /// Distance between two points of the same dimension.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Norm::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// |x|^t with exact short-circuits for the common orders, so that every code
/// path computing t-th powers agrees bit-for-bit.
#[inline]
pub(crate) fn pow_t(x: f64, t: f64) -> f64 {
    let a = x.abs();
    if t == 1.0 {
        a
    } else if t == 2.0 {
        a * a
    } else {
        a.powf(t)
    }
}

/// x^(1/t) for x >= 0.
#[inline]
pub(crate) fn root_t(x: f64, t: f64) -> f64 {
    if t == 1.0 {
        x
    } else if t == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / t)
    }
}

pub(crate) fn check_order(t: f64) -> Result<()> {
    if !t.is_finite() || t < 1.0 {
        return Err(Error::invalid(format!(
            "order t must be a finite real >= 1, got {t}"
        )));
    }
    Ok(())
}

/// One point of the feature space, with all coordinates finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    coords: Vec<f64>,
}

impl Sample {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("a sample needs at least one coordinate"));
        }
        if let Some(col) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: 0, col });
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A uniform-weight point cloud; weights are implicitly 1/len and never
/// stored. `source_indices` remembers where each atom came from in the
/// originating dataset, so leave-one-out views stay traceable.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    data: Vec<f64>,
    dim: usize,
    source_indices: Vec<usize>,
}

impl EmpiricalDistribution {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("an empirical distribution needs atoms"));
        }
        let dim = rows[0].as_ref().len();
        if dim == 0 {
            return Err(Error::invalid("atoms need at least one coordinate"));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            if let Some(col) = r.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
            data.extend_from_slice(r);
        }
        let source_indices = (0..rows.len()).collect();
        Ok(Self {
            data,
            dim,
            source_indices,
        })
    }

    /// Builds from a row-major buffer of `data.len() / dim` atoms.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid("flat buffer must hold n*dim coordinates"));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let source_indices = (0..data.len() / dim).collect();
        Ok(Self {
            data,
            dim,
            source_indices,
        })
    }

    pub fn len(&self) -> usize {
        self.source_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one atom by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// The same distribution with atom `i` removed.
    pub fn leave_one_out(&self, i: usize) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::invalid(
                "cannot remove an atom from a single-atom distribution",
            ));
        }
        if i >= self.len() {
            return Err(Error::invalid(format!(
                "atom index {i} out of range for {} atoms",
                self.len()
            )));
        }
        let mut data = Vec::with_capacity((self.len() - 1) * self.dim);
        data.extend_from_slice(&self.data[..i * self.dim]);
        data.extend_from_slice(&self.data[(i + 1) * self.dim..]);
        let mut source_indices = self.source_indices.clone();
        source_indices.remove(i);
        Ok(Self {
            data,
            dim: self.dim,
            source_indices,
        })
    }
}

/// Shared projection directions on the unit sphere.
///
/// Regenerating from the same `(seed, d, len)` reproduces the set
/// bit-for-bit, which is what makes every sliced distance in a run
/// comparable and every run repeatable.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    data: Vec<f64>,
    dim: usize,
    seed: u64,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // at least one direction by construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn direction(&self, l: usize) -> &[f64] {
        &self.data[l * self.dim..(l + 1) * self.dim]
    }

    pub fn directions(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Draws `l` directions uniformly on the unit sphere in R^d: standard-normal
/// coordinates, normalized. Deterministic in `seed`; the astronomically rare
/// zero-norm draw is rejected and redrawn.
pub fn sample_unit_directions(d: usize, l: usize, seed: u64) -> Result<DirectionSet> {
    if d == 0 {
        return Err(Error::invalid("direction dimension must be at least 1"));
    }
    if l == 0 {
        return Err(Error::invalid("need at least one direction"));
    }
    let mut rng = rng::substream(seed, STREAM_DIRECTIONS);
    let mut data = Vec::with_capacity(l * d);
    for _ in 0..l {
        loop {
            let start = data.len();
            for _ in 0..d {
                data.push(rng.sample::<f64, _>(StandardNormal));
            }
            let norm = data[start..].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm.is_finite() && norm > 0.0 {
                for x in &mut data[start..] {
                    *x /= norm;
                }
                break;
            }
            data.truncate(start);
        }
    }
    Ok(DirectionSet { data, dim: d, seed })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projects every atom onto `direction` and returns the scalars in ascending
/// order.
pub fn project(dist: &EmpiricalDistribution, direction: &[f64]) -> Result<Vec<f64>> {
    if direction.len() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: dist.dim(),
            got: direction.len(),
        });
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "direction must be a unit vector, norm is {norm}"
        )));
    }
    Ok(project_unchecked(dist, direction))
}

fn project_unchecked(dist: &EmpiricalDistribution, direction: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = dist.atoms().map(|a| dot(a, direction)).collect();
    out.sort_unstable_by(f64::total_cmp);
    out
}

/// Exact order-t distance between two equal-weight 1-D empirical
/// distributions given as ascending value lists:
/// `((1/m) * sum |u_(i) - v_(i)|^t)^(1/t)`.
pub fn wasserstein_1d(u: &[f64], v: &[f64], t: f64) -> Result<f64> {
    check_order(t)?;
    if u.len() != v.len() {
        return Err(Error::CardinalityMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::invalid("1-D distributions need at least one value"));
    }
    debug_assert!(u.windows(2).all(|w| w[0] <= w[1]), "u must be ascending");
    debug_assert!(v.windows(2).all(|w| w[0] <= w[1]), "v must be ascending");
    let sum: f64 = u.iter().zip(v).map(|(a, b)| pow_t(a - b, t)).sum();
    Ok(root_t(sum / u.len() as f64, t))
}

/// Monte-Carlo sliced distance:
/// `((1/L) * sum_l W_1d(project(a, theta_l), project(b, theta_l), t)^t)^(1/t)`.
///
/// Directions are evaluated in parallel; the reduction sums per-direction
/// terms in index order, so the result does not depend on the thread count.
pub fn sliced_wasserstein(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    t: f64,
    dirs: &DirectionSet,
) -> Result<f64> {
    check_order(t)?;
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if dirs.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: dirs.dim(),
        });
    }
    let m = a.len() as f64;
    let powers: Vec<f64> = (0..dirs.len())
        .into_par_iter()
        .map(|l| {
            let theta = dirs.direction(l);
            let pa = project_unchecked(a, theta);
            let pb = project_unchecked(b, theta);
            pa.iter()
                .zip(&pb)
                .map(|(x, y)| pow_t(x - y, t))
                .sum::<f64>()
                / m
        })
        .collect();
    let total: f64 = powers.iter().sum();
    Ok(root_t(total / dirs.len() as f64, t))
}

/// Exact order-t distance between two equal-cardinality point clouds:
/// the minimum of `((1/m) * sum_i ||u_i - v_pi(i)||^t)^(1/t)` over
/// permutations `pi`.
///
/// Routes by size: exhaustive enumeration up to [`BRUTE_FORCE_LIMIT`] atoms,
/// Hungarian assignment up to [`ASSIGNMENT_LIMIT`], error beyond that. This
/// is the desk-scale oracle, not a production distance.
pub fn exact_wasserstein(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    t: f64,
    norm: Norm,
) -> Result<f64> {
    check_order(t)?;
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let m = a.len();
    if m > ASSIGNMENT_LIMIT {
        return Err(Error::SizeLimit {
            size: m,
            limit: ASSIGNMENT_LIMIT,
        });
    }
    // The ground cost is symmetric in the arguments; fixing a canonical
    // orientation keeps the search's summation order, and therefore the
    // result bits, identical for (a, b) and (b, a).
    let (a, b) = if flat_lexicographic_le(&a.data, &b.data) {
        (a, b)
    } else {
        (b, a)
    };
    let mut cost = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            cost.push(pow_t(norm.distance(a.atom(i), b.atom(j)), t));
        }
    }
    let total = if m <= BRUTE_FORCE_LIMIT {
        enumerate_min(&cost, m)
    } else {
        assignment::min_cost_assignment(&cost, m)
    };
    Ok(root_t(total / m as f64, t))
}

fn flat_lexicographic_le(x: &[f64], y: &[f64]) -> bool {
    for (a, b) in x.iter().zip(y) {
        match a.total_cmp(b) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    true
}

/// Minimum assignment cost by branch-and-bound over all permutations.
/// Valid fallback because transport costs are nonnegative.
fn enumerate_min(cost: &[f64], n: usize) -> f64 {
    fn recurse(cost: &[f64], n: usize, row: usize, taken: &mut [bool], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if row == n {
            *best = acc;
            return;
        }
        for col in 0..n {
            if !taken[col] {
                taken[col] = true;
                recurse(cost, n, row + 1, taken, acc + cost[row * n + col], best);
                taken[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
    best
}

/// Closed-form sandwich for the order-t distance between the two
/// leave-one-out distributions of an N-sample dataset.
///
/// `lower = ||z_k - z_l|| / (N-1)` and `upper = ||z_k - z_l|| / (N-1)^(1/t)`;
/// the two coincide exactly at t = 1, where the single-sample transport plan
/// is optimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on the order-t distance between the leave-one-out distributions
/// obtained by dropping `z_k` and `z_l` from the same `n_samples`-point
/// dataset.
pub fn single_sample_bounds(
    z_k: &Sample,
    z_l: &Sample,
    n_samples: usize,
    t: f64,
    norm: Norm,
) -> Result<TransportBounds> {
    check_order(t)?;
    if z_k.dim() != z_l.dim() {
        return Err(Error::DimensionMismatch {
            expected: z_k.dim(),
            got: z_l.dim(),
        });
    }
    if n_samples < 2 {
        return Err(Error::invalid(
            "leave-one-out bounds need at least two samples",
        ));
    }
    let dist = norm.distance(z_k.coords(), z_l.coords());
    let m = (n_samples - 1) as f64;
    Ok(TransportBounds {
        lower: dist / m,
        upper: dist / root_t(m, t),
    })
}
