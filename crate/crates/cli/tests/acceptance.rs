//! Acceptance suite. One test per criterion; each prints a PASS line with
//! the measured quantities once its assertions hold.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use swad_core::dataio::{generate_mixture, ComponentLabel, Dataset, MixtureSpec};
use swad_core::eval::{confusion, verify_bounds};
use swad_core::filters::{
    fead_filter, kmeans, smart_split_indices, sswad_filter, swad_filter, FeadParams, SswadParams,
    SwadParams, KMEANS_DEFAULT_MAX_ITERS,
};
use swad_core::ot::{
    exact_wasserstein, sample_unit_directions, sliced_wasserstein, wasserstein_1d,
    EmpiricalDistribution, Norm,
};

const REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= (REL_TOL * a.abs().max(b.abs())).max(1e-12)
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect()
}

/// Independent oracle: order-1 distance between two equal-size point sets by
/// full enumeration of every permutation (no pruning, no assignment solver).
fn brute_force_w1(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let m = a.len();
    assert_eq!(m, b.len());
    let mut cost = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            cost[i * m + j] = a[i]
                .iter()
                .zip(&b[j])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
        }
    }
    fn recurse(cost: &[f64], m: usize, row: usize, taken: &mut [bool], acc: f64, best: &mut f64) {
        if row == m {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        for col in 0..m {
            if !taken[col] {
                taken[col] = true;
                recurse(cost, m, row + 1, taken, acc + cost[row * m + col], best);
                taken[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    recurse(&cost, m, 0, &mut vec![false; m], 0.0, &mut best);
    best / m as f64
}

#[test]
fn criterion_1_order_one_equality_on_leave_one_out_pairs() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut pairs_checked = 0usize;
    for _ in 0..50 {
        let n = rng.random_range(4..=10);
        let d = rng.random_range(1..=5);
        let rows = gaussian_rows(&mut rng, n, d);
        let full = EmpiricalDistribution::from_rows(&rows).unwrap();
        for k in 0..n {
            for l in k + 1..n {
                let loo = |skip: usize| -> Vec<Vec<f64>> {
                    rows.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, r)| r.clone())
                        .collect()
                };
                let brute = brute_force_w1(&loo(k), &loo(l));
                let lib = exact_wasserstein(
                    &full.leave_one_out(k).unwrap(),
                    &full.leave_one_out(l).unwrap(),
                    1.0,
                    Norm::L2,
                )
                .unwrap();
                let closed_form = Norm::L2.distance(&rows[k], &rows[l]) / (n as f64 - 1.0);
                assert!(
                    close(lib, closed_form),
                    "n={n} d={d} ({k},{l}): exact {lib} vs closed form {closed_form}"
                );
                assert!(
                    close(brute, closed_form),
                    "n={n} d={d} ({k},{l}): brute force {brute} vs closed form {closed_form}"
                );
                pairs_checked += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1} s, budget is 30 s");
    println!(
        "PASS criterion 1: order-1 equality on {pairs_checked} leave-one-out pairs \
         across 50 datasets in {elapsed:.2} s"
    );
}

#[test]
fn criterion_2_bound_sandwich_at_n100() {
    let started = Instant::now();
    let records = verify_bounds(100, 2, &[1.0, 2.0], 200, 42).unwrap();
    assert_eq!(records.len(), 400, "200 pairs at two orders");
    for r in &records {
        assert!(
            r.satisfied,
            "pair ({},{}) t={} violated: {} <= {} <= {}",
            r.k, r.l, r.t, r.lower, r.exact, r.upper
        );
        if r.t == 1.0 {
            assert!(close(r.lower, r.exact) && close(r.exact, r.upper));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1} s, budget is 5 min");
    println!(
        "PASS criterion 2: 400/400 sandwich records satisfied at N=100 \
         (order 1 collapses to equality) in {elapsed:.2} s"
    );
}

#[test]
fn criterion_3_1d_closed_form_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    for trial in 0..100 {
        let m = rng.random_range(1..=50);
        let t = [1.0, 2.0, 3.0][trial % 3];
        let rows_a = gaussian_rows(&mut rng, m, 1);
        let rows_b = gaussian_rows(&mut rng, m, 1);
        let mut u: Vec<f64> = rows_a.iter().map(|r| r[0]).collect();
        let mut v: Vec<f64> = rows_b.iter().map(|r| r[0]).collect();
        u.sort_unstable_by(f64::total_cmp);
        v.sort_unstable_by(f64::total_cmp);
        let closed = wasserstein_1d(&u, &v, t).unwrap();
        let oracle = exact_wasserstein(
            &EmpiricalDistribution::from_rows(&rows_a).unwrap(),
            &EmpiricalDistribution::from_rows(&rows_b).unwrap(),
            t,
            Norm::L2,
        )
        .unwrap();
        assert!(close(closed, oracle), "m={m} t={t}: {closed} vs {oracle}");
    }
    println!(
        "PASS criterion 3: sorted-matching closed form equals the oracle on 100 random 1-D pairs"
    );
}

#[test]
fn criterion_4_sliced_distance_never_exceeds_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
    for trial in 0..100u64 {
        let m = rng.random_range(2..=30);
        let d = if trial % 2 == 0 { 2 } else { 3 };
        let a = EmpiricalDistribution::from_rows(&gaussian_rows(&mut rng, m, d)).unwrap();
        let b = EmpiricalDistribution::from_rows(&gaussian_rows(&mut rng, m, d)).unwrap();
        let dirs = sample_unit_directions(d, 200, trial).unwrap();
        let sliced = sliced_wasserstein(&a, &b, 2.0, &dirs).unwrap();
        let exact = exact_wasserstein(&a, &b, 2.0, Norm::L2).unwrap();
        assert!(
            sliced <= exact + 1e-9,
            "m={m} d={d}: sliced {sliced} exceeds exact {exact}"
        );
    }
    println!("PASS criterion 4: projection contraction held on 100 random pairs (t=2, L=200)");
}

#[test]
fn criterion_5_regime_study_reaches_perfect_accuracy() {
    let (data, labels) = generate_mixture(&MixtureSpec::three_gaussian_default(7)).unwrap();
    let truth: Vec<bool> = labels
        .iter()
        .map(|l| *l == ComponentLabel::Outlier)
        .collect();
    let grid: Vec<f64> = (0..97)
        .map(|i| 1e-4 * 1e6f64.powf(i as f64 / 96.0))
        .collect();

    // Sliced filter: ascending grid must nest, and some epsilon must label
    // exactly the planted component.
    let mut previous: Option<Vec<bool>> = None;
    let mut perfect_eps = None;
    for &epsilon in &grid {
        let report = swad_filter(
            &data,
            &SwadParams {
                t: 2.0,
                epsilon,
                n_votes: 40,
                p_threshold: 0.8,
                n_projections: 40,
                seed: 7,
            },
        )
        .unwrap();
        if let Some(prev) = &previous {
            for (now, before) in report.is_outlier.iter().zip(prev) {
                assert!(!now || *before, "flag sets must nest along the grid");
            }
        }
        let counts = confusion(&report.is_outlier, &truth).unwrap();
        if counts.accuracy().unwrap() == 1.0 && perfect_eps.is_none() {
            perfect_eps = Some(epsilon);
        }
        previous = Some(report.is_outlier);
    }
    let perfect_eps = perfect_eps.expect("some epsilon must reach accuracy 1.0");

    // Euclidean filter with a correspondingly tuned eta.
    let mut perfect_eta = None;
    for &eta in &grid {
        let report = fead_filter(
            &data,
            &FeadParams {
                t: 1.0,
                eta,
                n_votes: 40,
                p_threshold: 0.8,
                seed: 7,
            },
        )
        .unwrap();
        let counts = confusion(&report.is_outlier, &truth).unwrap();
        if counts.accuracy().unwrap() == 1.0 {
            perfect_eta = Some(eta);
            break;
        }
    }
    let perfect_eta = perfect_eta.expect("some eta must reach accuracy 1.0");
    println!(
        "PASS criterion 5: nested flag sets over a 97-point grid; accuracy 1.0 at \
         epsilon = {perfect_eps:.5} (sliced) and eta = {perfect_eta:.5} (Euclidean)"
    );
}

#[test]
fn criterion_6_split_filter_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    for trial in 0..20u64 {
        let n = rng.random_range(30..=60);
        let d = rng.random_range(1..=4);
        let data = Dataset::from_rows(&gaussian_rows(&mut rng, n, d), None).unwrap();
        let base = SwadParams {
            t: 2.0,
            epsilon: 0.05,
            n_votes: 8,
            p_threshold: 0.6,
            n_projections: 16,
            seed: 0xBEEF + trial,
        };
        let plain = swad_filter(&data, &base).unwrap();
        let trivial = sswad_filter(
            &data,
            &SswadParams {
                base: base.clone(),
                k_clusters: 1,
                s_splits: 1,
            },
        )
        .unwrap();
        assert_eq!(
            plain.is_outlier, trivial.is_outlier,
            "K=1, S=1 must reproduce the plain filter"
        );

        for k in [2usize, 3] {
            for s in [2usize, 3] {
                let report = sswad_filter(
                    &data,
                    &SswadParams {
                        base: base.clone(),
                        k_clusters: k,
                        s_splits: s,
                    },
                )
                .unwrap();
                assert_eq!(report.len(), n);
                // The same seed path reproduces the splits; they must
                // partition the dataset exactly.
                let assignment = kmeans(&data, k, base.seed, KMEANS_DEFAULT_MAX_ITERS).unwrap();
                let splits = smart_split_indices(&assignment, s, base.seed).unwrap();
                let mut all: Vec<usize> = splits.iter().flatten().copied().collect();
                assert_eq!(all.len(), n);
                all.sort_unstable();
                all.dedup();
                assert_eq!(all.len(), n, "splits must be disjoint and cover all rows");
            }
        }
    }
    println!(
        "PASS criterion 6: trivial split equals the plain filter on 20 datasets; \
         K,S in {{2,3}} splits always partition exactly"
    );
}

fn write_numeric_csv(path: &Path, data: &Dataset) {
    let mut body = data.column_names().join(",");
    body.push('\n');
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        body.push_str(&cells.join(","));
        body.push('\n');
    }
    std::fs::write(path, body).unwrap();
}

#[test]
fn criterion_7_reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = generate_mixture(&MixtureSpec::three_gaussian_default(3)).unwrap();
    let input = dir.path().join("data.csv");
    write_numeric_csv(&input, &data);

    for method in ["swad", "sswad", "fead"] {
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        for threads in ["1", "4", "8"] {
            let output: PathBuf = dir.path().join(format!("{method}-{threads}.csv"));
            let threshold: &[&str] = if method == "fead" {
                &["--eta", "0.1", "--t", "1"]
            } else {
                &["--epsilon", "0.05"]
            };
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_swad"))
                .args([
                    "filter",
                    "--method",
                    method,
                    "--n-votes",
                    "40",
                    "--p",
                    "0.8",
                    "--projections",
                    "40",
                    "--seed",
                    "11",
                    "--threads",
                    threads,
                    "--input",
                    input.to_str().unwrap(),
                    "--output",
                    output.to_str().unwrap(),
                ])
                .args(threshold)
                .status()
                .unwrap();
            assert!(status.success());
            outputs.push(std::fs::read(&output).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{method}: 1 vs 4 threads");
        assert_eq!(outputs[0], outputs[2], "{method}: 1 vs 8 threads");
    }
    println!(
        "PASS criterion 7: report files byte-identical across --threads 1/4/8 for all methods"
    );
}

#[test]
fn criterion_8_desk_scale_performance() {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();

    // Euclidean filter on 100k x 10.
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC8);
    let flat: Vec<f64> = (0..100_000 * 10)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let big = Dataset::from_flat(flat, 10, None).unwrap();
    let started = Instant::now();
    let report = single
        .install(|| {
            fead_filter(
                &big,
                &FeadParams {
                    t: 2.0,
                    eta: 0.05,
                    n_votes: 300,
                    p_threshold: 0.8,
                    seed: 1,
                },
            )
        })
        .unwrap();
    let fead_elapsed = started.elapsed().as_secs_f64();
    assert_eq!(report.len(), 100_000);
    assert!(
        fead_elapsed < 60.0,
        "fead took {fead_elapsed:.1} s single-threaded, budget is 60 s"
    );

    // Sliced filter on 2000 x 10 through the shared-projection fast path.
    let flat: Vec<f64> = (0..2000 * 10)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let medium = Dataset::from_flat(flat, 10, None).unwrap();
    let started = Instant::now();
    let report = single
        .install(|| {
            swad_filter(
                &medium,
                &SwadParams {
                    t: 2.0,
                    epsilon: 0.05,
                    n_votes: 150,
                    p_threshold: 0.8,
                    n_projections: 40,
                    seed: 1,
                },
            )
        })
        .unwrap();
    let swad_elapsed = started.elapsed().as_secs_f64();
    assert_eq!(report.len(), 2000);
    assert!(
        swad_elapsed < 300.0,
        "swad took {swad_elapsed:.1} s single-threaded, budget is 5 min"
    );

    println!(
        "PASS criterion 8: single-threaded fead 100000x10 in {fead_elapsed:.2} s (< 60 s); \
         swad 2000x10 L=40 in {swad_elapsed:.2} s (< 300 s)"
    );
}
