//! Randomized invariants over generated inputs.

use proptest::collection::vec;
use proptest::prelude::*;
use swad_core::dataio::{load_csv, save_report, Dataset};
use swad_core::filters::{
    fead_filter, kmeans, smart_split_indices, vote_indices, FeadParams, KMEANS_DEFAULT_MAX_ITERS,
};
use swad_core::ot::wasserstein_1d;

fn finite_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        Just(1e-300),
    ]
}

proptest! {
    #[test]
    fn wasserstein_1d_is_symmetric_and_nonnegative(
        mut u in vec(finite_value(), 1..40),
        mut v in vec(finite_value(), 1..40),
        t in 1.0..4.0f64,
    ) {
        let m = u.len().min(v.len());
        u.truncate(m);
        v.truncate(m);
        u.sort_unstable_by(f64::total_cmp);
        v.sort_unstable_by(f64::total_cmp);
        let uv = wasserstein_1d(&u, &v, t).unwrap();
        let vu = wasserstein_1d(&v, &u, t).unwrap();
        prop_assert_eq!(uv.to_bits(), vu.to_bits());
        prop_assert!(uv >= 0.0);
        prop_assert_eq!(wasserstein_1d(&u, &u, t).unwrap(), 0.0);
    }

    #[test]
    fn smart_splits_partition_any_dataset(
        rows in vec(vec(-100.0..100.0f64, 2), 2..60),
        k in 1usize..6,
        s in 1usize..5,
        seed in any::<u64>(),
    ) {
        let k = k.min(rows.len());
        let data = Dataset::from_rows(&rows, None).unwrap();
        let assignment = kmeans(&data, k, seed, KMEANS_DEFAULT_MAX_ITERS).unwrap();
        let splits = smart_split_indices(&assignment, s, seed).unwrap();
        prop_assert_eq!(splits.len(), s);
        let mut all: Vec<usize> = splits.iter().flatten().copied().collect();
        prop_assert_eq!(all.len(), rows.len());
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), rows.len());
    }

    #[test]
    fn vote_indices_avoid_self_and_repeats(
        i in 0usize..30,
        extra in 1usize..40,
        n_votes in 1usize..30,
        seed in any::<u64>(),
    ) {
        let n = i + extra + 1;
        let n_votes = n_votes.min(n - 1);
        let votes = vote_indices(i, n, n_votes, seed).unwrap();
        prop_assert_eq!(votes.len(), n_votes);
        let mut sorted = votes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), n_votes);
        prop_assert!(votes.iter().all(|&j| j < n && j != i));
    }

    #[test]
    fn report_csv_round_trips_the_features(
        rows in vec(vec(-1e9..1e9f64, 3), 2..25),
        eta in 0.0..10.0f64,
        seed in any::<u64>(),
    ) {
        let data = Dataset::from_rows(&rows, None).unwrap();
        let report = fead_filter(
            &data,
            &FeadParams { t: 2.0, eta, n_votes: 1, p_threshold: 0.5, seed },
        ).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        save_report(&report, &data, &path).unwrap();

        let loaded = load_csv(&path, true).unwrap();
        prop_assert_eq!(loaded.n_rows(), data.n_rows());
        prop_assert_eq!(loaded.n_cols(), data.n_cols() + 3);
        for i in 0..data.n_rows() {
            // Shortest round-trip serialization reproduces features exactly.
            for (c, x) in data.row(i).iter().enumerate() {
                prop_assert_eq!(loaded.row(i)[c + 3].to_bits(), x.to_bits());
            }
            let fraction = loaded.row(i)[1];
            prop_assert!((fraction - report.vote_fraction[i]).abs() <= 5e-10);
            let flag = loaded.row(i)[2];
            prop_assert_eq!(flag == 1.0, report.is_outlier[i]);
        }
    }
}
