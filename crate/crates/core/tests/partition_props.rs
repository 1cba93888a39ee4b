mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salso_kit::partition::MoveTarget;
use salso_kit::{ClusterLabels, ContingencyTable, DrawsMatrix, SimilarityMatrix, TableCache};

fn labels_strategy(max_n: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(-3i32..6, 1..max_n)
}

proptest! {
    #[test]
    fn canonical_form_is_idempotent(raw in labels_strategy(30)) {
        let c = ClusterLabels::canonicalize(&raw).unwrap();
        let again = ClusterLabels::canonicalize(c.as_slice()).unwrap();
        prop_assert_eq!(&c, &again);
        prop_assert_eq!(c.as_slice()[0], 1);
    }

    #[test]
    fn canonical_form_ignores_label_names(raw in labels_strategy(30), shift in 1i32..100) {
        let renamed: Vec<i32> = raw.iter().map(|x| x * 7 + shift).collect();
        prop_assert_eq!(
            ClusterLabels::canonicalize(&raw).unwrap(),
            ClusterLabels::canonicalize(&renamed).unwrap()
        );
    }

    #[test]
    fn canonical_equality_matches_co_clustering(
        (a, b) in (1usize..10).prop_flat_map(|n| {
            (prop::collection::vec(0i32..3, n), prop::collection::vec(0i32..3, n))
        })
    ) {
        let same_pairs = (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])));
        let ca = ClusterLabels::canonicalize(&a).unwrap();
        let cb = ClusterLabels::canonicalize(&b).unwrap();
        prop_assert_eq!(ca == cb, same_pairs);
    }

    #[test]
    fn psm_matches_pair_counts(seed in any::<u64>(), n in 1usize..12, h in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Vec<u32>> = (0..h).map(|_| common::random_labels(&mut rng, n, 4)).collect();
        let draws = DrawsMatrix::from_raw_rows(&raw).unwrap();
        let psm = SimilarityMatrix::build(&draws);
        let want = common::psm(&raw);
        for i in 0..n {
            for j in 0..n {
                let scaled = psm.get(i, j) * h as f64;
                prop_assert!((scaled - scaled.round()).abs() < 1e-9);
                prop_assert_eq!(psm.count(i, j) as f64, (want[i][j] * h as f64).round());
                prop_assert_eq!(psm.get(i, j), psm.get(j, i));
            }
            prop_assert_eq!(psm.get(i, i), 1.0);
        }
    }
}

/// Counts of `truth` against column indices `cols` recounted from scratch.
fn recount(truth: &[u32], cols: &[usize], n_rows: usize, n_cols: usize) -> Vec<u32> {
    let mut cells = vec![0; n_rows * n_cols];
    for (&r, &c) in truth.iter().zip(cols) {
        cells[r as usize * n_cols + c] += 1;
    }
    cells
}

#[test]
fn table_moves_match_rebuilds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let n = rng.gen_range(1..25);
        let truth = ClusterLabels::canonicalize(&common::random_labels(&mut rng, n, 5)).unwrap();
        let est = ClusterLabels::canonicalize(&common::random_labels(&mut rng, n, 5)).unwrap();
        let t0: Vec<u32> = truth.zero_based().collect();
        let mut cols: Vec<usize> = est.zero_based().map(|c| c as usize).collect();
        let mut table = ContingencyTable::build(&truth, &est).unwrap();
        for _ in 0..40 {
            let item = rng.gen_range(0..n);
            let from = cols[item];
            let target = if rng.gen_bool(0.2) {
                MoveTarget::New
            } else {
                MoveTarget::Existing(rng.gen_range(0..table.n_cols()))
            };
            let to = table.apply_move(t0[item] as usize, from, target).unwrap();
            cols[item] = to;
            if table.col_sums()[from] == 0 {
                if let Some(last) = table.compact_column(from).unwrap() {
                    for c in cols.iter_mut().filter(|c| **c == last) {
                        *c = from;
                    }
                }
            }
            assert!(table.is_consistent());
            assert_eq!(
                table.cells(),
                recount(&t0, &cols, truth.num_clusters(), table.n_cols()).as_slice()
            );
            assert!(table.col_sums().iter().all(|&s| s > 0));
        }
        let final_labels = ClusterLabels::canonicalize(&cols).unwrap();
        let rebuilt = ContingencyTable::build(&truth, &final_labels).unwrap();
        assert_eq!(rebuilt.row_sums(), table.row_sums());
    }
}

#[test]
fn moving_out_of_an_empty_cell_is_rejected() {
    let truth = ClusterLabels::canonicalize(&[1, 1, 2]).unwrap();
    let est = ClusterLabels::canonicalize(&[1, 2, 2]).unwrap();
    let mut t = ContingencyTable::build(&truth, &est).unwrap();
    // Row 1 (second truth cluster) has nothing in column 0.
    assert!(t.apply_move(1, 0, MoveTarget::Existing(1)).is_err());
    assert!(t.compact_column(0).is_err());
}

#[test]
fn cache_operations_match_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(1..20);
        let h = rng.gen_range(1..6);
        let raw: Vec<Vec<u32>> = (0..h).map(|_| common::random_labels(&mut rng, n, 4)).collect();
        let draws = DrawsMatrix::from_raw_rows(&raw).unwrap();
        let cap = rng.gen_range(1..=n);
        let mut cache = TableCache::new(&draws, cap);
        // Mirror of the assignment, updated with the same compaction rule.
        let mut mirror: Vec<Option<usize>> = vec![None; n];
        let mut q = 0usize;
        for _ in 0..100 {
            let item = rng.gen_range(0..n);
            match mirror[item] {
                None => {
                    let top = if q < cap { q } else { q - 1 };
                    let c = rng.gen_range(0..=top);
                    cache.allocate(item, c);
                    if c == q {
                        q += 1;
                    }
                    mirror[item] = Some(c);
                }
                Some(from) => {
                    let removal = cache.deallocate(item).unwrap();
                    mirror[item] = None;
                    assert_eq!(removal.from, from);
                    if !mirror.contains(&Some(from)) {
                        assert!(removal.emptied);
                        q -= 1;
                        if from != q {
                            assert_eq!(removal.relocated, Some(q));
                            for m in mirror.iter_mut().filter(|m| **m == Some(q)) {
                                *m = Some(from);
                            }
                        }
                    } else {
                        assert!(!removal.emptied);
                    }
                }
            }
            assert_eq!(cache.assignment(), mirror);
            assert_eq!(cache.n_clusters(), q);
            for (d, row) in raw.iter().enumerate() {
                let canon = ClusterLabels::canonicalize(row).unwrap();
                let r0: Vec<u32> = canon.zero_based().collect();
                for r in 0..draws.n_clusters(d) {
                    let mut want_row = 0;
                    for c in 0..q {
                        let want = (0..n)
                            .filter(|&i| r0[i] as usize == r && mirror[i] == Some(c))
                            .count() as u32;
                        assert_eq!(cache.cell(d, r, c), want);
                        want_row += want;
                    }
                    assert_eq!(cache.row_sum(d, r), want_row);
                }
            }
        }
    }
}
