mod common;

use std::collections::{BTreeMap, BTreeSet};

use pathboost::anchors::{detect_categorical_attributes, rare_label_filter, select_anchor_attribute};
use pathboost::boosting::{logistic_loss, pseudo_residuals, train, BoostConfig};
use pathboost::eval::{accuracy, f1_macro, make_folds, run_cv, CVPlan};
use pathboost::features::{build_count_matrix, feature_dimension, feature_row, AttributeMode, CountMatrix};
use pathboost::graph::{Dataset, Graph, LabelAlphabet, Task};
use pathboost::learners::{fit_stump, fit_tree};
use pathboost::paths::{count_occurrences, enumerate_occurrences, one_node_extensions, AnchorSet, LabelledPath};
use pathboost::tudata::{load_dataset, write_dataset, LoadOptions, WriteOptions};
use pathboost::{fixtures, AnchorConfig};
use proptest::prelude::*;

use common::{arb_graph, brute_count, brute_metrics, brute_occurrences, brute_stump, walk_labels};

fn dataset(graphs: Vec<Graph>, labels: u32, q_v: usize, q_e: usize, task: Task) -> Dataset {
    let n = graphs.len();
    let targets = (0..n).map(|i| (i % 2) as f64).collect();
    let names = (0..labels).map(|l| l.to_string()).collect();
    Dataset::new("p", task, graphs, targets, LabelAlphabet::new(names), q_v, q_e).unwrap()
}

fn all_anchors(ds: &Dataset) -> Vec<AnchorSet> {
    ds.graphs().map(|g| AnchorSet::all(g.node_count())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_and_edge_attributes_are_symmetric(g in arb_graph(10, 3, 1, 2)) {
        prop_assert!(g.validate(1, 2).is_ok());
        for v in 0..g.node_count() {
            for &u in g.neighbors(v).unwrap() {
                prop_assert!(g.neighbors(u).unwrap().contains(&v));
                prop_assert_eq!(g.edge_attributes(u, v).unwrap(), g.edge_attributes(v, u).unwrap());
            }
        }
    }

    #[test]
    fn counts_match_brute_force(
        g in arb_graph(12, 3, 0, 0),
        start in 0usize..12,
        steps in proptest::collection::vec(0usize..6, 0..5),
        anchor_mask in proptest::collection::vec(any::<bool>(), 12),
    ) {
        let labels = walk_labels(&g, start, &steps);
        let path = LabelledPath::new(labels.clone()).unwrap();
        let anchors: Vec<usize> = (0..g.node_count()).filter(|&v| anchor_mask[v]).collect();
        let set = AnchorSet::from_nodes(anchors.iter().copied());
        prop_assert_eq!(count_occurrences(&g, &set, &path), brute_count(&g, &anchors, &labels));
        let occs: Vec<Vec<usize>> = enumerate_occurrences(&g, &set, &path).into_iter().map(|o| o.nodes).collect();
        let mut expected = brute_occurrences(&g, &anchors, &labels);
        expected.sort();
        prop_assert_eq!(occs, expected);
    }

    #[test]
    fn paths_occur_only_where_their_prefixes_do(
        g in arb_graph(10, 2, 0, 0),
        start in 0usize..10,
        steps in proptest::collection::vec(0usize..6, 0..5),
    ) {
        let path = LabelledPath::new(walk_labels(&g, start, &steps)).unwrap();
        let anchors = AnchorSet::all(g.node_count());
        let full = count_occurrences(&g, &anchors, &path);
        for s in 1..path.len() {
            let prefix = LabelledPath::new(path.labels()[..s].to_vec()).unwrap();
            if full > 0 {
                prop_assert!(count_occurrences(&g, &anchors, &prefix) > 0);
            }
        }
        // once a prefix count hits zero every longer prefix is zero too
        let row = feature_row(&g, &anchors, &path, 0, 0, AttributeMode::Restricted);
        if let Some(z) = row.iter().position(|&c| c == 0.0) {
            prop_assert!(row[z..].iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn extensions_occur_in_the_data(
        graphs in proptest::collection::vec(arb_graph(8, 3, 0, 0), 1..5),
        label in 0u32..3,
    ) {
        let ds = dataset(graphs, 3, 0, 0, Task::Classification);
        let anchors = all_anchors(&ds);
        let base = LabelledPath::single(label);
        for ext in one_node_extensions(&ds, &anchors, &base) {
            let total: u64 = ds.graphs().zip(&anchors).map(|(g, a)| count_occurrences(g, a, &ext)).sum();
            prop_assert!(total >= 1);
        }
    }

    #[test]
    fn averaged_attributes_stay_within_occurrence_range(
        g in arb_graph(9, 2, 2, 1),
        start in 0usize..9,
        steps in proptest::collection::vec(0usize..6, 1..4),
    ) {
        let path = LabelledPath::new(walk_labels(&g, start, &steps)).unwrap();
        let anchors = AnchorSet::all(g.node_count());
        let row = feature_row(&g, &anchors, &path, 2, 1, AttributeMode::Complete);
        let mut offset = 0;
        for s in 1..=path.len() {
            let prefix = LabelledPath::new(path.labels()[..s].to_vec()).unwrap();
            let occs = enumerate_occurrences(&g, &anchors, &prefix);
            offset += 1;
            for k in 0..2 {
                let value = row[offset + k];
                if occs.is_empty() {
                    prop_assert_eq!(value, 0.0);
                } else {
                    let xs: Vec<f64> = occs.iter().map(|o| g.node_attributes(o.nodes[s - 1])[k]).collect();
                    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(value >= lo - 1e-12 && value <= hi + 1e-12);
                }
            }
            offset += 2;
            if s >= 2 {
                let value = row[offset];
                if !occs.is_empty() {
                    let xs: Vec<f64> = occs
                        .iter()
                        .map(|o| g.edge_attributes(o.nodes[s - 2], o.nodes[s - 1]).unwrap()[0])
                        .collect();
                    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(value >= lo - 1e-12 && value <= hi + 1e-12);
                }
                offset += 1;
            }
        }
        prop_assert_eq!(offset, row.len());
    }

    #[test]
    fn count_matrix_follows_graph_permutation(
        graphs in proptest::collection::vec(arb_graph(7, 3, 0, 0), 2..6),
        rotate in 0usize..6,
    ) {
        let n = graphs.len();
        let ds = dataset(graphs.clone(), 3, 0, 0, Task::Regression);
        let mut permuted = graphs;
        permuted.rotate_left(rotate % n);
        let dp = dataset(permuted, 3, 0, 0, Task::Regression);
        let paths: Vec<LabelledPath> = vec![
            LabelledPath::single(0),
            LabelledPath::new(vec![0, 1]).unwrap(),
            LabelledPath::new(vec![2, 1, 0]).unwrap(),
        ];
        let x = build_count_matrix(&ds, &all_anchors(&ds), &paths).unwrap();
        let y = build_count_matrix(&dp, &all_anchors(&dp), &paths).unwrap();
        for c in 0..paths.len() {
            for i in 0..n {
                prop_assert_eq!(y.get(i, c), x.get((i + rotate % n) % n, c));
            }
        }
    }

    #[test]
    fn round_trip_through_text_files(graphs in proptest::collection::vec(arb_graph(6, 3, 1, 1), 1..5)) {
        // the loader's alphabet holds only labels that occur
        let used: BTreeSet<u32> = graphs.iter().flat_map(|g| g.labels().to_vec()).collect();
        prop_assume!(used.len() == 3);
        let ds = dataset(graphs, 3, 1, 1, Task::Classification);
        prop_assume!(ds.graphs().all(|g| g.edge_count() > 0));
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &ds, &WriteOptions::default()).unwrap();
        let (back, report) = load_dataset(dir.path(), "p", LoadOptions::default()).unwrap();
        prop_assert_eq!(back.alphabet().names(), ds.alphabet().names());
        prop_assert_eq!(back.targets(), ds.targets());
        for (a, b) in back.graphs().zip(ds.graphs()) {
            prop_assert_eq!(a, b);
        }
        let edges: usize = ds.graphs().map(|g| g.edge_count()).sum();
        prop_assert_eq!(report.directed_edge_rows, 2 * edges);
    }

    #[test]
    fn anchor_choice_ignores_graph_order(
        codes in proptest::collection::vec(proptest::collection::vec((0u8..4, 0u8..3), 1..6), 2..6),
        rotate in 0usize..6,
    ) {
        let build = |codes: &[Vec<(u8, u8)>]| {
            let graphs = codes
                .iter()
                .map(|g| {
                    let attrs = g.iter().map(|&(a, b)| vec![a as f64, b as f64]).collect();
                    Graph::from_edges(vec![0; g.len()], attrs, Vec::new()).unwrap()
                })
                .collect();
            dataset(graphs, 1, 2, 0, Task::Regression).with_node_labels_flag(false)
        };
        let cfg = AnchorConfig::default();
        let a = select_anchor_attribute(&build(&codes), &cfg).unwrap();
        let mut rotated = codes.clone();
        let k = rotate % rotated.len();
        rotated.rotate_left(k);
        prop_assert_eq!(select_anchor_attribute(&build(&rotated), &cfg).unwrap(), a);
    }

    #[test]
    fn rare_labels_are_never_more_frequent_than_excluded(
        graphs in proptest::collection::vec(arb_graph(8, 5, 0, 0), 1..4),
        k in 1usize..6,
    ) {
        let ds = dataset(graphs, 5, 0, 0, Task::Regression);
        let mut freq = BTreeMap::new();
        for g in ds.graphs() {
            for &l in g.labels() {
                *freq.entry(l).or_insert(0usize) += 1;
            }
        }
        let f = |l: u32| freq.get(&l).copied().unwrap_or(0);
        let chosen = rare_label_filter(&ds, k);
        prop_assert_eq!(chosen.len(), k.min(5));
        for &c in &chosen {
            for e in (0..5).filter(|e| !chosen.contains(e)) {
                prop_assert!(f(c) <= f(e));
            }
        }
    }

    #[test]
    fn stump_matches_exhaustive_scan(
        columns in proptest::collection::vec(proptest::collection::vec(0u64..4, 8), 1..=3),
        rows in 2usize..=8,
        r in proptest::collection::vec(-3i32..4, 8),
    ) {
        let columns: Vec<Vec<u64>> = columns.into_iter().map(|c| c[..rows].to_vec()).collect();
        let r: Vec<f64> = r[..rows].iter().map(|&v| v as f64 / 2.0).collect();
        let mut x = CountMatrix::new(rows);
        for (i, c) in columns.iter().enumerate() {
            x.push_column(LabelledPath::single(i as u32), c.clone()).unwrap();
        }
        let stump = fit_stump(&x, &r).unwrap();
        let expected = brute_stump(&columns, &r);
        let total: f64 = r.iter().map(|v| v * v).sum();
        if expected > 1e-12 * total {
            prop_assert!((stump.sse_reduction - expected).abs() < 1e-9, "{} vs {}", stump.sse_reduction, expected);
        } else {
            prop_assert_eq!(stump.sse_reduction, 0.0);
        }
    }

    #[test]
    fn deeper_trees_fit_no_worse_and_leaves_are_means(
        rows in proptest::collection::vec(proptest::collection::vec(-4i32..5, 3), 4..30),
        r in proptest::collection::vec(-10i32..10, 30),
        min_leaf in 1usize..4,
    ) {
        let x: Vec<Vec<f64>> = rows.iter().map(|row| row.iter().map(|&v| v as f64).collect()).collect();
        let r: Vec<f64> = r[..x.len()].iter().map(|&v| v as f64 / 3.0).collect();
        let mut previous = f64::INFINITY;
        for depth in 0..4 {
            let tree = fit_tree(&x, &r, depth, min_leaf).unwrap();
            let preds: Vec<f64> = x.iter().map(|row| tree.predict(row).unwrap()).collect();
            let sse: f64 = preds.iter().zip(&r).map(|(p, y)| (y - p) * (y - p)).sum();
            prop_assert!(sse <= previous + 1e-9);
            previous = sse;
            let mut by_leaf: BTreeMap<u64, f64> = BTreeMap::new();
            for (p, y) in preds.iter().zip(&r) {
                *by_leaf.entry(p.to_bits()).or_default() += y - p;
            }
            for residual in by_leaf.values() {
                prop_assert!(residual.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn residuals_are_negative_loss_gradients(y in 0u8..2, f in -8.0f64..8.0) {
        let y = y as f64;
        let h = 1e-5;
        let fd = -(logistic_loss(y, f + h) - logistic_loss(y, f - h)) / (2.0 * h);
        let r = pseudo_residuals(&[y], &[f], Task::Classification).unwrap()[0];
        prop_assert!((r - fd).abs() < 1e-6);
    }

    #[test]
    fn folds_partition_every_repetition(n in 10usize..80, k in 2usize..10, positives in 0usize..80, seed in 0u64..1000) {
        let labels: Vec<f64> = (0..n).map(|i| if i < positives.min(n) { 1.0 } else { 0.0 }).collect();
        let plan = CVPlan { folds: k, repetitions: 3, seed, ..CVPlan::default() };
        let layouts = make_folds(n, &plan, Some(&labels)).unwrap();
        for layout in &layouts {
            // every index has exactly one fold, so the folds partition 0..n
            prop_assert_eq!(layout.len(), n);
            let mut sizes = vec![0usize; k];
            for &f in layout {
                prop_assert!(f < k);
                sizes[f] += 1;
            }
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn metrics_match_confusion_matrix(pairs in proptest::collection::vec((0u8..2, 0u8..2), 1..=50)) {
        let preds: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let targets: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let (acc, f1) = brute_metrics(&preds, &targets);
        prop_assert!((accuracy(&preds, &targets).unwrap() - acc).abs() < 1e-9);
        prop_assert!((f1_macro(&preds, &targets).unwrap() - f1).abs() < 1e-9);
    }
}

#[test]
fn longer_paths_can_outnumber_their_prefixes() {
    // centre A with two B leaves: one occurrence of A, two of A-B
    let g = Graph::from_edges(vec![0, 1, 1], vec![vec![]; 3], vec![(0, 1, vec![]), (0, 2, vec![])]).unwrap();
    let anchors = AnchorSet::from_nodes([0]);
    assert_eq!(count_occurrences(&g, &anchors, &LabelledPath::single(0)), 1);
    assert_eq!(count_occurrences(&g, &anchors, &LabelledPath::new(vec![0, 1]).unwrap()), 2);
}

#[test]
fn dimension_law_over_parameter_grid() {
    for m in 1..=6 {
        for q_v in [0, 1, 3] {
            for q_e in [0, 2] {
                let expected = m + q_v + (m - 1) * (q_v + q_e);
                assert_eq!(feature_dimension(m, q_v, q_e, AttributeMode::Complete), expected);
                let labels = vec![0; m];
                let g = Graph::from_edges(
                    labels.clone(),
                    vec![vec![1.0; q_v]; m],
                    (1..m).map(|v| (v - 1, v, vec![0.5; q_e])).collect::<Vec<_>>(),
                )
                .unwrap();
                let path = LabelledPath::new(labels).unwrap();
                let row = feature_row(&g, &AnchorSet::all(m), &path, q_v, q_e, AttributeMode::Complete);
                assert_eq!(row.len(), expected);
            }
        }
    }
}

#[test]
fn distinct_seeds_give_distinct_layouts() {
    let plan = CVPlan { folds: 10, repetitions: 10, seed: 1, ..CVPlan::default() };
    let layouts = make_folds(188, &plan, None).unwrap();
    let distinct: BTreeSet<&Vec<usize>> = layouts.iter().collect();
    assert_eq!(distinct.len(), 10);
}

#[test]
fn initial_pool_is_the_set_of_present_labels() {
    let fx = fixtures::random_molecules(30, 5);
    let ds = &fx.dataset;
    let present = detect_categorical_attributes(ds, 200)[0];
    assert_eq!(present.0, 0);
    let cfg = BoostConfig { m_stop: 1, ..fx.config.clone() };
    let model = train(ds, &cfg, &fx.anchor).unwrap();
    let initial: BTreeSet<LabelledPath> = ds
        .graphs()
        .flat_map(|g| g.labels().to_vec())
        .map(LabelledPath::single)
        .collect();
    assert_eq!(initial.len(), present.1);
    let new = one_node_extensions(ds, &all_anchors(ds), &model.stages[0].path)
        .difference(&initial)
        .count();
    assert_eq!(model.history[0].candidates - new, present.1);
}

#[test]
fn candidate_pool_only_grows() {
    for fx in fixtures::all() {
        let model = train(&fx.dataset, &fx.config, &fx.anchor).unwrap();
        let sizes: Vec<usize> = model.history.iter().map(|h| h.candidates).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{}", fx.name);
        // growth happens only on first selection of a path
        let mut seen = BTreeSet::new();
        let mut previous = None;
        for (stage, size) in model.stages.iter().zip(&sizes) {
            let first = seen.insert(stage.path.clone());
            if let Some(p) = previous {
                if !first {
                    assert_eq!(*size, p);
                }
            }
            previous = Some(*size);
        }
    }
}

#[test]
fn anchor_attribute_never_leaks_from_test_folds() {
    // column 1: 3 codes everywhere; column 2: constant except in graph 0,
    // where it takes 8 distinct values and would win if test graphs were seen
    let graphs: Vec<Graph> = (0..20)
        .map(|i| {
            let attrs = (0..8)
                .map(|v| vec![((v + i) % 3) as f64, if i == 0 { v as f64 } else { 0.0 }])
                .collect();
            Graph::from_edges(vec![0; 8], attrs, (1..8).map(|v| (v - 1, v, Vec::new())).collect::<Vec<_>>()).unwrap()
        })
        .collect();
    let ds = dataset(graphs, 1, 2, 0, Task::Classification).with_node_labels_flag(false);
    let cfg = BoostConfig { m_stop: 3, min_leaf: 1, ..BoostConfig::default() };
    let plan = CVPlan { folds: 5, repetitions: 2, seed: 4, ..CVPlan::default() };
    let report = run_cv(&ds, &cfg, &AnchorConfig::default(), &plan).unwrap();
    for detail in &report.fold_details {
        let holds_marker = report
            .predictions
            .iter()
            .any(|p| p.graph == 0 && p.repetition == detail.repetition && p.fold == detail.fold);
        if holds_marker {
            assert_eq!(detail.anchor_column, 1);
        } else {
            assert_eq!(detail.anchor_column, 2);
        }
    }
}

#[test]
fn intercept_only_cv_predicts_majority_class() {
    let ds = fixtures::constant_structure(40);
    let cfg = BoostConfig { min_leaf: 1, ..BoostConfig::default() };
    let plan = CVPlan { folds: 4, repetitions: 2, seed: 0, ..CVPlan::default() };
    let report = run_cv(&ds, &cfg, &AnchorConfig::default(), &plan).unwrap();
    assert!((report.metrics["accuracy"].mean - 75.0).abs() < 1e-9);
    assert_eq!(report.metrics["accuracy"].std, 0.0);
}

#[test]
fn cv_report_is_reproducible() {
    let fx = fixtures::random_molecules(30, 1);
    let plan = CVPlan { folds: 3, repetitions: 2, seed: 9, ..CVPlan::default() };
    let a = run_cv(&fx.dataset, &fx.config, &fx.anchor, &plan).unwrap();
    let b = run_cv(&fx.dataset, &fx.config, &fx.anchor, &plan).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.predictions, b.predictions);
}
