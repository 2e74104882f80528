//! Brute-force reference implementations shared by the property and
//! acceptance suites. They avoid the engine's data structures on purpose.

#![allow(dead_code)]

use std::collections::HashSet;

use pathboost::graph::{Graph, LabelId};
use proptest::prelude::*;

/// Occurrences of `labels` anchored in `anchors`, found by extending node
/// sequences over *all* nodes and checking adjacency against an edge set.
pub fn brute_occurrences(g: &Graph, anchors: &[usize], labels: &[LabelId]) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let edges: HashSet<(usize, usize)> = g
        .edges()
        .flat_map(|((u, v), _)| [(u, v), (v, u)])
        .collect();
    let mut out = Vec::new();
    fn extend(
        seq: &mut Vec<usize>,
        n: usize,
        g: &Graph,
        edges: &HashSet<(usize, usize)>,
        labels: &[LabelId],
        out: &mut Vec<Vec<usize>>,
    ) {
        if seq.len() == labels.len() {
            out.push(seq.clone());
            return;
        }
        let last = *seq.last().unwrap();
        for w in 0..n {
            if !seq.contains(&w) && edges.contains(&(last, w)) && g.label(w) == labels[seq.len()] {
                seq.push(w);
                extend(seq, n, g, edges, labels, out);
                seq.pop();
            }
        }
    }
    for &a in anchors {
        if g.label(a) == labels[0] {
            let mut seq = vec![a];
            extend(&mut seq, n, g, &edges, labels, &mut out);
        }
    }
    out
}

pub fn brute_count(g: &Graph, anchors: &[usize], labels: &[LabelId]) -> u64 {
    brute_occurrences(g, anchors, labels).len() as u64
}

/// Best SSE reduction over every (column, midpoint) split, computed from sums
/// of squares directly.
pub fn brute_stump(columns: &[Vec<u64>], r: &[f64]) -> f64 {
    let sse = |idx: &[usize]| -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let mean = idx.iter().map(|&i| r[i]).sum::<f64>() / idx.len() as f64;
        idx.iter().map(|&i| (r[i] - mean) * (r[i] - mean)).sum()
    };
    let all: Vec<usize> = (0..r.len()).collect();
    let total = sse(&all);
    let mut best: f64 = 0.0;
    for col in columns {
        let mut values: Vec<u64> = col.clone();
        values.sort_unstable();
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] as f64 + w[1] as f64) / 2.0;
            let (left, right): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| (col[i] as f64) <= t);
            best = best.max(total - sse(&left) - sse(&right));
        }
    }
    best
}

/// Accuracy and macro F1 (percent) from an explicit confusion matrix.
pub fn brute_metrics(preds: &[f64], targets: &[f64]) -> (f64, f64) {
    let mut m = [[0usize; 2]; 2]; // m[truth][pred]
    for (&p, &t) in preds.iter().zip(targets) {
        m[t as usize][p as usize] += 1;
    }
    let n = preds.len() as f64;
    let acc = 100.0 * (m[0][0] + m[1][1]) as f64 / n;
    let f1 = |c: usize| {
        let tp = m[c][c] as f64;
        let fp = m[1 - c][c] as f64;
        let fn_ = m[c][1 - c] as f64;
        if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fn_)
        }
    };
    (acc, 100.0 * (f1(0) + f1(1)) / 2.0)
}

/// Random simple undirected graph with `labels` node labels and attribute
/// widths `q_v` / `q_e`.
pub fn arb_graph(max_nodes: usize, labels: u32, q_v: usize, q_e: usize) -> impl Strategy<Value = Graph> {
    (1..=max_nodes)
        .prop_flat_map(move |n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (
                proptest::collection::vec(0..labels, n),
                proptest::collection::vec(proptest::collection::vec(-5i32..5, q_v), n),
                proptest::collection::vec((any::<bool>(), proptest::collection::vec(0i32..4, q_e)), m),
                Just(pairs),
            )
        })
        .prop_map(|(node_labels, attrs, edge_draws, pairs)| {
            let node_attrs = attrs
                .into_iter()
                .map(|a| a.into_iter().map(f64::from).collect())
                .collect();
            let edges = pairs
                .into_iter()
                .zip(edge_draws)
                .filter(|(_, (keep, _))| *keep)
                .map(|((u, v), (_, a))| (u, v, a.into_iter().map(f64::from).collect()))
                .collect::<Vec<_>>();
            Graph::from_edges(node_labels, node_attrs, edges).unwrap()
        })
}

/// A label sequence read off a random walk in `g`, so it usually occurs.
pub fn walk_labels(g: &Graph, start: usize, steps: &[usize]) -> Vec<LabelId> {
    let mut v = start % g.node_count();
    let mut labels = vec![g.label(v)];
    for &s in steps {
        let nb = g.neighbors(v).unwrap();
        if nb.is_empty() {
            break;
        }
        v = nb[s % nb.len()];
        labels.push(g.label(v));
    }
    labels
}
