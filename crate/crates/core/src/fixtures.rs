//! Small synthetic datasets with known structure, used by the test suites and
//! handy for smoke-testing bindings.

use rand::Rng;

use crate::anchors::AnchorConfig;
use crate::boosting::BoostConfig;
use crate::eval::stream_rng;
use crate::features::AttributeMode;
use crate::graph::{Dataset, Graph, LabelAlphabet, LabelId, Task};

/// A dataset together with a training configuration suited to its size.
pub struct Fixture {
    pub name: &'static str,
    pub dataset: Dataset,
    pub config: BoostConfig,
    pub anchor: AnchorConfig,
}

fn alphabet(names: &[&str]) -> LabelAlphabet {
    LabelAlphabet::new(names.iter().map(|s| s.to_string()).collect())
}

fn graph(labels: &[LabelId], edges: &[(usize, usize)]) -> Graph {
    let attrs = vec![Vec::new(); labels.len()];
    Graph::from_edges(labels.to_vec(), attrs, edges.iter().map(|&(u, v)| (u, v, Vec::new())))
        .expect("fixture graph is valid")
}

fn small_config(task: Task, m_stop: usize, eta: f64) -> BoostConfig {
    BoostConfig {
        m_stop,
        eta,
        task,
        max_depth: 2,
        min_leaf: 1,
        ..BoostConfig::default()
    }
}

/// Eight tiny graphs over labels A, B, C; `y = 1` exactly when a B node is present.
pub fn label_presence() -> Fixture {
    const A: LabelId = 0;
    const B: LabelId = 1;
    const C: LabelId = 2;
    let graphs = vec![
        graph(&[A, B], &[(0, 1)]),
        graph(&[A, B, C], &[(0, 1), (1, 2)]),
        graph(&[C, B, A, A], &[(0, 1), (1, 2), (2, 3)]),
        graph(&[B, C, C], &[(0, 1), (0, 2)]),
        graph(&[A, C], &[(0, 1)]),
        graph(&[A, A, C], &[(0, 1), (1, 2)]),
        graph(&[C, C, A, A], &[(0, 1), (1, 2), (2, 3), (3, 0)]),
        graph(&[A, C, C], &[(0, 1), (0, 2)]),
    ];
    let targets = vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let dataset = Dataset::new("label_presence", Task::Classification, graphs, targets, alphabet(&["A", "B", "C"]), 0, 0)
        .expect("fixture is valid");
    Fixture {
        name: "label_presence",
        dataset,
        config: small_config(Task::Classification, 25, 0.3),
        anchor: AnchorConfig::default(),
    }
}

/// Random labelled graph: a random tree plus a few chords.
fn random_graph<R: Rng>(rng: &mut R, n: usize, labels: u32, q_v: usize, q_e: usize) -> (Vec<LabelId>, Vec<Vec<f64>>, Vec<(usize, usize, Vec<f64>)>) {
    let node_labels: Vec<LabelId> = (0..n).map(|_| rng.gen_range(0..labels)).collect();
    let node_attrs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..q_v).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut edges = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, (0..q_e).map(|_| rng.gen_range(0.0..1.0)).collect()));
    }
    for _ in 0..n / 3 {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let e = (u.min(v), u.max(v));
        if u != v && seen.insert(e) {
            edges.push((e.0, e.1, (0..q_e).map(|_| rng.gen_range(0.0..1.0)).collect()));
        }
    }
    (node_labels, node_attrs, edges)
}

/// Random labelled graphs with `q_v = 2`, `q_e = 1` where the class is the
/// presence of a C-N bond, with a little label noise. Not separable by counts
/// of single labels alone.
pub fn random_molecules(count: usize, seed: u64) -> Fixture {
    let mut rng = stream_rng(seed, 0);
    let names = ["C", "N", "O", "S"];
    let mut graphs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for i in 0..count {
        let n = rng.gen_range(4..12);
        let (labels, attrs, edges) = random_graph(&mut rng, n, names.len() as u32, 2, 1);
        let bond = edges
            .iter()
            .any(|&(u, v, _)| matches!((labels[u], labels[v]), (0, 1) | (1, 0)));
        let mut y = if bond { 1.0 } else { 0.0 };
        if rng.gen_bool(0.05) {
            y = 1.0 - y;
        }
        // keep both classes present whatever the draw
        if i == 0 {
            y = 0.0;
        } else if i == 1 {
            y = 1.0;
        }
        graphs.push(Graph::from_edges(labels, attrs, edges).expect("random graph is valid"));
        targets.push(y);
    }
    let dataset = Dataset::new("random_molecules", Task::Classification, graphs, targets, alphabet(&names), 2, 1)
        .expect("fixture is valid");
    Fixture {
        name: "random_molecules",
        dataset,
        config: small_config(Task::Classification, 40, 0.3),
        anchor: AnchorConfig::default(),
    }
}

/// Two classes separated by the number of N atoms: class 1 graphs carry two
/// N nodes, class 0 graphs none.
pub fn separable(count: usize, seed: u64) -> Fixture {
    let mut rng = stream_rng(seed, 1);
    let mut graphs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for i in 0..count {
        let y = (i % 2) as f64;
        let n = rng.gen_range(4..9);
        let (mut labels, attrs, edges) = random_graph(&mut rng, n, 1, 0, 0);
        if y == 1.0 {
            labels[0] = 1;
            labels[n - 1] = 1;
        }
        graphs.push(Graph::from_edges(labels, attrs, edges).expect("random graph is valid"));
        targets.push(y);
    }
    let dataset = Dataset::new("separable", Task::Classification, graphs, targets, alphabet(&["C", "N"]), 0, 0)
        .expect("fixture is valid");
    Fixture {
        name: "separable",
        dataset,
        config: small_config(Task::Classification, 30, 0.3),
        anchor: AnchorConfig::default(),
    }
}

/// Regression target driven by the attributes of C-O bonds, so attribute
/// features carry signal that counts alone do not.
pub fn attributed_regression(count: usize, seed: u64) -> Fixture {
    let mut rng = stream_rng(seed, 2);
    let names = ["C", "O", "H"];
    let mut graphs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for _ in 0..count {
        let n = rng.gen_range(4..10);
        let (labels, attrs, edges) = random_graph(&mut rng, n, names.len() as u32, 1, 1);
        let mut y = 0.0;
        for (u, v, e) in &edges {
            if matches!((labels[*u], labels[*v]), (0, 1) | (1, 0)) {
                y += e[0] + 0.5 * (attrs[*u][0] + attrs[*v][0]);
            }
        }
        y += rng.gen_range(-0.05..0.05);
        graphs.push(Graph::from_edges(labels, attrs, edges).expect("random graph is valid"));
        targets.push(y);
    }
    let dataset = Dataset::new("attributed_regression", Task::Regression, graphs, targets, alphabet(&names), 1, 1)
        .expect("fixture is valid");
    Fixture {
        name: "attributed_regression",
        dataset,
        config: BoostConfig {
            attribute_mode: AttributeMode::Complete,
            ..small_config(Task::Regression, 60, 0.2)
        },
        anchor: AnchorConfig::default(),
    }
}

/// Graphs without node labels whose first node attribute is a small integer
/// code (anchor candidate) and whose second is continuous.
pub fn attribute_coded(count: usize, seed: u64) -> Fixture {
    let mut rng = stream_rng(seed, 3);
    let mut graphs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for i in 0..count {
        let n = rng.gen_range(4..10);
        let (_, _, edges) = random_graph(&mut rng, n, 1, 0, 0);
        let mut codes: Vec<f64> = (0..n).map(|_| rng.gen_range(0..3) as f64).collect();
        let y = (i % 2) as f64;
        if y == 1.0 {
            codes[0] = 7.0;
        } else {
            codes.iter_mut().for_each(|c| {
                if *c == 7.0 {
                    *c = 0.0
                }
            });
        }
        let attrs: Vec<Vec<f64>> = codes.iter().map(|&c| vec![c, rng.gen_range(0.0..1.0)]).collect();
        graphs.push(Graph::from_edges(vec![0; n], attrs, edges).expect("random graph is valid"));
        targets.push(y);
    }
    let dataset = Dataset::new("attribute_coded", Task::Classification, graphs, targets, alphabet(&["0"]), 2, 0)
        .expect("fixture is valid")
        .with_node_labels_flag(false);
    Fixture {
        name: "attribute_coded",
        dataset,
        config: small_config(Task::Classification, 20, 0.3),
        anchor: AnchorConfig {
            categorical_threshold: 20,
            ..AnchorConfig::default()
        },
    }
}

/// `ds` with label names replaced by their identifiers, as the TUDataset
/// text layout needs numeric labels.
pub fn numeric_labels(ds: Dataset) -> Dataset {
    let names = (0..ds.alphabet().len()).map(|i| i.to_string()).collect();
    ds.with_alphabet(LabelAlphabet::new(names)).expect("same alphabet size")
}

/// Every bundled fixture.
pub fn all() -> Vec<Fixture> {
    vec![
        label_presence(),
        random_molecules(60, 11),
        separable(24, 5),
        attributed_regression(80, 17),
        attribute_coded(30, 23),
    ]
}

/// Identical graphs with mixed targets: no candidate path can split them.
pub fn constant_structure(count: usize) -> Dataset {
    let graphs = (0..count).map(|_| graph(&[0, 1, 0], &[(0, 1), (1, 2)])).collect();
    let targets = (0..count).map(|i| if i % 4 == 0 { 1.0 } else { 0.0 }).collect();
    Dataset::new("constant_structure", Task::Classification, graphs, targets, alphabet(&["C", "O"]), 0, 0)
        .expect("fixture is valid")
}

/// Random labelled graphs for oracle comparisons: up to `max_nodes` nodes,
/// `labels` distinct labels, no attributes.
pub fn random_graphs(count: usize, max_nodes: usize, labels: u32, seed: u64) -> Vec<Graph> {
    let mut rng = stream_rng(seed, 4);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_nodes);
            let (l, a, mut e) = random_graph(&mut rng, n, labels, 0, 0);
            // extra chords make cycles likely
            for _ in 0..n / 2 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v && !e.iter().any(|&(a, b, _)| (a, b) == (u.min(v), u.max(v))) {
                    e.push((u.min(v), u.max(v), Vec::new()));
                }
            }
            Graph::from_edges(l, a, e).expect("random graph is valid")
        })
        .collect()
}
