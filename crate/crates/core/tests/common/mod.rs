//! Rewrite-rule properties shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use proptest::sample::{subsequence, Index};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use raussendorf_purify::graph::{
    measure_y, measure_z, reduce_by_plan, Basis, GraphState, MeasurementPlan, NodeId,
};
use raussendorf_purify::lattice::{generate_faulty, GenModel, LatticeGeometry};

pub const CASES: u32 = 1000;

pub fn node(i: usize) -> NodeId {
    NodeId::from_pos([i as i32, 0, 0], 64)
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> GraphState {
    GraphState::from_edges(
        (0..n).map(node),
        edges.iter().map(|&(a, b)| (node(a), node(b))),
    )
    .unwrap()
}

fn edge_set(g: &GraphState) -> BTreeSet<(NodeId, NodeId)> {
    g.edge_list().into_iter().collect()
}

pub type SmallGraph = (usize, Vec<(usize, usize)>);

/// Random simple graph on at most `max` nodes.
pub fn any_graph(max: usize) -> impl Strategy<Value = SmallGraph> {
    (2..=max).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let len = pairs.len();
        (Just(n), subsequence(pairs, 0..=len))
    })
}

/// Random bipartite graph: even nodes on one side, odd on the other.
pub fn bipartite_graph(max: usize) -> impl Strategy<Value = SmallGraph> {
    (2..=max).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|(a, b)| (a + b) % 2 == 1)
            .collect();
        let len = pairs.len();
        (Just(n), subsequence(pairs, 0..=len))
    })
}

fn shuffled(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

pub fn two_colorable(g: &GraphState) -> bool {
    let mut color = vec![u8::MAX; g.node_count()];
    for s in 0..g.node_count() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                let v = v as usize;
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    queue.push_back(v);
                } else if color[v] == color[u] {
                    return false;
                }
            }
        }
    }
    true
}

pub type ZCase = (SmallGraph, Vec<Index>, Vec<usize>);

pub fn z_case() -> impl Strategy<Value = ZCase> {
    (any_graph(12), any::<Vec<Index>>(), shuffled(12))
}

/// Any two orders of the same Z measurements give the same graph; each one
/// removes a node and adds no edge.
pub fn z_commute(((n, edges), picks, perm): ZCase) -> Result<(), TestCaseError> {
    let g = graph(n, &edges);
    let mut targets: Vec<usize> = picks.iter().map(|p| p.index(n)).collect();
    targets.sort_unstable();
    targets.dedup();
    let mut forward = g.clone();
    for &t in &targets {
        let next = measure_z(&forward, &node(t)).unwrap();
        prop_assert_eq!(next.node_count(), forward.node_count() - 1);
        prop_assert!(edge_set(&next).is_subset(&edge_set(&forward)));
        forward = next;
    }
    let mut backward = g;
    for t in perm.into_iter().filter(|k| targets.contains(k)) {
        backward = measure_z(&backward, &node(t)).unwrap();
    }
    prop_assert_eq!(forward, backward);
    Ok(())
}

pub type ChainCase = (SmallGraph, usize, Vec<usize>);

pub fn chain_case() -> impl Strategy<Value = ChainCase> {
    (any_graph(8), 1usize..7, shuffled(6))
}

/// A chain hung between nodes 0 and 1 of a random graph contracts to the
/// single edge 0-1 whatever order its interior is measured in.
pub fn y_chain(((n, edges), len, perm): ChainCase) -> Result<(), TestCaseError> {
    let mut all: Vec<(usize, usize)> = edges.into_iter().filter(|&e| e != (0, 1)).collect();
    let chain: Vec<usize> = (n..n + len).collect();
    let mut prev = 0;
    for &c in &chain {
        all.push((prev.min(c), prev.max(c)));
        prev = c;
    }
    all.push((1, prev));
    let g = graph(n + len, &all);
    let mut reduced = g.clone();
    for k in perm.into_iter().filter(|&k| k < len) {
        reduced = measure_y(&reduced, &node(chain[k])).unwrap();
    }
    let mut expected: BTreeSet<(NodeId, NodeId)> = edge_set(&g)
        .into_iter()
        .filter(|(a, b)| a.pos[0] < n as i32 && b.pos[0] < n as i32)
        .collect();
    expected.insert((node(0), node(1)));
    prop_assert_eq!(edge_set(&reduced), expected);
    prop_assert_eq!(reduced.node_count(), n);
    Ok(())
}

pub type StarCase = (SmallGraph, Index);

pub fn star_case() -> impl Strategy<Value = StarCase> {
    (bipartite_graph(12), any::<Index>())
}

/// Y on a node of a bipartite graph joins all of its neighbors pairwise and
/// touches nothing else.
pub fn star_clique(((n, edges), pick): StarCase) -> Result<(), TestCaseError> {
    let g = graph(n, &edges);
    let c = node(pick.index(n));
    let leaves: Vec<NodeId> = g
        .neighbors(g.index_of(&c).unwrap())
        .iter()
        .map(|&j| g.node(j as usize))
        .collect();
    let out = measure_y(&g, &c).unwrap();
    let mut expected: BTreeSet<(NodeId, NodeId)> = edge_set(&g)
        .into_iter()
        .filter(|(a, b)| *a != c && *b != c)
        .collect();
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            prop_assert!(!g.adjacent(a, b));
            expected.insert((*a, *b));
        }
    }
    prop_assert_eq!(edge_set(&out), expected);
    Ok(())
}

pub type LatticeCase = ([i32; 3], f64, u64);

pub fn lattice_case() -> impl Strategy<Value = LatticeCase> {
    (prop::array::uniform3(3i32..7), 0.0f64..1.0, any::<u64>())
}

pub fn independent_bipartite((dims, p, seed): LatticeCase) -> Result<(), TestCaseError> {
    let geometry = LatticeGeometry::new(dims, 4).unwrap();
    let inst = generate_faulty(&geometry, &GenModel::independent(p, seed)).unwrap();
    prop_assert!(two_colorable(inst.graph()));
    Ok(())
}

pub type PlanCase = (SmallGraph, Vec<u8>);

pub fn plan_case() -> impl Strategy<Value = PlanCase> {
    (any_graph(10), prop::collection::vec(0u8..3, 10))
}

pub fn kept_nodes_survive(((n, edges), letters): PlanCase) -> Result<(), TestCaseError> {
    let g = graph(n, &edges);
    let entries = (0..n).map(|i| {
        let basis = [Basis::MeasureZ, Basis::MeasureY, Basis::Keep][letters[i] as usize];
        (node(i), basis)
    });
    let plan = MeasurementPlan::from_entries(entries).unwrap();
    let out = reduce_by_plan(&g, &plan).unwrap();
    let kept: Vec<NodeId> = plan.nodes_with(Basis::Keep).copied().collect();
    prop_assert_eq!(out.nodes().to_vec(), kept);
    Ok(())
}

/// Run one property for [`CASES`] cases; returns the failure, if any.
pub fn run<S: Strategy>(
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}
