//! Combinatorial graph states and the Pauli measurement rewrite rules.
//!
//! A graph state is tracked purely as its graph. Measuring a qubit in the
//! `Z` basis deletes it; measuring in the `Y` basis locally complements the
//! graph at that qubit and then deletes it. Local Clifford by-products of the
//! measurements are not tracked, only the resulting topology.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer 3D coordinate, `[x, y, z]`.
pub type Coord = [i32; 3];

/// Address of a single qubit.
///
/// Identity and ordering are given by `(box_coord, local)`; `pos` is the fine
/// lattice position, which those two determine for a fixed box size.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NodeId {
    pub box_coord: Coord,
    pub local: u32,
    pub pos: Coord,
}

impl NodeId {
    /// Address the qubit at fine position `pos` with boxes of edge `box_size`.
    pub fn from_pos(pos: Coord, box_size: u32) -> Self {
        let b = box_size as i32;
        let box_coord = [
            pos[0].div_euclid(b),
            pos[1].div_euclid(b),
            pos[2].div_euclid(b),
        ];
        let rel = [
            (pos[0] - box_coord[0] * b) as u32,
            (pos[1] - box_coord[1] * b) as u32,
            (pos[2] - box_coord[2] * b) as u32,
        ];
        let local = (rel[0] * box_size + rel[1]) * box_size + rel[2];
        NodeId {
            box_coord,
            local,
            pos,
        }
    }

    /// Inverse of [`NodeId::from_pos`].
    pub fn from_parts(box_coord: Coord, local: u32, box_size: u32) -> Option<Self> {
        let b = box_size;
        if b == 0 || local >= b * b * b {
            return None;
        }
        let rel = [local / (b * b), (local / b) % b, local % b];
        let bi = b as i32;
        let pos = [
            box_coord[0] * bi + rel[0] as i32,
            box_coord[1] * bi + rel[1] as i32,
            box_coord[2] * bi + rel[2] as i32,
        ];
        Some(NodeId {
            box_coord,
            local,
            pos,
        })
    }

    fn key(&self) -> (Coord, u32) {
        (self.box_coord, self.local)
    }
}

impl PartialEq for NodeId {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for NodeId {}

impl Hash for NodeId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for NodeId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NodeId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.box_coord;
        write!(f, "{x},{y},{z}:{}", self.local)
    }
}

/// Undirected simple graph over [`NodeId`]s, stored in compressed sparse rows.
///
/// Nodes are kept sorted, so node indices follow the `NodeId` order and all
/// qubits of one box occupy a contiguous index range. Neighbor lists are
/// sorted, which makes structural equality a plain field comparison.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphState {
    nodes: Vec<NodeId>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl GraphState {
    pub fn empty() -> Self {
        GraphState {
            nodes: Vec::new(),
            offsets: vec![0],
            targets: Vec::new(),
        }
    }

    /// Build a graph from a node set and an edge list.
    ///
    /// Duplicate edges collapse; self-loops and edges with an endpoint
    /// outside the node set are rejected.
    pub fn from_edges<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut pairs = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Contract(format!("self-loop at {a}")));
            }
            let ia = nodes.binary_search(&a).map_err(|_| Error::UnknownNode(a))?;
            let ib = nodes.binary_search(&b).map_err(|_| Error::UnknownNode(b))?;
            pairs.push((ia as u32, ib as u32));
        }
        Ok(Self::from_index_pairs(nodes, pairs))
    }

    /// `nodes` must be sorted and unique; pairs index into it.
    pub(crate) fn from_index_pairs(nodes: Vec<NodeId>, pairs: Vec<(u32, u32)>) -> Self {
        let n = nodes.len();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (a, b) in pairs {
            lists[a as usize].push(b);
            lists[b as usize].push(a);
        }
        Self::from_lists(nodes, lists)
    }

    /// `nodes` must be sorted and unique; `lists[i]` holds the neighbors of
    /// node `i` and must be symmetric.
    pub(crate) fn from_lists(nodes: Vec<NodeId>, mut lists: Vec<Vec<u32>>) -> Self {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in lists.iter_mut() {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        GraphState {
            nodes,
            offsets,
            targets,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> NodeId {
        self.nodes[index]
    }

    pub fn index_of(&self, node: &NodeId) -> Option<usize> {
        self.nodes.binary_search(node).ok()
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.index_of(node).is_some()
    }

    pub fn neighbors(&self, index: usize) -> &[u32] {
        &self.targets[self.offsets[index]..self.offsets[index + 1]]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.offsets[index + 1] - self.offsets[index]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    pub fn adjacent(&self, a: &NodeId, b: &NodeId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(ia), Some(ib)) => self.has_edge(ia, ib),
            _ => false,
        }
    }

    /// Index range of the nodes addressed inside `box_coord`.
    pub fn box_range(&self, box_coord: Coord) -> std::ops::Range<usize> {
        let start = self.nodes.partition_point(|n| n.box_coord < box_coord);
        let end = self.nodes.partition_point(|n| n.box_coord <= box_coord);
        start..end
    }

    /// Edges as index pairs `(a, b)` with `a < b`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nodes.len()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .map(|&b| b as usize)
                .filter(move |&b| b > a)
                .map(move |b| (a, b))
        })
    }

    pub fn edge_list(&self) -> Vec<(NodeId, NodeId)> {
        self.edges()
            .map(|(a, b)| (self.nodes[a], self.nodes[b]))
            .collect()
    }

    /// Subgraph induced on the nodes for which `keep` holds.
    pub fn induced<F: Fn(usize) -> bool>(&self, keep: F) -> GraphState {
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, slot) in remap.iter_mut().enumerate() {
            if keep(i) {
                *slot = nodes.len() as u32;
                nodes.push(self.nodes[i]);
            }
        }
        let mut lists = vec![Vec::new(); nodes.len()];
        for (i, &r) in remap.iter().enumerate() {
            if r == u32::MAX {
                continue;
            }
            for &j in self.neighbors(i) {
                let rj = remap[j as usize];
                if rj != u32::MAX {
                    lists[r as usize].push(rj);
                }
            }
        }
        Self::from_lists(nodes, lists)
    }

    fn require(&self, node: &NodeId) -> Result<usize> {
        self.index_of(node).ok_or(Error::UnknownNode(*node))
    }
}

/// Mutable adjacency-set view used while applying a sequence of rewrites.
struct WorkGraph {
    nodes: Vec<NodeId>,
    adj: Vec<BTreeSet<u32>>,
    alive: Vec<bool>,
}

impl WorkGraph {
    fn new(g: &GraphState) -> Self {
        WorkGraph {
            nodes: g.nodes.clone(),
            adj: (0..g.node_count())
                .map(|i| g.neighbors(i).iter().copied().collect())
                .collect(),
            alive: vec![true; g.node_count()],
        }
    }

    fn delete(&mut self, a: usize) {
        let neigh = std::mem::take(&mut self.adj[a]);
        for b in neigh {
            self.adj[b as usize].remove(&(a as u32));
        }
        self.alive[a] = false;
    }

    fn complement_at(&mut self, a: usize) {
        let neigh: Vec<u32> = self.adj[a].iter().copied().collect();
        for (k, &u) in neigh.iter().enumerate() {
            for &w in &neigh[k + 1..] {
                if self.adj[u as usize].remove(&w) {
                    self.adj[w as usize].remove(&u);
                } else {
                    self.adj[u as usize].insert(w);
                    self.adj[w as usize].insert(u);
                }
            }
        }
    }

    fn measure_y(&mut self, a: usize) {
        self.complement_at(a);
        self.delete(a);
    }

    fn finish(self) -> GraphState {
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if self.alive[i] {
                remap[i] = nodes.len() as u32;
                nodes.push(*node);
            }
        }
        let lists = self
            .adj
            .iter()
            .enumerate()
            .filter(|(i, _)| self.alive[*i])
            .map(|(_, set)| set.iter().map(|&j| remap[j as usize]).collect())
            .collect();
        GraphState::from_lists(nodes, lists)
    }
}

/// `Z`-basis measurement: remove `a` together with all its edges.
pub fn measure_z(g: &GraphState, a: &NodeId) -> Result<GraphState> {
    let ia = g.require(a)?;
    Ok(g.induced(|i| i != ia))
}

/// `Y`-basis measurement: locally complement at `a`, then remove `a`.
pub fn measure_y(g: &GraphState, a: &NodeId) -> Result<GraphState> {
    let ia = g.require(a)?;
    let mut work = WorkGraph::new(g);
    work.measure_y(ia);
    Ok(work.finish())
}

/// Contract a chain by `Y`-measuring its interior in path order, leaving a
/// direct edge between the two endpoints.
///
/// The path must be simple, consecutive entries adjacent, and every interior
/// node must have degree exactly 2.
pub fn contract_path(g: &GraphState, path: &[NodeId]) -> Result<GraphState> {
    if path.len() < 2 {
        return Err(Error::Contract("a path needs at least two nodes".into()));
    }
    let idx = path
        .iter()
        .map(|n| g.require(n))
        .collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<usize> = idx.iter().copied().collect();
    if distinct.len() != idx.len() {
        return Err(Error::Contract("path revisits a node".into()));
    }
    for w in idx.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(Error::Contract(format!(
                "{} and {} are not adjacent",
                g.node(w[0]),
                g.node(w[1])
            )));
        }
    }
    for &i in &idx[1..idx.len() - 1] {
        if g.degree(i) != 2 {
            return Err(Error::Contract(format!(
                "interior node {} has degree {}",
                g.node(i),
                g.degree(i)
            )));
        }
    }
    let mut work = WorkGraph::new(g);
    for &i in &idx[1..idx.len() - 1] {
        work.measure_y(i);
    }
    Ok(work.finish())
}

/// Measurement basis assigned to one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    MeasureZ,
    MeasureY,
    Keep,
}

impl Basis {
    pub fn letter(self) -> char {
        match self {
            Basis::MeasureZ => 'Z',
            Basis::MeasureY => 'Y',
            Basis::Keep => 'K',
        }
    }

    pub fn from_letter(c: &str) -> Option<Self> {
        match c {
            "Z" => Some(Basis::MeasureZ),
            "Y" => Some(Basis::MeasureY),
            "K" => Some(Basis::Keep),
            _ => None,
        }
    }
}

/// Total assignment of a measurement basis to every node of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasurementPlan {
    entries: Vec<(NodeId, Basis)>,
}

impl MeasurementPlan {
    pub fn from_entries<I: IntoIterator<Item = (NodeId, Basis)>>(entries: I) -> Result<Self> {
        let mut entries: Vec<(NodeId, Basis)> = entries.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Contract(format!("node {} assigned twice", w[0].0)));
        }
        Ok(MeasurementPlan { entries })
    }

    /// Entries must already be sorted by node and unique.
    pub(crate) fn from_sorted(entries: Vec<(NodeId, Basis)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        MeasurementPlan { entries }
    }

    pub fn get(&self, node: &NodeId) -> Option<Basis> {
        self.entries
            .binary_search_by(|e| e.0.cmp(node))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn set(&mut self, node: &NodeId, basis: Basis) -> Result<()> {
        let i = self
            .entries
            .binary_search_by(|e| e.0.cmp(node))
            .map_err(|_| Error::UnknownNode(*node))?;
        self.entries[i].1 = basis;
        Ok(())
    }

    pub fn entries(&self) -> &[(NodeId, Basis)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, basis: Basis) -> usize {
        self.entries.iter().filter(|e| e.1 == basis).count()
    }

    pub fn nodes_with(&self, basis: Basis) -> impl Iterator<Item = &NodeId> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.1 == basis)
            .map(|e| &e.0)
    }
}

/// Apply a whole measurement plan: every `Z` first, then every `Y` in
/// ascending node order. The result is the graph on the `Keep` nodes.
pub fn reduce_by_plan(g: &GraphState, plan: &MeasurementPlan) -> Result<GraphState> {
    if plan.len() != g.node_count() {
        // Either a node is missing from the plan or the plan names a node
        // outside the graph; report whichever comes first.
        for (node, _) in plan.entries() {
            g.require(node)?;
        }
        for node in g.nodes() {
            if plan.get(node).is_none() {
                return Err(Error::Contract(format!("plan has no entry for {node}")));
            }
        }
    }
    let mut basis = Vec::with_capacity(g.node_count());
    for ((node, b), gnode) in plan.entries().iter().zip(g.nodes()) {
        if node != gnode {
            return Err(Error::Contract(format!(
                "plan and graph disagree at {gnode}"
            )));
        }
        basis.push(*b);
    }
    // All Z measurements commute, so they are applied in bulk.
    let survivors = g.induced(|i| basis[i] != Basis::MeasureZ);
    let mut work = WorkGraph::new(&survivors);
    for i in 0..survivors.node_count() {
        let node = survivors.node(i);
        if plan.get(&node) == Some(Basis::MeasureY) {
            work.measure_y(i);
        }
    }
    Ok(work.finish())
}
