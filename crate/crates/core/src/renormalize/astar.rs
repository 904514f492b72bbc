//! A* routing between the structures of two neighboring boxes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Coord, GraphState, NodeId};
use crate::lattice::{manhattan, FaultyInstance};
use crate::renormalize::Structure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PathStatus {
    Realized,
    Failed,
}

impl PathStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PathStatus::Realized => "realized",
            PathStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "realized" => Some(PathStatus::Realized),
            "failed" => Some(PathStatus::Failed),
            _ => None,
        }
    }
}

/// Outcome of routing one coarse bond.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    /// Coarse endpoints, lower first.
    pub bond: (Coord, Coord),
    pub status: PathStatus,
    /// Center to center, inclusive; empty when the bond failed.
    pub nodes: Vec<NodeId>,
    /// Edge count of `nodes`.
    pub length: usize,
}

impl PathRecord {
    pub fn failed(bond: (Coord, Coord)) -> Self {
        PathRecord {
            bond,
            status: PathStatus::Failed,
            nodes: Vec::new(),
            length: 0,
        }
    }

    pub fn is_realized(&self) -> bool {
        self.status == PathStatus::Realized
    }

    /// Everything strictly between the two centers.
    pub fn interior(&self) -> &[NodeId] {
        if self.nodes.len() < 2 {
            &[]
        } else {
            &self.nodes[1..self.nodes.len() - 1]
        }
    }
}

/// Fine nodes owned by already realized paths.
///
/// A handle is retired once a path runs through it, so a handle is free
/// exactly when it is unclaimed.
#[derive(Clone, Debug)]
pub struct Claims {
    claimed: Vec<bool>,
}

impl Claims {
    pub fn new(node_count: usize) -> Self {
        Claims {
            claimed: vec![false; node_count],
        }
    }

    pub fn is_claimed(&self, index: usize) -> bool {
        self.claimed[index]
    }

    pub fn is_retired(&self, g: &GraphState, handle: &NodeId) -> bool {
        g.index_of(handle).is_some_and(|i| self.claimed[i])
    }

    pub fn claimed_count(&self) -> usize {
        self.claimed.iter().filter(|&&c| c).count()
    }

    /// Claimed, or adjacent to a claimed node.
    fn blocked(&self, g: &GraphState, index: usize) -> bool {
        self.claimed[index] || g.neighbors(index).iter().any(|&j| self.claimed[j as usize])
    }

    pub(crate) fn commit(&mut self, g: &GraphState, record: &PathRecord) {
        for node in record.interior() {
            let i = g.index_of(node).expect("path node in graph");
            self.claimed[i] = true;
        }
    }

    pub(crate) fn as_slice(&self) -> &[bool] {
        &self.claimed
    }
}

/// Search endpoints resolved to graph indices.
struct Anchor {
    center: u32,
    handles: [u32; 4],
}

impl Anchor {
    fn resolve(g: &GraphState, s: &Structure) -> Self {
        let idx = |n: &NodeId| g.index_of(n).expect("structure node in graph") as u32;
        Anchor {
            center: idx(&s.center),
            handles: [
                idx(&s.handles[0]),
                idx(&s.handles[1]),
                idx(&s.handles[2]),
                idx(&s.handles[3]),
            ],
        }
    }
}

fn coarse_axis(a: Coord, b: Coord) -> Option<usize> {
    let diff: Vec<usize> = (0..3).filter(|&k| a[k] != b[k]).collect();
    (diff.len() == 1 && (a[diff[0]] - b[diff[0]]).abs() == 1).then(|| diff[0])
}

/// Dense local numbering of the nodes in two boxes.
struct Scope {
    first: Range<usize>,
    second: Range<usize>,
}

impl Scope {
    fn len(&self) -> usize {
        self.first.len() + self.second.len()
    }

    fn local(&self, i: usize) -> Option<usize> {
        if self.first.contains(&i) {
            Some(i - self.first.start)
        } else if self.second.contains(&i) {
            Some(i - self.second.start + self.first.len())
        } else {
            None
        }
    }
}

const UNSEEN: u32 = u32::MAX;

/// Route from `from.center` to `to.center` without touching `claims`.
///
/// The first step must enter an unused handle of `from` and the last step
/// must leave an unused handle of `to`. Interior nodes stay inside the two
/// boxes, avoid claimed nodes and their neighbors, and never touch either
/// center except through those handles. Edge cost is 1 and the heuristic is
/// the Manhattan distance of fine positions; on equal f the deeper entry is
/// expanded first, then the lower node.
pub(crate) fn search_path(
    instance: &FaultyInstance,
    claims: &Claims,
    from: &Structure,
    to: &Structure,
) -> Result<PathRecord> {
    let (c_from, c_to) = (from.center.box_coord, to.center.box_coord);
    if coarse_axis(c_from, c_to).is_none() {
        return Err(Error::Contract(format!(
            "boxes {c_from:?} and {c_to:?} are not coarse neighbors"
        )));
    }
    let bond = if c_from < c_to {
        (c_from, c_to)
    } else {
        (c_to, c_from)
    };
    let g = instance.graph();
    let start = Anchor::resolve(g, from);
    let goal = Anchor::resolve(g, to);
    let goal_pos = g.node(goal.center as usize).pos;
    let near_start = g.neighbors(start.center as usize);
    let near_goal = g.neighbors(goal.center as usize);
    let scope = Scope {
        first: g.box_range(c_from),
        second: g.box_range(c_to),
    };

    let n = scope.len();
    let mut best = vec![UNSEEN; n];
    let mut parent = vec![UNSEEN; n];
    let mut closed = vec![false; n];
    let mut is_goal = vec![false; n];
    let mut open = BinaryHeap::new();
    let usable = |i: usize| scope.local(i).is_some() && !claims.blocked(g, i);
    let h = |i: usize| manhattan(g.node(i).pos, goal_pos);

    for &handle in &start.handles {
        let i = handle as usize;
        if !usable(i) || near_goal.contains(&handle) {
            continue;
        }
        let li = scope.local(i).expect("in scope");
        best[li] = 1;
        parent[li] = start.center;
        open.push(Reverse((1 + h(i), h(i), handle)));
    }

    let mut last = None;
    while let Some(Reverse((_, _, node))) = open.pop() {
        let u = node as usize;
        let lu = scope.local(u).expect("in scope");
        if closed[lu] {
            continue;
        }
        closed[lu] = true;
        if is_goal[lu] {
            last = Some(u);
            break;
        }
        for &next in g.neighbors(u) {
            if next == start.center || next == goal.center || near_start.contains(&next) {
                continue;
            }
            let reaches_goal = near_goal.contains(&next);
            if reaches_goal && !goal.handles.contains(&next) {
                continue;
            }
            let v = next as usize;
            if !usable(v) {
                continue;
            }
            let lv = scope.local(v).expect("in scope");
            let cost = best[lu] + 1;
            if closed[lv] || cost >= best[lv] {
                continue;
            }
            best[lv] = cost;
            parent[lv] = node;
            is_goal[lv] = reaches_goal;
            open.push(Reverse((cost + h(v), h(v), next)));
        }
    }

    let Some(end) = last else {
        return Ok(PathRecord::failed(bond));
    };
    let mut path = vec![goal.center, end as u32];
    let mut cursor = end;
    while cursor != start.center as usize {
        let p = parent[scope.local(cursor).expect("in scope")];
        path.push(p);
        cursor = p as usize;
    }
    path.reverse();
    remove_chords(g, &mut path);
    let nodes: Vec<NodeId> = path.iter().map(|&i| g.node(i as usize)).collect();
    Ok(PathRecord {
        bond,
        status: PathStatus::Realized,
        length: nodes.len() - 1,
        nodes,
    })
}

/// Splice out detours between interior nodes that are directly adjacent.
///
/// Only non-local edges can leave chords behind; on plain lattice graphs the
/// search already returns an induced path.
fn remove_chords(g: &GraphState, path: &mut Vec<u32>) {
    'restart: loop {
        let last = path.len() - 1;
        for i in 1..last {
            for j in (i + 2..last).rev() {
                if g.has_edge(path[i] as usize, path[j] as usize) {
                    path.drain(i + 1..j);
                    continue 'restart;
                }
            }
        }
        break;
    }
}

/// Route one bond and claim the interior on success.
pub fn find_path(
    instance: &FaultyInstance,
    claims: &mut Claims,
    from: &Structure,
    to: &Structure,
) -> Result<PathRecord> {
    let record = search_path(instance, claims, from, to)?;
    claims.commit(instance.graph(), &record);
    Ok(record)
}
