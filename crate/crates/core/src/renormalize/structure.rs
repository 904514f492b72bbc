use serde::{Deserialize, Serialize};

use crate::graph::{Coord, NodeId};
use crate::lattice::FaultyInstance;

/// Axis normal to the plane spanned by a structure's handles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    X,
    Y,
    Z,
}

impl Orientation {
    fn from_axis(axis: usize) -> Self {
        match axis {
            0 => Orientation::X,
            1 => Orientation::Y,
            _ => Orientation::Z,
        }
    }
}

/// A center qubit with its four intact neighbors, all inside one box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub center: NodeId,
    pub handles: [NodeId; 4],
    pub orientation: Orientation,
    /// Sum of the handles' graph degrees.
    pub score: usize,
}

/// Every placement of a structure inside `box_coord`, in center order.
///
/// A candidate center needs all four of its lattice neighbors inside the box
/// with intact bonds. Centers with a non-local edge leaving the box are
/// skipped: two centers must never be joined by a stray edge.
pub fn enumerate_structures(instance: &FaultyInstance, box_coord: Coord) -> Vec<Structure> {
    let g = instance.graph();
    let geometry = instance.geometry();
    let mut out = Vec::new();
    'nodes: for i in g.box_range(box_coord) {
        let center = g.node(i);
        if g.degree(i) < 4 {
            continue;
        }
        let mut handles = [center; 4];
        let mut count = 0;
        for q in geometry.ideal_neighbors(center.pos) {
            if count == 4 {
                continue 'nodes;
            }
            let Some(j) = instance.index_at(q) else {
                continue 'nodes;
            };
            let handle = g.node(j);
            if handle.box_coord != box_coord || !g.has_edge(i, j) {
                continue 'nodes;
            }
            handles[count] = handle;
            count += 1;
        }
        if count != 4 {
            continue;
        }
        if g.neighbors(i)
            .iter()
            .any(|&j| g.node(j as usize).box_coord != box_coord)
        {
            continue;
        }
        handles.sort();
        let normal = (0..3)
            .find(|&a| handles.iter().all(|h| h.pos[a] == center.pos[a]))
            .expect("handles span two axes");
        let score = handles
            .iter()
            .map(|h| g.degree(g.index_of(h).expect("handle in graph")))
            .sum();
        out.push(Structure {
            center,
            handles,
            orientation: Orientation::from_axis(normal),
            score,
        });
    }
    out
}

/// Candidate whose handles have the most graph neighbors; ties go to the
/// lowest center.
pub fn select_structure(instance: &FaultyInstance, box_coord: Coord) -> Option<Structure> {
    let mut best: Option<Structure> = None;
    for s in enumerate_structures(instance, box_coord) {
        if best.as_ref().is_none_or(|b| s.score > b.score) {
            best = Some(s);
        }
    }
    best
}
