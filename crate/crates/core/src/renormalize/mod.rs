//! Box renormalization of a faulty lattice into a smaller Raussendorf
//! lattice.
//!
//! The fine lattice is cut into cubic boxes of edge `B`. Boxes at coarse
//! positions with one or two odd coordinates each host one [`Structure`];
//! the centers become the purified qubits. Every coarse bond is then routed
//! through its two boxes with A*, in canonical bond order. Path interiors are
//! measured in `Y`, centers are kept, everything else is measured in `Z`.

mod astar;
mod structure;

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

pub use astar::{find_path, Claims, PathRecord, PathStatus};
pub use structure::{enumerate_structures, select_structure, Orientation, Structure};

pub(crate) use astar::search_path;

use crate::error::{Error, Result};
use crate::graph::{Basis, Coord, GraphState, MeasurementPlan, NodeId};
use crate::lattice::{odd_count, FaultyInstance};

pub const MIN_BOX_SIZE: u32 = 6;

/// Partition of the fine lattice into boxes, with the coarse Raussendorf
/// roles of each box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxGrid {
    box_size: u32,
    coarse_dims: Coord,
}

/// A bond of the coarse lattice; `high = low + e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoarseBond {
    pub low: Coord,
    pub axis: usize,
    pub high: Coord,
}

impl BoxGrid {
    pub fn new(fine_dims: Coord, box_size: u32) -> Result<Self> {
        if box_size < MIN_BOX_SIZE {
            return Err(Error::Config(format!(
                "box size must be at least {MIN_BOX_SIZE}, got {box_size}"
            )));
        }
        let b = box_size as i32;
        if let Some(d) = fine_dims.iter().find(|&&d| d <= 0 || d % b != 0) {
            return Err(Error::Config(format!(
                "lattice extent {d} is not a positive multiple of box size {box_size}"
            )));
        }
        Ok(BoxGrid {
            box_size,
            coarse_dims: [fine_dims[0] / b, fine_dims[1] / b, fine_dims[2] / b],
        })
    }

    pub fn from_coarse(coarse_dims: Coord, box_size: u32) -> Result<Self> {
        let b = box_size as i32;
        Self::new(
            [coarse_dims[0] * b, coarse_dims[1] * b, coarse_dims[2] * b],
            box_size,
        )
    }

    pub fn box_size(&self) -> u32 {
        self.box_size
    }

    pub fn coarse_dims(&self) -> Coord {
        self.coarse_dims
    }

    pub fn fine_dims(&self) -> Coord {
        let b = self.box_size as i32;
        [
            self.coarse_dims[0] * b,
            self.coarse_dims[1] * b,
            self.coarse_dims[2] * b,
        ]
    }

    pub fn contains(&self, c: Coord) -> bool {
        (0..3).all(|k| c[k] >= 0 && c[k] < self.coarse_dims[k])
    }

    pub fn carries_qubit(&self, c: Coord) -> bool {
        self.contains(c) && matches!(odd_count(c), 1 | 2)
    }

    pub fn boxes(&self) -> impl Iterator<Item = Coord> {
        let [dx, dy, dz] = self.coarse_dims;
        (0..dx).flat_map(move |x| (0..dy).flat_map(move |y| (0..dz).map(move |z| [x, y, z])))
    }

    /// Qubit-carrying boxes in lexicographic order.
    pub fn qubit_boxes(&self) -> Vec<Coord> {
        self.boxes().filter(|&c| self.carries_qubit(c)).collect()
    }

    /// All coarse bonds, sorted by `(low, axis)`.
    pub fn bonds(&self) -> Vec<CoarseBond> {
        let mut out = Vec::new();
        for low in self.qubit_boxes() {
            for axis in 0..3 {
                let mut high = low;
                high[axis] += 1;
                if self.carries_qubit(high) {
                    out.push(CoarseBond { low, axis, high });
                }
            }
        }
        out
    }
}

/// The coarse lattice produced by one renormalization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurifiedLattice {
    grid: BoxGrid,
    structures: Vec<(Coord, Option<Structure>)>,
    bonds: Vec<PathRecord>,
}

impl PurifiedLattice {
    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    /// One entry per qubit-carrying box, in box order.
    pub fn structures(&self) -> &[(Coord, Option<Structure>)] {
        &self.structures
    }

    pub fn structure(&self, box_coord: Coord) -> Option<&Structure> {
        self.structures
            .binary_search_by(|(c, _)| c.cmp(&box_coord))
            .ok()
            .and_then(|i| self.structures[i].1.as_ref())
    }

    /// Records for every coarse bond, in canonical order.
    pub fn bonds(&self) -> &[PathRecord] {
        &self.bonds
    }

    /// Boxes that host a purified qubit.
    pub fn nodes(&self) -> Vec<Coord> {
        self.structures
            .iter()
            .filter(|(_, s)| s.is_some())
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn realized(&self) -> impl Iterator<Item = &PathRecord> {
        self.bonds.iter().filter(|r| r.is_realized())
    }

    pub fn realized_count(&self) -> usize {
        self.realized().count()
    }

    pub fn failed_count(&self) -> usize {
        self.bonds.len() - self.realized_count()
    }

    pub fn output_error_rate(&self) -> Result<f64> {
        output_error_rate(self)
    }

    /// Purified adjacency expressed on the center nodes.
    pub fn center_graph(&self) -> GraphState {
        let centers = self
            .structures
            .iter()
            .filter_map(|(_, s)| s.as_ref().map(|s| s.center));
        let edges = self.realized().map(|r| {
            (
                *r.nodes.first().expect("realized path"),
                *r.nodes.last().expect("realized path"),
            )
        });
        GraphState::from_edges(centers, edges).expect("path ends are centers")
    }
}

/// Fraction of coarse bonds that failed.
pub fn output_error_rate(lattice: &PurifiedLattice) -> Result<f64> {
    if lattice.bonds.is_empty() {
        return Err(Error::UndefinedRate(
            "the purified lattice has no bonds".into(),
        ));
    }
    Ok(lattice.failed_count() as f64 / lattice.bonds.len() as f64)
}

pub(crate) fn select_all(
    instance: &FaultyInstance,
    grid: &BoxGrid,
) -> Vec<(Coord, Option<Structure>)> {
    grid.qubit_boxes()
        .into_iter()
        .map(|c| (c, select_structure(instance, c)))
        .collect()
}

/// Structure lookup by box over the output of [`select_all`].
pub(crate) fn structure_at(
    structures: &[(Coord, Option<Structure>)],
    c: Coord,
) -> Option<&Structure> {
    structures
        .binary_search_by(|(k, _)| k.cmp(&c))
        .ok()
        .and_then(|i| structures[i].1.as_ref())
}

/// Route a bond against the current claims without committing.
pub(crate) fn route_bond(
    instance: &FaultyInstance,
    claims: &Claims,
    structures: &[(Coord, Option<Structure>)],
    bond: &CoarseBond,
) -> Result<PathRecord> {
    match (
        structure_at(structures, bond.low),
        structure_at(structures, bond.high),
    ) {
        (Some(a), Some(b)) => search_path(instance, claims, a, b),
        _ => Ok(PathRecord::failed((bond.low, bond.high))),
    }
}

pub(crate) fn assemble(
    instance: &FaultyInstance,
    grid: BoxGrid,
    structures: Vec<(Coord, Option<Structure>)>,
    bonds: Vec<PathRecord>,
    claims: &Claims,
) -> (PurifiedLattice, MeasurementPlan) {
    let g = instance.graph();
    let mut keep = vec![false; g.node_count()];
    for s in structures.iter().filter_map(|(_, s)| s.as_ref()) {
        keep[g.index_of(&s.center).expect("center in graph")] = true;
    }
    let claimed = claims.as_slice();
    let entries: Vec<(NodeId, Basis)> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &node)| {
            let basis = if keep[i] {
                Basis::Keep
            } else if claimed[i] {
                Basis::MeasureY
            } else {
                Basis::MeasureZ
            };
            (node, basis)
        })
        .collect();
    (
        PurifiedLattice {
            grid,
            structures,
            bonds,
        },
        MeasurementPlan::from_sorted(entries),
    )
}

pub(crate) fn prepare<'a>(
    instance: &'a FaultyInstance,
    box_size: u32,
) -> Result<(Cow<'a, FaultyInstance>, BoxGrid)> {
    let grid = BoxGrid::new(instance.geometry().dims(), box_size)?;
    let instance = if instance.geometry().box_size() == box_size {
        Cow::Borrowed(instance)
    } else {
        Cow::Owned(instance.readdressed(box_size)?)
    };
    Ok((instance, grid))
}

/// Renormalize with boxes of edge `box_size`, processing coarse bonds in
/// canonical order.
///
/// Applying the returned plan to the instance graph with
/// [`reduce_by_plan`](crate::graph::reduce_by_plan) yields exactly
/// [`PurifiedLattice::center_graph`]. If the instance is addressed with a
/// different box size, node ids in the outputs use `box_size`.
pub fn renormalize(
    instance: &FaultyInstance,
    box_size: u32,
) -> Result<(PurifiedLattice, MeasurementPlan)> {
    let (instance, grid) = prepare(instance, box_size)?;
    let structures = select_all(&instance, &grid);
    let mut claims = Claims::new(instance.graph().node_count());
    let mut records = Vec::new();
    for bond in grid.bonds() {
        let record = route_bond(&instance, &claims, &structures, &bond)?;
        claims.commit(instance.graph(), &record);
        records.push(record);
    }
    Ok(assemble(&instance, grid, structures, records, &claims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::reduce_by_plan;
    use crate::lattice::{build_perfect_lattice, generate_faulty, GenModel, LatticeGeometry};

    #[test]
    fn grid_validation() {
        assert!(BoxGrid::new([40, 40, 40], 5).is_err());
        assert!(matches!(
            BoxGrid::new([41, 40, 40], 20),
            Err(Error::Config(_))
        ));
        let grid = BoxGrid::new([100, 100, 60], 20).unwrap();
        assert_eq!(grid.coarse_dims(), [5, 5, 3]);
        assert_eq!(grid.qubit_boxes().len(), 53);
        assert_eq!(grid.bonds().len(), 80);
    }

    #[test]
    fn coarse_interior_nodes_have_four_bonds() {
        let grid = BoxGrid::from_coarse([5, 5, 5], 6).unwrap();
        let bonds = grid.bonds();
        for c in grid.qubit_boxes() {
            if c.iter().all(|&k| k > 0 && k < 4) {
                let deg = bonds.iter().filter(|b| b.low == c || b.high == c).count();
                assert_eq!(deg, 4);
            }
        }
        assert!(bonds
            .windows(2)
            .all(|w| (w[0].low, w[0].axis) < (w[1].low, w[1].axis)));
    }

    #[test]
    fn error_rate_arithmetic() {
        let grid = BoxGrid::from_coarse([2, 2, 1], 6).unwrap();
        let realized = |lo: Coord, hi: Coord| PathRecord {
            bond: (lo, hi),
            status: PathStatus::Realized,
            nodes: Vec::new(),
            length: 6,
        };
        let mut lattice = PurifiedLattice {
            grid,
            structures: Vec::new(),
            bonds: vec![
                realized([0, 0, 0], [1, 0, 0]),
                realized([0, 1, 0], [1, 1, 0]),
                PathRecord::failed(([1, 0, 0], [1, 1, 0])),
            ],
        };
        assert!((lattice.output_error_rate().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        lattice.bonds.truncate(2);
        assert_eq!(lattice.output_error_rate().unwrap(), 0.0);
        lattice.bonds = vec![PathRecord::failed(([0, 0, 0], [1, 0, 0]))];
        assert_eq!(lattice.output_error_rate().unwrap(), 1.0);
        lattice.bonds.clear();
        assert!(matches!(
            lattice.output_error_rate(),
            Err(Error::UndefinedRate(_))
        ));
    }

    #[test]
    fn perfect_lattice_renormalizes_without_failures() {
        for b in [6, 8, 12] {
            let grid = BoxGrid::from_coarse([3, 3, 2], b).unwrap();
            let inst = build_perfect_lattice(&LatticeGeometry::new(grid.fine_dims(), b).unwrap());
            let (p, plan) = renormalize(&inst, b).unwrap();
            assert_eq!(p.output_error_rate().unwrap(), 0.0);
            assert_eq!(
                reduce_by_plan(inst.graph(), &plan).unwrap(),
                p.center_graph()
            );
            assert_eq!(plan.count(Basis::Keep), grid.qubit_boxes().len());
        }
    }

    #[test]
    fn missing_structure_fails_all_its_bonds() {
        let grid = BoxGrid::from_coarse([2, 2, 2], 6).unwrap();
        let geometry = LatticeGeometry::new(grid.fine_dims(), 6).unwrap();
        let inst = generate_faulty(&geometry, &GenModel::independent(1.0, 0)).unwrap();
        let (p, plan) = renormalize(&inst, 6).unwrap();
        assert!(p.nodes().is_empty());
        assert_eq!(p.output_error_rate().unwrap(), 1.0);
        assert_eq!(plan.count(Basis::MeasureZ), inst.graph().node_count());
    }

    #[test]
    fn readdresses_when_box_sizes_differ() {
        let geometry = LatticeGeometry::new([16, 16, 16], 5).unwrap();
        let inst = generate_faulty(&geometry, &GenModel::independent(0.1, 4)).unwrap();
        let (p, plan) = renormalize(&inst, 8).unwrap();
        let re = inst.readdressed(8).unwrap();
        assert_eq!(reduce_by_plan(re.graph(), &plan).unwrap(), p.center_graph());
    }

    #[test]
    fn plan_matches_purified_lattice_on_noisy_instances() {
        let grid = BoxGrid::from_coarse([3, 3, 2], 8).unwrap();
        let geometry = LatticeGeometry::new(grid.fine_dims(), 8).unwrap();
        for seed in 0..6 {
            for model in [
                GenModel::independent(0.25, seed),
                GenModel::skip(0.25, 0.3, seed),
            ] {
                let inst = generate_faulty(&geometry, &model).unwrap();
                let (p, plan) = renormalize(&inst, 8).unwrap();
                assert_eq!(
                    reduce_by_plan(inst.graph(), &plan).unwrap(),
                    p.center_graph(),
                    "seed {seed} {model:?}"
                );
            }
        }
    }
}
