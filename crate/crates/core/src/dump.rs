//! Line-oriented text formats for lattices, purified lattices and plans.
//!
//! Every writer emits sorted lines and every parser rejects anything it would
//! not have written, so `write(parse(text)) == text` for any valid file.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Basis, Coord, GraphState, MeasurementPlan, NodeId};
use crate::lattice::{FaultyInstance, LatticeGeometry};
use crate::renormalize::{PathStatus, PurifiedLattice};

fn coord_token(c: Coord) -> String {
    format!("{},{},{}", c[0], c[1], c[2])
}

fn parse_coord(line: usize, s: &str) -> Result<Coord> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::parse(line, format!("expected x,y,z, got `{s}`")));
    }
    let mut out = [0; 3];
    for (k, p) in parts.iter().enumerate() {
        out[k] = parse_int(line, p)?;
    }
    Ok(out)
}

fn parse_int<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("bad number `{s}`")))
}

fn parse_node_token(line: usize, s: &str, box_size: u32) -> Result<NodeId> {
    let (c, local) = s
        .split_once(':')
        .ok_or_else(|| Error::parse(line, format!("expected bx,by,bz:local, got `{s}`")))?;
    let box_coord = parse_coord(line, c)?;
    let local = parse_int(line, local)?;
    NodeId::from_parts(box_coord, local, box_size)
        .ok_or_else(|| Error::parse(line, format!("local index out of range in `{s}`")))
}

fn fields<'a>(line: usize, text: &'a str, keyword: &str, count: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = text.split(' ').collect();
    if parts[0] != keyword {
        return Err(Error::parse(
            line,
            format!("expected `{keyword}` line, got `{text}`"),
        ));
    }
    if parts.len() != count + 1 {
        return Err(Error::parse(
            line,
            format!("`{keyword}` takes {count} fields, got {}", parts.len() - 1),
        ));
    }
    Ok(parts[1..].to_vec())
}

fn numbered(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l))
}

pub fn write_lattice(instance: &FaultyInstance) -> String {
    let geometry = instance.geometry();
    let g = instance.graph();
    let [dx, dy, dz] = geometry.dims();
    let mut out = format!("lattice {dx} {dy} {dz} {}\n", geometry.box_size());
    for n in g.nodes() {
        let [x, y, z] = n.pos;
        writeln!(
            out,
            "node {} {} {x} {y} {z}",
            coord_token(n.box_coord),
            n.local
        )
        .unwrap();
    }
    for (a, b) in g.edges() {
        writeln!(out, "edge {} {}", g.node(a), g.node(b)).unwrap();
    }
    out
}

pub fn parse_lattice(text: &str) -> Result<FaultyInstance> {
    let mut lines = numbered(text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty lattice file"))?;
    let h = fields(1, header, "lattice", 4)?;
    let dims = [
        parse_int(1, h[0])?,
        parse_int(1, h[1])?,
        parse_int(1, h[2])?,
    ];
    let box_size: u32 = parse_int(1, h[3])?;
    let geometry =
        LatticeGeometry::new(dims, box_size).map_err(|e| Error::parse(1, e.to_string()))?;

    let mut nodes: Vec<NodeId> = Vec::new();
    let mut edges = Vec::new();
    let mut last_edge: Option<(NodeId, NodeId)> = None;
    for (ln, l) in lines {
        if l.starts_with("node ") {
            if !edges.is_empty() {
                return Err(Error::parse(ln, "node line after edge lines"));
            }
            let f = fields(ln, l, "node", 5)?;
            let box_coord = parse_coord(ln, f[0])?;
            let local = parse_int(ln, f[1])?;
            let pos: Coord = [
                parse_int(ln, f[2])?,
                parse_int(ln, f[3])?,
                parse_int(ln, f[4])?,
            ];
            let n = NodeId::from_parts(box_coord, local, box_size)
                .filter(|n| n.pos == pos)
                .ok_or_else(|| Error::parse(ln, "node address does not match its position"))?;
            if nodes.last().is_some_and(|p| *p >= n) {
                return Err(Error::parse(ln, "node lines are not strictly sorted"));
            }
            nodes.push(n);
        } else {
            let f = fields(ln, l, "edge", 2)?;
            let a = parse_node_token(ln, f[0], box_size)?;
            let b = parse_node_token(ln, f[1], box_size)?;
            if a >= b {
                return Err(Error::parse(
                    ln,
                    "edge endpoints must be in increasing order",
                ));
            }
            if last_edge.is_some_and(|e| e >= (a, b)) {
                return Err(Error::parse(ln, "edge lines are not strictly sorted"));
            }
            for n in [a, b] {
                if nodes.binary_search(&n).is_err() {
                    return Err(Error::parse(ln, format!("unknown node {n}")));
                }
            }
            last_edge = Some((a, b));
            edges.push((a, b));
        }
    }
    let graph = GraphState::from_edges(nodes, edges)?;
    FaultyInstance::from_graph(geometry, graph).map_err(|e| Error::parse(1, e.to_string()))
}

/// The coarse content of a purified lattice, as stored on disk.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurifiedDump {
    pub nodes: Vec<Coord>,
    pub bonds: Vec<BondLine>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BondLine {
    pub low: Coord,
    pub high: Coord,
    pub status: PathStatus,
    pub length: usize,
}

impl PurifiedDump {
    pub fn from_lattice(p: &PurifiedLattice) -> Self {
        let mut bonds: Vec<BondLine> = p
            .bonds()
            .iter()
            .map(|r| BondLine {
                low: r.bond.0,
                high: r.bond.1,
                status: r.status,
                length: r.length,
            })
            .collect();
        bonds.sort();
        PurifiedDump {
            nodes: p.nodes(),
            bonds,
        }
    }

    pub fn realized_edges(&self) -> BTreeSet<(Coord, Coord)> {
        self.bonds
            .iter()
            .filter(|b| b.status == PathStatus::Realized)
            .map(|b| (b.low, b.high))
            .collect()
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for &c in &self.nodes {
            writeln!(out, "pnode {}", coord_token(c)).unwrap();
        }
        for b in &self.bonds {
            writeln!(
                out,
                "pbond {} {} {} {}",
                coord_token(b.low),
                coord_token(b.high),
                b.status.as_str(),
                b.length
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dump = PurifiedDump::default();
        for (ln, l) in numbered(text) {
            if l.starts_with("pnode ") {
                if !dump.bonds.is_empty() {
                    return Err(Error::parse(ln, "pnode line after pbond lines"));
                }
                let f = fields(ln, l, "pnode", 1)?;
                let c = parse_coord(ln, f[0])?;
                if dump.nodes.last().is_some_and(|p| *p >= c) {
                    return Err(Error::parse(ln, "pnode lines are not strictly sorted"));
                }
                dump.nodes.push(c);
            } else {
                let f = fields(ln, l, "pbond", 4)?;
                let status = PathStatus::parse(f[2])
                    .ok_or_else(|| Error::parse(ln, format!("unknown status `{}`", f[2])))?;
                let bond = BondLine {
                    low: parse_coord(ln, f[0])?,
                    high: parse_coord(ln, f[1])?,
                    status,
                    length: parse_int(ln, f[3])?,
                };
                if bond.low >= bond.high {
                    return Err(Error::parse(
                        ln,
                        "bond endpoints must be in increasing order",
                    ));
                }
                if dump
                    .bonds
                    .last()
                    .is_some_and(|p| (p.low, p.high) >= (bond.low, bond.high))
                {
                    return Err(Error::parse(ln, "pbond lines are not strictly sorted"));
                }
                dump.bonds.push(bond);
            }
        }
        Ok(dump)
    }
}

pub fn write_purified(p: &PurifiedLattice) -> String {
    PurifiedDump::from_lattice(p).write()
}

pub fn write_plan(plan: &MeasurementPlan) -> String {
    let mut out = String::new();
    for (n, basis) in plan.entries() {
        writeln!(out, "meas {n} {}", basis.letter()).unwrap();
    }
    out
}

/// Parse a plan whose node tokens must all name qubits of `graph`.
pub fn parse_plan(text: &str, graph: &GraphState, box_size: u32) -> Result<MeasurementPlan> {
    let mut entries: Vec<(NodeId, Basis)> = Vec::new();
    for (ln, l) in numbered(text) {
        let f = fields(ln, l, "meas", 2)?;
        let token = parse_node_token(ln, f[0], box_size)?;
        let node = graph
            .index_of(&token)
            .map(|i| graph.node(i))
            .ok_or_else(|| Error::parse(ln, format!("unknown node {token}")))?;
        let basis = Basis::from_letter(f[1])
            .ok_or_else(|| Error::parse(ln, format!("unknown basis `{}`", f[1])))?;
        if entries.last().is_some_and(|(p, _)| *p >= node) {
            return Err(Error::parse(ln, "meas lines are not strictly sorted"));
        }
        entries.push((node, basis));
    }
    Ok(MeasurementPlan::from_sorted(entries))
}

/// Differences between a reduced graph and a purified dump.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub missing_nodes: Vec<Coord>,
    pub extra_nodes: Vec<Coord>,
    pub missing_bonds: Vec<(Coord, Coord)>,
    pub extra_bonds: Vec<(Coord, Coord)>,
    pub stray_edges: Vec<(NodeId, NodeId)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        *self == VerifyReport::default()
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        for c in &self.missing_nodes {
            writeln!(out, "missing node {}", coord_token(*c)).unwrap();
        }
        for c in &self.extra_nodes {
            writeln!(out, "extra node {}", coord_token(*c)).unwrap();
        }
        for (a, b) in &self.missing_bonds {
            writeln!(out, "missing bond {} {}", coord_token(*a), coord_token(*b)).unwrap();
        }
        for (a, b) in &self.extra_bonds {
            writeln!(out, "extra bond {} {}", coord_token(*a), coord_token(*b)).unwrap();
        }
        for (a, b) in &self.stray_edges {
            writeln!(out, "edge {a} {b} joins nodes of one box").unwrap();
        }
        out
    }
}

/// Compare the graph left by a plan with the purified lattice it should give.
///
/// Surviving qubits are identified with their boxes; two survivors in one box
/// are reported as a stray edge or an extra node.
pub fn compare_reduced(reduced: &GraphState, purified: &PurifiedDump) -> VerifyReport {
    let mut report = VerifyReport::default();
    let have: BTreeSet<Coord> = reduced.nodes().iter().map(|n| n.box_coord).collect();
    let want: BTreeSet<Coord> = purified.nodes.iter().copied().collect();
    if have.len() != reduced.node_count() {
        report.extra_nodes.extend(
            reduced
                .nodes()
                .windows(2)
                .filter(|w| w[0].box_coord == w[1].box_coord)
                .map(|w| w[1].box_coord),
        );
    }
    report.missing_nodes = want.difference(&have).copied().collect();
    report.extra_nodes.extend(have.difference(&want).copied());
    let mut got = BTreeSet::new();
    for (a, b) in reduced.edge_list() {
        if a.box_coord == b.box_coord {
            report.stray_edges.push((a, b));
        } else {
            let (x, y) = (a.box_coord.min(b.box_coord), a.box_coord.max(b.box_coord));
            got.insert((x, y));
        }
    }
    let expected = purified.realized_edges();
    report.missing_bonds = expected.difference(&got).copied().collect();
    report.extra_bonds = got.difference(&expected).copied().collect();
    report
}
