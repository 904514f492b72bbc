//! Multi-worker renormalization with a result identical to the sequential run.
//!
//! Boxes are split into slabs along the longest coarse axis, one per worker.
//! Workers pick structures for their own boxes and send the structures of
//! their lowest layer to the worker below, which owns the bonds crossing that
//! boundary. Path searches run in waves: a bond joins the first wave after
//! every earlier bond within reach of its boxes, so each search sees exactly
//! the claims the canonical order would have given it.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Coord, MeasurementPlan, NodeId};
use crate::lattice::FaultyInstance;
use crate::renormalize::{
    assemble, prepare, route_bond, select_structure, BoxGrid, Claims, CoarseBond, Orientation,
    PurifiedLattice, Structure,
};

/// What the parallel run did, beyond its result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DriverStats {
    pub workers: usize,
    pub slab_axis: usize,
    pub slabs: Vec<Range<i32>>,
    /// Bytes each worker received during the structure exchange.
    pub bytes_received: Vec<usize>,
    /// Number of path-search waves.
    pub waves: usize,
}

fn slab_axis(coarse: Coord) -> usize {
    (0..3).fold(0, |best, k| if coarse[k] > coarse[best] { k } else { best })
}

fn split_slabs(layers: i32, workers: usize) -> Vec<Range<i32>> {
    let n = (workers as i32).clamp(1, layers.max(1));
    (0..n)
        .map(|w| (w * layers / n)..((w + 1) * layers / n))
        .collect()
}

const NONE_TAG: u8 = 0;

/// Serialize the structures of one boundary layer: box coordinate, a tag,
/// then the local indices of the center and its handles.
fn encode(layer: &[(Coord, Option<Structure>)]) -> Vec<u8> {
    let mut out = Vec::new();
    for (c, s) in layer {
        for k in c {
            out.extend_from_slice(&k.to_le_bytes());
        }
        match s {
            None => out.push(NONE_TAG),
            Some(s) => {
                out.push(1 + s.orientation as u8);
                out.extend_from_slice(&s.center.local.to_le_bytes());
                for h in &s.handles {
                    out.extend_from_slice(&h.local.to_le_bytes());
                }
                out.extend_from_slice(&(s.score as u32).to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn byte(&mut self) -> u8 {
        self.at += 1;
        self.bytes[self.at - 1]
    }

    fn word(&mut self) -> u32 {
        self.at += 4;
        u32::from_le_bytes(
            self.bytes[self.at - 4..self.at]
                .try_into()
                .expect("4 bytes"),
        )
    }
}

fn decode(bytes: &[u8], box_size: u32) -> Vec<(Coord, Option<Structure>)> {
    let mut out = Vec::new();
    let mut cur = Cursor { bytes, at: 0 };
    while cur.at < bytes.len() {
        let c = [cur.word() as i32, cur.word() as i32, cur.word() as i32];
        let tag = cur.byte();
        if tag == NONE_TAG {
            out.push((c, None));
            continue;
        }
        let mut node = || NodeId::from_parts(c, cur.word(), box_size).expect("valid local");
        let center = node();
        let handles = [node(), node(), node(), node()];
        let score = cur.word() as usize;
        let orientation = match tag {
            1 => Orientation::X,
            2 => Orientation::Y,
            _ => Orientation::Z,
        };
        out.push((
            c,
            Some(Structure {
                center,
                handles,
                orientation,
                score,
            }),
        ));
    }
    out
}

/// Wave index per bond, in canonical order.
fn waves(grid: &BoxGrid, bonds: &[CoarseBond]) -> Vec<usize> {
    let [dx, dy, dz] = grid.coarse_dims();
    let linear = |c: Coord| ((c[0] * dy + c[1]) * dz + c[2]) as usize;
    // latest wave that wrote each box
    let mut wrote = vec![0usize; (dx * dy * dz) as usize];
    let mut out = Vec::with_capacity(bonds.len());
    for bond in bonds {
        let mut wave = 1;
        for end in [bond.low, bond.high] {
            for d in 0..27 {
                let n = [
                    end[0] + d / 9 - 1,
                    end[1] + (d / 3) % 3 - 1,
                    end[2] + d % 3 - 1,
                ];
                if grid.contains(n) {
                    wave = wave.max(wrote[linear(n)] + 1);
                }
            }
        }
        wrote[linear(bond.low)] = wave;
        wrote[linear(bond.high)] = wave;
        out.push(wave);
    }
    out
}

/// Renormalize with `workers` threads; equal to [`crate::renormalize::renormalize`].
pub fn renormalize_parallel(
    instance: &FaultyInstance,
    box_size: u32,
    workers: usize,
) -> Result<(PurifiedLattice, MeasurementPlan, DriverStats)> {
    if workers == 0 {
        return Err(Error::Config("worker count must be positive".into()));
    }
    let (instance, grid) = prepare(instance, box_size)?;
    let instance = instance.as_ref();
    let axis = slab_axis(grid.coarse_dims());
    let slabs = split_slabs(grid.coarse_dims()[axis], workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start workers: {e}")))?;

    pool.install(|| {
        let qubit_boxes = grid.qubit_boxes();
        let owned: Vec<Vec<(Coord, Option<Structure>)>> = slabs
            .par_iter()
            .map(|slab| {
                qubit_boxes
                    .iter()
                    .filter(|c| slab.contains(&c[axis]))
                    .map(|&c| (c, select_structure(instance, c)))
                    .collect()
            })
            .collect();

        // each worker sends its lowest layer to the worker below
        let messages: Vec<Vec<u8>> = slabs
            .iter()
            .zip(&owned)
            .map(|(slab, mine)| {
                let layer: Vec<_> = mine
                    .iter()
                    .filter(|(c, _)| c[axis] == slab.start)
                    .cloned()
                    .collect();
                encode(&layer)
            })
            .collect();
        let mut bytes_received = vec![0; slabs.len()];
        let tables: Vec<Vec<(Coord, Option<Structure>)>> = (0..slabs.len())
            .map(|w| {
                let mut table = owned[w].clone();
                if let Some(msg) = messages.get(w + 1) {
                    bytes_received[w] = msg.len();
                    table.extend(decode(msg, box_size));
                }
                table.sort_by_key(|e| e.0);
                table
            })
            .collect();
        let owner = |c: Coord| {
            slabs
                .iter()
                .position(|s| s.contains(&c[axis]))
                .expect("box in a slab")
        };

        let bonds = grid.bonds();
        let wave_of = waves(&grid, &bonds);
        let wave_count = wave_of.iter().copied().max().unwrap_or(0);
        let mut by_wave: Vec<Vec<usize>> = vec![Vec::new(); wave_count + 1];
        for (i, &w) in wave_of.iter().enumerate() {
            by_wave[w].push(i);
        }
        let mut claims = Claims::new(instance.graph().node_count());
        let mut records = vec![None; bonds.len()];
        for wave in &by_wave {
            let found: Vec<_> = wave
                .par_iter()
                .map(|&i| {
                    let bond = &bonds[i];
                    route_bond(instance, &claims, &tables[owner(bond.low)], bond)
                })
                .collect::<Result<_>>()?;
            for (&i, record) in wave.iter().zip(found) {
                claims.commit(instance.graph(), &record);
                records[i] = Some(record);
            }
        }
        let records = records
            .into_iter()
            .map(|r| r.expect("every bond routed"))
            .collect();
        let mut structures: Vec<_> = owned.into_iter().flatten().collect();
        structures.sort_by_key(|e| e.0);
        let (lattice, plan) = assemble(instance, grid, structures, records, &claims);
        let stats = DriverStats {
            workers,
            slab_axis: axis,
            slabs: slabs.clone(),
            bytes_received,
            waves: wave_count,
        };
        Ok((lattice, plan, stats))
    })
}
