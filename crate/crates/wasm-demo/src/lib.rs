//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated type definitions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use raussendorf_purify::analysis::{
    node_error_rate, path_error_rate, required_fidelity, ErrorModelParams,
};
use raussendorf_purify::graph::{Basis, Coord};
use raussendorf_purify::lattice::{generate_faulty, GenModel, LatticeGeometry};
use raussendorf_purify::renormalize::{renormalize, BoxGrid, PurifiedLattice};

#[derive(Serialize)]
struct PathView {
    bond: (Coord, Coord),
    realized: bool,
    length: usize,
    points: Vec<Coord>,
}

#[derive(Serialize)]
struct SliceView {
    fine_dims: Coord,
    box_size: u32,
    failed_input_bonds: usize,
    ideal_bonds: usize,
    output_error_rate: Option<f64>,
    centers: Vec<Coord>,
    paths: Vec<PathView>,
    measured_y: usize,
    measured_z: usize,
}

#[derive(Serialize)]
struct ErrorView {
    path_error: f64,
    node_error: f64,
    node_error_halved: f64,
    required_fidelity: Option<f64>,
}

#[derive(Serialize)]
struct CurvePoint {
    box_size: u32,
    mean_output_error: f64,
    mean_path_length: Option<f64>,
}

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn run(
    coarse: Coord,
    box_size: u32,
    p_fail: f64,
    seed: u64,
) -> Result<(PurifiedLattice, SliceView), String> {
    let grid = BoxGrid::from_coarse(coarse, box_size).map_err(|e| e.to_string())?;
    let geometry = LatticeGeometry::new(grid.fine_dims(), box_size).map_err(|e| e.to_string())?;
    let instance = generate_faulty(&geometry, &GenModel::independent(p_fail, seed))
        .map_err(|e| e.to_string())?;
    let (lattice, plan) = renormalize(&instance, box_size).map_err(|e| e.to_string())?;
    let view = SliceView {
        fine_dims: grid.fine_dims(),
        box_size,
        failed_input_bonds: instance.failed_bonds(),
        ideal_bonds: instance.ideal_bonds(),
        output_error_rate: lattice.output_error_rate().ok(),
        centers: lattice
            .structures()
            .iter()
            .filter_map(|(_, s)| s.as_ref().map(|s| s.center.pos))
            .collect(),
        paths: lattice
            .bonds()
            .iter()
            .map(|r| PathView {
                bond: r.bond,
                realized: r.is_realized(),
                length: r.length,
                points: r.nodes.iter().map(|n| n.pos).collect(),
            })
            .collect(),
        measured_y: plan.count(Basis::MeasureY),
        measured_z: plan.count(Basis::MeasureZ),
    };
    Ok((lattice, view))
}

/// Generate and purify one lattice of `cx * cy * cz` boxes.
#[wasm_bindgen]
pub fn purify_slice(
    cx: i32,
    cy: i32,
    cz: i32,
    box_size: u32,
    p_fail: f64,
    seed: u32,
) -> Result<String, JsValue> {
    let (_, view) = run([cx, cy, cz], box_size, p_fail, seed as u64).map_err(fail)?;
    serde_json::to_string(&view).map_err(fail)
}

/// Detector error rates for fidelity `f` and mean path length `l_bar`, and
/// the fidelity needed for a halved node error of `target`.
#[wasm_bindgen]
pub fn error_model(f: f64, l_bar: f64, target: f64) -> Result<String, JsValue> {
    let p = ErrorModelParams::new(f, l_bar, false).map_err(fail)?;
    let halved = ErrorModelParams { halve: true, ..p };
    let view = ErrorView {
        path_error: path_error_rate(&p),
        node_error: node_error_rate(&p),
        node_error_halved: node_error_rate(&halved),
        required_fidelity: required_fidelity(target, l_bar).ok(),
    };
    serde_json::to_string(&view).map_err(fail)
}

/// Mean output error against box size on a small `3 x 3 x 2` grid.
#[wasm_bindgen]
pub fn box_size_curve(p_fail: f64, sizes: &[u32], seeds: u32) -> Result<String, JsValue> {
    let mut points = Vec::new();
    for &b in sizes {
        let mut rate = 0.0;
        let mut lengths = Vec::new();
        for seed in 0..seeds.max(1) {
            let (lattice, _) = run([3, 3, 2], b, p_fail, seed as u64).map_err(fail)?;
            rate += lattice.output_error_rate().map_err(fail)?;
            lengths.extend(lattice.realized().map(|r| r.length));
        }
        points.push(CurvePoint {
            box_size: b,
            mean_output_error: rate / seeds.max(1) as f64,
            mean_path_length: (!lengths.is_empty())
                .then(|| lengths.iter().sum::<usize>() as f64 / lengths.len() as f64),
        });
    }
    serde_json::to_string(&points).map_err(fail)
}
