/* tslint:disable */
/* eslint-disable */

/**
 * Mean output error against box size on a small `3 x 3 x 2` grid.
 */
export function box_size_curve(p_fail: number, sizes: Uint32Array, seeds: number): string;

/**
 * Detector error rates for fidelity `f` and mean path length `l_bar`, and
 * the fidelity needed for a halved node error of `target`.
 */
export function error_model(f: number, l_bar: number, target: number): string;

/**
 * Generate and purify one lattice of `cx * cy * cz` boxes.
 */
export function purify_slice(cx: number, cy: number, cz: number, box_size: number, p_fail: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly box_size_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly error_model: (a: number, b: number, c: number) => [number, number, number, number];
    readonly purify_slice: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
