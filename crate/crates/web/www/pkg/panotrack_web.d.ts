/* tslint:disable */
/* eslint-disable */

/**
 * The panorama (RGBA) with everything outside the camera's view greyed out.
 */
export function frustum_overlay(yaw: number, pitch: number, roll: number, fov: number, width: number, height: number): Uint8Array;

export function panorama_height(): number;

/**
 * The demo panorama as RGBA bytes.
 */
export function panorama_rgba(): Uint8Array;

export function panorama_width(): number;

/**
 * Perspective view (RGBA) of a camera with the given Euler angles in
 * degrees and horizontal field of view.
 */
export function render_view(yaw: number, pitch: number, roll: number, fov: number, width: number, height: number): Uint8Array;

/**
 * Perspective view (RGBA) at frame `index` of a generated trajectory.
 */
export function trajectory_frame(kind: string, frames: number, seed: number, btf: boolean, index: number, size: number): Uint8Array;

/**
 * Optical-axis path of a generated trajectory as panorama pixel
 * coordinates `[u0, v0, u1, v1, ...]`.
 */
export function trajectory_path(kind: string, frames: number, seed: number, btf: boolean): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly frustum_overlay: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly panorama_height: () => number;
    readonly panorama_rgba: () => [number, number];
    readonly panorama_width: () => number;
    readonly render_view: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly trajectory_frame: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly trajectory_path: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
