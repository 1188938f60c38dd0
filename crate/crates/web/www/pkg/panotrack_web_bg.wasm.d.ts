/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const frustum_overlay: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const panorama_height: () => number;
export const panorama_rgba: () => [number, number];
export const panorama_width: () => number;
export const render_view: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const trajectory_frame: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const trajectory_path: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
