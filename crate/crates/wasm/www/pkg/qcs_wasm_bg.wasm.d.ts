/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_boundview_free: (a: number, b: number) => void;
export const __wbg_get_boundview_argmin: (a: number) => number;
export const __wbg_get_boundview_boundary: (a: number) => number;
export const __wbg_get_boundview_svg: (a: number) => [number, number];
export const __wbg_get_boundview_values: (a: number) => [number, number];
export const __wbg_get_quantizerview_levels: (a: number) => [number, number];
export const __wbg_get_quantizerview_lloyd_distortion: (a: number) => number;
export const __wbg_get_quantizerview_svg: (a: number) => [number, number];
export const __wbg_get_quantizerview_uniform_distortion: (a: number) => number;
export const __wbg_get_sweepview_best_b: (a: number) => number;
export const __wbg_get_sweepview_mean_error: (a: number) => [number, number];
export const __wbg_get_sweepview_svg: (a: number) => [number, number];
export const __wbg_quantizerview_free: (a: number, b: number) => void;
export const __wbg_set_boundview_argmin: (a: number, b: number) => void;
export const __wbg_set_boundview_boundary: (a: number, b: number) => void;
export const __wbg_set_boundview_svg: (a: number, b: number, c: number) => void;
export const __wbg_set_boundview_values: (a: number, b: number, c: number) => void;
export const __wbg_set_quantizerview_levels: (a: number, b: number, c: number) => void;
export const __wbg_set_quantizerview_lloyd_distortion: (a: number, b: number) => void;
export const __wbg_set_quantizerview_svg: (a: number, b: number, c: number) => void;
export const __wbg_set_quantizerview_uniform_distortion: (a: number, b: number) => void;
export const __wbg_set_sweepview_best_b: (a: number, b: number) => void;
export const __wbg_set_sweepview_mean_error: (a: number, b: number, c: number) => void;
export const __wbg_set_sweepview_svg: (a: number, b: number, c: number) => void;
export const __wbg_sweepview_free: (a: number, b: number) => void;
export const boundCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const oracleSweep: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const quantizers: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
