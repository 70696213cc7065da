/* tslint:disable */
/* eslint-disable */

export class BoundView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    argmin: number;
    boundary: boolean;
    svg: string;
    values: Float64Array;
}

export class QuantizerView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    levels: Float64Array;
    lloyd_distortion: number;
    svg: string;
    uniform_distortion: number;
}

export class SweepView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Bit-depth with the lowest mean squared error.
     */
    best_b: number;
    mean_error: Float64Array;
    svg: string;
}

export function boundCurve(isnr_db: number, b_min: number, b_max: number, budget_mult: number, full: boolean, delta: number, corr_s: number): BoundView;

export function oracleSweep(n: number, k: number, budget_mult: number, isnr_db: number, trials: number, seed: bigint): SweepView;

export function quantizers(bits: number, load: number): QuantizerView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_boundview_free: (a: number, b: number) => void;
    readonly __wbg_get_boundview_argmin: (a: number) => number;
    readonly __wbg_get_boundview_boundary: (a: number) => number;
    readonly __wbg_get_boundview_svg: (a: number) => [number, number];
    readonly __wbg_get_boundview_values: (a: number) => [number, number];
    readonly __wbg_get_quantizerview_levels: (a: number) => [number, number];
    readonly __wbg_get_quantizerview_lloyd_distortion: (a: number) => number;
    readonly __wbg_get_quantizerview_svg: (a: number) => [number, number];
    readonly __wbg_get_quantizerview_uniform_distortion: (a: number) => number;
    readonly __wbg_get_sweepview_best_b: (a: number) => number;
    readonly __wbg_get_sweepview_mean_error: (a: number) => [number, number];
    readonly __wbg_get_sweepview_svg: (a: number) => [number, number];
    readonly __wbg_quantizerview_free: (a: number, b: number) => void;
    readonly __wbg_set_boundview_argmin: (a: number, b: number) => void;
    readonly __wbg_set_boundview_boundary: (a: number, b: number) => void;
    readonly __wbg_set_boundview_svg: (a: number, b: number, c: number) => void;
    readonly __wbg_set_boundview_values: (a: number, b: number, c: number) => void;
    readonly __wbg_set_quantizerview_levels: (a: number, b: number, c: number) => void;
    readonly __wbg_set_quantizerview_lloyd_distortion: (a: number, b: number) => void;
    readonly __wbg_set_quantizerview_svg: (a: number, b: number, c: number) => void;
    readonly __wbg_set_quantizerview_uniform_distortion: (a: number, b: number) => void;
    readonly __wbg_set_sweepview_best_b: (a: number, b: number) => void;
    readonly __wbg_set_sweepview_mean_error: (a: number, b: number, c: number) => void;
    readonly __wbg_set_sweepview_svg: (a: number, b: number, c: number) => void;
    readonly __wbg_sweepview_free: (a: number, b: number) => void;
    readonly boundCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly oracleSweep: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly quantizers: (a: number, b: number) => [number, number, number];
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
