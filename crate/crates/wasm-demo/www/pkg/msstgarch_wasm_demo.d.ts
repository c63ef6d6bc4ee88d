/* tslint:disable */
/* eslint-disable */

/**
 * Next-step variance of each regime as a function of the previous return,
 * holding the previous variance at `h_prev`.
 */
export function news_impact(params: Float64Array, h_prev: number, span: number, points: number): string;

/**
 * Returns `{returns, states, variance}` where `variance` is the active
 * regime's conditional variance and states are 1-based.
 */
export function simulate_path(params: Float64Array, length: number, seed: number): string;

export function stability(params: Float64Array, delta: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly news_impact: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly simulate_path: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly stability: (a: number, b: number, c: number) => [number, number, number, number];
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
