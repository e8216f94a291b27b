/* tslint:disable */
/* eslint-disable */

/**
 * Per-user throughput of the optimal and uniform splits for `L = 1..=l_max`.
 */
export function convergence_curves(users: number, power: number, noise: number, l_max: number, base: string): string;

/**
 * Decoding schedule on a preset discrete channel (`adder` or `xor`) with one
 * user per entry of `counts` (comma separated). An empty `order` uses the
 * protocol's own order; otherwise the given labels are verified.
 */
export function dmc_schedule(preset: string, counts: string, order: string): string;

/**
 * Optimal power split of one user with its per-level rates and SIRs.
 */
export function split_levels(users: number, power: number, noise: number, levels: number, base: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly convergence_curves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly dmc_schedule: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly split_levels: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
