/* tslint:disable */
/* eslint-disable */

/**
 * Inverse iteration on `domain_json`; returns λ, the Rayleigh history and
 * the unit-height eigenfunction on the lattice.
 */
export function eigen(domain_json: string, h: number, width: number, max_iter: number): string;

/**
 * Solves `MA_h(u) = value` with zero boundary data.
 */
export function ma_solve_constant(domain_json: string, h: number, width: number, value: number): string;

/**
 * Unit-ball eigenvalue from radial shooting.
 */
export function radial_oracle(n: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly eigen: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly ma_solve_constant: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly radial_oracle: (a: number) => [number, number];
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
