/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const eigen: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const ma_solve_constant: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const radial_oracle: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
