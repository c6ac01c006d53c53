/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const kdenseDemo: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number, number];
export const lemmaSweep: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const maxcutDemo: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
