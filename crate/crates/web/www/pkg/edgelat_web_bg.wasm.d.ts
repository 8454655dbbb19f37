/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_cellreport_free: (a: number, b: number) => void;
export const __wbg_scatter_free: (a: number, b: number) => void;
export const __wbg_spread_free: (a: number, b: number) => void;
export const cellLatency: (a: bigint, b: number, c: number, d: number) => [number, number, number];
export const cellreport_contributions: (a: number) => [number, number];
export const cellreport_index: (a: number) => number;
export const cellreport_lut: (a: number) => number;
export const cellreport_measured: (a: number) => number;
export const cellreport_noiseless: (a: number) => number;
export const device_names: () => [number, number];
export const lutScatter: (a: bigint, b: number, c: number, d: number) => [number, number, number];
export const samplerSpread: (a: bigint, b: number, c: number) => [number, number, number];
export const scatter_accuracy: (a: number) => number;
export const scatter_lut: (a: number) => [number, number];
export const scatter_truth: (a: number) => [number, number];
export const spread_random: (a: number) => [number, number];
export const spread_sorted: (a: number) => [number, number];
export const spread_targeted: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
