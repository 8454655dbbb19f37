/* tslint:disable */
/* eslint-disable */

export class CellReport {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * LUT seconds per operator kind, in `none, skip, conv1x1, conv3x3, avgpool` order.
     */
    readonly contributions: Float64Array;
    readonly index: number;
    readonly lut: number;
    readonly measured: number;
    readonly noiseless: number;
}

export class Scatter {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly accuracy: number;
    readonly lut: Float64Array;
    readonly truth: Float64Array;
}

export class Spread {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Ranks picked by uniform random sampling.
     */
    readonly random: Uint32Array;
    /**
     * Training-range latencies in ascending order.
     */
    readonly sorted: Float64Array;
    /**
     * Ranks picked by targeted uniform sampling.
     */
    readonly targeted: Uint32Array;
}

export function cellLatency(seed: bigint, index: number, edges: Uint8Array): CellReport;

/**
 * Names of the default pool's devices, in index order.
 */
export function device_names(): string[];

export function lutScatter(seed: bigint, index: number, fusion_discount: number, skip_elision: boolean): Scatter;

export function samplerSpread(seed: bigint, index: number, n: number): Spread;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_cellreport_free: (a: number, b: number) => void;
    readonly __wbg_scatter_free: (a: number, b: number) => void;
    readonly __wbg_spread_free: (a: number, b: number) => void;
    readonly cellLatency: (a: bigint, b: number, c: number, d: number) => [number, number, number];
    readonly cellreport_contributions: (a: number) => [number, number];
    readonly cellreport_index: (a: number) => number;
    readonly cellreport_lut: (a: number) => number;
    readonly cellreport_measured: (a: number) => number;
    readonly cellreport_noiseless: (a: number) => number;
    readonly device_names: () => [number, number];
    readonly lutScatter: (a: bigint, b: number, c: number, d: number) => [number, number, number];
    readonly samplerSpread: (a: bigint, b: number, c: number) => [number, number, number];
    readonly scatter_accuracy: (a: number) => number;
    readonly scatter_lut: (a: number) => [number, number];
    readonly scatter_truth: (a: number) => [number, number];
    readonly spread_random: (a: number) => [number, number];
    readonly spread_sorted: (a: number) => [number, number];
    readonly spread_targeted: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
