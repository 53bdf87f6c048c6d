/* tslint:disable */
/* eslint-disable */

export function bmi(weight: number, weight_unit: string, height_m: number): number;

/**
 * Converts `value` between units of the same quantity: "mg/dL", "mmol/L",
 * "kg" or "lbs".
 */
export function convert(value: number, from: string, to: string): number;

/**
 * Summary and per-reading classification, as JSON.
 */
export function glucoseStats(values: string, unit: string, low: number, high: number): string;

/**
 * Weekly diary grid for the diary text, as JSON, glucose shown in `unit`.
 */
export function weeklyGrid(diary: string, week_start: string, tz_offset_min: number, unit: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bmi: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly convert: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly glucoseStats: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly weeklyGrid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
