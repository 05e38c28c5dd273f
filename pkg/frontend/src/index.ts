import { writeFile } from 'node:fs/promises';
import path from 'node:path';

import { onlyRow, runRecords } from './runner.js';

export { BenchvarCliError, resolveCli } from './runner.js';
export type { RecordsDocument, RecordsHeader } from './runner.js';

/** One replicate of each algorithm, matched on identical sources of variation. */
export type ScorePair = readonly [valueA: number, valueB: number];

export type Verdict =
    | 'not_significant'
    | 'significant_not_meaningful'
    | 'significant_and_meaningful';

export type TiePolicy = 'half_credit' | 'strict';

/** Row shape of the compare command, field names as the CLI emits them. */
export interface ComparisonDecision {
    p_a_beats_b: number;
    ci_lower: number;
    ci_upper: number;
    ci_level: number;
    resamples: number;
    verdict: Verdict;
    k: number;
}

export interface CompareOptions {
    /** Bootstrap seed; same seed and inputs reproduce the decision byte for byte. */
    seed: number;
    gamma?: number;
    delta?: number;
    ciLevel?: number;
    resamples?: number;
    tiePolicy?: TiePolicy;
}

export interface ProbOutperformOptions {
    /**
     * The point estimate never touches the bootstrap stream, but the CLI
     * still demands a seed; defaults to 0 so callers only pass one when
     * they also care about the interval.
     */
    seed?: number;
    tiePolicy?: TiePolicy;
}

export interface SampleSizeOptions {
    alpha?: number;
    beta?: number;
}

export interface BootstrapCiOptions {
    seed: number;
    level?: number;
    resamples?: number;
}

/** Row shape of the bootstrap-ci command. */
export interface BootstrapInterval {
    mean: number;
    ci_lower: number;
    ci_upper: number;
    ci_level: number;
    resamples: number;
    n: number;
}

/** Row shape of the oob-split command. */
export interface OobSplit {
    source_size: number;
    train_indices: number[];
    train_counts: number[];
    test_indices: number[];
}

interface SampleSizeRow {
    gamma: number;
    alpha: number;
    beta: number;
    replicates: number;
}

function pairsCsv(pairs: readonly ScorePair[]): string {
    const lines = ['value_a,value_b'];
    for (const [a, b] of pairs) {
        lines.push(`${a},${b}`);
    }
    return lines.join('\n') + '\n';
}

function compareArgs(csvPath: string, options: CompareOptions): string[] {
    const args = ['--pairs', csvPath, '--seed', String(options.seed)];
    if (options.gamma !== undefined) args.push('--gamma', String(options.gamma));
    if (options.delta !== undefined) args.push('--delta', String(options.delta));
    if (options.ciLevel !== undefined) args.push('--ci-level', String(options.ciLevel));
    if (options.resamples !== undefined) args.push('--resamples', String(options.resamples));
    if (options.tiePolicy !== undefined) args.push('--tie-policy', options.tiePolicy);
    return args;
}

/**
 * Decide whether algorithm A outperforms algorithm B from paired scores.
 *
 * Pairs are (value_a, value_b) with larger values winning. Omitted options
 * fall through to the CLI defaults; the returned row is the CLI's machine
 * output, unmodified.
 */
export async function comparePab(
    pairs: readonly ScorePair[],
    options: CompareOptions,
): Promise<ComparisonDecision> {
    const doc = await runRecords<ComparisonDecision>('compare', async (dir) => {
        const csvPath = path.join(dir, 'pairs.csv');
        await writeFile(csvPath, pairsCsv(pairs), 'utf8');
        return compareArgs(csvPath, options);
    });
    return onlyRow(doc);
}

/** Point estimate of the probability that A beats B on a fresh replicate. */
export async function probOutperform(
    pairs: readonly ScorePair[],
    options: ProbOutperformOptions = {},
): Promise<number> {
    const doc = await runRecords<ComparisonDecision>('compare', async (dir) => {
        const csvPath = path.join(dir, 'pairs.csv');
        await writeFile(csvPath, pairsCsv(pairs), 'utf8');
        return compareArgs(csvPath, { seed: options.seed ?? 0, tiePolicy: options.tiePolicy });
    });
    return onlyRow(doc).p_a_beats_b;
}

/** Replicates per algorithm needed to detect a win probability of gamma. */
export async function noetherSampleSize(
    gamma: number,
    options: SampleSizeOptions = {},
): Promise<number> {
    const doc = await runRecords<SampleSizeRow>('sample-size', () => {
        const args = ['--gamma', String(gamma)];
        if (options.alpha !== undefined) args.push('--alpha', String(options.alpha));
        if (options.beta !== undefined) args.push('--beta', String(options.beta));
        return args;
    });
    return onlyRow(doc).replicates;
}

/** Percentile bootstrap interval for the mean of the given values. */
export async function percentileBootstrapCi(
    values: readonly number[],
    options: BootstrapCiOptions,
): Promise<BootstrapInterval> {
    const doc = await runRecords<BootstrapInterval>('bootstrap-ci', async (dir) => {
        const csvPath = path.join(dir, 'values.csv');
        await writeFile(csvPath, 'value\n' + values.map(String).join('\n') + '\n', 'utf8');
        const args = ['--values', csvPath, '--seed', String(options.seed)];
        if (options.level !== undefined) args.push('--level', String(options.level));
        if (options.resamples !== undefined) args.push('--resamples', String(options.resamples));
        return args;
    });
    return onlyRow(doc);
}

/** Draw one bootstrap train multiset plus an out-of-bag test set. */
export async function oobSplit(
    sourceSize: number,
    trainSize: number,
    testSize: number,
    seed: number,
): Promise<OobSplit> {
    const doc = await runRecords<OobSplit>('oob-split', () => [
        '--source-size', String(sourceSize),
        '--train-size', String(trainSize),
        '--test-size', String(testSize),
        '--seed', String(seed),
    ]);
    return onlyRow(doc);
}
