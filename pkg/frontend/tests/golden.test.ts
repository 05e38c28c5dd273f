import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import {
    comparePab,
    noetherSampleSize,
    oobSplit,
    percentileBootstrapCi,
    probOutperform,
    type BootstrapCiOptions,
    type CompareOptions,
    type ProbOutperformOptions,
    type SampleSizeOptions,
    type ScorePair,
} from '../src/index.js';

interface GoldenCase {
    name: string;
    fn: string;
    pairs?: [number, number][];
    values?: number[];
    gamma?: number;
    sourceSize?: number;
    trainSize?: number;
    testSize?: number;
    seed?: number;
    options?: Record<string, unknown>;
    expected: unknown;
}

const fixtureUrl = new URL('./fixtures/golden.json', import.meta.url);
const golden: { cases: GoldenCase[] } = JSON.parse(readFileSync(fixtureUrl, 'utf8'));

function replay(c: GoldenCase): Promise<unknown> {
    switch (c.fn) {
        case 'comparePab':
            return comparePab(c.pairs as ScorePair[], c.options as unknown as CompareOptions);
        case 'probOutperform':
            return probOutperform(c.pairs as ScorePair[], c.options as ProbOutperformOptions);
        case 'noetherSampleSize':
            return noetherSampleSize(c.gamma as number, c.options as SampleSizeOptions);
        case 'percentileBootstrapCi':
            return percentileBootstrapCi(
                c.values as number[], c.options as unknown as BootstrapCiOptions);
        case 'oobSplit':
            return oobSplit(
                c.sourceSize as number, c.trainSize as number,
                c.testSize as number, c.seed as number);
        default:
            throw new Error(`golden fixture names unknown function ${c.fn}`);
    }
}

// The fixture rows were captured straight from the CLI's records output,
// so strict equality here means the binding reproduces the CLI bit for bit.
describe('golden fixture parity', () => {
    for (const c of golden.cases) {
        it(c.name, async () => {
            expect(await replay(c)).toStrictEqual(c.expected);
        });
    }
});
