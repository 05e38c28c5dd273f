import { execFile } from 'node:child_process';
import { mkdtemp, readFile, rm } from 'node:fs/promises';
import { tmpdir } from 'node:os';
import path from 'node:path';

/** Header block carried by every machine-readable document the CLI writes. */
export interface RecordsHeader {
    tool: string;
    version: string;
    command: string;
    seed?: number;
    config?: Record<string, unknown>;
}

export interface RecordsDocument<Row> {
    header: RecordsHeader;
    rows: Row[];
}

/** Raised when the CLI is missing, rejects its arguments, or exits nonzero. */
export class BenchvarCliError extends Error {
    readonly command: string;
    readonly args: readonly string[];
    readonly exitCode: number | null;
    readonly stderr: string;

    constructor(
        message: string,
        command: string,
        args: readonly string[],
        exitCode: number | null,
        stderr: string,
    ) {
        super(message);
        this.name = 'BenchvarCliError';
        this.command = command;
        this.args = args;
        this.exitCode = exitCode;
        this.stderr = stderr;
    }
}

/** Executable to spawn; override with the BENCHVAR_CLI environment variable. */
export function resolveCli(): string {
    const override = process.env.BENCHVAR_CLI;
    return override !== undefined && override !== '' ? override : 'benchvar';
}

function spawnCli(command: string, args: readonly string[]): Promise<void> {
    return new Promise((resolve, reject) => {
        execFile(
            command,
            args,
            { maxBuffer: 64 * 1024 * 1024 },
            (error, _stdout, stderr) => {
                if (error === null) {
                    resolve();
                    return;
                }
                const code = (error as NodeJS.ErrnoException).code;
                if (code === 'ENOENT') {
                    reject(new BenchvarCliError(
                        `benchvar CLI not found (tried to run ${JSON.stringify(command)}); ` +
                        'install the Python package or point BENCHVAR_CLI at the executable',
                        command, args, null, stderr,
                    ));
                    return;
                }
                const exitCode = typeof code === 'number' ? code : null;
                const detail = stderr.trim() !== '' ? stderr.trim() : error.message;
                reject(new BenchvarCliError(
                    `benchvar ${args[0] ?? ''} failed: ${detail}`,
                    command, args, exitCode, stderr,
                ));
            },
        );
    });
}

/**
 * Run one CLI subcommand and parse the records document it writes.
 *
 * The prepare callback receives a scratch directory, drops any input files
 * the command needs into it, and returns the argument list. The machine
 * document only exists when --out is passed, so every call routes through
 * a file in the same scratch directory; it is removed afterwards.
 */
export async function runRecords<Row>(
    subcommand: string,
    prepare: (dir: string) => readonly string[] | Promise<readonly string[]>,
): Promise<RecordsDocument<Row>> {
    const command = resolveCli();
    const dir = await mkdtemp(path.join(tmpdir(), 'benchvar-'));
    try {
        const outPath = path.join(dir, 'out.json');
        const args = [subcommand, ...await prepare(dir), '--format', 'records', '--out', outPath];
        await spawnCli(command, args);
        return JSON.parse(await readFile(outPath, 'utf8')) as RecordsDocument<Row>;
    } finally {
        await rm(dir, { recursive: true, force: true });
    }
}

/** Unwrap the single row of a one-row document. */
export function onlyRow<Row>(doc: RecordsDocument<Row>): Row {
    if (doc.rows.length !== 1) {
        throw new BenchvarCliError(
            `expected a single-row ${doc.header.command} document, got ${doc.rows.length} rows`,
            resolveCli(), [doc.header.command], null, '',
        );
    }
    return doc.rows[0];
}
