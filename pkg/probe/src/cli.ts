#!/usr/bin/env node
/**
 * kg-probe: build knowledge-graph records for a list of packages by
 * installing and introspecting each available version.
 */

import * as fs from 'fs/promises';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { KglRecord, serialize } from './kgl';
import { probeVersion } from './probe';
import { discoverVersions } from './versions';

interface Task {
    pkg: string;
    version: string | null; // null: discover all versions
}

function parseSpec(spec: string): Task {
    const eq = spec.indexOf('==');
    if (eq >= 0) {
        return { pkg: spec.slice(0, eq), version: spec.slice(eq + 2) };
    }
    return { pkg: spec, version: null };
}

async function pool<T>(items: T[], width: number, work: (item: T) => Promise<void>) {
    const queue = [...items];
    const workers = Array.from({ length: Math.max(1, width) }, async () => {
        for (;;) {
            const item = queue.shift();
            if (item === undefined) return;
            await work(item);
        }
    });
    await Promise.all(workers);
}

export async function main(argv: string[]): Promise<number> {
    const args = await yargs(argv)
        .scriptName('kg-probe')
        .usage('$0 [packages..]', 'probe packages and emit knowledge-graph records')
        .positional('packages', {
            describe: 'package names, optionally pinned as name==version',
            type: 'string',
            array: true,
        })
        .option('list', { type: 'string', describe: 'file with one package per line' })
        .option('python', { type: 'string', default: 'python3', describe: 'interpreter to probe under' })
        .option('find-links', { type: 'string', describe: 'local wheel directory; disables the network index' })
        .option('out', { type: 'string', describe: 'output file (default stdout)' })
        .option('jobs', { type: 'number', default: 1, describe: 'parallel probe tasks' })
        .option('install-timeout', { type: 'number', default: 300, describe: 'seconds per install' })
        .option('import-timeout', { type: 'number', default: 60, describe: 'seconds per module import' })
        .strict()
        .parse();

    const specs: string[] = [...((args.packages as string[] | undefined) ?? [])];
    if (args.list) {
        const text = await fs.readFile(args.list, 'utf-8');
        for (const line of text.split('\n')) {
            const trimmed = line.trim();
            if (trimmed && !trimmed.startsWith('#')) specs.push(trimmed);
        }
    }
    if (specs.length === 0) {
        process.stderr.write('kg-probe: no packages given\n');
        return 2;
    }

    const index = {
        python: args.python,
        findLinks: args['find-links'] as string | undefined,
    };

    const tasks: Task[] = [];
    const comments: string[] = [];
    for (const spec of specs.map(parseSpec)) {
        if (spec.version !== null) {
            tasks.push(spec);
            continue;
        }
        const discovered = await discoverVersions(spec.pkg, index);
        if (discovered.warning) comments.push(discovered.warning);
        for (const version of discovered.versions) {
            tasks.push({ pkg: spec.pkg, version });
        }
    }

    const records: KglRecord[] = [];
    let failed = false;
    await pool(tasks, args.jobs, async (task) => {
        try {
            const report = await probeVersion(task.pkg, task.version as string, {
                ...index,
                installTimeout: args['install-timeout'],
                importTimeout: args['import-timeout'],
            });
            records.push(...report.records);
            comments.push(...report.comments);
        } catch (error) {
            failed = true;
            process.stderr.write(`kg-probe: ${task.pkg} ${task.version}: ${error}\n`);
        }
    });

    const output = serialize(dedupe(records), comments);
    if (args.out) {
        await fs.writeFile(args.out, output);
    } else {
        process.stdout.write(output);
    }
    return failed ? 1 : 0;
}

function dedupe(records: KglRecord[]): KglRecord[] {
    const seen = new Set<string>();
    return records.filter((record) => {
        const key = JSON.stringify(record);
        if (seen.has(key)) return false;
        seen.add(key);
        return true;
    });
}

if (require.main === module) {
    main(hideBin(process.argv)).then(
        (code) => process.exit(code),
        (error) => {
            process.stderr.write(`kg-probe: ${error}\n`);
            process.exit(1);
        },
    );
}
