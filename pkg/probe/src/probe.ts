/**
 * Probing one (package, version): install it into a throwaway virtual
 * environment, enumerate its modules and attributes, read its declared
 * dependencies, and report everything as knowledge-graph records.
 */

import * as fs from 'fs/promises';
import * as os from 'os';
import * as path from 'path';

import { KglRecord, normalizeName, sortRecords } from './kgl';
import { nameFromMetadata, requirementsFromMetadata } from './metadata';
import { run } from './run';

const INTROSPECT = path.join(__dirname, '..', 'py', 'introspect.py');

export interface ProbeOptions {
    python: string;
    findLinks?: string;
    /** Wall-clock budget for the install step, seconds. */
    installTimeout?: number;
    /** Wall-clock budget per module import, seconds. */
    importTimeout?: number;
}

export interface ProbeReport {
    records: KglRecord[];
    comments: string[];
}

interface IntrospectedModule {
    name: string;
    importable: boolean;
    attributes: string[];
}

export async function probeVersion(
    pkg: string,
    version: string,
    options: ProbeOptions,
): Promise<ProbeReport> {
    const name = normalizeName(pkg);
    const records: KglRecord[] = [{ type: 'package', name }];
    const comments: string[] = [];

    const venv = await fs.mkdtemp(path.join(os.tmpdir(), 'kg-probe-'));
    try {
        const created = await run(options.python, ['-m', 'venv', venv], 120_000);
        if (created.code !== 0) {
            throw new Error(`venv creation failed: ${created.stderr}`);
        }
        const python = path.join(venv, 'bin', 'python');

        const installArgs = [
            '-m', 'pip', 'install',
            '--disable-pip-version-check', '--no-deps',
        ];
        if (options.findLinks) {
            installArgs.push('--no-index', '--find-links', options.findLinks);
        }
        installArgs.push(`${pkg}==${version}`);
        const install = await run(python, installArgs, (options.installTimeout ?? 300) * 1000);
        if (install.code !== 0 || install.timedOut) {
            records.push({ type: 'version', package: name, version, install_status: 'fail' });
            const reason = install.timedOut ? 'install timed out' : 'install failed';
            comments.push(`${reason}: ${name} ${version}`);
            return { records: sortRecords(records), comments };
        }
        records.push({ type: 'version', package: name, version, install_status: 'success' });

        const sitePackages = await findSitePackages(venv);
        const distInfo = await findDistInfo(sitePackages, name, version);
        if (distInfo === null) {
            comments.push(`no distribution metadata found for ${name} ${version}`);
            return { records: sortRecords(records), comments };
        }

        const metadata = await fs.readFile(path.join(distInfo, 'METADATA'), 'utf-8');
        for (const requirement of requirementsFromMetadata(metadata)) {
            if (requirement.extra) {
                comments.push(
                    `skipped extra-only requirement of ${name} ${version}: ` +
                        `${requirement.dependency} (extra ${requirement.extra})`,
                );
                continue;
            }
            if (requirement.marker) {
                comments.push(
                    `marker stripped for ${requirement.dependency}: ${requirement.marker}`,
                );
            }
            records.push({
                type: 'requires',
                package: name,
                version,
                dependency: requirement.dependency,
                specifier: requirement.specifier,
            });
        }

        const tops = await topLevelModules(distInfo);
        if (tops.length === 0) {
            comments.push(`no importable top level found for ${name} ${version}`);
            return { records: sortRecords(records), comments };
        }

        const modules = await introspect(python, tops, options.importTimeout ?? 60);
        for (const module of modules) {
            records.push({
                type: 'module',
                package: name,
                version,
                name: module.name,
                import_status: module.importable,
            });
            if (!module.importable) continue;
            for (const attribute of module.attributes) {
                if (attribute.startsWith('_')) continue;
                records.push({
                    type: 'attribute',
                    package: name,
                    version,
                    module: module.name,
                    name: attribute,
                });
            }
        }
        return { records: sortRecords(records), comments };
    } finally {
        await fs.rm(venv, { recursive: true, force: true });
    }
}

async function findSitePackages(venv: string): Promise<string> {
    const lib = path.join(venv, 'lib');
    for (const entry of await fs.readdir(lib)) {
        if (entry.startsWith('python')) {
            return path.join(lib, entry, 'site-packages');
        }
    }
    throw new Error(`no site-packages under ${lib}`);
}

/** Locate the installed distribution's .dist-info directory. */
async function findDistInfo(
    sitePackages: string,
    name: string,
    version: string,
): Promise<string | null> {
    let fallback: string | null = null;
    for (const entry of await fs.readdir(sitePackages)) {
        if (!entry.endsWith('.dist-info')) continue;
        const full = path.join(sitePackages, entry);
        const stem = entry.slice(0, -'.dist-info'.length);
        if (normalizeName(stem) === normalizeName(`${name}-${version}`)) {
            return full;
        }
        // spelling mismatch: fall back to the METADATA Name header
        try {
            const metadata = await fs.readFile(path.join(full, 'METADATA'), 'utf-8');
            if (nameFromMetadata(metadata) === name) fallback = full;
        } catch {
            // unreadable metadata: not ours
        }
    }
    return fallback;
}

/**
 * Top-level modules of a distribution: top_level.txt when present,
 * otherwise the first path segments of the files RECORD says it installed.
 */
async function topLevelModules(distInfo: string): Promise<string[]> {
    try {
        const text = await fs.readFile(path.join(distInfo, 'top_level.txt'), 'utf-8');
        const tops = text.split('\n').map((l) => l.trim()).filter(Boolean);
        if (tops.length > 0) return tops.filter((t) => !t.startsWith('_'));
    } catch {
        // no top_level.txt; derive from RECORD below
    }
    const record = await fs.readFile(path.join(distInfo, 'RECORD'), 'utf-8');
    const tops = new Set<string>();
    for (const line of record.split('\n')) {
        const file = line.split(',')[0];
        if (!file || file.startsWith('..') || file.includes('.dist-info')) continue;
        const segment = file.split('/')[0];
        if (segment === '__pycache__' || segment.startsWith('_')) continue;
        if (segment.includes('.')) {
            if (segment.endsWith('.py')) tops.add(segment.slice(0, -3));
        } else {
            tops.add(segment);
        }
    }
    return [...tops].sort();
}

async function introspect(
    python: string,
    tops: string[],
    importTimeout: number,
): Promise<IntrospectedModule[]> {
    const result = await run(
        python,
        [INTROSPECT, '--timeout', String(importTimeout), ...tops],
        (importTimeout + 30) * 1000 * tops.length,
    );
    if (result.code !== 0) {
        throw new Error(`introspection failed: ${result.stderr}`);
    }
    return (JSON.parse(result.stdout) as { modules: IntrospectedModule[] }).modules;
}
