/**
 * Integration tests against the fixture wheel index. Each probe creates a
 * real virtual environment, so these are slow by unit-test standards.
 */

import * as fs from 'fs/promises';
import * as os from 'os';
import * as path from 'path';
import { describe, expect, it } from 'vitest';

import { KglRecord, serialize } from '../src/kgl';
import { ProbeReport, probeVersion } from '../src/probe';
import { run } from '../src/run';
import { discoverVersions } from '../src/versions';

const WHEELS = path.join(__dirname, '..', 'fixtures', 'wheels');
const OPTIONS = { python: 'python3', findLinks: WHEELS };

function ofType<T extends KglRecord['type']>(report: ProbeReport, type: T) {
    return report.records.filter((r) => r.type === type) as Extract<KglRecord, { type: T }>[];
}

describe('version discovery', () => {
    it('lists every release the index offers', async () => {
        const result = await discoverVersions('gpkit', OPTIONS);
        expect(result.versions.sort()).toEqual(['0.9.9.2', '0.9.9.9', '0.9.9.9.1']);
    });

    it('returns empty with a warning for unknown packages', async () => {
        const result = await discoverVersions('no-such-package-xyz', OPTIONS);
        expect(result.versions).toEqual([]);
        expect(result.warning).toContain('no-such-package-xyz');
    });
});

describe('probing a healthy package', () => {
    it('records modules, attributes and no underscore names', async () => {
        const report = await probeVersion('demo', '1.0.0', OPTIONS);
        expect(ofType(report, 'version')).toEqual([
            { type: 'version', package: 'demo', version: '1.0.0', install_status: 'success' },
        ]);
        expect(ofType(report, 'module')).toEqual([
            { type: 'module', package: 'demo', version: '1.0.0', name: 'demo', import_status: true },
        ]);
        const attributes = ofType(report, 'attribute').map((r) => r.name);
        expect(attributes).toContain('X');
        for (const record of report.records) {
            if (record.type === 'module' || record.type === 'attribute') {
                expect(record.name.startsWith('_')).toBe(false);
            }
        }
    }, 120_000);

    it('is idempotent', async () => {
        const first = await probeVersion('demo', '1.0.0', OPTIONS);
        const second = await probeVersion('demo', '1.0.0', OPTIONS);
        expect(first.records).toEqual(second.records);
    }, 240_000);
});

describe('probing awkward packages', () => {
    it('marks a package that installs but cannot import', async () => {
        const report = await probeVersion('brokenimport', '9.6.0', OPTIONS);
        expect(ofType(report, 'version')[0].install_status).toBe('success');
        const modules = ofType(report, 'module');
        expect(modules).toHaveLength(1);
        expect(modules[0].import_status).toBe(false);
        expect(ofType(report, 'attribute')).toEqual([]);
    }, 120_000);

    it('records declared dependencies with raw specifiers', async () => {
        const report = await probeVersion('depdemo', '1.0.0', OPTIONS);
        const requires = ofType(report, 'requires');
        expect(requires).toContainEqual({
            type: 'requires',
            package: 'depdemo',
            version: '1.0.0',
            dependency: 'numpy',
            specifier: '<1.16,>=1.11',
        });
        expect(requires).toContainEqual({
            type: 'requires',
            package: 'depdemo',
            version: '1.0.0',
            dependency: 'futures',
            specifier: '>=3.0',
        });
        expect(report.comments.some((c) => c.includes('marker stripped'))).toBe(true);
    }, 120_000);

    it('marks an unavailable version as an install failure', async () => {
        const report = await probeVersion('demo', '99.0.0', OPTIONS);
        expect(ofType(report, 'version')[0].install_status).toBe('fail');
        expect(ofType(report, 'module')).toEqual([]);
    }, 120_000);

    it('falls back to RECORD when top_level.txt is missing', async () => {
        const report = await probeVersion('notoplevel', '2.0.0', OPTIONS);
        const modules = ofType(report, 'module').map((r) => r.name);
        expect(modules).toEqual(['ntl_pkg']);
    }, 120_000);

    it('walks submodules recursively', async () => {
        const report = await probeVersion('gpkit', '0.9.9.2', OPTIONS);
        const modules = ofType(report, 'module').map((r) => r.name);
        expect(modules).toEqual(['gpkit', 'gpkit.constraints']);
        const attributes = ofType(report, 'attribute');
        expect(attributes).toContainEqual({
            type: 'attribute',
            package: 'gpkit',
            version: '0.9.9.2',
            module: 'gpkit.constraints',
            name: 'ConstraintSet',
        });
    }, 120_000);
});

describe('round trip into the environment inference toolchain', () => {
    it('criterion 9: probed fixture wheels load as a valid knowledge graph', async () => {
        const targets: Array<[string, string]> = [
            ['demo', '1.0.0'],
            ['brokenimport', '9.6.0'],
            ['depdemo', '1.0.0'],
            ['gpkit', '0.9.9.2'],
        ];
        const records: KglRecord[] = [];
        const comments: string[] = [];
        for (const [pkg, version] of targets) {
            const report = await probeVersion(pkg, version, OPTIONS);
            records.push(...report.records);
            comments.push(...report.comments);
        }

        const dir = await fs.mkdtemp(path.join(os.tmpdir(), 'kgl-roundtrip-'));
        const out = path.join(dir, 'probed.kgl');
        await fs.writeFile(out, serialize(records, comments));
        try {
            const result = await run('envinfer', ['validate-kg', out], 60_000);
            const ok =
                result.code === 0 &&
                result.stdout.includes('valid:') &&
                records.some(
                    (r) =>
                        r.type === 'version' &&
                        r.package === 'brokenimport' &&
                        r.install_status === 'success',
                ) &&
                records.some(
                    (r) =>
                        r.type === 'module' &&
                        r.package === 'brokenimport' &&
                        r.import_status === false,
                );
            // eslint-disable-next-line no-console
            console.log(
                `[${ok ? 'PASS' : 'FAIL'}] criterion 9: probe round-trip accepted by the graph loader`,
            );
            expect(result.code).toBe(0);
            expect(result.stdout).toContain('valid:');
            expect(ok).toBe(true);
        } finally {
            await fs.rm(dir, { recursive: true, force: true });
        }
    }, 600_000);
});
