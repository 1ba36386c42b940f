/**
 * The newline-delimited JSON knowledge-graph exchange format.
 *
 * Each line is either a `#` comment or one JSON record; records may appear
 * in any order. This mirrors what the consuming loader accepts.
 */

export interface PackageRecord {
    type: 'package';
    name: string;
}

export interface VersionRecord {
    type: 'version';
    package: string;
    version: string;
    install_status: 'success' | 'fail';
}

export interface ModuleRecord {
    type: 'module';
    package: string;
    version: string;
    name: string;
    import_status: boolean;
}

export interface AttributeRecord {
    type: 'attribute';
    package: string;
    version: string;
    module: string;
    name: string;
}

export interface RequiresRecord {
    type: 'requires';
    package: string;
    version: string;
    dependency: string;
    specifier: string;
}

export type KglRecord =
    | PackageRecord
    | VersionRecord
    | ModuleRecord
    | AttributeRecord
    | RequiresRecord;

/** Lowercase and collapse separator runs, the shared package-name spelling. */
export function normalizeName(name: string): string {
    return name.toLowerCase().replace(/[-_.]+/g, '-');
}

const TYPE_ORDER: Record<KglRecord['type'], number> = {
    package: 0,
    version: 1,
    module: 2,
    attribute: 3,
    requires: 4,
};

/** Stable order so identical probes serialize identically. */
export function sortRecords(records: KglRecord[]): KglRecord[] {
    return [...records].sort((a, b) => {
        const byType = TYPE_ORDER[a.type] - TYPE_ORDER[b.type];
        if (byType !== 0) return byType;
        const ka = JSON.stringify(a);
        const kb = JSON.stringify(b);
        return ka < kb ? -1 : ka > kb ? 1 : 0;
    });
}

export function serialize(records: KglRecord[], comments: string[] = []): string {
    const lines = comments.map((c) => (c.startsWith('#') ? c : `# ${c}`));
    for (const record of sortRecords(records)) {
        lines.push(JSON.stringify(record));
    }
    return lines.join('\n') + (lines.length ? '\n' : '');
}

/** Parse KGL text back into records, skipping comments and blank lines. */
export function parse(text: string): KglRecord[] {
    const records: KglRecord[] = [];
    for (const raw of text.split('\n')) {
        const line = raw.trim();
        if (!line || line.startsWith('#')) continue;
        const value = JSON.parse(line) as KglRecord;
        if (!(value.type in TYPE_ORDER)) {
            throw new Error(`unknown record type: ${value.type}`);
        }
        records.push(value);
    }
    return records;
}
