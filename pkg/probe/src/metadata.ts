/**
 * Reading dependency declarations out of an installed distribution's
 * METADATA file.
 */

import { normalizeName } from './kgl';

export interface RequirementLine {
    dependency: string;
    specifier: string;
    /** Environment marker text, present when one was stripped. */
    marker?: string;
    /** Extra name when the requirement only applies to an extra. */
    extra?: string;
}

/**
 * Parse one `Requires-Dist:` value.
 *
 * Accepts both spellings seen in the wild: `numpy (<1.16,>=1.11)` and
 * `numpy<1.16,>=1.11`, optionally followed by `; marker`.
 */
export function parseRequiresDist(value: string): RequirementLine {
    let body = value.trim();
    let marker: string | undefined;
    const semi = body.indexOf(';');
    if (semi >= 0) {
        marker = body.slice(semi + 1).trim();
        body = body.slice(0, semi).trim();
    }

    let extra: string | undefined;
    if (marker) {
        const match = marker.match(/^extra\s*==\s*['"]([^'"]+)['"]$/);
        if (match) extra = match[1];
    }

    let name = body;
    let specifier = '';
    const paren = body.indexOf('(');
    if (paren >= 0) {
        name = body.slice(0, paren).trim();
        specifier = body.slice(paren + 1).replace(/\)\s*$/, '').trim();
    } else {
        const op = body.search(/[<>=!~]/);
        if (op >= 0) {
            name = body.slice(0, op).trim();
            specifier = body.slice(op).trim();
        }
    }
    // drop extras brackets on the dependency name itself
    name = name.replace(/\[[^\]]*\]/, '');

    return {
        dependency: normalizeName(name),
        specifier: specifier.replace(/\s+/g, ''),
        ...(marker ? { marker } : {}),
        ...(extra ? { extra } : {}),
    };
}

/** All Requires-Dist lines from METADATA text, headers section only. */
export function requirementsFromMetadata(text: string): RequirementLine[] {
    const requirements: RequirementLine[] = [];
    for (const line of text.split('\n')) {
        if (line === '') break; // body starts; headers are done
        if (line.startsWith('Requires-Dist:')) {
            requirements.push(parseRequiresDist(line.slice('Requires-Dist:'.length)));
        }
    }
    return requirements;
}

/** The Name: header, normalized; null when absent. */
export function nameFromMetadata(text: string): string | null {
    for (const line of text.split('\n')) {
        if (line === '') break;
        if (line.startsWith('Name:')) {
            return normalizeName(line.slice('Name:'.length).trim());
        }
    }
    return null;
}
