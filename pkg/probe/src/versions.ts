/**
 * Version discovery: ask the installer for an impossible version and read
 * the candidate list out of its error message.
 */

import { run } from './run';

export interface IndexOptions {
    /** Interpreter used to drive pip, e.g. "python3". */
    python: string;
    /** Local wheel directory; when set, the network index is disabled. */
    findLinks?: string;
    timeoutMs?: number;
}

export interface DiscoveryResult {
    versions: string[];
    warning?: string;
}

const FROM_VERSIONS = /\(from versions:([^)]*)\)/;

export async function discoverVersions(
    pkg: string,
    options: IndexOptions,
): Promise<DiscoveryResult> {
    const args = ['-m', 'pip', 'install', '--disable-pip-version-check', '--no-deps'];
    if (options.findLinks) {
        args.push('--no-index', '--find-links', options.findLinks);
    }
    // a version that can never exist; pip's error lists every real one
    args.push(`${pkg}==0.0.0.dev999999999`);
    const result = await run(options.python, args, options.timeoutMs ?? 120_000);

    const match = FROM_VERSIONS.exec(result.stderr + result.stdout);
    if (!match) {
        return { versions: [], warning: `no version listing for ${pkg}` };
    }
    const body = match[1].trim();
    if (body === '' || body === 'none') {
        return { versions: [], warning: `no versions available for ${pkg}` };
    }
    return { versions: body.split(',').map((v) => v.trim()).filter(Boolean) };
}
