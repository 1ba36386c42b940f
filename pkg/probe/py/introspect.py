"""Module enumeration and attribute introspection, run inside a probed venv.

Usage: python introspect.py --timeout SECONDS TOP_LEVEL [TOP_LEVEL ...]

Walks each top-level package on the filesystem to find submodules, then
imports every module in a child process (so an import crash or hang cannot
take the prober down) and reports dir() minus underscore names. Output is
one JSON document on stdout:

    {"modules": [{"name": ..., "importable": bool, "attributes": [...]}]}
"""

import argparse
import json
import os
import subprocess
import sys


def find_submodules(top):
    """Yield dotted module names under a top-level package, filesystem only."""
    yield top
    for root in sys.path:
        pkg_dir = os.path.join(root, top)
        if not os.path.isfile(os.path.join(pkg_dir, "__init__.py")):
            continue
        for dirpath, dirnames, filenames in os.walk(pkg_dir):
            dirnames[:] = [
                d
                for d in dirnames
                if not d.startswith("_")
                and os.path.isfile(os.path.join(dirpath, d, "__init__.py"))
            ]
            rel = os.path.relpath(dirpath, root).replace(os.sep, ".")
            for d in dirnames:
                yield f"{rel}.{d}"
            for f in filenames:
                if f.endswith(".py") and f != "__init__.py" and not f.startswith("_"):
                    yield f"{rel}.{f[:-3]}"
        break


PROBE_ONE = (
    "import importlib, json, sys\n"
    "m = importlib.import_module(sys.argv[1])\n"
    "print(json.dumps([a for a in dir(m) if not a.startswith('_')]))\n"
)


def probe_module(name, timeout):
    try:
        proc = subprocess.run(
            [sys.executable, "-c", PROBE_ONE, name],
            capture_output=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        return {"name": name, "importable": False, "attributes": []}
    if proc.returncode != 0:
        return {"name": name, "importable": False, "attributes": []}
    return {
        "name": name,
        "importable": True,
        "attributes": json.loads(proc.stdout.decode("utf-8")),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--timeout", type=float, default=60.0)
    parser.add_argument("tops", nargs="+")
    args = parser.parse_args()

    seen = set()
    modules = []
    for top in args.tops:
        for name in find_submodules(top):
            if name in seen or name.startswith("_"):
                continue
            seen.add(name)
            modules.append(probe_module(name, args.timeout))
    modules.sort(key=lambda m: m["name"])
    json.dump({"modules": modules}, sys.stdout)


if __name__ == "__main__":
    main()
