"""Shared helpers: random solver instances and a brute-force oracle.

The oracle enumerates every package-to-version assignment and checks the
compatible-subgraph conditions directly, without touching the solver or the
CNF encoder, so solver results can be judged independently.
"""

import io
import itertools
import json
import random
from fractions import Fraction

from envinfer.codeparse import PY2
from envinfer.depgraph import build_dependency_graph, is_package, is_version
from envinfer.discovery import CandidateLibrary, DiscoveryResult
from envinfer.kg import load_graph
from envinfer.versioning import parse_specifier, parse_version, satisfies

VERSION_POOL = ["1.0", "1.5", "2.0", "2.5", "3.0"]
SPEC_POOL = ["", ">=1.5", ">=2.0", "<2.0", "<2.5", "==1.5", "==2.0", "!=2.0", ">=1.5,<3.0", ">=2.0,<2.5"]


def random_instance(rng: random.Random):
    """A random dependency graph plus the discovery stub that produced it.

    Up to 6 packages with up to 4 versions each, random requirement edges,
    one or two root modules.
    """
    n_pkgs = rng.randint(2, 6)
    names = [f"pkg{i}" for i in range(n_pkgs)]
    versions = {
        name: sorted(rng.sample(VERSION_POOL, rng.randint(1, 4)), key=parse_version)
        for name in names
    }

    records = []
    for name in names:
        records.append({"type": "package", "name": name})
        for v in versions[name]:
            status = "success" if rng.random() > 0.15 else "fail"
            records.append(
                {"type": "version", "package": name, "version": v, "install_status": status}
            )
            if status != "success":
                continue
            records.append(
                {"type": "module", "package": name, "version": v,
                 "name": name, "import_status": True}
            )
            for dep in rng.sample(names, min(len(names), rng.randint(0, 2))):
                if dep == name:
                    continue
                records.append(
                    {"type": "requires", "package": name, "version": v,
                     "dependency": dep, "specifier": rng.choice(SPEC_POOL)}
                )

    graph = load_graph([io.StringIO("\n".join(json.dumps(r) for r in records))])

    roots = rng.sample(names, rng.randint(1, min(2, n_pkgs)))
    discovery = DiscoveryResult(python_major=PY2)
    for root in roots:
        candidates = [
            CandidateLibrary(root, vn.version, Fraction(1), Fraction(0))
            for vn in graph.installable_versions(root)
        ]
        if candidates:
            discovery.candidates[root] = candidates
    dg, downgraded = build_dependency_graph(graph, discovery)
    for root in downgraded:
        discovery.candidates.pop(root, None)
    return graph, discovery, dg


def brute_force_satisfiable(dg, discovery) -> bool:
    """Enumerate all assignments; True when any compatible one exists."""
    packages = sorted({n[1] for n in dg.nodes if is_package(n)})
    choices = {
        name: [None] + [
            succ[2]
            for succ in dg.successors(("package", name))
            if is_version(succ)
        ]
        for name in packages
    }
    roots = {
        root: [
            (succ[1], succ[2])
            for succ in dg.successors(("module", root))
        ]
        for root in discovery.candidates
    }
    for combo in itertools.product(*(choices[name] for name in packages)):
        assignment = dict(zip(packages, combo))
        if _assignment_compatible(dg, assignment, roots):
            return True
    return False


def _assignment_compatible(dg, assignment, roots) -> bool:
    for root, candidates in roots.items():
        if not any(assignment.get(pkg) == vtext for pkg, vtext in candidates):
            return False
    for name, vtext in assignment.items():
        if vtext is None:
            continue
        vnode = ("version", name, vtext)
        for succ in dg.successors(vnode):
            if not is_package(succ) or (vnode, succ) not in dg.labels:
                continue
            dep = succ[1]
            dep_text = assignment.get(dep)
            if dep_text is None:
                return False
            spec = dg.labels[(vnode, succ)]
            if not satisfies(parse_version(dep_text), spec):
                return False
    return True


def newer_versions_justified(dg, sub, trace=()) -> bool:
    """Replay the recency rule for every selected version in a subgraph.

    For each selected package version, every newer installable version must
    be accounted for: it violates an active requirement on that package, it
    was tried and failed or removed during the search, it was pruned for
    having identical requirements, or it cannot slot into the solution.
    """
    tried = set()
    pruned = set()
    for event in trace:
        if event.kind == "choose":
            _, tail = event.detail.split(": trying ")
            pkg, ver = tail.rsplit(" ", 1)
            tried.add(("version", pkg, ver))
        elif event.kind == "prune":
            head = event.detail.split(":", 1)[0]
            pkg, ver = head.replace("skipping ", "").rsplit(" ", 1)
            pruned.add(("version", pkg, ver))

    for node in sub.nodes:
        if not is_version(node):
            continue
        name = node[1]
        pnode = ("package", name)
        labels = dg.in_labels(pnode, sub.edges)
        selected = dg.version_ids[node]
        for succ in dg.successors(pnode):
            if not is_version(succ):
                continue
            candidate = dg.version_ids[succ]
            if candidate <= selected:
                continue
            if not all(satisfies(candidate, spec) for spec in labels):
                continue  # newer version violates an active requirement
            if succ in sub.banned or succ in tried or succ in pruned:
                continue  # tried and failed, or removed after a conflict
            failed = {b for b in sub.banned | tried | pruned if b[1] == name}
            if dg.requirement_key(succ) in {dg.requirement_key(b) for b in failed}:
                continue  # identical requirements to a version that failed
            if not _substitution_compatible(dg, sub, name, succ):
                continue  # newer version conflicts downstream from here
            return False
    return True


def _substitution_compatible(dg, sub, name, replacement) -> bool:
    """Can the newer version slot into the final subgraph without conflict?"""
    chosen = {n[1]: n for n in sub.nodes if is_version(n)}
    chosen[name] = replacement
    vnode = replacement
    for succ in dg.successors(vnode):
        if not is_package(succ) or (vnode, succ) not in dg.labels:
            continue
        dep = succ[1]
        spec = dg.labels[(vnode, succ)]
        if dep not in chosen:
            # dependency not in the solution; it must have a version that fits
            fits = [
                s for s in dg.successors(succ)
                if is_version(s) and satisfies(dg.version_ids[s], spec)
            ]
            if not fits:
                return False
            continue
        if not satisfies(dg.version_ids[chosen[dep]], spec):
            return False
    return True
