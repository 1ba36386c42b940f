"""Compatible-subgraph search: heuristic depth-first traversal with a SAT fallback.

The heuristic walks the dependency graph from the start node, preferring the
newest version at every disjunction and pruning sibling versions whose
dependency requirements are identical to one that already failed.
Backtracking is limited to the current search path, so a ``None`` answer is
not a proof of unsatisfiability; the caller falls back to the complete CNF
encoding in :mod:`envinfer.cnf`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cnf import encode_cnf, sat_solve
from .depgraph import (
    START,
    DependencyGraph,
    is_conjunction,
    is_package,
    is_version,
)
from .versioning import VersionSpecifier, satisfies


@dataclass
class Subgraph:
    nodes: set[tuple] = field(default_factory=set)
    edges: set[tuple] = field(default_factory=set)  # (u, v) pairs
    chosen: dict[str, str] = field(default_factory=dict)  # package -> version text
    # versions removed after a conflict stay banned on the current search
    # path; without this, requirement cycles can recreate identical states
    banned: set[tuple] = field(default_factory=set)

    def copy(self) -> "Subgraph":
        return Subgraph(set(self.nodes), set(self.edges), dict(self.chosen), set(self.banned))

    def add(self, node: tuple, parent: Optional[tuple]) -> None:
        self.nodes.add(node)
        if parent is not None:
            self.edges.add((parent, node))
        if is_version(node):
            self.chosen[node[1]] = node[2]

    def selected_versions(self) -> dict[str, str]:
        return dict(self.chosen)


@dataclass
class TraceEvent:
    kind: str  # choose / conflict / remove / prune / fallback
    detail: str


@dataclass
class SolveStats:
    trace: list[TraceEvent] = field(default_factory=list)
    heuristic_used: bool = False
    heuristic_succeeded: bool = False
    sat_invocations: int = 0

    def log(self, kind: str, detail: str) -> None:
        self.trace.append(TraceEvent(kind, detail))


def _satisfies_all(dg, vnode, labels: list[VersionSpecifier]) -> bool:
    version = dg.version_ids[vnode]
    return all(satisfies(version, spec) for spec in labels)


def _reachable_prune(sub: Subgraph) -> Subgraph:
    """Drop nodes and edges no longer reachable from the start node."""
    adjacency: dict[tuple, list[tuple]] = {}
    for (u, v) in sub.edges:
        adjacency.setdefault(u, []).append(v)
    reachable = set()
    stack = [START]
    while stack:
        node = stack.pop()
        if node in reachable or node not in sub.nodes:
            continue
        reachable.add(node)
        stack.extend(adjacency.get(node, ()))
    pruned = Subgraph(
        nodes={n for n in sub.nodes if n in reachable},
        edges={(u, v) for (u, v) in sub.edges if u in reachable and v in reachable},
        banned=set(sub.banned),
    )
    for node in pruned.nodes:
        if is_version(node):
            pruned.chosen[node[1]] = node[2]
    return pruned


def heuristic_solve(dg: DependencyGraph, stats: Optional[SolveStats] = None) -> Optional[Subgraph]:
    if stats is None:
        stats = SolveStats()
    stats.heuristic_used = True
    result = _extend(dg, stats, Subgraph(), START, None)
    if result is not None:
        stats.heuristic_succeeded = True
    return result


def _extend(dg, stats, sub: Subgraph, node: tuple, parent: Optional[tuple]) -> Optional[Subgraph]:
    if node in sub.nodes and is_conjunction(node):
        # diamond or cycle re-entry: constraints already enforced on this path
        work = sub.copy()
        if parent is not None:
            work.edges.add((parent, node))
        return work

    work = sub.copy()
    work.add(node, parent)

    if is_conjunction(node):
        for succ in dg.successors(node):
            work = _extend(dg, stats, work, succ, node)
            if work is None:
                return None
            if node not in work.nodes:
                # a conflict below removed this very node from the solution;
                # its remaining requirements no longer apply
                return work
        return work

    # disjunction node: module or package
    if is_package(node):
        return _visit_package(dg, stats, work, node)
    return _visit_module(dg, stats, work, node)


def _visit_package(dg, stats, work: Subgraph, node: tuple) -> Optional[Subgraph]:
    name = node[1]
    labels = dg.in_labels(node, work.edges)

    existing = None
    for succ in dg.successors(node):
        if (node, succ) in work.edges:
            existing = succ
            break
    if existing is not None:
        if _satisfies_all(dg, existing, labels):
            return work
        stats.log("conflict", f"{name} {existing[2]} violates new requirements")
        work.edges.discard((node, existing))
        work.banned.add(existing)
        work = _reachable_prune(work)
        stats.log("remove", f"removed {name} {existing[2]} and its unsupported dependencies")
        labels = dg.in_labels(node, work.edges)

    chosen = work.chosen.get(name)
    if chosen is not None:
        pinned = ("version", name, chosen)
        usable = pinned not in work.banned and _satisfies_all(dg, pinned, labels)
        candidates = [pinned] if usable else []
    else:
        candidates = [
            succ
            for succ in dg.successors(node)
            if is_version(succ)
            and succ not in work.banned
            and _satisfies_all(dg, succ, labels)
        ]
    return _try_candidates(dg, stats, work, node, candidates)


def _visit_module(dg, stats, work: Subgraph, node: tuple) -> Optional[Subgraph]:
    candidates = []
    for succ in dg.successors(node):
        if succ in work.banned:
            continue
        pkg = succ[1]
        chosen = work.chosen.get(pkg)
        if chosen is not None and chosen != succ[2]:
            continue
        labels = dg.in_labels(("package", pkg), work.edges)
        if _satisfies_all(dg, succ, labels):
            candidates.append(succ)
    return _try_candidates(dg, stats, work, node, candidates)


def _try_candidates(dg, stats, work, node, candidates) -> Optional[Subgraph]:
    queue = list(candidates)
    while queue:
        candidate = queue.pop(0)
        stats.log("choose", f"{node[0]} {node[-1]}: trying {candidate[1]} {candidate[2]}")
        result = _extend(dg, stats, work, candidate, node)
        if result is not None:
            return result
        # skip siblings of the same package with identical dependency requirements
        failed_key = dg.requirement_key(candidate)
        skipped = [
            other
            for other in queue
            if other[1] == candidate[1] and dg.requirement_key(other) == failed_key
        ]
        for other in skipped:
            queue.remove(other)
            stats.log(
                "prune",
                f"skipping {other[1]} {other[2]}: identical requirements to failed {candidate[2]}",
            )
    return None


# -- Definition-1 validation ----------------------------------------------


def validate_subgraph(dg: DependencyGraph, sub: Subgraph) -> list[str]:
    """Check the compatible-subgraph conditions literally; empty list means valid."""
    errors = []
    all_nodes = dg.nodes
    if START not in sub.nodes:
        errors.append("start node missing")
    for node in sub.nodes:
        if node not in all_nodes:
            errors.append(f"foreign node {node}")
    for (u, v) in sub.edges:
        if u not in sub.nodes or v not in sub.nodes:
            errors.append(f"dangling edge {u}->{v}")
        if v not in dg.successors(u):
            errors.append(f"foreign edge {u}->{v}")
    for node in sub.nodes:
        successors = dg.successors(node)
        present = [s for s in successors if (node, s) in sub.edges]
        if is_conjunction(node):
            missing = [s for s in successors if s not in present or s not in sub.nodes]
            if missing:
                errors.append(f"conjunction {node} missing successors {missing}")
        else:
            if not present:
                errors.append(f"disjunction {node} has no successor")
            if is_package(node) and len(present) != 1:
                errors.append(f"package {node[1]} selects {len(present)} versions")
    for node in sub.nodes:
        if not is_package(node):
            continue
        present = [s for s in dg.successors(node) if (node, s) in sub.edges]
        if len(present) != 1:
            continue
        labels = dg.in_labels(node, sub.edges)
        if not _satisfies_all(dg, present[0], labels):
            errors.append(
                f"package {node[1]} version {present[0][2]} misses requirement intersection"
            )
    return errors


# -- complete solve -------------------------------------------------------


def decode_model(dg: DependencyGraph, model: dict[int, bool], variables: dict[tuple, int]) -> Subgraph:
    true_nodes = {node for node, var in variables.items() if model.get(var)}
    sub = Subgraph(nodes=set(true_nodes))
    for node in true_nodes:
        if is_package(node):
            # keep only the selected version edge for the package disjunction
            for succ in dg.successors(node):
                if succ in true_nodes and is_version(succ):
                    sub.edges.add((node, succ))
        else:
            for succ in dg.successors(node):
                if succ in true_nodes:
                    sub.edges.add((node, succ))
    return _reachable_prune(sub)


def solve(
    dg: DependencyGraph,
    mode: str = "auto",
    stats: Optional[SolveStats] = None,
) -> tuple[Optional[Subgraph], SolveStats]:
    """Heuristic first, complete SAT fallback; None means proven unsatisfiable."""
    if stats is None:
        stats = SolveStats()
    if mode not in ("auto", "heuristic-only", "sat-only"):
        raise ValueError(f"unknown solver mode {mode!r}")

    if mode in ("auto", "heuristic-only"):
        sub = heuristic_solve(dg, stats)
        if sub is not None:
            return sub, stats
        if mode == "heuristic-only":
            return None, stats
        stats.log("fallback", "heuristic found no subgraph; invoking SAT solver")

    formula = encode_cnf(dg)
    stats.sat_invocations += 1
    model = sat_solve(formula)
    if model is None:
        return None, stats
    return decode_model(dg, model, formula.variables), stats
