"""The heterogeneous dependency graph solved for a compatible environment.

Nodes are plain tuples: ``("start",)``, ``("module", root)``,
``("package", name)`` and ``("version", name, version_text)``.  Start and
version nodes are conjunctions (all successors required); module and package
nodes are disjunctions (at least one successor, exactly one version for a
package).  Every edge into a package node carries a version specifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .discovery import DiscoveryResult
from .kg import KnowledgeGraph
from .versioning import ANY_VERSION, VersionId, VersionSpecifier

START = ("start",)

MAX_NODES = 50_000


class GraphTooLargeError(RuntimeError):
    pass


def module_node(root: str) -> tuple:
    return ("module", root)

def package_node(name: str) -> tuple:
    return ("package", name)

def version_node(name: str, version: VersionId) -> tuple:
    return ("version", name, str(version))

def is_conjunction(node: tuple) -> bool:
    return node[0] in ("start", "version")

def is_package(node: tuple) -> bool:
    return node[0] == "package"

def is_version(node: tuple) -> bool:
    return node[0] == "version"


@dataclass
class DependencyGraph:
    succ: dict[tuple, list[tuple]] = field(default_factory=dict)
    labels: dict[tuple, VersionSpecifier] = field(default_factory=dict)  # (u, v) -> spec
    version_ids: dict[tuple, VersionId] = field(default_factory=dict)

    @property
    def nodes(self) -> set[tuple]:
        found = set(self.succ)
        for targets in self.succ.values():
            found.update(targets)
        return found

    def add_edge(self, u: tuple, v: tuple, spec: Optional[VersionSpecifier] = None) -> None:
        targets = self.succ.setdefault(u, [])
        if v not in targets:
            targets.append(v)
        self.succ.setdefault(v, [])
        if spec is not None:
            self.labels[(u, v)] = spec

    def successors(self, node: tuple) -> list[tuple]:
        return self.succ.get(node, [])

    def label(self, u: tuple, v: tuple) -> VersionSpecifier:
        return self.labels.get((u, v), ANY_VERSION)

    def in_labels(self, node: tuple, edges) -> list[VersionSpecifier]:
        """Specifier labels on the given edges that point into ``node``."""
        found = []
        for (u, v) in edges:
            if v == node and (u, v) in self.labels:
                found.append(self.labels[(u, v)])
        return found

    def requirement_key(self, node: tuple):
        """Canonical multiset of (dependency, specifier) pairs of a version node."""
        pairs = []
        for succ in self.successors(node):
            if is_package(succ) and (node, succ) in self.labels:
                pairs.append((succ[1], self.labels[(node, succ)].canonical))
        return tuple(sorted(pairs))

    def sort_version_successors(self) -> None:
        """Order disjunction successors newest-version-first for the heuristic."""
        for node, targets in self.succ.items():
            if is_conjunction(node) or not targets:
                continue
            targets.sort(key=lambda v: (self.version_ids[v], v[1]), reverse=True)


def build_dependency_graph(
    graph: KnowledgeGraph, discovery: DiscoveryResult
) -> tuple[DependencyGraph, list[str]]:
    """Expand candidates and their transitive dependencies into a closed graph.

    Returns the graph plus the roots downgraded to fallback because no
    installable candidate version exists for them.
    """
    dg = DependencyGraph()
    dg.succ[START] = []
    downgraded: list[str] = []
    pending: list[tuple] = []
    expanded_packages: set[str] = set()
    expanded_versions: set[tuple] = set()

    for root in discovery.candidates:
        libs = discovery.candidates[root]
        usable = [
            lib for lib in libs
            if any(v.version == lib.version for v in graph.installable_versions(lib.package))
        ]
        if not usable:
            downgraded.append(root)
            continue
        mnode = module_node(root)
        dg.add_edge(START, mnode)
        for lib in usable:
            vnode = version_node(lib.package, lib.version)
            dg.version_ids[vnode] = lib.version
            dg.add_edge(mnode, vnode)
            # a selected candidate version pulls in its own package
            dg.add_edge(vnode, package_node(lib.package))
            pending.append(vnode)
            _expand_package(graph, dg, lib.package, pending, expanded_packages)

    while pending:
        vnode = pending.pop()
        if vnode in expanded_versions:
            continue
        expanded_versions.add(vnode)
        _, pkg_name, vkey = vnode
        entry = graph.version(pkg_name, dg.version_ids[vnode])
        for req in entry.requires:
            target = package_node(req.dependency)
            dg.add_edge(vnode, target, req.specifier)
            _expand_package(graph, dg, req.dependency, pending, expanded_packages)
        if len(dg.succ) > MAX_NODES:
            raise GraphTooLargeError(f"dependency graph exceeds {MAX_NODES} nodes")

    dg.sort_version_successors()
    return dg, downgraded


def _expand_package(graph, dg, name, pending, expanded_packages) -> None:
    if name in expanded_packages:
        return
    expanded_packages.add(name)
    pnode = package_node(name)
    dg.succ.setdefault(pnode, [])
    for vn in graph.installable_versions(name):
        vnode = version_node(name, vn.version)
        dg.version_ids[vnode] = vn.version
        dg.add_edge(pnode, vnode)
        pending.append(vnode)
