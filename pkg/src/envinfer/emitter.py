"""Turn a solved subgraph into requirements.txt and a Dockerfile.

A package is installed explicitly when nothing selected depends on it, or
when its selected version is not what an installer would pick anyway (the
newest version satisfying the constraints active in the subgraph).  All
other selections are implied and surface only as trailing comments.
Install order is a topological sort of the dependency edges so every
dependency is installed ahead of its dependents.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .codeparse import PY2
from .depgraph import DependencyGraph, is_package, is_version, package_node
from .discovery import DiscoveryResult
from .solver import Subgraph
from .versioning import VersionId, normalize_name, satisfies

DEFAULT_BASE_PY2 = "python:2.7.18"
DEFAULT_BASE_PY3 = "python:3.8.11"


@dataclass
class EnvironmentPlan:
    python_major: str
    explicit: list[tuple[str, Optional[VersionId]]] = field(default_factory=list)
    implicit: list[tuple[str, VersionId]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def plan_environment(
    dg: DependencyGraph, sub: Subgraph, discovery: DiscoveryResult
) -> EnvironmentPlan:
    selected: dict[str, VersionId] = {}
    for node in sub.nodes:
        if is_version(node):
            selected[node[1]] = dg.version_ids[node]

    # dependency edges between selected packages: dep before dependent
    dependents: dict[str, set[str]] = {name: set() for name in selected}
    requires_of: dict[str, set[str]] = {name: set() for name in selected}
    for name, version in selected.items():
        vnode = ("version", name, str(version))
        for succ in dg.successors(vnode):
            if is_package(succ) and (vnode, succ) in dg.labels and succ[1] in selected:
                requires_of[name].add(succ[1])
                dependents[succ[1]].add(name)

    explicit_names = {name for name in selected if not dependents[name]}
    for name, version in selected.items():
        if name in explicit_names:
            continue
        if version != _newest_satisfying(dg, sub, name):
            explicit_names.add(name)

    order, cycle = _topo_order(selected, requires_of, dependents)
    plan = EnvironmentPlan(python_major=discovery.python_major)
    if cycle:
        plan.warnings.append(
            "dependency cycle among " + ", ".join(cycle) + "; listed in name order"
        )
    for name in order:
        if name in explicit_names:
            plan.explicit.append((name, selected[name]))
        else:
            plan.implicit.append((name, selected[name]))
    for root in sorted(discovery.fallback_installs):
        plan.explicit.append((normalize_name(root), None))
    return plan


def _newest_satisfying(dg: DependencyGraph, sub: Subgraph, name: str) -> Optional[VersionId]:
    labels = dg.in_labels(package_node(name), sub.edges)
    best = None
    for succ in dg.successors(package_node(name)):
        if not is_version(succ):
            continue
        version = dg.version_ids[succ]
        if all(satisfies(version, spec) for spec in labels):
            if best is None or version > best:
                best = version
    return best


def _topo_order(selected, requires_of, dependents) -> tuple[list[str], list[str]]:
    """Kahn's algorithm over "dependency before dependent", names break ties."""
    remaining = {name: len(requires_of[name]) for name in selected}
    ready = [name for name, count in remaining.items() if count == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        del remaining[name]
        for dependent in dependents[name]:
            if dependent in remaining:
                remaining[dependent] -= 1
                if remaining[dependent] == 0:
                    heapq.heappush(ready, dependent)
    cycle = sorted(remaining)
    order.extend(cycle)
    return order, cycle


def render_requirements(plan: EnvironmentPlan) -> str:
    lines = [f"# {warning}" for warning in plan.warnings]
    for name, pin in plan.explicit:
        lines.append(name if pin is None else f"{name}=={pin}")
    for name, version in plan.implicit:
        lines.append(f"# implied: {name}=={version}")
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def render_dockerfile(
    plan: EnvironmentPlan,
    script_name: str,
    base2: str = DEFAULT_BASE_PY2,
    base3: str = DEFAULT_BASE_PY3,
) -> str:
    base = base2 if plan.python_major == PY2 else base3
    lines = [f"FROM {base}", "WORKDIR /app"]
    if plan.explicit:
        lines.append("COPY requirements.txt .")
        lines.append("RUN pip install -r requirements.txt")
    lines.append(f"COPY {script_name} .")
    lines.append(f'CMD ["python", "{script_name}"]')
    return "\n".join(lines) + "\n"
