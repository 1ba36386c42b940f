"""End-to-end inference: source text in, environment artifacts out."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .codeparse import ParseForest, StdlibProfile, build_forest, default_profile, PY2, PY3
from .depgraph import DependencyGraph, build_dependency_graph
from .discovery import DiscoveryResult, discover_forest, select_python_version
from .emitter import (
    DEFAULT_BASE_PY2,
    DEFAULT_BASE_PY3,
    EnvironmentPlan,
    plan_environment,
    render_dockerfile,
    render_requirements,
)
from .kg import KnowledgeGraph
from .solver import SolveStats, Subgraph, solve


class UnsatisfiableError(RuntimeError):
    """No compatible environment exists; carries the packages in conflict."""

    def __init__(self, packages: list[str]):
        self.packages = packages
        listed = ", ".join(packages) if packages else "unknown"
        super().__init__(f"no compatible environment; conflicting packages: {listed}")


@dataclass
class InferenceResult:
    python_major: str
    forest: ParseForest
    discovery: DiscoveryResult
    discoveries: dict[str, DiscoveryResult]
    graph: DependencyGraph
    subgraph: Subgraph
    stats: SolveStats
    plan: EnvironmentPlan
    requirements: str

    def dockerfile(
        self,
        script_name: str,
        base2: str = DEFAULT_BASE_PY2,
        base3: str = DEFAULT_BASE_PY3,
    ) -> str:
        return render_dockerfile(self.plan, script_name, base2=base2, base3=base3)


def infer(
    source: str,
    kgs: dict[str, KnowledgeGraph],
    profile2: Optional[StdlibProfile] = None,
    profile3: Optional[StdlibProfile] = None,
    solver_mode: str = "auto",
) -> InferenceResult:
    """Run parse, discovery, solving and planning for one source file.

    ``kgs`` maps a Python major ("py2"/"py3") to its knowledge graph; a graph
    must exist for every major that survives the syntax screens.

    Raises UnparseableError when neither syntax screen passes and
    UnsatisfiableError when the dependency graph has no compatible subgraph.
    """
    profile2 = profile2 or default_profile(PY2)
    profile3 = profile3 or default_profile(PY3)
    forest = build_forest(source, profile2, profile3)

    majors = sorted(forest.python_candidates & set(kgs))
    if not majors:
        needed = ", ".join(sorted(forest.python_candidates))
        raise KeyError(f"no knowledge graph configured for {needed}")
    discoveries: dict[str, DiscoveryResult] = {}
    for major in majors:
        discoveries[major] = discover_forest(kgs[major], forest.trees(major), major)
    python_major = select_python_version(discoveries)
    discovery = discoveries[python_major]

    dg, downgraded = build_dependency_graph(kgs[python_major], discovery)
    for root in downgraded:
        discovery.candidates.pop(root, None)
        discovery.fallback_installs.append(root)

    subgraph, stats = solve(dg, mode=solver_mode)
    if subgraph is None:
        raise UnsatisfiableError(_conflict_packages(discovery, stats))

    plan = plan_environment(dg, subgraph, discovery)
    return InferenceResult(
        python_major=python_major,
        forest=forest,
        discovery=discovery,
        discoveries=discoveries,
        graph=dg,
        subgraph=subgraph,
        stats=stats,
        plan=plan,
        requirements=render_requirements(plan),
    )


def _conflict_packages(discovery: DiscoveryResult, stats: SolveStats) -> list[str]:
    names = set()
    for event in stats.trace:
        if event.kind in ("conflict", "remove"):
            names.add(event.detail.split()[0])
    if not names:
        for libs in discovery.candidates.values():
            names.update(lib.package for lib in libs)
    return sorted(names)
