"""Candidate-library discovery: matching degree and the three filter stages.

For each parse tree the knowledge graph is queried in three steps: a lookup
of the top-level module name (S1), a submodule filter over spanning trees
(S2) and an attribute filter over the enriched trees (S3).  Scores are exact
rationals so that argmax ties are decided without floating-point noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

from .codeparse import PY3, ParseTree, tree_depth
from .kg import KnowledgeGraph, ModuleNode
from .versioning import VersionId


def matching_degree(resources: Iterable[str], library_paths: set[str]) -> Fraction:
    """Sum of longest-prefix matches, each weighted by the resource's length.

    Prefixes are whole dot-separated segments; partial identifier overlap
    never counts.
    """
    degree = Fraction(0)
    for resource in resources:
        segments = resource.split(".")
        best = 0
        for k in range(len(segments), 0, -1):
            if ".".join(segments[:k]) in library_paths:
                best = k
                break
        degree += Fraction(best, len(segments))
    return degree


@dataclass
class CandidateLibrary:
    package: str
    version: VersionId
    module_score: Fraction
    attribute_score: Fraction
    library_paths: set[str] = field(default_factory=set, repr=False)

    @property
    def degree(self) -> Fraction:
        return self.module_score + self.attribute_score


@dataclass(frozen=True)
class FallbackMarker:
    """S1 found nothing; the root will be installed by its own name, unpinned."""

    root: str


@dataclass
class StageReport:
    """Survivors and scores per discovery stage, for diagnostics."""

    s1_hits: list[tuple[str, str]] = field(default_factory=list)
    s2_scores: list[tuple[str, str, Fraction]] = field(default_factory=list)
    s2_survivors: list[tuple[str, str]] = field(default_factory=list)
    s3_scores: list[tuple[str, str, Fraction]] = field(default_factory=list)
    s3_survivors: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class DiscoveryResult:
    python_major: str
    candidates: dict[str, list[CandidateLibrary]] = field(default_factory=dict)
    fallback_installs: list[str] = field(default_factory=list)
    reports: dict[str, StageReport] = field(default_factory=dict)

    @property
    def total_degree(self) -> Fraction:
        total = Fraction(0)
        for libs in self.candidates.values():
            if libs:
                total += max(lib.degree for lib in libs)
        return total


def discover_candidates(
    graph: KnowledgeGraph,
    tree: ParseTree,
    report: Optional[StageReport] = None,
) -> Union[list[CandidateLibrary], FallbackMarker]:
    """Run S1-S3 for one parse tree; an empty S1 answer yields the fallback."""
    if report is None:
        report = StageReport()

    hits = graph.find_top_level_modules(tree.root)
    hits = [h for h in hits if _installable(graph, h)]
    report.s1_hits = [(h.package, str(h.version)) for h in hits]
    if not hits:
        return FallbackMarker(tree.root)

    max_hop = tree_depth(tree)
    module_claims = tree.module_paths() - tree.ambiguous_paths()
    attribute_claims = tree.attribute_paths() - tree.ambiguous_paths()
    ambiguous = tree.ambiguous_paths()

    # S2: submodule filter over spanning trees, import-true modules only
    scored: list[tuple[ModuleNode, dict[str, bool], Fraction, set[str], set[str]]] = []
    for hit in hits:
        spanning = graph.spanning_tree(hit, max_hop)
        importable = {path for path, ok in spanning.items() if ok}
        amb_as_modules = {p for p in ambiguous if p in importable}
        s2_resources = module_claims | amb_as_modules
        score = matching_degree(s2_resources, importable)
        scored.append((hit, spanning, score, importable, amb_as_modules))
        report.s2_scores.append((hit.package, str(hit.version), score))
    best_s2 = max(item[2] for item in scored)
    survivors = [item for item in scored if item[2] == best_s2]
    report.s2_survivors = [(h.package, str(h.version)) for h, *_ in survivors]

    # S3: attribute filter over trees enriched with module attributes
    candidates: list[CandidateLibrary] = []
    for hit, spanning, s2_score, importable, amb_as_modules in survivors:
        enriched = set(importable)
        owner = graph.version(hit.package, hit.version)
        for path in importable:
            module = owner.modules.get(path)
            if module is not None:
                for attr in module.attributes:
                    enriched.add(f"{path}.{attr}")
        s3_resources = attribute_claims | (ambiguous - amb_as_modules)
        s3_score = matching_degree(s3_resources, enriched)
        report.s3_scores.append((hit.package, str(hit.version), s3_score))
        candidates.append(
            CandidateLibrary(
                package=hit.package,
                version=hit.version,
                module_score=s2_score,
                attribute_score=s3_score,
                library_paths=enriched,
            )
        )
    best_s3 = max(c.attribute_score for c in candidates)
    final = [c for c in candidates if c.attribute_score == best_s3]
    report.s3_survivors = [(c.package, str(c.version)) for c in final]
    return final


def _installable(graph: KnowledgeGraph, module: ModuleNode) -> bool:
    try:
        return graph.version(module.package, module.version).install_status == "success"
    except KeyError:
        return False


def discover_forest(
    graph: KnowledgeGraph, trees: dict[str, ParseTree], python_major: str
) -> DiscoveryResult:
    result = DiscoveryResult(python_major=python_major)
    # tree order follows first appearance in the source; keep it for the solver
    for root in trees:
        report = StageReport()
        outcome = discover_candidates(graph, trees[root], report)
        result.reports[root] = report
        if isinstance(outcome, FallbackMarker):
            result.fallback_installs.append(outcome.root)
        else:
            result.candidates[root] = outcome
    return result


def select_python_version(results: dict[str, DiscoveryResult]) -> str:
    """Highest total matching degree wins; Python 3 wins exact ties."""
    if not results:
        raise ValueError("no candidate Python versions survived parsing")
    if len(results) == 1:
        return next(iter(results))
    best = max(r.total_degree for r in results.values())
    winners = {major for major, r in results.items() if r.total_degree == best}
    return PY3 if PY3 in winners else winners.pop()
