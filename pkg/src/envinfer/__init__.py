"""Infer a compatible runtime environment for single-file Python programs."""

from .codeparse import (
    PY2,
    PY3,
    ParseError,
    ParseForest,
    ParseTree,
    StdlibProfile,
    UnparseableError,
    build_forest,
    default_profile,
    load_profile,
    read_source,
)
from .depgraph import DependencyGraph, build_dependency_graph
from .discovery import (
    CandidateLibrary,
    DiscoveryResult,
    FallbackMarker,
    discover_candidates,
    discover_forest,
    matching_degree,
    select_python_version,
)
from .emitter import (
    EnvironmentPlan,
    plan_environment,
    render_dockerfile,
    render_requirements,
)
from .kg import KglError, KnowledgeGraph, load_graph, save_graph
from .pipeline import InferenceResult, UnsatisfiableError, infer
from .solver import SolveStats, Subgraph, heuristic_solve, solve, validate_subgraph
from .versioning import (
    InvalidNameError,
    SpecifierParseError,
    UnsupportedVersionError,
    VersionId,
    VersionSpecifier,
    compare,
    normalize_name,
    parse_specifier,
    parse_version,
    satisfies,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
