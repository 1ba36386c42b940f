"""In-memory package knowledge graph and its newline-delimited record format.

The graph holds four kinds of entities: packages, their versions (with an
install status), the modules each installed version provides (with an import
status) and the attributes of importable modules.  Each version also carries
its direct dependency requirements.  The on-disk form ("KGL") is one JSON
object per line with a self-describing ``type`` field; ``#`` lines are
comments.
"""

from __future__ import annotations

import json
import sys
import warnings
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional

from .versioning import (
    VersionId,
    VersionSpecifier,
    normalize_name,
    parse_specifier,
    parse_version,
    strip_marker,
)

INSTALL_STATUSES = ("success", "fail", "unknown")


class KglError(ValueError):
    """Malformed or inconsistent KGL input."""

    def __init__(self, message: str, source: str = "", line: int = 0):
        prefix = f"{source}:{line}: " if source else ""
        super().__init__(prefix + message)
        self.source = source
        self.line = line


class DuplicateVersionError(KglError):
    """Same (package, version) appears twice with conflicting content."""

    def __init__(self, message, source="", line=0, key=None):
        super().__init__(message, source, line)
        self.key = key


class NotFoundError(KeyError):
    pass


@dataclass
class ModuleNode:
    """A module of one specific package version; ``name`` is fully dotted."""

    package: str
    version: VersionId
    name: str
    import_status: bool
    attributes: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class RequiresEdge:
    package: str
    version: VersionId
    dependency: str
    specifier: VersionSpecifier
    specifier_text: str


@dataclass
class VersionNode:
    package: str
    version: VersionId
    install_status: str = "unknown"
    modules: dict[str, ModuleNode] = field(default_factory=dict)
    requires: list[RequiresEdge] = field(default_factory=list)


@dataclass
class PackageNode:
    name: str
    versions: dict[str, VersionNode] = field(default_factory=dict)  # keyed by canonical text


def _check_module_name(name: str) -> None:
    for segment in name.split("."):
        if not segment:
            raise ValueError(f"empty segment in module name {name!r}")
        if segment.startswith("_"):
            raise ValueError(f"underscore-prefixed module name {name!r}")


class KnowledgeGraph:
    """Immutable-after-load package graph with the query surface used downstream."""

    def __init__(self):
        self.packages: dict[str, PackageNode] = {}
        # top-level module name -> list of (package, version-key, module name)
        self._top_level_index: dict[str, list[tuple[str, str]]] = {}
        self._attribute_names: dict[str, str] = {}  # interned attribute identities

    # -- construction -----------------------------------------------------

    def _package(self, raw_name: str) -> PackageNode:
        name = normalize_name(raw_name)
        node = self.packages.get(name)
        if node is None:
            node = PackageNode(name=name)
            self.packages[name] = node
        return node

    def _intern_attr(self, name: str) -> str:
        return self._attribute_names.setdefault(name, sys.intern(name))

    def _reindex(self) -> None:
        self._top_level_index.clear()
        for pkg in self.packages.values():
            for vkey, vn in pkg.versions.items():
                for mod in vn.modules.values():
                    if "." not in mod.name:
                        self._top_level_index.setdefault(mod.name, []).append((pkg.name, vkey))

    # -- queries ----------------------------------------------------------

    def find_top_level_modules(self, name: str) -> list[ModuleNode]:
        """All top-level modules with exactly this name, across packages and versions."""
        if "." in name:
            raise ValueError(f"not a top-level name: {name!r}")
        hits = []
        for pkg_name, vkey in self._top_level_index.get(name, ()):
            hits.append(self.packages[pkg_name].versions[vkey].modules[name])
        return hits

    def spanning_tree(self, root: ModuleNode, max_hop: int) -> dict[str, bool]:
        """Modules reachable from ``root`` within ``max_hop`` submodule hops.

        Returns a mapping of dotted module path to import status; the root is
        always included.
        """
        if max_hop < 0:
            raise ValueError("max_hop must be >= 0")
        owner = self.version(root.package, root.version)
        base_depth = root.name.count(".")
        tree: dict[str, bool] = {}
        for mod in owner.modules.values():
            if mod.name == root.name or mod.name.startswith(root.name + "."):
                if mod.name.count(".") - base_depth <= max_hop:
                    tree[mod.name] = mod.import_status
        return tree

    def attributes_of(self, module: ModuleNode) -> set[str]:
        return set(module.attributes)

    def requirements_of(self, package: str, version: VersionId) -> list[RequiresEdge]:
        vn = self.version(package, version)
        if vn.install_status != "success":
            raise NotFoundError(f"{package} {version} was not successfully installed")
        return list(vn.requires)

    def installable_versions(self, package: str) -> list[VersionNode]:
        """Successfully installed versions, newest first."""
        pkg = self.packages.get(normalize_name(package))
        if pkg is None:
            return []
        good = [v for v in pkg.versions.values() if v.install_status == "success"]
        return sorted(good, key=lambda v: v.version, reverse=True)

    def version(self, package: str, version: VersionId) -> VersionNode:
        pkg = self.packages.get(normalize_name(package))
        if pkg is None:
            raise NotFoundError(f"unknown package {package!r}")
        key = version.key
        if key not in pkg.versions:
            raise NotFoundError(f"unknown version {package} {version}")
        return pkg.versions[key]

    # -- statistics -------------------------------------------------------

    def counts(self) -> dict[str, int]:
        n_versions = sum(len(p.versions) for p in self.packages.values())
        n_modules = sum(len(v.modules) for p in self.packages.values() for v in p.versions.values())
        n_attrs = sum(
            len(m.attributes)
            for p in self.packages.values()
            for v in p.versions.values()
            for m in v.modules.values()
        )
        n_requires = sum(
            len(v.requires) for p in self.packages.values() for v in p.versions.values()
        )
        return {
            "packages": len(self.packages),
            "versions": n_versions,
            "modules": n_modules,
            "attributes": n_attrs,
            "requires": n_requires,
        }


# -- loading / saving -----------------------------------------------------


def load_graph(paths_or_streams: Iterable) -> KnowledgeGraph:
    """Load one or more KGL files into a single graph.

    Later inputs may add packages and versions; re-stating an existing
    (package, version) is allowed only when the content is identical.
    """
    graph = KnowledgeGraph()
    for source in paths_or_streams:
        if hasattr(source, "read"):
            _load_stream(graph, source, getattr(source, "name", "<stream>"))
        else:
            with open(source, "r", encoding="utf-8") as handle:
                _load_stream(graph, handle, str(source))
    _validate(graph)
    graph._reindex()
    return graph


def _load_stream(graph: KnowledgeGraph, stream: IO[str], source: str) -> None:
    staged = KnowledgeGraph()
    records = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise KglError(f"invalid JSON: {exc}", source, lineno) from exc
        if not isinstance(record, dict) or "type" not in record:
            raise KglError("record must be an object with a 'type' field", source, lineno)
        records.append((lineno, record))

    # Records may arrive in any order; apply by record kind.
    order = {"package": 0, "version": 1, "module": 2, "attribute": 3, "requires": 4}
    try:
        records.sort(key=lambda item: order[item[1]["type"]])
    except KeyError as exc:
        raise KglError(f"unknown record type {exc.args[0]!r}", source) from exc

    for lineno, record in records:
        try:
            _apply_record(staged, record)
        except (KglError, DuplicateVersionError):
            raise
        except Exception as exc:
            raise KglError(str(exc), source, lineno) from exc

    _merge(graph, staged, source)


def _apply_record(graph: KnowledgeGraph, record: dict) -> None:
    kind = record["type"]
    if kind == "package":
        graph._package(record["name"])
    elif kind == "version":
        pkg = graph._package(record["package"])
        version = parse_version(record["version"])
        status = record["install_status"]
        if status not in INSTALL_STATUSES:
            raise ValueError(f"bad install_status {status!r}")
        key = version.key
        if key in pkg.versions:
            raise DuplicateVersionError(
                f"duplicate version record for {pkg.name} {key}", key=(pkg.name, key)
            )
        pkg.versions[key] = VersionNode(package=pkg.name, version=version, install_status=status)
    elif kind == "module":
        vn = graph.version(record["package"], parse_version(record["version"]))
        name = record["name"]
        _check_module_name(name)
        if "." in name:
            parent = name.rsplit(".", 1)[0]
            if parent not in vn.modules:
                raise ValueError(f"module {name!r} has no parent module {parent!r}")
        if name in vn.modules:
            raise ValueError(f"duplicate module {name!r} for {vn.package} {vn.version}")
        vn.modules[name] = ModuleNode(
            package=vn.package,
            version=vn.version,
            name=name,
            import_status=bool(record["import_status"]),
        )
    elif kind == "attribute":
        vn = graph.version(record["package"], parse_version(record["version"]))
        module = vn.modules.get(record["module"])
        if module is None:
            raise ValueError(f"attribute for unknown module {record['module']!r}")
        attr = record["name"]
        if "." in attr or attr.startswith("_") or not attr:
            raise ValueError(f"bad attribute name {attr!r}")
        module.attributes.add(graph._intern_attr(attr))
    elif kind == "requires":
        vn = graph.version(record["package"], parse_version(record["version"]))
        text, marker = strip_marker(record["specifier"])
        if marker:
            warnings.warn(
                f"dropping environment marker {marker!r} on requirement "
                f"{record['package']} -> {record['dependency']}",
                stacklevel=2,
            )
        dependency = normalize_name(record["dependency"])
        vn.requires.append(
            RequiresEdge(
                package=vn.package,
                version=vn.version,
                dependency=dependency,
                specifier=parse_specifier(text),
                specifier_text=text,
            )
        )
        graph._package(dependency)  # dangling targets become empty package nodes
    else:
        raise ValueError(f"unknown record type {kind!r}")


def _version_fingerprint(vn: VersionNode):
    return (
        vn.install_status,
        tuple(sorted((m.name, m.import_status, tuple(sorted(m.attributes)))
                     for m in vn.modules.values())),
        tuple(sorted((r.dependency, r.specifier.canonical) for r in vn.requires)),
    )


def _merge(graph: KnowledgeGraph, staged: KnowledgeGraph, source: str) -> None:
    for pkg in staged.packages.values():
        target = graph._package(pkg.name)
        for key, vn in pkg.versions.items():
            existing = target.versions.get(key)
            if existing is not None:
                if _version_fingerprint(existing) != _version_fingerprint(vn):
                    raise DuplicateVersionError(
                        f"conflicting duplicate for {pkg.name} {key}",
                        source,
                        key=(pkg.name, key),
                    )
                continue
            for mod in vn.modules.values():
                for attr in mod.attributes:
                    graph._intern_attr(attr)
            target.versions[key] = vn


def _validate(graph: KnowledgeGraph) -> None:
    for pkg in graph.packages.values():
        for vn in pkg.versions.values():
            if vn.install_status != "success" and (vn.modules or vn.requires):
                raise KglError(
                    f"{pkg.name} {vn.version} has install_status={vn.install_status} "
                    "but carries modules or requirements"
                )


def save_graph(graph: KnowledgeGraph, path_or_stream) -> None:
    """Write the graph back out as KGL, deterministically ordered."""
    if hasattr(path_or_stream, "write"):
        _dump(graph, path_or_stream)
    else:
        with open(path_or_stream, "w", encoding="utf-8", newline="\n") as handle:
            _dump(graph, handle)


def iter_records(graph: KnowledgeGraph) -> Iterator[dict]:
    for name in sorted(graph.packages):
        pkg = graph.packages[name]
        yield {"type": "package", "name": name}
        for vn in sorted(pkg.versions.values(), key=lambda v: v.version):
            vkey = str(vn.version)
            yield {
                "type": "version",
                "package": name,
                "version": vkey,
                "install_status": vn.install_status,
            }
            for mod_name in sorted(vn.modules, key=lambda m: (m.count("."), m)):
                mod = vn.modules[mod_name]
                yield {
                    "type": "module",
                    "package": name,
                    "version": vkey,
                    "name": mod.name,
                    "import_status": mod.import_status,
                }
            for mod_name in sorted(vn.modules, key=lambda m: (m.count("."), m)):
                mod = vn.modules[mod_name]
                for attr in sorted(mod.attributes):
                    yield {
                        "type": "attribute",
                        "package": name,
                        "version": vkey,
                        "module": mod.name,
                        "name": attr,
                    }
            for req in sorted(vn.requires, key=lambda r: (r.dependency, r.specifier_text)):
                yield {
                    "type": "requires",
                    "package": name,
                    "version": vkey,
                    "dependency": req.dependency,
                    "specifier": req.specifier_text,
                }


def _dump(graph: KnowledgeGraph, stream: IO[str]) -> None:
    for record in iter_records(graph):
        stream.write(json.dumps(record, sort_keys=False) + "\n")
