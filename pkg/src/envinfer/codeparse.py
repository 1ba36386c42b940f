"""Import and attribute extraction from single-file Python source.

This is a purpose-built extractor, not a full grammar: it tokenizes the
source (which copes with string literals, comments, continuations and
parenthesized import lists, and stays lenient on Python-2-only syntax) and
recognizes two statement families: imports and attribute chains rooted at
imported names.  The result is a forest with one tree per non-stdlib
top-level module, plus candidate Python major versions.
"""

from __future__ import annotations

import io
import tokenize
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Optional

PY2 = "py2"
PY3 = "py3"


class ParseError(ValueError):
    """Unrecoverable lexical garbage; carries the offending line when known."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class UnparseableError(ParseError):
    """The source fails the syntax screen for both Python major versions."""


class BindingKind(Enum):
    MODULE_IMPORT = "module_import"
    FROM_IMPORT = "from_import"


@dataclass(frozen=True)
class ImportBinding:
    bound_name: str
    target: str
    kind: BindingKind


MODULE_CLAIM = "module"
ATTRIBUTE_CLAIM = "attribute"


@dataclass
class ParseTree:
    """Claimed resources under one top-level module."""

    root: str
    nodes: dict[str, set[str]] = field(default_factory=dict)  # path -> claim flags

    def module_paths(self) -> set[str]:
        return {p for p, flags in self.nodes.items() if MODULE_CLAIM in flags}

    def attribute_paths(self) -> set[str]:
        return {p for p, flags in self.nodes.items() if ATTRIBUTE_CLAIM in flags}

    def ambiguous_paths(self) -> set[str]:
        return {p for p, flags in self.nodes.items() if len(flags) == 2}


def tree_depth(tree: ParseTree) -> int:
    """Submodule hops needed to cover the deepest module-claim path."""
    depths = [p.count(".") for p in tree.module_paths()]
    return max(depths, default=0)


@dataclass(frozen=True)
class StdlibProfile:
    python_major: str
    interpreter: str
    module_names: frozenset[str]


@dataclass
class ParseForest:
    trees_by_version: dict[str, dict[str, ParseTree]]
    python_candidates: set[str]
    import_counts: dict[str, int]

    def trees(self, python_major: str) -> dict[str, ParseTree]:
        return self.trees_by_version[python_major]


# -- stdlib profiles ------------------------------------------------------


def load_profile(path_or_stream, python_major: str) -> StdlibProfile:
    if hasattr(path_or_stream, "read"):
        lines = path_or_stream.read().splitlines()
    else:
        with open(path_or_stream, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    interpreter = ""
    names = set()
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not interpreter:
                interpreter = line.lstrip("#").strip()
            continue
        names.add(line)
    return StdlibProfile(python_major, interpreter, frozenset(names))


def default_profile(python_major: str) -> StdlibProfile:
    filename = "stdlib_py27.txt" if python_major == PY2 else "stdlib_py38.txt"
    ref = resources.files("envinfer.data").joinpath(filename)
    with ref.open("r", encoding="utf-8") as handle:
        return load_profile(handle, python_major)


# -- tokenizing -----------------------------------------------------------

_SKIP_TYPES = frozenset(
    {tokenize.COMMENT, tokenize.NL, tokenize.INDENT, tokenize.DEDENT, tokenize.ENDMARKER}
)


def _significant_tokens(source: str) -> list[tokenize.TokenInfo]:
    tokens = []
    try:
        for tok in tokenize.generate_tokens(io.StringIO(source).readline):
            if tok.type in _SKIP_TYPES:
                continue
            tokens.append(tok)
    except (tokenize.TokenError, IndentationError) as exc:
        line = getattr(exc, "args", [None, (0,)])
        lineno = 0
        if len(exc.args) > 1 and isinstance(exc.args[1], tuple):
            lineno = exc.args[1][0]
        raise ParseError(f"cannot tokenize source: {exc.args[0]}", lineno) from exc
    return tokens


@dataclass
class _Extraction:
    bindings: list[ImportBinding]
    module_claims: list[str]  # full dotted paths claimed as modules
    ambiguous: list[str]  # from-import targets: module or attribute
    chains: list[tuple[str, ...]]  # raw attribute chains, unrewritten


def _extract(source: str) -> _Extraction:
    tokens = _significant_tokens(source)
    bindings: list[ImportBinding] = []
    module_claims: list[str] = []
    ambiguous: list[str] = []
    chains: list[tuple[str, ...]] = []

    consumed = [False] * len(tokens)

    def at_statement_start(i: int) -> bool:
        if i == 0:
            return True
        prev = tokens[i - 1]
        if prev.type == tokenize.NEWLINE:
            return True
        return prev.type == tokenize.OP and prev.string in (";", ":")

    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.type == tokenize.NAME and tok.string == "import" and at_statement_start(i):
            i = _parse_import(tokens, i, consumed, bindings, module_claims)
        elif tok.type == tokenize.NAME and tok.string == "from" and at_statement_start(i):
            i = _parse_from(tokens, i, consumed, bindings, module_claims, ambiguous)
        else:
            i += 1

    # attribute chains over the remaining tokens
    i = 0
    while i < n:
        tok = tokens[i]
        if tok.type == tokenize.NAME and not consumed[i] and not _is_keyword_like(tok.string):
            prev = tokens[i - 1] if i > 0 else None
            if prev is not None and prev.type == tokenize.OP and prev.string == ".":
                i += 1
                continue
            if prev is not None and prev.type == tokenize.NAME and prev.string in ("def", "class"):
                i += 1
                continue
            chain = [tok.string]
            j = i + 1
            while (
                j + 1 < n
                and tokens[j].type == tokenize.OP
                and tokens[j].string == "."
                and tokens[j + 1].type == tokenize.NAME
            ):
                chain.append(tokens[j + 1].string)
                j += 2
            if len(chain) > 1:
                chains.append(tuple(chain))
            i = j
        else:
            i += 1

    return _Extraction(bindings, module_claims, ambiguous, chains)


_KEYWORDS = frozenset(
    "False None True and as assert break class continue def del elif else except "
    "finally for from global if import in is lambda nonlocal not or pass raise "
    "return try while with yield print exec".split()
)


def _is_keyword_like(name: str) -> bool:
    return name in _KEYWORDS


def _parse_dotted(tokens, i) -> tuple[Optional[str], int]:
    """Parse NAME ('.' NAME)* starting at i; returns (dotted or None, next index)."""
    if i >= len(tokens) or tokens[i].type != tokenize.NAME:
        return None, i
    parts = [tokens[i].string]
    i += 1
    while (
        i + 1 < len(tokens)
        and tokens[i].type == tokenize.OP
        and tokens[i].string == "."
        and tokens[i + 1].type == tokenize.NAME
    ):
        parts.append(tokens[i + 1].string)
        i += 2
    return ".".join(parts), i


def _mark(consumed, start, end):
    for k in range(start, min(end, len(consumed))):
        consumed[k] = True


def _parse_import(tokens, i, consumed, bindings, module_claims) -> int:
    start = i
    i += 1  # skip 'import'
    while i < len(tokens):
        dotted, i = _parse_dotted(tokens, i)
        if dotted is None:
            break
        alias = None
        if i < len(tokens) and tokens[i].type == tokenize.NAME and tokens[i].string == "as":
            if i + 1 < len(tokens) and tokens[i + 1].type == tokenize.NAME:
                alias = tokens[i + 1].string
                i += 2
        module_claims.append(dotted)
        if alias is not None:
            bindings.append(ImportBinding(alias, dotted, BindingKind.MODULE_IMPORT))
        else:
            top = dotted.split(".", 1)[0]
            bindings.append(ImportBinding(top, top, BindingKind.MODULE_IMPORT))
        if i < len(tokens) and tokens[i].type == tokenize.OP and tokens[i].string == ",":
            i += 1
            continue
        break
    _mark(consumed, start, i)
    return i


def _parse_from(tokens, i, consumed, bindings, module_claims, ambiguous) -> int:
    start = i
    i += 1  # skip 'from'
    relative = False
    while i < len(tokens) and tokens[i].type == tokenize.OP and tokens[i].string in (".", "..."):
        relative = True
        i += 1
    module, i = _parse_dotted(tokens, i)
    if i >= len(tokens) or tokens[i].string != "import":
        _mark(consumed, start, i)
        return i  # not a well-formed from-import; skip what we saw
    i += 1  # skip 'import'
    if relative or module is None:
        # relative imports resolve inside the target file itself
        end = _skip_import_list(tokens, i)
        _mark(consumed, start, end)
        return end
    if i < len(tokens) and tokens[i].type == tokenize.OP and tokens[i].string == "*":
        module_claims.append(module)
        _mark(consumed, start, i + 1)
        return i + 1
    parenthesized = False
    if i < len(tokens) and tokens[i].type == tokenize.OP and tokens[i].string == "(":
        parenthesized = True
        i += 1
    module_claims.append(module)
    while i < len(tokens):
        if tokens[i].type != tokenize.NAME:
            break
        name = tokens[i].string
        i += 1
        alias = name
        if i < len(tokens) and tokens[i].type == tokenize.NAME and tokens[i].string == "as":
            if i + 1 < len(tokens) and tokens[i + 1].type == tokenize.NAME:
                alias = tokens[i + 1].string
                i += 2
        target = f"{module}.{name}"
        bindings.append(ImportBinding(alias, target, BindingKind.FROM_IMPORT))
        ambiguous.append(target)
        if i < len(tokens) and tokens[i].type == tokenize.OP and tokens[i].string == ",":
            i += 1
            continue
        break
    if parenthesized and i < len(tokens) and tokens[i].string == ")":
        i += 1
    _mark(consumed, start, i)
    return i


def _skip_import_list(tokens, i) -> int:
    depth = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.type == tokenize.OP and tok.string == "(":
            depth += 1
        elif tok.type == tokenize.OP and tok.string == ")":
            depth -= 1
        elif tok.type == tokenize.NEWLINE and depth <= 0:
            return i
        i += 1
    return i


# -- public operations ----------------------------------------------------


def extract_imports(source: str) -> list[ImportBinding]:
    """All import bindings in the source, in textual order."""
    return _extract(source).bindings


def extract_attributes(source: str, bindings: Iterable[ImportBinding]) -> set[str]:
    """Fully qualified attribute paths used in the source.

    Attribute chains rooted at a bound name are rewritten through the alias
    map; each from-import target is included as a possible attribute too.
    """
    extraction = _extract(source)
    by_name = {b.bound_name: b for b in bindings}
    paths = set()
    for chain in extraction.chains:
        binding = by_name.get(chain[0])
        if binding is None:
            continue
        paths.add(".".join((binding.target, *chain[1:])))
    for binding in by_name.values():
        if binding.kind is BindingKind.FROM_IMPORT:
            paths.add(binding.target)
    return paths


# -- Python version screens -----------------------------------------------


def py3_screen(source: str) -> bool:
    """True when the source compiles under a Python 3 interpreter."""
    try:
        compile(source, "<target>", "exec")
    except (SyntaxError, ValueError):
        return False
    return True


_PY3_ONLY_NAMES = frozenset({"nonlocal"})


def py2_screen(source: str) -> bool:
    """True when no Python-3-only construct is present and the source tokenizes."""
    try:
        tokens = _significant_tokens(source)
    except ParseError:
        return False
    for i, tok in enumerate(tokens):
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        if tok.type == tokenize.STRING:
            prefix = tok.string.split(tok.string[-1], 1)[0].lower().replace("'", "").replace('"', "")
            if "f" in prefix:
                return False
        elif tok.type == tokenize.OP and tok.string in ("->", ":="):
            return False
        elif tok.type == tokenize.NAME:
            if tok.string in _PY3_ONLY_NAMES:
                return False
            if tok.string == "async" and nxt is not None and nxt.string in ("def", "for", "with"):
                return False
            if tok.string == "await" and nxt is not None and (
                nxt.type in (tokenize.NAME, tokenize.NUMBER, tokenize.STRING)
                or (nxt.type == tokenize.OP and nxt.string in ("(", "["))
            ):
                return False
            if tok.string == "yield" and nxt is not None and nxt.string == "from":
                return False
        elif tok.type == tokenize.OP and tok.string == "@":
            prev = tokens[i - 1] if i > 0 else None
            if prev is not None and (
                prev.type in (tokenize.NAME, tokenize.NUMBER)
                or (prev.type == tokenize.OP and prev.string in (")", "]"))
            ) and prev.type != tokenize.NEWLINE:
                return False
    return True


def build_forest(
    source: str,
    profile2: StdlibProfile,
    profile3: StdlibProfile,
) -> ParseForest:
    """Build per-version parse forests and pick candidate Python majors.

    Candidates are the versions passing their syntax screen with the fewest
    non-stdlib imported modules; ties keep both for discovery to break.
    """
    screens = {PY2: py2_screen(source), PY3: py3_screen(source)}
    if not any(screens.values()):
        raise UnparseableError("source has syntax errors under both Python 2 and Python 3")

    try:
        extraction = _extract(source)
    except ParseError:
        # tokenize failed but the py3 compile screen passed; nothing importable found
        extraction = _Extraction([], [], [], [])

    attr_paths = extract_attributes(source, extraction.bindings)
    profiles = {PY2: profile2, PY3: profile3}
    trees_by_version: dict[str, dict[str, ParseTree]] = {}
    counts: dict[str, int] = {}
    for major, passed in screens.items():
        if not passed:
            continue
        stdlib = profiles[major].module_names
        trees: dict[str, ParseTree] = {}

        def tree_for(path: str) -> Optional[ParseTree]:
            root = path.split(".", 1)[0]
            if root in stdlib:
                return None
            if root not in trees:
                trees[root] = ParseTree(root=root, nodes={root: {MODULE_CLAIM}})
            return trees[root]

        for claim in extraction.module_claims:
            tree = tree_for(claim)
            if tree is not None:
                tree.nodes.setdefault(claim, set()).add(MODULE_CLAIM)
        for target in extraction.ambiguous:
            tree = tree_for(target)
            if tree is not None:
                flags = tree.nodes.setdefault(target, set())
                flags.update({MODULE_CLAIM, ATTRIBUTE_CLAIM})
        for path in sorted(attr_paths):
            tree = tree_for(path)
            if tree is not None:
                flags = tree.nodes.setdefault(path, set())
                flags.add(ATTRIBUTE_CLAIM)
        trees_by_version[major] = trees
        counts[major] = len(trees)

    fewest = min(counts.values())
    candidates = {major for major, count in counts.items() if count == fewest}
    trees_by_version = {m: t for m, t in trees_by_version.items() if m in candidates}
    return ParseForest(trees_by_version, candidates, counts)


def read_source(path) -> str:
    """Read target code as UTF-8 with a latin-1 fallback."""
    with open(path, "rb") as handle:
        data = handle.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return data.decode("latin-1")
