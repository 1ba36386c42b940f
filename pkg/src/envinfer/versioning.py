"""Package-name normalization, version identifiers, ordering and specifier matching.

Versions follow a PEP 440 subset: a dotted release, an optional pre-release
(a/b/rc), an optional post-release and an optional dev-release.  Epochs
(``1!2.0``), local versions (``1.0+cuda``) and free-form legacy strings are
rejected with :class:`UnsupportedVersionError` instead of being mis-ordered.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional


class InvalidNameError(ValueError):
    """Raised for package names that cannot be normalized."""


class UnsupportedVersionError(ValueError):
    """Raised for version strings outside the supported grammar."""

    def __init__(self, raw: str, reason: str = "unsupported version"):
        super().__init__(f"{reason}: {raw!r}")
        self.raw = raw


class SpecifierParseError(ValueError):
    """Raised for malformed version specifier clauses."""


_NAME_SEP_RE = re.compile(r"[-_.]+")


def normalize_name(raw: str) -> str:
    """Canonicalize a package name (case-folded, separator runs become a dash)."""
    if not raw or not raw.strip():
        raise InvalidNameError("empty package name")
    return _NAME_SEP_RE.sub("-", raw.strip()).lower()


_PRE_PHASES = {
    "a": "a", "alpha": "a",
    "b": "b", "beta": "b",
    "c": "rc", "rc": "rc", "pre": "rc", "preview": "rc",
}

_VERSION_RE = re.compile(
    r"""
    ^\s*v?
    (?P<release>[0-9]+(?:\.[0-9]+)*)
    (?:[._-]?(?P<pre_phase>alpha|beta|preview|pre|rc|a|b|c)[._-]?(?P<pre_num>[0-9]+)?)?
    (?:(?P<post>[._-]?(?:post|rev|r)[._-]?(?P<post_num>[0-9]+)?)|(?:-(?P<post_implicit>[0-9]+)))?
    (?P<dev>[._-]?dev[._-]?(?P<dev_num>[0-9]+)?)?
    \s*$
    """,
    re.VERBOSE | re.IGNORECASE,
)

# Sentinel ranks so that, at an equal release, dev < pre < final < post.
_NEG_INF = (-1,)
_POS_INF = (1,)
_PRE_RANK = {"a": 0, "b": 1, "rc": 2}


@dataclass(frozen=True)
class VersionId:
    """A parsed version identifier with a total order."""

    release: tuple[int, ...]
    pre: Optional[tuple[str, int]] = None
    post: Optional[int] = None
    dev: Optional[int] = None
    raw: str = field(default="", compare=False, hash=False)

    @property
    def _key(self):
        release = _strip_trailing_zeros(self.release)
        if self.pre is None and self.post is None and self.dev is not None:
            pre = _NEG_INF  # a pure dev release sorts before pre-releases
        elif self.pre is None:
            pre = _POS_INF
        else:
            pre = (0, _PRE_RANK[self.pre[0]], self.pre[1])
        post = _NEG_INF if self.post is None else (0, self.post)
        dev = _POS_INF if self.dev is None else (0, self.dev)
        return (release, pre, post, dev)

    @property
    def key(self) -> str:
        """Canonical text: equal versions share it regardless of spelling."""
        text = ".".join(str(n) for n in _strip_trailing_zeros(self.release))
        if self.pre is not None:
            text += f"{self.pre[0]}{self.pre[1]}"
        if self.post is not None:
            text += f".post{self.post}"
        if self.dev is not None:
            text += f".dev{self.dev}"
        return text

    @property
    def is_prerelease(self) -> bool:
        return self.pre is not None or self.dev is not None

    @property
    def is_postrelease(self) -> bool:
        return self.post is not None

    def __str__(self) -> str:
        text = ".".join(str(n) for n in self.release)
        if self.pre is not None:
            text += f"{self.pre[0]}{self.pre[1]}"
        if self.post is not None:
            text += f".post{self.post}"
        if self.dev is not None:
            text += f".dev{self.dev}"
        return text

    def __eq__(self, other) -> bool:
        if not isinstance(other, VersionId):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __lt__(self, other: "VersionId") -> bool:
        return self._key < other._key

    def __le__(self, other: "VersionId") -> bool:
        return self._key <= other._key

    def __gt__(self, other: "VersionId") -> bool:
        return self._key > other._key

    def __ge__(self, other: "VersionId") -> bool:
        return self._key >= other._key


def _strip_trailing_zeros(release: tuple[int, ...]) -> tuple[int, ...]:
    end = len(release)
    while end > 1 and release[end - 1] == 0:
        end -= 1
    return release[:end]


def parse_version(raw: str) -> VersionId:
    """Parse a version string, rejecting epochs, local versions and legacy forms."""
    if not isinstance(raw, str) or not raw.strip():
        raise UnsupportedVersionError(str(raw), "empty version")
    if "!" in raw:
        raise UnsupportedVersionError(raw, "epoch versions are not supported")
    if "+" in raw:
        raise UnsupportedVersionError(raw, "local versions are not supported")
    m = _VERSION_RE.match(raw)
    if m is None:
        raise UnsupportedVersionError(raw)
    release = tuple(int(part) for part in m.group("release").split("."))
    pre = None
    if m.group("pre_phase") is not None:
        phase = _PRE_PHASES[m.group("pre_phase").lower()]
        pre = (phase, int(m.group("pre_num") or 0))
    post = None
    if m.group("post_implicit") is not None:
        post = int(m.group("post_implicit"))
    elif m.group("post") is not None:
        post = int(m.group("post_num") or 0)
    dev = None
    if m.group("dev") is not None:
        dev = int(m.group("dev_num") or 0)
    return VersionId(release=release, pre=pre, post=post, dev=dev, raw=raw.strip())


def compare(a: VersionId, b: VersionId) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if a._key < b._key:
        return -1
    if a._key > b._key:
        return 1
    return 0


_OPERATORS = ("~=", "==", "!=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class Clause:
    op: str  # one of ==, !=, <=, >=, <, >
    version: VersionId
    prefix: bool = False  # ==X.* / !=X.* wildcard matching on the release

    def __str__(self) -> str:
        suffix = ".*" if self.prefix else ""
        return f"{self.op}{self.version}{suffix}"


@dataclass(frozen=True)
class VersionSpecifier:
    """A conjunction of comparison clauses; the empty specifier matches anything."""

    clauses: tuple[Clause, ...] = ()

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.clauses)

    @property
    def canonical(self) -> str:
        """Order-insensitive canonical text, used for requirement-identity checks."""
        return ",".join(sorted(str(c) for c in self.clauses))


ANY_VERSION = VersionSpecifier()


def parse_specifier(text: str) -> VersionSpecifier:
    """Parse a comma-separated conjunction such as ``<1.16,>=1.11``.

    ``~=X.Y`` is expanded into ``>=X.Y`` plus a ``==X.*`` wildcard clause.
    Environment markers are not accepted here; callers strip them beforehand.
    """
    if ";" in text:
        raise SpecifierParseError(f"environment marker in specifier: {text!r}")
    clauses: list[Clause] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            clauses.extend(_parse_clause(chunk))
        except UnsupportedVersionError as exc:
            raise SpecifierParseError(f"bad version in clause {chunk!r}: {exc}") from exc
    return VersionSpecifier(tuple(clauses))


def _parse_clause(chunk: str) -> Iterable[Clause]:
    op = None
    for candidate in _OPERATORS:
        if chunk.startswith(candidate):
            op = candidate
            break
    if op is None:
        raise SpecifierParseError(f"missing operator in clause: {chunk!r}")
    body = chunk[len(op):].strip()
    if not body:
        raise SpecifierParseError(f"missing version in clause: {chunk!r}")
    if op == "~=":
        base = parse_version(body)
        if len(base.release) < 2:
            raise SpecifierParseError(f"~= needs at least two release segments: {chunk!r}")
        return [
            Clause(">=", base),
            Clause("==", VersionId(release=base.release[:-1], raw=body), prefix=True),
        ]
    if body.endswith(".*"):
        if op not in ("==", "!="):
            raise SpecifierParseError(f"wildcard only valid with == or !=: {chunk!r}")
        return [Clause(op, parse_version(body[:-2]), prefix=True)]
    return [Clause(op, parse_version(body))]


def _release_prefix_match(v: VersionId, prefix: tuple[int, ...]) -> bool:
    padded = v.release + (0,) * max(0, len(prefix) - len(v.release))
    return padded[: len(prefix)] == prefix


def _clause_holds(v: VersionId, c: Clause) -> bool:
    if c.prefix:
        hit = _release_prefix_match(v, c.version.release)
        return hit if c.op == "==" else not hit
    w = c.version
    if c.op == "==":
        return compare(v, w) == 0
    if c.op == "!=":
        return compare(v, w) != 0
    if c.op == "<=":
        return compare(v, w) <= 0
    if c.op == ">=":
        return compare(v, w) >= 0
    if c.op == "<":
        if not v < w:
            return False
        # an exclusive upper bound does not admit pre-releases of the bound itself
        if v.is_prerelease and not w.is_prerelease:
            earliest_pre = VersionId(release=w.release, pre=w.pre, post=w.post, dev=0)
            if v >= earliest_pre:
                return False
        return True
    if c.op == ">":
        if not v > w:
            return False
        # an exclusive lower bound does not admit post-releases of the bound itself
        if v.is_postrelease and not w.is_postrelease:
            post_base = VersionId(release=v.release, pre=v.pre)
            if post_base == w:
                return False
        return True
    raise AssertionError(f"unknown operator {c.op!r}")


def satisfies(v: VersionId, spec: VersionSpecifier) -> bool:
    """True iff ``v`` satisfies every clause of ``spec``."""
    return all(_clause_holds(v, c) for c in spec.clauses)


def strip_marker(requirement: str) -> tuple[str, Optional[str]]:
    """Split an environment marker off a requirement/specifier string."""
    if ";" in requirement:
        head, marker = requirement.split(";", 1)
        return head.strip(), marker.strip()
    return requirement.strip(), None
