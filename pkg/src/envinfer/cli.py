"""Command-line entry points: infer, explain, build-kg, validate-kg."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from .codeparse import PY2, PY3, StdlibProfile, UnparseableError, default_profile, load_profile, read_source
from .emitter import DEFAULT_BASE_PY2, DEFAULT_BASE_PY3
from .kg import KglError, KnowledgeGraph, load_graph, save_graph
from .pipeline import InferenceResult, UnsatisfiableError, infer

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_PARSE = 2

CONFIG_KEYS = ("kg2", "kg3", "out", "solver", "base2", "base3", "stdlib2", "stdlib3")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envinfer",
        description="Infer a compatible runtime environment for a Python file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--kg2", help="knowledge graph file for Python 2")
        p.add_argument("--kg3", help="knowledge graph file for Python 3")
        p.add_argument("--stdlib2", help="stdlib module list for Python 2")
        p.add_argument("--stdlib3", help="stdlib module list for Python 3")
        p.add_argument(
            "--solver",
            choices=("auto", "heuristic-only", "sat-only"),
            default=None,
            help="solver mode (default auto)",
        )

    p_infer = sub.add_parser("infer", help="generate requirements.txt and Dockerfile")
    add_common(p_infer)
    p_infer.add_argument("source", nargs="?", help="target Python file")
    p_infer.add_argument("--dir", help="process every .py file in a directory")
    p_infer.add_argument("--out", help="output directory (default: alongside source)")
    p_infer.add_argument("--base2", default=None, help=f"Python 2 base image (default {DEFAULT_BASE_PY2})")
    p_infer.add_argument("--base3", default=None, help=f"Python 3 base image (default {DEFAULT_BASE_PY3})")

    p_explain = sub.add_parser("explain", help="show discovery scores and the solver trace")
    add_common(p_explain)
    p_explain.add_argument("source", help="target Python file")

    p_build = sub.add_parser("build-kg", help="merge and validate knowledge graph files")
    p_build.add_argument("inputs", nargs="+", help="input KGL files")
    p_build.add_argument("--out", required=True, help="merged KGL output path")

    p_validate = sub.add_parser("validate-kg", help="check a knowledge graph file")
    p_validate.add_argument("inputs", nargs="+", help="KGL files to check")
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    for key in CONFIG_KEYS:
        if key in data and getattr(args, key, None) in (None, ""):
            setattr(args, key, data[key])


def _load_profiles(args) -> tuple[StdlibProfile, StdlibProfile]:
    p2 = load_profile(args.stdlib2, PY2) if getattr(args, "stdlib2", None) else default_profile(PY2)
    p3 = load_profile(args.stdlib3, PY3) if getattr(args, "stdlib3", None) else default_profile(PY3)
    return p2, p3


def _load_kgs(args) -> dict[str, KnowledgeGraph]:
    kgs = {}
    if getattr(args, "kg2", None):
        kgs[PY2] = load_graph([args.kg2])
    if getattr(args, "kg3", None):
        kgs[PY3] = load_graph([args.kg3])
    if not kgs:
        raise KglError("no knowledge graph given; pass --kg2 and/or --kg3")
    return kgs


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_one(source_path: Path, out_dir: Path, kgs, profiles, args) -> int:
    try:
        source = read_source(source_path)
        result = infer(
            source,
            kgs,
            profile2=profiles[0],
            profile3=profiles[1],
            solver_mode=args.solver or "auto",
        )
    except UnparseableError as exc:
        print(f"{source_path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsatisfiableError as exc:
        print(f"{source_path}: {exc}", file=sys.stderr)
        return EXIT_UNSAT

    dockerfile = result.dockerfile(
        source_path.name,
        base2=args.base2 or DEFAULT_BASE_PY2,
        base3=args.base3 or DEFAULT_BASE_PY3,
    )
    _atomic_write(out_dir / "requirements.txt", result.requirements)
    _atomic_write(out_dir / "Dockerfile", dockerfile)
    explicit = ", ".join(
        name if pin is None else f"{name}=={pin}" for name, pin in result.plan.explicit
    )
    major = "2" if result.python_major == PY2 else "3"
    print(f"{source_path}: python {major}; explicit installs: {explicit or '(none)'}")
    return EXIT_OK


def cmd_infer(args) -> int:
    _apply_config(args)
    try:
        kgs = _load_kgs(args)
    except KglError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    profiles = _load_profiles(args)

    if args.dir:
        base = Path(args.dir)
        sources = sorted(p for p in base.iterdir() if p.suffix == ".py")
        out_root = Path(args.out) if args.out else base
        worst = EXIT_OK
        with ThreadPoolExecutor() as pool:
            futures = [
                pool.submit(_run_one, src, out_root / src.stem, kgs, profiles, args)
                for src in sources
            ]
            for future in futures:
                worst = max(worst, future.result())
        return worst

    if not args.source:
        print("error: give a source file or --dir", file=sys.stderr)
        return EXIT_UNSAT
    source_path = Path(args.source)
    out_dir = Path(args.out) if args.out else source_path.parent
    return _run_one(source_path, out_dir, kgs, profiles, args)


def cmd_explain(args) -> int:
    _apply_config(args)
    try:
        kgs = _load_kgs(args)
    except KglError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    profiles = _load_profiles(args)
    source_path = Path(args.source)
    try:
        source = read_source(source_path)
        result = infer(
            source,
            kgs,
            profile2=profiles[0],
            profile3=profiles[1],
            solver_mode=args.solver or "auto",
        )
    except UnparseableError as exc:
        print(f"{source_path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsatisfiableError as exc:
        print(f"{source_path}: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    _print_explanation(result)
    return EXIT_OK


def _print_explanation(result: InferenceResult) -> None:
    major = "2" if result.python_major == PY2 else "3"
    print(f"python version: {major}")
    if not result.discovery.reports and not result.discovery.fallback_installs:
        print("no third-party resources")
        return
    for root in sorted(result.discovery.reports):
        report = result.discovery.reports[root]
        print(f"module {root}:")
        if not report.s1_hits:
            print("  S1: no match; falling back to install by name")
            continue
        print("  S1: " + ", ".join(f"{p} {v}" for p, v in report.s1_hits))
        for pkg, ver, score in report.s2_scores:
            print(f"  S2: {pkg} {ver} scored {score}")
        print("  S2 survivors: " + ", ".join(f"{p} {v}" for p, v in report.s2_survivors))
        for pkg, ver, score in report.s3_scores:
            print(f"  S3: {pkg} {ver} scored {score}")
        print("  S3 survivors: " + ", ".join(f"{p} {v}" for p, v in report.s3_survivors))
    if result.stats.trace:
        print("solver trace:")
        for event in result.stats.trace:
            print(f"  {event.kind}: {event.detail}")
    explicit = ", ".join(
        name if pin is None else f"{name}=={pin}" for name, pin in result.plan.explicit
    )
    print(f"explicit installs: {explicit or '(none)'}")


def cmd_build_kg(args) -> int:
    try:
        graph = load_graph(args.inputs)
    except KglError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.")
    os.close(fd)
    try:
        save_graph(graph, tmp)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    counts = graph.counts()
    print(
        f"wrote {out}: {counts['packages']} packages, {counts['versions']} versions, "
        f"{counts['modules']} modules, {counts['requires']} requirements"
    )
    return 0


def cmd_validate_kg(args) -> int:
    try:
        graph = load_graph(args.inputs)
    except KglError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    counts = graph.counts()
    print(
        f"valid: {counts['packages']} packages, {counts['versions']} versions, "
        f"{counts['modules']} modules, {counts['requires']} requirements"
    )
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "infer": cmd_infer,
        "explain": cmd_explain,
        "build-kg": cmd_build_kg,
        "validate-kg": cmd_validate_kg,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
