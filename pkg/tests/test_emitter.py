"""Explicit-install selection, install ordering and artifact rendering."""

import random
from pathlib import Path

import pytest

from envinfer.codeparse import PY2, PY3
from envinfer.depgraph import DependencyGraph, START, is_package, is_version
from envinfer.discovery import DiscoveryResult
from envinfer.emitter import (
    plan_environment,
    render_dockerfile,
    render_requirements,
)
from envinfer.kg import load_graph
from envinfer.pipeline import infer
from envinfer.solver import Subgraph, solve
from envinfer.versioning import parse_specifier, parse_version

from support import random_instance

FIXTURES = Path(__file__).parent / "fixtures"


def kgs_for(name):
    return {PY2: load_graph([FIXTURES / name]), PY3: load_graph([FIXTURES / name])}


def run_fixture(stem):
    source = (FIXTURES / f"{stem}.py").read_text()
    return infer(source, kgs_for(f"{stem}.kgl"))


# -- scenario goldens -----------------------------------------------------


def test_scenario_requirements_golden():
    result = run_fixture("gist_conflict")
    assert result.requirements == (
        "influxdb==3.0.0\n"
        "gpkit==0.9.9.2\n"
        "openfisca-core==25.2.5\n"
        "pycap==1.0.2\n"
        "# implied: numpy==1.15.4\n"
        "# implied: numexpr==2.6.8\n"
    )


def test_scenario_dockerfile_golden():
    result = run_fixture("gist_conflict")
    assert result.dockerfile("gist_conflict.py") == (
        "FROM python:2.7.18\n"
        "WORKDIR /app\n"
        "COPY requirements.txt .\n"
        "RUN pip install -r requirements.txt\n"
        "COPY gist_conflict.py .\n"
        'CMD ["python", "gist_conflict.py"]\n'
    )


def test_deepwalk_single_explicit_line():
    result = run_fixture("deepwalk")
    explicit = [line for line in result.requirements.splitlines() if not line.startswith("#")]
    assert explicit == ["deepwalk==1.0.3"]
    implied = [line for line in result.requirements.splitlines() if line.startswith("# implied:")]
    assert "# implied: gensim==3.8.3" in implied
    assert "# implied: numpy==1.16.1" in implied


def test_outputs_deterministic():
    first = run_fixture("gist_conflict")
    second = run_fixture("gist_conflict")
    assert first.requirements == second.requirements
    assert first.dockerfile("x.py") == second.dockerfile("x.py")


# -- explicit-install rules -----------------------------------------------


def toy_graph():
    """app 1.0 depends on lib; lib has versions 1.0 and 2.0, both allowed."""
    dg = DependencyGraph()
    app = ("version", "app", "1.0")
    lib1 = ("version", "lib", "1.0")
    lib2 = ("version", "lib", "2.0")
    dg.version_ids = {
        app: parse_version("1.0"),
        lib1: parse_version("1.0"),
        lib2: parse_version("2.0"),
    }
    dg.add_edge(START, ("module", "app"))
    dg.add_edge(("module", "app"), app)
    dg.add_edge(app, ("package", "app"))
    dg.add_edge(("package", "app"), app)
    dg.add_edge(app, ("package", "lib"), parse_specifier(">=1.0"))
    dg.add_edge(("package", "lib"), lib2)
    dg.add_edge(("package", "lib"), lib1)
    return dg, app, lib1, lib2


def sub_with(dg, *nodes_edges):
    sub = Subgraph()
    nodes, edges = nodes_edges
    sub.nodes = set(nodes)
    sub.edges = set(edges)
    for node in sub.nodes:
        if is_version(node):
            sub.chosen[node[1]] = node[2]
    return sub


def test_downgraded_dependency_is_pinned_explicit():
    dg, app, lib1, lib2 = toy_graph()
    nodes = [START, ("module", "app"), app, ("package", "app"), ("package", "lib"), lib1]
    edges = [
        (START, ("module", "app")),
        (("module", "app"), app),
        (app, ("package", "app")),
        (("package", "app"), app),
        (app, ("package", "lib")),
        (("package", "lib"), lib1),
    ]
    sub = sub_with(dg, nodes, edges)
    plan = plan_environment(dg, sub, DiscoveryResult(python_major=PY2))
    # lib 1.0 selected although 2.0 satisfies the constraints: pin it
    assert ("lib", parse_version("1.0")) in plan.explicit
    assert ("app", parse_version("1.0")) in plan.explicit


def test_newest_dependency_stays_implicit():
    dg, app, lib1, lib2 = toy_graph()
    nodes = [START, ("module", "app"), app, ("package", "app"), ("package", "lib"), lib2]
    edges = [
        (START, ("module", "app")),
        (("module", "app"), app),
        (app, ("package", "app")),
        (("package", "app"), app),
        (app, ("package", "lib")),
        (("package", "lib"), lib2),
    ]
    sub = sub_with(dg, nodes, edges)
    plan = plan_environment(dg, sub, DiscoveryResult(python_major=PY2))
    assert [name for name, _ in plan.explicit] == ["app"]
    assert plan.implicit == [("lib", parse_version("2.0"))]


def test_fallback_appended_unpinned():
    dg, app, lib1, lib2 = toy_graph()
    nodes = [START, ("module", "app"), app, ("package", "app"), ("package", "lib"), lib2]
    edges = [
        (START, ("module", "app")),
        (("module", "app"), app),
        (app, ("package", "app")),
        (("package", "app"), app),
        (app, ("package", "lib")),
        (("package", "lib"), lib2),
    ]
    sub = sub_with(dg, nodes, edges)
    discovery = DiscoveryResult(python_major=PY2, fallback_installs=["TotallyMadeup"])
    plan = plan_environment(dg, sub, discovery)
    assert plan.explicit[-1] == ("totallymadeup", None)
    text = render_requirements(plan)
    assert "\ntotallymadeup\n" in text or text.startswith("totallymadeup\n")


def test_empty_subgraph_empty_plan():
    dg = DependencyGraph()
    dg.succ[START] = []
    sub = Subgraph(nodes={START})
    plan = plan_environment(dg, sub, DiscoveryResult(python_major=PY3))
    assert plan.explicit == [] and plan.implicit == []
    assert render_requirements(plan) == ""


def test_cycle_emitted_in_name_order_with_warning():
    dg = DependencyGraph()
    a = ("version", "aaa", "1.0")
    b = ("version", "bbb", "1.0")
    dg.version_ids = {a: parse_version("1.0"), b: parse_version("1.0")}
    dg.add_edge(START, ("module", "aaa"))
    dg.add_edge(("module", "aaa"), a)
    dg.add_edge(a, ("package", "aaa"))
    dg.add_edge(("package", "aaa"), a)
    dg.add_edge(a, ("package", "bbb"), parse_specifier(">=1.0"))
    dg.add_edge(("package", "bbb"), b)
    dg.add_edge(b, ("package", "aaa"), parse_specifier(">=1.0"))
    sub = Subgraph(
        nodes={START, ("module", "aaa"), a, b, ("package", "aaa"), ("package", "bbb")},
        edges={
            (START, ("module", "aaa")),
            (("module", "aaa"), a),
            (a, ("package", "aaa")),
            (("package", "aaa"), a),
            (a, ("package", "bbb")),
            (("package", "bbb"), b),
            (b, ("package", "aaa")),
        },
        chosen={"aaa": "1.0", "bbb": "1.0"},
    )
    plan = plan_environment(dg, sub, DiscoveryResult(python_major=PY2))
    assert plan.warnings and "cycle" in plan.warnings[0]
    text = render_requirements(plan)
    assert text.startswith("# dependency cycle among aaa, bbb")
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    assert lines == sorted(lines)


# -- dockerfile rendering -------------------------------------------------


def test_dockerfile_bases():
    plan2 = plan_environment(
        _empty_dg(), Subgraph(nodes={START}), DiscoveryResult(python_major=PY2)
    )
    plan3 = plan_environment(
        _empty_dg(), Subgraph(nodes={START}), DiscoveryResult(python_major=PY3)
    )
    assert render_dockerfile(plan2, "s.py").splitlines()[0] == "FROM python:2.7.18"
    assert render_dockerfile(plan3, "s.py").splitlines()[0] == "FROM python:3.8.11"
    custom = render_dockerfile(plan3, "s.py", base3="python:3.11-slim")
    assert custom.splitlines()[0] == "FROM python:3.11-slim"


def test_empty_plan_dockerfile_omits_install():
    plan = plan_environment(
        _empty_dg(), Subgraph(nodes={START}), DiscoveryResult(python_major=PY3)
    )
    text = render_dockerfile(plan, "s.py")
    assert "pip install" not in text
    assert 'CMD ["python", "s.py"]' in text


def _empty_dg():
    dg = DependencyGraph()
    dg.succ[START] = []
    return dg


# -- topological validity on random instances ----------------------------


def test_requirements_order_is_topological_on_200_instances():
    rng = random.Random(99)
    checked = 0
    while checked < 200:
        graph, discovery, dg = random_instance(rng)
        sub, _ = solve(dg)
        if sub is None:
            continue
        plan = plan_environment(dg, sub, discovery)
        if plan.warnings:
            continue  # cyclic selections cannot be ordered topologically
        checked += 1
        position = {name: i for i, (name, _) in enumerate(plan.explicit)}
        selected = {n[1]: n for n in sub.nodes if is_version(n)}
        for name, vnode in selected.items():
            for succ in dg.successors(vnode):
                if is_package(succ) and (vnode, succ) in dg.labels and succ[1] in selected:
                    dep = succ[1]
                    if name in position and dep in position:
                        assert position[dep] < position[name], (dep, name)
    assert checked == 200
