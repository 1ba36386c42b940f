"""CNF encoding of a dependency graph and a small complete SAT solver.

The encoding follows six rules: the start node is asserted; conjunction
nodes imply each successor; disjunction nodes imply the disjunction of their
successors; candidate versions imply their packages (already present as
graph edges); packages allow at most one version via pairwise exclusions;
and a version excludes every version of a direct dependency that misses its
requirement.  The solver is unit propagation with chronological
backtracking, branching on version variables newest-first so that models
lean toward recent versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .depgraph import START, DependencyGraph, is_conjunction, is_package, is_version
from .versioning import satisfies


@dataclass
class CnfFormula:
    variables: dict[tuple, int]  # node -> 1-based variable index
    clauses: list[tuple[int, ...]]
    branch_order: list[int] = field(default_factory=list)

    @property
    def names(self) -> dict[int, tuple]:
        return {index: node for node, index in self.variables.items()}


def encode_cnf(dg: DependencyGraph) -> CnfFormula:
    nodes = sorted(dg.nodes)
    variables = {node: i + 1 for i, node in enumerate(nodes)}
    clauses: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()

    def emit(*lits: int) -> None:
        clause = tuple(sorted(set(lits)))
        if clause not in seen:
            seen.add(clause)
            clauses.append(clause)

    emit(variables[START])

    for node in nodes:
        successors = dg.successors(node)
        if is_conjunction(node):
            for succ in successors:
                emit(-variables[node], variables[succ])
        else:
            emit(-variables[node], *(variables[s] for s in successors))
        if is_package(node):
            versions = [s for s in successors if is_version(s)]
            for i in range(len(versions)):
                for j in range(i + 1, len(versions)):
                    emit(-variables[versions[i]], -variables[versions[j]])

    # a version is incompatible with dependency versions missing its requirement
    for node in nodes:
        if not is_version(node):
            continue
        for succ in dg.successors(node):
            if not is_package(succ) or (node, succ) not in dg.labels:
                continue
            spec = dg.labels[(node, succ)]
            for dep_version in dg.successors(succ):
                if not is_version(dep_version):
                    continue
                if not satisfies(dg.version_ids[dep_version], spec):
                    emit(-variables[node], -variables[dep_version])

    # branch on version variables newest-first, packages grouped by name
    version_nodes = [n for n in nodes if is_version(n)]
    version_nodes.sort(key=lambda n: (n[1], dg.version_ids[n]), reverse=True)
    branch = [variables[n] for n in version_nodes]
    branch += [variables[n] for n in nodes if not is_version(n)]
    return CnfFormula(variables=variables, clauses=clauses, branch_order=branch)


def to_dimacs(formula: CnfFormula) -> str:
    lines = []
    for index, node in sorted(formula.names.items()):
        lines.append(f"c {index} {'/'.join(str(part) for part in node)}")
    lines.append(f"p cnf {len(formula.variables)} {len(formula.clauses)}")
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def sat_solve(formula: CnfFormula) -> Optional[dict[int, bool]]:
    """Complete search; returns a model or None when unsatisfiable."""
    clauses = [list(c) for c in formula.clauses]
    order = formula.branch_order or sorted(formula.variables.values())
    model = _search(clauses, {}, order)
    if model is None:
        return None
    for var in formula.variables.values():
        model.setdefault(var, False)
    return model


def _search(clauses, assignment, order) -> Optional[dict[int, bool]]:
    assignment = dict(assignment)
    # unit propagation to fixpoint
    while True:
        unit = None
        for clause in clauses:
            status, unassigned = _clause_state(clause, assignment)
            if status == "unsat":
                return None
            if status == "unit":
                unit = unassigned
                break
        if unit is None:
            break
        assignment[abs(unit)] = unit > 0

    branch_var = None
    for var in order:
        if var not in assignment:
            if any(_mentions(clause, var, assignment) for clause in clauses):
                branch_var = var
                break
            assignment[var] = False  # unconstrained
    if branch_var is None:
        if all(_clause_state(c, assignment)[0] == "sat" for c in clauses):
            return assignment
        return None

    for value in (True, False):
        trial = dict(assignment)
        trial[branch_var] = value
        model = _search(clauses, trial, order)
        if model is not None:
            return model
    return None


def _clause_state(clause, assignment):
    unassigned = None
    count = 0
    for lit in clause:
        value = assignment.get(abs(lit))
        if value is None:
            unassigned = lit
            count += 1
        elif value == (lit > 0):
            return "sat", None
    if count == 0:
        return "unsat", None
    if count == 1:
        return "unit", unassigned
    return "open", None


def _mentions(clause, var, assignment) -> bool:
    for lit in clause:
        value = assignment.get(abs(lit))
        if value == (lit > 0):
            return False  # clause already satisfied
    return any(abs(lit) == var for lit in clause)
