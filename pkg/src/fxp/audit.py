"""Path-redundancy audits for decision trees, decision-list explanations
and sufficiency checks for candidate anchors."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence, Union

import numpy as np

from .explain import (ExplanationError, ExplanationProblem, Instance, feature_set,
                      find_axp, is_axp)
from .model import Classifier, DecisionList, DecisionTree, Path


class AuditError(ValueError):
    pass


def redundancy_percent(n_path: int, n_axp: int) -> int:
    """Share of path features absent from the AXp, nearest integer, ties up."""
    if n_path == 0:
        return 0
    return (200 * (n_path - n_axp) + n_path) // (2 * n_path)


@dataclass(frozen=True)
class PathAuditRow:
    path: tuple
    features: tuple
    axp: tuple
    redundancy: int
    variants: tuple = ()  # distinct AXps across consistent instances when they disagree

    @property
    def consistent(self) -> bool:
        return not self.variants


def audit_path(problem: ExplanationProblem, path: Path = None) -> PathAuditRow:
    dt = problem.classifier
    if not isinstance(dt, DecisionTree):
        raise AuditError("path audits need a decision tree")
    if path is None:
        path = dt.consistent_path(problem.v)
    elif not path.holds(problem.v):
        raise AuditError(f"instance {problem.v} is not consistent with path {path.node_ids}")
    axp = find_axp(problem, path.features)
    return PathAuditRow(path.node_ids, path.features, axp,
                        redundancy_percent(len(path.features), len(axp)))


def _path_region(dt: DecisionTree, path: Path) -> np.ndarray:
    mask = np.ones(dt.space.domain_sizes, dtype=bool)
    for f, vals in path.literals:
        mask &= dt.space.axis_mask(f, vals)
    return mask


def audit_all_paths(dt: DecisionTree) -> list:
    """One row per path, in depth-first ascending-edge order.

    The representative instance of a path is its lexicographically
    smallest consistent point.
    """
    rows = []
    for path in dt.paths():
        region = np.argwhere(_path_region(dt, path))
        if len(region) == 0:
            continue  # literals contradict each other; no instance reaches this leaf
        rep = tuple(int(x) for x in region[0])
        problem = ExplanationProblem(dt, Instance(rep, dt.leaf_class(path)))
        row = audit_path(problem, path)
        # the seeded AXp only reads the instance on path features
        feats = path.features
        allowed = [sorted(set(np.unique(region[:, f - 1]).tolist())) for f in feats]
        seen = {row.axp}
        for combo in product(*allowed):
            point = list(rep)
            for f, x in zip(feats, combo):
                point[f - 1] = x
            seen.add(find_axp(ExplanationProblem(dt, Instance(tuple(point), problem.c)), feats))
        if len(seen) > 1:
            row = PathAuditRow(row.path, row.features, row.axp, row.redundancy,
                               tuple(sorted(seen, key=lambda s: (len(s), s))))
        rows.append(row)
    return rows


def explain_dl(problem: ExplanationProblem) -> tuple:
    """AXp of the function a decision list induces; earlier rules are honoured."""
    if not isinstance(problem.classifier, DecisionList):
        raise AuditError("explain_dl needs a decision list")
    return find_axp(problem)


class Verdict(enum.Enum):
    CORRECT = "Correct"
    REDUNDANT = "Redundant"
    INCORRECT = "Incorrect"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AnchorVerdict:
    candidate: tuple
    verdict: Verdict
    counterexample: Union[tuple, None] = None
    axp: Union[tuple, None] = None


def check_anchor(problem: ExplanationProblem, candidate: Iterable[int]) -> AnchorVerdict:
    candidate = feature_set(candidate, problem.m)
    sub = problem.restrict(candidate)
    bad = np.argwhere(sub != problem.c)
    if len(bad):
        free = [i for i in problem.space.features if i not in candidate]
        point = list(problem.v)
        for i, x in zip(free, bad[0]):
            point[i - 1] = int(x)
        return AnchorVerdict(candidate, Verdict.INCORRECT, counterexample=tuple(point))
    if is_axp(problem, candidate):
        return AnchorVerdict(candidate, Verdict.CORRECT, axp=candidate)
    return AnchorVerdict(candidate, Verdict.REDUNDANT, axp=find_axp(problem, candidate))


def check_anchor_batch(classifier: Classifier, entries: Sequence[dict]) -> list:
    """Verdicts for ``[{"instance": [...], "set": [...]}, ...]`` in input order."""
    out = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict) or "instance" not in entry or "set" not in entry:
            raise AuditError(f"batch[{k}]: expected object with 'instance' and 'set'")
        try:
            problem = ExplanationProblem.at(classifier, entry["instance"])
            out.append(check_anchor(problem, entry["set"]))
        except (ValueError, TypeError) as exc:
            raise AuditError(f"batch[{k}]: {exc}") from exc
    return out
