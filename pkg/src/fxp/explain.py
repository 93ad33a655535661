"""Abductive and contrastive explanations over tabulated classifiers.

All queries reduce to slicing the canonical truth table: fixing the
features of a set ``S`` to the instance's values selects the sub-array
of points that agree with the instance on ``S``.  Sufficiency of ``S``
(weak AXp) means that sub-array is uniformly the predicted class; a weak
CXp ``Y`` is a set whose release, with every other feature kept, admits
some other class.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .model import Classifier, DomainError, TruthTable, tabulate

EXHAUSTIVE_MAX_FEATURES = 12


class ExplanationError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    point: tuple
    predicted_class: int


@dataclass(frozen=True)
class ExplanationProblem:
    classifier: Classifier
    instance: Instance
    table: TruthTable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        space = self.classifier.space
        point = space.check_point(self.instance.point)
        c = space.check_class(self.instance.predicted_class)
        object.__setattr__(self, "instance", Instance(point, c))
        object.__setattr__(self, "table", tabulate(self.classifier))
        if self.table.array[point] != c:
            raise ExplanationError(
                f"classifier predicts {int(self.table.array[point])} at {point}, instance claims {c}")

    @classmethod
    def at(cls, classifier: Classifier, point: Sequence[int]) -> "ExplanationProblem":
        """Problem for ``point`` with the classifier's own prediction as the class."""
        point = classifier.space.check_point(point)
        return cls(classifier, Instance(point, classifier.evaluate(point)))

    @property
    def space(self):
        return self.classifier.space

    @property
    def m(self) -> int:
        return self.space.m

    @property
    def v(self) -> tuple:
        return self.instance.point

    @property
    def c(self) -> int:
        return self.instance.predicted_class

    def restrict(self, fixed: Iterable[int]) -> np.ndarray:
        """Classes of the points agreeing with the instance on ``fixed``."""
        fixed = set(fixed)
        index = tuple(self.v[i - 1] if i in fixed else slice(None) for i in range(1, self.m + 1))
        return np.asarray(self.table.array[index])


def feature_set(members: Iterable[int], m: int) -> tuple:
    """Validate and canonicalise a feature set as a sorted tuple."""
    members = list(members)
    s = tuple(sorted(set(members)))
    if len(s) != len(members):
        raise DomainError(f"duplicate features in {members}")
    for i in s:
        if not 1 <= i <= m:
            raise DomainError(f"feature index {i} outside 1..{m}")
    return s


def canonical_order(sets: Iterable[Iterable[int]]) -> tuple:
    return tuple(sorted({tuple(sorted(s)) for s in sets}, key=lambda s: (len(s), s)))


def is_weak_axp(problem: ExplanationProblem, s: Iterable[int]) -> bool:
    s = feature_set(s, problem.m)
    return bool(np.all(problem.restrict(s) == problem.c))


def is_weak_cxp(problem: ExplanationProblem, s: Iterable[int]) -> bool:
    s = feature_set(s, problem.m)
    kept = set(problem.space.features) - set(s)
    return bool(np.any(problem.restrict(kept) != problem.c))


def _is_minimal(pred, problem, s) -> bool:
    return pred(problem, s) and not any(pred(problem, [k for k in s if k != j]) for j in s)


def is_axp(problem: ExplanationProblem, s: Iterable[int]) -> bool:
    return _is_minimal(is_weak_axp, problem, feature_set(s, problem.m))


def is_cxp(problem: ExplanationProblem, s: Iterable[int]) -> bool:
    return _is_minimal(is_weak_cxp, problem, feature_set(s, problem.m))


def _shrink(pred, problem, seed, what):
    current = list(feature_set(problem.space.features if seed is None else seed, problem.m))
    if not pred(problem, current):
        raise ExplanationError(f"seed {tuple(current)} is not a weak {what}")
    for j in list(current):
        trial = [k for k in current if k != j]
        if pred(problem, trial):
            current = trial
    return tuple(current)


def find_axp(problem: ExplanationProblem, seed: Iterable[int] = None) -> tuple:
    """Deletion-based AXp inside ``seed`` (all features by default), ascending order."""
    return _shrink(is_weak_axp, problem, seed, "AXp")


def find_cxp(problem: ExplanationProblem, seed: Iterable[int] = None) -> tuple:
    return _shrink(is_weak_cxp, problem, seed, "CXp")


@dataclass(frozen=True)
class ExplanationSets:
    axps: tuple
    cxps: tuple

    def __post_init__(self):
        object.__setattr__(self, "axps", canonical_order(self.axps))
        object.__setattr__(self, "cxps", canonical_order(self.cxps))

    @property
    def axp_features(self) -> frozenset:
        return frozenset().union(*self.axps)

    @property
    def cxp_features(self) -> frozenset:
        return frozenset().union(*self.cxps)


def enumerate_by_subsets(problem: ExplanationProblem) -> ExplanationSets:
    m = problem.m
    subsets = [s for r in range(m + 1) for s in combinations(range(1, m + 1), r)]
    weak_a = {s: is_weak_axp(problem, s) for s in subsets}
    weak_c = {s: is_weak_cxp(problem, s) for s in subsets}

    def minimal(weak):
        return [s for s in subsets
                if weak[s] and not any(weak[s[:k] + s[k + 1:]] for k in range(len(s)))]

    return ExplanationSets(minimal(weak_a), minimal(weak_c))


def minimal_hitting_sets(family: Iterable[Iterable[int]]) -> tuple:
    """All subset-minimal hitting sets of ``family`` (Berge's incremental product)."""
    family = [frozenset(s) for s in family]
    hs = [frozenset()]
    for s in family:
        if not s:
            return ()
        grown = set()
        for h in hs:
            if h & s:
                grown.add(h)
            else:
                grown.update(h | {e} for e in s)
        grown = sorted(grown, key=len)
        hs = []
        for h in grown:
            if not any(k <= h for k in hs):
                hs.append(h)
    return canonical_order(hs)


def enumerate_by_dualization(problem: ExplanationProblem, start: str = "axp") -> ExplanationSets:
    """Hitting-set dualization: grow one family from counterexamples to the other.

    With ``start="axp"`` candidate AXps are minimal hitting sets of the CXps
    found so far; a candidate that is not sufficient yields a fresh CXp
    inside its complement.  ``start="cxp"`` runs the symmetric loop.
    """
    full = set(problem.space.features)
    if start == "axp":
        target_pred, other_find = is_weak_axp, find_cxp
    elif start == "cxp":
        target_pred, other_find = is_weak_cxp, find_axp
    else:
        raise ValueError(f"start must be 'axp' or 'cxp', got {start!r}")
    others = []
    while True:
        pending = [h for h in minimal_hitting_sets(others) if not target_pred(problem, h)]
        if not pending:
            found = minimal_hitting_sets(others)
            break
        # a non-sufficient MHS h leaves a witness set inside its complement that h misses
        others.append(other_find(problem, sorted(full - set(pending[0]))))
    if start == "axp":
        return ExplanationSets(found, others)
    return ExplanationSets(others, found)


def enumerate_explanations(problem: ExplanationProblem, method: str = "auto") -> ExplanationSets:
    if method == "auto":
        method = "subsets" if problem.m <= EXHAUSTIVE_MAX_FEATURES else "dualize"
    if method == "subsets":
        return enumerate_by_subsets(problem)
    if method == "dualize":
        return enumerate_by_dualization(problem)
    raise ValueError(f"unknown enumeration method {method!r}")


def check_duality(sets: ExplanationSets) -> bool:
    """Each family is exactly the set of minimal hitting sets of the other."""
    return (minimal_hitting_sets(sets.cxps) == canonical_order(sets.axps)
            and minimal_hitting_sets(sets.axps) == canonical_order(sets.cxps))


class FeatureStatus(enum.Enum):
    NECESSARY = "Necessary"
    RELEVANT = "Relevant"
    IRRELEVANT = "Irrelevant"

    @property
    def relevant(self) -> bool:
        return self is not FeatureStatus.IRRELEVANT

    def __str__(self):
        return self.value


class DualityViolation(RuntimeError):
    pass


def feature_status(problem: ExplanationProblem, t: int, sets: ExplanationSets = None) -> FeatureStatus:
    problem.space.check_feature(t)
    if sets is None:
        sets = enumerate_explanations(problem)
    in_axp = [t in x for x in sets.axps]
    if any(in_axp) != (t in sets.cxp_features):
        raise DualityViolation(f"feature {t}: AXp membership {any(in_axp)} disagrees with CXp membership")
    if in_axp and all(in_axp):
        return FeatureStatus.NECESSARY
    if any(in_axp):
        return FeatureStatus.RELEVANT
    return FeatureStatus.IRRELEVANT
