"""Exact Shapley values for explainability under the uniform distribution.

The characteristic function of a coalition ``S`` is the average class
over the points that agree with the instance on ``S``.  Values are exact
:class:`fractions.Fraction` objects; decimal renderings round half away
from zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial
from typing import Iterable, Iterator

from .explain import (ExplanationProblem, ExplanationSets, FeatureStatus,
                      enumerate_explanations, feature_set, feature_status)

ORACLE_MAX_FEATURES = 8
ISSUES = ("I1", "I2", "I3", "I4", "I5")


class ShapleyError(ValueError):
    pass


def render_decimal(value: Fraction, places: int = 3) -> str:
    """Fixed-point rendering, rounding half away from zero."""
    value = Fraction(value)
    scale = 10 ** places
    q, r = divmod(abs(value.numerator) * scale, value.denominator)
    if 2 * r >= value.denominator:
        q += 1
    sign = "-" if value < 0 and q else ""
    digits = str(q).rjust(places + 1, "0")
    if not places:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def upsilon_count(space, s: Iterable[int]) -> int:
    s = set(feature_set(s, space.m))
    n = 1
    for i, d in enumerate(space.domain_sizes, start=1):
        if i not in s:
            n *= d
    return n


def upsilon(problem: ExplanationProblem, s: Iterable[int]) -> Iterator[tuple]:
    """Points of feature space that agree with the instance on ``s``."""
    s = set(feature_set(s, problem.m))
    axes = [(v,) if i in s else range(d)
            for i, (v, d) in enumerate(zip(problem.v, problem.space.domain_sizes), start=1)]
    return iter(product(*axes))


def _require_boolean_classes(problem: ExplanationProblem):
    if problem.space.class_count != 2:
        raise ShapleyError(
            f"Shapley analysis needs classes coded 0/1, model has {problem.space.class_count} classes")


def phi(problem: ExplanationProblem, s: Iterable[int]) -> Fraction:
    _require_boolean_classes(problem)
    sub = problem.restrict(feature_set(s, problem.m))
    return Fraction(int(sub.sum()), int(sub.size))


class _PhiCache:
    def __init__(self, problem):
        self.problem = problem
        self.values = {}

    def __call__(self, s: frozenset) -> Fraction:
        try:
            return self.values[s]
        except KeyError:
            val = self.values[s] = phi(self.problem, s)
            return val


def shapley_value(problem: ExplanationProblem, i: int, cache: _PhiCache = None) -> Fraction:
    problem.space.check_feature(i)
    _require_boolean_classes(problem)
    cache = cache or _PhiCache(problem)
    m = problem.m
    others = [j for j in problem.space.features if j != i]
    total = Fraction(0)
    for size in range(m):
        weight = Fraction(factorial(size) * factorial(m - size - 1), factorial(m))
        acc = Fraction(0)
        for s in combinations(others, size):
            s = frozenset(s)
            acc += cache(s | {i}) - cache(s)
        total += weight * acc
    return total


def shapley_values(problem: ExplanationProblem) -> tuple:
    cache = _PhiCache(problem)
    return tuple(shapley_value(problem, i, cache) for i in problem.space.features)


def shapley_oracle(problem: ExplanationProblem, i: int) -> Fraction:
    """Average marginal contribution of ``i`` over all feature orderings."""
    problem.space.check_feature(i)
    if problem.m > ORACLE_MAX_FEATURES:
        raise ShapleyError(f"ordering oracle limited to {ORACLE_MAX_FEATURES} features, got {problem.m}")
    cache = _PhiCache(problem)
    total = Fraction(0)
    for order in permutations(problem.space.features):
        prefix = frozenset(order[:order.index(i)])
        total += cache(prefix | {i}) - cache(prefix)
    return total / factorial(problem.m)


@dataclass(frozen=True)
class ShapleyReport:
    instance: object
    values: tuple

    @classmethod
    def compute(cls, problem: ExplanationProblem) -> "ShapleyReport":
        return cls(problem.instance, shapley_values(problem))

    @property
    def decimals(self) -> tuple:
        return tuple(render_decimal(v) for v in self.values)


@dataclass(frozen=True)
class IssueReport:
    statuses: tuple      # FeatureStatus per feature
    values: tuple        # exact Shapley value per feature
    witnesses: dict = field(default_factory=dict)  # issue -> tuple of witnesses

    @property
    def flags(self) -> dict:
        return {name: bool(self.witnesses.get(name)) for name in ISSUES}

    def flagged(self) -> tuple:
        return tuple(name for name in ISSUES if self.witnesses.get(name))

    def verify(self) -> bool:
        """Re-evaluate every stored witness against its defining predicate."""
        return all(_holds(name, w, self.statuses, self.values)
                   for name in ISSUES for w in self.witnesses.get(name, ()))


def _holds(name, w, statuses, sv) -> bool:
    def irr(i):
        return statuses[i - 1] is FeatureStatus.IRRELEVANT

    if name == "I1":
        (i,) = w
        return irr(i) and sv[i - 1] != 0
    if name == "I2":
        i1, i2 = w
        return irr(i1) and not irr(i2) and abs(sv[i1 - 1]) > abs(sv[i2 - 1])
    if name == "I3":
        (i,) = w
        return not irr(i) and sv[i - 1] == 0
    if name == "I4":
        i1, i2 = w
        return _holds("I1", (i1,), statuses, sv) and _holds("I3", (i2,), statuses, sv)
    if name == "I5":
        (i,) = w
        return irr(i) and all(abs(sv[j]) < abs(sv[i - 1]) for j in range(len(sv)) if j != i - 1)
    raise KeyError(name)


def detect_issues(problem: ExplanationProblem, sets: ExplanationSets = None,
                  values: tuple = None) -> IssueReport:
    _require_boolean_classes(problem)
    sets = sets or enumerate_explanations(problem)
    statuses = tuple(feature_status(problem, t, sets) for t in problem.space.features)
    sv = values if values is not None else shapley_values(problem)
    feats = list(problem.space.features)
    candidates = {
        "I1": [(i,) for i in feats],
        "I2": [(a, b) for a in feats for b in feats if a != b],
        "I3": [(i,) for i in feats],
        "I4": [(a, b) for a in feats for b in feats if a != b],
        "I5": [(i,) for i in feats],
    }
    witnesses = {name: tuple(w for w in ws if _holds(name, w, statuses, sv))
                 for name, ws in candidates.items()}
    return IssueReport(statuses, tuple(sv), witnesses)
