"""Brute-force laboratory for small boolean functions.

Holds an enumeration of all non-constant boolean functions on up to four
features, a vectorised kernel that evaluates explanation and Shapley
queries for a whole population of truth tables at once, constraint
searches that rebuild the running-example fixtures, and the issue census.

The kernel is deliberately independent of :mod:`fxp.explain` and
:mod:`fxp.shapley`; every search result is re-checked through those
engines before it is returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import factorial
from typing import Iterable, Iterator, Sequence

import numpy as np

from .audit import audit_all_paths
from .explain import ExplanationProblem, Instance, canonical_order, enumerate_explanations
from .model import DecisionTree, Edge, FeatureSpace, Node, TruthTable
from .shapley import ISSUES, detect_issues, render_decimal, shapley_values

ENUMERATION_MAX_FEATURES = 4
KERNEL_MAX_FEATURES = 5


class LabError(ValueError):
    pass


class ReconstructionError(RuntimeError):
    pass


# --- boolean function enumeration ------------------------------------------

def table_code(tt: TruthTable) -> int:
    """Integer whose binary digits, most significant first, are the rows."""
    code = 0
    for r in tt.rows:
        code = (code << 1) | r
    return code


def code_rows(code: int, m: int) -> tuple:
    n = 2 ** m
    return tuple((code >> (n - 1 - r)) & 1 for r in range(n))


def _check_enumerable(m):
    if not 1 <= m <= ENUMERATION_MAX_FEATURES:
        raise LabError(f"full enumeration supports 1..{ENUMERATION_MAX_FEATURES} features, got {m}")


def function_codes(m: int) -> np.ndarray:
    _check_enumerable(m)
    return np.arange(1, 2 ** (2 ** m) - 1, dtype=np.int64)


def enumerate_functions(m: int) -> Iterator[TruthTable]:
    """Every non-constant boolean function on ``m`` features, by increasing code."""
    space = FeatureSpace.boolean(m)
    for code in function_codes(m):
        yield TruthTable(space, code_rows(int(code), m))


def codes_to_tables(codes: np.ndarray, m: int) -> np.ndarray:
    n = 2 ** m
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.int8)


# --- vectorised kernel ------------------------------------------------------

@dataclass
class KernelResult:
    """Per-function answers for one instance point; arrays indexed by function."""
    m: int
    point: tuple
    cls: np.ndarray            # (F,) predicted class
    axp: np.ndarray            # (F, 2**m) bool, column = feature bitmask
    cxp: np.ndarray            # (F, 2**m) bool
    sv_scaled: np.ndarray      # (F, m) int, Shapley value times m! * 2**m

    @property
    def denominator(self) -> int:
        return factorial(self.m) * 2 ** self.m

    def relevant(self) -> np.ndarray:
        out = np.zeros((len(self.cls), self.m), dtype=bool)
        for mask in range(2 ** self.m):
            for i in range(self.m):
                if mask >> i & 1:
                    out[:, i] |= self.axp[:, mask]
        return out

    def necessary(self) -> np.ndarray:
        out = self.relevant()
        for mask in range(2 ** self.m):
            for i in range(self.m):
                if not mask >> i & 1:
                    out[:, i] &= ~self.axp[:, mask]
        return out

    def sets(self, k: int) -> tuple:
        """(AXps, CXps) of function ``k`` as canonical tuples of feature sets."""
        return _sets_of(self.axp[k], self.m), _sets_of(self.cxp[k], self.m)

    def shapley(self, k: int) -> tuple:
        return tuple(Fraction(int(x), self.denominator) for x in self.sv_scaled[k])

    def issues(self) -> dict:
        rel = self.relevant()
        irr = ~rel
        sv = np.abs(self.sv_scaled)
        zero = self.sv_scaled == 0
        i1 = np.any(irr & ~zero, axis=1)
        i3 = np.any(rel & zero, axis=1)
        big = np.iinfo(np.int64).max
        max_irr = np.where(irr, sv, -1).max(axis=1)
        min_rel = np.where(rel, sv, big).min(axis=1)
        i2 = max_irr > min_rel
        top = sv.max(axis=1)
        unique_top = (sv == top[:, None]).sum(axis=1) == 1
        top_irr = irr[np.arange(len(sv)), sv.argmax(axis=1)]
        i5 = unique_top & top_irr
        return {"I1": i1, "I2": i2, "I3": i3, "I4": i1 & i3, "I5": i5}


def kernel(tables: np.ndarray, m: int, point: Sequence[int]) -> KernelResult:
    """Explanation sets and Shapley values of every table at ``point``.

    ``tables`` is an (F, 2**m) 0/1 array with rows in canonical order.
    """
    if not 1 <= m <= KERNEL_MAX_FEATURES:
        raise LabError(f"kernel supports 1..{KERNEL_MAX_FEATURES} features, got {m}")
    n = 2 ** m
    full = n - 1
    point = tuple(point)
    rows = list(product((0, 1), repeat=m))
    enc = rows.index(point)
    t = np.asarray(tables, dtype=np.int64)
    cls = t[:, enc]

    ones = np.empty((len(t), n), dtype=np.int64)
    count = np.empty(n, dtype=np.int64)
    for mask in range(n):
        cols = [r for r, x in enumerate(rows)
                if all(x[i] == point[i] for i in range(m) if mask >> i & 1)]
        ones[:, mask] = t[:, cols].sum(axis=1)
        count[mask] = len(cols)

    weak_axp = np.where(cls[:, None] == 1, ones == count[None, :], ones == 0)
    weak_cxp = ~weak_axp[:, [full ^ mask for mask in range(n)]]

    def minimal(weak):
        out = weak.copy()
        for mask in range(n):
            for i in range(m):
                if mask >> i & 1:
                    out[:, mask] &= ~weak[:, mask ^ (1 << i)]
        return out

    sv = np.zeros((len(t), m), dtype=np.int64)
    for i in range(m):
        for mask in range(n):
            if mask >> i & 1:
                continue
            size = bin(mask).count("1")
            w = factorial(size) * factorial(m - size - 1)
            sv[:, i] += w * (ones[:, mask | 1 << i] * 2 ** (size + 1) - ones[:, mask] * 2 ** size)
    return KernelResult(m, point, cls, minimal(weak_axp), minimal(weak_cxp), sv)


def _mask(s: Iterable[int]) -> int:
    return sum(1 << (i - 1) for i in s)


def _sets_of(row: np.ndarray, m: int) -> tuple:
    return canonical_order(tuple(i + 1 for i in range(m) if mask >> i & 1)
                           for mask in range(2 ** m) if row[mask])


# --- fixture search -----------------------------------------------------------

@dataclass(frozen=True)
class FixtureSpec:
    features: int
    instance: tuple
    predicted_class: int
    axps: tuple = ()
    axps_exact: bool = False
    cxps: tuple = ()
    cxps_exact: bool = False
    shapley: tuple = None
    shapley_tolerance: float = 5e-4
    issues: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "instance", tuple(self.instance))
        object.__setattr__(self, "axps", canonical_order(self.axps))
        object.__setattr__(self, "cxps", canonical_order(self.cxps))
        object.__setattr__(self, "issues", tuple(self.issues))
        if self.shapley is not None:
            object.__setattr__(self, "shapley", tuple(float(x) for x in self.shapley))
            if len(self.shapley) != self.features:
                raise LabError(f"shapley: {len(self.shapley)} values for {self.features} features")
        if len(self.instance) != self.features or any(x not in (0, 1) for x in self.instance):
            raise LabError(f"instance {self.instance} is not a boolean point on {self.features} features")
        for name, fam in (("axps", self.axps), ("cxps", self.cxps)):
            for a, b in combinations(fam, 2):
                if set(a) <= set(b) or set(b) <= set(a):
                    raise LabError(f"{name}: {a} and {b} are nested; explanations are subset-minimal")
            for s in fam:
                if any(not 1 <= i <= self.features for i in s):
                    raise LabError(f"{name}: {s} references a feature outside 1..{self.features}")
        unknown = set(self.issues) - set(ISSUES)
        if unknown:
            raise LabError(f"issues: unknown names {sorted(unknown)}")

    @classmethod
    def from_dict(cls, doc: dict) -> "FixtureSpec":
        if not isinstance(doc, dict):
            raise LabError("fixture spec: expected a JSON object")
        try:
            return cls(features=doc["features"], instance=tuple(doc["instance"]),
                       predicted_class=doc["class"],
                       axps=tuple(tuple(s) for s in doc.get("axps", ())),
                       axps_exact=bool(doc.get("axps_exact", False)),
                       cxps=tuple(tuple(s) for s in doc.get("cxps", ())),
                       cxps_exact=bool(doc.get("cxps_exact", False)),
                       shapley=doc.get("shapley"),
                       shapley_tolerance=float(doc.get("shapley_tolerance", 5e-4)),
                       issues=tuple(doc.get("issues", ())))
        except KeyError as exc:
            raise LabError(f"fixture spec: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise LabError(f"fixture spec: {exc}") from exc

    def to_dict(self) -> dict:
        doc = {"features": self.features, "instance": list(self.instance),
               "class": self.predicted_class,
               "axps": [list(s) for s in self.axps], "axps_exact": self.axps_exact,
               "cxps": [list(s) for s in self.cxps], "cxps_exact": self.cxps_exact}
        if self.shapley is not None:
            doc["shapley"] = list(self.shapley)
            doc["shapley_tolerance"] = self.shapley_tolerance
        doc["issues"] = list(self.issues)
        return doc


KAPPA_I4_SPEC = FixtureSpec(
    features=4, instance=(0, 0, 1, 1), predicted_class=0,
    axps=((1, 2),), cxps=((2,), (1, 4)),
    shapley=(-0.125, -0.333, 0.083, 0.0), issues=("I4",))

KAPPA_I5_SPEC = FixtureSpec(
    features=4, instance=(1, 1, 1, 1), predicted_class=0,
    axps=((1, 2, 3),), axps_exact=True,
    cxps=((1,), (2,), (3,)), cxps_exact=True, issues=("I5",))


def _decimal_close(value: Fraction, target: float, tol: float) -> bool:
    return abs(float(render_decimal(value)) - target) <= tol + 1e-12


def fixture_satisfies(spec: FixtureSpec, tt: TruthTable) -> bool:
    """Check a table against a spec with the generic engines."""
    if tt.space.m != spec.features:
        return False
    if tt.evaluate(spec.instance) != spec.predicted_class:
        return False
    problem = ExplanationProblem(tt, Instance(spec.instance, spec.predicted_class))
    sets = enumerate_explanations(problem)
    for required, found, exact in ((spec.axps, sets.axps, spec.axps_exact),
                                   (spec.cxps, sets.cxps, spec.cxps_exact)):
        if exact and tuple(required) != tuple(found):
            return False
        if not set(required) <= set(found):
            return False
    sv = shapley_values(problem)
    if spec.shapley is not None and not all(
            _decimal_close(v, t, spec.shapley_tolerance) for v, t in zip(sv, spec.shapley)):
        return False
    report = detect_issues(problem, sets, sv)
    return all(report.flags[name] for name in spec.issues)


def find_fixture(spec: FixtureSpec) -> list:
    """All boolean functions meeting ``spec``, ordered by table code.

    An unsatisfiable spec yields an empty list.
    """
    m = spec.features
    codes = function_codes(m)
    tables = codes_to_tables(codes, m)
    res = kernel(tables, m, spec.instance)
    keep = res.cls == spec.predicted_class
    n = 2 ** m
    for required, fam, exact in ((spec.axps, res.axp, spec.axps_exact),
                                 (spec.cxps, res.cxp, spec.cxps_exact)):
        for s in required:
            keep &= fam[:, _mask(s)]
        if exact:
            others = [mask for mask in range(n) if mask not in {_mask(s) for s in required}]
            keep &= ~fam[:, others].any(axis=1)
    if spec.shapley is not None:
        d = res.denominator
        num = np.abs(res.sv_scaled) * 1000
        rounded = np.sign(res.sv_scaled) * ((2 * num + d) // (2 * d))
        target = np.asarray(spec.shapley) * 1000
        keep &= np.all(np.abs(rounded - target[None, :]) <= spec.shapley_tolerance * 1000 + 1e-9, axis=1)
    flags = res.issues()
    for name in spec.issues:
        keep &= flags[name]
    space = FeatureSpace.boolean(m)
    out = []
    for code in codes[keep]:
        tt = TruthTable(space, code_rows(int(code), m))
        if not fixture_satisfies(spec, tt):
            raise LabError(f"kernel and engines disagree on table code {int(code)}")
        out.append(tt)
    return out


# --- issue census -------------------------------------------------------------

@dataclass(frozen=True)
class CensusReport:
    m: int
    functions: int
    total: int
    counts: dict = field(default_factory=dict)


def issue_census(m: int, issues: Sequence[str] = ISSUES, method: str = "kernel") -> CensusReport:
    """Count (function, instance) pairs exhibiting each issue."""
    issues = tuple(issues)
    unknown = set(issues) - set(ISSUES)
    if unknown:
        raise LabError(f"unknown issues {sorted(unknown)}")
    codes = function_codes(m)
    counts = dict.fromkeys(issues, 0)
    points = list(product((0, 1), repeat=m))
    if method == "kernel":
        tables = codes_to_tables(codes, m)
        for v in points:
            flags = kernel(tables, m, v).issues()
            for name in issues:
                counts[name] += int(flags[name].sum())
    elif method == "engine":
        for tt in enumerate_functions(m):
            for v in points:
                report = detect_issues(ExplanationProblem.at(tt, v))
                for name in issues:
                    counts[name] += report.flags[name]
    else:
        raise LabError(f"unknown census method {method!r}")
    return CensusReport(m, len(codes), len(codes) * len(points), counts)


# --- decision tree of the running example --------------------------------------

# Path, features, AXp and %Red as printed in the redundancy table.
TABLE_II = (
    ((1, 2, 4, 6), (1, 2, 3), (1, 2, 3), 0),
    ((1, 2, 4, 7, 10, 14), (1, 2, 3, 4, 5), (1, 4, 5), 40),
    ((1, 2, 4, 7, 10, 15), (1, 2, 3, 4, 5), (3, 5), 60),
    ((1, 2, 4, 7, 11), (1, 2, 3, 4), (3, 4), 50),
    ((1, 2, 5, 8, 12), (1, 2, 4, 5), (1, 4, 5), 40),
    ((1, 2, 5, 8, 13), (1, 2, 4, 5), (2, 5), 60),
    ((1, 2, 5, 9), (1, 2, 4), (2, 4), 33),
    ((1, 3), (1,), (1,), 0),
)

# Points with x3 = x5 = 1, all classified 1.
TABLE_I = tuple((x1, x2, 1, x4, 1) for x1, x2, x4 in product((0, 1), repeat=3))

_SKELETON = {1: (1, (2, 3)), 2: (2, (4, 5)), 4: (3, (6, 7)), 7: (4, (10, 11)),
             10: (5, (14, 15)), 5: (4, (8, 9)), 8: (5, (12, 13))}
_FIXED_POLARITY = {1: 0, 2: 0, 4: 0}   # x1=0, x2=0, x3=0 lead to the lower-numbered child
_FREE_POLARITY = (5, 7, 8, 10)
_TERMINALS = (3, 6, 9, 11, 12, 13, 14, 15)


def _route(polarity, point):
    nid, path = 1, [1]
    while nid in _SKELETON:
        f, (lo, hi) = _SKELETON[nid]
        nid = lo if point[f - 1] == polarity[nid] else hi
        path.append(nid)
    return tuple(path)


def _build_tree(polarity, classes) -> DecisionTree:
    nodes = {}
    for nid, (f, (lo, hi)) in _SKELETON.items():
        p = polarity[nid]
        nodes[nid] = Node(nid, feature=f, edges=(Edge((p,), lo), Edge((1 - p,), hi)))
    for nid, c in classes.items():
        nodes[nid] = Node(nid, leaf=c)
    return DecisionTree(FeatureSpace.boolean(5), nodes, 1)


def dt_fig1_constraints(strict: bool = False) -> list:
    """Named predicates over (polarity, classes, tree-or-None) for the search."""
    def kappa(pol, cls, x):
        return cls[_route(pol, x)[-1]]

    cheap = [
        ("(0,0,0,0,0) follows <1,2,4,6>",
         lambda pol, cls: _route(pol, (0, 0, 0, 0, 0)) == (1, 2, 4, 6)),
        ("(0,0,0,0,0) has class 0", lambda pol, cls: kappa(pol, cls, (0, 0, 0, 0, 0)) == 0),
        ("(0,1,1,0,0) follows <1,2,5,8,12>",
         lambda pol, cls: _route(pol, (0, 1, 1, 0, 0)) == (1, 2, 5, 8, 12)),
        ("(0,0,1,0,1) follows <1,2,4,7,10,15>",
         lambda pol, cls: _route(pol, (0, 0, 1, 0, 1)) == (1, 2, 4, 7, 10, 15)),
        ("(0,0,1,0,1) has class 1", lambda pol, cls: kappa(pol, cls, (0, 0, 1, 0, 1)) == 1),
        ("x3=x5=1 points all have class 1",
         lambda pol, cls: all(kappa(pol, cls, x) == 1 for x in TABLE_I)),
    ]
    if strict:
        cheap.append(("(0,1,1,0,0) has class 1",
                      lambda pol, cls: kappa(pol, cls, (0, 1, 1, 0, 0)) == 1))
    return cheap


def _table_ii_matches(dt: DecisionTree) -> bool:
    rows = audit_all_paths(dt)
    got = [(r.path, r.features, r.axp) for r in rows]
    return got == [(p, f, a) for p, f, a, _ in TABLE_II]


def reconstruct_dt_fig1(strict: bool = False) -> DecisionTree:
    """First tree in search order satisfying the running-example constraints.

    Search order: polarity bits of nodes 5, 7, 8, 10 (0 means value 0 leads
    to the lower-numbered child), then terminal classes of nodes
    3, 6, ..., 15 as a binary counter.  ``strict`` additionally demands the
    class 1 for (0,1,1,0,0), which the redundancy
    table contradicts.
    """
    constraints = dt_fig1_constraints(strict)
    near = []
    for bits in product((0, 1), repeat=len(_FREE_POLARITY)):
        pol = {**_FIXED_POLARITY, **dict(zip(_FREE_POLARITY, bits))}
        for cbits in product((0, 1), repeat=len(_TERMINALS)):
            if len(set(cbits)) < 2:
                continue
            cls = dict(zip(_TERMINALS, cbits))
            failed = [name for name, pred in constraints if not pred(pol, cls)]
            if len(failed) > 1:
                continue
            dt = _build_tree(pol, cls)
            if not _table_ii_matches(dt):
                failed.append("audit_all_paths reproduces the redundancy table")
            if not failed:
                return dt
            if len(failed) == 1:
                near.append((bits, cbits, failed[0]))
    detail = "; ".join(f"polarity {b} classes {c} fails only: {f}" for b, c, f in near[:5])
    raise ReconstructionError(f"no decision tree satisfies every constraint. Nearest: {detail or 'none'}")
