"""Classifier representations over finite feature domains.

Three families are supported: extensional truth tables, decision trees
whose edges carry value sets, and ordered decision lists.  Every
classifier can be tabulated into a canonical :class:`TruthTable`, where a
point's row index is its mixed-radix encoding with feature 1 as the most
significant digit.

Features are 1-based throughout the public API; points are plain tuples
of ints in feature order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence, Union

import numpy as np

TABULATION_LIMIT = 2 ** 20

Point = tuple


class ModelError(ValueError):
    """Malformed model document or violated classifier invariant."""


class DomainError(ValueError):
    """A point does not conform to a feature space."""


@dataclass(frozen=True)
class FeatureSpace:
    domain_sizes: tuple
    class_count: int = 2

    def __post_init__(self):
        object.__setattr__(self, "domain_sizes", tuple(int(d) for d in self.domain_sizes))
        if len(self.domain_sizes) < 1:
            raise ModelError("feature space needs at least one feature")
        for i, d in enumerate(self.domain_sizes, start=1):
            if d < 2:
                raise ModelError(f"domains[{i - 1}]: feature {i} has domain size {d}, need >= 2")
        if self.class_count < 2:
            raise ModelError(f"classes: need at least 2 classes, got {self.class_count}")
        if self.size > TABULATION_LIMIT:
            raise ModelError(
                f"feature space has {self.size} points, above the tabulation limit {TABULATION_LIMIT}")

    @classmethod
    def boolean(cls, m: int) -> "FeatureSpace":
        return cls((2,) * m, 2)

    @property
    def m(self) -> int:
        return len(self.domain_sizes)

    @property
    def size(self) -> int:
        return int(np.prod(self.domain_sizes, dtype=object))

    @property
    def features(self) -> range:
        return range(1, self.m + 1)

    def check_point(self, point: Sequence[int]) -> tuple:
        point = tuple(int(x) for x in point)
        if len(point) != self.m:
            raise DomainError(f"point has {len(point)} values, feature space has {self.m} features")
        for i, (x, d) in enumerate(zip(point, self.domain_sizes), start=1):
            if not 0 <= x < d:
                raise DomainError(f"feature {i}: value {x} outside domain 0..{d - 1}")
        return point

    def check_feature(self, i: int) -> int:
        if not 1 <= i <= self.m:
            raise DomainError(f"feature index {i} outside 1..{self.m}")
        return i

    def check_class(self, c: int) -> int:
        if not 0 <= c < self.class_count:
            raise DomainError(f"class {c} outside 0..{self.class_count - 1}")
        return c

    def encode(self, point: Sequence[int]) -> int:
        return int(np.ravel_multi_index(self.check_point(point), self.domain_sizes))

    def decode(self, index: int) -> tuple:
        if not 0 <= index < self.size:
            raise DomainError(f"row index {index} outside 0..{self.size - 1}")
        return tuple(int(x) for x in np.unravel_index(index, self.domain_sizes))

    def points(self) -> Iterator[tuple]:
        """All points in canonical row order."""
        return (tuple(int(x) for x in p) for p in np.ndindex(*self.domain_sizes))

    def axis_mask(self, feature: int, values) -> np.ndarray:
        """Boolean array broadcastable to the space shape, true where x_feature in values."""
        d = self.domain_sizes[feature - 1]
        hit = np.zeros(d, dtype=bool)
        hit[list(values)] = True
        shape = [1] * self.m
        shape[feature - 1] = d
        return hit.reshape(shape)


def _check_non_constant(array: np.ndarray, where: str):
    if np.all(array == array.flat[0]):
        raise ModelError(f"{where}: constant function (every point has class {int(array.flat[0])})")


@dataclass(frozen=True)
class TruthTable:
    space: FeatureSpace
    rows: tuple

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != self.space.size:
            raise ModelError(f"rows: expected {self.space.size} entries, got {len(rows)}")
        for r, c in enumerate(rows):
            if not 0 <= c < self.space.class_count:
                raise ModelError(f"rows[{r}]: class {c} outside 0..{self.space.class_count - 1}")
        _check_non_constant(self.array, "rows")

    @cached_property
    def array(self) -> np.ndarray:
        """Read-only ndarray of shape ``domain_sizes`` holding the classes."""
        a = np.asarray(self.rows, dtype=np.int64).reshape(self.space.domain_sizes)
        a.flags.writeable = False
        return a

    def evaluate(self, point: Sequence[int]) -> int:
        return self.rows[self.space.encode(point)]


@dataclass(frozen=True)
class Edge:
    values: tuple
    to: int


@dataclass(frozen=True)
class Node:
    id: int
    feature: Union[int, None] = None
    edges: tuple = ()
    leaf: Union[int, None] = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None


@dataclass(frozen=True)
class Path:
    node_ids: tuple
    literals: tuple  # ((feature, frozenset(values)), ...)

    @property
    def features(self) -> tuple:
        return tuple(sorted({f for f, _ in self.literals}))

    def holds(self, point: Sequence[int]) -> bool:
        return all(point[f - 1] in vals for f, vals in self.literals)


@dataclass(frozen=True)
class DecisionTree:
    space: FeatureSpace
    nodes: dict
    root: int

    def __post_init__(self):
        nodes = dict(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if self.root not in nodes:
            raise ModelError(f"root: node {self.root} not defined")
        parents = {}
        for nid, node in nodes.items():
            where = f"nodes[id={nid}]"
            if node.is_leaf:
                if node.edges:
                    raise ModelError(f"{where}: terminal node cannot have edges")
                if not 0 <= node.leaf < self.space.class_count:
                    raise ModelError(f"{where}.leaf: class {node.leaf} outside 0..{self.space.class_count - 1}")
                continue
            if node.feature is None or not 1 <= node.feature <= self.space.m:
                raise ModelError(f"{where}.test: feature {node.feature} outside 1..{self.space.m}")
            if not node.edges:
                raise ModelError(f"{where}: internal node without edges")
            d = self.space.domain_sizes[node.feature - 1]
            seen = set()
            for k, e in enumerate(node.edges):
                if not e.values:
                    raise ModelError(f"{where}.edges[{k}]: empty value set")
                for x in e.values:
                    if not 0 <= x < d:
                        raise ModelError(f"{where}.edges[{k}]: value {x} outside domain 0..{d - 1}")
                    if x in seen:
                        raise ModelError(f"{where}.edges[{k}]: value {x} labels more than one edge")
                    seen.add(x)
                if e.to not in nodes:
                    raise ModelError(f"{where}.edges[{k}]: target node {e.to} not defined")
                if e.to in parents:
                    raise ModelError(f"{where}.edges[{k}]: node {e.to} already has parent {parents[e.to]}")
                parents[e.to] = nid
            if len(seen) != d:
                missing = sorted(set(range(d)) - seen)
                raise ModelError(f"{where}: edges do not cover values {missing} of feature {node.feature}")
        if self.root in parents:
            raise ModelError(f"root: node {self.root} has a parent (cycle)")
        unreachable = set(nodes) - set(parents) - {self.root}
        if unreachable:
            raise ModelError(f"nodes {sorted(unreachable)} are unreachable from the root")
        _check_non_constant(self._tabulate(), "decision tree")

    def paths(self) -> list:
        """Root-to-terminal paths, depth-first with edges taken in ascending label order."""
        out = []

        def walk(nid, ids, lits):
            node = self.nodes[nid]
            ids = ids + (nid,)
            if node.is_leaf:
                out.append(Path(ids, lits))
                return
            for e in sorted(node.edges, key=lambda e: min(e.values)):
                walk(e.to, ids, lits + ((node.feature, frozenset(e.values)),))

        walk(self.root, (), ())
        return out

    def leaf_class(self, path: Path) -> int:
        return self.nodes[path.node_ids[-1]].leaf

    def consistent_path(self, point: Sequence[int]) -> Path:
        point = self.space.check_point(point)
        nid, ids, lits = self.root, [], []
        while True:
            node = self.nodes[nid]
            ids.append(nid)
            if node.is_leaf:
                return Path(tuple(ids), tuple(lits))
            x = point[node.feature - 1]
            for e in node.edges:
                if x in e.values:
                    lits.append((node.feature, frozenset(e.values)))
                    nid = e.to
                    break
            else:  # pragma: no cover - edges are validated to partition the domain
                raise ModelError(f"node {nid}: no edge for value {x}")

    def evaluate(self, point: Sequence[int]) -> int:
        return self.nodes[self.consistent_path(point).node_ids[-1]].leaf

    def _tabulate(self) -> np.ndarray:
        out = np.full(self.space.domain_sizes, -1, dtype=np.int64)
        for p in self.paths():
            mask = np.ones(self.space.domain_sizes, dtype=bool)
            for f, vals in p.literals:
                mask &= self.space.axis_mask(f, vals)
            out[mask] = self.leaf_class(p)
        return out


@dataclass(frozen=True)
class Rule:
    literals: tuple  # ((feature, value), ...)
    cls: int

    def fires(self, point: Sequence[int]) -> bool:
        return all(point[f - 1] == v for f, v in self.literals)


@dataclass(frozen=True)
class DecisionList:
    space: FeatureSpace
    rules: tuple
    default_class: int

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        for k, rule in enumerate(self.rules):
            if not 0 <= rule.cls < self.space.class_count:
                raise ModelError(f"rules[{k}].then: class {rule.cls} outside 0..{self.space.class_count - 1}")
            for j, (f, v) in enumerate(rule.literals):
                if not 1 <= f <= self.space.m:
                    raise ModelError(f"rules[{k}].if[{j}].feature: {f} outside 1..{self.space.m}")
                d = self.space.domain_sizes[f - 1]
                if not 0 <= v < d:
                    raise ModelError(f"rules[{k}].if[{j}].value: {v} outside domain 0..{d - 1} of feature {f}")
        if not 0 <= self.default_class < self.space.class_count:
            raise ModelError(f"default: class {self.default_class} outside 0..{self.space.class_count - 1}")
        _check_non_constant(self._tabulate(), "decision list")

    def fired_rule(self, point: Sequence[int]) -> Union[int, None]:
        """0-based index of the first rule whose condition holds, None for the default."""
        point = self.space.check_point(point)
        for k, rule in enumerate(self.rules):
            if rule.fires(point):
                return k
        return None

    def evaluate(self, point: Sequence[int]) -> int:
        k = self.fired_rule(point)
        return self.default_class if k is None else self.rules[k].cls

    def _tabulate(self) -> np.ndarray:
        out = np.full(self.space.domain_sizes, self.default_class, dtype=np.int64)
        for rule in reversed(self.rules):
            mask = np.ones(self.space.domain_sizes, dtype=bool)
            for f, v in rule.literals:
                mask &= self.space.axis_mask(f, (v,))
            out[mask] = rule.cls
        return out


Classifier = Union[TruthTable, DecisionTree, DecisionList]


def evaluate(classifier: Classifier, point: Sequence[int]) -> int:
    return classifier.evaluate(classifier.space.check_point(point))


def tabulate(classifier: Classifier) -> TruthTable:
    if isinstance(classifier, TruthTable):
        return classifier
    return TruthTable(classifier.space, tuple(classifier._tabulate().ravel().tolist()))


def consistent_path(dt: DecisionTree, point: Sequence[int]) -> Path:
    return dt.consistent_path(point)


# --- JSON documents -------------------------------------------------------

def _need(doc, key, where, kind=None):
    if key not in doc:
        raise ModelError(f"{where}: missing field '{key}'")
    val = doc[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool)):
        raise ModelError(f"{where}.{key}: expected integer, got {val!r}")
    if kind is list and not isinstance(val, list):
        raise ModelError(f"{where}.{key}: expected list, got {type(val).__name__}")
    return val


def _int_list(vals, where):
    if not isinstance(vals, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in vals):
        raise ModelError(f"{where}: expected list of integers")
    return vals


def load_model(document) -> Classifier:
    """Build a classifier from a parsed JSON document (dict) or a JSON string."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ModelError("model document must be a JSON object")
    kind = _need(document, "model", "$")
    m = _need(document, "features", "$", int)
    domains = _int_list(_need(document, "domains", "$", list), "$.domains")
    if len(domains) != m:
        raise ModelError(f"$.domains: {len(domains)} entries for {m} features")
    space = FeatureSpace(tuple(domains), _need(document, "classes", "$", int))

    if kind == "truth_table":
        rows = _int_list(_need(document, "rows", "$", list), "$.rows")
        return TruthTable(space, tuple(rows))

    if kind == "decision_list":
        rules = []
        for k, r in enumerate(_need(document, "rules", "$", list)):
            where = f"$.rules[{k}]"
            if not isinstance(r, dict):
                raise ModelError(f"{where}: expected object")
            lits = []
            for j, lit in enumerate(_need(r, "if", where, list)):
                lw = f"{where}.if[{j}]"
                if not isinstance(lit, dict):
                    raise ModelError(f"{lw}: expected object")
                lits.append((_need(lit, "feature", lw, int), _need(lit, "value", lw, int)))
            rules.append(Rule(tuple(lits), _need(r, "then", where, int)))
        return DecisionList(space, tuple(rules), _need(document, "default", "$", int))

    if kind == "decision_tree":
        nodes = {}
        for k, n in enumerate(_need(document, "nodes", "$", list)):
            where = f"$.nodes[{k}]"
            if not isinstance(n, dict):
                raise ModelError(f"{where}: expected object")
            nid = _need(n, "id", where, int)
            if nid in nodes:
                raise ModelError(f"{where}.id: duplicate node id {nid}")
            if "leaf" in n:
                nodes[nid] = Node(nid, leaf=_need(n, "leaf", where, int))
                continue
            edges = []
            for j, e in enumerate(_need(n, "edges", where, list)):
                ew = f"{where}.edges[{j}]"
                if not isinstance(e, dict):
                    raise ModelError(f"{ew}: expected object")
                vals = _int_list(_need(e, "values", ew, list), f"{ew}.values")
                edges.append(Edge(tuple(vals), _need(e, "to", ew, int)))
            nodes[nid] = Node(nid, feature=_need(n, "test", where, int), edges=tuple(edges))
        return DecisionTree(space, nodes, _need(document, "root", "$", int))

    raise ModelError(f"$.model: unknown model kind {kind!r}")


def save_model(classifier: Classifier) -> dict:
    space = classifier.space
    doc = {"model": None, "features": space.m, "domains": list(space.domain_sizes),
           "classes": space.class_count}
    if isinstance(classifier, TruthTable):
        doc["model"] = "truth_table"
        doc["rows"] = list(classifier.rows)
    elif isinstance(classifier, DecisionList):
        doc["model"] = "decision_list"
        doc["rules"] = [{"if": [{"feature": f, "value": v} for f, v in r.literals], "then": r.cls}
                        for r in classifier.rules]
        doc["default"] = classifier.default_class
    elif isinstance(classifier, DecisionTree):
        doc["model"] = "decision_tree"
        doc["root"] = classifier.root
        nodes = []
        for nid in sorted(classifier.nodes):
            n = classifier.nodes[nid]
            if n.is_leaf:
                nodes.append({"id": nid, "leaf": n.leaf})
            else:
                nodes.append({"id": nid, "test": n.feature,
                              "edges": [{"values": list(e.values), "to": e.to} for e in n.edges]})
        doc["nodes"] = nodes
    else:
        raise TypeError(f"not a classifier: {type(classifier).__name__}")
    return doc


def read_model(path) -> Classifier:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON: {exc}") from exc
    return load_model(doc)


def write_model(classifier: Classifier, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(save_model(classifier), fh, indent=2)
        fh.write("\n")
