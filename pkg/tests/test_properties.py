from fractions import Fraction
from itertools import combinations

from hypothesis import given, settings
from hypothesis import strategies as st

from fxp import (ExplanationProblem, check_duality, enumerate_explanations, find_axp, find_cxp,
                 is_axp, is_cxp, is_weak_axp, is_weak_cxp, minimal_hitting_sets, phi,
                 shapley_values)
from fxp.model import FeatureSpace, TruthTable

SETTINGS = settings(max_examples=60, deadline=None)


@st.composite
def problems(draw, max_m=4, domains=(2,)):
    m = draw(st.integers(1, max_m))
    sizes = tuple(draw(st.sampled_from(domains)) for _ in range(m))
    space = FeatureSpace(sizes)
    rows = draw(st.lists(st.integers(0, 1), min_size=space.size, max_size=space.size)
                .filter(lambda r: 0 in r and 1 in r))
    tt = TruthTable(space, tuple(rows))
    v = tuple(draw(st.integers(0, d - 1)) for d in sizes)
    return ExplanationProblem.at(tt, v)


def all_subsets(m):
    return [set(s) for r in range(m + 1) for s in combinations(range(1, m + 1), r)]


@SETTINGS
@given(problems())
def test_weak_predicates_are_monotone(p):
    subs = all_subsets(p.m)
    for s in subs:
        for extra in range(1, p.m + 1):
            t = s | {extra}
            if is_weak_axp(p, s):
                assert is_weak_axp(p, t)
            if is_weak_cxp(p, s):
                assert is_weak_cxp(p, t)


@SETTINGS
@given(problems(max_m=5))
def test_boundary_cases(p):
    full = set(p.space.features)
    assert not is_weak_axp(p, set())
    assert is_weak_axp(p, full)
    assert is_weak_cxp(p, full)
    assert not is_weak_cxp(p, set())


@SETTINGS
@given(problems(max_m=5, domains=(2, 3)), st.data())
def test_find_outputs_self_verify(p, data):
    seed = set(data.draw(st.sets(st.integers(1, p.m))))
    axp = find_axp(p)
    cxp = find_cxp(p)
    assert is_axp(p, axp) and is_cxp(p, cxp)
    if is_weak_axp(p, seed):
        got = find_axp(p, seed)
        assert set(got) <= seed and is_axp(p, got)
    if is_weak_cxp(p, seed):
        got = find_cxp(p, seed)
        assert set(got) <= seed and is_cxp(p, got)


@SETTINGS
@given(problems(max_m=5, domains=(2, 3)))
def test_duality_and_relevance(p):
    sets = enumerate_explanations(p)
    assert check_duality(sets)
    assert set(minimal_hitting_sets(sets.cxps)) == set(sets.axps)
    assert sets.axp_features == sets.cxp_features
    # every AXp meets every CXp
    assert all(set(a) & set(c) for a in sets.axps for c in sets.cxps)


@SETTINGS
@given(problems(max_m=4, domains=(2, 3)))
def test_shapley_efficiency(p):
    sv = shapley_values(p)
    assert all(isinstance(x, Fraction) for x in sv)
    assert sum(sv) == p.c - phi(p, ())


@SETTINGS
@given(problems(max_m=4), st.data())
def test_shapley_symmetry(p, data):
    # swapping two features' axes that carry equal instance values permutes their scores
    i, j = sorted(data.draw(st.lists(st.integers(1, p.m), min_size=2, max_size=2, unique=True))
                  if p.m >= 2 else [1, 1])
    if i == j or p.v[i - 1] != p.v[j - 1]:
        return
    arr = p.classifier.array
    sym = (arr | arr.swapaxes(i - 1, j - 1))
    if sym.min() == sym.max():
        return
    tt = TruthTable(p.space, tuple(int(x) for x in sym.ravel()))
    q = ExplanationProblem.at(tt, p.v)
    sv = shapley_values(q)
    assert sv[i - 1] == sv[j - 1]


@SETTINGS
@given(problems(max_m=4))
def test_determinism(p):
    assert enumerate_explanations(p) == enumerate_explanations(p)
    assert shapley_values(p) == shapley_values(p)
    assert find_axp(p) == find_axp(p)
