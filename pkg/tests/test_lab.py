from itertools import permutations, product

import numpy as np
import pytest

from fxp import ExplanationProblem, enumerate_explanations, fixture_path, read_model, save_model
from fxp.lab import (KAPPA_I4_SPEC, KAPPA_I5_SPEC, TABLE_I, FixtureSpec, LabError,
                     ReconstructionError, code_rows, codes_to_tables, enumerate_functions,
                     find_fixture, fixture_satisfies, function_codes, issue_census, kernel,
                     reconstruct_dt_fig1, table_code)
from fxp.model import TruthTable
from fxp.shapley import detect_issues, shapley_values

KAPPA_I5_CODES = [276, 340, 1300, 4372, 5460, 16660, 16724, 17684, 20756, 21844, 33044, 38228, 49428]


@pytest.mark.parametrize("m, n", [(1, 2), (2, 14), (3, 254)])
def test_enumerate_functions_counts(m, n):
    tables = list(enumerate_functions(m))
    assert len(tables) == n
    assert len({t.rows for t in tables}) == n


def test_function_codes_m4():
    codes = function_codes(4)
    assert len(codes) == 65534 and codes[0] == 1 and codes[-1] == 65534


def test_enumeration_guard():
    with pytest.raises(LabError):
        function_codes(5)


def test_table_code_round_trip(k4, k5):
    assert table_code(k4) == 303
    assert table_code(k5) == 276
    assert code_rows(303, 4) == k4.rows
    assert "".join(map(str, code_rows(303, 4))) == "0000000100101111"
    assert codes_to_tables(np.array([303]), 4)[0].ravel().tolist() == list(k4.rows)


def test_find_fixture_kappa_i4(k4):
    found = find_fixture(KAPPA_I4_SPEC)
    assert [table_code(t) for t in found] == [303]
    assert save_model(found[0]) == save_model(k4)


def test_find_fixture_kappa_i5(k5):
    found = find_fixture(KAPPA_I5_SPEC)
    assert [table_code(t) for t in found] == KAPPA_I5_CODES
    assert save_model(found[0]) == save_model(k5)
    for tt in found:
        assert fixture_satisfies(KAPPA_I5_SPEC, tt)


def test_unsatisfiable_spec_is_empty():
    spec = FixtureSpec(features=3, instance=(0, 0, 0), predicted_class=0, axps=((),))
    assert find_fixture(spec) == []


def test_spec_validation_and_round_trip():
    assert FixtureSpec.from_dict(KAPPA_I4_SPEC.to_dict()) == KAPPA_I4_SPEC
    assert FixtureSpec.from_dict(KAPPA_I5_SPEC.to_dict()) == KAPPA_I5_SPEC
    with pytest.raises(LabError, match="nested"):
        FixtureSpec(features=3, instance=(0, 0, 0), predicted_class=0, axps=((1,), (1, 2)))
    with pytest.raises(LabError, match="outside"):
        FixtureSpec(features=3, instance=(0, 0, 0), predicted_class=0, cxps=((4,),))
    with pytest.raises(LabError, match="unknown"):
        FixtureSpec(features=3, instance=(0, 0, 0), predicted_class=0, issues=("I9",))
    with pytest.raises(LabError, match="missing field"):
        FixtureSpec.from_dict({"features": 2})


def test_fixture_satisfies_rejects(k4):
    assert fixture_satisfies(KAPPA_I4_SPEC, k4)
    assert not fixture_satisfies(KAPPA_I5_SPEC, k4)


def test_reconstruct_matches_shipped(dt_fig1):
    dt = reconstruct_dt_fig1()
    assert save_model(dt) == save_model(dt_fig1)
    assert all(dt.evaluate(x) == 1 for x in TABLE_I)


def test_reconstruct_strict_reports_conflict():
    with pytest.raises(ReconstructionError, match="no decision tree satisfies") as err:
        reconstruct_dt_fig1(strict=True)
    assert "Nearest" in str(err.value)


def test_shipped_fixtures_load():
    for name in ("dt_fig1.json", "dl_fig2.json", "tt_k4.json", "tt_k5.json"):
        read_model(fixture_path(name))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_kernel_matches_engines(m):
    tables = list(enumerate_functions(m))
    arr = codes_to_tables(function_codes(m), m)
    for v in product((0, 1), repeat=m):
        res = kernel(arr, m, v)
        flags = res.issues()
        for k, tt in enumerate(tables):
            problem = ExplanationProblem.at(tt, v)
            assert res.cls[k] == problem.c
            sets = enumerate_explanations(problem)
            assert res.sets(k) == (sets.axps, sets.cxps)
            sv = shapley_values(problem)
            assert res.shapley(k) == sv
            rep = detect_issues(problem, sets, sv)
            assert {n: bool(f[k]) for n, f in flags.items()} == rep.flags


def test_kernel_sample_m4(k4):
    arr = codes_to_tables(np.array([303, 276]), 4)
    res = kernel(arr, 4, (0, 0, 1, 1))
    problem = ExplanationProblem.at(k4, (0, 0, 1, 1))
    assert res.shapley(0) == shapley_values(problem)
    sets = enumerate_explanations(problem)
    assert res.sets(0) == (sets.axps, sets.cxps)


def test_census_small():
    r1 = issue_census(1)
    assert (r1.functions, r1.total) == (2, 4)
    assert r1.counts["I2"] == 0
    r2 = issue_census(2)
    assert (r2.functions, r2.total) == (14, 56)
    r3 = issue_census(3)
    assert r3.counts == {"I1": 1056, "I2": 0, "I3": 144, "I4": 0, "I5": 0}


@pytest.mark.parametrize("m", [2, 3])
def test_census_kernel_equals_engine(m):
    assert issue_census(m) == issue_census(m, method="engine")


def test_census_invariant_under_feature_permutation():
    # relabelling features permutes tables among themselves, so per-issue counts over
    # every (function, instance) pair cannot change; check pair-by-pair on m=3
    m = 3
    for perm in permutations(range(m)):
        for tt in list(enumerate_functions(m))[::17]:
            arr = np.asarray(tt.rows).reshape((2,) * m).transpose(perm)
            moved = TruthTable(tt.space, tuple(arr.ravel().tolist()))
            for v in product((0, 1), repeat=m):
                w = tuple(v[p] for p in perm)
                a = detect_issues(ExplanationProblem.at(tt, v)).flags
                b = detect_issues(ExplanationProblem.at(moved, w)).flags
                assert a == b


def test_census_m4_has_i4_and_i5():
    r = issue_census(4, issues=("I4", "I5"))
    assert r.total == 65534 * 16
    assert r.counts == {"I4": 9600, "I5": 1664}


def test_census_rejects_unknown():
    with pytest.raises(LabError):
        issue_census(2, issues=("I7",))
    with pytest.raises(LabError):
        issue_census(2, method="magic")


def test_spec_rejects_non_boolean_instance():
    with pytest.raises(LabError, match="boolean point"):
        FixtureSpec(features=2, instance=(2, 0), predicted_class=0)
