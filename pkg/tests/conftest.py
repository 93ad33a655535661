import numpy as np
import pytest

from fxp import FeatureSpace, TruthTable, fixture_path, read_model


@pytest.fixture(scope="session")
def dt_fig1():
    return read_model(fixture_path("dt_fig1.json"))


@pytest.fixture(scope="session")
def dl_fig2():
    return read_model(fixture_path("dl_fig2.json"))


@pytest.fixture(scope="session")
def k4():
    return read_model(fixture_path("tt_k4.json"))


@pytest.fixture(scope="session")
def k5():
    return read_model(fixture_path("tt_k5.json"))


def random_table(rng, m, dummy=None):
    """Random non-constant boolean table; ``dummy`` makes that feature irrelevant to κ."""
    space = FeatureSpace.boolean(m)
    while True:
        arr = rng.integers(0, 2, size=(2,) * m)
        if dummy is not None:
            idx = [slice(None)] * m
            idx[dummy - 1] = slice(0, 1)
            arr = np.broadcast_to(arr[tuple(idx)], arr.shape).copy()
        if arr.min() != arr.max():
            return TruthTable(space, tuple(arr.ravel().tolist()))


def random_population(seed, count, ms, dummy_every=3):
    """[(table, instance point, dummy feature or None)], reproducible for a seed."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        m = int(rng.choice(ms))
        dummy = int(rng.integers(1, m + 1)) if m > 1 and k % dummy_every == 0 else None
        tt = random_table(rng, m, dummy)
        v = tuple(int(x) for x in rng.integers(0, 2, size=m))
        out.append((tt, v, dummy))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
