import math

import numpy as np
import pytest

from snnc.optimize import Dim, ObjectiveError, SearchBox, grid_refine


def test_quadratic():
    box = SearchBox([Dim("x", 0.0, 1.0)])
    res = grid_refine(lambda p: -(p["x"] - 0.3) ** 2, box, 11, 30)
    assert abs(res.best_params["x"] - 0.3) < 1e-4
    assert abs(res.best_value) < 1e-8


def test_constant_returns_first_grid_point():
    box = SearchBox([Dim("x", 0.0, 1.0), Dim("y", 2.0, 3.0)])
    res = grid_refine(lambda p: 1.5, box, 5, 10)
    assert res.best_params == {"x": 0.0, "y": 2.0}
    assert res.best_value == 1.5


def nonsmooth(x, y):
    return np.minimum(x, 1 - y) - 0.3 * np.abs(x - 0.6) + 0.1 * y


def test_nonsmooth_against_dense_grid():
    g = np.linspace(0, 1, 1001)
    X, Y = np.meshgrid(g, g, indexing="ij")
    dense = float(nonsmooth(X, Y).max())
    box = SearchBox([Dim("x", 0.0, 1.0), Dim("y", 0.0, 1.0)])
    res = grid_refine(lambda p: float(nonsmooth(p["x"], p["y"])), box)
    assert abs(res.best_value - dense) < 1e-4


def test_log_dimension():
    box = SearchBox([Dim("q", 1e-3, 1e3, "log")])
    res = grid_refine(lambda p: -(math.log10(p["q"]) - 1.234) ** 2, box)
    assert abs(math.log10(res.best_params["q"]) - 1.234) < 1e-4


def test_best_value_reproduces():
    box = SearchBox([Dim("x", -2.0, 2.0), Dim("y", -2.0, 2.0)])

    def f(p):
        return -((p["x"] - 0.4) ** 2) - 2 * (p["y"] + 1.1) ** 2 + 0.1 * p["x"] * p["y"]

    res = grid_refine(f, box, 9, 50)
    assert abs(f(res.best_params) - res.best_value) < 1e-12


def test_refinement_dominates_grid():
    box = SearchBox([Dim("x", 0.0, 1.0)])
    coarse = grid_refine(lambda p: math.sin(7 * p["x"]), box, 6, 0, record_trace=True)
    fine = grid_refine(lambda p: math.sin(7 * p["x"]), box, 6, 20)
    assert fine.best_value >= coarse.best_value
    assert coarse.best_value == max(v for _, v in coarse.trace)


def test_deterministic_trace():
    box = SearchBox([Dim("x", 0.0, 1.0), Dim("y", 1e-2, 1e2, "log")])

    def f(p):
        return min(p["x"], 1 - math.log10(p["y"]) ** 2)

    a = grid_refine(f, box, 7, 20, record_trace=True)
    b = grid_refine(f, box, 7, 20, record_trace=True)
    assert repr(a.trace) == repr(b.trace)
    assert a.evaluations == len(a.trace)


def test_seed_is_scanned_first():
    box = SearchBox([Dim("x", 0.0, 1.0)])
    res = grid_refine(lambda p: 1.0, box, 3, 0, record_trace=True, seeds=[{"x": 0.77}])
    assert res.trace[0][0] == {"x": 0.77}
    assert res.best_params == {"x": 0.77}


def test_objective_failure_carries_point():
    box = SearchBox([Dim("x", 0.0, 1.0)])

    def f(p):
        if p["x"] > 0.5:
            raise ZeroDivisionError
        return p["x"]

    with pytest.raises(ObjectiveError) as info:
        grid_refine(f, box, 3, 0)
    assert info.value.params == {"x": 1.0}
    with pytest.raises(ObjectiveError):
        grid_refine(lambda p: float("nan"), box, 3, 0)


def test_box_validation():
    with pytest.raises(ValueError):
        Dim("x", 1.0, 1.0)
    with pytest.raises(ValueError):
        Dim("q", 0.0, 1.0, "log")
    with pytest.raises(ValueError):
        SearchBox([Dim("x", 0, 1), Dim("x", 0, 2)])
    with pytest.raises(ValueError):
        grid_refine(lambda p: 0.0, SearchBox([Dim("x", 0, 1)]), 1)
