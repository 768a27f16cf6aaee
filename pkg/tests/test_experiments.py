import json
import math
import os

import numpy as np
import pytest

from sphere_lab.errors import (
    BadDimension,
    BadSpec,
    NonPositive,
    TooFewPoints,
    UsageError,
)
from sphere_lab.experiments import (
    CoefficientMap,
    ExperimentConfig,
    atomic_write_text,
    even_moment,
    experiment_report,
    fit_exponent,
    grid_level_sets,
    grid_moment_extended,
    run_experiment,
)
from sphere_lab.lattice import enumerate_shell, shell_point_set


def test_fit_exact_power_laws():
    rng = np.random.default_rng(23)
    for _ in range(10):
        slope = float(rng.uniform(-3, 5))
        coeff = float(rng.uniform(0.1, 10))
        xs = np.linspace(1.5, 40, 12)
        rows = [(x, coeff * x**slope) for x in xs]
        fit = fit_exponent(rows)
        assert abs(fit.slope - slope) <= 1e-9 * max(1, abs(slope))
        assert abs(fit.intercept - math.log(coeff)) <= 1e-8
        assert fit.residual <= 1e-9


def test_fit_errors():
    with pytest.raises(TooFewPoints):
        fit_exponent([(1, 1), (2, 4), (3, 9)])
    with pytest.raises(NonPositive):
        fit_exponent([(1, 1), (2, 4), (3, 9), (4, -16)])
    with pytest.raises(NonPositive):
        fit_exponent([(0, 1), (2, 4), (3, 9), (4, 16)])


def test_fit_result_shape():
    fit = fit_exponent([(1, 2), (2, 8), (4, 32), (8, 128)])
    d = fit.to_json_dict()
    assert set(d) == {"slope", "intercept", "residual", "rows"}
    assert len(d["rows"]) == 4


def test_coefficient_map_norms_and_support():
    pset = shell_point_set(enumerate_shell(4, 1))
    unit = CoefficientMap.all_ones(pset)
    assert unit.unit
    assert abs(unit.l2_norm() - math.sqrt(8)) < 1e-12
    assert abs(unit.l1_norm() - 8) < 1e-12
    norm = CoefficientMap.normalized_ones(pset)
    assert abs(norm.l2_norm() - 1.0) < 1e-12
    picked = CoefficientMap.from_mapping(pset, {(1, 0, 0, 0): 2.0, (0, 1, 0, 0): 1j})
    assert picked.points.shape == (2, 4)
    with pytest.raises(BadSpec):
        CoefficientMap.from_mapping(pset, {(2, 0, 0, 0): 1.0})  # not on the shell


def test_even_moment_exact_paths():
    pset1 = shell_point_set(enumerate_shell(4, 1))
    assert even_moment(pset1, None, 4) == 168
    pts = np.array([[1, 0, 0, 0]], dtype=np.int64)
    from sphere_lab.lattice import PointSet

    single = PointSet(n=4, points=pts)
    assert even_moment(single, None, 6) == 1
    pair = PointSet(n=4, points=np.array([[1, 0, 0, 0], [-1, 0, 0, 0]], dtype=np.int64))
    assert even_moment(pair, None, 6) == 20
    with pytest.raises(BadSpec):
        even_moment(pset1, None, 8)


def test_grid_moment_matches_exact_when_aliasing_free():
    # bandwidth of |F|^4 at lambda=1 is 4 < M, so the rectangle rule is exact
    pset = shell_point_set(enumerate_shell(4, 1))
    coeffs = CoefficientMap.normalized_ones(pset)
    est = even_moment(pset, coeffs, 4, grid_per_axis=16)
    exact = 168 / 64  # E / |P|^2
    assert abs(est - exact) < 1e-10
    ext = grid_moment_extended(pset, coeffs, 4, 16)
    assert abs(float(ext) - exact) < 1e-10


def test_level_sets_shape_and_extremes():
    pset = shell_point_set(enumerate_shell(4, 1))
    report = grid_level_sets(pset)
    assert report.M == 16  # 8 N with N = 2
    assert report.n == 4 and report.lam == 1
    l1 = report.l1_norm
    # alpha above the l1 norm has empty superlevel set
    high = [r for r in report.rows if r.alpha > l1]
    assert all(r.fraction == 0 for r in high)
    low = [r for r in report.rows if r.alpha < l1 * 0.99]
    assert low and low[0].fraction > 0
    for row in report.rows:
        assert row.rhs == pytest.approx(4.0 * row.alpha**-6.0)
    d = report.to_json_dict()
    assert set(d) == {
        "n", "lambda", "grid_per_axis", "l1_norm", "l2_norm", "threshold", "rows",
    }


def test_level_sets_validation():
    pset5 = shell_point_set(enumerate_shell(5, 1))
    with pytest.raises(BadDimension):
        grid_level_sets(pset5)
    pset = shell_point_set(enumerate_shell(4, 1))
    bad = CoefficientMap.all_ones(pset)  # l2 norm sqrt(8) != 1
    with pytest.raises(BadSpec):
        grid_level_sets(pset, coeffs=bad)


def test_experiment_config_validation():
    with pytest.raises(UsageError):
        ExperimentConfig(kind="nope")
    with pytest.raises(UsageError):
        ExperimentConfig(kind="energy-sweep", lam_lo=5, lam_hi=1)
    with pytest.raises(UsageError):
        ExperimentConfig(kind="energy-sweep", parity="weird")
    cfg = ExperimentConfig(kind="energy-sweep", lam_lo=1, lam_hi=10, parity="odd")
    assert cfg.lam_values() == [1, 3, 5, 7, 9]


def test_run_experiment_atomic_and_reproducible(tmp_path):
    cfg = ExperimentConfig(
        kind="energy-sweep", dim=4, lam_lo=1, lam_hi=9, parity="odd",
        out_dir=str(tmp_path), fmt="csv",
    )
    path = run_experiment(cfg)
    assert os.path.exists(path)
    with open(path) as fh:
        first = fh.read()
    assert first.startswith("# config: ")
    header = first.splitlines()[1]
    assert header == "n,lambda,N,set_size,energy,ratio_vs_target"
    # same config, same bytes
    path2 = run_experiment(cfg)
    with open(path2) as fh:
        second = fh.read()
    assert first == second
    assert not [p for p in os.listdir(tmp_path) if p.endswith(".tmp")]


def test_run_experiment_json_echoes_config(tmp_path):
    cfg = ExperimentConfig(
        kind="gcd-sweep", lam_lo=1, lam_hi=5, out_dir=str(tmp_path), fmt="json"
    )
    path = run_experiment(cfg)
    with open(path) as fh:
        payload = json.load(fh)
    assert payload["config"]["kind"] == "gcd-sweep"
    assert payload["rows"][0] == {"lambda": 1, "gcd_sum": 9}


def test_count_sweep_columns():
    cfg4 = ExperimentConfig(kind="count-sweep", dim=4, lam_lo=1, lam_hi=3)
    text = experiment_report(cfg4)
    lines = text.splitlines()
    assert lines[1] == "lambda,total,singular_total,rank2,rank3,rank4"
    assert lines[2] == "1,168,168,,,"
    cfg5 = ExperimentConfig(kind="count-sweep", dim=5, lam_lo=1, lam_hi=2)
    lines5 = experiment_report(cfg5).splitlines()
    assert lines5[2] == "1,330,330,330,0,0"
    assert lines5[3] == "2,93480,49320,6120,43200,44160"


def test_atomic_write_failure(tmp_path):
    target = tmp_path / "out" / "file.csv"
    atomic_write_text(str(target), "hello\n")
    with open(target) as fh:
        assert fh.read() == "hello\n"
