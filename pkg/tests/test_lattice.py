import os

import numpy as np
import pytest

from sphere_lab.crosscheck import brute_shell, divisor_sum_r4, brute_paraboloid
from sphere_lab.errors import (
    BadDimension,
    BadSpec,
    BudgetExceeded,
    CacheMiss,
    FormatCorrupt,
)
from sphere_lab.lattice import (
    Shell,
    enumerate_paraboloid,
    enumerate_shell,
    load_or_enumerate,
    load_shell,
    save_shell,
    scale_parameter,
    shell_point_set,
    shell_size,
)

FROZEN_SIZES = {
    (4, 1): 8,
    (2, 25): 12,
    (3, 2): 12,
    (4, 2): 24,
    (5, 0): 1,
    (5, 1): 10,
    (5, 4): 90,
    (4, 25): 248,
    (4, 5): 48,
}


def test_frozen_shell_sizes():
    for (n, lam), want in FROZEN_SIZES.items():
        assert enumerate_shell(n, lam).size == want
        assert shell_size(n, lam) == want


def test_scale_parameter():
    assert scale_parameter(0) == 1
    assert scale_parameter(1) == 2
    assert scale_parameter(3) == 2
    assert scale_parameter(4) == 3
    assert scale_parameter(25) == 6


def test_shells_match_brute_small():
    for n in (2, 3, 4, 5):
        for lam in range(0, 26):
            got = enumerate_shell(n, lam).as_tuples()
            assert got == brute_shell(n, lam), (n, lam)


def test_divisor_formula_odd():
    for lam in range(1, 200, 2):
        assert shell_size(4, lam) == divisor_sum_r4(lam)


def test_rows_sorted_and_unique():
    shell = enumerate_shell(4, 50)
    pts = shell.points
    assert np.all(np.sum(pts * pts, axis=1) == 50)
    as_tuples = shell.as_tuples()
    assert as_tuples == sorted(as_tuples)
    assert len(set(as_tuples)) == len(as_tuples)


def test_signed_permutation_closure():
    # property: applying any signed permutation maps the shell onto itself
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        lam = int(rng.integers(1, 40))
        pts = {tuple(int(v) for v in r) for r in enumerate_shell(n, lam).points}
        perm = rng.permutation(n)
        signs = rng.choice((-1, 1), size=n)
        mapped = {
            tuple(int(signs[i]) * p[int(perm[i])] for i in range(n)) for p in pts
        }
        assert mapped == pts


def test_bad_args():
    with pytest.raises(BadDimension):
        enumerate_shell(0, 4)
    with pytest.raises(BadDimension):
        enumerate_shell(9, 4)
    with pytest.raises(BadSpec):
        enumerate_shell(4, -1)
    with pytest.raises(BudgetExceeded):
        enumerate_shell(4, 10**6, budget_points=10)


def test_lambda_zero_conventions():
    shell = enumerate_shell(4, 0)
    assert shell.size == 1 and shell.as_tuples() == [(0, 0, 0, 0)]
    assert shell.N == 1


def test_paraboloid_box_and_symmetry():
    for N in (1, 2, 3):
        pset = enumerate_paraboloid(N)
        assert pset.size == (2 * N + 1) ** 3
        got = [tuple(int(v) for v in r) for r in pset.points]
        assert got == brute_paraboloid(N)
    assert enumerate_paraboloid(2).origin_tag == "paraboloid"


def test_cache_round_trip(tmp_path):
    shell = enumerate_shell(4, 25)
    path = save_shell(shell)
    assert os.path.exists(path)
    loaded = load_shell(4, 25)
    assert loaded.as_tuples() == shell.as_tuples()


def test_cache_miss():
    with pytest.raises(CacheMiss):
        load_shell(4, 77)


def test_cache_corrupt_header(tmp_path):
    path = save_shell(enumerate_shell(4, 1))
    with open(path) as fh:
        lines = fh.read().splitlines()
    with open(path, "w") as fh:
        fh.write("\n".join(lines[1:]) + "\n")  # drop header
    with pytest.raises(FormatCorrupt):
        load_shell(4, 1)


def test_cache_corrupt_norm(tmp_path):
    path = save_shell(enumerate_shell(4, 1))
    with open(path) as fh:
        lines = fh.read().splitlines()
    lines[1] = "2,0,0,0"  # wrong norm
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with pytest.raises(FormatCorrupt):
        load_shell(4, 1)


def test_cache_count_mismatch(tmp_path):
    path = save_shell(enumerate_shell(4, 1))
    with open(path) as fh:
        lines = fh.read().splitlines()
    with open(path, "w") as fh:
        fh.write("\n".join(lines[:-1]) + "\n")  # drop a data row
    with pytest.raises(FormatCorrupt):
        load_shell(4, 1)


def test_load_or_enumerate_populates(tmp_path):
    shell = load_or_enumerate(4, 9)
    again = load_shell(4, 9)
    assert again.as_tuples() == shell.as_tuples()


def test_point_set_wrapper():
    pset = shell_point_set(enumerate_shell(4, 2))
    assert pset.n == 4 and pset.lam == 2 and pset.size == 24
    assert pset.origin_tag == "shell-subset"
