import numpy as np
import pytest

from sphere_lab.crosscheck import naive_energy, naive_l_fold
from sphere_lab.energy import (
    additive_energy,
    l_fold_energy,
    rep_histogram,
    shell_energy,
    subset_energy_experiment,
)
from sphere_lab.errors import BadDimension, BadSpec
from sphere_lab.lattice import PointSet, enumerate_paraboloid, enumerate_shell, shell_point_set

FROZEN_4D = {1: 168, 2: 3384, 3: 6048, 25: 505176}
FROZEN_5D = {1: 270, 2: 11880, 4: 69150}
FROZEN_PARABOLOID = {1: 3735, 2: 128901, 3: 1328443}


def _pset(points, n):
    return PointSet(n=n, points=np.array(points, dtype=np.int64).reshape(len(points), n))


def test_frozen_shell_energies_4d():
    for lam, want in FROZEN_4D.items():
        assert shell_energy(enumerate_shell(4, lam)).energy == want


def test_frozen_shell_energies_5d():
    for lam, want in FROZEN_5D.items():
        assert shell_energy(enumerate_shell(5, lam)).energy == want


def test_frozen_paraboloid_energies():
    for N, want in FROZEN_PARABOLOID.items():
        assert additive_energy(enumerate_paraboloid(N)).energy == want


def test_tiny_sets():
    two = _pset([(1, 0, 0, 0), (-1, 0, 0, 0)], 4)
    assert additive_energy(two).energy == 6
    assert l_fold_energy(two, 3) == 20
    one = _pset([(1, 0, 0, 0)], 4)
    assert additive_energy(one).energy == 1
    assert l_fold_energy(one, 3) == 1


def test_l_fold_two_is_additive_energy():
    pset = shell_point_set(enumerate_shell(4, 5))
    assert l_fold_energy(pset, 2) == additive_energy(pset).energy
    with pytest.raises(BadSpec):
        l_fold_energy(pset, 1)


def test_energy_matches_naive_on_shells():
    for n, lam in ((2, 25), (3, 9), (4, 10), (5, 6)):
        shell = enumerate_shell(n, lam)
        want = naive_energy(shell.as_tuples())
        assert shell_energy(shell).energy == want, (n, lam)


def test_energy_matches_naive_on_random_subsets():
    rng = np.random.default_rng(3)
    for _ in range(12):
        n = int(rng.integers(2, 6))
        lam = int(rng.integers(2, 30))
        shell = enumerate_shell(n, lam)
        if shell.size < 3:
            continue
        k = int(rng.integers(2, min(shell.size, 20) + 1))
        idx = rng.choice(shell.size, size=k, replace=False)
        pts = shell.points[np.sort(idx)]
        pset = PointSet(n=n, points=pts)
        assert additive_energy(pset).energy == naive_energy([tuple(p) for p in pts])


def test_l_fold_matches_naive_small():
    pts = [(1, 0, 0, 0), (0, 1, 0, 0), (-1, 0, 0, 0)]
    pset = _pset(pts, 4)
    for l in (2, 3):
        assert l_fold_energy(pset, l) == naive_l_fold(pts, l)


def test_energy_bounds_invariant():
    for n, lam in ((4, 7), (5, 3)):
        res = shell_energy(enumerate_shell(n, lam))
        assert res.set_size**2 <= res.energy <= res.set_size**3


def test_histogram_mass_identity():
    # sum of r(v) over all sums v equals |P|^2
    pset = shell_point_set(enumerate_shell(4, 10))
    hist = rep_histogram(pset)
    total = sum(hist.entries().values())
    assert total == pset.size**2


def test_subset_experiment_deterministic():
    shell = enumerate_shell(4, 25)
    a = subset_energy_experiment(shell, [10, 20], trials=4, seed=9)
    b = subset_energy_experiment(shell, [10, 20], trials=4, seed=9)
    assert a == b
    c = subset_energy_experiment(shell, [10, 20], trials=4, seed=10)
    assert [r.set_size for r in c] == [10, 20]


def test_subset_experiment_validation():
    shell = enumerate_shell(4, 1)
    with pytest.raises(BadSpec):
        subset_energy_experiment(shell, [100], trials=2, seed=0)
    with pytest.raises(BadSpec):
        subset_energy_experiment(shell, [2], trials=0, seed=0)
    with pytest.raises(BadDimension):
        subset_energy_experiment(enumerate_shell(3, 1), [2], trials=1, seed=0)
