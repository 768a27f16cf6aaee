import numpy as np
import pytest

from sphere_lab.crosscheck import (
    naive_incidences,
    naive_pairwise_multiplicity,
    naive_triple_hypothesis_gamma,
)
from sphere_lab.errors import BadDimension, BadSubspace, DegenerateSum, OutOfRange
from sphere_lab.incidence import (
    AffineSubspace,
    check_lemma_4d,
    check_lemma_5d,
    hyperplane_for_sum,
    incidences,
    pairwise_multiplicity,
    prop23_report,
    subspace_concentration_5d,
    sum_hyperplane_family,
)
from sphere_lab.lattice import enumerate_shell, shell_point_set

GAMMA_OBS = {1: 1, 2: 4, 3: 4, 4: 4, 5: 4, 8: 4, 10: 8, 25: 8}
FAMILY_SIZES = {1: 32, 2: 168, 3: 280, 4: 168, 5: 696, 8: 168, 10: 3480, 25: 13856}


def test_frozen_family_sizes_and_gamma():
    for lam, want in FAMILY_SIZES.items():
        pset = shell_point_set(enumerate_shell(4, lam))
        fam = sum_hyperplane_family(pset)
        assert fam.num_hyperplanes == want, lam
        g, witness = pairwise_multiplicity(pset, fam)
        assert g == GAMMA_OBS[lam], lam
        if g > 0:
            assert witness is not None


def test_zero_mass():
    fam = sum_hyperplane_family(shell_point_set(enumerate_shell(4, 1)))
    assert fam.zero_mass == 8


def test_full_shell_incidence_identity():
    for lam in (1, 2, 5, 25):
        pset = shell_point_set(enumerate_shell(4, lam))
        fam = sum_hyperplane_family(pset)
        assert incidences(pset, fam) == pset.size**2 - pset.size


def test_frozen_lambda25_incidences():
    pset = shell_point_set(enumerate_shell(4, 25))
    fam = sum_hyperplane_family(pset)
    assert incidences(pset, fam) == 61256


def test_incidences_match_naive():
    for n, lam in ((4, 5), (5, 3)):
        pset = shell_point_set(enumerate_shell(n, lam))
        fam = sum_hyperplane_family(pset)
        entries = fam.entries()
        planes = [(h.normal, h.offset) for h, _ in entries]
        assert incidences(pset, fam) == naive_incidences(pset.points, planes)


def test_pairwise_multiplicity_matches_naive():
    for lam in (1, 2, 4):
        pset = shell_point_set(enumerate_shell(4, lam))
        fam = sum_hyperplane_family(pset)
        planes = [(h.normal, h.offset) for h, _ in fam.entries()]
        g, _ = pairwise_multiplicity(pset, fam)
        assert g == naive_pairwise_multiplicity(pset.points, planes)


def test_hyperplane_boundaries():
    # tangent sum (|v|^2 = 4 lambda) is allowed
    h = hyperplane_for_sum((2, 0, 0, 0), 1)
    pts = shell_point_set(enumerate_shell(4, 1))
    assert incidences(pts, [h]) == 1  # only (1,0,0,0) lies on it
    with pytest.raises(DegenerateSum):
        hyperplane_for_sum((0, 0, 0, 0), 1)
    with pytest.raises(OutOfRange):
        hyperplane_for_sum((3, 0, 0, 0), 1)  # |v|^2 > 4 lambda


def test_lemma_checks_sample():
    for lam in (1, 2, 3, 4, 5, 10, 25, 90):
        pset = shell_point_set(enumerate_shell(4, lam))
        fam = sum_hyperplane_family(pset)
        rep = check_lemma_4d(pset, fam)
        assert rep.satisfied and rep.check == "lemma21"
        assert rep.gamma_used == max(5, rep.gamma_obs)
    for lam in (1, 2, 4, 10):
        pset = shell_point_set(enumerate_shell(5, lam))
        fam = sum_hyperplane_family(pset)
        rep = check_lemma_5d(pset, fam)
        assert rep.satisfied and rep.check == "lemma22"


def test_triple_hypothesis_gamma_matches_naive():
    for lam in (4, 6, 8, 9, 12):
        pset = shell_point_set(enumerate_shell(5, lam))
        fam = sum_hyperplane_family(pset)
        rep = check_lemma_5d(pset, fam)
        gs, go = naive_triple_hypothesis_gamma(pset.points, fam.hist)
        assert rep.gamma_used == gs, lam
        assert rep.gamma_obs == go, lam


def test_lemma_wrong_dimension():
    pset4 = shell_point_set(enumerate_shell(4, 1))
    pset5 = shell_point_set(enumerate_shell(5, 1))
    fam4 = sum_hyperplane_family(pset4)
    fam5 = sum_hyperplane_family(pset5)
    with pytest.raises(BadDimension):
        check_lemma_4d(pset5, fam5)
    with pytest.raises(BadDimension):
        check_lemma_5d(pset4, fam4)


def test_prop23_report_only():
    pset = shell_point_set(enumerate_shell(4, 25))
    fam = sum_hyperplane_family(pset)
    rep = prop23_report(pset, fam)
    assert rep.check == "prop23"
    assert rep.satisfied  # report-only: never asserted false
    assert rep.implied_constant is not None and rep.implied_constant > 0
    d = rep.to_json_dict()
    assert set(d) == {
        "n", "lambda", "num_points", "num_hyperplanes", "incidences",
        "gamma_obs", "gamma_used", "bound", "satisfied", "implied_constant",
        "check",
    }


def test_subspace_example():
    shell = enumerate_shell(5, 4)
    sub = AffineSubspace(
        base=(2, 0, 0, 0, 0),
        directions=((-2, 2, 0, 0, 0), (-2, 0, 2, 0, 0), (-2, 0, 0, 2, 0)),
    )
    assert subspace_concentration_5d(shell, sub) == [(1, 1, 1, 1, 0)]


def test_subspace_validation():
    shell = enumerate_shell(5, 4)
    with pytest.raises(BadSubspace):
        subspace_concentration_5d(
            shell,
            AffineSubspace(base=(1, 0, 0, 0, 0), directions=((1, 0, 0, 0, 0),) * 3),
        )
    with pytest.raises(BadSubspace):
        subspace_concentration_5d(
            shell,
            AffineSubspace(
                base=(2, 0, 0, 0, 0),
                directions=((1, 0, 0, 0, 0), (0, 1, 0, 0, 0)),
            ),
        )
