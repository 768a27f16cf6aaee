from fractions import Fraction

import pytest

from sphere_lab.crosscheck import naive_quadruple_total
from sphere_lab.errors import BadDimension, BadSpec
from sphere_lab.gram import (
    GramTarget,
    count_gram_solutions,
    count_quadruples_5d,
    degenerate_breakdown_5d,
    lambda_ab_target,
    singular_case_sum_4d,
    sum_N_ab,
)
from sphere_lab.lattice import enumerate_shell

SUM_N_AB = [1, 168, 3384, 6048, 3384, 12528, 102240]
SINGULAR_4D = [1, 168, 1656, 2976, 1656, 6768, 27360]
BREAKDOWNS = {
    1: {"rank2": 330, "rank3": 0, "rank4": 0},
    2: {"rank2": 6120, "rank3": 43200, "rank4": 44160},
    4: {"rank2": 31770, "rank3": 278400, "rank4": 497280},
}


def test_lambda_ab_shape_and_det():
    t = lambda_ab_target(5, 3, 1)
    assert t.m == 4 and t.n == 3
    assert t.det_plain() == -128
    # det Lambda_{a,b} = 2 (lam-b)(lam+a)(b-a)
    for lam, a, b in ((5, 1, 2), (5, 0, 1), (7, -2, 3)):
        t = lambda_ab_target(lam, a, b)
        assert t.det_plain() == 2 * (lam - b) * (lam + a) * (b - a)


def test_frozen_counts():
    assert count_gram_solutions(lambda_ab_target(5, 1, 2)).count == 384
    # orthonormal triples in Z^4: 4*3*2 axis choices * 2^3 signs
    eye = GramTarget.from_plain(4, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert count_gram_solutions(eye).count == 192
    ones = GramTarget.from_plain(4, [[1, 1, 1], [1, 1, 1], [1, 1, 1]])
    assert count_gram_solutions(ones).count == 8


def test_odd_doubled_diagonal_is_empty():
    t = GramTarget.from_doubled(4, [[3]])
    assert t.has_odd_diagonal()
    assert count_gram_solutions(t).count == 0


def test_gram_validation():
    with pytest.raises(BadSpec):
        GramTarget.from_doubled(4, [[2, 1], [2, 2]])  # asymmetric
    with pytest.raises(BadDimension):
        GramTarget.from_plain(3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])  # m == n


def test_psd_detection():
    assert lambda_ab_target(5, 1, 2).is_psd()
    assert not lambda_ab_target(5, 3, 1).is_psd()


def test_sum_N_ab_frozen_prefix():
    for lam, want in enumerate(SUM_N_AB):
        assert sum_N_ab(lam) == want, lam
    for lam, want in enumerate(SINGULAR_4D):
        assert singular_case_sum_4d(lam) == want, lam


def test_quadruples_frozen():
    assert count_quadruples_5d(1) == 330
    assert count_quadruples_5d(2) == 93480
    assert count_quadruples_5d(4) == 807450
    for lam, want in BREAKDOWNS.items():
        got = degenerate_breakdown_5d(lam)
        assert got == want, lam
        assert sum(got.values()) == count_quadruples_5d(lam)


def test_quadruples_match_naive():
    for lam in (1, 2, 3, 5, 8):
        pts = enumerate_shell(5, lam).points
        assert count_quadruples_5d(lam) == naive_quadruple_total(pts), lam


def test_json_round_trip():
    t = lambda_ab_target(5, 1, 2)
    d = t.to_json_dict()
    back = GramTarget.from_doubled(d["m"], d["doubled_gram"])
    assert back == t
