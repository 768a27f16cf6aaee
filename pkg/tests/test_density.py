from fractions import Fraction

import pytest

from sphere_lab.crosscheck import naive_gcd_sum, naive_quadric_count, quadric_counts_by_residue
from sphere_lab.density import (
    DensityEstimate,
    QuadricCountSpec,
    bad_prime_report,
    count_mod_pr,
    count_mod_pr_brute,
    first_nonresidue,
    gcd_sum,
    good_prime_bound_check,
    good_prime_count_mod_p,
    is_good_prime,
    is_prime,
    legendre,
    local_density,
    normalization_exponent,
    orthogonal_chain_count,
    primes_up_to,
    quadric_count_closed_form,
    valuation,
)
from sphere_lab.errors import BadSpec, BudgetExceeded
from sphere_lab.gram import GramTarget, lambda_ab_target


def _diag(m, diag):
    n = len(diag)
    plain = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
    return GramTarget.from_plain(m, plain)


def test_prime_helpers():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert list(primes_up_to(20)) == [2, 3, 5, 7, 11, 13, 17, 19]
    assert valuation(24, 2) == 3
    with pytest.raises(BadSpec):
        valuation(0, 3)


def test_legendre_matches_residue_table():
    for p in primes_up_to(50):
        if p == 2:
            continue
        squares = {(x * x) % p for x in range(1, p)}
        for a in range(1, p):
            want = 1 if a in squares else -1
            assert legendre(a, p) == want, (a, p)
        assert legendre(0, p) == 0
        eta = first_nonresidue(p)
        assert legendre(eta, p) == -1


def test_quadric_frozen_values():
    assert quadric_count_closed_form(QuadricCountSpec(5, 3, 1, 1)) == 30
    assert quadric_count_closed_form(QuadricCountSpec(3, 2, 1, 0)) == 1
    assert quadric_count_closed_form(QuadricCountSpec(3, 2, 1, 1)) == 4
    assert quadric_count_closed_form(QuadricCountSpec(5, 1, 1, 1)) == 2


def test_quadric_closed_form_vs_brute():
    for p in (3, 5, 7):
        for l in (1, 2, 3, 4):
            for d in (1, first_nonresidue(p)):
                for xi in range(p):
                    want = naive_quadric_count(p, l, d, xi)
                    got = quadric_count_closed_form(QuadricCountSpec(p, l, d, xi))
                    assert got == want, (p, l, d, xi)


def test_quadric_mass_identity():
    for p in (3, 5, 11):
        for l in (1, 2, 3):
            counts = quadric_counts_by_residue(p, l, 1)
            assert int(counts.sum()) == p**l
            total = sum(
                quadric_count_closed_form(QuadricCountSpec(p, l, 1, xi))
                for xi in range(p)
            )
            assert total == p**l


def test_quadric_validation():
    with pytest.raises(BadSpec):
        QuadricCountSpec(2, 2, 1, 0)  # p = 2 excluded
    with pytest.raises(BadSpec):
        QuadricCountSpec(5, 0, 1, 0)
    with pytest.raises(BadSpec):
        QuadricCountSpec(5, 2, 5, 0)  # p | d


def test_chain_counts_frozen():
    assert orthogonal_chain_count(3, 2, 1) == 24
    assert orthogonal_chain_count(3, 3, 1) == 576
    assert orthogonal_chain_count(5, 2, 1) == 120


def test_count_mod_pr_frozen():
    i2_m3 = _diag(3, [1, 1])
    assert count_mod_pr(i2_m3, 3, 2) == 648
    two_m4 = _diag(4, [2])
    assert count_mod_pr(two_m4, 3, 2) == 648
    one_m4 = _diag(4, [1])
    assert count_mod_pr(one_m4, 2, 3) == 512
    t12 = lambda_ab_target(5, 1, 2)
    assert count_mod_pr(t12, 2, 2) == 6144
    assert count_mod_pr(t12, 2, 3) == 393216
    assert count_mod_pr(t12, 3, 1) == 792
    assert count_mod_pr(t12, 5, 1) == 14400
    assert count_mod_pr(t12, 7, 1) == 112896


def test_count_mod_pr_vs_brute_seeded():
    import numpy as np

    rng = np.random.default_rng(17)
    cases = 0
    while cases < 8:
        p = int(rng.choice([2, 3, 5]))
        n = int(rng.integers(1, 3))
        m = n + 1 + int(rng.integers(0, 2))
        r = int(rng.integers(1, 3))
        if (p**r) ** (m * n) > 2 * 10**7:
            continue
        plain = rng.integers(0, 4, size=(n, n))
        plain = (plain + plain.T).tolist()
        target = GramTarget.from_plain(m, plain)
        fast = count_mod_pr(target, p, r)
        slow = count_mod_pr_brute(target, p, r)
        assert fast == slow, (p, r, target)
        cases += 1


def test_normalization_exponent():
    assert normalization_exponent(4, 3) == 6
    assert normalization_exponent(5, 4) == 10
    assert normalization_exponent(4, 1) == 3


def test_good_prime_paths():
    t12 = lambda_ab_target(5, 1, 2)  # det 36
    assert is_good_prime(t12, 5) and is_good_prime(t12, 7)
    assert not is_good_prime(t12, 3) and not is_good_prime(t12, 2)
    # closed form equals depth-1 enumeration
    assert good_prime_count_mod_p(t12, 5) == 14400
    assert good_prime_count_mod_p(t12, 7) == 112896
    chk = good_prime_bound_check(t12, 7)
    assert chk.passed
    assert chk.nu == Fraction(2304, 2401)
    assert chk.margin == Fraction(97, 2401)


def test_good_prime_lifting_identity():
    t = _diag(4, [1, 2])  # det 2, good at 3 and 5
    for p in (3, 5):
        e = normalization_exponent(4, 2)
        c1 = count_mod_pr(t, p, 1)
        c2 = count_mod_pr(t, p, 2)
        assert c2 == c1 * p**e  # one Hensel lift per unit of depth


def test_local_density_good_path():
    i3 = _diag(4, [1, 1, 1])
    est = local_density(i3, 3, r_max=2)
    assert est.good_prime and est.stabilized
    assert est.nu == Fraction(576, 729)
    assert est.counts[0] == (1, 576)


def test_local_density_bad_path_sequences():
    t12 = lambda_ab_target(5, 1, 2)  # det 36: 2 and 3 both bad
    # the r=3 layer at p=3 holds ~6e8 solutions, beyond small budgets; the
    # series truncates to the computed depth instead of being discarded
    est3 = local_density(t12, 3, r_max=3, budget=10**7)
    assert not est3.good_prime
    assert [Fraction(c, 3 ** (r * 6)) for r, c in est3.counts] == [
        Fraction(88, 81), Fraction(128, 81),
    ]
    assert not est3.stabilized and est3.nu is None
    # 2-adically the sequence pauses at 3/2 for two layers and then jumps:
    # equal consecutive values do not prove stabilization at p=2
    est2 = local_density(t12, 2, r_max=4)
    normalized = [Fraction(c, 2 ** (r * 6)) for r, c in est2.counts]
    assert normalized == [
        Fraction(5, 4), Fraction(3, 2), Fraction(3, 2), Fraction(3),
    ]
    assert not est2.stabilized and est2.nu is None


def test_local_density_obstruction_stabilizes_at_zero():
    # det 72 target: solvable mod 3 but not mod 9, so nu_3 locks at 0
    t = lambda_ab_target(5, -2, 1)
    est = local_density(t, 3, r_max=3)
    assert [f for _, f in est.normalized] == [Fraction(88, 81), 0, 0]
    assert est.stabilized and est.nu == 0


def test_local_density_budget_truncates():
    t = lambda_ab_target(5, 2, 3)  # 7 | det
    est = local_density(t, 7, r_max=2, budget=10**7)
    assert [r for r, _ in est.counts] == [1]
    assert not est.stabilized


def test_density_json_shape():
    t12 = lambda_ab_target(5, 1, 2)
    est = local_density(t12, 3, r_max=2)
    d = est.to_json_dict()
    assert set(d) == {"p", "m", "n", "doubled_gram", "counts", "normalized", "stabilized"}
    assert d["counts"] == [[1, 792], [2, 839808]]
    assert d["normalized"] == [[1, "88/81"], [2, "128/81"]]


def test_bad_prime_report():
    rep = bad_prime_report(5, 1, 2, 3, r_max=2)
    assert rep.p == 3 and rep.det == 36
    assert rep.val_det == 2
    assert rep.implied_constant is not None
    with pytest.raises(BadSpec):
        bad_prime_report(5, 2, 2, 3)


def test_gcd_sum_frozen_and_naive():
    assert gcd_sum(0) == 0
    assert gcd_sum(1) == 9  # all nine pairs contribute phi(1) = 1
    assert gcd_sum(2) == 34  # phi(1)*5^2 + phi(2)*3^2
    assert gcd_sum(5) == 393
    for lam in range(0, 30):
        assert gcd_sum(lam) == naive_gcd_sum(lam), lam
