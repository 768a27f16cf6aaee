"""Named end-to-end checks with structured results.

Each check pairs a fast implementation with an independent recomputation or
a frozen reference value and reports pass/fail plus the measured quantities.
The registry order is the canonical run order; `run_criterion` executes one
by name and `run_all` executes a selection.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import crosscheck
from .density import (
    count_mod_pr,
    first_nonresidue,
    gcd_sum,
    good_prime_bound_check,
    is_good_prime,
    local_density,
    mass_consistency,
    normalization_exponent,
    orthogonal_chain_count,
    positive_definite_targets,
    primes_up_to,
    quadric_count_closed_form,
    QuadricCountSpec,
)
from .energy import additive_energy, rep_histogram, shell_energy
from .experiments import (
    CoefficientMap,
    even_moment,
    fit_exponent,
    grid_moment_extended,
)
from .gram import (
    GramTarget,
    count_quadruples_5d,
    degenerate_breakdown_5d,
    lambda_ab_target,
    sum_N_ab,
)
from .incidence import (
    AffineSubspace,
    check_lemma_4d,
    check_lemma_5d,
    subspace_concentration_5d,
    sum_hyperplane_family,
)
from .lattice import (
    enumerate_paraboloid,
    enumerate_shell,
    shell_point_set,
    shell_size,
)
from .vectors import integer_rank

# r-depth schedule for truncated 2-, 3-, 5-, 7-adic densities in the mass
# check.  p = 2 needs depth 4: some targets hold a constant value for two
# rounds and then move again, so a shallower cutoff would mislabel them as
# stabilized.  Deeper rounds are priced out by the p^(r m) growth.
MASS_R_MAX = {2: 4, 3: 3, 5: 2, 7: 2}

# Reference quadruple breakdowns (direct enumeration, rank of [u, v, x, y]).
QUADRUPLE_BREAKDOWN_REFERENCE = {
    1: {"rank2": 330, "rank3": 0, "rank4": 0},
    2: {"rank2": 6120, "rank3": 43200, "rank4": 44160},
    4: {"rank2": 31770, "rank3": 278400, "rank4": 497280},
}


@dataclass
class SuiteResult:
    name: str
    passed: bool
    elapsed: float
    details: dict

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        keys = ", ".join(f"{k}={v}" for k, v in self.details.items() if not isinstance(v, (list, dict)))
        return f"{status} {self.name} ({self.elapsed:.1f}s) {keys}"


def _result(name: str, t0: float, passed, **details) -> SuiteResult:
    return SuiteResult(name=name, passed=bool(passed), elapsed=time.time() - t0, details=details)


# --- 01: shell enumeration vs brute box and the divisor formula -------------


def crit_shell_enum() -> SuiteResult:
    t0 = time.time()
    ok = True
    checks = 0
    for n in (2, 3, 4, 5):
        hist = crosscheck.shell_size_histogram(n, 200)
        for lam in range(201):
            ok &= int(hist[lam]) == shell_size(n, lam)
            checks += 1
    for n in (2, 3, 4, 5):
        top = 40 if n < 5 else 25
        for lam in range(top + 1):
            pts = [tuple(int(v) for v in row) for row in enumerate_shell(n, lam).points]
            ok &= pts == crosscheck.brute_shell(n, lam)
            checks += 1
    for lam in range(1, 1001, 2):
        ok &= shell_size(4, lam) == crosscheck.divisor_sum_r4(lam)
        checks += 1
    return _result("01-shell-enum", t0, ok, checks=checks)


# --- 02: finite-field quadric counts, closed form vs brute ------------------


def crit_quadric_counts() -> SuiteResult:
    t0 = time.time()
    ok = True
    checks = 0
    for p in (3, 5, 7, 11, 13):
        eta = first_nonresidue(p)
        for l in range(1, 6):
            for d in (1, eta):
                counts = crosscheck.quadric_counts_by_residue(p, l, d)
                ok &= int(counts.sum()) == p**l
                for xi in range(p):
                    want = quadric_count_closed_form(QuadricCountSpec(p, l, d, xi))
                    ok &= want == int(counts[xi])
                    checks += 1
    return _result("02-quadric-counts", t0, ok, checks=checks)


# --- 03: depth-1 solution counts vs the orthogonal chain formula ------------


def _identity_target(m: int, n: int) -> GramTarget:
    plain = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return GramTarget.from_plain(m, plain)


def _diag_target(m: int, diag: Sequence[int]) -> GramTarget:
    n = len(diag)
    plain = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
    return GramTarget.from_plain(m, plain)


def crit_chain_counts() -> SuiteResult:
    t0 = time.time()
    ok = True
    checks = 0
    for p in (3, 5):
        eta = first_nonresidue(p)
        for n in (2, 3):
            for xi in (1, eta):
                target = _diag_target(n + 1, [xi] + [1] * (n - 1))
                got = count_mod_pr(target, p, 1)
                ok &= got == orthogonal_chain_count(p, n, xi)
                checks += 1
    i3 = _identity_target(4, 3)
    nu3 = Fraction(count_mod_pr(i3, 3, 1), 3 ** normalization_exponent(4, 3))
    ok &= nu3 == Fraction(576, 729)
    i4 = _identity_target(5, 4)
    got4 = count_mod_pr(i4, 3, 1)
    ok &= got4 == orthogonal_chain_count(3, 4, 1)
    checks += 2
    return _result("03-chain-counts", t0, ok, checks=checks, nu3_i3=str(nu3))


# --- 04: one Hensel lift leaves good-prime densities unchanged --------------


def crit_hensel_lift() -> SuiteResult:
    t0 = time.time()
    ok = True
    tested = []
    samples = {
        3: [lambda_ab_target(5, -4, -3), lambda_ab_target(5, 0, 1),
            lambda_ab_target(5, -1, 1), _diag_target(4, [1, 2])],
        5: [lambda_ab_target(5, -4, -3), lambda_ab_target(5, 1, 2),
            lambda_ab_target(5, -1, 1), _diag_target(4, [1, 2])],
    }
    for p, targets in samples.items():
        for target in targets:
            if not is_good_prime(target, p):
                ok = False
                continue
            e = normalization_exponent(target.m, target.n)
            nu1 = Fraction(count_mod_pr(target, p, 1), p**e)
            nu2 = Fraction(count_mod_pr(target, p, 2), p ** (2 * e))
            ok &= nu1 == nu2
            tested.append((p, target.n, str(nu1), nu1 == nu2))
    return _result("04-hensel-lift", t0, ok, cases=len(tested), detail=tested)


# --- 05: good-prime densities stay within 10/p^2 of 1 -----------------------


def crit_good_prime_bound() -> SuiteResult:
    t0 = time.time()
    ok = True
    targets = positive_definite_targets(5)
    odd_primes = [int(p) for p in primes_up_to(50) if p > 2]
    checks = 0
    worst = Fraction(0)
    for _, target in targets:
        for p in odd_primes:
            if not is_good_prime(target, p):
                continue
            chk = good_prime_bound_check(target, p)
            ok &= chk.passed
            worst = max(worst, chk.margin)
            checks += 1
    ok &= len(targets) >= 20
    return _result(
        "05-good-prime-bound", t0, ok,
        targets=len(targets), checks=checks, worst_margin=float(worst),
    )


# --- 06: correlated-pair mass identity equals the additive energy -----------


def crit_mass_identity() -> SuiteResult:
    t0 = time.time()
    ok = True
    for lam in range(51):
        total = sum_N_ab(lam)
        energy = shell_energy(enumerate_shell(4, lam)).energy
        ok &= total == energy
    return _result("06-mass-identity", t0, ok, lam_max=50)


# --- 07/08: energy growth against the scale parameter -----------------------


def crit_energy_slope_4d() -> SuiteResult:
    t0 = time.time()
    rows = []
    for lam in range(51, 1502, 50):  # 30 odd values
        res = shell_energy(enumerate_shell(4, lam))
        # abscissa is the shell radius: the integer enumeration bound
        # floor(sqrt)+1 compresses the log-range and biases the fit high
        rows.append((math.sqrt(lam), res.energy))
    fit = fit_exponent(rows)
    ok = 3.5 <= fit.slope <= 4.4
    return _result("07-energy-slope-4d", t0, ok, points=len(rows), slope=round(fit.slope, 4))


_LAMS_5D = (25, 50, 100, 150, 200, 250, 300, 350, 400)
_HIST_5D_CACHE: dict[int, object] = {}


def _hist_5d(lam: int):
    if lam not in _HIST_5D_CACHE:
        _HIST_5D_CACHE[lam] = rep_histogram(shell_point_set(enumerate_shell(5, lam)))
    return _HIST_5D_CACHE[lam]


def crit_energy_slope_5d() -> SuiteResult:
    t0 = time.time()
    rows = []
    for lam in _LAMS_5D:
        hist = _hist_5d(lam)
        rows.append((math.sqrt(lam), hist.energy()))
    fit = fit_exponent(rows)
    ok = 6.5 <= fit.slope <= 7.3
    return _result("08-energy-slope-5d", t0, ok, points=len(rows), slope=round(fit.slope, 4))


# --- 09: correlated quadruple counts: oracle agreement and growth -----------


def crit_quadruples_5d() -> SuiteResult:
    t0 = time.time()
    ok = True
    for lam in range(1, 21):
        fast = count_quadruples_5d(lam)
        naive = crosscheck.naive_quadruple_total(enumerate_shell(5, lam).points)
        ok &= fast == naive
    for lam, want in QUADRUPLE_BREAKDOWN_REFERENCE.items():
        got = degenerate_breakdown_5d(lam)
        ok &= got == want
        ok &= sum(got.values()) == count_quadruples_5d(lam)
    rows = []
    for lam in _LAMS_5D:
        hist = _hist_5d(lam)
        rows.append((lam, hist.power_sum(3, skip_zero_sum=True)))
    fit = fit_exponent(rows)
    ok &= fit.slope <= 4.6
    return _result("09-quadruples-5d", t0, ok, slope=round(fit.slope, 4))


# --- 10: incidence inequalities hold on every shell in range ----------------


def crit_incidence_lemmas() -> SuiteResult:
    t0 = time.time()
    ok = True
    failures = []
    for lam in range(1, 301):
        shell = enumerate_shell(4, lam)
        if shell.size == 0:
            continue
        pset = shell_point_set(shell)
        family = sum_hyperplane_family(pset)
        report = check_lemma_4d(pset, family)
        if not report.satisfied:
            ok = False
            failures.append((4, lam))
    for lam in range(1, 101):
        shell = enumerate_shell(5, lam)
        if shell.size == 0:
            continue
        pset = shell_point_set(shell)
        family = sum_hyperplane_family(pset)
        report = check_lemma_5d(pset, family)
        if not report.satisfied:
            ok = False
            failures.append((5, lam))
    return _result("10-incidence-lemmas", t0, ok, failures=failures)


# --- 11: affine 3-space structure assertions in dimension 5 -----------------


def crit_subspace_structure() -> SuiteResult:
    t0 = time.time()
    rng = np.random.default_rng(11)
    ok = True
    sampled = 0
    nonempty = 0
    while sampled < 50:
        lam = int(rng.integers(4, 101))
        shell = enumerate_shell(5, lam)
        pts = shell.points
        base = tuple(int(v) for v in pts[int(rng.integers(pts.shape[0]))])
        dirs: list[tuple[int, ...]] = []
        while len(dirs) < 3:
            d = rng.integers(-2, 3, size=5)
            if not d.any():
                continue
            cand = dirs + [tuple(int(v) for v in d)]
            if integer_rank([list(x) for x in cand]) == len(cand):
                dirs = cand
        try:
            found = subspace_concentration_5d(
                shell, AffineSubspace(base=base, directions=tuple(dirs))
            )
        except AssertionError:
            ok = False
            break
        nonempty += bool(found)
        sampled += 1
    return _result("11-subspace-structure", t0, ok, sampled=sampled, nonempty=nonempty)


# --- 12: paraboloid energy growth -------------------------------------------


def crit_paraboloid_slope() -> SuiteResult:
    t0 = time.time()
    rows = []
    for N in range(2, 11):
        res = additive_energy(enumerate_paraboloid(N))
        # abscissa is the slab's per-axis point count: the slab holds
        # (2N+1)^3 points, so 2N+1 is the scale the exponent refers to
        rows.append((2 * N + 1, res.energy))
    fit = fit_exponent(rows)
    ok = fit.slope >= 6.7
    return _result("12-paraboloid-slope", t0, ok, points=len(rows), slope=round(fit.slope, 4))


# --- 13: gcd double sum: oracle agreement and growth ------------------------


def crit_gcd_sum() -> SuiteResult:
    t0 = time.time()
    ok = True
    for lam in range(101):
        ok &= gcd_sum(lam) == crosscheck.naive_gcd_sum(lam)
    # evenly spaced in lambda: the tail-weighted estimate; log-spaced grids
    # over-weight the small-lambda transient and read ~0.006 higher
    lams = (100, 250, 500, 750, 1000, 1250, 1500, 1750, 2000, 2500, 3000)
    rows = [(lam, gcd_sum(lam)) for lam in lams]
    fit = fit_exponent(rows)
    ok &= fit.slope <= 2.4
    return _result("13-gcd-sum", t0, ok, slope=round(fit.slope, 4))


# --- 14: global counts against the product of local densities ---------------


def crit_mass_consistency() -> SuiteResult:
    t0 = time.time()
    report = mass_consistency(4, r_max=MASS_R_MAX, budget=2 * 10**8)
    stable = [row for row in report.rows if row.stable and row.ratio > 0]
    ok = (
        report.max_rel_deviation is not None
        and report.max_rel_deviation <= Fraction(1, 4)
        and len(stable) >= 2
    )
    return _result(
        "14-mass-consistency", t0, ok,
        stable=len(stable), total=len(report.rows),
        median=float(report.median_ratio) if report.median_ratio is not None else None,
        max_rel_deviation=(
            float(report.max_rel_deviation)
            if report.max_rel_deviation is not None else None
        ),
        excluded=list(report.excluded),
    )


# --- 15: even moments: exact path and grid-quadrature convergence -----------


def crit_even_moments() -> SuiteResult:
    t0 = time.time()
    ok = True
    for lam in range(51):
        shell = enumerate_shell(4, lam)
        pset = shell_point_set(shell)
        ok &= even_moment(pset, None, 4) == shell_energy(shell).energy
    shell25 = enumerate_shell(4, 25)
    pset25 = shell_point_set(shell25)
    coeffs = CoefficientMap.normalized_ones(pset25)
    size = shell25.size
    exact = Fraction(shell_energy(shell25).energy, size * size)
    exact_ld = np.longdouble(exact.numerator) / np.longdouble(exact.denominator)
    err_coarse = abs(grid_moment_extended(pset25, coeffs, 4, 48) - exact_ld)
    err_fine = abs(grid_moment_extended(pset25, coeffs, 4, 96) - exact_ld)
    rel_coarse = float(err_coarse / exact_ld)
    ok &= rel_coarse <= 0.05
    # both resolutions are alias-free here (coordinate sums stay below M),
    # so refinement is compared only above the rounding-accumulation floor
    floor = np.longdouble(1e-12) * exact_ld
    ok &= err_fine <= err_coarse or err_fine <= floor
    return _result(
        "15-even-moments", t0, ok,
        rel_err_coarse=rel_coarse, rel_err_fine=float(err_fine / exact_ld),
    )


CRITERIA: dict[str, Callable[[], SuiteResult]] = {
    "01-shell-enum": crit_shell_enum,
    "02-quadric-counts": crit_quadric_counts,
    "03-chain-counts": crit_chain_counts,
    "04-hensel-lift": crit_hensel_lift,
    "05-good-prime-bound": crit_good_prime_bound,
    "06-mass-identity": crit_mass_identity,
    "07-energy-slope-4d": crit_energy_slope_4d,
    "08-energy-slope-5d": crit_energy_slope_5d,
    "09-quadruples-5d": crit_quadruples_5d,
    "10-incidence-lemmas": crit_incidence_lemmas,
    "11-subspace-structure": crit_subspace_structure,
    "12-paraboloid-slope": crit_paraboloid_slope,
    "13-gcd-sum": crit_gcd_sum,
    "14-mass-consistency": crit_mass_consistency,
    "15-even-moments": crit_even_moments,
}


def run_criterion(name: str) -> SuiteResult:
    if name not in CRITERIA:
        from .errors import UsageError

        raise UsageError(f"unknown suite {name!r}; choices: {', '.join(CRITERIA)}")
    return CRITERIA[name]()


def run_all(names: Optional[Sequence[str]] = None) -> list[SuiteResult]:
    picked = list(names) if names else list(CRITERIA)
    return [run_criterion(name) for name in picked]
