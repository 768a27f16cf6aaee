"""Slow, literal re-computations used to validate the fast paths.

Everything here favors obviousness over speed: box loops, dict counters,
double loops.  Budgets are sized for the test ranges, not for production.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded
from .lattice import scale_parameter


def brute_shell(n: int, lam: int, budget: int = 10**8) -> list[tuple[int, ...]]:
    """All integer points with |x|^2 = lam via a full box scan."""
    if lam < 0:
        return []
    N = math.isqrt(lam)
    if (2 * N + 1) ** n > budget:
        raise BudgetExceeded(f"box has more than {budget} cells")
    out = []
    for x in itertools.product(range(-N, N + 1), repeat=n):
        if sum(v * v for v in x) == lam:
            out.append(x)
    out.sort()
    return out


def _weighted_outer(vals_a, wts_a, vals_b, wts_b, lam_max):
    s = np.minimum(vals_a[:, None] + vals_b[None, :], lam_max + 1).ravel()
    w = (wts_a[:, None] * wts_b[None, :]).ravel()
    order = np.argsort(s, kind="stable")
    s, w = s[order], w[order]
    edges = np.flatnonzero(np.diff(s)) + 1
    starts = np.concatenate(([0], edges))
    vals = s[starts]
    wts = np.add.reduceat(w, starts)
    return vals, wts


def shell_size_histogram(n: int, lam_max: int) -> np.ndarray:
    """Counts of |x|^2 = lam for 0 <= lam <= lam_max by weighted box sums."""
    N = math.isqrt(lam_max)
    base_vals = np.arange(0, N + 1, dtype=np.int64) ** 2
    base_wts = np.where(np.arange(N + 1) == 0, 1, 2).astype(np.int64)
    vals, wts = base_vals, base_wts
    for _ in range(n - 1):
        vals, wts = _weighted_outer(vals, wts, base_vals, base_wts, lam_max)
    out = np.zeros(lam_max + 2, dtype=np.int64)
    out[vals] = wts
    return out[: lam_max + 1]


def quadric_counts_by_residue(p: int, l: int, d: int) -> np.ndarray:
    """Counts of d*x1^2 + x2^2 + ... + xl^2 = xi over F_p, for every residue
    xi, via chained outer sums mod p."""
    x = np.arange(p, dtype=np.int64)
    first = np.bincount((d * x * x) % p, minlength=p)
    square = np.bincount((x * x) % p, minlength=p)
    counts = first
    for _ in range(l - 1):
        conv = np.zeros(p, dtype=np.int64)
        for shift in range(p):
            conv[shift] = int((counts * square[(shift - x) % p]).sum())
        counts = conv
    return counts


def divisor_sum_r4(lam: int) -> int:
    """r_4(lam) = 8 * sum of divisors of lam not divisible by 4 (lam >= 1)."""
    if lam < 1:
        raise ValueError("divisor formula needs lam >= 1")
    total = 0
    for d in range(1, math.isqrt(lam) + 1):
        if lam % d == 0:
            if d % 4 != 0:
                total += d
            e = lam // d
            if e != d and e % 4 != 0:
                total += e
    return 8 * total


def naive_energy(points: Sequence[tuple[int, ...]]) -> int:
    """E(P) by histogramming all ordered pair sums."""
    sums = Counter()
    pts = [tuple(p) for p in points]
    for a in pts:
        for b in pts:
            sums[tuple(x + y for x, y in zip(a, b))] += 1
    return sum(r * r for r in sums.values())


def naive_l_fold(points: Sequence[tuple[int, ...]], l: int) -> int:
    """l-fold energy by histogramming all ordered l-tuples' sums."""
    pts = [tuple(p) for p in points]
    sums = Counter()
    for combo in itertools.product(pts, repeat=l):
        key = tuple(sum(c) for c in zip(*combo))
        sums[key] += 1
    return sum(r * r for r in sums.values())


def naive_incidences(
    points: Sequence[tuple[int, ...]],
    planes: Iterable[tuple[tuple[int, ...], int]],
) -> int:
    """Point-plane incidences by double loop; planes are (normal, offset)
    meaning normal . x == offset."""
    total = 0
    pts = [tuple(p) for p in points]
    for normal, offset in planes:
        for x in pts:
            if sum(a * b for a, b in zip(normal, x)) == offset:
                total += 1
    return total


def naive_pairwise_multiplicity(
    points: Sequence[tuple[int, ...]],
    planes: Iterable[tuple[tuple[int, ...], int]],
) -> int:
    """Max over unordered pairs of distinct planes of the points on both."""
    pts = np.array([tuple(p) for p in points], dtype=np.int64)
    best = 0
    plane_list = list(planes)
    if len(plane_list) < 2 or len(pts) == 0:
        return 0
    normals = np.array([n for n, _ in plane_list], dtype=np.int64)
    offsets = np.array([o for _, o in plane_list], dtype=np.int64)
    member = normals @ pts.T == offsets[:, None]  # (planes, points)
    for i in range(len(plane_list)):
        for j in range(i + 1, len(plane_list)):
            shared = int(np.count_nonzero(member[i] & member[j]))
            if shared > best:
                best = shared
    return best


def naive_triple_hypothesis_gamma(points: Sequence[tuple[int, ...]], hist, rich_at: int = 5):
    """(gamma*, gamma_obs) of the triple hypothesis by direct enumeration.

    For each canonical sum v in decreasing pair-count order, the partner set
    A_v is listed by membership lookups and every other plane is scored with
    a Counter over the sums A_v + P.  Each rich pair walks g upward until at
    most g other planes hold >= g of its common points; the generating pair,
    scoring exactly |X| each, is excluded.  gamma_obs finishes under the
    usual early stop: representatives with r <= best cannot improve it.
    """
    pts = [tuple(int(c) for c in p) for p in points]
    members = set(pts)
    if not pts:
        return rich_at, 0
    zero = (0,) * len(pts[0])
    sums = hist.codec.unpack(hist.keys)
    order = np.argsort(hist.counts)[::-1]
    gamma_star = rich_at
    gamma_obs = 0
    seen_x: set[frozenset] = set()
    for idx in order:
        r = int(hist.counts[idx])
        if r < 2 or (r < rich_at and r <= gamma_obs):
            break
        v = tuple(int(c) for c in sums[idx])
        if v == zero:
            continue
        partners = [x for x in pts if tuple(a - b for a, b in zip(v, x)) in members]
        cross = Counter()
        for x in partners:
            for p in pts:
                cross[tuple(a + b for a, b in zip(x, p))] += 1
        cross.pop(v, None)
        cross.pop(zero, None)
        if cross:
            gamma_obs = max(gamma_obs, max(cross.values()))
        if r < rich_at:
            continue  # tail: only the gamma_obs maximum is still open
        for vp, m in cross.items():
            if m < rich_at:
                continue
            x_set = frozenset(
                x for x in partners if tuple(a - b for a, b in zip(vp, x)) in members
            )
            if x_set in seen_x:
                continue
            seen_x.add(x_set)
            profile = Counter()
            for x in x_set:
                for p in pts:
                    profile[tuple(a + b for a, b in zip(x, p))] += 1
            profile.pop(zero, None)
            scores = list(profile.values())
            g = rich_at
            while True:
                holding = sum(1 for s in scores if s >= g)
                holding -= 2 if g <= len(x_set) else 0
                if holding <= g:
                    break
                g += 1
            gamma_star = max(gamma_star, g)
    return gamma_star, gamma_obs


def naive_quadruple_total(points: np.ndarray, budget: int = 4 * 10**7) -> int:
    """Correlated quadruples by literal difference histogram: for every
    ordered pair the difference is tabulated, and each difference w != 0
    contributes c(w)^3 (choices of u and v seeing both endpoints, times the
    number of pairs at that difference)."""
    pts = np.asarray(points, dtype=np.int64)
    size = pts.shape[0]
    if size == 0:
        return 0
    if size * size > budget:
        raise BudgetExceeded(f"{size}^2 differences exceed budget {budget}")
    diffs = (pts[:, None, :] - pts[None, :, :]).reshape(size * size, pts.shape[1])
    nonzero = diffs[np.any(diffs != 0, axis=1)]
    _, counts = np.unique(nonzero, axis=0, return_counts=True)
    return int((counts.astype(object) ** 3).sum())


def _totient(d: int) -> int:
    n, result, p = d, d, 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1
    if n > 1:
        result -= result // n
    return result


def naive_gcd_sum(lam: int) -> int:
    """Double loop over a, b in [-lam, lam]; each pair contributes the sum
    of phi(d) over divisors d <= lam of gcd(lam^2-a^2, lam^2-b^2), every d
    dividing 0.  Routes through per-pair gcds and divisor enumeration, unlike
    the aggregated per-d count in the main implementation."""
    phi = {d: _totient(d) for d in range(1, lam + 1)}
    all_d = sum(phi.values())
    vals = [lam * lam - a * a for a in range(-lam, lam + 1)]
    total = 0
    for x in vals:
        for y in vals:
            g = math.gcd(x, y)
            if g == 0:
                total += all_d
                continue
            for d in range(1, int(math.isqrt(g)) + 1):
                if g % d == 0:
                    if d <= lam:
                        total += phi[d]
                    other = g // d
                    if other != d and other <= lam:
                        total += phi[other]
    return total


def naive_quadric_count(p: int, l: int, d: int, xi: int) -> int:
    """Solutions of d*x1^2 + x2^2 + ... + xl^2 = xi over F_p by box loop."""
    count = 0
    for x in itertools.product(range(p), repeat=l):
        s = (d * x[0] * x[0] + sum(v * v for v in x[1:])) % p
        if s == xi % p:
            count += 1
    return count


def naive_subspace_points(
    shell_points: Sequence[tuple[int, ...]],
    base: tuple[int, ...],
    directions: Sequence[tuple[int, ...]],
    coeff_bound: int = 60,
) -> list[tuple[int, ...]]:
    """Shell points lying in base + span(directions) by scanning integer
    coefficient boxes (coefficients in [-coeff_bound, coeff_bound])."""
    have = {tuple(p) for p in shell_points}
    dims = len(directions)
    found = set()
    for coeffs in itertools.product(range(-coeff_bound, coeff_bound + 1), repeat=dims):
        point = tuple(
            b + sum(c * d[k] for c, d in zip(coeffs, directions))
            for k, b in enumerate(base)
        )
        if point in have:
            found.add(point)
    return sorted(found)


def brute_paraboloid(N: int) -> list[tuple[int, ...]]:
    """(xi, |xi|^2) for xi in the box [-N, N]^3."""
    out = []
    for xi in itertools.product(range(-N, N + 1), repeat=3):
        out.append(xi + (xi[0] ** 2 + xi[1] ** 2 + xi[2] ** 2,))
    out.sort()
    return out


def subset_energy_brute(points: Sequence[tuple[int, ...]]) -> int:
    """Alias for naive_energy with a size guard (quadruple loop semantics)."""
    if len(points) > 64:
        raise BudgetExceeded("naive subset energy capped at 64 points")
    return naive_energy(points)
