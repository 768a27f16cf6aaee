"""Integer solution counts of Gram systems L^T L = Lambda and their sums.

Gram matrices are stored DOUBLED (G = 2 Lambda) so half-integer off-diagonal
entries are exact integers; the native identities are then 2 x^i . x^j = G_ij.
Column-by-column backtracking over shells (column j lives on the shell of
squared norm G_jj / 2) with dot-product filtering after each column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from .energy import rep_histogram
from .errors import BadDimension, BadSpec, BudgetExceeded
from .lattice import PointSet, enumerate_shell, shell_point_set
from .vectors import KeyCodec, KeyTable, canonicalize, check_int128, integer_rank, orbit_sizes


def _int_det(rows: list[list[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class GramTarget:
    """Doubled Gram target: count L in M_{m,n}(Z) with 2 L^T L = G."""

    m: int
    n: int
    G: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not 1 <= self.n < self.m <= 8:
            raise BadDimension(f"need 1 <= n < m <= 8, got n={self.n}, m={self.m}")
        if len(self.G) != self.n or any(len(row) != self.n for row in self.G):
            raise BadSpec("doubled Gram matrix must be n x n")
        for i in range(self.n):
            for j in range(self.n):
                if self.G[i][j] != self.G[j][i]:
                    raise BadSpec("doubled Gram matrix must be symmetric")

    @classmethod
    def from_doubled(cls, m: int, doubled) -> "GramTarget":
        G = tuple(tuple(int(x) for x in row) for row in doubled)
        return cls(m=m, n=len(G), G=G)

    @classmethod
    def from_plain(cls, m: int, plain) -> "GramTarget":
        return cls.from_doubled(m, [[2 * int(x) for x in row] for row in plain])

    def det_plain(self) -> Fraction:
        """det(Lambda) = det(G) / 2^n, exact."""
        return Fraction(_int_det([list(r) for r in self.G]), 2**self.n)

    def has_odd_diagonal(self) -> bool:
        return any(self.G[j][j] % 2 for j in range(self.n))

    def is_psd(self) -> bool:
        """Positive semidefiniteness of G (equivalently of Lambda), exact."""
        idx = range(self.n)
        for size in range(1, self.n + 1):
            for sub in combinations(idx, size):
                minor = [[self.G[i][j] for j in sub] for i in sub]
                if _int_det(minor) < 0:
                    return False
        return True

    def to_json_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "doubled_gram": [list(r) for r in self.G]}


def lambda_ab_target(lam: int, a: int, b: int) -> GramTarget:
    """The correlated-triple Gram matrix: diag lam, dots a = x.y, b = y.z,
    and x.z = lam + a - b (forced by the triple-sum constraint)."""
    plain = [[lam, a, lam + a - b], [a, lam, b], [lam + a - b, b, lam]]
    return GramTarget.from_plain(4, plain)


@dataclass(frozen=True)
class SolutionCount:
    target: GramTarget
    count: int
    odd_diagonal: bool = False
    psd: bool = True
    enumerated: Optional[list] = field(default=None)


def count_gram_solutions(
    target: GramTarget,
    want_enumeration: bool = False,
    budget: int = 10**8,
    enumeration_cap: int = 10**4,
) -> SolutionCount:
    """Exact number of integer m x n matrices L with 2 L^T L = G."""
    if target.has_odd_diagonal():
        # 2|x|^2 is even: an odd doubled diagonal entry is unsatisfiable.
        return SolutionCount(target=target, count=0, odd_diagonal=True)
    if not target.is_psd():
        return SolutionCount(target=target, count=0, psd=False)
    n, m = target.n, target.m
    order = sorted(range(n), key=lambda j: -target.G[j][j])
    Gp = [[target.G[order[i]][order[j]] for j in range(n)] for i in range(n)]
    shells = {}
    for j in range(n):
        norm = Gp[j][j] // 2
        if norm not in shells:
            shells[norm] = enumerate_shell(m, norm).points
    work = 0

    def candidates(j: int, prev: list[np.ndarray]) -> np.ndarray:
        pts = shells[Gp[j][j] // 2]
        mask = np.ones(pts.shape[0], dtype=bool)
        for i, col in enumerate(prev):
            mask &= (2 * (pts @ col)) == Gp[i][j]
        return pts[mask]

    solutions: list[np.ndarray] = []
    inverse = [0] * n
    for pos, j in enumerate(order):
        inverse[j] = pos

    def descend(j: int, prev: list[np.ndarray]) -> int:
        nonlocal work
        cand = candidates(j, prev)
        work += int(cand.shape[0]) + 1
        if work > budget:
            raise BudgetExceeded(f"gram backtracking exceeded budget {budget}")
        if j == n - 1:
            if want_enumeration:
                for row in cand:
                    cols = prev + [row]
                    L = np.stack([cols[inverse[k]] for k in range(n)], axis=1)
                    if len(solutions) < enumeration_cap:
                        solutions.append(L)
            return int(cand.shape[0])
        total = 0
        for row in cand:
            total += descend(j + 1, prev + [row])
        return total

    count = descend(0, [])
    check_int128(count, "gram solution count")
    if want_enumeration and count > enumeration_cap:
        raise BudgetExceeded(
            f"enumeration of {count} solutions exceeds cap {enumeration_cap}"
        )
    return SolutionCount(
        target=target,
        count=count,
        enumerated=solutions if want_enumeration else None,
    )


def _triple_sum_4d(lam: int, singular_only: bool, budget: int) -> int:
    """Triples (x, y, z) in F_{4,lam}^3 with -x.y + x.z + y.z = lam.

    The (a, b) grid is bypassed: summing the per-pair counts over realized
    dot products equals the grid sum.  The outer x runs over canonical
    representatives only (the constraint set is equivariant under signed
    permutations applied to all three points).
    """
    shell = enumerate_shell(4, lam)
    pts = shell.points
    size = pts.shape[0]
    if size == 0:
        return 0
    if size * size > budget:
        raise BudgetExceeded(f"pair table {size}^2 exceeds budget {budget}")
    canon = canonicalize(pts)
    reps_arr, first_idx = np.unique(canon, axis=0, return_index=True)
    weights = orbit_sizes(reps_arr)
    reps = pts[first_idx]
    dots = pts @ pts.T  # y . z table, shared across representatives
    total = 0
    for x, w in zip(reps, weights.tolist()):
        d = pts @ x
        cond = (dots + (d[None, :] - d[:, None])) == lam  # -x.y + x.z + y.z
        if singular_only:
            a = d[:, None]  # x.y per row y
            sing = (a == dots) | (dots == lam) | (a == -lam)
            cond &= sing
        total += w * int(np.count_nonzero(cond))
    return check_int128(total, "triple sum")


def sum_N_ab(lam: int, budget: int = 10**9) -> int:
    """Sum over |a|,|b| <= lam of the correlated-triple counts N_{a,b,lam}."""
    if lam < 0:
        raise BadSpec("lambda must be non-negative")
    return _triple_sum_4d(lam, singular_only=False, budget=budget)


def singular_case_sum_4d(lam: int, budget: int = 10**9) -> int:
    """Partial sum of N_{a,b,lam} over the singular set {a=b, b=lam, a=-lam}."""
    if lam < 0:
        raise BadSpec("lambda must be non-negative")
    return _triple_sum_4d(lam, singular_only=True, budget=budget)


def count_quadruples_5d(lam: int, budget: int = 10**9) -> int:
    """#{(u, v, x, y) : u-x, v-x, u-y, v-y in F_{5,lam}, x != y with x, y on the shell}.

    Difference-histogram identity: for fixed (x, y) there are c(y-x) choices
    for each of u and v, and the number of shell pairs at difference w is
    c(w) itself, giving sum over w != 0 of c(w)^3.
    """
    shell = enumerate_shell(5, lam)
    if shell.size == 0:
        return 0
    hist = rep_histogram(shell_point_set(shell))
    # Shells are symmetric, so difference counts equal sum counts.
    return hist.power_sum(3, skip_zero_sum=True)


def degenerate_breakdown_5d(lam: int, budget: int = 10**7) -> dict[str, int]:
    """Quadruple counts of count_quadruples_5d split by rank of [u, v, x, y].

    Rank <= 2 quadruples are reported together under "rank2" (rank 1 occurs,
    e.g. u = v = 0 with y = -x, and the rank-2 regime of the bounds covers it).
    """
    shell = enumerate_shell(5, lam)
    pts = shell.points
    size = pts.shape[0]
    buckets = {"rank2": 0, "rank3": 0, "rank4": 0}
    if size == 0:
        return buckets
    codec = KeyCodec.for_dimension(5, max(2 * int(np.abs(pts).max()), 1))
    table = KeyTable(codec, pts)
    canon = canonicalize(pts)
    reps_arr, first_idx = np.unique(canon, axis=0, return_index=True)
    weights = orbit_sizes(reps_arr)
    reps = pts[first_idx]
    work = 0
    for x, w in zip(reps, weights.tolist()):
        shifted = pts + x[None, :]  # candidate u = x + (shell point)
        for yi in range(size):
            y = pts[yi]
            if np.array_equal(y, x):
                continue
            mask = table.contains_points(shifted - y[None, :])
            U = shifted[mask]
            c = int(U.shape[0])
            if c == 0:
                continue
            work += c * c
            if work > budget:
                raise BudgetExceeded(f"rank breakdown exceeded budget {budget}")
            for ui in range(c):
                for vi in range(c):
                    rank = integer_rank([U[ui].tolist(), U[vi].tolist(), x.tolist(), y.tolist()])
                    key = f"rank{max(rank, 2)}"
                    buckets[key] += w
    return buckets
