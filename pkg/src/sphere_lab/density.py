"""Finite-field quadric counts, truncated p-adic densities, and mass checks.

Counting L in M_{m,n}(Z/p^r) with 2 L^T L = G (doubled congruences) is done
column by column.  Within a column, solutions are built by base-p lifting:
level 1 filters the full F_p^m grid; each later level solves a linear system
over F_p whose matrix depends only on (previous columns mod p, x mod p), so
elimination data is cached per class and right-hand sides are processed in
bulk with numpy.  The final column is counted without being enumerated.
Densities are exact rationals throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BadDimension, BadSpec, BudgetExceeded
from .gram import GramTarget, count_gram_solutions, lambda_ab_target

GOOD_PRIME_C0 = 10
DEFAULT_COUNT_BUDGET = 2 * 10**8
_GRID_LIMIT = 4 * 10**7
_CHUNK_ROWS = 2 * 10**6

# --- small number theory ----------------------------------------------------


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    for d in range(2, math.isqrt(q) + 1):
        if q % d == 0:
            return False
    return True


def primes_up_to(x: int) -> list[int]:
    if x < 2:
        return []
    sieve = np.ones(x + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(x) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return [int(q) for q in np.flatnonzero(sieve)]


def legendre(a: int, p: int) -> int:
    """(a/p) by Euler's criterion; requires p an odd prime."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def first_nonresidue(p: int) -> int:
    for q in range(2, p):
        if legendre(q, p) == -1:
            return q
    raise BadSpec(f"{p} has no quadratic non-residue (is it an odd prime?)")


def valuation(x: int, p: int) -> int:
    if x == 0:
        raise BadSpec("valuation of 0 is undefined")
    if p < 2:
        raise BadSpec("valuation base must be >= 2")
    v = 0
    x = abs(x)
    while x % p == 0:
        x //= p
        v += 1
    return v


def _check_odd_prime(p: int) -> None:
    if p == 2 or not is_prime(p):
        raise BadSpec(f"p must be an odd prime, got {p}")


# --- counts of diagonal quadrics over F_p -----------------------------------


@dataclass(frozen=True)
class QuadricCountSpec:
    """Count x in F_p^l with d*x_1^2 + x_2^2 + ... + x_l^2 = xi."""

    p: int
    l: int
    d: int
    xi: int

    def __post_init__(self):
        _check_odd_prime(self.p)
        if self.l < 1:
            raise BadSpec("quadric dimension l must be >= 1")
        if self.d % self.p == 0:
            raise BadSpec("determinant class d must be coprime to p")


def quadric_count_closed_form(spec: QuadricCountSpec) -> int:
    p, l = spec.p, spec.l
    chi = legendre((-1) ** (l // 2) * spec.d, p)
    xi_class = legendre(spec.xi, p)
    if l % 2 == 1:
        half = p ** ((l - 1) // 2)
        if xi_class == 0:
            return p ** (l - 1)
        return p ** (l - 1) + xi_class * half * chi
    half = p ** (l // 2 - 1)
    if xi_class == 0:
        return p ** (l - 1) + (p - 1) * half * chi
    return p ** (l - 1) - half * chi


def quadric_count_brute(spec: QuadricCountSpec, budget: int = 10**8) -> int:
    p, l = spec.p, spec.l
    if p**l > budget:
        raise BudgetExceeded(f"{p}^{l} grid exceeds budget {budget}")
    grid = _fp_grid(p, l)
    sq = (grid * grid) % p
    vals = (spec.d * sq[:, 0] + sq[:, 1:].sum(axis=1)) % p
    return int(np.count_nonzero(vals == spec.xi % p))


def _square_class(a: int, p: int) -> int:
    """Reduce a unit to its class representative: 1 or the first non-residue."""
    return 1 if legendre(a, p) == 1 else first_nonresidue(p)


def _chain_count(p: int, m: int, diag: Sequence[int]) -> int:
    """#{L in M_{m,len(diag)}(F_p) : L^T L = diag(values)}, values units mod p.

    Column j lies on a norm quadric inside the orthogonal complement of the
    previous columns; the complement's discriminant class is tracked exactly.
    """
    total = 1
    disc = 1
    l = m
    for a in diag:
        total *= quadric_count_closed_form(QuadricCountSpec(p=p, l=l, d=disc, xi=a))
        if total == 0:
            return 0
        disc = _square_class(disc * a, p)
        l -= 1
    return total


def orthogonal_chain_count(p: int, n: int, xi: int) -> int:
    """#{L in M_{n+1,n}(F_p) : L^T L = diag(xi, 1, ..., 1)}."""
    _check_odd_prime(p)
    if n < 1:
        raise BadSpec("need n >= 1 columns")
    if xi % p == 0:
        raise BadSpec("xi must be a unit mod p")
    return _chain_count(p, n + 1, [xi] + [1] * (n - 1))


def _diagonalize_mod_p(rows: Sequence[Sequence[int]], p: int) -> list[int]:
    """Diagonal of a congruence S^T A S = D over F_p (p odd), as a list of
    units, one per rank; a trailing zero block is dropped."""
    n = len(rows)
    M = [[x % p for x in row] for row in rows]

    def swap_sym(i: int, j: int) -> None:
        M[i], M[j] = M[j], M[i]
        for row in M:
            row[i], row[j] = row[j], row[i]

    diag: list[int] = []
    for k in range(n):
        if M[k][k] == 0:
            target = next((i for i in range(k + 1, n) if M[i][i]), None)
            if target is not None:
                swap_sym(k, target)
            else:
                found = next(
                    (
                        (i, j)
                        for i in range(k, n)
                        for j in range(i + 1, n)
                        if M[i][j]
                    ),
                    None,
                )
                if found is None:
                    break
                i, j = found
                # row_i += row_j then col_i += col_j puts 2*M[i][j] != 0 at (i,i)
                for c in range(n):
                    M[i][c] = (M[i][c] + M[j][c]) % p
                for r_ in range(n):
                    M[r_][i] = (M[r_][i] + M[r_][j]) % p
                if i != k:
                    swap_sym(k, i)
        a = M[k][k]
        if a == 0:
            break
        inv = pow(a, p - 2, p)
        for i in range(k + 1, n):
            f = M[i][k] * inv % p
            if f:
                for c in range(n):
                    M[i][c] = (M[i][c] - f * M[k][c]) % p
                for r_ in range(n):
                    M[r_][i] = (M[r_][i] - f * M[r_][k]) % p
        diag.append(a)
    return diag


# --- exact solution counts mod p^r ------------------------------------------

_GRID_CACHE: dict[tuple[int, int], np.ndarray] = {}
_NORM_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _fp_grid(p: int, m: int) -> np.ndarray:
    key = (p, m)
    if key not in _GRID_CACHE:
        if p**m > _GRID_LIMIT:
            raise BudgetExceeded(f"{p}^{m} grid too large")
        mesh = np.meshgrid(*([np.arange(p, dtype=np.int64)] * m), indexing="ij")
        _GRID_CACHE[key] = np.stack([g.ravel() for g in mesh], axis=1)
    return _GRID_CACHE[key]


def _fp_grid_norms(p: int, m: int) -> np.ndarray:
    key = (p, m)
    if key not in _NORM_CACHE:
        g = _fp_grid(p, m)
        _NORM_CACHE[key] = (g * g).sum(axis=1) % p
    return _NORM_CACHE[key]


class _LinearClass:
    """Cached elimination of A = [prev columns mod p; 2x mod p] over F_p."""

    __slots__ = ("rank", "pivots", "transform", "zero_rows", "kernel_combos", "lift_factor")

    def __init__(self, a_rows: list[list[int]], p: int, m: int):
        nr = len(a_rows)
        R = [[v % p for v in row] for row in a_rows]
        E = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
        rank = 0
        pivots: list[int] = []
        for col in range(m):
            piv = next((i for i in range(rank, nr) if R[i][col]), None)
            if piv is None:
                continue
            R[rank], R[piv] = R[piv], R[rank]
            E[rank], E[piv] = E[piv], E[rank]
            inv = pow(R[rank][col], p - 2, p)
            R[rank] = [v * inv % p for v in R[rank]]
            E[rank] = [v * inv % p for v in E[rank]]
            for i in range(nr):
                if i != rank and R[i][col]:
                    f = R[i][col]
                    R[i] = [(a - f * b) % p for a, b in zip(R[i], R[rank])]
                    E[i] = [(a - f * b) % p for a, b in zip(E[i], E[rank])]
            pivots.append(col)
            rank += 1
            if rank == nr:
                break
        self.rank = rank
        self.pivots = np.array(pivots, dtype=np.int64)
        self.transform = np.array(E[:rank], dtype=np.int64).reshape(rank, nr)
        self.zero_rows = np.array(E[rank:], dtype=np.int64).reshape(nr - rank, nr)
        free = [c for c in range(m) if c not in pivots]
        basis = []
        for fc in free:
            v = [0] * m
            v[fc] = 1
            for q, pc in enumerate(pivots):
                v[pc] = (-R[q][fc]) % p
            basis.append(v)
        if basis:
            coeffs = _fp_grid(p, len(basis))
            self.kernel_combos = coeffs @ np.array(basis, dtype=np.int64) % p
        else:
            self.kernel_combos = np.zeros((1, m), dtype=np.int64)
        self.lift_factor = p ** len(free)


class _ColumnCounter:
    """Enumerates or counts single-column solutions for batches of contexts."""

    def __init__(self, m: int, p: int, r: int, budget: int):
        self.m, self.p, self.r = m, p, r
        self.budget = budget
        self.work = 0
        self.grid = _fp_grid(p, m)
        self.grid_norms = _fp_grid_norms(p, m)
        self.level1_cache: dict[bytes, np.ndarray] = {}
        self.class_cache: dict[bytes, _LinearClass] = {}

    def _charge(self, amount: int) -> None:
        self.work += int(amount)
        if self.work > self.budget:
            raise BudgetExceeded(
                f"p-adic solution scan exceeded budget {self.budget}"
            )

    def _level1(self, prev_p: np.ndarray, targets: np.ndarray, s: int) -> np.ndarray:
        key = prev_p.tobytes()
        sols = self.level1_cache.get(key)
        if sols is None:
            mask = self.grid_norms == s % self.p
            if prev_p.shape[0]:
                dots = self.grid @ prev_p.T % self.p
                mask &= (dots == targets[None, :] % self.p).all(axis=1)
            sols = self.grid[mask]
            self.level1_cache[key] = sols
        return sols

    def _class_for(self, prev_p: np.ndarray, x_p: np.ndarray) -> _LinearClass:
        key = prev_p.tobytes() + x_p.tobytes()
        cls = self.class_cache.get(key)
        if cls is None:
            rows = [list(map(int, row)) for row in prev_p]
            rows.append([int(v) * 2 % self.p for v in x_p])
            cls = _LinearClass(rows, self.p, self.m)
            self.class_cache[key] = cls
        return cls

    def solve(
        self,
        prev: np.ndarray,
        targets: np.ndarray,
        s: int,
        count_only: bool,
    ):
        """prev: (F, j, m) full column values mod p^r.  Returns a total count
        (count_only) or (ctx_index, X) with X solution rows mod p^r."""
        p, r, m = self.p, self.r, self.m
        fcount, j, _ = prev.shape
        prev_p = prev % p
        if j:
            pows = p ** np.arange(j * m, dtype=np.int64)
            gkeys = prev_p.reshape(fcount, j * m) @ pows
        else:
            gkeys = np.zeros(fcount, dtype=np.int64)
        order = np.argsort(gkeys, kind="stable")
        bounds = np.flatnonzero(np.diff(gkeys[order])) + 1
        starts = np.concatenate(([0], bounds, [fcount]))

        total = 0
        out_ctx: list[np.ndarray] = []
        out_x: list[np.ndarray] = []
        for gi in range(len(starts) - 1):
            ctx_g = order[starts[gi] : starts[gi + 1]]
            if ctx_g.size == 0:
                continue
            g_prev = prev_p[ctx_g[0]]
            sols1 = self._level1(g_prev, targets, s)
            q1 = sols1.shape[0]
            if q1 == 0:
                continue
            if r == 1:
                if count_only:
                    total += ctx_g.size * q1
                else:
                    self._charge(ctx_g.size * q1)
                    out_ctx.append(np.repeat(ctx_g, q1))
                    out_x.append(np.tile(sols1, (ctx_g.size, 1)))
                continue
            st_ctx = np.repeat(ctx_g, q1)
            st_x = np.tile(sols1, (ctx_g.size, 1))
            st_cls = np.tile(np.arange(q1, dtype=np.int64), ctx_g.size)
            self._charge(st_ctx.size)
            for k in range(1, r):
                pk = p**k
                last = k == r - 1
                if st_ctx.size == 0:
                    break
                prev_vals = prev[st_ctx]
                dots = np.einsum("rm,rjm->rj", st_x, prev_vals)
                num = targets[None, :] - dots
                norm_num = s - (st_x * st_x).sum(axis=1)
                assert (num % pk == 0).all() and (norm_num % pk == 0).all()
                b = np.concatenate(
                    [num // pk % p, (norm_num // pk % p)[:, None]], axis=1
                )
                corder = np.argsort(st_cls, kind="stable")
                cbounds = np.flatnonzero(np.diff(st_cls[corder])) + 1
                cstarts = np.concatenate(([0], cbounds, [st_ctx.size]))
                nx_ctx: list[np.ndarray] = []
                nx_x: list[np.ndarray] = []
                nx_cls: list[np.ndarray] = []
                for ci in range(len(cstarts) - 1):
                    rows = corder[cstarts[ci] : cstarts[ci + 1]]
                    if rows.size == 0:
                        continue
                    cls_id = int(st_cls[rows[0]])
                    cls = self._class_for(g_prev, sols1[cls_id])
                    bc = b[rows]
                    if cls.zero_rows.size:
                        ok = (bc @ cls.zero_rows.T % p == 0).all(axis=1)
                        rows = rows[ok]
                        bc = bc[ok]
                    if rows.size == 0:
                        continue
                    if last and count_only:
                        total += rows.size * cls.lift_factor
                        continue
                    t0 = np.zeros((rows.size, m), dtype=np.int64)
                    if cls.rank:
                        t0[:, cls.pivots] = bc @ cls.transform.T % p
                    ts = (t0[:, None, :] + cls.kernel_combos[None, :, :]) % p
                    self._charge(rows.size * cls.lift_factor)
                    nx_x.append((st_x[rows][:, None, :] + pk * ts).reshape(-1, m))
                    nx_ctx.append(np.repeat(st_ctx[rows], cls.lift_factor))
                    nx_cls.append(np.repeat(st_cls[rows], cls.lift_factor))
                if last and count_only:
                    st_ctx = np.zeros(0, dtype=np.int64)
                    break
                if nx_ctx:
                    st_ctx = np.concatenate(nx_ctx)
                    st_x = np.concatenate(nx_x)
                    st_cls = np.concatenate(nx_cls)
                else:
                    st_ctx = np.zeros(0, dtype=np.int64)
                    st_x = np.zeros((0, m), dtype=np.int64)
                    st_cls = np.zeros(0, dtype=np.int64)
            if not count_only and st_ctx.size:
                out_ctx.append(st_ctx)
                out_x.append(st_x)
        if count_only:
            return total
        if out_ctx:
            return np.concatenate(out_ctx), np.concatenate(out_x)
        return np.zeros(0, dtype=np.int64), np.zeros((0, m), dtype=np.int64)


def count_mod_pr(
    target: GramTarget, p: int, r: int, budget: int = DEFAULT_COUNT_BUDGET
) -> int:
    """#{L in M_{m,n}(Z/p^r) : 2 L^T L == G (mod 2 p^r)}, exactly."""
    if not is_prime(p):
        raise BadSpec(f"p={p} is not prime")
    if r < 1:
        raise BadSpec("need r >= 1")
    m, n = target.m, target.n
    G = target.G
    if any(G[i][j] % 2 for i in range(n) for j in range(n)):
        return 0  # 2 L^T L is always even
    pr = p**r
    g = [[(G[i][j] // 2) % pr for j in range(n)] for i in range(n)]
    counter = _ColumnCounter(m, p, r, budget)

    def recurse(frontier: np.ndarray, j: int) -> int:
        targets = np.array([g[i][j] for i in range(j)], dtype=np.int64)
        s = g[j][j]
        if j == n - 1:
            return counter.solve(frontier, targets, s, count_only=True)
        ctx, xs = counter.solve(frontier, targets, s, count_only=False)
        if ctx.size == 0:
            return 0
        new = np.concatenate([frontier[ctx], xs[:, None, :]], axis=1)
        # column j+1 has j+2 congruences, so roughly p^(r*(m-j-2)) solutions
        # per context; chunk so one batch stays near _CHUNK_ROWS states
        est = p ** max(r * (m - j - 2), 0)
        chunk = max(1, _CHUNK_ROWS // max(est, 1))
        return sum(
            recurse(new[i : i + chunk], j + 1) for i in range(0, new.shape[0], chunk)
        )

    return recurse(np.zeros((1, 0, m), dtype=np.int64), 0)


def count_mod_pr_brute(
    target: GramTarget, p: int, r: int, budget: int = 4 * 10**7
) -> int:
    """Literal loop over all of M_{m,n}(Z/p^r); cross-check use only."""
    m, n = target.m, target.n
    pr = p**r
    if pr ** (m * n) > budget:
        raise BudgetExceeded("brute force grid too large")
    G = target.G
    total = 0
    cols = _fp_grid(pr, m)  # reused as the (Z/p^r)^m grid
    for combo in itertools.product(range(cols.shape[0]), repeat=n):
        L = cols[list(combo)]
        ok = True
        for i in range(n):
            for jj in range(i, n):
                if (2 * int(L[i] @ L[jj]) - G[i][jj]) % (2 * pr):
                    ok = False
                    break
            if not ok:
                break
        total += ok
    return total


# --- local densities --------------------------------------------------------


def normalization_exponent(m: int, n: int) -> int:
    return m * n - n * (n + 1) // 2


def _det_plain_int(target: GramTarget) -> Fraction:
    return target.det_plain()


def is_good_prime(target: GramTarget, p: int) -> bool:
    if p == 2 or not is_prime(p):
        return False
    d = _det_plain_int(target)
    if d == 0:
        return False
    return d.numerator % p != 0


def good_prime_count_mod_p(target: GramTarget, p: int) -> int:
    """Closed-form count of L in M_{m,n}(F_p) with L^T L = G/2 via symmetric
    diagonalization and the quadric chain; requires a good odd prime."""
    if not is_good_prime(target, p):
        raise BadSpec(f"p={p} is not a good prime for this target")
    n, m = target.n, target.m
    G = target.G
    if any(G[i][j] % 2 for i in range(n) for j in range(n)):
        return 0
    half = pow(2, p - 2, p)  # inverse of 2 mod p
    rows = [[G[i][j] * half % p for j in range(n)] for i in range(n)]
    diag = _diagonalize_mod_p(rows, p)
    if len(diag) != n:
        raise BadSpec("target is singular mod p despite good-prime check")
    return _chain_count(p, m, diag)


def default_r_max(p: int) -> int:
    return 3 if p in (2, 3) else 2


@dataclass(frozen=True)
class DensityEstimate:
    target: GramTarget
    p: int
    counts: tuple[tuple[int, int], ...]
    normalized: tuple[tuple[int, Fraction], ...]
    stabilized: bool
    good_prime: bool
    nu: Optional[Fraction]

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "m": self.target.m,
            "n": self.target.n,
            "doubled_gram": [list(r) for r in self.target.G],
            "counts": [[r, c] for r, c in self.counts],
            "normalized": [
                [r, f"{v.numerator}/{v.denominator}"] for r, v in self.normalized
            ],
            "stabilized": self.stabilized,
        }


def local_density(
    target: GramTarget,
    p: int,
    r_max: Optional[int] = None,
    budget: int = DEFAULT_COUNT_BUDGET,
) -> DensityEstimate:
    """Truncated densities nu_p^(r) = count / p^(r*(mn - n(n+1)/2)).

    Good odd primes use the closed-form F_p count plus the smooth-lifting
    identity (each nonsingular mod-p solution has exactly
    p^((r-1)*(mn - n(n+1)/2)) lifts), so they stabilize at r = 1.  Bad primes
    are counted directly; if the budget runs out mid-sequence the series is
    truncated rather than discarded (BudgetExceeded only if r=1 is infeasible).
    """
    if not is_prime(p):
        raise BadSpec(f"p={p} is not prime")
    if r_max is None:
        r_max = default_r_max(p)
    if r_max < 1:
        raise BadSpec("need r_max >= 1")
    e = normalization_exponent(target.m, target.n)
    good = is_good_prime(target, p)
    counts: list[tuple[int, int]] = []
    if good:
        c1 = good_prime_count_mod_p(target, p)
        for r in range(1, r_max + 1):
            counts.append((r, c1 * p ** ((r - 1) * e)))
    else:
        for r in range(1, r_max + 1):
            try:
                counts.append((r, count_mod_pr(target, p, r, budget=budget)))
            except BudgetExceeded:
                if r == 1:
                    raise
                break
    normalized = tuple((r, Fraction(c, p ** (r * e))) for r, c in counts)
    if good:
        stabilized = True
    else:
        stabilized = len(normalized) >= 2 and normalized[-1][1] == normalized[-2][1]
    nu = normalized[-1][1] if (good or stabilized) else None
    return DensityEstimate(
        target=target,
        p=p,
        counts=tuple(counts),
        normalized=normalized,
        stabilized=stabilized,
        good_prime=good,
        nu=nu,
    )


@dataclass(frozen=True)
class GoodPrimeCheck:
    p: int
    nu: Fraction
    margin: Fraction
    bound: Fraction
    c0: int
    passed: bool


def good_prime_bound_check(target: GramTarget, p: int) -> GoodPrimeCheck:
    """|nu_p - 1| <= C0 / p^2 with C0 = 10; precondition: good odd prime."""
    if not is_good_prime(target, p):
        raise BadSpec(f"p={p} is not a good odd prime for this target")
    e = normalization_exponent(target.m, target.n)
    nu = Fraction(good_prime_count_mod_p(target, p), p**e)
    margin = abs(nu - 1)
    bound = Fraction(GOOD_PRIME_C0, p * p)
    return GoodPrimeCheck(
        p=p, nu=nu, margin=margin, bound=bound, c0=GOOD_PRIME_C0,
        passed=margin <= bound,
    )


@dataclass(frozen=True)
class BadPrimeReport:
    lam: int
    a: int
    b: int
    p: int
    det: int
    val_det: int
    val_lam2_a2: Optional[int]
    val_lam2_b2: Optional[int]
    estimate: DensityEstimate
    rhs: Optional[Fraction]
    implied_constant: Optional[float]


def bad_prime_report(
    lam: int,
    a: int,
    b: int,
    p: int,
    r_max: Optional[int] = None,
    budget: int = DEFAULT_COUNT_BUDGET,
) -> BadPrimeReport:
    """Truncated density sequence at a bad prime of the three-column target,
    against the bound o_p(det)^2 * p^(o_p(gcd(lam^2-a^2, lam^2-b^2)))."""
    if a == b or lam == -a or lam == b:
        raise BadSpec("need a nonsingular target: a != b and lam not in {-a, b}")
    target = lambda_ab_target(lam, a, b)
    det = 2 * (lam - b) * (lam + a) * (b - a)
    if not is_prime(p):
        raise BadSpec(f"p={p} is not prime")
    if det % p != 0:
        raise BadSpec(f"p={p} does not divide det={det}; not a bad prime")
    est = local_density(target, p, r_max=r_max, budget=budget)
    va = lam * lam - a * a
    vb = lam * lam - b * b
    g = math.gcd(va, vb)
    vd = valuation(det, p)
    rhs = Fraction(vd * vd * p ** valuation(g, p)) if g else None
    last_nu = est.normalized[-1][1]
    implied = float(last_nu / rhs) if rhs else None
    return BadPrimeReport(
        lam=lam, a=a, b=b, p=p, det=det,
        val_det=vd,
        val_lam2_a2=valuation(va, p) if va else None,
        val_lam2_b2=valuation(vb, p) if vb else None,
        estimate=est, rhs=rhs, implied_constant=implied,
    )


# --- mass consistency -------------------------------------------------------


@dataclass(frozen=True)
class MassRow:
    label: str
    target: GramTarget
    det: int
    global_count: int
    bad_primes: tuple[int, ...]
    product_nu: Fraction
    ratio: Fraction
    stable: bool
    unstable_primes: tuple[int, ...]


@dataclass(frozen=True)
class MassReport:
    m: int
    n: int
    prime_cutoff: int
    assumption: str
    rows: tuple[MassRow, ...]
    median_ratio: Optional[Fraction]
    max_rel_deviation: Optional[Fraction]
    excluded: tuple[str, ...]
    tail_bound: float

    def to_csv_rows(self) -> list[dict]:
        return [
            {
                "target_id": row.label,
                "det": row.det,
                "A": row.global_count,
                "product_nu": f"{row.product_nu.numerator}/{row.product_nu.denominator}",
                "ratio_num": row.ratio.numerator,
                "ratio_den": row.ratio.denominator,
            }
            for row in self.rows
        ]


def positive_definite_targets(lam: int) -> list[tuple[str, GramTarget]]:
    """All positive-definite three-column targets at this scale, a < b."""
    out = []
    for a in range(-lam + 1, lam):
        for b in range(a + 1, lam):
            t = lambda_ab_target(lam, a, b)
            if t.is_psd() and t.det_plain() > 0:
                out.append((f"a{a}_b{b}", t))
    return out


def _median_fraction(values: list[Fraction]) -> Fraction:
    vals = sorted(values)
    mid = len(vals) // 2
    if len(vals) % 2:
        return vals[mid]
    return (vals[mid - 1] + vals[mid]) / 2


def mass_consistency(
    m: int,
    sample: Optional[Sequence[tuple[str, GramTarget]]] = None,
    prime_cutoff: int = 100,
    r_max: Optional[dict[int, int]] = None,
    budget: int = DEFAULT_COUNT_BUDGET,
) -> MassReport:
    """Compare global representation counts A(G) against
    det^((m-n-1)/2) * prod_{p <= cutoff} nu_p for n = m-1 (the determinant
    exponent is then zero).  Assumes a single-class genus, so the ratio
    should be a constant across targets; targets whose bad-prime series did
    not stabilize within budget are excluded from the spread statistics.
    """
    if m not in (4, 5):
        raise BadDimension("mass check supports m in {4, 5}")
    n = m - 1
    if sample is None:
        if m != 4:
            raise BadSpec("an explicit sample is required for m=5")
        sample = positive_definite_targets(5)
    r_schedule = dict(r_max or {})
    rows: list[MassRow] = []
    for label, target in sample:
        if target.m != m or target.n != n:
            raise BadSpec(f"target {label} has shape {target.m}x{target.n}")
        det = target.det_plain()
        if det <= 0:
            raise BadSpec(f"target {label} is not positive definite")
        if det.denominator != 1:
            raise BadSpec(f"target {label} has non-integral determinant")
        det_i = det.numerator
        count = count_gram_solutions(target).count
        bad = [p for p in primes_up_to(prime_cutoff) if p == 2 or det_i % p == 0]
        good = [p for p in primes_up_to(prime_cutoff) if p not in bad]
        product = Fraction(1)
        unstable: list[int] = []
        for p in good:
            e = normalization_exponent(m, n)
            product *= Fraction(good_prime_count_mod_p(target, p), p**e)
        for p in bad:
            est = local_density(
                target, p, r_max=r_schedule.get(p, default_r_max(p)), budget=budget
            )
            if est.stabilized:
                product *= est.nu
            else:
                product *= est.normalized[-1][1]
                unstable.append(p)
        ratio = Fraction(count) / product if product else Fraction(0)
        rows.append(
            MassRow(
                label=label, target=target, det=det_i, global_count=count,
                bad_primes=tuple(bad), product_nu=product, ratio=ratio,
                stable=not unstable, unstable_primes=tuple(unstable),
            )
        )
    stable_ratios = [r.ratio for r in rows if r.stable and r.ratio > 0]
    median = _median_fraction(stable_ratios) if stable_ratios else None
    spread = None
    if median:
        spread = max(abs(r / median - 1) for r in stable_ratios)
    tail = 1.0
    for p in primes_up_to(10**5):
        if p > prime_cutoff:
            tail *= 1.0 + GOOD_PRIME_C0 / (p * p)
    return MassReport(
        m=m, n=n, prime_cutoff=prime_cutoff,
        assumption="single-class genus: ratios should agree across targets",
        rows=tuple(rows), median_ratio=median, max_rel_deviation=spread,
        excluded=tuple(r.label for r in rows if not r.stable),
        tail_bound=tail,
    )


# --- gcd sums ---------------------------------------------------------------


def gcd_sum(lam: int, budget_lam: int = 5000) -> int:
    """Divisor-truncated gcd mass: sum over |a|,|b| <= lam of
    sum_{d <= lam, d | lam^2-a^2, d | lam^2-b^2} phi(d).

    Each pair contributes gcd(lam^2-a^2, lam^2-b^2) whenever that gcd is
    <= lam; larger common factors are truncated at d = lam.  Every d divides
    0, so the degenerate terms a = +-lam and a = +-b stay O(lam^{1+eps})
    instead of contributing a spurious lam^3 bulk.  Computed in the
    aggregated form sum_d phi(d) * c(d)^2 with
    c(d) = #{|a| <= lam : d | lam^2 - a^2}."""
    if lam < 0:
        raise BadSpec("scale must be non-negative")
    if lam > budget_lam:
        raise BudgetExceeded(f"lam={lam} exceeds budget {budget_lam}")
    if lam == 0:
        return 0
    a = np.arange(-lam, lam + 1, dtype=np.int64)
    vals = lam * lam - a * a
    # totient sieve
    phi = np.arange(lam + 1, dtype=np.int64)
    for p in range(2, lam + 1):
        if phi[p] == p:  # p prime
            phi[p::p] -= phi[p::p] // p
    d = np.arange(1, lam + 1, dtype=np.int64)
    total = 0
    step = 512
    for i in range(0, d.size, step):
        block = d[i : i + step]
        c = (vals[None, :] % block[:, None] == 0).sum(axis=1, dtype=np.int64)
        total += int((phi[block] * c * c).sum())
    return total
