"""Enumeration and persistence of integer points on spheres and paraboloid slabs.

Shells F_{n,lambda} = {x in Z^n : sum x_i^2 = lambda} are produced by
recursive descent over canonical patterns (0 <= x_1 <= ... <= x_n) followed by
signed-permutation orbit expansion, so enumeration cost is proportional to
output size.  All arithmetic is exact.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator, Optional

import numpy as np

from .errors import (
    BadDimension,
    BadSpec,
    BudgetExceeded,
    CacheMiss,
    FormatCorrupt,
    IoFailure,
)

DEFAULT_POINT_BUDGET = 10**7

MIN_DIM = 2
MAX_DIM = 8


def scale_parameter(lam: int) -> int:
    """N = floor(sqrt(lambda)) + 1, the scale every bound is stated in."""
    return math.isqrt(lam) + 1


def _check_shell_args(n: int, lam: int) -> None:
    if not isinstance(n, int) or not MIN_DIM <= n <= MAX_DIM:
        raise BadDimension(f"dimension must be an integer in [{MIN_DIM}, {MAX_DIM}], got {n!r}")
    if not isinstance(lam, int) or lam < 0:
        raise BadSpec(f"lambda must be a non-negative integer, got {lam!r}")


def _canonical_patterns(n: int, lam: int) -> Iterator[tuple[int, ...]]:
    """Nondecreasing tuples of non-negative ints with squared norm lam."""

    def descend(prefix: list[int], slots: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if slots == 0:
            if remaining == 0:
                yield tuple(prefix)
            return
        if slots == 1:
            root = math.isqrt(remaining)
            if root * root == remaining and root >= (prefix[-1] if prefix else 0):
                yield tuple(prefix + [root])
            return
        lo = prefix[-1] if prefix else 0
        # remaining slots-1 values are each >= v, so slots*v^2 <= remaining.
        v = lo
        while slots * v * v <= remaining:
            yield from descend(prefix + [v], slots - 1, remaining - v * v)
            v += 1

    yield from descend([], n, lam)


def _pattern_orbit_size(pattern: tuple[int, ...]) -> int:
    n = len(pattern)
    k = sum(1 for x in pattern if x != 0)
    size = (2**k) * math.factorial(n)
    mults: dict[int, int] = {}
    for x in pattern:
        mults[x] = mults.get(x, 0) + 1
    for m in mults.values():
        size //= math.factorial(m)
    return size


def _expand_pattern(pattern: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All signed coordinate permutations of a canonical pattern, de-duplicated."""
    for perm in set(permutations(pattern)):
        # Sign choices on nonzero coordinates only.
        nz = [i for i, x in enumerate(perm) if x != 0]
        for mask in range(2 ** len(nz)):
            point = list(perm)
            for bit, i in enumerate(nz):
                if mask >> bit & 1:
                    point[i] = -point[i]
            yield tuple(point)


@dataclass(frozen=True)
class Shell:
    """All integer points of squared norm lam in dimension n, sorted."""

    n: int
    lam: int
    points: np.ndarray  # (size, n) int64, lexicographically ascending rows

    @property
    def N(self) -> int:
        return scale_parameter(self.lam)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def as_tuples(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in self.points]


@dataclass(frozen=True)
class PointSet:
    """A duplicate-free point collection with provenance tag."""

    n: int
    points: np.ndarray
    origin_tag: str = "custom"  # shell-subset | paraboloid | custom
    lam: Optional[int] = field(default=None)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


def _sort_rows(points: np.ndarray) -> np.ndarray:
    if points.shape[0] == 0:
        return points
    order = np.lexsort(points.T[::-1])
    return points[order]


def shell_size(n: int, lam: int) -> int:
    """|F_{n,lam}| without materializing points (orbit-size sum over patterns)."""
    _check_shell_args(n, lam)
    return sum(_pattern_orbit_size(p) for p in _canonical_patterns(n, lam))


def enumerate_shell(n: int, lam: int, budget_points: int = DEFAULT_POINT_BUDGET) -> Shell:
    _check_shell_args(n, lam)
    total = shell_size(n, lam)
    if total > budget_points:
        raise BudgetExceeded(f"shell (n={n}, lambda={lam}) has {total} points > budget {budget_points}")
    rows: list[tuple[int, ...]] = []
    for pattern in _canonical_patterns(n, lam):
        rows.extend(_expand_pattern(pattern))
    points = np.array(rows, dtype=np.int64).reshape(len(rows), n)
    points = _sort_rows(points)
    assert points.shape[0] == total
    return Shell(n=n, lam=lam, points=points)


def shell_point_set(shell: Shell) -> PointSet:
    return PointSet(n=shell.n, points=shell.points, origin_tag="shell-subset", lam=shell.lam)


def enumerate_paraboloid(N: int, budget_points: int = DEFAULT_POINT_BUDGET) -> PointSet:
    """Slab {(x1, x2, x3, x1^2+x2^2+x3^2) : |xi| <= N} in Z^4, sorted."""
    if not isinstance(N, int) or N < 1:
        raise BadSpec(f"N must be a positive integer, got {N!r}")
    total = (2 * N + 1) ** 3
    if total > budget_points:
        raise BudgetExceeded(f"paraboloid slab N={N} has {total} points > budget {budget_points}")
    side = np.arange(-N, N + 1, dtype=np.int64)
    g1, g2, g3 = np.meshgrid(side, side, side, indexing="ij")
    points = np.empty((total, 4), dtype=np.int64)
    points[:, 0] = g1.ravel()
    points[:, 1] = g2.ravel()
    points[:, 2] = g3.ravel()
    points[:, 3] = points[:, 0] ** 2 + points[:, 1] ** 2 + points[:, 2] ** 2
    return PointSet(n=4, points=_sort_rows(points), origin_tag="paraboloid")


# --- persistence -----------------------------------------------------------

CACHE_ENV = "SPHERE_LAB_CACHE"
DEFAULT_CACHE_DIR = ".sphere_lab_cache"


def cache_directory(explicit: Optional[str] = None) -> str:
    if explicit:
        return explicit
    return os.environ.get(CACHE_ENV) or DEFAULT_CACHE_DIR


def _shell_path(directory: str, n: int, lam: int) -> str:
    return os.path.join(directory, "shells", f"n{n}_lambda{lam}.csv")


def save_shell(shell: Shell, directory: Optional[str] = None) -> str:
    path = _shell_path(cache_directory(directory), shell.n, shell.lam)
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        lines = [f"# n={shell.n} lambda={shell.lam} count={shell.size}"]
        lines.extend(",".join(str(int(x)) for x in row) for row in shell.points)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write shell cache file {path}: {exc}") from exc
    return path


def load_shell(n: int, lam: int, directory: Optional[str] = None) -> Shell:
    _check_shell_args(n, lam)
    path = _shell_path(cache_directory(directory), n, lam)
    if not os.path.exists(path):
        raise CacheMiss(f"no cached shell at {path}")
    try:
        with open(path, "r", encoding="ascii") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read shell cache file {path}: {exc}") from exc
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("#"):
        raise FormatCorrupt(f"{path}: missing header line")
    try:
        fields = dict(item.split("=") for item in lines[0].lstrip("# ").split())
        hn, hlam, count = int(fields["n"]), int(fields["lambda"]), int(fields["count"])
    except (ValueError, KeyError) as exc:
        raise FormatCorrupt(f"{path}: malformed header {lines[0]!r}") from exc
    if (hn, hlam) != (n, lam):
        raise FormatCorrupt(f"{path}: header ({hn}, {hlam}) does not match requested ({n}, {lam})")
    body = lines[1:]
    if len(body) != count:
        raise FormatCorrupt(f"{path}: header count {count} but {len(body)} data rows")
    try:
        points = np.array(
            [[int(tok) for tok in line.split(",")] for line in body], dtype=np.int64
        ).reshape(count, n)
    except ValueError as exc:
        raise FormatCorrupt(f"{path}: unparseable data row") from exc
    if count and not np.all(np.sum(points * points, axis=1) == lam):
        raise FormatCorrupt(f"{path}: row with squared norm != {lam}")
    if not np.array_equal(points, _sort_rows(points.copy())):
        raise FormatCorrupt(f"{path}: rows not in lexicographic order")
    return Shell(n=n, lam=lam, points=points)


def load_or_enumerate(n: int, lam: int, directory: Optional[str] = None,
                      budget_points: int = DEFAULT_POINT_BUDGET, save: bool = True) -> Shell:
    try:
        return load_shell(n, lam, directory)
    except CacheMiss:
        shell = enumerate_shell(n, lam, budget_points=budget_points)
        if save:
            try:
                save_shell(shell, directory)
            except IoFailure:
                pass  # cache is best-effort on the read-through path
        return shell
