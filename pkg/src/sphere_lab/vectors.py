"""Integer-vector utilities: packed keys, membership tables, symmetry orbits.

Points live in Z^n as int64 numpy rows.  A packed key maps each point to a
single int64 by writing offset coordinates into fixed-width bit lanes.  Lane
widths are chosen so that key(x) + key(y) - key(0) == key(x + y) whenever all
coordinates of x, y, x+y are within the declared bound: this lets vectorised
code form keys of pairwise sums without materialising the sum vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArithmeticOverflow, BadDimension

# Signed permutations of coordinates form a group of order 2^n * n!.
FULL_SYMMETRY_ORDER = {n: (2**n) * math.factorial(n) for n in range(1, 9)}


def lane_bits(n: int) -> int:
    """Bits per coordinate lane; n lanes plus one sign/carry guard fit in 63."""
    if not 1 <= n <= 8:
        raise BadDimension(f"dimension {n} outside supported range [1, 8]")
    return min(16, 62 // n)


def coord_bound(n: int) -> int:
    # Adding two in-bound keys must not carry across lanes: each offset lane
    # holds values < 2^(bits-1), so sums stay < 2^bits.
    return 2 ** (lane_bits(n) - 2) - 1


@dataclass(frozen=True)
class KeyCodec:
    """Packs int64 points of dimension n with |coord| <= bound into int64 keys."""

    n: int
    bits: int
    bound: int

    @classmethod
    def for_dimension(cls, n: int, bound: int) -> "KeyCodec":
        bits = lane_bits(n)
        limit = coord_bound(n)
        if bound > limit:
            raise ArithmeticOverflow(
                f"coordinate bound {bound} exceeds packable limit {limit} in dimension {n}"
            )
        return cls(n=n, bits=bits, bound=bound)

    @property
    def offset(self) -> int:
        return 2 ** (self.bits - 2)

    @property
    def zero_key(self) -> int:
        return int(self.pack(np.zeros((1, self.n), dtype=np.int64))[0])

    def pack(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.int64)
        if points.ndim == 1:
            points = points[None, :]
        if points.shape[1] != self.n:
            raise BadDimension(f"expected {self.n} columns, got {points.shape[1]}")
        keys = np.zeros(points.shape[0], dtype=np.int64)
        for i in range(self.n):
            keys += (points[:, i] + self.offset) << (self.bits * i)
        return keys

    def unpack(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        out = np.empty((keys.shape[0], self.n), dtype=np.int64)
        mask = (1 << self.bits) - 1
        for i in range(self.n):
            out[:, i] = ((keys >> (self.bits * i)) & mask) - self.offset
        return out


class KeyTable:
    """Sorted-key membership structure over a fixed point set."""

    def __init__(self, codec: KeyCodec, points: np.ndarray):
        self.codec = codec
        self.points = np.asarray(points, dtype=np.int64)
        self.sorted_keys = np.sort(codec.pack(self.points))

    def __len__(self) -> int:
        return int(self.sorted_keys.shape[0])

    def contains_keys(self, keys: np.ndarray) -> np.ndarray:
        """Boolean membership for an array of packed keys."""
        pos = np.searchsorted(self.sorted_keys, keys)
        pos_c = np.minimum(pos, len(self.sorted_keys) - 1)
        return self.sorted_keys[pos_c] == keys

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        return self.contains_keys(self.codec.pack(points))


def canonicalize(points: np.ndarray) -> np.ndarray:
    """Orbit representative under signed permutations: |coords| sorted ascending."""
    points = np.asarray(points, dtype=np.int64)
    if points.ndim == 1:
        points = points[None, :]
    return np.sort(np.abs(points), axis=1)


def orbit_sizes(canonical: np.ndarray) -> np.ndarray:
    """Orbit size of each canonical row under the signed-permutation group.

    A pattern with k nonzero entries and multiplicities m_1, ..., m_j among
    its distinct values has orbit 2^k * n! / prod(m_i!).
    """
    canonical = np.asarray(canonical, dtype=np.int64)
    n = canonical.shape[1]
    nonzero = (canonical != 0).sum(axis=1)
    sizes = (2 ** nonzero.astype(np.int64)) * math.factorial(n)
    # Divide out repeated-value multiplicities; rows are sorted so equal
    # values are adjacent.
    div = np.ones(canonical.shape[0], dtype=np.int64)
    run = np.ones(canonical.shape[0], dtype=np.int64)
    for i in range(1, n):
        same = canonical[:, i] == canonical[:, i - 1]
        run = np.where(same, run + 1, 1)
        div *= np.where(same, run, 1)
    return sizes // div


def integer_rank(rows) -> int:
    """Rank of an integer matrix, exact (fraction-free Gaussian elimination)."""
    mat = [[int(x) for x in row] for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    col = 0
    while rank < len(mat) and col < ncols:
        pivot = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            col += 1
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        p = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            q = mat[r][col]
            if q != 0:
                g = math.gcd(p, q)
                mat[r] = [
                    (p // g) * mat[r][c] - (q // g) * mat[rank][c] for c in range(ncols)
                ]
        rank += 1
        col += 1
    return rank


def check_int128(value: int, what: str) -> int:
    if not -(2**127) <= value < 2**127:
        raise ArithmeticOverflow(f"{what} exceeds 128-bit range")
    return value
