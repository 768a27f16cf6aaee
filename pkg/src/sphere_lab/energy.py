"""Exact additive-energy computation via representation-count histograms.

The workhorse is an orbit-reduced pair-sum histogram: when a point set is
closed under signed coordinate permutations (full shells) or under signed
permutations of a coordinate prefix (paraboloid slabs), r(v) is constant on
symmetry orbits of v, so the outer pair loop only needs one representative
per orbit, carrying the orbit size as a weight.  This turns the O(|P|^2)
histogram into O(reps * |P|) with exact integer results throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadDimension, BadSpec, BudgetExceeded
from .lattice import PointSet, Shell, scale_parameter, shell_point_set
from .vectors import KeyCodec, check_int128

_BLOCK_ELEMENTS = 2**21  # ~16 MB of int64 keys per vectorised block

# float64 holds integers exactly below 2^53; bucket sums must stay under it.
_EXACT_FLOAT_LIMIT = 2**53


def canonicalize_prefix(points: np.ndarray, k: int) -> np.ndarray:
    """Orbit representative under signed permutations of the first k coords."""
    points = np.asarray(points, dtype=np.int64)
    if k == 0:
        return points
    out = points.copy()
    out[:, :k] = np.sort(np.abs(out[:, :k]), axis=1)
    return out


def prefix_orbit_sizes(canonical: np.ndarray, k: int) -> np.ndarray:
    """Orbit sizes under the signed-permutation group acting on the first k coords."""
    if k == 0:
        return np.ones(canonical.shape[0], dtype=np.int64)
    head = np.asarray(canonical, dtype=np.int64)[:, :k]
    nonzero = (head != 0).sum(axis=1)
    sizes = (2 ** nonzero.astype(np.int64)) * math.factorial(k)
    div = np.ones(head.shape[0], dtype=np.int64)
    run = np.ones(head.shape[0], dtype=np.int64)
    for i in range(1, k):
        same = head[:, i] == head[:, i - 1]
        run = np.where(same, run + 1, 1)
        div *= np.where(same, run, 1)
    return sizes // div


def symmetry_prefix(pset: PointSet) -> int:
    """Largest supported k such that pset is closed under the prefix-k group.

    Checked exactly: a closed set is a disjoint union of full orbits, so the
    orbit sizes of its distinct canonical representatives must sum to |P|.
    """
    points = pset.points
    if points.shape[0] == 0:
        return 0
    for k in (points.shape[1], 3 if points.shape[1] == 4 else 0):
        if k == 0:
            continue
        canon = canonicalize_prefix(points, k)
        reps = np.unique(canon, axis=0)
        if int(prefix_orbit_sizes(reps, k).sum()) == points.shape[0]:
            return k
    return 0


@dataclass(frozen=True)
class RepHistogram:
    """Histogram of r(v) = #{(xi, eta) in P^2 : xi + eta = v}, orbit-compressed.

    keys are packed canonical sum vectors; counts[i] = r(v) for any v in the
    orbit of keys[i]; orbit[i] is that orbit's size under the prefix-k group.
    """

    n: int
    source_size: int
    sym_prefix: int
    codec: KeyCodec
    keys: np.ndarray  # sorted unique packed canonical sums
    counts: np.ndarray  # r(v) per canonical sum
    orbit: np.ndarray  # orbit size per canonical sum

    @property
    def distinct_sums(self) -> int:
        return int(self.orbit.sum())

    def mass(self) -> int:
        return int(np.sum(self.orbit * self.counts, dtype=object))

    def energy(self) -> int:
        total = 0
        for o, c in zip(self.orbit.tolist(), self.counts.tolist()):
            total += o * c * c
        return check_int128(total, "additive energy")

    def power_sum(self, exponent: int, skip_zero_sum: bool = False) -> int:
        """Sum of orbit * r(v)^exponent, optionally excluding v = 0."""
        zero_key = None
        if skip_zero_sum:
            zero_key = self.codec.pack(np.zeros((1, self.n), dtype=np.int64))[0]
        total = 0
        for k, o, c in zip(self.keys.tolist(), self.orbit.tolist(), self.counts.tolist()):
            if zero_key is not None and k == zero_key:
                continue
            total += o * c**exponent
        return check_int128(total, "histogram power sum")

    def rep_count(self, v) -> int:
        """r(v) for an arbitrary sum vector v."""
        arr = np.asarray(v, dtype=np.int64).reshape(1, self.n)
        key = self.codec.pack(canonicalize_prefix(arr, self.sym_prefix))[0]
        pos = int(np.searchsorted(self.keys, key))
        if pos < len(self.keys) and self.keys[pos] == key:
            return int(self.counts[pos])
        return 0

    def max_count(self) -> int:
        return int(self.counts.max()) if len(self.counts) else 0

    def entries(self, budget: int = 10**7) -> dict[tuple[int, ...], int]:
        """Materialized map v -> r(v); expands orbits, so budget-guarded."""
        if self.distinct_sums > budget:
            raise BudgetExceeded(
                f"histogram has {self.distinct_sums} entries > budget {budget}"
            )
        from .lattice import _expand_pattern  # orbit expansion of a pattern

        out: dict[tuple[int, ...], int] = {}
        vectors = self.codec.unpack(self.keys)
        k = self.sym_prefix
        for row, c in zip(vectors, self.counts.tolist()):
            head = tuple(int(x) for x in row[:k])
            tail = tuple(int(x) for x in row[k:])
            for member in _expand_pattern(head) if k else [head]:
                out[member + tail] = c
        return out


def _merge_key_counts(acc_keys, acc_counts, new_keys, new_counts):
    if acc_keys is None:
        return new_keys, new_counts
    all_keys = np.concatenate([acc_keys, new_keys])
    all_counts = np.concatenate([acc_counts, new_counts])
    u, inv = np.unique(all_keys, return_inverse=True)
    sums = np.zeros(len(u), dtype=np.int64)
    np.add.at(sums, inv, all_counts)
    return u, sums


def _weighted_unique(keys_flat: np.ndarray, weights_flat: np.ndarray):
    """Unique keys with exact integer weight sums (via float64 bincount)."""
    u, inv = np.unique(keys_flat, return_inverse=True)
    sums = np.bincount(inv, weights=weights_flat.astype(np.float64))
    if sums.size and sums.max() >= _EXACT_FLOAT_LIMIT:
        raise BudgetExceeded("bucket count exceeds exact float64 accumulation range")
    return u, sums.astype(np.int64)


def rep_histogram(pset: PointSet, sym_prefix: Optional[int] = None) -> RepHistogram:
    """Pair-sum histogram of a point set, orbit-compressed when symmetric."""
    points = np.asarray(pset.points, dtype=np.int64)
    size, n = points.shape
    max_abs = int(np.abs(points).max()) if size else 0
    codec = KeyCodec.for_dimension(n, max(2 * max_abs, 1))
    if size == 0:
        empty = np.empty(0, dtype=np.int64)
        return RepHistogram(n, 0, 0, codec, empty, empty.copy(), empty.copy())
    k = symmetry_prefix(pset) if sym_prefix is None else sym_prefix

    if k > 0:
        canon = canonicalize_prefix(points, k)
        reps, first_idx = np.unique(canon, axis=0, return_index=True)
        rep_points = points[np.sort(first_idx)]
        rep_weights = prefix_orbit_sizes(
            canonicalize_prefix(rep_points, k), k
        )
        outer, weights = rep_points, rep_weights
    else:
        outer, weights = points, np.ones(size, dtype=np.int64)

    block = max(1, _BLOCK_ELEMENTS // size)
    acc_keys, acc_counts = None, None
    for start in range(0, outer.shape[0], block):
        chunk = outer[start : start + block]
        w = weights[start : start + block]
        sums = chunk[:, None, :] + points[None, :, :]
        sums = sums.reshape(-1, n)
        keys_flat = codec.pack(canonicalize_prefix(sums, k))
        weights_flat = np.repeat(w, size)
        u, s = _weighted_unique(keys_flat, weights_flat)
        acc_keys, acc_counts = _merge_key_counts(acc_keys, acc_counts, u, s)

    orbit = prefix_orbit_sizes(codec.unpack(acc_keys), k)
    assert int(acc_counts.sum(dtype=object)) == size * size
    assert np.all(acc_counts % orbit == 0)
    return RepHistogram(
        n=n,
        source_size=size,
        sym_prefix=k,
        codec=codec,
        keys=acc_keys,
        counts=acc_counts // orbit,
        orbit=orbit,
    )


@dataclass(frozen=True)
class EnergyResult:
    set_size: int
    energy: int
    N: Optional[int] = None


def additive_energy(pset: PointSet) -> EnergyResult:
    """E(P) = #{(x1,x2,x3,x4) in P^4 : x1 + x2 = x3 + x4}, exact."""
    hist = rep_histogram(pset)
    energy = hist.energy()
    if pset.size:
        assert pset.size**2 <= energy <= pset.size**3
    N = scale_parameter(pset.lam) if pset.lam is not None else None
    return EnergyResult(set_size=pset.size, energy=energy, N=N)


def shell_energy(shell: Shell) -> EnergyResult:
    return additive_energy(shell_point_set(shell))


def l_fold_energy(pset: PointSet, l: int) -> int:
    """#{2l-tuples with equal l-fold sums} = sum over v of r_l(v)^2.

    Computed by iterated histogram convolution, a code path independent of
    the pairwise histogram above.
    """
    if not isinstance(l, int) or l < 2:
        raise BadSpec(f"fold order must be an integer >= 2, got {l!r}")
    points = np.asarray(pset.points, dtype=np.int64)
    size, n = points.shape
    if size == 0:
        return 0
    max_abs = int(np.abs(points).max())
    codec = KeyCodec.for_dimension(n, max(l * max_abs, 1))
    point_keys = codec.pack(points)
    zero = codec.pack(np.zeros((1, n), dtype=np.int64))[0]
    offsets = point_keys - zero
    keys = point_keys.copy()
    counts = np.ones(size, dtype=np.int64)
    for _ in range(l - 1):
        block = max(1, _BLOCK_ELEMENTS // size)
        acc_keys, acc_counts = None, None
        for start in range(0, len(keys), block):
            kk = keys[start : start + block]
            cc = counts[start : start + block]
            flat_keys = (kk[:, None] + offsets[None, :]).reshape(-1)
            flat_counts = np.repeat(cc, size)
            u, s = _weighted_unique(flat_keys, flat_counts)
            acc_keys, acc_counts = _merge_key_counts(acc_keys, acc_counts, u, s)
        keys, counts = acc_keys, acc_counts
    assert int(counts.sum(dtype=object)) == size**l
    total = 0
    for c in counts.tolist():
        total += c * c
    return check_int128(total, "l-fold energy")


@dataclass(frozen=True)
class SubsetEnergyRow:
    set_size: int
    trials: int
    max_energy: int
    ratio_vs_target: float


def subset_energy_experiment(
    shell: Shell, sizes: list[int], trials: int, seed: int
) -> list[SubsetEnergyRow]:
    """Max E(subset) over random subsets, against the dimension's target power.

    Targets: |subset|^{7/3} in dimension 4, |subset|^{5/2} in dimension 5.
    """
    if shell.n == 4:
        target_exp = 7.0 / 3.0
    elif shell.n == 5:
        target_exp = 5.0 / 2.0
    else:
        raise BadDimension(f"subset targets defined for dimensions 4 and 5, not {shell.n}")
    if trials < 1:
        raise BadSpec("trials must be >= 1")
    rng = np.random.default_rng(seed)
    rows = []
    for size in sizes:
        if not 1 <= size <= shell.size:
            raise BadSpec(f"subset size {size} outside [1, {shell.size}]")
        best = 0
        for _ in range(trials):
            idx = rng.choice(shell.size, size=size, replace=False)
            subset = PointSet(n=shell.n, points=shell.points[np.sort(idx)],
                              origin_tag="shell-subset", lam=shell.lam)
            best = max(best, additive_energy(subset).energy)
        rows.append(
            SubsetEnergyRow(
                set_size=size,
                trials=trials,
                max_energy=best,
                ratio_vs_target=best / float(size) ** target_exp,
            )
        )
    return rows


def paraboloid_energy(pset: PointSet) -> EnergyResult:
    """Additive energy of a paraboloid slab (or any 4-d point set)."""
    if pset.n != 4:
        raise BadDimension("paraboloid slabs live in dimension 4")
    hist = rep_histogram(pset)
    return EnergyResult(set_size=pset.size, energy=hist.energy(), N=None)
