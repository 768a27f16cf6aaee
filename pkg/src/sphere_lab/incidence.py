"""Sum-hyperplanes, exact incidence counts, and incidence-inequality checks.

For a shell point v != 0, the hyperplane H_v = {theta : 2 v . theta = |v|^2}
contains every shell point xi whose partner v - xi is also on the shell, so
for a full shell |P /\ H_v| equals the pair count r(v).  All multiplicity
scans below run over canonical sum representatives only: the symmetry group
permutes hyperplane pairs without changing intersection sizes, so maxima over
(canonical v, arbitrary v') equal maxima over all pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .energy import RepHistogram, rep_histogram
from .errors import (
    BadDimension,
    BadSpec,
    BadSubspace,
    BudgetExceeded,
    DegenerateSum,
    OutOfRange,
)
from .lattice import PointSet, Shell, shell_point_set, shell_size
from .vectors import KeyTable

_SCAN_BLOCK = 2**22


@dataclass(frozen=True)
class Hyperplane:
    """Integer hyperplane {theta : normal . theta = offset}, canonical form."""

    normal: tuple[int, ...]
    offset: int

    def __post_init__(self):
        if all(c == 0 for c in self.normal):
            raise BadSpec("hyperplane normal must be nonzero")

    @property
    def n(self) -> int:
        return len(self.normal)

    def contains(self, point: Sequence[int]) -> bool:
        return sum(c * int(x) for c, x in zip(self.normal, point)) == self.offset


def _canonical_plane(normal: Iterable[int], offset: int) -> Hyperplane:
    normal = [int(c) for c in normal]
    g = 0
    for c in normal:
        g = math.gcd(g, abs(c))
    g = math.gcd(g, abs(int(offset)))
    if g > 1:
        normal = [c // g for c in normal]
        offset = int(offset) // g
    lead = next(c for c in normal if c != 0)
    if lead < 0:
        normal = [-c for c in normal]
        offset = -offset
    return Hyperplane(normal=tuple(normal), offset=int(offset))


def hyperplane_for_sum(v: Sequence[int], lam: int) -> Hyperplane:
    """H_v with equation 2 v . theta = |v|^2, gcd-reduced and sign-normalized."""
    v = [int(x) for x in v]
    norm2 = sum(x * x for x in v)
    if norm2 == 0:
        raise DegenerateSum("v = 0: every antipodal pair sums to it, no unique hyperplane")
    if norm2 > 4 * lam:
        raise OutOfRange(f"|v|^2 = {norm2} > 4*lambda = {4 * lam}: no shell pair sums to v")
    return _canonical_plane([2 * x for x in v], norm2)


@dataclass(frozen=True)
class SumFamily:
    """Distinct hyperplanes H_v over realized nonzero sums v of P + P.

    Distinct sums v give distinct hyperplanes (2v/|v|^2 determines v), so the
    family size is the number of realized nonzero sums; entries() materializes
    (Hyperplane, r(v)) pairs and is budget-guarded because families grow like
    |P|^2.
    """

    n: int
    lam: int
    source_size: int
    full_shell: bool
    hist: RepHistogram
    num_hyperplanes: int
    zero_mass: int

    def entries(self, budget: int = 10**6) -> list[tuple[Hyperplane, int]]:
        if self.num_hyperplanes > budget:
            raise BudgetExceeded(
                f"family has {self.num_hyperplanes} hyperplanes > budget {budget}"
            )
        out: list[tuple[Hyperplane, int]] = []
        for v, r in self.hist.entries(budget=max(budget, 1)).items():
            if any(v):
                out.append((hyperplane_for_sum(v, self.lam), r))
        out.sort(key=lambda e: (e[0].normal, e[0].offset))
        return out

    def hyperplanes(self, budget: int = 10**6) -> list[Hyperplane]:
        return [h for h, _ in self.entries(budget)]


def sum_hyperplane_family(pset: PointSet, lam: Optional[int] = None) -> SumFamily:
    if lam is None:
        lam = pset.lam
    if lam is None:
        raise BadSpec("sum families need the shell's lambda to build hyperplanes")
    hist = rep_histogram(pset)
    zero = hist.codec.pack(np.zeros((1, pset.n), dtype=np.int64))[0]
    pos = int(np.searchsorted(hist.keys, zero))
    zero_mass = 0
    if pos < len(hist.keys) and hist.keys[pos] == zero:
        zero_mass = int(hist.counts[pos]) * int(hist.orbit[pos])
    num = hist.distinct_sums - (1 if zero_mass else 0)
    full = pset.size > 0 and pset.size == shell_size(pset.n, lam)
    return SumFamily(
        n=pset.n,
        lam=lam,
        source_size=pset.size,
        full_shell=full,
        hist=hist,
        num_hyperplanes=num,
        zero_mass=zero_mass,
    )


FamilyOrPlanes = Union[SumFamily, Sequence[Hyperplane]]


def incidences(pset: PointSet, planes: FamilyOrPlanes, budget: int = 10**9) -> int:
    """I(P, H) = number of (point, hyperplane) containments, exact."""
    if isinstance(planes, SumFamily):
        if planes.full_shell and pset.size == planes.source_size:
            # |P /\ H_v| = r(v) on a full shell: I = |P|^2 - (v=0 mass).
            return pset.size**2 - planes.zero_mass
        plane_list = planes.hyperplanes()
    else:
        plane_list = list(planes)
    if not plane_list:
        return 0
    if plane_list[0].n != pset.n:
        raise BadDimension("points and hyperplanes have different dimensions")
    if pset.size * len(plane_list) > budget:
        raise BudgetExceeded(
            f"incidence product {pset.size * len(plane_list)} exceeds budget {budget}"
        )
    normals = np.array([h.normal for h in plane_list], dtype=np.int64)
    offsets = np.array([h.offset for h in plane_list], dtype=np.int64)
    total = 0
    block = max(1, _SCAN_BLOCK // max(1, len(plane_list)))
    for start in range(0, pset.size, block):
        chunk = pset.points[start : start + block]
        total += int(np.count_nonzero(chunk @ normals.T == offsets[None, :]))
    return total


# --- multiplicity scans -----------------------------------------------------


def _partner_set(point: np.ndarray, points: np.ndarray, table: KeyTable) -> np.ndarray:
    """A_v = {xi in P : v - xi in P} for a sum vector v."""
    mask = table.contains_points(point[None, :] - points)
    return points[mask]


def _cross_counts(a_points: np.ndarray, table: KeyTable):
    """Keys and counts of {xi + eta : xi in a_points, eta in P} with multiplicity.

    count(v') = #{xi in a_points : v' - xi in P} = |A_v /\ A_{v'}| when
    a_points = A_v, which is exactly the pairwise plane multiplicity m(v, v').
    """
    codec = table.codec
    zero = codec.zero_key
    a_keys = codec.pack(a_points)
    p_offsets = table.sorted_keys - zero
    acc_keys, acc_counts = None, None
    block = max(1, _SCAN_BLOCK // max(1, len(table)))
    for start in range(0, len(a_keys), block):
        flat = (a_keys[start : start + block, None] + p_offsets[None, :]).reshape(-1)
        u, c = np.unique(flat, return_counts=True)
        if acc_keys is None:
            acc_keys, acc_counts = u, c.astype(np.int64)
        else:
            all_k = np.concatenate([acc_keys, u])
            all_c = np.concatenate([acc_counts, c.astype(np.int64)])
            uu, inv = np.unique(all_k, return_inverse=True)
            sums = np.zeros(len(uu), dtype=np.int64)
            np.add.at(sums, inv, all_c)
            acc_keys, acc_counts = uu, sums
    return acc_keys, acc_counts


def _shell_gamma_scan(shell_points: np.ndarray, hist: RepHistogram):
    """(gamma_obs, witness sum pair) over distinct sum-hyperplane pairs.

    Scans canonical sum representatives in decreasing r order; m(v, v') <=
    min(r(v), r(v')) allows stopping once r of the current representative
    cannot beat the best maximum found.
    """
    codec = hist.codec
    table = KeyTable(codec, shell_points)
    zero = codec.zero_key
    order = np.argsort(hist.counts)[::-1]
    best = 0
    witness = None
    for idx in order:
        r = int(hist.counts[idx])
        if r <= best or r < 2:
            break
        key = hist.keys[idx]
        if key == zero:
            continue
        v = codec.unpack(np.array([key]))[0]
        a_points = _partner_set(v, shell_points, table)
        keys, counts = _cross_counts(a_points, table)
        keep = (keys != key) & (keys != zero)
        if not np.any(keep):
            continue
        counts = counts[keep]
        keys = keys[keep]
        top = int(np.argmax(counts))
        if int(counts[top]) > best:
            best = int(counts[top])
            witness = (tuple(int(x) for x in v),
                       tuple(int(x) for x in codec.unpack(keys[top : top + 1])[0]))
    return best, witness


def _generic_gamma(pset: PointSet, plane_list: Sequence[Hyperplane], budget: int):
    if len(plane_list) < 2:
        return 0, None
    normals = np.array([h.normal for h in plane_list], dtype=np.int64)
    offsets = np.array([h.offset for h in plane_list], dtype=np.int64)
    members = []
    dots = pset.points @ normals.T
    for j in range(len(plane_list)):
        members.append(np.nonzero(dots[:, j] == offsets[j])[0])
    est = sum(len(m) for m in members) * len(plane_list)
    if len(plane_list) ** 2 > budget or est > budget:
        raise BudgetExceeded(
            f"pairwise multiplicity over {len(plane_list)} hyperplanes exceeds budget"
        )
    best, witness = 0, None
    for i in range(len(plane_list)):
        mi = members[i]
        if len(mi) <= best:
            continue
        for j in range(i + 1, len(plane_list)):
            common = np.intersect1d(mi, members[j], assume_unique=True)
            if len(common) > best:
                best = len(common)
                witness = (plane_list[i], plane_list[j])
    return best, witness


def pairwise_multiplicity(
    pset: PointSet, planes: FamilyOrPlanes, budget: int = 10**8
):
    """Max over distinct hyperplane pairs of |H /\ H' /\ P|, with a witness pair."""
    if isinstance(planes, SumFamily) and planes.full_shell and pset.size == planes.source_size:
        gamma, pair = _shell_gamma_scan(pset.points, planes.hist)
        if pair is None:
            return gamma, None
        return gamma, tuple(hyperplane_for_sum(v, planes.lam) for v in pair)
    plane_list = planes.hyperplanes() if isinstance(planes, SumFamily) else list(planes)
    return _generic_gamma(pset, plane_list, budget)


# --- lemma checks -----------------------------------------------------------


@dataclass(frozen=True)
class IncidenceReport:
    n: int
    lam: Optional[int]
    num_points: int
    num_hyperplanes: int
    incidences: int
    gamma_obs: int
    gamma_used: int
    bound: float
    satisfied: bool
    implied_constant: Optional[float]
    check: str

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "num_points": self.num_points,
            "num_hyperplanes": self.num_hyperplanes,
            "incidences": self.incidences,
            "gamma_obs": self.gamma_obs,
            "gamma_used": self.gamma_used,
            "bound": self.bound,
            "satisfied": self.satisfied,
            "implied_constant": self.implied_constant,
            "check": self.check,
        }


def _family_counts(pset: PointSet, planes: FamilyOrPlanes):
    if isinstance(planes, SumFamily):
        return planes.num_hyperplanes, incidences(pset, planes)
    plane_list = list(planes)
    return len(plane_list), incidences(pset, plane_list)


def check_lemma_4d(pset: PointSet, planes: FamilyOrPlanes, budget: int = 10**8) -> IncidenceReport:
    """I <= gamma (|P| + |H| sqrt(|P|)) with gamma = max(5, gamma_obs).

    The comparison is exact: I <= g|P|, or (I - g|P|)^2 <= g^2 |H|^2 |P|.
    """
    if pset.n != 4:
        raise BadDimension("the pairwise-multiplicity incidence bound is four-dimensional")
    num_planes, inc = _family_counts(pset, planes)
    gamma_obs, _ = pairwise_multiplicity(pset, planes, budget=budget)
    g = max(5, gamma_obs)
    P, H = pset.size, num_planes
    slack = inc - g * P
    satisfied = slack <= 0 or slack * slack <= g * g * H * H * P
    bound = g * (P + H * math.sqrt(P))
    return IncidenceReport(
        n=4, lam=pset.lam, num_points=P, num_hyperplanes=H, incidences=inc,
        gamma_obs=gamma_obs, gamma_used=g, bound=bound, satisfied=bool(satisfied),
        implied_constant=(inc / bound if bound > 0 else None), check="lemma21",
    )


_SELECT_CAP = 4096
_EMIT_CHUNK = 2 * 10**7


def _runlength(flat: np.ndarray):
    """Distinct values of flat with multiplicities; sorts flat in place."""
    flat.sort()
    if flat.size == 0:
        return flat, np.zeros(0, dtype=np.int64)
    starts = np.concatenate(([0], np.flatnonzero(flat[1:] != flat[:-1]) + 1))
    counts = np.diff(np.concatenate((starts, [flat.size])))
    return flat[starts], counts


def _merge_counts(k1, c1, k2, c2):
    """Merge two sorted key/count histograms, adding counts on shared keys."""
    if k1.size == 0:
        return k2, c2
    keys = np.concatenate((k1, k2))
    counts = np.concatenate((c1, c2))
    srt = np.argsort(keys, kind="stable")
    keys, counts = keys[srt], counts[srt]
    seg = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    return keys[seg], np.add.reduceat(counts, seg)


def _segment_pairs(lens: np.ndarray):
    """Flat index pairs (i, j), i < j, within each segment of given sizes."""
    total = int(lens.sum())
    starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
    pos_local = np.arange(total) - np.repeat(starts, lens)
    after = np.repeat(lens, lens) - 1 - pos_local
    left = np.repeat(np.arange(total), after)
    ends = np.cumsum(after)
    right = np.arange(int(after.sum())) - np.repeat(ends - after, after) + left + 1
    return left, right


def _hypothesis_gamma_5d(shell_points: np.ndarray, hist: RepHistogram, rich_at: int = 5):
    """Minimal gamma > 4 such that, for every hyperplane pair, at most gamma
    other hyperplanes contain >= gamma of the pair's common points.

    Phase one walks canonical representatives v (descending r): one cross
    histogram of A_v + P scores m(v, v'') = |A_v /\ A_v''| against every
    other plane at once, partners are deduplicated into distinct
    common-point sets with pencil multiplicities, and pencils alone give a
    lower bound that lifts the running threshold cheaply.  Phase two
    revisits the surviving sets once the threshold theta has settled: rows
    sharing >= theta points share three points inside one index class
    (index mod K, K = theta // 3), so each row posts its within-class point
    triples, row pairs collecting enough triple votes get exact popcount
    overlaps, and a final walk reads each pair's gamma off its capture
    counts.  The count of planes holding >= g of a pair's points is
    nonincreasing up to theta, so a pair already within budget there can
    never set a new maximum and is skipped; the generating pair itself is
    excluded from every count.
    """
    codec = hist.codec
    zero = codec.zero_key
    P = shell_points.shape[0]
    if P == 0:
        return rich_at, 0, None
    N = int(np.abs(shell_points).max())
    B = 4 * N + 1
    pows = (B ** np.arange(5, dtype=object)).astype(np.int64)
    # pk(x) = sum (x_i + N) B^i: every digit of sumkey(v'') - pk(xi) stays
    # within (-B, B), so the difference cannot alias and membership of
    # v'' - xi reduces to one subtraction plus a sorted lookup.
    half = (shell_points.astype(np.int64) + N) @ pows
    half_sorted = np.sort(half)
    key_zero = int(2 * N * pows.sum())
    sum_dtype = np.uint32 if B**5 < 2**31 else np.int64
    half_small = half.astype(sum_dtype)

    def member_keys(keys: np.ndarray) -> np.ndarray:
        pos = np.clip(np.searchsorted(half_sorted, keys), 0, P - 1)
        return half_sorted[pos] == keys

    gamma_star = rich_at
    gamma_obs = 0
    witness = None
    pending = []  # per representative: (ra, upkb, mult, msize), pair walk deferred
    order = np.argsort(hist.counts)[::-1]
    for idx in order:
        r = int(hist.counts[idx])
        if r < max(2, rich_at):
            break
        key = hist.keys[idx]
        if key == zero:
            continue
        v = codec.unpack(np.array([key]))[0]
        key_v = int((v + 2 * N) @ pows)
        aidx = np.flatnonzero(member_keys(key_v - half))
        ha = half[aidx]
        ra = aidx.size
        ukeys, counts = _runlength(
            (half_small[aidx][:, None] + half_small[None, :]).ravel()
        )
        drop = (ukeys == sum_dtype(key_v)) | (ukeys == sum_dtype(key_zero))
        ukeys, counts = ukeys[~drop], counts[~drop]
        if counts.size:
            top = int(np.argmax(counts))
            if int(counts[top]) > gamma_obs:
                gamma_obs = int(counts[top])
                kk = int(ukeys[top])
                digits = []
                for _ in range(5):
                    digits.append(kk % B - 2 * N)
                    kk //= B
                witness = (tuple(int(x) for x in v), tuple(digits))
        done = np.zeros(counts.shape[0], dtype=bool)
        stash = []
        while True:
            # Partners with m below the running threshold cannot raise the
            # maximum (gamma <= |X| + 1).  Oversized selections go biggest-m
            # first with ties included, so partners sharing a common-point
            # set land in one pass and the threshold rises before the bulk
            # is masked.
            sel = np.flatnonzero((counts >= max(rich_at, gamma_star)) & ~done)
            if sel.size == 0:
                break
            if sel.size > _SELECT_CAP:
                part = np.argpartition(counts[sel], sel.size - _SELECT_CAP)
                cutoff = counts[sel[part[sel.size - _SELECT_CAP]]]
                sel = sel[counts[sel] >= cutoff]
            done[sel] = True
            mask = np.empty((sel.size, ra), dtype=bool)
            blk = max(1, 4 * 10**6 // max(1, ra))
            sel_keys = ukeys[sel].astype(np.int64)
            for s in range(0, sel.size, blk):
                mask[s : s + blk] = member_keys(sel_keys[s : s + blk, None] - ha[None, :])
            pkb = np.packbits(mask, axis=1)
            upkb, mult = np.unique(pkb, axis=0, return_counts=True)
            msize = np.bitwise_count(upkb).sum(axis=1, dtype=np.int64)
            # Pencil bound: mult planes share this exact point set, and v
            # makes mult + 1; for any pair inside the pencil the other
            # members all hold the full set, forcing gamma past
            # min(mult - 1, |X| + 1).  Lower bound only; the pair walk below
            # is the exact account.
            g1 = np.maximum(rich_at, np.minimum(mult - 1, msize + 1))
            gamma_star = max(gamma_star, int(g1.max()))
            stash.append((upkb, mult, msize))
        if not stash:
            continue
        # Any plane holding >= g >= theta points of a set X below also meets
        # A_v in >= theta points, hence is itself a selected partner; capture
        # counts at g >= theta are therefore complete over selected rows.
        theta = max(rich_at, gamma_star)
        upkb = np.concatenate([s[0] for s in stash])
        mult = np.concatenate([s[1] for s in stash])
        msize = np.concatenate([s[2] for s in stash])
        need = np.flatnonzero(msize >= theta)
        if need.size == 0:
            continue
        upkb, mult, msize = upkb[need], mult[need], msize[need]
        num_rows = upkb.shape[0]
        members = np.unpackbits(upkb, axis=1, count=ra).astype(bool)
        # Candidate row pairs from shared point pairs, emitted only inside
        # point classes (index mod K): rows sharing >= theta points share
        # >= ceil(theta/K) >= 2 points of one class, so no qualifying pair
        # is missed while cross-class pairs are never generated.
        K = max(2, theta // 2)
        q, rem = theta // K, theta % K
        # Even split minimizes the within-class pair count of theta shared
        # points; fewer accumulated votes rules a candidate out.
        cmin = rem * ((q + 1) * q // 2) + (K - rem) * (q * (q - 1) // 2)
        rows_nz, cols_nz = np.nonzero(members)
        okey = (
            rows_nz.astype(np.int64) * (K * ra)
            + (cols_nz % K).astype(np.int64) * ra
            + cols_nz
        )
        osrt = np.argsort(okey, kind="stable")
        rflat = rows_nz[osrt].astype(np.int32)
        cflat = cols_nz[osrt].astype(np.int64)
        segkey = rflat.astype(np.int64) * K + (cflat % K)
        seg_bounds = np.flatnonzero(
            np.concatenate(([True], segkey[1:] != segkey[:-1], [True]))
        )
        li, ri = _segment_pairs(np.diff(seg_bounds))
        pair_keys = cflat[li] * ra + cflat[ri]
        pair_rows = rflat[li]
        srt = np.argsort(pair_keys, kind="stable")
        pair_keys = pair_keys[srt]
        pair_rows = pair_rows[srt]
        bidx = np.flatnonzero(
            np.concatenate(([True], pair_keys[1:] != pair_keys[:-1], [True]))
        )
        lens = np.diff(bidx)
        live = lens >= 2
        lens_live = lens[live]
        starts_live = bidx[:-1][live]
        acc_k = np.zeros(0, dtype=np.int64)
        acc_c = np.zeros(0, dtype=np.int64)
        if lens_live.size:
            csum = np.cumsum((lens_live * (lens_live - 1)) // 2)
            cut = 0
            while cut < lens_live.size:
                base = csum[cut - 1] if cut else 0
                hi = int(np.searchsorted(csum, base + _EMIT_CHUNK))
                hi = min(max(hi, cut + 1), lens_live.size)
                ls = lens_live[cut:hi]
                pos = np.repeat(starts_live[cut:hi], ls) + (
                    np.arange(int(ls.sum())) - np.repeat(np.cumsum(ls) - ls, ls)
                )
                flat = pair_rows[pos]
                fl, fr = _segment_pairs(ls)
                a = np.minimum(flat[fl], flat[fr]).astype(np.int64)
                b = np.maximum(flat[fl], flat[fr]).astype(np.int64)
                k2, c2 = _runlength(a * num_rows + b)
                acc_k, acc_c = _merge_counts(acc_k, acc_c, k2, c2)
                cut = hi
        # Rows sharing t points co-occur in exactly C(t, 2) point-pair
        # buckets, so the vote total identifies every pair with t >= theta.
        cand = np.flatnonzero(acc_c >= max(1, cmin))
        ck = acc_k[cand]
        ki = (ck // num_rows).astype(np.int64)
        kj = (ck % num_rows).astype(np.int64)
        tv = np.empty(ck.size, dtype=np.int64)
        cblk = max(1, 5 * 10**6 // max(1, upkb.shape[1]))
        for s in range(0, ck.size, cblk):
            tv[s : s + cblk] = np.bitwise_count(
                upkb[ki[s : s + cblk]] & upkb[kj[s : s + cblk]]
            ).sum(axis=1, dtype=np.int64)
        keep = tv >= theta
        ki, kj, tv = ki[keep], kj[keep], tv[keep]
        ent_row = np.concatenate((ki, kj, np.arange(num_rows)))
        ent_t = np.concatenate((tv, tv, msize))
        ent_w = np.concatenate((mult[kj], mult[ki], mult))
        srt = np.lexsort((-ent_t, ent_row))
        ent_row, ent_t, ent_w = ent_row[srt], ent_t[srt], ent_w[srt]
        bounds = np.searchsorted(ent_row, np.arange(num_rows + 1))
        for d in range(num_rows):
            lo, hi = bounds[d], bounds[d + 1]
            if hi - lo == 1 and mult[d] - 1 <= theta:
                continue  # lone self entry cannot push the count past theta
            tvr = ent_t[lo:hi]
            wts = np.cumsum(ent_w[lo:hi])
            m = int(msize[d])

            def cnt(g: int) -> int:
                at = int(np.searchsorted(-tvr, -g, side="right"))
                total = int(wts[at - 1]) if at else 0
                # the untested half of the generating pair scores exactly m
                return total - (1 if g <= m else 0)

            if cnt(theta) <= theta:
                continue
            g = theta + 1
            while cnt(g) > g:
                g += 1
            gamma_star = max(gamma_star, g)

    if gamma_obs < rich_at:
        # No pair reached rich_at, so the rich-only scan above may have
        # missed the true maximum; small shells make the plain scan cheap.
        gamma_obs, witness = _shell_gamma_scan(shell_points, hist)
    return gamma_star, gamma_obs, witness


def check_lemma_5d(pset: PointSet, planes: FamilyOrPlanes, budget: int = 10**9) -> IncidenceReport:
    """I <= 4 gamma (|P| + |H| |P|^{2/3}) with gamma from the triple hypothesis.

    Exact comparison: I <= 4g|P|, or (I - 4g|P|)^3 <= (4g|H|)^3 |P|^2.
    """
    if pset.n != 5:
        raise BadDimension("the triple-hypothesis incidence bound is five-dimensional")
    if not (isinstance(planes, SumFamily) and planes.full_shell and pset.size == planes.source_size):
        raise BadSpec("the five-dimensional check runs on a full shell with its sum family")
    num_planes, inc = _family_counts(pset, planes)
    gamma_star, gamma_obs, _ = _hypothesis_gamma_5d(pset.points, planes.hist)
    g = gamma_star
    P, H = pset.size, num_planes
    slack = inc - 4 * g * P
    satisfied = slack <= 0 or slack**3 <= (4 * g * H) ** 3 * P * P
    bound = 4 * g * (P + H * P ** (2.0 / 3.0))
    return IncidenceReport(
        n=5, lam=pset.lam, num_points=P, num_hyperplanes=H, incidences=inc,
        gamma_obs=gamma_obs, gamma_used=g, bound=bound, satisfied=bool(satisfied),
        implied_constant=(inc / bound if bound > 0 else None), check="lemma22",
    )


def prop23_report(
    pset: PointSet, planes: FamilyOrPlanes, epsilon: Fraction = Fraction(1, 20),
    budget: int = 10**8,
) -> IncidenceReport:
    """Report-only evaluation of the graded incidence bound.

    alpha = n(n-3)/(n^2-2n-1), beta = (n-1)(n-2)/(n^2-2n-1) + epsilon; records
    I / (gamma (|P|^alpha |H|^beta + |P| + |H| (1 + log2 |P|))) with unit
    constant; never asserted because the inequality's constant is free.
    """
    n = pset.n
    if n not in (4, 5):
        raise BadDimension("graded incidence exponents defined for dimensions 4 and 5")
    denom = n * n - 2 * n - 1
    alpha = Fraction(n * (n - 3), denom)
    beta = Fraction((n - 1) * (n - 2), denom) + epsilon
    num_planes, inc = _family_counts(pset, planes)
    gamma_obs, _ = pairwise_multiplicity(pset, planes, budget=budget)
    g = max(5, gamma_obs)
    P, H = pset.size, num_planes
    if P > 0 and H > 0:
        rhs = g * (P ** float(alpha) * H ** float(beta) + P + H * (1 + math.log2(P)))
        implied = inc / rhs
    else:
        rhs = float(g * P)
        implied = 0.0
    return IncidenceReport(
        n=n, lam=pset.lam, num_points=P, num_hyperplanes=H, incidences=inc,
        gamma_obs=gamma_obs, gamma_used=g, bound=rhs, satisfied=True,
        implied_constant=implied, check="prop23",
    )


def max_circle_multiplicity(shell: Shell, budget: int = 10**8):
    """Max lattice points of a 4-d shell on any sum-plane pair intersection."""
    if shell.n != 4:
        raise BadDimension("circle multiplicity is a four-dimensional quantity")
    pset = shell_point_set(shell)
    family = sum_hyperplane_family(pset, shell.lam)
    return pairwise_multiplicity(pset, family, budget=budget)


# --- affine 3-space concentration in dimension 5 ---------------------------


@dataclass(frozen=True)
class AffineSubspace:
    """Affine subspace base + span(directions) with integer data."""

    base: tuple[int, ...]
    directions: tuple[tuple[int, ...], ...]


def subspace_concentration_5d(shell: Shell, subspace: AffineSubspace) -> list[tuple[int, ...]]:
    """All v in Z^5 with 0 < |v|^2 < 4 lambda whose sum-hyperplane contains
    the given affine 3-space; structure assertions verified on every v.

    Containment W c H_v forces v orthogonal to each direction and
    2 v . base = |v|^2; the returned v all lie on one circle (the section of
    the sphere |x - base/2| = sqrt(lambda)/2... by the orthogonal complement),
    which is asserted via exact integer identities.
    """
    if shell.n != 5:
        raise BadDimension("subspace concentration is checked in dimension 5")
    base = np.array(subspace.base, dtype=np.int64)
    dirs = [np.array(d, dtype=np.int64) for d in subspace.directions]
    if len(dirs) != 3:
        raise BadSubspace(f"need exactly 3 directions, got {len(dirs)}")
    from .vectors import integer_rank

    if integer_rank([d.tolist() for d in dirs]) != 3:
        raise BadSubspace("directions are linearly dependent: not a 3-dimensional subspace")
    if int(base @ base) != shell.lam:
        raise BadSubspace("base point is not on the shell")
    lam = shell.lam

    # Integer kernel of the 3x5 direction matrix via rational row reduction:
    # choose the 2 free columns, solve pivot columns exactly, keep integral v.
    rows = [[Fraction(int(x)) for x in d] for d in dirs]
    ncols = 5
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(rank, 3):
            if rows[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        pv = rows[rank][col]
        rows[rank] = [x / pv for x in rows[rank]]
        for r in range(3):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        pivots.append(col)
        rank += 1
    free_cols = [c for c in range(ncols) if c not in pivots]
    assert len(free_cols) == 2

    bound = math.isqrt(max(4 * lam - 1, 0))
    found: list[tuple[int, ...]] = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            free_vals = {free_cols[0]: Fraction(a), free_cols[1]: Fraction(b)}
            v = [Fraction(0)] * ncols
            v[free_cols[0]] = Fraction(a)
            v[free_cols[1]] = Fraction(b)
            ok = True
            for r, pc in enumerate(pivots):
                val = -sum(rows[r][fc] * free_vals[fc] for fc in free_cols)
                if val.denominator != 1:
                    ok = False
                    break
                v[pc] = val
            if not ok:
                continue
            vi = [int(x) for x in v]
            norm2 = sum(x * x for x in vi)
            if not 0 < norm2 < 4 * lam:
                continue
            va = np.array(vi, dtype=np.int64)
            if 2 * int(va @ base) != norm2:
                continue
            # Structure assertions: orthogonality to the direction space and
            # the circle identity <v, 2 base - v> = 0.
            assert all(int(va @ d) == 0 for d in dirs)
            assert int(va @ (2 * base - va)) == 0
            found.append(tuple(vi))
    found.sort()
    return found
