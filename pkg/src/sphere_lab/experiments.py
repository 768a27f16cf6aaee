"""Exponent fits, even moments, level-set estimates, and report files.

Asserted quantities are exact integers or rationals computed elsewhere; this
module adds the floating-point layer (least-squares slopes, grid quadrature
in extended precision) and the reproducible CSV/JSON writers.  Report bytes
are a pure function of (config, seed); files are written atomically.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BadDimension,
    BadSpec,
    BudgetExceeded,
    IoFailure,
    NonPositive,
    TooFewPoints,
    UsageError,
)
from .energy import additive_energy, l_fold_energy, subset_energy_experiment
from .gram import (
    count_quadruples_5d,
    degenerate_breakdown_5d,
    singular_case_sum_4d,
    sum_N_ab,
)
from .incidence import check_lemma_4d, check_lemma_5d, sum_hyperplane_family
from .lattice import (
    PointSet,
    enumerate_paraboloid,
    enumerate_shell,
    scale_parameter,
    shell_point_set,
)
from .density import gcd_sum

_GRID_CELL_BUDGET = 4 * 10**9

# --- exponent fitting -------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    rows: tuple[tuple[float, float], ...]

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "rows": [list(r) for r in self.rows],
        }


def fit_exponent(rows: Sequence[tuple[float, float]]) -> FitResult:
    """Ordinary least squares for log y = slope * log x + intercept."""
    data = [(float(x), float(y)) for x, y in rows]
    if len(data) < 4:
        raise TooFewPoints(f"need >= 4 rows for a fit, got {len(data)}")
    if any(x <= 0 or y <= 0 for x, y in data):
        raise NonPositive("fit rows must be strictly positive")
    lx = np.log(np.array([x for x, _ in data]))
    ly = np.log(np.array([y for _, y in data]))
    mx, my = lx.mean(), ly.mean()
    sxx = float(((lx - mx) ** 2).sum())
    if sxx == 0.0:
        raise BadSpec("all abscissae equal; slope undefined")
    slope = float(((lx - mx) * (ly - my)).sum() / sxx)
    intercept = float(my - slope * mx)
    resid = float(np.sqrt(np.mean((ly - (intercept + slope * lx)) ** 2)))
    return FitResult(slope=slope, intercept=intercept, residual=resid, rows=tuple(data))


# --- coefficient maps and even moments --------------------------------------


@dataclass(frozen=True)
class CoefficientMap:
    points: np.ndarray  # (k, n) int64 support
    values: np.ndarray  # (k,) complex128
    unit: bool  # True when every coefficient is exactly 1

    @classmethod
    def all_ones(cls, pset: PointSet) -> "CoefficientMap":
        k = pset.points.shape[0]
        return cls(points=pset.points, values=np.ones(k, dtype=np.complex128), unit=True)

    @classmethod
    def normalized_ones(cls, pset: PointSet) -> "CoefficientMap":
        k = pset.points.shape[0]
        if k == 0:
            raise BadSpec("cannot normalize coefficients on an empty set")
        vals = np.full(k, 1.0 / math.sqrt(k), dtype=np.complex128)
        return cls(points=pset.points, values=vals, unit=False)

    @classmethod
    def from_mapping(cls, pset: PointSet, mapping: dict) -> "CoefficientMap":
        have = {tuple(int(v) for v in row) for row in pset.points}
        pts = []
        vals = []
        for key, val in sorted(mapping.items()):
            key = tuple(int(v) for v in key)
            if key not in have:
                raise BadSpec(f"coefficient support point {key} is not in the set")
            pts.append(key)
            vals.append(complex(val))
        return cls(
            points=np.array(pts, dtype=np.int64).reshape(len(pts), pset.n),
            values=np.array(vals, dtype=np.complex128),
            unit=False,
        )

    def l2_norm(self) -> float:
        return float(np.sqrt((np.abs(self.values) ** 2).sum()))

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum())


def _grid_moment_sum(
    points: np.ndarray, values: np.ndarray, M: int, p_exp: int
) -> np.longdouble:
    """sum over the M^n uniform grid of |F(2*pi*k/M)|^p_exp, in extended
    precision.  n = 4 runs slab-by-slab along the first axis so the working
    set stays at M^3 complex entries."""
    n = points.shape[1]
    if M**n > _GRID_CELL_BUDGET:
        raise BudgetExceeded(f"{M}^{n} grid exceeds cell budget")
    half = p_exp // 2
    if n <= 3:
        A = np.zeros((M,) * n, dtype=np.complex128)
        np.add.at(A, tuple((points % M).T), values)
        F = np.fft.fftn(A)
        mag2 = F.real.astype(np.longdouble) ** 2 + F.imag.astype(np.longdouble) ** 2
        return (mag2**half).sum()
    if n != 4:
        raise BadDimension("grid moments support n <= 4")
    pts = points % M
    first = np.unique(pts[:, 0])
    slabs = []
    for u in first:
        sel = pts[:, 0] == u
        A = np.zeros((M, M, M), dtype=np.complex128)
        np.add.at(A, tuple(pts[sel, 1:].T), values[sel])
        slabs.append((int(u), A))
    total = np.longdouble(0)
    for k1 in range(M):
        B = np.zeros((M, M, M), dtype=np.complex128)
        for u, A in slabs:
            B += np.exp(-2j * np.pi * k1 * u / M) * A
        F = np.fft.fftn(B)
        mag2 = F.real.astype(np.longdouble) ** 2 + F.imag.astype(np.longdouble) ** 2
        total += (mag2**half).sum()
    return total


def even_moment(
    pset: PointSet,
    coeffs: Optional[CoefficientMap] = None,
    p: int = 4,
    grid_per_axis: Optional[int] = None,
):
    """Integral of |sum a_xi e(x.xi)|^p over the torus.  Unit coefficients
    take the exact convolution path (an integer); general coefficients are
    estimated on a uniform grid in extended precision."""
    if p not in (4, 6):
        raise BadSpec("even moments implemented for p in {4, 6}")
    if coeffs is None or coeffs.unit:
        return l_fold_energy(pset, p // 2)
    M = grid_per_axis
    if M is None:
        if pset.lam is None:
            raise BadSpec("grid moment needs a scale (or an explicit grid size)")
        M = 8 * scale_parameter(pset.lam)
    total = _grid_moment_sum(coeffs.points, coeffs.values, M, p)
    return float(total / np.longdouble(M) ** pset.n)


def grid_moment_extended(
    pset: PointSet, coeffs: CoefficientMap, p: int, grid_per_axis: int
) -> np.longdouble:
    """Grid estimate of the p-th moment kept in extended precision (for
    convergence comparisons between grid sizes)."""
    if p not in (4, 6):
        raise BadSpec("even moments implemented for p in {4, 6}")
    total = _grid_moment_sum(coeffs.points, coeffs.values, grid_per_axis, p)
    return total / np.longdouble(grid_per_axis) ** pset.n


# --- level sets -------------------------------------------------------------


@dataclass(frozen=True)
class LevelSetRow:
    alpha: float
    fraction: float
    rhs: float
    above_threshold: bool


@dataclass(frozen=True)
class LevelSetReport:
    n: int
    lam: int
    M: int
    l1_norm: float
    l2_norm: float
    threshold: float  # N^((n-1)/4); alpha above this is the proposition range
    rows: tuple[LevelSetRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "grid_per_axis": self.M,
            "l1_norm": self.l1_norm,
            "l2_norm": self.l2_norm,
            "threshold": self.threshold,
            "rows": [
                {
                    "alpha": r.alpha,
                    "fraction": r.fraction,
                    "rhs": r.rhs,
                    "above_threshold": r.above_threshold,
                }
                for r in self.rows
            ],
        }


def grid_level_sets(
    pset: PointSet,
    coeffs: Optional[CoefficientMap] = None,
    grid_per_axis: Optional[int] = None,
    thresholds: Optional[Sequence[float]] = None,
) -> LevelSetReport:
    """Empirical measure of {|F| > alpha} on a uniform grid versus the
    alpha^(-6) N^2 comparison curve (n = 4; report-only)."""
    if pset.n != 4:
        raise BadDimension("level sets are implemented for n = 4")
    if pset.lam is None:
        raise BadSpec("level sets need a shell scale")
    N = scale_parameter(pset.lam)
    M = grid_per_axis if grid_per_axis is not None else 8 * N
    if M**4 > _GRID_CELL_BUDGET:
        raise BudgetExceeded(f"{M}^4 grid exceeds cell budget")
    if coeffs is None:
        coeffs = CoefficientMap.normalized_ones(pset)
    if abs(coeffs.l2_norm() - 1.0) > 1e-9:
        raise BadSpec("level-set coefficients must be normalized to l2 norm 1")
    cut = N ** 0.75
    if thresholds is None:
        top = max(coeffs.l1_norm() * 1.05, cut * 2)
        thresholds = [float(t) for t in np.geomspace(max(cut / 4, 0.25), top, 10)]
    pts = coeffs.points % M
    first = np.unique(pts[:, 0])
    slabs = []
    for u in first:
        sel = pts[:, 0] == u
        A = np.zeros((M, M, M), dtype=np.complex128)
        np.add.at(A, tuple(pts[sel, 1:].T), coeffs.values[sel])
        slabs.append((int(u), A))
    counts = np.zeros(len(thresholds), dtype=np.int64)
    for k1 in range(M):
        B = np.zeros((M, M, M), dtype=np.complex128)
        for u, A in slabs:
            B += np.exp(-2j * np.pi * k1 * u / M) * A
        mag = np.abs(np.fft.fftn(B))
        for i, alpha in enumerate(thresholds):
            counts[i] += int(np.count_nonzero(mag > alpha))
    cells = M**4
    rows = tuple(
        LevelSetRow(
            alpha=float(alpha),
            fraction=counts[i] / cells,
            rhs=float(N * N * alpha ** (-6.0)),
            above_threshold=alpha > cut,
        )
        for i, alpha in enumerate(thresholds)
    )
    return LevelSetReport(
        n=4, lam=pset.lam, M=M,
        l1_norm=coeffs.l1_norm(), l2_norm=coeffs.l2_norm(),
        threshold=float(cut), rows=rows,
    )


# --- experiment runner ------------------------------------------------------

EXPERIMENT_KINDS = (
    "energy-sweep",
    "paraboloid-sweep",
    "subset-sweep",
    "count-sweep",
    "gcd-sweep",
    "incidence-sweep",
)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    dim: int = 4
    lam_lo: int = 1
    lam_hi: int = 99
    stride: int = 1
    parity: Optional[str] = None  # None | "odd" | "even"
    seed: int = 0
    budget_pairs: int = 10**9
    out_dir: str = "."
    fmt: str = "csv"
    sizes: tuple[int, ...] = ()
    trials: int = 8

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise UsageError(f"unknown experiment kind {self.kind!r}")
        if self.fmt not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.lam_lo > self.lam_hi:
            raise UsageError("empty scale range")
        if self.stride < 1:
            raise UsageError("stride must be >= 1")
        if self.parity not in (None, "odd", "even"):
            raise UsageError("parity must be odd, even, or omitted")

    def lam_values(self) -> list[int]:
        vals = range(self.lam_lo, self.lam_hi + 1, self.stride)
        if self.parity == "odd":
            return [v for v in vals if v % 2 == 1]
        if self.parity == "even":
            return [v for v in vals if v % 2 == 0]
        return list(vals)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "lam_lo": self.lam_lo,
            "lam_hi": self.lam_hi,
            "stride": self.stride,
            "parity": self.parity,
            "seed": self.seed,
            "budget_pairs": self.budget_pairs,
            "fmt": self.fmt,
            "sizes": list(self.sizes),
            "trials": self.trials,
        }


def atomic_write_text(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(content)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _render_csv(config: ExperimentConfig, header: list[str], rows: list[list]) -> str:
    lines = ["# config: " + json.dumps(config.to_json_dict(), sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join("" if v is None else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(config: ExperimentConfig, header: list[str], rows: list[list]) -> str:
    payload = {
        "config": config.to_json_dict(),
        "rows": [dict(zip(header, row)) for row in rows],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _energy_rows(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    if config.dim not in (4, 5):
        raise BadDimension("energy sweeps support n in {4, 5}")
    target_exp = 4 if config.dim == 4 else 7
    rows = []
    for lam in config.lam_values():
        shell = enumerate_shell(config.dim, lam)
        if shell.size == 0:
            continue
        res = additive_energy(shell_point_set(shell))
        ratio = res.energy / res.N**target_exp
        rows.append([config.dim, lam, res.N, res.set_size, res.energy, repr(ratio)])
    return ["n", "lambda", "N", "set_size", "energy", "ratio_vs_target"], rows


def _paraboloid_rows(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    rows = []
    for N in range(max(config.lam_lo, 1), config.lam_hi + 1, config.stride):
        pset = enumerate_paraboloid(N)
        res = additive_energy(pset)
        ratio = res.energy / N**7
        rows.append([4, N, N, pset.points.shape[0], res.energy, repr(ratio)])
    return ["n", "N", "N_param", "set_size", "energy", "ratio_vs_target"], rows


def _subset_rows(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    rows = []
    for lam in config.lam_values():
        shell = enumerate_shell(config.dim, lam)
        if shell.size == 0:
            continue
        sizes = list(config.sizes) or [max(2, shell.size // 4), max(3, shell.size // 2)]
        table = subset_energy_experiment(shell, sizes, config.trials, config.seed)
        for row in table:
            rows.append(
                [config.dim, lam, row.set_size, row.trials, row.max_energy,
                 repr(row.ratio_vs_target)]
            )
    return ["n", "lambda", "set_size", "trials", "max_energy", "ratio_vs_target"], rows


def _count_rows(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    header = ["lambda", "total", "singular_total", "rank2", "rank3", "rank4"]
    rows = []
    for lam in config.lam_values():
        if config.dim == 4:
            rows.append([lam, sum_N_ab(lam), singular_case_sum_4d(lam), None, None, None])
        elif config.dim == 5:
            breakdown = degenerate_breakdown_5d(lam)
            total = count_quadruples_5d(lam)
            singular = breakdown["rank2"] + breakdown["rank3"]
            rows.append(
                [lam, total, singular, breakdown["rank2"], breakdown["rank3"],
                 breakdown["rank4"]]
            )
        else:
            raise BadDimension("count sweeps support n in {4, 5}")
    return header, rows


def _gcd_rows(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    rows = [[lam, gcd_sum(lam)] for lam in config.lam_values()]
    return ["lambda", "gcd_sum"], rows


def _incidence_rows(config: ExperimentConfig) -> tuple[list[str], list[list]]:
    if config.dim not in (4, 5):
        raise BadDimension("incidence sweeps support n in {4, 5}")
    rows = []
    for lam in config.lam_values():
        shell = enumerate_shell(config.dim, lam)
        if shell.size == 0:
            continue
        pset = shell_point_set(shell)
        family = sum_hyperplane_family(pset)
        if family.num_hyperplanes == 0:
            continue
        if config.dim == 4:
            report = check_lemma_4d(pset, family, budget=config.budget_pairs)
        else:
            report = check_lemma_5d(pset, family, budget=config.budget_pairs)
        rows.append(
            [config.dim, lam, report.num_points, report.num_hyperplanes,
             report.incidences, report.gamma_used, report.satisfied]
        )
    return [
        "n", "lambda", "num_points", "num_hyperplanes", "incidences",
        "gamma_used", "satisfied",
    ], rows


_BUILDERS: dict[str, Callable[[ExperimentConfig], tuple[list[str], list[list]]]] = {
    "energy-sweep": _energy_rows,
    "paraboloid-sweep": _paraboloid_rows,
    "subset-sweep": _subset_rows,
    "count-sweep": _count_rows,
    "gcd-sweep": _gcd_rows,
    "incidence-sweep": _incidence_rows,
}


def experiment_report(config: ExperimentConfig) -> str:
    """Rendered report content for the configured sweep (deterministic)."""
    header, rows = _BUILDERS[config.kind](config)
    if config.fmt == "csv":
        return _render_csv(config, header, rows)
    return _render_json(config, header, rows)


def run_experiment(config: ExperimentConfig) -> str:
    """Execute the sweep and write its report file; returns the path."""
    content = experiment_report(config)
    ext = "csv" if config.fmt == "csv" else "json"
    name = f"{config.kind}_n{config.dim}_{config.lam_lo}_{config.lam_hi}.{ext}"
    path = os.path.join(config.out_dir, name)
    atomic_write_text(path, content)
    return path
