"""Request/response schemas for the HTTP service.

The wire name for the scale parameter is "lambda"; Python attributes use
`lam` with field aliases.  All models accept population by attribute name so
in-process callers can skip the alias.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Model(BaseModel):
    model_config = ConfigDict(populate_by_name=True)


class EnumerateRequest(_Model):
    n: int = Field(4, ge=1, le=8)
    lam: int = Field(..., alias="lambda", ge=0)
    include_points: bool = False
    budget_points: int = Field(10**7, gt=0)


class EnumerateResponse(_Model):
    n: int
    lam: int = Field(..., alias="lambda")
    size: int
    N: int
    points: Optional[list[list[int]]] = None


class EnergyRequest(_Model):
    n: int = Field(4, ge=1, le=8)
    lam: int = Field(..., alias="lambda", ge=0)


class EnergyResponse(_Model):
    n: int
    lam: int = Field(..., alias="lambda")
    N: Optional[int]
    set_size: int
    energy: int
    ratio_vs_target: Optional[float] = None


class IncidenceRequest(_Model):
    n: int = Field(4, ge=4, le=5)
    lam: int = Field(..., alias="lambda", ge=1)
    check: Optional[str] = Field(None, pattern="^(lemma21|lemma22|prop23)$")
    budget_pairs: int = Field(10**8, gt=0)


class IncidenceResponse(_Model):
    n: int
    lam: Optional[int] = Field(None, alias="lambda")
    num_points: int
    num_hyperplanes: int
    incidences: int
    gamma_obs: int
    gamma_used: int
    bound: float
    satisfied: bool
    implied_constant: Optional[float]
    check: str


class GramCountRequest(_Model):
    lam: int = Field(..., alias="lambda", ge=1)
    a: int
    b: int
    budget: int = Field(10**9, gt=0)


class GramCountResponse(_Model):
    lam: int = Field(..., alias="lambda")
    a: int
    b: int
    det: str  # exact rational as "num" or "num/den"
    count: int


class DensityRequest(_Model):
    lam: int = Field(..., alias="lambda", ge=1)
    a: int
    b: int
    p: int = Field(..., ge=2)
    r_max: Optional[int] = Field(None, ge=1, le=8)
    budget: int = Field(2 * 10**8, gt=0)


class DensityResponse(_Model):
    p: int
    m: int
    n: int
    doubled_gram: list[list[int]]
    counts: list[list[int]]
    normalized: list[list[Any]]
    stabilized: bool
    good_prime: bool
    nu: Optional[str]


class MassCheckRequest(_Model):
    m: int = Field(4, ge=4, le=5)
    prime_cutoff: int = Field(100, ge=3)
    budget: int = Field(2 * 10**8, gt=0)


class MassRowModel(_Model):
    target_id: str
    det: int
    global_count: int
    product_nu: str
    ratio: str
    stable: bool
    unstable_primes: list[int]


class MassCheckResponse(_Model):
    m: int
    n: int
    prime_cutoff: int
    assumption: str
    median_ratio: Optional[str]
    max_rel_deviation: Optional[str]
    max_rel_deviation_float: Optional[float]
    excluded: list[str]
    tail_bound: float
    passed: bool
    rows: list[MassRowModel]


class GcdSumRequest(_Model):
    lam: int = Field(..., alias="lambda", ge=0)


class GcdSumResponse(_Model):
    lam: int = Field(..., alias="lambda")
    value: int


class ParaboloidRequest(_Model):
    N: int = Field(..., ge=1, le=64)


class ParaboloidResponse(_Model):
    N: int
    size: int
    energy: int
    ratio_vs_target: float


class MomentsRequest(_Model):
    n: int = Field(4, ge=1, le=8)
    lam: int = Field(..., alias="lambda", ge=0)
    p: int = Field(4)
    grid: Optional[int] = Field(None, ge=2)
    normalized: bool = False


class MomentsResponse(_Model):
    n: int
    lam: int = Field(..., alias="lambda")
    p: int
    exact: bool
    value: float
    value_exact: Optional[int] = None
    grid: Optional[int] = None


class FitRequest(_Model):
    rows: list[tuple[float, float]]


class FitResponse(_Model):
    slope: float
    intercept: float
    residual: float
    points: int


class SuiteRequest(_Model):
    names: Optional[list[str]] = None


class SuiteResultModel(_Model):
    name: str
    passed: bool
    elapsed: float
    details: dict


class SuiteResponse(_Model):
    results: list[SuiteResultModel]
    passed: bool


class ErrorResponse(_Model):
    error: str
    detail: str
    kind: str  # "usage" | "run"
