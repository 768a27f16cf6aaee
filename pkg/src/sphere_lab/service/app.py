"""HTTP service exposing the lattice-shell toolkit.

Endpoints mirror the CLI subcommands one-to-one; the CLI is a thin client of
this app (in-process by default).  Errors surface as HTTP 400 with a `kind`
discriminating usage mistakes from runtime failures so clients can map exit
codes without parsing messages.
"""

from __future__ import annotations

from fractions import Fraction

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..density import gcd_sum, local_density, mass_consistency
from ..energy import additive_energy, shell_energy
from ..errors import SphereLabError, UsageError
from ..experiments import CoefficientMap, even_moment, fit_exponent
from ..gram import count_gram_solutions, lambda_ab_target
from ..incidence import (
    check_lemma_4d,
    check_lemma_5d,
    prop23_report,
    sum_hyperplane_family,
)
from ..lattice import enumerate_paraboloid, enumerate_shell, shell_point_set
from ..suites import MASS_R_MAX, run_all
from . import models


def create_app() -> FastAPI:
    app = FastAPI(title="sphere-lab", version=__version__)

    @app.exception_handler(SphereLabError)
    async def _sphere_lab_error(request: Request, exc: SphereLabError):
        kind = "usage" if isinstance(exc, UsageError) else "run"
        payload = models.ErrorResponse(
            error=type(exc).__name__, detail=str(exc), kind=kind
        )
        return JSONResponse(status_code=400, content=payload.model_dump())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/enumerate", response_model=models.EnumerateResponse)
    def enumerate_endpoint(req: models.EnumerateRequest):
        shell = enumerate_shell(req.n, req.lam, budget_points=req.budget_points)
        points = None
        if req.include_points:
            points = [[int(v) for v in row] for row in shell.points]
        return models.EnumerateResponse(
            n=req.n, lam=req.lam, size=shell.size, N=shell.N, points=points
        )

    @app.post("/energy", response_model=models.EnergyResponse)
    def energy_endpoint(req: models.EnergyRequest):
        res = shell_energy(enumerate_shell(req.n, req.lam))
        ratio = None
        if res.N is not None and req.n in (4, 5) and res.set_size:
            target_exp = 4 if req.n == 4 else 7
            ratio = res.energy / res.N**target_exp
        return models.EnergyResponse(
            n=req.n, lam=req.lam, N=res.N, set_size=res.set_size,
            energy=res.energy, ratio_vs_target=ratio,
        )

    @app.post("/incidence", response_model=models.IncidenceResponse)
    def incidence_endpoint(req: models.IncidenceRequest):
        pset = shell_point_set(enumerate_shell(req.n, req.lam))
        family = sum_hyperplane_family(pset)
        check = req.check or ("lemma21" if req.n == 4 else "lemma22")
        if check == "lemma21":
            report = check_lemma_4d(pset, family, budget=req.budget_pairs)
        elif check == "lemma22":
            report = check_lemma_5d(pset, family, budget=req.budget_pairs)
        else:
            report = prop23_report(pset, family, budget=req.budget_pairs)
        return models.IncidenceResponse(**report.to_json_dict())

    @app.post("/gram-count", response_model=models.GramCountResponse)
    def gram_count_endpoint(req: models.GramCountRequest):
        target = lambda_ab_target(req.lam, req.a, req.b)
        res = count_gram_solutions(target, budget=req.budget)
        return models.GramCountResponse(
            lam=req.lam, a=req.a, b=req.b,
            det=str(target.det_plain()), count=res.count,
        )

    @app.post("/density", response_model=models.DensityResponse)
    def density_endpoint(req: models.DensityRequest):
        target = lambda_ab_target(req.lam, req.a, req.b)
        est = local_density(target, req.p, r_max=req.r_max, budget=req.budget)
        payload = est.to_json_dict()
        payload["good_prime"] = est.good_prime
        payload["nu"] = str(est.nu) if est.nu is not None else None
        return models.DensityResponse(**payload)

    @app.post("/mass-check", response_model=models.MassCheckResponse)
    def mass_check_endpoint(req: models.MassCheckRequest):
        report = mass_consistency(
            req.m, prime_cutoff=req.prime_cutoff, r_max=MASS_R_MAX, budget=req.budget
        )
        passed = (
            report.max_rel_deviation is not None
            and report.max_rel_deviation <= Fraction(1, 4)
        )
        rows = [
            models.MassRowModel(
                target_id=row.label, det=row.det, global_count=row.global_count,
                product_nu=str(row.product_nu), ratio=str(row.ratio),
                stable=row.stable, unstable_primes=list(row.unstable_primes),
            )
            for row in report.rows
        ]
        return models.MassCheckResponse(
            m=report.m, n=report.n, prime_cutoff=report.prime_cutoff,
            assumption=report.assumption,
            median_ratio=(
                str(report.median_ratio) if report.median_ratio is not None else None
            ),
            max_rel_deviation=(
                str(report.max_rel_deviation)
                if report.max_rel_deviation is not None else None
            ),
            max_rel_deviation_float=(
                float(report.max_rel_deviation)
                if report.max_rel_deviation is not None else None
            ),
            excluded=list(report.excluded), tail_bound=report.tail_bound,
            passed=passed, rows=rows,
        )

    @app.post("/gcd-sum", response_model=models.GcdSumResponse)
    def gcd_sum_endpoint(req: models.GcdSumRequest):
        return models.GcdSumResponse(lam=req.lam, value=gcd_sum(req.lam))

    @app.post("/paraboloid", response_model=models.ParaboloidResponse)
    def paraboloid_endpoint(req: models.ParaboloidRequest):
        pset = enumerate_paraboloid(req.N)
        res = additive_energy(pset)
        return models.ParaboloidResponse(
            N=req.N, size=pset.size, energy=res.energy,
            ratio_vs_target=res.energy / req.N**7,
        )

    @app.post("/moments", response_model=models.MomentsResponse)
    def moments_endpoint(req: models.MomentsRequest):
        pset = shell_point_set(enumerate_shell(req.n, req.lam))
        if not req.normalized:
            value = even_moment(pset, None, req.p)
            return models.MomentsResponse(
                n=req.n, lam=req.lam, p=req.p, exact=True,
                value=float(value), value_exact=int(value), grid=None,
            )
        coeffs = CoefficientMap.normalized_ones(pset)
        value = even_moment(pset, coeffs, req.p, grid_per_axis=req.grid)
        used = req.grid
        if used is None:
            from ..lattice import scale_parameter

            used = 8 * scale_parameter(req.lam)
        return models.MomentsResponse(
            n=req.n, lam=req.lam, p=req.p, exact=False,
            value=float(value), value_exact=None, grid=used,
        )

    @app.post("/fit", response_model=models.FitResponse)
    def fit_endpoint(req: models.FitRequest):
        res = fit_exponent(req.rows)
        return models.FitResponse(
            slope=res.slope, intercept=res.intercept,
            residual=res.residual, points=len(res.rows),
        )

    @app.post("/suite", response_model=models.SuiteResponse)
    def suite_endpoint(req: models.SuiteRequest):
        results = run_all(req.names)
        items = [
            models.SuiteResultModel(
                name=r.name, passed=r.passed, elapsed=r.elapsed, details=r.details
            )
            for r in results
        ]
        return models.SuiteResponse(results=items, passed=all(r.passed for r in results))

    return app


app = create_app()
