"""Thin command-line client for the sphere-lab service.

Every subcommand serializes its arguments into a request handled by the
FastAPI app.  By default the app runs in-process; `--server URL` points the
same client at a remote instance.  Exit codes: 0 success, 1 a check ran and
failed (or the run errored), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import httpx

from .errors import SphereLabError, UsageError
from .experiments import atomic_write_text


def _make_client(server: Optional[str]):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # starlette testclient deprecation noise
        from starlette.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app(), base_url="http://sphere-lab")


def _call(client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            body = resp.json()
        except Exception:
            body = {"error": "HTTPError", "detail": resp.text, "kind": "run"}
        if resp.status_code == 422:
            detail = body.get("detail")
            if isinstance(detail, list):
                parts = [
                    f"{'.'.join(str(x) for x in err.get('loc', [])[1:])}: {err.get('msg')}"
                    for err in detail
                ]
                raise UsageError("; ".join(parts))
            raise UsageError(str(detail))
        if body.get("kind") == "usage":
            raise UsageError(f"{body.get('error', 'UsageError')}: {body.get('detail')}")
        raise SphereLabError(f"{body.get('error', 'Error')}: {body.get('detail')}")
    return resp.json()


def parse_lambda_range(spec: str) -> list[int]:
    """A:B or A:B:odd / A:B:even, inclusive."""
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"bad range {spec!r}; expected A:B or A:B:odd|even")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"bad range bounds in {spec!r}") from exc
    parity = parts[2] if len(parts) == 3 else None
    if parity not in (None, "odd", "even"):
        raise UsageError(f"bad parity {parity!r}; expected odd or even")
    if lo > hi:
        raise UsageError(f"empty range {spec!r}")
    vals = range(lo, hi + 1)
    if parity == "odd":
        return [v for v in vals if v % 2 == 1]
    if parity == "even":
        return [v for v in vals if v % 2 == 0]
    return list(vals)


def _lambda_values(args) -> list[int]:
    if getattr(args, "lambda_range", None):
        return parse_lambda_range(args.lambda_range)
    if getattr(args, "lam", None) is None:
        raise UsageError("provide --lambda or --lambda-range")
    return [args.lam]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True).replace(",", ";")
    return str(value)


def _emit(args, payload, csv_rows=None) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        rows = csv_rows
        if rows is None:
            rows = payload if isinstance(payload, list) else [payload]
        if rows:
            header = list(rows[0].keys())
            lines = [",".join(header)]
            for row in rows:
                lines.append(",".join(_cell(row.get(k)) for k in header))
            text = "\n".join(lines) + "\n"
        else:
            text = "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


# --- subcommand handlers (return exit code) ---------------------------------


def cmd_enumerate(client, args) -> int:
    payload = _call(client, "/enumerate", {
        "n": args.dim, "lambda": args.lam, "include_points": args.points,
        "budget_points": args.budget_pairs,
    })
    _emit(args, payload)
    return 0


def cmd_energy(client, args) -> int:
    rows = [
        _call(client, "/energy", {"n": args.dim, "lambda": lam})
        for lam in _lambda_values(args)
    ]
    _emit(args, rows if len(rows) > 1 else rows[0], csv_rows=rows)
    return 0


def cmd_incidence(client, args) -> int:
    rows = []
    all_ok = True
    for lam in _lambda_values(args):
        payload = {"n": args.dim, "lambda": lam, "budget_pairs": args.budget_pairs}
        if args.check:
            payload["check"] = args.check
        row = _call(client, "/incidence", payload)
        all_ok &= bool(row["satisfied"])
        rows.append(row)
    _emit(args, rows if len(rows) > 1 else rows[0], csv_rows=rows)
    return 0 if all_ok else 1


def cmd_gram_count(client, args) -> int:
    payload = _call(client, "/gram-count", {
        "lambda": args.lam, "a": args.a, "b": args.b, "budget": args.budget_pairs,
    })
    _emit(args, payload)
    return 0


def cmd_density(client, args) -> int:
    body = {
        "lambda": args.lam, "a": args.a, "b": args.b, "p": args.p,
        "budget": args.budget_pairs,
    }
    if args.r_max is not None:
        body["r_max"] = args.r_max
    payload = _call(client, "/density", body)
    _emit(args, payload)
    return 0


def cmd_mass_check(client, args) -> int:
    payload = _call(client, "/mass-check", {
        "m": args.dim, "prime_cutoff": args.prime_cutoff,
        "budget": args.budget_pairs,
    })
    _emit(args, payload, csv_rows=payload["rows"])
    return 0 if payload["passed"] else 1


def cmd_gcd_sum(client, args) -> int:
    rows = [
        _call(client, "/gcd-sum", {"lambda": lam}) for lam in _lambda_values(args)
    ]
    _emit(args, rows if len(rows) > 1 else rows[0], csv_rows=rows)
    return 0


def cmd_paraboloid(client, args) -> int:
    if args.lambda_range:
        ns = parse_lambda_range(args.lambda_range)
    elif args.N is not None:
        ns = [args.N]
    else:
        raise UsageError("provide --N or --lambda-range for the N sweep")
    rows = [_call(client, "/paraboloid", {"N": N}) for N in ns]
    _emit(args, rows if len(rows) > 1 else rows[0], csv_rows=rows)
    return 0


def cmd_moments(client, args) -> int:
    body = {
        "n": args.dim, "lambda": args.lam, "p": args.p,
        "normalized": args.normalized,
    }
    if args.grid is not None:
        body["grid"] = args.grid
    payload = _call(client, "/moments", body)
    _emit(args, payload)
    return 0


def _parse_fit_rows(args) -> list[list[float]]:
    if args.rows:
        out = []
        for chunk in args.rows.split(";"):
            parts = chunk.split(",")
            if len(parts) != 2:
                raise UsageError(f"bad fit row {chunk!r}; expected x,y")
            out.append([float(parts[0]), float(parts[1])])
        return out
    if args.infile:
        out = []
        try:
            with open(args.infile) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    parts = line.split(",")
                    try:
                        out.append([float(parts[0]), float(parts[1])])
                    except (ValueError, IndexError):
                        continue  # header or malformed line
        except OSError as exc:
            raise UsageError(f"cannot read {args.infile}: {exc}") from exc
        return out
    raise UsageError("provide --rows or --in")


def cmd_fit(client, args) -> int:
    payload = _call(client, "/fit", {"rows": _parse_fit_rows(args)})
    _emit(args, payload)
    return 0


def cmd_suite(client, args) -> int:
    body = {"names": args.name or None}
    payload = _call(client, "/suite", body)
    for item in payload["results"]:
        status = "PASS" if item["passed"] else "FAIL"
        print(f"{status} {item['name']} ({item['elapsed']:.1f}s)")
    if args.out:
        _emit(args, payload, csv_rows=[
            {"name": r["name"], "passed": r["passed"], "elapsed": r["elapsed"]}
            for r in payload["results"]
        ])
    return 0 if payload["passed"] else 1


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("sphere_lab.service.app:app", host=args.host, port=args.port)
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphere-lab",
        description="Integer sphere-shell laboratory (thin client over the HTTP service)",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p, dim_default=4, with_lambda=True, with_range=True):
        p.add_argument("--dim", type=int, default=dim_default)
        if with_lambda:
            p.add_argument("--lambda", dest="lam", type=int, default=None)
        if with_range:
            p.add_argument("--lambda-range", dest="lambda_range", default=None,
                           metavar="A:B[:odd|even]")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget-pairs", dest="budget_pairs", type=int, default=10**8)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--server", default=None, metavar="URL")

    p = sub.add_parser("enumerate", help="lattice points on a shell")
    common(p, with_range=False)
    p.add_argument("--points", action="store_true", help="include the point list")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("energy", help="exact additive energy of a shell")
    common(p)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("incidence", help="sum-hyperplane incidence checks")
    common(p)
    p.add_argument("--check", choices=("lemma21", "lemma22", "prop23"), default=None)
    p.set_defaults(func=cmd_incidence)

    p = sub.add_parser("gram-count", help="correlated triple count for one (a, b) target")
    common(p, with_range=False)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.set_defaults(func=cmd_gram_count)

    p = sub.add_parser("density", help="truncated p-adic density of one target")
    common(p, with_range=False)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r-max", dest="r_max", type=int, default=None)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("mass-check", help="global counts vs product of local densities")
    common(p, with_lambda=False, with_range=False)
    p.add_argument("--prime-cutoff", dest="prime_cutoff", type=int, default=100)
    p.set_defaults(func=cmd_mass_check)

    p = sub.add_parser("gcd-sum", help="divisor-truncated pairwise gcd double sum")
    common(p)
    p.set_defaults(func=cmd_gcd_sum)

    p = sub.add_parser("paraboloid", help="truncated paraboloid energy")
    common(p, with_lambda=False)
    p.add_argument("--N", type=int, default=None)
    p.set_defaults(func=cmd_paraboloid)

    p = sub.add_parser("moments", help="even moments of the shell exponential sum")
    common(p, with_range=False)
    p.add_argument("--p", type=int, default=4, choices=(4, 6))
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--normalized", action="store_true",
                   help="normalized coefficients on a quadrature grid")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("fit", help="log-log slope fit")
    common(p, with_lambda=False, with_range=False)
    p.add_argument("--rows", default=None, metavar="x,y;x,y;...")
    p.add_argument("--in", dest="infile", default=None, metavar="CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("suite", help="named end-to-end checks")
    common(p, with_lambda=False, with_range=False)
    p.add_argument("--name", action="append", default=None,
                   help="criterion name (repeatable); default all")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve, serve=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    if getattr(args, "serve", False):
        return cmd_serve(args)
    try:
        with _make_client(args.server) as client:
            return args.func(client, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SphereLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
