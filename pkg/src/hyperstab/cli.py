"""Command-line front end.

Exit codes: 0 certified or stable, 2 falsified or unstable, 3 unknown or
inconclusive, 64 usage and schema errors.  ``selftest`` exits 1 when a
criterion fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from .config import AnalysisConfig, Budget, Tolerances
from .errors import HyperstabError, SchemaError
from .verdicts import _jsonable

EXIT_OK, EXIT_NEGATIVE, EXIT_UNKNOWN, EXIT_USAGE, EXIT_SELFTEST_FAIL = 0, 2, 3, 64, 1
SCHEMA_NAMES = ("polynomial", "matrix_polynomial", "region", "regions", "exact_matrix", "mv_polynomial")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def load_schema(name: str) -> dict[str, Any]:
    if name not in SCHEMA_NAMES:
        raise UsageError(f"unknown schema {name!r}; choose from {', '.join(SCHEMA_NAMES)}")
    return json.loads(resources.files("hyperstab").joinpath("schemas", f"{name}.json").read_text())


def _read_json(value: str) -> Any:
    """Inline JSON or a path to a JSON file."""
    text = value.strip()
    if not text.startswith(("{", "[")):
        path = Path(value)
        if not path.exists():
            raise UsageError(f"no such file: {value}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None


def _validated(value: str, schema: str) -> Any:
    doc = _read_json(value)
    validator = jsonschema.Draft202012Validator(load_schema(schema))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "".join(f"/{p}" for p in e.absolute_path)
        raise SchemaError(pointer, e.message)
    return doc


def _params(items: Sequence[str] | None) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _matrix_input(args) -> Any:
    from .fixtures import matrix_fixture
    from .matpoly import MatrixPolynomial
    if args.poly and args.fixture:
        raise UsageError("give either --poly or --fixture, not both")
    if args.poly:
        return MatrixPolynomial.from_json(_validated(args.poly, "matrix_polynomial"))
    if args.fixture:
        try:
            return matrix_fixture(args.fixture, **_params(args.param))
        except (KeyError, TypeError) as exc:
            raise UsageError(str(exc)) from None
    raise UsageError("an input polynomial is required (--poly or --fixture)")


def _region(args, required: bool = True):
    from .regions import Region
    if not args.region:
        if required:
            raise UsageError("--region is required")
        return None
    return Region.from_json(_validated(args.region, "region"))


def _config(args) -> AnalysisConfig:
    budget = Budget()
    overrides = {k: getattr(args, k) for k in ("x_samples", "y_starts", "det_min_starts")
                 if getattr(args, k, None) is not None}
    if overrides:
        budget = Budget(**{**budget.__dict__, **overrides})
    tol = Tolerances(tau_bnd=getattr(args, "tau_bnd", None) or Tolerances().tau_bnd)
    return AnalysisConfig(seed=args.seed, budget=budget, tolerances=tol, pretty=not args.compact)


def _emit(doc: Any, args) -> None:
    doc = _jsonable(doc)
    if getattr(args, "compact", False):
        print(json.dumps(doc, separators=(",", ":")))
    else:
        print(json.dumps(doc, indent=2))


# ---------------------------------------------------------------------------
# subcommands


def cmd_roots(args) -> int:
    from .scalarpoly import ComplexPolynomial, roots, stability_report
    p = ComplexPolynomial.from_json(_validated(args.poly, "polynomial"))
    doc: dict[str, Any] = {"roots": roots(p).to_json()}
    D = _region(args, required=False)
    code = EXIT_OK
    if D is not None:
        rep = stability_report(p, D, args.tau_bnd or Tolerances().tau_bnd)
        doc["stability"] = {"stable": rep.stable, "boundary_sensitive": rep.boundary_sensitive,
                            "offending": rep.offending}
        code = EXIT_OK if rep.stable else EXIT_NEGATIVE
    _emit(doc, args)
    return code


def cmd_eig(args) -> int:
    from .matpoly import eigenvalues
    from .stability import check_stable
    P = _matrix_input(args)
    doc: dict[str, Any] = {"eigenvalues": eigenvalues(P).to_json()}
    D = _region(args, required=False)
    code = EXIT_OK
    if D is not None:
        st = check_stable(P, D, args.tau_bnd or Tolerances().tau_bnd)
        doc["stability"] = st.to_json()
        code = EXIT_OK if st.status == "stable" else EXIT_NEGATIVE
    _emit(doc, args)
    return code


def cmd_analyze(args) -> int:
    from .stability import check_hyperstable
    P = _matrix_input(args)
    D = _region(args)
    cfg = _config(args)
    v = check_hyperstable(P, D, cfg.budget, cfg.seed, cfg.tolerances.tau_bnd)
    _emit({"verdict": v.to_json(), "region": D.to_json(), "config": cfg.to_json()}, args)
    return v.exit_code


def cmd_numrange(args) -> int:
    from .numrange import wp_disjoint_from
    P = _matrix_input(args)
    D = _region(args)
    cfg = _config(args)
    res = wp_disjoint_from(P, D, cfg.budget, cfg.seed)
    _emit({"numrange": res.to_json(), "region": D.to_json(), "config": cfg.to_json()}, args)
    return {"disjoint": EXIT_OK, "intersects": EXIT_NEGATIVE}.get(res.status, EXIT_UNKNOWN)


def _lambda(text: str | None) -> complex | None:
    if text is None:
        return None
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--lambda expects re,im, got {text!r}") from None
    if len(parts) not in (1, 2):
        raise UsageError(f"--lambda expects re,im, got {text!r}")
    return complex(parts[0], parts[1] if len(parts) == 2 else 0.0)


def cmd_szasz(args) -> int:
    import numpy as np
    from .matpoly import MatrixPolynomial
    from .scalarpoly import ComplexPolynomial
    from .szasz import CmvFixture, FactoredPolynomial, comp_case, compare, ones_factored
    lam = _lambda(args.lam)
    if args.fixture == "comp":
        rep = compare(comp_case(args.case))
    elif args.fixture == "ones":
        rep = compare(ones_factored(args.n, args.d), lam if lam is not None else 1.0)
    elif args.fixture == "cmv":
        y = lam.imag if lam is not None else 1.0
        value = float(np.linalg.norm(CmvFixture(args.n, args.k)(1j * y), "fro"))
        limit = CmvFixture.limit(args.n, y)
        _emit({"n": args.n, "k": args.k, "y": y, "norm": value, "limit": limit, "error": abs(value - limit)}, args)
        return EXIT_OK
    elif args.mode == "matrix":
        P = MatrixPolynomial.from_json(_validated(_need(args.poly, "--poly"), "matrix_polynomial"))
        rep = compare(P, lam if lam is not None else 1j, assert_hypothesis=args.assert_hypothesis)
    elif args.mode == "factored":
        doc = _validated(_need(args.poly, "--poly"), "matrix_polynomial")
        factors = MatrixPolynomial.from_json(doc).coeffs
        rep = compare(FactoredPolynomial(factors), lam if lam is not None else 1j)
    elif args.mode == "calculus":
        p = ComplexPolynomial.from_json(_validated(_need(args.poly, "--poly"), "polynomial"))
        A = MatrixPolynomial.from_json(_validated(_need(args.matrix, "--matrix"), "matrix_polynomial")).coeffs[0]
        rep = compare((p, A))
    else:
        raise UsageError("szasz needs --fixture or --mode")
    _emit(rep.to_json(), args)
    return EXIT_OK


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required in this mode")
    return value


def cmd_polarize(args) -> int:
    from .multipoly import polarize
    P = _matrix_input(args)
    _emit(polarize(P, args.kappa).to_json(), args)
    return EXIT_OK


def cmd_mvcheck(args) -> int:
    from .multipoly import SparseMVMatrixPoly, mv_hyperstable, mv_stable, polarized_sparse
    from .regions import Region
    cfg = _config(args)
    if args.mvpoly:
        Q = SparseMVMatrixPoly.from_json(_validated(args.mvpoly, "mv_polynomial"))
    elif args.fixture == "nonstab":
        from .fixtures import exa
        Q = polarized_sparse(exa(), 2)
    else:
        raise UsageError("mvcheck needs --mvpoly or --fixture nonstab")
    regions = [Region.from_json(r) for r in _validated(args.regions, "regions")]
    if len(regions) == 1:
        regions = regions * Q.kappa
    if args.mode == "hyperstable":
        v = mv_hyperstable(Q, regions, cfg.budget, cfg.seed)
        _emit({"verdict": v.to_json(), "config": cfg.to_json()}, args)
        return v.exit_code
    res = mv_stable(Q, regions, cfg.budget, cfg.seed)
    _emit({"stability": res.to_json(), "config": cfg.to_json()}, args)
    return EXIT_NEGATIVE if res.status == "falsified" else EXIT_UNKNOWN


def cmd_smith(args) -> int:
    from .smith import ExactPolyMatrix, smith_form
    P = ExactPolyMatrix.from_json(_validated(args.poly, "exact_matrix"))
    _emit(smith_form(P).to_json(), args)
    return EXIT_OK


def cmd_orbit_witness(args) -> int:
    from .smith import ExactPolyMatrix, orbit_witness, smith_form
    S = ExactPolyMatrix.from_json(_validated(args.poly, "exact_matrix")) if args.poly \
        else ExactPolyMatrix.identity(args.n)
    w = orbit_witness(smith_form(S), args.d)
    _emit(w.to_json(), args)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import CRITERIA
    wanted = set(args.only or [])
    results = []
    for k, crit in enumerate(CRITERIA, start=1):
        if wanted and k not in wanted:
            continue
        r = crit(args.seed)
        results.append(r)
        if not args.json:
            print(r.line(), flush=True)
    if args.json:
        docs = []
        for r in results:
            d = r.to_json()
            d.pop("seconds")
            docs.append(d)
        _emit({"seed": args.seed, "criteria": docs, "passed": all(r.passed for r in results)}, args)
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST_FAIL


# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, matrix: bool = False, region: bool = False, search: bool = False) -> None:
    if matrix:
        p.add_argument("--poly", help="matrix polynomial JSON (inline or file)")
        p.add_argument("--fixture", help="named fixture, e.g. exa, sing, nonGL, hyper_nsinf, mgt")
        p.add_argument("--param", action="append", metavar="KEY=VALUE", help="fixture parameter (repeatable)")
    if region:
        p.add_argument("--region", help="region JSON (inline or file)")
    if search:
        p.add_argument("--x-samples", dest="x_samples", type=int)
        p.add_argument("--y-starts", dest="y_starts", type=int)
        p.add_argument("--det-min-starts", dest="det_min_starts", type=int)
    p.add_argument("--tau-bnd", dest="tau_bnd", type=float, help="boundary tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compact", action="store_true", help="single-line JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hyperstab", description="Stability and hyperstability of matrix polynomials.")
    ap.add_argument("--schema", nargs="?", const="all", metavar="NAME",
                    help="print the JSON schema(s) for inputs and exit")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("roots", help="roots of a scalar polynomial")
    p.add_argument("--poly", required=True, help="scalar polynomial JSON")
    _common(p, region=True)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("eig", help="finite eigenvalues and stability")
    _common(p, matrix=True, region=True)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("analyze", help="hyperstability verdict")
    _common(p, matrix=True, region=True, search=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("numrange", help="numerical range versus a region")
    _common(p, matrix=True, region=True, search=True)
    p.set_defaults(func=cmd_numrange)

    p = sub.add_parser("szasz", help="norm bounds")
    p.add_argument("--fixture", choices=["ones", "cmv", "comp"])
    p.add_argument("--mode", choices=["matrix", "factored", "calculus"],
                   help="matrix: P with A_0 = I; factored: --poly coeffs are the factors B_j; "
                        "calculus: scalar --poly and constant --matrix")
    p.add_argument("--case", type=int, default=1, choices=[1, 2, 3])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=1024)
    p.add_argument("--poly", help="polynomial JSON (inline or file)")
    p.add_argument("--matrix", help="constant matrix as a degree-0 matrix polynomial JSON")
    p.add_argument("--lambda", dest="lam", metavar="RE,IM")
    p.add_argument("--assert-hypothesis", dest="assert_hypothesis", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_szasz)

    p = sub.add_parser("polarize", help="polarisation operator T_kappa")
    p.add_argument("--kappa", type=int, required=True)
    _common(p, matrix=True)
    p.set_defaults(func=cmd_polarize)

    p = sub.add_parser("mvcheck", help="multivariate stability or hyperstability")
    p.add_argument("--mvpoly", help="sparse multivariate polynomial JSON")
    p.add_argument("--fixture", choices=["nonstab"])
    p.add_argument("--regions", required=True, help="JSON list of regions (one per variable, or one shared)")
    p.add_argument("--mode", choices=["stable", "hyperstable"], default="stable")
    _common(p, search=True)
    p.set_defaults(func=cmd_mvcheck)

    p = sub.add_parser("smith", help="exact Smith canonical form")
    p.add_argument("--poly", required=True, help="exact matrix JSON")
    _common(p)
    p.set_defaults(func=cmd_smith)

    p = sub.add_parser("orbit-witness", help="non-hyperstable member of an equivalence orbit")
    p.add_argument("--poly", help="exact matrix JSON whose Smith form is used (default identity)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int)
    _common(p)
    p.set_defaults(func=cmd_orbit_witness)

    p = sub.add_parser("selftest", help="run the acceptance criteria")
    p.add_argument("--only", type=int, action="append", metavar="K", help="run criterion K (repeatable)")
    p.add_argument("--json", action="store_true", help="JSON report instead of the table")
    _common(p)
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.schema:
        try:
            names = SCHEMA_NAMES if args.schema == "all" else (args.schema,)
            print(json.dumps({n: load_schema(n) for n in names}, indent=2))
        except UsageError as exc:
            print(f"hyperstab: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        return EXIT_OK
    if not getattr(args, "func", None):
        ap.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SchemaError as exc:
        print(json.dumps({"error": "schema", "pointer": exc.pointer, "message": exc.message}), file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"hyperstab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HyperstabError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
