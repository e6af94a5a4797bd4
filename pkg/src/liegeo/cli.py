"""Command-line front end.

Problem files are JSON documents::

    {"name": "h1", "dim": 3,
     "brackets": [{"i": 1, "j": 2, "coeffs": {"3": 1.0}}],
     "gram": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}

Indices are 1-based; ``gram`` is optional and defaults to the identity.

Exit codes: 0 success, 1 parse or validation error, 2 not a Lie algebra,
3 no applicable construction (or a certificate that did not conclude).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .constructions import (codim1_abelian_geodesic_basis, dim4_geodesic_basis,
                            find_codim1_abelian_ideal, milnor_geodesic_basis,
                            nilpotent_geodesic_basis)
from .geodesic import GeodesicSearchConfig, geodesic_span_rank, search_geodesics
from .lie_core import (TAU_ALG, LieAlgebra, PreconditionError, center, derived_algebra,
                       is_nilpotent, is_solvable, is_unimodular, jacobi_residual)
from .metric import InnerProduct, random_inner_product

EXIT_OK, EXIT_PARSE, EXIT_NOT_LIE, EXIT_NO_CONSTRUCTION = 0, 1, 2, 3


class ProblemError(ValueError):
    """Invalid problem file; the message names the offending field or position."""


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ProblemError(f"{where}: must be finite")
    return float(value)


def _index(value, dim: int, where: str) -> int:
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemError(f"{where}: expected an integer index, got {value!r}")
    if not 1 <= value <= dim:
        raise ProblemError(f"{where}: index {value} out of range 1..{dim}")
    return value - 1


def parse_gram(raw, dim: int, where: str = "gram") -> InnerProduct:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ProblemError(f"{where}: expected a {dim}x{dim} matrix")
    rows = []
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != dim:
            raise ProblemError(f"{where}[{r}]: expected a row of length {dim}")
        rows.append([_number(x, f"{where}[{r}][{s}]") for s, x in enumerate(row)])
    try:
        return InnerProduct(np.array(rows), tag="file")
    except ValueError as exc:
        raise ProblemError(f"{where}: {exc}") from None


def parse_problem(doc) -> tuple[LieAlgebra, InnerProduct]:
    if not isinstance(doc, dict):
        raise ProblemError("top level: expected an object")
    unknown = sorted(set(doc) - {"dim", "brackets", "gram", "name"})
    if unknown:
        raise ProblemError(f"top level: unknown field(s) {', '.join(unknown)}")
    dim = doc.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ProblemError(f"dim: expected a positive integer, got {dim!r}")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ProblemError("name: expected a string")
    brackets = doc.get("brackets", [])
    if not isinstance(brackets, list):
        raise ProblemError("brackets: expected a list")
    c = np.zeros((dim, dim, dim))
    seen: set[tuple[int, int]] = set()
    for idx, entry in enumerate(brackets):
        where = f"brackets[{idx}]"
        if not isinstance(entry, dict):
            raise ProblemError(f"{where}: expected an object")
        extra = sorted(set(entry) - {"i", "j", "coeffs"})
        if extra:
            raise ProblemError(f"{where}: unknown field(s) {', '.join(extra)}")
        for key in ("i", "j", "coeffs"):
            if key not in entry:
                raise ProblemError(f"{where}: missing field {key}")
        i = _index(entry["i"], dim, f"{where}.i")
        j = _index(entry["j"], dim, f"{where}.j")
        if i == j:
            raise ProblemError(f"{where}: a bracket [e_{i + 1}, e_{i + 1}] is always zero")
        pair = (min(i, j), max(i, j))
        if pair in seen:
            raise ProblemError(f"{where}: pair ({pair[0] + 1}, {pair[1] + 1}) given twice")
        seen.add(pair)
        coeffs = entry["coeffs"]
        if not isinstance(coeffs, dict):
            raise ProblemError(f"{where}.coeffs: expected an object mapping index to number")
        for k, v in coeffs.items():
            kk = _index(k, dim, f"{where}.coeffs key")
            c[i, j, kk] = _number(v, f"{where}.coeffs[{k}]")
    alg = LieAlgebra(c, name=name)
    metric = (parse_gram(doc["gram"], dim) if doc.get("gram") is not None
              else InnerProduct.identity(dim))
    return alg, metric


def problem_to_dict(alg: LieAlgebra, metric: InnerProduct | None = None) -> dict:
    out: dict = {}
    if alg.name:
        out["name"] = alg.name
    out["dim"] = alg.n
    out["brackets"] = [{"i": i + 1, "j": j + 1, "coeffs": {str(k + 1): v for k, v in co.items()}}
                       for (i, j), co in alg.brackets().items()]
    if metric is not None:
        out["gram"] = metric.gram.tolist()
    return out


def load_problem(path: str, gram_path: str | None = None) -> tuple[LieAlgebra, InnerProduct]:
    alg, metric = parse_problem(_load_json(path))
    if gram_path is not None:
        metric = load_gram(gram_path, alg.n)
    return alg, metric


def load_gram(path: str, dim: int) -> InnerProduct:
    raw = _load_json(path)
    if isinstance(raw, dict):
        if "gram" not in raw:
            raise ProblemError(f"{path}: expected a matrix or an object with a gram field")
        raw = raw["gram"]
    return parse_gram(raw, dim, where=f"{path}: gram")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x if x is None or isinstance(x, str) else str(x)


def dumps(report: dict) -> str:
    return json.dumps(_plain(report), indent=2)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _vec(v) -> str:
    return "[" + ", ".join(f"{x: .6f}" for x in v) + "]"


def _emit(report: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        print(dumps(report))
    else:
        print("\n".join(lines))


def _err(msg: str) -> None:
    print(f"liegeo: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def check_report(alg: LieAlgebra) -> dict:
    res = jacobi_residual(alg)
    report = {"name": alg.name, "dim": alg.n, "jacobi_residual": res, "is_lie_algebra": res <= TAU_ALG}
    if res <= TAU_ALG:
        report.update({
            "unimodular": is_unimodular(alg),
            "solvable": is_solvable(alg),
            "nilpotent": is_nilpotent(alg),
            "derived_dim": derived_algebra(alg).dim,
            "center_dim": center(alg).dim,
        })
    return report


def cmd_check(args) -> int:
    alg, _ = load_problem(args.file, args.gram)
    report = check_report(alg)
    lines = [f"{k:<16} {_fmt(v) if isinstance(v, float) else v}" for k, v in report.items()]
    _emit(report, args.json, lines)
    return EXIT_OK if report["is_lie_algebra"] else EXIT_NOT_LIE


def construct_basis(alg: LieAlgebra, metric: InnerProduct):
    """Run the first applicable construction, or return ``None``."""
    uni = is_unimodular(alg)
    if alg.n == 3 and uni:
        return milnor_geodesic_basis(alg, metric)
    if alg.n == 4 and uni:
        return dim4_geodesic_basis(alg, metric)
    if is_nilpotent(alg):
        return nilpotent_geodesic_basis(alg, metric)
    if uni:
        ideal = find_codim1_abelian_ideal(alg)
        if ideal is not None:
            return codim1_abelian_geodesic_basis(alg, metric, ideal)
    return None


def _no_construction_reason(alg: LieAlgebra) -> str:
    if not is_unimodular(alg):
        return "algebra is not unimodular, so no inner product admits an orthonormal geodesic basis"
    return ("no implemented construction applies (needs dimension <= 4, nilpotency, "
            "or a codimension-one abelian ideal)")


def cmd_basis(args) -> int:
    alg, metric = load_problem(args.file, args.gram)
    res = jacobi_residual(alg)
    if res > TAU_ALG:
        _err(f"not a Lie algebra (Jacobi residual {_fmt(res)})")
        return EXIT_NOT_LIE
    rep = construct_basis(alg, metric)
    if rep is None:
        reason = _no_construction_reason(alg)
        _emit({"name": alg.name, "path": None, "verdict": None, "message": reason}, args.json,
              [f"no construction: {reason}"])
        return EXIT_NO_CONSTRUCTION
    report = {"name": alg.name, **rep.to_dict()}
    lines = [f"path      {rep.path}", f"verdict   {rep.verdict}",
             f"gram dev  {_fmt(rep.gram_deviation)}", "basis (reference coordinates, residual):"]
    lines += [f"  v{k + 1} = {_vec(v)}  {_fmt(r)}"
              for k, (v, r) in enumerate(zip(rep.vectors, rep.geodesic_residuals))]
    _emit(report, args.json, lines)
    return EXIT_OK if rep.verdict == "orthonormal_geodesic" else EXIT_NO_CONSTRUCTION


def _config(args) -> GeodesicSearchConfig:
    return GeodesicSearchConfig(n_starts=args.starts, seed=args.seed)


def geodesics_report(alg: LieAlgebra, metric: InnerProduct, cfg: GeodesicSearchConfig) -> dict:
    search = search_geodesics(alg, metric, cfg)
    return {
        "name": alg.name,
        "n_starts": cfg.n_starts,
        "seed": cfg.seed,
        **search.to_dict(),
        "span_rank": geodesic_span_rank(alg, metric, vectors=search.vectors),
    }


def cmd_geodesics(args) -> int:
    alg, metric = load_problem(args.file, args.gram)
    res = jacobi_residual(alg)
    if res > TAU_ALG:
        _err(f"not a Lie algebra (Jacobi residual {_fmt(res)})")
        return EXIT_NOT_LIE
    report = geodesics_report(alg, metric, _config(args))
    lines = [f"found {len(report['vectors'])} geodesic directions "
             f"({report['n_converged']} of {report['n_starts']} starts converged)",
             f"span rank {report['span_rank']}"]
    lines += [f"  {_vec(v)}  {_fmt(r)}" for v, r in zip(report["vectors"], report["residuals"])]
    _emit(report, args.json, lines)
    return EXIT_OK


def _certificate_lines(cert) -> list[str]:
    b, c = cert.fact_outside_v2, cert.fact_case4_orthogonality
    return [
        f"  no geodesic in V_4         {cert.fact_small_flags['ok']} "
        f"(min residual {_fmt(cert.fact_small_flags['v4_min_residual'])})",
        f"  outside V_2 only normal    {b['ok']} ({b['n_found']} found, "
        f"max distance {_fmt(b['max_distance_to_normal'])})",
        f"  case-4 orthogonal to V_4   {c['ok']} ({c['n_found']} found)",
        f"  image formulas             {cert.fact_image_formulas['ok']}",
        f"  trace ad(X_1) on V_3       {cert.fact_trace!r}",
        f"  conclusion                 {cert.conclusion}",
    ]


def cmd_counterexample(args) -> int:
    cfg = _config(args)
    report: dict = {"epsilon": args.epsilon}
    lines: list[str] = []
    ok = True
    if args.random is not None:
        results = []
        for idx in range(args.random):
            metric = random_inner_product(5, np.random.default_rng([args.seed, idx]))
            cert = catalog.certify_no_orthonormal_geodesic_basis(metric, cfg)
            results.append({"index": idx, "conclusion": cert.conclusion, "fact_trace": cert.fact_trace})
        n_true = sum(r["conclusion"] for r in results)
        report.update({"random": args.random, "seed": args.seed, "n_true": n_true,
                       "certificates": results})
        lines.append(f"certificates concluded: {n_true}/{args.random}")
        ok = n_true == args.random
    else:
        if args.epsilon is not None:
            metric = catalog.remark_metric(args.epsilon)
        elif args.gram is not None:
            metric = load_gram(args.gram, 5)
        else:
            metric = InnerProduct.identity(5)
        cert = catalog.certify_no_orthonormal_geodesic_basis(metric, cfg)
        report["certificate"] = cert.to_dict()
        lines += ["certificate:"] + _certificate_lines(cert)
        ok = cert.conclusion
    if args.epsilon is not None:
        quartic = catalog.remark_quartic(args.epsilon)
        span = catalog.remark_spanning_geodesics(args.epsilon)
        report["quartic"] = quartic.to_dict()
        report["spanning_geodesics"] = span.to_dict()
        lines += ["quartic coefficients (t^4 .. t^0): " + ", ".join(repr(x) for x in quartic.coefficients),
                  "real roots: " + ", ".join(_fmt(r) for r in quartic.roots),
                  "spanning geodesics:"]
        lines += [f"  {lab:<4} {_vec(v)}  {_fmt(r)}"
                  for lab, v, r in zip(span.to_dict()["labels"], span.vectors, span.residuals)]
        lines.append(f"span rank {span.span_rank}")
        ok = ok and span.span_rank == 5
    _emit(report, args.json, lines)
    return EXIT_OK if ok else EXIT_NO_CONSTRUCTION


def cmd_export(args) -> int:
    cat = catalog.standard_algebras()
    if args.name is None:
        print("\n".join(f"{k}  (dim {a.n})" for k, a in cat.items()))
        return EXIT_OK
    if args.name not in cat:
        _err(f"unknown catalog algebra {args.name!r}; run 'liegeo export' for the list")
        return EXIT_PARSE
    print(dumps(problem_to_dict(cat[args.name])))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _epsilon(text: str) -> float:
    try:
        eps = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < eps < 1.0:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1), got {text}")
    return eps


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with invalid files; 2 means "not a Lie algebra"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="liegeo", description="Geodesic vectors and "
                                     "orthonormal geodesic bases of metric Lie algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_file=True):
        if needs_file:
            p.add_argument("file", help="problem file (JSON)")
        p.add_argument("--gram", help="JSON file with a Gram matrix, overrides the problem file")
        p.add_argument("--json", action="store_true", help="print the full JSON report")

    def search(p):
        p.add_argument("--starts", type=_positive, default=GeodesicSearchConfig.n_starts)
        p.add_argument("--seed", type=int, default=GeodesicSearchConfig.seed)

    p = sub.add_parser("check", help="Lie algebra sanity checks and structure")
    common(p)
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("basis", help="construct an orthonormal geodesic basis")
    common(p)
    p.set_defaults(func=cmd_basis)
    p = sub.add_parser("geodesics", help="multistart search for geodesic vectors")
    common(p)
    search(p)
    p.set_defaults(func=cmd_geodesics)
    p = sub.add_parser("counterexample", help="certificate for the 5-dimensional counterexample")
    common(p, needs_file=False)
    search(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--epsilon", type=_epsilon, help="use the special inner product with this epsilon")
    group.add_argument("--random", type=_positive, metavar="N", help="certify N random inner products")
    p.set_defaults(func=cmd_counterexample)
    p = sub.add_parser("export", help="list catalog algebras or print one as a problem file")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "counterexample" and args.gram is not None and (
            args.epsilon is not None or args.random is not None):
        parser.error("--gram cannot be combined with --epsilon or --random")
    try:
        return args.func(args)
    except ProblemError as exc:
        _err(str(exc))
        return EXIT_PARSE
    except PreconditionError as exc:
        _err(str(exc))
        return EXIT_NO_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
