"""Command line entry point: identity suites, the exact oracle, experiments.

Exit codes are a stable contract:

    0   run completed (for experiments: regardless of verdict, which is data)
    1   unexpected execution failure
    2   an exact identity suite failed
    64  bad arguments or a degree-budget violation
    65  config or expression file parse error
    66  missing kernel file

A default seed may be supplied via the CHAOSLAB_SEED environment variable;
a seed present in a config always wins.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import convert, fourth_moment as fm, hermite, identities
from .chaos import WICK_DEGREE_BUDGET
from .exact import EC, ExactComplex
from .tensor import load_kernel
from .wick import GaussianFamily, expect_complex

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_IDENTITY = 2
EXIT_USAGE = 64
EXIT_PARSE = 65
EXIT_NOKERNEL = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    p = _Parser(prog="chaoslab",
                description="exact chaos identities, moment oracle, experiments")
    sub = p.add_subparsers(dest="command", required=True)

    ids = sub.add_parser("identities", help="run the exact identity suites")
    ids.add_argument("--max-degree", type=int, required=True)
    ids.add_argument("--out", type=Path, required=True)
    ids.add_argument("--format", choices=("csv", "json"), default="csv")

    orc = sub.add_parser("oracle", help="print the exact moment of an expression file")
    orc.add_argument("expr_file", type=Path)

    exp = sub.add_parser("experiment", help="run a moment-trajectory experiment")
    exp.add_argument("config", type=Path)
    exp.add_argument("--out", type=Path, required=True)
    return p


# -- identities ---------------------------------------------------------------------


def _cmd_identities(args) -> int:
    if not 0 <= args.max_degree <= identities.MAX_SYMBOLIC_DEGREE:
        print(f"error: --max-degree must be within 0..{identities.MAX_SYMBOLIC_DEGREE}",
              file=sys.stderr)
        return EXIT_USAGE
    args.out.mkdir(parents=True, exist_ok=True)
    results = identities.run_identity_suites(args.max_degree)
    rows = [{"name": r.name, "status": "pass" if r.passed else "fail",
             "detail": r.detail} for r in results]
    if args.format == "json":
        _write_text(args.out / "identities_report.json",
                    json.dumps({"max_degree": args.max_degree, "results": rows},
                               indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "status", "detail"])
        for r in rows:
            w.writerow([r["name"], r["status"], r["detail"]])
        _write_text(args.out / "identities_report.csv", buf.getvalue())
    for n in range(args.max_degree + 1):
        c2r, r2c = convert.conversion_tables(n)
        for table in (c2r, r2c):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            for row in convert.table_csv_rows(table):
                w.writerow(row)
            _write_text(args.out / f"table_{table.direction}_n{n}.csv", buf.getvalue())
    failures = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}"
              + (f"  ({r.detail})" if r.detail else ""))
    if failures:
        print(f"error: identity suite failed: {failures[0].name}: {failures[0].detail}",
              file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


# -- oracle -------------------------------------------------------------------------


def _parse_exact(x) -> ExactComplex:
    if isinstance(x, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(x, int):
        return EC(x)
    if isinstance(x, str):
        return EC(Fraction(x))
    if isinstance(x, list) and len(x) == 2:
        def part(v):
            if isinstance(v, int):
                return Fraction(v)
            if isinstance(v, str):
                return Fraction(v)
            raise ValueError(f"not an exact number: {v!r}")
        return ExactComplex(part(x[0]), part(x[1]))
    raise ValueError(f"not an exact number: {x!r}")


def _factor_poly(spec: dict) -> tuple:
    if not isinstance(spec, dict):
        raise ValueError("factor must be an object")
    var = spec.get("var", 0)
    if not isinstance(var, int) or var < 0:
        raise ValueError("factor var must be a nonnegative integer")
    conj = bool(spec.get("conj", False))
    if "j" in spec:
        m, n = spec["j"]
        poly = hermite.complex_hermite(int(m), int(n))
    elif "zpow" in spec:
        a, b = spec["zpow"]
        poly = hermite.BiPoly({(int(a), int(b)): 1})
    else:
        raise ValueError("factor needs a 'j' or 'zpow' field")
    return (poly.conj() if conj else poly), var


def _cmd_oracle(args) -> int:
    try:
        text = args.expr_file.read_text()
    except FileNotFoundError:
        print(f"error: no such expression file: {args.expr_file}", file=sys.stderr)
        return EXIT_PARSE
    try:
        doc = json.loads(text)
        if not isinstance(doc, dict) or "terms" not in doc:
            raise ValueError("expression file must be an object with a 'terms' list")
        dim = int(doc.get("complex_dim", 1))
        if dim < 1:
            raise ValueError("complex_dim must be >= 1")
        if "gram" in doc:
            gram = [[_parse_exact(x) for x in row] for row in doc["gram"]]
            if len(gram) != dim or any(len(r) != dim for r in gram):
                raise ValueError("gram matrix shape must match complex_dim")
            fam = GaussianFamily.from_complex_gram(gram)
        else:
            fam = GaussianFamily.complex_standard(dim)
        parsed = []
        for term in doc["terms"]:
            coeff = _parse_exact(term.get("coeff", 1))
            factors = [_factor_poly(f) for f in term["factors"]]
            parsed.append((coeff, factors))
    except (ValueError, KeyError, TypeError, json.JSONDecodeError,
            ZeroDivisionError) as exc:
        print(f"error: cannot parse expression file: {exc}", file=sys.stderr)
        return EXIT_PARSE
    for _, factors in parsed:
        degree = sum(p.degree() for p, _ in factors)
        if degree > WICK_DEGREE_BUDGET:
            print(f"error: term of Gaussian degree {degree} exceeds the budget "
                  f"{WICK_DEGREE_BUDGET}", file=sys.stderr)
            return EXIT_USAGE
    total = EC(0)
    for coeff, factors in parsed:
        total = total + coeff * expect_complex(fam, factors)
    print(total.rational_str())
    return EXIT_OK


# -- experiment ----------------------------------------------------------------------


def _load_config(path: Path) -> dict:
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise fm.ConfigError(f"no such config file: {path}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise fm.ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise fm.ConfigError("config must be a JSON object")
    return doc


def _criterion_from(doc: dict) -> fm.CriterionSpec:
    crit = doc.get("criterion")
    if not isinstance(crit, dict) or "case" not in crit or "sigma2" not in crit:
        raise fm.ConfigError("config needs a criterion object with case and sigma2")
    kwargs = dict(case=crit["case"], sigma2=float(crit["sigma2"]),
                  a=float(crit.get("a", 0.0)), b=float(crit.get("b", 0.0)))
    for key in ("m", "n", "total_degree"):
        if key in crit:
            kwargs[key] = int(crit[key])
    if "degrees" in crit:
        kwargs["degrees"] = tuple(int(x) for x in crit["degrees"])
    if "chi2_variance_is_alpha" in crit:
        kwargs["chi2_variance_is_alpha"] = bool(crit["chi2_variance_is_alpha"])
    return fm.CriterionSpec(**kwargs)


def _kernels_from(doc: dict, base: Path):
    kspec = doc.get("kernel")
    if not isinstance(kspec, dict):
        raise fm.ConfigError("config needs a kernel object")
    if "block" in kspec:
        blk = kspec["block"]
        m, n = int(blk["m"]), int(blk["n"])
        ks = [int(k) for k in doc.get("k_values", [1])]
        if not ks or any(k < 1 for k in ks):
            raise fm.ConfigError("k_values must be positive integers")
        return [(k, fm.gen_block_kernel(m, n, k)) for k in ks], (m, n)
    if "file" in kspec:
        path = Path(kspec["file"])
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise FileNotFoundError(str(path))
        kern = load_kernel(path.read_text())
    elif "inline" in kspec:
        kern = load_kernel(str(kspec["inline"]))
    else:
        raise fm.ConfigError("kernel must have a block, file or inline field")
    if "scale" in kspec:
        kern = _parse_exact(kspec["scale"]) * kern
    return [(1, kern)], (kern.m, kern.n)


def _format_quantity(name: str, value: complex) -> str:
    if name in ("abs2", "abs4"):
        return repr(float(value.real))
    return repr(complex(value))


def run_experiment(doc: dict, base: Path) -> tuple:
    """Execute an experiment config; returns (csv text, verdict dict)."""
    seed = doc.get("seed")
    if seed is None:
        env = os.environ.get("CHAOSLAB_SEED")
        if env is not None:
            seed = int(env)
    if seed is None:
        raise fm.ConfigError("config needs a seed (or CHAOSLAB_SEED)")
    seed = int(seed)
    n_samples = int(doc.get("n_samples", 0))
    if n_samples < 2:
        raise fm.ConfigError("n_samples must be at least 2")
    workers = int(doc.get("workers", 1))
    chunk = int(doc.get("chunk_size", fm.DEFAULT_CHUNK))
    spec = _criterion_from(doc)
    kernels, (m, n) = _kernels_from(doc, base)
    references = None
    if bool(doc.get("exact_reference", False)):
        if "block" not in doc.get("kernel", {}):
            raise fm.ConfigError("exact_reference requires a block kernel")
        references = fm.block_reference_trajectory(m, n, [k for k, _ in kernels])
    reports = [(k, fm.estimate(kern, n_samples, seed, workers=workers,
                               chunk_size=chunk))
               for k, kern in kernels]
    the_verdict = fm.verdict(reports, spec, references)
    result = the_verdict.as_dict()
    result["seed"] = seed
    result["n_samples"] = n_samples

    ks_cfg = doc.get("ks")
    if ks_cfg is not None:
        k_at = int(ks_cfg.get("k", kernels[-1][0]))
        component = ks_cfg.get("component", "re")
        by_k = dict(kernels)
        if k_at not in by_k:
            raise fm.ConfigError(f"ks.k={k_at} is not among the run's k values")
        samples = fm.collect_component_samples(by_k[k_at], n_samples, seed,
                                               component=component, chunk_size=chunk)
        cdf = fm.normal_cdf(float(ks_cfg.get("mean", 0.0)), float(ks_cfg.get("var", 1.0)))
        d, p = fm.ks_distance(samples, cdf)
        result["ks"] = {"k": k_at, "component": component, "distance": d, "p_bound": p}

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "quantity", "estimate", "stderr", "target", "pass"])
    for name, q in the_verdict.quantities.items():
        for row in q.rows:
            w.writerow([row.k, name, _format_quantity(name, row.estimate),
                        repr(row.stderr), _format_quantity(name, row.reference),
                        str(row.passed)])
    return buf.getvalue(), result


def _cmd_experiment(args) -> int:
    try:
        doc = _load_config(args.config)
        csv_text, result = run_experiment(doc, args.config.parent)
    except fm.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: missing kernel file: {exc}", file=sys.stderr)
        return EXIT_NOKERNEL
    args.out.mkdir(parents=True, exist_ok=True)
    _write_text(args.out / "moments.csv", csv_text)
    _write_text(args.out / "verdict.json",
                json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(f"experiment complete: verdict {'PASS' if result['pass'] else 'FAIL'} "
          f"({args.out / 'verdict.json'})")
    return EXIT_OK


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "identities":
            return _cmd_identities(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_FAILURE
    except Exception as exc:  # execution failure, not a verdict
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
