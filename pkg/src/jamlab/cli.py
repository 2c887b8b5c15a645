"""Command line front end.

    jamlab predict --N 399 --p dimer-1d
    jamlab rsa-run --builtin dimer-1d --n 400 --boundary free --reps 20000 --seed 42
    jamlab rsa-sweep --builtin dimer-1d --sizes 50,100,200,400 --reps 20000
    jamlab p-estimate --builtin anni-pair --n 1000 --reps 100000
    jamlab oracle --builtin dimer-1d --n 4 --boundary free
    jamlab anni-exact --n 6          (also: jamlab anni exact --n 6)
    jamlab anni-identity --max-n 20
    jamlab anni-simulate --n 1000 --reps 10000
    jamlab anni-rsa --n 2000 --reps 10000

Exit codes: 0 ok, 2 usage error, 3 invalid model, 4 failed consistency
check, 5 capacity limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from . import annihilation, oracle, sim, theory
from .errors import CapacityError, ModelError
from .lattice import BUILTINS, FREE, TORUS, Model, builtin_model, load_model
from .rng import DEFAULT_SEED

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_CHECK, EXIT_CAPACITY = 0, 2, 3, 4, 5

RECORD_FIELDS = ("model_name", "n", "k", "N", "reps", "seed", "mean", "stderr", "variance", "prediction", "delta")

STATISTICAL = {"rsa-run", "rsa-sweep", "p-estimate", "anni-simulate", "anni-rsa"}
MODEL_COMMANDS = {"rsa-run", "rsa-sweep", "p-estimate", "oracle"}


class UsageError(Exception):
    pass


@dataclass
class ExperimentSpec:
    command: str
    model: Model | None = None
    model_source: str | None = None
    params: dict = field(default_factory=dict)
    fmt: str = "text"
    output: str | None = None
    workers: int | None = None


# -- records ----------------------------------------------------------------

def make_record(model_name, n, k, N, reps, seed, mean, stderr, variance, prediction=None) -> dict:
    delta = None if prediction is None else mean - prediction
    return dict(zip(RECORD_FIELDS, (model_name, n, k, N, reps, seed, mean, stderr, variance, prediction, delta)))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_records(records: Iterable[dict], fmt: str, out: TextIO) -> None:
    if fmt == "json":
        for rec in records:
            out.write(json.dumps({k: rec[k] for k in RECORD_FIELDS}) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for rec in records:
        w.writerow([_cell(rec[k]) for k in RECORD_FIELDS])


_INT_FIELDS = {"n", "k", "N", "reps", "seed"}


def read_records(text: str, fmt: str) -> list[dict]:
    """Inverse of write_records."""
    if fmt == "json":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {}
        for k in RECORD_FIELDS:
            v = row[k]
            if v == "":
                rec[k] = None
            elif k == "model_name":
                rec[k] = v
            elif k in _INT_FIELDS:
                rec[k] = int(v)
            else:
                rec[k] = float(v)
        rows.append(rec)
    return rows


# -- parsing ------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_model_args(p: argparse.ArgumentParser, sizes: bool = False) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=BUILTINS, help="named builtin model")
    src.add_argument("--model", metavar="FILE", help="JSON model description")
    if sizes:
        p.add_argument("--sizes", type=_int_list, required=True, help="comma-separated line lengths")
    else:
        p.add_argument("--n", type=int, help="number of sites (1-D builtins)")
        p.add_argument("--shape", type=_int_list, help="box dimensions, e.g. 20,20")
    p.add_argument("--boundary", choices=(TORUS, FREE), default=TORUS)


def _add_stat_args(p: argparse.ArgumentParser, reps: int) -> None:
    p.add_argument("--reps", type=int, default=reps)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("text", "csv", "json"), default=None)
    common.add_argument("--output", "-o", help="write results here instead of stdout")
    common.add_argument("--workers", type=int, default=None, help="threads (default: JAMLAB_THREADS or CPU count)")
    parser = argparse.ArgumentParser(prog="jamlab", description="Random sequential adsorption and annihilation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", parents=[common], help="H_N + ln p")
    p.add_argument("--N", dest="N_total", type=int, help="number of config instances")
    p.add_argument("--k", type=int, help="types per site (with --n)")
    p.add_argument("--p", default=None, help="probability, named constant, or 'estimate'")
    p.add_argument("--t-horizon", type=float, default=sim.DEFAULT_HORIZON)
    _add_model_args(p)
    _add_stat_args(p, 10_000)

    p = sub.add_parser("rsa-run", parents=[common], help="mean RSA duration")
    _add_model_args(p)
    _add_stat_args(p, 10_000)
    p.add_argument("--p", default=None)

    p = sub.add_parser("rsa-sweep", parents=[common], help="mean duration over sizes")
    _add_model_args(p, sizes=True)
    _add_stat_args(p, 10_000)
    p.add_argument("--p", default=None)

    p = sub.add_parser("p-estimate", parents=[common], help="ghost-config estimate of p")
    _add_model_args(p)
    _add_stat_args(p, 10_000)
    p.add_argument("--type", dest="type_index", type=int, default=0)
    p.add_argument("--ghost-only", action="store_true",
                   help="withhold only the tagged config, not co-located configs sharing its footprint")
    p.add_argument("--t-horizon", type=float, default=sim.DEFAULT_HORIZON)

    p = sub.add_parser("oracle", parents=[common], help="exact mean duration by enumeration")
    _add_model_args(p)
    p.add_argument("--limit", type=int, default=oracle.DEFAULT_LIMIT)

    p = sub.add_parser("anni-exact", parents=[common], help="exact F_n and mean stopping time")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("anni-identity", parents=[common], help="check the harmonic identity for n = 2..max-n")
    p.add_argument("--max-n", type=int, required=True)

    p = sub.add_parser("anni-simulate", parents=[common], help="Monte Carlo stopping time of the line process")
    p.add_argument("--n", type=int, required=True)
    _add_stat_args(p, 10_000)

    p = sub.add_parser("anni-rsa", parents=[common], help="annihilation as RSA of holes on a torus")
    p.add_argument("--n", type=int, required=True)
    _add_stat_args(p, 10_000)
    return parser


def _resolve_model(ns) -> tuple[Model, str]:
    if ns.model:
        m = load_model(ns.model)
        return m, m.name
    if not ns.builtin:
        raise UsageError("a model is required: give --builtin NAME or --model FILE")
    if ns.shape:
        shape = ns.shape
    elif ns.n is not None:
        shape = [ns.n]
    else:
        raise UsageError(f"--builtin {ns.builtin} needs --n or --shape")
    return builtin_model(ns.builtin, shape, ns.boundary), ns.builtin


def _resolve_p(text: str | None, source: str | None) -> float | str | None:
    """A float, the string 'estimate', or None when no value is available."""
    if text is None:
        return theory.NAMED_P.get(source) if source else None
    if text == "estimate":
        return text
    if text in theory.NAMED_P:
        return theory.NAMED_P[text]
    try:
        p = float(text)
    except ValueError:
        raise UsageError(f"--p: expected a number, 'estimate', or one of {sorted(theory.NAMED_P)}; got {text!r}") from None
    if not 0 < p <= 1:
        raise UsageError(f"--p: must lie in (0, 1], got {p}")
    return p


def parse_and_validate(argv: list[str]) -> ExperimentSpec:
    """Raises UsageError (exit 2) or ModelError (exit 3)."""
    argv = list(argv)
    if len(argv) >= 2 and argv[0] == "anni" and not argv[1].startswith("-"):
        argv = [f"anni-{argv[1]}", *argv[2:]]
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid arguments") from None
    cmd = ns.command
    fmt = ns.fmt or ("csv" if cmd in STATISTICAL else "text")
    spec = ExperimentSpec(cmd, fmt=fmt, output=ns.output, workers=ns.workers)
    if ns.workers is not None and ns.workers < 1:
        raise UsageError("--workers must be >= 1")
    if cmd in STATISTICAL and ns.reps < 2:
        raise UsageError(f"--reps must be >= 2 (a variance needs two replications), got {ns.reps}")

    if cmd == "rsa-sweep":
        if not ns.builtin:
            raise UsageError("rsa-sweep needs --builtin")
        if any(s < 1 for s in ns.sizes):
            raise UsageError("--sizes must be positive")
        # fail early on a bad family
        builtin_model(ns.builtin, [ns.sizes[0]], ns.boundary)
        spec.model_source = ns.builtin
    elif cmd in MODEL_COMMANDS:
        spec.model, spec.model_source = _resolve_model(ns)
    elif cmd == "predict" and (ns.builtin or ns.model):
        spec.model, spec.model_source = _resolve_model(ns)

    if cmd == "predict":
        p = _resolve_p(ns.p, None)
        if p is None:
            raise UsageError("predict needs --p")
        if p == "estimate" and spec.model is None:
            raise UsageError("--p estimate needs a model (--builtin or --model)")
        if ns.N_total is not None:
            N = ns.N_total
        elif ns.n is not None and ns.k is not None:
            N = ns.n * ns.k
        elif spec.model is not None:
            N = spec.model.N
        else:
            raise UsageError("predict needs --N, or --n with --k, or a model")
        if N < 1:
            raise UsageError(f"--N must be >= 1, got {N}")
        spec.params.update(N=N, p=p, reps=ns.reps, seed=ns.seed, t_horizon=ns.t_horizon)
    elif cmd in ("rsa-run", "rsa-sweep"):
        spec.params.update(reps=ns.reps, seed=ns.seed, p=_resolve_p(ns.p, spec.model_source))
        if cmd == "rsa-sweep":
            spec.params.update(sizes=ns.sizes, boundary=ns.boundary)
    elif cmd == "p-estimate":
        if not ns.t_horizon > 0:
            raise UsageError(f"--t-horizon must be > 0, got {ns.t_horizon}")
        if spec.model.region.boundary != TORUS:
            raise UsageError("p-estimate needs --boundary torus")
        if not 0 <= ns.type_index < spec.model.k:
            raise UsageError(f"--type must be in 0..{spec.model.k - 1}")
        spec.params.update(reps=ns.reps, seed=ns.seed, t_horizon=ns.t_horizon, type_index=ns.type_index,
                           withhold_siblings=not ns.ghost_only)
    elif cmd == "oracle":
        spec.params.update(limit=ns.limit)
    elif cmd == "anni-exact":
        if ns.n < 1:
            raise UsageError("--n must be >= 1")
        spec.params.update(n=ns.n)
    elif cmd == "anni-identity":
        if ns.max_n < 2:
            raise UsageError("--max-n must be >= 2")
        spec.params.update(max_n=ns.max_n)
    elif cmd in ("anni-simulate", "anni-rsa"):
        if ns.n < 1:
            raise UsageError("--n must be >= 1")
        spec.params.update(n=ns.n, reps=ns.reps, seed=ns.seed)
    return spec


# -- execution ----------------------------------------------------------------

def _fraction_line(label: str, value) -> str:
    return f"{label}{value} (= {float(value)!r})"


def _emit(spec: ExperimentSpec, out: TextIO, records: list[dict]) -> None:
    if spec.fmt == "text":
        write_records(records, "csv", out)
    else:
        write_records(records, spec.fmt, out)


def _run(spec: ExperimentSpec, out: TextIO) -> int:
    cmd, P = spec.command, spec.params
    model = spec.model

    if cmd == "predict":
        p = P["p"]
        if p == "estimate":
            p = sim.estimate_p(model, 0, P["t_horizon"], P["reps"], P["seed"], spec.workers).mean
        value = theory.asymptotic_prediction(P["N"], p)
        if spec.fmt == "text":
            out.write(f"{value:.4f}\n")
        else:
            rec = {"N": P["N"], "p": p, "prediction": value}
            if spec.fmt == "json":
                out.write(json.dumps(rec) + "\n")
            else:
                write_csv_dict(rec, out)
        return EXIT_OK

    if cmd == "rsa-run":
        s = sim.estimate_mean_duration(model, P["reps"], P["seed"], spec.workers)
        p = P["p"]
        if p == "estimate":
            p = sim.estimate_p(model, 0, sim.DEFAULT_HORIZON, P["reps"], P["seed"], spec.workers).mean
        pred = theory.asymptotic_prediction(model.N, p) if p and model.N > 0 else None
        _emit(spec, out, [make_record(spec.model_source, model.n, model.k, model.N, P["reps"], P["seed"],
                                      s.mean, s.stderr, s.variance, pred)])
        return EXIT_OK

    if cmd == "rsa-sweep":
        name, boundary = spec.model_source, P["boundary"]
        p = P["p"]
        rows = sim.sweep(lambda n: builtin_model(name, [n], boundary), P["sizes"], P["reps"], P["seed"],
                         None if p == "estimate" else p, workers=spec.workers)
        _emit(spec, out, [make_record(r.model_name, r.n, r.k, r.N, r.reps, r.seed, r.mean, r.stderr, r.variance,
                                      r.prediction) for r in rows])
        return EXIT_OK

    if cmd == "p-estimate":
        s = sim.estimate_p(model, P["type_index"], P["t_horizon"], P["reps"], P["seed"], spec.workers,
                           withhold_siblings=P["withhold_siblings"])
        known = theory.NAMED_P.get(spec.model_source)
        _emit(spec, out, [make_record(spec.model_source, model.n, model.k, model.N, P["reps"], P["seed"],
                                      s.mean, s.stderr, s.variance, known)])
        return EXIT_OK

    if cmd == "oracle":
        pmf = oracle.exact_trailing_pmf(model, P["limit"])
        e = oracle.expected_from_pmf(pmf, model.N)
        if spec.fmt == "json":
            out.write(json.dumps({
                "model_name": spec.model_source, "N": model.N,
                "pmf": {str(r): str(w) for r, w in pmf.items()},
                "expectation": str(e), "expectation_float": float(e),
            }) + "\n")
        else:
            out.write(f"N = {model.N}\n")
            for r, w in pmf.items():
                out.write(_fraction_line(f"pmf r={r}: ", w) + "\n")
            out.write(_fraction_line("expectation ", e) + "\n")
        return EXIT_OK

    if cmd == "anni-exact":
        n = P["n"]
        f = annihilation.f_recursive(n)
        mu = annihilation.mean_stop_time(n)
        if spec.fmt == "json":
            out.write(json.dumps({
                "n": n,
                "terms": [{"c": str(c), "b": b, "a": a} for (a, b), c in f],
                "mean": str(mu), "mean_float": float(mu),
            }) + "\n")
        else:
            out.write(f"F_{n}(t) =\n")
            for (a, b), c in f:
                out.write(f"  {c} * t^{b} * exp(-{a} t)\n")
            out.write(_fraction_line(f"mu_{n} = ", mu) + "\n")
        return EXIT_OK

    if cmd == "anni-identity":
        max_n = P["max_n"]
        table = annihilation.f_table(max_n)
        status = EXIT_OK
        for n in range(2, max_n + 1):
            chk = annihilation.check_harmonic_identity(n, table)
            tag = "OK" if chk.ok else f"FAIL (lhs = {chk.lhs})"
            out.write(f"n={n}: H_{n - 1} = {chk.harmonic} {tag}\n")
            if not chk.ok:
                status = EXIT_CHECK
        return status

    if cmd == "anni-simulate":
        n = P["n"]
        s = annihilation.estimate_stop_time(n, P["reps"], P["seed"], spec.workers)
        pred = theory.harmonic_float(n - 1) - 1.0
        _emit(spec, out, [make_record("anni-line", n, 1, max(n - 1, 0), P["reps"], P["seed"],
                                      s.mean, s.stderr, s.variance, pred)])
        return EXIT_OK

    if cmd == "anni-rsa":
        model = annihilation.build_rsa_model(P["n"])
        s = sim.estimate_mean_duration(model, P["reps"], P["seed"], spec.workers)
        pred = annihilation.rsa_mean_prediction(model.n)
        _emit(spec, out, [make_record(model.name, model.n, model.k, model.N, P["reps"], P["seed"],
                                      s.mean, s.stderr, s.variance, pred)])
        return EXIT_OK

    raise UsageError(f"unknown command {cmd!r}")


def write_csv_dict(rec: dict, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(rec.keys())
    w.writerow([_cell(v) for v in rec.values()])


def execute(spec: ExperimentSpec, out: TextIO | None = None) -> int:
    if out is None and spec.output:
        with open(spec.output, "w", newline="") as fh:
            return execute(spec, fh)
    out = out or sys.stdout
    try:
        return _run(spec, out)
    except CapacityError as exc:
        print(f"jamlab: capacity limit: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ModelError as exc:
        print(f"jamlab: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_and_validate(argv)
    except UsageError as exc:
        print(f"jamlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"jamlab: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (OSError, CapacityError) as exc:
        print(f"jamlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(spec)


if __name__ == "__main__":
    sys.exit(main())
