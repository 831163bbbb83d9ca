"""``loophaf`` command-line interface.

Every subcommand prints one JSON document on stdout. Failures print a JSON
object ``{"error": ..., "message": ..., "exit_code": ...}`` on stderr and exit
with a fixed code:

    0 ok, 1 verification failed, 2 parse error, 3 dimension error,
    4 cap exceeded, 5 missing field, 6 covariance not positive semidefinite

Settings resolve as flags > ``LOOPHAF_*`` environment variables >
``loophaf.json`` in the working directory > built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .combinatorial import DEFAULT_ENUM_CAP, haf_bruteforce, lhaf_bruteforce
from .errors import (
    AsymmetryError,
    CapExceededError,
    LoopHafError,
    NonFiniteError,
    NotPositiveSemidefiniteError,
    ShapeError,
)
from .genfun import (
    VerificationReport,
    lemma_lhaf,
    lhaf_batch,
    random_instances,
    verify_master_theorem,
)
from .matrix import embed_odd, paired_extension, validate_symmetric
from .moments import GaussianSpec, gaussian_moment, mc_moment_estimate

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_CAP = 4
EXIT_MISSING = 5
EXIT_NOT_PSD = 6

CONFIG_FILE = "loophaf.json"
ENV_PREFIX = "LOOPHAF_"


class ParseError(LoopHafError):
    pass


class MissingFieldError(LoopHafError):
    pass


@dataclass(frozen=True)
class RunConfig:
    order: int = 4
    tol: float = 1e-8
    abs_floor: float = 1e-6
    enum_cap: int = DEFAULT_ENUM_CAP
    seed: int = 0
    threads: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.order < 0 or self.enum_cap <= 0 or self.threads <= 0:
            raise ParseError("order must be >= 0; enum_cap and threads must be positive")
        if self.tol < 0 or self.abs_floor < 0:
            raise ParseError("tolerances must be non-negative")


def load_config(flags: dict, environ=None, cwd=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    types = {f.name: f.type for f in fields(RunConfig)}
    casts = {"int": int, "float": float, "str | None": str}
    settings: dict = {}

    path = Path(cwd or ".") / CONFIG_FILE
    if path.exists():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
        settings.update({k: v for k, v in data.items() if k in types})

    for name in types:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            settings[name] = environ[key]

    settings.update({k: v for k, v in flags.items() if k in types and v is not None})
    try:
        settings = {k: casts[types[k]](v) for k, v in settings.items()}
    except ValueError as exc:
        raise ParseError(f"bad setting: {exc}") from exc
    return replace(RunConfig(), **settings)


# file I/O


def _complex_entry(x, where: str) -> complex:
    if (not isinstance(x, list) or len(x) != 2
            or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x)):
        raise ParseError(f"{where}: complex numbers must be [re, im] pairs, got {x!r}")
    return complex(x[0], x[1])


def _complex_vector(raw, dim: int, name: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ParseError(f"{name} must be a list of {dim} entries")
    return np.array([_complex_entry(x, f"{name}[{i}]") for i, x in enumerate(raw)])


def parse_matrix_document(doc) -> dict:
    """Validate a MatrixFile document and return numpy arrays.

    Returns ``{"entries": S, "loop_vector": v or None, "mean": mean or None}``.
    """
    if not isinstance(doc, dict) or "dim" not in doc or "entries" not in doc:
        raise ParseError('matrix file needs "dim" and "entries"')
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f'"dim" must be a positive integer, got {dim!r}')
    rows = doc["entries"]
    if not isinstance(rows, list) or len(rows) != dim or any(
            not isinstance(r, list) or len(r) != dim for r in rows):
        raise ParseError(f'"entries" must be a {dim}x{dim} grid')
    raw = np.array([[_complex_entry(x, f"entries[{i}][{j}]") for j, x in enumerate(r)]
                    for i, r in enumerate(rows)])
    scale = float(np.max(np.abs(raw)))
    out = {"entries": validate_symmetric(raw, tol=1e-12 * max(scale, 1.0)),
           "loop_vector": None, "mean": None}
    if doc.get("loop_vector") is not None:
        out["loop_vector"] = _complex_vector(doc["loop_vector"], dim, "loop_vector")
    if doc.get("mean") is not None:
        mean = doc["mean"]
        if isinstance(mean, list) and all(isinstance(x, (int, float)) for x in mean):
            mean = [[x, 0] for x in mean]
        out["mean"] = _complex_vector(mean, dim, "mean")
    return out


def read_matrix_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_matrix_document(doc)


def _pair(c) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def matrix_document(S, v=None) -> dict:
    S = np.asarray(S, dtype=complex)
    doc = {"dim": S.shape[0], "entries": [[_pair(x) for x in row] for row in S]}
    if v is not None:
        doc["loop_vector"] = [_pair(x) for x in v]
    return doc


# subcommands


def cmd_haf(args, cfg: RunConfig) -> tuple[dict, int]:
    data = read_matrix_file(args.input)
    value = haf_bruteforce(data["entries"], cap=cfg.enum_cap, threads=cfg.threads)
    return {"haf": _pair(value)}, EXIT_OK


def cmd_lhaf(args, cfg: RunConfig) -> tuple[dict, int]:
    data = read_matrix_file(args.input)
    S = data["entries"]
    if args.diagonal_loops:
        v = np.diag(S)
    elif data["loop_vector"] is None:
        raise MissingFieldError('no "loop_vector" in the input; pass --diagonal-loops to use diag(S)')
    else:
        v = data["loop_vector"]
    return {"lhaf": _pair(lhaf_bruteforce(S, v, cap=cfg.enum_cap, threads=cfg.threads))}, EXIT_OK


def _loop_vector_or_zero(data) -> np.ndarray:
    v = data["loop_vector"]
    return np.zeros(data["entries"].shape[0], dtype=complex) if v is None else v


def cmd_genfun(args, cfg: RunConfig) -> tuple[dict, int]:
    data = read_matrix_file(args.input)
    batch = lhaf_batch(data["entries"], _loop_vector_or_zero(data), cfg.order)
    return batch.to_dict(), EXIT_OK


def cmd_embed(args, cfg: RunConfig) -> tuple[dict, int]:
    data = read_matrix_file(args.input)
    S = data["entries"]
    v = data["loop_vector"] if data["loop_vector"] is not None else np.diag(S)
    return matrix_document(*embed_odd(S, v)), EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> tuple[dict, int]:
    if args.random is not None:
        m, count = args.random
        instances = random_instances(count, m, cfg.seed)
    elif args.input is not None:
        data = read_matrix_file(args.input)
        instances = [(data["entries"], _loop_vector_or_zero(data))]
    else:
        raise MissingFieldError("verify needs an input file or --random M COUNT")
    reports = [
        verify_master_theorem(S, v, cfg.order, cfg.tol, abs_floor=cfg.abs_floor,
                              cap=cfg.enum_cap, threads=cfg.threads, instance=k)
        for k, (S, v) in enumerate(instances)
    ]
    report = VerificationReport.combine(reports)
    return report.to_dict(include_timings=args.timings), (
        EXIT_OK if report.passed else EXIT_VERIFY_FAILED)


def cmd_moment(args, cfg: RunConfig) -> tuple[dict, int]:
    data = read_matrix_file(args.input)
    mean = data["mean"] if data["mean"] is not None else data["loop_vector"]
    spec = GaussianSpec(data["entries"], mean)
    out = {"moment": gaussian_moment(spec, args.powers, cap=cfg.enum_cap)}
    if args.mc:
        est, err = mc_moment_estimate(spec, args.powers, args.mc, cfg.seed, threads=cfg.threads)
        out.update(mc_estimate=est, stderr=err)
    return out, EXIT_OK


BENCH_SUITES = {
    # (m, counts) pairs; brute force runs on matrices of size 2 * sum(counts)
    "small": [(1, (3,)), (2, (2, 2)), (3, (1, 1, 2)), (2, (2, 3))],
    "medium": [(1, (3,)), (2, (2, 2)), (3, (1, 1, 2)), (2, (2, 3)), (3, (2, 2, 2)), (2, (3, 4))],
}


def cmd_bench(args, cfg: RunConfig) -> tuple[dict, int]:
    rows = []
    for k, (m, counts) in enumerate(BENCH_SUITES[args.suite]):
        (S, v), = random_instances(1, m, seed=1000 + k)
        size = 2 * sum(counts)
        routes = [
            ("brute", lambda: lhaf_bruteforce(*paired_extension(S, v, counts),
                                              cap=max(cfg.enum_cap, size), threads=cfg.threads)),
            ("lemma", lambda: lemma_lhaf(S, v, counts + counts)),
            ("genfun", lambda: lhaf_batch(S, v, sum(counts))[counts]),
        ]
        for name, run in routes:
            t0 = time.perf_counter()
            value = run()
            rows.append({"route": name, "m": m, "n": list(counts), "size": size,
                         "seconds": time.perf_counter() - t0, "value": _pair(value)})
    return {"suite": args.suite, "threads": cfg.threads, "rows": rows}, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loophaf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, input_=True):
        p = sub.add_parser(name, help=help_)
        if input_ is True:
            p.add_argument("input", help="MatrixFile JSON")
        elif input_ == "optional":
            p.add_argument("input", nargs="?", help="MatrixFile JSON")
        p.add_argument("--threads", type=int, help="worker count")
        p.add_argument("--output", help="write the JSON result here instead of stdout")
        p.set_defaults(func=func)
        return p

    add("haf", cmd_haf, "hafnian by matching enumeration")
    p = add("lhaf", cmd_lhaf, "loop hafnian by enumeration")
    p.add_argument("--diagonal-loops", action="store_true", help="use diag(S) as the loop vector")
    p = add("genfun", cmd_genfun, "all paired-extension loop hafnians from the generating function")
    p.add_argument("--order", type=int)
    add("embed", cmd_embed, "embed an odd-dimensional matrix into the next even dimension")
    p = add("verify", cmd_verify, "three-route cross-check", input_="optional")
    p.add_argument("--order", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--abs-floor", type=float, dest="abs_floor")
    p.add_argument("--seed", type=int)
    p.add_argument("--random", nargs=2, type=int, metavar=("M", "COUNT"))
    p.add_argument("--timings", action="store_true", help="include per-route wall times")
    p = add("moment", cmd_moment, "Gaussian joint moment from a covariance file")
    p.add_argument("--powers", type=int, nargs="+", required=True)
    p.add_argument("--mc", type=int, metavar="SAMPLES", help="add a Monte-Carlo estimate")
    p.add_argument("--seed", type=int)
    p = add("bench", cmd_bench, "time the three routes on a fixed instance grid", input_=False)
    p.add_argument("--suite", choices=sorted(BENCH_SUITES), default="small")
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, AsymmetryError, NonFiniteError)):
        return EXIT_PARSE
    if isinstance(exc, ShapeError):
        return EXIT_DIMENSION
    if isinstance(exc, CapExceededError):
        return EXIT_CAP
    if isinstance(exc, MissingFieldError):
        return EXIT_MISSING
    if isinstance(exc, NotPositiveSemidefiniteError):
        return EXIT_NOT_PSD
    return EXIT_PARSE


def _fail(exc: BaseException, stderr) -> int:
    code = _exit_code(exc)
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if code == EXIT_DIMENSION and "even dimension" in str(exc):
        err["hint"] = "odd-dimensional inputs can be embedded with `loophaf embed`"
    print(json.dumps(err), file=stderr)
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = load_config(vars(args))
        result, code = args.func(args, cfg)
    except (LoopHafError, ValueError) as exc:
        return _fail(exc, stderr)
    text = json.dumps(result)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    else:
        print(text, file=stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
