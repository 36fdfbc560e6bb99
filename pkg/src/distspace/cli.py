"""Command-line front end.

    distspace synthesize --spec three_atoms.json --output construction.json
    distspace sample --spec construction.json --n 1000 --seed 7
    distspace dist --spec construction.json
    distspace verify --spec three_atoms.json --output report.json
    distspace fw-table --alpha 0.05,0.1 --grid 101

Exit codes: 0 success, 1 verification failure, 2 I/O error, 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .distributions import DensitySpec, DiscreteSpec, SpecError, cdf_array, format_rational, parse_rational, spec_from_obj
from .rng import check_seed, stream
from .selection import (
    DEFAULT_DELTA,
    ConstructionError,
    SelectionConstruction,
    build_theorem1_space,
    construction_from_obj,
    exact_distance_distribution,
    sample_distances,
)
from .subadditive import TransformRecord, build_transform, fw_array, fw_table, sample_theta, transform_from_obj
from .verify import verify_density, verify_discrete

EXIT_OK, EXIT_VERIFY, EXIT_IO, EXIT_INVALID = 0, 1, 2, 3
COMMANDS = ("synthesize", "sample", "dist", "verify", "fw-table")


class UsageError(ValueError):
    pass


@dataclass
class CliConfig:
    command: str
    spec: Optional[str] = None
    output: Optional[str] = None
    n: Optional[int] = None
    seed: int = 0
    delta: Fraction = DEFAULT_DELTA
    grid: int = 101
    alpha: tuple = (0.02, 0.05, 0.1, 0.125)
    format: str = "rational"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.n is not None and self.n < 1:
            raise UsageError("--n must be at least 1")
        if not 0 < self.delta < 1:
            raise UsageError("--delta must lie in (0, 1)")
        if self.grid < 2:
            raise UsageError("--grid must be at least 2")
        if self.format not in ("rational", "decimal"):
            raise UsageError("--format is rational or decimal")
        check_seed(self.seed)
        if self.command != "fw-table" and not self.spec:
            raise UsageError(f"{self.command} needs --spec")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _num(x: Fraction, fmt: str) -> str:
    return format_rational(x) if fmt == "rational" else repr(float(x))


def load_document(path: str):
    """Read a target spec or a synthesized construction."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON: {exc}") from exc
    kind = obj.get("type") if isinstance(obj, dict) else None
    if kind == "selection":
        return construction_from_obj(obj)
    if kind == "transform":
        return transform_from_obj(obj)
    return spec_from_obj(obj)


def _realise(doc, delta):
    if isinstance(doc, DiscreteSpec):
        return build_theorem1_space(doc, delta)
    if isinstance(doc, DensitySpec):
        return build_transform(doc)
    return doc


def run(cfg: CliConfig, stdout=None) -> int:
    """Execute one command; returns the exit code."""
    stdout = stdout or sys.stdout
    cfg.validate()
    text_out = None
    exit_code = EXIT_OK
    if cfg.command == "fw-table":
        rows = [(repr(t), repr(a), repr(v)) for t, a, v in fw_table(cfg.alpha, cfg.grid)]
        body = _csv(["t", "alpha", "F_W"], rows)
    else:
        doc = load_document(cfg.spec)
        if cfg.command == "synthesize":
            if not isinstance(doc, (DiscreteSpec, DensitySpec)):
                raise UsageError("synthesize expects a target spec")
            body = _json(_realise(doc, cfg.delta).to_json_obj())
        elif cfg.command == "sample":
            built = _realise(doc, cfg.delta)
            n = cfg.n if cfg.n is not None else 1000
            if isinstance(built, SelectionConstruction):
                rows = [[_num(d, cfg.format)] for d in sample_distances(built, cfg.seed, n)]
            else:
                rows = [[repr(float(v))] for v in sample_theta(built, stream(cfg.seed, 0), n)]
            body = _csv(["distance"], rows)
        elif cfg.command == "dist":
            built = _realise(doc, cfg.delta)
            if isinstance(built, SelectionConstruction):
                rows = [[_num(v, cfg.format), _num(p, cfg.format)] for v, p in exact_distance_distribution(built)]
                body = _csv(["value", "prob"], rows)
            else:
                ts = np.linspace(0.0, 1.0, cfg.grid)
                rows = [[repr(float(t)), repr(float(g)), repr(float(a))]
                        for t, g, a in zip(ts, cdf_array(built.density, ts), achieved_cdf(built, ts))]
                body = _csv(["t", "target_cdf", "achieved_cdf"], rows)
        else:
            if isinstance(doc, DiscreteSpec):
                report = verify_discrete(doc, n=cfg.n or 10**6, seed=cfg.seed)
            elif isinstance(doc, DensitySpec):
                report = verify_density(doc, n=cfg.n or 10**5, seed=cfg.seed)
            else:
                raise UsageError("verify expects a target spec")
            body = report.to_json()
            text_out = report.to_text()
            exit_code = EXIT_OK if report.overall else EXIT_VERIFY
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
        if text_out:
            stdout.write(text_out)
    else:
        stdout.write(body)
        if text_out:
            sys.stderr.write(text_out)
    return exit_code


def achieved_cdf(record: TransformRecord, ts: np.ndarray) -> np.ndarray:
    """``P[phi(W) <= t] = F_W(phi^{-1}(t))`` by bisection on ``phi``."""
    lo = np.zeros_like(ts)
    hi = np.ones_like(ts)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = record.phi_array(mid) <= ts
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return fw_array(record.alpha, lo)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="target spec or synthesized construction (JSON)")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--n", type=int, default=None, help="sample count")
    common.add_argument("--seed", type=int, default=0, help="64-bit unsigned seed")
    common.add_argument("--delta", type=parse_rational, default=DEFAULT_DELTA,
                        help="truncation budget for infinite supports")
    common.add_argument("--grid", type=int, default=101, help="grid points")
    common.add_argument("--alpha", default="0.02,0.05,0.1,0.125", help="comma-separated exponents (fw-table)")
    common.add_argument("--format", choices=("rational", "decimal"), default="rational")
    parser = argparse.ArgumentParser(prog="distspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        alphas = tuple(float(a) for a in args.alpha.split(",") if a.strip())
        cfg = CliConfig(args.command, args.spec, args.output, args.n, args.seed, Fraction(args.delta),
                        args.grid, alphas, args.format)
        return run(cfg)
    except OSError as exc:
        print(f"distspace: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpecError, ConstructionError, UsageError, ValueError) as exc:
        print(f"distspace: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
