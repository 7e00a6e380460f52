"""Command-line interface: ``bernsimplex <verb> [options]``.

Exit status: 0 success, 1 computational failure, 2 usage error,
3 verification failure.  Errors are written to stderr as a JSON object.
The default seed comes from ``--seed``, else the ``BERNSIMPLEX_SEED``
environment variable, else 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import formats
from .asymptotics import optimal_bandwidth
from .bandwidth import default_grid, select_bandwidth
from .estimators import CdfModel, DensityModel, bernstein_cdf, eval_density, fit_density
from .montecarlo import StudyConfig, run_study
from .simplex import SimplexError, simplex_nodes
from .targets import mixture_model
from .verification import run_default_sweep, summarize

SEED_ENV = "BERNSIMPLEX_SEED"
VERBS = ("fit-cdf", "fit-density", "eval", "select-bandwidth", "verify", "study")


class UsageError(Exception):
    """Invalid input discovered after argument parsing (exit status 2)."""


@dataclass
class CommandSpec:
    verb: str
    inputs: dict = field(default_factory=dict)
    out: str | None = None
    csv: bool = False
    knobs: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", f"{self.prog}: {message}")
        sys.exit(2)


def _positive(name: str):
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bernsimplex", description="Bernstein estimators on the unit simplex.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(sp, csv=True):
        sp.add_argument("--out", help="output file (default: standard output)")
        if csv:
            sp.add_argument("--csv", action="store_true", help="write tabular CSV instead of JSON")

    for verb, what in (("fit-cdf", "c.d.f."), ("fit-density", "density")):
        sp = sub.add_parser(verb, help=f"fit the Bernstein {what} estimator")
        sp.add_argument("--data", required=True, help="dataset CSV")
        sp.add_argument("--m", required=True, type=_positive("m"), help="polynomial order")
        common(sp, csv=False)

    sp = sub.add_parser("eval", help="evaluate a fitted model")
    sp.add_argument("--model", required=True, help="model JSON from fit-cdf or fit-density")
    where = sp.add_mutually_exclusive_group(required=True)
    where.add_argument("--points", help="CSV of evaluation points")
    where.add_argument("--grid", type=_positive("grid"), help="interior midpoint grid resolution")
    sp.add_argument("--form", choices=("histogram", "dirichlet"), default="histogram",
                    help="density evaluation form")
    common(sp)

    sp = sub.add_parser("select-bandwidth", help="choose m by cross-validation")
    sp.add_argument("--data", required=True, help="dataset CSV")
    sp.add_argument("--method", choices=("lscv", "lcv"), default="lscv", help="cross-validation score")
    sp.add_argument("--m-min", type=_positive("m-min"), default=2, help="smallest order in the grid")
    sp.add_argument("--m-max", type=_positive("m-max"), help="largest order (default: ceil(4 n^(2/(d+4))))")
    sp.add_argument("--m-count", type=_positive("m-count"), default=20,
                    help="number of geometrically spaced orders")
    sp.add_argument("--target", help="mixture JSON; adds the asymptotic optimum to the grid")
    sp.add_argument("--workers", type=_positive("workers"), help="worker threads (default: CPU count)")
    common(sp)

    sp = sub.add_parser("verify", help="run the identity and lemma checks")
    sp.add_argument("--seed", type=int, help=f"base seed (default: ${SEED_ENV} or 0)")
    sp.add_argument("--workers", type=_positive("workers"), help="worker threads (default: CPU count)")
    common(sp)

    sp = sub.add_parser("study", help="run a Monte Carlo study")
    sp.add_argument("--config", required=True, help="StudyConfig JSON")
    sp.add_argument("--replicates", type=_positive("replicates"), help="override the config's replicate count")
    sp.add_argument("--seed", type=int, help=f"base seed (default: the config seed, else ${SEED_ENV} or 0)")
    sp.add_argument("--workers", type=_positive("workers"), help="worker threads (default: CPU count)")
    common(sp)
    return p


def parse_command(argv) -> CommandSpec:
    args = build_parser().parse_args(argv)
    d = vars(args)
    verb = d.pop("verb")
    out, csv = d.pop("out", None), d.pop("csv", False)
    inputs = {k: d.pop(k) for k in ("data", "model", "points", "config", "target") if d.get(k) is not None}
    for k in ("data", "model", "points", "config", "target"):
        d.pop(k, None)
    spec = CommandSpec(verb, inputs, out, csv, d)
    if verb == "select-bandwidth" and d.get("m_max") is not None and d["m_max"] < d["m_min"]:
        build_parser().error("argument --m-max: must be >= --m-min")
    if "workers" in d and d["workers"] is None:
        d["workers"] = os.cpu_count() or 1
    return spec


def _seed(explicit) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _emit_error(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _write(spec: CommandSpec, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if spec.out:
        Path(spec.out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_input(path: str, reader):
    try:
        return reader(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except (SimplexError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid input {path}: {exc}") from None


def _eval_points(spec: CommandSpec, d: int) -> np.ndarray:
    if spec.inputs.get("points"):
        return _read_input(spec.inputs["points"], lambda p: formats.read_dataset_csv(p, d))
    res = spec.knobs["grid"]
    if d == 1:
        return ((np.arange(res) + 0.5) / res)[:, None]
    return np.array(simplex_nodes(d, res, boundary=False)[0])


def _cmd_fit(spec: CommandSpec) -> int:
    data = _read_input(spec.inputs["data"], formats.read_dataset_csv)
    m = spec.knobs["m"]
    model = fit_density(data, m) if spec.verb == "fit-density" else CdfModel(data, m)
    _write(spec, json.dumps(formats.model_to_json_obj(model)))
    return 0


def _cmd_eval(spec: CommandSpec) -> int:
    model = _read_input(spec.inputs["model"],
                        lambda p: formats.model_from_json_obj(json.loads(Path(p).read_text())))
    pts = _eval_points(spec, model.d)
    if isinstance(model, DensityModel):
        values = np.atleast_1d(eval_density(model, pts, form=spec.knobs["form"]))
    else:
        values = np.atleast_1d(bernstein_cdf(model, pts))
    if spec.csv:
        _write(spec, formats.grid_to_csv(pts, values))
    else:
        _write(spec, json.dumps({"points": pts.tolist(), "values": values.tolist()}))
    return 0


def _cmd_select(spec: CommandSpec) -> int:
    data = _read_input(spec.inputs["data"], formats.read_dataset_csv)
    n, d = data.shape
    include = None
    if spec.inputs.get("target"):
        target = _read_input(spec.inputs["target"], formats.read_mixture_json)
        opt = optimal_bandwidth("density", "integrated", mixture_model(target), n)
        include = opt.m_rounded
    k = spec.knobs
    grid = default_grid(n, d, count=k["m_count"], m_min=k["m_min"], m_max=k["m_max"], include=include)
    res = select_bandwidth(data, grid, k["method"], workers=k["workers"])
    if spec.csv:
        lines = ["m,score"] + [f"{m},{s!r}" for m, s in zip(res.grid, res.scores)]
        _write(spec, "\n".join(lines))
    else:
        _write(spec, res.to_json())
    return 0


def _cmd_verify(spec: CommandSpec) -> int:
    reports = run_default_sweep(workers=spec.knobs["workers"], seed=_seed(spec.knobs["seed"]))
    summary = summarize(reports)
    ok = all(summary.values())
    if spec.csv:
        cols = ["lemma", "computed", "reference", "abs_dev", "rel_dev", "provenance", "tolerance", "passed"]
        lines = [",".join(cols)]
        for r in reports:
            row = r.to_dict()
            lines.append(",".join(str(row[c]) for c in cols))
        _write(spec, "\n".join(lines))
    else:
        _write(spec, json.dumps({"reports": [r.to_dict() for r in reports], "summary": summary,
                                 "passed": ok}, indent=2))
    return 0 if ok else 3


def _cmd_study(spec: CommandSpec) -> int:
    raw = _read_input(spec.inputs["config"], lambda p: json.loads(Path(p).read_text()))
    if spec.knobs.get("replicates"):
        raw["replicates"] = spec.knobs["replicates"]
    if spec.knobs.get("seed") is not None or "seed" not in raw:
        raw["seed"] = _seed(spec.knobs.get("seed"))
    try:
        cfg = StudyConfig.from_dict(raw)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid study config: {exc}") from None
    report = run_study(cfg, workers=spec.knobs["workers"])
    _write(spec, report.to_csv() if spec.csv else report.to_json())
    return 0


HANDLERS = {
    "fit-cdf": _cmd_fit,
    "fit-density": _cmd_fit,
    "eval": _cmd_eval,
    "select-bandwidth": _cmd_select,
    "verify": _cmd_verify,
    "study": _cmd_study,
}


def execute(spec: CommandSpec) -> int:
    try:
        return HANDLERS[spec.verb](spec)
    except UsageError as exc:
        _emit_error("usage", str(exc))
        return 2
    except Exception as exc:  # computational failure
        _emit_error(type(exc).__name__, str(exc))
        return 1


def main(argv=None) -> int:
    return execute(parse_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
