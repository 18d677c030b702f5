"""Command-line front end.

Commands: ``div``, ``project``, ``conjugate``, ``check-legendre``,
``check-pythagoras``, ``check-geometry`` and ``report``.  Vector and matrix
arguments are inline JSON, ``@path`` or a path to a JSON file.

Exit codes: 0 success, 1 malformed input (bad JSON, unknown fields or
flags), 2 domain errors, 3 convergence failure.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .bregman import (ConstraintSet, ProjectionResult, PythagorasResult, bregman_div,
                      left_project, project, pythagoras_check)
from .config import DEFAULTS, Tolerances
from .errors import (ConvergenceError, DegeneracyError, DimensionError, DomainError,
                     InfeasibleError, ValidationError)
from .geometry import (GeometryReport, bregman_field, dual_coordinate_field, flatness_check,
                       geometry_report, metric_from_divergence, norden_sen_check,
                       orthogonality_check)
from .potentials import LegendreReport, PotentialSpec, canonical_family
from .potentials import check_euler_legendre
from .spectral import (MATRIX_FAMILIES, HermitianMatrix, family_potential, matrix_div,
                       matrix_div_generic, parse_matrix_family, spectral_grad,
                       spectral_potential_eval)

COMMANDS = ("div", "project", "conjugate", "check-legendre", "check-pythagoras",
            "check-geometry", "report")
FORMATS = ("json", "csv")

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3


class InputError(Exception):
    """Malformed command-line input; maps to exit code 1."""


@dataclass
class RunConfig:
    command: str
    family: str | None = None
    params: dict = field(default_factory=dict)
    x: object = None
    y: object = None
    point: object = None
    constraint: object = None
    side: str = "left"
    samples: int = 100
    dim: int | None = None
    trace: bool = False
    show_config: bool = False
    seed: int = 0
    tolerances: Tolerances = DEFAULTS
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise InputError(f"unknown format {self.format!r}")
        if self.side not in ("left", "right"):
            raise InputError("side must be 'left' or 'right'")


# ---------------------------------------------------------------------------
# input parsing


def parse_json_text(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {what} at line {exc.lineno} column {exc.colno} "
                         f"(char {exc.pos}): {exc.msg}") from None


def load_json_arg(value: str | None, what: str):
    """Inline JSON, ``@file`` or an existing file path."""
    if value is None:
        return None
    if value.startswith("@"):
        path = value[1:]
    elif os.path.isfile(value):
        path = value
    else:
        return parse_json_text(value, what)
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_json_text(fh.read(), f"{what} ({path})")
    except OSError as exc:
        raise InputError(f"cannot read {what}: {exc}") from None


def parse_constraint(value: str | None, dim: int):
    """``simplex:<total>``, ``box:<lo>:<hi>``, or a ConstraintSet JSON document."""
    if value is None:
        raise InputError("--constraint is required")
    head = value.split(":", 1)[0]
    if head in ("simplex", "box") and not value.lstrip().startswith("{"):
        parts = value.split(":")
        try:
            nums = [float(p) for p in parts[1:]]
        except ValueError:
            raise InputError(f"bad constraint shorthand {value!r}") from None
        if head == "simplex" and len(nums) == 1:
            return ConstraintSet.simplex(nums[0], dim)
        if head == "box" and len(nums) == 2:
            return ConstraintSet.box(nums[0], nums[1], dim=dim)
        raise InputError(f"bad constraint shorthand {value!r}")
    obj = load_json_arg(value, "--constraint")
    if not isinstance(obj, dict):
        raise InputError("constraint JSON must be an object")
    return ConstraintSet.from_json(obj, dim=dim)


def _vector(obj, what):
    if obj is None:
        raise InputError(f"{what} is required")
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{what} must be a flat list of numbers")
    return arr


def _parse_tol(items):
    overrides = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--tol expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v
    try:
        return DEFAULTS.updated(overrides)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    except ValueError as exc:
        raise InputError(f"bad tolerance value: {exc}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="genbregman", description="Bregman divergences, projections and checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="override a numeric default (see report --show-config)")
        sp.add_argument("--format", choices=FORMATS, default="json")
        sp.add_argument("--output", help="write the document here instead of stdout")

    def fam(sp, required=True):
        sp.add_argument("--family", required=required)
        sp.add_argument("--params", help="JSON object of family parameters")

    sp = sub.add_parser("div", help="evaluate a divergence")
    fam(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    common(sp)

    sp = sub.add_parser("project", help="Bregman projection onto a constraint set")
    fam(sp)
    sp.add_argument("--y", required=True)
    sp.add_argument("--constraint", required=True)
    sp.add_argument("--side", choices=("left", "right"), default="left")
    sp.add_argument("--trace", action="store_true")
    common(sp)

    sp = sub.add_parser("conjugate", help="Fenchel conjugate and its gradient")
    fam(sp)
    sp.add_argument("--y", required=True)
    common(sp)

    sp = sub.add_parser("check-legendre", help="Euler-Legendre evidence for a family")
    fam(sp)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--samples", type=int, default=100)
    common(sp)

    sp = sub.add_parser("check-pythagoras", help="compare both sides of the Pythagorean relation")
    fam(sp)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--constraint", required=True)
    sp.add_argument("--side", choices=("left", "right"), default="left")
    common(sp)

    sp = sub.add_parser("check-geometry", help="metric and connections of a Bregman field")
    fam(sp)
    sp.add_argument("--point", required=True)
    sp.add_argument("--coords", choices=("theta", "eta"), default="theta")
    common(sp)

    sp = sub.add_parser("report", help="run the invariant suite")
    sp.add_argument("--show-config", action="store_true")
    common(sp)
    return p


def config_from_args(argv) -> tuple[RunConfig, argparse.Namespace]:
    ns = build_parser().parse_args(argv)
    params = load_json_arg(getattr(ns, "params", None), "--params") or {}
    if not isinstance(params, dict):
        raise InputError("--params must be a JSON object")
    cfg = RunConfig(
        command=ns.command,
        family=getattr(ns, "family", None),
        params=params,
        x=load_json_arg(getattr(ns, "x", None), "--x"),
        y=load_json_arg(getattr(ns, "y", None), "--y"),
        point=load_json_arg(getattr(ns, "point", None), "--point"),
        constraint=getattr(ns, "constraint", None),
        side=getattr(ns, "side", "left"),
        samples=getattr(ns, "samples", 100),
        dim=getattr(ns, "dim", None),
        trace=getattr(ns, "trace", False),
        show_config=getattr(ns, "show_config", False),
        seed=ns.seed,
        tolerances=_parse_tol(ns.tol),
        output=ns.output,
        format=ns.format,
    )
    return cfg, ns


# ---------------------------------------------------------------------------
# commands


def _is_matrix_family(name):
    try:
        parse_matrix_family(name)
        return True
    except ValidationError:
        return name.split("(")[0].strip().lower() in MATRIX_FAMILIES


def _spec(cfg: RunConfig, dim: int) -> PotentialSpec:
    try:
        family = canonical_family(cfg.family)
    except (ValidationError, KeyError, ValueError) as exc:
        raise InputError(f"unknown family {cfg.family!r}: {exc}") from None
    if family == "norm-integral":
        return PotentialSpec.from_json({"family": family, "params": cfg.params, "dim": dim})
    return PotentialSpec.make(family, dim, **cfg.params)


def _require_interior(spec, y, what="y"):
    if not spec.in_interior(y):
        raise DomainError(f"{what} is not in the interior of the effective domain")


def cmd_div(cfg: RunConfig):
    if cfg.family and _is_matrix_family(cfg.family):
        param = cfg.params.get("param")
        extra = set(cfg.params) - {"param"}
        if extra:
            raise InputError(f"unknown matrix parameters: {sorted(extra)}")
        xi = HermitianMatrix.from_json(cfg.x)
        zeta = HermitianMatrix.from_json(cfg.y)
        return {"value": matrix_div(cfg.family, xi, zeta, param,
                                    cfg.tolerances.spectral_threshold)}
    x, y = _vector(cfg.x, "--x"), _vector(cfg.y, "--y")
    if x.shape != y.shape:
        raise DimensionError("x and y have different lengths")
    spec = _spec(cfg, len(x))
    _require_interior(spec, y)
    if not spec.in_domain(x):
        raise DomainError("x is outside the effective domain")
    return {"value": bregman_div(spec, x, y)}


def cmd_project(cfg: RunConfig):
    y = _vector(cfg.y, "--y")
    spec = _spec(cfg, len(y))
    C = parse_constraint(cfg.constraint, len(y))
    _require_interior(spec, y)
    res = project(spec, C, y, cfg.side, tol=cfg.tolerances, trace=cfg.trace)
    return res.to_json(trace=cfg.trace)


def cmd_conjugate(cfg: RunConfig):
    y = _vector(cfg.y, "--y")
    spec = _spec(cfg, len(y))
    if not spec.in_dual_interior(y):
        raise DomainError("y is not in the interior of the conjugate's domain")
    return {"value": spec.conjugate(y), "grad": [float(v) for v in spec.grad_conjugate(y)]}


def cmd_check_legendre(cfg: RunConfig):
    spec = _spec(cfg, cfg.dim or 2)
    rep = check_euler_legendre(spec, cfg.samples, cfg.seed,
                               threshold=cfg.tolerances.boundary_slope)
    return rep.to_json()


def cmd_check_pythagoras(cfg: RunConfig):
    x, y = _vector(cfg.x, "--x"), _vector(cfg.y, "--y")
    spec = _spec(cfg, len(y))
    C = parse_constraint(cfg.constraint, len(y))
    _require_interior(spec, y)
    return pythagoras_check(spec, C, x, y, cfg.side, tol=cfg.tolerances).to_json()


def cmd_check_geometry(cfg: RunConfig, coords="theta"):
    p = _vector(cfg.point, "--point")
    spec = _spec(cfg, len(p))
    fld = bregman_field(spec) if coords == "theta" else dual_coordinate_field(spec)
    return geometry_report(fld, p, seed=cfg.seed).to_json()


def _check(name, fn):
    try:
        value, ok = fn()
        return {"property": name, "passed": bool(ok), "value": float(value)}
    except Exception as exc:  # a crashing property is a failing property
        return {"property": name, "passed": False, "value": math.nan,
                "error": f"{type(exc).__name__}: {exc}"}


def report_suite(seed: int = 0) -> list[dict]:
    """A quick pass over the invariants of every module."""
    rng = np.random.default_rng(seed)
    vec_specs = [PotentialSpec.make("neg-entropy", 3), PotentialSpec.make("burg", 3),
                 PotentialSpec.make("fermi-dirac", 3),
                 PotentialSpec.make("gamma-norm", 3, gamma=0.4),
                 PotentialSpec.make("alpha-power", 3, alpha=0.5),
                 PotentialSpec.make("exp", 3)]
    out = []

    for spec in vec_specs:
        def info(spec=spec):
            xs = spec.sample_interior(rng, 50)
            ys = spec.sample_interior(rng, 50)
            d = [bregman_div(spec, a, b) for a, b in zip(xs, ys)]
            z = [bregman_div(spec, a, a) for a in xs]
            return min(d), min(d) >= -1e-12 and max(z) <= 1e-10
        out.append(_check(f"information-axiom[{spec.family}]", info))

        def legendre(spec=spec):
            xs = spec.sample_interior(rng, 50)
            r = max(np.linalg.norm(spec.grad_conjugate(spec.grad(x)) - x) / (1 + np.linalg.norm(x))
                    for x in xs)
            return r, r <= 1e-8
        out.append(_check(f"legendre-roundtrip[{spec.family}]", legendre))

    def spectral():
        worst = 0.0
        for fam in ("umegaki", "logdet", "fermi", "gammanorm(0.3)", "alpha(0.5)"):
            for _ in range(10):
                mats = []
                for _ in range(2):
                    Q, _r = np.linalg.qr(rng.standard_normal((3, 3)))
                    lam = rng.uniform(0.1, 0.9, 3)
                    mats.append(Q @ np.diag(lam) @ Q.T)
                a = matrix_div(fam, mats[0], mats[1])
                b = matrix_div_generic(family_potential(fam, n=3), mats[0], mats[1])
                worst = max(worst, abs(a - b) / max(1.0, abs(b)))
        return worst, worst <= 1e-8
    out.append(_check("spectral-closed-form", spectral))

    def simplex_oracle():
        spec = PotentialSpec.make("neg-entropy", 4)
        worst = 0.0
        for _ in range(10):
            y = rng.uniform(0.1, 3, 4)
            s = float(rng.uniform(0.5, 3))
            P = left_project(spec, ConstraintSet.affine([[1, 1, 1, 1]], [s]), y).point
            worst = max(worst, float(np.max(np.abs(P - y * s / y.sum()))))
        return worst, worst <= 1e-8
    out.append(_check("projection-oracle[neg-entropy]", simplex_oracle))

    def pyth():
        worst = 0.0
        for spec in vec_specs:
            C = ConstraintSet.affine([[1.0, 2.0, -1.0]], [0.0])
            x = spec.sample_interior(rng, 1)[0]
            x = x - (C.A[0] @ x) / 6.0 * C.A[0]
            if not spec.in_interior(x):
                continue
            y = spec.sample_interior(rng, 1)[0]
            worst = max(worst, abs(pythagoras_check(spec, C, x, y).slack))
        return worst, worst <= 1e-6
    out.append(_check("pythagoras-affine", pyth))

    def geom():
        worst = 0.0
        for spec in (PotentialSpec.make("neg-entropy", 2), PotentialSpec.make("burg", 2)):
            p = np.array([0.6, 1.1])
            worst = max(worst, norden_sen_check(bregman_field(spec), p, seed=seed))
            fl = flatness_check(spec, [p])
            worst = max(worst, fl["max_gamma_theta"], fl["max_gamma_dual_eta"])
            worst = max(worst, float(np.max(np.abs(
                metric_from_divergence(bregman_field(spec), p) - spec.hess(p)))))
        return worst, worst <= 1e-3
    out.append(_check("dually-flat", geom))

    def ortho():
        spec = PotentialSpec.make("neg-entropy", 3)
        C = ConstraintSet.affine([[1, 1, 1]], [2.0])
        r = orthogonality_check(spec, C, rng.uniform(0.2, 2, 3))
        return r, r <= 1e-5
    out.append(_check("orthogonality", ortho))

    def spectral_gradient():
        spec = PotentialSpec.make("neg-entropy", 3)
        Q, _r = np.linalg.qr(rng.standard_normal((3, 3)))
        X = Q @ np.diag(rng.uniform(0.5, 2, 3)) @ Q.T
        H = rng.standard_normal((3, 3))
        H = H + H.T
        t = 1e-5
        fd = (spectral_potential_eval(spec, X + t * H) - spectral_potential_eval(spec, X - t * H)) / (2 * t)
        ex = float(np.sum(spectral_grad(spec, X) * H))
        err = abs(fd - ex) / max(1.0, abs(ex))
        return err, err <= 1e-5
    out.append(_check("spectral-gradient", spectral_gradient))
    return out


def cmd_report(cfg: RunConfig):
    doc = {"seed": cfg.seed}
    if cfg.show_config:
        doc["config"] = cfg.tolerances.to_dict()
    results = report_suite(cfg.seed)
    doc["all_passed"] = all(r["passed"] for r in results)
    doc["results"] = results
    return doc


# ---------------------------------------------------------------------------
# output


def _fmt_float(v: float, digits: int) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    s = f"{v:.{digits}g}"
    if digits == 17 and "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_json_text(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json_text(v)}"
                               for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json_text(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj), 17)
    return json.dumps(obj)


def _flatten(obj, prefix=""):
    row = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            row.update(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            row.update(_flatten(v, f"{prefix}[{i}]"))
    else:
        row[prefix] = obj
    return row


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v), 9)
    return "" if v is None else str(v)


def to_csv_text(doc) -> str:
    """One row per result (``results`` list) or a single row, with a header."""
    if isinstance(doc, dict) and isinstance(doc.get("results"), list):
        rows = [_flatten(r) for r in doc["results"]]
    else:
        rows = [_flatten(doc)]
    header = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(r.get(k)) for k in header])
    return buf.getvalue()


def read_document(text: str, fmt: str = "json"):
    """Parse an output document back (dict for JSON, list of dicts for CSV)."""
    if fmt == "json":
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))


READERS = {
    "project": ProjectionResult.from_json,
    "check-pythagoras": PythagorasResult.from_json,
    "check-legendre": LegendreReport.from_json,
    "check-geometry": GeometryReport.from_json,
}


def render(doc, fmt: str) -> str:
    return to_json_text(doc) + "\n" if fmt == "json" else to_csv_text(doc)


# ---------------------------------------------------------------------------
# entry points


def run(cfg: RunConfig, coords: str = "theta"):
    """Execute ``cfg`` and return the output document."""
    if cfg.command == "div":
        return cmd_div(cfg)
    if cfg.command == "project":
        return cmd_project(cfg)
    if cfg.command == "conjugate":
        return cmd_conjugate(cfg)
    if cfg.command == "check-legendre":
        return cmd_check_legendre(cfg)
    if cfg.command == "check-pythagoras":
        return cmd_check_pythagoras(cfg)
    if cfg.command == "check-geometry":
        return cmd_check_geometry(cfg, coords)
    return cmd_report(cfg)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg, ns = config_from_args(argv)
        doc = run(cfg, getattr(ns, "coords", "theta"))
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print(f"error: invalid input: {exc}", file=stderr)
        return EXIT_INPUT
    except (DomainError, DimensionError, InfeasibleError, DegeneracyError) as exc:
        print(f"domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=stderr)
        return EXIT_CONVERGENCE
    text = render(doc, cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
