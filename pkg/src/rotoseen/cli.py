"""Command-line front end.

Exit codes: 0 success, 1 failed verification check, 2 usage, parse or
domain error, 3 quadrature non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass

import numpy as np

from .core import PhysParams
from .errors import NonConvergenceError, RotoseenError, SupportError
from .expansion import beta_coefficients, forced_velocity, leading_term, manufactured_flow, remainder_G
from .oseen_tensor import oseen_E, oseen_pressure
from .scalar_kernels import heat_kernel, newton, oseen_resolvent_scalar, oseen_scalar, phi
from .stokes_rotating import TimeQuadratureConfig, gamma, stokes_T, z_tensor
from .suites import SUITES, run_suite

OUTPUT_DIR_ENV = "ROTOSEEN_OUTPUT_DIR"
KERNELS = ("N", "O", "O_lambda", "K", "phi", "E", "E4", "T", "gamma", "Z")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3

_EVAL_HELP = """\
CSV columns (one row per --point, in the order given):
  N, O, phi        x1,x2,x3,value
  O_lambda         x1,x2,x3,lam,value
  K                x1,x2,x3,t,value
  E                x1,x2,x3,E11,E12,...,E33   (row-major, E_jk)
  E4               x1,x2,x3,E41,E42,E43
  T                x1,x2,x3,t,T11,...,T33
  gamma            x1,x2,x3,y1,y2,y3,t,G11,...,G33
  Z                x1,x2,x3,y1,y2,y3,Z11,...,Z33,estimated_error
"""

_VERIFY_HELP = """\
CSV columns: name,lhs,rhs,err,tol,pass.  A check passes when err <= tol.
Complex pairing values are written as re+imj.  Exit status 0 iff every
check passes.
"""

_EXPAND_HELP = """\
The flow spec is a key=value file ('#' starts a comment):
  y0 = 0.3,0,0        centre of the smeared point force
  c = 1,0,0           total force
  epsilon = 0.25      mollifier radius
  S0 = 2              sphere radius
  linearized = true   only linearized flows are supported
  point = 5,0,0       evaluation point (repeatable; --point adds more)
A spec without any force keys yields a header and no rows.

CSV columns: record,x1,x2,x3,c1,c2,c3,scalar,note
  beta       c1..c3 = expansion coefficients
  flux       scalar = surface flux
  u          velocity of the manufactured flow at x
  leading    beta_1 E_.1(x)
  flux_term  flux * x / (4 pi |x|^3)
  G          remainder
  closure    scalar = |u - leading - flux_term - G| / |u|
  error      point rejected (note gives the reason); exit status 2
"""


# ------------------------------------------------------------------ parsing

def _vector(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected 3 components, got {len(vals)}: {text!r}")
    return vals


def read_key_values(path: str) -> list[tuple[str, str]]:
    """Flat ``key = value`` lines; ``#`` starts a comment.  Order is kept."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            if not k:
                raise ValueError(f"{path}:{n}: empty key")
            pairs.append((k, v))
    return pairs


_CONFIG_KEYS = {"tau": float, "rho": float, "tol_rel": float, "tol_abs": float,
                "max_subdivisions": int, "tail_safety": float, "out": str}


@dataclass(frozen=True)
class RunConfig:
    params: PhysParams
    quadrature: TimeQuadratureConfig
    out: str | None


def build_run_config(args) -> RunConfig:
    """Merge defaults, the ``--config`` file and command-line flags (flags win)."""
    vals = {}
    if args.config:
        for k, v in read_key_values(args.config):
            if k not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {k!r}")
            vals[k] = _CONFIG_KEYS[k](v)
    for k in _CONFIG_KEYS:
        flag = getattr(args, k, None)
        if flag is not None:
            vals[k] = flag
    q = TimeQuadratureConfig()
    quad = TimeQuadratureConfig(rel_tol=vals.get("tol_rel", q.rel_tol), abs_tol=vals.get("tol_abs", q.abs_tol),
                                max_subdivisions=vals.get("max_subdivisions", q.max_subdivisions),
                                tail_safety=vals.get("tail_safety", q.tail_safety))
    p = PhysParams(tau=vals.get("tau", 1.0), rho=vals.get("rho", 1.0))
    return RunConfig(p, quad, vals.get("out"))


def _resolve_out(out: str | None) -> str | None:
    if out is None or out == "-":
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(out):
        out = os.path.join(base, out)
    return out


# ------------------------------------------------------------------- output

def fmt(v) -> str:
    """17 significant digits; complex as ``re+imj``; None as empty."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


class CsvSink:
    def __init__(self, header):
        self.buf = io.StringIO()
        self.writer = csv.writer(self.buf, lineterminator="\n")
        self.writer.writerow(header)

    def row(self, values):
        self.writer.writerow([fmt(v) for v in values])

    def flush(self, out: str | None):
        text = self.buf.getvalue()
        if out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        d = os.path.dirname(out)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ----------------------------------------------------------------- commands

def _mat_names(sym):
    return [f"{sym}{j}{k}" for j in (1, 2, 3) for k in (1, 2, 3)]


def cmd_eval(args, rc: RunConfig) -> int:
    kern = args.kernel
    pts = args.point or []
    if not pts:
        raise _Usage("eval needs at least one --point")
    p = rc.params
    y = np.asarray(args.y or (0.0, 0.0, 0.0))
    xs = ["x1", "x2", "x3"]
    ys = ["y1", "y2", "y3"]
    if kern in ("K", "T", "gamma") and args.t is None:
        raise _Usage(f"kernel {kern} needs --t")
    if kern == "O_lambda" and args.lam is None:
        raise _Usage("kernel O_lambda needs --lam")
    header = {
        "N": xs + ["value"], "O": xs + ["value"], "phi": xs + ["value"],
        "O_lambda": xs + ["lam", "value"], "K": xs + ["t", "value"],
        "E": xs + _mat_names("E"), "E4": xs + ["E41", "E42", "E43"],
        "T": xs + ["t"] + _mat_names("T"), "gamma": xs + ys + ["t"] + _mat_names("G"),
        "Z": xs + ys + _mat_names("Z") + ["estimated_error"],
    }[kern]
    sink = CsvSink(header)
    for x in pts:
        x = np.asarray(x)
        if kern == "N":
            row = [*x, newton(x)]
        elif kern == "O":
            row = [*x, oseen_scalar(x, p)]
        elif kern == "phi":
            row = [*x, phi(x, p)]
        elif kern == "O_lambda":
            row = [*x, args.lam, oseen_resolvent_scalar(x, args.lam, p)]
        elif kern == "K":
            row = [*x, args.t, heat_kernel(x, args.t)]
        elif kern == "E":
            row = [*x, *oseen_E(x, p).velocity.ravel()]
        elif kern == "E4":
            row = [*x, *oseen_pressure(x)]
        elif kern == "T":
            row = [*x, args.t, *stokes_T(x, args.t).ravel()]
        elif kern == "gamma":
            row = [*x, *y, args.t, *gamma(x, y, args.t, p).ravel()]
        else:
            z = z_tensor(x, y, p, rc.quadrature)
            row = [*x, *y, *z.value.ravel(), z.estimated_error]
        sink.row([float(v) for v in row])
    sink.flush(_resolve_out(rc.out))
    return EXIT_OK


def cmd_verify(args, rc: RunConfig) -> int:
    rows = run_suite(args.suite, rc.params, rc.quadrature)
    sink = CsvSink(["name", "lhs", "rhs", "err", "tol", "pass"])
    for r in rows:
        sink.row([r.name, r.lhs, r.rhs, float(r.err), float(r.tol), r.passed])
    sink.flush(_resolve_out(rc.out))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_flow_spec(path: str):
    """Returns ``(setup or None, points)``; ``setup`` is None for a spec
    without force keys."""
    setup, points = {}, []
    for k, v in read_key_values(path):
        key = k.lower()
        if key == "point":
            points.append(_vector(v))
        elif key in ("y0", "c"):
            setup[key] = _vector(v)
        elif key in ("epsilon", "s0"):
            setup[key] = float(v)
        elif key in ("n_theta", "n_phi", "n_vol"):
            setup[key] = int(v)
        elif key == "linearized":
            if v.lower() not in _TRUE | _FALSE:
                raise ValueError(f"linearized must be true or false, got {v!r}")
            setup[key] = v.lower() in _TRUE
        else:
            raise ValueError(f"unknown flow spec key {k!r}")
    if not any(k in setup for k in ("y0", "c", "epsilon", "s0")):
        return None, points
    missing = [k for k in ("c", "epsilon", "s0") if k not in setup]
    if missing:
        raise ValueError(f"flow spec lacks {', '.join(missing)}")
    if not setup.get("linearized", True):
        raise ValueError("only linearized manufactured flows are supported")
    setup.setdefault("y0", (0.0, 0.0, 0.0))
    return setup, points


def cmd_expand(args, rc: RunConfig) -> int:
    setup, points = parse_flow_spec(args.spec)
    points = points + list(args.point or [])
    sink = CsvSink(["record", "x1", "x2", "x3", "c1", "c2", "c3", "scalar", "note"])
    status = EXIT_OK
    if setup is not None:
        p, cfg = rc.params, rc.quadrature
        extra = {k: setup[k] for k in ("n_theta", "n_phi", "n_vol") if k in setup}
        flow, force = manufactured_flow(setup["y0"], setup["c"], setup["epsilon"], setup["s0"], p, cfg,
                                        return_force=True, **extra)
        co = beta_coefficients(flow, p)
        blank = [None] * 3
        sink.row(["beta", *blank, *co.beta, None, None])
        sink.row(["flux", *blank, *blank, co.flux, None])
        for x in points:
            x = np.asarray(x, dtype=float)
            try:
                G = remainder_G(x, flow, p, cfg, co)
            except SupportError as exc:
                sink.row(["error", *x, *blank, None, str(exc)])
                status = EXIT_USAGE
                continue
            u = forced_velocity(x, force, p, cfg)
            lead, fl = leading_term(x, co, p)
            closure = float(np.linalg.norm(u - lead - fl - G) / np.linalg.norm(u))
            for name, vec in (("u", u), ("leading", lead), ("flux_term", fl), ("G", G)):
                sink.row([name, *x, *vec, None, None])
            sink.row(["closure", *x, *blank, closure, None])
    sink.flush(_resolve_out(rc.out))
    return status


# ------------------------------------------------------------------ parser

class _Usage(Exception):
    pass


def _common(sp):
    sp.add_argument("--tau", type=float, help="Reynolds-type parameter (default 1)")
    sp.add_argument("--rho", type=float, help="Taylor-type parameter (default 1)")
    sp.add_argument("--tol-rel", dest="tol_rel", type=float, help="relative tolerance of the time quadrature")
    sp.add_argument("--tol-abs", dest="tol_abs", type=float, help="absolute tolerance of the time quadrature")
    sp.add_argument("--config", help="key=value file (tau, rho, tol_rel, tol_abs, max_subdivisions, "
                                     "tail_safety, out); flags override it")
    sp.add_argument("--out", help=f"output CSV path (default stdout); relative paths are placed "
                                  f"under ${OUTPUT_DIR_ENV} when it is set")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotoseen", description=(
        "Kernels of the steady Oseen problem in a rotating frame: evaluation, "
        "verification runs and far-field expansions."))
    sub = ap.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate a kernel at points", epilog=_EVAL_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    ev.add_argument("--kernel", required=True, choices=KERNELS)
    ev.add_argument("--point", "--x", dest="point", action="append", type=_vector,
                    help="evaluation point x1,x2,x3 (repeatable)")
    ev.add_argument("--y", type=_vector, help="source point for gamma and Z (default origin)")
    ev.add_argument("--t", type=float, help="time for K, T and gamma")
    ev.add_argument("--lam", type=float, help="resolvent parameter for O_lambda")
    _common(ev)
    ev.set_defaults(func=cmd_eval)

    ve = sub.add_parser("verify", help="run a verification suite", epilog=_VERIFY_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    ve.add_argument("suite", choices=SUITES)
    _common(ve)
    ve.set_defaults(func=cmd_verify)

    ex = sub.add_parser("expand", help="far-field expansion of a manufactured flow", epilog=_EXPAND_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    ex.add_argument("spec", help="flow spec file")
    ex.add_argument("--point", "--x", dest="point", action="append", type=_vector,
                    help="extra evaluation point (repeatable)")
    _common(ex)
    ex.set_defaults(func=cmd_expand)
    return ap


_VECTOR_FLAGS = ("--point", "--x", "--y")


def _attach_negative_vectors(argv: list[str]) -> list[str]:
    # argparse would read "-2,0,0" as an option; glue it to its flag instead
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if a in _VECTOR_FLAGS and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{a}={nxt}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = ap.parse_args(_attach_negative_vectors(argv))
    try:
        rc = build_run_config(args)
        return args.func(args, rc)
    except NonConvergenceError as exc:
        print(f"rotoseen: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (_Usage, RotoseenError, ValueError, OSError) as exc:
        print(f"rotoseen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
