"""Command-line interface, system file format, demo systems, verification runner.

Commands:
    synth     -- synthesize a feedback law, print it as JSON
    simulate  -- integrate the closed loop, write a CSV trajectory
    sweep     -- sweep the plateau horizon, write a CSV table
    verify    -- run the full certificate suite, exit nonzero on failure
    demo      -- emit one of the built-in demo systems as a JSON file

System files are single JSON documents with row-major A and B arrays; CSV
output uses 17 significant digits, '.' decimals, and LF line endings so
that identical invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from .feedback import (
    bundle_for_variant,
    conjugate_generator,
    decay_bound,
    eigen_discriminant_2x2,
    law_from_bundle,
    spectral_abscissa,
)
from .gramian import RICCATI_TOL, QuadratureError, coercivity_margin, riccati_residual
from .lti import LtiSystem, NotObservableError, controllability_rank
from .sim import DivergenceError, integrate, lyapunov_profile, sweep_T

SCHEMA_VERSION = 1

ABSCISSA_TOL = 1e-9
COERCIVITY_TOL = -1e-10
SIMILARITY_TOL = 1e-8
LYAPUNOV_TOL = 1e-6
DOMINANCE_TOL = 1e-9

_VARIANT_FLAG = {"standard": "standard", "truncated": "truncated",
                 "infinite": "infinite-horizon"}


# ---------------------------------------------------------------------------
# system files

def parse_system(document) -> LtiSystem:
    """Parse and validate a JSON system document (str or bytes)."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed system file: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("malformed system file: top level must be an object")
    missing = [key for key in ("schema", "n", "m", "A", "B") if key not in data]
    if missing:
        raise ValueError(f"malformed system file: missing keys {missing}")
    if data["schema"] != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema version {data['schema']!r}; expected {SCHEMA_VERSION}"
        )
    n, m = data["n"], data["m"]
    if not (isinstance(n, int) and isinstance(m, int) and n >= 1 and m >= 1):
        raise ValueError("dimension mismatch: n and m must be integers >= 1")
    A = np.asarray(data["A"], dtype=float)
    B = np.asarray(data["B"], dtype=float)
    if A.shape != (n * n,):
        raise ValueError(
            f"dimension mismatch: A must be a flat row-major array of {n * n} "
            f"entries, got {A.shape[0] if A.ndim == 1 else A.shape}"
        )
    if B.shape != (n * m,):
        raise ValueError(
            f"dimension mismatch: B must be a flat row-major array of {n * m} "
            f"entries, got {B.shape[0] if B.ndim == 1 else B.shape}"
        )
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise ValueError("non-finite entries in A or B")
    return LtiSystem(A=A.reshape(n, n), B=B.reshape(n, m),
                     label=str(data.get("label", "")))


def system_to_json(sys_: LtiSystem) -> str:
    """Serialize a system to the JSON document format (deterministic)."""
    doc = {
        "schema": SCHEMA_VERSION,
        "n": sys_.n,
        "m": sys_.m,
        "A": sys_.A.reshape(-1).tolist(),
        "B": sys_.B.reshape(-1).tolist(),
        "label": sys_.label,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# demo systems

def _string_system(n: int, width: int | None) -> LtiSystem:
    """Semi-discretized vibrating string in energy coordinates.

    The stiffness matrix of the Dirichlet Laplacian on (0, pi) with n
    interior nodes is factored through its symmetric square root, giving a
    skew-symmetric state matrix whose Euclidean norm is the discrete energy.
    The control applies one independent input per controlled node, with the
    nodes spread evenly across the interior: this is a bounded, distributed
    control stand-in (genuine boundary control is out of reach for a
    finite-dimensional model).
    """
    if n < 2:
        raise ValueError(f"string demo needs n >= 2, got {n}")
    if width is None:
        width = min(n, max(3, round(n / 4)))
    if not 1 <= width <= n:
        raise ValueError(f"control width must be in [1, {n}], got {width}")
    h = math.pi / (n + 1)
    stiffness = (np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1)
                 + np.diag(np.full(n - 1, -1.0), -1)) / h**2
    evals, vecs = np.linalg.eigh(stiffness)
    root = vecs @ np.diag(np.sqrt(evals)) @ vecs.T
    zero = np.zeros((n, n))
    A = np.block([[zero, root], [-root, zero]])
    A = 0.5 * (A - A.T)  # exact skew-symmetry despite eigh round-off
    cols = np.zeros((2 * n, width))
    for i in range(width):
        cols[n + (n * (2 * i + 1)) // (2 * width), i] = 1.0
    return LtiSystem(A=A, B=cols, label=f"string({n},{width})")


def _skew_system(n: int, seed: int) -> LtiSystem:
    """Random skew-symmetric state matrix with a full-rank random control."""
    if n < 1:
        raise ValueError(f"skew demo needs n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    B = rng.standard_normal((n, min(2, n)))
    return LtiSystem(A=G - G.T, B=B, label=f"skew({n},{seed})")


_DEMO_RE = re.compile(r"\s*([a-z]+)\s*(?:\(\s*([0-9,\s]*)\))?\s*\Z")


def demo_system(name: str, seed: int | None = None) -> LtiSystem:
    """Built-in demo systems.

    Recognized names: 'oscillator', 'scalar', 'string(n[,controlWidth])',
    'skew(n[,seed])'.  The seed argument overrides the parenthesized seed
    for 'skew'; construction is deterministic for identical arguments.
    """
    match = _DEMO_RE.match(name)
    if not match:
        raise ValueError(f"unknown demo system {name!r}")
    kind, argtext = match.group(1), match.group(2)
    args = [int(a) for a in argtext.split(",") if a.strip()] if argtext else []
    if kind == "oscillator":
        if args:
            raise ValueError("oscillator demo takes no arguments")
        return LtiSystem(A=np.array([[0.0, 1.0], [-1.0, 0.0]]),
                         B=np.array([[0.0], [1.0]]), label="oscillator")
    if kind == "scalar":
        if args:
            raise ValueError("scalar demo takes no arguments")
        return LtiSystem(A=np.zeros((1, 1)), B=np.ones((1, 1)), label="scalar")
    if kind == "string":
        if not 1 <= len(args) <= 2:
            raise ValueError("string demo needs string(n[,controlWidth])")
        return _string_system(args[0], args[1] if len(args) == 2 else None)
    if kind == "skew":
        if not 1 <= len(args) <= 2:
            raise ValueError("skew demo needs skew(n[,seed])")
        if seed is None:
            seed = args[1] if len(args) == 2 else 0
        return _skew_system(args[0], seed)
    raise ValueError(f"unknown demo system {name!r}")


# ---------------------------------------------------------------------------
# verification runner

@dataclass(frozen=True)
class VerifyCheck:
    name: str
    status: str  # pass | fail | skip
    measured: float
    tolerance: float


@dataclass(frozen=True)
class VerifyReport:
    checks: list[VerifyCheck]
    passed: bool


def run_verify(sys_: LtiSystem, omega: float, T0: float, T: float | None = None,
               x0=None, t_final: float = 20.0, dt: float = 1e-3,
               nodes: int | None = None) -> VerifyReport:
    """Run every certificate on one system and collect a pass/fail report.

    Checks, in order: full controllability rank, Riccati residual,
    coercivity margin, similarity of the conjugated generator, spectral
    abscissa against -omega, the Lyapunov envelope along an integrated
    trajectory, and dominance of the decay-bound exponent.  A rank failure
    skips everything downstream.
    """
    if T is None:
        T = T0
    checks: list[VerifyCheck] = []

    rank = controllability_rank(sys_)
    rank_ok = rank == sys_.n
    checks.append(VerifyCheck("kalman-rank", "pass" if rank_ok else "fail",
                              measured=float(rank), tolerance=float(sys_.n)))
    if not rank_ok:
        for name in ("riccati-residual", "coercivity", "similarity",
                     "spectral-abscissa", "lyapunov-envelope", "bound-dominance"):
            checks.append(VerifyCheck(name, "skip", math.nan, math.nan))
        return VerifyReport(checks=checks, passed=False)

    try:
        g = bundle_for_variant(sys_, omega, T0, T, "standard", nodes)
    except QuadratureError as exc:
        residual = exc.residual if exc.residual is not None else math.inf
        checks.append(VerifyCheck("riccati-residual", "fail",
                                  measured=float(residual), tolerance=RICCATI_TOL))
        for name in ("coercivity", "similarity", "spectral-abscissa",
                     "lyapunov-envelope", "bound-dominance"):
            checks.append(VerifyCheck(name, "skip", math.nan, math.nan))
        return VerifyReport(checks=checks, passed=False)

    residual = riccati_residual(sys_, g)
    checks.append(VerifyCheck("riccati-residual",
                              "pass" if residual <= RICCATI_TOL else "fail",
                              measured=residual, tolerance=RICCATI_TOL))

    _, margin = coercivity_margin(g, omega)
    checks.append(VerifyCheck("coercivity",
                              "pass" if margin >= COERCIVITY_TOL else "fail",
                              measured=margin, tolerance=COERCIVITY_TOL))

    _, similarity = conjugate_generator(sys_, g)
    checks.append(VerifyCheck("similarity",
                              "pass" if similarity <= SIMILARITY_TOL else "fail",
                              measured=similarity, tolerance=SIMILARITY_TOL))

    law = law_from_bundle(sys_, g, omega, T)
    abscissa = spectral_abscissa(law.closed_loop)
    checks.append(VerifyCheck("spectral-abscissa",
                              "pass" if abscissa <= -omega + ABSCISSA_TOL else "fail",
                              measured=abscissa, tolerance=-omega + ABSCISSA_TOL))

    if x0 is None:
        x0 = np.ones(sys_.n) / math.sqrt(sys_.n)
    try:
        traj = integrate(law.closed_loop, x0, t_final, dt)
        violation = lyapunov_profile(traj, g, omega).max_violation
        lyap_ok = violation <= LYAPUNOV_TOL
    except DivergenceError:
        violation, lyap_ok = math.inf, False
    checks.append(VerifyCheck("lyapunov-envelope", "pass" if lyap_ok else "fail",
                              measured=violation, tolerance=LYAPUNOV_TOL))

    exponent = decay_bound(sys_, omega, T0, T, nodes).exponent
    gap = abscissa - exponent
    checks.append(VerifyCheck("bound-dominance",
                              "pass" if gap <= DOMINANCE_TOL else "fail",
                              measured=gap, tolerance=DOMINANCE_TOL))

    return VerifyReport(checks=checks, passed=all(c.status == "pass" for c in checks))


# ---------------------------------------------------------------------------
# output helpers

def _fmt(value: float) -> str:
    return format(value, ".17g")


def _write_text(out_path: str | None, text: str):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _load_system(args) -> LtiSystem:
    if args.demo is not None:
        return demo_system(args.demo, seed=args.seed)
    with open(args.system, "rb") as fh:
        return parse_system(fh.read())


def _parse_x0(text: str, n: int) -> np.ndarray:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise ValueError("--x0 must be a comma-separated list of numbers") from None
    if len(values) != n:
        raise ValueError(f"--x0 needs {n} entries, got {len(values)}")
    return np.asarray(values)


def _single_T(args) -> float | None:
    """The --T flag parsed as one horizon (sweep parses it as a list)."""
    if args.T is None:
        return None
    try:
        return float(args.T)
    except ValueError:
        raise ValueError(f"--T must be a number here, got {args.T!r}") from None


# ---------------------------------------------------------------------------
# commands

def _cmd_demo(args) -> int:
    _write_text(args.out, system_to_json(demo_system(args.name, seed=args.seed)))
    return 0


def _knot_for(variant: str, T0: float, T: float | None) -> float:
    if variant == "infinite-horizon":
        return math.inf
    if variant == "truncated":
        return float(T0)
    return float(T) if T is not None else float(T0)


def _cmd_synth(args) -> int:
    sys_ = _load_system(args)
    variant = _VARIANT_FLAG[args.variant]
    T = _single_T(args)
    g = bundle_for_variant(sys_, args.omega, args.T0, T, variant, args.quad_nodes)
    knot = _knot_for(variant, args.T0, T)
    law = law_from_bundle(sys_, g, args.omega, knot)
    report = {
        "label": sys_.label,
        "variant": variant,
        "omega": args.omega,
        "T0": args.T0,
        "T": knot if variant == "standard" else None,
        "gain": law.gain.tolist(),
        "closed_loop": law.closed_loop.tolist(),
        "spectral_abscissa": spectral_abscissa(law.closed_loop),
        "gramian_condition": g.condition,
    }
    if sys_.n == 2:
        report["discriminant"] = eigen_discriminant_2x2(law.closed_loop)
    _write_text(args.out, json.dumps(report, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    sys_ = _load_system(args)
    variant = _VARIANT_FLAG[args.variant]
    T = _single_T(args)
    g = bundle_for_variant(sys_, args.omega, args.T0, T, variant, args.quad_nodes)
    law = law_from_bundle(sys_, g, args.omega, _knot_for(variant, args.T0, T))
    x0 = (_parse_x0(args.x0, sys_.n) if args.x0 is not None
          else np.ones(sys_.n) / math.sqrt(sys_.n))
    traj = integrate(law.closed_loop, x0, args.t_final, args.dt)
    header = ["t"] + [f"x{i + 1}" for i in range(sys_.n)]
    rows = ([traj.times[i]] + traj.states[i].tolist()
            for i in range(traj.times.shape[0]))
    _write_text(args.out, _csv_text(header, rows))
    return 0


def _cmd_sweep(args) -> int:
    sys_ = _load_system(args)
    if args.T is not None:
        Ts = [float(part) for part in str(args.T).split(",")]
    else:
        Ts = [args.T0 + k for k in range(9)]
    rows = sweep_T(sys_, args.omega, args.T0, Ts, args.quad_nodes)
    header = ["T", "spectral_abscissa", "bound_exponent", "lambda_condition"]
    _write_text(args.out, _csv_text(header, rows))
    return 0


def _cmd_verify(args) -> int:
    sys_ = _load_system(args)
    x0 = _parse_x0(args.x0, sys_.n) if args.x0 is not None else None
    report = run_verify(sys_, args.omega, args.T0, _single_T(args), x0=x0,
                        t_final=args.t_final, dt=args.dt, nodes=args.quad_nodes)
    for check in report.checks:
        print(f"{check.status.upper():4s} {check.name:18s} "
              f"measured={_fmt(check.measured)} tolerance={_fmt(check.tolerance)}")
    if report.passed:
        print(f"all checks passed for {sys_.label or '(unnamed)'}")
        return 0
    failed = [c.name for c in report.checks if c.status == "fail"]
    print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
    return 1


def _add_common(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--system", metavar="PATH", help="JSON system file")
    source.add_argument("--demo", metavar="NAME",
                        help="built-in demo system, e.g. oscillator or skew(4,7)")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed override for the skew demo")
    parser.add_argument("--omega", type=float, required=True,
                        help="prescribed decay rate (> 0)")
    parser.add_argument("--T0", type=float, required=True,
                        help="observability horizon / weight knot")
    parser.add_argument("--T", default=None,
                        help="plateau horizon >= T0 (standard variant); "
                             "comma list for sweep")
    parser.add_argument("--quad-nodes", type=int, default=None,
                        help="Gauss-Legendre nodes per panel "
                             "(default 16, or RAPIDSTAB_QUAD_NODES)")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="output file (default: stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rapidstab",
        description="Gramian feedback synthesis and verification for linear "
                    "time-reversible systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_demo = sub.add_parser("demo", help="emit a built-in demo system as JSON")
    p_demo.add_argument("name", help="oscillator | scalar | string(n[,w]) | skew(n[,seed])")
    p_demo.add_argument("--seed", type=int, default=None)
    p_demo.add_argument("--out", metavar="PATH", default=None)
    p_demo.set_defaults(func=_cmd_demo)

    p_synth = sub.add_parser("synth", help="synthesize a feedback law (JSON report)")
    _add_common(p_synth)
    p_synth.add_argument("--variant", choices=sorted(_VARIANT_FLAG),
                         default="standard")
    p_synth.set_defaults(func=_cmd_synth)

    p_sim = sub.add_parser("simulate", help="integrate the closed loop (CSV)")
    _add_common(p_sim)
    p_sim.add_argument("--variant", choices=sorted(_VARIANT_FLAG),
                       default="standard")
    p_sim.add_argument("--x0", default=None, help="comma-separated initial state")
    p_sim.add_argument("--t-final", type=float, default=20.0)
    p_sim.add_argument("--dt", type=float, default=1e-3)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="sweep the plateau horizon (CSV)")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the certificate suite")
    _add_common(p_verify)
    p_verify.add_argument("--x0", default=None, help="comma-separated initial state")
    p_verify.add_argument("--t-final", type=float, default=20.0)
    p_verify.add_argument("--dt", type=float, default=1e-3)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, NotObservableError, QuadratureError, DivergenceError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
