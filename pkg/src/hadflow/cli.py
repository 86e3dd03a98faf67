"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .center_manifold import BasisError, detect_flow, expand
from .exact import ExactAffineMatrix, ParameterError, to_phase_vector, verify_affine_family
from .families import BudgetExceeded, integer_kernel_basis, search_subsets
from .flow import SimConfig, integrate, sample_neighborhood, write_snapshots
from .phase_core import PhaseVector, jacobian
from .precision import MIN_DIGITS, Precision
from .spectral import (DefectMismatch, NotHadamard, cross_check_defect, defect_flow,
                       defect_linear_system, spectrum)

log = logging.getLogger("hadflow")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
MACHINE_DIGITS = 16


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    def __init__(self, payload: dict):
        super().__init__("verification failed")
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument helpers --------------------------------------------------------

def precision_for(digits: int | None) -> Precision:
    if digits is None or digits <= MACHINE_DIGITS:
        return Precision.machine()
    return Precision.arbitrary(max(digits, MIN_DIGITS))


_PI_FORM = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str, prec: Precision):
    """A float literal or a multiple of pi such as ``pi/2``, ``-3*pi/4``, ``2pi``."""
    m = _PI_FORM.match(text)
    if m:
        coef = m.group(1)
        coef = {"": "1", "+": "1", "-": "-1"}.get(coef, coef)
        value = prec.scalar(coef) * prec.pi
        if m.group(2):
            value = value / prec.scalar(m.group(2))
        return value
    try:
        float(text)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}; use a number or a form like 3*pi/4") from None
    return prec.scalar(text)


def _format(x, digits: int | None):
    if isinstance(x, (bool, int, np.integer, np.bool_)):
        return x.item() if isinstance(x, np.generic) else x
    if digits is not None and digits > 17:
        import mpmath

        return mpmath.nstr(x, digits, strip_zeros=False) if not isinstance(x, float) else repr(x)
    return float(x)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
        log.info("wrote %s", out)
    else:
        print(text)


def _add_source(p: argparse.ArgumentParser, params: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="JSON file: exact matrix (entries) or phase vector (d, theta)")
    src.add_argument("--catalog", metavar="NAME", help="catalog entry name (see the catalog subcommand)")
    if params:
        p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                       help="parameter value in radians, e.g. a=pi/2 (repeatable; unset parameters are 0)")


def _add_common(p: argparse.ArgumentParser, digits: bool = True) -> None:
    if digits:
        p.add_argument("--digits", type=int, default=None,
                       help=f"working precision in decimal digits (<= {MACHINE_DIGITS}: machine)")
    p.add_argument("--out", help="write JSON here instead of standard output")
    p.add_argument("--threads", type=int, default=1, help="worker threads (1 forces determinism)")
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _load_source(args) -> tuple[str, object]:
    if args.catalog is not None:
        try:
            return args.catalog, catalog.get(args.catalog).matrix
        except catalog.UnknownEntry as exc:
            raise UsageError(str(exc)) from None
    path = Path(args.matrix)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read matrix file {path}: {exc}") from None
    try:
        if "entries" in obj:
            return str(path), ExactAffineMatrix.from_json(obj)
        if "theta" in obj:
            return str(path), obj
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed matrix file {path}: {exc}") from None
    raise UsageError(f"{path}: expected an exact matrix ('entries') or a phase vector ('theta')")


def _assignment(args, M: ExactAffineMatrix, prec: Precision) -> dict:
    given = {}
    for item in getattr(args, "param", []):
        if "=" not in item:
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        name = name.strip()
        if name not in M.params:
            raise UsageError(f"unknown parameter {name!r}; this matrix has {list(M.params) or 'none'}")
        given[name] = parse_angle(value, prec)
    for name in M.params:
        if name not in given:
            log.info("parameter %s not set, using 0", name)
            given[name] = prec.scalar(0)
    return given


def _point(args, prec: Precision) -> tuple[str, PhaseVector, ExactAffineMatrix | None]:
    label, src = _load_source(args)
    if isinstance(src, ExactAffineMatrix):
        return label, to_phase_vector(src, _assignment(args, src, prec), prec), src
    if getattr(args, "param", None):
        raise UsageError("--param only applies to exact matrices")
    try:
        return label, PhaseVector.from_json(src, prec), None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed phase vector: {exc}") from None


def _load_vectors(args, n: int) -> np.ndarray | None:
    if getattr(args, "vectors", None):
        try:
            V = catalog.vectors(args.vectors)
        except catalog.UnknownEntry as exc:
            raise UsageError(str(exc)) from None
    elif getattr(args, "basis", None):
        try:
            raw = json.loads(Path(args.basis).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read basis file: {exc}") from None
        V = np.array(raw["vectors"] if isinstance(raw, dict) else raw)
    else:
        return None
    if V.ndim != 2 or V.shape[1] != n:
        raise UsageError(f"basis vectors must have length {n}, got shape {V.shape}")
    return V


# -- subcommands -------------------------------------------------------------

def cmd_defect(args) -> dict:
    prec = precision_for(args.digits)
    _, p, _ = _point(args, prec)
    tol = None if args.tol is None else prec.scalar(args.tol)
    if args.method == "flow-kernel":
        rep = defect_flow(p, tol, prec)
    elif args.method == "linear-system":
        rep = defect_linear_system(p, tol, prec)
    else:
        try:
            rep = cross_check_defect(p, tol, prec)
        except DefectMismatch as exc:
            raise VerificationFailure({"defect": None, "agreement": False,
                                       "flow_defect": exc.flow, "linear_defect": exc.linear})
    return rep.to_json()


def cmd_spectrum(args) -> dict:
    prec = precision_for(args.digits)
    _, p, _ = _point(args, prec)
    tol = None if args.tol is None else prec.scalar(args.tol)
    data = spectrum(jacobian(p, prec), tol, prec)
    return {
        "eigenvalues": [_format(v, args.digits) for v in data.eigenvalues],
        "center_dim": data.center_dim,
        "stable_dim": data.stable_dim,
        "unstable_dim": data.unstable_dim,
        "tol": _format(data.tol, args.digits),
    }


def cmd_cm(args) -> dict:
    prec = precision_for(args.digits)
    _, p, _ = _point(args, prec)
    n = p.theta.shape[0]
    B = _load_vectors(args, n)
    if B is None:
        kb = integer_kernel_basis(jacobian(p, prec), prec=prec)
        B = kb.vectors
        log.info("using %s kernel basis of size %d", "integer" if kb.integer else "numeric", len(kb))
    if B.shape[0] == 0:
        raise UsageError("the center subspace is trivial; nothing to expand")
    try:
        e = expand(p, B.T, args.order, prec)
    except BasisError as exc:
        raise UsageError(str(exc)) from None
    tol = args.tol if prec.is_machine else prec.scalar(args.tol)
    verdict = detect_flow(e, tol)
    dg = args.digits
    first = verdict.first_nonzero
    return {
        "order": e.order,
        "basis": [[_format(v, dg) for v in col] for col in e.basis.T],
        "alpha": [{"rate": i + 1, "monomial": list(m), "value": _format(v, dg)}
                  for (i, m), v in e.alpha_coeffs.items()],
        "w": [{"monomial": list(m), "vector": [_format(v, dg) for v in vec]}
              for m, vec in e.w_coeffs.items()],
        "verdict": {
            "flow_detected": verdict.flow_detected,
            "tol": _format(verdict.tol, dg),
            "max_abs_alpha_per_order": [_format(v, dg) for v in verdict.max_abs_alpha_per_order],
            "first_nonzero": None if first is None else {
                "order": first.order, "monomial": list(first.monomial),
                "rate": first.rate + 1, "coefficient": _format(first.coefficient, dg)},
        },
    }


def cmd_flow(args) -> dict:
    _, p, _ = _point(args, Precision.machine())
    try:
        times = tuple(float(t) for t in args.times.split(","))
        cfg = SimConfig(n_points=args.n, radius=args.radius, seed=args.seed, times=times,
                        rtol=args.rtol, atol=args.atol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    snaps = integrate(sample_neighborhood(p, cfg), cfg.times, cfg)
    paths = write_snapshots(snaps, args.out_dir, {"config": cfg, "center": p.to_json()})
    return {
        "files": [str(x) for x in paths],
        "underflow_points": int(snaps[-1].underflow.sum()) if snaps else 0,
    }


def cmd_verify_family(args) -> dict:
    if args.family:
        args.matrix = args.family
    label, M = _load_source(args)
    if not isinstance(M, ExactAffineMatrix):
        raise UsageError("verify-family needs an exact matrix, not a phase vector")
    verdict = verify_affine_family(M)
    out = {"name": label, "params": list(M.params), **verdict.to_json()}
    if not verdict.hadamard:
        raise VerificationFailure(out)
    return out


def cmd_search(args) -> dict:
    label, M = _load_source(args)
    if not isinstance(M, ExactAffineMatrix):
        raise UsageError("search-families needs an exact matrix")
    if M.params:
        M = M.specialize({p: 0 for p in M.params})
        log.info("parameters fixed at 0 for the search base")
    n = (M.d - 1) ** 2
    V = _load_vectors(args, n)
    if V is None:
        kb = integer_kernel_basis(jacobian(to_phase_vector(M)))
        if not kb.integer:
            raise VerificationFailure({"error": "no integer kernel basis found"})
        V = kb.vectors
    try:
        found = search_subsets(M, V, args.max_arity, args.min_arity, args.budget, args.seed)
    except (BudgetExceeded, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return {
        "name": label,
        "basis": V.tolist(),
        "subsets": [s.to_json() for s in found],
    }


def cmd_catalog(args) -> dict:
    if args.name is None:
        return {"entries": [{"name": n, "provenance": prov} for n, prov in catalog.list_entries()],
                "vector_sets": catalog.vector_sets()}
    try:
        e = catalog.get(args.name)
    except catalog.UnknownEntry as exc:
        raise UsageError(str(exc)) from None
    return {"name": e.name, "provenance": e.provenance, "ranges": e.ranges, "matrix": e.matrix.to_json()}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hadflow", description="Gradient-flow tools for complex Hadamard matrices.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("defect", help="defect of a Hadamard matrix")
    _add_source(p)
    p.add_argument("--method", choices=["flow-kernel", "linear-system", "both"], default="both")
    p.add_argument("--tol", type=float, default=None, help="zero threshold (default: scaled automatically)")
    _add_common(p)
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser("spectrum", help="eigenvalues of the flow Jacobian")
    _add_source(p)
    p.add_argument("--tol", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("cm", help="center-manifold expansion and flow detection")
    _add_source(p)
    p.add_argument("--order", type=int, required=True)
    b = p.add_mutually_exclusive_group()
    b.add_argument("--basis", help="JSON file with a list of center vectors")
    b.add_argument("--vectors", metavar="SET", help="catalog vector set used as the basis")
    p.add_argument("--tol", type=float, default=1e-8, help="flow detection threshold")
    _add_common(p)
    p.set_defaults(func=cmd_cm)

    p = sub.add_parser("flow", help="integrate a point cloud and export snapshots")
    _add_source(p)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--times", default="5,20,70,500", help="comma-separated snapshot times")
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--out-dir", required=True, help="directory for CSV snapshots and manifest")
    _add_common(p, digits=False)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("verify-family", help="exact verification of an affine family")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="JSON file with an exact matrix")
    src.add_argument("--matrix", help="alias of --family")
    src.add_argument("--catalog", metavar="NAME")
    _add_common(p, digits=False)
    p.set_defaults(func=cmd_verify_family)

    p = sub.add_parser("search-families", help="search kernel-vector subsets for affine families")
    _add_source(p, params=False)
    p.add_argument("--max-arity", type=int, required=True)
    p.add_argument("--min-arity", type=int, default=1)
    p.add_argument("--budget", type=int, default=100_000, help="maximum number of subsets to test")
    p.add_argument("--seed", type=int, default=0)
    b = p.add_mutually_exclusive_group()
    b.add_argument("--basis", help="JSON file with integer kernel vectors")
    b.add_argument("--vectors", metavar="SET", help="catalog vector set")
    _add_common(p, digits=False)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("catalog", help="list catalog entries or show one")
    p.add_argument("name", nargs="?")
    _add_common(p, digits=False)
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    if args.threads < 1:
        print(f"{parser.prog}: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "digits", None) is not None and args.digits < 15:
        print(f"{parser.prog}: error: --digits must be >= 15", file=sys.stderr)
        return EXIT_USAGE
    config = {k: v for k, v in vars(args).items() if k != "func"}
    if "digits" in config:
        config["precision"] = str(precision_for(config["digits"]))
    log.info("config %s", json.dumps(config, sort_keys=True))
    try:
        payload = args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailure as exc:
        _emit(exc.payload, getattr(args, "out", None))
        return EXIT_VERIFY
    except (NotHadamard, ParameterError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VERIFY if isinstance(exc, NotHadamard) else EXIT_USAGE
    _emit(payload, getattr(args, "out", None) if args.command != "flow" else None)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
