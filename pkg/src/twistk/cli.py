"""Command-line front end: configuration, tables, and JSON-lines reports.

Dispatch is single-threaded; heavy submodules are imported lazily so the
``--threads`` cap can be exported to the BLAS runtime before numpy loads.
Exit codes: 0 success, 1 numerical-check failure (``verify`` returns the
number of failed checks), 2 usage or validation error.

Reports are JSON lines with a ``schema`` version field and sorted keys;
for a fixed configuration and seed the bytes are reproducible.  The human
table goes to standard output, machine output to ``--output``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _fail_usage(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def read_config(path: str) -> dict:
    """Flat key=value config file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _coerce(val: str, like):
    if isinstance(like, bool):
        return val.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(val)
    if isinstance(like, float):
        return float(val)
    return val


def resolve_config(args: argparse.Namespace, defaults: dict) -> int | None:
    """Fill unset options from the config file, then from hard defaults.

    Flags win over the config file: every option defaults to None at parse
    time, so a non-None attribute means the flag was given explicitly.
    """
    cfg = {}
    if args.config:
        try:
            cfg = read_config(args.config)
        except (OSError, ValueError) as exc:
            return _fail_usage(str(exc))
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            if key in cfg:
                try:
                    setattr(args, key, _coerce(cfg[key], default))
                except ValueError:
                    return _fail_usage(
                        f"config value for {key} is not a "
                        f"{type(default).__name__}: {cfg[key]!r}")
            else:
                setattr(args, key, default)
    unknown = set(cfg) - set(defaults) - {"command"}
    if unknown:
        return _fail_usage(f"unknown config keys: {sorted(unknown)}")
    return None


def emit(args: argparse.Namespace, record: dict):
    record = {"schema": SCHEMA_VERSION, **record}
    line = json.dumps(record, sort_keys=True)
    if args.output:
        with open(args.output, "a") as fh:
            fh.write(line + "\n")


def _level_weight(args):
    from .affine import LevelWeight
    scale = 2.0 if getattr(args, "corrupt_central", False) else 1.0
    return LevelWeight(args.k, args.two_j0, central_scale=scale)


def _build_family(args):
    from .susy import SuperchargeFamily
    lw = _level_weight(args)
    cut = args.grade_cut if args.grade_cut > 0 else None
    return SuperchargeFamily.build(lw, cut, null_tol=args.null_tol)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_invariant(args) -> int:
    from .susy import invariant_gamma_trace
    t0 = time.perf_counter()
    fam = _build_family(args)
    t_build = time.perf_counter() - t0
    t0 = time.perf_counter()
    rec = invariant_gamma_trace(fam, null_tol=args.null_tol)
    t_inv = time.perf_counter() - t0
    print(f"{'k':>4} {'2j0':>4} {'I':>10} {'I mod k+2':>10} "
          f"{'dim ker':>8} {'build s':>8} {'solve s':>8}")
    print(f"{args.k:>4} {args.two_j0:>4} {rec['invariant']:>10.6f} "
          f"{rec['invariant_mod']:>10.6f} {rec['dim_ker_Qplus']:>8} "
          f"{t_build:>8.2f} {t_inv:>8.2f}")
    emit(args, {"command": "invariant", "k": args.k, "two_j0": args.two_j0,
                "grade_cut": fam.space.grade_cut, "null_tol": args.null_tol,
                **rec})
    return EXIT_OK


def cmd_verify(args) -> int:
    from .susy import verify_suite
    fam = _build_family(args)
    checks = verify_suite(fam, null_tol=args.null_tol)
    failed = [c for c in checks if not c["passed"]]
    for c in checks:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"{mark}  {c['name']:<20} residual {c['residual']:.3e}  "
              f"(tol {c['tolerance']:.0e})")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    emit(args, {"command": "verify", "k": args.k, "two_j0": args.two_j0,
                "grade_cut": fam.space.grade_cut,
                "corrupt_central": bool(args.corrupt_central),
                "checks": checks, "n_failed": len(failed)})
    return len(failed)


def _parse_grids(spec: str):
    grids = []
    for part in spec.split(","):
        nt, _, np_ = part.strip().partition("x")
        grids.append((int(nt), int(np_)))
    return grids


def cmd_sphere_flux(args) -> int:
    from .susy import invariant_gamma_trace, invariant_sphere_flux
    try:
        grids = _parse_grids(args.grids)
    except ValueError:
        return _fail_usage(f"bad grid spec {args.grids!r}; "
                           "expected e.g. 12x24,24x48,48x96")
    fam = _build_family(args)
    target = invariant_gamma_trace(fam, null_tol=args.null_tol)["invariant"]
    ladder = []
    print(f"{'grid':>10} {'flux':>12} {'|flux - I|':>12} {'s':>7}")
    for nt, np_ in grids:
        t0 = time.perf_counter()
        rec = invariant_sphere_flux(fam, nt, np_)
        err = abs(rec["flux"] - target)
        ladder.append({"grid": [nt, np_], "flux": rec["flux"], "error": err})
        print(f"{nt:>4}x{np_:<5} {rec['flux']:>12.6f} {err:>12.3e} "
              f"{time.perf_counter() - t0:>7.1f}")
    errors = [step["error"] for step in ladder]
    converged = len(errors) >= 2 and errors[-1] < 1e-2 and all(
        b <= a for a, b in zip(errors, errors[1:]))
    if not converged:
        print("warning: flux ladder has not converged to the trace "
              "invariant; refine the grid", file=sys.stderr)
    emit(args, {"command": "sphere-flux", "k": args.k,
                "two_j0": args.two_j0, "gamma_trace": target,
                "ladder": ladder, "converged": converged})
    if not converged and args.strict:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_witten(args) -> int:
    from . import gerbe
    from .mesh import Triangulation
    if args.degree < -8 or args.degree > 8:
        return _fail_usage("degree must lie in -8..8")
    tri = Triangulation(args.subdiv, diagonal=args.diagonal)
    g = gerbe.power_map(args.degree)
    t0 = time.perf_counter()
    val = gerbe.witten_integral(g, tri)
    dt = time.perf_counter() - t0
    err = abs(val - args.degree)
    print(f"degree {args.degree}: integral {val:.8f}  "
          f"error {err:.2e}  ({tri.n_tets()} tets, {dt:.1f} s)")
    emit(args, {"command": "witten", "degree": args.degree,
                "subdiv": args.subdiv, "diagonal": args.diagonal,
                "n_tets": tri.n_tets(), "integral": val, "error": err})
    return EXIT_OK


def demo_atlas(dd: int, seed: int):
    """Synthetic scalar-twist atlas with Dixmier-Douady integer dd.

    A vortex of winding -dd in the overlap phase on the face opposite
    charts 2 and 3 contributes +dd to the collated class; the background
    cochain and the determinant twist are smooth and winding-free.
    """
    import numpy as np
    from . import gerbe
    from .mesh import Triangulation
    rng = np.random.default_rng(seed)
    chi = gerbe.linear_phase(0.5 * rng.standard_normal(4))
    g = gerbe.det_twist(gerbe.power_map(1), chi)
    log_h = lambda x: 1j * np.asarray(chi(x))
    lam = gerbe.smooth_phase_cochain(seed, scale=0.8)
    singular = []
    if dd != 0:
        face = Triangulation(0).face_corners(2, 3)
        vort, center = gerbe.vortex_phase(face, -dd)
        base = lam[(2, 3)]
        lam[(2, 3)] = lambda x: base(x) * vort(x)
        singular.append(((2, 3), center))
    atlas = gerbe.make_scalar_twist_atlas(g, lam, log_h, singular=singular)
    return atlas, g


def cmd_gerbe_demo(args) -> int:
    import dataclasses

    from . import gerbe
    from .mesh import Triangulation
    atlas, _ = demo_atlas(args.dd, args.seed)
    tri = Triangulation(args.subdiv)
    rec = gerbe.theorem1_invariant(atlas, tri, depth=args.depth)
    print(f"invariant {rec['invariant']:.6f}   dd_k {rec['dd_k']}   "
          f"modulus {rec['modulus']}")

    # branch covariance: a 2 pi i shift of one edge branch and of the
    # global log h branch must each move the invariant by a multiple of k
    shifted = dataclasses.replace(atlas, branch_offsets={(0, 1, 4): 1})
    d_edge = gerbe.theorem1_invariant(shifted, tri,
                                      depth=args.depth)["invariant"] \
        - rec["invariant"]
    shifted = dataclasses.replace(atlas, h_offset=1)
    d_h = gerbe.theorem1_invariant(shifted, tri,
                                   depth=args.depth)["invariant"] \
        - rec["invariant"]
    k = rec["dd_k"]

    def in_kz(delta):
        if k == 0:
            return abs(delta) < 1e-6
        return abs(delta / k - round(delta / k)) * abs(k) < 1e-6

    ok = in_kz(d_edge) and in_kz(d_h)
    print(f"branch shifts: edge {d_edge:+.6f}, log h {d_h:+.6f} "
          f"({'both in k*Z' if ok else 'NOT multiples of k'})")
    emit(args, {"command": "gerbe-demo", "dd": args.dd,
                "subdiv": args.subdiv, "depth": args.depth,
                "seed": args.seed, "invariant": rec["invariant"],
                "dd_k": rec["dd_k"], "modulus": rec["modulus"],
                "branch_shift": {"edge_delta": d_edge, "h_delta": d_h,
                                 "in_kZ": ok}})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_dump_basis(args) -> int:
    from .affine import orthonormal_basis
    from .fock import build_fock_basis
    lw = _level_weight(args)
    cut = args.grade_cut if args.grade_cut > 0 else 3
    if args.sector == "fermion":
        text = build_fock_basis(cut).dump_jsonl()
    else:
        text = orthonormal_basis(lw, cut, null_tol=args.null_tol).dump_json()
    if args.output:
        with open(args.output, "a") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

_MODEL_DEFAULTS = {"k": 1, "two_j0": 0, "grade_cut": 0, "null_tol": 1e-8}
_COMMON_DEFAULTS = {"seed": 0, "threads": 0, "strict": False}

DEFAULTS = {
    "invariant": {**_MODEL_DEFAULTS},
    "verify": {**_MODEL_DEFAULTS},
    "sphere-flux": {**_MODEL_DEFAULTS, "grids": "12x24,24x48,48x96"},
    "witten": {"degree": 1, "subdiv": 3, "diagonal": 0},
    "gerbe-demo": {"dd": 3, "subdiv": 3, "depth": 18},
    "dump-basis": {**_MODEL_DEFAULTS, "sector": "boson"},
}


def _add_model_args(sp):
    sp.add_argument("--k", type=int, help="level (>= 1)")
    sp.add_argument("--two-j0", dest="two_j0", type=int,
                    help="twice the vacuum spin, 0..k")
    sp.add_argument("--grade-cut", dest="grade_cut", type=int,
                    help="truncation grade (0 = automatic)")
    sp.add_argument("--null-tol", dest="null_tol", type=float,
                    help="relative kernel threshold")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config",
                        help="flat key=value config file; flags win")
    common.add_argument("--output",
                        help="append JSON-lines records to this file")
    common.add_argument("--seed", type=int,
                        help="seed for randomized inputs")
    common.add_argument("--threads", type=int,
                        help="cap BLAS worker threads (0 = leave unset)")
    common.add_argument("--strict", action="store_true", default=None,
                        help="treat convergence warnings as failures")
    p = argparse.ArgumentParser(
        prog="twistk",
        description="Twisted K-theory invariant laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    def sub_add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sp = sub_add("invariant", help="graded-trace invariant")
    _add_model_args(sp)
    sp.set_defaults(func=cmd_invariant)

    sp = sub_add("verify", help="run the consistency-check suite")
    _add_model_args(sp)
    sp.add_argument("--corrupt-central", action="store_true",
                    help="debug: double the central term (negative control)")
    sp.set_defaults(func=cmd_verify)

    sp = sub_add("sphere-flux", help="flux route with a grid ladder")
    _add_model_args(sp)
    sp.add_argument("--grids", help="comma list of THETAxPHI grid sizes")
    sp.set_defaults(func=cmd_sphere_flux)

    sp = sub_add("witten", help="winding integral of a degree map")
    sp.add_argument("--degree", type=int, help="map degree")
    sp.add_argument("--subdiv", type=int, help="mesh subdivision level")
    sp.add_argument("--diagonal", type=int, choices=(0, 1, 2),
                    help="octasection diagonal (alternative triangulations)")
    sp.set_defaults(func=cmd_witten)

    sp = sub_add("gerbe-demo",
                        help="synthetic twisted atlas demonstration")
    sp.add_argument("--dd", type=int, help="target Dixmier-Douady integer")
    sp.add_argument("--subdiv", type=int, help="mesh subdivision level")
    sp.add_argument("--depth", type=int,
                    help="graded refinement depth near vortex points")
    sp.set_defaults(func=cmd_gerbe_demo)

    sp = sub_add("dump-basis", help="write basis states as JSON")
    _add_model_args(sp)
    sp.add_argument("--sector", choices=("fermion", "boson"),
                    help="which factor space to dump")
    sp.set_defaults(func=cmd_dump_basis)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {**_COMMON_DEFAULTS, **DEFAULTS[args.command]}
    status = resolve_config(args, defaults)
    if status is not None:
        return status
    if args.threads and args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except ValueError as exc:
        return _fail_usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
