"""Command-line entry point: ``gamma-dilate <command> ...``.

Exit codes: 0 every check passed, 1 a condition was violated, 2 bad input
or an internal error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import checks, decomposition, dilation, fundamental, generators, geometry, models
from .errors import (DecompositionError, GammaDilationError, InputError, NonCommutingError,
                     NotContractionError, NotPSDError)
from .io import (MatrixBundle, dumps_json, make_report, read_bundle, tuple_bundle, write_atomic,
                 write_bundle)
from .linalg import DEFAULT_TOL, op_norm
from .report import CheckReport

EXIT_PASS, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2
THREADS_ENV = "GAMMA_DILATE_THREADS"

# precondition failures that say something about the input operators
VIOLATIONS = (NotContractionError, NonCommutingError, NotPSDError, DecompositionError)


class CommandResult:
    def __init__(self, report, bundle=None):
        self.report = report
        self.bundle = bundle


def _tuple(args, family=None):
    b = read_bundle(args.input)
    fam = family or getattr(args, "family", None) or b.family
    if fam != b.family:
        raise InputError(f"--family {fam} does not match bundle family {b.family}")
    return b.to_tuple()


def _opts(args, *names):
    return {n: getattr(args, n) for n in names}


def _violation_report(command, args, exc):
    rep = CheckReport(f"{command} preconditions")
    it = rep.upper(type(exc).__name__, 1.0, 0.0, note=str(exc))
    for attr in ("norm", "residual", "eigenvalue", "index", "pair"):
        if hasattr(exc, attr):
            it.witness = dict(it.witness or {}, **{attr: getattr(exc, attr)})
    return make_report(command, _opts(args, "input"), [rep], seed=getattr(args, "seed", None))


# --- commands ---------------------------------------------------------------------------

def cmd_check(args):
    tup = _tuple(args)
    fam = tup.family
    if fam not in checks.CHECKS:
        raise InputError(f"check supports gamma333 and gamma312, not {fam}")
    reports = []
    if args.battery in ("gamma", "all"):
        reports.append(checks.CHECKS[fam](tup, z_samples=args.z_samples, tol=args.tol))
    if args.battery in ("isometry", "all"):
        iso = checks.check_isometry333 if fam == "gamma333" else checks.check_isometry312
        reports.append(iso(tup, tol=args.tol, z_samples=args.z_samples))
    if args.battery in ("unitary", "all"):
        uni = checks.check_unitary333 if fam == "gamma333" else checks.check_unitary312
        reports.append(uni(tup, tol=args.tol, seed=args.seed))
    opts = _opts(args, "input", "battery", "z_samples", "tol")
    return CommandResult(make_report("check", opts, reports, seed=args.seed,
                                     residuals={"family": fam, "dim": tup.dim}))


def cmd_fundamental(args):
    tup = _tuple(args)
    if tup.family == "gamma333":
        fs = fundamental.solve_fundamental_333(tup, args.tol, method=args.method)
        lemma = fundamental.verify_lemma_identities_333(tup, fs, args.tol)
        hyp = fundamental.check_dilation_hypotheses_333(fs, args.tol) if fs.consistent else None
        names = [f"F{i}" for i in range(1, 7)]
        ops = list(fs.F) if fs.rank else []
        fam = "fset333"
    elif tup.family == "gamma312":
        fs = fundamental.solve_fundamental_312(tup, args.tol, method=args.method)
        lemma = fundamental.verify_lemma_identities_312(tup, fs, args.tol)
        hyp = fundamental.check_dilation_hypotheses_312(fs, args.tol) if fs.consistent else None
        names = ["G1", "G2", "Gt1", "Gt2"]
        ops = list(fs.ops) if fs.rank else []
        fam = "fset312"
    else:
        raise InputError("fundamental supports gamma333 and gamma312")
    resid = {"status": fs.status, "defect_rank": fs.rank, "equation_residuals": fs.residuals,
             "warnings": fs.warnings, "method": fs.method}
    bundle = None
    if fs.consistent and fs.rank:
        mats = dict(zip(names, ops))
        mats["defect_basis"] = fs.defect.basis
        bundle = MatrixBundle(fam, mats, {"source": str(args.input), "basis": "defect eigenbasis"})
    reps = [fundamental.residual_report(fs, args.tol), lemma, hyp]
    return CommandResult(make_report("fundamental", _opts(args, "input", "method", "tol"), reps,
                                     residuals=resid), bundle)


def cmd_dilate(args):
    tup = _tuple(args)
    fam = tup.family
    solve = {"gamma333": fundamental.solve_fundamental_333,
             "gamma312": fundamental.solve_fundamental_312}.get(fam)
    if solve is None:
        raise InputError("dilate supports gamma333 and gamma312")
    if args.construction == "schaffer":
        build = dilation.build_schaffer_333 if fam == "gamma333" else dilation.build_schaffer_312
        fs = solve(tup, args.tol)
    else:
        build = (dilation.build_coisometric_333 if fam == "gamma333"
                 else dilation.build_coisometric_312)
        fs = solve(tup.adjoint(), args.tol)
    dil = build(tup, fs, depth=args.depth, tol=args.tol)
    rep = dilation.verify_dilation(dil, tup, poly_degree=args.poly_degree, trials=args.trials,
                                   seed=args.seed, tol=args.verify_tol)
    out = dil.operators
    out.meta = {"construction": dil.construction, "depth": dil.depth, "base_dim": dil.base_dim,
                "defect_rank": dil.defect_rank, "interior_dim": dil.interior_dim,
                "source": str(args.input)}
    resid = {"dim": dil.dim, "interior_dim": dil.interior_dim, "notes": dil.notes}
    opts = _opts(args, "input", "depth", "construction", "tol", "verify_tol", "trials",
                 "poly_degree")
    return CommandResult(make_report("dilate", opts, [dil.hypotheses, rep], seed=args.seed,
                                     residuals=resid), tuple_bundle(out))


def _model_from_bundle(b, depth, tol):
    if b.family == "fset333":
        return models.build_pure_isometry_model_333([b.matrices[f"F{i}"] for i in range(1, 7)],
                                                    depth, tol)
    if b.family == "fset312":
        return models.build_pure_isometry_model_312(*(b.matrices[n] for n in
                                                      ("G1", "G2", "Gt1", "Gt2")), depth, tol)
    raise InputError("model input must be an fset333 or fset312 bundle")


def cmd_model(args):
    b = read_bundle(args.input)
    model = _model_from_bundle(b, args.depth, args.tol)
    rec, leak = models.recover_coefficients(model, return_leakage=True)
    if b.family == "fset333":
        expect = [b.matrices[f"F{i}"] for i in range(1, 7)]
        iso = checks.check_isometry333
    else:
        m = b.matrices
        expect = [m["G1"], 2 * m["G2"], 2 * m["Gt1"], m["Gt2"]]
        iso = checks.check_isometry312
    rt = CheckReport("coefficient recovery", options_used={"tol": 1e-12})
    rt.upper("round trip", max(op_norm(a - e) for a, e in zip(rec, expect)), 1e-12)
    rt.upper("support on constants block", max(leak), 1e-12)
    reports = [model.hypotheses, rt,
               iso(model.as_tuple(), tol=args.tol, interior=model.interior_dim)]
    out = model.as_tuple()
    out.meta = {"construction": "toeplitz_model", "depth": model.depth,
                "coeff_dim": model.coeff_dim, "status": model.status}
    if args.keep_blocks:
        out = models.compress_model(model, args.keep_blocks)
        out.meta = {"construction": "compressed", "depth": model.depth,
                    "keep_blocks": args.keep_blocks, "coeff_dim": model.coeff_dim}
    resid = {"status": model.status, "interior_dim": model.interior_dim}
    return CommandResult(make_report("model", _opts(args, "input", "depth", "keep_blocks", "tol"),
                                     reports, residuals=resid), tuple_bundle(out))


def cmd_blh(args):
    b = read_bundle(args.input)
    tb = read_bundle(args.theta) if args.theta else b
    Theta = tb.ordered("Theta")
    if not Theta:
        raise InputError("no Theta0, Theta1, ... matrices found")
    model = _model_from_bundle(b, args.depth, args.tol)
    res = models.blh_intertwine_check(model, Theta, tol=args.blh_tol, z_samples=args.z_samples)
    mats = {}
    for k, pen in enumerate(res.psi):
        mats[f"psi{k + 1}_0"] = pen.constant
        mats[f"psi{k + 1}_1"] = pen.linear
    bundle = MatrixBundle("collection", mats, {"construction": "blh_pencils"})
    opts = _opts(args, "input", "theta", "depth", "blh_tol", "z_samples")
    return CommandResult(make_report("blh", opts, [res.report]), bundle)


def cmd_decompose(args):
    tup = _tuple(args)
    if tup.family == "gamma333":
        res = decomposition.canonical_decompose_333(tup, args.tol, seed=args.seed)
    elif tup.family == "gamma312":
        res = decomposition.canonical_decompose_312(tup, args.tol, seed=args.seed)
    else:
        raise InputError("decompose supports gamma333 and gamma312")
    ident = decomposition.verify_block_identities(tup, res, tol=args.identity_tol)
    summary = CheckReport("decomposition summary")
    summary.upper("cnu certificate (unitary part of the cnu restriction)",
                  res.residuals["cnu_certificate"], 0)
    expected = tup.meta.get("dim_unitary")
    if expected is not None:
        summary.upper("dim h1 matches provenance", abs(res.dim_unitary - int(expected)), 0)
    resid = dict(res.residuals, dim_unitary=res.dim_unitary, dim_cnu=res.dim_cnu, notes=res.notes)
    mats = {"h1_basis": res.h1_basis, "h2_basis": res.h2_basis}
    for part, t in (("U", res.restricted_unitary), ("C", res.restricted_cnu)):
        for nm, M in t.as_dict().items():
            mats[f"{part}_{nm}"] = M
    bundle = MatrixBundle("collection", mats, {"construction": "canonical_decomposition",
                                               "family": tup.family})
    return CommandResult(make_report("decompose", _opts(args, "input", "tol", "identity_tol"),
                                     [summary, res.unitary_report, ident], seed=args.seed,
                                     residuals=resid), bundle)


def _single(args):
    b = read_bundle(args.input)
    if "M" not in b.matrices:
        raise InputError("expected a bundle holding a matrix named M")
    return b.matrices["M"]


def cmd_mu(args):
    A = _single(args)
    space = geometry.MuSpace.parse(args.space)
    if A.shape != (space.n, space.n):
        raise InputError(f"M is {A.shape}, space needs {space.n} x {space.n}")
    r = geometry.mu(A, space, n_radii=args.n_radii, n_angles=args.n_angles)
    rep = CheckReport("mu estimate", options_used={"space": str(space)})
    rep.upper("det(I - A diag(z)) at the witness", r.singularity_residual(A, space), 1e-8,
              witness={"z": r.witness_z})
    rep.notes.append(f"mu = {r.value!r}")
    resid = {"mu": r.value, "witness_z": r.witness_z, "grid": r.grid_spec,
             "lower_bound": geometry.mu_lower_bound(A, space)}
    return CommandResult(make_report("mu", _opts(args, "input", "space", "n_radii", "n_angles"),
                                     [rep], residuals=resid))


def cmd_coords(args):
    A = _single(args)
    fam = args.family or "gamma333"
    if fam not in geometry.FAMILY_COORDS:
        raise InputError("coords supports gamma333 and gamma312")
    x = geometry.FAMILY_COORDS[fam](A)
    rep = CheckReport("coordinates")
    rep.notes.append("coordinates are given in residuals; mu(A) <= 1 decides membership")
    return CommandResult(make_report("coords", _opts(args, "input", "family"), [rep],
                                     residuals={"family": fam, "coords": x}))


def cmd_gen(args):
    fam = args.family
    if args.dim < 1:
        raise InputError(f"--dim must be >= 1, got {args.dim}")
    if args.kind == "diagonal":
        tup = generators.diagonal_model(fam, args.dim, args.seed, boundary=args.boundary,
                                        rotate=args.rotate)
    elif args.kind == "unitary":
        tup = generators.unitary_model(fam, args.dim, args.seed, rotate=args.rotate)
    elif args.kind == "mixture":
        tup, _ = generators.mixture(fam, args.dim, args.dim_cnu, args.seed)
    elif args.kind == "compressed":
        keep = args.keep_blocks or max(1, args.depth // 2)
        tup = generators.compressed_model(fam, args.dim, args.depth, keep, args.seed)
    else:
        raise InputError(f"unknown kind {args.kind}")
    if args.boundary and args.kind != "diagonal":
        raise InputError("--boundary only applies to --kind diagonal")
    tup.meta = dict(tup.meta, kind=args.kind, family=fam)
    bundle = tuple_bundle(tup)
    rep = CheckReport("generated bundle", options_used=_opts(args, "kind", "family", "dim",
                                                              "seed"))
    return CommandResult(make_report("gen", _opts(args, "kind", "family", "dim", "dim_cnu",
                                                  "depth", "keep_blocks", "boundary", "rotate"),
                                     [rep], seed=args.seed, residuals={"dim": tup.dim}), bundle)


def _threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def cmd_batch(args):
    n = _threads()
    out_dir = args.out_dir
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    def one(path):
        sub = argparse.Namespace(**vars(args))
        sub.input = path
        code, report = _execute(cmd_check, "check", sub)
        if out_dir:
            base = os.path.splitext(os.path.basename(path))[0]
            write_atomic(os.path.join(out_dir, base + ".report.json"), dumps_json(report))
        return {"input": path, "exit_code": code, "verdict": report.get("verdict")}

    with ThreadPoolExecutor(max_workers=n) as pool:
        rows = list(pool.map(one, args.inputs))
    worst = max(r["exit_code"] for r in rows) if rows else EXIT_PASS
    rep = CheckReport("batch")
    for r in rows:
        rep.upper(f"{r['input']} exit code", r["exit_code"], 0)
    report = make_report("batch", {"inputs": list(args.inputs), "threads": n,
                                   "battery": args.battery}, [rep], residuals={"files": rows})
    return CommandResult(report), worst


COMMANDS = {
    "check": cmd_check, "fundamental": cmd_fundamental, "dilate": cmd_dilate,
    "model": cmd_model, "blh": cmd_blh, "decompose": cmd_decompose, "mu": cmd_mu,
    "coords": cmd_coords, "gen": cmd_gen,
}


# --- argument parsing -------------------------------------------------------------------

def _common(p, seed=True):
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json",
                     help="JSON report (default)")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text",
                     help="human-readable report")
    p.set_defaults(fmt="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    if seed:
        p.add_argument("--seed", type=int, default=0)


def _family_arg(p, default=None):
    p.add_argument("--family", choices=["gamma333", "gamma312"], default=default)


def build_parser():
    ap = argparse.ArgumentParser(prog="gamma-dilate",
                                 description="Gamma-contraction checks, dilations and models.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="necessary-condition battery")
    p.add_argument("input")
    _family_arg(p)
    p.add_argument("--z-samples", type=int, default=64)
    p.add_argument("--battery", choices=["gamma", "isometry", "unitary", "all"], default="gamma")
    _common(p)

    p = sub.add_parser("fundamental", help="solve for fundamental operators")
    p.add_argument("input")
    p.add_argument("--method", choices=["diagonal", "lstsq"], default="diagonal")
    p.add_argument("--bundle-out", help="write the fundamental operators as a bundle")
    _common(p, seed=False)

    p = sub.add_parser("dilate", help="truncated isometric or co-isometric dilation")
    p.add_argument("input")
    p.add_argument("--depth", type=int, default=dilation.DEFAULT_DEPTH)
    p.add_argument("--construction", choices=["schaffer", "coisometric"], default="schaffer")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--poly-degree", type=int, default=3)
    p.add_argument("--verify-tol", type=float, default=1e-9)
    p.add_argument("--bundle-out", help="write the dilation operators as a bundle")
    _common(p)

    p = sub.add_parser("model", help="block-Toeplitz pure-isometry model from a fundamental set")
    p.add_argument("input")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--keep-blocks", type=int, default=None,
                   help="emit the compression to the first K blocks instead")
    p.add_argument("--bundle-out")
    _common(p, seed=False)

    p = sub.add_parser("blh", help="intertwining check against an inner polynomial Theta")
    p.add_argument("input")
    p.add_argument("--theta", help="bundle with Theta0, Theta1, ... (default: the input)")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--blh-tol", type=float, default=1e-10)
    p.add_argument("--z-samples", type=int, default=64)
    p.add_argument("--bundle-out")
    _common(p, seed=False)

    p = sub.add_parser("decompose", help="canonical unitary + c.n.u. decomposition")
    p.add_argument("input")
    p.add_argument("--identity-tol", type=float, default=1e-9)
    p.add_argument("--bundle-out")
    _common(p)

    p = sub.add_parser("mu", help="structured singular value of a matrix bundle M")
    p.add_argument("input")
    p.add_argument("--space", default="3,1,1,1", help="'n,r1,...,rs', e.g. 3,1,1,1 or 3,1,2")
    p.add_argument("--n-radii", type=int, default=None)
    p.add_argument("--n-angles", type=int, default=None)
    _common(p, seed=False)

    p = sub.add_parser("coords", help="Gamma coordinates of a 3x3 matrix M")
    p.add_argument("input")
    _family_arg(p)
    _common(p, seed=False)

    p = sub.add_parser("gen", help="write a seeded test bundle")
    p.add_argument("--kind", choices=["diagonal", "compressed", "unitary", "mixture"],
                   default="diagonal")
    _family_arg(p, "gamma333")
    p.add_argument("--dim", type=int, default=4,
                   help="tuple dimension (unitary part for mixture, coefficient dim for compressed)")
    p.add_argument("--dim-cnu", type=int, default=2, help="c.n.u. dimension for --kind mixture")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--keep-blocks", type=int, default=None)
    p.add_argument("--boundary", action="store_true")
    p.add_argument("--rotate", action="store_true", help="conjugate by a Haar unitary")
    p.add_argument("--bundle-out", help="bundle path (default: stdout)")
    _common(p)

    p = sub.add_parser("batch", help=f"check many bundles; threads from {THREADS_ENV}")
    p.add_argument("inputs", nargs="+")
    _family_arg(p)
    p.add_argument("--z-samples", type=int, default=64)
    p.add_argument("--battery", choices=["gamma", "isometry", "unitary", "all"], default="gamma")
    p.add_argument("--out-dir", help="write one report per input here")
    _common(p)
    return ap


# --- driver -----------------------------------------------------------------------------

def _execute(fn, command, args):
    """Run one command; returns (exit code, report dict)."""
    try:
        res = fn(args)
    except VIOLATIONS as exc:
        return EXIT_VIOLATION, _violation_report(command, args, exc)
    except (GammaDilationError, ValueError, np.linalg.LinAlgError) as exc:
        return EXIT_ERROR, {"command": command, "verdict": "error",
                            "error": f"{type(exc).__name__}: {exc}"}
    if isinstance(res, tuple):
        res, code = res
        return code, res.report
    if res.bundle is not None and getattr(args, "bundle_out", None):
        write_bundle(args.bundle_out, res.bundle)
    elif res.bundle is not None and command == "gen":
        sys.stdout.write(dumps_json(_bundle_dict(res.bundle)))
    code = EXIT_PASS if res.report["verdict"] == "pass" else EXIT_VIOLATION
    return code, res.report


def _bundle_dict(b):
    from .io import bundle_to_dict
    return bundle_to_dict(b)


def _render(report, fmt):
    if fmt == "json":
        return dumps_json(report)
    if "error" in report:
        return f"{report['command']}: error\n  {report['error']}\n"
    from .io import parse_report
    _, _, reps, verdict = parse_report(report)
    lines = [f"{report['command']}: {verdict}"]
    lines += [r.to_text() for r in reps if r.items or r.notes]
    if report.get("residuals"):
        for k, v in report["residuals"].items():
            lines.append(f"  {k}: {v}")
    return "\n".join(lines) + "\n"


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    fn = cmd_batch if args.command == "batch" else COMMANDS[args.command]
    code, report = _execute(fn, args.command, args)
    failed = "error" in report
    if failed:
        sys.stderr.write(f"error: {report['error']}\n")
        return code
    text = _render(report, args.fmt)
    if args.out:
        write_atomic(args.out, text)
        sys.stderr.write(f"{args.command}: {report['verdict']} -> {args.out}\n")
    elif not (args.command == "gen" and not args.bundle_out):
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
