"""Command-line front end: ``besovtrace <command> ...``.

Exit codes: 0 pass, 1 invariant failure, 2 usage or data error.
"""
import argparse
import json
import os
import sys

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _params(args):
    theta = getattr(args, "theta", None)
    p = getattr(args, "p", None) or 2.0
    alpha = getattr(args, "alpha", None)
    if theta is not None and not 0 < theta < p:
        raise UsageError(f"need 0 < theta < p (theta={theta}, p={p})")
    if theta is not None and alpha is not None and abs(alpha - (1 - theta / p)) > 1e-12:
        raise UsageError(f"alpha={alpha} disagrees with 1 - theta/p = {1 - theta / p}")
    if alpha is None:
        alpha = 1 - theta / p if theta is not None else 0.5
    return alpha, p


def _load_domain(path):
    from besovtrace.domain import domain_from_json
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such domain file: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed domain JSON in {path}: {exc}")
    try:
        return domain_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid domain in {path}: {exc}")


def _domain_arg(args):
    from besovtrace.domain import build_domain
    if args.domain:
        dom = _load_domain(args.domain)
        if args.theta is not None:
            dom = dom.with_theta(args.theta)
        return dom
    if not args.preset or args.h is None:
        raise UsageError("give a domain file or --preset and --h")
    return build_domain(args.preset, args.h, args.theta if args.theta is not None else 1.0)


def _emit(obj, args):
    from besovtrace.io import dumps_report
    text = dumps_report(obj)
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_build(args):
    from besovtrace.domain import build_domain, check_codimension, domain_to_json
    theta = 1.0 if args.theta is None else args.theta
    _params(argparse.Namespace(theta=theta, p=args.p, alpha=args.alpha))
    if not args.preset or args.h is None:
        raise UsageError("build needs --preset and --h")
    dom = build_domain(args.preset, args.h, theta)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(domain_to_json(dom), fh)
    summary = {"preset": dom.preset, "h": dom.h, "theta": dom.theta, "n_sites": dom.space.n,
               "n_interior": int(dom.interior.size), "n_boundary": int(dom.boundary.size)}
    try:
        summary["codimension"] = check_codimension(dom).to_json()
    except ValueError as exc:
        summary["codimension"] = {"skipped": str(exc)}
    _emit(summary, args)
    return EXIT_OK


def cmd_verify(args):
    from besovtrace.suites import SUITES, run_suites
    dom = _domain_arg(args)
    alpha, p = _params(argparse.Namespace(theta=dom.theta, p=args.p, alpha=args.alpha))
    names = SUITES if args.suite == "all" else (args.suite,)
    out = run_suites(dom, names, seed=args.seed, tau=args.tau, p=p, alpha=alpha)
    ok = all(r["ok"] for r in out.values())
    _emit({"suites": out, "ok": ok}, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_extend(args):
    from besovtrace.io import align_field, read_field, write_field
    from besovtrace.trace_extension import extend
    from besovtrace.whitney import whitney_pipeline
    dom = _domain_arg(args)
    f = align_field(*read_field(args.field), dom.boundary)
    cover, pou = whitney_pipeline(dom)
    F = extend(f, cover, pou, dom)
    write_field(args.out, dom.interior, F)
    return EXIT_OK


def cmd_trace(args):
    from besovtrace.io import align_field, read_field, write_field
    from besovtrace.trace_extension import trace
    dom = _domain_arg(args)
    u = align_field(*read_field(args.field), dom.interior)
    tr = trace(u, dom)
    ok = tr.admissible
    write_field(args.out, dom.boundary[ok], tr.values[ok])
    _emit({"missing": tr.missing, "converged": int(tr.converged.sum()),
           "n_sites": int(tr.sites.size)}, args)
    return EXIT_OK


def cmd_besov(args):
    from besovtrace.besov import BESOV_FORMS, BesovParams
    from besovtrace.io import align_field, read_field
    dom = _domain_arg(args)
    alpha, p = _params(argparse.Namespace(theta=args.theta, p=args.p, alpha=args.alpha))
    f = align_field(*read_field(args.field), dom.boundary)
    res = BESOV_FORMS[args.form](f, dom, BesovParams(alpha, p))
    _emit(res.to_json(), args)
    return EXIT_OK


def make_parser():
    ap = argparse.ArgumentParser(prog="besovtrace", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("domain", nargs="?", help="domain JSON (or use --preset/--h)")
        sp.add_argument("--preset")
        sp.add_argument("--h", type=float)
        sp.add_argument("--theta", type=float)
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--tau", type=float, default=1.0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out")
        sp.add_argument("--report")

    b = sub.add_parser("build", help="generate a preset domain")
    common(b)
    b.set_defaults(run=cmd_build)
    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("--suite", default="all",
                   choices=["whitney", "cones", "codim", "besov-equiv", "roundtrip", "opnorm", "all"])
    v.set_defaults(run=cmd_verify)
    for name, fn in (("extend", cmd_extend), ("trace", cmd_trace)):
        sp = sub.add_parser(name, help=f"{name} a field")
        sp.add_argument("domain")
        sp.add_argument("field")
        for flag in ("--preset", "--out", "--report"):
            sp.add_argument(flag)
        sp.add_argument("--h", type=float)
        sp.add_argument("--theta", type=float)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int)
        sp.set_defaults(run=fn)
    be = sub.add_parser("besov", help="Besov seminorm of a boundary field")
    be.add_argument("domain")
    be.add_argument("field")
    be.add_argument("--form", default="dyadic", choices=["dyadic", "integral", "continuous"])
    for flag in ("--theta", "--p", "--alpha", "--h"):
        be.add_argument(flag, type=float)
    for flag in ("--preset", "--out", "--report"):
        be.add_argument(flag)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--threads", type=int)
    be.set_defaults(run=cmd_besov)
    return ap


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "threads", None):
        os.environ["NUMBA_NUM_THREADS"] = str(args.threads)
    if args.command in ("extend", "trace") and not args.out:
        print("error: --out is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
