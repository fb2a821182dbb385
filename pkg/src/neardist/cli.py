"""Command-line entry point ``neardist``.

Exit status: 0 when every asserted property holds, 2 when a verification
fails (a witness is printed), 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import bounds, constructions, flatness, graphs, pointfile
from .geometry import PointSet, pairwise_distances
from .interval_cover import is_nearly_k_distance, min_epsilon

OK, USAGE, FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


class Output:
    """Collects report lines; machine format is ``key=value`` tokens per line."""

    def __init__(self, fmt: str, stream=None):
        self.machine = fmt == "machine"
        self.stream = stream or sys.stdout

    def text(self, line: str):
        if not self.machine:
            print(line, file=self.stream)

    def record(self, tag: str, /, **fields):
        if self.machine:
            body = " ".join(f"{k}={_fmt(v)}" for k, v in fields.items())
            print(f"{tag} {body}".rstrip(), file=self.stream)

    def both(self, line: str, tag: str, /, **fields):
        self.text(line)
        self.record(tag, **fields)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v).replace(" ", "_")


def _load(path) -> PointSet:
    try:
        return pointfile.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# --- construct ------------------------------------------------------------


def _parse_factors(text: str) -> list[tuple[int, int]]:
    try:
        return [tuple(int(x) for x in tok.split(",")) for tok in text.split()]
    except ValueError:
        raise UsageError(f"bad factor list {text!r}; expected 'k,d k,d ...'") from None


def _base_set(name: str) -> PointSet:
    if name == "pentagon":
        return constructions.regular_polygon(5)
    if name == "segment":
        return PointSet.floating([[0.0, 0.0], [1.0, 0.0]])
    if name == "point":
        return PointSet.floating([[0.0, 0.0]])
    return _load(name)


def _build(args):
    name = args.name
    if name == "hypercube-slice":
        return constructions.hypercube_slice_construction(args.d, args.k)
    if name == "product":
        return constructions.product_construction(_parse_factors(args.factors), eps=args.eps,
                                                  scale_ratio=args.scale_ratio)
    if name == "extension":
        return constructions.extension_construction(_base_set(args.base), args.n, t1=args.t1)
    if name == "rhombus-triangle":
        return constructions.rhombus_triangle(args.K, eps=1e-3 if args.eps is None else args.eps)
    if name == "nonglobal-flat":
        return constructions.nonglobal_flat_example(args.K)
    if name == "separated-plane":
        return constructions.separated_plane_example(args.k, args.n)
    raise UsageError(f"unknown construction {name!r}")


def cmd_construct(args, out: Output) -> int:
    if args.name == "rhombus-triangle" and args.K is None:
        args.K = constructions.DEFAULT_SCALE
    if args.name == "nonglobal-flat" and args.K is None:
        args.K = 1e4
    try:
        c = _build(args)
    except ValueError as exc:
        out.both(f"construction failed: {exc}", "construct", name=args.name, ok=False,
                 reason=str(exc))
        return FAILED
    spec = c.spec
    out.both(f"{spec.name}: {len(c.points)} points in R^{c.points.dim}", "construct",
             name=spec.name, points=len(c.points), dim=c.points.dim, mode=c.points.mode)
    if spec.eps_achieved is not None:
        out.both(f"  min_epsilon for {spec.k_claimed} intervals: {spec.eps_achieved:.6g}",
                 "achieved", k=spec.k_claimed, eps=spec.eps_achieved)
    if args.output:
        comments = [f"{spec.name} {' '.join(f'{k}={v}' for k, v in spec.params.items())}"]
        pointfile.dump(c.points, args.output, comments)
    elif not args.self_check:
        sys.stdout.write(pointfile.dumps(c.points))
    status = OK
    if args.self_check:
        result = constructions.self_check(c)
        for item, ok, detail in result.lines:
            out.both(f"  {'PASS' if ok else 'FAIL'} {item} {detail}".rstrip(), "check",
                     item=item, ok=ok, detail=detail)
        status = OK if result else FAILED
    return status


# --- point-set commands ---------------------------------------------------


def cmd_verify(args, out: Output) -> int:
    ps = _load(args.file)
    if args.min_eps:
        if len(ps) < 2:
            raise UsageError("need at least two points")
        rep = min_epsilon(pairwise_distances(ps), args.k)
        out.both(f"min_epsilon(k={args.k}) = {float(rep.epsilon)!r} ({rep.epsilon!r})",
                 "min_epsilon", k=args.k, eps=float(rep.epsilon))
    eps = args.eps
    if eps is None:
        return OK
    res = is_nearly_k_distance(ps, args.k, eps, require_t_ge_1=not args.no_separation)
    if res.report is not None:
        for line in res.report.interval_lines():
            out.text("  " + line)
        for i, t in enumerate(res.report.left):
            out.record("interval", index=i, t=float(t), width=float(eps))
    verdict = "nearly" if res else "not nearly"
    out.both(f"{verdict} {args.k}-distance at eps={eps}" + (f": {res.reason}" if res.reason else ""),
             "verify", ok=res.ok, k=args.k, eps=float(eps), reason=res.reason or "-")
    return OK if res else FAILED


def cmd_flat(args, out: Output) -> int:
    ps = _load(args.file)
    cert = flatness.certify_flatness(ps, args.d, args.alpha, args.kind, base=args.base)
    out.both(f"{args.kind} ({args.d}, {args.alpha})-flat: {'certified' if cert else 'refused'} "
             f"max_angle={cert.max_angle:.6g}", "flat", kind=args.kind, d=args.d,
             alpha=args.alpha, ok=cert.ok, max_angle=float(cert.max_angle))
    if cert.exceptional_points:
        out.both(f"  exceptional points: {list(cert.exceptional_points)}", "exceptional",
                 points=list(cert.exceptional_points))
    if not cert:
        if cert.worst is not None:
            b, p, q, ang = cert.worst
            out.both(f"  worst offender: base {b}, vector p{p} - p{q}, angle {ang:.6g}", "worst",
                     base=b, p=p, q=q, angle=float(ang))
        if cert.witness_pair is not None:
            i, j, ang, u, v = cert.witness_pair
            out.both(f"  witness planes at points {i}, {j}: principal angle {ang:.6g}",
                     "witness", i=i, j=j, angle=float(ang))
        if cert.note:
            out.text(f"  note: {cert.note}")
        return FAILED
    return OK


def _parse_interval(tok: str):
    try:
        t, w = tok.split(",")
        return float(t), float(w)
    except ValueError:
        raise UsageError(f"bad interval {tok!r}; expected t,w") from None


def cmd_count(args, out: Output) -> int:
    ps = _load(args.file)
    intervals = [_parse_interval(tok) for tok in args.intervals]
    count, graph = graphs.pair_count(ps, intervals, method=args.method)
    out.both(f"pairs: {count}", "count", pairs=count, points=len(ps), method=args.method)
    if args.edges:
        for i, j in graph.edges:
            out.both(f"  {i} {j}", "edge", i=int(i), j=int(j))
    return OK


def cmd_partition(args, out: Output) -> int:
    ps = _load(args.file)
    try:
        part = graphs.clique_partition(ps, args.threshold)
    except graphs.HypothesisError as exc:
        out.both(f"hypothesis violated: {exc}", "partition", ok=False,
                 red_pair=list(exc.red_pair), blue_pair=list(exc.blue_pair))
        return FAILED
    out.both(f"B: {list(part.blue)}", "blue", size=len(part.blue), members=list(part.blue))
    for i, r in enumerate(part.red):
        out.both(f"R_{i + 1}: {list(r)}", "red", index=i + 1, members=list(r))
    return OK


# --- bounds and checks ----------------------------------------------------


def _table(args):
    return bounds.BoundsTable.load(args.table) if getattr(args, "table", None) else None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--what {args.what} needs " + ", ".join(f"--{n}" for n in missing))


def cmd_bounds(args, out: Output) -> int:
    table = _table(args)
    what = args.what
    if what == "T":
        _need(args, "n", "s")
        v = bounds.turan_T(args.n, args.s)
        out.both(str(v), "bounds", what=what, n=args.n, s=args.s, value=v)
    elif what == "m":
        _need(args, "k", "d")
        v, exact = bounds.m_lower(args.k, args.d, table)
        up = bounds.bbs_upper(args.k, args.d)
        out.both(f"m_{args.k}({args.d}) {'=' if exact else '>='} {v} (upper {up})", "bounds",
                 what=what, k=args.k, d=args.d, value=v, exact=exact, upper=up)
    elif what == "mprime":
        _need(args, "k", "d")
        w = bounds.m_prime(args.k, args.d, table)
        out.both(f"M'_{args.k}({args.d}) >= {w.value} via {list(w.parts)}", "bounds", what=what,
                 k=args.k, d=args.d, value=w.value, parts=[f"{a}:{b}" for a, b in w.parts])
    elif what == "f":
        _need(args, "k", "d")
        fb = bounds.f_bound(args.d, args.k, table)
        out.both(f"f({args.d},{args.k}) in [{fb.lo}, {fb.hi}] via {list(fb.lo_parts)}", "bounds",
                 what=what, k=args.k, d=args.d, lo=fb.lo, hi=fb.hi, lo_parts=list(fb.lo_parts))
    elif what == "t":
        _need(args, "k", "d")
        w = bounds.t_optimizer(args.k, args.d)
        out.both(f"t({args.k},{args.d}) = {w.value} ap={list(w.ap_parts)} binomial={w.binomial}",
                 "bounds", what=what, k=args.k, d=args.d, value=w.value,
                 unrestricted=w.unrestricted_value, observation=w.observation_holds)
    return OK


def cmd_check(args, out: Output) -> int:
    which = args.which
    if which == "claim1":
        viol = bounds.claim1_check(args.max)
        for x, y, a, b, lhs, rhs in viol:
            out.both(f"violation x={x} y={y} a={a} b={b}: {lhs} > {rhs}", "violation",
                     x=x, y=y, a=a, b=b, lhs=lhs, rhs=rhs)
        ok = [v[:4] for v in viol] == [(4, 4, 2, 2)]
        out.both(f"{len(viol)} violation(s) up to {args.max}", "claim1", count=len(viol), ok=ok)
        return OK if ok else FAILED
    if which == "eqcheck":
        lines = bounds.eqcheck_table(_table(args))
        for ln in lines:
            out.both(ln.render(), "eqcheck", d=ln.d, max=ln.maximum, m3=ln.m3, holds=ln.holds)
        return OK if all(ln.holds for ln in lines) else FAILED
    if args.seed is None:
        raise UsageError(f"check {which} requires --seed")
    if which == "lemma-almosto":
        rep = flatness.check_lemma_almosto(args.samples, seed=args.seed, alpha=args.alpha or 0.1)
    else:
        rep = flatness.check_claim_beta(args.samples, K=args.K, alpha=args.alpha or 1e-3,
                                        seed=args.seed)
    out.both(rep.summary(), "sampling", name=rep.name, samples=rep.samples,
             max_angle=float(rep.max_angle), bound=float(rep.bound),
             violations=len(rep.violations), ok=rep.ok)
    if rep.violations:
        out.text(f"  witness: {rep.violations[0]}")
    return OK if rep else FAILED


# --- reproduce ------------------------------------------------------------


def reproduce_items(table=None, samples: int = 10_000):
    """Yield (name, ok, detail) for every reproduction item."""
    tbl = table or bounds.default_table()
    problems = tbl.validate()
    yield "table-bounds", not problems, "; ".join(problems) or "C(d+1,k) <= m_k(d) <= C(d+k,k)"

    viol = bounds.claim1_check(30)
    yield "claim1", [v[:4] for v in viol] == [(4, 4, 2, 2)], f"violations={[v[:4] for v in viol]}"

    lines = bounds.eqcheck_table(tbl)
    yield "eqcheck", all(ln.holds for ln in lines), \
        "maxima=" + ",".join(str(ln.maximum) for ln in lines)

    bad = [(k, d) for k in range(1, 9) for d in range(2, 11)
           if not bounds.t_optimizer(k, d).observation_holds]
    yield "observation", not bad, f"counterexamples={bad}"

    def checked(name, build):
        try:
            c = build()
        except ValueError as exc:
            return name, False, str(exc)
        res = constructions.self_check(c)
        fails = [f"{i} {d}" for i, ok, d in res.lines if not ok]
        return name, bool(res), f"{len(c)} points" + (f"; {fails}" if fails else "")

    yield checked("hypercube-slice(4,2)", lambda: constructions.hypercube_slice_construction(4, 2))
    yield checked("product 3,1 x 3,1",
                  lambda: constructions.product_construction([(3, 1), (3, 1)], 1e-3, 1e6))
    yield checked("product 2,1 x 2,2",
                  lambda: constructions.product_construction([(2, 1), (2, 2)], 1e-3, 1e6))
    yield checked("rhombus-triangle", lambda: constructions.rhombus_triangle(1e6))
    yield checked("nonglobal-flat", lambda: constructions.nonglobal_flat_example(1e4))
    yield checked("separated-plane(50,50)", lambda: constructions.separated_plane_example(50, 50))
    pent = constructions.regular_polygon(5)
    for n in (50, 120, 121):
        yield checked(f"extension pentagon n={n}",
                      lambda n=n: constructions.extension_construction(pent, n))

    for alpha in (0.05, 0.1, 0.3):
        rep = flatness.check_lemma_almosto(samples, seed=1, alpha=alpha)
        yield f"lemma-almosto alpha={alpha}", rep.ok, f"max_ratio={rep.max_ratio:.4g}"
    for K in (2, 10):
        for alpha in (1e-3, 1e-4):
            rep = flatness.check_claim_beta(samples, K=K, alpha=alpha, seed=1)
            yield f"claim-beta K={K} alpha={alpha}", rep.ok, \
                f"max_angle={rep.max_angle:.4g} bound={rep.bound:.4g}"


def cmd_reproduce(args, out: Output) -> int:
    failed = []
    start = time.perf_counter()
    for name, ok, detail in reproduce_items(_table(args), args.samples):
        out.both(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", "item", name=name, ok=ok,
                 detail=detail)
        if not ok:
            failed.append(name)
    out.text(f"{'all items pass' if not failed else 'failed: ' + ', '.join(failed)} "
             f"({time.perf_counter() - start:.1f}s)")
    out.record("reproduce", ok=not failed, failed=len(failed))
    return FAILED if failed else OK


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="neardist", description="Nearly k-distance sets: constructions and checks.")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="generate a named construction")
    c.add_argument("name", choices=("hypercube-slice", "product", "extension", "rhombus-triangle",
                                    "nonglobal-flat", "separated-plane"))
    c.add_argument("--d", type=int, default=4)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--n", type=int, default=120)
    c.add_argument("--K", type=float, default=None, help="scale ratio of the named examples")
    c.add_argument("--factors", default="3,1 3,1", help="product factors 'k,d k,d ...'")
    c.add_argument("--eps", type=float, default=None)
    c.add_argument("--scale-ratio", type=float, default=None)
    c.add_argument("--base", default="pentagon", help="pentagon, segment, point or a point file")
    c.add_argument("--t1", type=float, default=None)
    c.add_argument("-o", "--output")
    c.add_argument("--self-check", action="store_true")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="test the nearly k-distance property")
    v.add_argument("file")
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--eps", type=float)
    v.add_argument("--min-eps", action="store_true", help="report the smallest feasible width")
    v.add_argument("--no-separation", action="store_true", help="skip the t_1 >= 1 requirement")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("flat", help="certify flatness")
    f.add_argument("file")
    f.add_argument("--d", type=int, required=True)
    f.add_argument("--alpha", type=float, required=True)
    f.add_argument("--kind", choices=flatness.KINDS, default="uniform")
    f.add_argument("--base", type=int, default=None, help="base point for --kind per-point")
    f.set_defaults(func=cmd_flat)

    n = sub.add_parser("count", help="count pairs with distance in a union of intervals")
    n.add_argument("file")
    n.add_argument("--intervals", nargs="+", required=True, metavar="T,W")
    n.add_argument("--method", choices=("naive", "grid"), default="naive")
    n.add_argument("--edges", action="store_true")
    n.set_defaults(func=cmd_count)

    r = sub.add_parser("partition", help="red/blue clique partition")
    r.add_argument("file")
    r.add_argument("--threshold", type=float, required=True)
    r.set_defaults(func=cmd_partition)

    b = sub.add_parser("bounds", help="closed forms and table-driven bounds")
    b.add_argument("--what", choices=("m", "mprime", "f", "t", "T"), required=True)
    b.add_argument("--k", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--n", type=int)
    b.add_argument("--s", type=int)
    b.add_argument("--table")
    b.set_defaults(func=cmd_bounds)

    k = sub.add_parser("check", help="exact and sampled checks")
    k.add_argument("which", choices=("claim1", "eqcheck", "lemma-almosto", "claim-beta"))
    k.add_argument("--max", type=int, default=30)
    k.add_argument("--samples", type=int, default=10_000)
    k.add_argument("--seed", type=int)
    k.add_argument("--alpha", type=float)
    k.add_argument("--K", type=float, default=2.0)
    k.add_argument("--table")
    k.set_defaults(func=cmd_check)

    rp = sub.add_parser("reproduce", help="run every reproduction item")
    rp.add_argument("--table")
    rp.add_argument("--samples", type=int, default=10_000)
    rp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args.format)
    try:
        return args.func(args, out)
    except pointfile.ParseError as exc:
        print(f"neardist: parse error: {exc}", file=sys.stderr)
        return USAGE
    except (UsageError, ValueError) as exc:
        print(f"neardist: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
