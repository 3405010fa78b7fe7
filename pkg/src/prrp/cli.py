"""Experiment runner.

Subcommands: ``factor`` (one matrix, one algorithm, one CSV row),
``sweep`` (cross-product grids or named presets), ``cost`` (analytic
model sweeps), ``gen`` (emit a generated matrix in the text format), and
``presets`` (list the named experiments).

CSV schema v1 is frozen: ``algorithm,family,n,b,p,tree,tau,seed,status,
g_w,rel_fact_error,eta,w,hpl1,hpl2,hpl3,n_ir,norm_l1,norm_linv1,norm_u1,
norm_uinv1,swap_total,flops_charged``.  Floats are written in shortest
round-trip form, so identical flags give byte-identical files.  Unless
--no-plot is passed, a sweep that writes a CSV renders a companion PNG
beside it.

Exit codes: 0 success, 2 usage, 3 parse failure, 4 numerical failure,
5 I/O failure.
"""

import argparse
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import block_variants, costmodel, gepp, luprrp, matcore, matgen, metrics
from . import tournament
from .errors import UnsupportedFamily

CSV_VERSION = 1
CSV_HEADER = ("algorithm", "family", "n", "b", "p", "tree", "tau", "seed",
              "status", "g_w", "rel_fact_error", "eta", "w", "hpl1", "hpl2",
              "hpl3", "n_ir", "norm_l1", "norm_linv1", "norm_u1", "norm_uinv1",
              "swap_total", "flops_charged")

COST_HEADER = ("algorithm", "m", "n", "b", "p_r", "p_c", "p", "messages",
               "words", "flops")

ALGORITHMS = ("gepp", "luprrp", "caluprrp_bt", "caluprrp_ft", "calu_bt",
              "calu_ft", "block_parallel", "block_pairwise")

CLI_ALGORITHMS = ("gepp", "luprrp", "caluprrp", "calu", "block_parallel",
                  "block_pairwise") + ALGORITHMS[2:6]


def _normalize_alg(alg, tree):
    """Fold the --tree flag into the internal algorithm name."""
    if alg in ("caluprrp", "calu"):
        return f"{alg}_{tree or 'bt'}"
    return alg

EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC, EXIT_IO = 2, 3, 4, 5

RHS_SEED_OFFSET = 1  # right-hand sides draw from PCG64(seed + 1)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    families: tuple
    sizes: tuple
    bs: tuple = (64,)
    ps: tuple = (8,)
    tau: float = 2.0
    seed: int = 42
    params: dict = field(default_factory=dict)


PRESETS = {
    # pathological-matrix stability sweeps at the published scale
    "wilkinson-luprrp": ExperimentConfig("luprrp", ("wilkinson",), (2048,),
                                         (128, 64, 32, 16, 8)),
    "genwilk-luprrp": ExperimentConfig("luprrp", ("genwilk",), (2048,),
                                       (128, 64, 32, 16, 8)),
    "foster-luprrp": ExperimentConfig("luprrp", ("foster",), (2048,),
                                      (128, 64, 32, 16, 8)),
    "wright-luprrp": ExperimentConfig("luprrp", ("wright",), (2048,),
                                      (128, 64, 32, 16, 8)),
    "foster-caluprrp-ft": ExperimentConfig("caluprrp_ft", ("foster",), (2048,),
                                           (128, 64, 32, 16, 8)),
    "foster-caluprrp-bt": ExperimentConfig("caluprrp_bt", ("foster",), (2048,),
                                           (32, 16, 8), (128, 64, 32)),
    "wright-caluprrp-ft": ExperimentConfig("caluprrp_ft", ("wright",), (2048,),
                                           (128, 64, 32, 16, 8)),
    "wright-caluprrp-bt": ExperimentConfig("caluprrp_bt", ("wright",), (2048,),
                                           (32, 16, 8), (128, 64, 32)),
    "genwilk-caluprrp-ft": ExperimentConfig("caluprrp_ft", ("genwilk",), (2048,),
                                            (128, 64, 32, 16, 8)),
    "genwilk-caluprrp-bt": ExperimentConfig("caluprrp_bt", ("genwilk",), (2048,),
                                            (32, 16, 8), (128, 64, 32)),
    # random-matrix stability grids (desk scale)
    "random-luprrp": ExperimentConfig("luprrp", ("randn",), (256, 512, 1024),
                                      (8, 16, 32, 64)),
    "random-gepp": ExperimentConfig("gepp", ("randn",), (256, 512, 1024)),
    "random-caluprrp-bt": ExperimentConfig("caluprrp_bt", ("randn",),
                                           (256, 512, 1024), (8, 16, 32, 64),
                                           (8,)),
    "random-caluprrp-ft": ExperimentConfig("caluprrp_ft", ("randn",),
                                           (256, 512, 1024), (8, 16, 32, 64)),
    "random-calu-bt": ExperimentConfig("calu_bt", ("randn",), (256, 512, 1024),
                                       (8, 16, 32, 64), (8,)),
    # all four pathological families under one algorithm
    "pathological-luprrp": ExperimentConfig(
        "luprrp", ("wilkinson", "foster", "wright", "genwilk"), (2048,), (64,)),
    # the catastrophic baseline case
    "genwilk-calu-ft": ExperimentConfig("calu_ft", ("genwilk",), (1024,), (128,)),
}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _rhs_for(n, seed):
    rng = np.random.Generator(np.random.PCG64(seed + RHS_SEED_OFFSET))
    return matgen._normals(rng, n)


def _tree_for(alg, p):
    if alg.endswith("_ft"):
        return tournament.flat_tree()
    return tournament.binary_tree(p)


def run_single(alg, a, *, b=64, p=8, tau=2.0, seed=42, family="file", n=None):
    """Factor + measure one matrix; returns the CSV row as a dict."""
    n = a.shape[0] if n is None else n
    row = {k: "" for k in CSV_HEADER}
    row.update(algorithm=alg, family=family, n=int(n), seed=int(seed),
               status="ok")
    rhs = _rhs_for(a.shape[0], seed)
    if alg == "gepp":
        factors = gepp.gepp_factor(a)
        rep = metrics.full_report(a, factors, rhs)
        row.update(swap_total=0)
    elif alg == "luprrp":
        factors = luprrp.luprrp_factor(a, b, tau)
        rep = metrics.full_report(a, factors, rhs)
        row.update(b=int(b), tau=tau, swap_total=sum(factors.stats.swap_counts),
                   flops_charged=_fmt_flops(factors.stats.flops_charged))
    elif alg in ("caluprrp_bt", "caluprrp_ft"):
        factors = tournament.caluprrp_factor(a, b, tau, _tree_for(alg, p))
        rep = metrics.full_report(a, factors, rhs)
        row.update(b=int(b), tau=tau, tree=alg[-2:],
                   swap_total=sum(factors.stats.swap_counts),
                   flops_charged=_fmt_flops(factors.stats.flops_charged))
        if alg.endswith("_bt"):
            row.update(p=int(p))
    elif alg in ("calu_bt", "calu_ft"):
        factors = tournament.calu_factor(a, b, _tree_for(alg, p))
        rep = metrics.full_report(a, factors, rhs)
        row.update(b=int(b), tree=alg[-2:],
                   swap_total=sum(factors.stats.swap_counts),
                   flops_charged=_fmt_flops(factors.stats.flops_charged))
        if alg.endswith("_bt"):
            row.update(p=int(p))
    elif alg in ("block_parallel", "block_pairwise"):
        if alg == "block_parallel":
            factors = block_variants.block_parallel_luprrp(a, b, tau, p)
            row.update(p=int(p))
        else:
            factors = block_variants.block_pairwise_luprrp(a, b, tau)
        row.update(b=int(b), tau=tau,
                   g_w=factors.stats.growth_factor,
                   swap_total=sum(factors.stats.swap_counts),
                   flops_charged=_fmt_flops(factors.stats.flops_charged))
        return row       # event-log factorization: no single L, no solve metrics
    else:
        raise ValueError(f"unknown algorithm {alg!r}")
    row.update(g_w=rep.g_w, rel_fact_error=rep.rel_fact_error, eta=rep.eta,
               w=rep.w, hpl1=rep.hpl[0], hpl2=rep.hpl[1], hpl3=rep.hpl[2],
               n_ir=rep.n_ir, norm_l1=rep.norm_l1, norm_linv1=rep.norm_linv1,
               norm_u1=rep.norm_u1, norm_uinv1=rep.norm_uinv1)
    return row


def _fmt_flops(fr):
    return str(int(fr)) if fr.denominator == 1 else repr(float(fr))


def _skip_reason(alg, n, b, p):
    if alg != "gepp" and b > n:
        return f"panel width {b} exceeds n={n}"
    if alg == "block_pairwise" and n < 2 * b + 1:
        return f"needs n >= 2b+1, got n={n}, b={b}"
    return None


def run_sweep(config, log=None):
    """Cross-product sweep; returns the rows in deterministic grid order."""
    rows = []
    log = log or (lambda msg: print(msg, file=sys.stderr))
    needs_p = config.algorithm in ("caluprrp_bt", "calu_bt", "block_parallel")
    ps = config.ps if needs_p else (None,)
    for family in config.families:
        for n in config.sizes:
            for b in (config.bs if config.algorithm != "gepp" else (None,)):
                for p in ps:
                    reason = None if config.algorithm == "gepp" else \
                        _skip_reason(config.algorithm, n, b, p)
                    if reason:
                        log(f"skip {config.algorithm} {family} n={n} b={b} "
                            f"p={p}: {reason}")
                        continue
                    try:
                        spec = matgen.parse_spec(f"{family}:{n}", config.seed)
                        spec = replace(spec, params=dict(config.params))
                        a = matgen.generate(spec)
                    except (ValueError, UnsupportedFamily) as exc:
                        log(f"skip {family} n={n}: {exc}")
                        continue
                    try:
                        row = run_single(config.algorithm, a,
                                         b=b if b is not None else 64,
                                         p=p if p is not None else 8,
                                         tau=config.tau, seed=config.seed,
                                         family=family, n=n)
                    except ArithmeticError as exc:
                        row = {k: "" for k in CSV_HEADER}
                        row.update(algorithm=config.algorithm, family=family,
                                   n=n, seed=config.seed,
                                   b="" if b is None else b,
                                   p="" if p is None else p,
                                   status=f"error: {type(exc).__name__}")
                        log(f"numerical failure for {family} n={n} b={b}: {exc}")
                    rows.append(row)
    return rows


def rows_to_csv(rows, header=CSV_HEADER):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(k, "")) for k in header))
    return "\n".join(lines) + "\n"


def _write_output(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _maybe_plot(rows, out, no_plot, kind):
    if out and not no_plot:
        from . import figures   # deferred: pulls in matplotlib
        png = out[:-4] + ".png" if out.endswith(".csv") else out + ".png"
        if kind == "cost":
            figures.render_cost_figure(rows, png)
        else:
            figures.render_stability_figure(rows, png)


# -- subcommand drivers --------------------------------------------------------


def _load_matrix(args):
    if args.gen:
        spec = matgen.parse_spec(args.gen, args.seed)
        return matgen.generate(spec), spec.family, spec.n
    a = matcore.read_matrix(args.infile)
    return a, "file", a.shape[0]


def cmd_factor(args):
    try:
        a, family, n = _load_matrix(args)
    except (ValueError, UnsupportedFamily) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        row = run_single(_normalize_alg(args.alg, args.tree), a, b=args.b,
                         p=args.p, tau=args.tau, seed=args.seed,
                         family=family, n=n)
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        _write_output(rows_to_csv([row]), args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_sweep(args):
    if args.preset:
        if args.preset not in PRESETS:
            print(f"unknown preset {args.preset!r}; see `prrp presets`",
                  file=sys.stderr)
            return EXIT_USAGE
        config = PRESETS[args.preset]
        if args.sizes:
            config = replace(config, sizes=tuple(args.sizes))
        if args.b:
            config = replace(config, bs=tuple(args.b))
        if args.p:
            config = replace(config, ps=tuple(args.p))
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    else:
        if not (args.alg and args.family and args.sizes):
            print("sweep needs --preset or --alg/--family/--sizes",
                  file=sys.stderr)
            return EXIT_USAGE
        config = ExperimentConfig(
            algorithm=_normalize_alg(args.alg, args.tree),
            families=tuple(args.family),
            sizes=tuple(args.sizes), bs=tuple(args.b or (64,)),
            ps=tuple(args.p or (8,)), tau=args.tau,
            seed=args.seed if args.seed is not None else 42)
    rows = run_sweep(config)
    try:
        _write_output(rows_to_csv(rows), args.out)
        _maybe_plot(rows, args.out, args.no_plot, "stability")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_cost(args):
    rows = []
    for alg in args.algs:
        for p in args.p:
            if args.layout == "optimal":
                p_r, p_c, b = costmodel.optimal_layout(args.m or args.n,
                                                       args.n, p)
            else:
                p_r = max(1, int(round(p ** 0.5)))
                p_c = max(1, p // p_r)
                b = args.b
            rep = costmodel.perf_model(alg, args.m or args.n, args.n, b,
                                       p_r, p_c)
            rows.append({"algorithm": alg, "m": args.m or args.n, "n": args.n,
                         "b": b, "p_r": p_r, "p_c": p_c, "p": p_r * p_c,
                         "messages": rep.messages, "words": rep.words,
                         "flops": rep.flops})
    try:
        _write_output(rows_to_csv(rows, COST_HEADER), args.out)
        _maybe_plot(rows, args.out, args.no_plot, "cost")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_gen(args):
    try:
        spec = matgen.parse_spec(args.spec, args.seed)
        a = matgen.generate(spec)
    except (ValueError, UnsupportedFamily) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.out:
            matcore.write_matrix(args.out, a)
        else:
            sys.stdout.write(matcore.matrix_to_text(a))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def cmd_presets(_args):
    for name in sorted(PRESETS):
        cfg = PRESETS[name]
        print(f"{name}: {cfg.algorithm} {','.join(cfg.families)} "
              f"n={list(cfg.sizes)} b={list(cfg.bs)}")
    return 0


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def build_parser():
    ap = argparse.ArgumentParser(
        prog="prrp",
        description="Panel rank-revealing pivoted LU experiment runner")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factor", help="factor one matrix, emit one CSV row")
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--gen", help="generator spec, family:n[:key=value,...]")
    src.add_argument("--in", dest="infile", help="matrix file (text format)")
    f.add_argument("--alg", choices=CLI_ALGORITHMS, required=True)
    f.add_argument("--b", type=int, default=64)
    f.add_argument("--p", type=int, default=8)
    f.add_argument("--tau", type=float, default=2.0)
    f.add_argument("--tree", choices=("bt", "ft"),
                   help="reduction tree for caluprrp/calu (default bt)")
    f.add_argument("--seed", type=int, default=42)
    f.add_argument("--out")
    f.set_defaults(func=cmd_factor)

    s = sub.add_parser("sweep", help="cross-product experiment grid")
    s.add_argument("--preset", help="named experiment (see `prrp presets`)")
    s.add_argument("--alg", choices=CLI_ALGORITHMS)
    s.add_argument("--tree", choices=("bt", "ft"),
                   help="reduction tree for caluprrp/calu (default bt)")
    s.add_argument("--family", action="append",
                   help="matrix family (repeatable)")
    s.add_argument("--sizes", type=_int_list)
    s.add_argument("--b", type=_int_list)
    s.add_argument("--p", type=_int_list)
    s.add_argument("--tau", type=float, default=2.0)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("cost", help="analytic cost-model sweep")
    c.add_argument("--algs", type=lambda t: t.split(","),
                   default=list(costmodel.ALGORITHMS))
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int)
    c.add_argument("--p", type=_int_list, required=True)
    c.add_argument("--b", type=int, default=64)
    c.add_argument("--layout", choices=("optimal", "square"), default="optimal")
    c.add_argument("--out")
    c.add_argument("--no-plot", action="store_true")
    c.set_defaults(func=cmd_cost)

    g = sub.add_parser("gen", help="emit a generated matrix (text format)")
    g.add_argument("spec", help="family:n[:key=value,...]")
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    pr = sub.add_parser("presets", help="list named experiments")
    pr.set_defaults(func=cmd_presets)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
