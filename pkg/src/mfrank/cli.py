"""Command-line entry point.

Exit status: 0 success, 1 compute error (JSON object on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from . import analytics as an
from . import figures, kernels
from . import rank_model as rm
from . import reproduce as rp
from .errors import MfrankError
from .graph import class_partition, edge_degree_correlation, read_edge_list, write_edge_list, write_mapping
from .meanfield import UncorrelatedModel, aggregate_by_class, mf_iterate, mf_variance_iterate
from .pagerank import DEFAULT_Q, ConvergenceSpec, exact_solve, power_iteration, residual
from .synth import DegreeLaw, GeneratorSpec, generate_with_report, provenance


class ComputeError(Exception):
    """Raised by subcommands after writing partial output (e.g. no convergence)."""


# ---------------------------------------------------------------- output helpers

def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.bool_):
        return bool(x)
    return str(x)


def _clean(x):
    # JSON has no NaN/inf
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dump_json(obj, path=None):
    text = json.dumps(_clean(json.loads(json.dumps(obj, default=_jsonable))), indent=2, sort_keys=True)
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def write_csv(columns: dict, path=None):
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    fh = sys.stdout if path is None or path == "-" else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _summary(args, payload):
    out = dict(payload)
    out["config"] = {k: v for k, v in vars(args).items() if k != "func"}
    # stdout carries the summary unless a CSV table is already going there
    csv_on_stdout = getattr(args, "output", None) in (None, "-") and args.func in _CSV_COMMANDS
    target = args.summary or (None if csv_on_stdout else "-")
    if target is not None:
        dump_json(out, target)
    return out


# ---------------------------------------------------------------- argument types

def existing_file(path):
    if not os.path.isfile(path):
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return path


def writable_path(path):
    if path == "-":
        return path
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise argparse.ArgumentTypeError(f"directory does not exist: {parent}")
    return path


def unit_interval(s):
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("q must lie strictly between 0 and 1")
    return v


def positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def bin_ratio(s):
    v = float(s)
    if not v > 1:
        raise argparse.ArgumentTypeError("bin ratio must exceed 1")
    return v


# ---------------------------------------------------------------- shared steps

def _load(args):
    g, ids = read_edge_list(args.input, dedup=getattr(args, "dedup", False),
                            drop_self_loops=getattr(args, "drop_self_loops", False))
    return g, ids


def _spec(args):
    return ConvergenceSpec(args.tolerance, args.max_iterations)


def _pagerank(args, g):
    if getattr(args, "pagerank", None):
        data = np.loadtxt(args.pagerank, delimiter=",", skiprows=1, ndmin=2)
        if len(data) != g.node_count:
            raise ValueError(f"PageRank file has {len(data)} rows, graph has {g.node_count} nodes")
        p = np.empty(g.node_count)
        p[data[:, 0].astype(np.int64)] = data[:, 1]
        return p
    v = power_iteration(g, args.q, _spec(args), args.threads)
    if not v.converged:
        raise ComputeError(f"power iteration did not converge in {v.iterations} iterations")
    return v.values


# ---------------------------------------------------------------- subcommands

def cmd_ingest(args):
    g, ids = _load(args)
    write_edge_list(g, args.output, ids)
    if args.mapping:
        write_mapping(ids, args.mapping)
    _summary(args, {"nodes": g.node_count, "edges": g.edge_count, "dangling": int(g.dangling.sum()),
                    "self_loops": int(np.sum(g.edges()[0] == g.edges()[1]))})


def _law(kind, exponent, k, k_max):
    if kind == "power_law":
        return DegreeLaw("power_law", exponent=exponent, k_min=k, k_max=k_max)
    return DegreeLaw(kind, k_min=k)


def cmd_generate(args):
    spec = GeneratorSpec(
        node_count=args.nodes,
        in_law=DegreeLaw("power_law", exponent=args.gamma_in, k_min=args.k_min, k_max=args.k_max),
        out_law=_law(args.out_law, args.gamma_out, args.out_k, args.k_max),
        seed=args.seed, multi_edges=args.multi_edges, self_loops=args.self_loops,
    )
    g, report = generate_with_report(spec)
    write_edge_list(g, args.output)
    prov = provenance(spec, g, report)
    if args.provenance:
        dump_json(prov, args.provenance)
    _summary(args, prov)


def cmd_pagerank(args):
    g, ids = _load(args)
    if args.exact:
        v = exact_solve(g, args.q)
    else:
        v = power_iteration(g, args.q, _spec(args), args.threads)
    write_csv({"node": ids if args.original_ids else np.arange(g.node_count), "pagerank": v.values}, args.output)
    _summary(args, {"iterations": v.iterations, "residual": residual(g, args.q, v), "q": args.q,
                    "converged": v.converged, "nodes": g.node_count, "edges": g.edge_count,
                    "backend": kernels.backend_name()})
    if not v.converged:
        raise ComputeError(f"power iteration did not converge in {v.iterations} iterations")


def cmd_meanfield(args):
    g, _ = _load(args)
    p = _pagerank(args, g)
    t = class_partition(g)
    emp = aggregate_by_class(p, t)
    mf = mf_iterate(g, t, args.q, _spec(args), args.threads)
    fl = mf_variance_iterate(g, t, args.q, _spec(args), means=mf, threads=args.threads)
    write_csv(figures.meanfield_table(t, mf, fl, emp), args.output)
    if args.marginal:
        write_csv(figures.meanfield_marginal(mf, fl, emp), args.marginal)
    _summary(args, {"classes": len(t), "iterations": mf.iterations, "converged": mf.converged,
                    "variance_iterations": fl.iterations, "variance_converged": fl.converged,
                    "clamped": fl.clamped, "total_mass": mf.total_mass()})
    if not (mf.converged and fl.converged):
        raise ComputeError("mean-field iteration did not converge")


def cmd_fluctuations(args):
    g, _ = _load(args)
    p = _pagerank(args, g)
    t = class_partition(g)
    fl = mf_variance_iterate(g, t, args.q, _spec(args), threads=args.threads)
    model = UncorrelatedModel.from_graph(g, args.q)
    write_csv(figures.fluctuation_profile(g, p, t, fl, model, args.bin_ratio), args.output)
    _summary(args, {"iterations": fl.iterations, "converged": fl.converged, "clamped": fl.clamped,
                    "moments": {"mean_k_in": model.mean_k_in, "inv_kout": model.inv_kout,
                                "kin_over_kout": model.kin_over_kout, "kin2_over_kout": model.kin2_over_kout}})
    if not fl.converged:
        raise ComputeError("variance recursion did not converge")


def cmd_stats(args):
    g, _ = _load(args)
    p = _pagerank(args, g)
    model = UncorrelatedModel.from_graph(g, args.q)
    if args.figure == "fig1":
        table = figures.pagerank_histogram(p, args.bin_ratio)
    elif args.figure == "fig3":
        table = figures.indegree_profile(g, p, model, args.bin_ratio)
    elif args.figure == "fig4":
        t = class_partition(g)
        fl = mf_variance_iterate(g, t, args.q, _spec(args), threads=args.threads)
        table = figures.fluctuation_profile(g, p, t, fl, model, args.bin_ratio)
    else:
        t = class_partition(g)
        table = figures.class_distribution(p, t, args.k_in, args.bin_ratio)
    write_csv(table, args.output)
    fit = rp.fit_pagerank_exponent(p)
    _summary(args, {"beta": fit.exponent, "beta_stderr": fit.stderr, "x_min": fit.x_min, "ks": fit.goodness,
                    "tail_samples": fit.sample_count, "pearson_pagerank_kin": _maybe(an.pearson, p, g.k_in),
                    "edge_degree_correlation": _maybe(edge_degree_correlation, g)})


def _maybe(f, *a):
    try:
        return f(*a)
    except ValueError:
        return None


def cmd_zipf(args):
    g, _ = _load(args)
    p = _pagerank(args, g)
    write_csv(figures.zipf_table(p), args.output)
    r, v = an.zipf_curve(p)
    fit = rp.fit_pagerank_exponent(p)
    _summary(args, {"slope": an.zipf_slope(r, v, args.max_rank), "beta": fit.exponent,
                    "alpha": fit.exponent - 1.0, "expected_slope": -1.0 / (fit.exponent - 1.0)})


def _model(args):
    return rm.RankModel(A=args.A, alpha=args.alpha, web_size=args.web_size, mean_k_in=args.mean_kin, q=args.q)


def cmd_predict(args):
    m = _model(args)
    p = rm.pagerank_from_indegree(m, args.k_in)
    R = rm.global_rank(m, p)
    _summary(args, {"pagerank": p, "global_rank": R, "local_rank": rm.local_rank(m, R, args.hits)})


def cmd_invert(args):
    m = _model(args)
    _summary(args, {"required_k_in": rm.required_inlinks(m, args.target_rank, args.hits)})


def _observations(path):
    obs = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.DictReader(fh)
        missing = {"k_in", "n", "rank"} - set(rows.fieldnames or ())
        if missing:
            raise ValueError(f"observation file lacks columns: {sorted(missing)}")
        for i, row in enumerate(rows, start=2):
            try:
                obs.append(rm.RankObservation(int(row["k_in"]), int(row["n"]), int(row["rank"])))
            except ValueError as e:
                raise ValueError(f"line {i}: {e}") from None
    return obs


def cmd_calibrate(args):
    obs = _observations(args.observations)
    m, loss = rm.calibrate_A(obs, _model(args))
    _summary(args, {"A": m.A, "loss": loss, "observations": len(obs), "at_cap": sum(o.at_cap for o in obs)})


def cmd_reproduce(args):
    os.makedirs(args.outdir, exist_ok=True)
    spec = rp.default_spec(args.nodes, args.seed, args.k_max)
    g, report = generate_with_report(spec)
    res = rp.run_pipeline(g, args.q, _spec(args), args.threads)
    checks = rp.evaluate(res, args.bin_ratio)
    p = res.pagerank.values

    def out(name):
        return os.path.join(args.outdir, f"{args.prefix}{name}.csv")

    write_csv(figures.pagerank_histogram(p, args.bin_ratio), out("fig1"))
    write_csv(figures.class_means(res.table, res.meanfield, res.empirical), out("fig2"))
    write_csv(figures.indegree_profile(g, p, res.model, args.bin_ratio), out("fig3"))
    write_csv(figures.fluctuation_profile(g, p, res.table, res.fluctuations, res.model, args.bin_ratio), out("fig4"))
    big = checks["class_distributions"]["value"]["largest_bin"]
    kin_big = int(np.ceil(big[0]))
    write_csv(figures.concat([figures.class_distribution(p, res.table, 1, args.bin_ratio),
                              figures.class_distribution(p, res.table, kin_big, args.bin_ratio)]), out("fig5"))
    write_csv(figures.zipf_table(p), out("fig6"))
    summary = {"checks": checks, "all_pass": all(c["pass"] for c in checks.values()),
               "graph": provenance(spec, g, report),
               "config": {k: v for k, v in vars(args).items() if k != "func"}}
    dump_json(summary, os.path.join(args.outdir, "summary.json"))
    dump_json({name: c["pass"] for name, c in checks.items()} | {"all_pass": summary["all_pass"]})


_CSV_COMMANDS = (cmd_pagerank, cmd_meanfield, cmd_fluctuations, cmd_stats, cmd_zipf)


# ---------------------------------------------------------------- parser

def _common(p, graph=True, compute=True):
    if graph:
        p.add_argument("--input", required=True, type=existing_file, help="edge list (text, optionally gzip)")
        p.add_argument("--dedup", action="store_true", help="collapse repeated edges")
        p.add_argument("--drop-self-loops", action="store_true")
    p.add_argument("-q", "--q", type=unit_interval, default=DEFAULT_Q, help="jump probability (default 0.15)")
    if compute:
        p.add_argument("--tolerance", type=positive_float, default=1e-5, help="per-vertex relative tolerance")
        p.add_argument("--max-iterations", type=positive_int, default=200)
        p.add_argument("--threads", type=positive_int, default=1)
        p.add_argument("--bin-ratio", type=bin_ratio, default=an.DEFAULT_BIN_RATIO)
    p.add_argument("--summary", type=writable_path, help="write the JSON summary here (default stdout when --output is a file)")


def _model_args(p):
    d = rm.RankModel()
    p.add_argument("--A", type=positive_float, default=d.A)
    p.add_argument("--alpha", type=positive_float, default=d.alpha)
    p.add_argument("--web-size", type=positive_float, default=d.web_size)
    p.add_argument("--mean-kin", type=positive_float, default=d.mean_k_in)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mfrank", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--backend", choices=kernels.available_backends(), help="kernel implementation")
    ap.add_argument("--verbose", action="store_true", help="log progress and warnings to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize an edge list to dense ids")
    _common(p, compute=False)
    p.add_argument("--output", required=True, type=writable_path)
    p.add_argument("--mapping", type=writable_path, help="write 'original_id dense_id' pairs here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("generate", help="seeded configuration-model graph")
    p.add_argument("--nodes", type=positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma-in", type=float, default=2.1)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=positive_int, help="degree cap (default floor(sqrt(N)))")
    p.add_argument("--out-law", choices=["constant", "power_law", "shuffle"], default="constant")
    p.add_argument("--out-k", type=int, default=3, help="out-degree (constant) or minimum (power_law)")
    p.add_argument("--gamma-out", type=float, default=2.1)
    p.add_argument("--multi-edges", choices=["allow", "reject"], default="allow")
    p.add_argument("--self-loops", choices=["allow", "reject"], default="allow")
    p.add_argument("--output", required=True, type=writable_path)
    p.add_argument("--provenance", type=writable_path, help="JSON sidecar path")
    p.add_argument("--summary", type=writable_path)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pagerank", help="PageRank by power iteration")
    _common(p)
    p.add_argument("--exact", action="store_true", help="dense linear solve (N <= 2000)")
    p.add_argument("--original-ids", action="store_true", help="label rows with the input ids")
    p.add_argument("--output", type=writable_path, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_pagerank)

    for name, func, hlp in (("meanfield", cmd_meanfield, "class means and variances"),
                            ("fluctuations", cmd_fluctuations, "within-class spread against in-degree"),
                            ("stats", cmd_stats, "distribution tables and fits"),
                            ("zipf", cmd_zipf, "PageRank against global rank")):
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.add_argument("--pagerank", type=existing_file, help="reuse a node,pagerank CSV")
        p.add_argument("--output", type=writable_path, help="CSV path (default stdout)")
        p.set_defaults(func=func)
        if name == "meanfield":
            p.add_argument("--marginal", type=writable_path, help="CSV keyed by k_in only")
        if name == "stats":
            p.add_argument("--figure", choices=["fig1", "fig3", "fig4", "fig5"], default="fig1")
            p.add_argument("--k-in", type=int, default=1, help="class for fig5")
        if name == "zipf":
            p.add_argument("--max-rank", type=positive_int, default=rp.ZIPF_MAX_RANK)

    p = sub.add_parser("predict", help="local rank from in-degree")
    p.add_argument("--k-in", type=float, required=True)
    p.add_argument("--hits", type=positive_int, required=True)
    _model_args(p)
    _common(p, graph=False, compute=False)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("invert", help="in-links needed for a target rank")
    p.add_argument("--target-rank", type=float, required=True)
    p.add_argument("--hits", type=positive_int, required=True)
    _model_args(p)
    _common(p, graph=False, compute=False)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("calibrate", help="fit A to observed ranks")
    p.add_argument("--observations", type=existing_file, required=True, help="CSV with k_in,n,rank")
    _model_args(p)
    _common(p, graph=False, compute=False)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("reproduce", help="full synthetic pipeline with checks")
    p.add_argument("--nodes", type=positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--k-max", type=positive_int)
    p.add_argument("--outdir", default="reproduce_out")
    p.add_argument("--prefix", default="", help="file name prefix for the figN tables")
    _common(p, graph=False)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # keep stderr to the JSON error object unless asked otherwise
    logging.basicConfig(level=logging.INFO if args.verbose else logging.CRITICAL,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.backend:
        kernels.set_backend(args.backend)
    try:
        args.func(args)
    except (MfrankError, ComputeError, ValueError, OverflowError, OSError, RuntimeError) as e:
        err = {"error": type(e).__name__, "message": str(e)}
        if getattr(e, "line_number", None) is not None:
            err["line"] = e.line_number
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
