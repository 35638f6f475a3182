"""Command-line entry point.

Subcommands wrap the library modules into reproducible experiments:

    classify   structural report for a constraint graph
    homspace   enumerate hom(G,H): counts, connectivity, isolated maps, marginals
    solve      solutions of the fundamental equations for (H, r, activities)
    sweep      solution counts along a one-parameter activity family (CSV)
    sample     draw a tree configuration from a branching random walk
    mcmc       single-site dynamics on a finite board
    reproduce  packaged experiments with pinned expectations

Graph arguments accept either a JSON file path or a constructor spec such as
``hinge``, ``hard_core``, ``complete:4``, ``cycle:5:looped``,
``grid_box:15:2`` or ``tree:2:4``.  Exit codes: 0 success, 1 expectation
mismatch, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, mcmc, reproduce
from .graphs import (Board, ConstraintGraph, GraphFormatError,
                     graph_to_json_dict, load_graph, standard_board,
                     standard_graph)
from .homspace import enumerate_homs, lambda_measure
from .treegibbs import (count_transition, sample_walk_config,
                        semi_invariant_measures, BranchingWalk)
from .classify import classify_graph


class CliError(Exception):
    pass


def _parse_spec(text, *, board):
    """A file path, or name[:arg[:arg...]] with integer args and a trailing
    'looped' flag."""
    if os.path.exists(text):
        g = load_graph(text)
        want = Board if board else ConstraintGraph
        if not isinstance(g, want):
            raise CliError(f"{text} holds the wrong graph type for this argument")
        return g
    parts = text.split(":")
    name, rest = parts[0], parts[1:]
    args = []
    kwargs = {}
    for p in rest:
        if p == "looped":
            kwargs["looped"] = True
        else:
            try:
                args.append(int(p))
            except ValueError:
                raise CliError(f"bad constructor argument {p!r} in {text!r}") from None
    try:
        if board:
            return standard_board(name, *args, **kwargs)
        return standard_graph(name, *args, **kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _parse_floats(text):
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise CliError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise CliError("empty vector")
    return vals


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("HOMGIBBS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"bad HOMGIBBS_THREADS value {env!r}") from None
    return os.cpu_count() or 1


def _emit(payload, args, files=None):
    """Print the JSON payload; also write it (plus extra files and a manifest)
    under --out when given."""
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    print(text)
    out = getattr(args, "out", None)
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "result.json").write_text(text + "\n")
        for name, content in (files or {}).items():
            mode = "wb" if isinstance(content, bytes) else "w"
            with open(outdir / name, mode) as fh:
                fh.write(content)
        manifest = {
            "command": sys.argv[1:],
            "version": __version__,
            "seed": getattr(args, "seed", None),
            "inputs_sha256": hashlib.sha256(
                json.dumps(vars(args), sort_keys=True, default=str).encode()).hexdigest(),
        }
        (outdir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _json_default(x):
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    return str(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args):
    h = _parse_spec(args.graph, board=False)
    try:
        report = classify_graph(h)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(report.as_dict(), args)
    return 0


def cmd_homspace(args):
    board = _parse_spec(args.board, board=True)
    h = _parse_spec(args.graph, board=False)
    hs = enumerate_homs(board, h, cap=args.cap)
    payload = {"n_maps": len(hs), "empty": hs.is_empty}
    if args.report in ("connectivity", "isolated"):
        payload["connected"] = hs.is_connected()
        payload["n_components"] = len(hs.components())
    if args.report == "isolated":
        payload["isolated_maps"] = [list(hs.maps[k]) for k in hs.isolated_maps()]
    if args.report == "marginals":
        lam = _parse_floats(args.activities) if args.activities else (1.0,) * h.q
        mu = lambda_measure(hs, lam)
        marg = [[0.0] * h.q for _ in range(board.n_sites)]
        for k, m in enumerate(hs.maps):
            for u, s in enumerate(m):
                marg[u][s] += float(mu[k])
        payload["site_marginals"] = marg
    _emit(payload, args)
    return 0


def cmd_solve(args):
    h = _parse_spec(args.graph, board=False)
    lam = _parse_floats(args.activities)
    fam = semi_invariant_measures(h, args.r, lam, starts=args.starts,
                                  seed=args.seed, tol=args.tol)
    payload = {
        "bipartite_double_route": fam.bipartite,
        "count": fam.count,
        "multiple": fam.multiple,
    }
    if fam.bipartite:
        payload["component_weights"] = [list(w) for w in fam.component_weights]
    else:
        payload["solutions"] = [s.as_dict() for s in fam.solutions]
    _emit(payload, args)
    return 0


def cmd_sweep(args):
    h = _parse_spec(args.graph, board=False)
    template = args.family.split(",")
    if "t" not in template:
        raise CliError("the family template must contain 't', e.g. 't,1,t'")

    def family(t):
        return tuple(t if p == "t" else float(p) for p in template)

    ts = np.linspace(args.t_min, args.t_max, args.steps)
    report = count_transition(h, args.r, family, ts, metric=args.metric,
                              bisect_tol=args.bisect, starts=args.starts,
                              seed=args.seed)
    lines = ["t,invariant_count,total_count"]
    for t, ci, ct in zip(report.ts, report.counts_invariant, report.counts_total):
        lines.append(f"{t},{ci},{ct}")
    csv = "\n".join(lines) + "\n"
    print(csv, end="")
    for lo, hi, clo, chi in report.brackets:
        print(f"# count change {clo} -> {chi} bracketed in ({lo}, {hi})")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "sweep.csv").write_text(csv)
        (outdir / "brackets.json").write_text(json.dumps(
            [list(b) for b in report.brackets], indent=2) + "\n")
    return 0


def cmd_sample(args):
    h = _parse_spec(args.graph, board=False)
    w = _parse_floats(args.weights)
    walk = BranchingWalk(h, args.r, w)
    try:
        cfg = sample_walk_config(walk, args.depth, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload = {
        "r": args.r,
        "depth": args.depth,
        "seed": args.seed,
        "stationary": [float(p) for p in walk.stationary],
        "spins": list(cfg.spins),
        "board": graph_to_json_dict(cfg.board),
    }
    dot_lines = ["graph sample {"]
    for u in range(cfg.board.n_sites):
        dot_lines.append(f'  {u} [label="{h.node_name(cfg.spins[u])}"];')
    for a, b in cfg.board.edges:
        dot_lines.append(f"  {a} -- {b};")
    dot_lines.append("}")
    _emit(payload, args, files={"sample.dot": "\n".join(dot_lines) + "\n"})
    return 0


def cmd_mcmc(args):
    board = _parse_spec(args.board, board=True)
    h = _parse_spec(args.graph, board=False)
    lam = _parse_floats(args.activities)
    if len(lam) != h.q:
        raise CliError(f"need {h.q} activities for this graph")
    replicas = args.replicas
    inits = []
    for k in range(replicas):
        kind = args.init
        if kind == "even" or kind == "odd":
            inits.append(mcmc.parity_config(board, h, 0, 1, even=(kind == "even")))
        elif kind == "alternate":
            inits.append(mcmc.parity_config(board, h, 0, 1, even=(k % 2 == 0)))
        elif kind.startswith("constant:"):
            inits.append(mcmc.constant_config(board, h, int(kind.split(":")[1])))
        elif kind.startswith("file:"):
            spins = json.loads(Path(kind.split(":", 1)[1]).read_text())
            inits.append(np.asarray(spins, dtype=np.int8))
        elif kind == "random":
            inits.append(mcmc.random_config(board, h, (args.seed, k)))
        else:
            raise CliError(f"unknown init {kind!r}")
    pinned = None
    if args.pin:
        pinned = {int(k): int(v) for k, v in json.loads(Path(args.pin).read_text()).items()}
        for k in range(replicas):
            for u, s in pinned.items():
                inits[k][u] = s
    threads = _threads(args)
    ids = list(range(replicas))
    if threads > 1 and replicas > 1:
        from concurrent.futures import ThreadPoolExecutor
        shards = [ids[i::threads] for i in range(threads) if ids[i::threads]]
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            futs = [pool.submit(mcmc.run_replicas, board, h, lam,
                                [inits[i] for i in shard], args.sweeps, args.seed,
                                record_every=args.record_every,
                                pinned=set(pinned) if pinned else None,
                                replica_ids=shard)
                    for shard in shards]
            stats = [s for f in futs for s in f.result()]
        stats.sort(key=lambda s: s.replica)
    else:
        stats = mcmc.run_replicas(board, h, lam, inits, args.sweeps, args.seed,
                                  record_every=args.record_every,
                                  pinned=set(pinned) if pinned else None)
    payload = {
        "replicas": replicas,
        "sweeps": args.sweeps,
        "record_every": args.record_every,
        "seed": args.seed,
        "final_color_counts": [s.color_counts[-1].tolist() for s in stats],
    }
    if board.site_parity is not None:
        occupied = [s for s in range(h.q) if not h.is_looped(s)] or list(range(h.q))
        payload["occupied_spins"] = occupied
        payload["final_parity_ratio"] = [
            float(mcmc.parity_ratio_series(s, occupied)[-1]) for s in stats]
    files = {}
    if args.render:
        renderdir = Path(args.render)
        renderdir.mkdir(parents=True, exist_ok=True)
        # hard-core style graphs render the looped 'empty' spin as background
        # and shade the occupied spin by parity
        hc_like = h.q == 2 and h.is_looped(1) and not h.is_looped(0)
        for s in stats[:args.render_max]:
            mcmc.render_ppm(board, s.final_spins, renderdir / f"replica{s.replica}.ppm",
                            parity_spin=0 if hc_like else None,
                            blank_spins=(1,) if hc_like else ())
    if args.series:
        lines = ["replica,record,spin,count"]
        for s in stats:
            for rec in range(s.n_records):
                for spin in range(h.q):
                    lines.append(f"{s.replica},{rec},{spin},{s.color_counts[rec, spin]}")
        files["series.csv"] = "\n".join(lines) + "\n"
    _emit(payload, args, files=files)
    return 0


def cmd_reproduce(args):
    if args.list:
        for name in sorted(reproduce.EXPERIMENTS):
            print(name)
        return 0
    if not args.experiment:
        raise CliError("give an experiment id or --list")
    try:
        ok, report = reproduce.run_experiment(args.experiment)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    status = "PASS" if ok else "FAIL"
    print(f"{args.experiment}: {status}")
    _emit({"experiment": args.experiment, "ok": ok, "report": report}, args)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="homgibbs", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="structural report for a constraint graph")
    c.add_argument("graph")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_classify)

    c = sub.add_parser("homspace", help="enumerate hom(G,H)")
    c.add_argument("board")
    c.add_argument("graph")
    c.add_argument("--lambda", dest="activities")
    c.add_argument("--report", choices=["count", "connectivity", "isolated", "marginals"],
                   default="count")
    c.add_argument("--cap", type=int, default=10**8)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_homspace)

    c = sub.add_parser("solve", help="solve the fundamental equations")
    c.add_argument("graph")
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--lambda", dest="activities", required=True)
    c.add_argument("--starts", type=int, default=200)
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_solve)

    c = sub.add_parser("sweep", help="solution counts along an activity family")
    c.add_argument("graph")
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--family", required=True, help="e.g. 't,1,t'")
    c.add_argument("--t-min", type=float, required=True)
    c.add_argument("--t-max", type=float, required=True)
    c.add_argument("--steps", type=int, default=11)
    c.add_argument("--metric", choices=["invariant", "total"], default="invariant")
    c.add_argument("--bisect", type=float, default=None)
    c.add_argument("--starts", type=int, default=120)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_sweep)

    c = sub.add_parser("sample", help="sample a branching-walk tree configuration")
    c.add_argument("graph")
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--w", dest="weights", required=True)
    c.add_argument("--depth", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_sample)

    c = sub.add_parser("mcmc", help="single-site dynamics on a finite board")
    c.add_argument("--board", required=True)
    c.add_argument("--graph", required=True)
    c.add_argument("--lambda", dest="activities", required=True)
    c.add_argument("--sweeps", type=int, required=True)
    c.add_argument("--replicas", type=int, default=1)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--init", default="random",
                   help="even|odd|alternate|random|constant:SPIN|file:PATH")
    c.add_argument("--record-every", type=int, default=1)
    c.add_argument("--pin", help="JSON file {site: spin} held fixed")
    c.add_argument("--threads", type=int, default=None,
                   help="replica shards (default HOMGIBBS_THREADS or cpu count)")
    c.add_argument("--render", help="directory for final-state PPM rasters")
    c.add_argument("--render-max", type=int, default=4)
    c.add_argument("--series", action="store_true", help="emit per-record CSV")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_mcmc)

    c = sub.add_parser("reproduce", help="run a packaged experiment")
    c.add_argument("experiment", nargs="?")
    c.add_argument("--list", action="store_true")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_reproduce)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
