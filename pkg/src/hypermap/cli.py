"""Command line: generate, embed, eval and predict.

Exit codes: 0 success, 1 invalid arguments or input, 2 I/O failure,
3 internal error. Outputs are written to temporary files and renamed into
--out-dir only once every output of the command has been computed.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import os
import platform
import sys
import tempfile

import numpy as np

from . import __version__
from ._parallel import default_threads

log = logging.getLogger("hypermap")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="root random seed (default 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")
    p.add_argument("--config", default=None, help="JSON file of option defaults; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")


def _model(p, need_all):
    p.add_argument("--m", type=float, default=None if not need_all else 1.5)
    p.add_argument("--L", type=float, default=None if not need_all else 2.5)
    p.add_argument("--gamma", type=float, default=None if not need_all else 2.1)
    p.add_argument("--T", type=float, default=0.4, help="temperature in [0.01, 1)")
    p.add_argument("--zeta", type=float, default=1.0)


def build_parser():
    ap = _Parser(prog="hypermap", description="Hyperbolic embedding of growing networks.")
    ap.add_argument("--version", action="version", version=f"hypermap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="grow a synthetic network")
    g.add_argument("--t", type=int, default=2000, help="number of nodes")
    _model(g, True)
    _common(g)

    e = sub.add_parser("embed", help="infer coordinates of an edge list")
    e.add_argument("--edges", required=False, help="edge list file")
    _model(e, False)
    e.add_argument("--method", choices=["link", "cn", "hybrid"], default="hybrid")
    e.add_argument("--fast", action="store_true", help="windowed search for low-degree nodes")
    e.add_argument("--k-speedup", type=int, default=10)
    e.add_argument("--C", type=float, default=200.0, help="half-width constant of the fast window")
    e.add_argument("--correction-degrees", default="60,40,20,10",
                   help="comma-separated degree thresholds; empty or 'none' disables corrections")
    e.add_argument("--correction-repeats", type=int, default=None)
    e.add_argument("--theta1", type=float, default=math.pi)
    e.add_argument("--quad-points", type=int, default=1024)
    e.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True,
                   help="fail on malformed edge-list lines (default) or skip them")
    _common(e)

    v = sub.add_parser("eval", help="evaluate an embedding")
    v.add_argument("--edges", required=False)
    v.add_argument("--coords", required=False)
    v.add_argument("--truth", default=None, help="truth sidecar of a synthetic network")
    v.add_argument("--pairs", type=int, default=10_000, help="greedy-routing pairs")
    v.add_argument("--trials", type=int, default=10, help="random-angle log-loss trials")
    v.add_argument("--bin-width", type=float, default=0.5)
    _common(v)

    r = sub.add_parser("predict", help="score future links")
    r.add_argument("--base", required=False, help="edge list of the embedded snapshot")
    r.add_argument("--future", required=False, help="edge list of the later snapshot")
    r.add_argument("--coords", required=False, help="coordinates of the base snapshot")
    r.add_argument("--groups", default=None, help="'label group' file for angular group centres")
    r.add_argument("--bin-width", type=float, default=0.5)
    _common(r)
    return ap


def _parse(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        sp = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sp._actions}
        bad = [k for k in cfg if k.replace("-", "_") not in known]
        if bad:
            raise UsageError(f"unknown config keys: {', '.join(bad)}")
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = ap.parse_args(argv)
    if args.threads is None:
        args.threads = default_threads()
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    return args


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


class _Outputs:
    """Collects output files and moves them into place together."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files: dict[str, str] = {}

    def add(self, name, text):
        self.files[name] = text

    def commit(self):
        os.makedirs(self.out_dir, exist_ok=True)
        tmp = []
        try:
            for name, text in self.files.items():
                fd, path = tempfile.mkstemp(prefix=f".{name}.", dir=self.out_dir)
                with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
                tmp.append((path, os.path.join(self.out_dir, name)))
            for src, dst in tmp:
                os.replace(src, dst)
        except BaseException:
            for src, _ in tmp:
                if os.path.exists(src):
                    os.unlink(src)
            raise


def _manifest(args, outputs, extra=None):
    eff = {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose",)}
    m = dict(tool="hypermap", version=__version__, command=args.command,
             created=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
             python=platform.python_version(), numpy=np.__version__,
             config=eff, outputs=sorted(outputs))
    if extra:
        m.update(extra)
    return json.dumps(m, indent=2, sort_keys=False, default=str) + "\n"


def _params_from_args(args, t):
    from .geometry import ModelParams

    return ModelParams.from_gamma(args.m, args.L, args.gamma, args.T, t, args.zeta)


def cmd_generate(args):
    from .generate import format_truth, generate
    from .graph import format_edge_list

    p = _params_from_args(args, args.t)
    net = generate(p, args.seed)
    out = _Outputs(args.out_dir)
    header = (f"synthetic network t={p.t} m={p.m!r} L={p.L!r} gamma={p.gamma!r} T={p.T!r} "
              f"zeta={p.zeta!r} seed={args.seed}")
    out.add("edges.txt", format_edge_list(net.graph, header))
    out.add("truth.txt", format_truth(net))
    out.add("manifest.json", _manifest(args, list(out.files) + ["manifest.json"],
                                       dict(nodes=p.t, edges=net.graph.n_edges,
                                            isolated_nodes=int((net.graph.degrees == 0).sum()))))
    out.commit()
    log.info("wrote %d nodes, %d edges to %s", p.t, net.graph.n_edges, args.out_dir)


def _degrees_arg(s):
    if s is None or (isinstance(s, str) and s.strip().lower() in ("", "none")):
        return ()
    if isinstance(s, (list, tuple)):
        return tuple(int(x) for x in s)
    try:
        return tuple(int(x) for x in str(s).split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad --correction-degrees {s!r}") from exc


def cmd_embed(args):
    from .embed import EmbedConfig, embed, estimate_params, format_coordinates
    from .graph import load_edge_list

    _need(args, "edges")
    g, rep = load_edge_list(args.edges, strict=args.strict)
    if len(g) < 2:
        raise UsageError("edge list has fewer than two nodes")
    p = estimate_params(g, args.T, args.zeta, args.m, args.L, args.gamma)
    cfg = EmbedConfig(method=args.method, fast=args.fast, k_speedup=args.k_speedup, C=args.C,
                      correction_degrees=_degrees_arg(args.correction_degrees),
                      correction_repeats=args.correction_repeats, theta1=args.theta1,
                      quad_points=args.quad_points, threads=args.threads)
    e = embed(g, p, cfg)
    out = _Outputs(args.out_dir)
    out.add("coordinates.txt", format_coordinates(e))
    info = dict(e.info)
    info["params"] = p.as_dict()
    info["load"] = dict(lines=rep.n_lines, edges=rep.n_edges, self_loops=rep.self_loops,
                        duplicates=rep.duplicates, malformed_lines=rep.malformed)
    out.add("embed_log.json", json.dumps(info, indent=2, default=str) + "\n")
    out.add("manifest.json", _manifest(args, list(out.files) + ["manifest.json"]))
    out.commit()


def _real_embedding(truth, g, params):
    from .evaluate import embedding_from_truth

    t = max(v[0] for v in truth.values())
    if sorted(v[0] for v in truth.values()) != list(range(1, t + 1)):
        raise UsageError("truth ranks must be 1..t")
    theta = np.empty(t)
    for rank, _r, th in truth.values():
        theta[rank - 1] = th
    return embedding_from_truth(g, params.replace(t=t), theta)


def cmd_eval(args):
    from .embed import read_coordinates
    from .evaluate import evaluate
    from .generate import read_truth
    from .graph import load_edge_list

    _need(args, "edges", "coords")
    g, _ = load_edge_list(args.edges)
    e = read_coordinates(args.coords)
    miss = sorted(set(g.labels) - set(e.labels))
    if miss:
        raise UsageError(f"node {miss[0]!r} of the edge list has no coordinates")
    real = None
    if args.truth:
        truth = read_truth(args.truth)
        if set(g.labels) - set(truth):
            raise UsageError("edge list has nodes missing from the truth file")
        real = _real_embedding(truth, g, e.params)
    rep = evaluate(g, e, real, num_pairs=args.pairs, seed=args.seed, trials=args.trials,
                   bin_width=args.bin_width)
    out = _Outputs(args.out_dir)
    out.add("report.txt", rep.to_text())
    for name, h in rep.histograms.items():
        out.add(f"connection_probability_{name}.csv", h.to_csv())
    out.add("manifest.json", _manifest(args, list(out.files) + ["manifest.json"]))
    out.commit()


def cmd_predict(args):
    from .embed import read_coordinates
    from .graph import load_edge_list
    from .prediction import center_of_mass, future_link_curve, prediction_report, read_groups

    _need(args, "base", "future", "coords")
    base, _ = load_edge_list(args.base)
    future, _ = load_edge_list(args.future)
    e = read_coordinates(args.coords)
    miss = sorted(set(base.labels) - set(e.labels))
    if miss:
        raise UsageError(f"node {miss[0]!r} of the base edge list has no coordinates")
    rows, pairs = prediction_report(base, future, e)
    out = _Outputs(args.out_dir)
    lines = ["method,subset,auc,positives,negatives"]
    lines += [f"{m},{s},{'' if math.isnan(a) else repr(a)},{npos},{nneg}" for m, s, a, npos, nneg in rows]
    out.add("auc.csv", "\n".join(lines) + "\n")
    out.add("future_links.csv", future_link_curve(pairs, e, args.bin_width).to_csv())
    if args.groups:
        groups = read_groups(args.groups)
        gl = ["group,members,theta_cm,wraps"]
        for name in sorted(groups):
            th = [e.angle(lab) for lab in groups[name] if lab in e.rank and not math.isnan(e.angle(lab))]
            if not th:
                continue
            cm, wraps = center_of_mass(th)
            gl.append(f"{name},{len(th)},{cm!r},{int(wraps)}")
        out.add("group_centers.csv", "\n".join(gl) + "\n")
    out.add("manifest.json", _manifest(args, list(out.files) + ["manifest.json"]))
    out.commit()


COMMANDS = dict(generate=cmd_generate, embed=cmd_embed, eval=cmd_eval, predict=cmd_predict)


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"hypermap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hypermap: error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hypermap: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hypermap: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # pragma: no cover - reported, not swallowed
        log.exception("internal error")
        print(f"hypermap: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
