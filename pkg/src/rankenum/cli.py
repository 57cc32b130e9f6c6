"""Command-line entry point: ``rankenum {enumerate,bench,validate,sort}``.

Every flag can also be set through an environment variable named
``RANKENUM_<FLAG>`` (for example ``RANKENUM_LIMIT=10``); explicit flags win.

Exit codes: 0 success, 2 unreadable or malformed input, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass

from . import __version__
from .enumerate import ALGORITHMS, EnumStats, enumerate_transducer, preprocess
from .errors import DocumentError, InvalidArgument, PreconditionError, TransducerFormatError
from .group_core import GeneratorBasis, group_from_spec
from .nsum_sort.sorter import BACKENDS, NSumSorter, SortParams, SortReport, sort_nsums
from .product_dag import to_dot
from .transducer import check_unambiguous, load_document, load_transducer

ENV_PREFIX = "RANKENUM_"
EXIT_OK, EXIT_PARSE, EXIT_INVALID = 0, 2, 3


@dataclass
class RunConfig:
    transducer: str | None = None
    doc: str | None = None
    algo: str = "simple"
    limit: int | None = None
    seed: int = 0
    backend: str = "auto"
    max_len: int = 8
    format: str = "ndjson"
    instrument: bool = False
    dot: str | None = None
    input: str | None = None


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _env_bool(name: str) -> bool:
    return str(_env(name, "")).lower() in ("1", "true", "yes", "on")


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rankenum", description="Ranked enumeration of weighted transducer outputs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_doc=True):
        sp.add_argument("--transducer", default=_env("transducer"), help="transducer JSON file")
        if need_doc:
            sp.add_argument("--doc", default=_env("doc"), help="document file (one trailing newline is ignored)")
            sp.add_argument("--algo", choices=ALGORITHMS, default=_env("algo", "simple"))
            limit = _env("limit")
            sp.add_argument("--limit", type=_nonneg, default=None if limit is None else _nonneg(limit),
                            help="emit at most this many answers")
            sp.add_argument("--backend", choices=BACKENDS, default=_env("backend", "auto"),
                            help="sorter backend of the epoch algorithm")
        sp.add_argument("--seed", type=int, default=int(_env("seed", 0)))
        sp.add_argument("--instrument", action="store_true", default=_env_bool("instrument"),
                        help="print an instrumentation report to stderr")

    e = sub.add_parser("enumerate", help="stream ranked outputs")
    common(e)
    e.add_argument("--format", choices=("ndjson", "csv"), default=_env("format", "ndjson"))
    e.add_argument("--dot", default=_env("dot"), help="write the pruned product DAG as DOT to this path")
    e.add_argument("--max-len", type=_nonneg, default=int(_env("max_len", 0)),
                   help="if > 0, reject transducers with an ambiguity witness up to this length")

    b = sub.add_parser("bench", help="per-answer delay as CSV")
    common(b)

    v = sub.add_parser("validate", help="search for an ambiguity witness")
    common(v, need_doc=False)
    v.add_argument("--max-len", type=_nonneg, default=int(_env("max_len", 8)))

    s = sub.add_parser("sort", help="sort n-sums given as coefficient vectors")
    s.add_argument("--input", default=_env("input"), help='JSON: {"group", "basis", "vectors"}')
    s.add_argument("--backend", choices=BACKENDS, default=_env("backend", "auto"))
    s.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    s.add_argument("--instrument", action="store_true", default=_env_bool("instrument"))
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    for k, v in vars(ns).items():
        if hasattr(cfg, k):
            setattr(cfg, k, v)
    return cfg


def _err(msg: str):
    print(f"rankenum: {msg}", file=sys.stderr)


def _load(cfg: RunConfig, need_doc=True):
    if not cfg.transducer:
        raise TransducerFormatError("no transducer given (--transducer)")
    T = load_transducer(cfg.transducer)
    doc = None
    if need_doc:
        if cfg.doc is None:
            raise DocumentError("no document given (--doc)")
        doc = load_document(cfg.doc, T)
    return T, doc


def _guarded(fn, cfg: RunConfig) -> int:
    try:
        return fn(cfg)
    except OSError as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_PARSE
    except DocumentError as exc:
        _err(f"document: {exc}")
        return EXIT_PARSE
    except TransducerFormatError as exc:
        _err(f"transducer: {exc}")
        return EXIT_PARSE
    except json.JSONDecodeError as exc:
        _err(f"invalid JSON: {exc}")
        return EXIT_PARSE
    except (InvalidArgument, PreconditionError, OverflowError) as exc:
        _err(str(exc))
        return EXIT_INVALID


def _sorter(cfg: RunConfig) -> NSumSorter:
    return NSumSorter(backend=cfg.backend, seed=cfg.seed)


def cmd_enumerate(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    T, doc = _load(cfg)
    if cfg.max_len:
        w = check_unambiguous(T, cfg.max_len)
        if w is not True:
            _err(f"transducer is ambiguous on {w[0]!r}")
            return EXIT_INVALID
    stats = EnumStats()
    t0 = time.perf_counter_ns()
    prep = preprocess(T, doc)
    pre_ns = time.perf_counter_ns() - t0
    if cfg.dot:
        with open(cfg.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(prep.G, prep.tree))
    writer = None
    if cfg.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["rank", "weight", "tuple"])
    g = T.group
    for r in enumerate_transducer(T, doc, cfg.algo, cfg.limit, stats, _sorter(cfg), prepared=prep):
        obj = r.to_json(g)
        if writer is None:
            out.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
        else:
            writer.writerow([obj["rank"], json.dumps(obj["weight"]),
                             json.dumps(obj["tuple"], ensure_ascii=False, separators=(",", ":"))])
    if cfg.instrument:
        report = {"preprocess_ns": pre_ns, "dag_nodes": prep.G.num_nodes, "dag_edges": prep.G.num_edges,
                  "dg_edges": prep.D.num_edges, **stats.as_dict()}
        print(json.dumps(report), file=sys.stderr)
    return EXIT_OK


def cmd_bench(cfg: RunConfig, out=None) -> int:
    """CSV rows ``rank,size,delay_ns,aux_or_epoch``; preprocessing goes to stderr."""
    out = out or sys.stdout
    T, doc = _load(cfg)
    t0 = time.perf_counter_ns()
    prep = preprocess(T, doc)
    pre_ns = time.perf_counter_ns() - t0
    stats = EnumStats()
    col = "aux_size" if cfg.algo == "simple" else "epoch"
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rank", "size", "delay_ns", col])
    rows = []
    it = enumerate_transducer(T, doc, cfg.algo, cfg.limit, stats, _sorter(cfg), prepared=prep)
    last = time.perf_counter_ns()
    for r in it:
        now = time.perf_counter_ns()
        rows.append((r.rank, len(r.entries), now - last, stats.aux_size if cfg.algo == "simple" else stats.epoch))
        last = time.perf_counter_ns()
    writer.writerows(rows)
    print(f"# preprocess_ns={pre_ns} dg_edges={prep.D.num_edges} aux_max={stats.aux_max} "
          f"dag_nodes={prep.G.num_nodes}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    T, _ = _load(cfg, need_doc=False)
    w = check_unambiguous(T, cfg.max_len)
    if w is True:
        out.write(f"no ambiguity witness up to length {cfg.max_len}\n")
        return EXIT_OK
    doc, run1, run2 = w
    g = T.group
    obj = {
        "ambiguous": True,
        "document": doc,
        "runs": [[[t.src, t.symbol, g.to_json(t.weight), t.marker, t.dst] for t in run] for run in (run1, run2)],
    }
    out.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return EXIT_INVALID


def load_sort_input(path: str):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or "basis" not in obj or "vectors" not in obj:
        raise TransducerFormatError('expected an object with "basis" and "vectors"', path)
    try:
        group = group_from_spec(obj.get("group", "int"))
        basis = GeneratorBasis(group, tuple(group.from_json(g) for g in obj["basis"]))
    except (ValueError, OverflowError) as exc:
        raise TransducerFormatError(str(exc), "basis") from None
    import numpy as np

    vecs = obj["vectors"]
    if not isinstance(vecs, list) or any(
        not isinstance(v, list) or len(v) != basis.t or any(type(a) is not int or a < 0 for a in v) for v in vecs
    ):
        raise TransducerFormatError(f"each vector must list {basis.t} non-negative integers", "vectors")
    return basis, np.asarray(vecs, dtype=np.int64).reshape(len(vecs), basis.t)


def cmd_sort(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if not cfg.input:
        raise TransducerFormatError("no input given (--input)")
    basis, A = load_sort_input(cfg.input)
    rep = SortReport()
    perm = sort_nsums(A, basis, backend=cfg.backend, seed=cfg.seed, params=SortParams(), report=rep)
    out.write(json.dumps({"permutation": perm}) + "\n")
    if cfg.instrument:
        r = rep.as_dict()
        keep = ("comparisons", "restarts", "backend_used", "fallback", "fallback_reason")
        print(json.dumps({k: r[k] for k in keep}), file=sys.stderr)
    return EXIT_OK


COMMANDS = {"enumerate": cmd_enumerate, "bench": cmd_bench, "validate": cmd_validate, "sort": cmd_sort}


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    except (ValueError, argparse.ArgumentTypeError) as exc:  # bad env override
        _err(str(exc))
        return EXIT_PARSE
    cfg = _config(ns)
    return _guarded(COMMANDS[ns.command], cfg)


if __name__ == "__main__":
    sys.exit(main())
