"""Command-line workbench: generate, build, query, verify, bench and serve.

Exit codes: 0 success, 2 empty result, 1 any error (including bad flags).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .hin import HIN, HINError, dump_hin, load_hin
from .index.ihsc import IHSC, IndexError_, build_ihsc
from .index.oihsc import build_oihsc
from .index.serialize import index_stats, load_index, save_index
from .metapath import MetaPath, MetaPathError, parse_metapath
from .workbench.bench import ALGORITHMS as BENCH_ALGORITHMS
from .workbench.bench import DEFAULT_KS, DEFAULT_SCALES, BenchError, run_bench
from .workbench.fixture import build_fixture_d2, build_fixture_fix1, validate_fixture
from .workbench.gen import SIG_MODES, GenError, GenSpec, gen_hin, sweep_hin, write_dataset
from .workbench.verify import VerifyError, VerifyReport, verify_hin
from .workspace import ALGORITHMS, QueryError, Workspace

EXIT_OK, EXIT_ERROR, EXIT_EMPTY = 0, 1, 2
FIXTURES = {"fix1": build_fixture_fix1, "d2": build_fixture_d2}
SWEEP_METAPATHS = ("A-M-A", "A-M-D-M-A")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for empty results
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _csv_list(text: str, cast=str) -> list:
    try:
        return [cast(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None


def _metapaths(args) -> list[str]:
    out: list[str] = []
    for item in args.mp or ():
        out.extend(x.strip() for x in item.split(",") if x.strip())
    return out


def _graph(args, required: bool = True) -> HIN | None:
    if getattr(args, "fixture", None):
        return FIXTURES[args.fixture]()
    if getattr(args, "data", None):
        d = Path(args.data)
        return load_hin(d / "vertices.tsv", d / "edges.tsv", args.schema)
    if args.vertices and args.edges:
        return load_hin(args.vertices, args.edges, args.schema)
    if args.vertices or args.edges:
        raise CliError("--vertices and --edges must be given together")
    if required:
        raise CliError("no graph given; use --vertices/--edges, --data or --fixture")
    return None


def _parse_all(g: HIN, texts: list[str]) -> list[MetaPath]:
    if not texts:
        raise CliError("at least one --mp is required")
    return [parse_metapath(t, g.schema) for t in texts]


def _emit(rows: list[dict], fmt: str, text_lines, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json-lines":
        for r in rows:
            out.write(json.dumps(r) + "\n")
    elif fmt == "csv":
        if not rows:
            return
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: " ".join(map(str, v)) if isinstance(v, list) else v for k, v in r.items()})
    else:
        for line in text_lines():
            out.write(line + "\n")


# commands


def cmd_gen(args) -> int:
    if args.spec:
        spec = GenSpec.from_dict(json.loads(Path(args.spec).read_text(encoding="utf-8")))
    else:
        spec = GenSpec.movie_like(args.actors, args.sig_mode, args.seed, args.blocks)
    g = gen_hin(spec)
    paths = write_dataset(g, args.out, spec)
    print(f"wrote {g.n} vertices, {g.edge_count} edges")
    for kind, p in paths.items():
        print(f"  {kind}: {p}")
    return EXIT_OK


def cmd_fixture(args) -> int:
    if args.name == "check":
        g = _graph(args)
    else:
        g = FIXTURES[args.name]()
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            dump_hin(g, out / "vertices.tsv", out / "edges.tsv")
            print(f"wrote {args.name} to {out}")
        if args.name != "fix1":
            return EXIT_OK
    report = validate_fixture(g)
    _emit(
        [{"check": c.name, "passed": c.passed, "detail": c.detail} for c in report.checks],
        args.format,
        report.lines,
    )
    return EXIT_OK if report.passed else EXIT_ERROR


def cmd_build_index(args) -> int:
    g = _graph(args)
    paths = _parse_all(g, _metapaths(args))
    idx = build_ihsc(g, paths)
    if args.kind == "oihsc":
        idx = build_oihsc(idx)
    size = save_index(idx, args.out)
    rows = [s.to_dict() for s in index_stats(idx)]

    def text():
        yield f"{idx.kind} index written to {args.out} ({size} bytes)"
        for r in rows:
            yield (
                f"  {r['metapath']}: nodes={r['node_count']} stored={r['stored_vertex_count']} "
                f"bytes={r['serialized_bytes']}"
            )

    _emit(rows, args.format, text)
    return EXIT_OK


def _query_remote(args) -> list[dict]:
    import httpx

    body = {"algo": args.algo, "mp": _metapaths(args)[0], "k": args.k, "q": args.q, "w": args.w, "parent_mp": args.parent_mp}
    try:
        resp = httpx.post(args.server.rstrip("/") + "/query", json=body, timeout=args.timeout)
    except httpx.HTTPError as e:
        raise CliError(f"cannot reach {args.server}: {e}") from None
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = resp.text
        raise CliError(f"server said {resp.status_code}: {detail}")
    return resp.json()["results"]


def cmd_query(args) -> int:
    if len(_metapaths(args)) != 1:
        raise CliError("query takes exactly one --mp")
    if (args.q is None) == (args.w is None):
        raise CliError("give exactly one of --q or --w")
    if args.server:
        rows = _query_remote(args)
    else:
        ws = Workspace(_graph(args))
        for path in args.index or ():
            ws.attach(load_index(path))
        found = ws.query(args.algo, _metapaths(args)[0], args.k, q=args.q, w=args.w, parent_mp=args.parent_mp)
        rows = [r.to_dict(ws.graph) for r in found]

    def text():
        if not rows:
            yield f"no community at k={args.k} with significance >= {args.w}"
        for r in rows:
            if r["size"] == 0:
                yield f"empty result for q={r['q']} k={r['k']} p={r['metapath']} ({r['empty_reason']})"
                continue
            head = f"q={r['q']} " if r["q"] is not None else ""
            yield f"{head}k={r['k']} p={r['metapath']} algo={r['algorithm']} f={r['f']:g} size={r['size']}"
            yield "  " + " ".join(r["vertices"])

    _emit(rows, args.format, text)
    return EXIT_OK if any(r["size"] for r in rows) else EXIT_EMPTY


def cmd_verify(args) -> int:
    texts = _metapaths(args)
    report = VerifyReport()
    if args.sweep:
        texts = texts or list(SWEEP_METAPATHS)
        for i in range(args.sweep):
            g = sweep_hin(args.seed + i, max_anchors=min(args.cap, 60))
            one = verify_hin(g, _parse_all(g, texts), cap=args.cap, shrink=not args.no_shrink)
            report.merge(one)
            if not one.passed:
                break
    else:
        g = _graph(args)
        one = verify_hin(g, _parse_all(g, texts), cap=args.cap, shrink=not args.no_shrink)
        report.merge(one)
    summary = {"passed": report.passed, "queries": report.queries, "checks": report.checks}
    if report.passed:
        _emit([summary], args.format, lambda: [f"PASS {report.queries} queries; checks {report.checks}"])
        return EXIT_OK
    ce = report.counterexample
    other = f" other={ce['other']}" if ce["other"] is not None else ""
    summary["violation"] = f"{ce['check']} violated at (q={ce['q']}, k={ce['k']}, p={ce['metapath']}){other}: {ce['detail']}"
    summary["counterexample"] = report.counterexample
    if args.dump:
        Path(args.dump).write_text(json.dumps(report.counterexample, indent=1) + "\n", encoding="utf-8")

    def text():
        yield f"FAIL {summary['violation']}"
        if args.dump:
            yield f"counterexample written to {args.dump}"
        else:
            yield json.dumps(report.counterexample)

    _emit([summary], args.format, text)
    return EXIT_ERROR


def cmd_bench(args) -> int:
    if not args.index:
        raise CliError("bench needs a prebuilt IHSC index (--index FILE)")
    if not Path(args.index).exists():
        raise CliError(f"index file not found: {args.index}")
    g = _graph(args)
    idx = load_index(args.index)
    if idx.kind != IHSC:
        raise CliError(f"bench needs an IHSC index, {args.index} holds {idx.kind}")
    if idx.fingerprint != g.fingerprint:
        raise CliError("index was built for a different graph (fingerprint mismatch)")
    texts = _metapaths(args) or idx.metapaths
    paths = _parse_all(g, texts)
    missing = [str(p) for p in paths if str(p) not in idx.entries]
    if missing:
        raise CliError(f"index has no entry for {', '.join(missing)}")
    report = run_bench(
        g, paths, ks=args.k_list, scales=args.scales, algorithms=args.algos,
        queries=args.queries, seed=args.seed, repeats=args.repeats, full_index=idx, check=not args.no_check,
    )
    if args.out:
        csv_path, seeds = report.write(args.out)
        print(f"wrote {len(report.rows)} rows to {csv_path} (query lists in {seeds})", file=sys.stderr)
    if args.format == "csv" or not args.out:
        sys.stdout.write(report.to_csv())
    else:
        for r in report.rows:
            print(
                f"{r.algorithm:6} {r.metapath:12} k={r.k:<3} scale={r.scale:.1f} "
                f"n={r.queries:<4} total={r.total_seconds:.6f}s size={r.mean_size:.1f} f={r.mean_f}"
            )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    ws = Workspace(_graph(args))
    for path in args.index or ():
        ws.attach(load_index(path))
    uvicorn.run(create_app(ws), host=args.host, port=args.port, log_level=args.log_level)
    return EXIT_OK


# parser


def _graph_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph input")
    g.add_argument("--vertices", help="vertex file: id, type, significance per line")
    g.add_argument("--edges", help="edge file: two vertex ids per line")
    g.add_argument("--schema", help="optional file of allowed type pairs")
    g.add_argument("--data", help="directory holding vertices.tsv and edges.tsv")
    g.add_argument("--fixture", choices=sorted(FIXTURES), help="use a built-in fixture graph")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json-lines", "csv"), default="text")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--mp", action="append", help="meta-path such as A-M-A (repeatable or comma-separated)")

    ap = _Parser(prog="hsc", description="Significant community search in heterogeneous graphs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="generate a synthetic movie-style graph")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--actors", type=int, default=2000)
    p.add_argument("--sig-mode", choices=SIG_MODES, default="independent")
    p.add_argument("--blocks", type=int, default=None, help="locality blocks (default: actors // 500)")
    p.add_argument("--spec", help="JSON generator spec; overrides the movie-style flags")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fixture", parents=[common], help="write a fixture graph or validate one")
    p.add_argument("name", choices=("fix1", "d2", "check"), help="'check' validates the given graph")
    p.add_argument("--out", help="directory to write vertices.tsv and edges.tsv")
    _graph_flags(p)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("build-index", parents=[common], help="build and save an index")
    p.add_argument("--kind", choices=("ihsc", "oihsc"), default="ihsc")
    p.add_argument("--out", required=True, help="index file to write")
    _graph_flags(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("query", parents=[common], help="search one community (or all above a bound)")
    p.add_argument("--algo", choices=ALGORITHMS, default="qhsc")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", help="query vertex id")
    p.add_argument("--w", type=float, help="significance bound (index algorithms only)")
    p.add_argument("--parent-mp", help="parent meta-path for aqhsc")
    p.add_argument("--index", action="append", help="index file(s) to load instead of building in memory")
    p.add_argument("--server", help="send the query to a running service at this URL")
    p.add_argument("--timeout", type=float, default=60.0)
    _graph_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("verify", parents=[common], help="cross-check every search path exhaustively")
    p.add_argument("--sweep", type=int, default=0, help="sweep this many seeded random graphs instead")
    p.add_argument("--cap", type=int, default=200, help="largest anchor count accepted")
    p.add_argument("--dump", help="write the counterexample JSON here")
    p.add_argument("--no-shrink", action="store_true", help="skip counterexample minimization")
    _graph_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="time query batches over k and scale")
    p.add_argument("--index", help="prebuilt IHSC index of the full graph (required)")
    p.add_argument("--k", dest="k_list", type=lambda s: _csv_list(s, int), default=list(DEFAULT_KS))
    p.add_argument("--scales", type=lambda s: _csv_list(s, float), default=list(DEFAULT_SCALES))
    p.add_argument("--algos", type=_csv_list, default=list(BENCH_ALGORITHMS))
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--no-check", action="store_true", help="skip the cross-algorithm agreement gate")
    p.add_argument("--out", help="CSV path; query lists go next to it")
    _graph_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--index", action="append", help="index file(s) to load at startup")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--log-level", default="info")
    _graph_flags(p)
    p.set_defaults(func=cmd_serve)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, HINError, MetaPathError, QueryError, IndexError_, GenError, VerifyError, BenchError) as e:
        print(f"error: {e}", file=sys.stderr)
    except OSError as e:
        print(f"error: {e.filename or ''}: {e.strerror or e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
