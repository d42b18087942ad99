"""Query-time benchmark over scale fractions, k values and algorithms.

Each cell (algorithm, meta-path, k, scale) times one batch of query vertices
drawn with a fixed seed from the vertices whose core number is at least k, so
every query has a non-empty answer. Only the query calls are timed. Index
answers are cross-checked against QHSC on the same batch unless disabled.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..hin import HIN
from ..index.ihsc import IHSC, IndexForest, build_ihsc, query_ihsc
from ..index.oihsc import build_oihsc, query_oihsc
from ..metapath import MetaPath
from ..online import CommunityResult, qhsc
from .gen import sample_fraction

ALGORITHMS = ("qhsc", "ihsc", "oihsc")
DEFAULT_KS = (4, 8, 16, 32, 64)
DEFAULT_SCALES = (0.2, 0.4, 0.6, 0.8, 1.0)


class BenchError(RuntimeError):
    pass


@dataclass
class BenchRow:
    algorithm: str
    metapath: str
    k: int
    scale: float
    queries: int
    total_seconds: float
    mean_size: float
    mean_f: float | None

    @classmethod
    def from_csv(cls, rec: dict[str, str]) -> "BenchRow":
        return cls(
            algorithm=rec["algorithm"],
            metapath=rec["metapath"],
            k=int(rec["k"]),
            scale=float(rec["scale"]),
            queries=int(rec["queries"]),
            total_seconds=float(rec["total_seconds"]),
            mean_size=float(rec["mean_size"]),
            mean_f=float(rec["mean_f"]) if rec["mean_f"] not in ("", "None") else None,
        )


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    query_sets: dict[str, list[str]] = field(default_factory=dict)
    seed: int = 0

    COLUMNS = tuple(f.name for f in fields(BenchRow))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            d = asdict(r)
            d["total_seconds"] = f"{r.total_seconds:.6f}"
            d["mean_size"] = f"{r.mean_size:.3f}"
            d["mean_f"] = "" if r.mean_f is None else repr(r.mean_f)
            w.writerow(d)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BenchReport":
        return cls([BenchRow.from_csv(rec) for rec in csv.DictReader(io.StringIO(text))])

    def write(self, csv_path: str | Path) -> tuple[Path, Path]:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        seeds = csv_path.with_suffix(".queries.json")
        seeds.write_text(json.dumps({"seed": self.seed, "queries": self.query_sets}, indent=1) + "\n")
        return csv_path, seeds

    def cell(self, algorithm: str, metapath: str, k: int, scale: float) -> BenchRow | None:
        for r in self.rows:
            if (r.algorithm, r.metapath, r.k, r.scale) == (algorithm, metapath, k, scale):
                return r
        return None


def _pick_queries(ihsc: IndexForest, p: MetaPath, k: int, count: int, rng) -> list[int]:
    core = ihsc.entry(p).core
    pool = np.array(sorted(v for v, c in core.items() if c >= k), dtype=np.int64)
    if pool.size <= count:
        return pool.tolist()
    return np.sort(rng.choice(pool, size=count, replace=False)).tolist()


def _run(algorithm: str, g: HIN, p: MetaPath, k: int, qs: list[int], ihsc, oihsc):
    if algorithm == "qhsc":
        call = lambda q: qhsc(g, k, p, q)  # noqa: E731
    elif algorithm == "ihsc":
        call = lambda q: query_ihsc(ihsc, p, k, q)  # noqa: E731
    elif algorithm == "oihsc":
        call = lambda q: query_oihsc(oihsc, p, k, q)  # noqa: E731
    else:
        raise BenchError(f"unknown algorithm {algorithm!r}")
    if qs:
        call(qs[0])  # untimed warm-up: loads compiled kernels and caches
    out: list[CommunityResult] = []
    t0 = time.perf_counter()
    for q in qs:
        out.append(call(q))
    elapsed = time.perf_counter() - t0
    return elapsed, out


def run_bench(
    g: HIN,
    metapaths: list[MetaPath],
    ks=DEFAULT_KS,
    scales=DEFAULT_SCALES,
    algorithms=ALGORITHMS,
    queries: int = 100,
    seed: int = 1,
    repeats: int = 1,
    full_index: IndexForest | None = None,
    check: bool = True,
) -> BenchReport:
    """Run the grid; ``full_index`` (an IHSC of ``g``) is reused at scale 1.0.

    With ``repeats`` > 1 each cell keeps its fastest batch time.
    """
    if full_index is not None and full_index.kind != IHSC:
        raise BenchError("the prebuilt index must be an IHSC index")
    report = BenchReport(seed=seed)
    for scale in scales:
        sub = sample_fraction(g, scale, seed)
        if scale == 1 and full_index is not None:
            if full_index.fingerprint != g.fingerprint:
                raise BenchError("prebuilt index was built for a different graph")
            ihsc = full_index
        else:
            ihsc = build_ihsc(sub, metapaths)
        oihsc = build_oihsc(ihsc)
        for p in metapaths:
            for k in ks:
                rng = np.random.default_rng([seed, k, int(round(scale * 1000))])
                qs = _pick_queries(ihsc, p, k, queries, rng)
                report.query_sets[f"{p}|k={k}|scale={scale}"] = [sub.names[q] for q in qs]
                answers = {}
                for algo in algorithms:
                    best = None
                    for _ in range(max(1, repeats)):
                        elapsed, out = _run(algo, sub, p, k, qs, ihsc, oihsc)
                        best = elapsed if best is None else min(best, elapsed)
                    answers[algo] = out
                    fs = [r.f_value for r in out if not r.is_empty]
                    report.rows.append(
                        BenchRow(
                            algorithm=algo,
                            metapath=str(p),
                            k=k,
                            scale=scale,
                            queries=len(qs),
                            total_seconds=best,
                            mean_size=float(np.mean([len(r) for r in out])) if out else 0.0,
                            mean_f=float(np.mean(fs)) if fs else None,
                        )
                    )
                if check:
                    _cross_check(answers, sub, p, k)
    return report


def _cross_check(answers: dict[str, list[CommunityResult]], g: HIN, p: MetaPath, k: int) -> None:
    algos = list(answers)
    if len(algos) < 2:
        return
    ref = answers[algos[0]]
    for algo in algos[1:]:
        for a, b in zip(ref, answers[algo]):
            if a.key() != b.key():
                raise BenchError(
                    f"{algos[0]} and {algo} disagree at (q={g.names[a.q]}, k={k}, p={p}); "
                    "results are not reportable"
                )
