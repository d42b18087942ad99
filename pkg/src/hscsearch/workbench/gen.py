"""Seeded synthetic HIN generator (topology plus significance)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from ..hin import HIN, TypeId, Schema, dump_hin

SIG_MODES = ("independent", "correlated", "anti-correlated")
MODELS = ("uniform", "preferential")


class GenError(ValueError):
    pass


@dataclass
class EdgeSpec:
    src: str
    dst: str
    count: int
    model: str = "uniform"
    cover: bool = False  # give every src vertex at least one edge first


@dataclass
class GenSpec:
    vertex_counts: dict[str, int]
    edges: list[EdgeSpec]
    sig_mode: str = "independent"
    seed: int = 1
    blocks: int = 1
    skew: float = 0.8
    noise: float = 0.15

    def validate(self) -> None:
        if not self.vertex_counts:
            raise GenError("no vertex types")
        for t, c in self.vertex_counts.items():
            if c <= 0:
                raise GenError(f"vertex count for {t} must be positive, got {c}")
        for e in self.edges:
            if e.src not in self.vertex_counts or e.dst not in self.vertex_counts:
                raise GenError(f"edge spec {e.src}-{e.dst} names an unknown type")
            if e.src == e.dst:
                raise GenError(f"edge spec {e.src}-{e.dst} joins a type to itself")
            if e.count <= 0:
                raise GenError(f"edge count for {e.src}-{e.dst} must be positive")
            if e.model not in MODELS:
                raise GenError(f"unknown attachment model {e.model!r}")
        if self.sig_mode not in SIG_MODES:
            raise GenError(f"unknown significance mode {self.sig_mode!r}")
        if self.blocks < 1:
            raise GenError("blocks must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise GenError("seed must fit in 64 bits")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GenSpec":
        d = dict(d)
        d["edges"] = [EdgeSpec(**e) for e in d.get("edges", [])]
        return cls(**d)

    @classmethod
    def movie_like(
        cls,
        actors: int,
        sig_mode: str = "independent",
        seed: int = 1,
        blocks: int | None = None,
    ) -> "GenSpec":
        """Actors/movies/directors/writers in the proportions 10:8:1:1."""
        movies = max(1, actors * 4 // 5)
        staff = max(1, actors // 10)
        if blocks is None:
            blocks = max(1, actors // 500)
        return cls(
            vertex_counts={"A": actors, "M": movies, "D": staff, "W": staff},
            edges=[
                EdgeSpec("M", "A", movies * 3, "preferential", cover=True),
                EdgeSpec("M", "D", movies, "uniform", cover=True),
                EdgeSpec("M", "W", movies, "uniform", cover=True),
            ],
            sig_mode=sig_mode,
            seed=seed,
            blocks=blocks,
        )


def _block_of(n: int, blocks: int) -> np.ndarray:
    return (np.arange(n, dtype=np.int64) * blocks) // n


def _weights(rng: np.random.Generator, size: int, model: str, skew: float) -> np.ndarray:
    if model == "uniform":
        return np.full(size, 1.0 / size)
    w = (rng.permutation(size) + 1.0) ** (-skew)
    return w / w.sum()


def _edge_pairs(rng, spec: GenSpec, e: EdgeSpec) -> tuple[np.ndarray, np.ndarray]:
    ns, nt = spec.vertex_counts[e.src], spec.vertex_counts[e.dst]
    b = min(spec.blocks, ns, nt)
    bs, bt = _block_of(ns, b), _block_of(nt, b)
    s_start = np.searchsorted(bs, np.arange(b + 1))
    t_start = np.searchsorted(bt, np.arange(b + 1))
    share = rng.multinomial(e.count, np.diff(s_start) / ns)
    srcs, dsts = [], []
    for blk in range(b):
        s0, s1 = s_start[blk], s_start[blk + 1]
        t0, t1 = t_start[blk], t_start[blk + 1]
        ws = _weights(rng, s1 - s0, e.model, spec.skew)
        wt = _weights(rng, t1 - t0, e.model, spec.skew)
        count = int(share[blk])
        if e.cover:
            src = np.arange(s0, s1, dtype=np.int64)
            rest = max(0, count - src.size)
            src = np.concatenate([src, s0 + rng.choice(s1 - s0, size=rest, p=ws)])
        else:
            src = s0 + rng.choice(s1 - s0, size=count, p=ws)
        dst = t0 + rng.choice(t1 - t0, size=src.size, p=wt)
        srcs.append(src)
        dsts.append(dst)
    return np.concatenate(srcs), np.concatenate(dsts)


def gen_hin(spec: GenSpec) -> HIN:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    type_names = list(spec.vertex_counts)
    offsets, total = {}, 0
    for t in type_names:
        offsets[t] = total
        total += spec.vertex_counts[t]
    vtype = np.concatenate(
        [np.full(spec.vertex_counts[t], i, dtype=np.int64) for i, t in enumerate(type_names)]
    )
    nbrs: list[set[int]] = [set() for _ in range(total)]
    pairs = set()
    for e in spec.edges:
        s, d = _edge_pairs(rng, spec, e)
        s = (s + offsets[e.src]).tolist()
        d = (d + offsets[e.dst]).tolist()
        for u, w in zip(s, d):
            nbrs[u].add(w)
            nbrs[w].add(u)
        pairs.add(frozenset((type_names.index(e.src), type_names.index(e.dst))))
    degree = np.array([len(x) for x in nbrs], dtype=np.float64)
    sig = _significance(rng, spec, vtype, degree)
    names = [f"{t}{i}" for t in type_names for i in range(spec.vertex_counts[t])]
    types = tuple(TypeId(i, t) for i, t in enumerate(type_names))
    schema = Schema(types, frozenset(pairs))
    vt = vtype.tolist()
    adj = []
    for nb in nbrs:
        by_type: dict[int, list[int]] = {}
        for w in sorted(nb):
            by_type.setdefault(vt[w], []).append(w)
        adj.append({t: tuple(ws) for t, ws in by_type.items()})
    return HIN(names, vt, sig.tolist(), adj, schema)


def _significance(rng, spec: GenSpec, vtype: np.ndarray, degree: np.ndarray) -> np.ndarray:
    noise = rng.random(vtype.size)
    if spec.sig_mode == "independent":
        return noise
    # rank within each type so every type spans the whole range
    r = np.empty(vtype.size)
    for t in np.unique(vtype):
        idx = np.flatnonzero(vtype == t)
        r[idx] = (rankdata(degree[idx]) - 0.5) / idx.size
    if spec.sig_mode == "anti-correlated":
        r = 1.0 - r
    return (1.0 - spec.noise) * r + spec.noise * noise


def write_dataset(g: HIN, out_dir: str | Path, spec: GenSpec | None = None) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"vertices": out / "vertices.tsv", "edges": out / "edges.tsv"}
    dump_hin(g, paths["vertices"], paths["edges"])
    if spec is not None:
        paths["spec"] = out / "genspec.json"
        paths["spec"].write_text(spec.to_json() + "\n", encoding="utf-8")
    return paths


def sample_fraction(g: HIN, fraction: float, seed: int) -> HIN:
    """Keep each vertex with probability ``fraction``; keep edges between kept vertices."""
    if not 0 < fraction <= 1:
        raise GenError("fraction must lie in (0, 1]")
    if fraction == 1:
        return g
    rng = np.random.default_rng(seed)
    keep = np.flatnonzero(rng.random(g.n) < fraction)
    return g.induced(keep.tolist())


def small_hin(
    seed: int,
    anchors: int = 30,
    movies: int = 14,
    directors: int = 4,
    density: float = 0.2,
    sig_levels: int | None = None,
    complete: bool = True,
) -> HIN:
    """Small dense A/M/D graph for exhaustive sweeps.

    ``sig_levels`` draws integer significances from 1..sig_levels so ties are
    common. With ``complete`` every movie has a director; otherwise about a
    third of the movies have none.
    """
    rng = np.random.default_rng(seed)
    if sig_levels:
        a_sig = rng.integers(1, sig_levels + 1, anchors).astype(float)
    else:
        a_sig = rng.random(anchors)
    vertices = [(f"a{i}", "A", float(a_sig[i])) for i in range(anchors)]
    vertices += [(f"m{j}", "M", float(s)) for j, s in enumerate(rng.random(movies))]
    vertices += [(f"d{j}", "D", float(s)) for j, s in enumerate(rng.random(directors))]
    cast = rng.random((anchors, movies)) < density
    edges = [(f"a{i}", f"m{j}") for i, j in zip(*np.nonzero(cast))]
    boss = rng.integers(0, directors, movies)
    staffed = np.ones(movies, bool) if complete else rng.random(movies) < 0.7
    edges += [(f"m{j}", f"d{boss[j]}") for j in np.flatnonzero(staffed)]
    edges += [("a0", "m0"), ("m0", "d0")]
    return HIN.from_records(vertices, sorted(set(edges)), type_order=["A", "M", "D"])


def sweep_hin(seed: int, max_anchors: int = 60, complete: bool = True) -> HIN:
    """One member of a seeded family of small graphs of varied size and density.

    Every third graph uses continuous significance; the rest use 3 or 8
    levels so ties are frequent.
    """
    rng = np.random.default_rng([seed, 7])
    anchors = int(rng.integers(8, max_anchors + 1))
    return small_hin(
        seed,
        anchors=anchors,
        movies=int(rng.integers(6, 26)),
        directors=int(rng.integers(2, 6)),
        density=float(rng.uniform(0.05, 0.2)),
        sig_levels=(None, 3, 8)[seed % 3],
        complete=complete,
    )


__all__ = ["GenSpec", "EdgeSpec", "GenError", "gen_hin", "write_dataset", "sample_fraction", "small_hin", "sweep_hin", "SIG_MODES"]
