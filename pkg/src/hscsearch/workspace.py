"""A loaded graph plus its indexes, and the query dispatch shared by the CLI and the service."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

from .hin import HIN, HINError, load_hin
from .index.ihsc import IHSC, OIHSC, IndexError_, IndexForest, build_ihsc, query_ihsc, query_ihsc_threshold
from .index.oihsc import build_oihsc, query_oihsc, query_oihsc_threshold
from .index.serialize import load_index
from .metapath import MetaPath, MetaPathError, parse_metapath
from .online import CommunityResult, SolutionCache, aqhsc, basic_peel, qhsc

ALGORITHMS = ("basic", "qhsc", "aqhsc", "ihsc", "oihsc")


class QueryError(ValueError):
    """A request that cannot be answered as asked (bad vertex, path, k or flags)."""


@dataclass
class Workspace:
    graph: HIN
    indexes: dict[str, IndexForest] = field(default_factory=dict)
    cache: SolutionCache = field(default_factory=SolutionCache)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def open(
        cls,
        vertices: str | Path,
        edges: str | Path,
        schema: str | Path | None = None,
        index_files: list[str | Path] = (),
    ) -> "Workspace":
        ws = cls(load_hin(vertices, edges, schema))
        for path in index_files:
            ws.attach(load_index(path))
        return ws

    def attach(self, idx: IndexForest) -> None:
        if idx.fingerprint != self.graph.fingerprint:
            raise IndexError_("index was built for a different graph (fingerprint mismatch)")
        with self._lock:
            have = self.indexes.get(idx.kind)
            if have is None:
                self.indexes[idx.kind] = idx
            else:
                have.entries.update(idx.entries)

    def metapath(self, text: str) -> MetaPath:
        try:
            return parse_metapath(text, self.graph.schema)
        except (MetaPathError, HINError) as e:
            raise QueryError(str(e)) from None

    def index_for(self, kind: str, p: MetaPath) -> IndexForest:
        """The loaded index of ``kind`` covering ``p``, built in memory if absent."""
        with self._lock:
            idx = self.indexes.get(kind)
            if idx is not None and str(p) in idx.entries:
                return idx
            tree = self.indexes.get(IHSC)
            if tree is None or str(p) not in tree.entries:
                fresh = build_ihsc(self.graph, [p])
                if tree is None:
                    self.indexes[IHSC] = tree = fresh
                else:
                    tree.entries.update(fresh.entries)
            if kind == IHSC:
                return tree
            part = build_oihsc(IndexForest(IHSC, {str(p): tree.entries[str(p)]}, tree.fingerprint))
            if idx is None:
                self.indexes[OIHSC] = idx = part
            else:
                idx.entries.update(part.entries)
            return idx

    def vertex(self, q: str | int) -> int:
        try:
            return self.graph.vid(q)
        except (HINError, KeyError, IndexError) as e:
            raise QueryError(f"unknown vertex {q!r}") from e

    def query(
        self,
        algo: str,
        mp: str,
        k: int,
        q: str | int | None = None,
        w: float | None = None,
        parent_mp: str | None = None,
    ) -> list[CommunityResult]:
        """Dispatch one query; a q-probe returns one result, a w-probe any number."""
        if algo not in ALGORITHMS:
            raise QueryError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
        if (q is None) == (w is None):
            raise QueryError("give exactly one of a query vertex (q) or a significance bound (w)")
        if k < 0:
            raise QueryError(f"k must be non-negative, got {k}")
        p = self.metapath(mp)
        if w is not None:
            if algo == "ihsc":
                return query_ihsc_threshold(self.index_for(IHSC, p), p, k, w)
            if algo == "oihsc":
                return query_oihsc_threshold(self.index_for(OIHSC, p), p, k, w)
            raise QueryError("significance-bound queries need an index algorithm (ihsc or oihsc)")
        v = self.vertex(q)
        if self.graph.vtype[v] != p.anchor.ordinal:
            raise QueryError(
                f"vertex {self.graph.names[v]!r} has type {self.graph.type_of(v).name}, "
                f"meta-path {p} is anchored at {p.anchor.name}"
            )
        try:
            if algo == "basic":
                return [basic_peel(self.graph, k, p, v)]
            if algo == "qhsc":
                return [qhsc(self.graph, k, p, v, self.cache)]
            if algo == "aqhsc":
                if parent_mp is None:
                    raise QueryError("aqhsc needs a parent meta-path")
                return [aqhsc(self.graph, k, self.metapath(parent_mp), p, v, self.cache)]
            if algo == "ihsc":
                return [query_ihsc(self.index_for(IHSC, p), p, k, v)]
            return [query_oihsc(self.index_for(OIHSC, p), p, k, v)]
        except (MetaPathError, HINError) as e:
            raise QueryError(str(e)) from None
