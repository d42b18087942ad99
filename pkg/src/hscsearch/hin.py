"""Typed, immutable heterogeneous information network (HIN) store.

Vertices are interned to dense integer ids in file order. Each vertex has a
type and a finite significance score; edges are undirected, simple, and
always join vertices of different types.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse


class HINError(ValueError):
    """Raised for malformed graph input or invalid graph lookups."""


@dataclass(frozen=True, order=True)
class TypeId:
    ordinal: int
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Schema:
    vertex_types: tuple[TypeId, ...]
    edge_type_pairs: frozenset[frozenset[int]]

    def __post_init__(self) -> None:
        names = [t.name for t in self.vertex_types]
        if len(set(names)) != len(names):
            raise HINError(f"duplicate type names in schema: {names}")
        if [t.ordinal for t in self.vertex_types] != list(range(len(names))):
            raise HINError("type ordinals must be contiguous from 0")
        for pair in self.edge_type_pairs:
            if len(pair) != 2:
                raise HINError("same-type edge pairs are not allowed")
            if any(o >= len(names) for o in pair):
                raise HINError(f"edge pair references undeclared type: {sorted(pair)}")

    @cached_property
    def _by_name(self) -> dict[str, TypeId]:
        return {t.name: t for t in self.vertex_types}

    def type(self, name: str) -> TypeId:
        try:
            return self._by_name[name]
        except KeyError:
            raise HINError(f"unknown vertex type {name!r}") from None

    def has_type(self, name: str) -> bool:
        return name in self._by_name

    def allows(self, a: TypeId | int, b: TypeId | int) -> bool:
        a = a.ordinal if isinstance(a, TypeId) else a
        b = b.ordinal if isinstance(b, TypeId) else b
        return frozenset((a, b)) in self.edge_type_pairs

    def pair_names(self) -> list[str]:
        out = []
        for pair in self.edge_type_pairs:
            a, b = sorted(pair)
            out.append(f"{self.vertex_types[a].name}-{self.vertex_types[b].name}")
        return sorted(out)


@dataclass(frozen=True)
class Vertex:
    id: int
    name: str
    vtype: TypeId
    significance: float


class HIN:
    """Immutable typed graph with per-vertex significance.

    Build one with :func:`load_hin` or :meth:`HIN.from_records`; the
    constructor expects already-validated, deduplicated data.
    """

    def __init__(
        self,
        names: Sequence[str],
        vtypes: Sequence[int],
        sig: Sequence[float],
        nbrs: list[dict[int, tuple[int, ...]]],
        schema: Schema,
    ) -> None:
        self.names = list(names)
        self.vtype = list(vtypes)
        self.sig = [float(s) for s in sig]
        self._nbrs = nbrs
        self.schema = schema
        self.index = {name: i for i, name in enumerate(self.names)}

    # -- construction -------------------------------------------------

    @classmethod
    def from_records(
        cls,
        vertices: Iterable[tuple[str, str, float]],
        edges: Iterable[tuple[str, str]],
        schema: Schema | None = None,
        type_order: Sequence[str] | None = None,
        edge_lines: Sequence[int] | None = None,
        edge_source: str = "edge record",
    ) -> "HIN":
        """Build from ``(name, type, significance)`` and ``(src, dst)`` records.

        Types are numbered in first-seen order unless ``type_order`` or a
        ``schema`` fixes them. Without a schema, the schema is inferred as the
        set of observed endpoint type pairs. ``edge_lines``/``edge_source``
        only affect error messages.
        """
        names: list[str] = []
        vt_names: list[str] = []
        sig: list[float] = []
        index: dict[str, int] = {}
        for lineno, (name, tname, s) in enumerate(vertices, 1):
            if name in index:
                raise HINError(f"vertex record {lineno}: duplicate vertex id {name!r}")
            s = float(s)
            if not math.isfinite(s):
                raise HINError(f"vertex record {lineno}: non-finite significance for {name!r}")
            index[name] = len(names)
            names.append(name)
            vt_names.append(tname)
            sig.append(s)
        if schema is not None:
            types = schema.vertex_types
            by_name = {t.name: t for t in types}
            for lineno, tname in enumerate(vt_names, 1):
                if tname not in by_name:
                    raise HINError(f"vertex record {lineno}: type {tname!r} not in schema")
        else:
            order = list(type_order) if type_order else []
            for tname in vt_names:
                if tname not in order:
                    order.append(tname)
            types = tuple(TypeId(i, t) for i, t in enumerate(order))
            by_name = {t.name: t for t in types}
        vtypes = [by_name[t].ordinal for t in vt_names]

        adj: list[set[int]] = [set() for _ in names]
        seen_pairs: set[frozenset[int]] = set()
        for rec, (a, b) in enumerate(edges):
            lineno = f"{edge_source} {edge_lines[rec] if edge_lines else rec + 1}"
            try:
                u, v = index[a], index[b]
            except KeyError as exc:
                raise HINError(f"{lineno}: unknown vertex id {exc.args[0]!r}") from None
            if vtypes[u] == vtypes[v]:
                raise HINError(
                    f"{lineno}: same-type edge {a!r}-{b!r} "
                    f"(type {vt_names[u]!r})"
                )
            pair = frozenset((vtypes[u], vtypes[v]))
            if schema is not None and pair not in schema.edge_type_pairs:
                raise HINError(
                    f"{lineno}: type pair {vt_names[u]}-{vt_names[v]} not in schema"
                )
            seen_pairs.add(pair)
            adj[u].add(v)
            adj[v].add(u)
        if schema is None:
            schema = Schema(types, frozenset(seen_pairs))

        nbrs: list[dict[int, tuple[int, ...]]] = []
        for nb in adj:
            by_type: dict[int, list[int]] = {}
            for w in sorted(nb):
                by_type.setdefault(vtypes[w], []).append(w)
            nbrs.append({t: tuple(ws) for t, ws in by_type.items()})
        return cls(names, vtypes, sig, nbrs, schema)

    # -- basic reads --------------------------------------------------

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n(self) -> int:
        return len(self.names)

    def vertex(self, v: int) -> Vertex:
        self._check(v)
        return Vertex(v, self.names[v], self.schema.vertex_types[self.vtype[v]], self.sig[v])

    def type_of(self, v: int) -> TypeId:
        self._check(v)
        return self.schema.vertex_types[self.vtype[v]]

    def vid(self, name: str | int) -> int:
        """Resolve a vertex name (or an already-dense id) to its dense id."""
        if isinstance(name, (int, np.integer)):
            self._check(int(name))
            return int(name)
        try:
            return self.index[name]
        except KeyError:
            raise HINError(f"unknown vertex id {name!r}") from None

    def neighbors(self, v: int) -> list[int]:
        self._check(v)
        out: list[int] = []
        for ws in self._nbrs[v].values():
            out.extend(ws)
        out.sort()
        return out

    def neighbors_of_type(self, v: int, t: TypeId | int | str) -> tuple[int, ...]:
        self._check(v)
        return self._nbrs[v].get(self._ordinal(t), ())

    def degree(self, v: int) -> int:
        return sum(len(ws) for ws in self._nbrs[v].values())

    @cached_property
    def members(self) -> dict[int, list[int]]:
        """Vertex ids of each type ordinal, ascending."""
        out: dict[int, list[int]] = {t.ordinal: [] for t in self.schema.vertex_types}
        for v, t in enumerate(self.vtype):
            out[t].append(v)
        return out

    def vertices_of_type(self, t: TypeId | int | str) -> list[int]:
        return self.members[self._ordinal(t)]

    @cached_property
    def local_index(self) -> np.ndarray:
        """Position of each vertex within its own type's member list."""
        loc = np.empty(self.n, dtype=np.int64)
        for ids in self.members.values():
            loc[ids] = np.arange(len(ids))
        return loc

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``."""
        for u, by_type in enumerate(self._nbrs):
            for ws in by_type.values():
                for w in ws:
                    if u < w:
                        yield u, w

    @property
    def edge_count(self) -> int:
        return sum(self.degree(v) for v in range(self.n)) // 2

    def type_block(self, s: TypeId | int | str, t: TypeId | int | str) -> sparse.csr_matrix:
        """0/1 sparse adjacency from type ``s`` vertices to type ``t`` vertices.

        Rows and columns use the per-type local indices.
        """
        so, to = self._ordinal(s), self._ordinal(t)
        cached = self._blocks.get((so, to))
        if cached is not None:
            return cached.copy()
        rows: list[int] = []
        cols: list[int] = []
        loc = self.local_index
        for i, v in enumerate(self.members[so]):
            ws = self._nbrs[v].get(to, ())
            rows.extend([i] * len(ws))
            cols.extend(ws)
        data = np.ones(len(rows), dtype=np.int8)
        c = loc[np.asarray(cols, dtype=np.int64)] if cols else np.zeros(0, dtype=np.int64)
        shape = (len(self.members[so]), len(self.members[to]))
        m = sparse.csr_matrix((data, (np.asarray(rows, dtype=np.int64), c)), shape=shape)
        self._blocks[(so, to)] = m
        return m.copy()

    @cached_property
    def _blocks(self) -> dict[tuple[int, int], sparse.csr_matrix]:
        return {}

    @cached_property
    def derived(self) -> dict:
        """Memo for structures computed from this (immutable) graph."""
        return {}

    # -- derived graphs -----------------------------------------------

    def induced(self, keep: Iterable[int]) -> "HIN":
        """Sub-HIN on the given vertices; edges kept when both ends are kept.

        Ids are re-densified in ascending original order; names are preserved.
        """
        keep_sorted = sorted(set(keep))
        remap = {v: i for i, v in enumerate(keep_sorted)}
        nbrs: list[dict[int, tuple[int, ...]]] = []
        for v in keep_sorted:
            by_type = {}
            for t, ws in self._nbrs[v].items():
                kept = tuple(remap[w] for w in ws if w in remap)
                if kept:
                    by_type[t] = kept
            nbrs.append(by_type)
        return HIN(
            [self.names[v] for v in keep_sorted],
            [self.vtype[v] for v in keep_sorted],
            [self.sig[v] for v in keep_sorted],
            nbrs,
            self.schema,
        )

    def with_significance(self, sig: Sequence[float]) -> "HIN":
        if len(sig) != self.n:
            raise HINError("significance vector length mismatch")
        if not all(math.isfinite(float(s)) for s in sig):
            raise HINError("non-finite significance")
        return HIN(self.names, self.vtype, sig, self._nbrs, self.schema)

    @cached_property
    def fingerprint(self) -> bytes:
        """16-byte digest of names, types, significances and edges."""
        h = hashlib.blake2b(digest_size=16)
        for name, t, s in zip(self.names, self.vtype, self.sig):
            h.update(name.encode())
            h.update(struct.pack("<Hd", t, s))
        for u, w in self.edges():
            h.update(struct.pack("<II", u, w))
        return h.digest()

    def check_invariants(self) -> None:
        """Full scan of symmetry, type-pair and ordering invariants."""
        for u, by_type in enumerate(self._nbrs):
            for t, ws in by_type.items():
                if list(ws) != sorted(set(ws)):
                    raise HINError(f"neighbor list of {u} not sorted/unique")
                for w in ws:
                    if self.vtype[w] != t:
                        raise HINError(f"neighbor {w} of {u} filed under wrong type")
                    if not self.schema.allows(self.vtype[u], t):
                        raise HINError(f"edge {u}-{w} type pair not in schema")
                    if u not in self._nbrs[w].get(self.vtype[u], ()):
                        raise HINError(f"asymmetric adjacency {u}->{w}")

    # -- helpers ------------------------------------------------------

    def _ordinal(self, t: TypeId | int | str) -> int:
        if isinstance(t, TypeId):
            o = t.ordinal
        elif isinstance(t, str):
            o = self.schema.type(t).ordinal
        else:
            o = int(t)
        if not 0 <= o < len(self.schema.vertex_types):
            raise HINError(f"unknown type ordinal {o}")
        return o

    def _check(self, v: int) -> None:
        if not 0 <= v < len(self.names):
            raise HINError(f"unknown vertex id {v}")

    def __repr__(self) -> str:
        types = ",".join(t.name for t in self.schema.vertex_types)
        return f"HIN(n={self.n}, m={self.edge_count}, types=[{types}])"


# -- file I/O ---------------------------------------------------------------

def _records(path: Path) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            yield lineno, [f.strip() for f in s.split("\t")] if "\t" in s else s.split()


def read_schema(path: str | Path, type_names: Sequence[str] | None = None) -> Schema:
    """Parse a schema file with one ``<type>-<type>`` pair per line."""
    pairs: list[tuple[str, str]] = []
    order: list[str] = list(type_names or [])
    for lineno, fields in _records(Path(path)):
        if len(fields) != 1 or fields[0].count("-") != 1:
            raise HINError(f"{path}:{lineno}: expected '<type>-<type>'")
        a, b = fields[0].split("-")
        if a == b:
            raise HINError(f"{path}:{lineno}: same-type pair {a}-{b}")
        for t in (a, b):
            if t not in order:
                order.append(t)
        pairs.append((a, b))
    types = tuple(TypeId(i, t) for i, t in enumerate(order))
    idx = {t: i for i, t in enumerate(order)}
    return Schema(types, frozenset(frozenset((idx[a], idx[b])) for a, b in pairs))


def load_hin(
    vertex_path: str | Path,
    edge_path: str | Path,
    schema_path: str | Path | None = None,
) -> HIN:
    """Load vertex and edge files (whitespace/TAB separated, ``#`` comments)."""
    vertex_path, edge_path = Path(vertex_path), Path(edge_path)

    def vrecs() -> Iterator[tuple[str, str, float]]:
        for lineno, fields in _records(vertex_path):
            if len(fields) != 3:
                raise HINError(f"{vertex_path}:{lineno}: expected 3 fields, got {len(fields)}")
            try:
                s = float(fields[2])
            except ValueError:
                raise HINError(f"{vertex_path}:{lineno}: bad significance {fields[2]!r}") from None
            if not math.isfinite(s):
                raise HINError(f"{vertex_path}:{lineno}: non-finite significance")
            yield fields[0], fields[1], s

    vertices = list(vrecs())
    type_order: list[str] = []
    for _, t, _ in vertices:
        if t not in type_order:
            type_order.append(t)

    edges: list[tuple[str, str]] = []
    lines: list[int] = []
    for lineno, fields in _records(edge_path):
        if len(fields) != 2:
            raise HINError(f"{edge_path}:{lineno}: expected 2 fields, got {len(fields)}")
        edges.append((fields[0], fields[1]))
        lines.append(lineno)

    schema = None
    if schema_path is not None:
        declared = read_schema(schema_path, type_order)
        missing = set(type_order) - {t.name for t in declared.vertex_types}
        if missing:
            raise HINError(f"vertex types not declared in schema: {sorted(missing)}")
        schema = declared
    return HIN.from_records(
        vertices, edges, schema=schema, type_order=type_order,
        edge_lines=lines, edge_source=f"{edge_path} line",
    )


def dump_hin(g: HIN, vertex_path: str | Path, edge_path: str | Path) -> None:
    """Write ``g`` in the loader's format; reloading yields an identical HIN."""
    with open(vertex_path, "w", encoding="utf-8") as fh:
        for name, t, s in zip(g.names, g.vtype, g.sig):
            fh.write(f"{name}\t{g.schema.vertex_types[t].name}\t{s!r}\n")
    with open(edge_path, "w", encoding="utf-8") as fh:
        for u, w in g.edges():
            fh.write(f"{g.names[u]}\t{g.names[w]}\n")


def same_hin(a: HIN, b: HIN) -> bool:
    """Structural equality: names, types, significances and edge sets."""
    if a.names != b.names or a.sig != b.sig:
        return False
    ta = [a.schema.vertex_types[t].name for t in a.vtype]
    tb = [b.schema.vertex_types[t].name for t in b.vtype]
    return ta == tb and set(a.edges()) == set(b.edges())
