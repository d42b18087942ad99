"""Binary index files: deterministic little-endian layout with a checksum.

The layout is documented field by field in FORMAT.md at the repository root.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..hin import TypeId
from ..metapath import MetaPath
from . import kernels
from .ihsc import IHSC, OIHSC, IndexError_, IndexForest, LevelTree, MetaPathIndex
from .oihsc import LineageIndex

MAGIC = b"HSCIDX"
VERSION = 1
KINDS = {IHSC: 0, OIHSC: 1}
LEVEL_LIMIT = 0xFFFF
HEADER_SIZE = len(MAGIC) + 12 + 16


class IndexFormatError(IndexError_):
    """The bytes are not a readable index file."""


def _checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=8).digest()


class _Writer:
    def __init__(self) -> None:
        self.parts: list[bytes] = []

    def pack(self, fmt: str, *values) -> None:
        self.parts.append(struct.pack("<" + fmt, *values))

    def array(self, a: np.ndarray, dtype: str) -> None:
        self.parts.append(np.ascontiguousarray(a, dtype=dtype).tobytes())

    def text(self, s: str) -> None:
        b = s.encode("utf-8")
        self.pack("H", len(b))
        self.parts.append(b)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes, pos: int = 0, end: int | None = None) -> None:
        self.data = data
        self.pos = pos
        self.end = len(data) if end is None else end

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > self.end:
            raise IndexFormatError("index file is truncated")
        b = self.data[self.pos : self.pos + n]
        self.pos += n
        return b

    def unpack(self, fmt: str):
        s = struct.Struct("<" + fmt)
        return s.unpack(self.take(s.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).astype(dt.newbyteorder("="))

    def text(self) -> str:
        (n,) = self.unpack("H")
        return self.take(n).decode("utf-8")


def _check_levels(k: int) -> None:
    if k > LEVEL_LIMIT:
        raise IndexError_(f"k_max {k} exceeds the format's 16-bit level field")


def _write_anchors(w: _Writer, ids: np.ndarray, core: np.ndarray) -> None:
    w.pack("I", ids.size)
    w.array(ids, "<i4")
    w.array(core, "<u2")


def _ihsc_block(e: MetaPathIndex) -> bytes:
    _check_levels(e.k_max)
    w = _Writer()
    ids = np.array(sorted(e.core), dtype=np.int64)
    w.pack("I", e.k_max)
    _write_anchors(w, ids, np.array([e.core[v] for v in ids.tolist()], dtype=np.int64))
    for lv in e.levels:
        w.pack("II", lv.node_count, lv.verts.size)
        w.array(lv.verts, "<i4")
        w.array(lv.theta, "<f8")
        w.array(lv.own, "<u4")
        w.array(lv.parent, "<i4")
    return w.getvalue()


def _oihsc_block(e: LineageIndex) -> bytes:
    _check_levels(e.k_max)
    w = _Writer()
    n_lin = e.lineage_count
    w.pack("IIII", e.k_max, n_lin, e.pieces.shape[0], e.ent_vert.size)
    _write_anchors(w, e.kmap_ids, e.kmap_k)
    w.array(e.theta, "<f8")
    w.array(e.k_hi, "<u2")
    w.array(e.k_lo, "<u2")
    w.array(e.absorber, "<i4")
    w.array(np.bincount(e.pieces[:, 0], minlength=n_lin), "<u4")
    w.array(e.pieces[:, 1], "<u2")
    w.array(e.pieces[:, 2], "<u2")
    w.array(e.pieces[:, 3], "<i4")
    w.array(np.diff(e.ent_ptr), "<u4")
    w.array(e.ent_vert, "<i4")
    w.array(e.ent_level, "<u2")
    return w.getvalue()


def _write_metapath(w: _Writer, p: MetaPath) -> None:
    w.pack("B", len(p.types))
    for t in p.types:
        w.pack("H", t.ordinal)
        w.text(t.name)


def _read_metapath(r: _Reader) -> MetaPath:
    (count,) = r.unpack("B")
    types = []
    for _ in range(count):
        (ordinal,) = r.unpack("H")
        types.append(TypeId(ordinal, r.text()))
    return MetaPath(tuple(types))


def dumps_index(idx: IndexForest) -> bytes:
    if idx.kind not in KINDS:
        raise IndexError_(f"unknown index kind {idx.kind!r}")
    blocks = []
    for key in idx.metapaths:
        e = idx.entries[key]
        blocks.append(_ihsc_block(e) if idx.kind == IHSC else _oihsc_block(e))
    w = _Writer()
    w.pack("I", len(blocks))
    for key, block in zip(idx.metapaths, blocks):
        _write_metapath(w, idx.entries[key].metapath)
        w.pack("Q", len(block))
    body = w.getvalue() + b"".join(blocks)
    total = HEADER_SIZE + len(body) + 8
    head = MAGIC + struct.pack("<HBBQ", VERSION, KINDS[idx.kind], 0, total)
    payload = head + bytes(idx.fingerprint).ljust(16, b"\0")[:16] + body
    return payload + _checksum(payload)


def _read_anchors(r: _Reader) -> tuple[np.ndarray, np.ndarray]:
    (n,) = r.unpack("I")
    ids = r.array("<i4", n).astype(np.int64)
    return ids, r.array("<u2", n).astype(np.int64)


def _read_ihsc(r: _Reader, p: MetaPath) -> MetaPathIndex:
    (kmax,) = r.unpack("I")
    ids, core = _read_anchors(r)
    levels = []
    for k in range(1, kmax + 1):
        nn, m = r.unpack("II")
        verts = r.array("<i4", m).astype(np.int64)
        theta = r.array("<f8", nn)
        own = r.array("<u4", nn).astype(np.int64)
        parent = r.array("<i4", nn).astype(np.int64)
        if int(own.sum()) != m or (parent >= np.arange(nn)).any():
            raise IndexFormatError(f"level {k} of {p} is inconsistent")
        start = np.concatenate([[0], np.cumsum(own)[:-1]]).astype(np.int64)
        end = kernels.subtree_ends(parent, start, own)
        levels.append(LevelTree(k, verts, start, own, end, theta, parent))
    return MetaPathIndex(p, levels, dict(zip(ids.tolist(), core.tolist()))).prepare()


def _read_oihsc(r: _Reader, p: MetaPath) -> LineageIndex:
    kmax, n_lin, n_pieces, n_ent = r.unpack("IIII")
    ids, khat = _read_anchors(r)
    theta = r.array("<f8", n_lin)
    k_hi = r.array("<u2", n_lin).astype(np.int64)
    k_lo = r.array("<u2", n_lin).astype(np.int64)
    absorber = r.array("<i4", n_lin).astype(np.int64)
    per = r.array("<u4", n_lin).astype(np.int64)
    lo = r.array("<u2", n_pieces).astype(np.int64)
    hi = r.array("<u2", n_pieces).astype(np.int64)
    par = r.array("<i4", n_pieces).astype(np.int64)
    counts = r.array("<u4", n_lin).astype(np.int64)
    verts = r.array("<i4", n_ent).astype(np.int64)
    levels = r.array("<u2", n_ent).astype(np.int64)
    if int(per.sum()) != n_pieces or int(counts.sum()) != n_ent:
        raise IndexFormatError(f"lineage table of {p} is inconsistent")
    lin = np.repeat(np.arange(n_lin, dtype=np.int64), per)
    return LineageIndex(
        metapath=p,
        k_max=kmax,
        theta=theta,
        k_hi=k_hi,
        k_lo=k_lo,
        absorber=absorber,
        pieces=np.stack([lin, lo, hi, par], axis=1) if n_pieces else np.zeros((0, 4), np.int64),
        ent_ptr=np.concatenate([[0], np.cumsum(counts)]).astype(np.int64),
        ent_vert=verts,
        ent_level=levels,
        kmap_ids=ids,
        kmap_k=khat,
    ).prepare()


def loads_index(data: bytes) -> IndexForest:
    data = bytes(data)
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise IndexFormatError("not an index file (bad magic)")
    r = _Reader(data, len(MAGIC))
    version, kind_code, _, total = r.unpack("HBBQ")
    if version != VERSION:
        raise IndexFormatError(f"unsupported index format version {version}")
    kinds = {v: k for k, v in KINDS.items()}
    if kind_code not in kinds:
        raise IndexFormatError(f"unknown index kind code {kind_code}")
    if len(data) < total:
        raise IndexFormatError(f"index file is truncated ({len(data)} of {total} bytes)")
    if len(data) > total:
        raise IndexFormatError("unexpected bytes after the checksum")
    payload, digest = data[:-8], data[-8:]
    r = _Reader(payload, r.pos)
    if _checksum(payload) != digest:
        raise IndexFormatError("checksum mismatch (file is corrupt or truncated)")
    fingerprint = r.take(16)
    (count,) = r.unpack("I")
    table = [(_read_metapath(r), r.unpack("Q")[0]) for _ in range(count)]
    entries: dict[str, object] = {}
    kind = kinds[kind_code]
    for p, length in table:
        block = _Reader(payload, r.pos, r.pos + length)
        if block.end > len(payload):
            raise IndexFormatError("index file is truncated")
        entries[str(p)] = _read_ihsc(block, p) if kind == IHSC else _read_oihsc(block, p)
        if block.pos != block.end:
            raise IndexFormatError(f"block for {p} has trailing bytes")
        r.pos = block.end
    if r.pos != len(payload):
        raise IndexFormatError("unexpected bytes after the last block")
    return IndexForest(kind, entries, fingerprint)


def save_index(idx: IndexForest, path: str | Path) -> int:
    data = dumps_index(idx)
    Path(path).write_bytes(data)
    return len(data)


def load_index(path: str | Path) -> IndexForest:
    return loads_index(Path(path).read_bytes())


@dataclass(frozen=True)
class IndexStats:
    metapath: str
    kind: str
    node_count: int
    stored_vertex_count: int
    serialized_bytes: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def index_stats(idx: IndexForest) -> list[IndexStats]:
    """Per meta-path node count, stored vertices and serialized block size.

    For the compressed kind, nodes are lineages (virtual ones included).
    """
    out = []
    for key in idx.metapaths:
        e = idx.entries[key]
        if idx.kind == IHSC:
            nodes = sum(lv.node_count for lv in e.levels)
            stored = sum(int(lv.verts.size) for lv in e.levels)
            size = len(_ihsc_block(e))
        else:
            nodes, stored, size = e.lineage_count, e.stored_vertex_count, len(_oihsc_block(e))
        out.append(IndexStats(key, idx.kind, nodes, stored, size))
    return out
