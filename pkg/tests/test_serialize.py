import struct

import numpy as np
import pytest
from hypothesis import given

from hscsearch.index.ihsc import IHSC, OIHSC, build_ihsc, query_ihsc
from hscsearch.index.oihsc import build_oihsc, query_oihsc
from hscsearch.index.serialize import (
    HEADER_SIZE,
    MAGIC,
    IndexFormatError,
    dumps_index,
    index_stats,
    load_index,
    loads_index,
    save_index,
)
from hscsearch.metapath import parse_metapath
from hscsearch.online import qhsc
from hscsearch.workbench.gen import small_hin

from .strategies import small_hins


@pytest.fixture
def d2_indexes(d2, mp):
    paths = [mp(d2, "A-M-A")]
    ihsc = build_ihsc(d2, paths)
    return ihsc, build_oihsc(ihsc)


def test_round_trip_bytes_identical(d2_indexes):
    for idx in d2_indexes:
        data = dumps_index(idx)
        back = loads_index(data)
        assert back.kind == idx.kind and back.fingerprint == idx.fingerprint
        assert dumps_index(back) == data


def test_rebuild_is_deterministic():
    g = small_hin(4, sig_levels=3)
    paths = [parse_metapath(t, g.schema) for t in ("A-M-A", "A-M-D-M-A")]
    a, b = build_ihsc(g, paths), build_ihsc(g, paths)
    assert dumps_index(a) == dumps_index(b)
    assert dumps_index(build_oihsc(a)) == dumps_index(build_oihsc(b))


def test_queries_unchanged_after_round_trip(d2, d2_indexes):
    ihsc, oihsc = (loads_index(dumps_index(i)) for i in d2_indexes)
    p = "A-M-A"
    for q in d2.vertices_of_type("A"):
        for k in (1, 2, 3):
            want = qhsc(d2, k, parse_metapath(p, d2.schema), q)
            assert query_ihsc(ihsc, p, k, q) == want == query_oihsc(oihsc, p, k, q)


def test_header_layout(d2_indexes):
    data = dumps_index(d2_indexes[1])
    assert data[:6] == MAGIC
    version, kind, _, total = struct.unpack_from("<HBBQ", data, 6)
    assert (version, kind, total) == (1, 1, len(data))
    (count,) = struct.unpack_from("<I", data, HEADER_SIZE)
    assert count == 1


def test_bad_magic(d2_indexes):
    data = dumps_index(d2_indexes[0])
    with pytest.raises(IndexFormatError, match="bad magic"):
        loads_index(b"XXXXXX" + data[6:])


def test_version_mismatch(d2_indexes):
    data = bytearray(dumps_index(d2_indexes[0]))
    struct.pack_into("<H", data, 6, 99)
    with pytest.raises(IndexFormatError, match="version 99"):
        loads_index(bytes(data))


def test_unknown_kind(d2_indexes):
    data = bytearray(dumps_index(d2_indexes[0]))
    data[8] = 7
    with pytest.raises(IndexFormatError, match="kind code 7"):
        loads_index(bytes(data))


@pytest.mark.parametrize("cut", [1, 8, 40])
def test_truncated(d2_indexes, cut):
    data = dumps_index(d2_indexes[0])
    with pytest.raises(IndexFormatError, match="truncated"):
        loads_index(data[:-cut])


def test_truncated_header():
    with pytest.raises(IndexFormatError):
        loads_index(MAGIC + b"\x01")


def test_trailing_bytes(d2_indexes):
    with pytest.raises(IndexFormatError, match="after the checksum"):
        loads_index(dumps_index(d2_indexes[0]) + b"\0")


def test_checksum_failure(d2_indexes):
    data = bytearray(dumps_index(d2_indexes[1]))
    data[HEADER_SIZE + 20] ^= 0xFF
    with pytest.raises(IndexFormatError, match="checksum"):
        loads_index(bytes(data))


def test_file_helpers(tmp_path, d2_indexes):
    path = tmp_path / "d2.idx"
    size = save_index(d2_indexes[0], path)
    assert size == path.stat().st_size
    assert load_index(path).kind == IHSC


def test_stats(d2_indexes):
    ihsc, oihsc = d2_indexes
    (si,) = index_stats(ihsc)
    (so,) = index_stats(oihsc)
    assert (si.metapath, si.node_count, si.stored_vertex_count) == ("A-M-A", 5, 8)
    assert so.kind == OIHSC and so.stored_vertex_count == 4
    assert si.serialized_bytes > 0 and so.serialized_bytes > 0
    assert set(si.to_dict()) == {"metapath", "kind", "node_count", "stored_vertex_count", "serialized_bytes"}


def test_empty_forest_stats(d2):
    idx = build_ihsc(d2, [])
    assert index_stats(idx) == [] == index_stats(build_oihsc(idx))
    assert loads_index(dumps_index(idx)).entries == {}


def test_medium_graph_compressed_is_smaller():
    g = small_hin(11, anchors=300, movies=120, directors=6, density=0.04)
    p = parse_metapath("A-M-D-M-A", g.schema)
    ihsc = build_ihsc(g, [p])
    (si,), (so,) = index_stats(ihsc), index_stats(build_oihsc(ihsc))
    assert so.serialized_bytes < si.serialized_bytes


@given(small_hins())
def test_round_trip_property(g):
    paths = [parse_metapath(t, g.schema) for t in ("A-M-A", "A-M-D-M-A")]
    ihsc = build_ihsc(g, paths)
    for idx in (ihsc, build_oihsc(ihsc)):
        data = dumps_index(idx)
        back = loads_index(data)
        assert dumps_index(back) == data
        for key in idx.metapaths:
            a, b = idx.entries[key], back.entries[key]
            if idx.kind == IHSC:
                for la, lb in zip(a.levels, b.levels):
                    assert np.array_equal(la.end, lb.end) and np.array_equal(la.verts, lb.verts)
            else:
                assert np.array_equal(a.pieces, b.pieces) and np.array_equal(a.ent_vert, b.ent_vert)
