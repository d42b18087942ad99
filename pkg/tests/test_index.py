import numpy as np
import pytest
from hypothesis import given

from hscsearch.cores import peel_to_k_core
from hscsearch.hin import HIN, Schema, TypeId
from hscsearch.index.ihsc import (
    IHSC,
    OIHSC,
    IndexError_,
    build_ihsc,
    depth_violations,
    query_ihsc,
    query_ihsc_threshold,
)
from hscsearch.index.oihsc import build_oihsc, query_oihsc, query_oihsc_threshold, storage_duplicates
from hscsearch.index.serialize import index_stats
from hscsearch.metapath import full_homo_graph, parse_metapath
from hscsearch.online import NO_CORE, NO_INDEX_ENTRY, qhsc

from .strategies import small_hins


def names(g, ids):
    return {g.names[int(v)] for v in ids}


def chain(g, level):
    """Own-vertex name sets from each root down, for single-path trees."""
    out, node = [], level.roots()
    while node:
        (x,) = node
        out.append(names(g, level.own_vertices(x)))
        node = level.children(x)
    return out


def both(g, paths):
    ihsc = build_ihsc(g, paths)
    return ihsc, build_oihsc(ihsc)


def test_d2_trees(d2, mp):
    p = mp(d2, "A-M-A")
    e = build_ihsc(d2, [p]).entry(p)
    assert e.k_max == 2
    assert chain(d2, e.level(2)) == [{"a"}, {"b", "c", "d"}]
    assert chain(d2, e.level(1)) == [{"a"}, {"b"}, {"c", "d"}]


def test_d2_compressed_storage(d2, mp):
    p = mp(d2, "A-M-A")
    ihsc, oihsc = both(d2, [p])
    o = oihsc.entry(p)
    assert {d2.names[v]: o.storage_level(v) for v in d2.vertices_of_type("A")} == {"a": 2, "b": 2, "c": 2, "d": 2}
    assert storage_duplicates(o) == []
    (si,), (so,) = index_stats(ihsc), index_stats(oihsc)
    assert si.stored_vertex_count == 8 and so.stored_vertex_count == 4
    assert si.kind == IHSC and so.kind == OIHSC


def test_fix1_amwma(fix1, mp):
    p = mp(fix1, "A-M-W-M-A")
    ihsc, oihsc = both(fix1, [p])
    e = ihsc.entry(p)
    assert e.k_max == 5
    a2 = fix1.vid("a2")
    assert [k for k in range(1, 6) if a2 in e.level(k).verts] == [1, 2]
    assert oihsc.entry(p).storage_level(fix1.vid("a1")) == 5
    for idx, query in ((ihsc, query_ihsc), (oihsc, query_oihsc)):
        r1 = query(idx, p, 4, fix1.vid("a1"))
        assert names(fix1, r1.vertices) == {"a1", "a3", "a4", "a5", "a6"} and r1.f_value == 3
        r7 = query(idx, p, 4, fix1.vid("a7"))
        assert names(fix1, r7.vertices) == {"a1", "a3", "a4", "a5", "a6", "a7"} and r7.f_value == 1


def test_edgeless_graph():
    types = (TypeId(0, "A"), TypeId(1, "M"))
    schema = Schema(types, frozenset({frozenset((0, 1))}))
    g = HIN.from_records([("a", "A", 1.0), ("m", "M", 1.0)], [], schema=schema)
    p = parse_metapath("A-M-A", g.schema)
    ihsc, oihsc = both(g, [p])
    assert ihsc.entry(p).k_max == 0 and ihsc.entry(p).levels == []
    assert query_ihsc(ihsc, p, 1, 0).empty_reason == NO_CORE
    assert query_oihsc(oihsc, p, 1, 0).empty_reason == NO_CORE
    assert query_ihsc_threshold(ihsc, p, 1, 0.0) == [] == query_oihsc_threshold(oihsc, p, 1, 0.0)


def test_k_beyond_kmax_and_non_anchor(fix1, mp):
    p = mp(fix1, "A-M-D-M-A")
    ihsc, oihsc = both(fix1, [p])
    for idx, query in ((ihsc, query_ihsc), (oihsc, query_oihsc)):
        assert query(idx, p, 99, fix1.vid("a1")).empty_reason == NO_CORE
        assert query(idx, p, 2, fix1.vid("m1")).empty_reason == NO_INDEX_ENTRY


def test_registration_and_kind_errors(fix1, mp):
    p, other = mp(fix1, "A-M-D-M-A"), mp(fix1, "A-M-A")
    ihsc, oihsc = both(fix1, [p])
    with pytest.raises(IndexError_, match="not registered"):
        query_ihsc(ihsc, other, 1, 0)
    with pytest.raises(IndexError_, match="expected an OIHSC"):
        query_oihsc(ihsc, p, 1, 0)
    with pytest.raises(IndexError_, match="expected an IHSC"):
        query_ihsc(oihsc, p, 1, 0)
    with pytest.raises(IndexError_):
        build_oihsc(oihsc)


def test_disjoint_levels_keep_lower_tree():
    # a triangle (core 2) next to a separate pair (core 1)
    vs = [(f"a{i}", "A", float(i + 1)) for i in range(5)] + [(f"m{j}", "M", 1.0) for j in range(4)]
    es = [("a0", "m0"), ("a1", "m0"), ("a1", "m1"), ("a2", "m1"), ("a2", "m2"), ("a0", "m2"), ("a3", "m3"), ("a4", "m3")]
    g = HIN.from_records(vs, es)
    p = parse_metapath("A-M-A", g.schema)
    ihsc, oihsc = both(g, [p])
    o = oihsc.entry(p)
    assert {g.names[v]: o.storage_level(v) for v in g.vertices_of_type("A")} == {
        "a0": 2, "a1": 2, "a2": 2, "a3": 1, "a4": 1,
    }
    r = query_oihsc(oihsc, p, 1, g.vid("a3"))
    assert names(g, r.vertices) == {"a3", "a4"} and r.f_value == 4.0


def test_threshold_probe_fix1(fix1, mp):
    p = mp(fix1, "A-M-W-M-A")
    ihsc, oihsc = both(fix1, [p])
    got = {(frozenset(names(fix1, r.vertices)), r.f_value) for r in query_ihsc_threshold(ihsc, p, 4, 2.0)}
    assert got == {(frozenset({"a1", "a3", "a4", "a5", "a6"}), 3.0)}
    assert got == {(frozenset(names(fix1, r.vertices)), r.f_value) for r in query_oihsc_threshold(oihsc, p, 4, 2.0)}


@given(small_hins())
def test_index_queries_match_online(g):
    paths = [parse_metapath(t, g.schema) for t in ("A-M-A", "A-M-D-M-A")]
    ihsc, oihsc = both(g, paths)
    for p in paths:
        for q in g.vertices_of_type("A"):
            for k in range(1, 5):
                want = qhsc(g, k, p, q)
                assert query_ihsc(ihsc, p, k, q) == want
                assert query_oihsc(oihsc, p, k, q) == want


@given(small_hins())
def test_tree_invariants(g):
    p = parse_metapath("A-M-A", g.schema)
    e = build_ihsc(g, [p]).entry(p)
    adj = full_homo_graph(g, p).adj
    assert depth_violations(e) == []
    for lv in e.levels:
        # heap order: a parent's threshold is strictly below its children's
        has = lv.parent >= 0
        assert np.all(lv.theta[lv.parent[has]] < lv.theta[has])
        # coverage: the level holds exactly the k-core, each vertex once
        assert sorted(lv.verts.tolist()) == sorted(peel_to_k_core(adj, lv.k))
        # a node's threshold is the minimum significance of its community
        for x in range(lv.node_count):
            assert min(g.sig[v] for v in lv.community(x).tolist()) == lv.theta[x]


@given(small_hins())
def test_compressed_storage_unique(g):
    p = parse_metapath("A-M-D-M-A", g.schema)
    ihsc, oihsc = both(g, [p])
    o = oihsc.entry(p)
    assert storage_duplicates(o) == []
    assert o.stored_vertex_count == len(ihsc.entry(p).core) - sum(1 for c in ihsc.entry(p).core.values() if c == 0)
    (si,), (so,) = index_stats(ihsc), index_stats(oihsc)
    assert so.stored_vertex_count <= si.stored_vertex_count


@given(small_hins())
def test_threshold_probes(g):
    p = parse_metapath("A-M-A", g.schema)
    ihsc, oihsc = both(g, [p])
    e = ihsc.entry(p)
    for lv in e.levels:
        for w in sorted(set(lv.theta.tolist())) + [-1.0, 99.0]:
            got = query_ihsc_threshold(ihsc, p, lv.k, w)
            assert {r.key() for r in got} == {r.key() for r in query_oihsc_threshold(oihsc, p, lv.k, w)}
            covered = set()
            for r in got:
                assert r.f_value >= w
                assert not (covered & r.vertices)
                covered |= r.vertices
                node = lv.node_of(min(r.vertices, key=g.sig.__getitem__))
                par = lv.parent[node]
                assert par < 0 or lv.theta[par] < w
            want = {v for x in range(lv.node_count) if lv.theta[x] >= w for v in lv.own_vertices(x).tolist()}
            assert covered == want
