import pytest
from hypothesis import given

from hscsearch.metapath import (
    MetaPathError,
    all_metapaths,
    compute_homo_with_cache,
    full_homo_graph,
    get_homo_graph,
    is_sub_metapath,
    nesting_certified,
    p_neighbors,
    parse_metapath,
)
from hscsearch.online import qhsc
from hscsearch.oracle import walk_full_homo_graph, walk_homo_graph, walk_p_neighbors

from .strategies import small_hins


def names(g, ids):
    return {g.names[v] for v in ids}


def test_parse_short_and_long(fix1):
    p = parse_metapath("A-M-A", fix1.schema)
    assert p.names == ("A", "M", "A") and p.anchor.name == "A" and p.lead.name == "M"
    q = parse_metapath("A-M-D-M-A", fix1.schema)
    assert q.lead.name == "D" and len(q.segments) == 4 and q.mid_index == 2
    assert parse_metapath("AMDMA", fix1.schema) == q


@pytest.mark.parametrize(
    "text, match",
    [
        ("A-M-W", "asymmetric"),
        ("A-M", "at least 3"),
        ("A-Q-A", "unknown"),
        ("A-D-A", "not an edge type pair"),
        ("A--A", "empty type name"),
    ],
)
def test_parse_errors(fix1, text, match):
    with pytest.raises(MetaPathError, match=match):
        parse_metapath(text, fix1.schema)


def test_sub_metapath_embeddings(fix1, mp):
    ama, amdma, amwma = mp(fix1, "A-M-A"), mp(fix1, "A-M-D-M-A"), mp(fix1, "A-M-W-M-A")
    assert is_sub_metapath(ama, amdma).embedding == (0, 1, 4)
    assert is_sub_metapath(amdma, amdma).embedding == (0, 1, 2, 3, 4)
    assert is_sub_metapath(amwma, amdma) is None
    assert is_sub_metapath(amdma, ama) is None


def test_fix1_p_neighbors(fix1, mp):
    a1, a7 = fix1.vid("a1"), fix1.vid("a7")
    assert {"a2", "a5"} <= names(fix1, p_neighbors(fix1, mp(fix1, "A-M-A"), a1))
    assert names(fix1, p_neighbors(fix1, mp(fix1, "A-M-D-M-A"), a7)) == {"a1", "a3", "a4", "a5", "a6"}


def test_fix1_homo_graph_expansion(fix1, mp):
    h = get_homo_graph(fix1, mp(fix1, "A-M-D-M-A"), fix1.vid("a1"))
    assert names(fix1, h.vertices) == {f"a{i}" for i in range(1, 8)}
    assert h.stats["ancestors"] == 2


def test_isolated_anchor():
    from hscsearch.hin import HIN

    g = HIN.from_records([("a", "A", 1), ("b", "A", 2), ("m", "M", 1)], [("b", "m")])
    h = get_homo_graph(g, parse_metapath("A-M-A", g.schema), 0)
    assert h.adj == {0: ()}


def test_wrong_anchor_type(fix1, mp):
    with pytest.raises(MetaPathError, match="anchored at A"):
        get_homo_graph(fix1, mp(fix1, "A-M-A"), fix1.vid("m1"))


def test_cached_expansion_restricted_to_solution_space(fix1, mp):
    amdma, ama = mp(fix1, "A-M-D-M-A"), mp(fix1, "A-M-A")
    a1 = fix1.vid("a1")
    space = qhsc(fix1, 4, amdma, a1).vertices
    assert names(fix1, space) == {"a1", "a3", "a4", "a5", "a6"}
    h = compute_homo_with_cache(fix1, ama, a1, space)
    assert h.vertices <= space
    for v, ws in h.adj.items():
        assert set(ws) == walk_p_neighbors(fix1, ama, v) & space
    single = compute_homo_with_cache(fix1, ama, a1, {a1})
    assert single.adj == {a1: ()}
    with pytest.raises(MetaPathError, match="outside the solution space"):
        compute_homo_with_cache(fix1, ama, a1, {fix1.vid("a2")})


def test_all_metapaths_are_valid(fix1):
    paths = {str(p) for p in all_metapaths(fix1.schema, 5)}
    assert {"A-M-A", "A-M-D-M-A", "M-A-M", "D-M-D"} <= paths
    for text in paths:
        parse_metapath(text, fix1.schema)


@given(small_hins())
def test_p_neighbors_match_walks(g):
    for text in ("A-M-A", "A-M-D-M-A"):
        p = parse_metapath(text, g.schema)
        for v in g.vertices_of_type("A"):
            nb = p_neighbors(g, p, v)
            assert nb == walk_p_neighbors(g, p, v)
            for u in nb:
                assert v in p_neighbors(g, p, u)


@given(small_hins())
def test_homo_graph_matches_closure_oracle(g):
    for text in ("A-M-A", "A-M-D-M-A"):
        p = parse_metapath(text, g.schema)
        full = full_homo_graph(g, p)
        assert {v: set(ws) for v, ws in full.adj.items()} == walk_full_homo_graph(g, p)
        for q in g.vertices_of_type("A"):
            h = get_homo_graph(g, p, q)
            ref = walk_homo_graph(g, p, q)
            assert {v: set(ws) for v, ws in h.adj.items()} == ref
            unrestricted = compute_homo_with_cache(g, p, q, g.vertices_of_type("A"))
            assert unrestricted.adj == h.adj


@given(small_hins())
def test_superset_of_every_community(g):
    p = parse_metapath("A-M-A", g.schema)
    for q in g.vertices_of_type("A"):
        h = get_homo_graph(g, p, q)
        for k in range(0, 4):
            assert qhsc(g, k, p, q).vertices <= h.vertices


@given(small_hins(complete=True))
def test_child_closure_nested_in_parent(g):
    child, parent = parse_metapath("A-M-A", g.schema), parse_metapath("A-M-D-M-A", g.schema)
    assert nesting_certified(g, is_sub_metapath(child, parent))
    for q in g.vertices_of_type("A"):
        assert get_homo_graph(g, child, q).vertices <= get_homo_graph(g, parent, q).vertices
