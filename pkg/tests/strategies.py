"""Hypothesis strategies for small actor/movie/director graphs."""

from hypothesis import strategies as st

from hscsearch.hin import HIN


@st.composite
def small_hins(draw, max_actors=9, max_movies=6, max_directors=3, ties=None, complete=False):
    """A/M/D graphs; a0-m0-d0 is always present so every meta-path parses."""
    na = draw(st.integers(1, max_actors))
    nm = draw(st.integers(1, max_movies))
    nd = draw(st.integers(1, max_directors))
    tied = draw(st.booleans()) if ties is None else ties
    sig_st = st.integers(1, 3).map(float) if tied else st.floats(0, 1, allow_nan=False)
    vertices = [(f"a{i}", "A", draw(sig_st)) for i in range(na)]
    vertices += [(f"m{j}", "M", 1.0) for j in range(nm)]
    vertices += [(f"d{j}", "D", 1.0) for j in range(nd)]
    cast = draw(st.lists(st.tuples(st.integers(0, na - 1), st.integers(0, nm - 1)), max_size=na * nm))
    edges = {(f"a{i}", f"m{j}") for i, j in cast} | {("a0", "m0"), ("m0", "d0")}
    for j in range(nm):
        if complete or draw(st.booleans()):
            edges.add((f"m{j}", f"d{draw(st.integers(0, nd - 1))}"))
    return HIN.from_records(vertices, sorted(edges), type_order=["A", "M", "D"])
