import json

import numpy as np
import pytest
from scipy.stats import spearmanr

from hscsearch.hin import HIN
from hscsearch.index.ihsc import build_ihsc
from hscsearch.metapath import full_homo_graph, parse_metapath
from hscsearch.online import qhsc
from hscsearch.workbench.bench import BenchError, BenchReport, run_bench
from hscsearch.workbench.fixture import fix1_records, validate_fixture
from hscsearch.workbench.gen import (
    EdgeSpec,
    GenError,
    GenSpec,
    gen_hin,
    sample_fraction,
    small_hin,
    sweep_hin,
    write_dataset,
)
from hscsearch.workbench.verify import VerifyError, first_violation, verify_hin

# -- fixtures ------------------------------------------------------------------


def test_fix1_passes_validation(fix1):
    report = validate_fixture(fix1)
    assert report.passed, report.lines()
    assert len(report.checks) == 8


def test_fix1_missing_edge_fails_the_edge_check():
    vertices, edges = fix1_records()
    g = HIN.from_records(vertices, [e for e in edges if e != ("a2", "m1")])
    report = validate_fixture(g)
    assert not report.passed
    assert "actor-movie-edges" in report.failures()


def test_empty_graph_fails_everything():
    report = validate_fixture(HIN.from_records([], []))
    assert report.failures() == [c.name for c in report.checks]
    assert not report.passed


def test_fix1_worked_values(fix1):
    p = parse_metapath("A-M-D-M-A", fix1.schema)
    assert qhsc(fix1, 4, p, "a1").f_value == 3
    from hscsearch.index.ihsc import query_ihsc

    w = parse_metapath("A-M-W-M-A", fix1.schema)
    assert query_ihsc(build_ihsc(fix1, [w]), w, 4, fix1.vid("a7")).f_value == 1


# -- generator -----------------------------------------------------------------


def test_generation_is_deterministic(tmp_path):
    spec = GenSpec.movie_like(400, "correlated", seed=1)
    a = write_dataset(gen_hin(spec), tmp_path / "a", spec)
    b = write_dataset(gen_hin(spec), tmp_path / "b", spec)
    for key in ("vertices", "edges", "spec"):
        assert a[key].read_bytes() == b[key].read_bytes()
    other = write_dataset(gen_hin(GenSpec.movie_like(400, "correlated", seed=2)), tmp_path / "c")
    assert other["edges"].read_bytes() != a["edges"].read_bytes()


def test_spec_json_round_trip():
    spec = GenSpec.movie_like(100, "anti-correlated", seed=9)
    assert GenSpec.from_dict(json.loads(spec.to_json())) == spec


@pytest.mark.parametrize(
    "mode, check",
    [("correlated", lambda r: r > 0.5), ("anti-correlated", lambda r: r < -0.5), ("independent", lambda r: abs(r) < 0.1)],
)
def test_significance_modes(mode, check):
    g = gen_hin(GenSpec.movie_like(5000, mode, seed=2))
    assert g.n == 10_000
    anchors = g.vertices_of_type("A")
    sig = [g.sig[v] for v in anchors]
    h = full_homo_graph(g, parse_metapath("A-M-A", g.schema))
    assert check(spearmanr(sig, [g.degree(v) for v in anchors])[0])
    assert check(spearmanr(sig, [len(h.adj[v]) for v in anchors])[0])


@pytest.mark.parametrize(
    "spec, match",
    [
        (GenSpec({"A": 0}, []), "must be positive"),
        (GenSpec({"A": 3, "M": 2}, [EdgeSpec("A", "M", 0)]), "edge count"),
        (GenSpec({"A": 3, "M": 2}, [EdgeSpec("A", "A", 2)]), "itself"),
        (GenSpec({"A": 3}, [EdgeSpec("A", "Z", 2)]), "unknown type"),
        (GenSpec({"A": 3, "M": 2}, [], sig_mode="weird"), "significance mode"),
        (GenSpec({"A": 3, "M": 2}, [EdgeSpec("A", "M", 2, "fancy")]), "attachment model"),
        (GenSpec({}, []), "no vertex types"),
    ],
)
def test_invalid_specs(spec, match):
    with pytest.raises(GenError, match=match):
        gen_hin(spec)


def test_sampling_is_nested_and_keeps_edges():
    g = small_hin(3, anchors=60)
    small, big = sample_fraction(g, 0.3, 5), sample_fraction(g, 0.7, 5)
    assert set(small.names) <= set(big.names)
    assert sample_fraction(g, 1.0, 5) is g
    for a, b in small.edges():
        assert g.index[small.names[b]] in g.neighbors(g.index[small.names[a]])
    with pytest.raises(GenError):
        sample_fraction(g, 0.0, 1)


def test_sweep_family_is_varied():
    sizes = {len(sweep_hin(s).vertices_of_type("A")) for s in range(12)}
    assert len(sizes) > 5 and max(sizes) <= 60


# -- verification sweep ----------------------------------------------------------


@pytest.mark.parametrize("name, paths", [("d2", ["A-M-A"]), ("fix1", ["A-M-A", "A-M-D-M-A", "A-M-W-M-A"])])
def test_fixture_sweeps_pass(request, name, paths):
    g = request.getfixturevalue(name)
    report = verify_hin(g, [parse_metapath(t, g.schema) for t in paths])
    assert report.passed and report.queries > 0
    assert all(c > 0 for c in report.checks.values())


def test_cap_enforced(fix1):
    with pytest.raises(VerifyError, match="exceed the cap"):
        verify_hin(fix1, [parse_metapath("A-M-A", fix1.schema)], cap=3)


def test_corrupted_index_is_caught_with_witness(fix1):
    p = parse_metapath("A-M-D-M-A", fix1.schema)
    ihsc = build_ihsc(fix1, [p])
    lv = ihsc.entry(p).level(4)
    # raise one node's threshold: its answers no longer match the online search
    lv.theta[lv.node_of(fix1.vid("a1"))] += 0.5
    report = verify_hin(fix1, [p], ihsc=ihsc)
    assert not report.passed
    v = report.violation
    assert v.check == "equivalence" and v.metapath == "A-M-D-M-A" and v.k == 4
    assert fix1.names[v.q] in {"a1", "a3", "a4", "a5", "a6"}
    ce = report.counterexample
    assert ce["q"] == fix1.names[v.q] and ce["minimized"] is False
    assert len(ce["vertices"]) == fix1.n


def test_reproducible_violation_is_minimized(monkeypatch):
    from hscsearch.online import CommunityResult
    from hscsearch.workbench import verify

    def shaky_qhsc(g, k, p, q, cache=None):
        r = qhsc(g, k, p, q)
        if len(r) >= 3:
            return CommunityResult(r.vertices, r.f_value + 1, q, k, r.metapath, "qhsc")
        return r

    monkeypatch.setattr(verify, "qhsc", shaky_qhsc)
    g = small_hin(2, anchors=20, movies=8, directors=2, density=0.3)
    p = parse_metapath("A-M-A", g.schema)
    report = verify_hin(g, [p])
    ce = report.counterexample
    assert report.violation.check == "equivalence" and ce["minimized"] is True
    assert len(ce["vertices"]) < g.n
    small = HIN.from_records([tuple(v) for v in ce["vertices"]], [tuple(e) for e in ce["edges"]], schema=g.schema)
    assert first_violation(small, [p]) is not None
    # one-minimal: deleting any other vertex makes the failure disappear
    for name in small.names:
        if name == ce["q"]:
            continue
        rest = small.induced([v for v in range(small.n) if small.names[v] != name])
        if rest.vertices_of_type("A"):
            assert first_violation(rest, [p], only="equivalence") is None, name


def test_bench_rows_and_csv(tmp_path):
    g = small_hin(5, anchors=200, movies=80, directors=5, density=0.05)
    p = parse_metapath("A-M-A", g.schema)
    report = run_bench(g, [p], ks=(2, 4), scales=(0.5, 1.0), queries=10, seed=3)
    assert len(report.rows) == 2 * 2 * 3
    csv_path, seeds = report.write(tmp_path / "bench.csv")
    back = BenchReport.from_csv(csv_path.read_text())
    assert [(r.algorithm, r.k, r.scale, r.queries) for r in back.rows] == [
        (r.algorithm, r.k, r.scale, r.queries) for r in report.rows
    ]
    saved = json.loads(seeds.read_text())
    assert saved["seed"] == 3 and len(saved["queries"]) == 4
    again = run_bench(g, [p], ks=(2, 4), scales=(0.5, 1.0), queries=10, seed=3, algorithms=("ihsc",))
    assert again.query_sets == report.query_sets
    cell = report.cell("qhsc", "A-M-A", 2, 1.0)
    assert cell.mean_size == report.cell("oihsc", "A-M-A", 2, 1.0).mean_size


def test_bench_rejects_foreign_index():
    g = small_hin(5, anchors=40)
    other = small_hin(6, anchors=40)
    p = parse_metapath("A-M-A", g.schema)
    with pytest.raises(BenchError, match="different graph"):
        run_bench(g, [p], ks=(2,), scales=(1.0,), full_index=build_ihsc(other, [p]))


def test_bench_cross_check_catches_disagreement():
    g = small_hin(5, anchors=60)
    p = parse_metapath("A-M-A", g.schema)
    bad = build_ihsc(g, [p])
    for lv in bad.entry(p).levels:
        lv.theta += 1.0
    with pytest.raises(BenchError, match="disagree"):
        run_bench(g, [p], ks=(1,), scales=(1.0,), queries=20, full_index=bad)
    assert np.isfinite(bad.entry(p).level(1).theta).all()
