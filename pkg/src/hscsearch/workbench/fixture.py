"""Hand-built fixture graphs and a constraint checker for the movie fixture."""

from __future__ import annotations

from dataclasses import dataclass

from ..hin import HIN
from ..oracle import core_numbers_by_deletion, walk_full_homo_graph, walk_p_neighbors
from ..metapath import MetaPath, MetaPathError, parse_metapath

FIX1_ACTOR_SIG = {"a1": 5.0, "a2": 2.0, "a3": 3.0, "a4": 4.0, "a5": 6.0, "a6": 7.0, "a7": 1.0}

# movie -> (actors, director, writer)
FIX1_MOVIES = {
    "m1": (("a1", "a2"), "d1", "w1"),
    "m2": (("a1", "a5"), "d2", "w2"),
    "m3": (("a3", "a4"), "d2", "w2"),
    "m4": (("a6", "a7"), "d2", "w2"),
    "m5": (("a3",), "d2", "w1"),
}

CLIQUE = ("a1", "a3", "a4", "a5", "a6", "a7")


def fix1_records() -> tuple[list[tuple[str, str, float]], list[tuple[str, str]]]:
    vertices = [(a, "A", s) for a, s in FIX1_ACTOR_SIG.items()]
    vertices += [(m, "M", 1.0) for m in FIX1_MOVIES]
    vertices += [(d, "D", 1.0) for d in ("d1", "d2")]
    vertices += [(w, "W", 1.0) for w in ("w1", "w2")]
    edges = []
    for m, (actors, d, w) in FIX1_MOVIES.items():
        edges += [(a, m) for a in actors]
        edges += [(m, d), (m, w)]
    return vertices, edges


def build_fixture_fix1() -> HIN:
    """Seven actors, five movies, two directors, two writers."""
    vertices, edges = fix1_records()
    return HIN.from_records(vertices, edges)


def build_fixture_d2() -> HIN:
    """Four actors a(1), b(2), c(3), d(4); m1 casts a,b,c and m2 casts b,c,d."""
    vertices = [("a", "A", 1.0), ("b", "A", 2.0), ("c", "A", 3.0), ("d", "A", 4.0)]
    vertices += [("m1", "M", 1.0), ("m2", "M", 1.0)]
    edges = [("a", "m1"), ("b", "m1"), ("c", "m1"), ("b", "m2"), ("c", "m2"), ("d", "m2")]
    return HIN.from_records(vertices, edges)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class FixtureReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip() for c in self.checks]


def _names(g: HIN, ids) -> set[str]:
    return {g.names[v] for v in ids}


def _walk_types(g: HIN, start: int, names: list[str]) -> set[int]:
    frontier = {start}
    for tname in names:
        frontier = {w for x in frontier for w in g.neighbors(x) if g.type_of(w).name == tname}
    return frontier


def validate_fixture(g: HIN) -> FixtureReport:
    """Check the movie fixture's structural constraints with brute-force oracles."""

    def mp(text: str) -> MetaPath | None:
        try:
            return parse_metapath(text, g.schema)
        except MetaPathError:
            return None

    def vid(name: str) -> int | None:
        return g.index.get(name)

    def homo(p: MetaPath | None) -> dict[str, set[str]] | None:
        if p is None:
            return None
        full = walk_full_homo_graph(g, p)
        return {g.names[v]: _names(g, ws) for v, ws in full.items()}

    checks: list[Check] = []
    ama, amdma, amwma = mp("A-M-A"), mp("A-M-D-M-A"), mp("A-M-W-M-A")
    h_ama, h_amdma, h_amwma = homo(ama), homo(amdma), homo(amwma)

    need = [("a1", "m1"), ("a2", "m1"), ("a1", "m2"), ("a5", "m2")]
    missing = [
        f"{a}-{b}" for a, b in need
        if vid(a) is None or vid(b) is None or vid(b) not in g.neighbors(vid(a))
    ]
    checks.append(Check("actor-movie-edges", not missing, f"missing {missing}" if missing else ""))

    if h_ama is None or not h_ama:
        checks.append(Check("ama-no-3-core", False, "A-M-A unavailable"))
    else:
        core = core_numbers_by_deletion(h_ama)
        top = max(core.values(), default=0)
        checks.append(Check("ama-no-3-core", top < 3, f"max core {top}"))

    for label, h in (("amdma", h_amdma), ("amwma", h_amwma)):
        ok = h is not None and all(
            a in h and b in h[a] for i, a in enumerate(CLIQUE) for b in CLIQUE[i + 1 :]
        )
        checks.append(Check(f"{label}-clique", ok))

    a1 = vid("a1")
    if amdma is None or a1 is None:
        checks.append(Check("a1-expansion", False, "A-M-D-M-A or a1 unavailable"))
    else:
        first = [t.name for t in amdma.types[1 : amdma.mid_index + 1]]
        second = [t.name for t in amdma.types[amdma.mid_index + 1 :]]
        leads = _walk_types(g, a1, first)
        below = set().union(*(_walk_types(g, d, second) for d in leads)) if leads else set()
        ok = _names(g, leads) == {"d1", "d2"} and _names(g, below) == set(FIX1_ACTOR_SIG)
        checks.append(Check("a1-expansion", ok, f"leads {sorted(_names(g, leads))}"))

    if h_amwma is None or "a2" not in h_amwma:
        checks.append(Check("a2-amwma-degree", False, "a2 or A-M-W-M-A unavailable"))
        checks.append(Check("amwma-kmax-5", False, "A-M-W-M-A unavailable"))
    else:
        deg = len(h_amwma["a2"])
        checks.append(Check("a2-amwma-degree", 2 <= deg < 3, f"degree {deg}"))
        top = max(core_numbers_by_deletion(h_amwma).values(), default=0)
        checks.append(Check("amwma-kmax-5", top == 5, f"k_max {top}"))

    sig = {g.names[v]: g.sig[v] for v in g.vertices_of_type("A")} if g.schema.has_type("A") else {}
    ok = all(a in sig for a in CLIQUE) and min(sig[a] for a in CLIQUE if a != "a7") == 3.0 and sig["a7"] == 1.0
    checks.append(Check("significance", ok))
    return FixtureReport(checks)


def p_neighbor_names(g: HIN, p: MetaPath, name: str) -> set[str]:
    return _names(g, walk_p_neighbors(g, p, g.vid(name)))
