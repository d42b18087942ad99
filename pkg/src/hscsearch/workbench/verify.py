"""Exhaustive cross-checks of every search path on small graphs.

For each meta-path, anchor q and k the four search paths (reference peel,
QHSC, both indexes) must return the same set and f. On top of that the sweep
checks structural properties of the answers:

* ``f-non-increasing``: raising k never raises f for the same q;
* ``laminarity``: at one (p, k) any two communities are nested or disjoint;
* ``depth``: a vertex's tree depth never grows with k;
* ``storage``: the compressed index stores each vertex exactly once.

The first violation stops the sweep. When it reproduces on a freshly built
index the graph is shrunk vertex by vertex while the same check keeps failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..hin import HIN
from ..index.ihsc import IndexForest, build_ihsc, depth_violations, query_ihsc
from ..index.oihsc import build_oihsc, query_oihsc, storage_duplicates
from ..metapath import MetaPath
from ..online import CommunityResult, basic_peel, qhsc

CHECKS = ("equivalence", "f-non-increasing", "laminarity", "depth", "storage")


class VerifyError(ValueError):
    pass


@dataclass
class Violation:
    check: str
    metapath: str
    k: int
    q: int | None
    detail: str
    other: int | None = None

    def describe(self, g: HIN) -> str:
        def name(v):
            return None if v is None else g.names[v]

        extra = f" other={name(self.other)}" if self.other is not None else ""
        return f"{self.check} violated at (q={name(self.q)}, k={self.k}, p={self.metapath}){extra}: {self.detail}"


@dataclass
class VerifyReport:
    queries: int = 0
    checks: dict[str, int] = field(default_factory=lambda: dict.fromkeys(CHECKS, 0))
    violation: Violation | None = None
    counterexample: dict | None = None

    @property
    def passed(self) -> bool:
        return self.violation is None

    def merge(self, other: "VerifyReport") -> None:
        self.queries += other.queries
        for key, c in other.checks.items():
            self.checks[key] = self.checks.get(key, 0) + c
        if self.violation is None:
            self.violation, self.counterexample = other.violation, other.counterexample


def _results(g, k, p, q, ihsc, oihsc) -> dict[str, CommunityResult]:
    return {
        "basic": basic_peel(g, k, p, q),
        "qhsc": qhsc(g, k, p, q),
        "ihsc": query_ihsc(ihsc, p, k, q),
        "oihsc": query_oihsc(oihsc, p, k, q),
    }


def _disagreement(res: dict[str, CommunityResult]) -> str | None:
    ref = res["basic"].key()
    wrong = [a for a, r in res.items() if r.key() != ref]
    if not wrong:
        return None
    parts = [f"{a}: size={len(r)} f={r.f_value}" for a, r in res.items()]
    return "; ".join(parts)


def _sweep_metapath(
    g: HIN, p: MetaPath, ihsc: IndexForest, oihsc: IndexForest, only: str | None, report: VerifyReport
) -> Violation | None:
    mp = str(p)
    want = (lambda c: True) if only is None else (lambda c: c == only)
    entry = ihsc.entry(p)
    if want("depth"):
        report.checks["depth"] += 1
        bad = depth_violations(entry)
        if bad:
            v, k, d_hi, d_lo = bad[0]
            return Violation("depth", mp, k, v, f"depth {d_hi} at k={k} exceeds depth {d_lo} at k={k - 1}")
    if want("storage"):
        report.checks["storage"] += 1
        dup = storage_duplicates(oihsc.entry(p))
        if dup:
            return Violation("storage", mp, 0, dup[0], "vertex is not stored exactly once")
    anchors = g.vertices_of_type(p.anchor)
    per_k: dict[int, dict[frozenset, int]] = {}
    for q in anchors:
        prev = None
        # every k up to one past q's core number; beyond that all paths are empty
        for k in range(1, entry.core.get(q, 0) + 2):
            if only is None or only == "equivalence":
                res = _results(g, k, p, q, ihsc, oihsc)
                report.queries += 1
                report.checks["equivalence"] += 1
                bad = _disagreement(res)
                if bad:
                    return Violation("equivalence", mp, k, q, bad)
                r = res["ihsc"]
            else:
                r = query_ihsc(ihsc, p, k, q)
            if want("f-non-increasing"):
                report.checks["f-non-increasing"] += 1
                if prev is not None and prev.is_empty and not r.is_empty:
                    return Violation("f-non-increasing", mp, k, q, "empty at a smaller k but not at this k")
                if prev is not None and not r.is_empty and r.f_value > prev.f_value:
                    return Violation(
                        "f-non-increasing", mp, k, q, f"f rose from {prev.f_value} at k={k - 1} to {r.f_value}"
                    )
            if not r.is_empty:
                per_k.setdefault(k, {}).setdefault(r.vertices, q)
            prev = r
    if want("laminarity"):
        for k, comms in sorted(per_k.items()):
            sets = sorted(comms, key=len)
            for i, a in enumerate(sets):
                for b in sets[i + 1 :]:
                    report.checks["laminarity"] += 1
                    if a & b and not a <= b:
                        return Violation(
                            "laminarity", mp, k, comms[a], "communities overlap without nesting", comms[b]
                        )
    return None


def first_violation(
    g: HIN,
    metapaths: list[MetaPath],
    ihsc: IndexForest | None = None,
    only: str | None = None,
    report: VerifyReport | None = None,
    oihsc: IndexForest | None = None,
) -> Violation | None:
    """Sweep with the given indexes, building any that are missing from ``g``."""
    report = report if report is not None else VerifyReport()
    fresh = None
    if ihsc is None or oihsc is None:
        fresh = build_ihsc(g, metapaths)
    ihsc = ihsc if ihsc is not None else fresh
    oihsc = oihsc if oihsc is not None else build_oihsc(fresh)
    for p in metapaths:
        v = _sweep_metapath(g, p, ihsc, oihsc, only, report)
        if v is not None:
            return v
    return None


def _dump(g: HIN, v: Violation, minimized: bool) -> dict:
    return {
        "check": v.check,
        "metapath": v.metapath,
        "k": v.k,
        "q": None if v.q is None else g.names[v.q],
        "other": None if v.other is None else g.names[v.other],
        "detail": v.detail,
        "minimized": minimized,
        "vertices": [[g.names[u], g.type_of(u).name, g.sig[u]] for u in range(g.n)],
        "edges": [[g.names[a], g.names[b]] for a, b in g.edges()],
    }


def _same_check(g: HIN, p: MetaPath, v: Violation) -> Violation | None:
    try:
        w = first_violation(g, [p], only=v.check)
    except (KeyError, ValueError):
        return None
    return w if w is not None and w.check == v.check else None


def minimize(g: HIN, p: MetaPath, v: Violation) -> tuple[HIN, Violation] | None:
    """Greedily delete vertices while the same check still fails on a rebuild.

    Returns None when the violation does not reproduce on a fresh index.
    """
    if _same_check(g, p, v) is None:
        return None
    cur, cur_v = g, v
    changed = True
    while changed:
        changed = False
        for name in sorted(cur.names, key=lambda s: (len(s), s), reverse=True):
            # the witness may move to another vertex as the graph shrinks
            keep = {cur.names[x] for x in (cur_v.q, cur_v.other) if x is not None}
            if name in keep or name not in cur.index:
                continue
            cand = cur.induced([x for x in range(cur.n) if cur.names[x] != name])
            if not cand.vertices_of_type(p.anchor):
                continue
            w = _same_check(cand, p, v)
            if w is not None:
                cur, cur_v, changed = cand, w, True
    return cur, cur_v


def verify_hin(
    g: HIN,
    metapaths: list[MetaPath],
    cap: int = 200,
    ihsc: IndexForest | None = None,
    oihsc: IndexForest | None = None,
    shrink: bool = True,
) -> VerifyReport:
    """Sweep every (p, q, k); stop at the first violation."""
    for p in metapaths:
        n = len(g.vertices_of_type(p.anchor))
        if n > cap:
            raise VerifyError(f"{n} anchor vertices under {p} exceed the cap of {cap}")
    report = VerifyReport()
    v = first_violation(g, metapaths, ihsc=ihsc, report=report, oihsc=oihsc)
    if v is None:
        return report
    report.violation = v
    p = next(m for m in metapaths if str(m) == v.metapath)
    small = minimize(g, p, v) if shrink else None
    if small is None:
        report.counterexample = _dump(g, v, False)
    else:
        report.counterexample = _dump(small[0], small[1], True)
    return report
