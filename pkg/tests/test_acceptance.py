"""Acceptance criteria, each at its stated scale and tolerance.

Run under pytest, or directly with ``python tests/test_acceptance.py``; both
print one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb, log
from pathlib import Path

import numpy as np
import pytest

from hyperforge import certify
from hyperforge.amplify import Bipartite, PipelineTrace, erdos_rado_reduce, kcase_pipeline, kst_extract, verify_retention
from hyperforge.constructions import (
    DeletionParams,
    ImplicitHypergraph,
    LabelingParams,
    deletion_construction,
    find_bad_tuple,
    is_bad_tuple,
    parity_construction,
    random_labeling,
    random_triangle_free_graph,
    stepup_construction,
    synthetic_partite_system,
)
from hyperforge.errors import HyperforgeError, PreconditionError
from hyperforge.hypercore import Hypergraph, OrderedHypergraph, is_dense
from hyperforge.rng import stream

sys.path.insert(0, str(Path(__file__).parent))
from conftest import bf_has_eta_homogeneous, bf_has_induced, bf_has_partite  # noqa: E402


@dataclass
class Outcome:
    passed: bool
    detail: str
    seconds: float = 0.0
    limit: float = 0.0

    def line(self, num: int) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {num:2d} {status}  ({self.seconds:.1f}s of {self.limit:.0f}s)  {self.detail}"


CRITERIA: dict[int, tuple[str, float, object]] = {}


def criterion(num: int, title: str, limit: float):
    def deco(fn):
        CRITERIA[num] = (title, limit, fn)
        return fn
    return deco


def evaluate(num: int) -> Outcome:
    title, limit, fn = CRITERIA[num]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except HyperforgeError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    secs = time.perf_counter() - t0
    if secs > limit:
        ok, detail = False, detail + f"; over time limit {limit:.0f}s"
    return Outcome(ok, f"{title}: {detail}", secs, limit)


# --- 1: parity invariant ------------------------------------------------------------------

@criterion(1, "parity invariant", 10)
def parity_invariant():
    checked = 0
    for r, n, seeds in ((3, 30, range(10)), (4, 16, range(3))):
        for seed in seeds:
            H, _ = parity_construction(n, r, seed)
            E = {frozenset(e) for e in H.iter_edges()}
            for R in itertools.combinations(range(n), r + 1):
                e = sum(frozenset(R[:i] + R[i + 1:]) in E for i in range(r + 1))
                if e % 2 != (r + 1) % 2:
                    return False, f"r={r} seed={seed} subset {R} has {e} edges"
                checked += 1
    expected = 10 * comb(30, 4) + 3 * comb(16, 5)
    return checked == expected, f"{checked} subsets, 0 violations"


# --- 2: parity induced-freeness --------------------------------------------------------------

@criterion(2, "parity induced-freeness", 60)
def parity_induced_free():
    F = Hypergraph(3, 4, [(0, 1, 2), (0, 1, 3), (0, 2, 3)])
    verdicts = []
    for seed in range(10):
        H, _ = parity_construction(30, 3, seed)
        verdicts.append(certify.induced_report(H, F).verdict)
    ok = all(v == "certified-absent" for v in verdicts)
    return ok, f"{verdicts.count('certified-absent')}/10 certified-absent"


# --- 3: step-up clique soundness -----------------------------------------------------------

@criterion(3, "step-up clique soundness", 300)
def stepup_soundness():
    lows = [random_triangle_free_graph(20, seed) for seed in range(3)]
    if len(set(lows)) != 3:
        return False, "triangle-free graphs are not distinct"
    certified = 0
    K3 = Hypergraph.complete(2, 3)
    for gi, G in enumerate(lows):
        if certify.induced_report(G, K3).verdict != "certified-absent":
            return False, f"low graph {gi} has a triangle"
        for li in range(5):
            phi = random_labeling(200, 20, gi * 5 + li)
            Gp = stepup_construction(G, phi, 200)
            rep = certify.clique_report(Gp, 4)
            certified += rep.verdict == "certified-absent"
    return certified == 15, f"{certified}/15 runs certified K4-free"


# --- 4: bad-tuple oracle equivalence ------------------------------------------------------------

def brute_bad_tuple(phi, theta) -> bool:
    """Every disjoint (A1, {A2, A3}) of 2-sets, checked against the definition."""
    N = phi.N
    M = np.asarray(phi.matrix)
    pairs = list(itertools.combinations(range(N), 2))
    P = np.array(pairs)
    colors = np.stack([M[:, P[:, 0]], M[:, P[:, 1]]], axis=-1)          # [a, pair, 2]
    ncol = np.where(colors[..., 0] == colors[..., 1], 1, 2)               # distinct colors a sees
    few = ncol < theta
    pm = np.array([(1 << x) | (1 << y) for x, y in pairs], dtype=np.int64)
    disjoint = (pm[:, None] & pm[None, :]) == 0
    upper = np.triu(np.ones_like(disjoint), 1)
    for i, (a, b) in enumerate(pairs):
        free = (pm & pm[i]) == 0
        cov = few[a].astype(np.int8) | (few[b].astype(np.int8) << 1)
        both = (cov[:, None] | cov[None, :]) == 3
        if (both & disjoint & upper & free[:, None] & free[None, :]).any():
            return True
    return False


@criterion(4, "bad-tuple oracle equivalence", 120)
def bad_tuple_oracle():
    params = LabelingParams(3, 6, theta_override=2)
    palette = [18, 200, 2000, 20000]
    agree, found = 0, 0
    for i in range(20):
        phi = random_labeling(18, palette[i % 4], seed=100 + i)
        res = find_bad_tuple(phi, params, "exact")
        brute = brute_bad_tuple(phi, 2)
        if res.witness is not None and not is_bad_tuple(phi, res.witness, 2):
            return False, f"labeling {i}: reported witness fails the definition"
        agree += (res.witness is not None) == brute
        found += brute
    return agree == 20, f"{agree}/20 verdicts agree ({found} with a bad tuple, {20 - found} without)"


# --- 5: deletion construction ----------------------------------------------------------------------

@criterion(5, "deletion construction", 120)
def deletion():
    worst = 200
    for seed in range(10):
        H, log_ = deletion_construction(DeletionParams(200, 3, 200 ** -0.8, seed))
        if certify.clique_report(H, 4).verdict != "certified-absent":
            return False, f"seed {seed}: K4 survives"
        worst = min(worst, len(log_.survivors))
    return worst >= 180, f"all K4-free, fewest survivors {worst}/200 (need >= 180)"


# --- 6: KST extraction ----------------------------------------------------------------------------------

def kst_instances(count: int, a: int, b: int, seed: int):
    rng = stream(seed, "acceptance/kst")
    made = 0
    while made < count:
        nbr = (rng.random((b, a)) < 0.6) @ (1 << np.arange(a))
        B = Bipartite(tuple(range(a)), tuple(range(a, a + b)), tuple(int(x) for x in nbr))
        if B.num_edges >= Fraction(1, 2) * a * b:
            made += 1
            yield B


@criterion(6, "KST extraction", 30)
def kst():
    ok, refused, weak = 0, 0, 0
    pigeon_ok = 0
    for B in kst_instances(100, 6, 4000, seed=0):
        try:
            res = kst_extract(B, Fraction(1, 2))
        except PreconditionError:
            refused += 1
        else:
            complete = all(B.has_edge(x, y) for x in res.S for y in res.T)
            if complete and len(res.S) >= 3 and len(res.T) >= 64:
                ok += 1
            else:
                weak += 1
        res = kst_extract(B, Fraction(1, 2), precondition="pigeonhole")
        pigeon_ok += len(res.S) >= 3 and len(res.T) >= 64
    detail = (f"{ok}/100 succeeded; {refused} refused since |A|=6 > (1/2) ln 4000 = {log(4000) / 2:.3f}; "
              f"with the counting precondition binom(6,3)^2 <= 4000 instead: {pigeon_ok}/100")
    return ok == 100, detail


# --- 7: pipeline contract -----------------------------------------------------------------------------------

def brute_transversal_hypercliques(P, W) -> int:
    total = 0
    for T in itertools.product(*W):
        if all(P.G.has_edge(p) for p in itertools.combinations(T, 2)) and \
                all(P.H3.has_edge(t) for t in itertools.combinations(T, 3)):
            total += 1
    return total


@criterion(7, "pipeline contract", 300)
def pipeline():
    eta = Fraction(1, 10)
    P = synthetic_partite_system(3, 512, 0.05, seed=0)
    W, trace = kcase_pipeline(P, 1, eta, 3)
    replayed = PipelineTrace.from_jsonl(trace.to_jsonl())
    holds, nh, bound = verify_retention(P, replayed.final, eta)
    direct = brute_transversal_hypercliques(P, replayed.final)
    classes = list(P.classes)
    steps_ok = 0
    for s in replayed.steps:
        classes[s["i"]], classes[s["j"]] = s["S_i"], s["S_j"]
        check = is_dense(P.refine(dict(enumerate(classes))), Fraction(s["eps_after"]), Fraction(s["eta_after"]))
        steps_ok += bool(check)
    ok = holds and direct == nh and direct >= bound and steps_ok == len(replayed.steps) == 3
    return ok, (f"|W_l| = {len(W[0])}, N_3(H[W]) = {direct} >= {bound}; "
                f"{steps_ok}/{len(replayed.steps)} steps re-verified (eps/4, 2 eta)-dense")


# --- 8: Erdos-Rado triple rule --------------------------------------------------------------------------------

@criterion(8, "Erdos-Rado triple rule", 120)
def erdos_rado():
    ps, triples = [], 0
    for run in range(20):
        H = ImplicitHypergraph(4096, 1000 + run)
        res = erdos_rado_reduce(H)
        v = res.vertices
        for a, b, c in itertools.combinations(range(res.p), 3):
            if H.has_edge((v[a], v[b], v[c])) != res.G.has_edge((a, b)):
                return False, f"run {run}: triple {(a, b, c)} breaks the rule"
            triples += 1
        ps.append(res.p)
    return min(ps) >= 3, f"{triples} triples checked, p in [{min(ps)}, {max(ps)}]"


# --- 9: certifier oracle equivalence ------------------------------------------------------------------------------

PATTERN = Hypergraph(3, 4, [(0, 1, 2), (0, 1, 3), (0, 2, 3)])


class SmallTables:
    """Bitmask brute force for 3-graphs on n <= 6 vertices: subsets of the triple list as masks."""

    def __init__(self, n: int):
        self.n = n
        self.triples = list(itertools.combinations(range(n), 3))
        idx = {t: i for i, t in enumerate(self.triples)}

        def mask_of(ts):
            return sum(1 << idx[t] for t in ts)

        self.quads = [mask_of(itertools.combinations(Q, 3)) for Q in itertools.combinations(range(n), 4)]
        self.fives = [mask_of(itertools.combinations(Q, 3)) for Q in itertools.combinations(range(n), 5)]
        self.k222 = []
        if n >= 6:
            for S in itertools.combinations(range(n), 6):
                first, rest = S[0], S[1:]
                for mate in rest:
                    left = [x for x in rest if x != mate]
                    for m2 in left[1:]:
                        p2 = (left[0], m2)
                        p3 = tuple(x for x in left if x not in p2)
                        self.k222.append(mask_of(tuple(sorted(T)) for T in
                                                 itertools.product((first, mate), p2, p3)))

    def induced(self, m: int) -> bool:
        return any((m & q).bit_count() == 3 for q in self.quads)

    def partite(self, m: int, empty: bool) -> bool:
        return any((m & q) == (0 if empty else q) for q in self.k222)

    def homogeneous4(self, m: int) -> bool:
        return any((m & q) in (0, q) for q in self.quads)

    def eta5(self, m: int) -> bool:
        return any((m & q).bit_count() <= 2 or (m & q).bit_count() >= 8 for q in self.fives)


def _certify_all(H: Hypergraph, ordered: bool):
    out = {
        "induced": certify.find_induced(H, PATTERN) is not None,
        "homogeneous4": certify.find_homogeneous(H, 4) is not None if H.n >= 4 else False,
        "eta5": certify.find_eta_homogeneous(H, 5, Fraction(1, 5)) is not None,
    }
    if H.n >= 6:
        out["partite"] = certify.find_complete_partite(H, 2) is not None
        out["partite_empty"] = certify.find_complete_partite(H, 2, empty=True) is not None
    if ordered:
        out["ordered"] = certify.find_induced_ordered(OrderedHypergraph.of(H),
                                                      OrderedHypergraph.of(PATTERN)) is not None
    return out


@criterion(9, "certifier oracle equivalence", 600)
def certifier_oracle():
    graphs = 0
    for n in range(3, 7):
        tab = SmallTables(n)
        for m in range(1 << len(tab.triples)):
            H = Hypergraph(3, n, [t for i, t in enumerate(tab.triples) if m >> i & 1])
            got = _certify_all(H, ordered=n <= 5)
            want = {"induced": tab.induced(m), "homogeneous4": tab.homogeneous4(m) if n >= 4 else False,
                    "eta5": tab.eta5(m)}
            if n >= 6:
                want["partite"] = tab.partite(m, False)
                want["partite_empty"] = tab.partite(m, True)
            if n <= 5:
                want["ordered"] = bf_has_induced(H, PATTERN, ordered=True)
            if got != want:
                return False, f"n={n} mask={m}: {got} != {want}"
            graphs += 1
    rng = stream(0, "acceptance/oracle")
    for i in range(500):
        keep = rng.random(comb(9, 3)) < rng.uniform(0.2, 0.8)
        H = Hypergraph(3, 9, [t for t, k in zip(itertools.combinations(range(9), 3), keep) if k])
        got = _certify_all(H, ordered=True)
        want = {"induced": bf_has_induced(H, PATTERN),
                "homogeneous4": bool(_bf_homog(H, 4)),
                "eta5": bf_has_eta_homogeneous(H, 5, Fraction(1, 5)),
                "partite": bf_has_partite(H, 2), "partite_empty": bf_has_partite(H, 2, True),
                "ordered": bf_has_induced(H, PATTERN, ordered=True)}
        if got != want:
            return False, f"random n=9 instance {i}: {got} != {want}"
        graphs += 1
    return True, f"{graphs} hypergraphs (every labeled 3-graph on n <= 6, plus 500 at n = 9), all verdicts agree"


def _bf_homog(H, m):
    for W in itertools.combinations(range(H.n), m):
        vals = {H.has_edge(T) for T in itertools.combinations(W, 3)}
        if len(vals) == 1:
            return W
    return None


# --- 10: Turan extraction ------------------------------------------------------------------------------------

@criterion(10, "Turan extraction", 5)
def turan():
    triples = list(itertools.combinations(range(5), 3))
    hosts = [Hypergraph(3, 5, E) for E in itertools.combinations(triples, 8)]
    found = 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for H in hosts:
            W = certify.turan_clique(H, 4, seed=0, max_attempts=0)
            found += W is not None and certify.verify_clique(H, W, 4)
    return found == len(hosts) == 45, f"{found}/{len(hosts)} hosts yield a complete 4-subset"


# --- 11: density window -----------------------------------------------------------------------------------------

@criterion(11, "density window", 120)
def density_window():
    spec = certify.DensityWindowSpec(14, Fraction(1, 5))
    outside, worst = 0, Fraction(0)
    for seed in range(3):
        H, _ = parity_construction(60, 3, seed)
        rep = certify.density_window_check(H, spec, "sampled", 10**5, seed=seed)
        outside += rep.details["outside"]
        worst = max(worst, rep.details["worst_deviation"])
    return outside == 0, f"{outside} of 300000 samples outside, worst |d - 1/2| = {float(worst):.4f}"


# --- 12: reproducibility -----------------------------------------------------------------------------------------

def _matrix(tmp: Path) -> list[list[str]]:
    (tmp / "F.hg").write_text("hg 3 4 3\n0 1 2\n0 1 3\n0 2 3\n")
    (tmp / "K3.hg").write_text("hg 2 3 3\n0 1\n0 2\n1 2\n")
    b = synthetic_partite_system(3, 32, 0.05, 1)
    from hyperforge.formats import dump_bundle

    (tmp / "sys.bundle").write_text(dump_bundle(b))
    cmds = []
    for seed in (1, 2):
        s = str(seed)
        cmds += [
            ["construct", "parity", "--n", "20", "--seed", s, "--out", f"parity{s}.hg"],
            ["construct", "parity", "--n", "12", "--r", "4", "--seed", s, "--out", f"parity4_{s}.hg"],
            ["construct", "triangle-free", "--n", "12", "--seed", s, "--out", f"low{s}.hg"],
            ["construct", "labeling", "--N", "40", "--colors", "12", "--seed", s, "--out", f"lab{s}.lab"],
            ["construct", "stepup", "--low", f"low{s}.hg", "--labeling", f"lab{s}.lab", "--out", f"up{s}.hg"],
            ["construct", "deletion", "--n", "120", "--seed", s, "--out", f"del{s}.hg"],
            ["certify", "induced-free", "--host", f"parity{s}.hg", "--pattern", "F.hg", "--out", f"c1_{s}.json"],
            ["certify", "ordered-induced-free", "--host", f"low{s}.hg", "--pattern", "K3.hg",
             "--out", f"c2_{s}.json"],
            ["certify", "partite-free", "--host", f"up{s}.hg", "--t", "2", "--out", f"c3_{s}.json"],
            ["certify", "partite-free", "--host", f"up{s}.hg", "--t", "2", "--complement", "--out", f"c4_{s}.json"],
            ["certify", "homogeneous", "--host", f"parity{s}.hg", "--m", "6", "--out", f"c5_{s}.json"],
            ["certify", "eta-homogeneous", "--host", f"parity{s}.hg", "--m", "7", "--eta", "1/10",
             "--out", f"c6_{s}.json"],
            ["certify", "eta-homogeneous", "--host", f"del{s}.hg", "--m", "7", "--eta", "1/10", "--heuristic",
             "--out", f"c7_{s}.json"],
            ["certify", "density-window", "--host", f"parity{s}.hg", "--w", "10", "--eps", "1/5",
             "--mode", "sampled", "--samples", "2000", "--seed", s, "--out", f"c8_{s}.json"],
            ["certify", "density-window", "--host", f"parity4_{s}.hg", "--w", "7", "--eps", "1/5",
             "--out", f"c9_{s}.json"],
            ["certify", "witness", "--host", f"parity{s}.hg", "--pattern", "F.hg", "--t", "3",
             "--out", f"c10_{s}.json"],
        ]
    cmds += [
        ["amplify", "--bundle", "sys.bundle", "--eps", "1", "--eta", "1/10", "--out", "trace.jsonl"],
        ["experiment", "kcase-demo", "--m", "64", "--format", "json", "--out", "kcase.json"],
        ["experiment", "er-demo", "--n", "512", "--runs", "3", "--out", "er.txt"],
        ["fmt", "parity1.hg", "--out", "fmt.hg"],
    ]
    return cmds


def _run_matrix(tmp: Path, hashseed: str) -> dict[str, bytes]:
    tmp.mkdir(parents=True, exist_ok=True)
    cmds = _matrix(tmp)
    script = ("import sys\nfrom hyperforge.cli import main\ncodes = []\n"
              f"for argv in {cmds!r}:\n    codes.append(main(argv))\nprint(codes)\n")
    env = dict(os.environ, PYTHONHASHSEED=hashseed)
    out = subprocess.run([sys.executable, "-c", script], cwd=tmp, env=env, capture_output=True, text=True)
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    files = {p.name: p.read_bytes() for p in sorted(tmp.iterdir()) if p.is_file()}
    files["exit-codes"] = out.stdout.encode()
    return files


@criterion(12, "reproducibility", 600)
def reproducibility():
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        a = _run_matrix(Path(d) / "a", "1")
        b = _run_matrix(Path(d) / "b", "2")
    differing = sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))
    return not differing, (f"{len(a)} outputs compared across two processes with different hash seeds; "
                           f"differing: {differing or 'none'}")


# --- pytest glue -----------------------------------------------------------------------------------------------------

_RESULTS: dict[int, Outcome] = {}


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is None or not _RESULTS:
        return
    tr.write_line("")
    tr.write_line("acceptance summary")
    for num in sorted(_RESULTS):
        tr.write_line(_RESULTS[num].line(num))


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, request):
    out = evaluate(num)
    _RESULTS[num] = out
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None:
        tr.write_line("")
        tr.write_line(out.line(num))
    assert out.passed, out.detail


if __name__ == "__main__":
    failed = 0
    for num in sorted(CRITERIA):
        out = evaluate(num)
        failed += not out.passed
        print(out.line(num), flush=True)
    sys.exit(1 if failed else 0)
