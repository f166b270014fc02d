"""Exact and sampled search engines, plus the reports that record their verdicts.

Every witness placed in a report is re-checked against its inputs by a direct
definition check at report construction; a failure there is an internal bug
and raises WitnessError.
"""

from __future__ import annotations

import hashlib
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, WitnessError
from .formats import canonical_json, dump_hypergraph
from .hypercore import (
    Budget,
    Embedding,
    Hypergraph,
    OrderedHypergraph,
    as_budget,
    as_fraction,
    bits_of,
    complement,
    density,
    find_clique,
    iter_bits,
)
from .rng import stream

VERDICTS = ("certified-absent", "witness", "sampled-absent", "inconclusive")


def content_hash(obj) -> str:
    if isinstance(obj, Hypergraph):
        text = dump_hypergraph(obj)
    else:
        text = str(obj)
    return hashlib.sha256(text.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, Embedding):
        return list(x.map)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


@dataclass(frozen=True)
class CertReport:
    property: str
    mode: str
    verdict: str
    witness: object = None
    seed: int | None = None
    samples: int | None = None
    nodes: int = 0
    budget: int | None = None
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    subreports: tuple = ()
    wall_time: float | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InputError(f"unknown verdict {self.verdict!r}")
        if self.mode not in ("exact", "sampled", "heuristic", "mixed"):
            raise InputError(f"unknown mode {self.mode!r}")

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "property": self.property, "mode": self.mode, "verdict": self.verdict,
            "witness": _jsonable(self.witness), "seed": self.seed, "samples": self.samples,
            "nodes": self.nodes, "budget": self.budget, "inputs": dict(self.inputs),
            "params": _jsonable(self.params), "details": _jsonable(self.details),
            "subreports": [s.to_dict(timing) for s in self.subreports],
        }
        if timing and self.wall_time is not None:
            d["wall_time"] = round(self.wall_time, 6)
        return d

    def to_json(self, timing: bool = False) -> str:
        return canonical_json(self.to_dict(timing))

    @property
    def id(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def _make(prop: str, mode: str, witness, verifier: Callable[[object], bool] | None, *,
          budget: Budget | None = None, **kw) -> CertReport:
    if witness is not None and verifier is not None and not verifier(witness):
        raise WitnessError(f"{prop}: witness {witness} failed re-verification")
    if witness is not None:
        verdict = "witness"
    elif mode == "exact":
        verdict = "certified-absent"
    elif mode == "sampled":
        verdict = "sampled-absent"
    else:
        verdict = kw.pop("absent_verdict", "inconclusive")
    kw.pop("absent_verdict", None)
    if budget is not None:
        kw.setdefault("nodes", budget.nodes)
        kw.setdefault("budget", budget.limit)
    return CertReport(prop, mode, verdict, witness, **kw)


# --- definitional checkers ---------------------------------------------------------------

def verify_induced(H: Hypergraph, F: Hypergraph, emb: Embedding | Sequence[int], ordered: bool = False) -> bool:
    m = tuple(emb.map if isinstance(emb, Embedding) else emb)
    if len(m) != F.n or len(set(m)) != len(m) or any(not 0 <= x < H.n for x in m):
        return False
    if ordered and any(a >= b for a, b in zip(m, m[1:])):
        return False
    for S in combinations(range(F.n), F.r):
        if F.has_edge(S) != H.has_edge([m[v] for v in S]):
            return False
    return True


def verify_partite(H: Hypergraph, parts: Sequence[Sequence[int]], t: int, empty: bool = False) -> bool:
    if len(parts) != H.r or any(len(p) != t for p in parts):
        return False
    flat = [v for p in parts for v in p]
    if len(set(flat)) != len(flat) or any(not 0 <= v < H.n for v in flat):
        return False
    return all(H.has_edge(T) != empty for T in product(*parts))


def verify_homogeneous(H: Hypergraph, W: Sequence[int], m: int) -> bool:
    if len(set(W)) != m:
        return False
    vals = {H.has_edge(S) for S in combinations(sorted(W), H.r)}
    return len(vals) <= 1


def induced_edges(H: Hypergraph, W: Sequence[int]) -> int:
    return sum(1 for S in combinations(sorted(W), H.r) if H.has_edge(S))


def verify_eta_homogeneous(H: Hypergraph, W: Sequence[int], m: int, eta) -> bool:
    eta = as_fraction(eta)
    if len(set(W)) != m:
        return False
    e, total = induced_edges(H, W), comb(m, H.r)
    return e <= eta * total or e >= (1 - eta) * total


def verify_clique(H: Hypergraph, W: Sequence[int], k: int) -> bool:
    return len(set(W)) == k and all(H.has_edge(S) for S in combinations(sorted(W), H.r))


# --- induced search ----------------------------------------------------------------------

def _induced_search(H: Hypergraph, F: Hypergraph, budget: Budget, ordered: bool) -> tuple[int, ...] | None:
    if F.r != H.r:
        raise InputError(f"uniformities differ: host r={H.r}, pattern r={F.r}")
    f, n, r = F.n, H.n, H.r
    if f > n:
        return None
    if f == 0:
        return ()
    full = H.vertex_mask
    if ordered:
        order = list(range(f))
    else:
        order = sorted(range(f), key=lambda u: (-F.degree(u), u))
    pos = {u: i for i, u in enumerate(order)}
    hdeg = [H.degree(x) for x in range(n)]
    fdeg = [F.degree(u) for u in range(f)]
    hcap, fcap = comb(n - 1, r - 1), comb(f - 1, r - 1)
    base = []
    for u in range(f):
        m = 0
        for x in range(n):
            if hdeg[x] >= fdeg[u] and hcap - hdeg[x] >= fcap - fdeg[u]:
                m |= 1 << x
        base.append(m)
    # constraints[d]: pattern (r-1)-sets T of earlier search positions, with whether T+order[d] is an edge
    constraints = []
    for d, u in enumerate(order):
        cons = []
        for T in combinations(order[:d], r - 1):
            cons.append((tuple(sorted(T, key=pos.__getitem__)), F.has_edge(T + (u,))))
        constraints.append(cons)
    image = [0] * f
    links = H.links

    def cand_for(d: int, used: int, lo: int) -> int:
        c = base[order[d]] & ~used
        if ordered:
            c &= ~((1 << lo) - 1) & ((1 << (n - (f - 1 - d))) - 1)
        for T, is_edge in constraints[d]:
            key = tuple(sorted(image[v] for v in T))
            lk = links.get(key, 0)
            c &= lk if is_edge else ~lk
            if not c:
                break
        return c & full

    def rec(d: int, used: int, lo: int):
        budget.tick()
        if d == f:
            return True
        c = cand_for(d, used, lo)
        for x in iter_bits(c):
            image[order[d]] = x
            if rec(d + 1, used | (1 << x), x + 1):
                return True
        return False

    if rec(0, 0, 0):
        return tuple(image)
    return None


def find_induced(H: Hypergraph, F: Hypergraph, budget: Budget | int | None = None) -> Embedding | None:
    m = _induced_search(H, F, as_budget(budget), ordered=False)
    return None if m is None else Embedding(m, ordered=False)


def find_induced_ordered(H: Hypergraph, F: Hypergraph, budget: Budget | int | None = None) -> Embedding | None:
    m = _induced_search(H, F, as_budget(budget), ordered=True)
    return None if m is None else Embedding(m, ordered=True)


# --- complete partite search --------------------------------------------------------------

def find_complete_partite(H: Hypergraph, t: int, budget: Budget | int | None = None,
                          empty: bool = False) -> tuple[tuple[int, ...], ...] | None:
    """r disjoint t-sets with every transversal r-set an edge (a non-edge when ``empty``).

    Parts are filled round-robin; part minima increase and each part increases,
    so each unordered solution is visited once.
    """
    r, n = H.r, H.n
    if t < 1:
        raise InputError(f"part size must be >= 1, got {t}")
    if r * t > n:
        raise InputError(f"r*t = {r * t} exceeds n = {n}")
    budget = as_budget(budget)
    full = H.vertex_mask
    links = H.links

    def lk(key):
        m = links.get(key, 0)
        return (full & ~m & ~bits_of(key)) if empty else m

    parts: list[list[int]] = [[] for _ in range(r)]
    total = r * t

    def rec(step: int, cands: list[int], used: int):
        budget.tick()
        if step == total:
            return True
        i = step % r
        rnd = step // r
        c = cands[i] & ~used
        if rnd == 0:
            if i > 0:
                c &= ~((2 << parts[i - 1][0]) - 1)
        else:
            c &= ~((2 << parts[i][-1]) - 1)
        for x in iter_bits(c):
            new = list(cands)
            ok = True
            for j in range(r):
                if j == i:
                    continue
                others = [parts[l] for l in range(r) if l != i and l != j]
                m = new[j]
                for T in product(*others):
                    m &= lk(tuple(sorted(T + (x,))))
                    if not m:
                        break
                new[j] = m
                if (m & ~used & ~(1 << x)).bit_count() < t - len(parts[j]):
                    ok = False
                    break
            if not ok:
                continue
            parts[i].append(x)
            if rec(step + 1, new, used | (1 << x)):
                return True
            parts[i].pop()
        return False

    if rec(0, [full] * r, 0):
        return tuple(tuple(p) for p in parts)
    return None


# --- homogeneous sets -----------------------------------------------------------------------

def find_homogeneous(H: Hypergraph, m: int, budget: Budget | int | None = None) -> tuple[tuple[int, ...], str] | None:
    if m < H.r:
        raise InputError(f"m={m} must be >= r={H.r}")
    budget = as_budget(budget)
    W = find_clique(H, m, budget)
    if W is not None:
        return W, "clique"
    W = find_clique(H, m, budget, negate=True)
    if W is not None:
        return W, "independent"
    return None


def find_eta_homogeneous(H: Hypergraph, m: int, eta, mode: str = "exact",
                         budget: Budget | int | None = None) -> tuple[int, ...] | None:
    """m-set with induced density <= eta or >= 1 - eta."""
    eta = as_fraction(eta)
    if m < H.r:
        raise InputError(f"m={m} must be >= r={H.r}")
    if not 0 <= eta < Fraction(1, 2):
        raise InputError(f"eta must lie in [0, 1/2), got {eta}")
    if m > H.n:
        return None
    budget = as_budget(budget)
    total = comb(m, H.r)
    lo_cap = eta * total          # e <= lo_cap
    hi_cap = (1 - eta) * total    # e >= hi_cap
    if mode == "heuristic":
        return _eta_greedy(H, m, lo_cap, hi_cap, budget)
    if mode != "exact":
        raise InputError(f"mode must be 'exact' or 'heuristic', got {mode!r}")
    r = H.r
    links = H.links
    n = H.n
    S: list[int] = []

    def rec(start: int, e: int):
        budget.tick()
        k = len(S)
        if k == m:
            return e <= lo_cap or e >= hi_cap
        room = total - comb(k, r)
        low_ok = e <= lo_cap
        high_ok = e + room >= hi_cap
        if not (low_ok or high_ok):
            return False
        for v in range(start, n - (m - k) + 1):
            add = 0
            if k >= r - 1:
                bit = 1 << v
                for T in combinations(S, r - 1):
                    if links.get(T, 0) & bit:
                        add += 1
            S.append(v)
            if rec(v + 1, e + add):
                return True
            S.pop()
        return False

    if rec(0, 0):
        return tuple(S)
    return None


def _eta_greedy(H, m, lo_cap, hi_cap, budget):
    W = list(range(H.n))
    r = H.r
    deg = {v: 0 for v in W}
    for e in H.iter_edges():
        for v in e:
            deg[v] += 1
    e_now = H.num_edges
    while len(W) > m:
        budget.tick()
        k = len(W)
        target_high = Fraction(e_now, comb(k, r)) >= Fraction(1, 2)
        # removing v drops deg[v] edges; towards 1 remove the lowest degree, towards 0 the highest
        v = min(W, key=lambda x: (deg[x], x)) if target_high else max(W, key=lambda x: (deg[x], -x))
        W.remove(v)
        e_now -= deg[v]
        bit = 1 << v
        for T in combinations(W, r - 1):
            if H.links.get(T, 0) & bit:
                for u in T:
                    deg[u] -= 1
        del deg[v]
    if e_now <= lo_cap or e_now >= hi_cap:
        return tuple(W)
    return None


# --- Turan sampling -------------------------------------------------------------------------

def turan_clique(H: Hypergraph, k: int, seed: int = 0, max_attempts: int = 1000,
                 budget: Budget | int | None = None, fallback_limit: int = 15) -> tuple[int, ...] | None:
    """k-clique by random k-subsets, then exhaustive search when n <= fallback_limit."""
    if k < H.r:
        raise InputError(f"k={k} must be >= r={H.r}")
    if k > H.n:
        return None
    if density(H) <= 1 - Fraction(1, comb(k, H.r)):
        warnings.warn(f"density {density(H)} does not exceed 1 - 1/binom({k},{H.r}); "
                      "a clique is not guaranteed", stacklevel=2)
    rng = stream(seed, "turan")
    for _ in range(max_attempts):
        W = tuple(sorted(rng.choice(H.n, size=k, replace=False).tolist()))
        if verify_clique(H, W, k):
            return W
    if H.n <= fallback_limit:
        return find_clique(H, k, budget)
    return None


# --- density windows ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityWindowSpec:
    w: int
    eps: Fraction
    center: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        object.__setattr__(self, "center", as_fraction(self.center))
        if not 0 < self.eps < Fraction(1, 2):
            raise InputError(f"eps must lie in (0, 1/2), got {self.eps}")

    def check(self, H: Hypergraph) -> None:
        if not H.r <= self.w <= H.n:
            raise InputError(f"window size w={self.w} must satisfy r <= w <= n")


def _edge_tensor(H: Hypergraph) -> np.ndarray | None:
    if H.n ** H.r > 5 * 10**7:
        return None
    T = np.zeros((H.n,) * H.r, dtype=bool)
    for e in H.iter_edges():
        T[e] = True
    return T


def density_window_check(H: Hypergraph, spec: DensityWindowSpec, mode: str = "exact",
                         samples: int = 10_000, seed: int = 0,
                         budget: Budget | int | None = None) -> CertReport:
    """Search for a w-set whose induced density leaves [center - eps, center + eps]."""
    spec.check(H)
    budget = as_budget(budget)
    r, w = H.r, spec.w
    total = comb(w, r)
    lo = (spec.center - spec.eps) * total
    hi = (spec.center + spec.eps) * total
    t0 = time.perf_counter()
    worst = Fraction(0)
    witness = None
    outside = 0
    checked = 0
    if mode == "exact":
        budget.tick(comb(H.n, w))
        for W in combinations(range(H.n), w):
            e = induced_edges(H, W)
            dev = abs(Fraction(e, total) - spec.center)
            worst = max(worst, dev)
            checked += 1
            if not lo <= e <= hi:
                outside += 1
                if witness is None:
                    witness = W
    elif mode == "sampled":
        if samples < 1:
            raise InputError("sampled mode needs samples >= 1")
        rng = stream(seed, "density-window")
        T = _edge_tensor(H)
        idx = list(combinations(range(w), r))
        done = 0
        while done < samples:
            batch = min(10_000, samples - done)
            budget.tick(batch)
            Ws = np.sort(np.argsort(rng.random((batch, H.n)), axis=1)[:, :w], axis=1)
            if T is not None:
                counts = np.zeros(batch, dtype=np.int64)
                for c in idx:
                    counts += T[tuple(Ws[:, j] for j in c)]
                counts = counts.tolist()
            else:
                counts = [induced_edges(H, row) for row in Ws.tolist()]
            for row, e in zip(Ws.tolist(), counts):
                dev = abs(Fraction(e, total) - spec.center)
                if dev > worst:
                    worst = dev
                if not lo <= e <= hi:
                    outside += 1
                    if witness is None:
                        witness = tuple(row)
            done += batch
        checked = done
    else:
        raise InputError(f"mode must be 'exact' or 'sampled', got {mode!r}")

    def ok(W):
        e = induced_edges(H, W)
        return len(set(W)) == w and not lo <= e <= hi

    return _make("density-window", mode, witness, ok, budget=budget,
                 seed=seed if mode == "sampled" else None,
                 samples=samples if mode == "sampled" else None,
                 inputs={"H": content_hash(H)},
                 params={"w": w, "eps": spec.eps, "center": spec.center},
                 details={"checked": checked, "outside": outside, "worst_deviation": worst,
                          "worst_deviation_float": float(worst)},
                 wall_time=time.perf_counter() - t0)


# --- report wrappers ------------------------------------------------------------------------------

def induced_report(H: Hypergraph, F: Hypergraph, budget=None, ordered: bool = False) -> CertReport:
    b = as_budget(budget)
    t0 = time.perf_counter()
    emb = (find_induced_ordered if ordered else find_induced)(H, F, b)
    return _make("ordered-induced-free" if ordered else "induced-free", "exact", emb,
                 lambda e: verify_induced(H, F, e, ordered), budget=b,
                 inputs={"H": content_hash(H), "F": content_hash(F)},
                 wall_time=time.perf_counter() - t0)


def ordered_induced_report(H: Hypergraph, F: Hypergraph, budget=None) -> CertReport:
    return induced_report(H, F, budget, ordered=True)


def partite_report(H: Hypergraph, t: int, budget=None, label: str | None = None,
                   empty: bool = False) -> CertReport:
    b = as_budget(budget)
    t0 = time.perf_counter()
    parts = find_complete_partite(H, t, b, empty=empty)
    details = {"target": label} if label else {}
    if empty:
        details["empty"] = True
    return _make("partite-free", "exact", parts, lambda p: verify_partite(H, p, t, empty), budget=b,
                 inputs={"H": content_hash(H)}, params={"t": t}, details=details,
                 wall_time=time.perf_counter() - t0)


def clique_report(H: Hypergraph, k: int, budget=None) -> CertReport:
    b = as_budget(budget)
    t0 = time.perf_counter()
    W = find_clique(H, k, b)
    return _make("clique-free", "exact", W, lambda c: verify_clique(H, c, k), budget=b,
                 inputs={"H": content_hash(H)}, params={"k": k}, wall_time=time.perf_counter() - t0)


def homogeneous_report(H: Hypergraph, m: int, budget=None) -> CertReport:
    b = as_budget(budget)
    t0 = time.perf_counter()
    res = find_homogeneous(H, m, b)
    W = None if res is None else res[0]
    return _make("homogeneous", "exact", W, lambda s: verify_homogeneous(H, s, m), budget=b,
                 inputs={"H": content_hash(H)}, params={"m": m},
                 details={"kind": None if res is None else res[1]}, wall_time=time.perf_counter() - t0)


def eta_homogeneous_report(H: Hypergraph, m: int, eta, mode: str = "exact", budget=None) -> CertReport:
    b = as_budget(budget)
    t0 = time.perf_counter()
    W = find_eta_homogeneous(H, m, eta, mode, b)
    return _make("eta-homogeneous", "exact" if mode == "exact" else "heuristic", W,
                 lambda s: verify_eta_homogeneous(H, s, m, eta), budget=b,
                 inputs={"H": content_hash(H)}, params={"m": m, "eta": as_fraction(eta)},
                 details={"certifying": mode == "exact"}, wall_time=time.perf_counter() - t0)


def combine(prop: str, subs: Sequence[CertReport], **kw) -> CertReport:
    """Conjunction: witness if any sub-check found one, else absent at the weakest sub-mode."""
    subs = tuple(subs)
    if any(s.verdict == "witness" for s in subs):
        verdict = "witness"
    elif any(s.verdict == "inconclusive" for s in subs):
        verdict = "inconclusive"
    elif all(s.verdict == "certified-absent" for s in subs):
        verdict = "certified-absent"
    else:
        verdict = "sampled-absent"
    modes = {s.mode for s in subs}
    mode = modes.pop() if len(modes) == 1 else ("mixed" if modes else "exact")
    return CertReport(prop, mode, verdict, None, nodes=sum(s.nodes for s in subs), subreports=subs, **kw)


def certify_witness(H: Hypergraph, F: Hypergraph, t: int, budget=None) -> CertReport:
    """Is H a valid lower-bound witness: induced F-free, and neither H nor its complement holds K_{t..t}?"""
    if F.r != H.r:
        raise InputError(f"uniformities differ: host r={H.r}, pattern r={F.r}")
    subs = [induced_report(H, F, budget),
            partite_report(H, t, budget, label="host"),
            partite_report(complement(H), t, budget, label="complement")]
    return combine("witness", subs, inputs={"H": content_hash(H), "F": content_hash(F)},
                   params={"t": t})


def rerun(stored: dict, resolve: Callable[[str], Hypergraph], budget=None) -> CertReport:
    """Re-execute the check described by a serialized report against resolved inputs."""
    prop = stored["property"]
    params = stored.get("params", {})
    details = stored.get("details", {})
    inputs = stored.get("inputs", {})
    H = resolve(inputs["H"])
    if prop == "induced-free":
        return induced_report(H, resolve(inputs["F"]), budget)
    if prop == "ordered-induced-free":
        return ordered_induced_report(OrderedHypergraph.of(H), OrderedHypergraph.of(resolve(inputs["F"])), budget)
    if prop == "partite-free":
        return partite_report(H, params["t"], budget, label=details.get("target"),
                              empty=details.get("empty", False))
    if prop == "clique-free":
        return clique_report(H, params["k"], budget)
    if prop == "homogeneous":
        return homogeneous_report(H, params["m"], budget)
    if prop == "eta-homogeneous":
        mode = "exact" if stored["mode"] == "exact" else "heuristic"
        return eta_homogeneous_report(H, params["m"], Fraction(params["eta"]), mode, budget)
    if prop == "density-window":
        spec = DensityWindowSpec(params["w"], Fraction(params["eps"]), Fraction(params["center"]))
        return density_window_check(H, spec, stored["mode"], stored.get("samples") or 1,
                                    stored.get("seed") or 0, budget)
    if prop == "witness":
        return certify_witness(H, resolve(inputs["F"]), params["t"], budget)
    raise InputError(f"report property {prop!r} cannot be re-run from stored inputs")
