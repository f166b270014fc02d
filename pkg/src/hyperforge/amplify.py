"""Clique-density amplification: KST extraction, the eqsize step, the k-class
pipeline, the near-complete assembly, and the Erdos-Rado reduction."""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb, floor, isqrt, log
from typing import Sequence

from .errors import InputError, PreconditionError, ProofInequalityError, WitnessError
from .hypercore import (
    Budget,
    Hypergraph,
    PartiteSystem,
    _TransversalCounter,
    as_budget,
    as_fraction,
    bits_of,
    count_transversal,
    is_dense,
    iter_bits,
)


def ceil_sqrt(x: int) -> int:
    s = isqrt(x)
    return s if s * s == x else s + 1


# --- KST -----------------------------------------------------------------------------------

@dataclass(frozen=True)
class Bipartite:
    """Bipartite graph between A and B; ``nbr[b]`` is the set of A-indices adjacent to B[b], as a mask."""

    A: tuple[int, ...]
    B: tuple[int, ...]
    nbr: tuple[int, ...]

    @classmethod
    def from_edges(cls, A, B, edges) -> "Bipartite":
        A, B = tuple(A), tuple(B)
        ai = {a: i for i, a in enumerate(A)}
        bi = {b: i for i, b in enumerate(B)}
        nbr = [0] * len(B)
        for a, b in edges:
            if a not in ai or b not in bi:
                raise InputError(f"edge {(a, b)} does not join A to B")
            nbr[bi[b]] |= 1 << ai[a]
        return cls(A, B, tuple(nbr))

    @property
    def num_edges(self) -> int:
        return sum(m.bit_count() for m in self.nbr)

    @cached_property
    def _index(self) -> tuple[dict, dict]:
        return {a: i for i, a in enumerate(self.A)}, {b: i for i, b in enumerate(self.B)}

    def has_edge(self, a: int, b: int) -> bool:
        ai, bi = self._index
        return bool((self.nbr[bi[b]] >> ai[a]) & 1)


@dataclass(frozen=True)
class KstResult:
    S: tuple[int, ...]
    T: tuple[int, ...]
    s_target: int
    t_target: int
    stars: int = 0
    tried: tuple[int, ...] = ()


def _kst_buckets(B: Bipartite, s: int) -> tuple[int, int, int]:
    """(best U mask, its bucket size, star count) with lexicographic tie-break on U."""
    hist = Counter(B.nbr)
    stars = sum(c * comb(m.bit_count(), s) for m, c in hist.items())
    best_u, best = None, -1
    for U in combinations(range(len(B.A)), s):
        um = bits_of(U)
        cnt = sum(c for m, c in hist.items() if m & um == um)
        if cnt > best:
            best_u, best = um, cnt
    return best_u, best, stars


def kst_extract(B: Bipartite, eps, *, s: int | None = None, maximize: bool = False,
                precondition: str = "log") -> KstResult:
    """K_{s,t} with s = floor(eps |A|) and t >= ceil(sqrt|B|), by pigeonhole over s-subsets of A.

    ``precondition='log'`` enforces |A| <= (1/2) ln |B|. ``'pigeonhole'`` replaces
    it with the weaker binom(|A|, s) <= sqrt|B| that the counting argument needs.
    With ``maximize`` the largest s >= target whose top bucket reaches t is used.
    """
    eps = as_fraction(eps)
    a, b = len(B.A), len(B.B)
    if a == 0 or b == 0:
        raise PreconditionError("both sides must be nonempty")
    if not 0 < eps <= 1:
        raise InputError(f"eps must lie in (0, 1], got {eps}")
    e = B.num_edges
    if e < eps * a * b:
        raise PreconditionError(f"e(B) = {e} < eps*|A|*|B| = {eps * a * b}")
    s_target = s if s is not None else max(1, floor(eps * a))
    if not 1 <= s_target <= a:
        raise InputError(f"s={s_target} must lie in [1, |A|={a}]")
    if precondition == "log":
        if a > log(b) / 2:
            raise PreconditionError(f"|A| = {a} exceeds (1/2) ln|B| = {log(b) / 2:.4f}")
    elif precondition == "pigeonhole":
        if comb(a, s_target) ** 2 > b:
            raise PreconditionError(f"binom(|A|, s)^2 = {comb(a, s_target) ** 2} exceeds |B| = {b}")
    elif precondition != "none":
        raise InputError(f"unknown precondition mode {precondition!r}")
    t_target = ceil_sqrt(b)
    tried = []
    for s_try in (range(a, s_target - 1, -1) if maximize else [s_target]):
        um, best, stars = _kst_buckets(B, s_try)
        tried.append(s_try)
        if best >= t_target:
            S = tuple(B.A[i] for i in iter_bits(um))
            T = tuple(B.B[i] for i, m in enumerate(B.nbr) if m & um == um)
            res = KstResult(S, T, s_try, t_target, stars, tuple(tried))
            for x in S:
                for y in T:
                    if not B.has_edge(x, y):
                        raise WitnessError(f"KST output misses edge {(x, y)}")
            return res
    raise ProofInequalityError("kst-pigeonhole", best, t_target,
                               f"star count {stars} over binom({a},{s_try}) subsets")


# --- good/bad edges ------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeClassification:
    good: tuple[tuple[int, int], ...]
    bad: tuple[tuple[int, int], ...]
    n_graph: dict = field(repr=False)
    n_hyper: dict = field(repr=False)
    bad_mass: int = 0


def _edge_counts(P: PartiteSystem, i: int, j: int, budget: Budget):
    adj = P.G.adjacency()
    edges = []
    for x in P.classes[i]:
        for y in iter_bits(adj[x] & P.masks[j]):
            edges.append((x, y) if x < y else (y, x))
    edges.sort()
    ng, nh = {}, {}
    if P.k == 3:
        (l,) = [c for c in range(3) if c not in (i, j)]
        lm = P.masks[l]
        links = P.H3.links
        budget.tick(len(edges))
        for e in edges:
            x, y = e
            common = adj[x] & adj[y] & lm
            ng[e] = common.bit_count()
            nh[e] = (links.get(e, 0) & common).bit_count()
    else:
        cg = _TransversalCounter(P, "G", budget)
        ch = _TransversalCounter(P, "H3", budget)
        for e in edges:
            ng[e] = cg.count(e)
            nh[e] = ch.count(e)
    return edges, ng, nh


def classify_edges(P: PartiteSystem, i: int, j: int, k: int, eta, *, attest_dense: bool = False,
                   n_graph_total: int | None = None, budget: Budget | int | None = None) -> EdgeClassification:
    """Good edges of G[V_i, V_j]: N_k(H3, e) >= (1 - 2 eta) N_k(G, e)."""
    eta = as_fraction(eta)
    if k != P.k:
        raise InputError(f"k={k} must equal the number of classes {P.k}")
    if i == j or not (0 <= i < P.k and 0 <= j < P.k):
        raise InputError(f"bad class pair ({i}, {j})")
    budget = as_budget(budget)
    edges, ng, nh = _edge_counts(P, i, j, budget)
    good, bad = [], []
    for e in edges:
        (good if nh[e] >= (1 - 2 * eta) * ng[e] else bad).append(e)
    mass = sum(ng[e] for e in bad)
    if attest_dense:
        total = n_graph_total if n_graph_total is not None else count_transversal(P, "G", budget)
        if 2 * mass > total:
            raise ProofInequalityError("bad-mass", Fraction(total, 2), mass,
                                       "sum over bad edges of N_k(G,e) exceeds N_k(G)/2")
    return EdgeClassification(tuple(good), tuple(bad), ng, nh, mass)


# --- eqsize ------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EqsizeResult:
    S_i: tuple[int, ...]
    S_j: tuple[int, ...]
    system: PartiteSystem
    eps: Fraction
    eta: Fraction
    record: dict


def eqsize_step(P: PartiteSystem, i: int, j: int, eps, eta, gamma, k: int, *, strict: bool = False,
                budget: Budget | int | None = None) -> EqsizeResult:
    """One refinement: complete bipartite S_i x S_j, leaving an (eps/4, 2 eta)-dense system."""
    eps, eta, gamma = as_fraction(eps), as_fraction(eta), as_fraction(gamma)
    if not 0 < gamma <= Fraction(1, 2):
        raise InputError(f"gamma must lie in (0, 1/2], got {gamma}")
    if k != P.k:
        raise InputError(f"k={k} must equal the number of classes {P.k}")
    budget = as_budget(budget)
    dens = is_dense(P, eps, eta, budget)
    if not dens:
        raise PreconditionError(f"system is not ({eps}, {eta})-dense: failed {', '.join(dens.failed)}")
    Vi, Vj = P.classes[i], P.classes[j]
    m = len(Vj)
    if m < 2:
        raise PreconditionError(f"|V_j| = {m} leaves ln m <= 0")
    lnm = log(m)
    a_req = floor(float(gamma) * lnm)
    rec: dict = {"i": i, "j": j, "m": m, "eps": eps, "eta": eta, "gamma": gamma,
                 "sizes_before": list(P.sizes), "gamma_ln_m": float(gamma) * lnm, "A_size": a_req,
                 "n_graph": dens.n_graph, "n_hyper": dens.n_hyper}
    if a_req < 1:
        raise PreconditionError(f"floor(gamma ln m) = 0 for gamma={gamma}, m={m}")
    if len(Vi) < a_req:
        raise PreconditionError(f"|V_i| = {len(Vi)} < floor(gamma ln m) = {a_req}")

    cls = classify_edges(P, i, j, k, eta, attest_dense=True, n_graph_total=dens.n_graph, budget=budget)
    rec["good"], rec["bad"], rec["bad_mass"] = len(cls.good), len(cls.bad), cls.bad_mass
    others = 1
    for l in range(P.k):
        if l not in (i, j):
            others *= len(P.classes[l])
    thr = eps / 4 * others
    F = [e for e in cls.good if cls.n_graph[e] >= thr]
    need_F = eps / 4 * len(Vi) * m
    rec["F_edges"], rec["F_bound"] = len(F), need_F
    if len(F) < need_F:
        raise ProofInequalityError("F-edge-count", len(F), need_F)

    vi_set = set(Vi)
    fdeg = Counter()
    f_adj: dict[int, int] = {}
    for x, y in F:
        u, w = (x, y) if x in vi_set else (y, x)
        fdeg[u] += 1
        f_adj[u] = f_adj.get(u, 0) | (1 << w)
    A = tuple(sorted(sorted(Vi, key=lambda v: (-fdeg[v], v))[:a_req]))
    eA = sum(fdeg[v] for v in A)
    need_A = eps / 4 * len(A) * m
    rec["A"], rec["F_A_edges"], rec["F_A_bound"] = list(A), eA, need_A
    if eA < need_A:
        raise ProofInequalityError("averaging", eA, need_A)

    s_exact = float(eps * gamma) * lnm
    s_target = floor(s_exact)
    rec["eps_gamma_ln_m"] = s_exact
    if s_target < 1:
        if strict:
            raise PreconditionError(f"floor(eps*gamma*ln m) = floor({s_exact:.4f}) = 0")
        rec["s_target_raised"] = True
        s_target = 1
    nbr = []
    for y in Vj:
        mask = 0
        for idx, x in enumerate(A):
            if (f_adj.get(x, 0) >> y) & 1:
                mask |= 1 << idx
        nbr.append(mask)
    kst = kst_extract(Bipartite(A, tuple(Vj), tuple(nbr)), eps / 4, s=s_target, maximize=True)
    S_i, S_j = kst.S, kst.T
    rec.update(S_i=list(S_i), S_j=list(S_j), s_target=s_target, t_target=kst.t_target,
               kst_tried=list(kst.tried))
    adj = P.G.adjacency()
    for x in S_i:
        if bits_of(S_j) & ~adj[x]:
            raise WitnessError("G[S_i, S_j] is not complete bipartite")
    refined = P.refine({i: S_i, j: S_j})
    eps2, eta2 = eps / 4, 2 * eta
    check = is_dense(refined, eps2, eta2, budget)
    rec.update(eps_after=eps2, eta_after=eta2, sizes_after=list(refined.sizes),
               n_graph_after=check.n_graph, n_hyper_after=check.n_hyper)
    if not check:
        raise ProofInequalityError("refined-density", check.n_hyper, (1 - eta2) * check.n_graph,
                                   f"refined system not ({eps2}, {eta2})-dense: {', '.join(check.failed)}")
    return EqsizeResult(S_i, S_j, refined, eps2, eta2, rec)


# --- k-class pipeline ------------------------------------------------------------------------------

@dataclass
class PipelineTrace:
    steps: list = field(default_factory=list)
    final: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        from .formats import canonical_json
        from .certify import _jsonable

        lines = [canonical_json(_jsonable({"step": n, **s})) for n, s in enumerate(self.steps)]
        lines.append(canonical_json(_jsonable({"final": self.final, **self.summary})))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "PipelineTrace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        steps = [r for r in rows if "step" in r]
        tail = [r for r in rows if "final" in r]
        summary = dict(tail[0]) if tail else {}
        final = summary.pop("final", [])
        return cls(steps, final, summary)


class PipelineError(PreconditionError):
    def __init__(self, message: str, trace: PipelineTrace, cause: Exception):
        super().__init__(message)
        self.trace = trace
        self.cause = cause


def kcase_pipeline(P: PartiteSystem, eps, eta, k: int, *, strict: bool = False,
                   budget: Budget | int | None = None) -> tuple[tuple[tuple[int, ...], ...], PipelineTrace]:
    """binom(k, 2) eqsize steps in order (1,2), (1,3), ..., (k-1,k), then equal sizes."""
    eps0, eta0 = as_fraction(eps), as_fraction(eta)
    if k != P.k:
        raise InputError(f"k={k} must equal the number of classes {P.k}")
    if len(set(P.sizes)) != 1:
        raise PreconditionError(f"classes must have equal size, got {P.sizes}")
    budget = as_budget(budget)
    dens = is_dense(P, eps0, eta0, budget)
    if not dens:
        raise PreconditionError(f"system is not ({eps0}, {eta0})-dense: failed {', '.join(dens.failed)}")
    trace = PipelineTrace(summary={"k": k, "m": P.sizes[0], "eps": eps0, "eta": eta0})
    cur, e_cur, h_cur = P, eps0, eta0
    for i in range(k):
        gamma = Fraction(1, 2)
        for j in range(i + 1, k):
            try:
                res = eqsize_step(cur, i, j, e_cur, h_cur, gamma, k, strict=strict, budget=budget)
            except (PreconditionError, WitnessError) as exc:
                trace.summary["failed_step"] = {"i": i, "j": j, "error": str(exc)}
                raise PipelineError(f"step ({i}, {j}) failed: {exc}", trace, exc) from exc
            trace.steps.append(res.record)
            gamma = e_cur * gamma
            cur, e_cur, h_cur = res.system, res.eps, res.eta
    U = cur.classes
    adj = P.G.adjacency()
    for a, b in combinations(range(k), 2):
        for x in U[a]:
            if bits_of(U[b]) & ~adj[x]:
                raise WitnessError(f"G[U_{a}, U_{b}] is not complete bipartite")
    factor = 1 - 2 ** comb(k, 2) * eta0
    size = min(len(u) for u in U)
    W = tuple(tuple(sorted(u)[:size]) for u in U)
    sysW = cur.refine(dict(enumerate(W)))
    nh = count_transversal(sysW, "H3", budget)
    prod = size**k
    equalization = "lexicographic"
    if nh < factor * prod:
        W, nh = _greedy_equalize(cur, size, budget)
        prod = size**k
        equalization = "greedy"
    trace.final = [list(w) for w in W]
    trace.summary.update(size=size, retention_factor=factor, n_hyper=nh, product=prod,
                         retention_holds=nh >= factor * prod, equalization=equalization,
                         eps_final=e_cur, eta_final=h_cur, U_sizes=[len(u) for u in U])
    if nh < factor * prod:
        raise ProofInequalityError("retention", nh, factor * prod, "equal-size subsets lose too many hypercliques")
    return W, trace


def _greedy_equalize(P: PartiteSystem, size: int, budget: Budget):
    """Trim each class to ``size`` by dropping vertices in the fewest transversal hypercliques."""
    cur = P
    for c in range(P.k):
        while len(cur.classes[c]) > size:
            counter = _TransversalCounter(cur, "H3", budget)
            scores = [(counter.count((v,)), v) for v in cur.classes[c]]
            _, drop = min(scores)
            cur = cur.refine({c: [v for v in cur.classes[c] if v != drop]})
    return cur.classes, count_transversal(cur, "H3", budget)


def verify_retention(H3_system: PartiteSystem, W: Sequence[Sequence[int]], eta, budget=None) -> tuple[bool, int, Fraction]:
    """Recount N_k(H3[W_1..W_k]) against (1 - 2^binom(k,2) eta) prod |W_l|."""
    eta = as_fraction(eta)
    k = H3_system.k
    sysW = H3_system.refine(dict(enumerate(W)))
    nh = count_transversal(sysW, "H3", budget)
    prod = 1
    for w in W:
        prod *= len(w)
    bound = (1 - 2 ** comb(k, 2) * eta) * prod
    return nh >= bound, nh, bound


# --- assembly ------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Assembly:
    ok: bool
    edges: int
    bound: Fraction
    size: int
    non_transversal: int
    non_transversal_bound: Fraction
    triple_densities: dict

    def __bool__(self) -> bool:
        return self.ok


def assemble_near_complete(H3: Hypergraph, parts: Sequence[Sequence[int]], eta, k: int) -> Assembly:
    """e(H3[W]) >= (1 - eta) binom(|W|, 3) for W the union of the parts."""
    eta = as_fraction(eta)
    if H3.r != 3:
        raise InputError("assembly needs a 3-graph")
    if len(parts) != k:
        raise InputError(f"expected {k} parts, got {len(parts)}")
    if len({len(p) for p in parts}) > 1:
        raise InputError("parts must have equal size")
    if k * eta < 10:
        warnings.warn(f"k={k} is below 10/eta = {10 / eta}; the non-transversal bound may fail",
                      stacklevel=2)
    W = sorted(v for p in parts for v in p)
    if len(set(W)) != len(W):
        raise InputError("parts overlap")
    wmask = bits_of(W)
    links = H3.links
    e = 0
    for a, b in combinations(W, 2):
        e += (links.get((a, b), 0) & wmask & ~((2 << b) - 1)).bit_count()
    total = comb(len(W), 3)
    bound = (1 - eta) * total
    sz = len(parts[0]) if parts else 0
    non_trans = total - comb(k, 3) * sz**3
    dens = {}
    for p, q, r in combinations(range(k), 3):
        cnt = 0
        rm = bits_of(parts[r])
        for x in parts[p]:
            for y in parts[q]:
                cnt += (links.get((x, y) if x < y else (y, x), 0) & rm).bit_count()
        dens[f"{p},{q},{r}"] = Fraction(cnt, sz**3) if sz else Fraction(0)
    return Assembly(e >= bound, e, bound, len(W), non_trans, eta / 2 * total, dens)


# --- Erdos-Rado ------------------------------------------------------------------------------------

@dataclass(frozen=True)
class ErdosRadoResult:
    vertices: tuple[int, ...]
    G: Hypergraph
    class_sizes: tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.vertices)


def erdos_rado_reduce(H3, budget: Budget | int | None = None) -> ErdosRadoResult:
    """Ordered v_1..v_p and a graph G with {v_i, v_j, v_l} in H3 iff ij in G, for all i < j < l.

    ``H3`` needs ``n``, ``r == 3`` and ``has_edge``; hash-oracle hypergraphs work.
    """
    if H3.r != 3:
        raise InputError("Erdos-Rado reduction needs a 3-graph")
    if H3.n < 3:
        raise InputError(f"need n >= 3, got {H3.n}")
    budget = as_budget(budget)
    has = H3.has_edge
    C = list(range(H3.n))
    order: list[int] = []
    gedges = []
    sizes = []
    while C:
        v = C.pop(0)
        i = len(order)
        order.append(v)
        if i == 0:
            sizes.append(len(C))
            continue
        buckets: dict[tuple[int, ...], list[int]] = {}
        for x in C:
            budget.tick(i)
            pat = tuple(int(has((order[j], v, x))) for j in range(i))
            buckets.setdefault(pat, []).append(x)
        if buckets:
            pat, C = min(buckets.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        else:
            pat, C = (0,) * i, []
        gedges.extend((j, i) for j in range(i) if pat[j])
        sizes.append(len(C))
    G = Hypergraph(2, len(order), gedges)
    for a, b, c in combinations(range(len(order)), 3):
        if bool(has((order[a], order[b], order[c]))) != G.has_edge((a, b)):
            raise WitnessError(f"triple rule fails at positions {(a, b, c)}")
    return ErdosRadoResult(tuple(order), G, tuple(sizes))
