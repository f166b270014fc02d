"""Explicit constructions: parity, step-up, the F* gadget, labelings, deletion."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import ceil, comb
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, LimitError, PreconditionError
from .hypercore import (
    Budget,
    Hypergraph,
    OrderedHypergraph,
    PartiteSystem,
    as_budget,
    as_fraction,
    bits_of,
    complement,
    find_clique,
    induce,
    iter_bits,
)
from .rng import check_seed, stream

DEFAULT_MAX_N = 10**4
LABELING_ATTEMPTS = 32


# --- labelings -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EdgeLabeling:
    """Color phi(a, b) in [0, n) for every pair a != b of [0, N).

    Stored as a symmetric N x N integer matrix; the diagonal holds -1.
    """

    N: int
    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        M = self.matrix
        if M.shape != (self.N, self.N):
            raise InputError(f"labeling matrix has shape {M.shape}, expected ({self.N}, {self.N})")
        if self.n < 1:
            raise InputError("a labeling needs at least one color")
        if self.N > 1:
            iu = np.triu_indices(self.N, 1)
            vals = M[iu]
            if vals.min() < 0 or vals.max() >= self.n:
                raise InputError(f"labeling color outside [0, {self.n})")
            if not np.array_equal(M, M.T):
                raise InputError("labeling matrix is not symmetric")
        M.setflags(write=False)

    @classmethod
    def from_upper(cls, N: int, n: int, values) -> "EdgeLabeling":
        """Colors of the pairs (a, b), a < b, listed in lexicographic order."""
        values = np.asarray(values, dtype=np.int64)
        if values.shape != (comb(N, 2),):
            raise InputError(f"expected {comb(N, 2)} pair colors, got {values.size}")
        M = np.full((N, N), -1, dtype=np.int64)
        iu, ju = np.triu_indices(N, 1)
        M[iu, ju] = values
        M[ju, iu] = values
        return cls(N, n, M)

    @classmethod
    def from_function(cls, N: int, n: int, f) -> "EdgeLabeling":
        return cls.from_upper(N, n, [f(a, b) for a, b in combinations(range(N), 2)])

    def __call__(self, a: int, b: int) -> int:
        if a == b:
            raise InputError("labels are defined on pairs of distinct vertices")
        return int(self.matrix[a, b])

    def upper(self) -> np.ndarray:
        return self.matrix[np.triu_indices(self.N, 1)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeLabeling):
            return NotImplemented
        return self.N == other.N and self.n == other.n and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.N, self.n, self.matrix.tobytes()))


def random_labeling(N: int, n: int, seed: int, stream_name: str = "labeling") -> EdgeLabeling:
    if n < 1:
        raise InputError(f"color count must be >= 1, got {n}")
    if N < 0:
        raise InputError(f"N must be >= 0, got {N}")
    rng = stream(seed, stream_name)
    return EdgeLabeling.from_upper(N, n, rng.integers(0, n, size=comb(N, 2)))


@dataclass(frozen=True)
class LabelingParams:
    r: int
    t: int
    alpha: Fraction = Fraction(2)
    theta_override: Fraction | None = None
    c1_override: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.theta_override is not None:
            object.__setattr__(self, "theta_override", as_fraction(self.theta_override))
        if self.c1_override is not None:
            object.__setattr__(self, "c1_override", as_fraction(self.c1_override))
        if self.r < 2:
            raise InputError(f"r must be >= 2, got {self.r}")
        if self.t < 1:
            raise InputError(f"t must be >= 1, got {self.t}")
        if self.alpha <= 1:
            raise InputError(f"alpha must exceed 1, got {self.alpha}")
        if self.theta_override is not None and self.theta_override <= 0:
            raise InputError("theta must be positive")

    @property
    def beta(self) -> Fraction:
        return 2 / (1 - 1 / self.alpha)

    @property
    def c0(self) -> Fraction:
        return 1 / (self.beta * self.r**2)

    @property
    def gamma(self) -> Fraction:
        return (1 - 1 / self.alpha - 1 / self.beta) / 2

    @property
    def c1(self) -> Fraction:
        return self.c1_override if self.c1_override is not None else self.gamma / self.r**2

    @property
    def theta(self) -> Fraction:
        if self.theta_override is not None:
            return self.theta_override
        return Fraction(self.t) / (self.beta * self.r)

    @property
    def overridden(self) -> bool:
        return self.theta_override is not None or self.c1_override is not None

    def to_dict(self) -> dict:
        return {"r": self.r, "t": self.t, "alpha": str(self.alpha), "beta": str(self.beta),
                "c0": str(self.c0), "c1": str(self.c1), "theta": str(self.theta),
                "override": self.overridden}


# --- parity ------------------------------------------------------------------------

def parity_construction(n: int, r: int, seed: int, aux: Hypergraph | str | None = None
                        ) -> tuple[Hypergraph, Hypergraph]:
    """r-sets spanning an even number of edges of a random (r-1)-graph.

    ``aux`` replaces the random (r-1)-graph: a Hypergraph, "empty" or "complete".
    Returns (G, aux).
    """
    if r < 3 or n < r:
        raise InputError(f"parity construction needs n >= r >= 3, got n={n}, r={r}")
    if aux is None:
        rng = stream(seed, "parity")
        pick = rng.integers(0, 2, size=comb(n, r - 1)).astype(bool)
        aux = Hypergraph(r - 1, n, [s for s, keep in zip(combinations(range(n), r - 1), pick) if keep])
    elif aux == "empty":
        aux = Hypergraph(r - 1, n)
    elif aux == "complete":
        aux = Hypergraph.complete(r - 1, n)
    elif not isinstance(aux, Hypergraph) or aux.r != r - 1 or aux.n != n:
        raise InputError(f"auxiliary graph must be an {r - 1}-graph on {n} vertices")
    check_seed(seed)
    edges = []
    has = aux.has_edge
    for S in combinations(range(n), r):
        cnt = sum(1 for i in range(r) if has(S[:i] + S[i + 1:]))
        if cnt % 2 == 0:
            edges.append(S)
    arr = np.array(edges, dtype=np.int64).reshape(-1, r)
    return Hypergraph(r, n, arr), aux


# --- step-up --------------------------------------------------------------------------

def stepup_color(a: Sequence[int], phi: EdgeLabeling, Glow: Hypergraph) -> str:
    a = tuple(a)
    if any(x >= y for x, y in zip(a, a[1:])):
        raise InputError(f"tuple {a} is not strictly increasing")
    labels = [phi(a[0], x) for x in a[1:]]
    if len(set(labels)) != len(labels):
        return "blue"
    return "red" if Glow.has_edge(labels) else "blue"


def stepup_construction(Glow: Hypergraph, phi: EdgeLabeling, N: int | None = None,
                        budget: Budget | int | None = None) -> Hypergraph:
    """r-graph on [N] of the red r-tuples, r = Glow.r + 1."""
    if N is None:
        N = phi.N
    if phi.N != N:
        raise InputError(f"labeling is on {phi.N} vertices, expected N={N}")
    if phi.n != Glow.n:
        raise InputError(f"labeling has {phi.n} colors but the low graph has {Glow.n} vertices")
    r = Glow.r + 1
    budget = as_budget(budget)
    budget.tick(comb(N, r))
    M = phi.matrix
    if r == 3:
        adj = np.zeros((Glow.n, Glow.n), dtype=bool)
        for a, b in Glow.iter_edges():
            adj[a, b] = adj[b, a] = True
        chunks = []
        for a1 in range(N - 2):
            lab = M[a1, a1 + 1:]
            red = np.triu(adj[lab[:, None], lab[None, :]], 1)
            i, j = np.nonzero(red)
            if len(i):
                chunks.append(np.stack([np.full(len(i), a1), i + a1 + 1, j + a1 + 1], axis=1))
        arr = np.concatenate(chunks) if chunks else np.zeros((0, 3), np.int64)
        return Hypergraph(3, N, arr)
    edges = []
    for a in combinations(range(N), r):
        labels = [int(M[a[0], x]) for x in a[1:]]
        if len(set(labels)) == len(labels) and Glow.has_edge(labels):
            edges.append(a)
    return Hypergraph(r, N, edges)


def build_f_star(F: Hypergraph) -> OrderedHypergraph:
    """Ordered gadget: vertex 0 joined to every edge of F (shifted by one) plus all r-sets of the rest."""
    f = F.n
    r = F.r + 1
    if f < r - 1:
        raise InputError(f"F needs at least {r - 1} vertices, has {f}")
    edges = [(0,) + tuple(v + 1 for v in J) for J in F.iter_edges()]
    edges += list(combinations(range(1, f + 1), r))
    return OrderedHypergraph.of(Hypergraph(r, f + 1, edges))


def is_extendable(F: Hypergraph, budget: Budget | int | None = None) -> tuple[bool, tuple]:
    """(True, clique) or (False, uncovered pair / ())."""
    covered = [0] * F.n
    for key, m in F.links.items():
        for v in key:
            covered[v] |= m | bits_of(key)
    for u in range(F.n):
        missing = ((1 << F.n) - 1) & ~covered[u] & ~((2 << u) - 1)
        if missing:
            return False, (u, (missing & -missing).bit_length() - 1)
    clique = find_clique(F, F.r + 1, budget) if F.n >= F.r + 1 else None
    if clique is None:
        return False, ()
    return True, clique


def extend_to_extendable(F: Hypergraph) -> Hypergraph:
    """Add r+1 new vertices of full degree."""
    n2 = F.n + F.r + 1
    new = bits_of(range(F.n, n2))
    edges = list(F.iter_edges())
    for S in combinations(range(n2), F.r):
        if bits_of(S) & new:
            edges.append(S)
    return Hypergraph(F.r, n2, edges)


# --- random graphs ----------------------------------------------------------------------

def random_triangle_free_graph(n: int, seed: int, stream_name: str = "triangle-free") -> Hypergraph:
    """Random greedy triangle-free process: scan pairs in random order, keep those closing no triangle."""
    rng = stream(seed, stream_name)
    pairs = list(combinations(range(n), 2))
    adj = [0] * n
    edges = []
    for idx in rng.permutation(len(pairs)).tolist():
        a, b = pairs[idx]
        if adj[a] & adj[b] == 0:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
            edges.append((a, b))
    return Hypergraph(2, n, edges)


def _unrank_lex(idx: int, n: int, r: int) -> tuple[int, ...]:
    out = []
    x = 0
    for k in range(r, 0, -1):
        while True:
            c = comb(n - x - 1, k - 1)
            if idx < c:
                break
            idx -= c
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def random_hypergraph(n: int, r: int, p, seed: int, stream_name: str = "gnp") -> Hypergraph:
    """Each r-set independently an edge with probability p."""
    p = float(p)
    if not 0 <= p <= 1:
        raise InputError(f"p must lie in [0, 1], got {p}")
    rng = stream(seed, stream_name)
    total = comb(n, r)
    count = int(rng.binomial(total, p)) if total else 0
    chosen = np.sort(rng.choice(total, size=count, replace=False)) if count else []
    return Hypergraph(r, n, [_unrank_lex(int(i), n, r) for i in chosen])


class ImplicitHypergraph:
    """Random 3-graph given by a hash oracle; never materialized.

    Membership of each triple is an independent fair coin derived from
    (seed, triple), so instances far beyond memory can be queried.
    """

    def __init__(self, n: int, seed: int, r: int = 3):
        self.n = n
        self.r = r
        self.seed = check_seed(seed)
        self._salt = seed.to_bytes(8, "little")

    def has_edge(self, e: Iterable[int]) -> bool:
        e = sorted(e)
        h = hashlib.blake2b(self._salt + b"".join(v.to_bytes(4, "little") for v in e), digest_size=1)
        return bool(h.digest()[0] & 1)


# --- bad tuples ------------------------------------------------------------------------------

@dataclass(frozen=True)
class BadTupleResult:
    witness: tuple[tuple[int, ...], ...] | None
    mode: str
    exhaustive: bool
    part_size: int
    floored: bool
    nodes: int
    samples: int = 0


def is_bad_tuple(phi: EdgeLabeling, parts: Sequence[Sequence[int]], theta) -> bool:
    """Every a in the first part sees fewer than theta colors on some later part."""
    theta = as_fraction(theta)
    flat = [v for p in parts for v in p]
    if len(set(flat)) != len(flat):
        return False
    for a in parts[0]:
        if not any(len({phi(a, x) for x in Ai}) < theta for Ai in parts[1:]):
            return False
    return True


def _bad_tuple_setup(phi: EdgeLabeling, params: LabelingParams) -> tuple[int, bool]:
    r, t = params.r, params.t
    s = t // r
    if s < 1:
        raise PreconditionError(f"part size t/r = {t}/{r} floors to 0")
    if r * s > phi.N:
        raise PreconditionError(f"r * (t/r) = {r * s} exceeds N = {phi.N}")
    return s, t % r != 0


def find_bad_tuple(phi: EdgeLabeling, params: LabelingParams, mode: str = "exact",
                   samples: int = 10_000, seed: int = 0,
                   budget: Budget | int | None = None) -> BadTupleResult:
    """Search for disjoint A_1..A_r of size t/r violating the labeling property.

    Exact mode returns the least witness with A_1 first in lexicographic order
    and A_2 < ... < A_r (the condition is symmetric in the later parts).
    """
    s, floored = _bad_tuple_setup(phi, params)
    r, theta = params.r, params.theta
    budget = as_budget(budget)
    rows = phi.matrix.tolist()
    if mode == "sampled":
        if samples < 1:
            raise InputError("sampled mode needs samples >= 1")
        rng = stream(seed, "bad-tuple")
        for _ in range(samples):
            budget.tick()
            pick = rng.choice(phi.N, size=r * s, replace=False).tolist()
            parts = [tuple(sorted(pick[i * s:(i + 1) * s])) for i in range(r)]
            parts = [parts[0]] + sorted(parts[1:])
            if is_bad_tuple(phi, parts, theta):
                return BadTupleResult(tuple(parts), mode, False, s, floored, budget.nodes, samples)
        return BadTupleResult(None, mode, False, s, floored, budget.nodes, samples)
    if mode != "exact":
        raise InputError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    for A1 in combinations(range(phi.N), s):
        budget.tick()
        full = (1 << s) - 1
        rest = [v for v in range(phi.N) if v not in A1]
        cand = []
        for X in combinations(rest, s):
            budget.tick()
            cov = 0
            for idx, a in enumerate(A1):
                ra = rows[a]
                if len({ra[x] for x in X}) < theta:
                    cov |= 1 << idx
            cand.append((X, bits_of(X), cov))
        found = _cover_search(cand, 0, 0, full, r - 1, budget)
        if found is not None:
            return BadTupleResult((A1,) + tuple(cand[i][0] for i in found), mode, True, s,
                                  floored, budget.nodes)
    return BadTupleResult(None, mode, True, s, floored, budget.nodes)


def _cover_search(cand, start, used, need, left, budget):
    """Indices i_1 < ... < i_left into cand: pairwise disjoint, covers OR to ``need``."""
    if left == 0:
        return () if need == 0 else None
    union = 0
    for i in range(start, len(cand)):
        union |= cand[i][2]
    if need & ~union:
        return None
    for i in range(start, len(cand)):
        X, xm, cov = cand[i]
        if xm & used:
            continue
        budget.tick()
        if left == 1:
            if need & ~cov == 0:
                return (i,)
            continue
        sub = _cover_search(cand, i + 1, used | xm, need & ~cov, left - 1, budget)
        if sub is not None:
            return (i,) + sub
    return None


# --- deletion method -----------------------------------------------------------------------

@dataclass(frozen=True)
class DeletionParams:
    n: int
    r: int = 3
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.r < 2:
            raise InputError(f"r must be >= 2, got {self.r}")
        if self.n < self.r + 1:
            raise InputError(f"deletion construction needs n >= r+1, got n={self.n}")
        if self.p is None:
            object.__setattr__(self, "p", float(self.n) ** -0.8)
        if not 0 <= self.p <= 1:
            raise InputError(f"p must lie in [0, 1], got {self.p}")
        check_seed(self.seed)


@dataclass(frozen=True)
class DeletionLog:
    sampled_edges: int
    cliques: tuple[tuple[int, ...], ...]
    deleted: tuple[int, ...]
    survivors: tuple[int, ...]
    expected_cliques_rsets: float
    expected_cliques_r1sets: float

    def to_dict(self) -> dict:
        return {"sampled_edges": self.sampled_edges, "cliques": [list(c) for c in self.cliques],
                "deleted": list(self.deleted), "survivors": len(self.survivors),
                "expected_cliques_binom_n_r": self.expected_cliques_rsets,
                "expected_cliques_binom_n_r1": self.expected_cliques_r1sets}


def deletion_construction(params: DeletionParams, budget: Budget | int | None = None
                          ) -> tuple[Hypergraph, DeletionLog]:
    """Sample G(n, p), then destroy every K_{r+1}: delete the top vertex of the lex-first clique."""
    n, r, p = params.n, params.r, params.p
    budget = as_budget(budget)
    H = random_hypergraph(n, r, p, params.seed, "deletion")
    alive = (1 << n) - 1
    cliques, deleted = [], []
    while True:
        c = find_clique(H, r + 1, budget, within=alive)
        if c is None:
            break
        cliques.append(c)
        deleted.append(c[-1])
        alive &= ~(1 << c[-1])
    survivors = tuple(iter_bits(alive))
    log = DeletionLog(H.num_edges, tuple(cliques), tuple(deleted), survivors,
                      comb(n, r) * p ** (r + 1), comb(n, r + 1) * p ** (r + 1))
    return induce(H, survivors), log


# --- partite systems ---------------------------------------------------------------------------

def synthetic_partite_system(k: int, m: int, delete_fraction=0.0, seed: int = 0) -> PartiteSystem:
    """Complete k-partite G on classes of size m; H3 = its transversal triangles minus a random fraction.

    For each triple of classes exactly round(fraction * m^3) triangles are removed.
    """
    if k < 3 or m < 1:
        raise InputError(f"need k >= 3 and m >= 1, got k={k}, m={m}")
    frac = float(delete_fraction)
    if not 0 <= frac <= 1:
        raise InputError("delete_fraction must lie in [0, 1]")
    n = k * m
    classes = tuple(tuple(range(i * m, (i + 1) * m)) for i in range(k))
    cmask = [bits_of(c) for c in classes]
    full = (1 << n) - 1
    g_links = {(v,): full & ~cmask[v // m] for v in range(n)}
    G = Hypergraph.from_links(2, n, g_links)
    links: dict[tuple[int, int], int] = {}
    drop = round(frac * m**3)
    for a, b, c in combinations(range(k), 3):
        T = np.ones((m, m, m), dtype=bool)
        if drop:
            rng = stream(seed, f"synthetic/{a}/{b}/{c}")
            T.reshape(-1)[rng.choice(m**3, size=drop, replace=False)] = False
        for axes, (p, q, o) in (((0, 1, 2), (a, b, c)), ((0, 2, 1), (a, c, b)), ((1, 2, 0), (b, c, a))):
            packed = np.packbits(np.transpose(T, axes), axis=-1, bitorder="little")
            flat = packed.reshape(m * m, -1)
            shift = o * m
            for idx, row in enumerate(flat):
                val = int.from_bytes(row.tobytes(), "little")
                if val:
                    x, y = divmod(idx, m)
                    key = (p * m + x, q * m + y)
                    links[key] = links.get(key, 0) | (val << shift)
    H3 = Hypergraph.from_links(3, n, links)
    return PartiteSystem(classes, G, H3)


# --- step-up pipeline -----------------------------------------------------------------------------

@dataclass(frozen=True)
class BlueExtraction:
    """Outcome of turning a complement K_{t..t} into a bad tuple or a blue structure."""

    outcome: str  # "bad-tuple" | "blue-partite" | "inconclusive"
    parts: tuple[tuple[int, ...], ...]
    anchor: int | None = None
    label_parts: tuple[tuple[int, ...], ...] = ()
    reason: str = ""

    def to_dict(self) -> dict:
        return {"outcome": self.outcome, "parts": [list(p) for p in self.parts], "anchor": self.anchor,
                "label_parts": [list(p) for p in self.label_parts], "reason": self.reason}


def extract_blue_tuple(Q: Sequence[Sequence[int]], phi: EdgeLabeling, Glow: Hypergraph,
                       params: LabelingParams) -> BlueExtraction:
    """Given the parts of a K_{t..t} in the complement of the step-up graph, run the dichotomy.

    Takes the first t vertices A', a class holding t/r of them, and for every
    other class the t/r least vertices beyond that set. Either those parts are a
    bad tuple for phi, or some anchor sees many colors on each part and
    distinct-color representatives give a complete (r-1)-partite structure in
    the complement of Glow.
    """
    r = Glow.r + 1
    t = len(Q[0])
    s = t // r
    if s < 1:
        return BlueExtraction("inconclusive", (), reason=f"t={t} < r={r}")
    union = sorted(v for q in Q for v in q)
    first = set(union[:t])
    counts = [sum(1 for v in q if v in first) for q in Q]
    c1 = max(range(len(Q)), key=lambda i: (counts[i], -i))
    A1 = tuple(sorted(v for v in Q[c1] if v in first)[:s])
    top = A1[-1]
    parts = [A1]
    for i, q in enumerate(Q):
        if i != c1:
            parts.append(tuple(sorted(v for v in q if v > top)[:s]))
    parts = tuple(parts)
    if any(len(p) < s for p in parts):
        return BlueExtraction("inconclusive", parts, reason="a class has too few vertices beyond A1")
    theta = params.theta
    if is_bad_tuple(phi, parts, theta):
        return BlueExtraction("bad-tuple", parts)
    for a in A1:
        if all(len({phi(a, x) for x in Ai}) >= theta for Ai in parts[1:]):
            break
    else:  # pragma: no cover - excluded by is_bad_tuple
        raise AssertionError("dichotomy violated")
    q = max(1, int(theta / r))
    used: set[int] = set()
    reps = []
    for Ai in parts[1:]:
        chosen = []
        for x in Ai:
            c = phi(a, x)
            if c not in used and len(chosen) < q:
                used.add(c)
                chosen.append(c)
        if not chosen:
            return BlueExtraction("inconclusive", parts, a, reason="no fresh color for a part")
        reps.append(tuple(sorted(chosen)))
    for combo in product(*reps):
        if Glow.has_edge(combo):
            return BlueExtraction("inconclusive", parts, a, tuple(reps),
                                  reason=f"labels {combo} form an edge of the low graph")
    return BlueExtraction("blue-partite", parts, a, tuple(reps))


def stepup_pipeline(Glow: Hypergraph, t: int, params: LabelingParams | None = None, seed: int = 0, *,
                    F: Hypergraph | None = None, N: int | None = None, max_N: int = DEFAULT_MAX_N,
                    samples: int = 2000, exact_limit: int = 300, strict: bool = False,
                    budget: int | None = None):
    """Labeling search, step-up, and every certificate affordable at this scale.

    Returns (G+, phi, CertReport). ``F`` is the pattern Glow avoids (defaults to
    nothing); N defaults to n^ceil(c1 t) and is capped at ``max_N``.
    """
    from . import certify

    seed = check_seed(seed)
    r = Glow.r + 1
    if params is None:
        params = LabelingParams(r, t)
    if params.r != r or params.t != t:
        raise InputError(f"params (r={params.r}, t={params.t}) disagree with r={r}, t={t}")
    n = Glow.n
    details: dict = {"params": params.to_dict()}
    sub = []
    pre_parts = params.c0 * t
    details["c0_t"] = str(pre_parts)
    if F is not None:
        rep = certify.induced_report(Glow, F, budget=budget)
        sub.append(rep)
        if rep.verdict != "certified-absent":
            raise PreconditionError("low graph contains an induced copy of F")
    if pre_parts >= 1:
        q = int(pre_parts)
        for which, host in (("low", Glow), ("low-complement", complement(Glow))):
            rep = certify.partite_report(host, q, budget=budget, label=which)
            sub.append(rep)
            if rep.verdict != "certified-absent":
                raise PreconditionError(f"{which} graph contains a complete partite graph with parts {q}")
        details["low_partite_precondition"] = "checked"
    else:
        details["low_partite_precondition"] = "vacuous: c0*t < 1"
        if strict:
            raise PreconditionError(f"c0*t = {pre_parts} < 1; part-size precondition is vacuous")
    formula_N = n ** ceil(params.c1 * t) if n > 1 else 1
    if N is None:
        N = min(formula_N, max_N)
    elif N > max_N:
        raise InputError(f"N={N} exceeds the cap {max_N}")
    details.update(formula_N=str(formula_N), N=N, cap=max_N, capped=N < formula_N)
    attempts = []
    phi = None
    tuple_check = params.t // r >= 1 and r * (params.t // r) <= N
    for att in range(LABELING_ATTEMPTS):
        cand = random_labeling(N, n, seed, f"labeling/{att}")
        if not tuple_check:
            attempts.append({"attempt": att, "bad_tuple": "not applicable"})
            phi = cand
            break
        res = find_bad_tuple(cand, params, "sampled", samples=samples, seed=seed ^ att)
        attempts.append({"attempt": att, "bad_tuple": None if res.witness is None else
                         [list(p) for p in res.witness]})
        if res.witness is None:
            phi = cand
            break
    details["labeling_attempts"] = attempts
    if phi is None:
        raise LimitError(f"no labeling passed the bad-tuple check in {LABELING_ATTEMPTS} attempts",
                         log=attempts)
    Gp = stepup_construction(Glow, phi, N, budget=budget)
    mode = "exact" if N <= exact_limit else "sampled"
    details["certification_mode"] = mode
    if F is not None and mode == "exact":
        Fs = build_f_star(F)
        sub.append(certify.ordered_induced_report(OrderedHypergraph.of(Gp), Fs, budget=budget))
        if F.num_edges == comb(F.n, F.r):
            sub.append(certify.clique_report(Gp, F.n + 1, budget=budget))
    extractions = []
    if r * t <= N and mode == "exact":
        for which, host in (("stepup", Gp), ("stepup-complement", complement(Gp))):
            rep = certify.partite_report(host, t, budget=budget, label=which)
            sub.append(rep)
            if which == "stepup-complement" and rep.witness is not None:
                ex = extract_blue_tuple(rep.witness, phi, Glow, params)
                extractions.append(ex.to_dict())
    details["blue_extractions"] = extractions
    details["positive_control"] = bool(extractions)
    report = certify.combine("stepup-pipeline", sub, seed=seed, params={"t": t, "N": N},
                             details=details)
    return Gp, phi, report
