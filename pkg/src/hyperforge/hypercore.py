"""Uniform hypergraphs and the exact counting primitives built on them.

A hypergraph is stored through its links: for every (r-1)-set T the bitmask of
vertices v with T + {v} an edge. Clique, induced and partite searches only ever
intersect such masks, and the representation never needs a tuple per edge,
which matters for the dense partite systems handled by the amplify module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import InputError, LimitError

DEFAULT_BUDGET = 10**8
_DENSE_LIMIT = 400  # largest n for the dense numpy link builder (n**3 bytes)


class Budget:
    """Node counter for one exact call; raises instead of truncating."""

    __slots__ = ("limit", "nodes")

    def __init__(self, limit: int = DEFAULT_BUDGET):
        if limit < 1:
            raise InputError("budget must be >= 1")
        self.limit = int(limit)
        self.nodes = 0

    def tick(self, k: int = 1) -> None:
        self.nodes += k
        if self.nodes > self.limit:
            raise LimitError(f"search budget of {self.limit} nodes exceeded", nodes=self.nodes)


def as_budget(budget: Budget | int | None) -> Budget:
    if budget is None:
        return Budget()
    if isinstance(budget, Budget):
        return budget
    return Budget(budget)


def as_fraction(x) -> Fraction:
    """Exact rational from int/Fraction/str, or from a float via its shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def _above(v: int) -> int:
    """Mask selecting bits strictly greater than v (unbounded; AND with a finite mask)."""
    return ~((2 << v) - 1)


class Hypergraph:
    """r-uniform hypergraph on vertices 0..n-1.

    Immutable after construction. ``edges`` is materialized lazily, so very
    large instances built with :meth:`from_links` can be counted and searched
    without ever building the tuple set.
    """

    __slots__ = ("r", "n", "_links", "_m", "_edges", "_hash", "_adj")

    def __init__(self, r: int, n: int, edges: Iterable[Iterable[int]] = ()):
        r, n = int(r), int(n)
        if r < 2:
            raise InputError(f"uniformity must be >= 2, got {r}")
        if n < 0:
            raise InputError(f"vertex count must be >= 0, got {n}")
        if isinstance(edges, np.ndarray):
            links = _links_from_array(r, n, edges)
        else:
            links: dict[tuple[int, ...], int] = {}
            for e in edges:
                e = _canon_edge(e, r, n)
                for i in range(r):
                    key = e[:i] + e[i + 1:]
                    links[key] = links.get(key, 0) | (1 << e[i])
        self._init(r, n, links)

    def _init(self, r: int, n: int, links: dict) -> None:
        self.r = r
        self.n = n
        self._links = links
        self._m = None
        self._edges = None
        self._hash = None
        self._adj = None

    @classmethod
    def from_links(cls, r: int, n: int, links: Mapping[tuple[int, ...], int]) -> "Hypergraph":
        """Build from a full link map. Links must be symmetric: every edge appears r times."""
        h = cls.__new__(cls)
        h._init(int(r), int(n), {k: m for k, m in links.items() if m})
        return h

    @classmethod
    def complete(cls, r: int, n: int) -> "Hypergraph":
        full = (1 << n) - 1
        links = {}
        for key in combinations(range(n), r - 1):
            m = full & ~bits_of(key)
            if m:
                links[key] = m
        return cls.from_links(r, n, links)

    # --- basic queries -------------------------------------------------
    @property
    def num_edges(self) -> int:
        if self._m is None:
            self._m = sum(m.bit_count() for m in self._links.values()) // self.r
        return self._m

    def __len__(self) -> int:
        return self.num_edges

    @property
    def edges(self) -> frozenset[tuple[int, ...]]:
        if self._edges is None:
            self._edges = frozenset(self.iter_edges())
        return self._edges

    def iter_edges(self) -> Iterator[tuple[int, ...]]:
        """Edges in lexicographic order."""
        for key in sorted(self._links):
            for v in iter_bits(self._links[key] & _above(key[-1])):
                yield key + (v,)

    def has_edge(self, e: Iterable[int]) -> bool:
        e = tuple(sorted(e))
        return bool((self._links.get(e[:-1], 0) >> e[-1]) & 1)

    def link(self, key: tuple[int, ...]) -> int:
        """Mask of vertices completing the sorted (r-1)-tuple ``key`` to an edge."""
        return self._links.get(key, 0)

    @property
    def links(self) -> Mapping[tuple[int, ...], int]:
        return self._links

    @property
    def vertex_mask(self) -> int:
        return (1 << self.n) - 1

    def adjacency(self) -> list[int]:
        """Neighborhood masks (2-graphs only)."""
        if self.r != 2:
            raise InputError("adjacency() needs a 2-graph")
        if self._adj is None:
            self._adj = [self._links.get((v,), 0) for v in range(self.n)]
        return self._adj

    def degree(self, v: int) -> int:
        return sum(m.bit_count() for k, m in self._links.items() if v in k) // (self.r - 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph) or isinstance(other, OrderedHypergraph):
            return NotImplemented
        return self.r == other.r and self.n == other.n and self._links == other._links

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.r, self.n, frozenset(self._links.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Hypergraph(r={self.r}, n={self.n}, m={self.num_edges})"


class OrderedHypergraph(Hypergraph):
    """Hypergraph whose numeric vertex order is part of its identity."""

    __slots__ = ()

    @classmethod
    def of(cls, base: Hypergraph) -> "OrderedHypergraph":
        h = cls.__new__(cls)
        h._init(base.r, base.n, base._links)
        return h

    @property
    def base(self) -> Hypergraph:
        return Hypergraph.from_links(self.r, self.n, self._links)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrderedHypergraph):
            return NotImplemented
        return self.r == other.r and self.n == other.n and self._links == other._links

    def __hash__(self) -> int:
        return hash(("ordered", super().__hash__()))

    def __repr__(self) -> str:
        return f"OrderedHypergraph(r={self.r}, n={self.n}, m={self.num_edges})"


def _canon_edge(e, r: int, n: int) -> tuple[int, ...]:
    t = tuple(sorted(int(v) for v in e))
    if len(t) != r or len(set(t)) != r:
        raise InputError(f"edge {tuple(e)} does not have exactly {r} distinct vertices")
    if t and (t[0] < 0 or t[-1] >= n):
        raise InputError(f"edge {tuple(e)} has a vertex outside [0, {n})")
    return t


def _links_from_array(r: int, n: int, arr: np.ndarray) -> dict:
    arr = np.asarray(arr, dtype=np.int64).reshape(-1, r) if arr.size else np.zeros((0, r), np.int64)
    arr = np.sort(arr, axis=1)
    if len(arr):
        if arr.min() < 0 or arr.max() >= n:
            raise InputError(f"edge array has a vertex outside [0, {n})")
        if r > 1 and (np.diff(arr, axis=1) == 0).any():
            raise InputError("edge array has a repeated vertex inside an edge")
    if r in (2, 3) and 0 < n <= _DENSE_LIMIT:
        return _dense_links(r, n, arr)
    links: dict[tuple[int, ...], int] = {}
    for row in arr.tolist():
        for i in range(r):
            key = tuple(row[:i] + row[i + 1:])
            links[key] = links.get(key, 0) | (1 << row[i])
    return links


def _dense_links(r: int, n: int, arr: np.ndarray) -> dict:
    from itertools import permutations

    dense = np.zeros((n,) * r, dtype=bool)
    for perm in permutations(range(r)):
        dense[tuple(arr[:, p] for p in perm)] = True
    packed = np.packbits(dense, axis=-1, bitorder="little")
    links = {}
    if r == 2:
        for v in range(n):
            m = int.from_bytes(packed[v].tobytes(), "little")
            if m:
                links[(v,)] = m
    else:
        rows = np.flatnonzero(packed.reshape(n * n, -1).any(axis=1))
        flat = packed.reshape(n * n, -1)
        for idx in rows.tolist():
            a, b = divmod(idx, n)
            if a < b:
                links[(a, b)] = int.from_bytes(flat[idx].tobytes(), "little")
    return links


@dataclass(frozen=True)
class Embedding:
    """Injective map from pattern vertex i to host vertex ``map[i]``."""

    map: tuple[int, ...]
    ordered: bool = False

    def __post_init__(self):
        if len(set(self.map)) != len(self.map):
            raise InputError(f"embedding {self.map} is not injective")


# --- elementary operations ------------------------------------------------

def complement(H: Hypergraph) -> Hypergraph:
    full = H.vertex_mask
    links = {}
    for key in combinations(range(H.n), H.r - 1):
        m = full & ~bits_of(key) & ~H._links.get(key, 0)
        if m:
            links[key] = m
    cls = OrderedHypergraph if isinstance(H, OrderedHypergraph) else Hypergraph
    out = Hypergraph.from_links(H.r, H.n, links)
    return OrderedHypergraph.of(out) if cls is OrderedHypergraph else out


def induce(H: Hypergraph, W: Iterable[int]) -> Hypergraph:
    """Sub-hypergraph on W, relabelled to 0..|W|-1 in increasing order."""
    W = sorted(set(int(w) for w in W))
    for w in W:
        if not 0 <= w < H.n:
            raise InputError(f"vertex {w} outside [0, {H.n})")
    index = {w: i for i, w in enumerate(W)}
    wmask = bits_of(W)
    edges = []
    for key in combinations(W, H.r - 1):
        m = H._links.get(key, 0) & wmask & _above(key[-1])
        if m:
            base = tuple(index[x] for x in key)
            edges.extend(base + (index[v],) for v in iter_bits(m))
    out = Hypergraph(H.r, len(W), edges)
    return OrderedHypergraph.of(out) if isinstance(H, OrderedHypergraph) else out


def density(H: Hypergraph) -> Fraction:
    if H.n < H.r:
        raise InputError(f"density undefined for n={H.n} < r={H.r}")
    return Fraction(H.num_edges, comb(H.n, H.r))


def _neg_link(H: Hypergraph, key: tuple[int, ...]) -> int:
    return H.vertex_mask & ~bits_of(key) & ~H._links.get(key, 0)


def _clique_search(H: Hypergraph, k: int, budget: Budget, *, count: bool,
                   within: int | None = None, negate: bool = False):
    """Shared DFS over increasing vertex sequences.

    Returns the number of k-cliques (``count=True``) or the lexicographically
    least one as a tuple (or None). ``negate`` searches the complement.
    """
    r = H.r
    links = H._links
    full = H.vertex_mask if within is None else (within & H.vertex_mask)
    if negate:
        def lk(key):
            return _neg_link(H, key)
    else:
        def lk(key):
            return links.get(key, 0)
    memo: dict | None = {} if (count and r == 2) else None

    def rec(S: tuple, cand: int, need: int):
        if need == 1:
            budget.tick()
            if count:
                return cand.bit_count()
            return S + ((cand & -cand).bit_length() - 1,) if cand else None
        if memo is not None:
            hit = memo.get((need, cand))
            if hit is not None:
                return hit
        total = 0
        for v in iter_bits(cand):
            budget.tick()
            nc = cand & _above(v)
            if nc.bit_count() < need - 1:
                break
            for U in combinations(S, r - 2):
                nc &= lk(U + (v,))
                if not nc:
                    break
            if nc.bit_count() < need - 1:
                continue
            res = rec(S + (v,), nc, need - 1)
            if count:
                total += res
            elif res is not None:
                return res
        if memo is not None:
            memo[(need, cand)] = total
        return total if count else None

    if k < r:
        raise InputError(f"clique size k={k} must be >= r={r}")
    if k > full.bit_count():
        return 0 if count else None
    return rec((), full, k)


def count_cliques(H: Hypergraph, k: int, budget: Budget | int | None = None) -> int:
    """Exact number of k-vertex sets all of whose r-subsets are edges."""
    return _clique_search(H, k, as_budget(budget), count=True)


def find_clique(H: Hypergraph, k: int, budget: Budget | int | None = None, *,
                within: int | None = None, negate: bool = False) -> tuple[int, ...] | None:
    """Lexicographically least k-clique (or independent k-set when ``negate``)."""
    return _clique_search(H, k, as_budget(budget), count=False, within=within, negate=negate)


def count_cliques_graph(G: Hypergraph, k: int, budget: Budget | int | None = None) -> int:
    if G.r != 2:
        raise InputError("count_cliques_graph needs a 2-graph")
    return count_cliques(G, k, budget)


def triangles(G: Hypergraph) -> set[tuple[int, int, int]]:
    if G.r != 2:
        raise InputError("triangles() needs a 2-graph")
    adj = G.adjacency()
    out = set()
    for a in range(G.n):
        for b in iter_bits(adj[a] & _above(a)):
            for c in iter_bits(adj[a] & adj[b] & _above(b)):
                out.add((a, b, c))
    return out


def underlies(G: Hypergraph, H3: Hypergraph) -> bool:
    """True iff every edge of H3 spans a triangle of G."""
    if G.r != 2 or H3.r != 3:
        raise InputError("underlies() needs a 2-graph and a 3-graph")
    if G.n != H3.n:
        raise InputError(f"vertex sets differ: {G.n} vs {H3.n}")
    adj = G.adjacency()
    for (a, b), m in H3._links.items():
        if not (adj[a] >> b) & 1:
            return False
        if m & ~(adj[a] & adj[b]):
            return False
    return True


# --- partite systems ----------------------------------------------------------

@dataclass(frozen=True)
class PartiteSystem:
    """Disjoint classes V_1..V_k with a 2-graph G and a 3-graph H3 on [0, n).

    G and H3 are global; only edges inside the union of the classes count.
    Refinement swaps the classes for subsets and keeps G and H3 untouched.
    """

    classes: tuple[tuple[int, ...], ...]
    G: Hypergraph
    H3: Hypergraph
    masks: tuple[int, ...] = field(init=False, repr=False, compare=False)
    class_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        classes = tuple(tuple(sorted(int(v) for v in c)) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        if self.G.r != 2 or self.H3.r != 3:
            raise InputError("partite system needs a 2-graph G and a 3-graph H3")
        if self.G.n != self.H3.n:
            raise InputError("G and H3 must share a vertex set")
        if len(classes) < 3:
            raise InputError(f"need at least 3 classes, got {len(classes)}")
        class_of = {}
        masks = []
        for i, c in enumerate(classes):
            for v in c:
                if not 0 <= v < self.G.n:
                    raise InputError(f"vertex {v} outside [0, {self.G.n})")
                if v in class_of:
                    raise InputError(f"vertex {v} appears in two classes")
                class_of[v] = i
            masks.append(bits_of(c))
        object.__setattr__(self, "masks", tuple(masks))
        object.__setattr__(self, "class_of", class_of)
        self._check_partite()

    def _check_partite(self) -> None:
        adj = self.G.adjacency()
        for i, c in enumerate(self.classes):
            for v in c:
                if adj[v] & self.masks[i]:
                    raise InputError(f"G has an edge inside class {i} at vertex {v}")
        union = self.union
        links = self.H3._links
        if len(links) <= union.bit_count() ** 2 // 2:
            pairs = ((k, m) for k, m in links.items()
                     if k[0] in self.class_of and k[1] in self.class_of)
        else:
            verts = sorted(self.class_of)
            pairs = (((a, b), links[(a, b)]) for a, b in combinations(verts, 2) if (a, b) in links)
        for (a, b), m in pairs:
            m &= union
            if not m:
                continue
            ca, cb = self.class_of[a], self.class_of[b]
            if ca == cb or m & (self.masks[ca] | self.masks[cb]):
                raise InputError(f"H3 has an edge through pair {(a, b)} meeting a class twice")

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def union(self) -> int:
        u = 0
        for m in self.masks:
            u |= m
        return u

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def refine(self, replace: Mapping[int, Iterable[int]]) -> "PartiteSystem":
        """Same G and H3 with classes i replaced by subsets ``replace[i]``."""
        classes = list(self.classes)
        for i, sub in replace.items():
            sub = tuple(sorted(sub))
            if not set(sub) <= set(classes[i]):
                raise InputError(f"replacement for class {i} is not a subset")
            classes[i] = sub
        return _refined(self, tuple(classes))


def _refined(P: PartiteSystem, classes: tuple) -> PartiteSystem:
    # subsets of partite classes stay partite; skip the O(|H3|) recheck
    out = object.__new__(PartiteSystem)
    object.__setattr__(out, "classes", classes)
    object.__setattr__(out, "G", P.G)
    object.__setattr__(out, "H3", P.H3)
    object.__setattr__(out, "masks", tuple(bits_of(c) for c in classes))
    object.__setattr__(out, "class_of", {v: i for i, c in enumerate(classes) for v in c})
    return out


class _TransversalCounter:
    """Counts transversal k-cliques of G or of H3 (pairs in G) in a partite system.

    Subproblems are memoised on their full state (remaining classes, candidate
    mask, per-vertex pair constraints), so structured systems such as complete
    multipartite ones collapse to a handful of states.
    """

    def __init__(self, P: PartiteSystem, target: str, budget: Budget):
        if target not in ("G", "H3"):
            raise InputError(f"target must be 'G' or 'H3', got {target!r}")
        self.P = P
        self.hyper = target == "H3"
        self.adj = P.G.adjacency()
        self.links = P.H3._links
        self.budget = budget
        self._memos: dict[tuple, dict] = {}

    def _L(self, a: int, b: int) -> int:
        return self.links.get((a, b) if a < b else (b, a), 0)

    def count(self, fixed: tuple[int, ...] = ()) -> int:
        P = self.P
        used = {P.class_of[v] for v in fixed}
        if len(used) != len(fixed):
            return 0
        rest = sorted((i for i in range(P.k) if i not in used),
                      key=lambda i: (len(P.classes[i]), i))
        order = tuple(P.masks[i] for i in rest)
        cand = 0
        for m in order:
            cand |= m
        adj = self.adj
        for x, y in combinations(fixed, 2):
            if not (adj[x] >> y) & 1:
                return 0
        for s in fixed:
            cand &= adj[s]
        if self.hyper:
            for x, y, z in combinations(fixed, 3):
                if not (self._L(x, y) >> z) & 1:
                    return 0
            for x, y in combinations(fixed, 2):
                cand &= self._L(x, y)
        if not order:
            return 1
        memo = self._memos.setdefault(order, {})
        if not self.hyper:
            return self._count_g(order, 0, cand, memo)
        need = self._need_masks(order)
        Pm = {}
        for y in iter_bits(cand & need[0]):
            pm = adj[y] & cand
            for s in fixed:
                pm &= self._L(s, y)
            Pm[y] = pm
        return self._count_h(order, need, 0, cand, Pm, memo)

    @staticmethod
    def _need_masks(order: tuple[int, ...]) -> list[int]:
        # need[l]: vertices whose pair-constraint mask is read at level >= l
        need = [0] * (len(order) + 1)
        for lvl in range(len(order) - 2, -1, -1):
            need[lvl] = need[lvl + 1] | order[lvl]
        return need

    def _count_g(self, order, level, cand, memo):
        rem = len(order) - level
        cm = order[level]
        self.budget.tick()
        if rem == 1:
            return (cand & cm).bit_count()
        adj = self.adj
        if rem == 2:
            nxt = order[level + 1] & cand
            xs = cand & cm
            self.budget.tick(xs.bit_count())
            return sum((adj[x] & nxt).bit_count() for x in iter_bits(xs))
        key = (level, cand)
        hit = memo.get(key)
        if hit is not None:
            return hit
        total = 0
        for x in iter_bits(cand & cm):
            c2 = cand & adj[x]
            if c2:
                total += self._count_g(order, level + 1, c2, memo)
        memo[key] = total
        return total

    def _count_h(self, order, need, level, cand, Pm, memo):
        rem = len(order) - level
        cm = order[level]
        self.budget.tick()
        if rem == 1:
            return (cand & cm).bit_count()
        if rem == 2:
            nxt = order[level + 1] & cand
            xs = cand & cm
            self.budget.tick(xs.bit_count())
            return sum((Pm[x] & nxt).bit_count() for x in iter_bits(xs))
        key = (level, cand, tuple(Pm[y] for y in iter_bits(cand & need[level])))
        hit = memo.get(key)
        if hit is not None:
            return hit
        total = 0
        L = self._L
        for x in iter_bits(cand & cm):
            c2 = cand & Pm[x]
            if not c2:
                continue
            P2 = {y: Pm[y] & c2 & L(x, y) for y in iter_bits(c2 & need[level + 1])}
            total += self._count_h(order, need, level + 1, c2, P2, memo)
        memo[key] = total
        return total


def count_transversal(P: PartiteSystem, target: str = "G", budget: Budget | int | None = None) -> int:
    """N_k of the partite system: transversal k-cliques of G, or of H3 with pairs in G."""
    return _TransversalCounter(P, target, as_budget(budget)).count()


def count_cliques_through_edge(P: PartiteSystem, e: tuple[int, int], k: int, target: str = "G",
                               budget: Budget | int | None = None) -> int:
    """Transversal k-cliques of ``target`` containing both endpoints of the G-edge e."""
    u, v = e
    if k != P.k:
        raise InputError(f"k={k} must equal the number of classes {P.k}")
    if u not in P.class_of or v not in P.class_of or P.class_of[u] == P.class_of[v]:
        raise InputError(f"edge {e} does not join two distinct classes")
    if not P.G.has_edge((u, v)):
        raise InputError(f"{e} is not an edge of G")
    return _TransversalCounter(P, target, as_budget(budget)).count((u, v))


def underlies_system(P: PartiteSystem) -> bool:
    """G underlies H3 on the transversal part of the system."""
    adj = P.G.adjacency()
    links = P.H3._links
    union = P.union
    verts = sorted(P.class_of)
    if len(links) <= len(verts) ** 2 // 2:
        items = [(k, m) for k, m in links.items() if k[0] in P.class_of and k[1] in P.class_of]
    else:
        items = [((a, b), links[(a, b)]) for a, b in combinations(verts, 2) if (a, b) in links]
    for (a, b), m in items:
        m &= union
        if not m:
            continue
        if not (adj[a] >> b) & 1 or m & ~(adj[a] & adj[b]):
            return False
    return True


@dataclass(frozen=True)
class DensityCheck:
    dense: bool
    underlies: bool
    n_graph: int
    n_hyper: int
    product: int
    eps: Fraction
    eta: Fraction
    failed: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.dense


def is_dense(P: PartiteSystem, eps, eta, budget: Budget | int | None = None) -> DensityCheck:
    """(eps, eta)-density: G underlies H3, N_k(G) >= eps*prod|V_i|, N_k(H3) >= (1-eta) N_k(G)."""
    eps, eta = as_fraction(eps), as_fraction(eta)
    if not 0 < eps <= 1:
        raise InputError(f"eps must lie in (0, 1], got {eps}")
    if not 0 <= eta < 1:
        raise InputError(f"eta must lie in [0, 1), got {eta}")
    budget = as_budget(budget)
    product = 1
    for c in P.classes:
        product *= len(c)
    und = underlies_system(P)
    n_g = count_transversal(P, "G", budget)
    n_h = count_transversal(P, "H3", budget)
    failed = []
    if not und:
        failed.append("underlies")
    if n_g < eps * product:
        failed.append("graph_cliques")
    if n_h < (1 - eta) * n_g:
        failed.append("hyper_cliques")
    return DensityCheck(not failed, und, n_g, n_h, product, eps, eta, tuple(failed))
