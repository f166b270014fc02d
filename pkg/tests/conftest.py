from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from hyperforge.hypercore import Hypergraph

settings.register_profile("hf", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hf")


# --- brute-force oracles: plain sets and itertools, nothing from the package's search code ---

def edge_set(H: Hypergraph) -> set[frozenset]:
    return {frozenset(e) for e in H.edges}


def bf_cliques(H: Hypergraph, k: int) -> list[tuple[int, ...]]:
    E = edge_set(H)
    return [W for W in itertools.combinations(range(H.n), k)
            if all(frozenset(e) in E for e in itertools.combinations(W, H.r))]


def bf_independent(H: Hypergraph, k: int) -> list[tuple[int, ...]]:
    E = edge_set(H)
    return [W for W in itertools.combinations(range(H.n), k)
            if not any(frozenset(e) in E for e in itertools.combinations(W, H.r))]


def bf_has_induced(H: Hypergraph, F: Hypergraph, ordered: bool = False) -> bool:
    EH, EF = edge_set(H), edge_set(F)
    maps = (itertools.combinations(range(H.n), F.n) if ordered
            else itertools.permutations(range(H.n), F.n))
    for m in maps:
        if all((frozenset(m[v] for v in e) in EH) == (frozenset(e) in EF)
               for e in itertools.combinations(range(F.n), F.r)):
            return True
    return False


def _partitions(S, r, t):
    """Unordered partitions of the tuple S into r blocks of size t."""
    if not S:
        yield ()
        return
    first, rest = S[0], S[1:]
    for mates in itertools.combinations(rest, t - 1):
        block = (first,) + mates
        left = tuple(x for x in rest if x not in mates)
        for tail in _partitions(left, r - 1, t):
            yield (block,) + tail


def bf_has_partite(H: Hypergraph, t: int, empty: bool = False) -> bool:
    E = edge_set(H)
    for S in itertools.combinations(range(H.n), H.r * t):
        for parts in _partitions(S, H.r, t):
            if all((frozenset(T) in E) != empty for T in itertools.product(*parts)):
                return True
    return False


def bf_has_eta_homogeneous(H: Hypergraph, m: int, eta) -> bool:
    E = edge_set(H)
    eta = Fraction(eta)
    total = len(list(itertools.combinations(range(m), H.r)))
    for W in itertools.combinations(range(H.n), m):
        e = sum(frozenset(T) in E for T in itertools.combinations(W, H.r))
        if Fraction(e, total) <= eta or Fraction(e, total) >= 1 - eta:
            return True
    return False


# --- strategies ---

@st.composite
def hypergraphs(draw, r=3, min_n=0, max_n=8):
    n = draw(st.integers(min_n, max_n))
    all_e = list(itertools.combinations(range(n), r))
    picks = draw(st.lists(st.booleans(), min_size=len(all_e), max_size=len(all_e)))
    return Hypergraph(r, n, [e for e, p in zip(all_e, picks) if p])


@pytest.fixture
def three_edge_pattern() -> Hypergraph:
    return Hypergraph(3, 4, [(0, 1, 2), (0, 1, 3), (0, 2, 3)])
