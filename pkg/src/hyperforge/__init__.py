"""Construct extremal hypergraphs and certify their properties by exact or sampled search."""

from __future__ import annotations

from .errors import (
    HyperforgeError,
    InputError,
    LimitError,
    PreconditionError,
    ProofInequalityError,
    WitnessError,
)
from .hypercore import (
    Budget,
    Embedding,
    Hypergraph,
    OrderedHypergraph,
    PartiteSystem,
    complement,
    count_cliques,
    count_cliques_graph,
    count_cliques_through_edge,
    density,
    find_clique,
    induce,
    is_dense,
    underlies,
)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "Embedding",
    "HyperforgeError",
    "Hypergraph",
    "InputError",
    "LimitError",
    "OrderedHypergraph",
    "PartiteSystem",
    "PreconditionError",
    "ProofInequalityError",
    "WitnessError",
    "complement",
    "count_cliques",
    "count_cliques_graph",
    "count_cliques_through_edge",
    "density",
    "find_clique",
    "induce",
    "is_dense",
    "underlies",
]
