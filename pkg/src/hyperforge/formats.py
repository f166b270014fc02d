"""Text formats (hypergraphs, labelings, partite bundles) and canonical JSON."""

from __future__ import annotations

import hashlib
import json
from math import comb
from typing import Any, Iterator

import numpy as np

from .errors import InputError
from .hypercore import Hypergraph, OrderedHypergraph, PartiteSystem


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def provenance_lines(name: str, params: dict | None = None, seed: int | None = None) -> list[str]:
    return ["# " + canonical_json({"construction": name, "params": params or {}, "seed": seed})]


def _data_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        yield lineno, s.split()


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InputError(f"line {lineno}: expected integers, got {' '.join(tokens)!r}") from None


# --- hypergraphs ---------------------------------------------------------------

def dump_hypergraph(H: Hypergraph, header: list[str] | None = None) -> str:
    tag = "ohg" if isinstance(H, OrderedHypergraph) else "hg"
    out = list(header or [])
    out.append(f"{tag} {H.r} {H.n} {H.num_edges}")
    out.extend(" ".join(map(str, e)) for e in H.iter_edges())
    return "\n".join(out) + "\n"


def _parse_hg_block(lines: Iterator[tuple[int, list[str]]], head: tuple[int, list[str]]) -> Hypergraph:
    lineno, toks = head
    if len(toks) != 4 or toks[0] not in ("hg", "ohg"):
        raise InputError(f"line {lineno}: expected 'hg <r> <n> <m>', got {' '.join(toks)!r}")
    r, n, m = _ints(toks[1:], lineno)
    if r < 2 or n < 0 or m < 0:
        raise InputError(f"line {lineno}: bad header values r={r} n={n} m={m}")
    if m > comb(n, r):
        raise InputError(f"line {lineno}: {m} edges exceed binom({n},{r})")
    rows = []
    prev = None
    for _ in range(m):
        try:
            ln, et = next(lines)
        except StopIteration:
            raise InputError(f"expected {m} edges, file ended after {len(rows)}") from None
        e = _ints(et, ln)
        if len(e) != r:
            raise InputError(f"line {ln}: edge has {len(e)} vertices, expected {r}")
        if any(a >= b for a, b in zip(e, e[1:])):
            raise InputError(f"line {ln}: edge vertices must be strictly increasing")
        if e[0] < 0 or e[-1] >= n:
            raise InputError(f"line {ln}: vertex outside [0, {n})")
        t = tuple(e)
        if prev is not None and t <= prev:
            raise InputError(f"line {ln}: edges must be listed in strictly increasing lexicographic order")
        prev = t
        rows.append(t)
    arr = np.array(rows, dtype=np.int64).reshape(-1, r)
    H = Hypergraph(r, n, arr)
    return OrderedHypergraph.of(H) if toks[0] == "ohg" else H


def parse_hypergraph(text: str) -> Hypergraph:
    lines = _data_lines(text)
    try:
        head = next(lines)
    except StopIteration:
        raise InputError("no hypergraph header found") from None
    H = _parse_hg_block(lines, head)
    extra = next(lines, None)
    if extra is not None:
        raise InputError(f"line {extra[0]}: trailing data after {H.num_edges} edges")
    return H


def read_hypergraph(path: str) -> Hypergraph:
    return parse_hypergraph(_read(path))


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


# --- labelings -----------------------------------------------------------------

def dump_labeling(phi, header: list[str] | None = None) -> str:
    out = list(header or [])
    out.append(f"lab {phi.N} {phi.n}")
    iu, ju = np.triu_indices(phi.N, 1)
    vals = phi.matrix[iu, ju]
    out.extend(f"{a} {b} {c}" for a, b, c in zip(iu.tolist(), ju.tolist(), vals.tolist()))
    return "\n".join(out) + "\n"


def parse_labeling(text: str):
    from .constructions import EdgeLabeling

    lines = _data_lines(text)
    try:
        lineno, toks = next(lines)
    except StopIteration:
        raise InputError("no labeling header found") from None
    if len(toks) != 3 or toks[0] != "lab":
        raise InputError(f"line {lineno}: expected 'lab <N> <n>'")
    N, n = _ints(toks[1:], lineno)
    if N < 0 or n < 1:
        raise InputError(f"line {lineno}: bad labeling dimensions N={N} n={n}")
    iu, ju = np.triu_indices(N, 1)
    vals = np.empty(len(iu), dtype=np.int64)
    for idx in range(len(iu)):
        try:
            ln, t = next(lines)
        except StopIteration:
            raise InputError(f"expected {len(iu)} labeled pairs, got {idx}") from None
        a, b, c = _ints(t, ln) if len(t) == 3 else (None, None, None)
        if a is None:
            raise InputError(f"line {ln}: expected 'a b c'")
        if (a, b) != (int(iu[idx]), int(ju[idx])):
            raise InputError(f"line {ln}: expected pair ({iu[idx]}, {ju[idx]}), got ({a}, {b})")
        if not 0 <= c < n:
            raise InputError(f"line {ln}: color {c} outside [0, {n})")
        vals[idx] = c
    extra = next(lines, None)
    if extra is not None:
        raise InputError(f"line {extra[0]}: trailing data after labeling")
    return EdgeLabeling.from_upper(N, n, vals)


def read_labeling(path: str):
    return parse_labeling(_read(path))


# --- partite bundles --------------------------------------------------------------

def dump_bundle(P: PartiteSystem, header: list[str] | None = None) -> str:
    out = list(header or [])
    out.append(f"bundle {P.G.n} {P.k}")
    out.extend("class " + " ".join(map(str, c)) for c in P.classes)
    text = "\n".join(out) + "\n"
    return text + dump_hypergraph(P.G) + dump_hypergraph(P.H3)


def parse_bundle(text: str) -> PartiteSystem:
    lines = _data_lines(text)
    try:
        lineno, toks = next(lines)
    except StopIteration:
        raise InputError("no bundle header found") from None
    if len(toks) != 3 or toks[0] != "bundle":
        raise InputError(f"line {lineno}: expected 'bundle <n> <k>'")
    n, k = _ints(toks[1:], lineno)
    classes = []
    for _ in range(k):
        try:
            ln, t = next(lines)
        except StopIteration:
            raise InputError(f"expected {k} class lines") from None
        if t[0] != "class":
            raise InputError(f"line {ln}: expected 'class v1 v2 ...'")
        classes.append(_ints(t[1:], ln))
    try:
        G = _parse_hg_block(lines, next(lines))
        H3 = _parse_hg_block(lines, next(lines))
    except StopIteration:
        raise InputError("bundle needs a 2-graph section and a 3-graph section") from None
    if G.r != 2 or H3.r != 3 or G.n != n or H3.n != n:
        raise InputError("bundle sections must be 'hg 2 n ...' then 'hg 3 n ...'")
    extra = next(lines, None)
    if extra is not None:
        raise InputError(f"line {extra[0]}: trailing data after bundle")
    return PartiteSystem(tuple(tuple(c) for c in classes), G, H3)


def read_bundle(path: str) -> PartiteSystem:
    return parse_bundle(_read(path))


def sniff(text: str) -> str:
    """Kind of a serialized object: 'hg', 'ohg', 'lab' or 'bundle'."""
    for _, toks in _data_lines(text):
        if toks[0] in ("hg", "ohg", "lab", "bundle"):
            return toks[0]
        break
    raise InputError("unrecognized file: expected an hg, ohg, lab or bundle header")
