"""Seeded experiment pipelines behind ``hyperforge experiment``."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import certify
from .amplify import assemble_near_complete, erdos_rado_reduce, kcase_pipeline, verify_retention
from .constructions import (
    ImplicitHypergraph,
    build_f_star,
    random_labeling,
    random_triangle_free_graph,
    stepup_construction,
    synthetic_partite_system,
)
from .errors import HyperforgeError
from .hypercore import Hypergraph, OrderedHypergraph, induce
from .ledger import Ledger, WitnessLedgerEntry


@dataclass
class SeedOutcome:
    seed: int
    ok: bool
    row: dict = field(default_factory=dict)
    error: str | None = None


# --- step-up ledger ---------------------------------------------------------------------------

def _stepup_inputs(params: dict, seed: int) -> dict[str, Hypergraph]:
    """Deterministic rebuild of every input of a step-up ledger entry."""
    n_low, N, prefix = params["n_low"], params["N"], params["prefix"]
    Glow = random_triangle_free_graph(n_low, seed)
    phi = random_labeling(N, n_low, seed, f"labeling/{params.get('labeling', 0)}")
    Gp = stepup_construction(Glow, phi, N)
    host = induce(Gp, range(prefix))
    K3 = Hypergraph.complete(2, 3)
    return {"low": Glow, "low_pattern": K3, "host": host, "pattern": Hypergraph.complete(3, 4),
            "host_ordered": OrderedHypergraph.of(host), "gadget": build_f_star(K3)}


CONSTRUCTORS = {"stepup-prefix": _stepup_inputs}


def _prefix_free(Gp: Hypergraph, size: int, t: int, budget: int | None) -> bool:
    H = induce(Gp, range(size))
    return (certify.find_complete_partite(H, t, budget) is None
            and certify.find_complete_partite(H, t, budget, empty=True) is None)


def _longest_free_prefix(Gp: Hypergraph, t: int, budget: int | None) -> int:
    lo, hi = 3 * t - 1, Gp.n
    if _prefix_free(Gp, hi, t, budget):
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _prefix_free(Gp, mid, t, budget):
            lo = mid
        else:
            hi = mid
    return lo


def stepup_witness(seed: int, n_low: int = 12, t: int = 2, max_N: int = 60, labelings: int = 8,
                   budget: int | None = None) -> tuple[dict, list[certify.CertReport], dict]:
    """Step up a triangle-free graph and keep the longest prefix with no K_{t,t,t} in it or its complement.

    Prefixes of a step-up graph are step-ups of the restricted labeling, and
    containing K_{t,t,t} is monotone in the prefix, so binary search finds the
    longest certified prefix. Several labelings are tried; the first best wins.
    """
    Glow = random_triangle_free_graph(n_low, seed)
    best, best_att = -1, 0
    for att in range(labelings):
        phi = random_labeling(max_N, n_low, seed, f"labeling/{att}")
        size = _longest_free_prefix(stepup_construction(Glow, phi, max_N), t, budget)
        if size > best:
            best, best_att = size, att
    lo = best
    params = {"n_low": n_low, "N": max_N, "prefix": lo, "t": t, "labeling": best_att}
    inputs = _stepup_inputs(params, seed)
    reports = [certify.induced_report(inputs["low"], inputs["low_pattern"], budget)]
    if lo >= 3 * t:
        reports.append(certify.certify_witness(inputs["host"], inputs["pattern"], t, budget))
        reports.append(certify.ordered_induced_report(inputs["host_ordered"], inputs["gadget"], budget))
    return params, reports, inputs


def _seed_task(args):
    seed, n_low, t, max_N, labelings, budget = args
    try:
        return seed, stepup_witness(seed, n_low, t, max_N, labelings, budget), None
    except HyperforgeError as exc:
        return seed, None, str(exc)


def run_stepup_ledger(seeds, ledger: Ledger | None, n_low: int = 12, t: int = 2, max_N: int = 60,
                      labelings: int = 8, budget: int | None = None, jobs: int = 1) -> list[SeedOutcome]:
    """Seeds run in worker processes when ``jobs > 1``; all ledger writes stay in this process."""
    tasks = [(seed, n_low, t, max_N, labelings, budget) for seed in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_seed_task, tasks))
    else:
        results = [_seed_task(task) for task in tasks]
    out = []
    for seed, res, err in results:
        if res is None:
            out.append(SeedOutcome(seed, False, error=err))
            continue
        params, reports, inputs = res
        certified = len(reports) == 3 and all(r.verdict == "certified-absent" for r in reports)
        row = {"r": 3, "t": t, "n": params["prefix"], "modes": sorted({r.mode for r in reports}),
               "certified": certified}
        if certified and ledger is not None:
            hashes = {k: ledger.put_input(v) for k, v in inputs.items()}
            ids = tuple(ledger.put_report(r) for r in reports)
            entry = WitnessLedgerEntry(3, hashes["pattern"], t, params["prefix"],
                                       {"name": "stepup-prefix", "params": params, "seed": seed},
                                       ids, hashes)
            row["entry"] = ledger.append(entry)
        out.append(SeedOutcome(seed, certified, row,
                               None if certified else "no fully certified prefix"))
    return out


# --- k-class pipeline demo -------------------------------------------------------------------------

def run_kcase_demo(k: int = 3, m: int = 512, delete: float = 0.05, eps=1, eta=Fraction(1, 10),
                   seed: int = 0, budget: int | None = None) -> dict:
    P = synthetic_partite_system(k, m, delete, seed)
    W, trace = kcase_pipeline(P, eps, eta, k, budget=budget)
    # recount from the serialized trace, not from the in-memory result
    from .amplify import PipelineTrace

    replayed = PipelineTrace.from_jsonl(trace.to_jsonl())
    holds, nh, bound = verify_retention(P, replayed.final, eta, budget)
    return {"k": k, "m": m, "delete": delete, "size": len(W[0]), "n_hyper": nh,
            "bound": bound, "retained": holds, "steps": len(trace.steps), "trace": trace}


def run_er_demo(n: int = 4096, runs: int = 20, seed: int = 0) -> list[dict]:
    rows = []
    for i in range(runs):
        H = ImplicitHypergraph(n, (seed + i) % (1 << 64))
        res = erdos_rado_reduce(H)
        rows.append({"run": i, "n": n, "p": res.p, "vertices": list(res.vertices),
                     "triples_checked": len(list(combinations(range(res.p), 3)))})
    return rows


def run_assembly_demo(k: int = 10, m: int = 64, eta=1, seed: int = 0) -> dict:
    """Pipeline at eta / 2^binom(k,2) on a complete system, then the near-complete assembly at eta."""
    from math import comb

    eta = Fraction(eta)
    P = synthetic_partite_system(k, m, 0.0, seed)
    W, trace = kcase_pipeline(P, 1, eta / 2 ** comb(k, 2), k)
    asm = assemble_near_complete(P.H3, W, eta, k)
    return {"k": k, "m": m, "eta": eta, "size": len(W[0]), "ok": asm.ok, "edges": asm.edges,
            "bound": asm.bound}
