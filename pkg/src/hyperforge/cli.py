"""Command-line front end.

Exit codes: 0 property certified, 1 witness found, 2 invalid input or unmet
precondition, 3 budget or limit exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import certify
from .amplify import kcase_pipeline
from .constructions import (
    DeletionParams,
    deletion_construction,
    parity_construction,
    random_labeling,
    random_triangle_free_graph,
    stepup_construction,
)
from .errors import HyperforgeError, InputError
from .formats import (
    canonical_json,
    dump_bundle,
    dump_hypergraph,
    dump_labeling,
    parse_bundle,
    parse_hypergraph,
    parse_labeling,
    provenance_lines,
    read_bundle,
    read_hypergraph,
    read_labeling,
    sniff,
)
from .hypercore import DEFAULT_BUDGET, OrderedHypergraph, complement
from .rng import check_seed

EXIT_FOR_VERDICT = {"certified-absent": 0, "sampled-absent": 0, "witness": 1, "inconclusive": 3}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    mode: str = "exact"
    samples: int = 10_000
    budget: int = DEFAULT_BUDGET
    out: str | None = None
    format: str = "text"
    timing: bool = False

    def __post_init__(self):
        check_seed(self.seed)
        if self.mode not in ("exact", "sampled"):
            raise InputError(f"mode must be exact or sampled, got {self.mode!r}")
        if self.mode == "sampled" and self.samples < 1:
            raise InputError("samples must be >= 1 in sampled mode")
        if self.budget < 1:
            raise InputError("budget must be >= 1")
        if self.format not in ("text", "json"):
            raise InputError(f"format must be text or json, got {self.format!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _globals() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    g.add_argument("--seed", type=int, default=s, help="64-bit RNG seed (default 0)")
    g.add_argument("--mode", choices=["exact", "sampled"], default=s)
    g.add_argument("--samples", type=int, default=s)
    g.add_argument("--budget", type=int, default=s, help="search node limit per exact call")
    g.add_argument("--out", default=s, help="output path (default stdout)")
    g.add_argument("--format", choices=["text", "json"], default=s)
    g.add_argument("--timing", action="store_true", default=s, help="add wall time to reports")
    return g


def build_parser() -> argparse.ArgumentParser:
    glob = _globals()
    p = argparse.ArgumentParser(prog="hyperforge", parents=[glob],
                                description="Construct and certify extremal hypergraphs.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[glob], help="build a hypergraph or labeling")
    csub = c.add_subparsers(dest="kind", required=True)
    x = csub.add_parser("parity", parents=[glob])
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--r", type=int, default=3)
    x = csub.add_parser("stepup", parents=[glob])
    x.add_argument("--low", required=True, help="low-uniformity hypergraph file")
    x.add_argument("--labeling", required=True, help="labeling file")
    x = csub.add_parser("deletion", parents=[glob])
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--r", type=int, default=3)
    x.add_argument("--p", type=float, default=None, help="edge probability (default n^-0.8)")
    x = csub.add_parser("labeling", parents=[glob])
    x.add_argument("--N", type=int, required=True)
    x.add_argument("--colors", type=int, required=True)
    x = csub.add_parser("triangle-free", parents=[glob])
    x.add_argument("--n", type=int, required=True)

    c = sub.add_parser("certify", parents=[glob], help="certify a property and write a report")
    c.add_argument("property", choices=["induced-free", "ordered-induced-free", "partite-free",
                                        "homogeneous", "eta-homogeneous", "density-window", "witness"])
    c.add_argument("--host", required=True)
    c.add_argument("--pattern")
    c.add_argument("--t", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--eta", type=_fraction)
    c.add_argument("--w", type=int)
    c.add_argument("--eps", type=_fraction)
    c.add_argument("--complement", action="store_true", help="certify on the complement of the host")
    c.add_argument("--heuristic", action="store_true", help="greedy eta-homogeneous search")

    a = sub.add_parser("amplify", parents=[glob], help="run the k-class pipeline on a bundle")
    a.add_argument("--bundle", required=True)
    a.add_argument("--eps", type=_fraction, required=True)
    a.add_argument("--eta", type=_fraction, required=True)
    a.add_argument("--strict", action="store_true")

    e = sub.add_parser("experiment", parents=[glob], help="seeded experiment pipelines")
    e.add_argument("pipeline", choices=["stepup-ledger", "kcase-demo", "er-demo"])
    e.add_argument("--seeds", type=int, nargs="*", default=None)
    e.add_argument("--ledger", default=None, help="ledger directory (env HYPERFORGE_LEDGER)")
    e.add_argument("--n-low", type=int, default=12)
    e.add_argument("--t", type=int, default=2)
    e.add_argument("--max-N", type=int, default=60)
    e.add_argument("--labelings", type=int, default=8, help="labelings tried per seed")
    e.add_argument("--jobs", type=int, default=1, help="worker processes for the seed sweep")
    e.add_argument("--k", type=int, default=3)
    e.add_argument("--m", type=int, default=512)
    e.add_argument("--delete", type=float, default=0.05)
    e.add_argument("--eps", type=_fraction, default=Fraction(1))
    e.add_argument("--eta", type=_fraction, default=Fraction(1, 10))
    e.add_argument("--n", type=int, default=4096)
    e.add_argument("--runs", type=int, default=20)

    f = sub.add_parser("fmt", parents=[glob], help="validate and canonicalize a file")
    f.add_argument("path")
    f.add_argument("--check", action="store_true", help="only validate")
    return p


def _config(ns) -> RunConfig:
    return RunConfig(**{k: getattr(ns, k) for k in RunConfig.__dataclass_fields__ if hasattr(ns, k)})


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _params(ns, *names) -> dict:
    return {n: getattr(ns, n) for n in names}


def cmd_construct(ns, cfg: RunConfig) -> int:
    kind = ns.kind
    if kind == "parity":
        H, _ = parity_construction(ns.n, ns.r, cfg.seed)
        text = dump_hypergraph(H, provenance_lines("parity", _params(ns, "n", "r"), cfg.seed))
    elif kind == "stepup":
        Glow = read_hypergraph(ns.low)
        phi = read_labeling(ns.labeling)
        H = stepup_construction(Glow, phi, phi.N, budget=cfg.budget)
        prov = {"low": certify.content_hash(Glow), "labeling_N": phi.N, "labeling_n": phi.n}
        text = dump_hypergraph(H, provenance_lines("stepup", prov, None))
    elif kind == "deletion":
        H, log = deletion_construction(DeletionParams(ns.n, ns.r, ns.p, cfg.seed), budget=cfg.budget)
        head = provenance_lines("deletion", {"n": ns.n, "r": ns.r, "p": DeletionParams(ns.n, ns.r, ns.p).p},
                                cfg.seed)
        head.append("# log " + canonical_json(log.to_dict()))
        text = dump_hypergraph(H, head)
    elif kind == "labeling":
        phi = random_labeling(ns.N, ns.colors, cfg.seed)
        text = dump_labeling(phi, provenance_lines("labeling", {"N": ns.N, "n": ns.colors}, cfg.seed))
    elif kind == "triangle-free":
        H = random_triangle_free_graph(ns.n, cfg.seed)
        text = dump_hypergraph(H, provenance_lines("triangle-free", {"n": ns.n}, cfg.seed))
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown construction {kind!r}")
    _emit(text, cfg.out)
    return 0


def _need(ns, *names):
    for n in names:
        if getattr(ns, n) is None:
            raise InputError(f"--{n} is required for {ns.property}")


def cmd_certify(ns, cfg: RunConfig) -> int:
    H = read_hypergraph(ns.host)
    if ns.complement:
        H = complement(H)
    prop = ns.property
    b = cfg.budget
    if prop in ("induced-free", "ordered-induced-free", "witness"):
        _need(ns, "pattern")
        F = read_hypergraph(ns.pattern)
    if prop == "induced-free":
        rep = certify.induced_report(H, F, b)
    elif prop == "ordered-induced-free":
        rep = certify.ordered_induced_report(OrderedHypergraph.of(H), OrderedHypergraph.of(F), b)
    elif prop == "partite-free":
        _need(ns, "t")
        rep = certify.partite_report(H, ns.t, b, label="complement" if ns.complement else "host")
    elif prop == "homogeneous":
        _need(ns, "m")
        rep = certify.homogeneous_report(H, ns.m, b)
    elif prop == "eta-homogeneous":
        _need(ns, "m", "eta")
        rep = certify.eta_homogeneous_report(H, ns.m, ns.eta, "heuristic" if ns.heuristic else "exact", b)
    elif prop == "density-window":
        _need(ns, "w", "eps")
        spec = certify.DensityWindowSpec(ns.w, ns.eps)
        rep = certify.density_window_check(H, spec, cfg.mode, cfg.samples, cfg.seed, b)
    else:
        _need(ns, "t")
        rep = certify.certify_witness(H, F, ns.t, b)
    _emit(rep.to_json(cfg.timing) + "\n", cfg.out)
    if cfg.out and cfg.format == "text":
        sys.stdout.write(f"{rep.property}: {rep.verdict} ({rep.mode}, {rep.nodes} nodes)\n")
    return EXIT_FOR_VERDICT[rep.verdict]


def cmd_amplify(ns, cfg: RunConfig) -> int:
    P = read_bundle(ns.bundle)
    W, trace = kcase_pipeline(P, ns.eps, ns.eta, P.k, strict=ns.strict, budget=cfg.budget)
    _emit(trace.to_jsonl(), cfg.out)
    if cfg.out and cfg.format == "text":
        sys.stdout.write(f"equal size {len(W[0])}; retention holds: {trace.summary['retention_holds']}\n")
    return 0


def _table(rows: list[dict], cols: list[str]) -> str:
    widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows)) if rows else len(c) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
    for r in rows:
        lines.append("  ".join(str(r.get(c, "")).ljust(widths[c]) for c in cols))
    return "\n".join(lines) + "\n"


def cmd_experiment(ns, cfg: RunConfig) -> int:
    from . import experiments
    from .ledger import Ledger, ledger_path

    if ns.pipeline == "stepup-ledger":
        seeds = ns.seeds if ns.seeds is not None else [cfg.seed]
        ledger = Ledger(ledger_path(ns.ledger))
        outcomes = experiments.run_stepup_ledger(seeds, ledger, ns.n_low, ns.t, ns.max_N, ns.labelings,
                                                 cfg.budget, ns.jobs)
        rows = [{"seed": o.seed, **o.row, "status": "certified" if o.ok else f"skipped: {o.error}"}
                for o in outcomes]
        cols = ["seed", "r", "t", "n", "modes", "status"]
    elif ns.pipeline == "kcase-demo":
        res = experiments.run_kcase_demo(ns.k, ns.m, ns.delete, ns.eps, ns.eta, cfg.seed, cfg.budget)
        res.pop("trace")
        rows = [res]
        cols = ["k", "m", "delete", "size", "n_hyper", "bound", "retained", "steps"]
    else:
        rows = experiments.run_er_demo(ns.n, ns.runs, cfg.seed)
        for r in rows:
            r.pop("vertices")
        cols = ["run", "n", "p", "triples_checked"]
    if cfg.format == "json":
        text = canonical_json(certify._jsonable(rows)) + "\n"
    else:
        text = _table([{k: (str(v) if isinstance(v, Fraction) else v) for k, v in r.items()} for r in rows], cols)
    _emit(text, cfg.out)
    return 0


def cmd_fmt(ns, cfg: RunConfig) -> int:
    try:
        text = Path(ns.path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {ns.path}: {exc}") from None
    kind = sniff(text)
    header = [ln for ln in text.splitlines() if ln.startswith("#")]
    if kind in ("hg", "ohg"):
        out = dump_hypergraph(parse_hypergraph(text), header)
    elif kind == "lab":
        out = dump_labeling(parse_labeling(text), header)
    else:
        out = dump_bundle(parse_bundle(text), header)
    if not ns.check:
        _emit(out, cfg.out)
    return 0


COMMANDS = {"construct": cmd_construct, "certify": cmd_certify, "amplify": cmd_amplify,
            "experiment": cmd_experiment, "fmt": cmd_fmt}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _config(ns)
        return COMMANDS[ns.command](ns, cfg)
    except HyperforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RecursionError:
        print("error: search recursion limit exceeded", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
