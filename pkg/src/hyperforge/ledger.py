"""Append-only, content-addressed witness ledger.

Layout under the root directory::

    inputs/<sha256>.hg      canonical hypergraph text, named by its content hash
    reports/<id>.json       canonical CertReport JSON
    entries/<sha256>.json   one WitnessLedgerEntry
    log.jsonl               append order: one {"entry": ..., "timestamp": ...} per line
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

from .certify import CertReport, content_hash
from .errors import InputError
from .formats import canonical_json, dump_hypergraph, parse_hypergraph, sha256_text
from .hypercore import Hypergraph

DEFAULT_LEDGER = "hyperforge-ledger"


def ledger_path(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("HYPERFORGE_LEDGER", DEFAULT_LEDGER))


@dataclass(frozen=True)
class WitnessLedgerEntry:
    r: int
    F: str
    t: int
    n: int
    construction: dict
    reports: tuple[str, ...]
    inputs: dict = field(default_factory=dict)
    timestamp: float | None = None

    def identity(self) -> dict:
        d = asdict(self)
        d.pop("timestamp")
        d["reports"] = list(self.reports)
        return d

    @property
    def address(self) -> str:
        return sha256_text(canonical_json(self.identity()))


class Ledger:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("inputs", "reports", "entries"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # content-addressed blobs ------------------------------------------------------
    def _write_once(self, path: Path, text: str) -> None:
        if path.exists():
            if path.read_text() != text:
                raise InputError(f"ledger object {path.name} exists with different content")
            return
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)

    def put_input(self, H: Hypergraph) -> str:
        h = content_hash(H)
        self._write_once(self.root / "inputs" / f"{h}.hg", dump_hypergraph(H))
        return h

    def get_input(self, h: str) -> Hypergraph:
        path = self.root / "inputs" / f"{h}.hg"
        if not path.exists():
            raise InputError(f"ledger input {h} missing")
        H = parse_hypergraph(path.read_text())
        if content_hash(H) != h:
            raise InputError(f"ledger input {h} does not match its address")
        return H

    def put_report(self, rep: CertReport) -> str:
        self._write_once(self.root / "reports" / f"{rep.id}.json", rep.to_json() + "\n")
        return rep.id

    def get_report(self, rid: str) -> dict:
        path = self.root / "reports" / f"{rid}.json"
        if not path.exists():
            raise InputError(f"ledger report {rid} missing")
        return json.loads(path.read_text())

    # entries ----------------------------------------------------------------------------
    def append(self, entry: WitnessLedgerEntry) -> str:
        addr = entry.address
        path = self.root / "entries" / f"{addr}.json"
        if path.exists():
            return addr
        stamped = entry.timestamp if entry.timestamp is not None else time.time()
        body = dict(entry.identity(), timestamp=stamped)
        self._write_once(path, canonical_json(body) + "\n")
        with open(self.root / "log.jsonl", "a", encoding="utf-8") as fh:
            fh.write(canonical_json({"entry": addr, "timestamp": stamped}) + "\n")
        return addr

    def addresses(self) -> list[str]:
        log = self.root / "log.jsonl"
        if not log.exists():
            return []
        return [json.loads(line)["entry"] for line in log.read_text().splitlines() if line.strip()]

    def entry(self, addr: str) -> WitnessLedgerEntry:
        path = self.root / "entries" / f"{addr}.json"
        if not path.exists():
            raise InputError(f"ledger entry {addr} missing")
        d = json.loads(path.read_text())
        d["reports"] = tuple(d["reports"])
        e = WitnessLedgerEntry(**d)
        if e.address != addr:
            raise InputError(f"ledger entry {addr} does not match its address")
        return e

    # verification ---------------------------------------------------------------------------
    def verify(self, addr: str, budget: int | None = None) -> bool:
        """Re-run every attached certification on the stored inputs; verdicts and witnesses must match."""
        from .certify import rerun

        e = self.entry(addr)
        for rid in e.reports:
            stored = self.get_report(rid)
            fresh = rerun(stored, self.get_input, budget=budget)
            if not same_outcome(stored, fresh.to_dict()):
                return False
        return True

    def replay(self, addr: str, constructors: dict[str, Callable], budget: int | None = None) -> bool:
        """Rebuild the construction from its recorded seed; its inputs and verdicts must reproduce."""
        from .certify import rerun

        e = self.entry(addr)
        name = e.construction["name"]
        if name not in constructors:
            raise InputError(f"no constructor registered for {name!r}")
        rebuilt = constructors[name](e.construction.get("params", {}), e.construction.get("seed"))
        if {k: content_hash(v) for k, v in rebuilt.items()} != e.inputs:
            return False
        lookup = {content_hash(v): v for v in rebuilt.values()}
        for rid in e.reports:
            stored = self.get_report(rid)
            fresh = rerun(stored, lambda h: lookup[h] if h in lookup else self.get_input(h), budget=budget)
            if not same_outcome(stored, fresh.to_dict()):
                return False
        return True


def same_outcome(a: dict, b: dict) -> bool:
    if a["verdict"] != b["verdict"] or a["witness"] != b["witness"]:
        return False
    sa, sb = a.get("subreports", []), b.get("subreports", [])
    return len(sa) == len(sb) and all(same_outcome(x, y) for x, y in zip(sa, sb))
