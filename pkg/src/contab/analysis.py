"""Cross-predictor comparison over a fixed bank of search states.

The bank holds states an unguided search visited, each encoded as the
action path that reaches it from the root, so any predictor can later be
asked for its distribution over the exact same canonical action list.
Comparison metrics: same most-probable action (Best), same full ordering
(Order), and mean KL divergence in both directions with infinite terms
excluded from the mean and counted separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .policy import Predictor, UniformPredictor, predict
from .search import SearchLimits, prove
from .tableau import Engine, decode_action

BANK_MAGIC = "contab-bank v1"


def kl_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """Relative entropy KL(P || Q) in nats; 0 log 0 = 0, and any P > 0
    where Q = 0 makes the result infinite."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


@dataclass
class BankEntry:
    problem: str
    path: Tuple[str, ...]
    n_actions: int


@dataclass
class StateBank:
    entries: List[BankEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


def harvest_states(problems: Sequence[Tuple[str, Engine]],
                   limits: Optional[SearchLimits] = None) -> StateBank:
    """Runs the uniform predictor over every problem and records each
    expanded state with at least two legal actions, identified by its
    action path.  Per-problem contribution is capped inside the search;
    paths are already unique per expansion, deduplication here guards
    against replays of the same problem list."""
    limits = limits or SearchLimits()
    bank = StateBank()
    seen = set()
    for name, engine in problems:
        result = prove(engine, name, UniformPredictor(), limits, collect_states=True)
        for path, n_actions in result.harvested:
            key = (name, path)
            if key in seen:
                continue
            seen.add(key)
            bank.entries.append(BankEntry(name, path, n_actions))
    return bank


def save_bank(path, bank: StateBank) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(BANK_MAGIC + "\n")
        for e in bank.entries:
            encoded = ";".join(e.path) if e.path else "-"
            fh.write(f"{e.problem}\t{encoded}\t{e.n_actions}\n")


def load_bank(path) -> StateBank:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != BANK_MAGIC:
        raise ValueError(f"{path}: not a recognized state-bank file")
    bank = StateBank()
    for ln in lines[1:]:
        if not ln:
            continue
        problem, encoded, n = ln.split("\t")
        path = () if encoded == "-" else tuple(encoded.split(";"))
        bank.entries.append(BankEntry(problem, path, int(n)))
    return bank


def replay_entry(engine: Engine, entry: BankEntry):
    state = engine.root_state()
    for encoded in entry.path:
        state = engine.apply(state, decode_action(encoded))
    return state


@dataclass
class AgreementReport:
    best: float
    order: float
    kl_ab: float
    kl_ba: float
    states: int
    infinite_ab: int = 0
    infinite_ba: int = 0


RANK_TOL = 1e-9


def rank_groups(p: Sequence[float], tol: float = RANK_TOL) -> np.ndarray:
    """Descending rank of every entry, with entries closer than ``tol``
    sharing a rank.  Collapsing float-noise ties keeps rank comparisons
    invariant under monotone transformations such as temperature
    rescaling, which preserve order exactly in real arithmetic but can
    turn an ulp-sized gap into an exact tie in floats."""
    p = np.asarray(p, dtype=float)
    order = np.argsort(-p, kind="stable")
    ranks = np.empty(len(p), dtype=int)
    group = 0
    prev = None
    for i in order:
        if prev is not None and prev - p[i] > tol:
            group += 1
        ranks[i] = group
        prev = p[i]
    return ranks


def compare(pred_a: Predictor, pred_b: Predictor, bank: StateBank,
            engines: Dict[str, Engine]) -> AgreementReport:
    """Evaluates both predictors on every bank state over the identical
    canonical action list.  Sums are reduced sequentially in bank order
    so the report is bit-stable."""
    best_hits = order_hits = 0
    kl_ab_sum = kl_ba_sum = 0.0
    kl_ab_n = kl_ba_n = 0
    inf_ab = inf_ba = 0
    for entry in bank.entries:
        engine = engines[entry.problem]
        state = replay_entry(engine, entry)
        actions = engine.legal_actions(state)
        if len(actions) != entry.n_actions:
            raise ValueError(
                f"bank entry for {entry.problem} expects {entry.n_actions} actions, "
                f"replay produced {len(actions)}; bank and matrix disagree")
        pa, _ = predict(pred_a, state, actions, engine.matrix)
        pb, _ = predict(pred_b, state, actions, engine.matrix)
        ranks_a = rank_groups(pa)
        ranks_b = rank_groups(pb)
        # ties resolve to the lowest index before comparing favorites
        if int(np.argmax(ranks_a == 0)) == int(np.argmax(ranks_b == 0)):
            best_hits += 1
        if np.array_equal(ranks_a, ranks_b):
            order_hits += 1
        d = kl_divergence(pa, pb)
        if math.isinf(d):
            inf_ab += 1
        else:
            kl_ab_sum += d
            kl_ab_n += 1
        d = kl_divergence(pb, pa)
        if math.isinf(d):
            inf_ba += 1
        else:
            kl_ba_sum += d
            kl_ba_n += 1
    n = len(bank.entries)
    return AgreementReport(
        best=best_hits / n if n else 0.0,
        order=order_hits / n if n else 0.0,
        kl_ab=kl_ab_sum / kl_ab_n if kl_ab_n else 0.0,
        kl_ba=kl_ba_sum / kl_ba_n if kl_ba_n else 0.0,
        states=n,
        infinite_ab=inf_ab,
        infinite_ba=inf_ba)


# ---------------------------------------------------------------------------
# CSV reports


def format_cell(value) -> str:
    """Floats get two decimals (the entropy/KL convention), integers and
    strings pass through."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{value:.2f}"
    return str(value)


def report_csv(path, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    import csv
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(columns))
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


AGREEMENT_COLUMNS = ["comparison", "states", "best", "order",
                     "kl_ab", "kl_ba", "infinite_ab", "infinite_ba"]


def agreement_rows(reports: Sequence[Tuple[str, AgreementReport]]) -> List[List]:
    rows = []
    for label, r in reports:
        rows.append([label, r.states, r.best, r.order, r.kl_ab, r.kl_ba,
                     r.infinite_ab, r.infinite_ba])
    return rows
