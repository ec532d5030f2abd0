"""Connection tableau engine: legal-action enumeration, action application,
closure detection, and independent proof replay.

The calculus has three inference rules over the clause matrix:

* extension: connect the current goal with a complementary, unifiable
  literal of an input clause; the clause's remaining literals become new
  open goals one level deeper,
* reduction: close the current goal against a complementary literal on
  its path,
* paramodulation: rewrite a subterm of the current goal with an equality
  literal of an input clause (both directions); the rewritten goal and the
  clause's residual literals become new open goals.

A synthetic pre-state precedes the choice of start clause so that the
choice is itself an action; proof traces therefore begin with a ``start``
action.  Goal selection is leftmost; because goals are processed
depth-first, every pending goal's path is a prefix of the current path, so
states store one path plus a per-goal depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

from .terms import (
    EQ,
    Clause,
    Literal,
    Matrix,
    apply_subst_lit,
    clause_var_count,
    literal_str,
    offset_literal,
    replace_at,
    subterm_at,
    subterm_positions,
    undo_trail,
    unify_args_trail,
    unify_terms_trail,
)

START = "start"
REDUCTION = "reduction"
EXTENSION = "extension"
PARAMODULATION = "paramodulation"


class Action(NamedTuple):
    kind: str
    clause_id: int = -1
    literal_index: int = -1
    path_index: int = -1
    position: tuple = ()
    direction: str = ""

    def encode(self) -> str:
        if self.kind == START:
            return f"start {self.clause_id}"
        if self.kind == REDUCTION:
            return f"reduction {self.path_index}"
        if self.kind == EXTENSION:
            return f"extension {self.clause_id} {self.literal_index}"
        pos = ".".join(str(i) for i in self.position)
        return f"paramodulation {self.clause_id} {self.literal_index} {pos} {self.direction}"


def decode_action(line: str) -> Action:
    parts = line.split()
    if not parts:
        raise ValueError("empty action line")
    kind = parts[0]
    try:
        if kind == START:
            return Action(START, clause_id=int(parts[1]))
        if kind == REDUCTION:
            return Action(REDUCTION, path_index=int(parts[1]))
        if kind == EXTENSION:
            return Action(EXTENSION, clause_id=int(parts[1]), literal_index=int(parts[2]))
        if kind == PARAMODULATION:
            pos = tuple(int(i) for i in parts[3].split("."))
            return Action(PARAMODULATION, clause_id=int(parts[1]), literal_index=int(parts[2]),
                          position=pos, direction=parts[4])
    except (IndexError, ValueError) as e:
        raise ValueError(f"malformed action line {line!r}: {e}") from None
    raise ValueError(f"unknown action kind {kind!r}")


class TableauState:
    """Immutable snapshot of a partial tableau.

    ``goals`` holds the pending (literal, depth) pairs with the current
    goal first; ``path`` is the ancestor chain of the current goal.  All
    literals are stored unsubstituted and interpreted under ``subst``.
    """

    __slots__ = ("started", "goals", "path", "subst", "next_var")

    def __init__(self, started, goals, path, subst, next_var):
        self.started = started
        self.goals = goals
        self.path = path
        self.subst = subst
        self.next_var = next_var

    @property
    def current_goal(self) -> Optional[Literal]:
        return self.goals[0][0] if self.goals else None

    @property
    def depth(self) -> int:
        return len(self.path)

    def describe(self) -> str:
        if not self.started:
            return "<pre-start>"
        if not self.goals:
            return "<closed>"
        goal = apply_subst_lit(self.goals[0][0], self.subst)
        return f"goal {literal_str(goal)} (depth {len(self.path)}, {len(self.goals)} open)"


class IllegalActionError(Exception):
    pass


@dataclass
class ProofCheck:
    ok: bool
    failed_step: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class Engine:
    """Action semantics over one matrix.

    The engine itself is stateless apart from precomputed candidate
    indexes, so a single instance may serve many concurrent searches.
    """

    def __init__(self, matrix: Matrix, path_limit: int = 100, paramodulation: bool = True):
        self.matrix = matrix
        self.path_limit = path_limit
        self.paramodulation = paramodulation
        self.var_counts = [clause_var_count(c) for c in matrix.clauses]
        # (pred, neg) -> [(clause_id, literal_index, literal)], in canonical order
        self.by_key: dict = {}
        self.equations: List[Tuple[int, int, Literal]] = []
        for c in matrix.clauses:
            for i, lit in enumerate(c.literals):
                self.by_key.setdefault((lit.pred, lit.neg), []).append((c.id, i, lit))
                if lit.pred == EQ and not lit.neg and c.id != matrix.reflexivity_id:
                    self.equations.append((c.id, i, lit))

    # -- states -------------------------------------------------------------

    def root_state(self) -> TableauState:
        return TableauState(False, (), (), {}, 0)

    def start_actions(self) -> List[Action]:
        return [Action(START, clause_id=cid) for cid in self.matrix.start_ids]

    def initial_states(self) -> List[TableauState]:
        root = self.root_state()
        return [self.apply(root, a) for a in self.start_actions()]

    def is_closed(self, s: TableauState) -> bool:
        return s.started and not s.goals

    # -- enumeration --------------------------------------------------------

    def legal_actions(self, s: TableauState) -> List[Action]:
        if not s.started:
            return self.start_actions()
        if not s.goals:
            return []
        if len(s.path) >= self.path_limit:
            return []
        goal, _ = s.goals[0]
        subst = s.subst
        trail: list = []
        neg_key = (goal.pred, not goal.neg)
        out: List[Action] = []

        for i, plit in enumerate(s.path):
            if plit.pred == goal.pred and plit.neg != goal.neg and len(plit.args) == len(goal.args):
                ok = unify_args_trail(goal.args, plit.args, subst, trail)
                undo_trail(subst, trail)
                if ok:
                    out.append(Action(REDUCTION, path_index=i))

        off = s.next_var
        for cid, li, lit in self.by_key.get(neg_key, ()):
            cand = offset_literal(lit, off)
            ok = unify_args_trail(goal.args, cand.args, subst, trail)
            undo_trail(subst, trail)
            if ok:
                out.append(Action(EXTENSION, clause_id=cid, literal_index=li))

        if self.paramodulation and self.equations:
            g = apply_subst_lit(goal, subst)
            positions = subterm_positions(g)
            for cid, li, lit in self.equations:
                lhs = offset_literal(lit, off).args
                for pos, sub in positions:
                    for direction, side in (("lr", lhs[0]), ("rl", lhs[1])):
                        ok = unify_terms_trail(sub, side, subst, trail)
                        undo_trail(subst, trail)
                        if ok:
                            out.append(Action(PARAMODULATION, clause_id=cid, literal_index=li,
                                              position=pos, direction=direction))
        return out

    # -- application --------------------------------------------------------

    def apply(self, s: TableauState, a: Action) -> TableauState:
        if a.kind == START:
            if s.started:
                raise IllegalActionError("start action on a started tableau")
            clause = self.matrix.clauses[a.clause_id]
            goals = tuple((lit, 0) for lit in clause.literals)
            return TableauState(True, goals, (), {}, self.var_counts[a.clause_id])
        if not s.goals:
            raise IllegalActionError("no open goal")
        goal, gdepth = s.goals[0]
        subst = dict(s.subst)
        trail: list = []

        if a.kind == REDUCTION:
            plit = s.path[a.path_index]
            if not (plit.pred == goal.pred and plit.neg != goal.neg
                    and unify_args_trail(goal.args, plit.args, subst, trail)):
                raise IllegalActionError(f"reduction does not unify: {a}")
            return self._discharge(s, subst)

        if a.kind == EXTENSION:
            clause = self.matrix.clauses[a.clause_id]
            off = s.next_var
            lit = offset_literal(clause.literals[a.literal_index], off)
            if not (lit.pred == goal.pred and lit.neg != goal.neg
                    and unify_args_trail(goal.args, lit.args, subst, trail)):
                raise IllegalActionError(f"extension does not unify: {a}")
            rest = tuple(offset_literal(l, off) for i, l in enumerate(clause.literals)
                         if i != a.literal_index)
            next_var = off + self.var_counts[a.clause_id]
            if not rest:
                return self._discharge(s, subst, next_var)
            depth = len(s.path) + 1
            goals = tuple((l, depth) for l in rest) + s.goals[1:]
            return TableauState(True, goals, s.path + (goal,), subst, next_var)

        if a.kind == PARAMODULATION:
            clause = self.matrix.clauses[a.clause_id]
            off = s.next_var
            eq = offset_literal(clause.literals[a.literal_index], off)
            if eq.pred != EQ or eq.neg:
                raise IllegalActionError(f"not an equation literal: {a}")
            x, y = eq.args if a.direction == "lr" else (eq.args[1], eq.args[0])
            g = apply_subst_lit(goal, s.subst)
            try:
                target = subterm_at(g, a.position)
            except (KeyError, IndexError):
                raise IllegalActionError(f"position {a.position} not in goal") from None
            if not unify_terms_trail(target, x, subst, trail):
                raise IllegalActionError(f"paramodulation does not unify: {a}")
            rewritten = replace_at(g, a.position, y)
            rest = tuple(offset_literal(l, off) for i, l in enumerate(clause.literals)
                         if i != a.literal_index)
            depth = len(s.path) + 1
            goals = ((rewritten, depth),) + tuple((l, depth) for l in rest) + s.goals[1:]
            return TableauState(True, goals, s.path + (goal,), subst,
                                off + self.var_counts[a.clause_id])

        raise IllegalActionError(f"unknown action kind {a.kind!r}")

    def _discharge(self, s: TableauState, subst, next_var=None) -> TableauState:
        """Drop the current goal and re-point the path at the next one."""
        goals = s.goals[1:]
        path = s.path[: goals[0][1]] if goals else ()
        return TableauState(True, goals, path, subst,
                            s.next_var if next_var is None else next_var)

    # -- replay -------------------------------------------------------------

    def check_proof(self, actions) -> ProofCheck:
        """Replay an action sequence from scratch, re-deriving every unifier."""
        state = self.root_state()
        for i, a in enumerate(actions):
            legal = self.legal_actions(state)
            if a not in legal:
                return ProofCheck(False, i, f"step {i}: {a.encode()!r} is not a legal action")
            state = self.apply(state, a)
        if not self.is_closed(state):
            return ProofCheck(False, len(actions), "tableau not closed after the last action")
        return ProofCheck(True)


# ---------------------------------------------------------------------------
# trace files


def write_trace(path, problem_name: str, actions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"problem {problem_name}\n")
        for a in actions:
            fh.write(a.encode() + "\n")


def read_trace(path) -> Tuple[str, List[Action]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("problem "):
        raise ValueError("trace file must begin with a 'problem <name>' line")
    name = lines[0][len("problem "):]
    return name, [decode_action(ln) for ln in lines[1:]]
