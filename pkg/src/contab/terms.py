"""First-order terms, literals, clauses and unification.

Representation is chosen for speed in the inner proving loop:

* variables are plain non-negative ints,
* compound terms are tuples ``(symbol, arg1, ..., argn)`` with an interned
  string symbol; constants are 1-tuples like ``('a',)``,
* substitutions are dicts mapping variable ids to terms, kept triangular
  (a binding may mention other bound variables) and dereferenced on use.

Equality uses the reserved predicate name ``"="``.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Optional, Union

EQ = "="

Term = Union[int, tuple]
Subst = dict


class Literal(NamedTuple):
    neg: bool
    pred: str
    args: tuple

    def negated(self) -> "Literal":
        return Literal(not self.neg, self.pred, self.args)

    def __str__(self) -> str:
        return literal_str(self)


class Clause(NamedTuple):
    id: int
    literals: tuple

    def __str__(self) -> str:
        return " | ".join(literal_str(l) for l in self.literals)


class Matrix:
    """Clausal form of a problem: clauses with dense ids plus start-clause ids.

    ``reflexivity_id`` marks an automatically added ``X = X`` clause (present
    only when the problem mentions equality); it is excluded from
    paramodulation enumeration.
    """

    def __init__(self, clauses, start_ids, reflexivity_id=None):
        self.clauses = list(clauses)
        self.start_ids = list(start_ids)
        self.reflexivity_id = reflexivity_id
        for i, c in enumerate(self.clauses):
            if c.id != i:
                raise ValueError("clause ids must be dense and in order")
        if not self.start_ids:
            raise ValueError("matrix needs at least one start clause")

    def __len__(self) -> int:
        return len(self.clauses)

    def dump(self) -> str:
        return matrix_dump(self)


def is_var(t: Term) -> bool:
    return type(t) is int


def mk(sym: str, *args: Term) -> tuple:
    return (sym,) + args


# ---------------------------------------------------------------------------
# substitution machinery


def walk(t: Term, subst: Subst) -> Term:
    """Dereference a variable through the substitution chain."""
    while type(t) is int:
        b = subst.get(t)
        if b is None:
            return t
        t = b
    return t


def apply_subst(t: Term, subst: Subst) -> Term:
    """Fully dereference a term under ``subst``."""
    t = walk(t, subst)
    if type(t) is int:
        return t
    if len(t) == 1:
        return t
    return (t[0],) + tuple(apply_subst(a, subst) for a in t[1:])


def apply_subst_lit(lit: Literal, subst: Subst) -> Literal:
    if not subst or not lit.args:
        return lit if not subst else Literal(lit.neg, lit.pred, tuple(apply_subst(a, subst) for a in lit.args))
    return Literal(lit.neg, lit.pred, tuple(apply_subst(a, subst) for a in lit.args))


def occurs(v: int, t: Term, subst: Subst) -> bool:
    t = walk(t, subst)
    if type(t) is int:
        return t == v
    return any(occurs(v, a, subst) for a in t[1:])


def unify_terms(a: Term, b: Term, subst: Subst) -> Optional[Subst]:
    """Most general unifier of two terms extending ``subst``, or None.

    The input dict is never mutated; on success a new dict is returned.
    The occurs check is always performed.
    """
    out = dict(subst)
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, out)
        y = walk(y, out)
        if x is y or x == y:
            continue
        if type(x) is int:
            if occurs(x, y, out):
                return None
            out[x] = y
        elif type(y) is int:
            if occurs(y, x, out):
                return None
            out[y] = x
        else:
            if x[0] != y[0] or len(x) != len(y):
                return None
            stack.extend(zip(x[1:], y[1:]))
    return out


def unify(a, b, subst: Optional[Subst] = None) -> Optional[Subst]:
    """Unify two terms or two literals (same polarity, predicate, arity)."""
    if subst is None:
        subst = {}
    if isinstance(a, Literal) or isinstance(b, Literal):
        if not (isinstance(a, Literal) and isinstance(b, Literal)):
            return None
        if a.neg != b.neg or a.pred != b.pred or len(a.args) != len(b.args):
            return None
        out = subst
        for x, y in zip(a.args, b.args):
            out = unify_terms(x, y, out)
            if out is None:
                return None
        return out if out is not subst else dict(subst)
    return unify_terms(a, b, subst)


def unify_terms_trail(a: Term, b: Term, subst: Subst, trail: list) -> bool:
    """Destructive unification for the enumeration hot path.

    Bindings are written into ``subst`` directly and recorded on ``trail``;
    the caller undoes a failed or speculative attempt with
    :func:`undo_trail`.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, subst)
        y = walk(y, subst)
        if x is y or x == y:
            continue
        if type(x) is int:
            if occurs(x, y, subst):
                return False
            subst[x] = y
            trail.append(x)
        elif type(y) is int:
            if occurs(y, x, subst):
                return False
            subst[y] = x
            trail.append(y)
        else:
            if x[0] != y[0] or len(x) != len(y):
                return False
            stack.extend(zip(x[1:], y[1:]))
    return True


def unify_args_trail(a: tuple, b: tuple, subst: Subst, trail: list) -> bool:
    for x, y in zip(a, b):
        if not unify_terms_trail(x, y, subst, trail):
            return False
    return True


def undo_trail(subst: Subst, trail: list, mark: int = 0):
    while len(trail) > mark:
        del subst[trail.pop()]


def normalize_subst(subst: Subst) -> Subst:
    """Idempotent form: every binding fully dereferenced."""
    return {v: apply_subst(t, subst) for v, t in subst.items()}


def term_vars(t: Term, acc=None) -> set:
    if acc is None:
        acc = set()
    if type(t) is int:
        acc.add(t)
    else:
        for a in t[1:]:
            term_vars(a, acc)
    return acc


def literal_vars(lit: Literal) -> set:
    acc: set = set()
    for a in lit.args:
        term_vars(a, acc)
    return acc


# ---------------------------------------------------------------------------
# standardizing apart


def offset_term(t: Term, k: int) -> Term:
    if type(t) is int:
        return t + k
    if len(t) == 1:
        return t
    return (t[0],) + tuple(offset_term(a, k) for a in t[1:])


def offset_literal(lit: Literal, k: int) -> Literal:
    if not lit.args or k == 0:
        return lit
    return Literal(lit.neg, lit.pred, tuple(offset_term(a, k) for a in lit.args))


def clause_var_count(clause: Clause) -> int:
    vs: set = set()
    for lit in clause.literals:
        for a in lit.args:
            term_vars(a, vs)
    return max(vs) + 1 if vs else 0


# ---------------------------------------------------------------------------
# positions

Position = tuple


def subterm_positions(obj) -> list:
    """All (position, subterm) pairs in left-to-right, outside-in order.

    For a literal the root atom itself is excluded: positions start at the
    argument index (1-based).  For a bare term the empty position (the term
    itself) is included.
    """
    out: list = []

    def rec(t: Term, pos: tuple):
        out.append((pos, t))
        if type(t) is not int:
            for i, a in enumerate(t[1:], start=1):
                rec(a, pos + (i,))

    if isinstance(obj, Literal):
        for i, a in enumerate(obj.args, start=1):
            rec(a, (i,))
    else:
        rec(obj, ())
    return out


def subterm_at(obj, pos: Position):
    if isinstance(obj, Literal):
        if not pos:
            raise KeyError("literal root is not a term position")
        t = obj.args[pos[0] - 1]
        pos = pos[1:]
    else:
        t = obj
    for i in pos:
        if type(t) is int:
            raise KeyError("position runs into a variable")
        t = t[i]
    return t


def replace_at(obj, pos: Position, new: Term):
    """Replace the subterm at ``pos`` with ``new``; round-trips with
    ``subterm_at``."""

    def rec(t: Term, p: tuple) -> Term:
        if not p:
            return new
        if type(t) is int:
            raise KeyError("position runs into a variable")
        i = p[0]
        return t[:i] + (rec(t[i], p[1:]),) + t[i + 1 :]

    if isinstance(obj, Literal):
        if not pos:
            raise KeyError("literal root is not a term position")
        i = pos[0] - 1
        args = obj.args[:i] + (rec(obj.args[i], pos[1:]),) + obj.args[i + 1 :]
        return Literal(obj.neg, obj.pred, args)
    return rec(obj, pos)


# ---------------------------------------------------------------------------
# printing


def term_str(t: Term, names=None) -> str:
    if type(t) is int:
        return f"X{t}" if names is None else names.get(t, f"X{t}")
    if len(t) == 1:
        return t[0]
    return f"{t[0]}({','.join(term_str(a, names) for a in t[1:])})"


def literal_str(lit: Literal, names=None) -> str:
    if lit.pred == EQ and len(lit.args) == 2:
        op = "!=" if lit.neg else "="
        return f"{term_str(lit.args[0], names)} {op} {term_str(lit.args[1], names)}"
    s = lit.pred if not lit.args else f"{lit.pred}({','.join(term_str(a, names) for a in lit.args)})"
    return f"~{s}" if lit.neg else s


def canonical_clause_str(clause: Clause) -> str:
    """Clause text with variables renumbered 0.. in order of first use."""
    names: dict = {}
    for lit in clause.literals:
        for a in lit.args:
            for v in _var_order(a):
                if v not in names:
                    names[v] = f"X{len(names)}"
    return " | ".join(literal_str(lit, names) for lit in clause.literals)


def _var_order(t: Term) -> Iterator[int]:
    if type(t) is int:
        yield t
    else:
        for a in t[1:]:
            yield from _var_order(a)


def matrix_dump(matrix: Matrix) -> str:
    """Deterministic text form: one clause per line, canonical variables."""
    lines = []
    starts = set(matrix.start_ids)
    for c in matrix.clauses:
        tag = " start" if c.id in starts else ""
        lines.append(f"clause {c.id}{tag}: {canonical_clause_str(c)}")
    return "\n".join(lines) + "\n"
