"""Clausal preprocessing: negate the conjecture, Skolemize, and build the
clause matrix the prover searches over.

The matrix is the clause form of ``axioms AND NOT conjecture``; a closed
tableau over it refutes that conjunction.  Start clauses are the ones
derived from the conjecture (every clause when there is none).  When the
problem mentions equality a reflexivity clause ``X = X`` is appended so
equational goals can be discharged; paramodulation never rewrites with it.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .terms import EQ, Clause, Literal, Matrix
from .tptp import (
    AnnotatedFormula,
    FAtom,
    FBin,
    FConst,
    FNeg,
    FQuant,
    Problem,
    parse_problem,
    parse_problem_file,
)


class ClausifyError(ValueError):
    pass


def clausify(problem: Problem) -> Matrix:
    """Convert a parsed problem into a :class:`Matrix`."""
    ctx = _Ctx(problem)
    raw: List[Tuple[list, bool]] = []  # (literal list with named vars, from_conjecture)
    for af in problem.formulas:
        for lits in _formula_clauses(af, ctx):
            raw.append((lits, af.role in ("conjecture", "negated_conjecture")))

    clauses: List[Clause] = []
    start_ids: List[int] = []
    has_eq = False
    for lits, is_start in raw:
        lits = _dedup(lits)
        if not lits:
            raise ClausifyError("problem clausifies to an empty clause (degenerate input)")
        clause = Clause(len(clauses), tuple(_number_vars(lits)))
        clauses.append(clause)
        if is_start:
            start_ids.append(clause.id)
        has_eq = has_eq or any(l.pred == EQ for l in clause.literals)

    if not clauses:
        raise ClausifyError("problem contains no clauses")
    if not start_ids:
        start_ids = [c.id for c in clauses]

    reflexivity_id = None
    if has_eq:
        reflexivity_id = len(clauses)
        clauses.append(Clause(reflexivity_id, (Literal(False, EQ, (0, 0)),)))

    return Matrix(clauses, start_ids, reflexivity_id)


def clausify_text(text: str) -> Matrix:
    return clausify(parse_problem(text))


def load_matrix(path) -> Matrix:
    return clausify(parse_problem_file(path))


# ---------------------------------------------------------------------------


class _Ctx:
    def __init__(self, problem: Problem):
        self.fresh_var = 0
        self.skolem = 0
        self.used_symbols = set()
        for af in problem.formulas:
            _collect_symbols(af.formula, self.used_symbols)

    def new_var(self) -> str:
        self.fresh_var += 1
        return f"_V{self.fresh_var}"

    def new_skolem(self) -> str:
        while True:
            name = f"sk{self.skolem}"
            self.skolem += 1
            if name not in self.used_symbols:
                return name


def _collect_symbols(f, acc: set):
    if isinstance(f, FAtom):
        acc.add(f.pred)
        for a in f.args:
            _collect_term_symbols(a, acc)
    elif isinstance(f, FNeg):
        _collect_symbols(f.sub, acc)
    elif isinstance(f, FBin):
        _collect_symbols(f.left, acc)
        _collect_symbols(f.right, acc)
    elif isinstance(f, FQuant):
        _collect_symbols(f.sub, acc)


def _collect_term_symbols(t, acc: set):
    if isinstance(t, tuple):
        acc.add(t[0])
        for a in t[1:]:
            _collect_term_symbols(a, acc)


def _formula_clauses(af: AnnotatedFormula, ctx: _Ctx) -> List[list]:
    f = af.formula
    free = sorted(_free_vars(f))
    if free:
        f = FQuant("!", tuple(free), f)
    # conjectures are refuted; negated_conjecture and cnf inputs are
    # already in refutation form
    positive = not (af.lang == "fof" and af.role == "conjecture")
    tree = _nnf(f, positive, {}, (), ctx)
    return _cnf(tree)


def _free_vars(f, bound=frozenset()) -> set:
    if isinstance(f, FAtom):
        out: set = set()
        for a in f.args:
            _term_free_vars(a, bound, out)
        return out
    if isinstance(f, FNeg):
        return _free_vars(f.sub, bound)
    if isinstance(f, FBin):
        return _free_vars(f.left, bound) | _free_vars(f.right, bound)
    if isinstance(f, FQuant):
        return _free_vars(f.sub, bound | set(f.vars))
    return set()


def _term_free_vars(t, bound, out: set):
    if isinstance(t, str):
        if t not in bound:
            out.add(t)
    else:
        for a in t[1:]:
            _term_free_vars(a, bound, out)


# NNF trees: ("lit", Literal-with-named-vars) | ("and"|"or", [parts]) |
# ("true",) | ("false",)


def _nnf(f, positive: bool, env: dict, uvars: tuple, ctx: _Ctx):
    if isinstance(f, FConst):
        return ("true",) if f.value == positive else ("false",)
    if isinstance(f, FAtom):
        args = tuple(_subst_named(a, env) for a in f.args)
        return ("lit", Literal(not positive, f.pred, args))
    if isinstance(f, FNeg):
        return _nnf(f.sub, not positive, env, uvars, ctx)
    if isinstance(f, FBin):
        if f.op == "&":
            op = "and" if positive else "or"
            return (op, [_nnf(f.left, positive, env, uvars, ctx), _nnf(f.right, positive, env, uvars, ctx)])
        if f.op == "|":
            op = "or" if positive else "and"
            return (op, [_nnf(f.left, positive, env, uvars, ctx), _nnf(f.right, positive, env, uvars, ctx)])
        if f.op == "=>":
            if positive:
                return ("or", [_nnf(f.left, False, env, uvars, ctx), _nnf(f.right, True, env, uvars, ctx)])
            return ("and", [_nnf(f.left, True, env, uvars, ctx), _nnf(f.right, False, env, uvars, ctx)])
        if f.op == "<=>":
            expanded = FBin("&", FBin("=>", f.left, f.right), FBin("=>", f.right, f.left))
            return _nnf(expanded, positive, env, uvars, ctx)
        raise ClausifyError(f"unknown connective {f.op!r}")
    if isinstance(f, FQuant):
        universal = (f.q == "!") == positive
        env = dict(env)
        if universal:
            for v in f.vars:
                fresh = ctx.new_var()
                env[v] = fresh
                uvars = uvars + (fresh,)
        else:
            for v in f.vars:
                env[v] = (ctx.new_skolem(),) + uvars
        return _nnf(f.sub, positive, env, uvars, ctx)
    raise ClausifyError(f"not a formula node: {f!r}")


def _subst_named(t, env: dict):
    if isinstance(t, str):
        return env.get(t, t)
    if len(t) == 1:
        return t
    return (t[0],) + tuple(_subst_named(a, env) for a in t[1:])


def _cnf(tree) -> List[list]:
    kind = tree[0]
    if kind == "true":
        return []
    if kind == "false":
        return [[]]
    if kind == "lit":
        return [[tree[1]]]
    if kind == "and":
        out: List[list] = []
        for part in tree[1]:
            out.extend(_cnf(part))
        return out
    # or: distribute
    result: List[list] = [[]]
    for part in tree[1]:
        part_clauses = _cnf(part)
        result = [a + b for a in result for b in part_clauses]
    return result


def _dedup(lits: list) -> list:
    seen = set()
    out = []
    for l in lits:
        if l not in seen:
            seen.add(l)
            out.append(l)
    return out


def _number_vars(lits: list) -> List[Literal]:
    """Map named variables onto clause-local integers 0.. in first-use order."""
    names: Dict[str, int] = {}

    def conv(t):
        if isinstance(t, str):
            if t not in names:
                names[t] = len(names)
            return names[t]
        if len(t) == 1:
            return t
        return (t[0],) + tuple(conv(a) for a in t[1:])

    return [Literal(l.neg, l.pred, tuple(conv(a) for a in l.args)) for l in lits]
