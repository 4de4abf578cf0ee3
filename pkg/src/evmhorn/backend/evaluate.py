"""Bottom-up evaluation of encoded Horn clauses.

Derives the least model of a clause set by semi-naive iteration and then
answers each query: if some valuation satisfies the goal body, the goal is
reachable.  Per-argument widening keeps the fact space finite: when one
argument position of a predicate accumulates too many distinct values, that
position collapses to the "unknown" element of its abstract domain (sound
for reachability, which only ever over-approximates).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..clauses.consteval import ArrV, EvalError, NotConst, eval_const
from ..clauses.ir import ClauseSet, GroundClause, SlotGroup
from ..hrt import ast


class EvaluationError(ValueError):
    """The clause set cannot be evaluated bottom-up (e.g. a variable is
    not constrained enough to enumerate)."""


class _Unbounded(Exception):
    """An argument position without an 'unknown' element exceeded the
    widening threshold; the result would be unsound to truncate."""


class Verdict(Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    UNKNOWN = "unknown"


WIDEN_LIMIT = 256
ENUM_LIMIT = 1 << 16  # safety cap for bounded enumerations


@dataclass
class QueryResult:
    name: str
    verdict: Verdict
    expect: str | None = None

    @property
    def as_sat(self) -> str:
        """The solver view of the goal: deriving the body means the CHC
        system with a false-headed goal clause is unsatisfiable."""
        return {Verdict.REACHABLE: "SAT", Verdict.UNREACHABLE: "UNSAT",
                Verdict.UNKNOWN: "UNKNOWN"}[self.verdict]


def _top_value(sort: str, source_type, datatypes) -> object | None:
    """The 'unknown' element for one encoded slot, if the source type has
    a payload-free constructor to widen to (its discriminant), else the
    canonical zero for payload slots."""
    if sort == "int":
        return 0
    if sort == "bool":
        return False
    if sort == "aint":
        return ArrV(0)
    if sort == "abool":
        return ArrV(False)
    return None


def _group_top(group: SlotGroup, sorts: tuple, datatypes) -> tuple | None:
    """Widened value tuple for a slot group, or None if the group's source
    type has no payload-free constructor (so widening would be unsound)."""
    src = group.source_type
    elem = src
    array = False
    if isinstance(src, ast.TArray):
        elem = src.elem
        array = True
    if not isinstance(elem, ast.TSum):
        return None
    dt = datatypes.get(elem.name)
    if dt is None:
        return None
    top_index = None
    for i, (_, payload) in enumerate(dt.constructors):
        if not payload:
            top_index = i
            break
    if top_index is None:
        return None
    out = []
    for slot in group.slots:
        sort = sorts[slot]
        first = not out
        if first and len(dt.constructors) > 1:
            # Discriminant slot: select the payload-free constructor.
            disc = (top_index == 1) if sort in ("bool", "abool") else top_index
            out.append(ArrV(disc) if array else disc)
        else:
            out.append(_top_value(sort, elem, datatypes))
    return tuple(out)


class Evaluator:
    def __init__(self, cs: ClauseSet, widen_limit: int = WIDEN_LIMIT):
        if not cs.encoded:
            raise EvaluationError("clause set must be value-encoded first")
        self.cs = cs
        self.widen_limit = widen_limit
        self.facts: dict[str, set[tuple]] = {p: set() for p in cs.preds}
        self.widened: dict[str, set[int]] = {p: set() for p in cs.preds}
        self._group_values: dict[tuple, set] = {}

    # -- fact insertion with widening --------------------------------------

    def _widen_fact(self, pred: str, fact: tuple) -> tuple:
        groups = self.cs.layouts.get(pred, [])
        if not self.widened[pred]:
            return fact
        fact = list(fact)
        sorts = self.cs.preds[pred]
        for gi in self.widened[pred]:
            group = groups[gi]
            top = _group_top(group, sorts, self.cs.datatypes)
            for slot, value in zip(group.slots, top):
                fact[slot] = value
        return tuple(fact)

    def insert(self, pred: str, fact: tuple) -> set[tuple]:
        """Store ``fact`` (widening first) and return the newly stored facts.

        Widening rewrites the whole fact set, so the result may contain the
        collapsed representatives of previously delivered facts; they must
        re-enter the delta so consumers see the widened values.
        """
        fact = self._widen_fact(pred, fact)
        if fact in self.facts[pred]:
            return set()
        groups = self.cs.layouts.get(pred, [])
        sorts = self.cs.preds[pred]
        for gi, group in enumerate(groups):
            if gi in self.widened[pred]:
                continue
            key = (pred, gi)
            seen = self._group_values.setdefault(key, set())
            seen.add(tuple(fact[s] for s in group.slots))
            if len(seen) > self.widen_limit:
                top = _group_top(group, sorts, self.cs.datatypes)
                if top is None:
                    raise _Unbounded(f"{pred} argument {group.source_index}")
                self.widened[pred].add(gi)
                old = self.facts[pred]
                self.facts[pred] = set()
                new: set[tuple] = set()
                for f in old | {fact}:
                    new |= self.insert(pred, f)
                return new
        self.facts[pred].add(fact)
        return {fact}

    # -- clause body solving ------------------------------------------------

    def solve(self, clause: GroundClause, delta: dict[str, set] | None = None):
        """Yield variable environments satisfying the clause body.

        With ``delta`` given, at least one predicate premise must be
        matched against a delta fact (semi-naive restriction).
        """
        pred_idx = [i for i, p in enumerate(clause.premises) if isinstance(p, ast.PredApp)]
        if delta is not None and not pred_idx:
            return
        positions = pred_idx or [None]
        seen_envs = set()
        for dpos in (positions if delta is not None else [None]):
            for env in self._search(list(clause.premises), {}, delta, dpos):
                key = tuple(sorted(env.items(), key=lambda kv: kv[0]))
                if key not in seen_envs:
                    seen_envs.add(key)
                    yield env

    def _facts_for(self, premise_index, app, delta, dpos):
        if delta is not None and premise_index == dpos:
            return delta.get(app.name, ())
        return self.facts.get(app.name, ())

    def _search(self, items: list, env: dict, delta, dpos):
        # items: (original_index, premise) pairs still pending
        pending = [(i, p) for i, p in enumerate(items) if p is not None]
        yield from self._step(items, pending, env, delta, dpos)

    def _step(self, items, pending, env, delta, dpos):
        if not pending:
            yield env
            return
        # 1) fully-bound constraints: test them immediately.
        for idx, (i, p) in enumerate(pending):
            if isinstance(p, ast.PredApp):
                continue
            try:
                value = eval_const(p, env)
            except NotConst:
                continue
            except EvalError:
                return
            if value is not True:
                return
            rest = pending[:idx] + pending[idx + 1:]
            yield from self._step(items, rest, env, delta, dpos)
            return
        # 2) defining equalities: bind a fresh variable.
        for idx, (i, p) in enumerate(pending):
            binding = self._as_binding(p, env)
            if binding is None:
                continue
            name, value = binding
            rest = pending[:idx] + pending[idx + 1:]
            yield from self._step(items, rest, {**env, name: value}, delta, dpos)
            return
        # 3) join on a predicate premise.
        for idx, (i, p) in enumerate(pending):
            if not isinstance(p, ast.PredApp):
                continue
            rest = pending[:idx] + pending[idx + 1:]
            for fact in self._facts_for(i, p, delta, dpos):
                bound = self._unify(p.args, fact, env)
                if bound is not None:
                    yield from self._step(items, rest, bound, delta, dpos)
            return
        # 4) bounded enumeration of an integer variable.
        enum = self._enumerable(pending, env)
        if enum is not None:
            name, lo, hi = enum
            for v in range(lo, hi):
                yield from self._step(items, pending, {**env, name: v}, delta, dpos)
            return
        names = sorted({v for _, p in pending for v in _free_vars(p) if v not in env})
        raise EvaluationError(
            f"cannot order clause body: variables {names} are unconstrained")

    def _as_binding(self, p, env):
        # A bare boolean variable (or its negation) pins its own value.
        if isinstance(p, ast.Var) and p.name not in env:
            return p.name, True
        if (isinstance(p, ast.Tilde) and isinstance(p.operand, ast.Var)
                and p.operand.name not in env):
            return p.operand.name, False
        if not (isinstance(p, ast.BinExpr) and p.op == "="):
            return None
        for var, expr in ((p.left, p.right), (p.right, p.left)):
            if isinstance(var, ast.Var) and var.name not in env:
                try:
                    return var.name, eval_const(expr, env)
                except (NotConst, EvalError):
                    continue
        return None

    def _unify(self, args, fact, env):
        out = dict(env)
        residual = []
        for arg, value in zip(args, fact):
            if isinstance(arg, ast.Var):
                if arg.name in out:
                    if out[arg.name] != value:
                        return None
                else:
                    out[arg.name] = value
                continue
            residual.append((arg, value))
        for arg, value in residual:
            try:
                if eval_const(arg, out) != value:
                    return None
            except NotConst:
                return self._unify_residual(arg, value, out)
            except EvalError:
                return None
        return out

    def _unify_residual(self, arg, value, env):
        # A premise argument still containing unbound variables: too rare
        # to warrant a full solver, so reject the clause set honestly.
        raise EvaluationError(
            f"premise argument {type(arg).__name__} cannot be inverted")

    def _enumerable(self, pending, env):
        """Find a variable with constant lower and upper bounds among the
        pending constraints, e.g. ``?p >= 0`` with ``?p * 32 < ?l``."""
        lows: dict[str, int] = {}
        highs: dict[str, int] = {}
        for _, p in pending:
            if not isinstance(p, ast.BinExpr):
                continue
            bound = self._bound_of(p, env)
            if bound is None:
                continue
            name, kind, value = bound
            if kind == "low":
                lows[name] = max(lows.get(name, value), value)
            else:
                highs[name] = min(highs.get(name, value), value)
        for name in lows:
            if name in highs:
                lo, hi = lows[name], highs[name]
                if hi - lo > ENUM_LIMIT:
                    raise EvaluationError(f"enumeration range for {name} too large")
                return name, lo, hi
        return None

    def _bound_of(self, p: ast.BinExpr, env):
        """Normalize one comparison into a low/high bound on a variable."""
        sides = [(p.left, p.op, p.right), (p.right, _flip(p.op), p.left)]
        for subject, op, other in sides:
            if op not in ("<", "<=", ">", ">="):
                continue
            name, scale = _linear(subject)
            if name is None or name in env:
                continue
            try:
                limit = eval_const(other, env)
            except (NotConst, EvalError):
                continue
            if not isinstance(limit, int) or isinstance(limit, bool):
                continue
            if op == "<":
                return name, "high", _ceil_div(limit, scale)
            if op == "<=":
                return name, "high", _ceil_div(limit + 1, scale)
            if op == ">":
                return name, "low", limit // scale + 1
            return name, "low", _ceil_div(limit, scale)
        return None


def _flip(op: str) -> str:
    return {"<": ">", ">": "<", "<=": ">=", ">=": "<="}.get(op, op)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _linear(e):
    """Match ``?v`` or ``?v * k``/``k * ?v`` with positive constant k."""
    if isinstance(e, ast.Var):
        return e.name, 1
    if isinstance(e, ast.BinExpr) and e.op == "*":
        for a, b in ((e.left, e.right), (e.right, e.left)):
            if isinstance(a, ast.Var) and isinstance(b, ast.Num) and b.value > 0:
                return a.name, b.value
    return None, 1


def _free_vars(e) -> set:
    out: set = set()

    def walk(x):
        if isinstance(x, ast.Var):
            out.add(x.name)
        elif isinstance(x, ast.PredApp):
            for a in x.args:
                walk(a)
        elif hasattr(x, "__dataclass_fields__"):
            for f in x.__dataclass_fields__:
                v = getattr(x, f)
                if isinstance(v, tuple):
                    for item in v:
                        if hasattr(item, "__dataclass_fields__"):
                            walk(item)
                elif hasattr(v, "__dataclass_fields__"):
                    walk(v)

    walk(e)
    return out


def _head_fact(clause: GroundClause, env: dict) -> tuple:
    try:
        return tuple(eval_const(a, env) for a in clause.head.args)
    except NotConst as exc:
        raise EvaluationError(
            f"clause {clause.name}: head variable {exc} is unconstrained") from exc


def saturate(cs: ClauseSet, widen_limit: int = WIDEN_LIMIT) -> Evaluator:
    """Compute the least model of the clause set."""
    ev = Evaluator(cs, widen_limit)
    # Initial round: clauses without predicate premises.
    delta: dict[str, set] = {p: set() for p in cs.preds}
    for clause in cs.clauses:
        if clause.head is None or clause.pred_premises():
            continue
        for env in ev.solve(clause):
            fact = _head_fact(clause, env)
            delta[clause.head.name] |= ev.insert(clause.head.name, fact)
    rule_clauses = [c for c in cs.clauses if c.head is not None and c.pred_premises()]
    while any(delta.values()):
        new_delta: dict[str, set] = {p: set() for p in cs.preds}
        for clause in rule_clauses:
            if not any(delta.get(p.name) for p in clause.pred_premises()):
                continue
            for env in ev.solve(clause, delta):
                fact = _head_fact(clause, env)
                new_delta[clause.head.name] |= ev.insert(clause.head.name, fact)
        delta = new_delta
    return ev


def run_queries(cs: ClauseSet, widen_limit: int = WIDEN_LIMIT) -> list[QueryResult]:
    """Saturate the clause set and answer every query."""
    try:
        ev = saturate(cs, widen_limit)
    except _Unbounded:
        return [QueryResult(q.name, Verdict.UNKNOWN, q.expect) for q in cs.queries]
    results = []
    for q in cs.queries:
        reached = False
        for _ in ev.solve(q.clause):
            reached = True
            break
        results.append(QueryResult(
            q.name, Verdict.REACHABLE if reached else Verdict.UNREACHABLE, q.expect))
    return results
