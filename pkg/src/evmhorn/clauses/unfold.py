"""Predicate unfolding: resolving producers into consumers.

Unfolding a predicate p replaces every clause that uses p in its body with
one resolvent per clause producing p, then drops p and its producing
clauses.  Folding strategies:

* ``fold_linear`` repeatedly unfolds predicates with exactly one producer
  and exactly one (non-recursive) consumer, which never increases the
  number of clauses.
* ``fold_exhaustive`` additionally unfolds every remaining non-recursive
  predicate, cheapest first, up to a size budget.

Predicates mentioned by queries are never unfolded: their facts must
remain observable.
"""
from __future__ import annotations

import itertools

from ..hrt import ast
from .instantiate import _collect_vars, _map_children
from .ir import ClauseSet, GroundClause


EXHAUSTIVE_BUDGET = 20000  # clause-count cap for exhaustive unfolding


def _rename(e, mapping: dict):
    if isinstance(e, ast.Var):
        return ast.Var(mapping.get(e.name, e.name))
    if isinstance(e, ast.Match):
        scruts = tuple(_rename(s, mapping) for s in e.scrutinees)
        arms = []
        for arm in e.arms:
            inner = dict(mapping)
            if arm.patterns is not None:
                for pat in arm.patterns:
                    if isinstance(pat, ast.PCons):
                        for binder in pat.binders:
                            inner.pop(binder, None)
            arms.append(ast.Arm(arm.patterns, _rename(arm.body, inner)))
        return ast.Match(scruts, tuple(arms))
    return _map_children(e, lambda c: _rename(c, mapping))


class _Counter:
    def __init__(self):
        self.n = 0

    def fresh(self, base: str) -> str:
        self.n += 1
        return f"{base}'{self.n}"


def _resolve(consumer: GroundClause, producers_by_occurrence, counter) -> GroundClause:
    """One resolvent: each p-premise of the consumer is replaced by the
    body of its chosen producer, with the producer's variables freshened
    and head arguments equated to the premise arguments."""
    variables = list(consumer.variables)
    premises: list = []
    occurrence = 0
    for premise in consumer.premises:
        producer = producers_by_occurrence.get(occurrence) if isinstance(premise, ast.PredApp) else None
        if isinstance(premise, ast.PredApp):
            occurrence += 1
        if producer is None:
            premises.append(premise)
            continue
        mapping = {name: counter.fresh(name) for name, _ in producer.variables}
        variables.extend((mapping[n], t) for n, t in producer.variables)
        for q in producer.premises:
            premises.append(_rename(q, mapping))
        assert producer.head is not None
        for arg, harg in zip(premise.args, producer.head.args):
            renamed = _rename(harg, mapping)
            if arg == renamed:
                continue
            premises.append(ast.BinExpr("=", arg, renamed))
    name = f"{consumer.name}+{'+'.join(p.name for p in producers_by_occurrence.values())}"
    return GroundClause(name, tuple(variables), tuple(premises), consumer.head)


def unfold_predicate(cs: ClauseSet, pred: str) -> ClauseSet:
    """Remove ``pred`` by resolving its producers into its consumers."""
    producers = cs.clauses_for_head(pred)
    if any(any(p.name == pred for p in c.pred_premises()) for c in producers):
        raise ValueError(f"cannot unfold recursive predicate {pred}")
    counter = _Counter()
    out = ClauseSet(preds={k: v for k, v in cs.preds.items() if k != pred},
                    datatypes=dict(cs.datatypes), encoded=cs.encoded,
                    layouts={k: v for k, v in cs.layouts.items() if k != pred},
                    queries=list(cs.queries))
    for clause in cs.clauses:
        if clause.head is not None and clause.head.name == pred:
            continue
        occurrences = [i for i, p in enumerate(clause.pred_premises()) if p.name == pred]
        if not occurrences:
            out.clauses.append(clause)
            continue
        for combo in itertools.product(producers, repeat=len(occurrences)):
            chosen = dict(zip(occurrences, combo))
            out.clauses.append(_resolve(clause, chosen, counter))
    return out


def _protected(cs: ClauseSet) -> set[str]:
    protected: set[str] = set()
    for query in cs.queries:
        for p in query.clause.pred_premises():
            protected.add(p.name)
    return protected


def _recursive(cs: ClauseSet) -> set[str]:
    """Predicates on a cycle of the clause dependency graph."""
    edges: dict[str, set[str]] = {p: set() for p in cs.preds}
    for clause in cs.clauses:
        if clause.head is None:
            continue
        for p in clause.pred_premises():
            edges.setdefault(p.name, set()).add(clause.head.name)
    on_cycle: set[str] = set()
    for start in list(edges):
        # Depth-first search for a path back to the start node.
        stack, seen = [start], set()
        while stack:
            node = stack.pop()
            for succ in edges.get(node, ()):
                if succ == start:
                    on_cycle.add(start)
                    stack = []
                    break
                if succ not in seen:
                    seen.add(succ)
                    stack.append(succ)
    return on_cycle


def fold_linear(cs: ClauseSet) -> ClauseSet:
    """Unfold predicates with a single producer and a single consumer."""
    protected = _protected(cs)
    changed = True
    while changed:
        changed = False
        recursive = _recursive(cs)
        for pred in list(cs.preds):
            if pred in protected or pred in recursive:
                continue
            producers = cs.clauses_for_head(pred)
            consumers = cs.clauses_using(pred)
            if len(producers) != 1 or len(consumers) != 1:
                continue
            if consumers[0] is producers[0]:
                continue
            if sum(1 for p in consumers[0].pred_premises() if p.name == pred) != 1:
                continue
            cs = unfold_predicate(cs, pred)
            changed = True
            break
    return cs


def fold_exhaustive(cs: ClauseSet) -> ClauseSet:
    """Unfold every non-recursive unprotected predicate, cheapest first."""
    cs = fold_linear(cs)
    protected = _protected(cs)
    while True:
        recursive = _recursive(cs)
        candidates = []
        for pred in cs.preds:
            if pred in protected or pred in recursive:
                continue
            fan_in = len(cs.clauses_for_head(pred))
            fan_out = sum(
                sum(1 for p in c.pred_premises() if p.name == pred)
                for c in cs.clauses_using(pred))
            candidates.append((fan_in * fan_out, pred))
        if not candidates:
            return cs
        candidates.sort()
        cost, pred = candidates[0]
        if len(cs.clauses) + cost > EXHAUSTIVE_BUDGET:
            return cs
        cs = unfold_predicate(cs, pred)
