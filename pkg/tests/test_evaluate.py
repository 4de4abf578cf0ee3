"""Bottom-up evaluation, widening, and the smt-lib emitter."""
from __future__ import annotations

import pytest

from evmhorn.backend import (
    EvaluationError,
    emit_script,
    find_solver,
    interpret,
    run_queries,
    run_solver,
    saturate,
)
from evmhorn.backend.evaluate import Verdict
from evmhorn.clauses import SelectorTable, encode_values, fold_constants, instantiate
from evmhorn.hrt import parse_module, typecheck_module


def compile_text(text: str, selectors: SelectorTable | None = None):
    module = parse_module(text)
    typecheck_module(module)
    cs = instantiate(module, selectors or SelectorTable())
    return fold_constants(encode_values(fold_constants(cs)))


class TestEvaluator:
    def test_defining_equalities_bind_in_any_order(self):
        cs = compile_text("""
            pred P: int;
            rule r := clause [?a: int, ?b: int, ?c: int]
              ?c = ?b * 2, ?b = ?a + 1, ?a = 4 => P(?c);
        """)
        assert saturate(cs).facts["P"] == {(10,)}

    def test_join_across_two_predicates(self):
        cs = compile_text("""
            pred A: int * int;
            pred B: int * int;
            pred C: int;
            rule a := clause [?k: int] ?k = 1 => A(?k, 10),
                      clause [?k: int] ?k = 2 => A(?k, 20);
            rule b := clause true => B(1, 100),
                      clause true => B(2, 200);
            rule c := clause [?k: int, ?x: int, ?y: int, ?s: int]
              A(?k, ?x), B(?k, ?y), ?s = ?x + ?y => C(?s);
        """)
        assert saturate(cs).facts["C"] == {(110,), (220,)}

    def test_bounded_enumeration_from_linear_constraints(self):
        cs = compile_text("""
            pred P: int;
            rule r := clause [?p: int] ?p >= 0, (?p * 32) < 100 => P(?p);
        """)
        assert saturate(cs).facts["P"] == {(0,), (1,), (2,), (3,)}

    def test_unconstrained_variable_is_reported(self):
        cs = compile_text("""
            pred P: int;
            rule r := clause [?x: int] ?x > 0 => P(?x);
        """)
        with pytest.raises(EvaluationError):
            saturate(cs)

    def test_widening_collapses_chatty_components_to_top(self):
        # A counter with no upper bound forces the AbsDom payload through
        # more distinct values than the widening threshold allows.
        cs = compile_text("""
            datatype AbsDom := @T | @V<int>;
            pred P: AbsDom;
            pred Q: bool;
            rule base := clause true => P(@V(0));
            rule step := clause [?x: int] P(@V(?x)) => P(@V(?x + 1));
            rule obs := clause [?a: AbsDom, ?b: bool] P(?a), ?b = (?a = @T) => Q(?b);
            query top [] Q(true);
        """)
        [res] = run_queries(cs, widen_limit=8)
        assert res.verdict is Verdict.REACHABLE
        ev = saturate(cs, widen_limit=8)
        assert (False, 0) in ev.facts["P"]  # the canonical unknown value
        assert len(ev.facts["P"]) <= 10

    def test_unbounded_domain_without_top_gives_unknown(self):
        cs = compile_text("""
            pred P: int;
            pred Q: bool;
            rule base := clause true => P(0);
            rule step := clause [?x: int] P(?x) => P(?x + 1);
            rule obs := clause [?x: int] P(?x) => Q(true);
            query g [] Q(true);
        """)
        [res] = run_queries(cs, widen_limit=8)
        assert res.verdict is Verdict.UNKNOWN

    def test_query_verdicts(self):
        cs = compile_text("""
            pred P: int;
            rule r := clause true => P(4);
            query hit [?x: int] P(?x), ?x = 4;
            query miss [?x: int] P(?x), ?x = 5;
        """)
        by_name = {r.name: r for r in run_queries(cs)}
        assert by_name["hit"].verdict is Verdict.REACHABLE
        assert by_name["miss"].verdict is Verdict.UNREACHABLE
        assert by_name["hit"].as_sat == "SAT"
        assert by_name["miss"].as_sat == "UNSAT"


GOLDEN = """\
(set-logic HORN)
; goal: g
(declare-fun P (Bool Int) Bool)
; r#0
(assert (=> true (P true 7)))
; query g
(assert (forall ((|?x| Int)) (=> (and (P true |?x|) (< |?x| 10)) false)))
(check-sat)
"""


class TestSmtlib:
    def _example(self):
        cs = compile_text("""
            datatype AbsDom := @T | @V<int>;
            pred P: AbsDom;
            rule r := clause true => P(@V(7));
            query g [?x: int] P(@V(?x)), ?x < 10;
        """)
        return cs, cs.queries[0]

    def test_script_is_stable(self):
        cs, query = self._example()
        assert emit_script(cs, query) == emit_script(cs, query) == GOLDEN

    def test_negation_is_sort_directed(self):
        cs = compile_text("""
            pred P: int * bool;
            rule r := clause [?x: int, ?b: bool]
              ?x = ~3, ?b = ~false => P(?x, ?b);
            query g [?x: int, ?b: bool] P(?x, ?b);
        """)
        script = emit_script(cs, cs.queries[0])
        assert "(- 3)" in script  # folded numeric negation
        assert "|?b|" in script  # ~false folds to a bare boolean premise

    def test_const_arrays_are_typed(self):
        cs = compile_text("""
            pred P: array<int>;
            rule r := clause true => P(store [5] 1 6);
            query g [?m: array<int>] P(?m);
        """)
        script = emit_script(cs, cs.queries[0])
        assert "((as const (Array Int Int)) 5)" in script
        assert "(store ((as const (Array Int Int)) 5) 1 6)" in script


needs_solver = pytest.mark.skipif(find_solver() is None,
                                  reason="no Horn solver on PATH")


class TestSolver:
    def test_interpretation_of_answers(self):
        # On a false-headed goal clause, a refutation means the goal state
        # is reachable; a model means it is not.
        assert interpret("unsat") is Verdict.REACHABLE
        assert interpret("sat") is Verdict.UNREACHABLE
        assert interpret("unknown") is Verdict.UNKNOWN
        assert interpret("timeout") is Verdict.UNKNOWN

    @needs_solver
    def test_solver_agrees_with_evaluator(self):
        cs = compile_text("""
            pred P: int;
            rule r := clause true => P(4);
            query hit [?x: int] P(?x), ?x = 4;
            query miss [?x: int] P(?x), ?x = 5;
        """)
        internal = {r.name: r.verdict for r in run_queries(cs)}
        solver = find_solver()
        for query in cs.queries:
            answer = run_solver(emit_script(cs, query), solver)
            assert interpret(answer) is internal[query.name]
