"""End-to-end analyses: compose the abstract semantics with a property,
ground it against one or more contracts, and answer the resulting
reachability queries.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..backend import run_queries
from ..backend.evaluate import EvaluationError, QueryResult, Verdict
from ..clauses import (
    ClauseSet,
    SelectorTable,
    encode_values,
    fold_constants,
    fold_exhaustive,
    fold_linear,
    instantiate,
)
from ..hrt import parse_module, typecheck_module
from .program import Contract, build_selectors

FOLDING_MODES = ("none", "linear", "exhaustive")

# Is any CALL still executable in a re-entrant execution (call level one)?
# If so, the contract lets an external callee run this code again while a
# call of its own is in flight.
REENTRANCY_QUERY = """
query reentrantCall
  for (!id: int) in ids(), (!pc: int) in pcsForIdAndOpcode(!id, CALL)
  [?size: int, ?sa: array<AbsDom>, ?mem: array<AbsDom>, ?stor: array<AbsDom>]
  MState{!id, !pc}(?size, ?sa, ?mem, ?stor, true), ?size > 6;
"""

# Solidity compiles assert failures to INVALID; reaching one means some
# execution violates an assertion.
ASSERTION_QUERY = """
query assertionFailure
  for (!id: int) in ids(), (!pc: int) in pcsForIdAndOpcode(!id, INVALID)
  [?size: int, ?sa: array<AbsDom>, ?mem: array<AbsDom>, ?stor: array<AbsDom>, ?cl: bool]
  MState{!id, !pc}(?size, ?sa, ?mem, ?stor, ?cl);
"""

# Replay harness for VM test cases: some regular halt must satisfy the
# expected storage (correctValues), and no regular halt may violate it
# (uniqueValues).  Together they pin the post state exactly.
VMTEST_DECLS = """
sel postStorageForId: int -> [int * int];

op vmtestAbsEq(a: AbsDom, b: int): bool :=
  match a with
    | @V(x) => x = b
    | @T => true;

op vmtestAbsNeq(a: AbsDom, b: int): bool :=
  match a with
    | @V(x) => x != b
    | @T => true;

test correctValues expect SAT
  for (!id: int) in ids()
  [?stor: array<AbsDom>]
  Halt{!id}(?stor, false),
  (for (!k: int, !v: int) in postStorageForId(!id): && vmtestAbsEq(select ?stor !k, !v));

test uniqueValues expect UNSAT
  for (!id: int) in ids()
  [?stor: array<AbsDom>]
  Halt{!id}(?stor, false),
  (for (!k: int, !v: int) in postStorageForId(!id): || vmtestAbsNeq(select ?stor !k, !v));
"""


def base_semantics_source() -> str:
    return (resources.files("evmhorn") / "specs" / "evm-base.hrt").read_text()


def load_spec(extra: str = "") -> object:
    module = parse_module(base_semantics_source() + "\n" + extra)
    typecheck_module(module)
    return module


def build_clauses(module, selectors: SelectorTable, folding: str = "linear") -> ClauseSet:
    if folding not in FOLDING_MODES:
        raise ValueError(f"unknown folding mode {folding!r}")
    cs = fold_constants(instantiate(module, selectors))
    cs = fold_constants(encode_values(cs))
    if folding == "linear":
        cs = fold_linear(cs)
    elif folding == "exhaustive":
        cs = fold_exhaustive(cs)
    return fold_constants(cs)


@dataclass
class Analysis:
    """Outcome of one composed analysis run."""

    results: list[QueryResult]
    clause_set: ClauseSet

    @property
    def classification(self) -> str:
        if any(r.verdict is Verdict.UNKNOWN for r in self.results):
            return "unknown"
        if any(r.verdict is Verdict.REACHABLE for r in self.results):
            return "vulnerable"
        return "safe"


def analyze(contracts: list[Contract], property_text: str, *,
            folding: str = "linear", widen_limit: int = 256) -> Analysis:
    selectors = build_selectors(contracts)
    module = load_spec(property_text)
    cs = build_clauses(module, selectors, folding)
    try:
        results = run_queries(cs, widen_limit)
    except EvaluationError:
        results = [QueryResult(q.name, Verdict.UNKNOWN, q.expect) for q in cs.queries]
    return Analysis(results, cs)


def analyze_reentrancy(contracts: list[Contract], **kw) -> Analysis:
    return analyze(contracts, REENTRANCY_QUERY, **kw)


def analyze_assertions(contracts: list[Contract], **kw) -> Analysis:
    return analyze(contracts, ASSERTION_QUERY, **kw)


def analyze_vmtest(contracts: list[Contract], post_storage: dict[int, dict[int, int]],
                   **kw) -> Analysis:
    """Check that every contract halts exactly in its expected storage.

    ``post_storage`` maps contract id to expected key/value pairs; keys the
    contract is known to touch but that are absent from the expectation are
    required to be zero.
    """
    selectors = build_selectors(contracts)

    def post_rows(cid: int) -> list[tuple]:
        contract = next(c for c in contracts if c.cid == cid)
        expected = dict(post_storage.get(cid, {}))
        for key in sorted(contract.storage_keys()):
            expected.setdefault(key, 0)
        return sorted(expected.items())

    selectors.register("postStorageForId", post_rows)
    module = load_spec(VMTEST_DECLS)
    cs = build_clauses(module, selectors, kw.get("folding", "linear"))
    try:
        results = run_queries(cs, kw.get("widen_limit", 256))
    except EvaluationError:
        results = [QueryResult(q.name, Verdict.UNKNOWN, q.expect) for q in cs.queries]
    return Analysis(results, cs)


def solved_precisely(analysis: Analysis) -> bool:
    """All self-checking tests got the answer they expect."""
    return all(r.expect is not None and r.as_sat == r.expect for r in analysis.results)
