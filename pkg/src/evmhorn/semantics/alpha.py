"""Abstraction of concrete machine states into analysis facts."""
from __future__ import annotations

from dataclasses import dataclass

from ..concrete import Outcome, Snapshot
from .values import AbsMap, leq_map, leq_word, stack_to_array, storage_to_map, to_word_memory


@dataclass(frozen=True)
class AbsFact:
    """A fact over the abstract domain: predicate, parameters, arguments."""

    pred: str
    params: tuple[int, ...]
    args: tuple


def alpha_running(snapshot: Snapshot, contract_id: int = 0, call_level: bool = False) -> AbsFact:
    """Abstract a running state into an ``MState`` fact.

    The stack is exported bottom-first as (size, array); memory is assembled
    into 32-byte words.
    """
    return AbsFact(
        "MState",
        (contract_id, snapshot.pc),
        (
            len(snapshot.stack),
            stack_to_array(snapshot.stack),
            to_word_memory(snapshot.memory),
            storage_to_map(snapshot.storage),
            call_level,
        ),
    )


def alpha_halt(outcome: Outcome, contract_id: int = 0, call_level: bool = False) -> AbsFact:
    if not outcome.halted:
        raise ValueError("alpha_halt applies to regular halts only")
    return AbsFact("Halt", (contract_id,), (storage_to_map(outcome.storage), call_level))


def alpha_exception(contract_id: int = 0, call_level: bool = False) -> AbsFact:
    return AbsFact("Exc", (contract_id,), (call_level,))


def leq_fact(a: AbsFact, b: AbsFact) -> bool:
    """Pointwise order between facts of the same predicate instance.

    For ``MState`` the stack arrays are only compared on positions below the
    (equal) stack size; all other array arguments are compared everywhere.
    """
    if (a.pred, a.params) != (b.pred, b.params):
        return False
    if a.pred == "MState":
        size_a, sa_a, mem_a, stor_a, cl_a = a.args
        size_b, sa_b, mem_b, stor_b, cl_b = b.args
        if size_a != size_b or cl_a != cl_b:
            return False
        if not all(leq_word(sa_a.get(i), sa_b.get(i)) for i in range(size_a)):
            return False
        return leq_map(mem_a, mem_b) and leq_map(stor_a, stor_b)
    if a.pred == "Halt":
        stor_a, cl_a = a.args
        stor_b, cl_b = b.args
        return cl_a == cl_b and leq_map(stor_a, stor_b)
    if a.pred == "Exc":
        return a.args == b.args
    values = zip(a.args, b.args)
    return all(
        leq_map(x, y) if isinstance(x, AbsMap) else (leq_word(x, y) if not isinstance(x, bool) else x == y)
        for x, y in values
    )


def covered(fact: AbsFact, derived: list[AbsFact]) -> bool:
    """Whether some derived fact over-approximates ``fact``."""
    return any(leq_fact(fact, d) for d in derived)
