"""Self-validation of the abstract semantics against the concrete
interpreter: every state a real execution visits must be covered by some
derived fact.
"""
from __future__ import annotations

from ..backend.evaluate import Evaluator, saturate
from ..clauses import ClauseSet
from ..clauses.consteval import ArrV
from ..concrete import Environment, Outcome, run_concrete
from ..hrt import ast
from .alpha import AbsFact, alpha_exception, alpha_halt, alpha_running, covered
from .analyze import build_clauses, load_spec
from .program import Contract, build_selectors
from .values import TOP, AbsMap

_PARAM_COUNT = {"MState": 2, "Halt": 1, "Exc": 1}


def unmangle(name: str) -> tuple[str, tuple[int, ...]]:
    """Recover (base predicate, parameters) from a grounded predicate name."""
    for base, count in _PARAM_COUNT.items():
        prefix = base + "_"
        if name.startswith(prefix):
            parts = name[len(prefix):].split("_")
            if len(parts) == count:
                try:
                    return base, tuple(
                        -int(p[1:]) if p.startswith("n") else int(p) for p in parts
                    )
                except ValueError:
                    pass
    raise ValueError(f"cannot recover parameters from {name!r}")


def _decode_word(disc, payload):
    return payload if disc else TOP


def _decode_word_array(disc: ArrV, payload: ArrV) -> AbsMap:
    default = _decode_word(disc.default, payload.default)
    keys = {k for k, _ in disc.items} | {k for k, _ in payload.items}
    return AbsMap.of(default, {k: _decode_word(disc.get(k), payload.get(k)) for k in keys})


def decode_fact(pred: str, fact: tuple, cs: ClauseSet) -> AbsFact:
    """Translate an encoded model fact back into abstract-domain values."""
    base, params = unmangle(pred)
    args = []
    for group in cs.layouts[pred]:
        slots = [fact[i] for i in group.slots]
        typ = group.source_type
        if isinstance(typ, (ast.TInt, ast.TBool)):
            args.append(slots[0])
        elif isinstance(typ, ast.TSum):
            args.append(_decode_word(*slots))
        elif isinstance(typ, ast.TArray):
            args.append(_decode_word_array(*slots))
        else:
            raise ValueError(f"cannot decode argument of type {typ}")
    return AbsFact(base, params, tuple(args))


def abstract_model(contracts: list[Contract], *, widen_limit: int = 256) -> list[AbsFact]:
    """Saturate the base semantics over ``contracts`` and decode the model."""
    selectors = build_selectors(contracts)
    cs = build_clauses(load_spec(), selectors, "none")
    ev: Evaluator = saturate(cs, widen_limit)
    model = []
    for pred, facts in ev.facts.items():
        for fact in facts:
            model.append(decode_fact(pred, fact, cs))
    return model


def uncovered_states(contract: Contract, env: Environment,
                     model: list[AbsFact]) -> tuple[list[AbsFact], Outcome]:
    """Concrete states of one run that no derived fact over-approximates.

    A sound analysis yields an empty list for every run the oracle accepts.
    """
    outcome = run_concrete(contract.bytecode, env,
                           pre_storage=contract.pre_storage, record=True)
    missing = []
    for snap in outcome.visited:
        fact = alpha_running(snap, contract.cid)
        if not covered(fact, model):
            missing.append(fact)
    final = (alpha_halt(outcome, contract.cid) if outcome.halted
             else alpha_exception(contract.cid))
    if not covered(final, model):
        missing.append(final)
    return missing, outcome
