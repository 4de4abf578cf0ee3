"""Per-contract selector implementations derived from decoded bytecode and
the constant/jump-target pre-analysis.

The abstract semantics is written against a fixed selector inventory; this
module supplies those selectors for a list of contracts.  Contracts whose
control flow cannot be resolved statically (or that use instructions the
analysis does not model) are rejected up front.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..bytecode import Bytecode, decode
from ..clauses.selectors import UNIT, SelectorTable
from ..opcodes import BY_NAME, PRECISE_BINOPS, PRECISE_UNOPS
from ..preanalysis import PreAnalysis, run_preanalysis


class OutOfScope(ValueError):
    """The contract cannot be analyzed soundly."""

    def __init__(self, reasons: list[str]):
        self.reasons = reasons
        super().__init__("; ".join(reasons))


# Opcode groups with dedicated rules in the abstract semantics; everything
# else flows through the generic effect-summary rule.
_DEDICATED = set(PRECISE_BINOPS) | set(PRECISE_UNOPS) | {
    "MLOAD", "MSTORE", "SLOAD", "SSTORE", "JUMP", "JUMPI",
    "STOP", "RETURN", "REVERT", "SELFDESTRUCT", "INVALID", "CALL",
}
_UNSUPPORTED = {"CREATE", "CREATE2", "CALLCODE", "DELEGATECALL", "STATICCALL"}
_MEM_HAVOC = {"MSTORE8", "CALLDATACOPY", "CODECOPY", "EXTCODECOPY", "RETURNDATACOPY"}
_MAY_RAISE = {"RETURNDATACOPY"}


@dataclass
class Contract:
    """One analysis subject: decoded code plus its pre-analysis."""

    cid: int
    bytecode: Bytecode
    pre: PreAnalysis
    pre_storage: dict[int, int] = field(default_factory=dict)
    known_storage: bool = False  # start from pre_storage instead of unknown

    @classmethod
    def from_bytecode(cls, cid: int, bytecode: Bytecode | bytes | str, *,
                      pre_storage: dict[int, int] | None = None,
                      known_storage: bool = False) -> "Contract":
        if not isinstance(bytecode, Bytecode):
            bytecode = decode(bytecode)
        return cls(cid, bytecode, run_preanalysis(bytecode),
                   dict(pre_storage or {}), known_storage)

    def scope_problems(self) -> list[str]:
        problems = []
        for pc in self.pre.cfg.offending_pcs:
            problems.append(f"jump target at pc {pc} cannot be resolved statically")
        for ins in self.bytecode.instructions:
            if ins.info.name in _UNSUPPORTED:
                problems.append(f"unsupported instruction {ins.info.name} at pc {ins.pc}")
        return problems

    def storage_keys(self) -> set[int]:
        """Storage keys the contract is statically known to touch."""
        keys = set(self.pre_storage)
        for ins in self.bytecode.instructions:
            if ins.info.name in ("SSTORE", "SLOAD"):
                if ins.info.name == "SSTORE":
                    key = self.pre.facts.args2.get(ins.pc, (None, None))[0]
                else:
                    key = self.pre.facts.args1.get(ins.pc)
                if key is not None:
                    keys.add(key)
        return keys


def _havoc_rows(contract: Contract) -> list[tuple]:
    rows = []
    for ins in contract.bytecode.instructions:
        info = ins.info
        if info.name in _DEDICATED or info.kind in ("push", "invalid"):
            continue
        if info.is_dup or info.is_swap:
            continue
        if info.pushes > 1:
            raise OutOfScope([f"instruction {info.name} pushes {info.pushes} values"])
        res = contract.pre.facts.results.get(ins.pc)
        rows.append((
            ins.pc, ins.next_pc, info.pops, info.pushes,
            res if res is not None else -1,
            info.name in _MEM_HAVOC,
            info.name in _MAY_RAISE,
        ))
    return rows


def build_selectors(contracts: list[Contract], *, reject: bool = True) -> SelectorTable:
    """Selector implementations covering the base abstract semantics."""
    if reject:
        problems = [p for c in contracts for p in c.scope_problems()]
        if problems:
            raise OutOfScope(problems)
    by_id = {c.cid: c for c in contracts}
    table = SelectorTable()
    table.register("ids", lambda: [(c.cid,) for c in contracts])
    table.register("interval", lambda n: [(i,) for i in range(n)])
    table.register("binOps", lambda: [(BY_NAME[n].value,) for n in PRECISE_BINOPS])
    table.register("unaryOps", lambda: [(BY_NAME[n].value,) for n in PRECISE_UNOPS])

    def pcs_for(cid: int, op: int) -> list[tuple]:
        c = by_id[cid]
        out = []
        for ins in c.bytecode.instructions:
            if ins.info.value == op or (op == 0xFE and ins.info.kind == "invalid"):
                out.append((ins.pc,))
        if op == 0x00:  # running off the end of the code halts like STOP
            out.append((len(c.bytecode.code),))
        return out

    def args_one(cid: int, pc: int) -> list[tuple]:
        value = by_id[cid].pre.facts.args1.get(pc)
        return [(value if value is not None else -1,)]

    def args_two(cid: int, pc: int) -> list[tuple]:
        a, b = by_id[cid].pre.facts.args2.get(pc, (None, None))
        return [(a if a is not None else -1, b if b is not None else -1)]

    def jump_targets(cid: int, pc: int) -> list[tuple]:
        return [(t,) for t in by_id[cid].pre.cfg.jump_targets.get(pc, ())]

    def pushes(cid: int) -> list[tuple]:
        c = by_id[cid]
        return [(i.pc, i.next_pc, i.immediate) for i in c.bytecode.instructions
                if i.info.is_push]

    def dups(cid: int) -> list[tuple]:
        return [(i.pc, i.info.dup_index) for i in by_id[cid].bytecode.instructions
                if i.info.is_dup]

    def swaps(cid: int) -> list[tuple]:
        return [(i.pc, i.info.swap_index) for i in by_id[cid].bytecode.instructions
                if i.info.is_swap]

    table.register("pcsForIdAndOpcode", pcs_for)
    table.register("argumentsOneForIdAndPc", args_one)
    table.register("argumentsTwoForIdAndPc", args_two)
    table.register("jumpTargetsForPc", jump_targets)
    table.register("pushesForId", pushes)
    table.register("dupsForId", dups)
    table.register("swapsForId", swaps)
    table.register("havocsForId", lambda cid: _havoc_rows(by_id[cid]))
    table.register("preStorageForId",
                   lambda cid: sorted(by_id[cid].pre_storage.items()))
    table.register("knownStorageStartForId",
                   lambda cid: [(UNIT,)] if by_id[cid].known_storage else [])
    table.register("unknownStorageStartForId",
                   lambda cid: [] if by_id[cid].known_storage else [(UNIT,)])
    return table
