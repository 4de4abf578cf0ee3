"""Pre-analysis: CFG reconstruction and sound constant propagation.

A fixpoint over abstract stacks whose cells are small *sets of possible
words* (or Unknown) simultaneously discovers jump edges and constant
operand/result facts.  A singleton cell means the operand has that value on
every concrete execution reaching the instruction, so exporting it as a
constant fact is sound.

Set cardinality is widened to Unknown above ``CARD_LIMIT`` and stack depth
is capped at ``DEPTH_LIMIT``, guaranteeing termination on cyclic control
flow.  Jumps whose target cell is Unknown (or names a non-JUMPDEST
position) make the contract *unresolvable*; analysis still continues so the
partial CFG can be reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bytecode import AtomicBlock, Bytecode, Instruction, decode, split_atomic_blocks
from .concrete import step_binary, step_unary, word_hash
from .opcodes import OPAQUE_BINOPS, PRECISE_BINOPS, PRECISE_UNOPS

CARD_LIMIT = 64
DEPTH_LIMIT = 1024


class Unknown:
    """Absence of constant information (singleton)."""

    _instance: "Unknown | None" = None

    def __new__(cls) -> "Unknown":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unknown"


UNKNOWN = Unknown()
Cell = "frozenset[int] | Unknown"


class CyclicCfg(Exception):
    """Topological refinement was requested on a cyclic CFG."""


def _join_cell(a, b):
    if isinstance(a, Unknown) or isinstance(b, Unknown):
        return UNKNOWN
    union = a | b
    return UNKNOWN if len(union) > CARD_LIMIT else union


def _apply2(name: str, a, b):
    if isinstance(a, Unknown) or isinstance(b, Unknown) or len(a) * len(b) > CARD_LIMIT:
        return UNKNOWN
    out = frozenset(step_binary(name, x, y) for x in a for y in b)
    return UNKNOWN if len(out) > CARD_LIMIT else out


@dataclass
class AbsStack:
    """Abstract operand stack; ``cells[-1]`` is the top.

    ``deep_unknown`` marks that positions below the tracked cells exist but
    carry no information (set at joins of mismatched heights and at block
    entries reached from unanalyzed context).
    """

    cells: list
    deep_unknown: bool = False

    def copy(self) -> "AbsStack":
        return AbsStack(list(self.cells), self.deep_unknown)

    def peek(self, i: int = 0):
        return self.cells[-1 - i] if i < len(self.cells) else UNKNOWN

    def pop(self):
        if self.cells:
            return self.cells.pop()
        return UNKNOWN

    def push(self, cell) -> None:
        if len(self.cells) >= DEPTH_LIMIT:
            self.cells.pop(0)
            self.deep_unknown = True
        self.cells.append(cell)

    def join(self, other: "AbsStack") -> "AbsStack":
        k = min(len(self.cells), len(other.cells))
        deep = self.deep_unknown or other.deep_unknown or len(self.cells) != len(other.cells)
        cells = [
            _join_cell(a, b)
            for a, b in zip(self.cells[len(self.cells) - k :], other.cells[len(other.cells) - k :])
        ]
        return AbsStack(cells, deep)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, AbsStack)
            and self.cells == other.cells
            and self.deep_unknown == other.deep_unknown
        )


@dataclass
class ConstFacts:
    """Per-pc constant operands and precomputed results (None = unknown)."""

    args1: dict[int, int | None] = field(default_factory=dict)
    args2: dict[int, tuple[int | None, int | None]] = field(default_factory=dict)
    results: dict[int, int | None] = field(default_factory=dict)


@dataclass
class Cfg:
    blocks: tuple[AtomicBlock, ...]
    edges: frozenset[tuple[int, int]]  # (source block start, target block start)
    jump_targets: dict[int, tuple[int, ...]]  # pc of JUMP/JUMPI -> valid targets
    resolved: bool
    offending_pcs: tuple[int, ...]
    reachable: frozenset[int]  # block starts reachable from pc 0

    @property
    def is_acyclic(self) -> bool:
        try:
            _topological_order(self.blocks, self.edges, self.reachable)
        except CyclicCfg:
            return False
        return True


@dataclass
class PreAnalysis:
    bytecode: Bytecode
    blocks: tuple[AtomicBlock, ...]
    cfg: Cfg
    facts: ConstFacts

    @property
    def resolved(self) -> bool:
        return self.cfg.resolved


def _single(cell) -> int | None:
    if isinstance(cell, Unknown) or len(cell) != 1:
        return None
    return next(iter(cell))


# Instructions outside these groups are handled by the generic havoc rule in
# the abstract semantics; when they push a value the pre-analysis tries to
# precompute it.
_RESULT_OPS = set(OPAQUE_BINOPS) | {"SHA3", "ADDMOD", "MULMOD", "PC", "CODESIZE"}
_ARG_OPS_1 = {"MLOAD", "SLOAD", "JUMP"}
_ARG_OPS_2 = set(PRECISE_BINOPS) | {"MSTORE", "SSTORE", "JUMPI"}


@dataclass
class _BlockResult:
    exit_stack: AbsStack
    jump_cell: object | None  # target cell for JUMP/JUMPI terminators
    falls_through: bool


def _walk_block(
    block: AtomicBlock,
    entry: AbsStack,
    bc: Bytecode,
    facts: ConstFacts | None,
    memory_known: bool,
) -> _BlockResult:
    stack = entry.copy()
    # Block-local concrete byte memory (None once contents become unknown).
    memory: dict[int, int] | None = {} if memory_known else None
    jump_cell = None
    falls = True

    def record1(pc: int) -> None:
        if facts is not None:
            facts.args1[pc] = _single(stack.peek(0))

    def record2(pc: int) -> None:
        if facts is not None:
            facts.args2[pc] = (_single(stack.peek(0)), _single(stack.peek(1)))

    def record_result(pc: int, cell) -> None:
        if facts is not None:
            facts.results[pc] = _single(cell)

    for ins in block.instructions:
        info, name, pc = ins.info, ins.name, ins.pc
        if name in _ARG_OPS_1:
            record1(pc)
        elif name in _ARG_OPS_2 or name in OPAQUE_BINOPS:
            record2(pc)

        if info.is_push:
            stack.push(frozenset([ins.immediate or 0]))
        elif info.is_dup:
            stack.push(stack.peek(info.dup_index - 1))
        elif info.is_swap:
            n = info.swap_index
            top, deep = stack.peek(0), stack.peek(n)
            while len(stack.cells) < n + 1:
                stack.cells.insert(0, UNKNOWN)
            stack.cells[-1], stack.cells[-1 - n] = deep, top
        elif name == "POP":
            stack.pop()
        elif name in PRECISE_BINOPS or name in OPAQUE_BINOPS:
            a, b = stack.pop(), stack.pop()
            out = _apply2(name, a, b)
            stack.push(out)
            if name in _RESULT_OPS:
                record_result(pc, out)
        elif name in PRECISE_UNOPS:
            a = stack.pop()
            out = (
                UNKNOWN
                if isinstance(a, Unknown)
                else frozenset(step_unary(name, x) for x in a)
            )
            stack.push(out)
        elif name in ("ADDMOD", "MULMOD"):
            a, b, n = stack.pop(), stack.pop(), stack.pop()
            ca, cb, cn = _single(a), _single(b), _single(n)
            if None in (ca, cb, cn):
                out = UNKNOWN
            elif cn == 0:
                out = frozenset([0])
            else:
                out = frozenset([(ca + cb) % cn if name == "ADDMOD" else (ca * cb) % cn])
            stack.push(out)
            record_result(pc, out)
        elif name == "SHA3":
            off, length = stack.pop(), stack.pop()
            coff, clen = _single(off), _single(length)
            if memory is not None and coff is not None and clen is not None:
                data = bytes(memory.get(coff + i, 0) for i in range(clen))
                out = frozenset([word_hash(data)])
            else:
                out = UNKNOWN
            stack.push(out)
            record_result(pc, out)
        elif name == "PC":
            stack.push(frozenset([pc]))
            record_result(pc, frozenset([pc]))
        elif name == "CODESIZE":
            stack.push(frozenset([len(bc.code)]))
            record_result(pc, frozenset([len(bc.code)]))
        elif name == "MLOAD":
            off = stack.pop()
            coff = _single(off)
            if memory is not None and coff is not None:
                stack.push(frozenset([int.from_bytes(
                    bytes(memory.get(coff + i, 0) for i in range(32)), "big")]))
            else:
                stack.push(UNKNOWN)
        elif name == "MSTORE":
            off, val = stack.pop(), stack.pop()
            coff, cval = _single(off), _single(val)
            if memory is not None and coff is not None and cval is not None:
                for i, byte in enumerate(cval.to_bytes(32, "big")):
                    memory[coff + i] = byte
            else:
                memory = None
        elif name == "MSTORE8":
            off, val = stack.pop(), stack.pop()
            coff, cval = _single(off), _single(val)
            if memory is not None and coff is not None and cval is not None:
                memory[coff] = cval & 0xFF
            else:
                memory = None
        elif name == "SSTORE":
            stack.pop(), stack.pop()
        elif name == "JUMP":
            jump_cell = stack.pop()
            falls = False
        elif name == "JUMPI":
            jump_cell = stack.pop()
            stack.pop()
            falls = True
        elif info.kind in ("halt", "invalid"):
            falls = False
        elif info.kind == "call":
            for _ in range(info.pops):
                stack.pop()
            if info.pushes:
                stack.push(UNKNOWN)
            memory = None
        else:
            # Environment reads, copies, logs, JUMPDEST, ...: generic effect.
            for _ in range(info.pops):
                stack.pop()
            for _ in range(info.pushes):
                stack.push(UNKNOWN)
            if name in ("CALLDATACOPY", "CODECOPY", "RETURNDATACOPY", "EXTCODECOPY"):
                memory = None
    return _BlockResult(stack, jump_cell, falls)


def _topological_order(blocks, edges, reachable) -> list[int]:
    succs: dict[int, list[int]] = {b.start: [] for b in blocks}
    indeg: dict[int, int] = {b.start: 0 for b in blocks}
    for src, dst in sorted(edges):
        succs[src].append(dst)
        indeg[dst] += 1
    order = [s for s in sorted(indeg) if indeg[s] == 0 and s in reachable]
    out: list[int] = []
    while order:
        node = order.pop(0)
        out.append(node)
        for nxt in succs[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                order.append(nxt)
    if any(indeg[s] > 0 and s in reachable for s in indeg):
        raise CyclicCfg("control-flow graph contains a cycle")
    return out


def run_preanalysis(code: Bytecode | bytes | str) -> PreAnalysis:
    """Reconstruct the CFG and collect constant facts for ``code``."""
    bc = code if isinstance(code, Bytecode) else decode(code)
    blocks = split_atomic_blocks(bc)
    by_start = {b.start: b for b in blocks}
    block_order = [b.start for b in blocks]
    jumpdests = {ins.pc for ins in bc.instructions if ins.name == "JUMPDEST"}

    entry: dict[int, AbsStack] = {}
    edges: set[tuple[int, int]] = set()
    jump_targets: dict[int, set[int]] = {}
    offending: set[int] = set()

    if not blocks:
        cfg = Cfg(blocks, frozenset(), {}, True, (), frozenset())
        return PreAnalysis(bc, blocks, cfg, ConstFacts())

    entry[blocks[0].start] = AbsStack([])
    worklist = [blocks[0].start]
    while worklist:
        start = worklist.pop(0)
        block = by_start[start]
        result = _walk_block(block, entry[start], bc, None, memory_known=(start == 0))
        succs: list[int] = []
        term = block.terminator
        if result.jump_cell is not None:
            if isinstance(result.jump_cell, Unknown):
                offending.add(term.pc)
            else:
                targets = set()
                for t in result.jump_cell:
                    if t in jumpdests:
                        targets.add(t)
                    else:
                        offending.add(term.pc)
                jump_targets.setdefault(term.pc, set()).update(targets)
                succs.extend(sorted(targets))
        if result.falls_through:
            nxt = term.next_pc
            if nxt in by_start:
                succs.append(nxt)
        for succ in succs:
            edges.add((start, succ))
            # The successor sees the exit stack (JUMPI's fall-through and
            # jump edge get the same stack: target and condition are popped).
            incoming = result.exit_stack
            if succ not in entry:
                entry[succ] = incoming.copy()
                worklist.append(succ)
            else:
                joined = entry[succ].join(incoming)
                if joined != entry[succ]:
                    entry[succ] = joined
                    if succ not in worklist:
                        worklist.append(succ)

    reachable = frozenset(entry)
    cfg = Cfg(
        blocks,
        frozenset(edges),
        {pc: tuple(sorted(ts)) for pc, ts in jump_targets.items()},
        resolved=not offending,
        offending_pcs=tuple(sorted(offending)),
        reachable=reachable,
    )
    facts = ConstFacts()
    for start in block_order:
        if start in entry:
            _walk_block(by_start[start], entry[start], bc, facts, memory_known=(start == 0))
    return PreAnalysis(bc, blocks, cfg, facts)


def refine_topological(analysis: PreAnalysis) -> ConstFacts:
    """Re-run constant collection in topological block order.

    Raises :class:`CyclicCfg` when the (reachable part of the) CFG has a
    cycle and requires a resolved CFG.
    """
    cfg = analysis.cfg
    if not cfg.resolved:
        raise ValueError("topological refinement requires a resolved CFG")
    order = _topological_order(cfg.blocks, cfg.edges, cfg.reachable)
    by_start = {b.start: b for b in cfg.blocks}
    entry: dict[int, AbsStack] = {order[0]: AbsStack([])} if order else {}
    facts = ConstFacts()
    exits: dict[int, AbsStack] = {}
    preds: dict[int, list[int]] = {}
    for src, dst in sorted(cfg.edges):
        preds.setdefault(dst, []).append(src)
    for start in order:
        stacks = [exits[p] for p in preds.get(start, []) if p in exits]
        if start == order[0]:
            entry_stack = AbsStack([])
        elif stacks:
            entry_stack = stacks[0]
            for s in stacks[1:]:
                entry_stack = entry_stack.join(s)
        else:
            entry_stack = AbsStack([], deep_unknown=True)
        result = _walk_block(by_start[start], entry_stack, analysis.bytecode, facts,
                             memory_known=(start == 0))
        exits[start] = result.exit_stack
    return facts
