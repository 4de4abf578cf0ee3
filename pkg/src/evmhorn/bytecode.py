"""Bytecode decoding, assembling and atomic-block splitting."""
from __future__ import annotations

from dataclasses import dataclass, field

from .opcodes import BY_NAME, OpcodeInfo, info_for


class BytecodeError(ValueError):
    """Raised for malformed bytecode input (e.g. odd-length hex strings)."""


@dataclass(frozen=True)
class Instruction:
    pc: int
    info: OpcodeInfo
    # Immediate value for PUSH instructions (zero-padded if truncated).
    immediate: int | None = None

    @property
    def name(self) -> str:
        return self.info.name

    @property
    def size(self) -> int:
        return 1 + self.info.push_width

    @property
    def next_pc(self) -> int:
        return self.pc + self.size

    def __str__(self) -> str:
        if self.immediate is not None:
            return f"{self.pc:#06x}: {self.name} {self.immediate:#x}"
        return f"{self.pc:#06x}: {self.name}"


@dataclass(frozen=True)
class AtomicBlock:
    """A maximal straight-line instruction sequence.

    Control enters only at the first instruction and leaves only after the
    last one (a jump, a halting instruction, an invalid instruction, or a
    fall-through into the next block's JUMPDEST).
    """

    start: int
    instructions: tuple[Instruction, ...]

    @property
    def end(self) -> int:
        return self.instructions[-1].pc

    @property
    def terminator(self) -> Instruction:
        return self.instructions[-1]


@dataclass(frozen=True)
class Bytecode:
    code: bytes
    instructions: tuple[Instruction, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.code)

    @property
    def by_pc(self) -> dict[int, Instruction]:
        return {ins.pc: ins for ins in self.instructions}


def parse_hex(text: str) -> bytes:
    text = text.strip()
    if text.startswith(("0x", "0X")):
        text = text[2:]
    if len(text) % 2 != 0:
        raise BytecodeError(f"odd-length hex string ({len(text)} digits)")
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise BytecodeError(f"invalid hex string: {exc}") from exc


def decode(code: bytes | str) -> Bytecode:
    """Linear-sweep decode.

    PUSH immediates are skipped over, a PUSH truncated by the end of the
    code is zero-padded on the right (matching execution semantics), and
    every non-immediate byte yields exactly one instruction.
    """
    if isinstance(code, str):
        code = parse_hex(code)
    out: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        info = info_for(code[pc])
        if info.is_push:
            width = info.push_width
            raw = code[pc + 1 : pc + 1 + width]
            value = int.from_bytes(raw.ljust(width, b"\x00"), "big")
            out.append(Instruction(pc, info, value))
            pc += 1 + width
        else:
            out.append(Instruction(pc, info))
            pc += 1
    return Bytecode(bytes(code), tuple(out))


def assemble(program: list[str | int | tuple[str, int]]) -> bytes:
    """Assemble a list of mnemonics into bytecode.

    Entries are mnemonic strings ("ADD"), ("PUSH2", value) tuples, or bare
    integers shorthand for the narrowest PUSH holding the value.
    """
    out = bytearray()
    for item in program:
        if isinstance(item, int):
            width = max(1, (item.bit_length() + 7) // 8)
            item = (f"PUSH{width}", item)
        if isinstance(item, tuple) and len(item) == 1:
            item = item[0]
        if isinstance(item, tuple):
            name, value = item
            info = BY_NAME[name]
            if not info.is_push:
                raise BytecodeError(f"{name} takes no immediate")
            out.append(info.value)
            out.extend(value.to_bytes(info.push_width, "big"))
        else:
            info = BY_NAME[item]
            if info.is_push:
                raise BytecodeError(f"{item} requires an immediate value")
            out.append(info.value)
    return bytes(out)


_TERMINATOR_KINDS = {"halt", "invalid"}


def split_atomic_blocks(bc: Bytecode) -> tuple[AtomicBlock, ...]:
    """Split decoded code into atomic blocks.

    Block terminators are JUMP, JUMPI, halting instructions (STOP, RETURN,
    REVERT, SELFDESTRUCT) and invalid instructions; every JUMPDEST starts a
    new block.
    """
    blocks: list[AtomicBlock] = []
    current: list[Instruction] = []
    for ins in bc.instructions:
        if ins.name == "JUMPDEST" and current:
            blocks.append(AtomicBlock(current[0].pc, tuple(current)))
            current = []
        current.append(ins)
        if ins.name in ("JUMP", "JUMPI") or ins.info.kind in _TERMINATOR_KINDS:
            blocks.append(AtomicBlock(current[0].pc, tuple(current)))
            current = []
    if current:
        blocks.append(AtomicBlock(current[0].pc, tuple(current)))
    return tuple(blocks)
