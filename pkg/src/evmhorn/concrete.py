"""Restricted concrete EVM interpreter used as a differential-testing oracle.

The interpreter covers the call-free instruction set: call-like opcodes
raise :class:`UnsupportedInstruction` and abort the run.  Gas accounting is
replaced by a plain step limit, and the account balance / call value are
fixed to zero.  Everything else follows word-level EVM semantics.

The hash used for SHA3 is an internal stand-in (see :func:`word_hash`); the
only requirement here is that the oracle and the pre-analysis agree on it.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .bytecode import Bytecode, decode
from .opcodes import WORD_MOD

STACK_LIMIT = 1024
SIGN_BIT = 1 << 255


class UnsupportedInstruction(Exception):
    """The restricted interpreter hit a call-like instruction."""


class StepLimitExceeded(Exception):
    """The run did not terminate within the step budget."""


def word_hash(data: bytes) -> int:
    return int.from_bytes(hashlib.sha3_256(data).digest(), "big")


def to_signed(x: int) -> int:
    return x - WORD_MOD if x >= SIGN_BIT else x


def to_unsigned(x: int) -> int:
    return x % WORD_MOD


@dataclass(frozen=True)
class Environment:
    """Per-run execution environment (fixed for the duration of a run)."""

    calldata: bytes = b""
    callvalue: int = 0
    caller: int = 0
    origin: int = 0
    address: int = 0
    number: int = 0
    timestamp: int = 0
    coinbase: int = 0
    difficulty: int = 0
    gaslimit: int = 0
    gasprice: int = 0
    chainid: int = 1
    gas: int = 0

    def blockhash(self, number: int) -> int:
        return word_hash(b"blockhash:" + number.to_bytes(32, "big"))


@dataclass(frozen=True)
class Snapshot:
    """A visited machine state (stack index 0 is the bottom)."""

    pc: int
    stack: tuple[int, ...]
    memory: dict[int, int]
    storage: dict[int, int]


@dataclass
class Outcome:
    status: str  # "halted" | "exception"
    storage: dict[int, int]
    return_data: bytes = b""
    steps: int = 0
    visited: list[Snapshot] = field(default_factory=list)

    @property
    def halted(self) -> bool:
        return self.status == "halted"


def _signextend(k: int, x: int) -> int:
    if k >= 31:
        return x
    bit = 8 * (k + 1) - 1
    mask = (1 << (bit + 1)) - 1
    if x & (1 << bit):
        return to_unsigned(x | ~mask)
    return x & mask


def step_binary(name: str, a: int, b: int) -> int:
    """Concrete result of a two-argument word operation (top of stack first)."""
    if name == "ADD":
        return (a + b) % WORD_MOD
    if name == "MUL":
        return (a * b) % WORD_MOD
    if name == "SUB":
        return (a - b) % WORD_MOD
    if name == "DIV":
        return a // b if b else 0
    if name == "SDIV":
        if b == 0:
            return 0
        sa, sb = to_signed(a), to_signed(b)
        return to_unsigned(abs(sa) // abs(sb) * (1 if (sa < 0) == (sb < 0) else -1))
    if name == "MOD":
        return a % b if b else 0
    if name == "SMOD":
        if b == 0:
            return 0
        sa, sb = to_signed(a), to_signed(b)
        return to_unsigned(abs(sa) % abs(sb) * (1 if sa >= 0 else -1))
    if name == "EXP":
        return pow(a, b, WORD_MOD)
    if name == "SIGNEXTEND":
        return _signextend(a, b) if a < 32 else b
    if name == "LT":
        return int(a < b)
    if name == "GT":
        return int(a > b)
    if name == "SLT":
        return int(to_signed(a) < to_signed(b))
    if name == "SGT":
        return int(to_signed(a) > to_signed(b))
    if name == "EQ":
        return int(a == b)
    if name == "AND":
        return a & b
    if name == "OR":
        return a | b
    if name == "XOR":
        return a ^ b
    if name == "BYTE":
        return (b >> (8 * (31 - a))) & 0xFF if a < 32 else 0
    if name == "SHL":
        return (b << a) % WORD_MOD if a < 256 else 0
    if name == "SHR":
        return b >> a if a < 256 else 0
    if name == "SAR":
        sb = to_signed(b)
        return to_unsigned(sb >> a) if a < 256 else (WORD_MOD - 1 if sb < 0 else 0)
    raise KeyError(name)


def step_unary(name: str, a: int) -> int:
    if name == "ISZERO":
        return int(a == 0)
    if name == "NOT":
        return WORD_MOD - 1 - a
    raise KeyError(name)


MEMORY_LIMIT = 1 << 24  # touching memory beyond this halts exceptionally


class MemoryLimitExceeded(Exception):
    """A bulk memory access too large to materialize (out-of-gas stand-in)."""


class _Memory:
    """Byte-addressed memory with zero default."""

    def __init__(self) -> None:
        self.bytes: dict[int, int] = {}
        self.size = 0

    def _touch(self, offset: int, length: int) -> None:
        if length:
            end = offset + length
            if end > MEMORY_LIMIT:
                raise MemoryLimitExceeded
            self.size = max(self.size, (end + 31) // 32 * 32)

    def read(self, offset: int, length: int) -> bytes:
        self._touch(offset, length)
        return bytes(self.bytes.get(offset + i, 0) for i in range(length))

    def write(self, offset: int, data: bytes) -> None:
        self._touch(offset, len(data))
        for i, byte in enumerate(data):
            self.bytes[offset + i] = byte

    def load_word(self, offset: int) -> int:
        return int.from_bytes(self.read(offset, 32), "big")

    def store_word(self, offset: int, value: int) -> None:
        self.write(offset, value.to_bytes(32, "big"))


def run_concrete(
    code: Bytecode | bytes | str,
    env: Environment | None = None,
    pre_storage: dict[int, int] | None = None,
    step_limit: int = 10_000,
    record: bool = False,
) -> Outcome:
    """Execute bytecode from an empty stack and return the final outcome.

    Raises :class:`UnsupportedInstruction` on call-like instructions,
    :class:`StepLimitExceeded` when the step budget runs out, and
    :class:`MemoryLimitExceeded` on bulk memory accesses too large to
    materialize (the semantics is gas-free, so these runs are simply not
    simulatable rather than exceptional).  Exceptional
    halts (stack under/overflow, bad jumps, invalid opcodes, REVERT) are a
    regular ``Outcome`` with status ``"exception"``.
    """
    if not isinstance(code, Bytecode):
        code = decode(code)
    env = env or Environment()
    by_pc = code.by_pc
    jumpdests = {ins.pc for ins in code.instructions if ins.name == "JUMPDEST"}
    stack: list[int] = []
    memory = _Memory()
    storage = dict(pre_storage or {})
    visited: list[Snapshot] = []
    pc = 0
    steps = 0

    def snap() -> None:
        if record:
            visited.append(Snapshot(pc, tuple(stack), dict(memory.bytes), dict(storage)))

    def exception() -> Outcome:
        return Outcome("exception", dict(storage), steps=steps, visited=visited)

    while True:
        if steps >= step_limit:
            raise StepLimitExceeded(f"no termination within {step_limit} steps")
        steps += 1
        ins = by_pc.get(pc)
        if ins is None:
            if 0 <= pc < len(code.code):
                # Mid-immediate pc: the byte executes as data. Decoding is a
                # linear sweep, so treat it as an invalid instruction.
                snap()
                return exception()
            # Running off the end of the code halts normally.
            snap()
            return Outcome("halted", dict(storage), steps=steps, visited=visited)
        snap()
        info = ins.info
        name = ins.name
        if info.kind == "call":
            raise UnsupportedInstruction(name)
        if len(stack) < info.pops:
            return exception()
        if len(stack) - info.pops + info.pushes > STACK_LIMIT:
            return exception()

        if info.is_push:
            stack.append(ins.immediate or 0)
        elif info.is_dup:
            stack.append(stack[-info.dup_index])
        elif info.is_swap:
            n = info.swap_index
            stack[-1], stack[-1 - n] = stack[-1 - n], stack[-1]
        elif name == "POP":
            stack.pop()
        elif info.kind in ("arith", "compare", "bitwise") and info.pops == 2:
            a, b = stack.pop(), stack.pop()
            stack.append(step_binary(name, a, b))
        elif name in ("ISZERO", "NOT"):
            stack.append(step_unary(name, stack.pop()))
        elif name in ("ADDMOD", "MULMOD"):
            a, b, n = stack.pop(), stack.pop(), stack.pop()
            if n == 0:
                stack.append(0)
            elif name == "ADDMOD":
                stack.append((a + b) % n)
            else:
                stack.append((a * b) % n)
        elif name == "SHA3":
            off, length = stack.pop(), stack.pop()
            stack.append(word_hash(memory.read(off, length)))
        elif name == "ADDRESS":
            stack.append(env.address)
        elif name == "BALANCE":
            stack.pop()
            stack.append(0)
        elif name == "ORIGIN":
            stack.append(env.origin)
        elif name == "CALLER":
            stack.append(env.caller)
        elif name == "CALLVALUE":
            stack.append(env.callvalue)
        elif name == "CALLDATALOAD":
            off = stack.pop()
            data = env.calldata[off : off + 32] if off < len(env.calldata) else b""
            stack.append(int.from_bytes(data.ljust(32, b"\x00"), "big"))
        elif name == "CALLDATASIZE":
            stack.append(len(env.calldata))
        elif name == "CALLDATACOPY":
            dst, src, length = stack.pop(), stack.pop(), stack.pop()
            data = env.calldata[src : src + length]
            memory.write(dst, data.ljust(length, b"\x00"))
        elif name == "CODESIZE":
            stack.append(len(code.code))
        elif name == "CODECOPY":
            dst, src, length = stack.pop(), stack.pop(), stack.pop()
            data = code.code[src : src + length]
            memory.write(dst, data.ljust(length, b"\x00"))
        elif name == "GASPRICE":
            stack.append(env.gasprice)
        elif name in ("EXTCODESIZE", "EXTCODEHASH"):
            stack.pop()
            stack.append(0)
        elif name == "RETURNDATASIZE":
            stack.append(0)
        elif name == "RETURNDATACOPY":
            dst, src, length = stack.pop(), stack.pop(), stack.pop()
            if src + length > 0:
                return exception()
            memory.write(dst, b"")
        elif name == "BLOCKHASH":
            stack.append(env.blockhash(stack.pop()))
        elif name == "COINBASE":
            stack.append(env.coinbase)
        elif name == "TIMESTAMP":
            stack.append(env.timestamp)
        elif name == "NUMBER":
            stack.append(env.number)
        elif name == "DIFFICULTY":
            stack.append(env.difficulty)
        elif name == "GASLIMIT":
            stack.append(env.gaslimit)
        elif name == "CHAINID":
            stack.append(env.chainid)
        elif name == "SELFBALANCE":
            stack.append(0)
        elif name == "PC":
            stack.append(pc)
        elif name == "MSIZE":
            stack.append(memory.size)
        elif name == "GAS":
            stack.append(env.gas)
        elif name == "MLOAD":
            stack.append(memory.load_word(stack.pop()))
        elif name == "MSTORE":
            off, val = stack.pop(), stack.pop()
            memory.store_word(off, val)
        elif name == "MSTORE8":
            off, val = stack.pop(), stack.pop()
            memory.write(off, bytes([val & 0xFF]))
        elif name == "SLOAD":
            stack.append(storage.get(stack.pop(), 0))
        elif name == "SSTORE":
            key, val = stack.pop(), stack.pop()
            if val:
                storage[key] = val
            else:
                storage.pop(key, None)
        elif name == "JUMP":
            target = stack.pop()
            if target not in jumpdests:
                return exception()
            pc = target
            continue
        elif name == "JUMPI":
            target, cond = stack.pop(), stack.pop()
            if cond:
                if target not in jumpdests:
                    return exception()
                pc = target
                continue
        elif name == "JUMPDEST":
            pass
        elif name.startswith("LOG"):
            del stack[-info.pops :]
        elif name == "STOP":
            return Outcome("halted", dict(storage), steps=steps, visited=visited)
        elif name == "RETURN":
            off, length = stack.pop(), stack.pop()
            data = memory.read(off, length)
            return Outcome("halted", dict(storage), data, steps, visited)
        elif name == "SELFDESTRUCT":
            stack.pop()
            return Outcome("halted", dict(storage), steps=steps, visited=visited)
        elif name == "REVERT" or info.kind == "invalid":
            return exception()
        else:  # pragma: no cover - table and interpreter cover the same set
            raise UnsupportedInstruction(name)
        pc = ins.next_pc
