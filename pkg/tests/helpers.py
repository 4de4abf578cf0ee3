"""Shared test utilities: byte-level memory oracle and program builders."""
from __future__ import annotations

from evmhorn.bytecode import assemble
from evmhorn.semantics.values import TOP, AbsMap, Top


class ByteMemoryOracle:
    """Reference memory: a flat byte array with 32-byte big-endian words."""

    def __init__(self) -> None:
        self.data = bytearray()

    def _grow(self, end: int) -> None:
        if end > len(self.data):
            self.data.extend(b"\x00" * (end - len(self.data)))

    def store_word(self, offset: int, value: int) -> None:
        self._grow(offset + 32)
        self.data[offset : offset + 32] = value.to_bytes(32, "big")

    def load_word(self, offset: int) -> int:
        self._grow(offset + 32)
        return int.from_bytes(self.data[offset : offset + 32], "big")


def word_maps_agree(word_mem: AbsMap, oracle: ByteMemoryOracle, offsets: list[int]) -> bool:
    """Every concrete word-model read matches the byte oracle."""
    from evmhorn.semantics.values import access_word

    for off in offsets:
        got = access_word(word_mem, off)
        if not isinstance(got, Top) and got != oracle.load_word(off):
            return False
    return True


def asm(*items) -> bytes:
    return assemble(list(items))


# ---------------------------------------------------------------------------
# Random call-free programs with statically resolvable control flow.

_BINARY = ["ADD", "MUL", "SUB", "DIV", "MOD", "LT", "GT", "EQ",
           "AND", "OR", "XOR", "EXP", "SIGNEXTEND", "BYTE"]
_UNARY = ["ISZERO", "NOT"]
_NULLARY = ["CALLVALUE", "CALLER", "ORIGIN", "ADDRESS", "TIMESTAMP", "NUMBER",
            "COINBASE", "GASLIMIT", "GASPRICE", "CHAINID", "CALLDATASIZE",
            "PC", "MSIZE", "GAS"]


def random_program(rng, max_ops: int = 25) -> bytes:
    """A random call-free program whose jumps all target literal JUMPDESTs."""
    prog: list = []
    size = 0  # bytes emitted so far
    depth = 0

    def emit(entry, pops, pushes, width):
        nonlocal size, depth
        prog.append(entry)
        size += width
        depth += pushes - pops

    for _ in range(rng.randrange(3, max_ops)):
        choice = rng.random()
        if depth == 0 or choice < 0.30:
            emit(("PUSH1", rng.randrange(256)), 0, 1, 2)
        elif choice < 0.45 and depth >= 2:
            emit(rng.choice(_BINARY), 2, 1, 1)
        elif choice < 0.52:
            emit(rng.choice(_UNARY), 1, 1, 1)
        elif choice < 0.60:
            emit(rng.choice(_NULLARY), 0, 1, 1)
        elif choice < 0.66:
            emit("POP", 1, 0, 1)
        elif choice < 0.72 and depth >= 1:
            n = rng.randrange(1, min(depth, 4) + 1)
            emit(f"DUP{n}", n, n + 1, 1)
        elif choice < 0.76 and depth >= 2:
            n = rng.randrange(1, min(depth - 1, 4) + 1)
            emit(f"SWAP{n}", n + 1, n + 1, 1)
        elif choice < 0.84:
            emit(("PUSH1", rng.choice([0, 1, 2, 32, 33])), 0, 1, 2)
            if rng.random() < 0.5 and depth >= 1:
                emit("MSTORE", 2, 0, 1)
            else:
                emit("MLOAD", 1, 1, 1)
        elif choice < 0.92:
            emit(("PUSH1", rng.randrange(4)), 0, 1, 2)
            if rng.random() < 0.5 and depth >= 1:
                emit("SSTORE", 2, 0, 1)
            else:
                emit("SLOAD", 1, 1, 1)
        elif size < 180:
            # Conditional forward skip over a depth-neutral filler.
            filler = [("PUSH1", rng.randrange(256)), "POP"]
            emit(("PUSH1", 0), 0, 1, 2)  # placeholder target, patched below
            target_slot = len(prog) - 1
            cond = rng.choice(["JUMP", "JUMPI"])
            if cond == "JUMPI":
                emit(("PUSH1", rng.randrange(2)), 0, 1, 2)
                # stack layout for JUMPI is (target, cond): reorder
                prog[target_slot], prog[-1] = prog[-1], prog[target_slot]
                target_slot = len(prog) - 1
                emit("JUMPI", 2, 0, 1)
            else:
                emit("JUMP", 1, 0, 1)
            emit(("PUSH1", rng.randrange(256)), 0, 1, 2)
            emit("POP", 1, 0, 1)
            prog[target_slot] = ("PUSH1", size)
            emit("JUMPDEST", 0, 0, 1)
        else:
            emit(("PUSH1", rng.randrange(256)), 0, 1, 2)
    ending = rng.random()
    if ending < 0.5:
        prog.append("STOP")
    elif ending < 0.7 and depth >= 2:
        prog.append("RETURN")
    # otherwise run off the end of the code
    return assemble(prog)
