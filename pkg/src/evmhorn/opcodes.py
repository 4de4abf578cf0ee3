"""EVM opcode table.

Every opcode carries its stack arity and a coarse kind used by the decoder,
the pre-analysis transfer functions and the clause generator.  Bytes that do
not appear in the table decode as ``invalid`` instructions (they raise an
exceptional halt when executed, just like the designated INVALID opcode).
"""
from __future__ import annotations

from dataclasses import dataclass

WORD_BITS = 256
WORD_MOD = 1 << WORD_BITS
WORD_BYTES = 32


@dataclass(frozen=True)
class OpcodeInfo:
    value: int
    name: str
    pops: int
    pushes: int
    kind: str

    @property
    def is_push(self) -> bool:
        return 0x60 <= self.value <= 0x7F

    @property
    def push_width(self) -> int:
        return self.value - 0x5F if self.is_push else 0

    @property
    def is_dup(self) -> bool:
        return 0x80 <= self.value <= 0x8F

    @property
    def is_swap(self) -> bool:
        return 0x90 <= self.value <= 0x9F

    @property
    def dup_index(self) -> int:
        return self.value - 0x7F if self.is_dup else 0

    @property
    def swap_index(self) -> int:
        return self.value - 0x8F if self.is_swap else 0


def _entries() -> list[tuple[int, str, int, int, str]]:
    rows: list[tuple[int, str, int, int, str]] = [
        (0x00, "STOP", 0, 0, "halt"),
        (0x01, "ADD", 2, 1, "arith"),
        (0x02, "MUL", 2, 1, "arith"),
        (0x03, "SUB", 2, 1, "arith"),
        (0x04, "DIV", 2, 1, "arith"),
        (0x05, "SDIV", 2, 1, "arith"),
        (0x06, "MOD", 2, 1, "arith"),
        (0x07, "SMOD", 2, 1, "arith"),
        (0x08, "ADDMOD", 3, 1, "arith"),
        (0x09, "MULMOD", 3, 1, "arith"),
        (0x0A, "EXP", 2, 1, "arith"),
        (0x0B, "SIGNEXTEND", 2, 1, "arith"),
        (0x10, "LT", 2, 1, "compare"),
        (0x11, "GT", 2, 1, "compare"),
        (0x12, "SLT", 2, 1, "compare"),
        (0x13, "SGT", 2, 1, "compare"),
        (0x14, "EQ", 2, 1, "compare"),
        (0x15, "ISZERO", 1, 1, "compare"),
        (0x16, "AND", 2, 1, "bitwise"),
        (0x17, "OR", 2, 1, "bitwise"),
        (0x18, "XOR", 2, 1, "bitwise"),
        (0x19, "NOT", 1, 1, "bitwise"),
        (0x1A, "BYTE", 2, 1, "bitwise"),
        (0x1B, "SHL", 2, 1, "bitwise"),
        (0x1C, "SHR", 2, 1, "bitwise"),
        (0x1D, "SAR", 2, 1, "bitwise"),
        (0x20, "SHA3", 2, 1, "hash"),
        (0x30, "ADDRESS", 0, 1, "env"),
        (0x31, "BALANCE", 1, 1, "env"),
        (0x32, "ORIGIN", 0, 1, "env"),
        (0x33, "CALLER", 0, 1, "env"),
        (0x34, "CALLVALUE", 0, 1, "env"),
        (0x35, "CALLDATALOAD", 1, 1, "calldata"),
        (0x36, "CALLDATASIZE", 0, 1, "calldata"),
        (0x37, "CALLDATACOPY", 3, 0, "calldata"),
        (0x38, "CODESIZE", 0, 1, "env"),
        (0x39, "CODECOPY", 3, 0, "mem"),
        (0x3A, "GASPRICE", 0, 1, "env"),
        (0x3B, "EXTCODESIZE", 1, 1, "env"),
        (0x3C, "EXTCODECOPY", 4, 0, "mem"),
        (0x3D, "RETURNDATASIZE", 0, 1, "env"),
        (0x3E, "RETURNDATACOPY", 3, 0, "mem"),
        (0x3F, "EXTCODEHASH", 1, 1, "env"),
        (0x40, "BLOCKHASH", 1, 1, "env"),
        (0x41, "COINBASE", 0, 1, "env"),
        (0x42, "TIMESTAMP", 0, 1, "env"),
        (0x43, "NUMBER", 0, 1, "env"),
        (0x44, "DIFFICULTY", 0, 1, "env"),
        (0x45, "GASLIMIT", 0, 1, "env"),
        (0x46, "CHAINID", 0, 1, "env"),
        (0x47, "SELFBALANCE", 0, 1, "env"),
        (0x50, "POP", 1, 0, "stack"),
        (0x51, "MLOAD", 1, 1, "mem"),
        (0x52, "MSTORE", 2, 0, "mem"),
        (0x53, "MSTORE8", 2, 0, "mem"),
        (0x54, "SLOAD", 1, 1, "stor"),
        (0x55, "SSTORE", 2, 0, "stor"),
        (0x56, "JUMP", 1, 0, "flow"),
        (0x57, "JUMPI", 2, 0, "flow"),
        (0x58, "PC", 0, 1, "env"),
        (0x59, "MSIZE", 0, 1, "env"),
        (0x5A, "GAS", 0, 1, "env"),
        (0x5B, "JUMPDEST", 0, 0, "flow"),
        (0xF0, "CREATE", 3, 1, "call"),
        (0xF1, "CALL", 7, 1, "call"),
        (0xF2, "CALLCODE", 7, 1, "call"),
        (0xF3, "RETURN", 2, 0, "halt"),
        (0xF4, "DELEGATECALL", 6, 1, "call"),
        (0xF5, "CREATE2", 4, 1, "call"),
        (0xFA, "STATICCALL", 6, 1, "call"),
        (0xFD, "REVERT", 2, 0, "halt"),
        (0xFE, "INVALID", 0, 0, "invalid"),
        (0xFF, "SELFDESTRUCT", 1, 0, "halt"),
    ]
    for i in range(32):
        rows.append((0x60 + i, f"PUSH{i + 1}", 0, 1, "push"))
    for i in range(16):
        rows.append((0x80 + i, f"DUP{i + 1}", i + 1, i + 2, "stack"))
    for i in range(16):
        rows.append((0x90 + i, f"SWAP{i + 1}", i + 2, i + 2, "stack"))
    for i in range(5):
        rows.append((0xA0 + i, f"LOG{i}", i + 2, 0, "log"))
    return rows


TABLE: dict[int, OpcodeInfo] = {
    v: OpcodeInfo(v, n, pops, pushes, kind) for v, n, pops, pushes, kind in _entries()
}
BY_NAME: dict[str, OpcodeInfo] = {info.name: info for info in TABLE.values()}

# Binary naturals-arithmetic opcodes with a precise abstract transfer.
PRECISE_BINOPS = ("ADD", "MUL", "SUB", "DIV", "MOD", "LT", "GT", "EQ")
# Unary opcodes with a precise abstract transfer.
PRECISE_UNOPS = ("ISZERO", "NOT")
# Binary opcodes whose result is only tracked when the pre-analysis can
# compute it outright (bitwise / signed / exponentiation).
OPAQUE_BINOPS = (
    "SDIV", "SMOD", "EXP", "SIGNEXTEND", "SLT", "SGT",
    "AND", "OR", "XOR", "BYTE", "SHL", "SHR", "SAR",
)


def info_for(value: int) -> OpcodeInfo:
    """Opcode metadata for a byte; unassigned bytes map to invalid."""
    entry = TABLE.get(value)
    if entry is None:
        return OpcodeInfo(value, f"UNASSIGNED_{value:02x}", 0, 0, "invalid")
    return entry
