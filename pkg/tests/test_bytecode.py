from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from evmhorn.bytecode import (
    BytecodeError,
    assemble,
    decode,
    parse_hex,
    split_atomic_blocks,
)
from evmhorn.opcodes import TABLE, info_for


def test_decode_push_add():
    bc = decode("0x6005600301")
    assert [(i.pc, i.name, i.immediate) for i in bc.instructions] == [
        (0, "PUSH1", 5),
        (2, "PUSH1", 3),
        (4, "ADD", None),
    ]


def test_decode_empty():
    assert decode("") .instructions == ()


def test_decode_truncated_push_zero_pads():
    bc = decode("60")
    assert len(bc.instructions) == 1
    assert bc.instructions[0].name == "PUSH1"
    assert bc.instructions[0].immediate == 0
    bc = decode("62ab")  # PUSH3 with one immediate byte: 0xab0000
    assert bc.instructions[0].immediate == 0xAB0000


def test_decode_unassigned_byte_is_invalid():
    bc = decode("0c")
    assert bc.instructions[0].info.kind == "invalid"


def test_parse_hex_rejects_odd_length():
    with pytest.raises(BytecodeError):
        parse_hex("0x123")


def test_assemble_rejects_bare_push():
    with pytest.raises(BytecodeError):
        assemble(["PUSH1", "ADD"])


def test_assemble_push_forms():
    assert assemble([5, "ADD"]) == bytes([0x60, 5, 0x01])
    assert assemble([("PUSH2", 0x1234)]) == bytes([0x61, 0x12, 0x34])


@given(
    st.lists(
        st.one_of(
            st.sampled_from(["ADD", "MUL", "POP", "JUMPDEST", "STOP", "MSTORE"]),
            st.integers(min_value=0, max_value=2**64 - 1),
        ),
        max_size=30,
    )
)
def test_decode_assemble_roundtrip(program):
    code = assemble(program)
    decoded = decode(code)
    names = []
    for ins in decoded.instructions:
        if ins.info.is_push:
            names.append(ins.immediate)
        else:
            names.append(ins.name)
    assert names == [p if isinstance(p, (str, int)) else p[0] for p in program]


def test_atomic_blocks_terminators_and_jumpdest_leader():
    # 0: PUSH1 6; 2: JUMP | 3: STOP | 4: ADD (unreachable tail) | 5: JUMPDEST...
    code = assemble([(("PUSH1"), 6), "JUMP", "STOP", "ADD", "POP", ("JUMPDEST"), "STOP"])
    blocks = split_atomic_blocks(decode(code))
    starts = [b.start for b in blocks]
    assert starts == [0, 3, 4, 6]
    assert blocks[0].terminator.name == "JUMP"
    assert blocks[1].terminator.name == "STOP"
    # The block before a JUMPDEST ends by fall-through even without terminator.
    assert blocks[2].instructions[-1].name == "POP"
    assert blocks[3].instructions[0].name == "JUMPDEST"


def test_atomic_blocks_invalid_terminates():
    code = assemble(["ADD", "INVALID", "MUL"])
    blocks = split_atomic_blocks(decode(code))
    assert [b.start for b in blocks] == [0, 2]


def test_opcode_table_arities():
    assert TABLE[0x01].pops == 2 and TABLE[0x01].pushes == 1
    assert TABLE[0xF1].pops == 7  # CALL
    assert TABLE[0xFA].pops == 6  # STATICCALL
    assert TABLE[0x80].dup_index == 1
    assert TABLE[0x9F].swap_index == 16
    assert info_for(0x0C).kind == "invalid"
