from __future__ import annotations

import random

from hypothesis import given
from hypothesis import strategies as st

from evmhorn.concrete import Snapshot, step_binary
from evmhorn.opcodes import WORD_MOD
from evmhorn.semantics import (
    TOP,
    AbsMap,
    abs_binop,
    abs_check,
    abs_unop,
    access_word,
    alpha_running,
    concat,
    extract,
    leq_fact,
    leq_map,
    leq_word,
    stack_to_array,
    store_word,
    to_word_memory,
)
from evmhorn.semantics.values import Top

from helpers import ByteMemoryOracle

words = st.integers(min_value=0, max_value=WORD_MOD - 1)
maybe_top = st.one_of(words, st.just(TOP))


def test_extract_single_bytes():
    v = int.from_bytes(bytes(range(32)), "big")
    assert extract(v, 0, 0) == 0
    assert extract(v, 31, 31) == 31
    assert extract(v, 30, 31) == 30 * 256 + 31
    assert extract(TOP, 0, 5) is TOP


def test_concat_is_big_endian_append():
    # v occupies the high bytes, w the low n bytes.
    assert concat(0xAB, 0xCD, 1) == 0xABCD
    assert concat(0xAB, 0x0102, 2) == 0xAB0102
    assert concat(TOP, 1, 1) is TOP
    assert concat(1, TOP, 1) is TOP


def test_access_word_aligned_and_unaligned():
    mem = AbsMap(0).set(0, 0x0102).set(1, 0x03 << 248)
    assert access_word(mem, 0) == 0x0102
    # Reading at offset 1 shifts one byte of word 1 in from the right.
    assert access_word(mem, 1) == 0x010203


def test_store_word_unaligned_matches_byte_oracle():
    oracle = ByteMemoryOracle()
    mem = AbsMap(0)
    for off, val in [(0, 0xFF), (5, 0xDEADBEEF << 200), (37, 12345), (64, 7)]:
        mem = store_word(mem, off, val)
        oracle.store_word(off, val)
    for off in [0, 5, 37, 64, 1, 33, 36, 70]:
        assert access_word(mem, off) == oracle.load_word(off)


def test_store_word_top_propagates():
    mem = store_word(AbsMap(0), 1, TOP)
    assert access_word(mem, 1) is TOP
    # The unaligned TOP write clobbers both adjacent words.
    assert mem.get(0) is TOP and mem.get(1) is TOP


@given(
    st.lists(st.tuples(st.integers(0, 100), words), min_size=1, max_size=8),
    st.integers(0, 100),
)
def test_word_model_matches_byte_oracle(writes, read_off):
    oracle = ByteMemoryOracle()
    mem = AbsMap(0)
    for off, val in writes:
        mem = store_word(mem, off, val)
        oracle.store_word(off, val)
    got = access_word(mem, read_off)
    assert not isinstance(got, Top)
    assert got == oracle.load_word(read_off)


@given(maybe_top, maybe_top, words, words)
def test_binop_monotone(a, b, ca, cb):
    """If x <= a and y <= b then op(x, y) <= op(a, b), for all operators."""
    x = ca if isinstance(a, Top) else a
    y = cb if isinstance(b, Top) else b
    for name in ("ADD", "SUB", "MUL", "DIV", "MOD", "LT", "GT", "EQ"):
        assert leq_word(abs_binop(name, x, y), abs_binop(name, a, b))
        # May-checks are complete: the concrete outcome implies the check.
        if step_binary(name, x, y) if name in ("LT", "GT", "EQ") else False:
            assert abs_check(name, a, b)


@given(maybe_top, words)
def test_unop_monotone(a, ca):
    x = ca if isinstance(a, Top) else a
    for name in ("ISZERO", "NOT"):
        assert leq_word(abs_unop(name, x), abs_unop(name, a))


@given(st.integers(0, 99), maybe_top, words, st.integers(0, 99))
def test_store_access_monotone(off, v, cv, read_off):
    big = store_word(AbsMap(0), off, v)
    small = store_word(AbsMap(0), off, cv if isinstance(v, Top) else v)
    assert leq_map(small, big)
    assert leq_word(access_word(small, read_off), access_word(big, read_off))


def test_leq_map_defaults():
    assert leq_map(AbsMap(0), AbsMap(TOP))
    assert not leq_map(AbsMap(TOP), AbsMap(0))
    assert leq_map(AbsMap(0).set(3, 5), AbsMap(0).set(3, 5))
    assert not leq_map(AbsMap(0).set(3, 5), AbsMap(0))
    assert leq_map(AbsMap(0).set(3, 5), AbsMap(0).set(3, TOP))


def test_absmap_drops_default_entries():
    assert AbsMap(0).set(3, 5).set(3, 0) == AbsMap(0)


def test_stack_to_array_bottom_first():
    arr = stack_to_array((10, 20, 30))
    assert arr.get(0) == 10 and arr.get(2) == 30 and arr.get(5) == 0


def test_to_word_memory_big_endian():
    mem = to_word_memory({31: 0xAB, 32: 0xCD})
    assert mem.get(0) == 0xAB
    assert mem.get(1) == 0xCD << 248


def test_alpha_running_and_order():
    snap = Snapshot(pc=4, stack=(1, 2), memory={31: 0xFF}, storage={0: 9})
    fact = alpha_running(snap)
    assert fact.pred == "MState" and fact.params == (0, 4)
    size, sa, mem, stor, cl = fact.args
    assert size == 2 and sa.get(1) == 2 and mem.get(0) == 0xFF and stor.get(0) == 9
    assert cl is False
    top_fact = fact.__class__(
        "MState", (0, 4), (2, stack_to_array((1, TOP)), AbsMap(TOP), AbsMap(TOP), False)
    )
    assert leq_fact(fact, top_fact)
    assert not leq_fact(top_fact, fact)
