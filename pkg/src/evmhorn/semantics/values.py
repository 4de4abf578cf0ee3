"""Abstract machine words and word-indexed memories.

The value domain adjoins a single unknown element ``TOP`` to the machine
words; ``a <= b`` holds iff ``b`` is TOP or ``a == b``.  Memories, storages
and stacks are total word-indexed maps with a default, represented with a
finite set of exceptional entries.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..concrete import step_binary, step_unary
from ..opcodes import WORD_BYTES


class Top:
    """The unknown machine word (singleton)."""

    _instance: "Top | None" = None

    def __new__(cls) -> "Top":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TOP"


TOP = Top()
AbsWord = "int | Top"


def is_concrete(v: int | Top) -> bool:
    return not isinstance(v, Top)


def leq_word(a: int | Top, b: int | Top) -> bool:
    return isinstance(b, Top) or a == b


def abs_binop(name: str, a: int | Top, b: int | Top) -> int | Top:
    """Abstract two-argument word operation: concrete when both inputs are."""
    if isinstance(a, Top) or isinstance(b, Top):
        return TOP
    return step_binary(name, a, b)


def abs_unop(name: str, a: int | Top) -> int | Top:
    if isinstance(a, Top):
        return TOP
    return step_unary(name, a)


def abs_check(name: str, a: int | Top, b: int | Top) -> bool:
    """May-satisfaction of a comparison: unknown operands satisfy anything."""
    if isinstance(a, Top) or isinstance(b, Top):
        return True
    return bool(step_binary(name, a, b))


@dataclass(frozen=True)
class AbsMap:
    """Total map from naturals to abstract words: a default plus exceptions.

    Entries equal to the default are dropped, so structural equality is
    extensional equality.
    """

    default: int | Top
    items: tuple[tuple[int, int | Top], ...] = ()

    @staticmethod
    def of(default: int | Top, entries: dict[int, int | Top] | None = None) -> "AbsMap":
        entries = entries or {}
        kept = tuple(
            sorted(((k, v) for k, v in entries.items() if v != default), key=lambda kv: kv[0])
        )
        return AbsMap(default, kept)

    def get(self, key: int) -> int | Top:
        for k, v in self.items:
            if k == key:
                return v
        return self.default

    def set(self, key: int, value: int | Top) -> "AbsMap":
        entries = {k: v for k, v in self.items}
        entries[key] = value
        return AbsMap.of(self.default, entries)

    def as_dict(self) -> dict[int, int | Top]:
        return dict(self.items)


ZERO_MAP = AbsMap(0)
TOP_MAP = AbsMap(TOP)


def leq_map(a: AbsMap, b: AbsMap) -> bool:
    """Pointwise order over all indices (finitely checkable)."""
    keys = {k for k, _ in a.items} | {k for k, _ in b.items}
    if not leq_word(a.default, b.default):
        return False
    return all(leq_word(a.get(k), b.get(k)) for k in keys)


def extract(v: int | Top, l: int, r: int) -> int | Top:  # noqa: E741
    """Bytes ``l..r`` (big-endian, 0 = most significant) of a 32-byte word."""
    if not 0 <= l <= r <= WORD_BYTES - 1:
        raise ValueError(f"bad byte range [{l}, {r}]")
    if isinstance(v, Top):
        return TOP
    return (v // 256 ** (31 - r)) % 256 ** (r - l + 1)


def concat(v: int | Top, w: int | Top, n: int) -> int | Top:
    """Append the ``n``-byte value ``w`` below ``v``: ``v * 256^n + w``."""
    if isinstance(v, Top) or isinstance(w, Top):
        return TOP
    return v * 256**n + w


def access_word(mem: AbsMap, p: int) -> int | Top:
    """Read the 32-byte word at byte offset ``p`` from word-indexed memory."""
    k = p % WORD_BYTES
    i = p // WORD_BYTES
    if k == 0:
        return mem.get(i)
    hi = extract(mem.get(i), k, 31)
    lo = extract(mem.get(i + 1), 0, k - 1)
    return concat(hi, lo, k)


def store_word(mem: AbsMap, p: int, v: int | Top) -> AbsMap:
    """Write a 32-byte word at byte offset ``p`` into word-indexed memory."""
    k = p % WORD_BYTES
    i = p // WORD_BYTES
    if k == 0:
        return mem.set(i, v)
    w0, w1 = mem.get(i), mem.get(i + 1)
    new0 = concat(extract(w0, 0, k - 1), extract(v, 0, 31 - k), WORD_BYTES - k)
    new1 = concat(extract(v, 32 - k, 31), extract(w1, k, 31), WORD_BYTES - k)
    return mem.set(i, new0).set(i + 1, new1)


def stack_to_array(stack: tuple[int | Top, ...]) -> AbsMap:
    """An operand stack (index 0 = bottom) as a zero-defaulted array."""
    return AbsMap.of(0, dict(enumerate(stack)))


def to_word_memory(byte_mem: dict[int, int]) -> AbsMap:
    """Assemble byte-addressed memory into 32-byte big-endian words."""
    words: dict[int, int | Top] = {}
    touched = {off // WORD_BYTES for off in byte_mem}
    for w in touched:
        value = 0
        for j in range(WORD_BYTES):
            value = value * 256 + byte_mem.get(w * WORD_BYTES + j, 0)
        words[w] = value
    return AbsMap.of(0, words)


def storage_to_map(storage: dict[int, int]) -> AbsMap:
    return AbsMap.of(0, dict(storage))
