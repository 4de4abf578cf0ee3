"""Selector providers: the bridge between program facts and specification
quantifiers.

A specification declares selector *signatures* (``sel name: dom -> [cod]``);
the analyzer supplies an implementation that, given concrete domain values,
enumerates the codomain tuples to instantiate rules over.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

from ..hrt import ast


class SignatureMismatch(ValueError):
    """A selector implementation disagrees with its declared signature."""


UNIT = ()  # the single inhabitant of the unit type


def _conforms(value, typ) -> bool:
    if isinstance(typ, ast.TInt):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(typ, ast.TBool):
        return isinstance(value, bool)
    if isinstance(typ, ast.TUnit):
        return value == UNIT
    return False


@dataclass
class SelectorTable:
    """Named selector implementations with signature checking on call."""

    impls: dict[str, Callable[..., Iterable[tuple]]] = field(default_factory=dict)

    def register(self, name: str, impl: Callable[..., Iterable[tuple]]) -> None:
        self.impls[name] = impl

    def register_facts(self, name: str, facts: Mapping[tuple, Iterable[tuple]]) -> None:
        """Register a finite selector given as an args -> rows mapping."""
        table = {k: [tuple(r) for r in v] for k, v in facts.items()}
        self.impls[name] = lambda *args: table.get(tuple(args), [])

    def register_constant(self, name: str, rows: Iterable[tuple]) -> None:
        """Register a nullary selector returning a fixed list of rows."""
        fixed = [tuple(r) for r in rows]
        self.impls[name] = lambda *args: fixed

    def query(self, decl: ast.SelDecl, args: tuple) -> list[tuple]:
        impl = self.impls.get(decl.name)
        if impl is None:
            raise SignatureMismatch(f"no implementation for selector {decl.name}")
        if len(args) != len(decl.dom):
            raise SignatureMismatch(
                f"selector {decl.name} takes {len(decl.dom)} arguments, got {len(args)}"
            )
        for value, typ in zip(args, decl.dom):
            if not _conforms(value, typ):
                raise SignatureMismatch(
                    f"selector {decl.name}: argument {value!r} is not a {typ}"
                )
        call_args = tuple(a for a, t in zip(args, decl.dom) if not isinstance(t, ast.TUnit))
        rows = []
        for row in impl(*call_args):
            row = tuple(row) if isinstance(row, (tuple, list)) else (row,)
            if len(row) != len(decl.cod):
                raise SignatureMismatch(
                    f"selector {decl.name} yields {len(decl.cod)}-tuples, got {row!r}"
                )
            for value, typ in zip(row, decl.cod):
                if not _conforms(value, typ):
                    raise SignatureMismatch(
                        f"selector {decl.name}: yielded {value!r}, not a {typ}"
                    )
            rows.append(row)
        return rows
