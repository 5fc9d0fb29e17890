"""
Parser for group specification strings.

Grammar (left-associative, no precedence)::

    group  := atom (('x' | ':' name ':') atom)*
    atom   := ('C' | 'D' | 'S') integer

``C8x C8`` is not accepted; whitespace is not part of the grammar. Named
automorphisms are looked up in ``AUTOMORPHISMS``.

Example:
    parse_group("C4xC4").order        # 16
    parse_group("C5:inv:C2").name     # "C5:inv:C2", the dihedral group of order 10
"""

from collections.abc import Callable
from functools import lru_cache

import numpy as np

from gmconv.exceptions import SpecParseError
from gmconv.groups import (
    FiniteGroup,
    direct_product,
    inversion_action,
    make_cyclic,
    make_dihedral,
    make_symmetric,
    semidirect_product,
)

AUTOMORPHISMS: dict[str, Callable[[FiniteGroup, FiniteGroup], np.ndarray]] = {
    "inv": inversion_action,
}

_ATOMS: dict[str, Callable[[int], FiniteGroup]] = {
    "C": make_cyclic,
    "D": make_dihedral,
    "S": make_symmetric,
}


class _Parser:
    def __init__(self, spec: str):
        self.spec = spec
        self.pos = 0

    def error(self, message: str, position: int | None = None) -> SpecParseError:
        return SpecParseError(message, self.spec, self.pos if position is None else position)

    def parse(self) -> FiniteGroup:
        if not self.spec:
            raise self.error("empty group specification")
        group = self._atom()
        while self.pos < len(self.spec):
            op = self.spec[self.pos]
            if op == "x":
                self.pos += 1
                group = direct_product(group, self._atom())
            elif op == ":":
                group = self._semidirect(group)
            else:
                raise self.error(f"expected 'x' or ':' but found {op!r}")
        return group

    def _semidirect(self, left: FiniteGroup) -> FiniteGroup:
        start = self.pos + 1
        end = self.spec.find(":", start)
        if end < 0:
            raise self.error("unterminated automorphism name", start)
        name = self.spec[start:end]
        if name not in AUTOMORPHISMS:
            raise self.error(f"unknown automorphism {name!r}", start)
        self.pos = end + 1
        right = self._atom()
        return semidirect_product(
            left,
            right,
            AUTOMORPHISMS[name](left, right),
            name=f"{left.name}:{name}:{right.name}",
        )

    def _atom(self) -> FiniteGroup:
        if self.pos >= len(self.spec):
            raise self.error("expected a group atom (C, D or S) but reached the end")
        letter = self.spec[self.pos]
        if letter not in _ATOMS:
            raise self.error(f"expected C, D or S but found {letter!r}")
        self.pos += 1
        start = self.pos
        while self.pos < len(self.spec) and self.spec[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.error(f"expected an integer after {letter!r}")
        return _ATOMS[letter](int(self.spec[start : self.pos]))


@lru_cache(maxsize=64)
def parse_group(spec: str) -> FiniteGroup:
    """
    Build the group named by ``spec``.

    Raises:
        SpecParseError: If the string does not match the grammar.
        InvalidOrderError: If an atom has order zero.
        CapacityError: If a construction exceeds the configured maximum order.
        InvalidActionError: If a named automorphism does not apply to its operands.
    """
    return _Parser(spec).parse()
