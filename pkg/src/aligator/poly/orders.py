"""Monomial orders.

An order is described independently of any polynomial universe; calling
:meth:`MonomialOrder.key` binds it to a universe and returns a sort key on
exponent tuples (larger key means larger monomial).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

Exponent = tuple[int, ...]
KeyFn = Callable[[Exponent], tuple]


@dataclass(frozen=True)
class MonomialOrder:
    kind: str
    vars: tuple[str, ...]
    nelim: int = 0

    def __post_init__(self):
        if self.kind not in ("lex", "degrevlex", "block"):
            raise ValueError(f"unknown monomial order {self.kind!r}")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("repeated variable in monomial order")

    @property
    def elim_vars(self) -> tuple[str, ...]:
        return self.vars[: self.nelim] if self.kind == "block" else ()

    def key(self, universe: Sequence[str]) -> KeyFn:
        if set(universe) != set(self.vars):
            raise ValueError(
                f"order variables {self.vars} do not match universe {tuple(universe)}"
            )
        pos = {v: i for i, v in enumerate(universe)}
        perm = tuple(pos[v] for v in self.vars)
        if self.kind == "lex":
            return lambda e: tuple([e[i] for i in perm])
        if self.kind == "degrevlex":
            rev = perm[::-1]
            return lambda e: (sum(e), *[-e[i] for i in rev])
        head = perm[: self.nelim]
        rest_rev = perm[self.nelim:][::-1]
        return lambda e: (
            *[e[i] for i in head],
            sum(e[i] for i in rest_rev),
            *[-e[i] for i in rest_rev],
        )

    def neg_key(self, universe: Sequence[str]) -> KeyFn:
        """Key whose ascending order is descending monomial order (for heaps)."""
        k = self.key(universe)
        return lambda e: tuple([-x for x in k(e)])

    def __str__(self):
        if self.kind == "block":
            return f"block({','.join(self.elim_vars)} | {','.join(self.vars[self.nelim:])})"
        return f"{self.kind}({','.join(self.vars)})"


def lex(*names: str) -> MonomialOrder:
    return MonomialOrder("lex", tuple(names))


def degrevlex(*names: str) -> MonomialOrder:
    return MonomialOrder("degrevlex", tuple(names))


def block(elim: Sequence[str], rest: Sequence[str]) -> MonomialOrder:
    """Lex on ``elim`` first, then degrevlex on ``rest``; eliminates ``elim``."""
    return MonomialOrder("block", tuple(elim) + tuple(rest), len(elim))
