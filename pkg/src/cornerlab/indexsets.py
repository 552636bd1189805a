"""Exact arithmetic for polyhomogeneous index sets.

An index set is described by finitely many generators ``(z, k)`` with
``z`` rational (the leading exponent) and ``k`` a natural number (the
attached log order).  The set such a generator describes is its closure
under ``(z, k) -> (z + 1, k)`` and ``(z, k) -> (z, k - 1)``; a collection
of generators describes the union of their closures.  All operations work
on generators in dominance normal form and never enumerate closures.

``(z, k)`` lies in the closure of ``(z', k')`` iff ``z - z'`` is a
non-negative integer and ``k <= k'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable, Tuple, Union

Term = Tuple[Fraction, int]
Exponent = Union[int, str, Fraction]


def _term(exponent: Exponent, log_order: int = 0) -> Term:
    z = Fraction(exponent)
    k = int(log_order)
    if k < 0:
        raise ValueError(f"negative log order in ({z}, {k})")
    return (z, k)


def _dominated(t: Term, by: Term) -> bool:
    """True when t lies in the closure generated by `by`."""
    dz = t[0] - by[0]
    return dz >= 0 and dz.denominator == 1 and t[1] <= by[1]


def _normalize(terms: Iterable[Term]) -> FrozenSet[Term]:
    terms = set(terms)
    keep = set()
    for t in terms:
        if any(s != t and _dominated(t, s) for s in terms):
            continue
        keep.add(t)
    return frozenset(keep)


@dataclass(frozen=True)
class IndexSet:
    """An index set in generator normal form."""

    generators: FrozenSet[Term] = frozenset()

    @staticmethod
    def of(*terms: "Term | Exponent") -> "IndexSet":
        """Build from ``(exponent, log)`` pairs; bare exponents mean log 0."""
        normalized = []
        for t in terms:
            if isinstance(t, tuple):
                normalized.append(_term(*t))
            else:
                normalized.append(_term(t))
        return IndexSet(_normalize(normalized))

    @staticmethod
    def empty() -> "IndexSet":
        return EMPTY

    @staticmethod
    def naturals() -> "IndexSet":
        return NATURALS

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def contains(self, exponent: Exponent, log_order: int = 0) -> bool:
        t = _term(exponent, log_order)
        return any(_dominated(t, g) for g in self.generators)

    # ----- arithmetic -------------------------------------------------

    def __add__(self, other: "IndexSet") -> "IndexSet":
        """Pointwise sum; empty absorbs, naturals is neutral on closed sets."""
        if self.is_empty or other.is_empty:
            return EMPTY
        return IndexSet(
            _normalize(
                (a[0] + b[0], a[1] + b[1])
                for a in self.generators
                for b in other.generators
            )
        )

    def shift(self, offset: Exponent) -> "IndexSet":
        q = Fraction(offset)
        return IndexSet(frozenset((z + q, k) for z, k in self.generators))

    def union(self, other: "IndexSet") -> "IndexSet":
        """Plain union (no log bumps)."""
        return IndexSet(_normalize(self.generators | other.generators))

    def extended_union(self, other: "IndexSet") -> "IndexSet":
        """Union plus a log bump for every generator pair at integer offset."""
        bumps = []
        for z1, k1 in self.generators:
            for z2, k2 in other.generators:
                if (z1 - z2).denominator == 1:
                    bumps.append((max(z1, z2), k1 + k2 + 1))
        return IndexSet(_normalize([*self.generators, *other.generators, *bumps]))

    # ----- queries ----------------------------------------------------

    def inf_re(self) -> "Fraction | float":
        if self.is_empty:
            return math.inf
        return min(z for z, _ in self.generators)

    def satisfies_bound(
        self,
        bound: Exponent,
        max_log: int = 0,
        strict: bool = False,
    ) -> bool:
        """Every generator above `bound`.

        Equality with the bound is allowed (unless `strict`) for log orders
        up to `max_log`.
        """
        b = Fraction(bound)
        for z, k in self.generators:
            if z > b:
                continue
            if strict or z < b or k > max_log:
                return False
        return True

    def refines(self, other: "IndexSet") -> bool:
        """True when this set's closure is contained in `other`'s."""
        return all(
            any(_dominated(g, s) for s in other.generators) for g in self.generators
        )

    def same_closure(self, other: "IndexSet") -> bool:
        return self.refines(other) and other.refines(self)

    # ----- presentation ----------------------------------------------

    def sorted_terms(self) -> Tuple[Term, ...]:
        return tuple(sorted(self.generators))

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        body = ", ".join(f"({z},{k})" for z, k in self.sorted_terms())
        return "{" + body + "}"

    @staticmethod
    def parse(text: str) -> "IndexSet":
        """Inverse of ``str``: ``{}``, ``{(0,0)}``, ``{(-1,0), (1/2,1)}``."""
        s = text.strip()
        if not (s.startswith("{") and s.endswith("}")):
            raise ValueError(f"not an index set literal: {text!r}")
        body = s[1:-1].strip()
        if not body:
            return EMPTY
        terms = []
        for chunk in body.replace(" ", "").split("),("):
            chunk = chunk.strip("()")
            z, _, k = chunk.partition(",")
            terms.append((Fraction(z), int(k)))
        return IndexSet.of(*terms)


EMPTY = IndexSet()
NATURALS = IndexSet.of(0)


def extended_union(*sets: IndexSet) -> IndexSet:
    """Fold of the binary extended union (associative up to closure)."""
    result = EMPTY
    for s in sets:
        result = result.extended_union(s)
    return result


def sum_sets(*sets: IndexSet) -> IndexSet:
    result = NATURALS
    for s in sets:
        result = result + s
    return result
