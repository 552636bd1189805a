"""Brute-force oracles used to cross-check the generator arithmetic.

These work by exhaustively enumerating closure points inside a finite
window, using nothing from the implementation beyond the generator lists
themselves, so they provide an independent route to the same answers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import FrozenSet, Set, Tuple

from cornerlab.indexsets import IndexSet

Point = Tuple[Fraction, int]


def enumerate_closure(
    generators: FrozenSet[Point], z_max: Fraction, k_max: int
) -> Set[Point]:
    """All closure points with exponent <= z_max and log order <= k_max.

    Applies the two closure rules (exponent + 1, log order - 1) directly.
    """
    points: Set[Point] = set()
    for z, k in generators:
        step = z
        while step <= z_max:
            for kk in range(0, min(k, k_max) + 1):
                points.add((step, kk))
            step += 1
    return points


def window_for(*sets: IndexSet, margin: int = 4) -> Tuple[Fraction, int]:
    """A (z_max, k_max) window guaranteed to contain every generator
    of the inputs and of any single sum / extended union of them."""
    exps = [z for s in sets for z, _ in s.generators]
    logs = [k for s in sets for _, k in s.generators]
    z_max = (max(exps) if exps else Fraction(0)) + margin
    if len(exps) > 1:
        z_max = max(z_max, sum(sorted(exps)[-2:]) + margin)
    k_max = sum(sorted(logs)[-2:]) + 1 if logs else 1
    return z_max, k_max


def closure_of_sum(a: IndexSet, b: IndexSet, z_max: Fraction, k_max: int) -> Set[Point]:
    """Closure points of the pointwise sum, enumerated pair by pair."""
    if a.is_empty or b.is_empty:
        return set()
    lo_a = min(z for z, _ in a.generators)
    lo_b = min(z for z, _ in b.generators)
    pts_a = enumerate_closure(a.generators, z_max - lo_b, k_max)
    pts_b = enumerate_closure(b.generators, z_max - lo_a, k_max)
    out: Set[Point] = set()
    for za, ka in pts_a:
        for zb, kb in pts_b:
            if za + zb <= z_max and ka + kb <= k_max:
                out.add((za + zb, ka + kb))
    return out


def closure_of_extended_union(
    a: IndexSet, b: IndexSet, z_max: Fraction, k_max: int
) -> Set[Point]:
    """Closure points of the extended union: both closures, plus a log
    bump wherever the two closures share an exponent."""
    pts_a = enumerate_closure(a.generators, z_max, k_max)
    pts_b = enumerate_closure(b.generators, z_max, k_max)
    out = pts_a | pts_b
    for za, ka in pts_a:
        for zb, kb in pts_b:
            if za == zb and ka + kb + 1 <= k_max:
                out.add((za, ka + kb + 1))
    return out


def check_sum(a: IndexSet, b: IndexSet) -> bool:
    z_max, k_max = window_for(a, b)
    got = enumerate_closure((a + b).generators, z_max, k_max)
    return got == closure_of_sum(a, b, z_max, k_max)


def check_extended_union(a: IndexSet, b: IndexSet) -> bool:
    z_max, k_max = window_for(a, b)
    got = enumerate_closure(a.extended_union(b).generators, z_max, k_max)
    return got == closure_of_extended_union(a, b, z_max, k_max)
