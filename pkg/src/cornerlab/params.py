"""Exact evaluation of small linear parameter expressions.

Scenario scripts and family files write exponents as strings such as
``"h+1+mu"``, ``"2h+2"``, ``"nu-1"`` or ``"-3/2"``: sums of rational
constants and rational multiples of named parameters.  Evaluation is exact
over :class:`fractions.Fraction`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping, Union

Number = Union[int, str, Fraction]

_ATOM = re.compile(
    r"""
    (?P<sign>[+-]?)\s*
    (?:
        (?P<coef>\d+(?:/\d+)?)?\s*(?P<sym>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<num>\d+(?:/\d+)?)
    )
    \s*
    """,
    re.VERBOSE,
)


class ParamError(ValueError):
    """Raised for malformed expressions or unknown parameter names."""


def eval_expr(expr: Number, env: Mapping[str, Fraction] = {}) -> Fraction:
    """Evaluate an exact linear expression in the given parameter environment."""
    if isinstance(expr, (int, Fraction)):
        return Fraction(expr)
    text = expr.strip()
    if not text:
        raise ParamError("empty expression")
    pos = 0
    total = Fraction(0)
    first = True
    while pos < len(text):
        m = _ATOM.match(text, pos)
        if not m or m.end() == pos:
            raise ParamError(f"cannot parse {expr!r} at position {pos}")
        sign = m.group("sign")
        if not first and not sign:
            raise ParamError(f"missing operator in {expr!r} at position {pos}")
        factor = Fraction(-1 if sign == "-" else 1)
        if m.group("sym") is not None:
            name = m.group("sym")
            if name not in env:
                raise ParamError(f"unknown parameter {name!r} in {expr!r}")
            coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
            total += factor * coef * env[name]
        else:
            total += factor * Fraction(m.group("num"))
        pos = m.end()
        first = False
    return total
