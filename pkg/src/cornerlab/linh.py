"""Exact linear expressions in the fibre-dimension parameter h.

Orders, blow-up weights, and clause shifts are all affine in h with rational
coefficients.  ``Lin`` keeps them exact and gives them one canonical string
form (``h+1``, ``-2h-2``, ``1/2`` ...), used verbatim in delimited reports.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rat = Union[int, Fraction, str]


def _rat(value: Rat) -> Fraction:
    return Fraction(value)


@dataclass(frozen=True)
class Lin:
    """An exact expression ``hcoef * h + const``."""

    const: Fraction = Fraction(0)
    hcoef: Fraction = Fraction(0)

    @staticmethod
    def of(const: Rat = 0, hcoef: Rat = 0) -> "Lin":
        return Lin(_rat(const), _rat(hcoef))

    @staticmethod
    def parse(text: "str | int | Fraction | Lin") -> "Lin":
        if isinstance(text, Lin):
            return text
        if isinstance(text, (int, Fraction)):
            return Lin.of(text)
        s = str(text).replace(" ", "")
        if not s:
            raise ValueError("empty expression")
        const = Fraction(0)
        hcoef = Fraction(0)
        token = re.compile(r"([+-]?)(\d+(?:/\d+)?)?(h)?")
        pos = 0
        while pos < len(s):
            m = token.match(s, pos)
            if m is None or m.end() == pos or not (m.group(2) or m.group(3)):
                raise ValueError(f"cannot parse {text!r}")
            value = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            if m.group(1) == "-":
                value = -value
            if m.group(3):
                hcoef += value
            else:
                const += value
            pos = m.end()
        return Lin(const, hcoef)

    def __add__(self, other: "Lin | Rat") -> "Lin":
        other = Lin.parse(other)
        return Lin(self.const + other.const, self.hcoef + other.hcoef)

    __radd__ = __add__

    def __sub__(self, other: "Lin | Rat") -> "Lin":
        other = Lin.parse(other)
        return Lin(self.const - other.const, self.hcoef - other.hcoef)

    def __neg__(self) -> "Lin":
        return Lin(-self.const, -self.hcoef)

    def __mul__(self, factor: Rat) -> "Lin":
        factor = _rat(factor)
        return Lin(self.const * factor, self.hcoef * factor)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.const or self.hcoef)

    def at(self, h: Rat) -> Fraction:
        """Evaluate at a concrete h."""
        return self.const + self.hcoef * _rat(h)

    def __str__(self) -> str:
        parts = []
        if self.hcoef:
            if self.hcoef == 1:
                parts.append("h")
            elif self.hcoef == -1:
                parts.append("-h")
            else:
                parts.append(f"{self.hcoef}h")
        if self.const or not parts:
            text = str(self.const)
            if parts and not text.startswith("-"):
                text = "+" + text
            parts.append(text)
        return "".join(parts)


ZERO = Lin()
ONE = Lin.of(1)
H = Lin.of(0, 1)
H_PLUS_1 = Lin.of(1, 1)
