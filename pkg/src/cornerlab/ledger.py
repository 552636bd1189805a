"""Replay of operator-construction arguments as an order-and-family ledger.

A scenario is a list of steps acting on named operator symbols.  Each symbol
carries a pseudodifferential order (an exact rational, or ``None`` for a
smoothing term) and an index family over the faces of the double space of
its composition rule.  Mechanical steps (compose, add, adjoint, scaling,
Neumann series, remainders) compute families exactly through the rule;
``assert`` steps replace a family entry by a strictly finer one on the
strength of a recorded citation, and ``expect`` steps check the ledger
against stated bounds, printing one verdict line each.

Replaying with assertions disabled skips every cited refinement, so the
construction degrades exactly where the argument genuinely needs analytic
input; the scenario records which expectations then fail.

Step vocabulary (JSON objects, dispatched on ``op``):

``define``
    introduce a symbol from explicit data: ``order`` (string, or null for a
    smoothing term) and ``family`` mapping faces to generator lists.
``compose``
    ``left`` then ``right`` through the scenario's rule.
``add``
    sum of the symbols named in ``terms`` (orders take the maximum,
    families the plain union).
``adjoint`` / ``conjugate`` / ``scale`` (alias ``multiply``)
    formal adjoint, conjugation by a boundary-function power, kernel
    multiplication by ``left``/``right`` boundary-function powers.
``sandwich``
    ``adjoint(outer) . inner . outer``.
``remainder``
    the defect ``Id - T`` for ``of: T``: faces listed in ``improves`` are
    replaced by the declared finer sets (the cancellation being the cited
    analytic content); without assertions the identity's Taylor series is
    united in instead.
``neumann``
    sum of the powers of ``of``: iterates are composed until their content
    stabilizes below the ``cutoff`` parameter; a face whose leading order
    ever drops raises a no-progress error naming the face.
``assert``
    replace ``target``'s family at ``face`` by a finer set (and/or tighten
    ``order``), recording ``cite``; skipped when assertions are off.
``expect``
    check ``target`` at ``face``: kinds ``geq``/``gt`` (leading-order bound
    with optional ``maxlog``), ``eq`` (exact index set), ``empty``, and
    ``order``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import catalog
from .indexsets import EMPTY, NATURALS, IndexSet
from .params import eval_expr
from .rules import (
    CalculusRule,
    CompositionError,
    Family,
    adjoint_family,
    compose_families,
    conjugate_family,
    parse_family,
    parse_index_set,
    scale_family,
    stated_rule,
)


class ReplayError(ValueError):
    """Raised when a scenario script is malformed or an operation is invalid."""


class NoProgressError(ReplayError):
    """Raised when a Neumann iteration fails to deepen at some face."""

    def __init__(self, face: str, message: str) -> None:
        super().__init__(message)
        self.face = face


@dataclass
class OpSymbol:
    """A named operator symbol: order, index family, free-form tags."""

    name: str
    order: Optional[Fraction]  # None = smoothing (order minus infinity)
    family: Family
    tags: Dict[str, object] = field(default_factory=dict)

    def order_str(self) -> str:
        return "-inf" if self.order is None else str(self.order)


@dataclass
class ReplayResult:
    scenario: str
    env: Dict[str, Fraction]
    assertions: bool
    lines: List[str]
    expect_lines: List[str]
    failed_expects: List[str]
    aborted_at: Optional[str]
    citations: List[Tuple[str, str]]
    symbols: Dict[str, OpSymbol]

    @property
    def passed(self) -> bool:
        return not self.failed_expects and self.aborted_at is None

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


_CONSTRAINTS = (
    ("eps", lambda e: e["eps"] > 0, "eps must be positive"),
    ("eps1", lambda e: e["eps1"] >= e.get("eps", e["eps1"]), "eps must not exceed eps1"),
    ("mu", lambda e: e["mu"] > 0, "mu must be positive"),
    ("delta", lambda e: e["delta"] > 0, "delta must be positive"),
    ("cutoff", lambda e: e["cutoff"] >= 1, "cutoff must be at least 1"),
)


def build_env(
    params: Mapping[str, object],
    h: object = 1,
    overrides: Mapping[str, object] = {},
) -> Dict[str, Fraction]:
    """Exact parameter environment with derived quantities and constraints."""
    env: Dict[str, Fraction] = {}
    for key, value in params.items():
        env[key] = eval_expr(value, {})
    for key, value in overrides.items():
        env[key] = eval_expr(value, {})
    env["h"] = eval_expr(h, {})
    if env["h"] < 1:
        raise ReplayError("the fiber dimension h must be at least 1")
    if "eps" in env and "eps1" in env:
        env.setdefault("nu", min(env["eps"], env["eps1"] - 1))
    for key, check, message in _CONSTRAINTS:
        if key in env and not check(env):
            raise ReplayError(f"parameter constraint violated: {message}")
    return env


def _truncate(s: IndexSet, cutoff: Fraction) -> IndexSet:
    kept = [t for t in s.sorted_terms() if t[0] <= cutoff]
    return IndexSet.of(*kept) if kept else EMPTY


def _inf(s: IndexSet):
    return s.inf_re()


class _Ledger:
    def __init__(
        self,
        scenario: Mapping[str, object],
        h: object,
        overrides: Mapping[str, object],
        assertions: bool,
    ) -> None:
        self.scenario = str(scenario["name"])
        self.rule: CalculusRule = stated_rule(str(scenario["rule"]))
        self.space = catalog.load_space(self.rule.space)
        self.env = build_env(scenario.get("params", {}), h, overrides)
        self.assertions = assertions
        self.symbols: Dict[str, OpSymbol] = {}
        self.lines: List[str] = []
        self.expect_lines: List[str] = []
        self.failed: List[str] = []
        self.citations: List[Tuple[str, str]] = []
        self.aborted_at: Optional[str] = None

    # ------------------------------------------------------------- helpers

    def h(self) -> Fraction:
        return self.env["h"]

    def sym(self, name: object) -> OpSymbol:
        if name not in self.symbols:
            raise ReplayError(f"unknown symbol {name!r} in {self.scenario}")
        return self.symbols[str(name)]

    def put(self, step: Mapping[str, object], sym: OpSymbol) -> None:
        if sym.name in self.symbols:
            raise ReplayError(f"symbol {sym.name!r} redefined in {self.scenario}")
        self.symbols[sym.name] = sym
        infs = " ".join(
            f"{f}:{_inf(sym.family[f])}"
            for f in sorted(sym.family)
            if sym.family[f] != EMPTY
        )
        self.lines.append(
            f"step {step_id(step)} {step['op']} -> {sym.name} "
            f"order={sym.order_str()} [{infs}]"
        )

    def cite(self, step: Mapping[str, object]) -> None:
        text = step.get("cite")
        if text:
            self.citations.append((step_id(step), str(text)))
            self.lines.append(f"CITE {step_id(step)} {text}")

    # ---------------------------------------------------------------- steps

    def run(self, steps: Sequence[Mapping[str, object]]) -> None:
        for step in steps:
            handler = getattr(self, "op_" + str(step["op"]), None)
            if handler is None:
                raise ReplayError(f"unknown step op {step['op']!r}")
            try:
                handler(step)
            except (CompositionError, NoProgressError) as exc:
                self.aborted_at = step_id(step)
                self.lines.append(f"ABORT {step_id(step)} {exc}")
                break

    def op_define(self, step: Mapping[str, object]) -> None:
        fam = parse_family(step.get("family", {}), self.rule.faces, self.env)
        order = step.get("order")
        self.put(
            step,
            OpSymbol(
                name=str(step["name"]),
                order=None if order is None else eval_expr(order, self.env),
                family=fam,
                tags=dict(step.get("tags", {})),
            ),
        )
        self.cite(step)

    def op_compose(self, step: Mapping[str, object]) -> None:
        left, right = self.sym(step["left"]), self.sym(step["right"])
        fam = compose_families(self.rule, left.family, right.family, self.h())
        order = (
            None
            if left.order is None or right.order is None
            else left.order + right.order
        )
        self.put(step, OpSymbol(str(step["name"]), order, fam))

    def op_add(self, step: Mapping[str, object]) -> None:
        terms = [self.sym(n) for n in step["terms"]]
        if not terms:
            raise ReplayError("add needs at least one term")
        fam: Family = {f: EMPTY for f in self.rule.faces}
        order: Optional[Fraction] = None
        for t in terms:
            for f in self.rule.faces:
                fam[f] = fam[f].union(t.family[f])
            if t.order is not None:
                order = t.order if order is None else max(order, t.order)
        self.put(step, OpSymbol(str(step["name"]), order, fam))

    def op_adjoint(self, step: Mapping[str, object]) -> None:
        src = self.sym(step["of"])
        fam = adjoint_family(self.space, src.family, self.h())
        self.put(step, OpSymbol(str(step["name"]), src.order, fam))

    def op_conjugate(self, step: Mapping[str, object]) -> None:
        src = self.sym(step["of"])
        power = eval_expr(step.get("power", 1), self.env)
        fam = conjugate_family(self.space, src.family, power)
        self.put(step, OpSymbol(str(step["name"]), src.order, fam))

    def op_scale(self, step: Mapping[str, object]) -> None:
        src = self.sym(step["of"])
        fam = scale_family(
            self.space,
            src.family,
            left_power=eval_expr(step.get("left", 0), self.env),
            right_power=eval_expr(step.get("right", 0), self.env),
        )
        self.put(step, OpSymbol(str(step["name"]), src.order, fam))

    op_multiply = op_scale

    def op_sandwich(self, step: Mapping[str, object]) -> None:
        inner, outer = self.sym(step["inner"]), self.sym(step["outer"])
        h = self.h()
        adj = adjoint_family(self.space, outer.family, h)
        first = compose_families(self.rule, adj, inner.family, h)
        fam = compose_families(self.rule, first, outer.family, h)
        order = (
            None
            if inner.order is None or outer.order is None
            else inner.order + 2 * outer.order
        )
        self.put(step, OpSymbol(str(step["name"]), order, fam))

    def op_remainder(self, step: Mapping[str, object]) -> None:
        src = self.sym(step["of"])
        improves = {
            f: parse_index_set(v, self.env)
            for f, v in step.get("improves", {}).items()
        }
        fam = dict(src.family)
        for f, fine in improves.items():
            coarse = src.family[f].union(NATURALS)
            if self.assertions:
                if not fine.refines(coarse):
                    raise ReplayError(
                        f"remainder improvement at {f} is not finer than "
                        f"{coarse} in {self.scenario}"
                    )
                fam[f] = fine
            else:
                fam[f] = coarse
        order = step.get("order")
        self.put(
            step,
            OpSymbol(
                str(step["name"]),
                None if order is None else eval_expr(order, self.env),
                fam,
            ),
        )
        if self.assertions:
            self.cite(step)
        else:
            self.lines.append(
                f"note {step_id(step)} improvement skipped (assertions off)"
            )

    def op_neumann(self, step: Mapping[str, object]) -> None:
        # Sum of the powers of a remainder.  Iterates are accumulated by
        # plain union until every face either emptied out, deepened past the
        # cutoff, or went stationary in leading order (the regime covered by
        # the cited summation argument).  A face whose leading order ever
        # drops below the first term's witnesses a non-convergent series.
        src = self.sym(step["of"])
        cutoff = self.env.get("cutoff", Fraction(4))
        h = self.h()
        base = src.family
        acc = dict(base)
        prev = base
        for iteration in range(2, 258):
            cur = compose_families(self.rule, prev, base, h)
            cur = {f: _truncate(cur[f], cutoff) for f in cur}
            for f in self.rule.faces:
                if _inf(cur[f]) < _inf(base[f]):
                    raise NoProgressError(
                        f,
                        f"neumann iteration does not deepen at {f}: "
                        f"{_inf(cur[f])} < {_inf(base[f])}",
                    )
            acc = {f: acc[f].union(cur[f]) for f in acc}
            done = all(
                cur[f] == EMPTY
                or _inf(cur[f]) > cutoff
                or _inf(cur[f]) == _inf(prev[f])
                for f in self.rule.faces
            )
            prev = cur
            if done:
                break
        else:
            raise ReplayError(
                f"neumann series did not settle below cutoff {cutoff}"
            )
        self.put(step, OpSymbol(str(step["name"]), src.order, acc))
        self.lines.append(
            f"note {step_id(step)} settled after {iteration} iterations "
            f"(content above {cutoff} truncated)"
        )
        self.cite(step)

    def op_assert(self, step: Mapping[str, object]) -> None:
        target = self.sym(step["target"])
        sid = step_id(step)
        if not self.assertions:
            self.lines.append(f"note {sid} assert skipped (assertions off)")
            return
        if "face" in step:
            face = str(step["face"])
            if face not in self.rule.faces:
                raise ReplayError(f"assert names unknown face {face!r}")
            fine = parse_index_set(step["set"], self.env)
            if not fine.refines(target.family[face]):
                raise ReplayError(
                    f"assert at {sid}: {fine} does not refine "
                    f"{target.family[face]} at {face}"
                )
            target.family[face] = fine
            self.lines.append(f"step {sid} assert {target.name}.{face} -> {fine}")
        if "order" in step:
            new_order = (
                None if step["order"] is None else eval_expr(step["order"], self.env)
            )
            if target.order is not None and (
                new_order is None or new_order <= target.order
            ):
                target.order = new_order
            elif target.order is None and new_order is not None:
                raise ReplayError(f"assert at {sid} would worsen a smoothing order")
            self.lines.append(
                f"step {sid} assert {target.name} order -> {target.order_str()}"
            )
        self.cite(step)

    def op_expect(self, step: Mapping[str, object]) -> None:
        target = self.sym(step["target"])
        kind = str(step["kind"])
        sid = step_id(step)
        face = str(step.get("face", "-"))
        if kind in ("geq", "gt"):
            bound = eval_expr(step["bound"], self.env)
            maxlog = int(step.get("maxlog", 0))
            ok = target.family[face].satisfies_bound(
                bound, max_log=maxlog, strict=(kind == "gt")
            )
        elif kind == "eq":
            want = parse_index_set(step["set"], self.env)
            ok = target.family[face].same_closure(want)
        elif kind == "empty":
            ok = target.family[face] == EMPTY
        elif kind == "order":
            want_order = (
                None if step["value"] is None else eval_expr(step["value"], self.env)
            )
            ok = target.order == want_order
        else:
            raise ReplayError(f"unknown expect kind {kind!r}")
        verdict = "PASS" if ok else "FAIL"
        line = f"EXPECT {self.scenario} {sid} {face} {verdict}"
        self.expect_lines.append(line)
        self.lines.append(line)
        if not ok:
            self.failed.append(sid)


def step_id(step: Mapping[str, object]) -> str:
    if "id" in step:
        return str(step["id"])
    if "name" in step:
        return str(step["name"])
    raise ReplayError(f"step {step!r} needs an id or a name")


def replay(
    scenario: Mapping[str, object],
    h: object = 1,
    overrides: Mapping[str, object] = {},
    assertions: bool = True,
) -> ReplayResult:
    """Replay a scenario script, returning the full deterministic report."""
    ledger = _Ledger(scenario, h, overrides, assertions)
    params = " ".join(f"{k}={ledger.env[k]}" for k in sorted(ledger.env))
    ledger.lines.append(f"scenario {ledger.scenario} rule={scenario['rule']}")
    ledger.lines.append(f"params {params}")
    ledger.lines.append(f"assertions {'on' if assertions else 'off'}")
    ledger.run(scenario.get("steps", ()))
    status = "pass" if (not ledger.failed and ledger.aborted_at is None) else "fail"
    ledger.lines.append(f"RESULT {ledger.scenario} {status}")
    return ReplayResult(
        scenario=ledger.scenario,
        env=ledger.env,
        assertions=assertions,
        lines=ledger.lines,
        expect_lines=ledger.expect_lines,
        failed_expects=ledger.failed,
        aborted_at=ledger.aborted_at,
        citations=ledger.citations,
        symbols=ledger.symbols,
    )
