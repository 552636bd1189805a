"""Composition rules for boundary-expanded operator calculi.

A :class:`CalculusRule` records, for every boundary face of a double space,
which pairs of factor faces contribute to the composite there and with what
exact order shift, together with the integrability and support conditions
under which the formula holds.  Rules are either *derived* — read off
mechanically from a triple space, its three boundary fibrations and the
density bookkeeping — or *stated* as standalone tables.

Composing two index families through a rule is then a fold of shifted sums
under the extended union, one clause list per target face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .indexsets import EMPTY, NATURALS, IndexSet, extended_union
from .linh import Lin
from .params import eval_expr
from .spaces import WHOLE, Fibration, Space

Family = Dict[str, IndexSet]


class RuleError(ValueError):
    """Raised when a rule cannot be derived or applied."""


class CompositionError(RuleError):
    """Raised when a composition violates the rule's preconditions."""

    def __init__(self, message: str, condition: str = "") -> None:
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class Clause:
    """One contribution ``E[left] + F[right] + shift`` to a target face.

    ``left``/``right`` of ``None`` mean the corresponding factor is smooth
    there (the whole space on that side), contributing a plain Taylor series.
    """

    left: Optional[str]
    right: Optional[str]
    shift: Lin

    def sort_key(self) -> Tuple[str, str, str]:
        return (self.left or "", self.right or "", str(self.shift))

    def render(self) -> str:
        parts = []
        if self.left is not None:
            parts.append(f"E[{self.left}]")
        if self.right is not None:
            parts.append(f"F[{self.right}]")
        if not parts:
            parts.append("N")
        expr = "+".join(parts)
        if self.shift:
            s = str(self.shift)
            expr += s if s.startswith("-") else "+" + s
        return expr


@dataclass(frozen=True)
class CalculusRule:
    """Clause table of a composition law on a double space."""

    name: str
    space: str
    faces: Tuple[str, ...]
    clauses: Mapping[str, Tuple[Clause, ...]]
    integrability: Tuple[Clause, ...] = ()
    requires_nonneg: Tuple[Tuple[str, str], ...] = ()  # (side, face)
    requires_empty: Tuple[Tuple[str, str], ...] = ()  # (side, face)
    origin: str = "stated"

    def render(self) -> str:
        """Deterministic delimited table of the rule."""
        rows: List[Tuple[str, str, str]] = []
        for face in self.faces:
            entries = self.clauses.get(face, ())
            if not entries:
                rows.append(("empty", face, ""))
            for cl in entries:
                rows.append(("clause", face, cl.render()))
        for cl in self.integrability:
            rows.append(("condition", "*", cl.render() + ">0"))
        for side, face in self.requires_nonneg:
            tag = "E" if side == "left" else "F"
            rows.append(("condition", "*", f"{tag}[{face}]>=0"))
        for side, face in self.requires_empty:
            tag = "E" if side == "left" else "F"
            rows.append(("condition", "*", f"{tag}[{face}]=0"))
        lines = ["\t".join(r) for r in sorted(set(rows))]
        return "\n".join(lines) + "\n"


def substitute_h(rule: CalculusRule, h) -> CalculusRule:
    """The same rule with every symbolic shift evaluated at a concrete h."""

    def fix(cl: Clause) -> Clause:
        return Clause(cl.left, cl.right, Lin.of(cl.shift.at(h)))

    return CalculusRule(
        name=rule.name,
        space=rule.space,
        faces=rule.faces,
        clauses={g: tuple(fix(cl) for cl in cs) for g, cs in rule.clauses.items()},
        integrability=tuple(fix(cl) for cl in rule.integrability),
        requires_nonneg=rule.requires_nonneg,
        requires_empty=rule.requires_empty,
        origin=rule.origin,
    )


def equal_rules(a: CalculusRule, b: CalculusRule) -> bool:
    """Clause-for-clause equality, ignoring the order of extended unions."""
    if a.space != b.space or set(a.faces) != set(b.faces):
        return False
    for face in a.faces:
        if set(a.clauses.get(face, ())) != set(b.clauses.get(face, ())):
            return False
    return (
        set(a.integrability) == set(b.integrability)
        and set(a.requires_nonneg) == set(b.requires_nonneg)
        and set(a.requires_empty) == set(b.requires_empty)
    )


def rule_diff(a: CalculusRule, b: CalculusRule) -> str:
    """Human-readable first differences between two rules."""
    out = []
    if a.space != b.space:
        out.append(f"spaces differ: {a.space} vs {b.space}")
    for face in sorted(set(a.faces) | set(b.faces)):
        sa = {c.render() for c in a.clauses.get(face, ())}
        sb = {c.render() for c in b.clauses.get(face, ())}
        if sa != sb:
            out.append(f"{face}: only-{a.name}={sorted(sa - sb)} only-{b.name}={sorted(sb - sa)}")
    ia = {c.render() for c in a.integrability}
    ib = {c.render() for c in b.integrability}
    if ia != ib:
        out.append(f"conditions: only-{a.name}={sorted(ia - ib)} only-{b.name}={sorted(ib - ia)}")
    return "; ".join(out) if out else "identical"


# ---------------------------------------------------------------------------
# derivation from a triple space


def derive_composition_rule(
    triple: Space,
    left: Fibration,
    center: Fibration,
    right: Fibration,
    name: Optional[str] = None,
) -> CalculusRule:
    """Read a composition rule off a triple space and its three fibrations.

    Every boundary face of the triple space contributes the pair of its
    left- and right-projection images, weighted by the face's composition
    density exponent.  Contributions are grouped by the image under the
    outer projection; faces projecting onto the whole target become
    integrability conditions instead.  Shifts are renormalized so that the
    result is expressed for right-density-normalized kernels on the target.
    """
    target = center.target
    if left.target is not target or right.target is not target:
        raise RuleError("the three fibrations must share one target space")
    right_bdf = target.metadata.get("right_bdf")
    if not isinstance(right_bdf, str):
        raise RuleError(f"target {target.name} lacks right_bdf metadata")
    mw = triple.density_weight(
        "composition",
        right_ideals=(left.pullback[right_bdf], right.pullback[right_bdf]),
    )
    renorm = {
        g: Lin.parse("h+1") * target.valuation[g][right_bdf] - target.weight[g]
        for g in target.faces
    }

    clauses: Dict[str, List[Clause]] = {g: [] for g in target.faces}
    conditions: List[Clause] = []
    for face in triple.faces:
        gl = left.face_image(face)
        gc = center.face_image(face)
        gr = right.face_image(face)
        l = None if gl == WHOLE else gl
        r = None if gr == WHOLE else gr
        if gc == WHOLE:
            conditions.append(Clause(l, r, mw[face]))
        else:
            clauses[gc].append(Clause(l, r, mw[face] + renorm[gc]))
    return CalculusRule(
        name=name or f"derived_{target.name}",
        space=target.name,
        faces=target.faces,
        clauses={g: tuple(sorted(set(cs), key=Clause.sort_key)) for g, cs in clauses.items()},
        integrability=tuple(sorted(set(conditions), key=Clause.sort_key)),
        origin="derived",
    )


# ---------------------------------------------------------------------------
# stated rules


def _table(
    name: str,
    space: str,
    faces: Sequence[str],
    rows: Mapping[str, Sequence[Tuple[Optional[str], Optional[str], str]]],
    integrability: Sequence[Tuple[Optional[str], Optional[str], str]] = (),
    requires_nonneg: Sequence[Tuple[str, str]] = (),
    requires_empty: Sequence[Tuple[str, str]] = (),
) -> CalculusRule:
    def mk(t: Tuple[Optional[str], Optional[str], str]) -> Clause:
        return Clause(t[0], t[1], Lin.parse(t[2]))

    return CalculusRule(
        name=name,
        space=space,
        faces=tuple(faces),
        clauses={g: tuple(sorted({mk(t) for t in ts}, key=Clause.sort_key)) for g, ts in rows.items()},
        integrability=tuple(sorted({mk(t) for t in integrability}, key=Clause.sort_key)),
        requires_nonneg=tuple(requires_nonneg),
        requires_empty=tuple(requires_empty),
        origin="stated",
    )


def rule_phi18b() -> CalculusRule:
    """Composition on the fibered double space, right-density normalized."""
    return _table(
        "phi18b",
        "m2_phi",
        ("lf", "rf", "phibf", "ff"),
        {
            "lf": [("lf", None, "0"), ("phibf", "lf", "-h-1"), ("ff", "lf", "0")],
            "rf": [(None, "rf", "0"), ("rf", "phibf", "-h-1"), ("rf", "ff", "0")],
            "phibf": [
                ("lf", "rf", "0"),
                ("phibf", "phibf", "-h-1"),
                ("phibf", "ff", "0"),
                ("ff", "phibf", "0"),
            ],
            "ff": [("ff", "ff", "0"), ("phibf", "phibf", "-h-1"), ("lf", "rf", "0")],
        },
        integrability=[("rf", "lf", "-h-1")],
    )


def rule_com12b() -> CalculusRule:
    """Composition on the energy-resolved fibered double space."""
    return _table(
        "com12b",
        "m2_kphi",
        ("lf", "rf", "zf", "phibf", "ff", "phibf0", "ff0", "lf0", "rf0"),
        {
            "zf": [("zf", "zf", "0"), ("rf0", "lf0", "-h-1")],
            "lf0": [("lf0", "zf", "0"), ("phibf0", "lf0", "-h-1"), ("ff0", "lf0", "0")],
            "rf0": [("zf", "rf0", "0"), ("rf0", "phibf0", "-h-1"), ("rf0", "ff0", "0")],
            "lf": [("lf", None, "0"), ("phibf", "lf", "-h-1"), ("ff", "lf", "0")],
            "rf": [(None, "rf", "0"), ("rf", "phibf", "-h-1"), ("rf", "ff", "0")],
            "ff0": [
                ("ff0", "ff0", "0"),
                ("phibf0", "phibf0", "-h-1"),
                ("lf0", "rf0", "0"),
            ],
            "phibf0": [
                ("phibf0", "phibf0", "-h-1"),
                ("ff0", "phibf0", "0"),
                ("phibf0", "ff0", "0"),
                ("lf0", "rf0", "0"),
            ],
            "ff": [("ff", "ff", "0"), ("phibf", "phibf", "-h-1"), ("lf", "rf", "0")],
            "phibf": [
                ("phibf", "phibf", "-h-1"),
                ("ff", "phibf", "0"),
                ("phibf", "ff", "0"),
                ("lf", "rf", "0"),
            ],
        },
        integrability=[("rf", "lf", "-h-1")],
    )


def rule_com14b() -> CalculusRule:
    """Composition on the transition double space, for operators supported
    away from the three energy-positive boundary faces."""
    return _table(
        "com14b",
        "m2_t",
        ("lf", "rf", "zf", "bf", "bf0", "sc", "lf0", "rf0"),
        {
            "sc": [("sc", "sc", "0")],
            "zf": [("zf", "zf", "0"), ("rf0", "lf0", "0")],
            "bf0": [("lf0", "rf0", "0"), ("bf0", "bf0", "0")],
            "lf0": [("lf0", "zf", "0"), ("bf0", "lf0", "0")],
            "rf0": [("zf", "rf0", "0"), ("rf0", "bf0", "0")],
            "bf": [],
            "lf": [],
            "rf": [],
        },
        requires_nonneg=[("left", "sc"), ("right", "sc")],
        requires_empty=[
            ("left", "bf"),
            ("left", "lf"),
            ("left", "rf"),
            ("right", "bf"),
            ("right", "lf"),
            ("right", "rf"),
        ],
    )


def rule_cone_bsc() -> CalculusRule:
    """Composition on the model-cone double space with b-densities."""
    return _table(
        "cone_bsc",
        "cone_ybsc",
        ("lf0", "rf0", "lfinf", "rfinf", "fb0", "fbinf", "sc"),
        {
            "sc": [("sc", "sc", "0")],
            "fb0": [("fb0", "fb0", "0"), ("lf0", "rf0", "0")],
            "lf0": [("lf0", None, "0"), ("fb0", "lf0", "0")],
            "rf0": [(None, "rf0", "0"), ("rf0", "fb0", "0")],
            "fbinf": [("fbinf", "fbinf", "0"), ("lfinf", "rfinf", "0")],
            "lfinf": [("lfinf", None, "0"), ("fbinf", "lfinf", "0")],
            "rfinf": [(None, "rfinf", "0"), ("rfinf", "fbinf", "0")],
        },
        integrability=[("rf0", "lf0", "0")],
    )


_STATED = {
    "phi18b": rule_phi18b,
    "com12b": rule_com12b,
    "com14b": rule_com14b,
    "cone_bsc": rule_cone_bsc,
}

#: triple-space recipes for the rules that can be derived mechanically
DERIVATIONS = {
    "phi18b": ("m3_phi", "phi3_l", "phi3_c", "phi3_r"),
    "com12b": ("m3_kphi", "kphi3_l", "kphi3_c", "kphi3_r"),
}


def rule_names() -> List[str]:
    return sorted(_STATED)


def stated_rule(name: str) -> CalculusRule:
    try:
        return _STATED[name]()
    except KeyError:
        raise RuleError(f"no rule named {name!r}; available: {rule_names()}") from None


def derived_rule(name: str) -> CalculusRule:
    from . import catalog

    if name not in DERIVATIONS:
        raise RuleError(
            f"rule {name!r} has no triple-space derivation; "
            f"derivable: {sorted(DERIVATIONS)}"
        )
    triple, fl, fc, fr = DERIVATIONS[name]
    rule = derive_composition_rule(
        catalog.load_space(triple),
        catalog.load_fibration(fl),
        catalog.load_fibration(fc),
        catalog.load_fibration(fr),
        name=name,
    )
    return rule


# ---------------------------------------------------------------------------
# applying rules


def normalize_family(faces: Sequence[str], fam: Mapping[str, IndexSet]) -> Family:
    unknown = set(fam) - set(faces)
    if unknown:
        raise RuleError(f"family names unknown faces {sorted(unknown)}")
    return {f: fam.get(f, EMPTY) for f in faces}


def compose_families(
    rule: CalculusRule,
    left: Mapping[str, IndexSet],
    right: Mapping[str, IndexSet],
    h: Fraction,
) -> Family:
    """Compose two index families through a rule at an exact fiber dimension.

    Raises :class:`CompositionError` when a support or integrability
    precondition fails, naming the offending condition and margin.
    """
    E = normalize_family(rule.faces, left)
    F = normalize_family(rule.faces, right)

    def side(tag: str) -> Family:
        return E if tag == "left" else F

    for tag, face in rule.requires_empty:
        if side(tag)[face] != EMPTY:
            raise CompositionError(
                f"rule {rule.name} needs the {tag} family trivial at {face}, "
                f"got {side(tag)[face]}",
                condition=f"{tag}:{face}=0",
            )
    for tag, face in rule.requires_nonneg:
        inf = side(tag)[face].inf_re()
        if inf < 0:
            raise CompositionError(
                f"rule {rule.name} needs the {tag} family nonnegative at "
                f"{face}, got leading order {inf}",
                condition=f"{tag}:{face}>=0",
            )
    for cond in rule.integrability:
        inf_l = E[cond.left].inf_re() if cond.left else Fraction(0)
        inf_r = F[cond.right].inf_re() if cond.right else Fraction(0)
        margin = inf_l + inf_r + cond.shift.at(h)
        if not margin > 0:
            raise CompositionError(
                f"rule {rule.name} integrability fails: "
                f"inf Re({cond.render()}) = {margin} is not > 0",
                condition=cond.render() + ">0",
            )

    out: Family = {}
    for face in rule.faces:
        pieces = []
        for cl in rule.clauses.get(face, ()):
            el = E[cl.left] if cl.left else NATURALS
            fr = F[cl.right] if cl.right else NATURALS
            pieces.append((el + fr).shift(cl.shift.at(h)))
        out[face] = extended_union(*pieces)
    return out


def mapping_family(
    E: Mapping[str, IndexSet], f_set: IndexSet, h: Fraction
) -> IndexSet:
    """Expansion of a fibered-type operator applied to an expanded function.

    The operator's index family lives on the fibered double space; the
    function's index set describes its boundary expansion.  Requires the
    integral to converge at the right face.
    """
    fam = normalize_family(("lf", "rf", "phibf", "ff"), E)
    margin = fam["rf"].inf_re() + f_set.inf_re() - (h + 1)
    if not margin > 0:
        raise CompositionError(
            f"mapping integrability fails: inf Re(E[rf]+f)-h-1 = {margin} "
            "is not > 0",
            condition="E[rf]+f-h-1>0",
        )
    return extended_union(
        fam["lf"],
        fam["ff"] + f_set,
        (fam["phibf"] + f_set).shift(-(h + 1)),
    )


# ---------------------------------------------------------------------------
# adjoints, conjugation, scaling


def _swap_face(space: Space, face: str) -> str:
    swap = space.metadata.get("swap")
    if not isinstance(swap, Mapping):
        raise RuleError(f"space {space.name} declares no factor swap")
    order = space.ideals
    target = tuple(space.valuation[face][swap[i]] for i in order)
    hits = [g for g in space.faces if space.vector(g) == target]
    if len(hits) != 1:
        raise RuleError(f"factor swap is not a face involution at {face!r}: {hits}")
    return hits[0]


def adjoint_family(space: Space, fam: Mapping[str, IndexSet], h: Fraction) -> Family:
    """Index family of the formal adjoint on a double space.

    Faces are exchanged under the factor swap; with fibered right-density
    normalization the order additionally shifts by the fibered codimension
    times the difference of right and left vanishing orders.
    """
    full = normalize_family(space.faces, fam)
    phi_type = space.metadata.get("density_convention") == "phi"
    left = space.metadata.get("left_bdf")
    right = space.metadata.get("right_bdf")
    out: Family = {}
    for face in space.faces:
        source = _swap_face(space, face)
        s = full[source]
        if phi_type:
            delta = (h + 1) * (
                space.valuation[face][right] - space.valuation[face][left]
            )
            s = s.shift(delta)
        out[face] = s
    return out


def scale_family(
    space: Space,
    fam: Mapping[str, IndexSet],
    left_power: Fraction = Fraction(0),
    right_power: Fraction = Fraction(0),
) -> Family:
    """Multiply an operator kernel by (left bdf)^a (right bdf)^b."""
    full = normalize_family(space.faces, fam)
    left = space.metadata.get("left_bdf")
    right = space.metadata.get("right_bdf")
    out: Family = {}
    for face in space.faces:
        delta = (
            left_power * space.valuation[face][left]
            + right_power * space.valuation[face][right]
        )
        out[face] = full[face].shift(delta)
    return out


def conjugate_family(
    space: Space, fam: Mapping[str, IndexSet], power: Fraction
) -> Family:
    """Conjugate by the a-th power of the boundary defining function."""
    return scale_family(space, fam, left_power=-power, right_power=power)


# ---------------------------------------------------------------------------
# multiplicativity of normal-operator restrictions


def normal_restriction_check(
    left: Mapping[str, IndexSet],
    right: Mapping[str, IndexSet],
    h: Fraction,
    face: str,
) -> Tuple[bool, List[Tuple[str, bool]]]:
    """Conditions under which restriction to a model face is multiplicative.

    Supported faces of the energy-resolved fibered double space: ``zf``,
    ``ff0`` and ``ff``.  Returns overall verdict plus each condition with
    its outcome.
    """
    E = normalize_family(rule_com12b().faces, left)
    F = normalize_family(rule_com12b().faces, right)

    def geq0(side: Family, f: str) -> Tuple[str, bool]:
        tag = "E" if side is E else "F"
        return f"inf Re {tag}[{f}] >= 0", side[f].inf_re() >= 0

    def gt(f1: str, f2: str, bound: Fraction) -> Tuple[str, bool]:
        val = E[f1].inf_re() + F[f2].inf_re()
        label = f"inf Re(E[{f1}]+F[{f2}]) > {bound}"
        return label, val > bound

    if face == "zf":
        checks = [
            geq0(E, "zf"),
            geq0(F, "zf"),
            gt("rf", "lf", h + 1),
            gt("rf0", "lf0", h + 1),
        ]
    elif face == "ff0":
        checks = [
            geq0(E, "ff0"),
            geq0(F, "ff0"),
            gt("phibf0", "phibf0", h + 1),
            gt("lf0", "rf0", Fraction(0)),
            gt("ff", "lf", h + 1),
        ]
    elif face == "ff":
        checks = [
            geq0(E, "ff"),
            geq0(F, "ff"),
            gt("phibf", "phibf", h + 1),
            gt("rf", "lf", h + 1),
            gt("lf", "rf", Fraction(0)),
        ]
    else:
        raise RuleError(f"no multiplicativity conditions known for face {face!r}")
    return all(ok for _, ok in checks), checks


# ---------------------------------------------------------------------------
# family (de)serialization


def parse_index_set(
    data: object, env: Mapping[str, Fraction] = {}
) -> IndexSet:
    """Index set from JSON-ish data.

    ``"naturals"`` is the full Taylor series; otherwise a list of
    generators, each an exponent expression or an ``[exponent, logorder]``
    pair; exponents evaluate through the parameter environment.
    """
    if data == "naturals":
        return NATURALS
    if not isinstance(data, (list, tuple)):
        raise RuleError(f"cannot parse index set from {data!r}")
    gens = []
    for item in data:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise RuleError(f"bad generator {item!r}")
            gens.append((eval_expr(item[0], env), int(item[1])))
        else:
            gens.append((eval_expr(item, env), 0))
    return IndexSet.of(*gens)


def parse_family(
    data: Mapping[str, object],
    faces: Sequence[str],
    env: Mapping[str, Fraction] = {},
) -> Family:
    fam = {f: parse_index_set(v, env) for f, v in data.items()}
    return normalize_family(faces, fam)


def render_family(faces: Sequence[str], fam: Mapping[str, IndexSet]) -> str:
    """Deterministic delimited table of a family over the given faces."""
    full = normalize_family(faces, fam)
    lines = [f"{f}\t{full[f]}" for f in sorted(faces)]
    return "\n".join(lines) + "\n"
