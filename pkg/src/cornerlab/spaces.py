"""Blown-up corner spaces built from declarative scripts.

A :class:`Space` is a purely combinatorial model of a manifold with corners
obtained from a product of half-spaces by an ordered sequence of blow-ups:

* a list of boundary hypersurfaces (faces),
* the intersection complex (which sets of faces have a common point),
* a valuation table giving, for every face and every tracked monomial ideal,
  the order of vanishing of that ideal on the face,
* an accumulated density weight per face (how a logarithmic volume density
  picks up powers of the defining function through the blow-up sequence).

Two kinds of blow-up centers are supported:

``corner``
    the center is an existing intersection of faces.  The new face inherits
    the sum of the valuations and weights of the faces it separates, and the
    blown-up corner is removed from the complex.

``submanifold``
    the center is an interior-positioned p-submanifold of one or more faces.
    Its valuation profile and weight gain are declared data, as is the list
    of faces it merely meets.  Nothing is removed from the complex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

from .linh import Lin

#: Image marker for faces that a fibration maps onto the whole target.
WHOLE = "whole"

Complex = FrozenSet[FrozenSet[str]]


class SpaceError(ValueError):
    """Raised when a script or operation violates the space invariants."""


class BlowupError(SpaceError):
    """Raised when a blow-up center is invalid at its point in the sequence."""


class FaceImageError(SpaceError):
    """Raised when a fibration fails to map a face onto a target face."""


class LatticeMismatch(SpaceError):
    """Raised when two spaces fail to have isomorphic face lattices."""


@dataclass(frozen=True)
class Blowup:
    """Record of one executed blow-up step."""

    name: str
    kind: str  # "corner" | "submanifold"
    contains: Tuple[str, ...]
    meets: Tuple[str, ...]
    relations: Mapping[str, Tuple[str, ...]]
    complex_before: Complex


@dataclass(frozen=True)
class Space:
    """A corner space with tracked ideals, weights and face complex."""

    name: str
    ideals: Tuple[str, ...]
    ideal_kinds: Mapping[str, str]
    faces: Tuple[str, ...]
    complex: Complex
    valuation: Mapping[str, Mapping[str, int]]
    weight: Mapping[str, Lin]
    blowups: Tuple[Blowup, ...] = ()
    metadata: Mapping[str, object] = field(default_factory=dict)

    # ------------------------------------------------------------------ views

    def vector(self, face: str, ideals: Optional[Sequence[str]] = None) -> Tuple[int, ...]:
        """Valuation vector of ``face`` over ``ideals`` (default: all, declared order)."""
        row = self.valuation[face]
        return tuple(row[i] for i in (ideals if ideals is not None else self.ideals))

    def intersects(self, *faces: str) -> bool:
        return frozenset(faces) in self.complex

    def edges(self) -> Tuple[Tuple[str, str], ...]:
        """Sorted pairs of intersecting faces."""
        pairs = sorted(tuple(sorted(s)) for s in self.complex if len(s) == 2)
        return tuple(pairs)  # type: ignore[return-value]

    def lift_ideal(self, ideal: str) -> Dict[str, int]:
        """Order of vanishing of a tracked ideal on every face."""
        if ideal not in self.ideals:
            raise SpaceError(f"space {self.name} does not track ideal {ideal!r}")
        return {f: self.valuation[f][ideal] for f in self.faces}

    # -------------------------------------------------------------- blow-ups

    def blow_up(
        self,
        name: str,
        contains: Sequence[str],
        profile: Optional[Mapping[str, int]] = None,
        w: Optional[Lin] = None,
        relations: Optional[Mapping[str, str]] = None,
    ) -> "Space":
        """Blow up a center, returning the enlarged space.

        A center with neither ``profile`` nor ``w`` is a corner (the full
        intersection of the ``contains`` faces).  Otherwise it is a
        p-submanifold sitting inside the ``contains`` faces, with declared
        valuation ``profile``, weight gain ``w`` and transversal ``relations``.
        """
        if name in self.faces:
            raise BlowupError(f"face name {name!r} already used in {self.name}")
        relations = {
            key: (value,) if isinstance(value, str) else tuple(value)
            for key, value in (relations or {}).items()
        }
        for f in contains:
            if f not in self.faces:
                raise BlowupError(f"center of {name!r} lies in unknown face {f!r}")
        center = frozenset(contains)
        is_corner = profile is None and w is None
        if (profile is None) != (w is None):
            raise BlowupError(
                f"blow-up {name!r} must declare both profile and w, or neither"
            )

        if is_corner:
            if len(center) < 2:
                raise BlowupError(f"corner center of {name!r} needs >= 2 faces")
            if center not in self.complex:
                raise BlowupError(
                    f"corner center {sorted(center)} of {name!r} is not a face "
                    f"intersection in {self.name}"
                )
            meets = tuple(
                sorted(
                    f
                    for f in self.faces
                    if f not in center and center | {f} in self.complex
                )
            )
        else:
            if center and center not in self.complex:
                raise BlowupError(
                    f"containing faces {sorted(center)} of {name!r} do not intersect"
                )
            meets = tuple(
                sorted(
                    f
                    for f, kinds in relations.items()
                    if f in self.faces and "transversal" in kinds
                )
            )
            for f in meets:
                if center | {f} not in self.complex:
                    raise BlowupError(
                        f"center of {name!r} cannot meet {f!r}: "
                        f"{sorted(center | {f})} is not in the complex"
                    )
            bad = profile.keys() - set(self.ideals) if profile else set()
            if bad:
                raise BlowupError(f"profile of {name!r} names unknown ideals {sorted(bad)}")

        universe = sorted(center | set(meets))
        additions = set()
        for r in range(len(universe) + 1):
            for combo in itertools.combinations(universe, r):
                s = frozenset(combo)
                if is_corner and s >= center:
                    continue
                if (s | center) in self.complex:
                    additions.add(s | {name})
        new_complex = set(self.complex)
        if is_corner:
            new_complex = {s for s in new_complex if not s >= center}
        new_complex |= additions

        if is_corner:
            row = {
                i: sum(self.valuation[f][i] for f in center) for i in self.ideals
            }
            gain = Lin.of(0)
        else:
            row = {i: int((profile or {}).get(i, 0)) for i in self.ideals}
            gain = w if isinstance(w, Lin) else Lin.parse(w)
        accumulated = gain
        for f in contains:
            accumulated = accumulated + self.weight[f]

        valuation = dict(self.valuation)
        valuation[name] = row
        weight = dict(self.weight)
        weight[name] = accumulated
        record = Blowup(
            name=name,
            kind="corner" if is_corner else "submanifold",
            contains=tuple(contains),
            meets=meets,
            relations=relations,
            complex_before=self.complex,
        )
        return Space(
            name=self.name,
            ideals=self.ideals,
            ideal_kinds=self.ideal_kinds,
            faces=self.faces + (name,),
            complex=frozenset(new_complex),
            valuation=valuation,
            weight=weight,
            blowups=self.blowups + (record,),
            metadata=self.metadata,
        )

    # ------------------------------------------------------------- densities

    def density_weight(
        self, convention: str = "b", right_ideals: Sequence[str] = ()
    ) -> Dict[str, Lin]:
        """Per-face exponent table for a lifted density.

        ``b``
            the accumulated logarithmic-density weight of each face.
        ``phi_right``
            the ``b`` weight minus the fibered weight of the single right
            defining function (``right_ideals`` must name it).
        ``composition``
            the ``b`` weight minus the fibered weight of every defining
            function listed in ``right_ideals`` (middle and right factors).
        """
        if convention == "b":
            return {f: self.weight[f] for f in self.faces}
        if convention not in ("phi_right", "composition"):
            raise SpaceError(f"unknown density convention {convention!r}")
        if convention == "phi_right" and len(right_ideals) != 1:
            raise SpaceError("phi_right convention takes exactly one right ideal")
        if not right_ideals:
            raise SpaceError(f"{convention} convention needs right ideals")
        fiber = Lin.parse("h+1")
        out: Dict[str, Lin] = {}
        for f in self.faces:
            total = self.weight[f]
            for ideal in right_ideals:
                total = total - fiber * self.valuation[f][ideal]
            out[f] = total
        return out


# ---------------------------------------------------------------------------
# construction helpers


def base_space(
    name: str,
    ideals: Sequence[Mapping[str, str]],
    base: Sequence[Mapping[str, str]],
    metadata: Optional[Mapping[str, object]] = None,
) -> Space:
    """Product base: one face per entry, disjoint only within a shared factor."""
    ideal_names = tuple(e["name"] for e in ideals)
    if len(set(ideal_names)) != len(ideal_names):
        raise SpaceError(f"duplicate ideal names in {name}")
    kinds = {e["name"]: e.get("kind", "bdf") for e in ideals}
    faces = []
    factor_of = {}
    valuation: Dict[str, Dict[str, int]] = {}
    for entry in base:
        f = entry["name"]
        if f in factor_of:
            raise SpaceError(f"duplicate base face {f!r} in {name}")
        ideal = entry["ideal"]
        if ideal not in ideal_names:
            raise SpaceError(f"base face {f!r} uses unknown ideal {ideal!r}")
        faces.append(f)
        factor_of[f] = entry.get("factor", f)
        valuation[f] = {i: (1 if i == ideal else 0) for i in ideal_names}
    sets = set()
    for r in range(len(faces) + 1):
        for combo in itertools.combinations(faces, r):
            factors = [factor_of[f] for f in combo]
            if len(set(factors)) == len(factors):
                sets.add(frozenset(combo))
    return Space(
        name=name,
        ideals=ideal_names,
        ideal_kinds=kinds,
        faces=tuple(faces),
        complex=frozenset(sets),
        valuation=valuation,
        weight={f: Lin.of(0) for f in faces},
        metadata=dict(metadata or {}),
    )


def run_script(script: Mapping[str, object]) -> Space:
    """Build a space from its declarative script (parsed JSON)."""
    space = base_space(
        name=str(script["name"]),
        ideals=script["ideals"],  # type: ignore[arg-type]
        base=script["base"],  # type: ignore[arg-type]
        metadata=script.get("metadata"),  # type: ignore[arg-type]
    )
    for step in script.get("blowups", ()):  # type: ignore[union-attr]
        profile = step.get("profile")
        w = step.get("w")
        space = space.blow_up(
            name=str(step["name"]),
            contains=list(step.get("contains", ())),
            profile=profile,
            w=Lin.parse(w) if w is not None else None,
            relations=step.get("relations"),
        )
    return space


# ---------------------------------------------------------------------------
# fibrations


@dataclass(frozen=True)
class Fibration:
    """A boundary fibration determined by an ideal pullback map."""

    name: str
    source: Space
    target: Space
    pullback: Mapping[str, str]  # target ideal -> source ideal

    def __post_init__(self) -> None:
        missing = set(self.target.ideals) - set(self.pullback)
        if missing:
            raise SpaceError(
                f"fibration {self.name} lacks pullbacks for {sorted(missing)}"
            )
        unknown = {i for i in self.pullback.values() if i not in self.source.ideals}
        if unknown:
            raise SpaceError(
                f"fibration {self.name} pulls back to unknown ideals {sorted(unknown)}"
            )

    def face_image(self, face: str) -> str:
        """Target face carrying the image of ``face`` (or :data:`WHOLE`)."""
        if face not in self.source.valuation:
            raise FaceImageError(
                f"{self.name}: {face!r} is not a face of {self.source.name}"
            )
        vec = tuple(
            self.source.valuation[face][self.pullback[i]] for i in self.target.ideals
        )
        if not any(vec):
            return WHOLE
        hits = [g for g in self.target.faces if self.target.vector(g) == vec]
        if not hits:
            raise FaceImageError(
                f"{self.name}: face {face!r} has image vector {vec} matching no "
                f"face of {self.target.name}; not a boundary fibration"
            )
        if len(hits) > 1:
            raise FaceImageError(
                f"{self.name}: image vector of {face!r} is ambiguous: {hits}"
            )
        return hits[0]

    def image_table(self) -> Dict[str, str]:
        return {f: self.face_image(f) for f in self.source.faces}


# ---------------------------------------------------------------------------
# lattice comparison


def lattice_iso(a: Space, b: Space) -> Dict[str, str]:
    """Bijection of faces matching valuation vectors and the full complex.

    Raises :class:`LatticeMismatch` with a first-mismatch report when the two
    spaces are not isomorphic as decorated face lattices.
    """
    if set(a.ideals) != set(b.ideals):
        raise LatticeMismatch(
            f"{a.name} tracks ideals {sorted(a.ideals)} but {b.name} tracks "
            f"{sorted(b.ideals)}"
        )
    order = a.ideals
    if len(a.faces) != len(b.faces):
        raise LatticeMismatch(
            f"{a.name} has {len(a.faces)} faces, {b.name} has {len(b.faces)}"
        )

    def classes(space: Space) -> Dict[Tuple[int, ...], list]:
        out: Dict[Tuple[int, ...], list] = {}
        for f in space.faces:
            out.setdefault(space.vector(f, order), []).append(f)
        return out

    ca, cb = classes(a), classes(b)
    for vec in sorted(set(ca) | set(cb)):
        na, nb = len(ca.get(vec, [])), len(cb.get(vec, []))
        if na != nb:
            raise LatticeMismatch(
                f"valuation vector {vec} over {order} appears {na} times in "
                f"{a.name} ({sorted(ca.get(vec, []))}) but {nb} times in "
                f"{b.name} ({sorted(cb.get(vec, []))})"
            )

    vectors = sorted(ca)
    groups = [(ca[v], cb[v]) for v in vectors]

    def try_assign(idx: int, mapping: Dict[str, str]) -> Optional[Dict[str, str]]:
        if idx == len(groups):
            image = {frozenset(mapping[f] for f in s) for s in a.complex}
            return mapping if image == set(b.complex) else None
        fa, fb = groups[idx]
        for perm in itertools.permutations(fb):
            mapping.update(zip(fa, perm))
            found = try_assign(idx + 1, mapping)
            if found is not None:
                return found
        for f in fa:
            mapping.pop(f, None)
        return None

    result = try_assign(0, {})
    if result is None:
        mapping = {}
        for fa, fb in groups:
            mapping.update(zip(fa, sorted(fb)))
        image = {frozenset(mapping[f] for f in s) for s in a.complex}
        only_a = sorted(
            tuple(sorted(s)) for s in image - set(b.complex)
        )
        only_b = sorted(
            tuple(sorted(s)) for s in set(b.complex) - image
        )
        first = only_a[0] if only_a else only_b[0]
        raise LatticeMismatch(
            f"complexes of {a.name} and {b.name} disagree near {first} "
            f"(under the vector-matching {mapping})"
        )
    return {f: result[f] for f in a.faces}


# ---------------------------------------------------------------------------
# reports


def emit_dot(space: Space) -> str:
    """Deterministic text form of the face-intersection graph."""
    lines = [f"node {f}" for f in sorted(space.faces)]
    lines += [f"edge {x} {y}" for x, y in space.edges()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CommuteVerdict:
    commutes: Optional[bool]
    kind: str
    witness: Optional[str] = None

    def __str__(self) -> str:
        if self.commutes is None:
            return "unknown"
        tail = f" via {self.witness}" if self.witness else ""
        return f"commutes ({self.kind}{tail})"


def check_commutes(space: Space, first: str, second: str) -> CommuteVerdict:
    """Whether two recorded blow-ups could be performed in either order.

    Answers come from declared relations between the centers (``disjoint``,
    ``nested``, ``transversal`` or ``normal_form:<witness>`` where the witness
    names a later blow-up of the common intersection), or from the safe
    observation that the later center does not meet the earlier front face.
    """
    records = {r.name: r for r in space.blowups}
    if first not in records or second not in records:
        missing = [n for n in (first, second) if n not in records]
        raise SpaceError(f"{space.name} has no blow-up named {missing[0]!r}")
    a, b = records[first], records[second]
    if space.faces.index(a.name) > space.faces.index(b.name):
        a, b = b, a
    declared = b.relations.get(a.name, ()) + a.relations.get(b.name, ())
    for kind in declared:
        if kind.startswith("normal_form:"):
            witness = kind.split(":", 1)[1]
            later = [r.name for r in space.blowups]
            if witness in later and later.index(witness) > later.index(b.name):
                return CommuteVerdict(True, "normal_form_with_intersection", witness)
            return CommuteVerdict(
                None, f"normal_form witness {witness!r} not blown up afterwards"
            )
    for kind in declared:
        if kind in ("disjoint", "nested"):
            return CommuteVerdict(True, kind)
    center_b = frozenset(b.contains)
    if a.name not in center_b and (center_b | {a.name}) not in b.complex_before:
        return CommuteVerdict(True, "disjoint")
    return CommuteVerdict(None, "no declared relation")
