"""Indicial roots of fibered boundary operators, exactly and numerically.

The vertical data of a geometric operator is summarized by a *spectral
dataset*: the fiber dimension ``h``, the Betti numbers of the fiber, and the
nonzero spectra of the exact Laplacian blocks degree by degree.  From such a
dataset the indicial roots at the fibered corner are produced in exact
surd form (``a + s*sqrt(r)`` with rational ``a, r``), together with an
independent numerical route that assembles the small matrix blocks and takes
generalized eigenvalues with numpy.

Condition checkers decide the spectral hypotheses that the low-energy
constructions need (no roots in the critical weight window), and a numerical
probe integrates the model Bessel equation to exhibit the decay rate that
the membership verdicts rest on.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .params import eval_expr


class SpectralError(ValueError):
    """Raised for malformed spectral datasets."""


# --------------------------------------------------------------------------
# exact surds


def _fold_square(r: Fraction) -> Optional[Fraction]:
    """The exact rational square root of ``r``, or None."""
    if r < 0:
        raise SpectralError(f"negative radicand {r}")
    pnum = math.isqrt(r.numerator)
    pden = math.isqrt(r.denominator)
    if pnum * pnum == r.numerator and pden * pden == r.denominator:
        return Fraction(pnum, pden)
    return None


@dataclass(frozen=True)
class Surd:
    """Exact number of the form ``a + s*sqrt(r)`` with rational a, r >= 0."""

    a: Fraction
    s: int = 0
    r: Fraction = Fraction(0)

    @staticmethod
    def rational(x) -> "Surd":
        return Surd(Fraction(x))

    @staticmethod
    def root(a, s: int, r) -> "Surd":
        a, r = Fraction(a), Fraction(r)
        if s == 0 or r == 0:
            return Surd(a)
        exact = _fold_square(r)
        if exact is not None:
            return Surd(a + s * exact)
        return Surd(a, 1 if s > 0 else -1, r)

    # -- arithmetic closed under rational shifts and negation

    def __neg__(self) -> "Surd":
        return Surd(-self.a, -self.s, self.r)

    def shifted(self, c) -> "Surd":
        return Surd(self.a + Fraction(c), self.s, self.r)

    def conjugate_root(self) -> "Surd":
        """The partner under ``lam -> -1 - lam``."""
        return (-self).shifted(-1)

    # -- exact comparison (normalized surds are equal iff identical)

    def _bounds(self, scale: int) -> Tuple[Fraction, Fraction]:
        if self.s == 0:
            return self.a, self.a
        n = self.r.numerator * self.r.denominator
        lo = math.isqrt(n * scale * scale)
        lo_f = Fraction(lo, self.r.denominator * scale)
        hi_f = Fraction(lo + 1, self.r.denominator * scale)
        if self.s > 0:
            return self.a + lo_f, self.a + hi_f
        return self.a - hi_f, self.a - lo_f

    def __lt__(self, other) -> bool:
        if not isinstance(other, Surd):
            other = Surd.rational(other)
        if self == other:
            return False
        scale = 10
        while True:
            lo1, hi1 = self._bounds(scale)
            lo2, hi2 = other._bounds(scale)
            if hi1 < lo2:
                return True
            if hi2 < lo1:
                return False
            scale *= 10

    def __le__(self, other) -> bool:
        if not isinstance(other, Surd):
            other = Surd.rational(other)
        return self == other or self < other

    def __float__(self) -> float:
        return float(self.a) + self.s * math.sqrt(float(self.r))

    def __str__(self) -> str:
        if self.s == 0:
            return str(self.a)
        root = f"sqrt({self.r})"
        if self.a == 0:
            return root if self.s > 0 else "-" + root
        return f"{self.a}{'+' if self.s > 0 else '-'}{root}"


# --------------------------------------------------------------------------
# spectral datasets


def normalize_dataset(data: Mapping[str, object]) -> Dict[str, object]:
    """Canonical form: integer degree keys, Fraction eigenvalues, sorted."""
    if "h" not in data:
        raise SpectralError("dataset needs the fiber dimension h")
    h = int(data["h"])
    if h < 1:
        raise SpectralError("fiber dimension h must be at least 1")
    raw_betti = data.get("betti", {})
    if isinstance(raw_betti, (list, tuple)):
        raw_betti = dict(enumerate(raw_betti))
    betti: Dict[int, int] = {}
    for q, b in dict(raw_betti).items():
        q, b = int(q), int(b)
        if not 0 <= q <= h:
            raise SpectralError(f"betti degree {q} outside 0..{h}")
        if b < 0:
            raise SpectralError("betti numbers must be nonnegative")
        if b:
            betti[q] = b
    # The same block family can be written from either side: the exact block
    # on q-forms equals the coexact block on (q-1)-forms.  Each field states
    # a lower bound on the block multiplicities, so entries merge by maximum.
    counted: Dict[int, Counter] = {}
    for field, shift, lo, hi in (
        ("spec_d_delta", 0, 1, h),
        ("spec_delta_d", 1, 0, h - 1),
    ):
        for q, values in dict(data.get(field, {})).items():
            q = int(q)
            if not lo <= q <= hi:
                raise SpectralError(f"{field} degree {q} outside {lo}..{hi}")
            zetas = Counter(eval_expr(v, {}) for v in values)
            if any(z <= 0 for z in zetas):
                raise SpectralError("listed eigenvalues must be positive")
            counted[q + shift] = counted.get(q + shift, Counter()) | zetas
    spec: Dict[int, Tuple[Fraction, ...]] = {
        q: tuple(sorted(c.elements())) for q, c in counted.items() if c
    }
    return {"h": h, "betti": betti, "spec_d_delta": spec}


def spec_d_delta(data: Mapping[str, object], q) -> Tuple[Fraction, ...]:
    """Nonzero spectrum of d-delta on q-forms of the fiber."""
    if q != int(q):
        return ()
    return tuple(data["spec_d_delta"].get(int(q), ()))


def spec_delta_d(data: Mapping[str, object], q) -> Tuple[Fraction, ...]:
    """Nonzero spectrum of delta-d on q-forms (= next exact block)."""
    if q != int(q):
        return ()
    return spec_d_delta(data, int(q) + 1)


def betti(data: Mapping[str, object], q) -> int:
    if q != int(q):
        return 0
    return int(data["betti"].get(int(q), 0))


def laplace_spectrum(data: Mapping[str, object], q) -> Tuple[Fraction, ...]:
    """Full form-Laplacian spectrum on q-forms, zero included if harmonic."""
    zero = (Fraction(0),) * betti(data, q)
    return tuple(sorted(zero + spec_d_delta(data, q) + spec_delta_d(data, q)))


def scale_spectra(data: Mapping[str, object], t) -> Dict[str, object]:
    """Metric rescaling: every Laplacian eigenvalue is multiplied by t."""
    t = Fraction(t)
    if t <= 0:
        raise SpectralError("scale factor must be positive")
    return {
        "h": data["h"],
        "betti": dict(data["betti"]),
        "spec_d_delta": {
            q: tuple(t * z for z in zetas)
            for q, zetas in data["spec_d_delta"].items()
        },
    }


# --------------------------------------------------------------------------
# exact indicial roots


def hodge_indicial_roots(data: Mapping[str, object]) -> List[Tuple[Surd, int]]:
    """Indicial roots at the fibered corner, with multiplicities.

    Harmonic fiber forms in degree q contribute the rational pair
    ``q - (h+1)/2`` and ``-(q - (h-1)/2)``; each eigenvalue ``zeta`` of the
    exact block on q-forms contributes ``l +- sqrt(zeta + (q-(h+1)/2)^2)``
    for both offsets ``l = 0`` and ``l = -1``.
    """
    h = data["h"]
    counts: Dict[Surd, int] = {}

    def put(root: Surd, mult: int) -> None:
        counts[root] = counts.get(root, 0) + mult

    for q, b in sorted(data["betti"].items()):
        put(Surd.rational(Fraction(2 * q - (h + 1), 2)), b)
        put(Surd.rational(-Fraction(2 * q - (h - 1), 2)), b)
    for q, zetas in sorted(data["spec_d_delta"].items()):
        offset = Fraction(2 * q - (h + 1), 2)
        for zeta in zetas:
            rad = zeta + offset * offset
            for ell in (0, -1):
                put(Surd.root(ell, +1, rad), 1)
                put(Surd.root(ell, -1, rad), 1)
    return sorted(counts.items(), key=lambda kv: (float(kv[0]), str(kv[0])))


def dirac_indicial_roots(spec: Iterable) -> List[Fraction]:
    """Indicial roots of the split Dirac model from its vertical spectrum.

    The vertical operator anticommutes with the boundary chirality, so its
    spectrum must be symmetric under ``mu -> -mu``; each eigenvalue ``mu``
    then contributes the single root ``mu - 1/2``.
    """
    values = [eval_expr(v, {}) for v in spec]
    if Counter(values) != Counter(-v for v in values):
        raise SpectralError("vertical spectrum must be symmetric under mu -> -mu")
    return sorted({mu - Fraction(1, 2) for mu in values})


def roots_symmetric(roots: Iterable[Tuple[Surd, int]]) -> bool:
    """True when the root multiset is invariant under ``lam -> -1-lam``."""
    table = {root: mult for root, mult in roots}
    return all(
        table.get(root.conjugate_root(), 0) == mult for root, mult in table.items()
    )


# --------------------------------------------------------------------------
# numerical oracle


def roots_oracle(data: Mapping[str, object]) -> np.ndarray:
    """Indicial roots recomputed as generalized eigenvalues of small blocks.

    The indicial family is linear in the root, ``I(lam) = A + lam*B`` with
    invertible ``B``, so its roots are the eigenvalues of ``-B^{-1}A``.  The
    harmonic block in degree q is two-by-two; each exact eigenvalue pairs a
    coexact (q-1)-form with its differential into a four-by-four block.
    """
    h = float(data["h"])
    out: List[float] = []
    for q, b in sorted(data["betti"].items()):
        c1 = (h - 1) / 2 - q
        c2 = (h + 1) / 2 - q
        A = np.array([[0.0, c1], [c2, 0.0]])
        B = np.array([[0.0, -1.0], [1.0, 0.0]])
        eig = np.linalg.eigvals(-np.linalg.solve(B, A))
        out.extend(list(np.real(eig)) * b)
    for q, zetas in sorted(data["spec_d_delta"].items()):
        ny = np.diag([q - 1.0, float(q)])
        ident = np.eye(2)
        for zeta in zetas:
            d = np.array([[0.0, float(zeta)], [1.0, 0.0]])
            c1 = (h - 1) / 2 * ident - ny
            c2 = (h + 1) / 2 * ident - ny
            A = np.block([[d, c1], [c2, -d]])
            B = np.block([[np.zeros((2, 2)), -ident], [ident, np.zeros((2, 2))]])
            eig = np.linalg.eigvals(-np.linalg.solve(B, A))
            out.extend(np.real(eig))
    return np.sort(np.array(out))


def expand_roots(roots: Sequence[Tuple[Surd, int]]) -> np.ndarray:
    """Exact roots flattened to a sorted float multiset."""
    values: List[float] = []
    for root, mult in roots:
        values.extend([float(root)] * mult)
    return np.sort(np.array(values))


# --------------------------------------------------------------------------
# weight-window checkers


def gap_radius(roots: Sequence[Tuple[Surd, int]]) -> Optional[Surd]:
    """Supremum eps with the open window (-1-eps, eps) root-free.

    The window is symmetric about -1/2, matching the root symmetry, so each
    root keeps it clear up to the margin ``max(root, -1-root)``; the radius
    is the least margin.  ``None`` means no roots at all (unbounded radius);
    a root inside [-1, 0] forces a nonpositive radius.
    """
    best: Optional[Surd] = None
    for root, _ in roots:
        margin = max(root, root.conjugate_root())
        if best is None or margin < best:
            best = margin
    return best


def critical_gap(roots: Sequence[Tuple[Surd, int]], eps) -> bool:
    """Exact test that no root lies in the open interval (-1-eps, eps)."""
    eps = Fraction(eps)
    if eps <= 0:
        raise SpectralError("the window halfwidth eps must be positive")
    radius = gap_radius(roots)
    return radius is None or Surd.rational(eps) <= radius


def find_critical_eps(roots: Sequence[Tuple[Surd, int]]) -> Optional[Fraction]:
    """A positive rational halfwidth accepted by critical_gap, or None.

    Found by exact halving from 1 against the surd-valued radius, so the
    answer is certified without any floating point.
    """
    radius = gap_radius(roots)
    if radius is None:
        return Fraction(1)
    if radius <= Surd.rational(0):
        return None
    eps = Fraction(1)
    while not Surd.rational(eps) <= radius:
        eps /= 2
    return eps


def _all_above(values: Sequence[Fraction], bound: Fraction) -> bool:
    return all(v > bound for v in values)


def _window_conditions(data: Mapping[str, object]) -> List[Tuple[str, bool]]:
    """The three middle-degree spectral conditions, as labelled booleans."""
    h = data["h"]
    half = Fraction(h, 2)
    checks: List[Tuple[str, bool]] = []
    for q in (half - Fraction(1, 2), half, half + Fraction(1, 2)):
        if q == int(q):
            checks.append((f"no harmonic forms in degree {int(q)}", betti(data, q) == 0))
    if half == int(half):
        checks.append(
            (
                f"laplace spectrum in degree {int(half)} exceeds 3/4",
                _all_above(laplace_spectrum(data, half), Fraction(3, 4)),
            )
        )
    upper = half + Fraction(1, 2)
    if upper == int(upper):
        checks.append(
            (
                f"exact block in degree {int(upper)} exceeds 1",
                _all_above(spec_d_delta(data, upper), Fraction(1)),
            )
        )
    return checks


def check_int12b(data: Mapping[str, object]) -> Tuple[bool, List[Tuple[str, bool]]]:
    """Spectral conditions keeping the critical weight window root-free.

    Middle-degree harmonic forms must vanish, the full Laplacian in the
    middle degree must exceed 3/4, and the exact block just above the middle
    must exceed 1.  When all three hold, the report also confirms that no
    indicial root lies in the closed interval [-1, 0].
    """
    checks = _window_conditions(data)
    if all(ok for _, ok in checks):
        radius = gap_radius(hodge_indicial_roots(data))
        clear = radius is None or Surd.rational(0) < radius
        checks.append(("no indicial root in [-1,0]", clear))
    return all(ok for _, ok in checks), checks


def check_fine(data: Mapping[str, object]) -> Tuple[bool, List[Tuple[str, bool]]]:
    """Finer degree-by-degree conditions implying the window hypotheses."""
    h = data["h"]
    half = Fraction(h, 2)
    checks: List[Tuple[str, bool]] = []
    for q in (half - Fraction(1, 2), half, half + Fraction(1, 2)):
        if q == int(q):
            checks.append((f"no harmonic forms in degree {int(q)}", betti(data, q) == 0))
    plan = (
        (half, laplace_spectrum, Fraction(3, 4), "laplace spectrum"),
        (half + Fraction(1, 2), spec_d_delta, Fraction(1), "exact block"),
        (half - Fraction(1, 2), spec_delta_d, Fraction(1), "coexact block"),
        (half + 1, spec_d_delta, Fraction(3, 4), "exact block"),
        (half - 1, spec_delta_d, Fraction(3, 4), "coexact block"),
    )
    for q, pick, bound, label in plan:
        if q == int(q) and 0 <= q <= h:
            checks.append(
                (
                    f"{label} in degree {int(q)} exceeds {bound}",
                    _all_above(pick(data, q), bound),
                )
            )
    return all(ok for _, ok in checks), checks


def check_gs_comparison(data: Mapping[str, object]) -> Tuple[bool, List[Tuple[str, bool]]]:
    """Kernel-stability route to the window hypotheses, with implication.

    The alternative pair of conditions asks that no indicial root lie in the
    open interval (-1, 0), and that in every degree at distance at most 1/2
    from the reflection point ``(h+1)/2`` the exact block avoid the value
    ``1 - ((h+1)/2 - q)^2`` exactly (the borderline the open window cannot
    rule out).  The report also records whether, on this dataset, that pair
    implies the three window conditions.
    """
    h = data["h"]
    center = Fraction(h + 1, 2)
    checks: List[Tuple[str, bool]] = []
    radius = gap_radius(hodge_indicial_roots(data))
    checks.append(
        ("no indicial root in (-1,0)", radius is None or Surd.rational(0) <= radius)
    )
    q = center - Fraction(1, 2)
    while q <= center + Fraction(1, 2):
        if q == int(q) and 1 <= q <= h:
            threshold = 1 - (center - q) ** 2
            checks.append(
                (
                    f"exact block in degree {int(q)} avoids {threshold} exactly",
                    all(v != threshold for v in spec_d_delta(data, q)),
                )
            )
        q += Fraction(1, 2)
    premise = all(ok for _, ok in checks)
    window = all(ok for _, ok in _window_conditions(data))
    checks.append(
        ("comparison conditions imply the window conditions", (not premise) or window)
    )
    return all(ok for _, ok in checks), checks


def scale_search(data: Mapping[str, object], max_doublings: int = 64) -> Optional[int]:
    """Power-of-two metric rescaling making the window conditions hold.

    Returns the smallest factor ``t = 2**k`` such that the scaled dataset
    passes the window check, or None when no rescaling can work (harmonic
    obstructions are scale-invariant).
    """
    _, checks = check_int12b(data)
    for label, ok in checks:
        if label.startswith("no harmonic forms") and not ok:
            return None
    t = 1
    for _ in range(max_doublings + 1):
        if check_int12b(scale_spectra(data, t))[0]:
            return t
        t *= 2
    return None


# --------------------------------------------------------------------------
# numerical probe of the model Bessel equation


@dataclass
class BesselProbe:
    alpha: float
    kappa_min: float
    kappa_max: float
    fitted_exponent: float
    verdict: str
    kappas: np.ndarray
    values: np.ndarray
    fit_scale: float


def bessel_l2_probe(
    alpha: float,
    kappa_max: float = 20.0,
    kappa_min: float = 1e-3,
) -> BesselProbe:
    """Integrate ``(-(k d/dk)^2 + alpha^2 + k^2) f = 0`` down from infinity.

    The decaying solution is seeded with ``exp(-kappa)`` at ``kappa_max``
    and integrated backwards; its small-argument power is read off by a
    log-log fit over ``[kappa_min, 4*kappa_min]``.  A fitted exponent at or
    below ``-alpha/2`` certifies that the solution grows too fast at zero to
    be square integrable against ``dkappa/kappa`` (verdict ``not_in_L2b``);
    anything milder is reported as ``inconclusive``.
    """
    from scipy.integrate import solve_ivp

    if alpha <= 0:
        raise SpectralError("the probe needs a positive rate alpha")
    if not kappa_min < 1 < kappa_max:
        raise SpectralError("the grid must satisfy kappa_min < 1 < kappa_max")

    def rhs(t, y):
        return [y[1], (alpha * alpha + math.exp(2 * t)) * y[0]]

    t_hi = math.log(kappa_max)
    t_lo = math.log(kappa_min)
    t_eval = np.linspace(t_hi, t_lo, 600)
    seed = [math.exp(-kappa_max), -kappa_max * math.exp(-kappa_max)]
    sol = solve_ivp(
        rhs,
        (t_hi, t_lo),
        seed,
        t_eval=t_eval,
        method="DOP853",
        rtol=1e-10,
        atol=1e-30,
    )
    if not sol.success:
        raise SpectralError(f"integration failed: {sol.message}")
    kappas = np.exp(sol.t[::-1])
    values = sol.y[0][::-1]
    mask = (kappas >= kappa_min * (1 - 1e-12)) & (kappas <= 4 * kappa_min)
    slope, intercept = np.polyfit(np.log(kappas[mask]), np.log(values[mask]), 1)
    verdict = "not_in_L2b" if slope <= -alpha / 2 else "inconclusive"
    return BesselProbe(
        alpha=alpha,
        kappa_min=kappa_min,
        kappa_max=kappa_max,
        fitted_exponent=float(slope),
        verdict=verdict,
        kappas=kappas,
        values=values,
        fit_scale=float(math.exp(intercept)),
    )


def k_half_closed_form(kappa: np.ndarray) -> np.ndarray:
    """The half-integer modified Bessel function in elementary terms."""
    kappa = np.asarray(kappa, dtype=float)
    return np.sqrt(np.pi / (2 * kappa)) * np.exp(-kappa)
