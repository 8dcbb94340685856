"""Explicit minimizer catalogue: Types I, II and III, their energies, the
phase-separation curves and the (r, eta) classifier.

Energies come in two flavours.  ``energy_type1/2/3`` take a :class:`Params`
and return the energy for the actual volumes; ``e_type1/2/3`` work per unit
``sqrt(V_A)`` as functions of ``(r, eta)`` and broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    EtaOutOfRange,
    LambdaOutOfRange,
    ParamOutOfRange,
    Type2Inadmissible,
)

TYPES = ("I", "II", "III")
# relative slack for comparisons such as r <= eta/2 that are exact in theory
_EPS = 1e-12


def exact_sqrt(x):
    """Square root that stays exact for perfect-square integers and fractions."""
    if isinstance(x, int) and x >= 0:
        s = math.isqrt(x)
        if s * s == x:
            return s
    elif isinstance(x, Fraction) and x >= 0:
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return math.sqrt(x)


def _div(x, y):
    """``x / y``, kept as a Fraction when both operands are rational."""
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return Fraction(x) / y
    return x / y


@dataclass(frozen=True)
class Params:
    """Interaction intensity and volumes, relabelled so that ``va >= vb``."""

    eta: float
    va: float
    vb: float
    swapped: bool = False
    allow_limit: bool = False

    def __post_init__(self) -> None:
        if self.allow_limit:
            if not (0 <= self.eta <= 2):
                raise EtaOutOfRange(f"eta must lie in [0, 2], got {self.eta}")
        elif not (0 < self.eta < 2):
            raise EtaOutOfRange(f"eta must lie in (0, 2), got {self.eta}")
        if not (self.va > 0 and self.vb > 0):
            raise ParamOutOfRange("volumes must be positive")
        if self.vb > self.va:
            va, vb = self.vb, self.va
            object.__setattr__(self, "va", va)
            object.__setattr__(self, "vb", vb)
            object.__setattr__(self, "swapped", not self.swapped)

    @classmethod
    def from_ratio(cls, r, eta, va=1, **kw) -> "Params":
        if not (0 < r <= 1):
            raise ParamOutOfRange(f"r must lie in (0, 1], got {r}")
        return cls(eta, va, r * va, **kw)

    @property
    def r(self):
        if isinstance(self.va, int) and isinstance(self.vb, int):
            return Fraction(self.vb, self.va)
        return self.vb / self.va


# -- phase-separation curves ------------------------------------------------

def _check_eta(eta) -> None:
    if np.any(np.asarray(eta) <= 0) or np.any(np.asarray(eta) >= 2):
        raise EtaOutOfRange(f"eta must lie in (0, 2), got {eta}")


def r12(eta):
    _check_eta(eta)
    return eta / 2


def r13(eta):
    """Type I / Type III separation.

    Evaluated as ``4 / (s (s + 4))`` with ``s = sqrt(4 + 2 eta)``, which is
    algebraically identical to the textbook quotient (its numerator is
    ``(s - 2)^2``) but free of cancellation as ``eta -> 0``.
    """
    _check_eta(eta)
    s = np.sqrt(4 + 2 * np.asarray(eta, dtype=float))
    out = 4 / (s * (s + 4))
    return float(out) if np.ndim(out) == 0 else out


def r13_quotient(eta):
    """Unsimplified quotient form of :func:`r13`; loses digits for small eta."""
    eta = np.asarray(eta, dtype=float)
    s = np.sqrt(4 + 2 * eta)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (8 + 2 * eta - 4 * s) / (eta**2 - 8 - 2 * eta + 4 * s)
    return float(out) if np.ndim(out) == 0 else out


def r23(eta):
    _check_eta(eta)
    eta = np.asarray(eta, dtype=float)
    q = np.sqrt(2 * eta)
    out = ((4 * eta - 4 * q) / (2 * eta + eta**2 - 2 * eta * q - 4)) ** 2
    return float(out) if np.ndim(out) == 0 else out


def eta_triple() -> float:
    return 1 + 2 * math.sqrt(2) - math.sqrt(5 + 4 * math.sqrt(2))


def r_triple() -> float:
    return eta_triple() / 2


# -- energies -----------------------------------------------------------------

def e_type1(r, eta):
    return 2 * np.sqrt(4 + 2 * np.asarray(eta)) * np.sqrt(1 + np.asarray(r))


def e_type2(r, eta):
    """Type II energy per ``sqrt(V_A)``; ``inf`` where Type II does not exist."""
    r, eta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(eta, dtype=float))
    out = 4 + 2 * np.sqrt(2 * r * eta)
    out = np.where(r <= eta / 2 * (1 + _EPS), out, np.inf)
    return float(out) if out.ndim == 0 else out


def e_type3(r, eta):
    return 4 * np.sqrt(1 + np.asarray(r)) + 2 * np.asarray(eta) * np.sqrt(np.asarray(r))


def type2_admissible(params: Params) -> bool:
    return params.r <= params.eta / 2 * (1 + _EPS)


def energy_type1(params: Params):
    return 2 * exact_sqrt(4 + 2 * params.eta) * exact_sqrt(params.va + params.vb)


def energy_type2(params: Params):
    if not type2_admissible(params):
        return math.inf
    return 4 * exact_sqrt(params.va) + 2 * exact_sqrt(2 * params.eta * params.vb)


def energy_type3(params: Params):
    return 4 * exact_sqrt(params.va + params.vb) + 2 * params.eta * exact_sqrt(params.vb)


def type_energies(params: Params) -> dict[str, object]:
    return {
        "I": energy_type1(params),
        "II": energy_type2(params),
        "III": energy_type3(params),
    }


def continuum_minimum(params: Params) -> float:
    return min(float(e) for e in type_energies(params).values())


# -- classifier -----------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    r: float
    eta: float
    E_I: float
    E_II: float
    E_III: float
    optimal_types: frozenset[str]
    boundary: bool
    governing_curve: str

    @property
    def optimal_label(self) -> str:
        return ",".join(t for t in TYPES if t in self.optimal_types)


_CURVE_OF = {
    frozenset({"I", "II"}): "r12",
    frozenset({"I", "III"}): "r13",
    frozenset({"II", "III"}): "r23",
    frozenset(TYPES): "triple",
}


def region_types(r: float, eta: float, tol: float) -> frozenset[str]:
    """Optimal types read off the case table, curves widened by ``tol``."""
    c12, c13, c23 = r12(eta), r13(eta), r23(eta)
    et = eta_triple()
    if eta >= et:
        base = "I" if r > c12 else ("II" if r > c23 else "III")
    else:
        base = "I" if r > c13 else "III"
    types = {base}
    if eta >= et - tol:
        if abs(r - c12) <= tol:
            types |= {"I", "II"}
        if abs(r - c23) <= tol:
            types |= {"II", "III"}
    if eta <= et + tol and abs(r - c13) <= tol:
        types |= {"I", "III"}
    return frozenset(types)


def argmin_types(energies: dict[str, float], tol: float) -> frozenset[str]:
    finite = {k: v for k, v in energies.items() if math.isfinite(v)}
    emin = min(finite.values())
    return frozenset(k for k, v in finite.items() if v - emin <= tol * emin)


def classify(r: float, eta: float, tol: float = 1e-9) -> Classification:
    """Optimal minimizer types at ``(r, eta)``.

    The case table and the energy argmin are evaluated independently.  Away
    from boundaries they must agree; on a boundary the union is reported.
    """
    if not (0 < r <= 1):
        raise ParamOutOfRange(f"r must lie in (0, 1], got {r}")
    if not (0 < eta < 2):
        raise ParamOutOfRange(f"eta must lie in (0, 2), got {eta}")
    if tol < 0:
        raise ParamOutOfRange(f"tolerance must be non-negative, got {tol}")
    r, eta = float(r), float(eta)
    energies = {"I": float(e_type1(r, eta)), "II": e_type2(r, eta), "III": float(e_type3(r, eta))}
    by_region = region_types(r, eta, tol)
    by_energy = argmin_types(energies, tol)
    boundary = len(by_region) > 1 or len(by_energy) > 1
    if not boundary and by_region != by_energy:
        raise AssertionError(
            f"case table {sorted(by_region)} and energy argmin {sorted(by_energy)} "
            f"disagree at r={r!r}, eta={eta!r}"
        )
    optimal = by_region | by_energy
    curve = _CURVE_OF.get(optimal, "interior")
    return Classification(
        r, eta, energies["I"], energies["II"], energies["III"], optimal, boundary, curve
    )


# -- explicit constructions -----------------------------------------------------

Rect = tuple  # (x0, y0, x1, y1)


@dataclass(frozen=True)
class RectDescription:
    rects_a: tuple[Rect, ...]
    rects_b: tuple[Rect, ...]
    type_tag: str
    lam: float = 0

    @staticmethod
    def _area(rects) -> object:
        return sum((x1 - x0) * (y1 - y0) for x0, y0, x1, y1 in rects)

    @property
    def area_a(self):
        return self._area(self.rects_a)

    @property
    def area_b(self):
        return self._area(self.rects_b)


def build_type1(params: Params) -> RectDescription:
    """Two rectangles of common height ``M`` sharing a vertical side."""
    m = exact_sqrt(_div(2 * (params.va + params.vb), 2 + params.eta))
    return RectDescription(
        ((0, 0, _div(params.va, m), m),),
        ((-_div(params.vb, m), 0, 0, m),),
        "I",
    )


def build_type2(params: Params, lam=0) -> RectDescription:
    """Square ``A`` with a ``sqrt(2 V_B/eta)``-high rectangle ``B`` attached at height ``lam``."""
    if not type2_admissible(params):
        raise Type2Inadmissible(
            f"Type II needs r <= eta/2, got r={float(params.r):.6g}, eta={params.eta}"
        )
    m = exact_sqrt(_div(2 * params.vb, params.eta))
    side = exact_sqrt(params.va)
    slack = side - m
    if slack < 0:
        # only roundoff can get here after the admissibility check
        slack = 0
    if lam < 0 or lam > slack + _EPS * float(side):
        raise LambdaOutOfRange(f"lambda must lie in [0, {float(slack):.6g}], got {lam}")
    return RectDescription(
        ((0, 0, side, side),),
        ((-_div(params.vb, m), lam, 0, lam + m),),
        "II",
        lam,
    )


def build_type3(params: Params) -> RectDescription:
    """Square ``B`` in the corner of the square ``A u B``; ``A`` is an L of two rectangles."""
    outer = exact_sqrt(params.va + params.vb)
    inner = exact_sqrt(params.vb)
    return RectDescription(
        ((inner, 0, outer, outer), (0, inner, inner, outer)),
        ((0, 0, inner, inner),),
        "III",
    )


def build(type_tag: str, params: Params, lam=0) -> RectDescription:
    if type_tag == "I":
        return build_type1(params)
    if type_tag == "II":
        return build_type2(params, lam)
    if type_tag == "III":
        return build_type3(params)
    raise ValueError(f"unknown type {type_tag!r}")
