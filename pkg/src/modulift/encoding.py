"""Complex-plane encoding of candidate tours.

Each arc cost becomes a point ``phi = i*alpha`` with ``alpha = -ln(r / r_ref)``
and each indicator ``x`` an angle ``theta`` (0 for in-tour arcs, pi/2
otherwise). The pair is folded into ``s = (phi + theta) / 2pi`` and
``tau = (phi - theta) / 2pi``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath

from .atsp_core import Arc, AtspInstance, Cost, Tour, tour_cost, validate_tour

TWO_PI = 2.0 * math.pi
DEFAULT_Q = 60


class NormalizerError(ValueError):
    pass


@dataclass(frozen=True)
class ArcEncoding:
    arc: Arc
    cost: Cost
    alpha: float
    quarter: int  # theta = quarter * pi/2; 0 in tour, 1 out of tour

    @property
    def theta(self) -> float:
        return self.quarter * math.pi / 2

    @property
    def x(self) -> int:
        return 1 if self.quarter == 0 else 0

    @property
    def cos_theta(self) -> int:
        """``cos(theta)`` evaluated exactly on the canonical angles."""
        return 1 if self.quarter == 0 else 0

    @property
    def s(self) -> complex:
        return complex(self.quarter / 4, self.alpha / TWO_PI)

    @property
    def tau(self) -> complex:
        return complex(-self.quarter / 4, self.alpha / TWO_PI)

    @property
    def in_upper_half_plane(self) -> bool:
        return self.alpha > 0


@dataclass(frozen=True)
class EncodingSet:
    n: int
    r_ref: Cost
    t: Fraction
    arcs: tuple[ArcEncoding, ...]
    in_tour: frozenset[Arc]

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    def objective_sum(self) -> Fraction:
        """Exact ``sum over in-tour arcs of r / r_ref`` (equals ``1/t`` for a tour)."""
        return sum((Fraction(e.cost) / Fraction(self.r_ref) for e in self.arcs if e.x == 1), Fraction(0))

    def points(self) -> list[complex]:
        """``s`` then ``tau`` for every arc, in arc order."""
        out = []
        for e in self.arcs:
            out.append(e.s)
            out.append(e.tau)
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r_ref": str(self.r_ref),
            "t": str(self.t),
            "arcs": [
                {
                    "arc": [e.arc[0] + 1, e.arc[1] + 1],
                    "cost": str(e.cost),
                    "alpha": e.alpha,
                    "theta_quarter": e.quarter,
                    "s": [e.s.real, e.s.imag],
                    "tau": [e.tau.real, e.tau.imag],
                }
                for e in self.arcs
            ],
        }


def _alpha(cost: Cost, r_ref: Cost) -> float:
    ratio = Fraction(cost) / Fraction(r_ref)
    return -math.log(ratio.numerator) + math.log(ratio.denominator)


def encode_indicator(
    inst: AtspInstance,
    x,
    r_ref: Cost,
    t: Fraction | None = None,
) -> EncodingSet:
    """Encode an arbitrary 0/1 arc indicator.

    No tour validation happens here. ``t`` defaults to ``r_ref / r_act``
    and must be supplied when no arc is selected.
    """
    r_ref = Fraction(r_ref)
    if r_ref <= 0:
        raise NormalizerError("r_ref must be positive")
    if isinstance(x, Tour):
        chosen = set(x.arcs())
    else:
        chosen = {tuple(arc) for arc, v in dict(x).items() if v == 1}
    arcs = []
    r_act: Fraction = Fraction(0)
    for a, b in inst.arc_list():
        cost = inst.costs[a][b]
        inside = (a, b) in chosen
        if inside:
            if cost >= r_ref:
                raise NormalizerError(
                    f"normalizer too small: in-tour arc ({a}, {b}) costs {cost} >= r_ref {r_ref}"
                )
            r_act += cost
        arcs.append(ArcEncoding(arc=(a, b), cost=cost, alpha=_alpha(cost, r_ref), quarter=0 if inside else 1))
    if t is None:
        if r_act == 0:
            raise ValueError("t is undefined without selected arcs; pass it explicitly")
        t = r_ref / r_act
    if r_ref.denominator == 1:
        r_ref = r_ref.numerator
    return EncodingSet(
        n=inst.n,
        r_ref=r_ref,
        t=Fraction(t),
        arcs=tuple(arcs),
        in_tour=frozenset(a for a in chosen),
    )


def encode(inst: AtspInstance, candidate: Tour, r_ref: Cost) -> EncodingSet:
    check = validate_tour(inst, candidate)
    if not check.ok:
        raise ValueError(f"invalid candidate: {check.message}")
    enc = encode_indicator(inst, candidate, r_ref)
    assert enc.t == Fraction(r_ref) / Fraction(tour_cost(inst, candidate))
    return enc


# ---------------------------------------------------------------------------
# E-series

_EXTRA_DPS = 34


def e_closed_form(s: complex, tau: complex) -> complex:
    """``(e^{2 pi i s} - 1) + (e^{2 pi i tau} - 1)``, the sum of the full series."""
    # 2*pi*s rounded in double loses ~|2 pi s| ulps of phase, amplified by |e^{2 pi i s}|
    with mpmath.workdps(_EXTRA_DPS):
        s_mp, t_mp = mpmath.mpc(s), mpmath.mpc(tau)
        return complex(mpmath.expjpi(2 * s_mp) + mpmath.expjpi(2 * t_mp) - 2)


def e_series_terms(s: complex, tau: complex, Q: int) -> list[complex]:
    """Individual terms ``(2 pi i)^q (s^q + tau^q) / q!`` for ``q = 1..Q``."""
    return [complex(v) for v in _mp_terms(s, tau, Q)]


def _mp_terms(s: complex, tau: complex, Q: int) -> list:
    if Q < 1:
        raise ValueError(f"truncation order Q must be >= 1, got {Q}")
    # terms reach ~e^{4 pi} for |s| <= 2 before cancelling to O(1); extra digits keep that exact
    with mpmath.workdps(_EXTRA_DPS):
        w_s = 2j * mpmath.pi * mpmath.mpc(s)
        w_t = 2j * mpmath.pi * mpmath.mpc(tau)
        term_s = mpmath.mpc(1)
        term_t = mpmath.mpc(1)
        out = []
        for q in range(1, Q + 1):
            term_s = term_s * w_s / q
            term_t = term_t * w_t / q
            out.append(term_s + term_t)
        return out


def e_series(s: complex, tau: complex, Q: int = DEFAULT_Q) -> complex:
    """Partial sum of the per-arc E-series up to order ``Q``.

    The full series sums to ``e_closed_form(s, tau)``; the truncation error
    is bounded by :func:`e_series_tail_bound`.
    """
    terms = _mp_terms(s, tau, Q)
    with mpmath.workdps(_EXTRA_DPS):
        return complex(mpmath.fsum(terms))


def _fsum_complex(values: Iterable[complex]) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def e_series_tail_bound(s: complex, tau: complex, Q: int) -> float:
    """``2 * sum_{q>Q} R^q / q!`` with ``R = 2 pi max(|s|, |tau|, 1)``."""
    if Q < 1:
        raise ValueError(f"truncation order Q must be >= 1, got {Q}")
    R = TWO_PI * max(abs(s), abs(tau), 1.0)
    q = Q + 1
    term = math.exp(q * math.log(R) - math.lgamma(q + 1))
    total = 0.0
    while True:
        total += term
        q += 1
        term *= R / q
        if q > R and term <= 1e-17 * total:
            # remaining terms shrink at least geometrically with ratio R/q
            total += term / (1 - R / (q + 1))
            break
    return 2.0 * total


def equilibrium_residual(enc: EncodingSet, Q: int = DEFAULT_Q, tol: float = 1e-12) -> complex:
    """``sum_A E_ab - 2(t - |A|)`` from the truncated E-series.

    In closed form this is ``2(sum_in r/r_ref - t) = 2(1/t - t)``, which
    vanishes only at ``t = 1``. Raises when the summed truncation bound
    exceeds ``tol``.
    """
    bound = math.fsum(e_series_tail_bound(e.s, e.tau, Q) for e in enc.arcs)
    if bound > tol:
        raise ValueError(f"Q = {Q} too small: E-series tail bound {bound:.3e} exceeds {tol:.3e}")
    total = _fsum_complex(e_series(e.s, e.tau, Q) for e in enc.arcs)
    return total - 2 * (float(enc.t) - enc.num_arcs)


def equilibrium_residual_exact(enc: EncodingSet) -> Fraction:
    """Closed-form value of :func:`equilibrium_residual`, in exact arithmetic."""
    return 2 * (enc.objective_sum() - enc.t)


# ---------------------------------------------------------------------------
# subtour bound

@dataclass(frozen=True)
class SubtourCheck:
    lhs: float
    rhs: int
    satisfied: bool


def subtour_rhs_expression(n: int, size: int, m: int = 0, k: int = 1) -> complex:
    """Evaluate ``n * exp(2 k beta i)`` with ``beta = (2 m pi - i ln((size-1)/n)) / 2k``."""
    beta = (2 * m * math.pi - 1j * math.log((size - 1) / n)) / (2 * k)
    return n * cmath.exp(2 * k * beta * 1j)


def subtour_bound_check(enc: EncodingSet, S: Iterable[int], eps: float = 1e-9) -> SubtourCheck:
    subset = set(S)
    if not (2 <= len(subset) <= enc.n - 1):
        raise ValueError(f"|S| = {len(subset)} outside [2, {enc.n - 1}]")
    lhs = math.fsum(
        (cmath.exp(1j * e.theta) + cmath.exp(-1j * e.theta)).real / 2
        for e in enc.arcs
        if e.arc[0] in subset and e.arc[1] in subset
    )
    rhs = len(subset) - 1
    return SubtourCheck(lhs=lhs, rhs=rhs, satisfied=lhs <= rhs + eps)
