"""Seed function, Gamma(4) coset enumeration and the truncated Poincare lift."""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def worker_count() -> int:
    """Worker cap from ``MODULIFT_THREADS`` (default: 1, i.e. sequential)."""
    raw = os.environ.get("MODULIFT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# seed function

def seed_eval(z: complex, t: float) -> complex:
    return cmath.exp(2j * math.pi * z) - t


def seed_derivative(z: complex) -> complex:
    return 2j * math.pi * cmath.exp(2j * math.pi * z)


@dataclass(frozen=True)
class SeedZero:
    k: int
    z: complex
    kind: str  # "interior" | "cuspidal" | "exterior"


def seed_zeros(t: float, k_min: int, k_max: int) -> list[SeedZero]:
    """Zeros ``k - (i / 2pi) ln t`` of the seed for ``k_min <= k <= k_max``."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    height = -math.log(t) / TWO_PI
    if t == 1:
        kind = "cuspidal"
        height = 0.0
    elif t < 1:
        kind = "interior"
    else:
        kind = "exterior"
    return [SeedZero(k, complex(k, height), kind) for k in range(k_min, k_max + 1)]


# ---------------------------------------------------------------------------
# cosets

@dataclass(frozen=True, order=True)
class CosetRep:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")
        if self.a % 4 != 1 or self.d % 4 != 1 or self.b % 4 != 0 or self.c % 4 != 0:
            raise ValueError(f"{self} is not in Gamma(4)")

    def act(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    @property
    def height(self) -> int:
        return max(abs(self.c), abs(self.d))


def _ext_gcd(x: int, y: int) -> tuple[int, int, int]:
    """Return ``(g, u, v)`` with ``u*x + v*y = g``, ``g >= 0``."""
    u0, v0, u1, v1 = 1, 0, 0, 1
    while y:
        q, r = divmod(x, y)
        x, y = y, r
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    if x < 0:
        x, u0, v0 = -x, -u0, -v0
    return x, u0, v0


def complete_bottom_row(c: int, d: int) -> CosetRep:
    """Canonical Gamma(4) matrix with bottom row ``(c, d)``.

    ``b`` is the unique value in ``[0, 4|d|)`` with ``b = 0 (mod 4)`` in the
    class reachable by left translations; ``a`` follows from ``ad - bc = 1``.
    """
    if c % 4 != 0 or d % 4 != 1:
        raise ValueError(f"({c}, {d}) is not a Gamma(4) bottom row")
    g, u, v = _ext_gcd(d, c)
    if g != 1:
        raise ValueError(f"({c}, {d}) is not coprime")
    # u*d + v*c = 1  ->  a = u, b = -v
    a0, b0 = u, -v
    m = abs(d)
    # solutions: (a0 + n c, b0 + n d); pick b in [0, 4m) with b = 0 (mod 4), b = b0 (mod m)
    b = next(b for b in range(0, 4 * m, 4) if (b - b0) % m == 0)
    n_shift = (b - b0) // d
    return CosetRep(a0 + n_shift * c, b, c, d)


@lru_cache(maxsize=32)
def _coset_reps_cached(H: int) -> tuple[CosetRep, ...]:
    reps = []
    for c in range(-H, H + 1):
        if c % 4:
            continue
        for d in range(-H, H + 1):
            if d % 4 != 1 or math.gcd(c, d) != 1:
                continue
            reps.append(complete_bottom_row(c, d))
    reps.sort(key=lambda g: (g.height, g.c, g.d))
    return tuple(reps)


def coset_reps(H: int) -> list[CosetRep]:
    """One representative per coset with ``|c|, |d| <= H``.

    Sorted by ``(max(|c|, |d|), c, d)``; the identity always comes first.
    """
    if H < 1:
        raise ValueError(f"height bound must be >= 1, got {H}")
    return list(_coset_reps_cached(H))


@lru_cache(maxsize=32)
def _coset_arrays(H: int) -> tuple[np.ndarray, ...]:
    reps = _coset_reps_cached(H)
    return tuple(np.array([getattr(g, f) for g in reps], dtype=float) for f in "abcd")


# ---------------------------------------------------------------------------
# configuration and weights

@dataclass(frozen=True)
class LiftConfig:
    weight: int
    H: int
    tail_tol: float
    zero_tol: float
    sep_margin: float = 10.0

    def __post_init__(self):
        if self.weight % 2 or self.weight <= 2:
            raise ValueError(f"weight must be even and > 2, got {self.weight}")
        if self.H < 1:
            raise ValueError(f"H must be >= 1, got {self.H}")
        if self.tail_tol <= 0 or self.zero_tol <= 0 or self.sep_margin <= 0:
            raise ValueError("tolerances must be positive")

    @classmethod
    def for_weight(cls, weight: int, **overrides) -> "LiftConfig":
        """Defaults: ``H = 64`` and ``zero_tol = 1e-6``; weight 4 doubles H and relaxes zero_tol."""
        if weight == 4:
            base = dict(H=128, tail_tol=1e-8, zero_tol=1e-4, sep_margin=10.0)
        else:
            base = dict(H=64, tail_tol=1e-8, zero_tol=1e-6, sep_margin=10.0)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(weight=weight, **base)


@dataclass(frozen=True)
class ZeroBudget:
    dim_cusp: int
    interior_max: int
    valence_rhs: int
    required_zeros: int | None = None


def zero_budget(weight: int, n: int | None = None) -> ZeroBudget:
    return ZeroBudget(
        dim_cusp=4 * weight - 7,
        interior_max=4 * weight - 2,
        valence_rhs=4 * weight,
        required_zeros=None if n is None else 2 * n,
    )


def admissible_weights(num_arcs: int) -> list[int]:
    """Even weights ``> 2`` with ``4w - 7 < 2 * num_arcs``."""
    if num_arcs < 1:
        raise ValueError("num_arcs must be >= 1")
    return [w for w in range(4, (2 * num_arcs + 7) // 4 + 2, 2) if 4 * w - 7 < 2 * num_arcs]


def select_weight(num_arcs: int, n: int, policy: str = "min") -> int | None:
    weights = admissible_weights(num_arcs)
    if policy == "min":
        return weights[0] if weights else None
    if policy == "max_budget":
        weights = [w for w in weights if 2 * n > 4 * w - 2]
        return weights[-1] if weights else None
    raise ValueError(f"unknown weight policy {policy!r}")


# ---------------------------------------------------------------------------
# Poincare lift

@dataclass(frozen=True)
class LiftValue:
    value: complex
    tail_bound: float
    terms: int


def lattice_conditioning(z: complex) -> float:
    """Smallest ``|u z + v|^2`` over real unit vectors ``(u, v)``.

    Gives ``|cz + d|^2 >= kappa * (c^2 + d^2)`` for all real ``c, d``.
    """
    y = z.imag
    trace = abs(z) ** 2 + 1.0
    disc = math.sqrt(max(trace * trace - 4.0 * y * y, 0.0))
    # smaller eigenvalue, written to avoid cancellation
    return 2.0 * y * y / (trace + disc)


def tail_bound(z: complex, t: float, weight: int, H: int) -> float:
    """Bound on the Poincare terms with ``max(|c|, |d|) > H``.

    Each omitted term is at most ``(1 + t) |cz + d|^{-w}`` because ``|e^{2 pi i w}| <= 1``
    on the upper half-plane, and ``|cz + d|^{-w} <= kappa^{-w/2} m^{-w}`` with
    ``m = max(|c|, |d|)``. At most ``m + 2`` Gamma(4) bottom rows have
    ``max(|c|, |d|) = m``, so the tail is at most
    ``(1 + t) kappa^{-w/2} * integral_H^inf (u + 2) u^{-w} du``, i.e.
    ``C(z) * H^{2-w}`` with ``C(z) = (1 + t) kappa^{-w/2} (1/(w-2) + 2/((w-1) H))``.
    """
    kappa = lattice_conditioning(z)
    if kappa <= 0:
        return math.inf
    integral = H ** (2 - weight) / (weight - 2) + 2.0 * H ** (1 - weight) / (weight - 1)
    return (1.0 + abs(t)) * kappa ** (-weight / 2) * integral


def _lift_terms(z: complex, t: float, weight: int, H: int) -> np.ndarray:
    a, b, c, d = _coset_arrays(H)
    denom = c * z + d
    gz = (a * z + b) / denom
    return denom ** (-weight) * (np.exp(2j * math.pi * gz) - t)


def poincare_eval(z: complex, t: float, cfg: LiftConfig) -> LiftValue:
    """Truncated weight-``w`` Poincare series of the seed over cosets with ``|c|, |d| <= H``.

    Terms are reduced in the fixed coset order with exactly rounded
    summation, so the value is bit-reproducible.
    """
    if cfg.weight % 2 or cfg.weight <= 2:
        raise ValueError(f"weight must be even and > 2, got {cfg.weight}")
    z = complex(z)
    if z.imag <= 0:
        raise ValueError(f"z = {z} is not in the upper half-plane")
    terms = _lift_terms(z, t, cfg.weight, cfg.H)
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return LiftValue(value=value, tail_bound=tail_bound(z, t, cfg.weight, cfg.H), terms=len(terms))


def poincare_eval_many(points: Sequence[complex], t: float, cfg: LiftConfig) -> list[LiftValue]:
    workers = worker_count()
    if workers == 1 or len(points) < 2:
        return [poincare_eval(p, t, cfg) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: poincare_eval(p, t, cfg), points))


@dataclass(frozen=True)
class Membership:
    status: str  # "member" | "non_member" | "indeterminate"
    magnitude: float
    margin: float
    tail_bound: float

    @property
    def member(self) -> bool:
        return self.status == "member"


def classify_membership(lift: LiftValue, cfg: LiftConfig) -> Membership:
    magnitude = abs(lift.value)
    if magnitude < cfg.zero_tol and lift.tail_bound < cfg.zero_tol:
        status = "member"
    elif magnitude - lift.tail_bound > cfg.sep_margin * cfg.zero_tol:
        status = "non_member"
    else:
        status = "indeterminate"
    return Membership(status, magnitude, magnitude / cfg.zero_tol, lift.tail_bound)


def lift_membership(p: complex, t: float, cfg: LiftConfig) -> Membership:
    """Tolerance-based test of whether ``p`` is a zero of the truncated lift.

    Separation is never assumed: a point is a non-member only when its
    magnitude, less the tail bound, exceeds ``sep_margin * zero_tol``;
    anything in between is reported as indeterminate.
    """
    p = complex(p)
    if p.imag <= 0:
        raise ValueError(f"p = {p} is not in the upper half-plane")
    return classify_membership(poincare_eval(p, t, cfg), cfg)
