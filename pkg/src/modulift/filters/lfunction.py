"""Complex gamma, the completed L-function and its central-value parity test."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# Lanczos approximation, g = 7, n = 9
_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _is_pole(s: complex) -> bool:
    return s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real)


def log_gamma(s: complex) -> complex:
    """Principal-ish ``log Gamma(s)`` for ``Re(s) >= 0.5`` (branch not normalized)."""
    z = s - 1
    acc = _LANCZOS[0]
    for i in range(1, _G + 2):
        acc += _LANCZOS[i] / (z + i)
    t = z + _G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def complex_gamma(s: complex) -> complex:
    s = complex(s)
    if _is_pole(s):
        raise ValueError(f"Gamma has a pole at {s}")
    if s.real < 0.5:
        # reflection: Gamma(s) Gamma(1 - s) = pi / sin(pi s)
        return math.pi / (cmath.sin(math.pi * s) * complex_gamma(1 - s))
    return cmath.exp(log_gamma(s))


@dataclass(frozen=True)
class LambdaValue:
    value: complex
    tail: float

    @property
    def tail_available(self) -> bool:
        return math.isfinite(self.tail)


def lambda_prefactor(weight: int, s: complex) -> complex:
    return cmath.exp(-s * math.log(2 * math.pi)) * complex_gamma(s + (weight - 1) / 2)


def lambda_complete(
    coeffs: Sequence[complex],
    weight: int,
    s: complex,
    M: int | None = None,
    *,
    growth: float | None = None,
    finite_support: bool = False,
    require_tail: bool = False,
) -> LambdaValue:
    """``(2 pi)^{-s} Gamma(s + (w-1)/2) sum_{n<=M} a_n n^{-s}`` with a tail estimate.

    The tail assumes ``|a_n| <= A n^growth`` (default growth ``(w-1)/2``)
    with ``A`` fitted to the supplied coefficients; it is infinite when
    ``Re(s) <= growth + 1``. No analytic continuation is attempted.
    """
    a = np.asarray(coeffs, dtype=complex)
    if M is None:
        M = len(a)
    a = a[:M]
    s = complex(s)
    pref = lambda_prefactor(weight, s)
    n = np.arange(1, M + 1, dtype=float)
    terms = a * np.exp(-s * np.log(n))
    dirichlet = complex(math.fsum(terms.real), math.fsum(terms.imag))
    value = pref * dirichlet

    beta = (weight - 1) / 2 if growth is None else growth
    if finite_support or not np.any(a):
        tail = 0.0
    else:
        A = float(np.max(np.abs(a) * n ** (-beta)))
        excess = s.real - beta - 1
        tail = abs(pref) * A * M ** (-excess) / excess if excess > 0 else math.inf
    if require_tail and not math.isfinite(tail):
        raise ValueError(f"tail bound unavailable at Re(s) = {s.real} for growth {beta}")
    return LambdaValue(value, tail)


# ---------------------------------------------------------------------------
# sign and central values

def infer_epsilon(
    lam: Callable[[complex], complex],
    weight: int,
    probes: Sequence[complex],
    tol: float = 1e-6,
    noise_floor: float = 1e-12,
) -> int | None:
    """Sign of ``Lambda(s) = eps Lambda(w + 1 - s)`` from probe ratios; ``None`` if undetermined."""
    if len(probes) < 3:
        raise ValueError("need at least 3 probes")
    ratios = []
    for s in probes:
        denom = lam(weight + 1 - s)
        if abs(denom) <= noise_floor:
            continue
        ratios.append(lam(s) / denom)
    if not ratios:
        raise ValueError("Lambda(w + 1 - s) is below the noise floor at every probe")
    if all(abs(r - 1) <= tol for r in ratios):
        return 1
    if all(abs(r + 1) <= tol for r in ratios):
        return -1
    return None


def default_probes(weight: int) -> list[float]:
    center = (weight + 1) / 2
    return [center + d for d in (-0.75, -0.25, 0.25, 0.75)]


def epsilon_sign(
    coeffs: Sequence[complex],
    weight: int,
    M: int | None = None,
    probes: Sequence[complex] | None = None,
    tol: float = 1e-6,
) -> int | None:
    probes = default_probes(weight) if probes is None else probes
    return infer_epsilon(lambda s: lambda_complete(coeffs, weight, s, M).value, weight, probes, tol)


@dataclass(frozen=True)
class LambdaReport:
    epsilon: int | None
    s0: float
    value: complex
    derivative: complex
    derivative_half_step: complex
    step: float
    richardson_gap: float
    scalar: complex  # Lambda(s0) for eps = +1, Lambda'(s0) for eps = -1
    forced: complex  # the quantity the functional equation forces to zero
    tail: float

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "s0": self.s0,
            "value": [self.value.real, self.value.imag],
            "derivative": [self.derivative.real, self.derivative.imag],
            "derivative_half_step": [self.derivative_half_step.real, self.derivative_half_step.imag],
            "step": self.step,
            "richardson_gap": self.richardson_gap,
            "scalar": [self.scalar.real, self.scalar.imag],
            "forced": [self.forced.real, self.forced.imag],
            "tail": self.tail,
        }


def central_difference(lam: Callable[[complex], complex], center: float, h: float) -> complex:
    return (lam(center + h) - lam(center - h)) / (2 * h)


def central_report(
    lam: Callable[[complex], complex],
    weight: int,
    epsilon: int,
    h: float = 1e-4,
    tail: float = 0.0,
) -> LambdaReport:
    """Central value, derivative and the sign-selected scalar.

    With ``eps = -1`` the functional equation forces ``Lambda(s0) = 0``; with
    ``eps = +1`` it forces ``Lambda'(s0) = 0``. ``scalar`` is the other one.
    """
    if epsilon not in (1, -1):
        raise ValueError("undetermined epsilon")
    s0 = (weight + 1) / 2
    value = complex(lam(s0))
    d_h = complex(central_difference(lam, s0, h))
    d_h2 = complex(central_difference(lam, s0, h / 2))
    if epsilon == 1:
        scalar, forced = value, d_h
    else:
        scalar, forced = d_h, value
    return LambdaReport(
        epsilon=epsilon,
        s0=s0,
        value=value,
        derivative=d_h,
        derivative_half_step=d_h2,
        step=h,
        richardson_gap=abs(d_h - d_h2),
        scalar=scalar,
        forced=forced,
        tail=tail,
    )


def central_test(
    coeffs: Sequence[complex],
    weight: int,
    M: int | None = None,
    probes: Sequence[complex] | None = None,
    tol: float = 1e-6,
    h: float = 1e-4,
) -> LambdaReport:
    probes = default_probes(weight) if probes is None else probes
    lam = lambda s: lambda_complete(coeffs, weight, s, M).value  # noqa: E731
    eps = infer_epsilon(lam, weight, probes, tol)
    if eps is None:
        raise ValueError("undetermined epsilon")
    s0 = (weight + 1) / 2
    tail = lambda_complete(coeffs, weight, s0, M).tail
    return central_report(lam, weight, eps, h=h, tail=tail)
