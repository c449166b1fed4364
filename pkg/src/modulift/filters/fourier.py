"""q-expansion coefficients (width-4 cusp) and the Vandermonde system."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

WIDTH = 4
_PROBES = (0.37, 1.91)


@dataclass(frozen=True)
class QExpansion:
    """Coefficients ``a_1..a_M`` in ``q = e^{pi i z / 2}``.

    ``errors[n-1]`` bounds the error of ``a_n`` given the absolute error
    ``sample_error`` of the sampled function values; sampling at height
    ``y0`` amplifies it by ``e^{pi n y0 / 2}``.
    """

    M: int
    coeffs: np.ndarray
    constant: complex
    y0: float
    samples: int
    sample_error: float
    alias_estimate: float
    weight: int | None = None
    errors: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.errors is None:
            n = np.arange(1, self.M + 1)
            errs = (self.sample_error + self.alias_estimate) * np.exp(math.pi * n * self.y0 / 2)
            object.__setattr__(self, "errors", errs)

    @property
    def width(self) -> int:
        return WIDTH

    def coeff(self, n: int) -> complex:
        return complex(self.coeffs[n - 1])


def q_of(z) -> np.ndarray | complex:
    return np.exp(1j * math.pi * np.asarray(z) / 2)


def synthesize(coeffs: Sequence[complex], constant: complex = 0) -> Callable:
    """``z -> constant + sum a_n q^n``; works on scalars and arrays."""
    a = np.asarray(coeffs, dtype=complex)
    n = np.arange(1, len(a) + 1)

    def f(z):
        z_arr = np.asarray(z, dtype=complex)
        q = q_of(z_arr)[..., None]
        out = constant + (a * q ** n).sum(axis=-1)
        return complex(out) if out.ndim == 0 else out

    return f


def _evaluate(f: Callable, points: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        return np.asarray(f(points), dtype=complex)
    return np.array([f(complex(p)) for p in points], dtype=complex)


def q_coefficients(
    f: Callable,
    M: int,
    y0: float = 0.8,
    samples: int | None = None,
    *,
    periodic_tol: float = 1e-8,
    sample_error: float | None = None,
    vectorized: bool = False,
    weight: int | None = None,
) -> QExpansion:
    """Recover ``a_1..a_M`` from samples of ``f`` along ``Im z = y0``.

    ``a_n = (1/4) int_0^4 f(x + i y0) e^{-pi i n (x + i y0) / 2} dx`` evaluated
    with the uniform ``samples``-point rule, which is exact for any
    expansion supported on ``0..samples-1``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if y0 <= 0:
        raise ValueError("sampling height y0 must be positive")
    if samples is None:
        samples = max(4 * M, 64)
    if samples < 4 * M:
        raise ValueError(f"samples = {samples} too few; need >= 4M = {4 * M}")

    probe_pts = np.array([x + 1j * y0 for x in _PROBES], dtype=complex)
    left = _evaluate(f, probe_pts, vectorized)
    right = _evaluate(f, probe_pts + WIDTH, vectorized)
    scale = max(1.0, float(np.max(np.abs(left))))
    gap = float(np.max(np.abs(right - left)))
    if gap > periodic_tol * scale:
        raise ValueError(f"periodicity probe failed: |f(z+4) - f(z)| = {gap:.3e}")

    x = WIDTH * np.arange(samples) / samples
    values = _evaluate(f, x + 1j * y0, vectorized)
    raw = np.fft.fft(values) / samples
    n = np.arange(1, M + 1)
    coeffs = raw[1:M + 1] * np.exp(math.pi * n * y0 / 2)
    if sample_error is None:
        # rounding in f itself plus FFT rounding, which grows like log2(samples)
        sample_error = (4 + math.log2(samples)) * np.finfo(float).eps * float(np.max(np.abs(values)))
    unresolved = raw[M + 1:samples - M] if samples - M > M + 1 else np.zeros(0)
    alias = float(np.max(np.abs(unresolved))) if unresolved.size else 0.0
    return QExpansion(
        M=M,
        coeffs=coeffs,
        constant=complex(raw[0]),
        y0=y0,
        samples=samples,
        sample_error=float(sample_error),
        alias_estimate=alias,
        weight=weight,
    )


@dataclass(frozen=True)
class VandermondeSystem:
    points: np.ndarray
    M: int
    matrix: np.ndarray = field(repr=False)
    rank: int
    singular_values: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(repr=False)

    @property
    def kernel_dim(self) -> int:
        return self.M - self.rank

    def apply(self, coeffs: Sequence[complex]) -> np.ndarray:
        a = np.asarray(coeffs, dtype=complex)
        if a.shape != (self.M,):
            raise ValueError(f"expected {self.M} coefficients, got {a.shape}")
        return self.matrix @ a


def vandermonde_matrix(points: Sequence[complex], M: int) -> np.ndarray:
    q = np.asarray(points, dtype=complex)[:, None]
    return q ** np.arange(1, M + 1)


def vandermonde_system(points: Sequence[complex], M: int, rel_tol: float = 1e-10) -> VandermondeSystem:
    """Build ``V[j, n-1] = q_j^n`` and its numerical rank.

    Rank counts the pivots of a column-pivoted QR factorization whose
    magnitude exceeds ``rel_tol`` times the largest singular value.
    """
    q = np.asarray(points, dtype=complex)
    if q.size == 0:
        raise ValueError("no points")
    if np.any(np.abs(q) >= 1):
        raise ValueError("every point needs |q| < 1")
    if M < q.size:
        raise ValueError(f"M = {M} smaller than the number of points {q.size}")
    V = vandermonde_matrix(q, M)
    sv = scipy.linalg.svd(V, compute_uv=False)
    sigma_max = float(sv[0]) if sv.size else 0.0
    _, R, _ = scipy.linalg.qr(V, pivoting=True, mode="economic")
    pivots = np.abs(np.diag(R))
    rank = int(np.sum(pivots > rel_tol * sigma_max)) if sigma_max > 0 else 0
    _, _, vh = scipy.linalg.svd(V, full_matrices=True)
    kernel = vh[rank:].conj().T
    return VandermondeSystem(points=q, M=M, matrix=V, rank=rank, singular_values=sv, kernel=kernel)
