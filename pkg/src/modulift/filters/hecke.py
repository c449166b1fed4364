"""Hecke coefficient relations for odd indices."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % k for k in range(2, math.isqrt(p) + 1))


def odd_primes_upto(limit: int) -> list[int]:
    return [p for p in range(3, limit + 1, 2) if _is_prime(p)]


@dataclass(frozen=True)
class HeckeReport:
    weight: int
    primes: tuple[int, ...]
    prime_residuals: dict[int, complex]
    pair_residuals: dict[tuple[int, int], complex]

    @property
    def max_residual(self) -> float:
        vals = [abs(v) for v in self.prime_residuals.values()]
        vals += [abs(v) for v in self.pair_residuals.values()]
        return max(vals, default=0.0)


def _coprime_odd_pairs(M: int) -> list[tuple[int, int]]:
    pairs = []
    for m in range(3, M + 1, 2):
        for n in range(m + 2, M // m + 1, 2):
            if math.gcd(m, n) == 1:
                pairs.append((m, n))
    return pairs


def hecke_residuals(
    coeffs: Sequence[complex],
    weight: int,
    odd_primes: Sequence[int] | None = None,
    include_pairs: bool = True,
) -> HeckeReport:
    """Residuals of ``a_{p^2} = a_p^2 - p^{w-1}`` and ``a_{mn} = a_m a_n``.

    ``coeffs[0]`` is ``a_1``. Pairs run over odd coprime ``1 < m < n`` with
    ``mn <= M``.
    """
    a = list(coeffs)
    M = len(a)
    if odd_primes is None:
        odd_primes = odd_primes_upto(math.isqrt(M))
    for p in odd_primes:
        if p % 2 == 0:
            raise ValueError(f"even prime excluded: {p}")
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        if p * p > M:
            raise ValueError(f"p^2 = {p * p} exceeds M = {M}")

    def c(n):
        return a[n - 1]

    prime_res = {p: c(p * p) - (c(p) ** 2 - p ** (weight - 1)) for p in odd_primes}
    pair_res = {}
    if include_pairs:
        for m, n in _coprime_odd_pairs(M):
            pair_res[(m, n)] = c(m * n) - c(m) * c(n)
    return HeckeReport(weight, tuple(odd_primes), prime_res, pair_res)


def hecke_error_bound(coeffs: Sequence[complex], errors: Sequence[float], report: HeckeReport) -> dict:
    """First-order propagation of coefficient errors into each residual."""
    a = [abs(v) for v in coeffs]
    e = list(errors)
    out = {}
    for p in report.prime_residuals:
        out[p] = e[p * p - 1] + 2 * a[p - 1] * e[p - 1] + e[p - 1] ** 2
    for m, n in report.pair_residuals:
        out[(m, n)] = e[m * n - 1] + a[m - 1] * e[n - 1] + a[n - 1] * e[m - 1] + e[m - 1] * e[n - 1]
    return out


def eigen_sequence(lambdas: Mapping[int, complex], weight: int, M: int) -> list:
    """Normalized (``a_1 = 1``) multiplicative sequence from prime eigenvalues.

    Prime powers follow ``a_{p^{k+1}} = lambda_p a_{p^k} - p^{w-1} a_{p^{k-1}}``;
    primes missing from ``lambdas`` get eigenvalue 0. Integer eigenvalues
    give exact integer coefficients.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    a: list = [None] * (M + 1)
    a[1] = 1
    for p in range(2, M + 1):
        if not _is_prime(p):
            continue
        lam = lambdas.get(p, 0)
        prev, cur = 1, lam
        pk = p
        while pk <= M:
            a[pk] = cur
            prev, cur = cur, lam * cur - p ** (weight - 1) * prev
            pk *= p
    for n in range(2, M + 1):
        if a[n] is not None:
            continue
        # split off the smallest prime power
        p = next(k for k in range(2, n + 1) if n % k == 0)
        pk = p
        while n % (pk * p) == 0:
            pk *= p
        a[n] = a[pk] * a[n // pk]
    return a[1:]
