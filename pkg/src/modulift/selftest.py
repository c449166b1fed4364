"""Quick invariant checks behind ``modulift selftest``."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .atsp_core import exact_optimum, random_instance, tour_cost, validate_tour
from .certifier import certify, serialize_report
from .encoding import e_closed_form, e_series, encode, equilibrium_residual
from .filters.fourier import q_coefficients, synthesize, vandermonde_system
from .filters.hecke import eigen_sequence, hecke_residuals
from .filters.lfunction import complex_gamma
from .modular_lift import LiftConfig, coset_reps, poincare_eval, seed_derivative, seed_eval, seed_zeros, select_weight


def _oracles() -> bool:
    for seed in range(1, 9):
        inst = random_instance(4 + seed % 4, 1, 50, seed)
        hk = exact_optimum(inst, "held_karp")
        bf = exact_optimum(inst, "brute_force")
        if hk.optimal_cost != bf.optimal_cost or not validate_tour(inst, hk.optimal_tour):
            return False
    return True


def _series() -> bool:
    rng = np.random.default_rng(3)
    for _ in range(20):
        s, tau = (complex(*rng.uniform(-1.4, 1.4, 2)) for _ in range(2))
        if abs(e_series(s, tau, 60) - e_closed_form(s, tau)) >= 1e-10:
            return False
    inst = random_instance(6, 1, 100, 11)
    opt = exact_optimum(inst)
    enc = encode(inst, opt.optimal_tour, opt.optimal_cost)
    return abs(equilibrium_residual(enc, 60)) < 1e-9


def _seed() -> bool:
    for t in (0.1, 0.5, math.exp(-2 * math.pi)):
        for zk in seed_zeros(t, -2, 2):
            if abs(seed_eval(zk.z, t)) >= 1e-13 or abs(seed_derivative(zk.z) - 2j * math.pi * t) >= 1e-12:
                return False
    return True


def _cosets() -> bool:
    reps = coset_reps(32)
    ok = all(g.a * g.d - g.b * g.c == 1 and g.a % 4 == 1 and g.d % 4 == 1 and g.b % 4 == 0 and g.c % 4 == 0
             for g in reps)
    return ok and [(g.a, g.b, g.c, g.d) for g in coset_reps(1)] == [(1, 0, 0, 1)]


def _lift() -> bool:
    cfg = LiftConfig.for_weight(4, H=16)
    z = complex(0.3, 0.9)
    p1 = poincare_eval(z, 0.4, cfg)
    p2 = poincare_eval(z, 0.4, LiftConfig.for_weight(4, H=32))
    single = poincare_eval(z, 0.4, LiftConfig.for_weight(4, H=1))
    return abs(p1.value - p2.value) <= p1.tail_bound and single.value == seed_eval(z, 0.4)


def _filters() -> bool:
    coeffs = np.zeros(16, dtype=complex)
    coeffs[[2, 7, 11]] = [1.0, -0.5j, 2.0]
    qe = q_coefficients(synthesize(coeffs), 16, vectorized=True)
    if np.any(np.abs(qe.coeffs - coeffs) > np.maximum(qe.errors, 1e-12)):
        return False
    if vandermonde_system([0.1, 0.1], 2).rank != 1:
        return False
    seq = eigen_sequence({3: 2, 5: -3, 7: 1}, 4, 60)
    if hecke_residuals(seq, 4).max_residual >= 1e-12:
        return False
    s = complex(2.5, 1.0)
    return (abs(complex_gamma(0.5) - math.sqrt(math.pi)) < 1e-12
            and abs(complex_gamma(s + 1) - s * complex_gamma(s)) < 1e-10 * abs(s * complex_gamma(s)))


def _weights() -> bool:
    return select_weight(12, 4, "min") == 4 and select_weight(4, 4, "min") is None


def _certifier() -> bool:
    inst = random_instance(5, 1, 100, 42)
    opt = exact_optimum(inst)
    first = serialize_report(certify(inst, opt.optimal_tour))
    second = serialize_report(certify(inst, opt.optimal_tour))
    if first != second or '"rejected-t-ne-1"' in first:
        return False
    other = opt.optimal_tour.reversed()
    if tour_cost(inst, other) == opt.optimal_cost:
        return True
    return certify(inst, other).verdict == "rejected-t-ne-1"


CHECKS: dict[str, Callable[[], bool]] = {
    "oracle equivalence": _oracles,
    "series identity and equilibrium residual": _series,
    "seed zeros": _seed,
    "coset representatives": _cosets,
    "lift truncation bound": _lift,
    "fourier, hecke and gamma filters": _filters,
    "weight arithmetic": _weights,
    "certifier soundness and determinism": _certifier,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    all_ok = True
    for name, check in CHECKS.items():
        try:
            ok = bool(check())
        except Exception as exc:  # report and keep going
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        echo(f"{'PASS' if ok else 'FAIL'}  {name}")
        all_ok &= ok
    return all_ok
