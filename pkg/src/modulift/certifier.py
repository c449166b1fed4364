"""End-to-end optimality certificate for a candidate tour.

Stages run in order and stop at the first rejection:

1. exact ``t`` gate (``t = r_ref / cost`` compared to 1 in rational arithmetic)
2. encoding and equilibrium residual (recorded, never rejects)
3. per-arc lift membership (never rejects; uncertainty downgrades the verdict)
4. Fourier / Vandermonde filter
5. Hecke relations
6. central value of the completed L-function

Floating-point stages compare a scalar against a tolerance *and* its
propagated error bound: below the tolerance passes, above tolerance plus
error rejects, anything else is indeterminate.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import __version__
from .atsp_core import AtspInstance, OracleRangeError, OracleResult, Tour, exact_optimum, tour_cost, validate_tour
from .encoding import DEFAULT_Q, encode, equilibrium_residual, equilibrium_residual_exact
from .filters.fourier import q_coefficients, q_of, vandermonde_system
from .filters.hecke import hecke_error_bound, hecke_residuals, odd_primes_upto
from .filters.lfunction import (
    central_difference,
    central_report,
    default_probes,
    infer_epsilon,
    lambda_complete,
    lambda_prefactor,
)
from .modular_lift import (
    LiftConfig,
    admissible_weights,
    classify_membership,
    poincare_eval,
    poincare_eval_many,
    select_weight,
    tail_bound,
    zero_budget,
)

REPORT_VERSION = "modulift-report/1"

CERTIFIED = "certified-optimal"
REJECTED_T = "rejected-t-ne-1"
REJECTED_FOURIER = "rejected-fourier"
REJECTED_HECKE = "rejected-hecke"
REJECTED_LAMBDA = "rejected-lambda"
INDETERMINATE = "indeterminate"
VERDICTS = (CERTIFIED, REJECTED_T, REJECTED_FOURIER, REJECTED_HECKE, REJECTED_LAMBDA, INDETERMINATE)

STAGES = ("t_gate", "equilibrium", "membership", "fourier", "hecke", "l_function")

NOTE_TEXT = {
    "self-normalized": "r_ref is the candidate's own cost, so t = 1 by construction and optimality cannot be certified",
    "objective-sum-convention": "the normalized objective sum evaluates to 1/t, which equals t only when t = 1",
    "points-outside-upper-half-plane": "out-of-tour arcs with cost >= r_ref encode below the real axis and are left out of the lift stages",
    "coincident-arc-points": "in-tour arcs have s = tau, so encoded points repeat and the Vandermonde matrix loses rank",
    "lift-membership-indeterminate": "some lift-membership magnitudes fall between zero_tol and sep_margin * zero_tol",
    "lift-membership-contradiction": "some in-tour arc points are clear non-zeros of the truncated lift, or out-of-tour points are zeros",
    "lift-not-cuspidal": "the expansion of the lift has a non-zero constant term",
    "non-eigen-form": "Hecke residuals do not vanish; no eigenspace projection is performed",
    "lambda-sign-undetermined": "probe ratios of the completed L-function fix neither sign",
    "lambda-sign-pairing": "the scalar is Lambda(s0) for eps = +1 and Lambda'(s0) for eps = -1, while the functional equation forces the other one to vanish",
    "lambda-tail-unbounded": "the truncated Dirichlet series has no finite tail bound at the centre",
}


class CertificationError(ValueError):
    pass


def _num(x: float) -> float | str:
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _cplx(z: complex) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _decide(scalar: float, tol: float, err: float) -> str:
    if scalar <= tol:
        return "passed"
    if scalar > tol + err:
        return "rejected"
    return "indeterminate"


@dataclass
class CertificateReport:
    version: str
    package_version: str
    instance: str
    n: int
    num_arcs: int
    tour: list[int]
    tour_cost: str
    mode: str
    r_ref: str
    t: str
    t_value: float
    objective_sum: str
    weight: int
    zero_budget: dict
    config: dict
    stages: dict
    equilibrium: dict | None = None
    membership: dict | None = None
    fourier: dict | None = None
    hecke: dict | None = None
    l_function: dict | None = None
    verdict: str = INDETERMINATE
    witness: dict | None = None
    notes: list[str] = field(default_factory=list)
    claims: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CertificateReport":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)


def serialize_report(report: CertificateReport) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def parse_report(text: str) -> CertificateReport:
    data = json.loads(text)
    if data.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {data.get('version')!r}")
    return CertificateReport.from_dict(data)


@dataclass(frozen=True)
class FilterSettings:
    M: int | None = None
    y0: float = 0.8
    Q: int = DEFAULT_Q
    fourier_tol: float | None = None
    hecke_tol: float | None = None
    lambda_tol: float | None = None
    sign_tol: float = 1e-6
    step: float = 1e-4


def _note(notes: list[str], code: str) -> None:
    line = f"{code}: {NOTE_TEXT[code]}"
    if line not in notes:
        notes.append(line)


def _membership_stage(enc, t: float, cfg: LiftConfig, notes: list[str]) -> tuple[str, dict]:
    points = []
    for e in enc.arcs:
        if e.in_upper_half_plane:
            points.extend([e.s, e.tau])
    unique = sorted(set(points), key=lambda z: (z.imag, z.real))
    lifted = dict(zip(unique, poincare_eval_many(unique, t, cfg)))
    counts = {
        "in_tour": {"member": 0, "non_member": 0, "indeterminate": 0},
        "out_of_tour": {"member": 0, "non_member": 0, "indeterminate": 0},
        "outside_half_plane": 0,
    }
    arcs = []
    for e in enc.arcs:
        side = "in_tour" if e.x == 1 else "out_of_tour"
        if not e.in_upper_half_plane:
            counts["outside_half_plane"] += 1
            arcs.append({"arc": [e.arc[0] + 1, e.arc[1] + 1], "x": e.x, "status": "outside"})
            continue
        ms = classify_membership(lifted[e.s], cfg)
        mt = classify_membership(lifted[e.tau], cfg)
        for m in (ms, mt):
            counts[side][m.status] += 1
        arcs.append({
            "arc": [e.arc[0] + 1, e.arc[1] + 1],
            "x": e.x,
            "s_status": ms.status,
            "s_margin": _num(ms.margin),
            "tau_status": mt.status,
            "tau_margin": _num(mt.margin),
            "tail_bound": _num(max(ms.tail_bound, mt.tail_bound)),
        })
    if counts["outside_half_plane"]:
        _note(notes, "points-outside-upper-half-plane")
    ok = (
        counts["in_tour"]["non_member"] == 0
        and counts["in_tour"]["indeterminate"] == 0
        and counts["out_of_tour"]["member"] == 0
        and counts["out_of_tour"]["indeterminate"] == 0
    )
    if counts["in_tour"]["indeterminate"] or counts["out_of_tour"]["indeterminate"]:
        _note(notes, "lift-membership-indeterminate")
    if counts["in_tour"]["non_member"] or counts["out_of_tour"]["member"]:
        _note(notes, "lift-membership-contradiction")
    return ("passed" if ok else "indeterminate"), {"counts": counts, "arcs": arcs}


def certify(
    inst: AtspInstance,
    candidate: Tour,
    cfg: LiftConfig | None = None,
    mode: str = "oracle",
    *,
    weight_policy: str = "min",
    settings: FilterSettings | None = None,
    oracle: OracleResult | None = None,
) -> CertificateReport:
    settings = settings or FilterSettings()
    if mode not in ("oracle", "self-normalized"):
        raise CertificationError(f"unknown mode {mode!r}")
    check = validate_tour(inst, candidate)
    if not check.ok:
        raise CertificationError(f"invalid candidate: {check.message}")
    num_arcs = inst.num_arcs
    if cfg is None:
        weight = select_weight(num_arcs, inst.n, weight_policy)
        if weight is None:
            raise CertificationError(f"no admissible weight for |A| = {num_arcs} (policy {weight_policy})")
        cfg = LiftConfig.for_weight(weight)
    elif cfg.weight not in admissible_weights(num_arcs):
        raise CertificationError(f"no admissible weight: {cfg.weight} violates 4w - 7 < 2|A| = {2 * num_arcs}")
    M = settings.M if settings.M is not None else 2 * num_arcs
    if M < 2 * num_arcs:
        raise CertificationError(f"M = {M} violates the requirement M >= 2|A| = {2 * num_arcs}")

    notes: list[str] = []
    stages = {name: "skipped" for name in STAGES}
    cost = tour_cost(inst, candidate)

    # stage 1: exact t gate
    if mode == "oracle":
        if oracle is None:
            try:
                oracle = exact_optimum(inst)
            except OracleRangeError as exc:
                raise CertificationError(f"oracle unavailable: {exc}") from exc
        r_ref = oracle.optimal_cost
    else:
        r_ref = cost
        _note(notes, "self-normalized")
    t = Fraction(r_ref) / Fraction(cost)
    objective_sum = 1 / t
    if objective_sum != t:
        _note(notes, "objective-sum-convention")

    budget = zero_budget(cfg.weight, inst.n)
    report = CertificateReport(
        version=REPORT_VERSION,
        package_version=__version__,
        instance=inst.name,
        n=inst.n,
        num_arcs=num_arcs,
        tour=candidate.labels(),
        tour_cost=str(cost),
        mode=mode,
        r_ref=str(r_ref),
        t=str(t),
        t_value=float(t),
        objective_sum=str(objective_sum),
        weight=cfg.weight,
        zero_budget=asdict(budget),
        config={
            "H": cfg.H,
            "zero_tol": cfg.zero_tol,
            "tail_tol": cfg.tail_tol,
            "sep_margin": cfg.sep_margin,
            "M": M,
            "y0": settings.y0,
            "Q": settings.Q,
        },
        stages=stages,
        notes=notes,
        claims={
            "claimed": "all filters pass if and only if the tour is optimal",
            "verified_here": "soundness of certified-optimal against the exact oracle; the converse is not verified",
        },
    )

    if t != 1:
        stages["t_gate"] = "rejected"
        report.verdict = REJECTED_T
        report.witness = {"stage": "t_gate", "scalar": str(t), "tolerance": 0, "error_bound": 0}
        return report
    stages["t_gate"] = "passed"

    # stage 2: encoding and equilibrium residual
    enc = encode(inst, candidate, r_ref)
    residual = equilibrium_residual(enc, settings.Q)
    report.equilibrium = {
        "residual": _cplx(residual),
        "closed_form": str(equilibrium_residual_exact(enc)),
        "Q": settings.Q,
    }
    stages["equilibrium"] = "recorded"
    t_float = float(t)

    # stage 3: lift membership
    stages["membership"], report.membership = _membership_stage(enc, t_float, cfg, notes)

    # stage 4: Fourier filter
    upper = [z for e in enc.arcs if e.in_upper_half_plane for z in (e.s, e.tau)]
    if any(e.x == 1 for e in enc.arcs):
        _note(notes, "coincident-arc-points")
    y0 = settings.y0
    line_tail = max(tail_bound(complex(x, y0), t_float, cfg.weight, cfg.H) for x in np.linspace(0, 4, 33))
    lift_fn = lambda z: poincare_eval(z, t_float, cfg).value  # noqa: E731
    expansion = q_coefficients(
        lift_fn,
        M,
        y0=y0,
        periodic_tol=1e-8 + 2 * line_tail,
        sample_error=line_tail + 1e-15,
        weight=cfg.weight,
    )
    coeffs = expansion.coeffs
    errors = expansion.errors
    fourier_tol = settings.fourier_tol if settings.fourier_tol is not None else cfg.zero_tol
    qs = q_of(np.array(upper, dtype=complex))
    system = vandermonde_system(qs, M)
    va = system.apply(coeffs)
    va_err = np.abs(system.matrix) @ errors
    idx = int(np.argmax(np.abs(va)))
    fourier_scalar = float(np.abs(va[idx]))
    fourier_err = float(va_err[idx])
    stages["fourier"] = _decide(fourier_scalar, fourier_tol, fourier_err)
    if abs(expansion.constant) > fourier_tol:
        _note(notes, "lift-not-cuspidal")
    report.fourier = {
        "points": int(len(qs)),
        "M": M,
        "rank": system.rank,
        "kernel_dim": system.kernel_dim,
        "max_abs_coeff": _num(float(np.max(np.abs(coeffs)))),
        "constant_term": _cplx(expansion.constant),
        "max_abs_va": _num(fourier_scalar),
        "error_bound": _num(fourier_err),
        "tolerance": fourier_tol,
        "alias_estimate": _num(expansion.alias_estimate),
        "line_tail_bound": _num(line_tail),
    }
    if stages["fourier"] == "rejected":
        report.verdict = REJECTED_FOURIER
        report.witness = {"stage": "fourier", "scalar": _num(fourier_scalar), "tolerance": fourier_tol,
                          "error_bound": _num(fourier_err)}
        return report

    # stage 5: Hecke relations
    hecke_tol = settings.hecke_tol if settings.hecke_tol is not None else cfg.zero_tol
    primes = odd_primes_upto(int(math.isqrt(M)))
    hecke = hecke_residuals(coeffs, cfg.weight, primes)
    bounds = hecke_error_bound(coeffs, errors, hecke)
    residuals = {**hecke.prime_residuals, **hecke.pair_residuals}
    decisions = [_decide(abs(v), hecke_tol, bounds[k]) for k, v in residuals.items()]
    if "rejected" in decisions:
        stages["hecke"] = "rejected"
    elif all(d == "passed" for d in decisions):
        stages["hecke"] = "passed"
    else:
        stages["hecke"] = "indeterminate"
    if stages["hecke"] != "passed":
        _note(notes, "non-eigen-form")
    worst_key = max(residuals, key=lambda k: abs(residuals[k]) - bounds[k]) if residuals else None
    report.hecke = {
        "primes": list(hecke.primes),
        "prime_residuals": {str(p): _cplx(v) for p, v in hecke.prime_residuals.items()},
        "pair_count": len(hecke.pair_residuals),
        "max_residual": _num(hecke.max_residual),
        "tolerance": hecke_tol,
    }
    if stages["hecke"] == "rejected":
        report.verdict = REJECTED_HECKE
        report.witness = {"stage": "hecke", "index": str(worst_key), "scalar": _num(abs(residuals[worst_key])),
                          "tolerance": hecke_tol, "error_bound": _num(bounds[worst_key])}
        return report

    # stage 6: completed L-function
    lambda_tol = settings.lambda_tol if settings.lambda_tol is not None else cfg.zero_tol
    lam = lambda s: lambda_complete(coeffs, cfg.weight, s, M).value  # noqa: E731
    s0 = (cfg.weight + 1) / 2
    tail = lambda_complete(coeffs, cfg.weight, s0, M).tail
    if not math.isfinite(tail):
        _note(notes, "lambda-tail-unbounded")
    try:
        eps = infer_epsilon(lam, cfg.weight, default_probes(cfg.weight), settings.sign_tol)
    except ValueError:
        eps = None
    if eps is None:
        _note(notes, "lambda-sign-undetermined")
        value = lam(s0)
        deriv = central_difference(lam, s0, settings.step)
        report.l_function = {"epsilon": None, "s0": s0, "value": _cplx(value), "derivative": _cplx(deriv),
                             "tail": _num(tail), "tolerance": lambda_tol}
        stages["l_function"] = "indeterminate"
    else:
        _note(notes, "lambda-sign-pairing")
        lr = central_report(lam, cfg.weight, eps, h=settings.step, tail=tail)
        n = np.arange(1, M + 1)
        err = tail + abs(lambda_prefactor(cfg.weight, s0)) * float(np.sum(errors * n ** (-s0)))
        if eps == -1:
            # the scalar is a difference quotient: value errors scale by 1/h
            err = err / settings.step + lr.richardson_gap
        stages["l_function"] = _decide(abs(lr.scalar), lambda_tol, err)
        report.l_function = {**{k: _num(v) if isinstance(v, float) else v for k, v in lr.to_dict().items()},
                             "tail": _num(tail), "error_bound": _num(err), "tolerance": lambda_tol}
        if stages["l_function"] == "rejected":
            report.verdict = REJECTED_LAMBDA
            report.witness = {"stage": "l_function", "scalar": _num(abs(lr.scalar)), "tolerance": lambda_tol,
                              "error_bound": _num(err)}
            return report

    filter_stages = ("membership", "fourier", "hecke", "l_function")
    if all(stages[s] == "passed" for s in filter_stages) and mode == "oracle" and t == 1:
        report.verdict = CERTIFIED
    else:
        report.verdict = INDETERMINATE
    return report


def exit_code(report: CertificateReport) -> int:
    if report.verdict == CERTIFIED:
        return 0
    if report.verdict.startswith("rejected"):
        return 2
    return 3


def summary_text(report: CertificateReport) -> str:
    lines = [
        f"instance      {report.instance} (n = {report.n}, |A| = {report.num_arcs})",
        f"tour          {','.join(map(str, report.tour))}  cost {report.tour_cost}",
        f"mode          {report.mode}  r_ref {report.r_ref}  t {report.t}",
        f"weight        {report.weight}  budget {report.zero_budget}",
        "stages",
    ]
    for name in STAGES:
        lines.append(f"  {name:<12}{report.stages[name]}")
    if report.membership:
        lines.append(f"membership    {report.membership['counts']}")
    if report.fourier:
        f = report.fourier
        lines.append(f"fourier       max|Va| {f['max_abs_va']}  bound {f['error_bound']}  kernel_dim {f['kernel_dim']}")
    if report.hecke:
        lines.append(f"hecke         max residual {report.hecke['max_residual']}")
    if report.l_function:
        lf = report.l_function
        lines.append(f"l-function    eps {lf['epsilon']}  value {lf['value']}  derivative {lf['derivative']}")
    lines.append(f"verdict       {report.verdict}")
    if report.witness:
        lines.append(f"witness       {report.witness}")
    lines.append("discrepancy notes")
    if report.notes:
        lines.extend(f"  - {note}" for note in report.notes)
    else:
        lines.append("  (none)")
    return "\n".join(lines) + "\n"
