"""ATSP instances, tours, TSPLIB I/O and exact optimum oracles.

Cities are 0-indexed internally. Costs stay exact (``int`` or
``Fraction``); floating point is only introduced by the encoding layer.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

Cost = Union[int, Fraction]
Arc = tuple[int, int]

HELD_KARP_LIMIT = 14
BRUTE_FORCE_LIMIT = 10


class TsplibError(ValueError):
    pass


class OracleRangeError(ValueError):
    pass


def _exact(value) -> Cost:
    if isinstance(value, bool):
        raise TypeError("boolean is not a cost")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cost {value!r} is not an exact integer or rational")


@dataclass(frozen=True)
class AtspInstance:
    """Directed graph with strictly positive exact arc costs.

    ``arcs`` is ``None`` for a complete digraph; otherwise it lists the
    available arcs explicitly and ``costs`` entries off that set are ignored.
    """

    name: str
    costs: tuple[tuple[Cost | None, ...], ...]
    arcs: frozenset[Arc] | None = None

    def __post_init__(self):
        n = len(self.costs)
        if n < 3:
            raise ValueError(f"an ATSP instance needs n >= 3 cities, got {n}")
        rows = []
        for a, row in enumerate(self.costs):
            if len(row) != n:
                raise ValueError(f"cost row {a} has {len(row)} entries, expected {n}")
            cleaned = []
            for b, value in enumerate(row):
                if a == b or (self.arcs is not None and (a, b) not in self.arcs):
                    cleaned.append(None if value is None else _exact(value))
                    continue
                if value is None:
                    raise ValueError(f"arc ({a}, {b}) has no cost")
                value = _exact(value)
                if value <= 0:
                    raise ValueError(f"non-positive cost {value} on arc ({a}, {b})")
                cleaned.append(value)
            rows.append(tuple(cleaned))
        object.__setattr__(self, "costs", tuple(rows))
        if self.arcs is not None:
            arcs = frozenset((int(a), int(b)) for a, b in self.arcs)
            for a, b in arcs:
                if a == b or not (0 <= a < n and 0 <= b < n):
                    raise ValueError(f"invalid arc ({a}, {b})")
            out_deg = [0] * n
            in_deg = [0] * n
            for a, b in arcs:
                out_deg[a] += 1
                in_deg[b] += 1
            for v in range(n):
                if out_deg[v] == 0 or in_deg[v] == 0:
                    raise ValueError(f"vertex {v} needs in-degree and out-degree >= 1")
            object.__setattr__(self, "arcs", arcs)

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def is_complete(self) -> bool:
        return self.arcs is None

    def has_arc(self, a: int, b: int) -> bool:
        if a == b:
            return False
        if self.arcs is None:
            return 0 <= a < self.n and 0 <= b < self.n
        return (a, b) in self.arcs

    def arc_list(self) -> list[Arc]:
        """All arcs in row-major order; this order is used for every reduction."""
        return [(a, b) for a in range(self.n) for b in range(self.n) if self.has_arc(a, b)]

    @property
    def num_arcs(self) -> int:
        return len(self.arc_list())

    def cost(self, a: int, b: int) -> Cost:
        if not self.has_arc(a, b):
            raise KeyError(f"arc ({a}, {b}) is not in the instance")
        return self.costs[a][b]


@dataclass(frozen=True)
class Tour:
    """Cyclic visiting order over cities ``0..n-1``."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError(f"tour {order} is not a permutation of 0..{len(order) - 1}")
        if len(order) < 3:
            raise ValueError("a tour needs at least 3 cities")
        object.__setattr__(self, "order", order)

    @classmethod
    def from_labels(cls, text: str) -> "Tour":
        """Parse a comma-separated, 1-indexed visiting order such as ``"1,3,2"``."""
        try:
            labels = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
        except ValueError as exc:
            raise ValueError(f"cannot parse tour {text!r}") from exc
        return cls(tuple(v - 1 for v in labels))

    def labels(self) -> list[int]:
        return [v + 1 for v in self.order]

    @property
    def n(self) -> int:
        return len(self.order)

    def arcs(self) -> list[Arc]:
        k = len(self.order)
        return [(self.order[i], self.order[(i + 1) % k]) for i in range(k)]

    def indicator(self) -> dict[Arc, int]:
        """Arcs with x = 1; every other arc is implicitly 0."""
        return {arc: 1 for arc in self.arcs()}

    def canonical(self) -> "Tour":
        i = self.order.index(0)
        return Tour(self.order[i:] + self.order[:i])

    def reversed(self) -> "Tour":
        return Tour(tuple(reversed(self.order)))


@dataclass(frozen=True)
class OracleResult:
    optimal_tour: Tour
    optimal_cost: Cost
    method: str


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    constraint: str | None = None  # "domain" | "out_degree" | "in_degree" | "subtour"
    vertex: int | None = None
    subset: frozenset[int] | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# TSPLIB

_SECTION_RE = re.compile(r"^[A-Z_]+_SECTION\b", re.IGNORECASE)


def parse_tsplib(text: str) -> AtspInstance:
    """Parse an EXPLICIT / FULL_MATRIX ATSP file."""
    header: dict[str, str] = {}
    numbers: list[str] = []
    in_weights = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.upper() == "EOF":
            break
        if in_weights:
            if _SECTION_RE.match(line):
                break
            numbers.extend(line.split())
            continue
        if line.upper().startswith("EDGE_WEIGHT_SECTION"):
            in_weights = True
            rest = line[len("EDGE_WEIGHT_SECTION"):].strip(" :")
            numbers.extend(rest.split())
            continue
        if ":" not in line:
            raise TsplibError(f"malformed header line {line!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        header[key.upper()] = value

    ew_type = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if ew_type != "EXPLICIT":
        raise TsplibError(f"unsupported weight type {ew_type or '<missing>'!r}")
    ew_format = header.get("EDGE_WEIGHT_FORMAT", "").upper()
    if ew_format != "FULL_MATRIX":
        raise TsplibError(f"unsupported weight format {ew_format or '<missing>'!r}")
    problem_type = header.get("TYPE", "ATSP").upper()
    if problem_type not in ("ATSP", "TSP"):
        raise TsplibError(f"unsupported problem type {problem_type!r}")
    if "DIMENSION" not in header:
        raise TsplibError("missing DIMENSION")
    try:
        n = int(header["DIMENSION"])
    except ValueError as exc:
        raise TsplibError(f"bad DIMENSION {header['DIMENSION']!r}") from exc
    if len(numbers) != n * n:
        raise TsplibError(f"dimension mismatch: expected {n * n} weights, found {len(numbers)}")
    try:
        values = [int(tok) for tok in numbers]
    except ValueError as exc:
        raise TsplibError("edge weights must be integers") from exc

    costs = []
    for a in range(n):
        row = values[a * n:(a + 1) * n]
        for b, value in enumerate(row):
            if a != b and value <= 0:
                raise TsplibError(f"non-positive cost {value} on arc ({a + 1}, {b + 1})")
        costs.append(tuple(0 if a == b else v for b, v in enumerate(row)))
    name = header.get("NAME", "unnamed")
    return AtspInstance(name=name, costs=tuple(costs))


def format_tsplib(inst: AtspInstance) -> str:
    if not inst.is_complete:
        raise ValueError("FULL_MATRIX output needs a complete instance")
    for row in inst.costs:
        for value in row:
            if value is not None and not isinstance(value, int):
                raise ValueError("TSPLIB output needs integer costs")
    width = max(len(str(v)) for row in inst.costs for v in row if v is not None)
    lines = [
        f"NAME: {inst.name}",
        "TYPE: ATSP",
        f"DIMENSION: {inst.n}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    for a, row in enumerate(inst.costs):
        lines.append(" ".join(str(0 if a == b else v).rjust(width) for b, v in enumerate(row)))
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def random_instance(n: int, cost_lo: int, cost_hi: int, rng_seed: int) -> AtspInstance:
    """Complete instance with independent uniform integer costs in ``[cost_lo, cost_hi]``."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if not (1 <= cost_lo <= cost_hi):
        raise ValueError(f"invalid cost range [{cost_lo}, {cost_hi}]")
    rng = np.random.default_rng(rng_seed)
    draws = rng.integers(cost_lo, cost_hi, size=(n, n), endpoint=True)
    costs = tuple(
        tuple(0 if a == b else int(draws[a, b]) for b in range(n)) for a in range(n)
    )
    return AtspInstance(name=f"rand-n{n}-s{rng_seed}", costs=costs)


# ---------------------------------------------------------------------------
# tours and costs

def tour_cost(inst: AtspInstance, tour: Tour) -> Cost:
    if tour.n != inst.n:
        raise ValueError(f"tour has {tour.n} cities, instance has {inst.n}")
    total: Cost = 0
    for a, b in tour.arcs():
        if not inst.has_arc(a, b):
            raise ValueError(f"tour uses missing arc ({a}, {b})")
        total += inst.costs[a][b]
    return total


def _indicator_dict(inst: AtspInstance, x) -> dict[Arc, int]:
    if isinstance(x, Tour):
        return x.indicator()
    if isinstance(x, Mapping):
        return {(int(a), int(b)): v for (a, b), v in x.items()}
    arr = np.asarray(x)
    if arr.shape != (inst.n, inst.n):
        raise ValueError(f"indicator matrix must be {inst.n}x{inst.n}")
    return {(a, b): arr[a, b].item() for a in range(inst.n) for b in range(inst.n) if a != b}


def validate_tour(inst: AtspInstance, x) -> ValidationResult:
    """Check an arc indicator against the degree and subtour constraints.

    Violations are returned, never raised. The first violated constraint
    wins, checked in the order out-degree, in-degree, subtour.
    """
    n = inst.n
    chosen = _indicator_dict(inst, x)
    for (a, b), v in sorted(chosen.items()):
        if v not in (0, 1):
            return ValidationResult(False, "domain", a, None, f"x[{a},{b}] = {v} is not binary")
        if v == 1 and not inst.has_arc(a, b):
            return ValidationResult(False, "domain", a, None, f"arc ({a}, {b}) is not in the instance")
    succ: dict[int, list[int]] = {v: [] for v in range(n)}
    pred: dict[int, list[int]] = {v: [] for v in range(n)}
    for (a, b), v in chosen.items():
        if v == 1:
            succ[a].append(b)
            pred[b].append(a)
    for v in range(n):
        if len(succ[v]) != 1:
            return ValidationResult(False, "out_degree", v, None, f"vertex {v} has out-degree {len(succ[v])}")
    for v in range(n):
        if len(pred[v]) != 1:
            return ValidationResult(False, "in_degree", v, None, f"vertex {v} has in-degree {len(pred[v])}")
    # degrees are all 1, so x is a permutation; a short cycle through 0 is a violated subtour set
    cycle = [0]
    v = succ[0][0]
    while v != 0:
        cycle.append(v)
        v = succ[v][0]
    if len(cycle) < n:
        subset = frozenset(cycle)
        return ValidationResult(False, "subtour", 0, subset, f"subtour on {sorted(subset)}")
    return ValidationResult(True, message="ok")


def subtour_lhs(inst: AtspInstance, x, subset: Iterable[int]) -> int:
    """Integer left side of the subtour constraint: selected arcs inside ``subset``."""
    chosen = _indicator_dict(inst, x)
    s = set(subset)
    return sum(int(v) for (a, b), v in chosen.items() if a in s and b in s and a != b)


# ---------------------------------------------------------------------------
# exact oracles

def _held_karp(inst: AtspInstance) -> tuple[Cost, list[int]]:
    n = inst.n
    costs = inst.costs
    has = [[inst.has_arc(a, b) for b in range(n)] for a in range(n)]
    # subsets of cities 1..n-1 encoded as bitmask over bit (v-1); start city is 0
    full = (1 << (n - 1)) - 1
    best: dict[tuple[int, int], Cost] = {}
    parent: dict[tuple[int, int], int] = {}
    for v in range(1, n):
        if has[0][v]:
            best[(1 << (v - 1), v)] = costs[0][v]
    for size in range(2, n):
        for combo in itertools.combinations(range(1, n), size):
            mask = 0
            for v in combo:
                mask |= 1 << (v - 1)
            for v in combo:
                prev_mask = mask ^ (1 << (v - 1))
                chosen = None
                chosen_u = -1
                for u in combo:
                    if u == v or not has[u][v]:
                        continue
                    prev = best.get((prev_mask, u))
                    if prev is None:
                        continue
                    cand = prev + costs[u][v]
                    if chosen is None or cand < chosen:
                        chosen = cand
                        chosen_u = u
                if chosen is not None:
                    best[(mask, v)] = chosen
                    parent[(mask, v)] = chosen_u
    total = None
    last = -1
    for v in range(1, n):
        prev = best.get((full, v))
        if prev is None or not has[v][0]:
            continue
        cand = prev + costs[v][0]
        if total is None or cand < total:
            total = cand
            last = v
    if total is None:
        raise ValueError("instance has no Hamiltonian cycle")
    path = []
    mask, v = full, last
    while v != -1 and mask:
        path.append(v)
        u = parent.get((mask, v), -1)
        mask ^= 1 << (v - 1)
        v = u
    order = [0] + list(reversed(path))
    return total, order


def _brute_force(inst: AtspInstance) -> tuple[Cost, list[int]]:
    n = inst.n
    best = None
    best_order: list[int] = []
    for perm in itertools.permutations(range(1, n)):
        order = (0,) + perm
        total: Cost = 0
        ok = True
        for i in range(n):
            a, b = order[i], order[(i + 1) % n]
            if not inst.has_arc(a, b):
                ok = False
                break
            total += inst.costs[a][b]
        if ok and (best is None or total < best):
            best = total
            best_order = list(order)
    if best is None:
        raise ValueError("instance has no Hamiltonian cycle")
    return best, best_order


def exact_optimum(
    inst: AtspInstance,
    method: str = "held_karp",
    limit: int | None = None,
) -> OracleResult:
    """Provably optimal tour via Held-Karp (default) or exhaustive search."""
    if method == "held_karp":
        cap = HELD_KARP_LIMIT if limit is None else limit
        solver = _held_karp
    elif method == "brute_force":
        cap = BRUTE_FORCE_LIMIT if limit is None else limit
        solver = _brute_force
    else:
        raise ValueError(f"unknown oracle method {method!r}")
    if inst.n > cap:
        raise OracleRangeError(f"oracle out of range: n = {inst.n} exceeds the {method} limit {cap}")
    cost, order = solver(inst)
    tour = Tour(tuple(order))
    assert tour_cost(inst, tour) == cost
    return OracleResult(optimal_tour=tour, optimal_cost=cost, method=method)


def all_tours(n: int) -> Iterable[Tour]:
    """Every directed Hamiltonian cycle on ``n`` cities, starting at city 0."""
    for perm in itertools.permutations(range(1, n)):
        yield Tour((0,) + perm)


def ranked_tours(inst: AtspInstance) -> list[tuple[Cost, Tour]]:
    """All feasible tours sorted by (cost, order). Only sensible for small n."""
    out = []
    for tour in all_tours(inst.n):
        try:
            out.append((tour_cost(inst, tour), tour))
        except ValueError:
            continue
    out.sort(key=lambda item: (item[0], item[1].order))
    return out
