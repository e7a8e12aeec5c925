"""Diagonal concentration: the normalized cell measure m(i,j) of an edge set
at a prime p, the bilinear-bound cell checker, the exhaustive center search,
assembly of the concentrated edge set E*, and measure-respecting peeling to
an edge set whose every vertex carries a proportional share of the mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .arith import (
    Interval,
    compare_power,
    const,
    exp_of,
    interval_eval,
    valuation,
)
from .errors import DegenerateMeasure, InvalidParameter
from .model import PairSystem, mu_pairs, mu_point, mu_set
from .quality import (
    DEFAULT_PRECISION_CAP,
    HOLDS,
    INCONCLUSIVE,
    VIOLATED,
    Params,
    neighborhood,
    prime_support,
    restrict,
    w_neighborhood,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class DiagonalMeasure:
    """m(i,j) = mu(E cap (V_i x W_j)) / mu(E) with vertex marginals.

    alpha_i = mu_psi^f(V_i)/mu_psi^f(V), beta_j likewise; cells and both
    marginals each sum to exactly 1 (only nonzero entries stored).
    """

    p: int
    cells: dict[tuple[int, int], Fraction]
    alpha: dict[int, Fraction]
    beta: dict[int, Fraction]
    total: Fraction

    def __post_init__(self):
        if self.total <= 0:
            raise DegenerateMeasure("diagonal measure needs mu(E) > 0")
        for name, mapping in (("cells", self.cells), ("alpha", self.alpha), ("beta", self.beta)):
            s = sum(mapping.values(), _ZERO)
            if s != 1:
                raise InvalidParameter(f"{name} sums to {s}, not 1")
            if any(v < 0 for v in mapping.values()):
                raise InvalidParameter(f"{name} has a negative entry")

    def support_indices(self) -> list[int]:
        idx = {i for i, _ in self.cells} | {j for _, j in self.cells}
        return sorted(idx)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "total": str(self.total),
            "cells": {f"{i},{j}": str(v) for (i, j), v in sorted(self.cells.items())},
            "alpha": {str(i): str(v) for i, v in sorted(self.alpha.items())},
            "beta": {str(j): str(v) for j, v in sorted(self.beta.items())},
        }


@dataclass(frozen=True)
class CenterResult:
    k: int
    tail_mass: Fraction


def diagonal_measure(
    system: PairSystem, edges: Iterable[tuple[int, int]], p: int
) -> DiagonalMeasure:
    """Exact partition of the edge mass by the valuation pair at p."""
    E = frozenset(edges)
    total = mu_pairs(system, E)
    if total == 0:
        raise DegenerateMeasure("mu(E) = 0: m(i,j) is undefined")
    cells: dict[tuple[int, int], Fraction] = {}
    for v, w in E:
        mass = mu_point(system.f, system.psi, v) * mu_point(system.g, system.theta, w)
        if mass == 0:
            continue
        key = (valuation(p, v), valuation(p, w))
        cells[key] = cells.get(key, _ZERO) + mass
    cells = {k: v / total for k, v in cells.items()}

    mu_v = mu_set(system.f, system.psi, system.psi.support())
    mu_w = mu_set(system.g, system.theta, system.theta.support())
    alpha: dict[int, Fraction] = {}
    for v in system.psi.support():
        mv = mu_point(system.f, system.psi, v)
        if mv == 0:
            continue
        i = valuation(p, v)
        alpha[i] = alpha.get(i, _ZERO) + mv / mu_v
    beta: dict[int, Fraction] = {}
    for w in system.theta.support():
        mw = mu_point(system.g, system.theta, w)
        if mw == 0:
            continue
        j = valuation(p, w)
        beta[j] = beta.get(j, _ZERO) + mw / mu_w
    return DiagonalMeasure(p, cells, alpha, beta, total)


def find_center(dm: DiagonalMeasure) -> CenterResult:
    """The integer k minimizing the off-center tail, ties to the smallest k.

    tail(k) = sum of m(i,j) over |i-k| + |j-k| >= 2, scanned exhaustively
    over [min support - 1, max support + 1].
    """
    idx = dm.support_indices()
    best_k = None
    best_tail = None
    for k in range(min(idx) - 1, max(idx) + 2):
        tail = _ZERO
        for (i, j), mass in dm.cells.items():
            if abs(i - k) + abs(j - k) >= 2:
                tail += mass
        if best_tail is None or tail < best_tail:
            best_k, best_tail = k, tail
    return CenterResult(best_k, best_tail)


@dataclass
class CellCheck:
    i: int
    j: int
    mass: Fraction
    bound: object  # Interval or Fraction
    verdict: str


def bilinear_check(
    dm: DiagonalMeasure,
    params: Params,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> list[CellCheck]:
    """Certified per-cell comparison against the bilinear bound

        m(i,j) <= (100 e^C)^(-[p <= p0]) p^(-|i-j|/q) (a_i b_j e^([i!=j] C))^(1/q')

    Diagnostic only: the bound is a statement about minimal counterexamples.
    """
    out = []
    p = dm.p
    below_p0 = p <= params.p0
    for (i, j), mass in sorted(dm.cells.items()):
        ab = dm.alpha.get(i, _ZERO) * dm.beta.get(j, _ZERO)
        if ab == 0:
            verdict = HOLDS if mass <= 0 else VIOLATED
            out.append(CellCheck(i, j, mass, Fraction(0), verdict))
            continue
        factors = [
            (const(100) * exp_of(params.C), Fraction(-1 if below_p0 else 0)),
            (const(p), Fraction(-abs(i - j)) / params.q),
            (
                const(ab) * exp_of(params.C if i != j else 0),
                1 / params.q_prime,
            ),
        ]
        prec = params.precision_bits
        while True:
            bound = interval_eval(Fraction(1), factors, prec)
            if bound.lo_cmp(mass) >= 0:
                out.append(CellCheck(i, j, mass, bound, HOLDS))
                break
            if bound.hi_cmp(mass) < 0:
                out.append(CellCheck(i, j, mass, bound, VIOLATED))
                break
            if prec * 2 > precision_cap:
                out.append(CellCheck(i, j, mass, bound, INCONCLUSIVE))
                break
            prec *= 2
    return out


@dataclass
class DecayReport:
    """Lemma-shaped decay diagnostics at one prime with the preset
    c1 = (100 e^C)^(-[p<=p0]), C3 = e^C, lambda = p^(eps - 1/2),
    x_i = alpha_i^(1/2+eps), y_j = beta_j^(1/2+eps)."""

    p: int
    center: CenterResult
    lambda_in_range: str  # lambda <= 1 - c2 with c2 = 1 - 2^(-1/10), exact
    c1_lower_ok: str
    cell_checks: list[CellCheck]
    tail_ratio: Optional[Interval]  # tail / (p^(-1-2eps) + p^(-(3-2eps)/2))

    @property
    def hypothesis_holds(self) -> bool:
        return all(c.verdict == HOLDS for c in self.cell_checks)


def decay_hypothesis_report(
    dm: DiagonalMeasure,
    params: Params,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> DecayReport:
    p = dm.p
    eps = params.epsilon
    below_p0 = p <= params.p0
    center = find_center(dm)

    # lambda <= 1 - c2  <=>  p^(1/2 - eps) >= 2^(1/10)  <=>  p^(5-10eps) >= 2
    lam_ok = compare_power(Fraction(p), 5 - 10 * eps, Fraction(2)) >= 0
    lambda_in_range = HOLDS if lam_ok else VIOLATED

    # first conclusion: c1 >= c2 / (1 + (2 C3 - 1) lambda)
    prec = params.precision_bits
    c1_verdict = INCONCLUSIVE
    while True:
        w = prec + 16
        lam = interval_eval(Fraction(1), [(const(p), eps - Fraction(1, 2))], w)
        c3 = exp_of(params.C).enclosure(w)
        c2 = Interval.from_fraction(1, w).sub(
            interval_eval(Fraction(1), [(const(2), Fraction(-1, 10))], w), w
        )
        denom = Interval.from_fraction(1, w).add(
            c3.scale(2, w).sub(Interval.from_fraction(1, w), w).mul(lam, w), w
        )
        rhs = c2.div(denom, w)
        if below_p0:
            c1 = interval_eval(
                Fraction(1), [(const(100) * exp_of(params.C), Fraction(-1))], w
            )
        else:
            c1 = Interval.from_fraction(1, w)
        if c1.certified_ge(rhs):
            c1_verdict = HOLDS
            break
        if c1.certified_lt(rhs):
            c1_verdict = VIOLATED
            break
        if prec * 2 > precision_cap:
            break
        prec *= 2

    # cell hypothesis m(i,j) <= c1 [C3 lambda^|i-j|] x_i y_j
    cell_checks = []
    for (i, j), mass in sorted(dm.cells.items()):
        a = dm.alpha.get(i, _ZERO)
        b = dm.beta.get(j, _ZERO)
        if a * b == 0:
            cell_checks.append(
                CellCheck(i, j, mass, Fraction(0), HOLDS if mass <= 0 else VIOLATED)
            )
            continue
        factors = [
            (const(100) * exp_of(params.C), Fraction(-1 if below_p0 else 0)),
            (exp_of(params.C), Fraction(1 if i != j else 0)),
            (const(p), (eps - Fraction(1, 2)) * abs(i - j)),
            (const(a), Fraction(1, 2) + eps),
            (const(b), Fraction(1, 2) + eps),
        ]
        prec = params.precision_bits
        while True:
            bound = interval_eval(Fraction(1), factors, prec)
            if bound.lo_cmp(mass) >= 0:
                cell_checks.append(CellCheck(i, j, mass, bound, HOLDS))
                break
            if bound.hi_cmp(mass) < 0:
                cell_checks.append(CellCheck(i, j, mass, bound, VIOLATED))
                break
            if prec * 2 > precision_cap:
                cell_checks.append(CellCheck(i, j, mass, bound, INCONCLUSIVE))
                break
            prec *= 2

    # empirical tail ratio against p^(-1-2eps) + p^(-(3-2eps)/2)
    if center.tail_mass == 0:
        ratio = Interval.exact_zero(params.precision_bits)
    else:
        w = params.precision_bits + 16
        denom = interval_eval(
            Fraction(1), [(const(p), -1 - 2 * eps)], w
        ).add(
            interval_eval(Fraction(1), [(const(p), -(3 - 2 * eps) / 2)], w), w
        )
        ratio = (
            Interval.from_fraction(center.tail_mass, w)
            .div(denom, w)
            .round(params.precision_bits)
        )
    return DecayReport(p, center, lambda_in_range, c1_verdict, cell_checks, ratio)


@dataclass
class ConcentrateResult:
    N: int
    edges_star: frozenset[tuple[int, int]]
    removed_fraction: Fraction  # mu(E minus E*) / mu(E), exactly
    centers: dict[int, int]

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "centers": {str(p): k for p, k in sorted(self.centers.items())},
            "removed_fraction": str(self.removed_fraction),
            "edges_star": sorted(self.edges_star),
        }


def concentrate(
    system: PairSystem, edges: Iterable[tuple[int, int]], params: Params
) -> ConcentrateResult:
    """Center N = prod p^{k_p} and the filtered set E*.

    E* keeps the edges with |nu_p(v/N)| + |nu_p(w/N)| <= 1 at every prime.
    Centers come from the exhaustive tail scan; a tied k = -1 is clamped to 0
    (same tail, keeps N integral).
    """
    E = frozenset(edges)
    total = mu_pairs(system, E)
    if total == 0:
        raise DegenerateMeasure("mu(E) = 0: nothing to concentrate")
    centers: dict[int, int] = {}
    N = 1
    for p in prime_support(system.psi, system.theta):
        dm = diagonal_measure(system, E, p)
        k = max(0, find_center(dm).k)
        centers[p] = k
        N *= p**k
    star = []
    for v, w in E:
        ok = True
        for p, k in centers.items():
            if abs(valuation(p, v) - k) + abs(valuation(p, w) - k) > 1:
                ok = False
                break
        if ok:
            star.append((v, w))
    star_set = frozenset(star)
    removed = mu_pairs(system, E - star_set)
    return ConcentrateResult(N, star_set, removed / total, centers)


@dataclass
class PeelStep:
    step: int
    side: str  # "v" or "w"
    vertex: int
    mu_edges_before: Fraction
    mu_edges_after: Fraction
    mu_side_before: Fraction
    mu_side_after: Fraction
    cert_verdict: str  # holds | failed | vacuous | inconclusive
    cert_rhs: object = None  # Interval (or None when vacuous)

    def to_json(self) -> dict:
        from .arith import dyadic_str

        rhs = None
        if isinstance(self.cert_rhs, Interval):
            rhs = [dyadic_str(self.cert_rhs.lo, 20), dyadic_str(self.cert_rhs.hi, 20)]
        return {
            "step": self.step,
            "side": self.side,
            "vertex": self.vertex,
            "mu_edges_before": str(self.mu_edges_before),
            "mu_edges_after": str(self.mu_edges_after),
            "mu_side_before": str(self.mu_side_before),
            "mu_side_after": str(self.mu_side_after),
            "cert_verdict": self.cert_verdict,
            "cert_rhs": rhs,
        }


@dataclass
class PeelResult:
    edges: frozenset[tuple[int, int]]
    trace: list[PeelStep] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.trace)


def property_two_report(
    system: PairSystem, edges: Iterable[tuple[int, int]], params: Params
) -> list[tuple[str, int, Fraction, Fraction, bool]]:
    """Exact (side, vertex, neighborhood mass, threshold, ok) rows.

    ok means mu(Gamma(x)) >= (1/q') mu(E) / mu(own side).
    """
    E = frozenset(edges)
    rows = []
    if not E:
        return rows
    mu_e = mu_pairs(system, E)
    vs, ws = restrict(E)
    mu_v = mu_set(system.f, system.psi, vs)
    mu_w = mu_set(system.g, system.theta, ws)
    inv_qp = 1 / params.q_prime
    thr_v = inv_qp * mu_e / mu_v if mu_v > 0 else _ZERO
    thr_w = inv_qp * mu_e / mu_w if mu_w > 0 else _ZERO
    for v in sorted(vs):
        mass = mu_set(system.g, system.theta, neighborhood(E, v))
        rows.append(("v", v, mass, thr_v, mass >= thr_v))
    for w in sorted(ws):
        mass = mu_set(system.f, system.psi, w_neighborhood(E, w))
        rows.append(("w", w, mass, thr_w, mass >= thr_w))
    return rows


def property_two_holds(
    system: PairSystem, edges: Iterable[tuple[int, int]], params: Params
) -> bool:
    return all(ok for *_, ok in property_two_report(system, edges, params))


def peel(
    system: PairSystem,
    edges: Iterable[tuple[int, int]],
    params: Params,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> PeelResult:
    """Remove vertices violating the proportional-neighborhood property
    until none remains.

    At each step the violating vertex with the smallest ratio
    mu(Gamma(x)) mu(own side) / mu(E) is removed (ties: v side first, then
    the smaller integer).  Each removal's trace row certifies the measure
    drop inequality mu(E_new) > mu(E_old) (mu(side_new)/mu(side_old))^(1/q')
    by interval arithmetic; steps that remove a zero-mass vertex leave the
    measures unchanged and are marked vacuous.
    """
    E = frozenset(edges)
    trace: list[PeelStep] = []
    if not E:
        return PeelResult(E, trace)
    inv_qp = 1 / params.q_prime
    one_over_qp = inv_qp  # (1/q') as exact rational
    step = 0
    vs0, ws0 = restrict(E)
    max_steps = len(vs0) + len(ws0)
    while E:
        mu_e = mu_pairs(system, E)
        if mu_e == 0:
            break  # thresholds vanish; property holds vacuously
        vs, ws = restrict(E)
        mu_v_side = mu_set(system.f, system.psi, vs)
        mu_w_side = mu_set(system.g, system.theta, ws)
        gamma_v = {v: mu_set(system.g, system.theta, neighborhood(E, v)) for v in vs}
        gamma_w = {w: mu_set(system.f, system.psi, w_neighborhood(E, w)) for w in ws}
        candidates = []
        thr_v = one_over_qp * mu_e / mu_v_side
        for v in sorted(vs):
            if gamma_v[v] < thr_v:
                candidates.append((gamma_v[v] * mu_v_side / mu_e, 0, v))
        thr_w = one_over_qp * mu_e / mu_w_side
        for w in sorted(ws):
            if gamma_w[w] < thr_w:
                candidates.append((gamma_w[w] * mu_w_side / mu_e, 1, w))
        if not candidates:
            break
        _, side_idx, vertex = min(candidates)
        if side_idx == 0:
            new_edges = frozenset(e for e in E if e[0] != vertex)
            side_before = mu_v_side
            side_after = mu_v_side - mu_point(system.f, system.psi, vertex)
        else:
            new_edges = frozenset(e for e in E if e[1] != vertex)
            side_before = mu_w_side
            side_after = mu_w_side - mu_point(system.g, system.theta, vertex)
        mu_after = mu_pairs(system, new_edges)
        ratio = side_after / side_before
        if ratio == 1:
            verdict, rhs = "vacuous", None
        elif ratio == 0:
            verdict = HOLDS if mu_after > 0 else "failed"
            rhs = Interval.exact_zero(params.precision_bits)
        else:
            prec = params.precision_bits
            while True:
                rhs = interval_eval(mu_e, [(const(ratio), inv_qp)], prec)
                if rhs.hi_cmp(mu_after) < 0:
                    verdict = HOLDS
                    break
                if rhs.lo_cmp(mu_after) >= 0:
                    verdict = "failed"
                    break
                if prec * 2 > precision_cap:
                    verdict = INCONCLUSIVE
                    break
                prec *= 2
        trace.append(
            PeelStep(
                step,
                "v" if side_idx == 0 else "w",
                vertex,
                mu_e,
                mu_after,
                side_before,
                side_after,
                verdict,
                rhs,
            )
        )
        E = new_edges
        step += 1
        if step > max_steps:
            raise RuntimeError("peel exceeded the vertex-count step bound")
    return PeelResult(E, trace)
