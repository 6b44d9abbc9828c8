"""Character-amenability diagnostics.

Four probes:
  * point_mass  -- Plancherel atom estimate 1/sum h(n)|alpha(n)|^2;
  * c0_probe    -- does |alpha| vanish along the index window;
  * classify    -- the decision tree combining both (plus the trivial
                   and sign-character branches);
  * reiter_lp   -- minimize eps subject to the modified P1-condition
                   constraints on a finite support, as a linear program.
A derivation probe for polynomial families rounds out the toolbox.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linprog

from .core import (Character, Hypergroup, WeightedSequence, block_maxima,
                   fit_log_slope, fourier, norm_profile, translate)
from .errors import ConfigError, LpInfeasibleError
from .families import PolynomialTable, RecursionFamily


# ---------------------------------------------------------------------------
#  Point mass at a character
# ---------------------------------------------------------------------------

@dataclass
class PointMassEstimate:
    value: float
    status: str                       # convergent | divergent | inconclusive
    l2_partial: list[float] = field(default_factory=list)
    cutoffs: list[int] = field(default_factory=list)
    increment_ratios: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"value": self.value, "status": self.status,
                "cutoffs": self.cutoffs, "l2_partial": self.l2_partial,
                "increment_ratios": self.increment_ratios}


def point_mass(K: Hypergroup, alpha: Character, N: int,
               tol: float = 1e-9) -> PointMassEstimate:
    """Estimate pi({alpha}) = 1 / sum h(n) |alpha(n)|^2.

    The l2 sum is watched across doubling windows: shrinking increments
    (ratio <= 1/2) mean convergence and the geometric tail is
    extrapolated; non-shrinking increments mean divergence (mass 0).
    """
    if N < 32:
        raise ConfigError("point_mass needs N >= 32")
    prof = norm_profile(K, alpha, N)
    sums = prof.l2_partial
    ratios = []
    for i in range(1, len(sums) - 1):
        inc1, inc2 = sums[i] - sums[i - 1], sums[i + 1] - sums[i]
        if math.isinf(sums[i + 1]) or math.isinf(sums[i]):
            ratios.append(float("inf"))
        elif inc1 > 0:
            ratios.append(inc2 / inc1)
    est = PointMassEstimate(value=0.0, status="inconclusive",
                            l2_partial=sums, cutoffs=prof.cutoffs,
                            increment_ratios=ratios)
    if prof.overflowed or math.isinf(sums[-1]):
        est.status = "divergent"
        return est
    last_inc = sums[-1] - sums[-2] if len(sums) >= 2 else float("inf")
    if prof.l2_summable and last_inc <= max(tol * max(1.0, sums[-1]), 1e-300):
        total = sums[-1]
        if ratios and 0.0 < ratios[-1] < 0.5:
            r = ratios[-1]
            total += last_inc * r / (1.0 - r)
        est.value = 1.0 / total
        est.status = "convergent"
        return est
    if prof.l2_summable:
        # shrinking but tail not yet below tol: extrapolate, stay honest
        total = sums[-1]
        if ratios and 0.0 < ratios[-1] < 0.5:
            r = ratios[-1]
            total += last_inc * r / (1.0 - r)
            est.value = 1.0 / total
            est.status = "convergent"
            return est
        est.status = "inconclusive"
        return est
    grow = [r for r in ratios[-3:] if not math.isnan(r)]
    if grow and all(r >= 0.9 for r in grow):
        est.status = "divergent"
        return est
    if sums[-1] > 1e12:
        est.status = "divergent"
        return est
    est.status = "inconclusive"
    return est


# ---------------------------------------------------------------------------
#  C0 probe
# ---------------------------------------------------------------------------

@dataclass
class C0Report:
    tail_max: float
    slope: float
    verdict: str                      # decays | bounded-away | inconclusive
    closed_form: Optional[str] = None

    def as_dict(self) -> dict:
        return {"tail_max": self.tail_max, "slope": self.slope,
                "verdict": self.verdict, "closed_form": self.closed_form}


def c0_probe(K: Hypergroup, alpha: Character, N: int,
             tail_thresh: float = 0.5, slope_thresh: float = -0.1) -> C0Report:
    """Decay report for |alpha| over the index window.

    "decays" requires tail max < tail_thresh and envelope log-log slope
    below slope_thresh over the last half window; geometric decay
    registers as a steep negative slope.  Exact spectral-point
    characters (constant 1 or geometric) shortcut the fit.
    """
    if N < 32:
        raise ConfigError("c0_probe needs N >= 32")
    idx = K.indices(N)
    mags = np.array([abs(alpha.value(n)) for n in idx])
    tail_max = float(np.max(mags[len(mags) // 2:]))
    if np.all(np.abs(mags - 1.0) < 1e-12):
        return C0Report(tail_max=1.0, slope=0.0, verdict="bounded-away",
                        closed_form="constant-one")
    centers, env = block_maxima(mags)
    pos = env > 0
    slope = fit_log_slope(env[pos], np.log(centers[pos] + 1.0)) if pos.sum() >= 3 \
        else float("nan")
    if math.isnan(slope):
        verdict = "inconclusive"
    elif tail_max < tail_thresh and slope < slope_thresh:
        verdict = "decays"
    elif tail_max >= tail_thresh and slope >= slope_thresh:
        verdict = "bounded-away"
    elif tail_max >= 0.99:
        verdict = "bounded-away"
    else:
        verdict = "inconclusive"
    return C0Report(tail_max=tail_max, slope=slope, verdict=verdict)


# ---------------------------------------------------------------------------
#  Verdicts
# ---------------------------------------------------------------------------

@dataclass
class AmenabilityVerdict:
    tag: str                           # Amenable | NotAmenable | Inconclusive
    certificate: Optional[dict] = None  # for Amenable
    witness: Optional[dict] = None      # for NotAmenable
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"verdict": self.tag, "diagnostics": self.diagnostics}
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _is_sign_character(K: Hypergroup, alpha: Character, window) -> bool:
    """alpha(n) = (-1)^n on a parity-preserving polynomial table.

    On such tables the parity twist of the invariant mean certifies
    amenability of the sign character.
    """
    if not isinstance(K, PolynomialTable):
        return False
    if not getattr(K.family, "symmetric", False):
        return False
    return all(abs(alpha.value(n) - (-1.0) ** n) < 1e-10 for n in window)


def classify(K: Hypergroup, alpha: Character, N: int = 200,
             tail_thresh: float = 0.5,
             slope_thresh: float = -0.1) -> AmenabilityVerdict:
    """Decision tree for alpha-amenability of K.

    (a) alpha == 1 on the window        -> Amenable (TrivialCharacter);
    (a') sign character, parity table   -> Amenable (SignCharacter);
    (b) positive point mass and absolutely summable |alpha|
                                        -> Amenable (L2Mean);
    (c) zero point mass and C0 decay    -> NotAmenable;
    otherwise Inconclusive with full diagnostics.  Positive
    certification beyond these rules would require the Reiter LP and is
    never guessed.  The operative thresholds are always part of the
    returned diagnostics.
    """
    thresholds = {"c0_tail_max": tail_thresh, "c0_slope": slope_thresh,
                  "l2_increment_ratio": 0.5}
    if not alpha.is_real:
        pm = point_mass(K, alpha, max(N, 32))
        c0 = c0_probe(K, alpha, max(N, 32), tail_thresh, slope_thresh)
        return AmenabilityVerdict(
            tag="Inconclusive",
            diagnostics={"policy": "complex character: evidence only",
                         "point_mass": pm.as_dict(), "c0": c0.as_dict(),
                         "thresholds": thresholds})
    window = K.indices(min(N, 64))
    herm_dev = alpha.check_hermitian(K, window)
    if all(abs(alpha.value(n) - 1.0) < 1e-10 for n in window):
        return AmenabilityVerdict(
            tag="Amenable",
            certificate={"kind": "TrivialCharacter"},
            diagnostics={"hermitian_deviation": herm_dev,
                         "thresholds": thresholds})
    if _is_sign_character(K, alpha, window):
        return AmenabilityVerdict(
            tag="Amenable",
            certificate={"kind": "SignCharacter",
                         "note": "parity twist of the invariant mean"},
            diagnostics={"hermitian_deviation": herm_dev,
                         "thresholds": thresholds})
    pm = point_mass(K, alpha, max(N, 32))
    c0 = c0_probe(K, alpha, max(N, 32), tail_thresh, slope_thresh)
    idx = K.indices(max(N, 32))
    abs_tail = [abs(alpha.value(n)) for n in idx]
    abs_l1 = _plain_l1_summable(abs_tail)
    diagnostics = {
        "hermitian_deviation": herm_dev,
        "point_mass": pm.as_dict(),
        "c0": c0.as_dict(),
        "abs_sum_summable": abs_l1,
        "thresholds": thresholds,
    }
    if pm.status == "convergent" and pm.value > 0.0 and abs_l1:
        return AmenabilityVerdict(
            tag="Amenable",
            certificate={"kind": "L2Mean", "point_mass": pm.value},
            diagnostics=diagnostics)
    if pm.status == "divergent" and c0.verdict == "decays":
        return AmenabilityVerdict(
            tag="NotAmenable",
            witness={"point_mass": 0.0, "c0_slope": c0.slope,
                     "c0_tail_max": c0.tail_max},
            diagnostics=diagnostics)
    return AmenabilityVerdict(tag="Inconclusive", diagnostics=diagnostics)


def _plain_l1_summable(mags: list[float]) -> bool:
    """Doubling-window test for sum |alpha(n)| (no Haar weights)."""
    n = len(mags)
    if n < 16:
        return False
    edges, w = [], n
    while w >= 8:
        edges.append(w)
        w //= 2
    edges = edges[::-1]
    incs = [sum(mags[lo:hi]) for lo, hi in zip(edges[:-1], edges[1:])]
    return all(b <= 0.5 * a + 1e-300 for a, b in zip(incs[:-1], incs[1:]))


# ---------------------------------------------------------------------------
#  Reiter linear program
# ---------------------------------------------------------------------------

def _json_index(t):
    """Indices as JSON values: ints stay ints, pairs become [n, m]."""
    if isinstance(t, tuple):
        return [_json_index(v) for v in t]
    if isinstance(t, (int, float, str)):
        return t
    return repr(t)


@dataclass
class ReiterCertificate:
    support: list
    g: WeightedSequence
    bound_M: float
    compact_set: list
    epsilon: float
    residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "support": [_json_index(s) for s in self.support],
            "g": sorted(([_json_index(t), v] for t, v in self.g.items()),
                        key=repr),
            "M": self.bound_M,
            "C": [_json_index(x) for x in self.compact_set],
            "epsilon": self.epsilon,
            "residuals": self.residuals,
        }


def reiter_lp(K: Hypergroup, alpha: Character, C: Iterable, S: Iterable,
              M: float = 10.0) -> ReiterCertificate:
    """Solve the modified Reiter P1 linear program.

    Variables g(n) on the support S plus auxiliaries; minimize eps
    subject to
        sum_n h(n) g(n) alpha(n) = 1,
        sum_n h(n) u(n) <= M          with u >= +-g,
        sum_y h(y) t_{x,y} <= eps     with t_{x,y} >= +-[(T_x g)(y) - alpha(x) g(y)]
    for each x in C, with T_x g expanded exactly through the table.
    Residuals of the returned g are re-verified through the convolution
    machinery, independently of the solver.
    """
    S = list(S)
    C = list(C)
    if K.identity not in S:
        raise ConfigError("support must contain the identity")
    for x in C:
        av = alpha.value(x)
        if isinstance(av, complex) and abs(av.imag) > 1e-12:
            raise ConfigError("reiter_lp requires a real-valued character")
    if M <= 0:
        raise ConfigError("M must be positive")

    h = {n: K.haar(n) for n in S}
    a = {n: float(np.real(alpha.value(n))) for n in S}
    pos = {n: i for i, n in enumerate(S)}
    ns = len(S)

    # work in the Haar-scaled variables gq(n) = h(n) g(n),
    # uq(n) = h(n) u(n), tq(x,y) = h(y) t_{x,y}; this keeps every matrix
    # coefficient O(1) even when h grows geometrically.
    rows = []           # (x, y, {n: coeff on gq(n)}) residual rows
    for x in C:
        ys = sorted(K.translate_candidates(x, S), key=repr)
        ax = float(np.real(alpha.value(x)))
        for y in ys:
            mu = K.conv(x, y)
            hy = K.haar(y)
            coeff = {n: hy * mu(n) / h[n] for n in S if mu(n) != 0.0}
            if y in pos:
                coeff[y] = coeff.get(y, 0.0) - ax
            if coeff:
                rows.append((x, y, coeff))

    # variable layout: [gq(0..ns-1), uq(0..ns-1), tq(0..len(rows)-1), eps]
    nt = len(rows)
    nvar = ns + ns + nt + 1
    i_u = ns
    i_t = 2 * ns
    i_eps = nvar - 1

    cobj = np.zeros(nvar)
    cobj[i_eps] = 1.0

    A_ub, b_ub = [], []

    def row_vec():
        return np.zeros(nvar)

    #  +-gq(n) - uq(n) <= 0
    for n in S:
        for sgn in (+1.0, -1.0):
            r = row_vec()
            r[pos[n]] = sgn
            r[i_u + pos[n]] = -1.0
            A_ub.append(r)
            b_ub.append(0.0)
    #  sum uq <= M
    r = row_vec()
    for n in S:
        r[i_u + pos[n]] = 1.0
    A_ub.append(r)
    b_ub.append(M)
    #  +-(scaled residual row) - tq <= 0
    for k, (x, y, coeff) in enumerate(rows):
        for sgn in (+1.0, -1.0):
            r = row_vec()
            for n, cf in coeff.items():
                r[pos[n]] += sgn * cf
            r[i_t + k] = -1.0
            A_ub.append(r)
            b_ub.append(0.0)
    #  per-x residual sums <= eps
    for x in C:
        r = row_vec()
        for k, (xx, y, _) in enumerate(rows):
            if xx == x:
                r[i_t + k] = 1.0
        r[i_eps] = -1.0
        A_ub.append(r)
        b_ub.append(0.0)

    # normalization sum gq a = 1
    A_eq = [row_vec()]
    for n in S:
        A_eq[0][pos[n]] = a[n]
    b_eq = [1.0]

    bounds = ([(None, None)] * ns) + ([(0.0, None)] * ns) \
        + ([(0.0, None)] * nt) + [(0.0, None)]
    res = linprog(cobj, A_ub=np.array(A_ub), b_ub=np.array(b_ub),
                  A_eq=np.array(A_eq), b_eq=np.array(b_eq),
                  bounds=bounds, method="highs")
    if res.status == 2:
        raise LpInfeasibleError(
            "Reiter LP infeasible: the character vanishes Haar-weightedly "
            "on the chosen support, or M is too small")
    if not res.success:
        raise LpInfeasibleError(f"LP solver failure: {res.message}")

    g = WeightedSequence({n: float(res.x[pos[n]]) / h[n] for n in S
                          if abs(res.x[pos[n]]) > 1e-14})
    eps = float(res.x[i_eps])

    # independent residual verification through the table machinery
    residuals = {}
    ghat = fourier(K, g, alpha)
    residuals["fourier_minus_one"] = abs(complex(ghat) - 1.0)
    residuals["norm1"] = g.norm1(K)
    worst = 0.0
    per_x = {}
    for x in C:
        ax = float(np.real(alpha.value(x)))
        diff = translate(K, x, g) - g.scale(ax)
        r = diff.norm1(K)
        per_x[repr(x)] = r
        worst = max(worst, r)
    residuals["per_x"] = per_x
    residuals["max_translation_residual"] = worst
    return ReiterCertificate(support=S, g=g, bound_M=M, compact_set=C,
                             epsilon=eps, residuals=residuals)


# ---------------------------------------------------------------------------
#  Derivation probe
# ---------------------------------------------------------------------------

@dataclass
class DerivationReport:
    x0: float
    sup_abs_derivative: float
    growth_slope: float
    bounded: bool
    product_rule_residual: float
    derivative_values: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"x0": self.x0, "sup_abs_derivative": self.sup_abs_derivative,
                "growth_slope": self.growth_slope, "bounded": self.bounded,
                "product_rule_residual": self.product_rule_residual}


def derivation_probe(fam: RecursionFamily, x0: float, N: int,
                     n_pairs: int = 50, seed: int = 11) -> DerivationReport:
    """Probe the functional D(f) = sum h(n) f(n) P'_n(x0).

    Reports whether sup |P'_n(x0)| looks bounded and verifies the
    derivation identity D(f*g) = f^(alpha) D(g) + g^(alpha) D(f) on
    random sparse pairs (an algebraic consequence of Fourier
    multiplicativity, so the residual is pure floating-point noise).
    """
    from .core import convolve

    P, D = fam.eval_character(x0, N, derivative=True)
    sup = float(np.max(np.abs(D)))
    centers, env = block_maxima(D)
    posmask = env > 0
    slope = fit_log_slope(env[posmask], np.log(centers[posmask] + 1.0)) \
        if posmask.sum() >= 3 else float("nan")
    bounded = bool(slope < 0.05) if not math.isnan(slope) else bool(sup < 10.0)

    table = PolynomialTable(fam, max_degree=N)
    alpha = fam.character(x0)
    rng = np.random.default_rng(seed)
    nmax = max(4, N // 4)

    def deriv_functional(f: WeightedSequence) -> float:
        return float(sum(table.haar(n) * v * D[n] for n, v in f.items()))

    worst = 0.0
    for _ in range(n_pairs):
        f = WeightedSequence({int(k): float(rng.uniform(-1, 1))
                              for k in rng.choice(nmax, size=3, replace=False)})
        g = WeightedSequence({int(k): float(rng.uniform(-1, 1))
                              for k in rng.choice(nmax, size=3, replace=False)})
        fg = convolve(table, f, g)
        lhs = deriv_functional(fg)
        rhs = (float(np.real(fourier(table, f, alpha))) * deriv_functional(g)
               + float(np.real(fourier(table, g, alpha))) * deriv_functional(f))
        worst = max(worst, abs(lhs - rhs))
    return DerivationReport(x0=x0, sup_abs_derivative=sup, growth_slope=slope,
                            bounded=bounded, product_rule_residual=worst,
                            derivative_values=[float(v) for v in D])
