"""Algebraic kernel for discrete commutative hypergroups.

A hypergroup table supplies an index set with involution and identity,
a convolution of point masses (a probability measure per index pair),
and positive Haar weights.  On top of that this module implements
translation, convolution and the Fourier transform of finitely
supported functions, plus the weighted-norm profiling used by the
amenability diagnostics.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import StructureError

# coefficients in [NEG_TOL, 0) are rounding noise and clamped to zero;
# anything below NEG_TOL is a structure failure
NEG_TOL = -1e-12
MASS_TOL = 1e-10


class PointMeasure:
    """Finitely supported probability measure: index -> weight >= 0."""

    __slots__ = ("weights",)

    def __init__(self, weights: dict, check: bool = True, context=None):
        if check:
            cleaned = {}
            for t, w in weights.items():
                if w < NEG_TOL:
                    raise StructureError(
                        f"negative convolution coefficient {w:.3e} at {t} "
                        f"(context {context})", t=t, value=w)
                if w > 0.0:
                    cleaned[t] = w
            total = sum(cleaned.values())
            if abs(total - 1.0) > MASS_TOL:
                raise StructureError(
                    f"point measure mass {total!r} deviates from 1 "
                    f"(context {context})", value=total)
            weights = cleaned
        self.weights = weights

    def __call__(self, t):
        return self.weights.get(t, 0.0)

    def support(self):
        return self.weights.keys()

    def items(self):
        return self.weights.items()

    def mass(self):
        return sum(self.weights.values())

    def __eq__(self, other):
        return isinstance(other, PointMeasure) and self.weights == other.weights

    def __repr__(self):
        inner = ", ".join(f"{t}: {w:.6g}" for t, w in sorted(self.weights.items(),
                                                             key=lambda kv: str(kv[0])))
        return "PointMeasure({%s})" % inner


class Hypergroup:
    """Base class: conv entries are memoized and immutable once computed.

    Subclasses implement _conv(n, m) for n, m in canonical order and the
    haar / involution / identity accessors.  Entry computation must be a
    pure function of (n, m) so concurrent races are harmless.
    """

    def __init__(self):
        self._cache: dict = {}
        self._lock = threading.Lock()

    # -- to be provided by subclasses ------------------------------------
    @property
    def identity(self):
        raise NotImplementedError

    def involution(self, n):
        raise NotImplementedError

    def haar(self, n) -> float:
        raise NotImplementedError

    def indices(self, limit: int) -> list:
        """Canonical enumeration window used by probes and verifiers."""
        raise NotImplementedError

    def _conv(self, n, m) -> PointMeasure:
        raise NotImplementedError

    def _key(self, n, m):
        a, b = (n, m) if repr(n) <= repr(m) else (m, n)
        return (a, b)

    # -- shared machinery -------------------------------------------------
    def conv(self, n, m) -> PointMeasure:
        """p(n, m); cached, symmetric in (n, m)."""
        key = self._key(n, m)
        mu = self._cache.get(key)
        if mu is None:
            mu = self._conv(*key)
            with self._lock:
                self._cache.setdefault(key, mu)
            mu = self._cache[key]
        return mu

    def translate_candidates(self, x, support) -> set:
        """Indices where T_x f can be nonzero for f supported on `support`.

        Uses t in supp p(x, y)  <=>  y in supp p(x~, t).
        """
        xs = self.involution(x)
        out = set()
        for t in support:
            out.update(self.conv(xs, t).support())
        return out


class WeightedSequence:
    """Finitely supported function on the index set (an l1(K) element)."""

    __slots__ = ("values",)

    def __init__(self, values: dict):
        self.values = {t: v for t, v in values.items() if v != 0}

    @classmethod
    def point(cls, n, value=1.0):
        return cls({n: value})

    def __call__(self, t):
        return self.values.get(t, 0.0)

    def items(self):
        return self.values.items()

    def support(self):
        return self.values.keys()

    def norm1(self, K: Hypergroup) -> float:
        """Haar-weighted l1 norm, compensated summation."""
        return float(math.fsum(K.haar(t) * abs(v) for t, v in self.values.items()))

    def __add__(self, other):
        out = dict(self.values)
        for t, v in other.items():
            out[t] = out.get(t, 0.0) + v
        return WeightedSequence(out)

    def __sub__(self, other):
        out = dict(self.values)
        for t, v in other.items():
            out[t] = out.get(t, 0.0) - v
        return WeightedSequence(out)

    def scale(self, c):
        return WeightedSequence({t: c * v for t, v in self.values.items()})

    def __repr__(self):
        inner = ", ".join(f"{t}: {v:.6g}" for t, v in sorted(self.values.items(),
                                                             key=lambda kv: str(kv[0])))
        return "WeightedSequence({%s})" % inner


class Character:
    """Evaluable character n -> alpha(n) with its parameter point.

    `evaluator` maps an index to a (possibly complex) value; values are
    memoized.  Hermitian means alpha(n~) = conj(alpha(n)).
    """

    def __init__(self, evaluator: Callable, parameter=None, family: str = "",
                 is_real: bool = True):
        self._eval = evaluator
        self._cache: dict = {}
        self.parameter = parameter
        self.family = family
        self.is_real = is_real

    def value(self, n):
        v = self._cache.get(n)
        if v is None:
            v = self._eval(n)
            self._cache[n] = v
        return v

    def __call__(self, n):
        return self.value(n)

    def check_hermitian(self, K: Hypergroup, window: Iterable) -> float:
        """Max |alpha(n~) - conj(alpha(n))| over the window."""
        return max(abs(self.value(K.involution(n)) - np.conj(self.value(n)))
                   for n in window)


# ---------------------------------------------------------------------------
#  Operations
# ---------------------------------------------------------------------------

def convolve_points(K: Hypergroup, n, m) -> PointMeasure:
    """p(n, m) as a probability measure; cached by the table."""
    return K.conv(n, m)


def translate(K: Hypergroup, x, f: WeightedSequence) -> WeightedSequence:
    """(T_x f)(y) = sum_t p(x, y)({t}) f(t)."""
    out = {}
    for y in K.translate_candidates(x, f.support()):
        mu = K.conv(x, y)
        v = sum(w * f(t) for t, w in mu.items() if t in f.values)
        if v != 0:
            out[y] = v
    return WeightedSequence(out)


def convolve(K: Hypergroup, f: WeightedSequence, g: WeightedSequence) -> WeightedSequence:
    """f*g(x) = sum_y h(y) f(y) (T_{y~} g)(x)."""
    acc: dict = {}
    for y, fy in f.items():
        shifted = translate(K, K.involution(y), g)
        c = K.haar(y) * fy
        for t, v in shifted.items():
            acc[t] = acc.get(t, 0.0) + c * v
    return WeightedSequence(acc)


def fourier(K: Hypergroup, f: WeightedSequence, alpha: Character):
    """f^(alpha) = sum_n h(n) f(n) conj(alpha(n))."""
    total = 0.0 + 0.0j
    for n, v in f.items():
        total += K.haar(n) * v * np.conj(alpha.value(n))
    return total if abs(total.imag) > 1e-15 * (1 + abs(total.real)) else total.real


# ---------------------------------------------------------------------------
#  Norm profiling (log-space safe)
# ---------------------------------------------------------------------------

@dataclass
class NormProfile:
    """Haar-weighted l1/l2 partial sums of a character plus decay evidence."""

    cutoffs: list[int] = field(default_factory=list)
    l1_partial: list[float] = field(default_factory=list)
    l2_partial: list[float] = field(default_factory=list)
    l1_log_terms: list[float] = field(default_factory=list)
    l2_log_terms: list[float] = field(default_factory=list)
    l1_summable: bool = False
    l2_summable: bool = False
    tail_slope_l2: float = float("nan")
    overflowed: bool = False


def _partial_sums_logspace(log_terms: np.ndarray, cutoffs: list[int]):
    """Partial sums at cutoffs; inf where the running sum exceeds 1e300."""
    sums, running, overflow = [], 0.0, False
    k = 0
    for i, lt in enumerate(log_terms):
        if not overflow:
            if lt > 690.0:  # exp would exceed ~1e300
                overflow = True
            else:
                running += math.exp(lt)
                if running > 1e300:
                    overflow = True
        while k < len(cutoffs) and cutoffs[k] == i:
            sums.append(float("inf") if overflow else running)
            k += 1
    while k < len(cutoffs):
        sums.append(float("inf") if overflow else running)
        k += 1
    return sums, overflow


def _doubling_summable(log_terms: np.ndarray) -> bool:
    """Cauchy-style test: doubling-window increments shrink by >= 2."""
    n = len(log_terms)
    if n < 16:
        return False
    edges = []
    w = n
    while w >= 8:
        edges.append(w)
        w //= 2
    edges = edges[::-1]
    incs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        block = log_terms[lo:hi]
        m = np.max(block)
        if m > 690.0:  # covers +inf: the tail is out of float range
            return False
        if m == -math.inf:
            incs.append(0.0)
            continue
        incs.append(math.exp(m) * float(np.sum(np.exp(block - m))))
    for a, b in zip(incs[:-1], incs[1:]):
        if b > 0.5 * a + 1e-300:
            return False
    return True


def fit_log_slope(values: np.ndarray, xs: np.ndarray | None = None) -> float:
    """Least-squares slope of log(values) over the last half window.

    Zeros (log -> -inf) are dropped; oscillatory sequences should be
    reduced to block maxima before calling.
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    lo = n // 2
    x = np.arange(n, dtype=float) if xs is None else np.asarray(xs, dtype=float)
    x, v = x[lo:], v[lo:]
    keep = v > 0
    x, v = x[keep], v[keep]
    if len(v) < 3:
        return float("nan")
    return float(np.polyfit(x, np.log(v), 1)[0])


def block_maxima(values: np.ndarray, n_blocks: int = 12):
    """(block centers, block maxima) of |values| over equal-width blocks."""
    v = np.abs(np.asarray(values, dtype=float))
    n = len(v)
    n_blocks = min(n_blocks, max(1, n // 2))
    edges = np.linspace(0, n, n_blocks + 1).astype(int)
    centers, maxima = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            centers.append(0.5 * (a + b - 1))
            maxima.append(float(np.max(v[a:b])))
    return np.asarray(centers), np.asarray(maxima)


def norm_profile(K: Hypergroup, alpha: Character, N: int) -> NormProfile:
    """Partial Haar-weighted l1/l2 sums of alpha at doubling cutoffs.

    Magnitudes are accumulated in log space so divergent profiles report
    inf instead of overflowing.
    """
    if N < 8:
        raise ValueError("N must be >= 8")
    idx = K.indices(N)
    log_haar = getattr(K, "log_haar", None)
    log_h = np.array([log_haar(n) if log_haar is not None
                      else math.log(K.haar(n)) for n in idx])
    log_a = np.empty(len(idx))
    bad = False
    for i, n in enumerate(idx):
        v = abs(alpha.value(n))
        if bad or not math.isfinite(v):
            # once the evaluation overflows, later recursion values are
            # meaningless; treat the whole tail as out of range
            bad = True
            log_a[i] = math.inf
        else:
            log_a[i] = math.log(v) if v > 0 else -math.inf
    l1_log = np.where(np.isnan(log_h + log_a), math.inf, log_h + log_a)
    l2_log = np.where(np.isnan(log_h + 2.0 * log_a), math.inf,
                      log_h + 2.0 * log_a)
    cutoffs = []
    c = 8
    while c <= len(idx):
        cutoffs.append(c - 1)
        c *= 2
    prof = NormProfile(cutoffs=[c + 1 for c in cutoffs])
    prof.l1_partial, of1 = _partial_sums_logspace(l1_log, cutoffs)
    prof.l2_partial, of2 = _partial_sums_logspace(l2_log, cutoffs)
    prof.overflowed = of1 or of2
    prof.l1_log_terms = [float(v) for v in l1_log]
    prof.l2_log_terms = [float(v) for v in l2_log]
    prof.l1_summable = _doubling_summable(l1_log)
    prof.l2_summable = _doubling_summable(l2_log)
    finite = np.isfinite(l2_log)
    if np.count_nonzero(finite[len(idx) // 2:]) >= 3:
        half = np.arange(len(idx))[finite]
        prof.tail_slope_l2 = fit_log_slope(np.exp(np.clip(l2_log[finite], -700, 700)),
                                           half)
    return prof


# ---------------------------------------------------------------------------
#  Table export
# ---------------------------------------------------------------------------

def table_to_json(K: Hypergroup, N: int, index_kind: str | None = None) -> str:
    """Materialize entries for the window and dump the table as JSON."""
    idx = K.indices(N)
    entries = []
    for i, n in enumerate(idx):
        for m in idx[i:]:
            mu = K.conv(n, m)
            entries.append({
                "n": n, "m": m,
                "measure": sorted(([t, w] for t, w in mu.items()),
                                  key=lambda p: repr(p[0])),
            })
    doc = {
        "index_kind": index_kind or getattr(K, "index_kind", "Naturals"),
        "entries": entries,
        "haar": [[n, K.haar(n)] for n in idx],
    }
    return json.dumps(doc, sort_keys=True)
