"""Two-variable hypergroups: products and disc polynomials.

The Koornwinder-V family is realized as the product of two Jacobi
hypergroups; its triangular (n, k) labels are a relabeling of N_0^2.
Disc polynomials live on pairs (m, n) with involution (m, n) -> (n, m)
and complex characters on the closed unit disc.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .core import (Character, Hypergroup, PointMeasure, block_maxima,
                   fit_log_slope)
from .errors import ConfigError
from .families import PolynomialTable, RecursionFamily, family_jacobi


class ProductTable(Hypergroup):
    """Tensor product of two hypergroup tables on pair indices."""

    index_kind = "NaturalsPairs"

    def __init__(self, K1: Hypergroup, K2: Hypergroup):
        super().__init__()
        self.K1, self.K2 = K1, K2

    @property
    def identity(self):
        return (self.K1.identity, self.K2.identity)

    def involution(self, nm):
        return (self.K1.involution(nm[0]), self.K2.involution(nm[1]))

    def haar(self, nm) -> float:
        return self.K1.haar(nm[0]) * self.K2.haar(nm[1])

    def indices(self, limit: int):
        out = [(i, j) for i in range(limit + 1) for j in range(limit + 1)
               if i + j <= limit]
        out.sort(key=lambda p: (p[0] + p[1], p[0]))
        return out

    def _key(self, n, m):
        return (n, m) if n <= m else (m, n)

    def _conv(self, n, m) -> PointMeasure:
        mu1 = self.K1.conv(n[0], m[0])
        mu2 = self.K2.conv(n[1], m[1])
        out = {}
        for t1, w1 in mu1.items():
            for t2, w2 in mu2.items():
                out[(t1, t2)] = w1 * w2
        return PointMeasure(out, context=("product", n, m))

    def character(self, a1: Character, a2: Character) -> Character:
        return Character(lambda nm: a1.value(nm[0]) * a2.value(nm[1]),
                         parameter=(a1.parameter, a2.parameter),
                         family="product",
                         is_real=a1.is_real and a2.is_real)


def product_table(K1: Hypergroup, K2: Hypergroup) -> ProductTable:
    return ProductTable(K1, K2)


def koornwinder_region(alpha: float, beta: float) -> bool:
    """Evaluate the class-V parameter inequality exactly as printed:
    (a+b+1)(a+b+4)^2(a+b+6) >= (a-b)^2 (a^2 - 2ab + b^2 - 5a - 5b - 30).
    """
    if not (alpha >= beta and beta > -1.0):
        raise ConfigError("requires alpha >= beta > -1")
    s, d = alpha + beta, alpha - beta
    lhs = (s + 1.0) * (s + 4.0) ** 2 * (s + 6.0)
    rhs = d * d * (alpha * alpha - 2 * alpha * beta + beta * beta
                   - 5 * alpha - 5 * beta - 30.0)
    return lhs >= rhs


def triangle_to_pair(n: int, k: int) -> tuple[int, int]:
    """Koornwinder label (n, k), n >= k, to the product pair (n-k, k)."""
    if k > n:
        raise ConfigError("triangular labels require n >= k")
    return (n - k, k)


def koornwinder_product(alpha: float, beta: float, gamma: float, eta: float,
                        max_degree: int = 64) -> ProductTable:
    """Class-V hypergroup as Jacobi(alpha,beta) x Jacobi(gamma,eta)."""
    K1 = PolynomialTable(family_jacobi(alpha, beta), max_degree)
    K2 = PolynomialTable(family_jacobi(gamma, eta), max_degree)
    return ProductTable(K1, K2)


# ---------------------------------------------------------------------------
#  Disc polynomials
# ---------------------------------------------------------------------------

def _jacobi_normalized(n: int, a: float, b: float, x) -> np.ndarray:
    """R_n^{(a,b)}(x) with R_n(1) = 1, by the hypergroup recursion."""
    fam = family_jacobi(a, b) if a >= b else None
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if fam is not None:
        return fam.eval_character_grid(x, max(n, 1))[n]
    # a < b: evaluate via classical recurrence, then normalize at 1
    P_prev = np.ones_like(x)
    if n == 0:
        return P_prev
    P_cur = 0.5 * (a + b + 2) * x + 0.5 * (a - b)
    r_prev, r_cur = 1.0, 0.5 * (a + b + 2) + 0.5 * (a - b)
    for k in range(1, n):
        k1 = 2 * k + a + b
        A = 2 * (k + 1) * (k + a + b + 1) * k1
        B = (k1 + 1) * (k1 * (k1 + 2) * x + a * a - b * b)
        C = 2 * (k + a) * (k + b) * (k1 + 2)
        P_next = (B * P_cur - C * P_prev) / A
        Bs = (k1 + 1) * (k1 * (k1 + 2) + a * a - b * b)
        r_next = (Bs * r_cur - C * r_prev) / A
        P_prev, P_cur = P_cur, P_next
        r_prev, r_cur = r_cur, r_next
    return P_cur / r_cur


@dataclass
class DiscFamily:
    """Disc-polynomial hypergroup on N_0^2 with parameter aprime >= 0.

    Characters P_{m,n}(z) = R_min^{(aprime, |m-n|)}(2|z|^2 - 1) z^{m-n}
    (conjugate power for n > m), hermitian under (m, n) -> (n, m).  The
    orthogonality measure has density proportional to (1-|z|^2)^aprime
    on the open unit disc.
    """

    aprime: float

    def __post_init__(self):
        if self.aprime < 0:
            raise ConfigError("disc family requires aprime >= 0")

    def character_value(self, m: int, n: int, z: complex) -> complex:
        if abs(z) > 1 + 1e-12:
            raise ConfigError("|z| must be <= 1")
        lo, k = (n, m - n) if m >= n else (m, n - m)
        radial = float(_jacobi_normalized(lo, self.aprime, k, 2.0 * abs(z) ** 2 - 1.0)[0])
        angular = z ** k if m >= n else np.conj(z) ** k
        return radial * angular

    def character(self, z: complex) -> Character:
        return Character(lambda mn: self.character_value(mn[0], mn[1], z),
                         parameter=z, family=f"disc({self.aprime:g})",
                         is_real=False)

    def involution(self, mn):
        return (mn[1], mn[0])


def disc_character(aprime: float, m: int, n: int, z: complex) -> complex:
    return DiscFamily(aprime).character_value(m, n, z)


def _disc_grid(aprime: float, cutoff: int, radial_nodes: int, angular_nodes: int):
    """Quadrature grid for the normalized disc measure in (s, phi),
    s = r^2.  Radial rule is Gauss-Jacobi against (1-s)^aprime on [0,1];
    the angular rule is the trapezoid sum, exact for trigonometric
    polynomials below the node count.
    """
    xs, ws = roots_jacobi(radial_nodes, aprime, 0.0)
    s = 0.5 * (xs + 1.0)
    ws = ws * 0.5 ** (aprime + 1)
    phi = 2.0 * math.pi * np.arange(angular_nodes) / angular_nodes
    wphi = np.full(angular_nodes, 2.0 * math.pi / angular_nodes)
    Z = np.sqrt(s)[:, None] * np.exp(1j * phi)[None, :]
    W = 0.5 * ws[:, None] * wphi[None, :]
    W = W / W.sum()  # normalized measure (fixes c_{aprime} numerically)
    return Z, W


def _disc_values(fam: DiscFamily, pairs, Z):
    vals = {}
    for (m, n) in pairs:
        lo, k = (n, m - n) if m >= n else (m, n - m)
        radial = _jacobi_normalized(lo, fam.aprime, k,
                                    (2.0 * np.abs(Z) ** 2 - 1.0).ravel()).reshape(Z.shape)
        ang = Z ** k if m >= n else np.conj(Z) ** k
        vals[(m, n)] = radial * ang
    return vals


def disc_linearize(aprime: float, mn: tuple[int, int], mn2: tuple[int, int],
                   cutoff: int) -> PointMeasure:
    """Linearization of a product of two disc polynomials by quadrature.

    g(k) = h(k) * int P_mn P_m'n' conj(P_k) dpi over the disc; support
    is filtered at 1e-10 and must sum to 1 within 1e-6.
    """
    if max(mn) > cutoff or max(mn2) > cutoff:
        raise ConfigError("degrees exceed cutoff")
    fam = DiscFamily(aprime)
    deg = mn[0] + mn[1] + mn2[0] + mn2[1]
    targets = [(p, q) for p in range(deg + 1) for q in range(deg + 1)
               if p + q <= deg]
    radial_nodes = max(2 * deg + 8, 16)
    angular_nodes = max(8 * cutoff, 4 * deg + 8)
    Z, W = _disc_grid(aprime, cutoff, radial_nodes, angular_nodes)
    vals = _disc_values(fam, set(targets) | {mn, mn2}, Z)
    prod = vals[mn] * vals[mn2]
    out = {}
    for k in targets:
        Vk = vals[k]
        norm = float(np.sum(W * np.abs(Vk) ** 2).real)
        coef = complex(np.sum(W * prod * np.conj(Vk))) / norm
        if abs(coef) > 1e-10:
            out[k] = coef.real if abs(coef.imag) < 1e-10 else coef
    return PointMeasure(out, check=False)


class DiscTable(Hypergroup):
    """Disc-polynomial hypergroup table, quadrature-backed convolution."""

    index_kind = "NaturalsPairs"

    def __init__(self, aprime: float, cutoff: int = 12):
        super().__init__()
        self.family = DiscFamily(aprime)
        self.cutoff = cutoff
        self._haar_cache: dict = {}

    @property
    def identity(self):
        return (0, 0)

    def involution(self, mn):
        return (mn[1], mn[0])

    def indices(self, limit: int):
        out = [(i, j) for i in range(limit + 1) for j in range(limit + 1)
               if i + j <= limit]
        out.sort(key=lambda p: (p[0] + p[1], p[0]))
        return out

    def _conv(self, n, m) -> PointMeasure:
        need = max(self.cutoff, n[0], n[1], m[0], m[1])
        mu = disc_linearize(self.family.aprime, n, m, need)
        total = sum(w.real if isinstance(w, complex) else w
                    for w in mu.weights.values())
        cleaned = {t: (w.real if isinstance(w, complex) else w) / total
                   for t, w in mu.weights.items()}
        return PointMeasure(cleaned, context=("disc", n, m))

    def haar(self, mn) -> float:
        """1 / int |P_mn|^2 dpi, by a degree-adapted direct quadrature."""
        h = self._haar_cache.get(mn)
        if h is None:
            m, n = mn
            deg = m + n
            Z, W = _disc_grid(self.family.aprime, max(deg, 1),
                              radial_nodes=2 * deg + 8,
                              angular_nodes=4 * abs(m - n) + 8)
            V = _disc_values(self.family, [mn], Z)[mn]
            h = 1.0 / float(np.sum(W * np.abs(V) ** 2).real)
            self._haar_cache[mn] = h
        return h


# ---------------------------------------------------------------------------
#  Decay probes along lattice directions
# ---------------------------------------------------------------------------

@dataclass
class DecayReport:
    direction: str
    n_values: list[int]
    magnitudes: list[float]
    slope: float
    last_value: float
    verdict: str  # "decays" | "bounded-away" | "inconclusive"

    def rows(self):
        """CSV rows (n, |P|, running log-log slope)."""
        out = []
        for i, (n, v) in enumerate(zip(self.n_values, self.magnitudes)):
            if i >= 4 and all(m > 0 for m in self.magnitudes[: i + 1]):
                s = fit_log_slope(np.asarray(self.magnitudes[: i + 1]),
                                  np.log(np.asarray(self.n_values[: i + 1], float)))
            else:
                s = float("nan")
            out.append((n, v, s))
        return out


def _classify_decay(ns: np.ndarray, mags: np.ndarray) -> tuple[float, str]:
    """Envelope log-log slope + the decays/bounded-away rule.

    "decays" needs tail max < 0.5 and slope < -0.1 over the last half
    window; oscillatory magnitudes are reduced to block maxima first.
    """
    centers, env = block_maxima(mags)
    xs = np.log(np.interp(centers, np.arange(len(ns)), ns.astype(float)))
    slope = fit_log_slope(env, xs)
    tail_max = float(np.max(np.abs(mags[len(mags) // 2:])))
    if math.isnan(slope):
        return slope, "inconclusive"
    if tail_max < 0.5 and slope < -0.1:
        return slope, "decays"
    if tail_max >= 0.5 and abs(slope) <= 0.1:
        return slope, "bounded-away"
    if tail_max >= 0.5:
        return slope, "bounded-away" if slope >= -0.1 else "inconclusive"
    return slope, "inconclusive"


def decay_probe_pairs(value_at: Callable[[int], complex], N: int,
                      direction: str = "(n,n)") -> DecayReport:
    """Slope report for |P| along a lattice direction.

    value_at(n) must return the character value at the n-th point of the
    direction (e.g. P_{n,n}(z) on the diagonal).
    """
    if N < 16:
        raise ConfigError("N must be >= 16")
    ns = np.arange(1, N + 1)
    mags = np.array([abs(value_at(int(n))) for n in ns])
    slope, verdict = _classify_decay(ns, mags)
    return DecayReport(direction=direction, n_values=[int(n) for n in ns],
                       magnitudes=[float(m) for m in mags], slope=slope,
                       last_value=float(mags[-1]), verdict=verdict)


def disc_diagonal_probe(aprime: float, z: complex, N: int) -> DecayReport:
    fam = DiscFamily(aprime)
    return decay_probe_pairs(lambda n: fam.character_value(n, n, z), N,
                             direction="(n,n)")


def product_direction_probe(fam1: RecursionFamily, fam2: RecursionFamily,
                            x: float, y: float, N: int,
                            direction: tuple[int, int] = (2, 1)) -> DecayReport:
    """|P_{(c1 n, c2 n)}(x, y)| along an integer direction."""
    c1, c2 = direction
    P1 = fam1.eval_character_grid(np.array([x]), c1 * N)[:, 0]
    P2 = fam2.eval_character_grid(np.array([y]), c2 * N)[:, 0]
    return decay_probe_pairs(lambda n: P1[c1 * n] * P2[c2 * n], N,
                             direction=f"({c1}n,{c2}n)")
