"""One-variable polynomial hypergroups.

Each family is a three-term recursion
    P1(x) P_n(x) = a_n P_{n+1}(x) + b_n P_n(x) + c_n P_{n-1}(x),   n >= 1,
with P_0 = 1 and P_1(x) = (x - b0)/a0, normalized so that all P_n equal 1
at the family's normalization point xstar.  Consequently a_n+b_n+c_n = 1
for n >= 1 and a0 + b0 = xstar.  The convolution of the induced
hypergroup on N_0 is the linearization P_n P_m = sum_t g(n,m,t) P_t with
nonnegative g; Haar weights are h(n) = 1/g(n,n,0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as cgamma

from .core import Character, Hypergroup, PointMeasure
from .errors import ConfigError, QuadratureError, StructureError
from .quadrature import MeasureDescriptor


@dataclass
class RecursionFamily:
    """Coefficient data for one polynomial hypergroup family."""

    name: str
    params: dict
    a0: float
    b0: float
    coeffs: Callable[[int], tuple[float, float, float]]  # n >= 1 -> (a_n, b_n, c_n)
    xstar: float = 1.0
    measure: Optional[MeasureDescriptor] = None
    closed_form_haar: Optional[Callable[[int], float]] = None
    # exact character values at distinguished spectral points: x -> (n -> value)
    spectral_points: dict = field(default_factory=dict)
    symmetric: bool = False  # all b_n == 0 (parity-preserving convolution)

    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"

    # -- character evaluation --------------------------------------------
    def eval_character(self, x: float, N: int, derivative: bool = False):
        """P_0(x) .. P_N(x) by the forward recursion (optionally with P').

        Values may exceed 1 in magnitude outside the character region;
        that is reported by callers, not an error here.
        """
        P = np.empty(N + 1)
        P[0] = 1.0
        if N >= 1:
            P[1] = (x - self.b0) / self.a0
        if derivative:
            D = np.empty(N + 1)
            D[0] = 0.0
            if N >= 1:
                D[1] = 1.0 / self.a0
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(1, N):
                an, bn, cn = self.coeffs(n)
                P[n + 1] = (P[1] * P[n] - bn * P[n] - cn * P[n - 1]) / an
                if derivative:
                    D[n + 1] = (D[1] * P[n] + P[1] * D[n] - bn * D[n]
                                - cn * D[n - 1]) / an
        return (P, D) if derivative else P

    def eval_character_grid(self, xs: np.ndarray, N: int) -> np.ndarray:
        """Vectorized recursion: array of shape (N+1, len(xs))."""
        xs = np.asarray(xs, dtype=float)
        P = np.empty((N + 1, len(xs)))
        P[0] = 1.0
        if N >= 1:
            P[1] = (xs - self.b0) / self.a0
        for n in range(1, N):
            an, bn, cn = self.coeffs(n)
            P[n + 1] = (P[1] * P[n] - bn * P[n] - cn * P[n - 1]) / an
        return P

    def character(self, x: float) -> Character:
        """Character alpha_x with a growable value cache.

        At distinguished spectral points the exact closed form is used;
        forward recursion there would let the growing parasitic solution
        poison Haar-weighted tail sums.
        """
        for pt, formula in self.spectral_points.items():
            if abs(x - pt) <= 1e-12 * max(1.0, abs(pt)):
                return Character(formula, parameter=pt, family=self.label())
        if abs(x - self.xstar) <= 1e-12 * max(1.0, abs(self.xstar)):
            return Character(lambda n: 1.0, parameter=self.xstar, family=self.label())
        cache = [np.array([1.0, (x - self.b0) / self.a0])]

        def evaluate(n: int) -> float:
            cur = cache[0]
            if n >= len(cur):
                size = max(2 * len(cur), n + 1)
                P = np.empty(size)
                P[: len(cur)] = cur
                with np.errstate(over="ignore", invalid="ignore"):
                    for k in range(len(cur) - 1, size - 1):
                        ak, bk, ck = self.coeffs(k)
                        P[k + 1] = (P[1] * P[k] - bk * P[k] - ck * P[k - 1]) / ak
                cache[0] = P
                cur = P
            return float(cur[n])

        return Character(evaluate, parameter=x, family=self.label())


# ---------------------------------------------------------------------------
#  Family constructors
# ---------------------------------------------------------------------------

def family_chebyshev() -> RecursionFamily:
    """Chebyshev (first kind) hypergroup: a_n = c_n = 1/2, h(n) = 2."""
    meas = MeasureDescriptor(weight_p=-0.5, weight_q=-0.5,
                             smooth=lambda x: np.full_like(x, 1.0 / math.pi))
    return RecursionFamily(
        name="chebyshev", params={}, a0=1.0, b0=0.0,
        coeffs=lambda n: (0.5, 0.0, 0.5),
        measure=meas,
        closed_form_haar=lambda n: 1.0 if n == 0 else 2.0,
        symmetric=True,
    )


def family_jacobi(alpha: float, beta: float) -> RecursionFamily:
    """Jacobi hypergroup normalized at 1; alpha >= beta > -1.

    Whether the coefficients define a hypergroup (nonnegative
    linearization) is checked empirically by verify_hypergroup, not by a
    hard-coded parameter region.
    """
    if not (alpha >= beta and beta > -1.0):
        raise ConfigError("jacobi requires alpha >= beta > -1")
    s = alpha + beta

    def ratio_r(n):  # P_{n+1}(1)/P_n(1) for the classical normalization
        return (alpha + 1 + n) / (n + 1.0)

    a0 = 2.0 * (alpha + 1.0) / (s + 2.0)
    b0 = (beta - alpha) / (s + 2.0)

    def coeffs(n):
        Ahat = 2.0 * (n + 1) * (n + s + 1) / ((2 * n + s + 1) * (2 * n + s + 2))
        Bhat = (beta ** 2 - alpha ** 2) / ((2 * n + s) * (2 * n + s + 2))
        Chat = 2.0 * (n + alpha) * (n + beta) / ((2 * n + s) * (2 * n + s + 1))
        an = Ahat * ratio_r(n) / a0
        bn = (Bhat - b0) / a0
        cn = Chat / (ratio_r(n - 1) * a0)
        return an, bn, cn

    lg = math.lgamma
    log_norm = -((s + 1) * math.log(2.0) + lg(alpha + 1) + lg(beta + 1) - lg(s + 2))
    meas = MeasureDescriptor(weight_p=alpha, weight_q=beta,
                             smooth=lambda x, c=math.exp(log_norm): np.full_like(x, c))
    return RecursionFamily(
        name="jacobi", params={"alpha": alpha, "beta": beta},
        a0=a0, b0=b0, coeffs=coeffs, measure=meas,
        symmetric=(alpha == beta),
    )


def family_assoc_legendre(nu: float) -> RecursionFamily:
    """Associated Legendre hypergroup with parameter nu >= 0.

    a_n = gamma_{n+1}/gamma_n with
    gamma_n = (nu+1)_n / (2^n (nu+1/2)_n) * (1 + sum_{k<=n} nu/(k+nu)),
    b_n = 0, c_n = 1 - a_n.  The same telescoped sum S_n = P_n(1) gives
    the closed-form Haar weights (2n+2nu+1)/(2nu+1) * S_n^2.
    """
    if nu < 0:
        raise ConfigError("assoc_legendre requires nu >= 0")

    @lru_cache(maxsize=None)
    def S(n: int) -> float:
        return 1.0 if n == 0 else S(n - 1) + nu / (n + nu)

    def coeffs(n):
        an = (n + nu + 1) * S(n + 1) / ((2 * n + 2 * nu + 1) * S(n))
        return an, 0.0, 1.0 - an

    def haar(n):
        return 1.0 if n == 0 else (2 * n + 2 * nu + 1) / (2 * nu + 1) * S(n) ** 2

    return RecursionFamily(
        name="assoc_legendre", params={"nu": nu}, a0=1.0, b0=0.0,
        coeffs=coeffs, closed_form_haar=haar, symmetric=True,
    )


def family_pollaczek(eta: float, mu: float) -> RecursionFamily:
    """Pollaczek hypergroup; (eta >= 0, mu > 0) or (-1/2 < eta < 0,
    0 <= mu < eta + 1/2).

    Coefficients come from the Laguerre connection: with
    ell_n = L_n^{(2 eta)}(-2 mu) = P_n-at-normalization the recursion is
        a_n = (n+1) ell_{n+1} / ((2n+2eta+2mu+1) ell_n),
        c_n = (n+2eta) ell_{n-1} / ((2n+2eta+2mu+1) ell_n),  b_n = 0,
    which reproduces the closed-form Haar weights
        h(n) = (2n+2eta+2mu+1)/(2eta+2mu+1) * (2eta+1)_n/n! * Sigma_n^2,
    Sigma_n = sum_k C(n,k) (2mu)^k / (2eta+1)_k.
    """
    ok = (eta >= 0 and mu > 0) or (-0.5 < eta < 0 and 0 <= mu < eta + 0.5)
    if not ok:
        raise ConfigError("pollaczek requires eta>=0, mu>0 or "
                          "-1/2<eta<0, 0<=mu<eta+1/2")
    ells = [1.0, 1.0 + 2 * eta + 2 * mu]

    def ell(n: int) -> float:
        while len(ells) <= n:
            k = len(ells) - 1
            ells.append(((2 * k + 2 * eta + 2 * mu + 1) * ells[k]
                         - (k + 2 * eta) * ells[k - 1]) / (k + 1))
        return ells[n]

    def coeffs(n):
        d = 2 * n + 2 * eta + 2 * mu + 1
        return ((n + 1) * ell(n + 1) / (d * ell(n)), 0.0,
                (n + 2 * eta) * ell(n - 1) / (d * ell(n)))

    def haar(n):
        if n == 0:
            return 1.0
        log_poch = math.lgamma(2 * eta + 1 + n) - math.lgamma(2 * eta + 1)
        pref = (2 * n + 2 * eta + 2 * mu + 1) / (2 * eta + 2 * mu + 1)
        return pref * math.exp(math.lgamma(n + 1) - log_poch) * ell(n) ** 2

    def density_smooth(x):
        # A(cos t) = (sin t)^{2 eta} |Gamma(eta+1/2 + i mu cot t)|^2
        #            * exp((2t - pi) mu cot t); the (1-x^2)^eta factor is
        #            carried by the quadrature weight exponents.
        x = np.asarray(x, dtype=float)
        t = np.arccos(np.clip(x, -1.0, 1.0))
        sin_t = np.sqrt(np.clip(1.0 - x * x, 1e-300, None))
        cot = x / sin_t
        g = cgamma(eta + 0.5 + 1j * mu * cot)
        vals = (np.abs(g) ** 2) * np.exp((2.0 * t - math.pi) * mu * cot)
        return np.where(np.isfinite(vals), vals, 0.0)

    meas = MeasureDescriptor(weight_p=eta, weight_q=eta, smooth=density_smooth)
    return RecursionFamily(
        name="pollaczek", params={"eta": eta, "mu": mu}, a0=1.0, b0=0.0,
        coeffs=coeffs, measure=meas, closed_form_haar=haar, symmetric=True,
    )


def family_soradi(k: float) -> RecursionFamily:
    """Generalized Soardi hypergroup, parameter k > 1.

    Characters in trigonometric form:
        P_n(cos t) = (sin (n+1)t + k sin nt) / ((n(k+1)+1) sin t),
    the sign of k fixed so the linearization is nonnegative (the
    opposite sign yields b_n < 0 and no hypergroup).  Haar weights are
    h(n) = (n(k+1)+1)^2.

    The orthogonality measure is the density proportional to
    (1-x^2)^{1/2} / (1 + k^2 + 2kx) (mass 1/k^2) PLUS an atom of mass
    (k^2-1)/k^2 at -(k^2+1)/(2k): the Jacobi operator is the
    Chebyshev-U one with a single diagonal entry -k/2 at index 0, and
    that rank-one perturbation splits off one eigenvalue below -1.
    """
    if k <= 1:
        raise ConfigError("soradi requires k > 1")

    def d(n):
        return n * (k + 1.0) + 1.0

    def coeffs(n):
        return d(n + 1) / (d(1) * d(n)), k / d(1), d(n - 1) / (d(1) * d(n))

    def density_smooth(x):
        x = np.asarray(x, dtype=float)
        return 2.0 / (math.pi * (1.0 + k * k + 2.0 * k * x))

    atom_loc = -(k * k + 1.0) / (2.0 * k)
    meas = MeasureDescriptor(weight_p=0.5, weight_q=0.5, smooth=density_smooth,
                             atoms=[(atom_loc, (k * k - 1.0) / (k * k))])
    fam = RecursionFamily(
        name="soradi", params={"k": k}, a0=(k + 2.0) / 2.0, b0=-k / 2.0,
        coeffs=coeffs, measure=meas,
        closed_form_haar=lambda n: d(n) ** 2,
    )
    # exact decaying solution at the spectral atom (forward recursion is
    # dominated by the growing branch there)
    fam.spectral_points = {atom_loc: lambda n: (-1.0) ** n / (k ** n * d(n))}
    return fam


def soradi_closed_form(k: float, theta: float, n: int) -> float:
    """Trigonometric closed form of the Soardi character at x = cos(theta)."""
    dn = n * (k + 1.0) + 1.0
    if n == 0:
        return 1.0
    return (math.sin((n + 1) * theta) + k * math.sin(n * theta)) / (dn * math.sin(theta))


def family_graph(a: float, b: float) -> RecursionFamily:
    """Distance-transitive-graph hypergroup with parameters a, b >= 2.

    Coefficients are recovered in closed form from the Chebyshev-U
    representation of the characters:
        a_n = (a-1)/a,  b_n = (b-2)/(a(b-1)),  c_n = 1/(a(b-1))   (n >= 1),
        a0  = a tau / (2(a-1)),  b0 = -(b-2)/(2 tau),
    tau = sqrt((a-1)(b-1)).  These reproduce h(n) = a(a-1)^{n-1}(b-1)^n,
    P_n(s0) = (1-b)^{-n} with s0 = (2-a-b)/(2 tau), and P_n(s1) = 1 at
    the normalization point s1 = (ab-a-b+2)/(2 tau).
    """
    if a < 2 or b < 2:
        raise ConfigError("graph family requires a, b >= 2")
    tau = math.sqrt((a - 1.0) * (b - 1.0))
    a0 = a * tau / (2.0 * (a - 1.0))
    b0 = -(b - 2.0) / (2.0 * tau)
    an = (a - 1.0) / a
    bn = (b - 2.0) / (a * (b - 1.0))
    cn = 1.0 / (a * (b - 1.0))
    s0 = (2.0 - a - b) / (2.0 * tau)
    s1 = (a * b - a - b + 2.0) / (2.0 * tau)

    def haar(n):
        return 1.0 if n == 0 else a * (a - 1.0) ** (n - 1) * (b - 1.0) ** n

    def density_smooth(x):
        x = np.asarray(x, dtype=float)
        return a / (2.0 * math.pi * (s1 - x) * (x - s0))

    atoms = [(s0, (b - a) / b)] if b > a else []
    meas = MeasureDescriptor(weight_p=0.5, weight_q=0.5, smooth=density_smooth,
                             atoms=atoms)
    fam = RecursionFamily(
        name="graph", params={"a": a, "b": b},
        a0=a0, b0=b0, coeffs=lambda n: (an, bn, cn),
        xstar=s1, measure=meas, closed_form_haar=haar,
        symmetric=(b == 2),
    )
    fam.spectral_points = {s0: lambda n: (1.0 - b) ** (-n)}
    return fam


def family_custom(name: str, a0: float, b0: float, coeffs, xstar: float = 1.0,
                  **kw) -> RecursionFamily:
    """Unvalidated family, mainly for structure-failure tests."""
    return RecursionFamily(name=name, params={}, a0=a0, b0=b0, coeffs=coeffs,
                           xstar=xstar, **kw)


def graph_spectral_points(a: float, b: float) -> tuple[float, float]:
    """(s0, s1) for the graph family; P(s0)=(1-b)^-n, P(s1)=1."""
    tau = math.sqrt((a - 1.0) * (b - 1.0))
    return (2.0 - a - b) / (2.0 * tau), (a * b - a - b + 2.0) / (2.0 * tau)


FAMILY_BUILDERS: dict[str, Callable[..., RecursionFamily]] = {
    "chebyshev": family_chebyshev,
    "jacobi": family_jacobi,
    "assoc_legendre": family_assoc_legendre,
    "pollaczek": family_pollaczek,
    "soradi": family_soradi,
    "graph": family_graph,
}


def family_from_spec(spec: dict) -> RecursionFamily:
    """Build a family from {"family": name, "params": {...}}."""
    name = spec.get("family")
    if name not in FAMILY_BUILDERS:
        raise ConfigError(f"unknown family {name!r}; choose from "
                          f"{sorted(FAMILY_BUILDERS)}")
    params = dict(spec.get("params", {}))
    try:
        return FAMILY_BUILDERS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for family {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
#  Linearization and the induced table
# ---------------------------------------------------------------------------

def _shift_by_p1(fam: RecursionFamily, g: dict) -> dict:
    """Multiply a coefficient vector in the P basis by P1, termwise."""
    out: dict = {}
    for t, w in g.items():
        if t == 0:
            out[1] = out.get(1, 0.0) + w
        else:
            at, bt, ct = fam.coeffs(t)
            out[t + 1] = out.get(t + 1, 0.0) + w * at
            if bt:
                out[t] = out.get(t, 0.0) + w * bt
            out[t - 1] = out.get(t - 1, 0.0) + w * ct
    return out


def linearize(fam: RecursionFamily, n: int, m: int) -> PointMeasure:
    """Coefficients of P_n P_m in the P basis.

    Exact recurrence in the smaller index:
        g(k+1, m, .) = [shift-by-P1(g(k, m, .)) - b_k g(k, m, .)
                        - c_k g(k-1, m, .)] / a_k.
    Support is contained in [|n-m|, n+m] and the coefficients sum to 1;
    negative values beyond tolerance raise StructureError.
    """
    if n < 0 or m < 0:
        raise ConfigError("indices must be nonnegative")
    if n > m:
        n, m = m, n
    g_prev = {m: 1.0}
    if n == 0:
        return PointMeasure(g_prev, context=(fam.label(), n, m))
    if m == 0:
        g_cur = {1: 1.0}
    else:
        am, bm, cm = fam.coeffs(m)
        g_cur = {m + 1: am, m - 1: cm}
        if bm:
            g_cur[m] = bm
    for k in range(1, n):
        ak, bk, ck = fam.coeffs(k)
        nxt = _shift_by_p1(fam, g_cur)
        if bk:
            for t, w in g_cur.items():
                nxt[t] = nxt.get(t, 0.0) - bk * w
        for t, w in g_prev.items():
            nxt[t] = nxt.get(t, 0.0) - ck * w
        g_prev = g_cur
        g_cur = {t: w / ak for t, w in nxt.items()}
    return PointMeasure(g_cur, context=(fam.label(), n, m))


class PolynomialTable(Hypergroup):
    """Hypergroup on N_0 induced by a recursion family.

    Entries are linearizations computed lazily; involution is the
    identity.  Haar weights are h(n) = 1/g(n,n,0); the accessor uses the
    equivalent prefix-product identity h(n+1) = h(n) a_n / c_{n+1}
    (h(1) = 1/c_1), which is cheap and log-space safe, while
    haar_from_entry computes 1/g(n,n,0) literally for cross-checks.
    `max_degree` only sets the default enumeration window; entries
    beyond it are still computable.
    """

    index_kind = "Naturals"

    def __init__(self, family: RecursionFamily, max_degree: int = 64):
        super().__init__()
        self.family = family
        self.max_degree = max_degree
        self._h = [1.0]
        self._log_h = [0.0]

    @property
    def identity(self):
        return 0

    def involution(self, n):
        return n

    def indices(self, limit: int):
        return list(range(limit + 1))

    def _key(self, n, m):
        return (n, m) if n <= m else (m, n)

    def _conv(self, n, m) -> PointMeasure:
        return linearize(self.family, n, m)

    def _ensure_haar(self, n: int):
        if len(self._h) > n:
            return
        with self._lock:
            while len(self._h) <= n:
                k = len(self._h)
                ck = self.family.coeffs(k)[2]
                ratio = 1.0 / ck if k == 1 else self.family.coeffs(k - 1)[0] / ck
                self._h.append(self._h[-1] * ratio)
                self._log_h.append(self._log_h[-1] + math.log(ratio))

    def haar(self, n) -> float:
        self._ensure_haar(n)
        return self._h[n]

    def log_haar(self, n) -> float:
        self._ensure_haar(n)
        return self._log_h[n]

    def haar_from_entry(self, n) -> float:
        """h(n) = 1/g(n,n,0) computed through the convolution table."""
        return 1.0 if n == 0 else 1.0 / self.conv(n, n)(0)

    def character(self, x: float) -> Character:
        return self.family.character(x)


def build_table(fam: RecursionFamily, N: int) -> PolynomialTable:
    """Table whose conv uses linearize; propagates structure errors."""
    if N < 1:
        raise ConfigError("N must be >= 1")
    return PolynomialTable(fam, max_degree=N)


# ---------------------------------------------------------------------------
#  Verification and cross-checks
# ---------------------------------------------------------------------------

@dataclass
class HypergroupReport:
    """Result of the hypergroup-axiom sweep for one family."""

    family: str
    N: int
    passed: bool
    worst_negative: float = 0.0
    worst_negative_at: Optional[tuple] = None
    worst_mass_dev: float = 0.0
    worst_mass_dev_at: Optional[tuple] = None
    worst_coeff_sum_dev: float = 0.0
    messages: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "family": self.family, "N": self.N, "passed": self.passed,
            "worst_negative": self.worst_negative,
            "worst_negative_at": self.worst_negative_at,
            "worst_mass_dev": self.worst_mass_dev,
            "worst_mass_dev_at": self.worst_mass_dev_at,
            "worst_coeff_sum_dev": self.worst_coeff_sum_dev,
            "messages": self.messages,
        }


def verify_hypergroup(fam: RecursionFamily, N: int, neg_tol: float = 1e-12,
                      mass_tol: float = 1e-10,
                      coeff_tol: float = 1e-12) -> HypergroupReport:
    """Check g(n,m,t) >= -neg_tol, row sums 1, and coefficient sums.

    Report-only: a located witness is returned instead of raising.
    """
    rep = HypergroupReport(family=fam.label(), N=N, passed=True)
    dev0 = abs(fam.a0 + fam.b0 - fam.xstar)
    rep.worst_coeff_sum_dev = dev0
    if dev0 > coeff_tol:
        rep.passed = False
        rep.messages.append(f"a0+b0 deviates from xstar by {dev0:.3e}")
    for n in range(1, N + 1):
        an, bn, cn = fam.coeffs(n)
        dev = abs(an + bn + cn - 1.0)
        if dev > rep.worst_coeff_sum_dev:
            rep.worst_coeff_sum_dev = dev
        if dev > coeff_tol:
            rep.passed = False
            rep.messages.append(f"a+b+c at n={n} deviates from 1 by {dev:.3e}")
        if an <= 0 or cn <= 0:
            rep.passed = False
            rep.messages.append(f"non-positive a_n or c_n at n={n}")
    for n in range(N + 1):
        for m in range(n, N + 1):
            try:
                mu = linearize(fam, n, m)
            except StructureError as exc:
                if exc.value is not None and exc.value < rep.worst_negative:
                    rep.worst_negative = exc.value
                    rep.worst_negative_at = (n, m, exc.t)
                if exc.value is None or exc.value < -neg_tol:
                    rep.passed = False
                    rep.messages.append(str(exc))
                continue
            mass_dev = abs(mu.mass() - 1.0)
            if mass_dev > rep.worst_mass_dev:
                rep.worst_mass_dev = mass_dev
                rep.worst_mass_dev_at = (n, m)
            lo, hi = m - n, m + n
            if any(t < lo or t > hi for t in mu.support()):
                rep.passed = False
                rep.messages.append(f"support of g({n},{m},.) outside "
                                    f"[{lo},{hi}]")
    if rep.worst_mass_dev > mass_tol:
        rep.passed = False
        rep.messages.append(f"row sum deviates by {rep.worst_mass_dev:.3e} "
                            f"at {rep.worst_mass_dev_at}")
    return rep


def closed_form_haar_table(fam: RecursionFamily, N: int):
    """(table h, closed-form h) arrays where the family provides one."""
    table = PolynomialTable(fam, N)
    ht = np.array([table.haar(n) for n in range(N + 1)])
    if fam.closed_form_haar is None:
        return ht, None
    hc = np.array([fam.closed_form_haar(n) for n in range(N + 1)])
    return ht, hc


def orthogonality_check(fam: RecursionFamily, N: int,
                        quadrature_nodes: int | None = None,
                        return_matrix: bool = False):
    """Max deviation of int P_n P_m dpi from delta_nm / h(n).

    Quadrature nodes are doubled until two successive deviation values
    agree to 1e-8; atoms are added analytically.  With return_matrix the
    full |deviation| matrix comes back alongside the max.
    """
    if fam.measure is None:
        raise ConfigError(f"family {fam.label()} has no measure descriptor")
    table = PolynomialTable(fam, N)
    target = np.diag([1.0 / table.haar(n) for n in range(N + 1)])
    nodes = quadrature_nodes or max(4 * N, 64)
    prev = None
    D = None
    converged = False
    while nodes <= 1 << 16:
        G = fam.measure.gram(lambda x: fam.eval_character_grid(x, N), N + 1, nodes)
        D = np.abs(G - target)
        dev = float(np.max(D))
        if prev is not None and abs(dev - prev) <= 1e-8:
            converged = True
            break
        prev = dev
        nodes *= 2
    if not converged:
        raise QuadratureError(
            f"Gram deviations did not stabilize within the node budget "
            f"for {fam.label()}")
    dev = float(np.max(D))
    return (dev, D) if return_matrix else dev


def linearize_quadrature_oracle(fam: RecursionFamily, n: int, m: int,
                                nodes: int = 2048) -> dict:
    """Independent route to g(n,m,t): h(t) * int P_n P_m P_t dpi."""
    if fam.measure is None:
        raise ConfigError("no measure available")
    table = PolynomialTable(fam, max(n + m, 1))
    N = n + m
    meas = fam.measure
    x, w = meas.nodes(nodes)
    W = meas.norm_constant() * w * meas.smooth(x)
    P = fam.eval_character_grid(x, N)
    vals = P @ (W * P[n] * P[m])
    for loc, mass in meas.atoms:
        Pa = fam.eval_character_grid(np.array([loc]), N)[:, 0]
        vals = vals + mass * Pa * (Pa[n] * Pa[m])
    out = {}
    for t in range(abs(n - m), N + 1):
        g = table.haar(t) * float(vals[t])
        if abs(g) > 1e-12:
            out[t] = g
    return out


def coefficient_rows(fam: RecursionFamily, N: int):
    """Rows (n, a_n, b_n, c_n, h_n) for dumps; n=0 row carries a0, b0."""
    table = PolynomialTable(fam, N)
    rows = [(0, fam.a0, fam.b0, 0.0, 1.0)]
    for n in range(1, N + 1):
        an, bn, cn = fam.coeffs(n)
        rows.append((n, an, bn, cn, table.haar(n)))
    return rows
