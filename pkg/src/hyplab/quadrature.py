"""Quadrature rules and orthogonality-measure descriptors.

A measure is an absolutely continuous density on an interval plus an
optional list of atoms.  Densities that carry endpoint weight factors
(1-x)^p (1+x)^q are integrated with Gauss-Jacobi nodes so the endpoint
behaviour is folded into the rule; atoms are always added analytically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_jacobi

from .errors import QuadratureError

MAX_NODES = 1 << 17


def gauss_legendre(n: int, lo: float = -1.0, hi: float = 1.0):
    """Nodes and weights for plain Gauss-Legendre on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * x, half * w


def gauss_jacobi(n: int, p: float, q: float, lo: float = -1.0, hi: float = 1.0):
    """Nodes/weights integrating f against (1-x)^p (1+x)^q on [lo, hi].

    The weight factor is part of the rule; integrands passed to these
    weights must NOT include it again.
    """
    x, w = roots_jacobi(n, p, q)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    # account for the affine change of variables inside the weight factor
    scale = half ** (p + q + 1)
    return mid + half * x, scale * w


@dataclass
class MeasureDescriptor:
    """Orthogonality measure: density on [lo, hi] plus optional atoms.

    density(x) must include every factor EXCEPT the declared endpoint
    weight exponents; the full density is
        norm * (1-x)^weight_p (1+x)^weight_q * smooth(x)
    where norm is fixed so that total mass (incl. atoms) equals one.
    """

    lo: float = -1.0
    hi: float = 1.0
    smooth: Callable[[np.ndarray], np.ndarray] = lambda x: np.ones_like(x)
    weight_p: float = 0.0
    weight_q: float = 0.0
    atoms: list[tuple[float, float]] = field(default_factory=list)
    _norm: Optional[float] = None

    def nodes(self, n: int):
        if self.weight_p or self.weight_q:
            return gauss_jacobi(n, self.weight_p, self.weight_q, self.lo, self.hi)
        return gauss_legendre(n, self.lo, self.hi)

    @property
    def atom_mass(self) -> float:
        return sum(m for _, m in self.atoms)

    def norm_constant(self) -> float:
        """Scale applied to the density so total mass is 1."""
        if self._norm is None:
            raw = self._converged_integral(lambda x: np.ones_like(x))
            target = 1.0 - self.atom_mass
            if raw <= 0 or target <= 0:
                raise QuadratureError("density mass is not positive")
            self._norm = target / raw
        return self._norm

    def _converged_integral(self, f, n0: int = 64, rtol: float = 1e-12):
        n, prev = n0, None
        while n <= MAX_NODES:
            x, w = self.nodes(n)
            val = float(np.dot(w, self.smooth(x) * f(x)))
            if prev is not None and abs(val - prev) <= rtol * max(1.0, abs(val)):
                return val
            prev, n = val, 2 * n
        raise QuadratureError("integral did not converge within node budget")

    def integrate(self, f, n_nodes: int):
        """Integrate f against the normalized measure with n_nodes nodes."""
        x, w = self.nodes(n_nodes)
        total = self.norm_constant() * float(np.dot(w, self.smooth(x) * f(x)))
        for loc, mass in self.atoms:
            total += mass * float(np.asarray(f(np.asarray([loc]))).ravel()[0])
        return total

    def gram(self, values: Callable[[np.ndarray], np.ndarray], size: int,
             n_nodes: int):
        """Gram matrix of a value table against the measure.

        values(x) must return an array of shape (size, len(x)); atoms are
        added analytically from values at the atom locations.
        """
        x, w = self.nodes(n_nodes)
        V = values(x)
        W = self.norm_constant() * w * self.smooth(x)
        G = (V * W) @ V.T.conj()
        for loc, mass in self.atoms:
            v = values(np.asarray([loc]))[:, 0]
            G += mass * np.outer(v, v.conj())
        return G
