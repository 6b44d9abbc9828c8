"""Hypergroup joins H v J: a finite H glued to a discrete J at the identity.

Convolution rules:
  (1) H-internal pairs convolve in H;
  (2) J-internal pairs with x != y~ convolve in J;
  (3) absorption: eps_x (.) eps_y = eps_y for x in H, y in J \\ {e};
  (4) eps_{y~} (.) eps_y = c_e m_H + sum_{w != e} c_w eps_w, where the
      J-convolution is sum_w c_w eps_w and m_H is H's normalized Haar
      probability measure.
Haar measure: m_K = m_H + 1_{J \\ {e}} m_J (requires m_J({e}) = 1); the
identity's weight comes from m_H, so m_K({e}) < 1 in general.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Character, Hypergroup, PointMeasure, WeightedSequence, translate
from .errors import ConfigError


class FiniteTable(Hypergroup):
    """Finite commutative hypergroup given by explicit convolutions."""

    index_kind = "FiniteSet"

    def __init__(self, labels: list, identity, conv_map: dict,
                 involution_map: dict, haar_map: dict):
        super().__init__()
        self.labels = list(labels)
        self._identity = identity
        self._conv_map = {}
        for (x, y), mu in conv_map.items():
            m = mu if isinstance(mu, PointMeasure) else PointMeasure(dict(mu))
            self._conv_map[(x, y)] = m
            self._conv_map[(y, x)] = m
        self._inv = dict(involution_map)
        self._haar = dict(haar_map)

    @property
    def identity(self):
        return self._identity

    def involution(self, x):
        return self._inv[x]

    def haar(self, x) -> float:
        return self._haar[x]

    def indices(self, limit: int):
        return list(self.labels)

    def size(self) -> int:
        return len(self.labels)

    def _key(self, n, m):
        return (n, m)

    def _conv(self, n, m) -> PointMeasure:
        return self._conv_map[(n, m)]

    def total_haar(self) -> float:
        return sum(self._haar[x] for x in self.labels)

    def normalized_haar(self) -> dict:
        """m_H as a probability measure (weights sum to 1)."""
        total = self.total_haar()
        return {x: self._haar[x] / total for x in self.labels}

    # -- constructors ------------------------------------------------------
    @classmethod
    def cyclic_group(cls, n: int, prefix: str = "g") -> "FiniteTable":
        """Z_n as a hypergroup: conv(x, y) = delta_{x+y}, h = 1."""
        if n < 1:
            raise ConfigError("cyclic group order must be >= 1")
        labels = [f"{prefix}{i}" for i in range(n)]
        conv = {}
        for i in range(n):
            for j in range(i, n):
                conv[(labels[i], labels[j])] = {labels[(i + j) % n]: 1.0}
        inv = {labels[i]: labels[(-i) % n] for i in range(n)}
        haar = {lab: 1.0 for lab in labels}
        return cls(labels, labels[0], conv, inv, haar)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FiniteTable":
        labels = doc["labels"]
        conv = {}
        for ent in doc["entries"]:
            conv[(ent["n"], ent["m"])] = {t: w for t, w in ent["measure"]}
        inv = doc.get("involution", {x: x for x in labels})
        haar = {x: h for x, h in doc["haar"]}
        return cls(labels, doc["identity"], conv, inv, haar)

    def characters(self, tol: float = 1e-10) -> list[Character]:
        """All characters, via joint eigenvectors of translation operators.

        A character gamma satisfies (A_x gamma)(y) = gamma(x) gamma(y)
        with A_x[y, t] = p(x, y)({t}); a random combination of the A_x
        separates the common eigenvectors.
        """
        n = len(self.labels)
        pos = {x: i for i, x in enumerate(self.labels)}
        mats = []
        for x in self.labels:
            A = np.zeros((n, n), dtype=complex)
            for yi, y in enumerate(self.labels):
                for t, w in self.conv(x, y).items():
                    A[yi, pos[t]] += w
            mats.append(A)
        rng = np.random.default_rng(7)
        combo = sum(float(c) * A for c, A in zip(rng.normal(size=n), mats))
        _, vecs = np.linalg.eig(combo)
        e_idx = pos[self.identity]
        chars: list[Character] = []
        seen: list[np.ndarray] = []
        for k in range(n):
            v = vecs[:, k]
            if abs(v[e_idx]) < 1e-12:
                continue
            v = v / v[e_idx]
            vals = {x: complex(v[pos[x]]) for x in self.labels}
            ok = all(
                abs(sum(w * vals[t] for t, w in self.conv(x, y).items())
                    - vals[x] * vals[y]) <= tol
                for x in self.labels for y in self.labels)
            if not ok:
                continue
            if any(np.max(np.abs(v - u)) < 1e-8 for u in seen):
                continue
            seen.append(v)
            is_real = all(abs(val.imag) < 1e-12 for val in vals.values())
            if is_real:
                vals = {x: val.real for x, val in vals.items()}
            chars.append(Character(lambda x, vals=vals: vals[x],
                                   parameter=None, family="finite",
                                   is_real=is_real))
        return chars


# ---------------------------------------------------------------------------
#  The join
# ---------------------------------------------------------------------------

JOIN_IDENTITY = "e"


def _h_label(x) -> tuple:
    return ("H", x)


def _j_label(n) -> tuple:
    return ("J", n)


class JoinTable(Hypergroup):
    """K = H v J on merged labels ('H', x), ('J', n) and shared 'e'."""

    index_kind = "FiniteSet"

    def __init__(self, H: FiniteTable, J: Hypergroup, j_window: int = 64):
        super().__init__()
        if abs(J.haar(J.identity) - 1.0) > 1e-12:
            raise ConfigError("join requires m_J({e}) = 1")
        self.H = H
        self.J = J
        self.j_window = j_window
        self.mH = H.normalized_haar()

    # -- label plumbing ----------------------------------------------------
    def wrap_h(self, x):
        return JOIN_IDENTITY if x == self.H.identity else _h_label(x)

    def wrap_j(self, n):
        return JOIN_IDENTITY if n == self.J.identity else _j_label(n)

    def _side(self, k):
        if k == JOIN_IDENTITY:
            return "e", None
        return k[0], k[1]

    @property
    def identity(self):
        return JOIN_IDENTITY

    def involution(self, k):
        side, v = self._side(k)
        if side == "e":
            return k
        if side == "H":
            return self.wrap_h(self.H.involution(v))
        return self.wrap_j(self.J.involution(v))

    def haar(self, k) -> float:
        side, v = self._side(k)
        if side == "J":
            return self.J.haar(v)
        x = self.H.identity if side == "e" else v
        return self.mH[x]

    def indices(self, limit: int):
        out = [JOIN_IDENTITY]
        out += [_h_label(x) for x in self.H.labels if x != self.H.identity]
        out += [_j_label(n) for n in self.J.indices(min(limit, self.j_window))
                if n != self.J.identity]
        return out

    def _key(self, n, m):
        a, b = sorted((n, m), key=repr)
        return (a, b)

    def _wrap_h_measure(self, mu: PointMeasure) -> dict:
        return {self.wrap_h(t): w for t, w in mu.items()}

    def _wrap_j_measure(self, mu: PointMeasure) -> dict:
        return {self.wrap_j(t): w for t, w in mu.items()}

    def _conv(self, k1, k2) -> PointMeasure:
        s1, v1 = self._side(k1)
        s2, v2 = self._side(k2)
        if s1 == "e":
            return PointMeasure({k2: 1.0})
        if s2 == "e":
            return PointMeasure({k1: 1.0})
        if s1 == "H" and s2 == "H":
            return PointMeasure(
                self._wrap_h_measure(self.H.conv(v1, v2)),
                context=("join-H", k1, k2))
        if s1 == "H" or s2 == "H":
            absorbed = k2 if s1 == "H" else k1            # rule (3)
            return PointMeasure({absorbed: 1.0})
        # both in J \ {e}
        mu = self.J.conv(v1, v2)
        if self.J.involution(v1) != v2:                    # rule (2)
            return PointMeasure(self._wrap_j_measure(mu),
                                context=("join-J", k1, k2))
        # rule (4): spread the identity mass over m_H
        out: dict = {}
        c_e = mu(self.J.identity)
        for t, w in mu.items():
            if t != self.J.identity:
                out[_j_label(t)] = w
        if c_e > 0:
            for x, w in self.mH.items():
                lab = self.wrap_h(x)
                out[lab] = out.get(lab, 0.0) + c_e * w
        return PointMeasure(out, context=("join-rule4", k1, k2))


def join(H: FiniteTable, J: Hypergroup, j_window: int = 64) -> JoinTable:
    """Build H v J; labels must be disjoint outside the shared identity."""
    return JoinTable(H, J, j_window=j_window)


# ---------------------------------------------------------------------------
#  Axiom verification
# ---------------------------------------------------------------------------

def _conv_measure_with_point(K: Hypergroup, mu: PointMeasure, z) -> dict:
    out: dict = {}
    for t, w in mu.items():
        for u, v in K.conv(t, z).items():
            out[u] = out.get(u, 0.0) + w * v
    return out


@dataclass
class JoinAxiomReport:
    n_triples: int = 0
    n_skipped: int = 0
    max_assoc_dev: float = 0.0
    max_mass_dev: float = 0.0
    max_commut_dev: float = 0.0
    max_involution_dev: float = 0.0
    window: list = field(default_factory=list)
    passed: bool = True

    def as_dict(self) -> dict:
        return {
            "n_triples": self.n_triples, "n_skipped": self.n_skipped,
            "max_associativity_deviation": self.max_assoc_dev,
            "max_mass_deviation": self.max_mass_dev,
            "max_commutativity_deviation": self.max_commut_dev,
            "max_involution_deviation": self.max_involution_dev,
            "passed": self.passed,
        }


def verify_join_axioms(K: Hypergroup, depth: int, tol: float = 1e-10) -> JoinAxiomReport:
    """Brute-force axiom sweep over a (truncated) index window.

    For infinite J only triples whose intermediate supports stay inside
    the window are counted; the rest are reported as skipped.
    """
    window = K.indices(depth)
    wset = set(window)
    rep = JoinAxiomReport(window=list(window))
    for x in window:
        for y in window:
            mu = K.conv(x, y)
            rep.max_mass_dev = max(rep.max_mass_dev, abs(mu.mass() - 1.0))
            nu = K.conv(y, x)
            dev = max(abs(mu(t) - nu(t)) for t in set(mu.support()) | set(nu.support()))
            rep.max_commut_dev = max(rep.max_commut_dev, dev)
            # involution anti-homomorphism: (x*y)~ = y~ * x~
            lhs = {K.involution(t): w for t, w in mu.items()}
            rhs = K.conv(K.involution(y), K.involution(x))
            dev = max(abs(lhs.get(t, 0.0) - rhs(t))
                      for t in set(lhs) | set(rhs.support()))
            rep.max_involution_dev = max(rep.max_involution_dev, dev)
    for x in window:
        for y in window:
            mu_xy = K.conv(x, y)
            if not set(mu_xy.support()) <= wset:
                rep.n_skipped += len(window)
                continue
            for z in window:
                mu_yz = K.conv(y, z)
                if not set(mu_yz.support()) <= wset:
                    rep.n_skipped += 1
                    continue
                lhs = _conv_measure_with_point(K, mu_xy, z)
                rhs = {}
                for t, w in mu_yz.items():
                    for u, v in K.conv(x, t).items():
                        rhs[u] = rhs.get(u, 0.0) + w * v
                keys = set(lhs) | set(rhs)
                dev = max(abs(lhs.get(t, 0.0) - rhs.get(t, 0.0)) for t in keys)
                rep.max_assoc_dev = max(rep.max_assoc_dev, dev)
                rep.n_triples += 1
    rep.passed = (rep.max_assoc_dev <= tol and rep.max_mass_dev <= tol
                  and rep.max_commut_dev <= tol and rep.max_involution_dev <= tol)
    return rep


# ---------------------------------------------------------------------------
#  Dual space
# ---------------------------------------------------------------------------

def extend_character(K: JoinTable, alpha: Character) -> Character:
    """Extend a J-character to K by gamma = 1 on H."""

    def gamma(k):
        side, v = K._side(k)
        if side == "J":
            return alpha.value(v)
        return 1.0 if side == "H" else alpha.value(K.J.identity)

    return Character(gamma, parameter=alpha.parameter,
                     family=f"join-ext[{alpha.family}]", is_real=alpha.is_real)


def extend_h_character(K: JoinTable, chi: Character) -> Character:
    """Extend a nontrivial H-character to K by 0 on J \\ {e}."""

    def gamma(k):
        side, v = K._side(k)
        if side == "H":
            return chi.value(v)
        if side == "e":
            return chi.value(K.H.identity)
        return 0.0

    return Character(gamma, parameter=chi.parameter,
                     family=f"join-ext[{chi.family}]", is_real=chi.is_real)


def character_multiplicativity(K: Hypergroup, gamma: Character,
                               pairs) -> float:
    """Max |p(x,y)(gamma) - gamma(x) gamma(y)| over the given pairs."""
    worst = 0.0
    for x, y in pairs:
        val = sum(w * gamma.value(t) for t, w in K.conv(x, y).items())
        worst = max(worst, abs(val - gamma.value(x) * gamma.value(y)))
    return worst


def join_dual_enumerate(K: JoinTable, tol: float = 1e-10) -> list[Character]:
    """All characters of a finite join: J-characters extended by 1 on H,
    nontrivial H-characters extended by 0 on J; count |H^| + |J^| - 1.

    Every returned character is verified multiplicative on all pairs.
    """
    if not isinstance(K.J, FiniteTable):
        raise ConfigError("dual enumeration needs a finite J")
    window = K.indices(len(K.H.labels) + K.J.size() + 1)
    pairs = [(x, y) for x in window for y in window]
    out: list[Character] = []
    for alpha in K.J.characters(tol):
        gamma = extend_character(K, alpha)
        dev = character_multiplicativity(K, gamma, pairs)
        if dev > tol:
            raise ConfigError(f"J-character extension failed verification "
                              f"({dev:.2e}); degenerate join input")
        out.append(gamma)
    for chi in K.H.characters(tol):
        if all(abs(chi.value(x) - 1.0) < 1e-10 for x in K.H.labels):
            continue  # the trivial character is already counted via J
        gamma = extend_h_character(K, chi)
        dev = character_multiplicativity(K, gamma, pairs)
        if dev > tol:
            raise ConfigError(f"H-character extension failed verification "
                              f"({dev:.2e}); non-strong join input")
        out.append(gamma)
    return out


def haar_invariance_deviation(K: Hypergroup, depth: int, trials: int = 8,
                              seed: int = 5) -> float:
    """Max |sum h (T_x f) - sum h f| over random sparse f and window x."""
    rng = np.random.default_rng(seed)
    window = K.indices(depth)
    worst = 0.0
    for _ in range(trials):
        support = rng.choice(len(window), size=min(4, len(window)), replace=False)
        f = WeightedSequence({window[i]: float(rng.normal()) for i in support})
        base = sum(K.haar(t) * v for t, v in f.items())
        for x in window:
            tf = translate(K, x, f)
            tot = sum(K.haar(t) * v for t, v in tf.items())
            worst = max(worst, abs(tot - base))
    return worst


def transfer_check(H: FiniteTable, J: Hypergroup, alpha: Character, N: int,
                   classify_fn=None):
    """Run the amenability classifier on J and on K = H v J.

    Returns (verdict_J, verdict_K); agreement is the expected outcome
    for characters trivial on H.
    """
    from .amenability import classify  # local import to avoid a cycle

    classify_fn = classify_fn or classify
    K = join(H, J, j_window=max(N, 8))
    gamma = extend_character(K, alpha)
    verdict_j = classify_fn(J, alpha, N)
    verdict_k = classify_fn(K, gamma, N)
    return verdict_j, verdict_k
