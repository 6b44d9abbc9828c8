"""Products, the Koornwinder class-V region, disc polynomials, decay."""
import math

import numpy as np
import pytest

from hyplab.core import WeightedSequence, fourier
from hyplab.errors import ConfigError
from hyplab.families import PolynomialTable, family_chebyshev, family_jacobi
from hyplab.twovar import (DiscFamily, DiscTable, disc_character,
                           disc_diagonal_probe, disc_linearize,
                           koornwinder_region, koornwinder_product,
                           product_direction_probe, product_table,
                           triangle_to_pair)


# ---------------------------------------------------------------------------
#  product tables
# ---------------------------------------------------------------------------

def test_product_convolution_second_coordinate_inert():
    K = product_table(PolynomialTable(family_chebyshev(), 12),
                      PolynomialTable(family_chebyshev(), 12))
    mu = K.conv((1, 0), (1, 0))
    assert mu.weights == {(0, 0): 0.5, (2, 0): 0.5}


def test_product_haar_is_multiplicative():
    leg = family_jacobi(0.0, 0.0)
    K1 = PolynomialTable(leg, 12)
    K2 = PolynomialTable(leg, 12)
    K = product_table(K1, K2)
    assert K.haar((2, 3)) == pytest.approx(K1.haar(2) * K2.haar(3), rel=1e-12)
    assert K.haar((2, 3)) == pytest.approx(35.0, rel=1e-10)


def test_product_fourier_factorizes():
    cheb = family_chebyshev()
    K1 = PolynomialTable(cheb, 16)
    K2 = PolynomialTable(cheb, 16)
    K = product_table(K1, K2)
    a1, a2 = cheb.character(0.3), cheb.character(-0.6)
    alpha = K.character(a1, a2)
    rng = np.random.default_rng(1)
    for _ in range(6):
        f = WeightedSequence({int(k): float(rng.uniform(-1, 1))
                              for k in rng.choice(6, size=2, replace=False)})
        g = WeightedSequence({int(k): float(rng.uniform(-1, 1))
                              for k in rng.choice(6, size=2, replace=False)})
        fg = WeightedSequence({(i, j): vi * vj for i, vi in f.items()
                               for j, vj in g.items()})
        lhs = fourier(K, fg, alpha)
        rhs = fourier(K1, f, a1) * fourier(K2, g, a2)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_product_characters_bounded_inside_square():
    K = koornwinder_product(0.5, 0.0, 0.5, 0.0, 12)
    f1 = K.K1.family
    xs = np.linspace(-1, 1, 21)
    P = f1.eval_character_grid(xs, 8)
    assert np.max(np.abs(P)) <= 1.0 + 1e-12


def test_triangle_relabeling():
    assert triangle_to_pair(5, 2) == (3, 2)
    assert triangle_to_pair(4, 0) == (4, 0)
    with pytest.raises(ConfigError):
        triangle_to_pair(1, 2)


# ---------------------------------------------------------------------------
#  koornwinder region
# ---------------------------------------------------------------------------

def test_koornwinder_region_values():
    assert koornwinder_region(-0.5, -0.5) is True
    assert koornwinder_region(0.0, 0.0) is True
    # direct arithmetic, no closed-form claim: just evaluate both sides
    a, b = 5.0, -0.9
    lhs = (a + b + 1) * (a + b + 4) ** 2 * (a + b + 6)
    rhs = (a - b) ** 2 * (a * a - 2 * a * b + b * b - 5 * a - 5 * b - 30)
    assert koornwinder_region(a, b) is (lhs >= rhs)


def test_koornwinder_region_domain():
    with pytest.raises(ConfigError):
        koornwinder_region(0.0, -1.0)
    with pytest.raises(ConfigError):
        koornwinder_region(-0.5, 0.0)


# ---------------------------------------------------------------------------
#  disc polynomials
# ---------------------------------------------------------------------------

def test_disc_character_at_origin_index():
    assert disc_character(1.0, 0, 0, 0.3 + 0.2j) == 1.0 + 0.0j


def test_disc_character_on_circle_is_pure_power():
    z = complex(math.cos(0.7), math.sin(0.7))
    val = disc_character(0.5, 3, 0, z)
    assert val == pytest.approx(z ** 3, abs=1e-12)


def test_disc_character_hermitian_symmetry():
    rng = np.random.default_rng(8)
    fam = DiscFamily(1.0)
    for _ in range(10):
        m, n = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        r, phi = rng.uniform(0, 1), rng.uniform(0, 2 * math.pi)
        z = r * complex(math.cos(phi), math.sin(phi))
        lhs = fam.character_value(m, n, z)
        rhs = np.conj(fam.character_value(n, m, z))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_disc_character_cross_module_consistency():
    # P_{5,5}(z) = R_5^{(1,0)}(2|z|^2 - 1) against the Jacobi evaluator
    fam = family_jacobi(1.0, 0.0)
    ref = float(fam.eval_character_grid(np.array([-0.28]), 5)[5][0])
    assert disc_character(1.0, 5, 5, 0.6) == pytest.approx(ref, abs=1e-12)


def test_disc_linearize_with_identity_is_delta():
    mu = disc_linearize(1.0, (2, 1), (0, 0), 3)
    assert set(mu.support()) == {(2, 1)}
    assert mu((2, 1)) == pytest.approx(1.0, abs=1e-10)


def test_disc_linearize_basic_product():
    mu = disc_linearize(0.0, (1, 0), (0, 1), 3)
    assert set(mu.support()) == {(0, 0), (1, 1)}
    total = sum(np.real(w) for w in mu.weights.values())
    assert total == pytest.approx(1.0, abs=1e-10)


def test_disc_linearize_nonnegative_and_stochastic_degree3():
    worst_neg, worst_mass = 0.0, 0.0
    pairs = [(m, n) for m in range(4) for n in range(4) if m + n <= 3]
    for a in pairs:
        for b in pairs:
            mu = disc_linearize(1.0, a, b, 3)
            vals = [np.real(w) for w in mu.weights.values()]
            if vals:
                worst_neg = min(worst_neg, min(vals))
            worst_mass = max(worst_mass, abs(sum(vals) - 1.0))
    assert worst_neg >= -1e-8
    assert worst_mass <= 1e-6


def test_disc_linearize_degree_bound():
    mu = disc_linearize(1.0, (2, 1), (1, 1), 3)
    d1, d2 = 3, 2
    for (p, q) in mu.support():
        assert abs(d1 - d2) <= p + q <= d1 + d2


def test_disc_table_haar_and_involution():
    T = DiscTable(1.0, cutoff=4)
    assert T.involution((2, 1)) == (1, 2)
    mu = T.conv((1, 0), (0, 1))
    assert T.haar((1, 0)) == pytest.approx(1.0 / mu((0, 0)), rel=1e-10)
    # hermitian pair index haar symmetric
    assert T.haar((1, 0)) == pytest.approx(T.haar((0, 1)), rel=1e-10)


# ---------------------------------------------------------------------------
#  decay probes
# ---------------------------------------------------------------------------

def test_disc_diagonal_decay_slope():
    rep = disc_diagonal_probe(1.0, 0.6, 96)
    assert rep.verdict == "decays"
    assert rep.slope == pytest.approx(-1.5, abs=0.3)


def test_koornwinder_corner_direction_decays():
    # pair direction (n, n) = triangular (2n, n); alpha > beta, gamma > eta
    rep = product_direction_probe(family_jacobi(0.5, 0.0),
                                  family_jacobi(0.5, 0.0),
                                  -1.0, -1.0, 64, (1, 1))
    assert rep.verdict == "decays"
    assert rep.slope < -0.1


def test_normalization_point_direction_is_flat():
    rep = product_direction_probe(family_chebyshev(), family_chebyshev(),
                                  1.0, 1.0, 32, (1, 1))
    assert rep.verdict == "bounded-away"
    assert abs(rep.slope) < 1e-8


def test_decay_rows_are_csv_ready():
    rep = disc_diagonal_probe(1.0, 0.6, 32)
    rows = rep.rows()
    assert len(rows) == 32
    assert rows[0][0] == 1
