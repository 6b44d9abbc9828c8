"""Join construction rules, axioms, dual enumeration, transfer."""
import numpy as np
import pytest

from hyplab.core import WeightedSequence, translate
from hyplab.errors import ConfigError
from hyplab.families import (PolynomialTable, family_chebyshev, family_graph,
                             graph_spectral_points)
from hyplab.joins import (FiniteTable, character_multiplicativity,
                          extend_character, haar_invariance_deviation, join,
                          join_dual_enumerate, transfer_check,
                          verify_join_axioms)


@pytest.fixture
def z2():
    return FiniteTable.cyclic_group(2, "h")


@pytest.fixture
def z3():
    return FiniteTable.cyclic_group(3, "j")


# ---------------------------------------------------------------------------
#  construction rules
# ---------------------------------------------------------------------------

def test_identity_rule(z2, z3):
    K = join(z2, z3)
    for y in K.indices(6):
        assert K.conv("e", y).weights == {y: 1.0}


def test_absorption_rule(z2, z3):
    # eps_h (.) eps_j = eps_j for h in H, j in J \ {e}
    K = join(z2, z3)
    mu = K.conv(("H", "h1"), ("J", "j1"))
    assert mu.weights == {("J", "j1"): 1.0}


def test_involution_pair_rule_spreads_identity_over_haar(z2, z3):
    # in Z3, j2 * j1 = e, so c_e = 1 and the result is m_H
    K = join(z2, z3)
    mu = K.conv(("J", "j2"), ("J", "j1"))
    assert mu.weights == {"e": 0.5, ("H", "h1"): 0.5}


def test_j_internal_rule(z2):
    z4 = FiniteTable.cyclic_group(4, "j")
    K = join(z2, z4)
    # j1 * j1 = j2 in Z4 (not an involution pair since j1~ = j3)
    mu = K.conv(("J", "j1"), ("J", "j1"))
    assert mu.weights == {("J", "j2"): 1.0}


def test_h_internal_rule(z3):
    z4h = FiniteTable.cyclic_group(4, "h")
    K = join(z4h, z3)
    mu = K.conv(("H", "h1"), ("H", "h3"))
    assert mu.weights == {"e": 1.0}


def test_join_requires_unit_haar_at_j_identity(z2):
    bad = FiniteTable(["e0", "x"], "e0",
                      {("e0", "e0"): {"e0": 1.0}, ("e0", "x"): {"x": 1.0},
                       ("x", "x"): {"e0": 1.0}},
                      {"e0": "e0", "x": "x"}, {"e0": 2.0, "x": 1.0})
    with pytest.raises(ConfigError):
        join(z2, bad)


def test_join_haar_measure(z2, z3):
    K = join(z2, z3)
    assert K.haar("e") == pytest.approx(0.5)          # m_H({e})
    assert K.haar(("H", "h1")) == pytest.approx(0.5)
    assert K.haar(("J", "j1")) == pytest.approx(1.0)  # m_J on J \ {e}


# ---------------------------------------------------------------------------
#  axiom verification
# ---------------------------------------------------------------------------

def test_z2_join_z3_axioms_exact(z2, z3):
    K = join(z2, z3)
    rep = verify_join_axioms(K, 8)
    assert rep.passed
    assert rep.n_skipped == 0
    assert rep.max_assoc_dev < 1e-12
    assert rep.max_mass_dev < 1e-12
    assert rep.max_involution_dev < 1e-12


def test_join_with_truncated_chebyshev(z2):
    J = PolynomialTable(family_chebyshev(), 32)
    K = join(z2, J, j_window=10)
    rep = verify_join_axioms(K, 12)
    assert rep.passed
    assert rep.max_mass_dev < 1e-10
    assert rep.n_skipped > 0  # window truncation is reported


def test_degenerate_join_is_h(z2):
    triv = FiniteTable.cyclic_group(1, "j")
    K = join(z2, triv)
    rep = verify_join_axioms(K, 4)
    assert rep.passed
    assert set(K.indices(4)) == {"e", ("H", "h1")}
    assert K.conv(("H", "h1"), ("H", "h1")).weights == {"e": 1.0}


# ---------------------------------------------------------------------------
#  dual space
# ---------------------------------------------------------------------------

def test_dual_count_z2_join_z3(z2, z3):
    K = join(z2, z3)
    chars = join_dual_enumerate(K)
    assert len(chars) == 4  # |H^| + |J^| - 1
    window = K.indices(6)
    pairs = [(x, y) for x in window for y in window]
    for gamma in chars:
        assert character_multiplicativity(K, gamma, pairs) < 1e-10


def test_dual_with_trivial_j_is_h_dual(z2):
    K = join(z2, FiniteTable.cyclic_group(1, "j"))
    chars = join_dual_enumerate(K)
    assert len(chars) == 2


def test_dual_z2_join_z2_vanishing_extension(z2):
    K = join(z2, FiniteTable.cyclic_group(2, "j"))
    chars = join_dual_enumerate(K)
    assert len(chars) == 3
    # exactly one character is nontrivial on H and vanishes on J \ {e}
    vanish = [c for c in chars
              if abs(c.value(("H", "h1")) + 1.0) < 1e-10]
    assert len(vanish) == 1
    assert abs(vanish[0].value(("J", "j1"))) < 1e-10


def test_extend_character_verified_on_sampled_pairs(z2):
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    J = PolynomialTable(fam, 48)
    K = join(z2, J, j_window=40)
    gamma = extend_character(K, fam.character(s0))
    rng = np.random.default_rng(0)
    window = K.indices(20)
    pairs = [(window[int(rng.integers(len(window)))],
              window[int(rng.integers(len(window)))]) for _ in range(100)]
    assert character_multiplicativity(K, gamma, pairs) < 1e-10
    assert gamma.value(("H", "h1")) == 1.0


def test_extend_trivial_character(z2, z3):
    K = join(z2, z3)
    triv = [c for c in z3.characters()
            if all(abs(c.value(x) - 1) < 1e-10 for x in z3.labels)][0]
    gamma = extend_character(K, triv)
    assert all(abs(gamma.value(k) - 1.0) < 1e-12 for k in K.indices(6))


# ---------------------------------------------------------------------------
#  Haar invariance and transfer
# ---------------------------------------------------------------------------

def test_haar_invariance_on_finite_join(z2, z3):
    assert haar_invariance_deviation(join(z2, z3), 6) < 1e-10


def test_haar_invariance_with_infinite_j(z2):
    J = PolynomialTable(family_graph(2, 4), 32)
    K = join(z2, J, j_window=24)
    rng = np.random.default_rng(9)
    f = WeightedSequence({("J", 3): 0.7, "e": -0.2, ("H", "h1"): 1.1})
    base = sum(K.haar(t) * v for t, v in f.items())
    for x in K.indices(8):
        tf = translate(K, x, f)
        tot = sum(K.haar(t) * v for t, v in tf.items())
        assert tot == pytest.approx(base, abs=1e-10)


def test_transfer_trivial_character(z2):
    fam = family_chebyshev()
    J = PolynomialTable(fam, 64)
    vj, vk = transfer_check(z2, J, fam.character(1.0), 128)
    assert vj.tag == "Amenable" and vk.tag == "Amenable"


def test_transfer_graph42_interior(z2):
    fam = family_graph(4, 2)
    J = PolynomialTable(fam, 80)
    vj, vk = transfer_check(z2, J, fam.character(0.0), 128)
    assert vj.tag == "NotAmenable" and vk.tag == "NotAmenable"


def test_transfer_graph24_atom_point(z2):
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    J = PolynomialTable(fam, 80)
    vj, vk = transfer_check(z2, J, fam.character(s0), 128)
    assert vj.tag == "Amenable" and vk.tag == "Amenable"
    assert vj.certificate["kind"] == "L2Mean"
    assert vk.certificate["kind"] == "L2Mean"
    assert vj.certificate["point_mass"] == pytest.approx(0.5, abs=1e-6)
