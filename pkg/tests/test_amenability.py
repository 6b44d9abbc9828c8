"""Amenability probes: point mass, C0, classifier, Reiter LP, derivations."""
import pytest

from hyplab.core import WeightedSequence
from hyplab.errors import ConfigError, LpInfeasibleError
from hyplab.families import (PolynomialTable, family_assoc_legendre,
                             family_chebyshev, family_graph, family_jacobi,
                             family_pollaczek, family_soradi,
                             graph_spectral_points)
from hyplab.amenability import (c0_probe, classify, derivation_probe,
                                point_mass, reiter_lp)
from hyplab.twovar import DiscTable


# ---------------------------------------------------------------------------
#  point_mass
# ---------------------------------------------------------------------------

def test_point_mass_graph_atom_value():
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    K = PolynomialTable(fam, 64)
    est = point_mass(K, fam.character(s0), 200)
    assert est.status == "convergent"
    assert est.value == pytest.approx(0.5, abs=1e-6)  # (b-a)/b


def test_point_mass_divergent_cases():
    g42 = family_graph(4, 2)
    s0, _ = graph_spectral_points(4, 2)
    est = point_mass(PolynomialTable(g42, 64), g42.character(s0), 200)
    assert est.status == "divergent" and est.value == 0.0

    cheb = family_chebyshev()
    est = point_mass(PolynomialTable(cheb, 64), cheb.character(1.0), 200)
    assert est.status == "divergent" and est.value == 0.0


def test_point_mass_soradi_spectral_atom():
    # the rank-one spectral atom at -(k^2+1)/(2k) has mass (k^2-1)/k^2
    k = 2.0
    fam = family_soradi(k)
    K = PolynomialTable(fam, 64)
    est = point_mass(K, fam.character(-(k * k + 1) / (2 * k)), 200)
    assert est.status == "convergent"
    assert est.value == pytest.approx((k * k - 1) / k ** 2, abs=1e-6)


def test_point_mass_requires_minimum_window():
    fam = family_chebyshev()
    with pytest.raises(ConfigError):
        point_mass(PolynomialTable(fam, 16), fam.character(0.5), 16)


# ---------------------------------------------------------------------------
#  c0_probe
# ---------------------------------------------------------------------------

def test_c0_geometric_decay():
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    rep = c0_probe(PolynomialTable(fam, 64), fam.character(s0), 64)
    assert rep.verdict == "decays"
    assert rep.tail_max < 1e-9


def test_c0_constant_character_bounded_away():
    fam = family_soradi(2.0)
    rep = c0_probe(PolynomialTable(fam, 64), fam.character(fam.xstar), 64)
    assert rep.verdict == "bounded-away"
    assert rep.closed_form == "constant-one"


def test_c0_legendre_interior_slope():
    fam = family_jacobi(0.0, 0.0)
    rep = c0_probe(PolynomialTable(fam, 64), fam.character(0.2), 256)
    assert rep.verdict == "decays"
    assert rep.slope == pytest.approx(-0.5, abs=0.2)


def test_c0_sign_character_bounded():
    fam = family_graph(4, 2)
    s0, _ = graph_spectral_points(4, 2)
    rep = c0_probe(PolynomialTable(fam, 64), fam.character(s0), 64)
    assert rep.verdict == "bounded-away"


# ---------------------------------------------------------------------------
#  classify
# ---------------------------------------------------------------------------

def test_classifier_family_table():
    cases = [
        (family_assoc_legendre(1.0), 0.3, "NotAmenable"),
        (family_assoc_legendre(1.0), -0.5, "NotAmenable"),
        (family_pollaczek(0.5, 1.0), 0.3, "NotAmenable"),
        (family_soradi(2.0), 0.5, "NotAmenable"),
        (family_soradi(2.0), -0.6, "NotAmenable"),
        (family_jacobi(0.5, 0.5), 0.25, "NotAmenable"),
    ]
    for fam, x, expect in cases:
        verdict = classify(PolynomialTable(fam, 64), fam.character(x), 256)
        assert verdict.tag == expect, (fam.label(), x, verdict.diagnostics)


def test_classifier_trivial_character_everywhere():
    for fam in (family_chebyshev(), family_assoc_legendre(1.0),
                family_pollaczek(0.5, 1.0), family_soradi(2.0),
                family_graph(2, 4), family_graph(4, 2)):
        verdict = classify(PolynomialTable(fam, 64),
                           fam.character(fam.xstar), 128)
        assert verdict.tag == "Amenable"
        assert verdict.certificate["kind"] == "TrivialCharacter"


def test_classifier_graph_atom_point():
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    verdict = classify(PolynomialTable(fam, 64), fam.character(s0), 256)
    assert verdict.tag == "Amenable"
    assert verdict.certificate["kind"] == "L2Mean"
    assert verdict.certificate["point_mass"] == pytest.approx(0.5, abs=1e-6)
    # diagnostics stay honest: the Haar-weighted l1 profile diverges here
    assert verdict.diagnostics["abs_sum_summable"] is True


def test_classifier_graph_boundary_sign_character():
    # b = 2 makes all b_n = 0; alpha_{s0}(n) = (-1)^n is amenable via
    # the parity twist of the invariant mean
    fam = family_graph(4, 2)
    s0, _ = graph_spectral_points(4, 2)
    verdict = classify(PolynomialTable(fam, 64), fam.character(s0), 256)
    assert verdict.tag == "Amenable"
    assert verdict.certificate["kind"] == "SignCharacter"


def test_classifier_never_mixes_certificate_and_witness():
    fam = family_graph(2, 4)
    for x in (0.0, 0.3, fam.xstar):
        v = classify(PolynomialTable(fam, 64), fam.character(x), 128)
        assert (v.certificate is None) or (v.witness is None)


def test_classifier_complex_character_policy():
    table = DiscTable(1.0, cutoff=6)
    alpha = table.family.character(0.4 + 0.3j)
    verdict = classify(table, alpha, 36)
    assert verdict.tag == "Inconclusive"
    assert "complex" in verdict.diagnostics["policy"]


# ---------------------------------------------------------------------------
#  reiter_lp
# ---------------------------------------------------------------------------

def test_reiter_trivial_compact_set_gives_zero():
    fam = family_chebyshev()
    K = PolynomialTable(fam, 16)
    cert = reiter_lp(K, fam.character(1.0), C=[0], S=range(9), M=10.0)
    assert cert.epsilon <= 1e-12
    assert cert.residuals["fourier_minus_one"] < 1e-8


def test_reiter_chebyshev_invariant_curve():
    fam = family_chebyshev()
    K = PolynomialTable(fam, 48)
    alpha = fam.character(1.0)
    eps = []
    for N in (8, 16, 32):
        cert = reiter_lp(K, alpha, C=range(5), S=range(N + 1), M=10.0)
        eps.append(cert.epsilon)
        # certificate invariants at their stated tolerances
        assert cert.residuals["fourier_minus_one"] <= 1e-8
        assert cert.residuals["norm1"] <= 10.0 + 1e-8
        assert cert.residuals["max_translation_residual"] <= cert.epsilon + 1e-8
    assert eps[0] >= eps[1] >= eps[2]
    assert eps[-1] < 0.2


def test_reiter_epsilon_nonincreasing_in_support():
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    K = PolynomialTable(fam, 40)
    alpha = fam.character(s0)
    e1 = reiter_lp(K, alpha, C=[0, 1], S=range(9), M=10.0).epsilon
    e2 = reiter_lp(K, alpha, C=[0, 1], S=range(17), M=10.0).epsilon
    assert e2 <= e1 + 1e-9


def test_reiter_infeasible_when_bound_too_small():
    # |g^(alpha)| <= ||g||_1 sup|alpha| <= M, so M < 1 is infeasible at
    # the normalization point
    fam = family_chebyshev()
    K = PolynomialTable(fam, 16)
    with pytest.raises(LpInfeasibleError):
        reiter_lp(K, fam.character(1.0), C=[0, 1], S=range(9), M=0.5)


def test_reiter_requires_identity_in_support():
    fam = family_chebyshev()
    K = PolynomialTable(fam, 16)
    with pytest.raises(ConfigError):
        reiter_lp(K, fam.character(1.0), C=[0], S=[1, 2, 3], M=10.0)


def test_reiter_certificate_residuals_match_lp_epsilon():
    # independent verification through translate/convolve equals the
    # solver's objective at the optimum
    fam = family_graph(2, 4)
    s0, _ = graph_spectral_points(2, 4)
    K = PolynomialTable(fam, 40)
    cert = reiter_lp(K, fam.character(s0), C=[0, 1, 2], S=range(25), M=10.0)
    assert cert.residuals["max_translation_residual"] == pytest.approx(
        cert.epsilon, abs=1e-7)


# ---------------------------------------------------------------------------
#  derivation probe
# ---------------------------------------------------------------------------

def test_chebyshev_derivative_at_one_is_n_squared():
    rep = derivation_probe(family_chebyshev(), 1.0, 20)
    for n in range(21):
        assert rep.derivative_values[n] == n * n
    assert not rep.bounded


def test_derivation_product_rule_residual_all_families():
    for fam in (family_chebyshev(), family_jacobi(0.0, 0.0),
                family_assoc_legendre(1.0), family_pollaczek(0.5, 1.0),
                family_soradi(2.0), family_graph(2, 4), family_graph(4, 2)):
        rep = derivation_probe(fam, 0.4, 24, n_pairs=50)
        assert rep.product_rule_residual < 1e-8, fam.label()


def test_derivation_of_identity_point_mass_is_zero():
    fam = family_chebyshev()
    K = PolynomialTable(fam, 16)
    rep = derivation_probe(fam, 0.7, 16)
    f = WeightedSequence.point(0)
    val = sum(K.haar(n) * v * rep.derivative_values[n] for n, v in f.items())
    assert val == 0.0
