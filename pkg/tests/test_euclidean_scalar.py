"""
Tests pour euclidean_scalar.py — corps ordonné tronqué, partie standard, classement.
"""
import sys
import os
import math

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from euclidean_scalar import (
    ComplexEuclidean,
    EuclideanScalar,
    arith,
    classify,
    compare,
    eps,
    format_scalar,
    infinitely_close,
    parse_scalar,
    standard_part,
)

K = 4
GRAINE = int(os.getenv("HFQM_SEED", "12345"))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def e():
    return eps(K)


@pytest.fixture
def rng():
    return np.random.default_rng(GRAINE)


def aleatoire(rng, lo=-2, hi=2):
    """Scalaire non nul à coefficients entiers (arithmétique flottante exacte)."""
    while True:
        coeffs = {k: float(rng.integers(-5, 6)) for k in range(lo, hi + 1) if rng.random() < 0.6}
        x = EuclideanScalar(coeffs, K)
        if not x.is_zero:
            return x


# ---------------------------------------------------------------------------
# Arithmétique
# ---------------------------------------------------------------------------

class TestArithmetique:

    def test_epsilon_fois_inverse_vaut_un_exactement(self, e):
        assert e * e.inverse() == EuclideanScalar(1.0, K)
        assert arith(e, e.inverse(), "mul").coeffs == {0: 1.0}

    def test_produit_conjugues(self, e):
        assert ((1 + e) * (1 - e)).coeffs == {0: 1.0, 2: -1.0}

    def test_inverse_serie_geometrique_tronquee(self, e):
        x = 1 / (1 - e)
        assert x.coeffs == {k: 1.0 for k in range(K + 1)}
        # (1 − ε)·x = 1 au-delà de ε^K près
        assert ((1 - e) * x).coeffs == {0: 1.0}

    def test_exposants_hors_plage_tronques(self, e):
        assert (e ** (K + 1)).is_zero
        assert EuclideanScalar({K + 3: 2.0, 0: 1.0}, K).coeffs == {0: 1.0}

    def test_division_par_zero_refusee(self, e):
        with pytest.raises(ZeroDivisionError):
            e / EuclideanScalar(0.0, K)
        with pytest.raises(ZeroDivisionError):
            arith(1.0, 0.0, "div")

    def test_coefficient_dominant_sous_depasse(self):
        minuscule = EuclideanScalar({0: 1e-320}, K)
        with pytest.raises(ZeroDivisionError):
            EuclideanScalar(1.0, K) / minuscule

    def test_operation_inconnue(self, e):
        with pytest.raises(ValueError):
            arith(e, e, "pow")

    def test_racine_carree(self, e):
        assert (e * e).sqrt() == e
        r = (1 + e).sqrt()
        assert r.coefficient(0) == 1.0
        assert r.coefficient(1) == 0.5
        assert math.isclose(r.coefficient(2), -0.125)
        with pytest.raises(ValueError):
            e.sqrt()

    def test_coefficient_non_fini_refuse(self):
        with pytest.raises(ValueError):
            EuclideanScalar({0: math.nan})

    def test_immuable(self, e):
        with pytest.raises(AttributeError):
            e.foo = 1


# ---------------------------------------------------------------------------
# Ordre, partie standard, classement
# ---------------------------------------------------------------------------

class TestOrdreEtClassement:

    def test_comparaisons_de_reference(self, e):
        assert compare(e, 0.001) == "less"
        assert compare(2 + e, 2) == "greater"
        assert compare(e.inverse(), 1e6) == "greater"
        assert compare(e, 1e-300) == "less"
        assert compare(3.0, 3.0) == "equal"

    def test_parties_standard(self, e):
        assert standard_part(3 + 5 * e) == 3.0
        assert standard_part(e.inverse()) == math.inf
        assert standard_part(-e.inverse()) == -math.inf
        assert standard_part(e) == 0.0

    def test_classement(self, e):
        assert classify(e).kind == "infinitesimal"
        c = classify(2 + e)
        assert c.kind == "finite" and c.finite and not c.infinitesimal
        assert classify(3 + e ** -2).kind == "infinite"
        assert classify(EuclideanScalar(order=K)).infinitesimal

    def test_proximite_infinie(self, e):
        assert infinitely_close(1 + e, 1)
        assert not infinitely_close(1, 2)
        assert infinitely_close(e, e * e)


# ---------------------------------------------------------------------------
# Propriétés randomisées
# ---------------------------------------------------------------------------

class TestProprietesCorps:

    def test_lois_de_corps_et_ordre(self, rng):
        """2 000 triplets × 5 propriétés = 10 000 contrôles."""
        controles = 0
        for _ in range(2000):
            a, b, c = (aleatoire(rng, 0, 2) for _ in range(3))
            assert (a + b) + c == a + (b + c)
            assert (a * b) * c == a * (b * c)
            controles += 2

            a, b, c = (aleatoire(rng) for _ in range(3))
            assert a * (b + c) == a * b + a * c
            controles += 1

            bas, haut = sorted((a, b))
            if bas < haut:
                assert bas + c < haut + c
                positif = abs(c)
                assert bas * positif < haut * positif
            controles += 2
        assert controles == 10000

    def test_inverse_a_la_troncature_pres(self, rng):
        for _ in range(500):
            a = aleatoire(rng)
            produit = a * a.inverse()
            m = min(a.leading_exponent, 0)
            assert abs(produit.coefficient(0) - 1.0) <= 1e-9
            for j in range(1, K + m + 1):
                assert abs(produit.coefficient(j)) <= 1e-8 * max(1.0, max(map(abs, a.coeffs.values())) ** j)

    def test_trichotomie(self, rng):
        for _ in range(1000):
            a, b = aleatoire(rng), aleatoire(rng)
            assert sum([a < b, a == b, a > b]) == 1

    def test_partie_standard_morphisme_sur_les_finis(self, rng):
        for _ in range(1000):
            a, b = aleatoire(rng, 0, 2), aleatoire(rng, 0, 2)
            assert standard_part(a + b) == standard_part(a) + standard_part(b)
            assert standard_part(a * b) == standard_part(a) * standard_part(b)

    def test_partie_standard_des_infinis(self, rng):
        for _ in range(1000):
            a = aleatoire(rng, -2, 2)
            st = standard_part(a)
            if a.leading_exponent < 0:
                assert st == (math.inf if a.leading_coefficient > 0 else -math.inf)
            else:
                assert st == a.coefficient(0)

    def test_proximite_relation_equivalence(self, rng):
        for _ in range(500):
            a, b, c = (aleatoire(rng) for _ in range(3))
            assert infinitely_close(a, a)
            assert infinitely_close(a, b) == infinitely_close(b, a)
            if infinitely_close(a, b) and infinitely_close(b, c):
                assert infinitely_close(a, c)


# ---------------------------------------------------------------------------
# Texte et complexes
# ---------------------------------------------------------------------------

class TestFormatEtComplexes:

    def test_rendu(self, e):
        assert format_scalar(EuclideanScalar(order=K)) == "0"
        assert format_scalar(3 + 5 * e) == "3.0 + 5.0ε"
        assert format_scalar(2 * e.inverse() - e * e) == "2.0ε^-1 - 1.0ε^2"

    def test_lecture(self):
        assert parse_scalar("3 + 5ε", K) == EuclideanScalar({0: 3.0, 1: 5.0}, K)
        assert parse_scalar("2eps^-1 − 1.5", K) == EuclideanScalar({-1: 2.0, 0: -1.5}, K)
        with pytest.raises(ValueError):
            parse_scalar("3 + x", K)

    def test_complexe_module_et_division(self, e):
        z = ComplexEuclidean(1.0, e)
        assert z.abs2() == 1 + e * e
        assert (z / z).standard_part() == 1 + 0j
        assert z.conj().im == -e
        with pytest.raises(ZeroDivisionError):
            z / ComplexEuclidean(0.0, 0.0)
