"""
Tests pour grid_calculus.py — grille, intégrale ponctuelle, base delta, opérateurs, axiomes.
"""
import sys
import os
import math

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from euclidean_scalar import EuclideanScalar, classify
from grid_calculus import (
    EtatNonSupporteError,
    GridFunction,
    GrilleInvalideError,
    Stage,
    SymbolicState,
    axiom_report,
    build_derivative,
    chi,
    delta,
    embed,
    inner_product,
    integrate_product,
    laplacian,
    make_grid,
    multiply,
    norm,
    numerosity_at_stage,
    pointwise_integral,
    reconstruct,
    sqrt_delta,
)

GRAINE = int(os.getenv("HFQM_SEED", "12345"))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def g5():
    return make_grid(5, 0.5)


@pytest.fixture
def g101():
    return make_grid(101, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(GRAINE)


# ---------------------------------------------------------------------------
# make_grid
# ---------------------------------------------------------------------------

class TestMakeGrid:

    def test_points_et_poids(self, g5):
        assert list(g5.points) == [-1.0, -0.5, 0.0, 0.5, 1.0]
        assert list(g5.weights) == [0.5] * 5
        assert g5.points[g5.origin] == 0.0

    def test_somme_des_poids_egale_circonference(self, g5):
        assert math.fsum(g5.weights) == 2.5 == g5.circumference

    def test_n_pair_refuse(self):
        with pytest.raises(GrilleInvalideError):
            make_grid(4, 0.5)

    def test_n_pair_autorise_hors_mode_strict(self):
        assert make_grid(4, 0.5, strict=False).n == 4

    @pytest.mark.parametrize("h", [0.0, -0.1, math.inf])
    def test_pas_invalide_refuse(self, h):
        with pytest.raises(GrilleInvalideError):
            make_grid(5, h)

    def test_index_of(self, g5):
        assert g5.index_of(0.5) == 3
        with pytest.raises(GrilleInvalideError):
            g5.index_of(7.0)

    def test_metadonnees(self, g5):
        meta = g5.to_metadata()
        assert meta["n"] == 5 and meta["h"] == 0.5 and meta["weights_uniform"] is True


# ---------------------------------------------------------------------------
# embed, intégrale, produit scalaire
# ---------------------------------------------------------------------------

class TestEmbedEtIntegrale:

    def test_restriction_hors_domaine_nulle(self, g5):
        u = embed(lambda x: 1 / abs(x), g5, domain=lambda x: x != 0)
        assert u[g5.origin] == 0.0
        assert u[0] == 1.0

    def test_carre(self, g5):
        assert list(embed(lambda x: x * x, g5).values) == [1.0, 0.25, 0.0, 0.25, 1.0]

    def test_indicatrice(self, g5):
        u = embed(lambda x: 1.0 if x >= 0 else 0.0, g5)
        assert list(u.values) == [0.0, 0.0, 1.0, 1.0, 1.0]

    def test_valeur_non_finie_refusee(self, g5):
        with pytest.raises(ValueError):
            embed(lambda x: 1 / x, g5)

    def test_integrale_de_chi_vaut_poids(self, g5):
        assert pointwise_integral(chi(g5, 1)) == 0.5

    def test_integrale_de_x_carre(self):
        g = make_grid(201, 0.01)
        assert abs(pointwise_integral(embed(lambda x: x * x, g)) - 2 / 3) <= 0.02

    def test_integrale_impaire_nulle(self, g101):
        assert pointwise_integral(embed(lambda x: x, g101)) == 0.0

    def test_base_delta_orthonormee(self):
        g = make_grid(5, 0.25)
        for a in range(5):
            for b in range(5):
                attendu = 1.0 if a == b else 0.0
                assert inner_product(sqrt_delta(g, a), sqrt_delta(g, b)) == attendu

    def test_sinus_cosinus_orthogonaux(self, g101):
        k = 2 * math.pi / g101.circumference
        s = embed(lambda x: math.sin(k * x), g101)
        c = embed(lambda x: math.cos(k * x), g101)
        assert abs(inner_product(s, c)) <= 1e-12

    def test_produit_scalaire_conjugue_second_argument(self, g5):
        u = GridFunction(g5, np.array([1j, 0, 0, 0, 0]))
        v = GridFunction(g5, np.array([1.0, 0, 0, 0, 0]))
        assert inner_product(u, v) == 0.5j
        assert inner_product(v, u) == -0.5j
        assert norm(u) == math.sqrt(0.5)

    def test_grilles_differentes_refusees(self, g5, g101):
        with pytest.raises(GrilleInvalideError):
            inner_product(chi(g5, 0), chi(g101, 0))


# ---------------------------------------------------------------------------
# Delta et produit ponctuel
# ---------------------------------------------------------------------------

class TestDelta:

    def test_reproduction_exacte(self, g101, rng):
        u = GridFunction(g101, rng.standard_normal(g101.n))
        for a in (0, 17, g101.origin, 100):
            assert integrate_product(u, delta(g101, a)) == u[a]

    def test_valeur_au_point(self, g5):
        assert delta(g5, 2)[2] == 1 / 0.5

    def test_integrale_du_carre(self, g5):
        d0 = delta(g5, g5.origin)
        assert pointwise_integral(multiply(d0, d0)) == 1 / 0.5

    def test_produits(self, g5):
        un = GridFunction(g5, np.ones(5))
        u = embed(lambda x: x + 2, g5)
        assert list(multiply(u, un).values) == list(u.values)
        assert not np.any(multiply(chi(g5, 1), chi(g5, 3)).values)
        d0 = delta(g5, 2)
        assert multiply(d0, d0)[2] == 4.0

    def test_reconstruction(self, g101, rng):
        u = GridFunction(g101, rng.standard_normal(g101.n))
        assert np.array_equal(reconstruct(u).values, u.values)

    def test_indice_invalide(self, g5):
        with pytest.raises(GrilleInvalideError):
            delta(g5, 5)


class TestNumerosite:

    def test_ensemble_fini(self, g5):
        assert numerosity_at_stage(lambda x: x in (0.0, 0.5), g5) == 2

    def test_vide_et_plein(self):
        etage = Stage(5, 0.5)
        assert numerosity_at_stage(lambda x: False, etage) == 0
        assert numerosity_at_stage(lambda x: True, etage) == 5


# ---------------------------------------------------------------------------
# Opérateurs bandés
# ---------------------------------------------------------------------------

class TestDerivee:

    def test_constante_annulee_exactement(self, g101):
        d = build_derivative(g101)
        assert not np.any(d.apply(GridFunction(g101, np.full(101, 3.3))).values)

    def test_antisymetrie_ponderee_exacte(self, g101):
        assert build_derivative(g101).weighted_antisymmetry_defect() == 0.0

    def test_largeur_de_bande(self, g101):
        assert build_derivative(g101).bandwidth == 1

    def test_noyau_de_dimension_un(self):
        for n in (3, 5, 11, 31):
            assert build_derivative(make_grid(n, 0.1)).nullity() == 1

    def test_noyau_pair_de_dimension_deux(self):
        assert build_derivative(make_grid(10, 0.1, strict=False)).nullity() == 2

    def test_ordre_deux_sur_un_sinus(self):
        k = 2 * math.pi / 20.2
        erreurs = []
        for n, h in ((101, 0.2), (201, 0.1)):
            g = make_grid(n, h)
            s = embed(lambda x: math.sin(k * x), g)
            erreur = build_derivative(g).apply(s).values - k * np.cos(k * g.points)
            interieur = np.abs(g.points) <= 5.0
            erreurs.append(np.max(np.abs(erreur[interieur])))
        assert erreurs[0] <= 1.01 * k ** 3 * 0.2 ** 2 / 6
        assert 3.5 <= erreurs[0] / erreurs[1] <= 4.5

    def test_integration_par_parties(self, g101, rng):
        d = build_derivative(g101)
        for _ in range(20):
            u = GridFunction(g101, rng.standard_normal(101))
            v = GridFunction(g101, rng.standard_normal(101))
            residu = abs(integrate_product(d.apply(u), v) + integrate_product(u, d.apply(v)))
            assert residu <= 1e-13 * (norm(d.apply(u)) * norm(v) + norm(u) * norm(d.apply(v)))


class TestLaplacien:

    @pytest.mark.parametrize("variant", ["compact", "paper_literal"])
    def test_w_symetrique_et_negatif(self, g101, rng, variant):
        lap = laplacian(g101, variant)
        assert lap.weighted_symmetry_defect() == 0.0
        for _ in range(20):
            u = GridFunction(g101, rng.standard_normal(101))
            assert integrate_product(lap.apply(u), u) <= 1e-12

    def test_symbole_compact(self, g101):
        valeurs = np.sort(np.real(laplacian(g101, "compact").scaled(-0.5).symbol()))
        m = np.arange(101)
        attendu = np.sort(2 / 0.01 * np.sin(np.pi * m / 101) ** 2)
        assert np.max(np.abs(valeurs - attendu)) <= 1e-10 * attendu.max()

    def test_symbole_literal(self, g101):
        valeurs = np.sort(np.real(laplacian(g101, "paper_literal").scaled(-0.5).symbol()))
        m = np.arange(101)
        attendu = np.sort(np.sin(2 * np.pi * m / 101) ** 2 / (2 * 0.01))
        assert np.max(np.abs(valeurs - attendu)) <= 1e-10 * attendu.max()

    def test_quadratique_exacte_loin_de_la_couture(self):
        g = make_grid(21, 0.5)
        lap = laplacian(g, "compact").apply(embed(lambda x: x * x, g))
        assert np.allclose(lap.values[1:-1], 2.0, rtol=0, atol=1e-12)

    def test_largeurs_de_bande(self, g101):
        assert laplacian(g101, "compact").bandwidth == 1
        assert laplacian(g101, "paper_literal").bandwidth == 2

    def test_variante_inconnue(self, g101):
        with pytest.raises(ValueError):
            laplacian(g101, "spectral")


# ---------------------------------------------------------------------------
# axiom_report
# ---------------------------------------------------------------------------

class TestAxiomes:

    @pytest.mark.parametrize("n", [51, 201, 1001])
    def test_tous_les_axiomes_passent(self, n):
        rapport = axiom_report(make_grid(n, 0.05), "paper_literal", GRAINE)
        echecs = [r for r in rapport if not r["ok"]]
        assert echecs == []
        assert {r["axiome"] for r in rapport} >= {"1", "2", "3", "4", "5", "6", "7"}

    def test_compact_passe_aussi(self):
        assert all(r["ok"] for r in axiom_report(make_grid(201, 0.05), "compact", GRAINE))

    def test_n_pair_fait_echouer_axiome_5(self):
        rapport = axiom_report(make_grid(50, 0.05, strict=False), "paper_literal", GRAINE)
        axiome5 = [r for r in rapport if r["axiome"] == "5"]
        assert not axiome5[0]["ok"]

    def test_rapport_porte_d0(self):
        rapport = axiom_report(make_grid(51, 0.05))
        assert [r["valeur"] for r in rapport if "valeur" in r] == [0.05]


# ---------------------------------------------------------------------------
# SymbolicState
# ---------------------------------------------------------------------------

class TestEtatSymbolique:

    def test_norme_de_racine_delta(self, g5):
        psi = SymbolicState.sqrt_delta(g5, 2)
        assert psi.norm2() == EuclideanScalar(1.0)

    def test_probabilite_de_position_infinitesimale(self, g5):
        u = SymbolicState.embedded(embed(lambda x: 1.0, g5))
        p = u.position_probability(2)
        assert p == EuclideanScalar({1: 1.0})
        assert classify(p).infinitesimal

    def test_appariement_delta(self, g5):
        phi = np.array([0.3, 0.1, 0.7, 0.2, 0.9])
        assert SymbolicState.delta(g5, 2).pairing(phi) == EuclideanScalar(0.7)

    def test_energie_cinetique_de_racine_delta_infinie(self, g5):
        energie = SymbolicState.sqrt_delta(g5, 2).kinetic("compact")
        assert energie.leading_exponent == -2
        assert energie.leading_coefficient == 1.0

    def test_puissance_demi_entiere_refusee(self, g5):
        melange = SymbolicState.sqrt_delta(g5, 2) + SymbolicState.chi(g5, 2)
        with pytest.raises(EtatNonSupporteError):
            melange.norm2()

    def test_combinaison_lineaire(self, g5):
        psi = 2.0 * SymbolicState.delta(g5, 1) - SymbolicState.delta(g5, 1)
        phi = np.arange(5, dtype=float)
        assert psi.pairing(phi) == EuclideanScalar(1.0)
