"""
Tests pour operators.py — assemblage, spectre, évolution, mesure, classement des états.
"""
import sys
import os
import math

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from analytic_oracle import BoxProblem, box_spectrum, free_grid_spectrum, odd_spectrum_union
from euclidean_scalar import classify, standard_part
from grid_calculus import GridFunction, GrilleInvalideError, SymbolicState, embed, make_grid
from operators import (
    DeltaAt,
    EtatNonNormaliseError,
    Hamiltonian,
    HamiltonianDescription,
    Indicator,
    NonHermitienError,
    Sampled,
    Sum,
    assemble_hamiltonian,
    assemble_hamiltonian_2d,
    box_walls,
    classify_state,
    eigendecompose,
    energy_expectation,
    evolve,
    interlacing_check,
    lowest_eigenvalues,
    make_grid_2d,
    measurement_probabilities,
    position_probability,
    potential_from_config,
    spectral_bound_check,
    split_by_parity,
    square_well_potential,
    ultraschro_residuals,
)

GRAINE = int(os.getenv("HFQM_SEED", "12345"))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def rng():
    return np.random.default_rng(GRAINE)


@pytest.fixture
def g41():
    return make_grid(41, 0.2)


@pytest.fixture
def dec101():
    g = make_grid(101, 0.1)
    return eigendecompose(assemble_hamiltonian(g, "compact", DeltaAt(g.origin, -1.0)))


# ---------------------------------------------------------------------------
# Potentiels et assemblage
# ---------------------------------------------------------------------------

class TestAssemblage:

    def test_delta_sur_la_seule_diagonale_origine(self, g41):
        avec = assemble_hamiltonian(g41, "compact", DeltaAt(g41.origin, 2.0)).to_dense()
        sans = assemble_hamiltonian(g41, "compact").to_dense()
        i, j = np.nonzero(avec - sans)
        assert list(i) == [g41.origin] and list(j) == [g41.origin]
        assert math.isclose(avec[g41.origin, g41.origin] - sans[g41.origin, g41.origin], 2.0 / 0.2)

    def test_indicatrice_egale_delta_de_poids_d0(self, g41):
        origine = float(g41.points[g41.origin])
        chi0 = Indicator(lambda x: x == origine, 1.0).diagonal(g41)
        delta = DeltaAt(g41.origin, g41.weights[g41.origin]).diagonal(g41)
        assert np.array_equal(chi0, delta)

    def test_somme_de_potentiels(self, g41):
        v = Sum((DeltaAt(g41.origin, 1.0), Sampled(lambda x: x * x)))
        attendu = g41.points ** 2
        attendu[g41.origin] += 1.0 / 0.2
        assert np.allclose(v.diagonal(g41), attendu)
        assert len(v.deltas()) == 1

    def test_potentiel_diagonal_seul(self):
        g = make_grid(3, 1.0)
        dec = eigendecompose(assemble_hamiltonian(g, "compact", Sampled(np.array([2.0, 1.0, 3.0])),
                                                  kinetic=False))
        assert list(dec.eigenvalues) == [1.0, 2.0, 3.0]
        assert dec.orthonormality_defect() == 0.0

    def test_entrees_invalides(self, g41):
        with pytest.raises(GrilleInvalideError):
            assemble_hamiltonian(g41, "compact", DeltaAt(g41.n, 1.0))
        with pytest.raises(ValueError):
            assemble_hamiltonian(g41, "compact", DeltaAt(g41.origin, math.nan))
        with pytest.raises(GrilleInvalideError):
            assemble_hamiltonian(g41, "compact", Sampled(np.zeros(5)))
        with pytest.raises(ValueError):
            assemble_hamiltonian(g41, "spectral")

    def test_mur_carre_moyenne_par_cellule(self, g41):
        v = square_well_potential(g41, 0.3, 5.0).diagonal(g41)
        assert math.isclose(v.sum() * g41.h, 2 * 0.3 * 5.0, rel_tol=1e-12)
        with pytest.raises(GrilleInvalideError):
            square_well_potential(g41, 0.1, 5.0)

    def test_potentiel_depuis_configuration(self, g41):
        v = potential_from_config({"type": "delta", "strength": -1.0, "position": 0.0}, g41)
        assert v == DeltaAt(g41.origin, -1.0)
        puits = potential_from_config({"type": "square_well", "half_width": 0.4, "tau": -2.0}, g41)
        assert math.isclose(puits.diagonal(g41).sum() * g41.h, -2.0, rel_tol=1e-12)
        with pytest.raises(KeyError):
            potential_from_config({"type": "delta"}, g41)
        with pytest.raises(ValueError):
            potential_from_config({"type": "harmonique"}, g41)

    def test_non_hermitien_refuse(self):
        g2 = make_grid_2d(3, 1.0)
        dense = np.zeros((9, 9))
        dense[0, 1] = 1.0
        with pytest.raises(NonHermitienError) as exc:
            eigendecompose(Hamiltonian(g2, "compact", Sum(()), dense=dense))
        assert exc.value.asymetrie_max == 1.0


# ---------------------------------------------------------------------------
# Spectre 1D
# ---------------------------------------------------------------------------

class TestSpectre:

    def test_etat_lie_unique(self):
        g = make_grid(2001, 0.025)
        deux = lowest_eigenvalues(assemble_hamiltonian(g, "compact", DeltaAt(g.origin, -2.0)), 2)
        assert deux[0] < -1e-6 <= deux[1]
        assert abs(deux[0] - (-2.0)) <= 0.02 * 2.0

    def test_erreur_decroit_avec_le_raffinement(self):
        erreurs = []
        for n, h in [(201, 0.2), (401, 0.1), (801, 0.05)]:
            g = make_grid(n, h)
            e0 = lowest_eigenvalues(assemble_hamiltonian(g, "compact", DeltaAt(g.origin, -2.0)))[0]
            erreurs.append(abs(e0 + 2.0))
        assert erreurs[0] > erreurs[1] > erreurs[2]

    def test_spectre_libre_forme_close(self, g41):
        dec = eigendecompose(assemble_hamiltonian(g41, "compact"))
        assert np.max(np.abs(dec.eigenvalues - free_grid_spectrum(41, 0.2))) <= 1e-10 * 50

    def test_spectre_libre_compact_n1001(self):
        n, h = 1001, 0.05
        dec = eigendecompose(assemble_hamiltonian(make_grid(n, h), "compact"))
        ferme = free_grid_spectrum(n, h)
        assert abs(dec.eigenvalues[0]) <= 1e-10
        assert np.max(np.abs(dec.eigenvalues[1:] - ferme[1:]) / ferme[1:]) <= 1e-10

    def test_plus_basses_valeurs_compact_n1001(self):
        n, h = 1001, 0.05
        basses = lowest_eigenvalues(assemble_hamiltonian(make_grid(n, h), "compact"), 40)
        ferme = free_grid_spectrum(n, h)[:40]
        assert np.max(np.abs(basses[1:] - ferme[1:]) / ferme[1:]) <= 1e-10

    def test_spectre_libre_paper_literal_par_jacobi(self):
        n, h = 101, 0.05
        dec = eigendecompose(assemble_hamiltonian(make_grid(n, h), "paper_literal"))
        assert np.max(np.abs(dec.eigenvalues - free_grid_spectrum(n, h, "paper_literal"))) <= 1e-8

    def test_borne_spectrale_cas_aleatoires(self, rng):
        for _ in range(100):
            n = int(rng.integers(5, 51)) * 2 + 1
            h = float(rng.uniform(0.01, 1.0))
            tau = float(rng.uniform(-10.0, 10.0))
            g = make_grid(n, h)
            dec = eigendecompose(assemble_hamiltonian(g, "compact", DeltaAt(g.origin, tau)))
            rapport = spectral_bound_check(dec, tau, g)
            assert rapport["pass"], (n, h, tau, rapport)

    def test_vecteurs_orthonormes_et_residus(self, dec101):
        assert dec101.orthonormality_defect() <= 1e-10
        assert np.max(dec101.residuals()) <= 1e-8 * np.max(np.abs(dec101.eigenvalues))

    def test_entrelacement(self, g41):
        h0 = assemble_hamiltonian(g41, "compact")
        for rho in (0.3, -0.3):
            h1 = assemble_hamiltonian(g41, "compact", DeltaAt(g41.origin, rho * g41.h))
            assert interlacing_check(h0, h1)["ok"]
        deux = assemble_hamiltonian(g41, "compact", Sampled(lambda x: 1.0 if abs(x) < 0.3 else 0.0))
        with pytest.raises(ValueError):
            interlacing_check(h0, deux)

    def test_identites_ponctuelles(self):
        g = make_grid(61, 0.1)
        dec = eigendecompose(assemble_hamiltonian(g, "compact", DeltaAt(g.origin, -1.5)))
        residus = ultraschro_residuals(dec, -1.5, g)
        assert residus["origine"] <= 1e-8
        assert residus["ailleurs"] <= 1e-8

    def test_boite_de_dirichlet_par_murs(self):
        g = make_grid(401, 0.05)
        L, tau = 5.0, 3.0
        dec = eigendecompose(assemble_hamiltonian(g, "compact", [DeltaAt(g.origin, tau), box_walls(L)]))
        parites = split_by_parity(dec, 4)
        pairs = [n.energy for n in box_spectrum(BoxProblem(L, tau, "barrier", "even"), 4)]
        impairs = [n.energy for n in odd_spectrum_union(L, 4)]
        assert len(parites["even"]) == len(parites["odd"]) == 4
        assert np.allclose(parites["even"], pairs, rtol=5e-3)
        assert np.allclose(parites["odd"], impairs, rtol=5e-3)


# ---------------------------------------------------------------------------
# Évolution et mesure
# ---------------------------------------------------------------------------

class TestEvolutionEtMesure:

    def test_evolution_a_t_nul(self, dec101):
        psi = dec101.eigenvector(0)
        assert evolve(dec101, psi, 0.0) is psi

    def test_norme_et_energie_conservees(self, dec101):
        g = dec101.grid
        psi = embed(lambda x: math.exp(-(x + 1.0) ** 2) * math.cos(x), g)
        psi = psi / math.sqrt(float(np.sum(np.abs(psi.values) ** 2 * g.weights)))
        e0 = energy_expectation(dec101.hamiltonian, psi)
        phi = evolve(dec101, psi, 1.3)
        assert abs(math.sqrt(float(np.sum(np.abs(phi.values) ** 2 * g.weights))) - 1.0) <= 1e-10
        assert abs(energy_expectation(dec101.hamiltonian, phi) - e0) <= 1e-9 * max(1.0, abs(e0))

    def test_mesure_d_un_etat_propre(self, dec101):
        probas = measurement_probabilities(dec101.eigenvector(3), dec101)
        assert abs(probas[3][1] - 1.0) <= 1e-10
        assert probas[3][0] == dec101.eigenvalues[3]
        assert math.isclose(sum(p for _, p in probas), 1.0, rel_tol=1e-10)

    def test_mesure_d_un_melange(self, dec101):
        v = (dec101.vectors[:, 0] + dec101.vectors[:, 1]) / math.sqrt(2.0)
        probas = measurement_probabilities(GridFunction(dec101.grid, v), dec101)
        assert abs(probas[0][1] - 0.5) <= 1e-10
        assert abs(probas[1][1] - 0.5) <= 1e-10

    def test_etat_non_normalise_refuse(self, dec101):
        with pytest.raises(EtatNonNormaliseError):
            measurement_probabilities(GridFunction(dec101.grid, 2.0 * dec101.vectors[:, 0]), dec101)

    def test_energie_d_un_etat_propre(self, dec101):
        assert math.isclose(energy_expectation(dec101.hamiltonian, dec101.eigenvector(2)),
                            dec101.eigenvalues[2], rel_tol=1e-9, abs_tol=1e-9)

    def test_cent_pas_jusqu_a_t_dix_sur_le_puits(self):
        g = make_grid(1001, 0.05)
        H = assemble_hamiltonian(g, "compact", DeltaAt(g.origin, -2.0))
        dec = eigendecompose(H)
        psi = embed(lambda x: math.exp(-(x + 2.0) ** 2 / 2) * math.cos(x), g)
        psi = psi / math.sqrt(float(np.sum(np.abs(psi.values) ** 2 * g.weights)))
        e0 = energy_expectation(H, psi)
        for k in range(1, 101):
            phi = evolve(dec, psi, 0.1 * k)
            norme = math.sqrt(math.fsum(np.abs(phi.values) ** 2 * g.weights))
            assert abs(norme - 1.0) <= 1e-10
            assert abs(energy_expectation(H, phi) - e0) <= 1e-9 * max(1.0, abs(e0))
            probas = measurement_probabilities(phi, dec)
            assert abs(math.fsum(p for _, p in probas) - 1.0) <= 1e-10

    def test_probabilites_de_position(self, dec101):
        g = dec101.grid
        psi = dec101.eigenvector(1)
        probas = [position_probability(psi, a) for a in range(g.n)]
        assert math.isclose(math.fsum(probas), 1.0, rel_tol=1e-10)
        # base des positions : opérateur de multiplication par x, sans cinétique
        positions = eigendecompose(assemble_hamiltonian(g, "compact", Sampled(lambda x: x), kinetic=False))
        for x, p in measurement_probabilities(psi, positions):
            assert p == pytest.approx(probas[g.index_of(x)], rel=1e-12, abs=1e-15)

    def test_probabilite_de_position_symbolique(self, g41):
        racine = SymbolicState.sqrt_delta(g41, g41.origin)
        assert standard_part(position_probability(racine, g41.origin)) == 1.0
        assert standard_part(position_probability(racine, g41.origin + 1)) == 0.0


# ---------------------------------------------------------------------------
# États physiques et idéaux
# ---------------------------------------------------------------------------

class TestClassementEtats:

    ETAGES = ((201, 0.1), (401, 0.05), (801, 0.025))

    def test_gaussienne_physique(self, g41):
        classe = classify_state(embed(lambda x: math.exp(-x * x), g41))
        assert classe.tag == "Physical"
        assert classify(classe.witness).finite

    def test_racine_de_delta_ideale(self, g41):
        classe = classify_state(SymbolicState.sqrt_delta(g41, g41.origin))
        assert classe.tag == "Ideal"
        assert classify(classe.witness).kind == "infinite"

    def test_delta_attractive_garde_la_gaussienne_physique(self, g41):
        desc = HamiltonianDescription("compact", DeltaAt(g41.origin, -1.0))
        assert classify_state(embed(lambda x: math.exp(-x * x), g41), desc).tag == "Physical"

    def test_mode_flottant_par_raffinement(self):
        desc = HamiltonianDescription("compact", None, self.ETAGES)
        assert classify_state(lambda x: math.exp(-x * x), desc).tag == "Physical"
        singuliere = classify_state(lambda x: math.exp(-x * x) / abs(x), desc)
        assert singuliere.tag == "Ideal"
        assert classify(singuliere.witness).kind == "infinite"


# ---------------------------------------------------------------------------
# Deux dimensions
# ---------------------------------------------------------------------------

class TestDeuxDimensions:

    def test_spectre_libre_somme_des_spectres_1d(self):
        g2 = make_grid_2d(9, 0.5)
        dec = eigendecompose(assemble_hamiltonian_2d(g2))
        a = free_grid_spectrum(9, 0.5)
        attendu = np.sort((a[:, None] + a[None, :]).ravel())
        assert np.max(np.abs(dec.eigenvalues - attendu)) <= 1e-10

    def test_delta_attractive_lie(self):
        g2 = make_grid_2d(11, 0.5)
        dec = eigendecompose(assemble_hamiltonian_2d(g2, tau=-1.0))
        assert dec.eigenvalues[0] < 0
        assert spectral_bound_check(dec, -1.0, g2)["pass"]

    def test_plafond_2d(self):
        with pytest.raises(GrilleInvalideError):
            make_grid_2d(43, 0.1)
