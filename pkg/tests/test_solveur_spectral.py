"""
Tests pour solveur_spectral.py — Sturm, itération inverse, Jacobi cyclique.
"""
import sys
import os
import itertools

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from solveur_spectral import (
    ConvergenceError,
    calendrier_tournoi,
    compte_sturm,
    eigh_jacobi,
    eigh_tridiagonal,
    residu_max,
    valeurs_propres_affinees,
    valeurs_propres_sturm,
)

GRAINE = int(os.getenv("HFQM_SEED", "12345"))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def rng():
    return np.random.default_rng(GRAINE)


def matrice_dense(diag, sous, coin=0.0):
    n = len(diag)
    a = np.diag(np.asarray(diag, dtype=float))
    a[np.arange(1, n), np.arange(n - 1)] = sous
    a[np.arange(n - 1), np.arange(1, n)] = sous
    if coin:
        a[0, n - 1] = a[n - 1, 0] = coin
    return a


# ---------------------------------------------------------------------------
# Suites de Sturm
# ---------------------------------------------------------------------------

class TestSturm:

    def test_compte_sur_une_diagonale(self):
        comptes = compte_sturm(np.array([1.0, 2.0, 3.0]), np.zeros(2), 0.0, np.array([0.0, 1.5, 2.5, 10.0]))
        assert list(comptes) == [0, 1, 2, 3]

    def test_toeplitz_ouverte(self):
        n = 10
        valeurs = valeurs_propres_sturm(np.full(n, 2.0), np.full(n - 1, -1.0))
        attendu = 2 - 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
        assert np.max(np.abs(valeurs - np.sort(attendu))) <= 1e-12

    def test_anneau_cyclique(self):
        n = 15
        valeurs = valeurs_propres_sturm(np.full(n, 2.0), np.full(n - 1, -1.0), coin=-1.0)
        attendu = np.sort(2 - 2 * np.cos(2 * np.pi * np.arange(n) / n))
        assert np.max(np.abs(valeurs - attendu)) <= 1e-12

    def test_rangs_selectionnes(self, rng):
        diag = rng.standard_normal(40)
        sous = rng.standard_normal(39)
        toutes = valeurs_propres_sturm(diag, sous, 0.7)
        choisies = valeurs_propres_sturm(diag, sous, 0.7, rangs=[0, 5, 39])
        assert np.array_equal(choisies, toutes[[0, 5, 39]])


# ---------------------------------------------------------------------------
# eigh_tridiagonal
# ---------------------------------------------------------------------------

class TestTridiagonale:

    def test_residus_et_orthonormalite(self, rng):
        n = 120
        diag = rng.standard_normal(n)
        sous = rng.standard_normal(n - 1)
        valeurs, vecteurs = eigh_tridiagonal(diag, sous, coin=0.3)
        a = matrice_dense(diag, sous, 0.3)
        assert residu_max(a, valeurs, vecteurs) <= 1e-9 * np.max(np.abs(valeurs))
        assert np.max(np.abs(vecteurs.T @ vecteurs - np.eye(n))) <= 1e-10
        assert np.all(np.diff(valeurs) >= 0)

    def test_valeurs_doubles_de_l_anneau(self):
        n = 201
        valeurs, vecteurs = eigh_tridiagonal(np.full(n, 2.0), np.full(n - 1, -1.0), coin=-1.0)
        assert np.max(np.abs(vecteurs.T @ vecteurs - np.eye(n))) <= 1e-10
        a = matrice_dense(np.full(n, 2.0), np.full(n - 1, -1.0), -1.0)
        assert residu_max(a, valeurs, vecteurs) <= 1e-9 * 4

    def test_deux_points_coin_confondu(self):
        valeurs, _ = eigh_tridiagonal(np.array([1.0, 1.0]), np.array([0.5]), coin=0.5)
        assert np.allclose(valeurs, [0.0, 2.0], atol=1e-14)

    def test_anneau_n1001_precision_relative(self):
        n = 1001
        valeurs, _ = eigh_tridiagonal(np.full(n, 2.0), np.full(n - 1, -1.0), coin=-1.0)
        attendu = np.sort(4 * np.sin(np.pi * np.arange(n) / n) ** 2)
        assert abs(valeurs[0]) <= 1e-12
        assert np.max(np.abs(valeurs[1:] - attendu[1:]) / attendu[1:]) <= 1e-10

    def test_valeurs_affinees_sur_des_rangs_choisis(self):
        n = 1001
        rangs = [1, 2, 26, 27, 28, 500, 1000]
        valeurs = valeurs_propres_affinees(np.full(n, 2.0), np.full(n - 1, -1.0), -1.0, rangs=rangs)
        attendu = np.sort(4 * np.sin(np.pi * np.arange(n) / n) ** 2)[rangs]
        assert np.max(np.abs(valeurs - attendu) / attendu) <= 1e-10

    def test_signes_normalises(self, rng):
        _, vecteurs = eigh_tridiagonal(rng.standard_normal(30), rng.standard_normal(29))
        for k in range(30):
            col = vecteurs[:, k]
            premier = np.argmax(np.abs(col) > 1e-12 * np.max(np.abs(col)))
            assert col[premier] > 0

    def test_deterministe(self, rng):
        diag = rng.standard_normal(60)
        sous = rng.standard_normal(59)
        v1, x1 = eigh_tridiagonal(diag, sous, 0.1)
        v2, x2 = eigh_tridiagonal(diag, sous, 0.1)
        assert np.array_equal(v1, v2) and np.array_equal(x1, x2)


# ---------------------------------------------------------------------------
# Jacobi
# ---------------------------------------------------------------------------

class TestJacobi:

    def test_diagonale(self):
        valeurs, vecteurs = eigh_jacobi(np.diag([2.0, 1.0]))
        assert list(valeurs) == [1.0, 2.0]
        assert np.array_equal(np.abs(vecteurs), np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_matrice_aleatoire(self, rng):
        b = rng.standard_normal((12, 12))
        a = (b + b.T) / 2
        valeurs, vecteurs = eigh_jacobi(a)
        assert residu_max(a, valeurs, vecteurs) <= 1e-10 * np.max(np.abs(valeurs))
        assert np.max(np.abs(vecteurs.T @ vecteurs - np.eye(12))) <= 1e-12
        assert np.isclose(valeurs.sum(), np.trace(a), atol=1e-12)

    def test_non_symetrique_refusee(self):
        with pytest.raises(ValueError):
            eigh_jacobi(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_non_carree_refusee(self):
        with pytest.raises(ValueError):
            eigh_jacobi(np.ones((2, 3)))

    def test_balayages_epuises(self, rng):
        b = rng.standard_normal((10, 10))
        with pytest.raises(ConvergenceError):
            eigh_jacobi(b + b.T, max_balayages=1)

    def test_meme_spectre_que_sturm(self):
        n = 9
        diag = np.full(n, 2.0)
        sous = np.full(n - 1, -1.0)
        v_jacobi, _ = eigh_jacobi(matrice_dense(diag, sous, -1.0))
        assert np.max(np.abs(v_jacobi - valeurs_propres_sturm(diag, sous, -1.0))) <= 1e-12


class TestOutils:

    @pytest.mark.parametrize("n", [2, 7, 8])
    def test_tournoi_couvre_chaque_paire_une_fois(self, n):
        vues = []
        for p, q in calendrier_tournoi(n):
            assert len(set(p) | set(q)) == 2 * len(p)
            vues.extend(zip(p.tolist(), q.tolist()))
        assert sorted(vues) == list(itertools.combinations(range(n), 2))
