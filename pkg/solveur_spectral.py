"""
Module solveur_spectral.py — Valeurs et vecteurs propres de matrices symétriques réelles.

Deux chemins, sans appel à un solveur propre externe (numpy ne sert qu'aux
normes et aux factorisations QR des grappes) :
  - tridiagonal, éventuellement cyclique (coefficient de coin A[0, n−1]) :
    bisection sur les suites de Sturm, itération inverse, puis quotients de
    Rayleigh (Rayleigh–Ritz dans les grappes) qui fixent les valeurs rendues ;
  - dense : Jacobi cyclique, rotations disjointes appliquées par rondes
    (ordre « tournoi »), arrêt quand la norme de Frobenius hors diagonale
    passe sous TOL_JACOBI × norme de la matrice.

Les calculs sont vectorisés sur les décalages (numpy) et déterministes :
mêmes entrées, mêmes bits en sortie.
"""

import os

import numpy as np

TOL_JACOBI = 1e-12
MAX_BALAYAGES = 100
MAX_BISSECTIONS = 200
ITERATIONS_INVERSES = 3
TAILLE_PAQUET = 256
# écart relatif en dessous duquel des vecteurs propres sont réorthonormalisés
ECART_GRAPPE = 1e-5
SEUIL_SIGNE = 1e-12

GRAINE = int(os.getenv("HFQM_SEED", "12345"))

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class ConvergenceError(RuntimeError):
    """Le solveur n'a pas atteint sa tolérance dans le budget d'itérations."""


# ---------------------------------------------------------------------------
# Outils communs
# ---------------------------------------------------------------------------

def normaliser_signes(vecteurs: np.ndarray) -> np.ndarray:
    """Rend positive la première composante non négligeable de chaque colonne."""
    vecteurs = vecteurs.copy()
    for k in range(vecteurs.shape[1]):
        col = vecteurs[:, k]
        seuil = SEUIL_SIGNE * np.max(np.abs(col))
        premier = int(np.argmax(np.abs(col) > seuil))
        if col[premier] < 0:
            vecteurs[:, k] = -col
    return vecteurs


def _grappes(valeurs: np.ndarray, echelle: float) -> list[tuple[int, int]]:
    """Plages [debut, fin) de valeurs propres consécutives séparées de moins de ECART_GRAPPE·échelle."""
    plages = []
    debut = 0
    for k in range(1, len(valeurs) + 1):
        if k == len(valeurs) or valeurs[k] - valeurs[k - 1] > ECART_GRAPPE * echelle:
            if k - debut > 1:
                plages.append((debut, k))
            debut = k
    return plages


def _reorthonormaliser(vecteurs: np.ndarray, valeurs: np.ndarray, echelle: float) -> np.ndarray:
    vecteurs = vecteurs.copy()
    for debut, fin in _grappes(valeurs, echelle):
        q, _ = np.linalg.qr(vecteurs[:, debut:fin])
        vecteurs[:, debut:fin] = q
    return vecteurs


# ---------------------------------------------------------------------------
# Chemin tridiagonal (cyclique)
# ---------------------------------------------------------------------------

def compte_sturm(diag: np.ndarray, sous: np.ndarray, coin: float, sigmas) -> np.ndarray:
    """
    Nombre de valeurs propres strictement inférieures à chaque σ.

    Inertie de A − σI par factorisation LDLᵀ du bloc tridiagonal de tête
    (n−1)×(n−1) puis complément de Schur du dernier pivot, qui absorbe le
    coefficient de coin. Vectorisé sur σ.

    Args:
        diag  : diagonale (n,).
        sous  : sous-diagonale (n−1,), A[i+1, i].
        coin  : A[0, n−1] = A[n−1, 0] (0 pour une tridiagonale ordinaire).
        sigmas: décalages (m,).
    """
    sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
    n = len(diag)
    pivmin = _TINY * max(1.0, float(np.max(sous ** 2, initial=0.0)), coin * coin)
    if n == 1:
        return (diag[0] - sigmas < 0).astype(int)

    compte = np.zeros(sigmas.shape, dtype=int)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        d = diag[0] - sigmas
        d = np.where(np.abs(d) < pivmin, -pivmin, d)
        compte += d < 0
        w0 = coin if n > 2 else coin + sous[0]
        y = np.full(sigmas.shape, w0)
        schur = y * y / d
        for i in range(1, n - 1):
            l = sous[i - 1] / d
            d = diag[i] - sigmas - sous[i - 1] * l
            d = np.where(np.abs(d) < pivmin, -pivmin, d)
            compte += d < 0
            w = sous[n - 2] if i == n - 2 else 0.0
            y = w - l * y
            schur = schur + y * y / d
        s = diag[n - 1] - sigmas - schur
        s = np.where(np.isnan(s), -pivmin, s)
        compte += s < 0
    return compte


def _bornes_gershgorin(diag, sous, coin) -> tuple[float, float]:
    n = len(diag)
    rayon = np.zeros(n)
    rayon[:-1] += np.abs(sous)
    rayon[1:] += np.abs(sous)
    if n > 2:
        rayon[0] += abs(coin)
        rayon[-1] += abs(coin)
    bas = float(np.min(diag - rayon))
    haut = float(np.max(diag + rayon))
    marge = 2 * _EPS * max(abs(bas), abs(haut), 1.0)
    return bas - marge, haut + marge


def valeurs_propres_sturm(diag, sous, coin: float = 0.0, rangs=None) -> np.ndarray:
    """
    Valeurs propres croissantes par bisection simultanée.

    Args:
        rangs : indices (0 = plus petite) à calculer ; toutes par défaut.
    """
    diag = np.asarray(diag, dtype=float)
    sous = np.asarray(sous, dtype=float)
    n = len(diag)
    if n == 2 and coin:
        sous = sous + coin
        coin = 0.0
    bas0, haut0 = _bornes_gershgorin(diag, sous, coin)
    norme = max(abs(bas0), abs(haut0))
    rangs = np.arange(n) if rangs is None else np.asarray(rangs, dtype=int)
    bas = np.full(len(rangs), bas0)
    haut = np.full(len(rangs), haut0)
    for _ in range(MAX_BISSECTIONS):
        largeur_ok = 2 * _EPS * np.maximum(np.abs(bas), np.abs(haut)) + _EPS * norme
        actifs = np.nonzero(haut - bas > largeur_ok)[0]
        if actifs.size == 0:
            break
        milieu = 0.5 * (bas[actifs] + haut[actifs])
        au_dessus = compte_sturm(diag, sous, coin, milieu) > rangs[actifs]
        haut[actifs] = np.where(au_dessus, milieu, haut[actifs])
        bas[actifs] = np.where(au_dessus, bas[actifs], milieu)
    else:
        raise ConvergenceError(f"Bisection de Sturm non convergée après {MAX_BISSECTIONS} pas")
    return 0.5 * (bas + haut)


def _factoriser_lu(sous, d, sur):
    """
    LU avec pivotage partiel de matrices tridiagonales, une par colonne de d.

    Args:
        sous, sur : (n−1,) communs ; d : (n, m) diagonales décalées.

    Returns:
        (dl, d, du, du2, echanges) au format des solveurs tridiagonaux classiques.
    """
    n, m = d.shape
    d = d.copy()
    dl = np.repeat(sous[:, None], m, axis=1)
    du = np.repeat(sur[:, None], m, axis=1)
    du2 = np.zeros((max(n - 2, 0), m))
    echanges = np.zeros((n - 1, m), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n - 1):
            di, dli, dui, dip1 = d[i].copy(), dl[i].copy(), du[i].copy(), d[i + 1].copy()
            echange = np.abs(di) < np.abs(dli)
            fact_sans = np.where(di != 0, dli / di, 0.0)
            fact_avec = di / dli
            d[i] = np.where(echange, dli, di)
            dl[i] = np.where(echange, fact_avec, fact_sans)
            du[i] = np.where(echange, dip1, dui)
            d[i + 1] = np.where(echange, dui - fact_avec * dip1, dip1 - fact_sans * dui)
            if i < n - 2:
                duip1 = du[i + 1].copy()
                du2[i] = np.where(echange, duip1, 0.0)
                du[i + 1] = np.where(echange, -fact_avec * duip1, duip1)
            echanges[i] = echange
    return dl, d, du, du2, echanges


def _resoudre_lu(facteurs, b: np.ndarray) -> np.ndarray:
    dl, d, du, du2, echanges = facteurs
    n = d.shape[0]
    x = b.copy()
    for i in range(n - 1):
        xi, xi1 = x[i].copy(), x[i + 1].copy()
        x[i] = np.where(echanges[i], xi1, xi)
        x[i + 1] = np.where(echanges[i], xi - dl[i] * xi1, xi1 - dl[i] * xi)
    x[n - 1] = x[n - 1] / d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x


class _SystemeCyclique:
    """
    Résolution de (A − μI)x = b pour une tridiagonale cyclique et un paquet de μ.

    Le coin est traité par Sherman–Morrison : A − μI = T' + u vᵀ avec
    u = (γ, 0, …, 0, c), v = (1, 0, …, 0, c/γ).
    """

    def __init__(self, diag, sous, coin, mus, norme):
        n = len(diag)
        self.coin = coin if n > 2 else 0.0
        d = diag[:, None] - mus[None, :]
        plancher = _EPS * max(norme, _TINY)
        if self.coin:
            gamma = -d[0].copy()
            gamma = np.where(np.abs(gamma) < plancher, -norme, gamma)
            d[0] = d[0] - gamma
            d[n - 1] = d[n - 1] - self.coin * self.coin / gamma
            self.gamma = gamma
        facteurs = list(_factoriser_lu(sous, d, sous))
        pivots = facteurs[1]
        facteurs[1] = np.where(np.abs(pivots) < plancher,
                               np.where(pivots < 0, -plancher, plancher), pivots)
        self.facteurs = tuple(facteurs)
        self.n = n
        if self.coin:
            u = np.zeros((n, len(mus)))
            u[0] = self.gamma
            u[n - 1] = self.coin
            self.z = _resoudre_lu(self.facteurs, u)
            self.denominateur = 1.0 + self.z[0] + (self.coin / self.gamma) * self.z[n - 1]
            self.denominateur = np.where(np.abs(self.denominateur) < plancher, plancher,
                                         self.denominateur)

    def resoudre(self, b: np.ndarray) -> np.ndarray:
        y = _resoudre_lu(self.facteurs, b)
        if not self.coin:
            return y
        vy = y[0] + (self.coin / self.gamma) * y[self.n - 1]
        return y - (vy / self.denominateur)[None, :] * self.z


def _appliquer_tridiagonale(diag, sous, coin, x):
    y = diag[:, None] * x
    y[:-1] += sous[:, None] * x[1:]
    y[1:] += sous[:, None] * x[:-1]
    if len(diag) > 2 and coin:
        y[0] += coin * x[-1]
        y[-1] += coin * x[0]
    return y


def vecteurs_propres_inverses(diag, sous, coin, valeurs, graine: int = GRAINE) -> np.ndarray:
    """Itération inverse vectorisée par paquets de décalages, vecteurs normés en colonnes."""
    diag = np.asarray(diag, dtype=float)
    sous = np.asarray(sous, dtype=float)
    n = len(diag)
    norme = max(float(np.max(np.abs(valeurs))), float(np.max(np.abs(diag))), _TINY)
    rng = np.random.default_rng(graine)
    vecteurs = np.empty((n, len(valeurs)))
    for debut in range(0, len(valeurs), TAILLE_PAQUET):
        mus = np.asarray(valeurs[debut:debut + TAILLE_PAQUET], dtype=float)
        systeme = _SystemeCyclique(diag, sous, coin, mus, norme)
        x = rng.standard_normal((n, len(mus)))
        x /= np.linalg.norm(x, axis=0)
        for _ in range(ITERATIONS_INVERSES):
            x = systeme.resoudre(x)
            x /= np.linalg.norm(x, axis=0)
        vecteurs[:, debut:debut + len(mus)] = x
    return vecteurs


def _rayleigh_ritz(diag, sous, coin, vecteurs, grappes) -> tuple[np.ndarray, np.ndarray]:
    """
    Valeurs fixées par les quotients de Rayleigh vᵀAv des colonnes normées.

    Dans chaque grappe, la projection QᵀAQ est diagonalisée (Jacobi) et les
    vecteurs tournés en conséquence.
    """
    vecteurs = vecteurs.copy()
    av = _appliquer_tridiagonale(diag, sous, coin, vecteurs)
    valeurs = np.einsum("ij,ij->j", vecteurs, av)
    for debut, fin in grappes:
        q = vecteurs[:, debut:fin]
        projection = q.T @ av[:, debut:fin]
        w, z = eigh_jacobi(0.5 * (projection + projection.T))
        vecteurs[:, debut:fin] = q @ z
        valeurs[debut:fin] = w
    ordre = np.argsort(valeurs, kind="stable")
    return valeurs[ordre], vecteurs[:, ordre]


def _replier_coin(diag, sous, coin):
    diag = np.asarray(diag, dtype=float)
    sous = np.asarray(sous, dtype=float)
    if len(diag) == 2 and coin:
        # à n = 2 le coin et la sous-diagonale désignent la même entrée
        return diag, sous + coin, 0.0
    return diag, sous, coin


def valeurs_propres_affinees(diag, sous, coin: float = 0.0, rangs=None,
                             graine: int = GRAINE) -> np.ndarray:
    """Valeurs de Sturm des rangs demandés, corrigées par quotient de Rayleigh."""
    diag, sous, coin = _replier_coin(diag, sous, coin)
    valeurs = valeurs_propres_sturm(diag, sous, coin, rangs)
    echelle = max(float(np.max(np.abs(valeurs))), _TINY)
    vecteurs = vecteurs_propres_inverses(diag, sous, coin, valeurs, graine)
    vecteurs = _reorthonormaliser(vecteurs, valeurs, echelle)
    return _rayleigh_ritz(diag, sous, coin, vecteurs, _grappes(valeurs, echelle))[0]


def eigh_tridiagonal(diag, sous, coin: float = 0.0, graine: int = GRAINE,
                     tol_residu: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """
    Décomposition spectrale complète d'une tridiagonale symétrique (cyclique si coin ≠ 0).

    Returns:
        (valeurs croissantes (n,), vecteurs orthonormés en colonnes (n, n)).

    Raises:
        ConvergenceError : résidu ‖Av − λv‖ au-delà de tol_residu·max|λ|.
    """
    diag, sous, coin = _replier_coin(diag, sous, coin)
    valeurs = valeurs_propres_sturm(diag, sous, coin)
    echelle = max(float(np.max(np.abs(valeurs))), _TINY)
    grappes = _grappes(valeurs, echelle)
    vecteurs = vecteurs_propres_inverses(diag, sous, coin, valeurs, graine)
    vecteurs = _reorthonormaliser(vecteurs, valeurs, echelle)
    valeurs, vecteurs = _rayleigh_ritz(diag, sous, coin, vecteurs, grappes)
    residus = np.linalg.norm(
        _appliquer_tridiagonale(diag, sous, coin, vecteurs) - vecteurs * valeurs[None, :], axis=0
    )
    mauvais = np.nonzero(residus > tol_residu * echelle)[0]
    if mauvais.size:
        # un second passage repart des vecteurs obtenus
        systeme = _SystemeCyclique(diag, sous, coin, valeurs[mauvais], echelle)
        x = vecteurs[:, mauvais]
        for _ in range(ITERATIONS_INVERSES):
            x = systeme.resoudre(x)
            x /= np.linalg.norm(x, axis=0)
        vecteurs[:, mauvais] = x
        vecteurs = _reorthonormaliser(vecteurs, valeurs, echelle)
        valeurs, vecteurs = _rayleigh_ritz(diag, sous, coin, vecteurs, grappes)
        residus = np.linalg.norm(
            _appliquer_tridiagonale(diag, sous, coin, vecteurs) - vecteurs * valeurs[None, :], axis=0
        )
        if np.max(residus) > tol_residu * echelle:
            raise ConvergenceError(
                f"Itération inverse : résidu {np.max(residus):.3e} > {tol_residu * echelle:.3e}"
            )
    return valeurs, normaliser_signes(vecteurs)


# ---------------------------------------------------------------------------
# Chemin dense : Jacobi cyclique
# ---------------------------------------------------------------------------

def calendrier_tournoi(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Rondes de paires disjointes (p < q) couvrant chaque paire une fois par balayage.
    Méthode du cercle ; un joueur fictif complète les n impairs.
    """
    m = n if n % 2 == 0 else n + 1
    joueurs = list(range(m))
    rondes = []
    for _ in range(m - 1):
        paires = [(joueurs[i], joueurs[m - 1 - i]) for i in range(m // 2)]
        paires = sorted((min(p, q), max(p, q)) for p, q in paires if p < n and q < n)
        if paires:
            p, q = zip(*paires)
            rondes.append((np.array(p), np.array(q)))
        joueurs = [joueurs[0], joueurs[-1]] + joueurs[1:-1]
    return rondes


def _hors_diagonale(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def eigh_jacobi(matrice, tol: float = TOL_JACOBI,
                max_balayages: int = MAX_BALAYAGES) -> tuple[np.ndarray, np.ndarray]:
    """
    Jacobi cyclique sur une matrice symétrique réelle dense.

    Returns:
        (valeurs croissantes, vecteurs orthonormés en colonnes).

    Raises:
        ValueError       : matrice non carrée ou non symétrique.
        ConvergenceError : balayages épuisés.
    """
    a = np.array(matrice, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Matrice carrée attendue, reçu la forme {a.shape}")
    n = a.shape[0]
    asymetrie = float(np.max(np.abs(a - a.T), initial=0.0))
    if asymetrie > 1e-12 * max(float(np.max(np.abs(a), initial=0.0)), 1.0):
        raise ValueError(f"Matrice non symétrique (asymétrie max {asymetrie:.3e})")
    v = np.eye(n)
    norme = float(np.linalg.norm(a))
    if n == 1 or norme == 0.0:
        return np.diag(a).copy(), v

    rondes = calendrier_tournoi(n)
    for _ in range(max_balayages):
        if _hors_diagonale(a) <= tol * norme:
            break
        for p, q in rondes:
            apq = a[p, q]
            app = a[p, p]
            aqq = a[q, q]
            with np.errstate(divide="ignore", invalid="ignore"):
                theta = (aqq - app) / (2.0 * apq)
                signe = np.where(theta >= 0, 1.0, -1.0)
                t = np.where(apq != 0, signe / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            t = np.where(np.isfinite(t), t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap = a[p, :].copy()
            aq = a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            ap = a[:, p].copy()
            aq = a[:, q].copy()
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp = v[:, p].copy()
            vq = v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    else:
        if _hors_diagonale(a) > tol * norme:
            raise ConvergenceError(
                f"Jacobi : {max_balayages} balayages sans atteindre {tol:.1e} "
                f"(hors diagonale {_hors_diagonale(a):.3e}, norme {norme:.3e})"
            )
    valeurs = np.diag(a).copy()
    ordre = np.argsort(valeurs, kind="stable")
    return valeurs[ordre], normaliser_signes(v[:, ordre])


def residu_max(matrice: np.ndarray, valeurs: np.ndarray, vecteurs: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(matrice @ vecteurs - vecteurs * valeurs[None, :], axis=0)))
