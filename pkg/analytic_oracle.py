"""
Module analytic_oracle.py — Solutions de référence de l'approche standard.

Potentiel τδ₀ dans une boîte [−L, L] (murs de Dirichlet) ou sur un anneau de
circonférence 2L (géométrie de la grille périodique), puits/barrière carrés
de demi-largeur εw, et formules multidimensionnelles.

Conventions :
  - H = −½ d²/dx² + τδ₀, donc la condition de saut est ψ'(0⁺) − ψ'(0⁻) = 2τψ(0) ;
  - les équations de boîte prennent une intensité positive s = |τ| et un
    drapeau barrier/well : k·cot(kL) = −s (barrière), +s (puits) ;
  - toutes les équations transcendantes sont résolues par bisection
    encadrée (jamais Newton), encadrements tirés des pôles de cot/tan.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

MAX_ITER_BISSECTION = 200
TOL_RESIDU = 1e-10
PAS_BALAYAGE = 40          # points de balayage par intervalle π/L
PARITES = ("even", "odd")
SIGNES = ("barrier", "well")


class EncadrementError(ValueError):
    """Aucun changement de signe sur l'intervalle fourni."""

    def __init__(self, message: str, intervalle: tuple[float, float]):
        self.intervalle = intervalle
        super().__init__(f"{message} (intervalle [{intervalle[0]!r}, {intervalle[1]!r}])")


class Niveau(NamedTuple):
    k: float
    energy: float


class Normalisation(NamedTuple):
    A: float
    psi0: float


@dataclass(frozen=True)
class BoxProblem:
    L: float
    strength: float
    sign: str = "barrier"
    parity: str = "even"

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L doit être > 0 : {self.L}")
        if not self.strength >= 0:
            raise ValueError(f"Intensité négative : {self.strength} (utiliser sign='well')")
        if self.sign not in SIGNES:
            raise ValueError(f"sign inconnu : {self.sign!r} (attendu : {SIGNES})")
        if self.parity not in PARITES:
            raise ValueError(f"parity inconnue : {self.parity!r} (attendu : {PARITES})")

    @property
    def tau(self) -> float:
        return self.strength if self.sign == "barrier" else -self.strength


@dataclass(frozen=True)
class SquareWellProblem:
    """Mur carré ±V₀ sur |x| < εw dans la boîte [−L, L] ; τ = 2εwV₀ (signé)."""

    L: float
    half_width: float
    V0: float
    sign: str = "barrier"

    def __post_init__(self):
        if not 0 < self.half_width < self.L:
            raise ValueError(f"0 < εw < L requis : εw = {self.half_width}, L = {self.L}")
        if not self.V0 > 0:
            raise ValueError(f"V₀ doit être > 0 : {self.V0}")
        if self.sign not in SIGNES:
            raise ValueError(f"sign inconnu : {self.sign!r} (attendu : {SIGNES})")

    @property
    def inner_potential(self) -> float:
        return self.V0 if self.sign == "barrier" else -self.V0

    @property
    def tau(self) -> float:
        return 2 * self.half_width * self.inner_potential


# ---------------------------------------------------------------------------
# Bisection encadrée
# ---------------------------------------------------------------------------

def bisect_root(f: Callable[[float], float], lo: float, hi: float,
                max_iter: int = MAX_ITER_BISSECTION) -> float:
    """
    Racine de f sur [lo, hi] par bisection jusqu'à la précision machine.

    Raises:
        EncadrementError : f(lo) et f(hi) de même signe (ou non finis).
    """
    flo, fhi = f(lo), f(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise EncadrementError(f"f non finie aux bornes (f(lo)={flo}, f(hi)={fhi})", (lo, hi))
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise EncadrementError(f"pas de changement de signe (f(lo)={flo:.3e}, f(hi)={fhi:.3e})", (lo, hi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# État lié
# ---------------------------------------------------------------------------

def bound_state_energy_1d(s: float) -> float:
    """E₁D = −s²/2 pour le puits τδ₀, s = |τ|."""
    if not s > 0:
        raise ValueError(f"Intensité positive requise : {s}")
    return -s * s / 2


def finite_box_bound_state(s: float, L: float, boundary: str = "dirichlet") -> Niveau:
    """
    État lié du puits −sδ₀ dans une boîte finie.

    Args:
        boundary : 'dirichlet' -> k·coth(kL) = s (murs en ±L, existe si s > 1/L) ;
                   'periodic'  -> k·tanh(kL) = s (anneau de circonférence 2L).

    Returns:
        Niveau(k, −k²/2).

    Raises:
        EncadrementError : pas d'état lié (s ≤ 1/L en Dirichlet).
    """
    if not (s > 0 and L > 0):
        raise ValueError(f"s et L doivent être > 0 : s = {s}, L = {L}")
    if boundary == "dirichlet":
        def f(k):
            return k / math.tanh(k * L) - s if k > 0 else 1.0 / L - s
        lo, hi = 0.0, s
    elif boundary == "periodic":
        def f(k):
            return k * math.tanh(k * L) - s
        lo, hi = 0.0, s
        while f(hi) <= 0:
            hi *= 2
    else:
        raise ValueError(f"Condition aux bords inconnue : {boundary!r}")
    k = bisect_root(f, lo, hi)
    return Niveau(k, -k * k / 2)


# ---------------------------------------------------------------------------
# Spectres de diffusion
# ---------------------------------------------------------------------------

def _racines_cot(c: float, L: float, m: int) -> list[float]:
    """m premières racines positives de k·cot(kL) = c, sous la forme k·cos(kL) − c·sin(kL) = 0."""
    def f(k):
        return k * math.cos(k * L) - c * math.sin(k * L)
    racines = []
    j = 0
    while len(racines) < m:
        lo = j * math.pi / L
        hi = (j + 1) * math.pi / L
        if j == 0:
            # k → 0 : f(k) ≈ k(1 − cL) ; racine dans (0, π/L) ssi cL < 1
            if c * L >= 1:
                j += 1
                continue
            lo = 1e-9 * hi
        racines.append(bisect_root(f, lo, hi))
        j += 1
    return racines


def box_spectrum(p: BoxProblem, m: int) -> list[Niveau]:
    """
    m premiers niveaux positifs de la boîte [−L, L] avec delta en 0.

    Pair : k·cot(kL) = −s (barrière) ou +s (puits).
    Impair : k = (π + 2πn)/L, n ≥ 0 (barrière) ; k = 2πn/L, n ≥ 1 (puits).
    """
    if m < 1:
        raise ValueError(f"m doit être >= 1 : {m}")
    if p.parity == "even":
        c = -p.strength if p.sign == "barrier" else p.strength
        ks = _racines_cot(c, p.L, m)
    elif p.sign == "barrier":
        ks = [(math.pi + 2 * math.pi * n) / p.L for n in range(m)]
    else:
        ks = [2 * math.pi * n / p.L for n in range(1, m + 1)]
    return [Niveau(k, k * k / 2) for k in ks]


def odd_spectrum_union(L: float, m: int) -> list[Niveau]:
    """Réunion triée des formes closes impaires barrière et puits : k = jπ/L, j ≥ 1."""
    barriere = box_spectrum(BoxProblem(L, 0.0, "barrier", "odd"), m)
    puits = box_spectrum(BoxProblem(L, 0.0, "well", "odd"), m)
    return sorted(barriere + puits)[:m]


def ring_spectrum(tau: float, L: float, parity: str, m: int) -> list[Niveau]:
    """
    m premiers niveaux positifs sur l'anneau de circonférence 2L avec τδ₀ (τ signé).

    Pair : k·tan(kL) = τ ; impair : k = jπ/L (la delta ne voit pas les états impairs).
    Pour τ = 0 le mode constant k = 0 ouvre la liste paire.
    """
    if parity == "odd":
        return [Niveau(j * math.pi / L, (j * math.pi / L) ** 2 / 2) for j in range(1, m + 1)]
    if parity != "even":
        raise ValueError(f"parity inconnue : {parity!r}")

    def f(k):
        return k * math.sin(k * L) - tau * math.cos(k * L)
    ks = [0.0] if tau == 0 else []
    j = 0
    while len(ks) < m:
        lo = (j - 0.5) * math.pi / L
        hi = (j + 0.5) * math.pi / L
        if j == 0:
            if tau <= 0:
                j += 1
                continue
            lo = 1e-9 * hi
        ks.append(bisect_root(f, lo, hi))
        j += 1
    return [Niveau(k, k * k / 2) for k in ks[:m]]


def free_grid_spectrum(n: int, h: float, variant: str = "compact") -> np.ndarray:
    """
    Valeurs propres croissantes de −½·laplacien périodique (opérateur circulant) :
    compact (2/h²)sin²(πm/n) ; paper_literal sin²(2πm/n)/(2h²).
    """
    m = np.arange(n)
    if variant == "compact":
        valeurs = 2.0 / (h * h) * np.sin(np.pi * m / n) ** 2
    elif variant == "paper_literal":
        valeurs = np.sin(2 * np.pi * m / n) ** 2 / (2.0 * h * h)
    else:
        raise ValueError(f"Variante de laplacien inconnue : {variant!r}")
    return np.sort(valeurs)


# ---------------------------------------------------------------------------
# Puits / barrière carrés
# ---------------------------------------------------------------------------

def _interieur(energie: float, v: float, parity: str, x: float) -> tuple[float, float]:
    """(ψ, ψ') de la solution intérieure, continue en E."""
    w = 2.0 * (energie - v)
    if w > 0:
        q = math.sqrt(w)
        if parity == "even":
            return math.cos(q * x), -q * math.sin(q * x)
        return math.sin(q * x) / q, math.cos(q * x)
    if w < 0:
        kappa = math.sqrt(-w)
        if parity == "even":
            return math.cosh(kappa * x), kappa * math.sinh(kappa * x)
        return math.sinh(kappa * x) / kappa, math.cosh(kappa * x)
    return (1.0, 0.0) if parity == "even" else (x, 1.0)


def _exterieur(energie: float, L: float, x: float) -> tuple[float, float]:
    """(ψ, ψ') de la solution extérieure nulle en x = L, continue en E."""
    w = 2.0 * energie
    u = x - L
    if w > 0:
        k = math.sqrt(w)
        return math.sin(k * u) / k, math.cos(k * u)
    if w < 0:
        k = math.sqrt(-w)
        return math.sinh(k * u) / k, math.cosh(k * u)
    return u, 1.0


def matching_function(p: SquareWellProblem, parity: str) -> Callable[[float], float]:
    """Wronskien G(E) = ψ_in'ψ_out − ψ_inψ_out' en x = εw ; ses zéros sont les niveaux."""
    a = p.half_width
    v = p.inner_potential

    def g(energie: float) -> float:
        pi, dpi = _interieur(energie, v, parity, a)
        po, dpo = _exterieur(energie, p.L, a)
        return dpi * po - pi * dpo
    return g


def square_well_spectrum(p: SquareWellProblem, parity: str, count: int) -> list[Niveau]:
    """
    count premiers niveaux (croissants) du mur carré, états liés compris pour un puits.

    Balayage croissant en énergie (pas π/(PAS_BALAYAGE·L) en k, de part et
    d'autre de E = 0) pour détecter les changements de signe du wronskien,
    puis bisection en E. Les états liés ont k = √(−2E).

    Raises:
        EncadrementError : moins de count niveaux trouvés dans la fenêtre de balayage.
    """
    if parity not in PARITES:
        raise ValueError(f"parity inconnue : {parity!r}")
    if count < 1:
        raise ValueError(f"count doit être >= 1 : {count}")
    g = matching_function(p, parity)
    pas = math.pi / (PAS_BALAYAGE * p.L)
    k_limite = (count + 2) * 4 * math.pi / p.L + 10 * math.sqrt(2 * p.V0)

    def noeuds():
        if p.sign == "well":
            for kappa in np.arange(math.sqrt(2 * p.V0), 0.0, -pas / 4):
                yield -kappa * kappa / 2
        yield 0.0
        k = pas
        while k <= k_limite:
            yield k * k / 2
            k += pas

    energies = []
    e0 = g0 = None
    for e1 in noeuds():
        g1 = g(e1)
        if g1 == 0:
            energies.append(e1)
        elif g0 is not None and g0 != 0 and (g0 > 0) != (g1 > 0):
            energies.append(bisect_root(g, e0, e1))
        if len(energies) >= count:
            break
        e0, g0 = e1, g1
    else:
        raise EncadrementError(f"{len(energies)} niveaux trouvés sur {count} demandés",
                               (-p.V0 if p.sign == "well" else 0.0, k_limite ** 2 / 2))
    return [Niveau(math.sqrt(2 * abs(e)), e) for e in energies]


# ---------------------------------------------------------------------------
# Normalisation et fonctions propres
# ---------------------------------------------------------------------------

def normalization_and_origin(k: float, L: float, parity: str,
                             regime: str = "scattering") -> Normalisation:
    """
    Constante A et valeur à l'origine.

    scattering : |A|⁻² = (2kL − sin 2kL)/(2k) ; ψ⁺(0) = −A·sin(kL), ψ⁻(0) = 0.
    bound      : |A|⁻² = (sinh 2kL − 2kL)/(2k) ; ψ(0) = −A·sinh(kL) (état pair).
    """
    if not k > 0:
        raise ValueError(f"k doit être > 0 : {k}")
    if regime == "scattering":
        a = math.sqrt(2 * k / (2 * k * L - math.sin(2 * k * L)))
        psi0 = -a * math.sin(k * L) if parity == "even" else 0.0
    elif regime == "bound":
        if parity != "even":
            raise ValueError("L'état lié du puits delta est pair")
        a = math.sqrt(2 * k / (math.sinh(2 * k * L) - 2 * k * L))
        psi0 = -a * math.sinh(k * L)
    else:
        raise ValueError(f"Régime inconnu : {regime!r}")
    return Normalisation(a, psi0)


def box_eigenfunction(k: float, L: float, parity: str,
                      regime: str = "scattering") -> Callable[[float], float]:
    """ψ normalisée sur [−L, L], nulle au-delà : A·sin(k(|x| − L)), A·sin(kx) ou A·sinh(k(|x| − L))."""
    a, _ = normalization_and_origin(k, L, parity, regime)

    def psi(x: float) -> float:
        if abs(x) > L:
            return 0.0
        if regime == "bound":
            return a * math.sinh(k * (abs(x) - L))
        if parity == "even":
            return a * math.sin(k * (abs(x) - L))
        return a * math.sin(k * x)
    return psi


def ring_bound_state(s: float, L: float) -> tuple[float, Callable[[float], float]]:
    """État lié normalisé sur l'anneau : A·cosh(k(L − |x|)), |A|⁻² = L + sinh(2kL)/(2k)."""
    k, energie = finite_box_bound_state(s, L, "periodic")
    a = 1.0 / math.sqrt(L + math.sinh(2 * k * L) / (2 * k))

    def psi(x: float) -> float:
        return a * math.cosh(k * (L - abs(x))) if abs(x) <= L else 0.0
    return energie, psi


# ---------------------------------------------------------------------------
# Formules multidimensionnelles
# ---------------------------------------------------------------------------

def _positifs(**params) -> None:
    for nom, valeur in params.items():
        if not valeur > 0:
            raise ValueError(f"Paramètre {nom} non positif : {valeur}")


def bound_state_count_2d(tau: float) -> float:
    """N₂D = (1/π)√(2τ/π), calculé sous la forme √(2τ/π³)."""
    _positifs(tau=tau)
    return math.sqrt(2 * tau / math.pi ** 3)


def bound_state_count_3d(tau: float, width: float) -> float:
    """N₃D = (1/π)√(3τ/(2πεw))."""
    _positifs(tau=tau, width=width)
    return math.sqrt(3 * tau / (2 * math.pi ** 3 * width))


def bare_energy_2d(tau: float, width: float) -> float:
    """E₂D nue = −(1/(2εw²))·e^(−2π/τ)."""
    _positifs(tau=tau, width=width)
    return -math.exp(-2 * math.pi / tau) / (2 * width * width)


def renormalized_transparency(tau: float, sigma: float, omega: float) -> float:
    """1/τ_R = 1/τ + (1/4π)·ln(σ²/ω²) ; τ_R = τ pour σ = ω."""
    _positifs(tau=tau, sigma=sigma, omega=omega)
    if sigma == omega:
        return tau
    inverse = 1 / tau + math.log(sigma * sigma / (omega * omega)) / (4 * math.pi)
    if inverse == 0:
        raise ValueError("Transparence renormalisée infinie (1/τ_R = 0)")
    return 1 / inverse


def renormalized_energy_2d(tau_r: float, omega: float) -> float:
    """E₂D = −ω²·e^(−4π/τ_R)."""
    _positifs(tau_r=tau_r, omega=omega)
    return -omega * omega * math.exp(-4 * math.pi / tau_r)


FORMULES = {
    "n2d":       bound_state_count_2d,
    "n3d":       bound_state_count_3d,
    "e2d_bare":  bare_energy_2d,
    "tau_r":     renormalized_transparency,
    "e2d_ren":   renormalized_energy_2d,
}


def multidim_formulas(query: str, **params) -> float:
    """
    Évalue une formule par son nom (clés de FORMULES).

    Exemple : multidim_formulas("e2d_ren", tau_r=4 * math.pi, omega=1.0)
    """
    if query not in FORMULES:
        raise ValueError(f"Formule inconnue : {query!r} (attendu : {sorted(FORMULES)})")
    return FORMULES[query](**params)
