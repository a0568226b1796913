"""
Module distributions.py — Distributions généralisées vues à travers une famille test finie.

Une ultrafonction u (GridFunction ou SymbolicState) est bornée si toutes ses
intégrales ∮u·φ° sont finies, et deux ultrafonctions sont équivalentes si
leurs intégrales ne diffèrent que d'un infinitésimal. Les verdicts sont
relatifs à la famille fournie : une famille finie sous-approche 𝒟(Ω).

Une seule delta est modélisée : l'ultrafonction canonique χ₀/d(0).
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from analytic_oracle import ring_bound_state
from euclidean_scalar import EuclideanScalar, as_scalar, classify, format_scalar, standard_part
from grid_calculus import Grid, GridFunction, SymbolicState, integrate_product, laplacian, make_grid
from operators import DeltaAt, assemble_hamiltonian, eigendecompose


class DistributionNonBorneeError(ValueError):
    """Ultrafonction dont une intégrale contre la famille test est infinie."""


class ConnectionResidual(NamedTuple):
    residual: float          # max_φ |⟨Hψ − Eψ, φ°⟩|
    mismatch: float | None   # max_φ |⟨ψ, φ°⟩ − ⟨w°, φ°⟩| si une solution de référence w est fournie


# ---------------------------------------------------------------------------
# Fonctions test
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TestFunction:
    """Fonction lisse à support compact [support[0], support[1]], avec sa dérivée seconde."""

    __test__ = False

    name: str
    f: Callable[[float], float]
    d2f: Callable[[float], float]
    support: tuple[float, float]

    def check_support(self, g: Grid) -> None:
        lo, hi = self.support
        borne = g.halfwidth
        if not (-borne < lo and hi < borne):
            raise ValueError(
                f"Support de {self.name} [{lo}, {hi}] hors de la boîte de la grille (±{borne})"
            )

    def values(self, g: Grid) -> np.ndarray:
        self.check_support(g)
        return np.array([self.f(float(x)) for x in g.points])

    def second_derivative(self, g: Grid) -> np.ndarray:
        self.check_support(g)
        return np.array([self.d2f(float(x)) for x in g.points])


def bump(center: float = 0.0, radius: float = 1.0, amplitude: float = 1.0,
         name: str | None = None) -> TestFunction:
    """
    Mollificateur A·exp(−1/(1 − r²)), r = (x − c)/R, nul pour |r| ≥ 1.
    Dérivée seconde : φ·(6r⁴ − 2) / (R²(1 − r²)⁴).
    """
    if radius <= 0:
        raise ValueError(f"Rayon non positif : {radius}")

    def f(x: float) -> float:
        r = (x - center) / radius
        u = 1.0 - r * r
        return amplitude * math.exp(-1.0 / u) if u > 0 else 0.0

    def d2f(x: float) -> float:
        r = (x - center) / radius
        u = 1.0 - r * r
        if u <= 0:
            return 0.0
        return amplitude * math.exp(-1.0 / u) * (6 * r ** 4 - 2) / (radius * radius * u ** 4)

    return TestFunction(name or f"bump({center}, {radius})", f, d2f,
                        (center - radius, center + radius))


def default_family(g: Grid) -> list[TestFunction]:
    """Cinq bosses dans la moitié centrale de la boîte, dont deux centrées en 0."""
    b = g.halfwidth / 2
    return [
        bump(0.0, b, 1.0, "phi_0"),
        bump(0.0, b / 4, 2.0, "phi_1"),
        bump(b / 3, b / 2, 1.0, "phi_2"),
        bump(-b / 3, b / 2, -0.5, "phi_3"),
        bump(b / 5, b / 4, 1.5, "phi_4"),
    ]


# ---------------------------------------------------------------------------
# Intégrales contre la famille
# ---------------------------------------------------------------------------

def pairing(u, phi: TestFunction):
    """
    ∮u·φ° : flottant (ou complexe) pour une GridFunction, euclidien pour un SymbolicState.
    Le produit u_j·d_j est formé en premier, ce qui rend ∮δ_a·φ° = φ(a) exact
    dès que (1/h)·h = 1 en flottant.

    Raises:
        ValueError : support de φ hors de la grille.
    """
    if isinstance(u, SymbolicState):
        return u.pairing(phi.values(u.grid))
    if isinstance(u, GridFunction):
        return integrate_product(GridFunction(u.grid, phi.values(u.grid)), u)
    raise TypeError(f"Ultrafonction attendue, reçu {type(u).__name__}")


def _famille(F) -> list[TestFunction]:
    return [F] if isinstance(F, TestFunction) else list(F)


def is_bounded(u, F: "Iterable[TestFunction] | TestFunction") -> bool:
    """Vrai ssi toutes les intégrales ∮u·φ° sont finies."""
    return all(classify(as_scalar(_reel(pairing(u, phi)))).finite for phi in _famille(F))


def associate(u, phi: TestFunction) -> float:
    """
    st(∮u·φ°), image de [u] dans les distributions.

    Raises:
        DistributionNonBorneeError : intégrale infinie.
    """
    valeur = pairing(u, phi)
    if not classify(as_scalar(_reel(valeur))).finite:
        raise DistributionNonBorneeError(
            f"∮u·{phi.name} = {_texte(valeur)} est infini : u n'est pas bornée"
        )
    return standard_part(_reel(valeur))


def equivalent(u, v, F: "Iterable[TestFunction] | TestFunction") -> bool:
    """Vrai ssi ∮(u − v)·φ° est infinitésimal pour toute φ de F."""
    difference = u - v
    return all(classify(as_scalar(_reel(pairing(difference, phi)))).infinitesimal
               for phi in _famille(F))


def _reel(valeur):
    if isinstance(valeur, complex):
        if valeur.imag != 0:
            raise ValueError(f"Intégrale complexe non classable : {valeur}")
        return valeur.real
    return valeur


def _texte(valeur) -> str:
    return format_scalar(valeur) if isinstance(valeur, EuclideanScalar) else repr(valeur)


def residual_records(u, F: Iterable[TestFunction]) -> list[dict]:
    """Enregistrements JSON {phi_id, pairing, classification} par fonction test."""
    enregistrements = []
    for phi in F:
        valeur = _reel(pairing(u, phi))
        enregistrements.append({
            "phi_id":         phi.name,
            "pairing":        _texte(valeur) if isinstance(valeur, EuclideanScalar) else float(valeur),
            "classification": classify(as_scalar(valeur)).kind,
        })
    return enregistrements


# ---------------------------------------------------------------------------
# Connexion avec la solution standard
# ---------------------------------------------------------------------------

def standard_connection_residual(psi: GridFunction, energy: float, tau: float,
                                 F: Iterable[TestFunction], variant: str = "compact",
                                 reference: Callable[[float], float] | None = None) -> ConnectionResidual:
    """
    Forme faible de −½Δψ + τδ₀ψ = Eψ contre la famille, et écart à une solution de référence.

    Args:
        psi       : fonction propre de grille, normée.
        reference : solution standard w normée (facultative) ; son signe est
                    aligné sur celui de ψ avant comparaison.
    """
    g = psi.grid
    a = g.origin
    valeurs = np.asarray(psi.values, dtype=float)
    hpsi = laplacian(g, variant).scaled(-0.5).apply(valeurs)
    hpsi[a] += tau / g.weights[a] * valeurs[a]
    reste = GridFunction(g, hpsi - energy * valeurs)
    F = list(F)
    residu = max(abs(pairing(reste, phi)) for phi in F)

    ecart = None
    if reference is not None:
        w = GridFunction(g, np.array([reference(float(x)) for x in g.points]))
        signe = 1.0 if integrate_product(psi, w) >= 0 else -1.0
        ecart = max(abs(pairing(psi, phi) - signe * pairing(w, phi)) for phi in F)
    return ConnectionResidual(float(residu), None if ecart is None else float(ecart))


def connection_refinement_trend(tau: float, stages: Iterable[tuple[int, float]],
                                F: Iterable[TestFunction] | None = None,
                                variant: str = "compact") -> list[dict]:
    """
    Par étage (n, h) : état fondamental de −½Δ + τδ₀ sur l'anneau de circonférence n·h,
    comparé à la solution standard sur le même anneau (état lié cosh si τ < 0,
    constante si τ = 0).

    Returns:
        Liste de dicts {n, h, energy, residual, mismatch}.
    """
    if tau > 0:
        raise ValueError("Seuls τ ≤ 0 ont un état fondamental de référence sur l'anneau")
    stages = list(stages)
    grilles = [make_grid(n, h) for n, h in stages]
    if F is None:
        F = default_family(min(grilles, key=lambda g: g.halfwidth))
    F = list(F)
    tendance = []
    for g in grilles:
        L = g.circumference / 2
        dec = eigendecompose(assemble_hamiltonian(g, variant, DeltaAt(g.origin, tau)))
        if tau < 0:
            _, reference = ring_bound_state(-tau, L)
        else:
            constante = 1.0 / math.sqrt(2 * L)

            def reference(x, c=constante):
                return c
        r = standard_connection_residual(dec.eigenvector(0), float(dec.eigenvalues[0]), tau, F,
                                         variant, reference)
        tendance.append({
            "n":        g.n,
            "h":        g.h,
            "energy":   float(dec.eigenvalues[0]),
            "residual": r.residual,
            "mismatch": r.mismatch,
        })
    return tendance
