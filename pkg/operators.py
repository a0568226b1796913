"""
Module operators.py — Hamiltoniens à potentiels singuliers et mécanique quantique à étage fini.

H = −½·laplacien + diag(V) sur une grille périodique, où V combine :
    Sampled(f)          valeurs f(x_j) (ou tableau déjà échantillonné)
    DeltaAt(a, τ)       τ/d(a) sur la seule entrée diagonale (a, a)
    Indicator(E, Ω)     Ω sur les points vérifiant le prédicat E
    Sum([...])          somme des termes, dans l'ordre

Le spectre est calculé par solveur_spectral sur B = W^{1/2} H W^{−1/2}
(tridiagonal cyclique si possible, Jacobi sinon) ; les vecteurs propres
rendus sont W-orthonormés. Convention : H = −½D² + τδ₀, borne E ≥ τ/d(0).
"""

import math
import os
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from euclidean_scalar import EuclideanScalar, classify
from grid_calculus import (
    BandedOperator,
    EtatNonSupporteError,
    GrilleInvalideError,
    Grid,
    GridFunction,
    SymbolicState,
    VARIANTES_LAPLACIEN,
    embed,
    laplacian,
    make_grid,
)
from solveur_spectral import (
    ConvergenceError,
    eigh_jacobi,
    eigh_tridiagonal,
    residu_max,
    valeurs_propres_affinees,
)

GRAINE = int(os.getenv("HFQM_SEED", "12345"))

TOL_HERMITIEN = 1e-12
TOL_NORME = 1e-10
TOL_BORNE = 1e-9
TOL_PARITE = 1e-8
TOL_RESIDU = 1e-8         # ‖Bv − λv‖ maximal, relatif à max|λ|, sur le chemin dense
SEUIL_LIE = 1e-6          # énergie en dessous de laquelle un état est compté lié
HAUTEUR_MURS = 1e6
N_MAX_2D = 41
SEUIL_CROISSANCE = 0.5    # exposant de croissance de l'énergie au-delà duquel l'état est idéal


class NonHermitienError(ValueError):
    """Matrice non W-hermitienne ; asymetrie_max porte le plus grand écart mesuré."""

    def __init__(self, asymetrie_max: float):
        self.asymetrie_max = asymetrie_max
        super().__init__(f"Hamiltonien non W-hermitien : asymétrie max {asymetrie_max:.3e}")


class EtatNonNormaliseError(ValueError):
    """État dont la norme s'écarte de 1 au-delà de TOL_NORME."""


# ===========================================================================
# Potentiels
# ===========================================================================

class Potential:
    """Base des potentiels : diagonal(g) rend les valeurs V_j sur la grille."""

    def diagonal(self, g: Grid) -> np.ndarray:
        raise NotImplementedError

    def deltas(self) -> list["DeltaAt"]:
        return []

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Sampled(Potential):
    values: "Callable[[float], float] | np.ndarray"
    label: str = "sampled"

    def diagonal(self, g: Grid) -> np.ndarray:
        if callable(self.values):
            return np.array(embed(self.values, g).values, dtype=float)
        valeurs = np.asarray(self.values, dtype=float)
        if valeurs.shape != (g.n,):
            raise GrilleInvalideError(f"Potentiel échantillonné de forme {valeurs.shape}, attendu ({g.n},)")
        if not np.all(np.isfinite(valeurs)):
            raise ValueError(f"Potentiel {self.label!r} non fini")
        return valeurs.copy()

    def describe(self) -> dict:
        return {"type": "sampled", "label": self.label}


@dataclass(frozen=True)
class DeltaAt(Potential):
    index: int
    strength: float

    def _verifier(self, g: Grid) -> None:
        if not (isinstance(self.index, (int, np.integer)) and 0 <= self.index < g.n):
            raise GrilleInvalideError(f"Indice de delta invalide : {self.index!r} (n={g.n})")
        if isinstance(self.strength, EuclideanScalar):
            raise ValueError("Intensité symbolique : réservée à classify_state et aux distributions")
        if not math.isfinite(float(self.strength)):
            raise ValueError(f"Intensité de delta non finie : {self.strength}")

    def diagonal(self, g: Grid) -> np.ndarray:
        self._verifier(g)
        valeurs = np.zeros(g.n)
        valeurs[self.index] = float(self.strength) / g.weights[self.index]
        return valeurs

    def deltas(self) -> list["DeltaAt"]:
        return [self]

    def describe(self) -> dict:
        return {"type": "delta", "index": int(self.index), "strength": float(self.strength)}


@dataclass(frozen=True)
class Indicator(Potential):
    predicate: Callable[[float], bool]
    height: float
    label: str = "indicator"

    def diagonal(self, g: Grid) -> np.ndarray:
        if not math.isfinite(float(self.height)):
            raise ValueError(f"Hauteur d'indicatrice non finie : {self.height}")
        masque = np.array([bool(self.predicate(float(x))) for x in g.points])
        return np.where(masque, float(self.height), 0.0)

    def describe(self) -> dict:
        return {"type": "indicator", "label": self.label, "height": float(self.height)}


@dataclass(frozen=True)
class Sum(Potential):
    terms: tuple = ()

    def diagonal(self, g: Grid) -> np.ndarray:
        valeurs = np.zeros(g.n)
        for terme in self.terms:
            valeurs = valeurs + terme.diagonal(g)
        return valeurs

    def deltas(self) -> list[DeltaAt]:
        return [d for terme in self.terms for d in terme.deltas()]

    def describe(self) -> dict:
        return {"type": "sum", "terms": [t.describe() for t in self.terms]}


def square_well_potential(g: Grid, half_width: float, height: float) -> Sampled:
    """
    Puits (ou barrière) carré de demi-largeur w et hauteur V₀, moyenné par cellule :
    V_j = V₀·|[x_j − h/2, x_j + h/2] ∩ [−w, w]| / h, d'où Σ V_j h = 2wV₀.

    Raises:
        GrilleInvalideError : w < h (largeur sous la résolution de la grille) ou w ≥ demi-largeur.
    """
    if half_width < g.h:
        raise GrilleInvalideError(f"Demi-largeur {half_width} sous la résolution h = {g.h}")
    if half_width >= g.halfwidth:
        raise GrilleInvalideError(f"Demi-largeur {half_width} hors de la grille ({g.halfwidth})")
    gauche = np.maximum(g.points - g.h / 2, -half_width)
    droite = np.minimum(g.points + g.h / 2, half_width)
    recouvrement = np.clip(droite - gauche, 0.0, None)
    return Sampled(height * recouvrement / g.h, label=f"square_well(w={half_width}, V0={height})")


def box_walls(L: float, height: float = HAUTEUR_MURS) -> Indicator:
    """Murs |x| ≥ L : la boîte de Dirichlet [−L, L] réalisée sur la grille périodique."""
    if L <= 0:
        raise ValueError(f"Demi-longueur de boîte non positive : {L}")
    seuil = L * (1 - 1e-12)
    return Indicator(lambda x: abs(x) >= seuil, height, label=f"walls(L={L})")


def potential_from_config(spec, g: Grid) -> Potential:
    """
    Construit un potentiel depuis l'arbre JSON de configuration.

    Formes acceptées (une liste est lue comme une somme) :
        {"type": "none"}
        {"type": "delta", "strength": τ, "position": x}            (x = 0 par défaut)
        {"type": "indicator", "height": Ω, "points": [x, ...]}     ou "halfwidth": r
        {"type": "square_well", "half_width": w, "height": V₀}     ou "tau": τ
        {"type": "walls", "L": L, "height": Ω}

    Raises:
        KeyError   : clé obligatoire absente (message = chemin de la clé).
        ValueError : type inconnu ou valeur invalide.
    """
    if spec is None:
        return Sum(())
    if isinstance(spec, list):
        return Sum(tuple(potential_from_config(s, g) for s in spec))
    genre = spec.get("type", "none")
    if genre == "none":
        return Sum(())
    if genre == "delta":
        if "strength" not in spec:
            raise KeyError("potential.strength")
        return DeltaAt(g.index_of(float(spec.get("position", 0.0))), float(spec["strength"]))
    if genre == "indicator":
        if "height" not in spec:
            raise KeyError("potential.height")
        if "points" in spec:
            indices = {g.index_of(float(x)) for x in spec["points"]}
            pts = {float(g.points[j]) for j in indices}
            return Indicator(lambda x: x in pts, float(spec["height"]), label=f"points{sorted(pts)}")
        rayon = float(spec.get("halfwidth", 0.0))
        return Indicator(lambda x: abs(x) <= rayon + 1e-12, float(spec["height"]),
                         label=f"|x| ≤ {rayon}")
    if genre == "square_well":
        if "half_width" not in spec:
            raise KeyError("potential.half_width")
        w = float(spec["half_width"])
        if "height" in spec:
            hauteur = float(spec["height"])
        elif "tau" in spec:
            hauteur = float(spec["tau"]) / (2 * w)
        else:
            raise KeyError("potential.height")
        return square_well_potential(g, w, hauteur)
    if genre == "walls":
        if "L" not in spec:
            raise KeyError("potential.L")
        return box_walls(float(spec["L"]), float(spec.get("height", HAUTEUR_MURS)))
    raise ValueError(f"Type de potentiel inconnu : {genre!r}")


def _en_potentiel(V) -> Potential:
    if V is None:
        return Sum(())
    if isinstance(V, Potential):
        return V
    if isinstance(V, (list, tuple)):
        return Sum(tuple(_en_potentiel(v) for v in V))
    raise TypeError(f"Potentiel attendu, reçu {type(V).__name__}")


# ===========================================================================
# Hamiltonien
# ===========================================================================

@dataclass(frozen=True, eq=False)
class Grid2D:
    """Grille produit n×n (indice plat i·n + j), poids d = h²."""

    base: Grid

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def h(self) -> float:
        return self.base.h

    @property
    def size(self) -> int:
        return self.base.n ** 2

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, self.base.h * self.base.h)

    @property
    def origin(self) -> int:
        return self.base.origin * self.base.n + self.base.origin

    def to_metadata(self) -> dict:
        return {"n": self.n, "h": self.h, "dim": 2, "weight": self.h * self.h}


def make_grid_2d(n: int, h: float) -> Grid2D:
    if n > N_MAX_2D:
        raise GrilleInvalideError(f"Grille 2D limitée à n ≤ {N_MAX_2D} (reçu {n})")
    return Grid2D(make_grid(n, h))


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """H sur une grille 1D (opérateur bandé) ou 2D (matrice dense)."""

    grid: "Grid | Grid2D"
    variant: str
    potential: Potential
    operator: "BandedOperator | None" = None
    dense: "np.ndarray | None" = field(default=None, repr=False)
    kinetic: bool = True

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def size(self) -> int:
        return self.grid.size if isinstance(self.grid, Grid2D) else self.grid.n

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.operator is not None:
            return self.operator.apply(np.asarray(values))
        return self.dense @ np.asarray(values)

    def to_dense(self) -> np.ndarray:
        return self.operator.to_dense() if self.operator is not None else self.dense.copy()

    def hermitian_defect(self) -> float:
        """max |d_a H_ab − conj(d_b H_ba)|."""
        if self.operator is not None:
            return self.operator.weighted_symmetry_defect()
        pondere = self.weights[:, None] * self.dense
        return float(np.max(np.abs(pondere - np.conj(pondere.T))))

    def describe(self) -> dict:
        return {
            **self.grid.to_metadata(),
            "variant":   self.variant,
            "kinetic":   self.kinetic,
            "potential": self.potential.describe(),
        }


def assemble_hamiltonian(g: Grid, variant: str = "compact", V=None,
                         kinetic: bool = True) -> Hamiltonian:
    """
    H = −½·laplacien(variant) + diag(V).

    Args:
        kinetic : False ne garde que la partie diagonale (tests d'évolution).

    Raises:
        GrilleInvalideError : indice de delta invalide.
        ValueError          : variante inconnue, intensité NaN ou symbolique.
    """
    if variant not in VARIANTES_LAPLACIEN:
        raise ValueError(f"Variante de laplacien inconnue : {variant!r}")
    potentiel = _en_potentiel(V)
    diagonale = potentiel.diagonal(g)
    if kinetic:
        cinetique = laplacian(g, variant).scaled(-0.5)
    else:
        cinetique = BandedOperator(g, {0: np.zeros(g.n)}, "0")
    operateur = cinetique.plus_diagonal(diagonale, label=f"H[{variant}]")
    return Hamiltonian(g, variant, potentiel, operator=operateur, kinetic=kinetic)


def assemble_hamiltonian_2d(g2: Grid2D, variant: str = "compact", tau: float = 0.0) -> Hamiltonian:
    """
    H = −½(Δ⊗I + I⊗Δ) + τ/d(0)·χ₀ en dense, d(0) = h².

    Raises:
        ValueError : τ non fini.
    """
    if not math.isfinite(tau):
        raise ValueError(f"Intensité de delta non finie : {tau}")
    lap = laplacian(g2.base, variant).to_dense()
    identite = np.eye(g2.n)
    dense = -0.5 * (np.kron(lap, identite) + np.kron(identite, lap))
    dense[g2.origin, g2.origin] += tau / (g2.h * g2.h)
    potentiel = DeltaAt(g2.origin, tau) if tau else Sum(())
    return Hamiltonian(g2, variant, potentiel, dense=dense)


# ===========================================================================
# Décomposition spectrale
# ===========================================================================

@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Valeurs propres croissantes et vecteurs propres W-orthonormés (colonnes)."""

    hamiltonian: Hamiltonian
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)

    @property
    def grid(self):
        return self.hamiltonian.grid

    @property
    def weights(self) -> np.ndarray:
        return self.hamiltonian.weights

    def eigenvector(self, j: int):
        """j-ième vecteur propre (GridFunction en 1D, tableau en 2D)."""
        v = self.vectors[:, j]
        return GridFunction(self.grid, v) if isinstance(self.grid, Grid) else v.copy()

    @property
    def eigenvectors(self) -> list:
        return [self.eigenvector(j) for j in range(len(self.eigenvalues))]

    def coefficients(self, psi) -> np.ndarray:
        """⟨ψ, v_j⟩ = Σ ψ·v_j·d pour tout j (v réels)."""
        return (_valeurs(psi) * self.weights) @ self.vectors

    def orthonormality_defect(self) -> float:
        gram = self.vectors.T @ (self.weights[:, None] * self.vectors)
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))

    def residuals(self) -> np.ndarray:
        """‖H v_j − λ_j v_j‖ (norme euclidienne) pour chaque j."""
        hv = np.column_stack([self.hamiltonian.apply(self.vectors[:, j])
                              for j in range(self.vectors.shape[1])])
        return np.linalg.norm(hv - self.vectors * self.eigenvalues[None, :], axis=0)

    def bound_state_count(self, seuil: float = SEUIL_LIE) -> int:
        return int(np.sum(self.eigenvalues < -seuil))


def _valeurs(psi) -> np.ndarray:
    return psi.values if isinstance(psi, GridFunction) else np.asarray(psi)


def _matrice_tridiagonale(operateur):
    bandes = operateur.bands
    zeros = np.zeros(operateur.grid.n)
    diag = np.asarray(bandes.get(0, zeros), dtype=float)
    inferieure = np.asarray(bandes.get(-1, zeros), dtype=float)
    # A[i+1, i] = bandes[-1][i+1] ; coin A[0, n−1] = bandes[-1][0]
    return diag, inferieure[1:], float(inferieure[0])


def _verifier_hermitien(H: Hamiltonian) -> None:
    defaut = H.hermitian_defect()
    echelle = max(float(np.max(np.abs(H.weights))), 1e-300)
    if H.operator is not None:
        echelle *= max(max((float(np.max(np.abs(b))) for b in H.operator.bands.values()), default=0.0), 1.0)
        if not H.operator.is_real:
            raise EtatNonSupporteError("Hamiltonien complexe : seul le cas réel est diagonalisé")
    else:
        echelle *= max(float(np.max(np.abs(H.dense))), 1.0)
    if defaut > TOL_HERMITIEN * echelle:
        raise NonHermitienError(defaut)


def _forme_tridiagonale(H: Hamiltonian):
    """(diag, sous, coin) de B = W^{1/2} H W^{−1/2} si H est bandé de largeur ≤ 1, None sinon."""
    op = H.operator
    if op is None or op.bandwidth > 1:
        return None
    racines = np.sqrt(H.weights)
    diag, sous, coin = _matrice_tridiagonale(op)
    return diag, sous * (racines[1:] / racines[:-1]), coin * racines[0] / racines[-1]


def eigendecompose(H: Hamiltonian, graine: int = GRAINE) -> SpectralDecomposition:
    """
    Spectre complet de H par symétrisation B = W^{1/2} H W^{−1/2}.

    Chemin tridiagonal (bisection de Sturm, itération inverse, Rayleigh–Ritz)
    si H est réel de largeur de bande ≤ 1, Jacobi cyclique dense sinon.

    Raises:
        NonHermitienError : d_a H_ab ≠ conj(d_b H_ba) au-delà de TOL_HERMITIEN·échelle.
        ConvergenceError  : solveur non convergé, ou résidu dense au-delà de TOL_RESIDU.
    """
    _verifier_hermitien(H)
    racines = np.sqrt(H.weights)
    op = H.operator
    if op is not None and op.bandwidth == 0:
        diag = np.asarray(op.bands.get(0, np.zeros(H.size)), dtype=float)
        ordre = np.argsort(diag, kind="stable")
        valeurs = diag[ordre]
        vecteurs_b = np.eye(H.size)[:, ordre]
    elif (tri := _forme_tridiagonale(H)) is not None:
        valeurs, vecteurs_b = eigh_tridiagonal(*tri, graine=graine)
    else:
        b = H.to_dense() * (racines[:, None] / racines[None, :])
        b = 0.5 * (b + b.T)
        valeurs, vecteurs_b = eigh_jacobi(b)
        residu = residu_max(b, valeurs, vecteurs_b)
        if residu > TOL_RESIDU * max(float(np.max(np.abs(valeurs))), 1.0):
            raise ConvergenceError(f"Jacobi : résidu {residu:.3e} au-delà de {TOL_RESIDU:.0e}·max|λ|")
    return SpectralDecomposition(H, valeurs, vecteurs_b / racines[:, None])


def lowest_eigenvalues(H: Hamiltonian, count: int = 1) -> np.ndarray:
    """Les count plus petites valeurs propres (bisection puis quotient de Rayleigh sur le chemin tridiagonal)."""
    _verifier_hermitien(H)
    tri = _forme_tridiagonale(H)
    if tri is None:
        return eigendecompose(H).eigenvalues[:count]
    return valeurs_propres_affinees(*tri, rangs=np.arange(min(count, H.size)))


# ===========================================================================
# Évolution et mesure
# ===========================================================================

def evolve(dec: SpectralDecomposition, psi, t: float):
    """ψ(t) = Σ_j e^{−iλ_j t}⟨ψ, v_j⟩ v_j."""
    if t == 0:
        return psi
    c = dec.coefficients(psi)
    valeurs = dec.vectors @ (np.exp(-1j * dec.eigenvalues * t) * c)
    if isinstance(psi, GridFunction):
        return GridFunction(psi.grid, valeurs)
    return valeurs


def _norme(psi, poids: np.ndarray) -> float:
    v = _valeurs(psi)
    return math.sqrt(math.fsum(np.abs(v) ** 2 * poids))


def energy_expectation(H: Hamiltonian, psi) -> float:
    """⟨Hψ, ψ⟩ / ⟨ψ, ψ⟩ (partie réelle)."""
    v = _valeurs(psi)
    num = np.sum(H.apply(v) * np.conj(v) * H.weights)
    den = math.fsum(np.abs(v) ** 2 * H.weights)
    return float(np.real(num)) / den


def measurement_probabilities(psi, dec: SpectralDecomposition) -> list[tuple[float, float]]:
    """
    Issues d'une mesure d'énergie : (st(λ_j), |⟨ψ, v_j⟩|²).

    Raises:
        EtatNonNormaliseError : |‖ψ‖ − 1| > TOL_NORME.
    """
    n = _norme(psi, dec.weights)
    if abs(n - 1.0) > TOL_NORME:
        raise EtatNonNormaliseError(f"‖ψ‖ = {n!r} (écart {abs(n - 1.0):.2e} > {TOL_NORME:.0e})")
    p = np.abs(dec.coefficients(psi)) ** 2
    return [(float(lam), float(pj)) for lam, pj in zip(dec.eigenvalues, p)]


def position_probability(psi, a: int):
    """|ψ(a)|²·d(a) ; euclidien pour un SymbolicState (d(a) = ε)."""
    if isinstance(psi, SymbolicState):
        return psi.position_probability(a)
    return float(abs(psi.values[a]) ** 2 * psi.grid.weights[a])


# ===========================================================================
# États physiques et idéaux
# ===========================================================================

class StateClass(NamedTuple):
    tag: str                 # 'Physical' | 'Ideal'
    witness: object          # EuclideanScalar


@dataclass(frozen=True)
class HamiltonianDescription:
    """Ce que classify_state doit connaître de H, sans l'assembler."""

    variant: str = "compact"
    potential: "Potential | None" = None
    stages: tuple = ()       # ((n, h), ...) pour le mode flottant par raffinement


def _termes(potentiel: Potential) -> list[Potential]:
    if isinstance(potentiel, Sum):
        return [t for terme in potentiel.terms for t in _termes(terme)]
    return [potentiel]


def _energie_symbolique(psi: SymbolicState, desc: HamiltonianDescription) -> EuclideanScalar:
    """⟨Hψ, ψ⟩ : les deltas passent par τ·ψ(a)², le reste par la forme diagonale."""
    energie = psi.kinetic(desc.variant)
    termes = _termes(_en_potentiel(desc.potential))
    for d in termes:
        if isinstance(d, DeltaAt):
            energie = energie + psi.delta_form(d.index, d.strength)
    reste = [t for t in termes if not isinstance(t, DeltaAt)]
    if reste:
        energie = energie + psi.diagonal_form(Sum(tuple(reste)).diagonal(psi.grid))
    return energie


def _echantillonner(f: Callable[[float], float], g: Grid) -> GridFunction:
    """f aux points de grille, les points singuliers (division par zéro, non fini) mis à 0."""
    valeurs = np.zeros(g.n)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for j, x in enumerate(g.points):
            try:
                y = float(f(float(x)))
            except (ZeroDivisionError, OverflowError, ValueError):
                continue
            valeurs[j] = y if math.isfinite(y) else 0.0
    return GridFunction(g, valeurs)


def classify_state(psi, description: "HamiltonianDescription | Hamiltonian | None" = None) -> StateClass:
    """
    État physique (énergie finie) ou idéal (énergie infinie).

    - SymbolicState : ⟨Hψ, ψ⟩ calculé en euclidien (d(a) = ε) ;
    - GridFunction réelle : plongée f°, énergie d'étage promue en ε⁰ ;
    - fonction x ↦ ψ(x) : énergie de Rayleigh sur les étages de la description ;
      l'exposant p de croissance E ∝ h^{−p} est traduit en ε^{−round(p)}
      (un pas de raffinement = une puissance de ε).

    Raises:
        EtatNonSupporteError : état hors de l'algèbre supportée.
    """
    if description is None:
        description = HamiltonianDescription()
    if isinstance(description, Hamiltonian):
        description = HamiltonianDescription(description.variant, description.potential)

    if isinstance(psi, GridFunction):
        if psi.values.dtype.kind != "f":
            raise EtatNonSupporteError("Fonction de grille complexe ou euclidienne : non supportée")
        psi = SymbolicState.embedded(psi)
    if isinstance(psi, SymbolicState):
        energie = _energie_symbolique(psi, description)
        norme2 = psi.norm2()
        if not norme2.is_zero:
            energie = energie / norme2
        tag = "Physical" if classify(energie).finite else "Ideal"
        return StateClass(tag, energie)

    if callable(psi):
        if len(description.stages) < 2:
            raise EtatNonSupporteError("Mode flottant : au moins deux étages requis pour le raffinement")
        pas, energies = [], []
        for n, h in description.stages:
            g = make_grid(n, h)
            u = _echantillonner(psi, g)
            H = assemble_hamiltonian(g, description.variant, description.potential)
            energies.append(energy_expectation(H, u))
            pas.append(h)
        x = np.log(1.0 / np.asarray(pas))
        y = np.log(np.maximum(np.abs(energies), 1e-300))
        p = float(np.polyfit(x, y, 1)[0])
        ideal = p >= SEUIL_CROISSANCE
        k = max(1, int(round(p))) if ideal else 0
        temoin = EuclideanScalar({-k: energies[-1] * pas[-1] ** k})
        return StateClass("Ideal" if ideal else "Physical", temoin)

    raise EtatNonSupporteError(f"État de type {type(psi).__name__} hors de l'algèbre supportée")


# ===========================================================================
# Bornes, parité, entrelacement, identités ponctuelles
# ===========================================================================

def spectral_bound_check(dec: SpectralDecomposition, tau: float, g: Grid) -> dict:
    """
    Borne de Rayleigh E ≥ τ·u(0)² ≥ τ/d(0) (convention −½D²) :
    τ ≥ 0 ⇒ λ_min ≥ −TOL_BORNE, τ < 0 ⇒ λ_min ≥ τ/d(0) − TOL_BORNE.
    """
    min_eig = float(dec.eigenvalues[0])
    borne = 0.0 if tau >= 0 else tau / g.weights[g.origin]
    return {"min_eig": min_eig, "bound": float(borne), "pass": bool(min_eig >= borne - TOL_BORNE)}


def parity_of(v, tol: float = TOL_PARITE) -> str:
    """'even', 'odd' ou 'none' par rapport à l'origine (grille symétrique)."""
    valeurs = _valeurs(v)
    echelle = max(float(np.max(np.abs(valeurs))), 1e-300)
    miroir = valeurs[::-1]
    if np.max(np.abs(valeurs - miroir)) <= tol * echelle:
        return "even"
    if np.max(np.abs(valeurs + miroir)) <= tol * echelle:
        return "odd"
    return "none"


def split_by_parity(dec: SpectralDecomposition, count: int | None = None,
                    tol: float = TOL_PARITE) -> dict:
    """Valeurs propres réparties par parité du vecteur propre (les `count` premières par classe)."""
    classes: dict[str, list[float]] = {"even": [], "odd": [], "none": []}
    for j, lam in enumerate(dec.eigenvalues):
        classes[parity_of(dec.vectors[:, j], tol)].append(float(lam))
    if count is not None:
        classes = {k: v[:count] for k, v in classes.items()}
    return classes


def interlacing_check(H0: Hamiltonian, H1: Hamiltonian, tol: float = 1e-9) -> dict:
    """
    Entrelacement des spectres de H0 et H1 = H0 + ρ·χ_a (perturbation diagonale de rang un).

    ρ > 0 : λ_i ≤ μ_i ≤ λ_{i+1} ; ρ < 0 : μ_i ≤ λ_i ≤ μ_{i+1}.
    """
    ecart = H1.to_dense() - H0.to_dense()
    i, j = np.nonzero(ecart)
    if len(i) != 1 or i[0] != j[0]:
        raise ValueError(f"Perturbation de rang un diagonale attendue ({len(i)} entrées modifiées)")
    rho = float(ecart[i[0], i[0]])
    lam = eigendecompose(H0).eigenvalues
    mu = eigendecompose(H1).eigenvalues
    marge = tol * max(float(np.max(np.abs(lam))), float(np.max(np.abs(mu))), 1.0)
    bas, haut = (lam, mu) if rho > 0 else (mu, lam)
    violations = int(np.sum(haut < bas - marge) + np.sum(haut[:-1] > bas[1:] + marge))
    return {"rho": rho, "index": int(i[0]), "violations": violations, "ok": violations == 0}


def ultraschro_residuals(dec: SpectralDecomposition, tau: float, g: Grid) -> dict:
    """
    Identités ponctuelles vérifiées par chaque paire propre (E, u) de −½Δ + τδ₀ :
        u(0)·(E − τ/d(0)) = (−½Δu)(0)     et     E·u(γ) = (−½Δu)(γ), γ ≠ 0.

    Returns:
        {"origine": résidu max relatif en 0, "ailleurs": résidu max relatif hors de 0}.
    """
    cinetique = laplacian(g, dec.hamiltonian.variant).scaled(-0.5)
    a = g.origin
    d0 = g.weights[a]
    echelle = max(float(np.max(np.abs(dec.eigenvalues))), abs(tau) / d0, 1.0)
    origine = ailleurs = 0.0
    for j, energie in enumerate(dec.eigenvalues):
        u = dec.vectors[:, j]
        ku = cinetique.apply(u)
        amplitude = max(float(np.max(np.abs(u))), 1e-300)
        origine = max(origine, abs(u[a] * (energie - tau / d0) - ku[a]) / (echelle * amplitude))
        reste = np.delete(energie * u - ku, a)
        ailleurs = max(ailleurs, float(np.max(np.abs(reste))) / (echelle * amplitude))
    return {"origine": float(origine), "ailleurs": float(ailleurs)}
