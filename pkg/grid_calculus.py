"""
Module grid_calculus.py — Espace d'ultrafonctions à étage fini.

Grille périodique symétrique (n impair, pas h, cercle de circonférence n·h),
intégrale ponctuelle ∮u = Σ u_j d_j, produit scalaire pondéré, base delta,
opérateurs bandés (dérivée centrée, deux laplaciens) et suite de contrôle
des axiomes 1 à 7.

Le mode symbolique (SymbolicState) travaille dans l'algèbre restreinte des
combinaisons finies de δ_a, √δ_a, χ_a (coefficients euclidiens, d(a) := ε)
et de parties lisses plongées f° évaluées à l'étage flottant.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
import pandas as pd

from euclidean_scalar import DEFAULT_ORDER, EuclideanScalar, as_scalar, format_scalar

VARIANTES_LAPLACIEN = ("paper_literal", "compact")

TOL_PARSEVAL = 1e-12
TOL_IPP = 1e-13
TOL_NOYAU = 1e-10


class GrilleInvalideError(ValueError):
    """Paramètres de grille refusés (n pair, h non positif, grilles différentes...)."""


class EtatNonSupporteError(ValueError):
    """État ou opération hors de l'algèbre symbolique supportée."""


# ---------------------------------------------------------------------------
# Étage et grille
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    n: int
    h: float

    @property
    def halfwidth(self) -> float:
        return (self.n - 1) * self.h / 2

    @property
    def circumference(self) -> float:
        return self.n * self.h


@dataclass(frozen=True, eq=False)
class Grid:
    """Grille périodique x_j = (j − (n−1)/2)·h, poids uniformes d_j = h."""

    n: int
    h: float
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    origin: int

    @property
    def stage(self) -> Stage:
        return Stage(self.n, self.h)

    @property
    def halfwidth(self) -> float:
        return self.stage.halfwidth

    @property
    def circumference(self) -> float:
        return self.stage.circumference

    def index_of(self, x: float) -> int:
        """Indice du point de grille le plus proche de x (à h/2 près)."""
        j = int(round(x / self.h + (self.n - 1) / 2))
        if not 0 <= j < self.n or abs(self.points[j] - x) > self.h / 2:
            raise GrilleInvalideError(f"x = {x} hors de la grille (n={self.n}, h={self.h})")
        return j

    def to_metadata(self) -> dict:
        return {
            "n":               self.n,
            "h":               self.h,
            "weights_uniform": True,
            "halfwidth":       self.halfwidth,
            "circumference":   self.circumference,
        }

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.n == other.n and self.h == other.h

    def __hash__(self):
        return hash((self.n, self.h))


def make_grid(n: int, h: float, strict: bool = True) -> Grid:
    """
    Construit la grille d'étage (n, h).

    Args:
        n      : nombre de points, impair et >= 3.
        h      : pas > 0.
        strict : False autorise un n pair (utilisé par le contrôle des axiomes
                 pour exhiber le mode en dents de scie).

    Raises:
        GrilleInvalideError : n pair, n < 3 ou h non positif.
    """
    if isinstance(n, bool) or int(n) != n:
        raise GrilleInvalideError(f"n doit être entier : {n!r}")
    n = int(n)
    h = float(h)
    if not math.isfinite(h) or h <= 0:
        raise GrilleInvalideError(f"Pas h non positif ou non fini : {h}")
    if n < (3 if strict else 2):
        raise GrilleInvalideError(f"n trop petit : {n}")
    if strict and n % 2 == 0:
        raise GrilleInvalideError(f"n pair refusé ({n}) : le noyau de D serait de dimension 2")
    points = (np.arange(n) - (n - 1) / 2) * h
    weights = np.full(n, h)
    points.flags.writeable = False
    weights.flags.writeable = False
    return Grid(n=n, h=h, points=points, weights=weights, origin=n // 2)


def _verifier_meme_grille(g1: Grid, g2: Grid) -> None:
    if g1 != g2:
        raise GrilleInvalideError(
            f"Grilles différentes : (n={g1.n}, h={g1.h}) vs (n={g2.n}, h={g2.h})"
        )


# ---------------------------------------------------------------------------
# Fonctions de grille
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Ultrafonction à étage fini : une valeur par point (float, complex ou objet euclidien)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, copy=True)
        if values.shape != (self.grid.n,):
            raise GrilleInvalideError(
                f"{values.shape} valeurs pour une grille de {self.grid.n} points"
            )
        if values.dtype.kind in "iub":
            values = values.astype(float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    # -- algèbre ponctuelle --------------------------------------------------

    def _autre(self, other):
        if isinstance(other, GridFunction):
            _verifier_meme_grille(self.grid, other.grid)
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._autre(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._autre(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._autre(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._autre(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GridFunction):
            raise TypeError("Division ponctuelle non définie entre fonctions de grille")
        return GridFunction(self.grid, self.values / other)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __getitem__(self, j):
        return self.values[j]

    def __len__(self):
        return self.grid.n

    def conj(self) -> "GridFunction":
        return GridFunction(self.grid, _conj(self.values))

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    # -- export --------------------------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        """DataFrame x, value_re, value_im (texte ε pour les valeurs euclidiennes)."""
        if self.values.dtype == object:
            re = [format_scalar(as_scalar(getattr(v, "re", v))) for v in self.values]
            im = [format_scalar(as_scalar(getattr(v, "im", 0.0))) for v in self.values]
        else:
            re = np.real(self.values)
            im = np.imag(self.values) if self.is_complex else np.zeros(self.grid.n)
        return pd.DataFrame({"x": self.grid.points, "value_re": re, "value_im": im})

    def to_csv(self, chemin: str) -> None:
        self.to_frame().to_csv(chemin, index=False)

    @classmethod
    def from_csv(cls, chemin: str, grid: Grid) -> "GridFunction":
        df = pd.read_csv(chemin)
        manquantes = [c for c in ("x", "value_re", "value_im") if c not in df.columns]
        if manquantes:
            raise ValueError(f"Colonnes manquantes dans {chemin} : {manquantes}")
        values = df["value_re"].to_numpy(dtype=float) + 1j * df["value_im"].to_numpy(dtype=float)
        if not np.any(values.imag):
            values = values.real
        return cls(grid, values)


def _conj(values: np.ndarray) -> np.ndarray:
    if values.dtype.kind == "c":
        return np.conj(values)
    if values.dtype == object:
        return np.array([v.conj() if hasattr(v, "conj") else v for v in values], dtype=object)
    return values


def _somme(termes: np.ndarray):
    """Somme à ordre fixe : fsum pour les flottants, gauche-droite pour les objets."""
    if termes.dtype == object:
        total = 0.0
        for t in termes:
            total = total + t
        return total
    if termes.dtype.kind == "c":
        return complex(math.fsum(termes.real), math.fsum(termes.imag))
    return math.fsum(termes)


def embed(f: Callable[[float], float], g: Grid,
          domain: Callable[[float], bool] | None = None) -> GridFunction:
    """
    Restriction f° : f(x_j) aux points du domaine, 0 ailleurs.

    Raises:
        ValueError : f non évaluable ou non finie en un point du domaine.
    """
    valeurs = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for x in g.points:
            x = float(x)
            if domain is not None and not domain(x):
                valeurs.append(0.0)
                continue
            try:
                y = f(x)
            except (ArithmeticError, ValueError) as exc:
                raise ValueError(f"f non évaluable en x = {x} : {exc}") from exc
            if not np.isfinite(y):
                raise ValueError(f"Valeur non finie de f en x = {x} : {y}")
            valeurs.append(y)
    return GridFunction(g, np.array(valeurs))


def chi(g: Grid, a: int) -> GridFunction:
    """Fonction caractéristique du point d'indice a."""
    _verifier_indice(g, a)
    values = np.zeros(g.n)
    values[a] = 1.0
    return GridFunction(g, values)


def delta(g: Grid, a: int) -> GridFunction:
    """Ultrafonction delta δ_a = χ_a / d(a)."""
    _verifier_indice(g, a)
    values = np.zeros(g.n)
    values[a] = 1.0 / g.weights[a]
    return GridFunction(g, values)


def sqrt_delta(g: Grid, a: int) -> GridFunction:
    """Élément de la base delta orthonormée √δ_a = χ_a / √d(a)."""
    _verifier_indice(g, a)
    values = np.zeros(g.n)
    values[a] = 1.0 / math.sqrt(g.weights[a])
    return GridFunction(g, values)


def _verifier_indice(g: Grid, a: int) -> None:
    if not (isinstance(a, (int, np.integer)) and 0 <= a < g.n):
        raise GrilleInvalideError(f"Indice de point invalide : {a!r} (n={g.n})")


def pointwise_integral(u: GridFunction):
    """∮u = Σ_j u_j·d_j, dans le type scalaire de u."""
    return _somme(u.values * u.grid.weights)


def integrate_product(u: GridFunction, v: GridFunction):
    """∮u·v, avec le produit v_j·d_j formé en premier (reproduction exacte par δ)."""
    _verifier_meme_grille(u.grid, v.grid)
    return _somme(u.values * (v.values * v.grid.weights))


def inner_product(u: GridFunction, v: GridFunction):
    """⟨u, v⟩ = Σ u_j·conj(v_j)·d_j (conjugaison sur le second argument)."""
    _verifier_meme_grille(u.grid, v.grid)
    return _somme(u.values * (_conj(v.values) * v.grid.weights))


def norm(u: GridFunction):
    carre = inner_product(u, u)
    if isinstance(carre, EuclideanScalar):
        return carre.sqrt()
    return math.sqrt(abs(carre))


def multiply(u: GridFunction, v: GridFunction) -> GridFunction:
    _verifier_meme_grille(u.grid, v.grid)
    return GridFunction(u.grid, u.values * v.values)


def reconstruct(u: GridFunction) -> GridFunction:
    """Σ_a (∮u·δ_a) χ_a, la représentation identité dans la base delta."""
    w = u.grid.weights
    return GridFunction(u.grid, u.values * ((1.0 / w) * w))


def numerosity_at_stage(predicate: Callable[[float], bool], stage: "Grid | Stage") -> int:
    """Nombre de points de l'étage satisfaisant le prédicat."""
    g = stage if isinstance(stage, Grid) else make_grid(stage.n, stage.h)
    return sum(1 for x in g.points if predicate(float(x)))


# ---------------------------------------------------------------------------
# Opérateurs bandés périodiques
# ---------------------------------------------------------------------------

def _decalage_canonique(o: int, n: int) -> int:
    return (o + n // 2) % n - n // 2


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """
    Opérateur périodique stocké par diagonales : A[j, (j+o) mod n] = bands[o][j].

    Les décalages sont ramenés dans (−n/2, n/2] et les diagonales confondues
    (petits n) sont additionnées.
    """

    grid: Grid
    bands: dict
    label: str = ""

    def __post_init__(self):
        n = self.grid.n
        fusion: dict[int, np.ndarray] = {}
        for o in sorted(self.bands):
            b = np.broadcast_to(np.asarray(self.bands[o]), (n,)).astype(
                np.result_type(np.asarray(self.bands[o]), float))
            c = _decalage_canonique(int(o), n)
            fusion[c] = fusion[c] + b if c in fusion else b.copy()
        for b in fusion.values():
            b.flags.writeable = False
        object.__setattr__(self, "bands", dict(sorted(fusion.items())))

    # -- application ---------------------------------------------------------

    def apply(self, u):
        """A·u pour une GridFunction (ou un tableau) ; ordre de sommation fixe."""
        values = u.values if isinstance(u, GridFunction) else np.asarray(u)
        resultat = None
        for o, b in self.bands.items():
            terme = b * np.roll(values, -o)
            resultat = terme if resultat is None else resultat + terme
        if isinstance(u, GridFunction):
            _verifier_meme_grille(self.grid, u.grid)
            return GridFunction(self.grid, resultat)
        return resultat

    __matmul__ = apply

    def entry(self, a: int, b: int):
        o = _decalage_canonique(b - a, self.grid.n)
        return self.bands[o][a] if o in self.bands else 0.0

    def to_dense(self) -> np.ndarray:
        n = self.grid.n
        dtype = np.result_type(*self.bands.values()) if self.bands else float
        m = np.zeros((n, n), dtype=dtype)
        lignes = np.arange(n)
        for o, b in self.bands.items():
            m[lignes, (lignes + o) % n] += b
        return m

    @property
    def bandwidth(self) -> int:
        actives = [abs(o) for o, b in self.bands.items() if np.any(b != 0)]
        return max(actives, default=0)

    @property
    def is_real(self) -> bool:
        return all(b.dtype.kind != "c" for b in self.bands.values())

    # -- algèbre -------------------------------------------------------------

    def transpose(self) -> "BandedOperator":
        n = self.grid.n
        return BandedOperator(
            self.grid,
            {_decalage_canonique(-o, n): np.roll(b, o) for o, b in self.bands.items()},
            f"{self.label}ᵀ",
        )

    def compose(self, other: "BandedOperator") -> "BandedOperator":
        """Produit A·B (les diagonales se combinent par décalage)."""
        _verifier_meme_grille(self.grid, other.grid)
        n = self.grid.n
        produit: dict[int, np.ndarray] = {}
        for o1, a in self.bands.items():
            for o2, b in other.bands.items():
                c = _decalage_canonique(o1 + o2, n)
                terme = a * np.roll(b, -o1)
                produit[c] = produit[c] + terme if c in produit else terme
        return BandedOperator(self.grid, produit, f"{self.label}·{other.label}")

    def scaled(self, c: float) -> "BandedOperator":
        return BandedOperator(self.grid, {o: c * b for o, b in self.bands.items()}, self.label)

    def plus_diagonal(self, diag: np.ndarray, label: str | None = None) -> "BandedOperator":
        bands = dict(self.bands)
        bands[0] = bands[0] + diag if 0 in bands else np.asarray(diag, dtype=float)
        return BandedOperator(self.grid, bands, label or self.label)

    def _pondere(self) -> dict:
        return {o: self.grid.weights * b for o, b in self.bands.items()}

    def weighted_antisymmetry_defect(self) -> float:
        """max |d_a A_ab + d_b A_ba| (forme matricielle de l'axiome 7)."""
        wa = BandedOperator(self.grid, self._pondere())
        wat = wa.transpose()
        return _max_ecart(wa.bands, wat.bands, +1)

    def weighted_symmetry_defect(self) -> float:
        """max |d_a A_ab − conj(d_b A_ba)| (caractère W-hermitien)."""
        wa = BandedOperator(self.grid, self._pondere())
        wat = wa.transpose()
        return _max_ecart(wa.bands, {o: np.conj(b) for o, b in wat.bands.items()}, -1)

    # -- spectre des opérateurs circulants -------------------------------------

    @property
    def is_circulant(self) -> bool:
        return all(np.all(b == b[0]) for b in self.bands.values())

    def symbol(self) -> np.ndarray:
        """Valeurs propres λ_m = Σ_o c_o e^{2iπ m o / n} (opérateur circulant)."""
        if not self.is_circulant:
            raise ValueError(f"Opérateur {self.label!r} non circulant : symbole indéfini")
        n = self.grid.n
        premiere_ligne = np.zeros(n, dtype=complex)
        for o, b in self.bands.items():
            premiere_ligne[o % n] += b[0]
        return n * np.fft.ifft(premiere_ligne)

    def nullity(self, tol: float = TOL_NOYAU) -> int:
        """Dimension du noyau : par le symbole si circulant, par le rang sinon."""
        if self.is_circulant:
            valeurs = np.abs(self.symbol())
            echelle = max(valeurs.max(), 1.0)
            return int(np.sum(valeurs <= tol * echelle))
        dense = self.to_dense()
        return self.grid.n - int(np.linalg.matrix_rank(dense, tol=tol * max(np.abs(dense).max(), 1.0)))


def _max_ecart(p: dict, q: dict, signe: int) -> float:
    ecart = 0.0
    for o in set(p) | set(q):
        a = p.get(o, 0.0)
        b = q.get(o, 0.0)
        ecart = max(ecart, float(np.max(np.abs(a + signe * b))))
    return ecart


DerivativeOperator = BandedOperator


def build_derivative(g: Grid) -> BandedOperator:
    """Différence centrée périodique D_{j,j±1} = ±1/(2h)."""
    c = 1.0 / (2.0 * g.h)
    return BandedOperator(g, {-1: np.full(g.n, -c), 1: np.full(g.n, c)}, "D")


def laplacian(g: Grid, variant: str = "compact") -> BandedOperator:
    """
    Laplacien discret périodique.

    Args:
        variant : 'paper_literal' (D·D, largeur de bande 2) ou
                  'compact' (différence seconde à 3 points).
    """
    if variant == "paper_literal":
        d = build_derivative(g)
        return BandedOperator(g, d.compose(d).bands, "D²")
    if variant == "compact":
        c = 1.0 / (g.h * g.h)
        return BandedOperator(
            g, {-1: np.full(g.n, c), 0: np.full(g.n, -2.0 * c), 1: np.full(g.n, c)}, "Δ"
        )
    raise ValueError(f"Variante de laplacien inconnue : {variant!r} (attendu : {VARIANTES_LAPLACIEN})")


# ---------------------------------------------------------------------------
# Contrôle des axiomes 1 à 7
# ---------------------------------------------------------------------------

def _enregistrement(axiome: str, controle: str, residu: float, seuil: float) -> dict:
    return {
        "axiome":   axiome,
        "controle": controle,
        "residu":   float(residu),
        "seuil":    float(seuil),
        "ok":       bool(residu <= seuil),
    }


def axiom_report(g: Grid, variant: str = "paper_literal", seed: int = 12345) -> list[dict]:
    """
    Mesure les résidus des axiomes 1 à 7 (plus la base delta) sur la grille g.

    Returns:
        Liste de dicts {axiome, controle, residu, seuil, ok}, et une entrée
        'valeur' supplémentaire portant ∮χ₀ = d(0).
    """
    rng = np.random.default_rng(seed)
    d = build_derivative(g)
    lap = laplacian(g, variant)
    u = GridFunction(g, rng.standard_normal(g.n))
    v = GridFunction(g, rng.standard_normal(g.n))
    rapport = []

    # Axiome 1 : u = Σ_a u(a) χ_a
    ecart = float(np.max(np.abs(reconstruct(u).values - u.values)))
    rapport.append(_enregistrement("1", "reconstruction Σ(∮u·δ_a)χ_a", ecart, 0.0))

    # Axiome 2 : ∮f° = ∫f pour f continue à support compact
    rayon = min(1.0, g.halfwidth / 2)
    bosse = embed(lambda x: math.cos(math.pi * x / (2 * rayon)) ** 2 if abs(x) < rayon else 0.0, g)
    ecart = abs(pointwise_integral(bosse) - rayon)
    rapport.append(_enregistrement("2", "∮f° − ∫f (cos² compact)", ecart, 10 * g.h ** 2))

    # Axiome 3 : d(a) = ∮χ_a > 0
    d0 = pointwise_integral(chi(g, g.origin))
    rapport.append(_enregistrement("3", "min_a ∮χ_a > 0", 0.0 if g.weights.min() > 0 else 1.0, 0.0)
                   | {"valeur": d0})

    # Axiome 4 : D f° ≈ f' sur une fonction lisse périodique
    k = 2 * math.pi / g.circumference
    sinus = embed(lambda x: math.sin(k * x), g)
    cosinus = embed(lambda x: k * math.cos(k * x), g)
    ecart = float(np.max(np.abs(d.apply(sinus).values - cosinus.values)))
    rapport.append(_enregistrement("4", "max|D sin° − (sin)'°|", ecart, 1.01 * k ** 3 * g.h ** 2 / 6 + 1e-12))

    # Axiome 5 : Du = 0 ⇔ u constante
    constante = d.apply(GridFunction(g, np.full(g.n, 1.7)))
    ecart = float(np.max(np.abs(constante.values))) + abs(d.nullity() - 1)
    rapport.append(_enregistrement("5", "D·const = 0 et dim ker D = 1", ecart, 0.0))

    # Axiome 6 : localité, supp(Dχ_a) dans le monade de a
    rapport.append(_enregistrement("6", "largeur de bande de D − 1", d.bandwidth - 1, 0.0))

    # Axiome 7 : intégration par parties
    du, dv = d.apply(u), d.apply(v)
    ecart = abs(integrate_product(du, v) + integrate_product(u, dv))
    echelle = norm(du) * norm(v) + norm(u) * norm(dv)
    rapport.append(_enregistrement("7", "|∮(Du)v + ∮u(Dv)| / échelle", ecart / echelle, TOL_IPP))
    rapport.append(_enregistrement("7", "antisymétrie pondérée d_a D_ab + d_b D_ba",
                                   d.weighted_antisymmetry_defect(), 0.0))
    forme = integrate_product(lap.apply(u), u)
    rapport.append(_enregistrement("7", f"⟨{lap.label}u, u⟩ ≤ 0", max(forme, 0.0), 0.0))

    # Base delta : reproduction et Parseval
    a = g.origin
    ecart = abs(integrate_product(u, delta(g, a)) - u.values[a])
    rapport.append(_enregistrement("base delta", "∮δ_a·u − u(a)", ecart, 0.0))
    coefficients = u.values * np.sqrt(g.weights)
    ecart = abs(math.fsum(coefficients ** 2) - inner_product(u, u)) / inner_product(u, u)
    rapport.append(_enregistrement("base delta", "Parseval Σ|⟨u,√δ_a⟩|² − ‖u‖²", ecart, TOL_PARSEVAL))
    return rapport


# ---------------------------------------------------------------------------
# Mode symbolique : d(a) := ε
# ---------------------------------------------------------------------------
#
# Les coefficients ponctuels sont stockés en η = √ε, de sorte que
# √δ_a = η⁻¹ χ_a et δ_a = η⁻² χ_a ont des exposants entiers. Les résultats
# sont ramenés en ε ; une puissance demi-entière lève EtatNonSupporteError.

POCHOIRS = {
    # −½·laplacien pour h = 1
    "compact":       {-1: -0.5, 0: 1.0, 1: -0.5},
    "paper_literal": {-2: -0.125, 0: 0.25, 2: -0.125},
}


def _vers_eta(x, ordre: int) -> EuclideanScalar:
    x = as_scalar(x, ordre)
    return EuclideanScalar({2 * k: c for k, c in x.coeffs.items()}, 2 * ordre)


def _vers_eps(y: EuclideanScalar) -> EuclideanScalar:
    impairs = sorted(k for k in y.coeffs if k % 2)
    if impairs:
        raise EtatNonSupporteError(
            f"Puissances demi-entières de ε (η^{impairs}) : résultat hors de l'algèbre"
        )
    return EuclideanScalar({k // 2: c for k, c in y.coeffs.items()}, y.order // 2)


class SymbolicState:
    """
    ψ = Σ_a π_a χ_a + Σ_s c_s f_s°  (π_a en η, c_s en ε).

    Les indices a désignent des points de la grille d'étage flottant, qui sert
    aussi à évaluer les parties lisses.
    """

    def __init__(self, grid: Grid, points: dict | None = None,
                 smooth: Iterable | None = None, order: int = DEFAULT_ORDER):
        self.grid = grid
        self.order = order
        self.points = {int(a): p for a, p in sorted((points or {}).items()) if not p.is_zero}
        self.smooth = tuple((as_scalar(c, order), f) for c, f in (smooth or ()))
        for a in self.points:
            _verifier_indice(grid, a)
        for _, f in self.smooth:
            _verifier_meme_grille(grid, f.grid)

    # -- constructeurs -------------------------------------------------------

    def _eta(self, x) -> EuclideanScalar:
        return _vers_eta(x, self.order)

    @classmethod
    def zero(cls, g: Grid, order: int = DEFAULT_ORDER) -> "SymbolicState":
        return cls(g, order=order)

    @classmethod
    def delta(cls, g: Grid, a: int, coef=1.0, order: int = DEFAULT_ORDER) -> "SymbolicState":
        """coef·δ_a."""
        eta_m2 = EuclideanScalar({-2: 1.0}, 2 * order)
        return cls(g, {a: _vers_eta(coef, order) * eta_m2}, order=order)

    @classmethod
    def sqrt_delta(cls, g: Grid, a: int, coef=1.0, order: int = DEFAULT_ORDER) -> "SymbolicState":
        """coef·√δ_a."""
        eta_m1 = EuclideanScalar({-1: 1.0}, 2 * order)
        return cls(g, {a: _vers_eta(coef, order) * eta_m1}, order=order)

    @classmethod
    def chi(cls, g: Grid, a: int, coef=1.0, order: int = DEFAULT_ORDER) -> "SymbolicState":
        return cls(g, {a: _vers_eta(coef, order)}, order=order)

    @classmethod
    def embedded(cls, u: GridFunction, coef=1.0, order: int = DEFAULT_ORDER) -> "SymbolicState":
        """coef·f° pour une fonction de grille réelle flottante."""
        if u.values.dtype.kind not in "f":
            raise EtatNonSupporteError("Partie lisse complexe ou euclidienne non supportée")
        return cls(u.grid, smooth=[(coef, u)], order=order)

    # -- algèbre linéaire ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, SymbolicState):
            return NotImplemented
        _verifier_meme_grille(self.grid, other.grid)
        points = dict(self.points)
        for a, p in other.points.items():
            points[a] = points[a] + p if a in points else p
        return SymbolicState(self.grid, points, self.smooth + other.smooth, self.order)

    def __rmul__(self, coef):
        if not isinstance(coef, (int, float, EuclideanScalar)):
            return NotImplemented
        c_eta = self._eta(coef)
        c_eps = as_scalar(coef, self.order)
        return SymbolicState(
            self.grid,
            {a: c_eta * p for a, p in self.points.items()},
            [(c_eps * c, f) for c, f in self.smooth],
            self.order,
        )

    __mul__ = __rmul__

    def __neg__(self):
        return -1.0 * self

    def __sub__(self, other):
        if not isinstance(other, SymbolicState):
            return NotImplemented
        return self + (-1.0) * other

    # -- évaluations (en η) ----------------------------------------------------

    def _d(self) -> EuclideanScalar:
        return EuclideanScalar({2: 1.0}, 2 * self.order)

    def _lisse_en(self, a: int) -> EuclideanScalar:
        total = EuclideanScalar(order=2 * self.order)
        for c, f in self.smooth:
            total = total + self._eta(c) * float(f.values[a])
        return total

    def value_at_eta(self, a: int) -> EuclideanScalar:
        """ψ(a) en η (π_a + partie lisse)."""
        return self.points.get(a, EuclideanScalar(order=2 * self.order)) + self._lisse_en(a)

    def _lisse_lisse(self, forme: Callable[[GridFunction, GridFunction], float]) -> EuclideanScalar:
        total = EuclideanScalar(order=2 * self.order)
        for c, f in self.smooth:
            for c2, f2 in self.smooth:
                total = total + self._eta(c * c2) * float(forme(f, f2))
        return total

    # -- formes (résultats en ε) -------------------------------------------------

    def pairing(self, phi: np.ndarray) -> EuclideanScalar:
        """∮ψ·φ° ; φ donné par ses valeurs aux points de grille."""
        phi = np.asarray(phi, dtype=float)
        total = EuclideanScalar(order=2 * self.order)
        for a, p in self.points.items():
            total = total + p * self._d() * float(phi[a])
        for c, f in self.smooth:
            total = total + self._eta(c) * math.fsum(f.values * (phi * f.grid.weights))
        return _vers_eps(total)

    def inner(self, other: "SymbolicState") -> EuclideanScalar:
        """⟨ψ, φ⟩ (états réels)."""
        _verifier_meme_grille(self.grid, other.grid)
        d = self._d()
        total = EuclideanScalar(order=2 * self.order)
        for a, p in self.points.items():
            total = total + p * other.value_at_eta(a) * d
        for a, q in other.points.items():
            total = total + q * self._lisse_en(a) * d
        for c, f in self.smooth:
            for c2, f2 in other.smooth:
                total = total + self._eta(c * c2) * integrate_product(f, f2)
        return _vers_eps(total)

    def norm2(self) -> EuclideanScalar:
        return self.inner(self)

    def kinetic(self, variant: str = "compact") -> EuclideanScalar:
        """⟨−½Δψ, ψ⟩ avec d(a) = ε pour les parties ponctuelles."""
        if variant not in POCHOIRS:
            raise ValueError(f"Variante de laplacien inconnue : {variant!r}")
        pochoir = POCHOIRS[variant]
        n = self.grid.n
        eta_m2 = EuclideanScalar({-2: 1.0}, 2 * self.order)
        total = EuclideanScalar(order=2 * self.order)
        for a, p in self.points.items():
            for b, q in self.points.items():
                s = pochoir.get(_decalage_canonique(b - a, n), 0.0)
                if s:
                    total = total + p * q * s * eta_m2
        if self.smooth:
            k = laplacian(self.grid, variant).scaled(-0.5)
            lisse = [(c, k.apply(f).values) for c, f in self.smooth]
            for a, p in self.points.items():
                for c, kf in lisse:
                    total = total + 2.0 * p * self._eta(c) * float(kf[a]) * self._d()
            total = total + self._lisse_lisse(lambda f, f2: integrate_product(k.apply(f), f2))
        return _vers_eps(total)

    def diagonal_form(self, potentiel: np.ndarray) -> EuclideanScalar:
        """⟨Vψ, ψ⟩ pour un potentiel diagonal fini V_j (valeurs flottantes)."""
        potentiel = np.asarray(potentiel, dtype=float)
        d = self._d()
        total = EuclideanScalar(order=2 * self.order)
        for a, p in self.points.items():
            total = total + float(potentiel[a]) * (p * p + 2.0 * p * self._lisse_en(a)) * d
        total = total + self._lisse_lisse(
            lambda f, f2: math.fsum(potentiel * f.values * f2.values * f.grid.weights)
        )
        return _vers_eps(total)

    def delta_form(self, a: int, tau) -> EuclideanScalar:
        """⟨τδ_a ψ, ψ⟩ = τ·ψ(a)²."""
        psi_a = self.value_at_eta(a)
        return _vers_eps(self._eta(tau) * psi_a * psi_a)

    def position_probability(self, a: int) -> EuclideanScalar:
        """|ψ(a)|²·d(a) avec d(a) = ε."""
        psi_a = self.value_at_eta(a)
        return _vers_eps(psi_a * psi_a * self._d())
