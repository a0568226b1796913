"""
Module stages.py — Filets indexés par étage : substitut fini de la Λ-limite.

Un filet est une suite d'étages strictement raffinés (n croissant ou
paramètre h / largeur décroissant) et d'une valeur par étage. Les étages
forment une chaîne : c'est suffisant pour tous les calculs effectués ici.

estimate_limit rend la dernière valeur, extrapolée quand les différences
successives décroissent géométriquement, un drapeau de convergence
(|Δ_dernier| ≤ tol) et un ordre empirique (régression MCO de log|Δ| sur
log(paramètre), statsmodels).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np
import pandas as pd
import statsmodels.api as sm

from analytic_oracle import EncadrementError
from grid_calculus import Grid, chi, make_grid, pointwise_integral
from operators import DeltaAt, Indicator, assemble_hamiltonian, lowest_eigenvalues, square_well_potential
from solveur_spectral import ConvergenceError

BUDGET_1D = 4001
BUDGET_2D = 41 * 41
MIN_ETAGES = 3
ECART_RATIOS = 0.1        # |r_dernier − r_précédent| maximal pour extrapoler


class BudgetDepasseError(ValueError):
    """Étage au-delà du plafond de taille (4001 points en 1D, 41² en 2D)."""


class NetError(RuntimeError):
    """Moins de MIN_ETAGES étages réussis."""


# ---------------------------------------------------------------------------
# Étages et filets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageSpec:
    n: int
    h: float
    width: float | None = None
    dim: int = 1

    @property
    def parameter(self) -> float:
        """Paramètre de raffinement : largeur si fixée, pas h sinon."""
        return self.width if self.width is not None else self.h

    @property
    def size(self) -> int:
        return self.n ** self.dim

    def grid(self) -> Grid:
        return make_grid(self.n, self.h)

    def to_dict(self) -> dict:
        return {"n": self.n, "h": self.h, "width": self.width, "dim": self.dim}


@dataclass
class Net:
    stages: list
    values: list
    failures: dict = field(default_factory=dict)    # indice d'étage -> message
    label: str = ""

    def succeeded(self) -> list[tuple[StageSpec, float]]:
        return [(s, v) for i, (s, v) in enumerate(zip(self.stages, self.values))
                if i not in self.failures]

    def __add__(self, other: "Net") -> "Net":
        return _combiner(self, other, lambda a, b: a + b, "+")

    def __mul__(self, other: "Net") -> "Net":
        return _combiner(self, other, lambda a, b: a * b, "·")


def _combiner(a: Net, b: Net, op, symbole: str) -> Net:
    if [s.to_dict() for s in a.stages] != [s.to_dict() for s in b.stages]:
        raise ValueError("Filets sur des étages différents")
    echecs = {**a.failures, **b.failures}
    valeurs = [None if i in echecs else op(x, y) for i, (x, y) in enumerate(zip(a.values, b.values))]
    return Net(list(a.stages), valeurs, echecs, f"({a.label}){symbole}({b.label})")


def check_stages(stages: list[StageSpec]) -> None:
    """
    Chaîne strictement raffinée et budget de taille.

    Raises:
        BudgetDepasseError : étage trop grand.
        ValueError         : étages non strictement ordonnés.
    """
    for s in stages:
        plafond = BUDGET_1D if s.dim == 1 else BUDGET_2D
        if s.size > plafond:
            raise BudgetDepasseError(f"Étage n={s.n} (dim {s.dim}) : {s.size} points > plafond {plafond}")
    for avant, apres in zip(stages[:-1], stages[1:]):
        if not (apres.n > avant.n or apres.parameter < avant.parameter):
            raise ValueError(f"Étages non raffinés : {avant.to_dict()} puis {apres.to_dict()}")


def run_net(problem: Callable[[StageSpec], float], stages: Iterable[StageSpec],
            workers: int = 1, label: str = "") -> Net:
    """
    Évalue le problème à chaque étage ; les échecs par étage sont consignés.

    Args:
        workers : > 1 pour répartir les étages sur un pool de threads
                  (résultats toujours rangés par indice d'étage).

    Raises:
        NetError : moins de MIN_ETAGES étages réussis.
    """
    stages = list(stages)
    check_stages(stages)

    def evaluer(stage):
        try:
            return float(problem(stage)), None
        except (ConvergenceError, EncadrementError, ValueError, ArithmeticError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            resultats = list(pool.map(evaluer, stages))
    else:
        resultats = [evaluer(s) for s in stages]

    valeurs, echecs = [], {}
    for i, (valeur, erreur) in enumerate(resultats):
        valeurs.append(valeur)
        if erreur is not None:
            echecs[i] = erreur
            print(f"[Net] Étage {i} (n={stages[i].n}, h={stages[i].h}) en échec : {erreur}")
    reussis = len(stages) - len(echecs)
    if reussis < MIN_ETAGES:
        raise NetError(f"{reussis} étage(s) réussi(s) sur {len(stages)} (minimum {MIN_ETAGES})")
    return Net(stages, valeurs, echecs, label)


# ---------------------------------------------------------------------------
# Estimation de limite
# ---------------------------------------------------------------------------

class LimitEstimate(NamedTuple):
    value: float
    converged: bool
    rate: float | None


def convergence_rate(values: list[float], parameters: list[float]) -> float | None:
    """Pente MCO de log|Δ_i| contre log(p_i) (p_i = paramètre de l'étage le plus fin du pas)."""
    deltas = np.diff(np.asarray(values, dtype=float))
    p = np.asarray(parameters[1:], dtype=float)
    garde = deltas != 0
    if garde.sum() < 2 or np.ptp(np.log(p[garde])) == 0:
        return None
    x = sm.add_constant(np.log(p[garde]))
    modele = sm.OLS(np.log(np.abs(deltas[garde])), x).fit()
    return float(modele.params[1])


def estimate_limit(net: Net, tol: float, order: float | None = None) -> LimitEstimate:
    """
    Limite estimée d'un filet.

    - Filet finalement constant (Δ_dernier = 0) : la constante, exactement.
    - order fourni : Richardson classique sur les deux derniers étages.
    - sinon, ratios r = Δ_i/Δ_{i−1} stables dans (0, 1) : extrapolation
      géométrique v + Δ·r/(1 − r) ; dernière valeur sinon.

    Raises:
        NetError : moins de MIN_ETAGES valeurs.
    """
    paires = net.succeeded()
    if len(paires) < MIN_ETAGES:
        raise NetError(f"{len(paires)} valeur(s) : au moins {MIN_ETAGES} requises")
    valeurs = [v for _, v in paires]
    parametres = [s.parameter for s, _ in paires]
    deltas = np.diff(valeurs)
    dernier = valeurs[-1]
    if deltas[-1] == 0:
        return LimitEstimate(dernier, True, None)

    converge = bool(abs(deltas[-1]) <= tol)
    rate = convergence_rate(valeurs, parametres)
    if order is not None:
        t = (parametres[-2] / parametres[-1]) ** order
        return LimitEstimate(dernier + (dernier - valeurs[-2]) / (t - 1), converge, rate)

    ratios = [deltas[i] / deltas[i - 1] for i in range(1, len(deltas)) if deltas[i - 1] != 0]
    stables = len(ratios) >= 1 and 0 < ratios[-1] < 1
    if len(ratios) >= 2:
        stables = stables and abs(ratios[-1] - ratios[-2]) <= ECART_RATIOS
    if stables:
        r = ratios[-1]
        return LimitEstimate(dernier + deltas[-1] * r / (1 - r), converge, rate)
    return LimitEstimate(dernier, converge, rate)


def richardson(values: list[float], parameters: list[float], orders: list[float]) -> float:
    """
    Tableau de Richardson à plusieurs niveaux, un ordre d'erreur éliminé par niveau.
    Raffinement géométrique supposé : t = p_{i−1}/p_i à chaque niveau.
    """
    if len(orders) >= len(values):
        raise ValueError(f"{len(orders)} ordres pour {len(values)} valeurs : trop peu d'étages")
    niveau = list(map(float, values))
    params = list(map(float, parameters))
    for q in orders:
        suivant = []
        for i in range(1, len(niveau)):
            t = (params[i - 1] / params[i]) ** q
            suivant.append(niveau[i] + (niveau[i] - niveau[i - 1]) / (t - 1))
        niveau = suivant
        params = params[1:]
    return niveau[-1]


# ---------------------------------------------------------------------------
# Problèmes types
# ---------------------------------------------------------------------------

def constant_net(stages: Iterable[StageSpec]) -> Net:
    """∮χ₀ = d(0) : constant tant que h est fixé."""
    def probleme(s: StageSpec) -> float:
        g = s.grid()
        return pointwise_integral(chi(g, g.origin))
    return run_net(probleme, stages, label="∮χ₀")


def bound_state_net(tau: float, stages: Iterable[StageSpec], variant: str = "compact",
                    workers: int = 1) -> Net:
    """Plus petite valeur propre de −½Δ + τδ₀ par étage."""
    def probleme(s: StageSpec) -> float:
        g = s.grid()
        return float(lowest_eigenvalues(assemble_hamiltonian(g, variant, DeltaAt(g.origin, tau)))[0])
    return run_net(probleme, stages, workers, label=f"E0(τ={tau})")


def chi_potential_net(stages: Iterable[StageSpec], variant: str = "compact", workers: int = 1) -> Net:
    """Décalage spectral λ_min(H₀ + χ₀) − λ_min(H₀), soit une delta d'intensité τ = d(0)."""
    def probleme(s: StageSpec) -> float:
        g = s.grid()
        origine = float(g.points[g.origin])
        avec = assemble_hamiltonian(g, variant, Indicator(lambda x: x == origine, 1.0, "χ₀"))
        sans = assemble_hamiltonian(g, variant)
        return float(lowest_eigenvalues(avec)[0] - lowest_eigenvalues(sans)[0])
    return run_net(probleme, stages, workers, label="décalage χ₀")


def approximation_net(tau: float, widths: Iterable[float], n: int, h: float,
                      variant: str = "compact", workers: int = 1) -> Net:
    """
    Plus petite valeur propre du mur carré 2·w·V₀ = τ pour des largeurs décroissantes,
    sur une grille fixe (n, h). Une largeur sous la résolution fait échouer son étage.
    """
    stages = [StageSpec(n, h, width=float(w)) for w in widths]

    def probleme(s: StageSpec) -> float:
        g = s.grid()
        potentiel = square_well_potential(g, s.width, tau / (2 * s.width))
        return float(lowest_eigenvalues(assemble_hamiltonian(g, variant, potentiel))[0])
    return run_net(probleme, stages, workers, label=f"mur carré τ={tau}")


# ---------------------------------------------------------------------------
# Rapports
# ---------------------------------------------------------------------------

def net_to_frame(net: Net) -> pd.DataFrame:
    """Colonnes stage, n, h, parameter, value, delta, failure."""
    lignes = []
    precedent = None
    for i, (s, v) in enumerate(zip(net.stages, net.values)):
        delta = None if v is None or precedent is None else v - precedent
        lignes.append({
            "stage":     i,
            "n":         s.n,
            "h":         s.h,
            "parameter": s.parameter,
            "value":     v,
            "delta":     delta,
            "failure":   net.failures.get(i, ""),
        })
        if v is not None:
            precedent = v
    return pd.DataFrame(lignes)


def net_summary(net: Net, tol: float, order: float | None = None) -> dict:
    estimation = estimate_limit(net, tol, order)
    return {
        "label":     net.label,
        "estimate":  estimation.value,
        "converged": estimation.converged,
        "rate":      estimation.rate,
        "stages":    [s.to_dict() for s in net.stages],
        "failures":  {str(k): v for k, v in net.failures.items()},
    }
