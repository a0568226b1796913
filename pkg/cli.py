"""
Point d'entrée en ligne de commande — spectres, axiomes, filets, évolution, oracle.

Chaque sous-commande lit une configuration arborescente (JSON), résolue dans
l'ordre : défauts < --config fichier.json < options pratiques (--tau, --n,
--h, --L, --parity, --variant, --oracle-only, --walls, --dim, --workers,
--output) < surcharges génériques --cle.chemin valeur (valeur lue en JSON,
texte brut sinon). La configuration résolue accompagne chaque sortie.

Utilisation :
    python cli.py spectrum --tau -2 --n 2001 --h 0.025
    python cli.py spectrum --tau 3 --parity odd --oracle-only --L 3.14159265
    python cli.py spectrum --tau 3 --walls --L 5 --n 1001 --h 0.0125
    python cli.py axioms --n 201 --h 0.05
    python cli.py converge --converge.problem chi --converge.stages "[[201, 0.1], [401, 0.05], [801, 0.025]]"
    python cli.py evolve --tau -2 --evolve.state gaussian
    python cli.py oracle --L 5 --tau 3
    python cli.py scalar-demo

Codes de sortie : 0 succès, 2 configuration, 3 échec du solveur, 4 échec de validation.
"""

import argparse
import copy
import json
import math
import os
import sys

import numpy as np
import pandas as pd

from analytic_oracle import (
    BoxProblem,
    EncadrementError,
    bound_state_energy_1d,
    box_spectrum,
    finite_box_bound_state,
    free_grid_spectrum,
    multidim_formulas,
    odd_spectrum_union,
    ring_spectrum,
)
from euclidean_scalar import (
    DEFAULT_ORDER,
    EuclideanScalar,
    classify,
    compare,
    eps,
    format_scalar,
    standard_part,
)
from grid_calculus import (
    GridFunction,
    GrilleInvalideError,
    VARIANTES_LAPLACIEN,
    axiom_report,
    make_grid,
    sqrt_delta,
)
from operators import (
    DeltaAt,
    EtatNonNormaliseError,
    NonHermitienError,
    N_MAX_2D,
    Sum,
    assemble_hamiltonian,
    assemble_hamiltonian_2d,
    box_walls,
    eigendecompose,
    energy_expectation,
    evolve,
    lowest_eigenvalues,
    make_grid_2d,
    measurement_probabilities,
    potential_from_config,
    spectral_bound_check,
    split_by_parity,
)
from solveur_spectral import ConvergenceError
from stages import (
    BUDGET_1D,
    NetError,
    StageSpec,
    approximation_net,
    bound_state_net,
    chi_potential_net,
    constant_net,
    net_summary,
    net_to_frame,
    richardson,
)

SCRIPT_DIR = os.path.dirname(os.path.abspath(__file__))
ENV_PATH = os.path.join(SCRIPT_DIR, ".env")

try:
    from dotenv import load_dotenv
    load_dotenv(ENV_PATH)
except ImportError:
    pass

DOSSIER_SORTIES = os.getenv("HFQM_SORTIES", os.path.join(SCRIPT_DIR, "sorties"))
GRAINE = int(os.getenv("HFQM_SEED", "12345"))

CODE_OK = 0
CODE_CONFIG = 2
CODE_SOLVEUR = 3
CODE_VALIDATION = 4

PARITES_ORACLE = ("even", "odd", "both")
ETATS_INITIAUX = ("gaussian", "delta", "eigenstate")
PROBLEMES_FILET = ("square_well", "bound_state", "chi", "constant")

DEFAULT_CONFIG = {
    "grid":      {"n": 1001, "h": 0.05},
    "dim":       1,
    "laplacian": "compact",
    "potential": {"type": "delta", "strength": 0.0, "position": 0.0},
    "oracle": {
        "L":           None,
        "parity":      "both",
        "count":       4,
        "oracle_only": False,
        "walls":       False,
        "tau_2d":      2 * math.pi ** 3,
        "width":       0.1,
        "sigma":       1.0,
        "omega":       1.0,
        "tau_r":       4 * math.pi,
    },
    "converge": {
        "problem": "square_well",
        "tau":     -2.0,
        "widths":  [0.4, 0.2, 0.1, 0.05],
        "stages":  [[501, 0.04], [1001, 0.02], [2001, 0.01]],
        "tol":     1e-3,
        "order":   None,
        "workers": 1,
    },
    "evolve": {
        "state":     "gaussian",
        "center":    -2.0,
        "width":     1.0,
        "momentum":  1.0,
        "index":     0,
        "position":  0.0,
        "amplitude": 1.0,
        "t_max":     10.0,
        "steps":     100,
        "snapshots": 5,
    },
    "output":     {"dir": DOSSIER_SORTIES, "eigenfunctions": [0]},
    "tolerances": {"bound": 1e-9, "norm_drift": 1e-10, "energy_drift": 1e-9},
}


class ConfigError(ValueError):
    """Configuration invalide ; chemin désigne la clé fautive (ex. 'grid.n')."""

    def __init__(self, chemin: str, message: str):
        self.chemin = chemin
        super().__init__(f"{chemin} : {message}")


# =============================================================================
# Configuration
# =============================================================================

def _lire(cfg: dict, chemin: str):
    noeud = cfg
    for cle in chemin.split("."):
        if not isinstance(noeud, dict) or cle not in noeud:
            raise ConfigError(chemin, "clé absente")
        noeud = noeud[cle]
    return noeud


def _ecrire(cfg: dict, chemin: str, valeur) -> None:
    """Surcharge d'une clé existante ; seules les clés sous 'potential' peuvent être créées."""
    cles = chemin.split(".")
    if cles[0] not in DEFAULT_CONFIG:
        raise ConfigError(chemin, f"section inconnue (attendu : {sorted(DEFAULT_CONFIG)})")
    noeud = cfg
    for i, cle in enumerate(cles[:-1]):
        if not isinstance(noeud.get(cle), dict):
            if cles[0] != "potential":
                raise ConfigError(".".join(cles[:i + 1]), "n'est pas une section")
            noeud[cle] = {}
        noeud = noeud[cle]
    if cles[-1] not in noeud and cles[0] != "potential":
        raise ConfigError(chemin, "clé inconnue")
    noeud[cles[-1]] = valeur


def _existant(cfg: dict, chemin: str):
    try:
        return _lire(cfg, chemin)
    except ConfigError:
        return None


def _fusionner(cfg: dict, ajout: dict, prefixe: str = "") -> None:
    """Fusion récursive d'un fichier de configuration ; le potentiel est remplacé en bloc."""
    for cle, valeur in ajout.items():
        chemin = f"{prefixe}{cle}"
        if (isinstance(valeur, dict) and not chemin.startswith("potential")
                and isinstance(_existant(cfg, chemin), dict)):
            _fusionner(cfg, valeur, f"{chemin}.")
        else:
            _ecrire(cfg, chemin, valeur)


def _valeur_brute(texte: str):
    try:
        return json.loads(texte)
    except json.JSONDecodeError:
        return texte


def parse_overrides(extras: list[str]) -> list[tuple[str, object]]:
    """['--grid.n', '501', '--laplacian=compact'] -> [('grid.n', 501), ('laplacian', 'compact')]."""
    surcharges = []
    i = 0
    while i < len(extras):
        jeton = extras[i]
        if not jeton.startswith("--"):
            raise ConfigError(jeton, "argument inattendu")
        cle = jeton[2:]
        if "=" in cle:
            cle, texte = cle.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extras):
                raise ConfigError(cle, "valeur manquante")
            texte = extras[i + 1]
            i += 2
        surcharges.append((cle, _valeur_brute(texte)))
    return surcharges


def resolve_config(args: argparse.Namespace, extras: list[str]) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as f:
                fichier = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("--config", f"lecture de {args.config} impossible : {exc}") from exc
        if not isinstance(fichier, dict):
            raise ConfigError("--config", "la racine du fichier doit être un objet JSON")
        _fusionner(cfg, fichier)

    if args.tau is not None:
        cfg["potential"] = {"type": "delta", "strength": args.tau, "position": 0.0}
        cfg["converge"]["tau"] = args.tau
    pratiques = {
        "grid.n":             args.n,
        "grid.h":             args.h,
        "oracle.L":           args.L,
        "oracle.parity":      args.parity,
        "laplacian":          args.variant,
        "dim":                args.dim,
        "converge.workers":   args.workers,
        "output.dir":         args.output,
    }
    for chemin, valeur in pratiques.items():
        if valeur is not None:
            _ecrire(cfg, chemin, valeur)
    if args.oracle_only:
        cfg["oracle"]["oracle_only"] = True
    if args.walls:
        cfg["oracle"]["walls"] = True

    for chemin, valeur in parse_overrides(extras):
        _ecrire(cfg, chemin, valeur)
    return cfg


def _exiger(condition: bool, chemin: str, message: str) -> None:
    if not condition:
        raise ConfigError(chemin, message)


def _nombre(cfg: dict, chemin: str, positif: bool = False) -> float:
    valeur = _lire(cfg, chemin)
    _exiger(isinstance(valeur, (int, float)) and not isinstance(valeur, bool) and math.isfinite(valeur),
            chemin, f"nombre fini attendu, reçu {valeur!r}")
    if positif:
        _exiger(valeur > 0, chemin, f"doit être > 0 (reçu {valeur})")
    return valeur


def _entier(cfg: dict, chemin: str, minimum: int | None = None) -> int:
    valeur = _lire(cfg, chemin)
    _exiger(isinstance(valeur, int) and not isinstance(valeur, bool), chemin, f"entier attendu, reçu {valeur!r}")
    if minimum is not None:
        _exiger(valeur >= minimum, chemin, f"doit être >= {minimum} (reçu {valeur})")
    return valeur


def validate_config(cfg: dict, commande: str) -> None:
    """
    Valide l'arbre avant tout calcul.

    Raises:
        ConfigError : première clé invalide rencontrée.
    """
    dim = _entier(cfg, "dim", 1)
    _exiger(dim in (1, 2), "dim", f"1 ou 2 attendu (reçu {dim})")
    n = _entier(cfg, "grid.n", 2)
    h = _nombre(cfg, "grid.h", positif=True)
    if commande != "axioms":
        _exiger(n % 2 == 1 and n >= 3, "grid.n", f"entier impair >= 3 attendu (reçu {n})")
    plafond = BUDGET_1D if dim == 1 else N_MAX_2D
    _exiger(n <= plafond, "grid.n", f"au-delà du plafond {plafond} (dim {dim})")
    _exiger(cfg["laplacian"] in VARIANTES_LAPLACIEN, "laplacian",
            f"{cfg['laplacian']!r} inconnu (attendu : {VARIANTES_LAPLACIEN})")

    if commande in ("spectrum", "evolve") and dim == 1 and n % 2 == 1:
        try:
            potential_from_config(cfg["potential"], make_grid(n, h))
        except KeyError as exc:
            raise ConfigError(exc.args[0], "clé obligatoire absente") from exc
        except (ValueError, TypeError, AttributeError) as exc:
            raise ConfigError("potential", str(exc)) from exc
    if commande == "spectrum" and dim == 2:
        p = cfg["potential"]
        if isinstance(p, dict) and p.get("type") == "delta":
            _exiger("strength" in p, "potential.strength", "clé obligatoire absente")
            _nombre(cfg, "potential.strength")
        _exiger(_tau_delta(cfg) is not None, "potential",
                "en dimension 2, seuls 'none' ou une delta à l'origine sont acceptés")
        _exiger(not cfg["oracle"]["walls"], "oracle.walls", "murs non disponibles en dimension 2")

    _exiger(cfg["oracle"]["parity"] in PARITES_ORACLE, "oracle.parity",
            f"{cfg['oracle']['parity']!r} inconnue (attendu : {PARITES_ORACLE})")
    _entier(cfg, "oracle.count", 1)
    if cfg["oracle"]["L"] is not None:
        _nombre(cfg, "oracle.L", positif=True)
    if cfg["oracle"]["walls"] and commande == "spectrum" and not cfg["oracle"]["oracle_only"]:
        _exiger(cfg["oracle"]["L"] is not None, "oracle.L", "requis avec --walls")
        _exiger(cfg["oracle"]["L"] < (n - 1) * h / 2, "oracle.L",
                f"les murs doivent tenir dans la grille (demi-largeur {(n - 1) * h / 2})")

    if commande == "converge":
        probleme = cfg["converge"]["problem"]
        _exiger(probleme in PROBLEMES_FILET, "converge.problem",
                f"{probleme!r} inconnu (attendu : {PROBLEMES_FILET})")
        _nombre(cfg, "converge.tau")
        _nombre(cfg, "converge.tol", positif=True)
        _entier(cfg, "converge.workers", 1)
        if probleme == "square_well":
            largeurs = cfg["converge"]["widths"]
            _exiger(isinstance(largeurs, list) and len(largeurs) >= 3, "converge.widths",
                    "au moins 3 largeurs attendues")
        else:
            etages = cfg["converge"]["stages"]
            _exiger(isinstance(etages, list) and len(etages) >= 3, "converge.stages",
                    "au moins 3 étages [n, h] attendus")
            for i, etage in enumerate(etages):
                _exiger(isinstance(etage, list) and len(etage) == 2, f"converge.stages.{i}",
                        f"paire [n, h] attendue, reçu {etage!r}")

    if commande == "evolve":
        _exiger(dim == 1, "dim", "évolution en dimension 1 seulement")
        _exiger(cfg["evolve"]["state"] in ETATS_INITIAUX, "evolve.state",
                f"{cfg['evolve']['state']!r} inconnu (attendu : {ETATS_INITIAUX})")
        _nombre(cfg, "evolve.t_max", positif=True)
        _entier(cfg, "evolve.steps", 1)
        _entier(cfg, "evolve.snapshots", 1)
        _nombre(cfg, "evolve.width", positif=True)
        _entier(cfg, "evolve.index", 0)

    for cle in ("bound", "norm_drift", "energy_drift"):
        _nombre(cfg, f"tolerances.{cle}", positif=True)


# =============================================================================
# Sorties
# =============================================================================

def _json_defaut(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, EuclideanScalar):
        return format_scalar(obj)
    raise TypeError(f"Type non sérialisable : {type(obj).__name__}")


def _dossier(cfg: dict) -> str:
    dossier = cfg["output"]["dir"]
    os.makedirs(dossier, exist_ok=True)
    return dossier


def ecrire_json(cfg: dict, nom: str, donnees: dict) -> str:
    chemin = os.path.join(_dossier(cfg), nom)
    with open(chemin, "w", encoding="utf-8") as f:
        json.dump({"config": cfg, **donnees}, f, ensure_ascii=False, indent=2, default=_json_defaut)
    return chemin


def ecrire_csv(cfg: dict, nom: str, df: pd.DataFrame) -> str:
    chemin = os.path.join(_dossier(cfg), nom)
    df.to_csv(chemin, index=False)
    return chemin


def _banniere(titre: str) -> None:
    print("=" * 60)
    print(titre)
    print("=" * 60)


# =============================================================================
# spectrum
# =============================================================================

def _tau_delta(cfg: dict) -> float | None:
    """Intensité si le potentiel est une delta seule à l'origine, None sinon."""
    p = cfg["potential"]
    if isinstance(p, dict) and p.get("type") == "delta" and float(p.get("position", 0.0)) == 0.0:
        return float(p["strength"])
    if isinstance(p, dict) and p.get("type") == "none":
        return 0.0
    return None


def _niveaux(liste) -> list[dict]:
    return [{"k": niv.k, "energy": niv.energy} for niv in liste]


def oracle_boite(tau: float, L: float, parite: str, count: int) -> dict:
    """Spectres de la boîte de Dirichlet [−L, L] (approche standard)."""
    s = abs(tau)
    signe = "well" if tau < 0 else "barrier"
    resultat = {"source": "analytic", "geometry": "box", "L": L, "tau": tau, "sign": signe}
    if parite in ("even", "both"):
        resultat["even"] = _niveaux(box_spectrum(BoxProblem(L, s, signe, "even"), count))
    if parite in ("odd", "both"):
        resultat["odd"] = _niveaux(box_spectrum(BoxProblem(L, s, signe, "odd"), count))
        resultat["odd_union"] = _niveaux(odd_spectrum_union(L, count))
    if tau < 0 and s * L > 1:
        resultat["bound_state"] = finite_box_bound_state(s, L, "dirichlet")._asdict()
    return resultat


def oracle_anneau(tau: float, L: float, parite: str, count: int) -> dict:
    """Spectres de l'anneau de circonférence 2L (géométrie de la grille périodique)."""
    resultat = {"source": "analytic", "geometry": "ring", "L": L, "tau": tau}
    if parite in ("even", "both"):
        resultat["even"] = _niveaux(ring_spectrum(tau, L, "even", count))
    if parite in ("odd", "both"):
        resultat["odd"] = _niveaux(ring_spectrum(tau, L, "odd", count))
    if tau < 0:
        resultat["bound_state"] = finite_box_bound_state(-tau, L, "periodic")._asdict()
    return resultat


def _comparaison(dec, analytique: dict, count: int) -> list[dict]:
    """Niveaux de grille et analytiques côte à côte, par parité."""
    classes = split_by_parity(dec)
    lignes = []
    for parite in ("even", "odd"):
        if parite not in analytique:
            continue
        references = [niv["energy"] for niv in analytique[parite]]
        if parite == "even" and "bound_state" in analytique:
            references = [analytique["bound_state"]["energy"]] + references
        if parite == "odd" and "odd_union" in analytique:
            references = [niv["energy"] for niv in analytique["odd_union"]]
        for i, (grille, ref) in enumerate(zip(classes[parite], references[:count])):
            lignes.append({
                "parity":    parite,
                "index":     i,
                "grid":      grille,
                "analytic":  ref,
                "rel_error": abs(grille - ref) / abs(ref) if ref else abs(grille),
            })
    return lignes


def cmd_spectrum(cfg: dict) -> int:
    oracle = cfg["oracle"]
    n, h = cfg["grid"]["n"], cfg["grid"]["h"]
    variant = cfg["laplacian"]
    tau = _tau_delta(cfg)
    count = oracle["count"]
    _banniere(f"[Spectre] n={n}, h={h}, laplacien {variant}, τ={tau}")

    if oracle["oracle_only"]:
        if tau is None:
            raise ConfigError("potential", "l'oracle seul exige une delta à l'origine")
        L = oracle["L"] if oracle["L"] is not None else (n - 1) * h / 2
        analytique = oracle_boite(tau, L, oracle["parity"], count)
        for parite in ("even", "odd"):
            for niv in analytique.get(parite, []):
                print(f"  {parite:<5} k = {niv['k']:.12g}   E = {niv['energy']:.12g}")
        chemin = ecrire_json(cfg, "spectrum.json", analytique)
        print(f"\n[Spectre] Oracle exporté : {chemin}")
        return CODE_OK

    if cfg["dim"] == 2:
        g2 = make_grid_2d(n, h)
        dec = eigendecompose(assemble_hamiltonian_2d(g2, variant, tau))
        print(f"  {g2.size} niveaux (Jacobi dense), λ_min = {dec.eigenvalues[0]:.10g}")
        chemin = ecrire_json(cfg, "spectrum.json", {
            "source":      "grid",
            "params":      dec.hamiltonian.describe(),
            "eigenvalues": dec.eigenvalues,
        })
        print(f"\n[Spectre] Résultats exportés : {chemin}")
        return CODE_OK

    g = make_grid(n, h)
    potentiel = potential_from_config(cfg["potential"], g)
    if oracle["walls"]:
        potentiel = Sum((potentiel, box_walls(oracle["L"])))
    H = assemble_hamiltonian(g, variant, potentiel)
    dec = eigendecompose(H, GRAINE)
    print(f"  λ_min = {dec.eigenvalues[0]:.10g}   états liés (< −1e−6) : {dec.bound_state_count()}")

    sortie = {
        "source":      "grid",
        "params":      H.describe(),
        "eigenvalues": dec.eigenvalues,
    }
    code = CODE_OK
    if tau is not None and not oracle["walls"]:
        borne = spectral_bound_check(dec, tau, g)
        sortie["bound_check"] = borne
        print(f"  Borne : λ_min = {borne['min_eig']:.6g} ≥ {borne['bound']:.6g} → "
              f"{'OK' if borne['pass'] else 'ÉCHEC'}")
        if not borne["pass"]:
            code = CODE_VALIDATION
        if tau == 0:
            ferme = free_grid_spectrum(n, h, variant)
            ecart = np.max(np.abs(dec.eigenvalues - ferme) / np.maximum(np.abs(ferme), 1.0))
            sortie["free_closed_form_max_rel_error"] = float(ecart)
            print(f"  Écart max à la forme close circulante : {ecart:.3e}")
        elif tau < 0:
            sortie["analytic_bound_state"] = bound_state_energy_1d(-tau)

    if tau is not None:
        if oracle["walls"]:
            analytique = oracle_boite(tau, oracle["L"], oracle["parity"], count)
        else:
            analytique = oracle_anneau(tau, n * h / 2, oracle["parity"], count)
        sortie["analytic"] = analytique
        sortie["comparison"] = _comparaison(dec, analytique, count)
        for ligne in sortie["comparison"]:
            print(f"  {ligne['parity']:<5} #{ligne['index']}  grille {ligne['grid']:.8g}  "
                  f"analytique {ligne['analytic']:.8g}  écart {ligne['rel_error']:.2e}")

    chemin = ecrire_json(cfg, "spectrum.json", sortie)
    for j in cfg["output"]["eigenfunctions"]:
        if 0 <= j < g.n:
            dec.eigenvector(j).to_csv(os.path.join(_dossier(cfg), f"eigenfunction_{j}.csv"))
    print(f"\n[Spectre] Résultats exportés : {chemin}")
    return code


# =============================================================================
# axioms
# =============================================================================

def cmd_axioms(cfg: dict) -> int:
    n, h = cfg["grid"]["n"], cfg["grid"]["h"]
    g = make_grid(n, h, strict=False)
    _banniere(f"[Axiomes] Grille n={n}, h={h}, laplacien {cfg['laplacian']}")
    rapport = axiom_report(g, cfg["laplacian"], GRAINE)
    for r in rapport:
        etat = "OK" if r["ok"] else "ÉCHEC"
        print(f"  Axiome {r['axiome']:<10} {etat:<5} résidu {r['residu']:.3e} (seuil {r['seuil']:.1e})  {r['controle']}")
        if "valeur" in r:
            print(f"    ∮χ₀ = d(0) = {r['valeur']!r}")
    echecs = [r for r in rapport if not r["ok"]]
    ecrire_csv(cfg, "axioms.csv", pd.DataFrame(rapport))
    chemin = ecrire_json(cfg, "axioms.json", {"grid": g.to_metadata(), "report": rapport})
    print(f"\n[Axiomes] {len(rapport) - len(echecs)}/{len(rapport)} contrôles réussis — {chemin}")
    return CODE_VALIDATION if echecs else CODE_OK


# =============================================================================
# converge
# =============================================================================

def cmd_converge(cfg: dict) -> int:
    c = cfg["converge"]
    n, h = cfg["grid"]["n"], cfg["grid"]["h"]
    variant = cfg["laplacian"]
    _banniere(f"[Net] Problème {c['problem']}")
    extra = {}
    if c["problem"] == "square_well":
        net = approximation_net(c["tau"], c["widths"], n, h, variant, c["workers"])
        g = make_grid(n, h)
        e_delta = float(lowest_eigenvalues(assemble_hamiltonian(g, variant, DeltaAt(g.origin, c["tau"])))[0])
        extra["delta_grid_value"] = e_delta
        if c["tau"] < 0:
            extra["analytic"] = bound_state_energy_1d(-c["tau"])
        reussis = net.succeeded()
        if len(reussis) >= 3:
            trois = reussis[-3:]
            extra["richardson"] = richardson([v for _, v in trois], [s.parameter for s, _ in trois], [1, 2])
        extra["gaps"] = [abs(v - e_delta) for _, v in reussis]
    else:
        etages = [StageSpec(int(e[0]), float(e[1])) for e in c["stages"]]
        if c["problem"] == "bound_state":
            net = bound_state_net(c["tau"], etages, variant, c["workers"])
        elif c["problem"] == "chi":
            net = chi_potential_net(etages, variant, c["workers"])
        else:
            net = constant_net(etages)

    df = net_to_frame(net)
    for _, ligne in df.iterrows():
        print(f"  étage {ligne['stage']}  n={ligne['n']}  paramètre {ligne['parameter']:.4g}  "
              f"valeur {ligne['value']}")
    resume = net_summary(net, c["tol"], c["order"])
    print(f"\n  Estimation {resume['estimate']!r}  convergé : {resume['converged']}  ordre : {resume['rate']}")
    for cle, valeur in extra.items():
        print(f"  {cle} : {valeur}")
    ecrire_csv(cfg, "net.csv", df)
    chemin = ecrire_json(cfg, "net.json", {**resume, **extra})
    print(f"\n[Net] Résultats exportés : {chemin}")
    return CODE_OK


# =============================================================================
# evolve
# =============================================================================

def etat_initial(cfg: dict, g, dec) -> GridFunction:
    """État initial normé (gaussienne, élément √δ_a de la base delta, ou état propre) × amplitude."""
    e = cfg["evolve"]
    if e["state"] == "gaussian":
        x = g.points
        valeurs = np.exp(-(x - e["center"]) ** 2 / (2 * e["width"] ** 2)) * np.exp(1j * e["momentum"] * x)
        norme = math.sqrt(math.fsum(np.abs(valeurs) ** 2 * g.weights))
        psi = GridFunction(g, valeurs / norme)
    elif e["state"] == "delta":
        psi = sqrt_delta(g, g.index_of(e["position"]))
    else:
        psi = dec.eigenvector(e["index"])
    return psi * e["amplitude"] if e["amplitude"] != 1.0 else psi


def cmd_evolve(cfg: dict) -> int:
    e = cfg["evolve"]
    tol = cfg["tolerances"]
    g = make_grid(cfg["grid"]["n"], cfg["grid"]["h"])
    H = assemble_hamiltonian(g, cfg["laplacian"], potential_from_config(cfg["potential"], g))
    dec = eigendecompose(H, GRAINE)
    psi0 = etat_initial(cfg, g, dec)
    _banniere(f"[Evolution] État {e['state']}, t ∈ [0, {e['t_max']}], {e['steps']} pas")

    probabilites = measurement_probabilities(psi0, dec)
    somme = math.fsum(p for _, p in probabilites)
    norme0 = math.sqrt(math.fsum(np.abs(psi0.values) ** 2 * g.weights))
    energie0 = energy_expectation(H, psi0)

    temps = np.linspace(0.0, e["t_max"], e["steps"] + 1)
    cliches = set(np.linspace(0, e["steps"], e["snapshots"] + 1).round().astype(int))
    derives, densites = [], []
    for i, t in enumerate(temps):
        psi = evolve(dec, psi0, float(t))
        norme = math.sqrt(math.fsum(np.abs(psi.values) ** 2 * g.weights))
        energie = energy_expectation(H, psi)
        derives.append({
            "t":            t,
            "norm":         norme,
            "energy":       energie,
            "norm_drift":   abs(norme - norme0),
            "energy_drift": abs(energie - energie0),
        })
        if i in cliches:
            densites.append(pd.DataFrame({"t": t, "x": g.points, "density": np.abs(psi.values) ** 2}))

    df_derive = pd.DataFrame(derives)
    derive_norme = float(df_derive["norm_drift"].max())
    derive_energie = float(df_derive["energy_drift"].max())
    print(f"  Σ P_j = {somme!r}")
    print(f"  Dérive max : norme {derive_norme:.2e}, énergie {derive_energie:.2e}")
    ecrire_csv(cfg, "evolve_drift.csv", df_derive)
    ecrire_csv(cfg, "evolve_densities.csv", pd.concat(densites, ignore_index=True))
    ok = (derive_norme <= tol["norm_drift"] and derive_energie <= tol["energy_drift"]
          and abs(somme - 1.0) <= 1e-10)
    chemin = ecrire_json(cfg, "evolve.json", {
        "probability_sum":  somme,
        "max_norm_drift":   derive_norme,
        "max_energy_drift": derive_energie,
        "energy":           energie0,
        "pass":             ok,
    })
    print(f"\n[Evolution] Résultats exportés : {chemin}")
    return CODE_OK if ok else CODE_VALIDATION


# =============================================================================
# oracle
# =============================================================================

def cmd_oracle(cfg: dict) -> int:
    o = cfg["oracle"]
    n, h = cfg["grid"]["n"], cfg["grid"]["h"]
    tau = _tau_delta(cfg)
    tau = 0.0 if tau is None else tau
    L = o["L"] if o["L"] is not None else (n - 1) * h / 2
    _banniere(f"[Oracle] L = {L}, τ = {tau}")
    s = abs(tau) if tau else 1.0
    sortie = {
        "source":     "analytic",
        "box":        {signe: oracle_boite(s if signe == "barrier" else -s, L, o["parity"], o["count"])
                       for signe in ("barrier", "well")},
        "ring":       oracle_anneau(tau, L, o["parity"], o["count"]),
        "bound_state_energy_1d": bound_state_energy_1d(s),
        "multidim": {
            "n2d":      multidim_formulas("n2d", tau=o["tau_2d"]),
            "n3d":      multidim_formulas("n3d", tau=o["tau_2d"], width=o["width"]),
            "e2d_bare": multidim_formulas("e2d_bare", tau=o["tau_2d"], width=o["width"]),
            "tau_r":    multidim_formulas("tau_r", tau=o["tau_2d"], sigma=o["sigma"], omega=o["omega"]),
            "e2d_ren":  multidim_formulas("e2d_ren", tau_r=o["tau_r"], omega=o["omega"]),
        },
    }
    print(f"  E₁D(s={s}) = {sortie['bound_state_energy_1d']}")
    for cle, valeur in sortie["multidim"].items():
        print(f"  {cle:<9} = {valeur:.12g}")
    chemin = ecrire_json(cfg, "oracle.json", sortie)
    print(f"\n[Oracle] Résultats exportés : {chemin}")
    return CODE_OK


# =============================================================================
# scalar-demo
# =============================================================================

def catalogue_euclidien(order: int = DEFAULT_ORDER) -> list[dict]:
    """Calculs euclidiens de démonstration : expression, résultat, st, classe."""
    e = eps(order)
    sigma = e.inverse()
    calculs = [
        ("σ·ε (σ = ε⁻¹)",  sigma * e),
        ("1/(1 − ε)",       1 / (1 - e)),
        ("(1 + ε)²",        (1 + e) ** 2),
        ("√(1 + ε)",        (1 + e).sqrt()),
        ("√(ε²)",           (e * e).sqrt()),
        ("3 + 2ε",          3 + 2 * e),
        ("σ = ε⁻¹",         sigma),
        ("ε/(ε + ε²)",      e / (e + e * e)),
    ]
    catalogue = []
    for expression, valeur in calculs:
        catalogue.append({
            "expression":     expression,
            "result":         format_scalar(valeur),
            "standard_part":  standard_part(valeur),
            "classification": classify(valeur).kind,
        })
    for a, b, texte in ((e, 1e-300, "ε vs 1e-300"), (sigma, 1e300, "ε⁻¹ vs 1e300"), (e, 0.0, "ε vs 0")):
        catalogue.append({"expression": texte, "result": compare(a, b),
                          "standard_part": None, "classification": None})
    return catalogue


def cmd_scalar_demo(cfg: dict) -> int:
    _banniere(f"[Euclide] Ordre de troncature K = {DEFAULT_ORDER}")
    catalogue = catalogue_euclidien()
    for ligne in catalogue:
        st = "" if ligne["standard_part"] is None else f"  st = {ligne['standard_part']!r}"
        classe = "" if ligne["classification"] is None else f"  ({ligne['classification']})"
        print(f"  {ligne['expression']:<16} = {ligne['result']}{st}{classe}")
    chemin = ecrire_json(cfg, "scalar_demo.json", {"catalogue": catalogue})
    print(f"\n[Euclide] Catalogue exporté : {chemin}")
    return CODE_OK


# =============================================================================
# Point d'entrée
# =============================================================================

COMMANDES = {
    "spectrum":    cmd_spectrum,
    "axioms":      cmd_axioms,
    "converge":    cmd_converge,
    "evolve":      cmd_evolve,
    "oracle":      cmd_oracle,
    "scalar-demo": cmd_scalar_demo,
}


def build_parser() -> argparse.ArgumentParser:
    commun = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    commun.add_argument("--config", type=str, default=None, metavar="JSON",
                        help="Fichier de configuration JSON")
    commun.add_argument("--tau", type=float, default=None, help="Intensité de la delta à l'origine")
    commun.add_argument("--n", type=int, default=None, help="Nombre de points de grille (impair)")
    commun.add_argument("--h", type=float, default=None, help="Pas de grille")
    commun.add_argument("--L", type=float, default=None, help="Demi-longueur de la boîte de l'oracle")
    commun.add_argument("--parity", choices=PARITES_ORACLE, default=None, help="Parité des niveaux analytiques")
    commun.add_argument("--variant", choices=VARIANTES_LAPLACIEN, default=None, help="Variante du laplacien")
    commun.add_argument("--oracle-only", action="store_true", help="Oracle analytique seul, sans grille")
    commun.add_argument("--walls", action="store_true", help="Murs en ±L (boîte de Dirichlet)")
    commun.add_argument("--dim", type=int, choices=(1, 2), default=None, help="Dimension (2 : n ≤ 41)")
    commun.add_argument("--workers", type=int, default=None, help="Threads pour les filets d'étages")
    commun.add_argument("--output", type=str, default=None, metavar="DOSSIER", help="Dossier de sortie")

    parser = argparse.ArgumentParser(
        description="Ultrafonctions à étage fini : spectres, axiomes, filets, évolution",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        allow_abbrev=False,
        epilog="Toute clé de configuration se surcharge par --cle.chemin valeur (ex. --grid.n 501).",
    )
    sous = parser.add_subparsers(dest="commande", required=True)
    for nom in COMMANDES:
        sous.add_parser(nom, parents=[commun], allow_abbrev=False,
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        cfg = resolve_config(args, extras)
        validate_config(cfg, args.commande)
        return COMMANDES[args.commande](cfg)
    except ConfigError as exc:
        print(f"Erreur de configuration — {exc}", file=sys.stderr)
        return CODE_CONFIG
    except (ConvergenceError, EncadrementError, NetError, NonHermitienError) as exc:
        print(f"Échec du solveur — {type(exc).__name__}: {exc}", file=sys.stderr)
        return CODE_SOLVEUR
    except EtatNonNormaliseError as exc:
        print(f"Échec de validation — {exc}", file=sys.stderr)
        return CODE_VALIDATION
    except GrilleInvalideError as exc:
        print(f"Erreur de configuration — grille : {exc}", file=sys.stderr)
        return CODE_CONFIG


if __name__ == "__main__":
    sys.exit(main())
