"""
Module euclidean_scalar.py — Nombres euclidiens tronqués et leur complexifié.

Un scalaire euclidien est une série de Laurent finie en un infinitésimal
formel ε :  c_{-K}ε^-K + … + c_0 + c_1ε + … + c_Kε^K.
Toute l'arithmétique est tronquée silencieusement aux exposants [-K, K]
(K = ordre de troncature, défaut 4, variable HFQM_ORDRE_TRONCATURE).

Les coefficients sont des flottants : les comparaisons utilisent le signe
exact du coefficient dominant, donc deux scalaires presque égaux peuvent être
mal ordonnés après une annulation catastrophique.

Usage rapide :
    from euclidean_scalar import EPS, standard_part, classify

    x = 1 / (1 - EPS)          # 1 + ε + ε² + ε³ + ε⁴
    standard_part(x)           # 1.0
    classify(EPS ** -2).kind   # 'infinite'
"""

import functools
import math
import os
import re
from typing import NamedTuple

DEFAULT_ORDER = int(os.getenv("HFQM_ORDRE_TRONCATURE", "4"))

SYMBOLE = "ε"


# ---------------------------------------------------------------------------
# Séries brutes (dict exposant -> coefficient)
# ---------------------------------------------------------------------------

def _canonique(coeffs: dict, lo: int, hi: int) -> dict:
    """Supprime les zéros et les exposants hors de [lo, hi], trie par exposant."""
    return {k: float(c) for k, c in sorted(coeffs.items()) if lo <= k <= hi and c != 0.0}


def _produit(p: dict, q: dict, lo: int, hi: int) -> dict:
    """Produit de Cauchy tronqué ; chaque coefficient est une somme fsum (ordre indifférent)."""
    termes: dict[int, list[float]] = {}
    for i, a in p.items():
        for j, b in q.items():
            k = i + j
            if lo <= k <= hi:
                termes.setdefault(k, []).append(a * b)
    return _canonique({k: math.fsum(v) for k, v in termes.items()}, lo, hi)


def _somme(p: dict, q: dict, signe: float, lo: int, hi: int) -> dict:
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0.0) + signe * c
    return _canonique(out, lo, hi)


def _serie_inverse(r: dict, hi: int) -> dict:
    """1/(1+r) par série géométrique, r n'ayant que des exposants >= 1."""
    total = {0: 1.0}
    terme = {0: 1.0}
    moins_r = {k: -c for k, c in r.items()}
    for _ in range(hi):
        terme = _produit(terme, moins_r, 0, hi)
        if not terme:
            break
        total = _somme(total, terme, 1.0, 0, hi)
    return total


def _serie_racine(r: dict, hi: int) -> dict:
    """(1+r)^(1/2) par série binomiale, r n'ayant que des exposants >= 1."""
    total = {0: 1.0}
    puissance = {0: 1.0}
    binome = 1.0
    for j in range(1, hi + 1):
        binome *= (0.5 - (j - 1)) / j
        puissance = _produit(puissance, r, 0, hi)
        if not puissance:
            break
        total = _somme(total, {k: binome * c for k, c in puissance.items()}, 1.0, 0, hi)
    return total


def _facteur_dominant(coeffs: dict) -> tuple[int, float, dict]:
    """Factorise x = c·ε^m·(1 + r) ; renvoie (m, c, r)."""
    m = min(coeffs)
    c = coeffs[m]
    try:
        inv_c = 1.0 / c
    except (OverflowError, ZeroDivisionError):
        inv_c = math.inf
    if not math.isfinite(inv_c):
        raise ZeroDivisionError(
            f"Coefficient dominant sous-dépassé ({c!r} à l'ordre ε^{m}) : division impossible"
        )
    r = {k - m: v * inv_c for k, v in coeffs.items() if k != m}
    return m, c, r


# ---------------------------------------------------------------------------
# EuclideanScalar
# ---------------------------------------------------------------------------

@functools.total_ordering
class EuclideanScalar:
    """
    Série de Laurent tronquée en ε, valeur = Σ c_k ε^k.

    Forme canonique : aucun coefficient nul stocké, exposants dans [-K, K],
    le zéro est la série vide. Les instances sont immuables.
    """

    __slots__ = ("_coeffs", "_order")

    def __init__(self, coeffs=None, order: int | None = None):
        order = DEFAULT_ORDER if order is None else int(order)
        if order < 0:
            raise ValueError(f"Ordre de troncature négatif : {order}")
        if coeffs is None:
            brut = {}
        elif isinstance(coeffs, EuclideanScalar):
            brut = dict(coeffs._coeffs)
        elif isinstance(coeffs, dict):
            brut = {int(k): float(c) for k, c in coeffs.items()}
        elif isinstance(coeffs, (int, float)):
            brut = {0: float(coeffs)}
        else:
            raise TypeError(f"Coefficients non reconnus : {type(coeffs).__name__}")
        for k, c in brut.items():
            if not math.isfinite(c):
                raise ValueError(f"Coefficient non fini à l'ordre ε^{k} : {c}")
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_coeffs", _canonique(brut, -order, order))

    def __setattr__(self, name, value):
        raise AttributeError("EuclideanScalar est immuable")

    # -- accès ---------------------------------------------------------------

    @property
    def order(self) -> int:
        return self._order

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def leading_exponent(self) -> int | None:
        """Plus petit exposant stocké (None pour zéro)."""
        return min(self._coeffs) if self._coeffs else None

    @property
    def leading_coefficient(self) -> float:
        return self._coeffs[min(self._coeffs)] if self._coeffs else 0.0

    def leading_term(self) -> "EuclideanScalar":
        if self.is_zero:
            return self
        m = self.leading_exponent
        return EuclideanScalar({m: self._coeffs[m]}, self._order)

    def coefficient(self, k: int) -> float:
        return self._coeffs.get(k, 0.0)

    def sign(self) -> int:
        c = self.leading_coefficient
        return (c > 0) - (c < 0)

    # -- coercition ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, EuclideanScalar):
            return other
        if isinstance(other, bool):
            return NotImplemented
        if isinstance(other, (int, float)):
            return EuclideanScalar(other, self._order)
        return NotImplemented

    def _ordre_commun(self, other: "EuclideanScalar") -> int:
        return min(self._order, other._order)

    # -- arithmétique --------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        k = self._ordre_commun(other)
        return EuclideanScalar(_somme(self._coeffs, other._coeffs, 1.0, -k, k), k)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        k = self._ordre_commun(other)
        return EuclideanScalar(_somme(self._coeffs, other._coeffs, -1.0, -k, k), k)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return EuclideanScalar({k: -c for k, c in self._coeffs.items()}, self._order)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        k = self._ordre_commun(other)
        return EuclideanScalar(_produit(self._coeffs, other._coeffs, -k, k), k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            raise ZeroDivisionError("Division par un scalaire euclidien nul")
        k = self._ordre_commun(other)
        m, c, r = _facteur_dominant(other._coeffs)
        # a / (c ε^m (1+r)) : la série de a·(1+r)^-1 est nécessaire jusqu'à ε^(K+m)
        hi = k + m
        bas = min(self._coeffs) if self._coeffs else 0
        inverse = _serie_inverse(r, max(hi - bas, 0))
        quotient = _produit(self._coeffs, inverse, bas, hi)
        return EuclideanScalar({e - m: v / c for e, v in quotient.items()}, k)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def inverse(self) -> "EuclideanScalar":
        return EuclideanScalar(1.0, self._order) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self ** (-n)).inverse()
        resultat = EuclideanScalar(1.0, self._order)
        base = self
        while n:
            if n & 1:
                resultat = resultat * base
            base = base * base
            n >>= 1
        return resultat

    def sqrt(self) -> "EuclideanScalar":
        """Racine carrée ; exige un exposant dominant pair et un coefficient dominant positif."""
        if self.is_zero:
            return self
        m, c, r = _facteur_dominant(self._coeffs)
        if m % 2 or c < 0:
            raise ValueError(f"Racine carrée non représentable pour {self}")
        demi = m // 2
        serie = _serie_racine(r, self._order - demi)
        racine_c = math.sqrt(c)
        return EuclideanScalar({e + demi: v * racine_c for e, v in serie.items()}, self._order)

    # -- ordre ---------------------------------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._coeffs == other._coeffs

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() < 0

    def __hash__(self):
        if not self._coeffs:
            return hash(0.0)
        if list(self._coeffs) == [0]:
            return hash(self._coeffs[0])
        return hash(tuple(self._coeffs.items()))

    def __bool__(self):
        return not self.is_zero

    def __float__(self):
        return standard_part(self)

    # -- rendu ---------------------------------------------------------------

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"EuclideanScalar('{format_scalar(self)}')"


EPS = EuclideanScalar({1: 1.0})
UN = EuclideanScalar(1.0)
ZERO = EuclideanScalar()


def eps(order: int | None = None) -> EuclideanScalar:
    """Le générateur infinitésimal ε à l'ordre de troncature demandé."""
    return EuclideanScalar({1: 1.0}, order)


def as_scalar(x, order: int | None = None) -> EuclideanScalar:
    if isinstance(x, EuclideanScalar):
        return x
    return EuclideanScalar(x, order)


# ---------------------------------------------------------------------------
# ComplexEuclidean
# ---------------------------------------------------------------------------

class ComplexEuclidean:
    """Élément de 𝔼 + i𝔼, parties réelle et imaginaire canoniques."""

    __slots__ = ("re", "im")

    def __init__(self, re=0.0, im=0.0, order: int | None = None):
        if isinstance(re, complex):
            re, im = re.real, re.imag
        self.re = as_scalar(re, order)
        self.im = as_scalar(im, order)

    @staticmethod
    def _coerce(other):
        if isinstance(other, ComplexEuclidean):
            return other
        if isinstance(other, (int, float, complex, EuclideanScalar)):
            return ComplexEuclidean(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ComplexEuclidean(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ComplexEuclidean(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return ComplexEuclidean(-self.re, -self.im)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ComplexEuclidean(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        module2 = other.abs2()
        if module2.is_zero:
            raise ZeroDivisionError("Division par un complexe euclidien nul")
        produit = self * other.conj()
        return ComplexEuclidean(produit.re / module2, produit.im / module2)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conj(self) -> "ComplexEuclidean":
        return ComplexEuclidean(self.re, -self.im)

    def abs2(self) -> EuclideanScalar:
        """Module au carré |z|² = re² + im²."""
        return self.re * self.re + self.im * self.im

    def standard_part(self) -> complex:
        return complex(standard_part(self.re), standard_part(self.im))

    def __str__(self):
        return f"({format_scalar(self.re)}) + i({format_scalar(self.im)})"

    def __repr__(self):
        return f"ComplexEuclidean('{self.re}', '{self.im}')"


# ---------------------------------------------------------------------------
# Opérations du corps ordonné
# ---------------------------------------------------------------------------

class Classement(NamedTuple):
    kind: str            # 'infinitesimal' | 'finite' | 'infinite'
    finite: bool
    infinitesimal: bool


def arith(a, b, kind: str) -> EuclideanScalar:
    """
    Opération binaire tronquée à ε^K.

    Args:
        a, b : scalaires euclidiens (ou réels, promus).
        kind : 'add' | 'sub' | 'mul' | 'div'.

    Raises:
        ZeroDivisionError : division par zéro ou coefficient dominant sous-dépassé.
    """
    a, b = as_scalar(a), as_scalar(b)
    operations = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "div": lambda: a / b,
    }
    if kind not in operations:
        raise ValueError(f"Opération inconnue : {kind!r} (attendu : {sorted(operations)})")
    return operations[kind]()


def compare(a, b) -> str:
    """Ordre total : 'less' | 'equal' | 'greater'."""
    signe = (as_scalar(a) - as_scalar(b)).sign()
    return {-1: "less", 0: "equal", 1: "greater"}[signe]


def standard_part(a) -> float:
    """
    Partie standard st(a) : coefficient de ε⁰ si a est fini,
    ±inf selon le signe du terme dominant sinon.
    """
    a = as_scalar(a)
    if a.is_zero:
        return 0.0
    if a.leading_exponent < 0:
        return math.inf if a.leading_coefficient > 0 else -math.inf
    return a.coefficient(0)


def classify(a) -> Classement:
    a = as_scalar(a)
    m = a.leading_exponent
    if m is None or m > 0:
        return Classement("infinitesimal", True, True)
    if m < 0:
        return Classement("infinite", False, False)
    return Classement("finite", True, False)


def infinitely_close(a, b) -> bool:
    return classify(as_scalar(a) - as_scalar(b)).infinitesimal


# ---------------------------------------------------------------------------
# Format texte
# ---------------------------------------------------------------------------

def _monome(k: int) -> str:
    if k == 0:
        return ""
    if k == 1:
        return SYMBOLE
    return f"{SYMBOLE}^{k}"


def format_scalar(a: EuclideanScalar) -> str:
    """Rendu 'c_{-m}ε^-m + … + c_0 + c_1ε + …' (exposants croissants)."""
    if a.is_zero:
        return "0"
    morceaux = []
    for i, (k, c) in enumerate(a.coeffs.items()):
        texte = f"{abs(c)!r}{_monome(k)}"
        if i == 0:
            morceaux.append(texte if c > 0 else f"-{texte}")
        else:
            morceaux.append(f"{'+' if c > 0 else '-'} {texte}")
    return " ".join(morceaux)


_TERME = re.compile(
    r"""\s*(?P<signe>[+-])?\s*
        (?P<coef>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?
        \s*\*?\s*
        (?P<eps>ε(?:\s*\^\s*\(?\s*(?P<exp>[+-]?\d+)\s*\)?)?)?
        \s*""",
    re.VERBOSE,
)


def parse_scalar(texte: str, order: int | None = None) -> EuclideanScalar:
    """
    Lit le format produit par format_scalar ; accepte aussi 'eps' pour ε
    et le signe moins typographique.

    Raises:
        ValueError : texte non reconnu.
    """
    source = texte.replace("eps", SYMBOLE).replace("−", "-").strip()
    if source == "0":
        return EuclideanScalar(order=order)
    coeffs: dict[int, float] = {}
    pos = 0
    premier = True
    while pos < len(source):
        m = _TERME.match(source, pos)
        if m is None or m.end() == pos or (m.group("coef") is None and m.group("eps") is None):
            raise ValueError(f"Scalaire euclidien illisible près de la position {pos} : {texte!r}")
        if not premier and m.group("signe") is None:
            raise ValueError(f"Signe manquant entre deux termes : {texte!r}")
        coef = float(m.group("coef")) if m.group("coef") else 1.0
        if m.group("signe") == "-":
            coef = -coef
        k = 0
        if m.group("eps"):
            k = int(m.group("exp")) if m.group("exp") else 1
        coeffs[k] = coeffs.get(k, 0.0) + coef
        pos = m.end()
        premier = False
    return EuclideanScalar(coeffs, order)
