"""Formal sums of words in monodromy generators, with the maps ψ, φ, gr and evaluation.

A monomial is ``coeff * prod λ_j(x) * T_{i1 j1}(x1) ... T_{in jn}(xn)`` closed by a
terminal: ``right`` (acting on Ω), ``left`` (Ω† on the left) or ``operator``
(no terminal, evaluates to a matrix).  λ-factors stay symbolic until evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import TagMismatch
from .graded import GradedMatrix, GradedVector
from .kernels import EXACT, FLOAT, as_scalar, backend_of, format_scalar, parse_scalar
from .lattice import ALGEBRAS

__all__ = [
    "GenSymbol", "Monomial", "Expr", "T", "psi_expr", "phi_expr", "gr_expr", "evaluate",
    "TERMINALS", "other_algebra",
]

TERMINALS = ("right", "left", "operator")


def other_algebra(tag: str) -> str:
    return {"Y21": "Y12", "Y12": "Y21"}[tag]


@dataclass(frozen=True)
class GenSymbol:
    """Generator T_ij(param) of the algebra ``algebra`` (``"Y21"`` or ``"Y12"``)."""

    i: int
    j: int
    param: object
    algebra: str = "Y21"

    def __post_init__(self):
        if self.algebra not in ALGEBRAS:
            raise ValueError(f"unknown algebra tag {self.algebra!r}")
        if not (1 <= self.i <= 3 and 1 <= self.j <= 3):
            raise IndexError(f"generator index ({self.i},{self.j}) outside 1..3")

    @property
    def parity(self) -> int:
        gr = ALGEBRAS[self.algebra]
        return (gr[self.i] + gr[self.j]) % 2

    def __str__(self):
        tilde = "~" if self.algebra == "Y12" else ""
        return f"T{tilde}{self.i}{self.j}({self.param})"


def T(i: int, j: int, param, algebra: str = "Y21") -> GenSymbol:
    return GenSymbol(i, j, param, algebra)


@dataclass(frozen=True)
class Monomial:
    coeff: object
    lambdas: tuple = ()
    word: tuple = ()
    terminal: str = "right"

    def __post_init__(self):
        if self.terminal not in TERMINALS:
            raise ValueError(f"terminal must be one of {TERMINALS}")
        object.__setattr__(self, "lambdas", tuple(sorted(tuple(x) for x in self.lambdas)
                                                  if _sortable(self.lambdas) else tuple(self.lambdas)))
        object.__setattr__(self, "word", tuple(self.word))

    @property
    def parity(self) -> int:
        return sum(s.parity for s in self.word) % 2

    def scaled(self, k) -> "Monomial":
        return Monomial(self.coeff * k, self.lambdas, self.word, self.terminal)


def _sortable(lams) -> bool:
    try:
        sorted(tuple(x) for x in lams)
        return True
    except TypeError:  # complex parameters are unordered
        return False


def _koszul_reverse_sign(word: Sequence[GenSymbol]) -> int:
    odd = sum(s.parity for s in word)
    return -1 if (odd * (odd - 1) // 2) % 2 else 1


class Expr:
    """Immutable formal sum of monomials sharing one algebra tag and one terminal."""

    __slots__ = ("terms", "algebra", "terminal")

    def __init__(self, terms: Iterable[Monomial], algebra: str, terminal: str = "right"):
        terms = tuple(terms)
        if algebra not in ALGEBRAS:
            raise ValueError(f"unknown algebra tag {algebra!r}")
        for m in terms:
            if m.terminal != terminal:
                raise ValueError("all monomials must share the terminal")
            if any(s.algebra != algebra for s in m.word):
                raise TagMismatch("symbol from another algebra inside an expression")
        self.terms = terms
        self.algebra = algebra
        self.terminal = terminal

    # -- construction
    @classmethod
    def zero(cls, algebra: str, terminal: str = "right") -> "Expr":
        return cls((), algebra, terminal)

    @classmethod
    def monomial(cls, word: Sequence[GenSymbol], coeff=1, lambdas=(), algebra: str = "Y21",
                 terminal: str = "right") -> "Expr":
        return cls((Monomial(coeff, tuple(lambdas), tuple(word), terminal),), algebra, terminal)

    @classmethod
    def vacuum(cls, algebra: str, terminal: str = "right", coeff=1) -> "Expr":
        return cls.monomial((), coeff, (), algebra, terminal)

    def _same(self, other: "Expr"):
        if not isinstance(other, Expr):
            raise TypeError("can only combine expressions")
        if other.algebra != self.algebra:
            raise TagMismatch(f"cannot combine {self.algebra} with {other.algebra}")
        if other.terminal != self.terminal:
            raise ValueError("cannot combine expressions with different terminals")

    def __add__(self, other: "Expr") -> "Expr":
        self._same(other)
        return Expr(self.terms + other.terms, self.algebra, self.terminal)

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __neg__(self) -> "Expr":
        return self * -1

    def __mul__(self, k) -> "Expr":
        if isinstance(k, Expr):
            return NotImplemented
        return Expr((m.scaled(k) for m in self.terms), self.algebra, self.terminal)

    __rmul__ = __mul__

    def __len__(self):
        return len(self.terms)

    def lmul(self, *symbols: GenSymbol, coeff=1, lambdas=()) -> "Expr":
        """Multiply every word on the left by ``symbols``."""
        if self.terminal == "left":
            raise ValueError("left multiplication of a covector expression")
        sym = tuple(symbols)
        return Expr((Monomial(m.coeff * coeff, m.lambdas + tuple(lambdas), sym + m.word, m.terminal)
                     for m in self.terms), self.algebra, self.terminal)

    def rmul(self, *symbols: GenSymbol, coeff=1, lambdas=()) -> "Expr":
        """Multiply every word on the right by ``symbols``."""
        if self.terminal == "right":
            raise ValueError("right multiplication of a vector expression")
        sym = tuple(symbols)
        return Expr((Monomial(m.coeff * coeff, m.lambdas + tuple(lambdas), m.word + sym, m.terminal)
                     for m in self.terms), self.algebra, self.terminal)

    def collect(self) -> "Expr":
        """Merge monomials with identical words and λ-factors; drop zero coefficients."""
        acc: dict = {}
        order = []
        for m in self.terms:
            key = (m.lambdas, m.word)
            if key not in acc:
                order.append(key)
                acc[key] = m.coeff
            else:
                acc[key] = acc[key] + m.coeff
        terms = [Monomial(acc[k], k[0], k[1], self.terminal) for k in order if acc[k] != 0]
        return Expr(terms, self.algebra, self.terminal)

    def __repr__(self):
        return f"Expr({len(self.terms)} terms, {self.algebra}, {self.terminal})"

    def __str__(self):
        if not self.terms:
            return "0"
        end = {"right": " Ω", "left": "", "operator": ""}[self.terminal]
        start = "Ω† " if self.terminal == "left" else ""
        parts = []
        for m in self.terms:
            lam = "".join(f"λ{j}({x})" for j, x in m.lambdas)
            parts.append(f"({m.coeff}){lam} {start}{' '.join(map(str, m.word))}{end}")
        return " + ".join(parts)

    # -- serialization
    def to_dict(self) -> dict:
        return {
            "algebra": self.algebra,
            "terminal": self.terminal,
            "terms": [
                {
                    "coeff": format_scalar(m.coeff),
                    "lambdas": [[j, format_scalar(x)] for j, x in m.lambdas],
                    "word": [["T", s.i, s.j, format_scalar(s.param)] for s in m.word],
                    "terminal": m.terminal,
                }
                for m in self.terms
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Expr":
        alg, term = data["algebra"], data["terminal"]

        def scal(x):
            return parse_scalar(x, FLOAT if isinstance(x, list) else EXACT)

        terms = []
        for t in data["terms"]:
            word = tuple(GenSymbol(int(i), int(j), scal(p), alg) for _, i, j, p in t["word"])
            lams = tuple((int(j), scal(x)) for j, x in t["lambdas"])
            terms.append(Monomial(scal(t["coeff"]), lams, word, t["terminal"]))
        return cls(terms, alg, term)

    @classmethod
    def from_json(cls, text: str) -> "Expr":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------- morphisms

def _psi_symbol(s: GenSymbol):
    gr = ALGEBRAS[s.algebra]
    sign = -1 if (gr[s.i] * gr[s.j] + gr[s.i]) % 2 else 1
    return sign, GenSymbol(s.j, s.i, s.param, s.algebra)


def psi_expr(e: Expr) -> Expr:
    """Antimorphism T_ij -> (-1)^{[i][j]+[i]} T_ji: reverse words with Koszul sign, swap Ω and Ω†."""
    flip = {"right": "left", "left": "right", "operator": "operator"}[e.terminal]
    terms = []
    for m in e.terms:
        sign = _koszul_reverse_sign(m.word)
        word = []
        for s in reversed(m.word):
            sg, t = _psi_symbol(s)
            sign *= sg
            word.append(t)
        terms.append(Monomial(m.coeff * sign, m.lambdas, tuple(word), flip))
    return Expr(terms, e.algebra, flip)


def phi_expr(e: Expr) -> Expr:
    """Morphism T_ij -> (-1)^{[i][j]+[j]+1} T~_{4-j,4-i}; λ_j -> -λ~_{4-j}; toggles the algebra."""
    gr = ALGEBRAS[e.algebra]
    target = other_algebra(e.algebra)
    terms = []
    for m in e.terms:
        sign = 1
        word = []
        for s in m.word:
            if (gr[s.i] * gr[s.j] + gr[s.j] + 1) % 2:
                sign = -sign
            word.append(GenSymbol(4 - s.j, 4 - s.i, s.param, target))
        lams = []
        for j, x in m.lambdas:
            sign = -sign
            lams.append((4 - j, x))
        terms.append(Monomial(m.coeff * sign, tuple(lams), tuple(word), m.terminal))
    return Expr(terms, target, e.terminal)


def gr_expr(e: Expr) -> Expr:
    """Automorphism T_ij -> (-1)^{[i]+[j]} T_ij."""
    terms = []
    for m in e.terms:
        sign = -1 if m.parity else 1
        terms.append(Monomial(m.coeff * sign, m.lambdas, m.word, m.terminal))
    return Expr(terms, e.algebra, e.terminal)


# ---------------------------------------------------------------- evaluation

def evaluate(e: Expr, fam):
    """Realize ``e`` in a monodromy family; words share suffix (or prefix) products via a cache."""
    if e.algebra != fam.algebra:
        raise TagMismatch(f"expression in {e.algebra} evaluated on a {fam.algebra} family")
    backend = fam.backend

    def mat(s: GenSymbol):
        return fam.entry(s.i, s.j, s.param).entries

    def scalar(m: Monomial):
        val = as_scalar(m.coeff, backend)
        for j, x in m.lambdas:
            val = val * fam.weight(j, x)
        return val

    cache: dict = {}
    if e.terminal == "right":
        base = fam.omega().entries
        acc = GradedVector.zero(fam.space, backend, "column").entries.copy()
        for m in e.terms:
            vec = base
            key = ()
            for s in reversed(m.word):
                key = (s,) + key
                hit = cache.get(key)
                if hit is None:
                    hit = mat(s) @ vec
                    cache[key] = hit
                vec = hit
            acc = acc + vec * scalar(m)
        return GradedVector(fam.space, acc, "column")
    if e.terminal == "left":
        base = fam.omega_dag().entries
        acc = GradedVector.zero(fam.space, backend, "row").entries.copy()
        for m in e.terms:
            vec = base
            key = ()
            for s in m.word:
                key = key + (s,)
                hit = cache.get(key)
                if hit is None:
                    hit = vec @ mat(s)
                    cache[key] = hit
                vec = hit
            acc = acc + vec * scalar(m)
        return GradedVector(fam.space, acc, "row")
    ident = fam.identity().entries
    acc = ident * 0
    for m in e.terms:
        op = ident
        key = ()
        for s in m.word:
            key = key + (s,)
            hit = cache.get(key)
            if hit is None:
                hit = op @ mat(s)
                cache[key] = hit
            op = hit
        acc = acc + op * scalar(m)
    return GradedMatrix(fam.space, acc, check=False)
