"""Formal words in the generators, the maps ψ, φ, gr, and evaluation on a chain."""

from gmpy2 import mpq

from superbethe.expr import Expr, T, evaluate, gr_expr, phi_expr, psi_expr
from superbethe.lattice import ModelSpec, MonodromyFamily, PhiImageFamily

u, v = mpq(1, 2), mpq(3)
word = Expr.monomial([T(2, 3, v), T(1, 2, u)])
print("word       :", word)
print("ψ(word)    :", psi_expr(word))
print("φ(word)    :", phi_expr(word))
print("gr(word)   :", gr_expr(word))
print("ψψ = gr    :", len((psi_expr(psi_expr(word)) - gr_expr(word)).collect()) == 0)

fam = MonodromyFamily(ModelSpec.from_dict({"m": 2, "n": 1, "L": 2, "z": ["0", "1"], "kappa": ["1", "2", "3"]}))
vec = evaluate(word, fam)
print("T_23(v)T_12(u)Ω components:", [(lab, str(x)) for lab, x in vec.components()])

# On the φ-image family (a Y(1|2) chain on the same space) φ(word) evaluates to the same vector
print("φ is realized by the image family:", evaluate(phi_expr(word), PhiImageFamily(fam)).equals(vec))
print("JSON round trip:", Expr.from_json(word.to_json()).to_json() == word.to_json())
