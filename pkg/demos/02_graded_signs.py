"""Koszul signs and supertransposition on tensor powers of C^{2|1}."""

from superbethe.graded import (
    GradedSpace, GradedVector, Grading, elementary, graded_kron, identity, perm_P, supertrace, supertranspose,
)

gr = Grading.distinguished(2, 1)  # e1, e2 even; e3 odd
one, two = GradedSpace.power(gr, 1), GradedSpace.power(gr, 2)
E = lambda space, p, i, j: elementary(space, p, i, j)

# Two odd operators on different factors anticommute
A, B = E(two, 1, 3, 2), E(two, 2, 3, 1)
print("odd ⊗ odd anticommute:", (A @ B + B @ A).is_zero())
print("B·A equals the graded kron:", (B @ A).equals(-graded_kron(E(one, 1, 3, 2), E(one, 1, 3, 1))))

print("str(E_11) =", supertrace(E(one, 1, 1, 1)), " str(E_33) =", supertrace(E(one, 1, 3, 3)),
      " str(I) =", supertrace(identity(one)))

# Supertransposition has order four on odd operators
X = E(one, 1, 3, 2)
for k in range(1, 5):
    Y = supertranspose(X, k)
    print(f"E_32^(t^{k}) nonzero entries:", [(one.label(i), one.label(j), Y.entries[i, j])
                                              for i in range(3) for j in range(3) if Y.entries[i, j] != 0])

P = perm_P(gr)
print("P e3⊗e3 = -e3⊗e3:", (P @ GradedVector.basis(two, (3, 3))).equals(-GradedVector.basis(two, (3, 3))))
