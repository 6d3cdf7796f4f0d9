"""Exact values of the rational building blocks and of the Izergin-type kernel."""

from gmpy2 import mpq

from superbethe.kernels import H_norm, f, g, h, izergin_kernel, product_over, verify_scalar_identity

c = mpq(1)
print("g(3,1) with c=2:", g(3, 1, 2), "  h(3,1):", h(3, 1, 2), "  f(1,3):", f(1, 3, 2))
print("f({2},{4,6}) =", product_over("f", [2], [4, 6], c))

# H is not symmetric: reversing the order can hit a zero of h
print("H(1,2) =", H_norm([1, 2], c), " H*(1,2) =", H_norm([1, 2], c, conjugated=True))

K = izergin_kernel([3, 5], [1, 2], c)
print("K(3,5 | 1,2) =", K)
print("K is symmetric in v:", K == izergin_kernel([5, 3], [1, 2], c))

# The kernel obeys a recursion that peels off one v; its residual is an exact rational
sample = {"v": [mpq(3), mpq(5), mpq(-2, 3)], "u": [mpq(1), mpq(2), mpq(7, 2)]}
print("recursion residual:", verify_scalar_identity("kernel-recursion", sample, c))
