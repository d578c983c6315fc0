"""The zonal spherical function of SL(2, R) and Schwartz weights.

Run:  python3 demos/04_spherical_function.py
"""

import numpy as np
import scipy.special

from liehodge import group_numerics as gn

x = np.array([[2.0, 1.0], [1.0, 1.0]])
f = gn.iwasawa_nak(x)
print("Iwasawa x = n a k\n n =", f.n, "\n a =", f.a, "\n k =", f.k)
k1, a, k2 = gn.cartan_kak(x)
print("KAK singular values", np.diag(a), "  |x|_p =", gn.norm_p(x))

# Along a_t = diag(e^t, e^-t) the K-average has an elliptic closed form.
print("\n t    phi0(a_t)         closed form")
for t in (0.0, 0.5, 1.0, 2.0, 3.0):
    a_t = np.diag([np.exp(t), np.exp(-t)])
    ref = 2 / np.pi * scipy.special.ellipk(np.tanh(t) ** 2) / np.cosh(t)
    print(f"{t:4.1f}  {gn.spherical_phi0_adaptive(a_t):.15f}  {ref:.15f}")

fit = gn.growth_fit(np.linspace(0.5, 5, 19))
print(f"\nphi0(a_t) <= {fit.C:.3f} e^(-t) (1+t)^{fit.d:.2f}   (fit passed: {fit.passed})")

print("\nSchwartz weight (1+|x|)^r phi0(x)^(-2/p), r = 2")
for p in (1, 2, np.inf):
    print(f"  p={p}: {gn.seminorm_weight(x, 2, p):.4f}")
