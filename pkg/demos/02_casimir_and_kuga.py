"""Casimir elements in the enveloping algebra and the Kuga block form of Delta_1.

Run:  python3 demos/02_casimir_and_kuga.py
"""

import numpy as np

from liehodge import cochain, lie_core, models, uea

sl2 = models.sl2r()                     # basis H, E, F
H, E, F = 0, 1, 2

x = uea.nf((F, E), frame=sl2)
print("F E =", x)
omega = uea.casimir(sl2)
print("Casimir of sl(2,R) for the Killing form:", omega)
print("on the defining module:\n", uea.evaluate(omega, models.sl2r_standard_module()).real)

# In the Cartan frame, Omega - 2 Omega_K is the sum of squares Omega_bar.
frame = lie_core.cartan_frame(sl2)
eng = uea.Enveloping(frame)
gap = uea.casimir(frame, engine=eng) - 2 * uea.casimir_k(frame, engine=eng) \
    - uea.omega_bar(frame, engine=eng)
print("\nOmega - 2 Omega_K - Omega_bar has largest coefficient", gap.max_abs())

# On a unitary module the zeroth Laplacian is -tau(Omega_bar).
su2 = lie_core.cartan_frame(models.su2())
spin = models.spin_half_module().in_frame(su2)
print("su(2) spin-1/2: Delta_0 =\n", cochain.laplacian(su2, spin, 0).matrix.real)
print("-tau(Omega_bar) =\n", -uea.evaluate(uea.omega_bar(su2), spin).real + 0.0)

print("\nKuga blocks on sl(2,R)")
for rep in (models.trivial_module(3), models.adjoint_module(frame)):
    kb = cochain.kuga_blocks(frame, rep)
    L1 = cochain.laplacian(frame, rep, 1).matrix
    print(f"  {rep.name:8s} kind={kb.kind:8s} residual {np.abs(kb.block.matrix - L1).max():.1e}")
