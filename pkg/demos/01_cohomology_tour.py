"""Betti numbers and Laplacian spectra for the bundled algebras.

Run:  python3 demos/01_cohomology_tour.py
"""

import numpy as np

from liehodge import cochain, lie_core, models

algebras = {
    "su(2)": models.su2(),
    "sl(2,R)": models.sl2r(),
    "heisenberg": models.heisenberg(),
    "abelian R^3": models.abelian(3),
    "oscillator": models.oscillator(),
}

print("Betti numbers with trivial coefficients")
for name, spec in algebras.items():
    frame = lie_core.build_frame(spec)
    rep = models.trivial_module(spec.dim)
    b = [cochain.betti(frame, rep, q).value for q in range(spec.dim + 1)]
    print(f"  {name:12s} {b}")

# Harmonic forms are the kernel of the Laplacian.  On su(2) the nonzero
# spectrum is a single eigenvalue, which Hodge duality repeats in degree 2.
frame = lie_core.cartan_frame(models.su2())
rep = models.trivial_module(3)
print("\nsu(2) Laplacian spectra by degree")
for q in range(4):
    ev = np.linalg.eigvalsh(cochain.laplacian(frame, rep, q).matrix)
    print(f"  q={q}: {np.round(ev, 12)}")

# Twisting by spin-1/2 kills all cohomology: the Laplacian is invertible.
spin = models.spin_half_module().in_frame(frame)
print("\nsu(2) with spin-1/2 coefficients")
for q in range(4):
    ev = np.linalg.eigvalsh(cochain.laplacian(frame, spin, q).matrix)
    print(f"  q={q}: smallest eigenvalue {ev.min():.4f}")

# The four pieces of the Laplacian, checked against delta d + d delta.
print("\nComponent split on sl(2,R) adjoint, degree 1")
frame = lie_core.cartan_frame(models.sl2r())
adj = models.adjoint_module(frame)
parts = cochain.laplacian_components(frame, adj, 1)
names = ["circ", "wedge", "circ-wedge", "wedge-circ"]
for n, p in zip(names, parts):
    print(f"  {n:11s} norm {np.linalg.norm(p.matrix, 2):.4f}")
total = sum(p.matrix for p in parts)
print(f"  residual vs assembled: {np.abs(total - cochain.laplacian(frame, adj, 1).matrix).max():.1e}")
