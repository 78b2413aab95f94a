# Building and validating finite-dimensional *-bialgebras.
#
# Two example families cover the commutative and cocommutative ends:
# F(G), functions on a finite group with the dualized group law as
# coproduct, and C[G], the group algebra with grouplike coproduct.

import numpy as np

import qlevy
from qlevy.fixtures import cyclic_table, s3_table

# F(Z/2): indicator functions d0, d1 with pointwise product.
B = qlevy.function_algebra(cyclic_table(2))
print("F(Z/2): dim =", B.dim, "labels =", B.labels)
print("Delta(d1) coefficients (rows = left leg, cols = right leg):")
print(B.coprod[1].real)

# The validation report carries one residual per axiom.
report = qlevy.validate(B)
for name, value in sorted(report.residuals.items()):
    print(f"  {name:35s} {value:.2e}")
print("passed:", report.passed)

# S3 gives a noncommutative F(G); its coproduct is no longer symmetric.
B6 = qlevy.function_algebra(s3_table())
print("\nF(S3) cocommutativity defect:", B6.cocommutativity_defect())
print("F(Z/3) cocommutativity defect:",
      qlevy.function_algebra(cyclic_table(3)).cocommutativity_defect())

# Positivity and state checks run through the faithful block representation.
Bz2 = qlevy.group_algebra(cyclic_table(2))
w = qlevy.element_positive(Bz2, Bz2.multiply(Bz2.star([0.3, 1j]), [0.3, 1j]))
print("\nC[Z/2]: b*b positive:", w.positive, " margin:", round(w.margin, 6))

state = qlevy.functional_is_state(B, [0.3, 0.7])
print("(0.3, 0.7) is a state on F(Z/2):", state.is_state,
      " Gram min eig:", state.gram_min_eig)

# Descriptors round-trip through JSON files.
qlevy.save_descriptor(B6, "/tmp/fs3_demo.json")
loaded = qlevy.load_descriptor("/tmp/fs3_demo.json")
print("\nround trip exact:", np.array_equal(loaded.coprod, B6.coprod))
