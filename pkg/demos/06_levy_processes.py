# Discrete quantum Levy processes and convolution semigroups of states.
#
# The discrete process places convolution iterates of the one-step map on
# tensor legs; its vacuum expectations satisfy the weak Levy-process axioms
# exactly, and the one-dimensional distribution converges to the semigroup
# of states generated by the underlying functional.

import numpy as np

import qlevy
from qlevy.fixtures import cyclic_table, packaged_pair, s3_table

B, gamma = packaged_pair("fz2")
T = qlevy.gns_triple(B, gamma)
psi = qlevy.walk_map(B, T.pi, T.xi, 0.25)

process = qlevy.DiscreteLevyProcess(B, psi, 4)
report = qlevy.verify_wqlp_axioms(process)
print("weak Levy-process axioms on 4 steps (h = 1/4):")
for name, value in sorted(report.residuals.items()):
    print(f"  {name:28s} {value:.2e}")
print("  one-step distance (info)    ", report.one_step_distance)

# Misplacing an increment onto overlapping legs breaks factorization:
from qlevy.levy import misplaced_pair_defect
print("overlap-misplacement defect:",
      round(misplaced_pair_defect(process, 0, 2, 2, 4, shift=-1), 6))

# States along the semigroup, with certification.
grid = [0.1 * k for k in range(11)]
states, srep = qlevy.semigroup_of_states(B, gamma, grid)
print("\nt     state coefficients          unit defect   Gram min eig")
for t, lam, u, g_eig in list(zip(srep.times, states, srep.unit_defects,
                                 srep.gram_min_eigs))[::5]:
    print(f"{t:3.1f}   {np.round(lam.real, 6)}   {u:.1e}      {g_eig:.4f}")

# The commutative sector has an independent classical oracle: the rate
# matrix read off from gamma, exponentiated directly.
print("\nclassical-chain deviations:")
print("  F(Z/2):", qlevy.classical_oracle_compare(cyclic_table(2),
                                                  packaged_pair("fz2")[1], grid[1:]))
print("  F(Z/3):", qlevy.classical_oracle_compare(cyclic_table(3),
                                                  packaged_pair("fz3")[1], grid[1:]))
print("  F(S3): ", qlevy.classical_oracle_compare(s3_table(),
                                                  packaged_pair("fs3")[1], grid[1:]))

# Differentiating the semigroup at t = 0 recovers a generating functional.
h = 1e-4
derivative = (qlevy.conv_exp(B, gamma, h) - qlevy.conv_exp(B, gamma, -h)) / (2 * h)
print("\nderivative at 0 passes generating check:",
      qlevy.check_generating(B, derivative, tol=1e-6).passed)
