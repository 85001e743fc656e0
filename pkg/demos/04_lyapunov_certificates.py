"""Checking and constructing Lyapunov certificates.

A positive definite weight P certifies the loop when Q = -(A^T P + P A)
is positive definite too. The stock scenario's weight passes with
eigenvalues exactly {1, 2, 3}; a second published weight turns out to
give only a semidefinite Q (one eigenvalue is negative), which the
checker reports rather than hides. `synthesize_p` constructs a certified
weight directly from the Lyapunov equation.
"""

import numpy as np

import ftcsim as F
from ftcsim import scenario_io, verify

s = scenario_io.loads(scenario_io.default_scenario_text()).scenario
A = s.core.A

print("== supplied weight from the stock scenario")
rep = verify.check_condition(A, s.adaptation.P, verify.LABEL_RECONFIG)
print(verify.render_report(rep))

print("\n== a weight that looks fine but fails the strict inequality")
p_semi = np.array([[2.5, 2.5, 0.5],
                   [2.5, 6.5, 1.5],
                   [0.5, 1.5, 0.5]])
rep_semi = verify.check_condition(A, p_semi, verify.LABEL_NOMINAL)
print(verify.render_report(rep_semi))
print("note: P itself is positive definite; the certificate still fails"
      if rep_semi.P_pd else "")

print("\n== constructing a certified weight from scratch")
P, rep_auto = verify.synthesize_p(A)
print("P =")
for row in P:
    print("   ", "  ".join(f"{v: 10.6f}" for v in row))
residual = np.max(np.abs(A.T @ P + P @ A + np.eye(3)))
print(f"residual of A^T P + P A + I: {residual:.2e}")
print(verify.render_report(rep_auto))
