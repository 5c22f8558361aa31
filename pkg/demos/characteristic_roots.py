"""Contour-based characteristic roots of a matrix polynomial.

Run: python3 demos/characteristic_roots.py
"""

import numpy as np
import scipy.linalg as la

from solerlab import char_roots as cr

rng = np.random.default_rng(7)
coeffs = [rng.standard_normal((4, 4)) for _ in range(3)]
family = cr.matrix_polynomial(coeffs, label="A0 + A1 z + A2 z^2")
report = cr.find_char_roots(family, cr.Contour(0.0, 1.0, 128))
print(f"{report.total} roots in the unit disc (winding {report.winding.real:.6f})")

# the same roots from the linearised 8 x 8 generalized eigenproblem
n = 4
A = np.block([[np.zeros((n, n)), np.eye(n)], [-coeffs[0], -coeffs[1]]])
B = np.block([[np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), coeffs[2]]])
reference = [z for z in la.eigvals(A, B) if abs(z) < 1]
for z in report.roots:
    print(f"  {z:.10f}   nearest companion root {min(reference, key=lambda w: abs(w - z)):.10f}")
