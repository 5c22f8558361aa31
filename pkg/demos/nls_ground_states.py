"""Ground states of the limiting NLS and the critical exponent k_n in 2D.

Run: python3 demos/nls_ground_states.py
"""

import numpy as np

from solerlab import closed_form_1d, solve_ground_state
from solerlab import nls_linearization as nl

for k in (0.5, 1.0, 2.0):
    gs = solve_ground_state(1, k)
    r = gs.grid.nodes
    err = np.max(np.abs(gs.values - closed_form_1d(k, r)))
    print(f"1D, k = {k}: u(0) = {gs.values[0]:.6f}, max deviation from sech profile {err:.1e}")

lin = nl.build_l_operators(solve_ground_state(1, 2.0))
print("pairing <theta, l_+^-1 theta> at the critical k = 2:", nl.critical_pairing(lin))

print("bisecting for k_2 (about 10 s) ...")
print("k_2 =", nl.kn_scan(2, 0.55, 0.7))
