"""Real eigenvalue pair of a Soler solitary wave for k = 3 and its eps^2 scaling.

Run: python3 demos/dirac_instability.py   (about 30 s)
"""

from solerlab import Nonlinearity
from solerlab import dirac_linearization as dl

scan = dl.spectrum_scan(1, Nonlinearity(3.0), 1.0, (0.995, 0.998, 0.999))
tracked = dl.track_origin(scan)
for omega, eps, lam in zip(scan.omegas, scan.epsilons, tracked["lambda_plus"]):
    print(f"omega = {omega}: eps = {eps:.4f}, unstable eigenvalue {lam:.3e}")
print(f"log-log slope against eps: {tracked['exponent']:.3f} (eps^2 scaling expected)")
