"""Resolvent norm along the imaginary axis.

Sweeps ||(i lam - B)^{-1}|| over lam in [1, 1e6] for a few coupling exponents,
then looks at the per-mode resonance peaks.  When phi = 1 the product
lam * peak stays flat (analytic semigroup).  Below that it grows.

    python demos/resolvent_sweeps.py
"""
import numpy as np

from mgtfourier import ModalStack, SpectrumModel, build_spectrum, validate_params
from mgtfourier.sweep import analyticity_index, fit_exponent, global_norms, peak_window, run_sweep, track_peaks

params = validate_params(alpha=1, beta=2, a=1, eta=1, phi=1)
sigma = build_spectrum(SpectrumModel.power_law(count=256))

print("phi    sup|R|   lam at sup   sup lam|R|")
for phi in (0.0, 0.25, 0.5, 0.75, 1.0):
    q = params.replace(phi=phi)
    sw = run_sweep(q, ModalStack(q, sigma))
    i = int(np.argmax(sw.norm))
    print(f"{phi:4.2f}  {sw.sup:8.4f}  {sw.lam[i]:10.3f}  {np.max(sw.lam * sw.norm):11.3f}")

# The sup is finite for every phi, so the semigroup is exponentially stable.
# Whether lam * |R| stays bounded is what separates analytic from not.
print("\nphi    trend of lam*peak over the top two decades")
for phi in (0.25, 0.5, 0.75, 1.0):
    pk = track_peaks(params.replace(phi=phi), sigma)
    idx = analyticity_index(pk.lam_peak, pk.peak)
    print(f"{phi:4.2f}  slope {idx.trend.slope:+.3f}  (r2 {idx.trend.r_squared:.3f})")

# Peak decay exponent: ||R(i lam_n)|| ~ lam_n^(-psi) at the resonances.  The
# claimed values are 2 - 2 phi on (1/2, 3/4] and 2 phi - 1 on [3/4, 1).
print("\nphi    psi_hat   claimed")
for phi in (0.6, 0.7, 0.75, 0.8, 0.9):
    q = params.replace(phi=phi)
    stack = ModalStack(q, sigma)
    pk = track_peaks(q, stack)
    g, _ = global_norms(stack, pk.lam_peak)
    f = fit_exponent(pk.lam_peak, g, peak_window(pk.lam_peak))
    claimed = [c for c, ok in ((2 - 2 * phi, 0.5 < phi <= 0.75), (2 * phi - 1, 0.75 <= phi < 1)) if ok]
    print(f"{phi:4.2f}  {-f.slope:7.3f}   " + ", ".join(f"{c:.2f}" for c in claimed))
