"""A Breit-Wigner truncated at E = 0 is not quite exponential.

The half-line Fourier transform of N/(E - z) is evaluated on a grid and
compared with the Gamow rate Gamma exp(-Gamma t) of the same pole.
"""
import numpy as np

from timedecay import Resonance, breit_wigner_wave_function, gamow_rate, nondecay_rate

e_r, gamma = 10.0, 1.0
t = np.array([0.5, 1.0, 2.0, 3.0, 5.0, 8.0])
rate = nondecay_rate(breit_wigner_wave_function(e_r, gamma), t, tol=1e-10).values
pure = gamow_rate(Resonance(e_r, gamma), 1.0, t)
for ti, r, p in zip(t, rate, pure):
    print(f"t={ti:4.1f}  R={r:.6e}  Gamow={p:.6e}  rel. deviation={(r - p) / p:+.3e}")
