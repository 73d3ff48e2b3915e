"""Does the rate vanish at t = 0?

The exponential energy wave function gives a Lorentzian rate with
R(0) = 1/(pi alpha) in the time representation, while the survival
picture predicts a rate that starts at zero.  Sample both and extrapolate.
"""
import math

from timedecay import (AppendixSurvivalDensity, LorentzianDensity, bin_events, sample_decays,
                       time_of_flight, zero_time_discriminator)

for name, density, seed in (("time representation", LorentzianDensity(1.0), 1),
                            ("survival picture", AppendixSurvivalDensity(1.0), 2)):
    ev = sample_decays(density, 1_000_000, seed=seed)
    z = zero_time_discriminator(bin_events(ev, 0.05, 20.0))
    tof = time_of_flight(density)
    mean = "undefined" if tof.mean is None else f"{tof.mean:.6f}"
    print(f"{name:20s} R(0) = {z.initial_rate:.4f} +/- {z.initial_rate_err:.4f}  favored: {z.favored}"
          f"  (negative-time draws {ev.n_negative}, mean time {mean})")
print(f"reference 1/pi = {1 / math.pi:.4f}")
