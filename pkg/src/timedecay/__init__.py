"""Decay rates from the time representation of resonances.

Half-line Fourier transforms of energy wave functions, closed-form Gamow
and two-resonance rates, the survival-probability and quantum-beat
alternatives, Monte Carlo event generation, oscillation fits and
time-of-flight moments.
"""
__version__ = "0.1.0"

from .core import (DomainError, ExperimentConfig, MixedComponent, MixedState, QuadratureError,
                   Resonance, TimeSeries, UnitsContext, ValueKind, load_config, lifetime, wrap_phase)
from .densities import AppendixSurvivalDensity, CallableDensity, ExpSumDensity, LorentzianDensity
from .fitting import (FitError, FitOptions, FitResult, OscillationModel, fit_oscillation,
                      initial_guess, model_compare, zero_time_discriminator)
from .gamow import gamow_amplitude, gamow_rate, standard_rate, surviving_count
from .interference import (GSIMapping, KaonSystem, gsi_mapping, gsi_rate, interference_amplitude,
                           interference_rate, kaon_rates, mixing_ratio_for_amplitude)
from .observables import MomentReport, empirical_time_of_flight, time_of_flight
from .simulation import (EventSet, Histogram, SamplingError, bin_events, reconstruct_counts,
                         sample_decays)
from .spectral import (EnergyWaveFunction, ExpTail, PowerTail, appendix_wave_function,
                       breit_wigner_wave_function, half_line_fourier, nondecay_rate,
                       plancherel_defect, regularized_kernel, to_time_representation)
from .survival import (AppendixExample, QuantumBeatParams, SurvivalModelParams, appendix_pair,
                       quantum_beat_rate, survival_amplitude, survival_decay_rate,
                       survival_superposition_rate)
