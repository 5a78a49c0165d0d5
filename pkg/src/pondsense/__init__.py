"""Fisher-information engine for in-situ laser-intensity estimation from
strong-field ionization."""

from .field import LaserField, up_from_intensity, omega_from_wavelength, standard_field
from .saddle import select_channels, mono_saddle_times, pulse_saddle_times, action_bundle
from .amplitude import (AmplitudeGrid, InterferenceOptions, bound_matrix_element,
                        compute_amplitude_grid, intercycle_factor, chi)
from .measure import MomentumGrid, build_grid, default_p_max, energy_spectrum
from .fisher import (FisherReport, quantum_fisher, cfi_full, cfi_coarse,
                     cfi_yield, cfi_spectral, cramer_rao, qf_asymptote,
                     compute_report)
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
