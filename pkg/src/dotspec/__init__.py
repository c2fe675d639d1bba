"""Two-electron quantum dot spectra in a magnetic field.

Three routes to the relative-motion energy spectrum:

* time-domain semiclassical propagation of frozen Gaussians with a
  Monte-Carlo phase-space average (:mod:`dotspec.hk`),
* energy-domain radial WKB quantization with the 2D Langer rule
  (:mod:`dotspec.wkb`),
* exact wavepacket propagation on a Cartesian grid (:mod:`dotspec.qmref`),

plus Fourier spectroscopy of autocorrelation series (:mod:`dotspec.spectral`)
and a CLI orchestrating runs and cross-method comparison reports
(:mod:`dotspec.cli`).
"""

from .model import DotParameters, PhasePoint, SYMPLECTIC_J, SingularOriginError
from .model import gradient, hamiltonian, hessian
from .dynamics import IntegratorConfig, TrajectoryState, monodromy_check, propagate, step
from .hk import (
    BranchAmbiguityError,
    CorrelationSeries,
    GaussianState,
    HKConfig,
    autocorrelation,
    continuous_sqrt,
    hk_prefactor,
    overlap_gaussian,
    sample_initial,
    standard_packet,
)
from .spectral import SpectrumResult, Peak, find_peaks, label_peaks, spectrum
from .wkb import WkbLevel, fock_darwin, radial_action, wkb_energy, wkb_table
from .qmref import GridSpec, GridWavefunction, evolve, init_packet, quantum_spectrum

__version__ = "0.1.0"
