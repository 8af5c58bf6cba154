"""Free multi-photon and multi-fermion dynamics on a periodic grid."""
from .algebra import check_subluminality_algebra, velocity_operators
from .certify import CertificationReport, certify_causal_evolution, escaped_mass
from .continuity import continuity_residual, translated_gaussian
from .propagation import GridSpec, SingleParticleMode, evolve_mode, gaussian_mode, plane_wave_mode
from .simulate import WaveRunConfig, boosted_snapshots, default_state, simulate
from .state import DensitySnapshot, FactorizedWaveState, assemble_density

__all__ = [
    "check_subluminality_algebra",
    "velocity_operators",
    "CertificationReport",
    "certify_causal_evolution",
    "escaped_mass",
    "continuity_residual",
    "translated_gaussian",
    "GridSpec",
    "SingleParticleMode",
    "evolve_mode",
    "gaussian_mode",
    "plane_wave_mode",
    "WaveRunConfig",
    "boosted_snapshots",
    "default_state",
    "simulate",
    "DensitySnapshot",
    "FactorizedWaveState",
    "assemble_density",
]
