"""Superscar quasimodes on rational polygons.

Unfold a rational polygon into a translation surface, find its periodic
cylinders, build time-averaged Gaussian quasimodes inside them and verify
their norm, spectral width and momentum concentration.
"""

__version__ = "0.1.0"

from .cylinders import (
    Cylinder,
    DirectionSequence,
    LengthSpectrum,
    approximating_sequence,
    count_lengths,
    detect_cylinder,
    periodic_directions,
    saddle_connections,
)
from .errors import AnalysisError, InputError, InvariantViolation, SuperscarError
from .momentum import (
    MomentumDensity,
    Observable,
    OrbitMeasure,
    concentration,
    images_quasimode,
    momentum_density,
    momentum_density_fft,
    orbit_pairing,
    pair,
)
from .polygon import RationalPolygon, TranslationSurface, build_polygon, unfold
from .quasimode import ParameterSchedule, Quasimode, build, defect, evaluate, schedule
from .spectral import bessel, fit_exponent, l2_norm_identity, lemma_prediction, spectral_width
from .wavepacket import GaussianPacket, coherent_state, propagate

__all__ = [name for name in dir() if not name.startswith("_")]
