"""Broadband virtual-microphone sound-field simulator.

Renders mono sources through directional captured-field filters (three
spherical propagation paths, a lossy integrator, and an omni/bidirectional
mix), in real time and offline, and produces the directivity, limit-case
and proximity-effect analyses that characterize the model.
"""

from .geometry import (
    DEFAULT_SAMPLE_RATE,
    DEFAULT_SPEED_OF_SOUND,
    MicParams,
    ScenePose,
    TapSet,
    ValidityError,
    capsule_distances,
    pose_from_scene,
    tap_set,
)
from .filters import (
    DelayLine,
    FrequencyResponse,
    LossyIntegrator,
    bidi_response,
    default_grid,
    dipole_response,
    directivity_response,
    global_response,
    integrator_response,
    omni_response,
)
from .render import (
    DEFAULT_BLOCK_SIZE,
    MicSetup,
    MicVoice,
    Scene,
    SceneRenderer,
    TrajectoryPoint,
    render_pose,
)
from .audio_io import AudioBuffer, WavFormatError, read_wav, to_mono, write_wav
from .bands import BandSet, band_energies, third_octave_bands
from .analysis import (
    BandSilenceError,
    EnergyBalance,
    PatternTable,
    classical_directivity,
    energy_balance,
    limit_case_deviation,
    monochromatic_pattern,
    pink_noise,
    proximity_curve,
    subband_pattern,
)

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "BandSet",
    "BandSilenceError",
    "DEFAULT_BLOCK_SIZE",
    "DEFAULT_SAMPLE_RATE",
    "DEFAULT_SPEED_OF_SOUND",
    "DelayLine",
    "EnergyBalance",
    "FrequencyResponse",
    "LossyIntegrator",
    "MicParams",
    "MicSetup",
    "MicVoice",
    "PatternTable",
    "Scene",
    "SceneRenderer",
    "ScenePose",
    "TapSet",
    "TrajectoryPoint",
    "ValidityError",
    "WavFormatError",
    "band_energies",
    "bidi_response",
    "capsule_distances",
    "classical_directivity",
    "default_grid",
    "dipole_response",
    "directivity_response",
    "energy_balance",
    "global_response",
    "integrator_response",
    "limit_case_deviation",
    "monochromatic_pattern",
    "omni_response",
    "pink_noise",
    "pose_from_scene",
    "proximity_curve",
    "read_wav",
    "render_pose",
    "subband_pattern",
    "tap_set",
    "third_octave_bands",
    "to_mono",
    "write_wav",
    "__version__",
]
