"""stda: spatio-temporal denoising autoencoder for interfered
range-Doppler maps, plus MLP and convolutional-autoencoder baselines.

Consumes triplet datasets through their manifest and RDC1 cubes, and
emits denoised maps scorable by the generator's `evaluate` command.
"""

__version__ = "0.1.0"

from .data import ManifestInfo, NormStats, TripletDataset, load_manifest  # noqa: F401
from .denoise import denoise_dataset  # noqa: F401
from .model import (  # noqa: F401
    BASELINE_KINDS,
    BaselineCae,
    BaselineMlp,
    EcaBlock,
    MobileDecoderBlock,
    MobileEncoderBlock,
    StdaConfig,
    StdaNet,
    baseline_forward,
    build_baseline,
    concat_frames,
    parameter_count,
)
from .rdc1 import read_cube, write_magnitude_cube  # noqa: F401
from .train import TrainConfig, load_checkpoint, save_checkpoint, train  # noqa: F401
