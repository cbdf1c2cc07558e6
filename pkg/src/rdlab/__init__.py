"""rdlab: a deterministic FMCW radar interference laboratory.

Synthesizes interfered chirp-sequence radar frames, transforms them to
range-Doppler maps, generates triplet datasets for denoiser training,
mitigates interference with classical methods and scores everything with
SINR / EVM / AP metrics.
"""

__version__ = "0.1.0"

from .signal_model import (  # noqa: F401
    BeatFrame,
    InterfererConfig,
    RadarConfig,
    Target,
    chirp_frequency,
    scenario_preset,
    seeded_rng,
    superimpose,
    synthesize_clean_beat,
    synthesize_interference,
    thermal_noise_power,
)
from .rd_pipeline import (  # noqa: F401
    NormalizationRecord,
    RdMap,
    denormalize,
    expected_peak_bin,
    normalize,
    range_doppler_map,
    to_db,
    to_magnitude,
)
from .link_budget import (  # noqa: F401
    InfeasibleSinrError,
    PowerBudget,
    echo_power,
    interference_power,
    scale_to_sinr,
)
from .mitigation import (  # noqa: F401
    InterferenceMask,
    detect_interfered_samples,
    imat,
    zeroing,
)
from .detection_metrics import (  # noqa: F401
    CellSet,
    CfarParams,
    NoObjectCellsError,
    Peak,
    PeakList,
    average_precision,
    ca_cfar,
    cluster_peaks,
    evm,
    object_noise_cells,
    sinr,
)
from .cube_io import (  # noqa: F401
    CubeFormatError,
    ingest_adc_cube,
    read_rd_cube,
    write_rd_cube,
)
from .dataset import (  # noqa: F401
    SINR_LEVELS_DB,
    DatasetManifest,
    SampleRecord,
    SceneSpec,
    clutter_filter,
    load_manifest,
    sample_interferer,
    synthesize_dataset,
)
from .evaluation import (  # noqa: F401
    MetricRow,
    evaluate_dataset,
    evaluate_sample,
    write_metrics_csv,
    write_metrics_jsonl,
)
