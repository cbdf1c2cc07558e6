import json
import subprocess
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """Small triplet dataset generated through the rdlab CLI."""
    root = tmp_path_factory.mktemp("stda_ds")
    # 8 triplets x 7 levels = 56 samples, 34 of them in the train split
    scene = {"sequences": 1, "frames_per_sequence": 24, "master_seed": 42}
    scene_path = root / "scene.json"
    scene_path.write_text(json.dumps(scene))
    out = root / "ds"
    subprocess.run(
        ["rdlab", "synthesize-dataset", "--scene", str(scene_path), "--out-dir", str(out)],
        check=True, capture_output=True,
    )
    return out
