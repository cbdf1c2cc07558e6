"""Generate a small triplet dataset and inspect its manifest.

Every frame of a simulated sequence is corrupted at seven SINR levels by
Monte-Carlo aggressors; consecutive frames form non-overlapping
(t, t-1, t-2) samples with the clean frame-t map as reference, split
60/20/20, normalized and stored as RDC1 cubes.
"""

import collections
import sys
import tempfile
from pathlib import Path

from rdlab import SceneSpec, load_manifest, read_rd_cube, synthesize_dataset

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "ds"
scene = SceneSpec(sequences=2, frames_per_sequence=30, master_seed=7)

manifest = synthesize_dataset(scene, out_dir)
print("counts:", dict(manifest.counts))
print("normalization:", manifest.normalization.as_dict())
print("config hash:", manifest.config_hash[:16], "...")

_, samples = load_manifest(out_dir)
per_split = collections.Counter(s.split for s in samples)
per_level = collections.Counter(s.sinr_db for s in samples)
print("split sizes:", dict(per_split))
print("samples per level:", {k: per_level[k] for k in sorted(per_level)})

sample = samples[0]
print(f"\nsample {sample.sample_id} ({sample.split}):")
print(f"  sequence {sample.sequence}, frame t={sample.frame_t}, "
      f"level {sample.sinr_db:+.0f} dB (measured {sample.measured_sinr_db:+.2f} dB)")
print(f"  aggressor: {sample.interferer['carrier_freq_hz']/1e9:.2f} GHz, "
      f"{sample.interferer['sweep_bandwidth_hz']/1e6:.0f} MHz / "
      f"{sample.interferer['sweep_duration_s']*1e6:.1f} us at "
      f"{sample.interferer['distance_m']:.1f} m")
cube = read_rd_cube(out_dir / sample.files["t"]["path"])
print(f"  map cube {sample.files['t']['path']}: {cube.shape} {cube.dtype}, "
      f"values in [{cube.min():.3f}, {cube.max():.3f}]")
print(f"\ndataset written to {out_dir}")
