"""
From a raw recording to muscle networks and their figures
=========================================================

One trial of 12-channel EMG becomes a 12x12 coherence matrix: entry
(i, j) is the pair's magnitude-squared coherence averaged over the
one-sided frequency grid.  Flattening the off-diagonal entries of every
trial's matrix (132 values: both symmetric halves) and stacking the
trials gives the 102 x 132 feature table the classifier consumes.  This
script walks that path on a synthetic subject and writes heatmap and
network renderings as SVG.

Run as:  python3 demos/03_networks.py
"""

from pathlib import Path

import numpy as np

from myocoherence.figures import render_heatmap, render_network
from myocoherence.netfeat import build_feature_table, median_matrix, split
from myocoherence.report import RunConfig, preprocess_subject, subject_coherence
from myocoherence.spectral import msc
from myocoherence.synthetic import channel_groups, generate_subject, source_band

# ------------------------------------------------------------------
# A synthetic subject with short movements keeps this quick.  The
# generator couples disjoint channel groups per gesture, so the
# networks below have visible block structure.

dataset = generate_subject(subject_id=1, seed=0, move_seconds=1.5, rest_seconds=0.25)
print(f"recording: {dataset.emg.shape[0]} samples x {dataset.emg.shape[1]} channels "
      f"at {dataset.sample_rate_hz:.0f} Hz")

config = RunConfig(synthetic_subjects=1)
segments, stats = preprocess_subject(dataset, config)
print(f"segmented into {len(segments)} trials "
      f"(z-scored against repetitions {config.train_repetitions})")

matrices = subject_coherence(segments, config)

# ------------------------------------------------------------------
# Look at gesture 5.  Its coupled channel groups should light up as
# blocks; everything else stays near the noise floor.

gesture = 5
groups = channel_groups(gesture)
low, high = source_band(gesture)
print(f"\ngesture {gesture}: coupled groups "
      f"{[g.tolist() for g in groups]}, source band {low:.0f}-{high:.0f} Hz")

per_rep = [m for m in matrices if m.gesture == gesture]
med = median_matrix(per_rep)

i, j = groups[0][0], groups[0][-1]
k = groups[-1][0] if len(groups) > 1 else 11
print(f"median coherence within group ({i},{j}): {med.values[i, j]:.3f}")
print(f"median coherence across groups ({i},{k}): {med.values[i, k]:.3f}")

# The matrix entries average over the whole grid, which dilutes the
# band-limited coupling; restricted to the source band the contrast is
# much sharper.
seg = next(s for s in segments if s.gesture == gesture)
spec_within = msc(seg.data[i], seg.data[j], config.welch_params())
spec_across = msc(seg.data[i], seg.data[k], config.welch_params())
in_band = (spec_within.frequencies >= low) & (spec_within.frequencies <= high)
print(f"in-band only: within {spec_within.values[in_band].mean():.3f}, "
      f"across {spec_across.values[in_band].mean():.3f}")

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)
heat_path = out_dir / f"gesture_{gesture:02d}_heatmap.svg"
net_path = out_dir / f"gesture_{gesture:02d}_network.svg"
heat_path.write_text(render_heatmap(med, title=f"gesture {gesture} median coherence"))
net_path.write_text(render_network(med, title=f"gesture {gesture} muscle network"))
print(f"wrote {heat_path}")
print(f"wrote {net_path}")

# ------------------------------------------------------------------
# The feature table: one row per trial, one column per ordered channel
# pair (both halves of the symmetric matrix are kept).

table = build_feature_table(matrices)
print(f"\nfeature table: {table.n_rows} rows x {table.features.shape[1]} columns")
print(f"first columns: {table.column_names[:3]} ...")

train, test = split(table)
print(f"split by repetition: {train.n_rows} train rows, {test.n_rows} test rows")

# All features are coherences, so they live in [0, 1].
print(f"feature range: [{table.features.min():.4f}, {table.features.max():.4f}]")

# A row can be folded back into a matrix for plotting.
row0 = table.row_matrix(0)
print(f"row 0 reconstitutes gesture {row0.gesture}, repetition {row0.repetition}; "
      f"symmetric: {bool(np.allclose(row0.values, row0.values.T))}")
