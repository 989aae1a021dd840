"""Generate the committed synthetic retrieval fixture.

Four subjects, ten 64x64 images each. Every subject is a sinusoidal grating
with its own orientation and frequency; images within a subject differ by
phase, a little orientation jitter, and pixel noise. Run as a script to
regenerate the PGM files and the manifest (the committed files are
canonical; this exists for provenance).
"""

import csv
import math
from pathlib import Path

import numpy as np

from fdlbp.imgproc import write_pgm

SIZE = 64
SUBJECTS = {
    "s0": (0.0, 5.0),
    "s1": (25.0, 6.0),
    "s2": (50.0, 7.0),
    "s3": (75.0, 8.5),
}
IMAGES_PER_SUBJECT = 10
SEED = 1711


def make_image(rng, orientation_deg, frequency):
    # neighboring subjects overlap under the jitter, so retrieval is
    # discriminative but deliberately not saturated
    theta = math.radians(orientation_deg + rng.normal(0.0, 7.0))
    freq = frequency + rng.normal(0.0, 0.4)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    amplitude = rng.uniform(25.0, 70.0)
    y, x = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    axis = x * math.cos(theta) + y * math.sin(theta)
    pattern = 127.5 + amplitude * np.sin(2.0 * math.pi * freq * axis / SIZE + phase)
    noise = rng.normal(0.0, 40.0, (SIZE, SIZE))
    return np.clip(pattern + noise, 0.0, 255.0)


def main():
    out_dir = Path(__file__).parent / "synthetic"
    out_dir.mkdir(exist_ok=True)
    rng = np.random.default_rng(SEED)
    rows = []
    for subject, (orientation, frequency) in SUBJECTS.items():
        for k in range(IMAGES_PER_SUBJECT):
            name = f"{subject}_{k:02d}.pgm"
            write_pgm(out_dir / name, make_image(rng, orientation, frequency))
            rows.append((name, subject))
    with open(out_dir / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "subject_id"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} images to {out_dir}")


if __name__ == "__main__":
    main()
