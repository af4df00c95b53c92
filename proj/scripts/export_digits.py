#!/usr/bin/env python3
"""Export the scikit-learn digits set (1797 8x8 grayscale digits) to the
formats the toolkit reads: an IDX image/label pair plus a CSV table.

Pixels are rescaled from [0, 16] to [0, 255] before the IDX write so they
round-trip through the same /255 normalization as other image data.

Usage: export_digits.py [out_dir]   (default: data/digits)
"""

import struct
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits


def write_idx_images(path: Path, images: np.ndarray) -> None:
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">iiii", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/digits")
    out_dir.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    images = np.rint(digits.images * (255.0 / 16.0)).clip(0, 255)
    labels = digits.target

    write_idx_images(out_dir / "digits-images.idx", images)
    write_idx_labels(out_dir / "digits-labels.idx", labels)

    csv_path = out_dir / "digits.csv"
    with open(csv_path, "w") as f:
        cols = [f"p{i}" for i in range(64)] + ["label"]
        f.write(",".join(cols) + "\n")
        flat = images.reshape(len(labels), 64) / 255.0
        for row, label in zip(flat, labels):
            f.write(",".join(f"{v:.17g}" for v in row) + f",{label}\n")

    print(f"wrote {len(labels)} samples to {out_dir}")


if __name__ == "__main__":
    main()
