#!/usr/bin/env python3
"""Download the MNIST IDX files and unpack them for the toolkit.

Needs network access. Tries a list of mirrors; writes the four uncompressed
IDX files into the output directory (default: data/mnist).

Usage: fetch_mnist.py [out_dir]
"""

import gzip
import sys
import urllib.error
import urllib.request
from pathlib import Path

MIRRORS = [
    "https://ossci-datasets.s3.amazonaws.com/mnist/",
    "https://storage.googleapis.com/cvdf-datasets/mnist/",
]
FILES = {
    "train-images-idx3-ubyte.gz": "train-images.idx",
    "train-labels-idx1-ubyte.gz": "train-labels.idx",
    "t10k-images-idx3-ubyte.gz": "t10k-images.idx",
    "t10k-labels-idx1-ubyte.gz": "t10k-labels.idx",
}


def fetch(name: str) -> bytes:
    last: Exception | None = None
    for mirror in MIRRORS:
        url = mirror + name
        try:
            print(f"fetching {url}")
            with urllib.request.urlopen(url, timeout=60) as resp:
                return resp.read()
        except (urllib.error.URLError, OSError) as e:
            print(f"  failed: {e}")
            last = e
    raise SystemExit(f"could not download {name}: {last}")


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/mnist")
    out_dir.mkdir(parents=True, exist_ok=True)
    for gz_name, out_name in FILES.items():
        out_path = out_dir / out_name
        if out_path.exists():
            print(f"{out_path} already present, skipping")
            continue
        raw = gzip.decompress(fetch(gz_name))
        out_path.write_bytes(raw)
        print(f"wrote {out_path} ({len(raw)} bytes)")


if __name__ == "__main__":
    main()
