#!/usr/bin/env python3
"""Write the 5000-image MNIST subset bundled with mlxtend as gzipped IDX files.

usage: make_mnist_subset.py <mlxtend wheel or mnist_5k.csv.gz> <out dir>
"""
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

import numpy as np


def read_csv(src: Path) -> np.ndarray:
    if src.suffix == ".whl":
        with zipfile.ZipFile(src) as z:
            raw = z.read("mlxtend/data/data/mnist_5k.csv.gz")
    else:
        raw = src.read_bytes()
    return np.loadtxt(io.BytesIO(gzip.decompress(raw)), delimiter=",")


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    table = read_csv(Path(sys.argv[1]))
    images = table[:, :-1].astype(np.uint8)
    labels = table[:, -1].astype(np.uint8)
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    n = len(labels)
    img_bytes = struct.pack(">IIII", 0x00000803, n, 28, 28) + images.tobytes()
    lbl_bytes = struct.pack(">II", 0x00000801, n) + labels.tobytes()
    # mtime=0 keeps the archives byte-reproducible
    with gzip.GzipFile(out / "mnist5k-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(img_bytes)
    with gzip.GzipFile(out / "mnist5k-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(lbl_bytes)
    print(f"wrote {n} images, label counts {np.bincount(labels).tolist()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
