#!/usr/bin/env python3
"""Build the bundled 5,000-image MNIST fixture as gzipped IDX files.

The source is the 5k MNIST sample shipped inside the mlxtend wheel
(500 images per digit, drawn from the MNIST training set). The first 400
images of every digit go to the train split and the remaining 100 to the
test split; each split is interleaved by class so that any prefix stays
roughly balanced.

    pip download --no-deps -d /tmp/wheels mlxtend
    python3 tools/make_mnist_subset.py /tmp/wheels/mlxtend-*.whl data/mnist5k
"""
import gzip
import io
import pathlib
import struct
import sys
import zipfile

import numpy as np

TRAIN_PER_CLASS = 400


def write_idx(path, magic, array):
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in array.shape)
    # mtime=0 keeps the gzip bytes reproducible.
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as out:
        out.write(header + array.astype(np.uint8).tobytes())


def interleave(indices_by_class):
    order = []
    for rank in range(max(len(v) for v in indices_by_class)):
        for cls in indices_by_class:
            if rank < len(cls):
                order.append(cls[rank])
    return np.array(order)


def main():
    wheel, out_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)
    blob = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.loadtxt(io.BytesIO(gzip.decompress(blob)), delimiter=",")
    pixels = table[:, :-1].reshape(-1, 28, 28)
    labels = table[:, -1].astype(np.int64)

    train, test = [], []
    for digit in range(10):
        idx = np.flatnonzero(labels == digit)
        train.append(idx[:TRAIN_PER_CLASS])
        test.append(idx[TRAIN_PER_CLASS:])

    for name, order in (("train", interleave(train)), ("test", interleave(test))):
        write_idx(out_dir / f"{name}-images-idx3-ubyte.gz", 0x00000803, pixels[order])
        write_idx(out_dir / f"{name}-labels-idx1-ubyte.gz", 0x00000801, labels[order])
        print(name, len(order), np.bincount(labels[order]))


if __name__ == "__main__":
    main()
