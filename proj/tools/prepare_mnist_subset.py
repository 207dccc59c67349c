#!/usr/bin/env python3
"""Build IDX files from the 10,000 MNIST digits bundled in the npm `mnist` package.

    tools/prepare_mnist_subset.py [--package DIR] [--out data/mnist] [--test 1000]

Without --package the tarball is fetched with `npm pack mnist`. Digits are
shuffled with a fixed seed and split into train/test; pixels (stored as
floats in [0,1]) are written back as bytes round(255 * v).
"""

import argparse
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile

import numpy as np


def fetch_package(workdir: pathlib.Path) -> pathlib.Path:
    subprocess.run(["npm", "pack", "mnist@1.1.0", "--silent"], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    tgz = next(workdir.glob("mnist-*.tgz"))
    with tarfile.open(tgz) as t:
        t.extractall(workdir)
    return workdir / "package"


def load_digits(package: pathlib.Path):
    images, labels = [], []
    for digit in range(10):
        data = json.loads((package / "src" / "digits" / f"{digit}.json").read_text())["data"]
        rows = np.asarray(data, dtype=np.float64).reshape(-1, 784)
        images.append(rows)
        labels.append(np.full(len(rows), digit, dtype=np.uint8))
    return np.concatenate(images), np.concatenate(labels)


def write_images(path: pathlib.Path, images: np.ndarray):
    pixels = np.clip(np.rint(images * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(pixels), 28, 28))
        f.write(pixels.tobytes())


def write_labels(path: pathlib.Path, labels: np.ndarray):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--package", type=pathlib.Path, help="unpacked npm mnist package directory")
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/mnist"))
    ap.add_argument("--test", type=int, default=1000, help="digits held out as the test set")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        package = args.package or fetch_package(pathlib.Path(tmp))
        images, labels = load_digits(package)

    order = np.random.default_rng(args.seed).permutation(len(images))
    images, labels = images[order], labels[order]
    n_train = len(images) - args.test

    args.out.mkdir(parents=True, exist_ok=True)
    write_images(args.out / "train-images-idx3-ubyte", images[:n_train])
    write_labels(args.out / "train-labels-idx1-ubyte", labels[:n_train])
    write_images(args.out / "t10k-images-idx3-ubyte", images[n_train:])
    write_labels(args.out / "t10k-labels-idx1-ubyte", labels[n_train:])
    print(f"wrote {n_train} train and {args.test} test digits to {args.out}")


if __name__ == "__main__":
    main()
