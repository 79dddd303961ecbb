"""Write a small class-balanced IDX3/IDX1 digit subset from the MNIST sample bundled with mlxtend.

The mlxtend wheel ships 5000 MNIST digits as ``mlxtend/data/data/mnist_5k.csv.gz``
(784 pixel columns followed by the label). Point this script at the wheel, the
extracted csv.gz, or nothing if mlxtend is importable:

    python scripts/make_digit_fixture.py --source mlxtend-0.24.0-py3-none-any.whl \
        --n 300 --out tests/data/digits
"""
import argparse
import gzip
import io
import zipfile
from pathlib import Path

import numpy as np

from cglram.dataio import write_idx_images, write_idx_labels

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_source(source):
    if source is None:
        import mlxtend.data
        source = Path(mlxtend.data.__file__).parent / "data" / "mnist_5k.csv.gz"
    source = Path(source)
    if source.suffix == ".whl":
        with zipfile.ZipFile(source) as z:
            payload = z.read(MEMBER)
    else:
        payload = source.read_bytes()
    table = np.loadtxt(io.StringIO(gzip.decompress(payload).decode()), delimiter=",")
    return table[:, :-1].astype(np.uint8).reshape(-1, 28, 28), table[:, -1].astype(np.uint8)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--source", default=None)
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--out", default="tests/data/digits")
    args = ap.parse_args(argv)

    images, labels = read_source(args.source)
    # the bundled table is sorted by digit: take the first n/10 of each class
    per_class = args.n // 10
    keep = np.sort(np.concatenate(
        [np.flatnonzero(labels == d)[:per_class] for d in range(10)]))
    images, labels = images[keep], labels[keep]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_idx_images(f"{out}-images-idx3-ubyte", images)
    write_idx_labels(f"{out}-labels-idx1-ubyte", labels)
    print(f"wrote {len(images)} digits, label counts {np.bincount(labels).tolist()}")


if __name__ == "__main__":
    main()
