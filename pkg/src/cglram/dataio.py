"""Reading and writing matrix stacks, models, and synthetic data.

Binary layouts
--------------
IDX3 images (big-endian): u32 magic 0x00000803, u32 N, u32 rows, u32 cols,
then N*rows*cols unsigned bytes, row-major per image. IDX1 labels: u32 magic
0x00000801, u32 N, then N unsigned bytes.

MSTK1 stacks (little-endian): ASCII ``MSTK1\\n``, u64 N, u64 r, u64 c, one
flag byte (1 if labels follow), N*r*c float64 row-major per sample, then N
int32 labels when flagged.

CSV stacks: a header comment ``# stack N=<N> r=<r> c=<c>``; each sample is
introduced by ``# sample <i>`` (optionally ``label=<j>``) and followed by r
lines of c comma-separated numbers.
"""
import json
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .cluster import ClusterModel
from .errors import BadMagic, DimensionOverflow, InvalidSpec, IoFailure, TruncatedFile
from .glram import MatrixStack, ProjectorPair

IDX3_MAGIC = 0x00000803
IDX1_MAGIC = 0x00000801
MSTK_MAGIC = b"MSTK1\n"
MAX_IDX_ENTRIES = 1 << 34


def _read_bytes(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _write_bytes(path, payload):
    try:
        with open(path, "wb") as f:
            f.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _idx_header(raw, magic, ndims):
    need = 4 * (1 + ndims)
    if len(raw) < 4:
        raise TruncatedFile("file shorter than the IDX magic number")
    got = struct.unpack(">I", raw[:4])[0]
    if got != magic:
        raise BadMagic(f"IDX magic 0x{got:08x}, expected 0x{magic:08x}")
    if len(raw) < need:
        raise TruncatedFile("IDX header is incomplete")
    return struct.unpack(f">{ndims}I", raw[4:need]), need


def read_idx_labels(path):
    raw = _read_bytes(path)
    (n,), off = _idx_header(raw, IDX1_MAGIC, 1)
    if len(raw) < off + n:
        raise TruncatedFile(f"label file declares {n} items but holds {len(raw) - off}")
    return np.frombuffer(raw, dtype=np.uint8, count=n, offset=off).astype(np.int64)


def read_idx_images(path):
    """Raw uint8 images, shape (N, rows, cols)."""
    raw = _read_bytes(path)
    (n, rows, cols), off = _idx_header(raw, IDX3_MAGIC, 3)
    if rows == 0 or cols == 0 or n * rows * cols > MAX_IDX_ENTRIES:
        raise DimensionOverflow(f"unusable IDX dimensions N={n}, rows={rows}, cols={cols}")
    size = n * rows * cols
    if len(raw) < off + size:
        raise TruncatedFile(
            f"header declares {n} images of {rows}x{cols} but payload holds "
            f"{(len(raw) - off) // (rows * cols)}")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=off).reshape(n, rows, cols)


def load_idx_images(path, labels_path=None, limit=None, scale=True):
    """Load an IDX3 image file as a stack, pixels divided by 255 unless ``scale=False``."""
    images = read_idx_images(path)
    labels = None
    if labels_path is not None:
        labels = read_idx_labels(labels_path)
        if labels.shape[0] != images.shape[0]:
            raise TruncatedFile(
                f"{labels.shape[0]} labels for {images.shape[0]} images")
    if limit is not None:
        images = images[:limit]
        labels = None if labels is None else labels[:limit]
    data = images.astype(np.float64)
    if scale:
        data /= 255.0
    return MatrixStack(data, labels)


def write_idx_images(path, images):
    images = np.asarray(images)
    if images.ndim != 3 or images.dtype != np.uint8:
        raise ValueError("IDX3 images must be a uint8 array of shape (N, rows, cols)")
    header = struct.pack(">4I", IDX3_MAGIC, *images.shape)
    _write_bytes(path, header + images.tobytes(order="C"))


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    _write_bytes(path, struct.pack(">2I", IDX1_MAGIC, labels.shape[0]) + labels.tobytes())


def save_stack(stack, path):
    A = np.ascontiguousarray(stack.samples, dtype="<f8")
    has_labels = stack.labels is not None
    parts = [MSTK_MAGIC, struct.pack("<3QB", *A.shape, int(has_labels)), A.tobytes(order="C")]
    if has_labels:
        parts.append(np.asarray(stack.labels, dtype="<i4").tobytes())
    _write_bytes(path, b"".join(parts))


def load_stack(path):
    raw = _read_bytes(path)
    if raw[:len(MSTK_MAGIC)] != MSTK_MAGIC:
        raise BadMagic(f"{path} is not an MSTK1 file")
    off = len(MSTK_MAGIC)
    if len(raw) < off + 25:
        raise TruncatedFile("MSTK1 header is incomplete")
    n, r, c, flag = struct.unpack("<3QB", raw[off:off + 25])
    off += 25
    if r == 0 or c == 0 or n * r * c > MAX_IDX_ENTRIES:
        raise DimensionOverflow(f"unusable MSTK1 dimensions N={n}, r={r}, c={c}")
    size = n * r * c
    end = off + 8 * size + (4 * n if flag else 0)
    if len(raw) < end:
        raise TruncatedFile(f"MSTK1 payload needs {end} bytes, file has {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", count=size, offset=off).reshape(n, r, c)
    labels = None
    if flag:
        labels = np.frombuffer(raw, dtype="<i4", count=n, offset=off + 8 * size)
    return MatrixStack(data.astype(np.float64), labels)


_SAMPLE_RE = re.compile(r"#\s*sample\s+\d+(?:\s+label=(-?\d+))?")
_HEADER_RE = re.compile(r"#\s*stack\s+N=(\d+)\s+r=(\d+)\s+c=(\d+)")


def load_csv_stack(path):
    try:
        with open(path) as f:
            lines = [ln.strip() for ln in f if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    m = _HEADER_RE.fullmatch(lines[0]) if lines else None
    if m is None:
        raise BadMagic("CSV stack must start with '# stack N=<N> r=<r> c=<c>'")
    n, r, c = map(int, m.groups())
    samples, labels, rows = [], [], None
    for ln in lines[1:]:
        sm = _SAMPLE_RE.fullmatch(ln)
        if sm:
            if rows is not None:
                samples.append(rows)
            rows = []
            labels.append(None if sm.group(1) is None else int(sm.group(1)))
        elif rows is None:
            raise ValueError(f"data row before any '# sample' line: {ln!r}")
        else:
            rows.append([float(x) for x in ln.split(",")])
    if rows is not None:
        samples.append(rows)
    if len(samples) != n or any(np.shape(s) != (r, c) for s in samples):
        raise TruncatedFile(f"CSV stack does not hold {n} samples of {r}x{c}")
    lab = None if any(x is None for x in labels) else np.array(labels)
    return MatrixStack(np.array(samples, dtype=np.float64), lab)


def save_csv_stack(stack, path):
    out = [f"# stack N={stack.N} r={stack.r} c={stack.c}"]
    for i, A in enumerate(stack.samples):
        tag = f"# sample {i}"
        if stack.labels is not None:
            tag += f" label={int(stack.labels[i])}"
        out.append(tag)
        out.extend(",".join(repr(float(x)) for x in row) for row in A)
    try:
        with open(path, "w") as f:
            f.write("\n".join(out) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_any(path, labels_path=None, limit=None, scale=True):
    """Dispatch on content: MSTK1 magic, IDX3 magic, or the CSV header."""
    with open(path, "rb") as f:
        head = f.read(8)
    if head.startswith(MSTK_MAGIC):
        stack = load_stack(path)
        return stack if limit is None else stack.subset(np.arange(min(limit, stack.N)))
    if head[:4] == struct.pack(">I", IDX3_MAGIC):
        return load_idx_images(path, labels_path, limit=limit, scale=scale)
    stack = load_csv_stack(path)
    return stack if limit is None else stack.subset(np.arange(min(limit, stack.N)))


@dataclass
class SynthSpec:
    K_true: int = 3
    per_cluster: list = field(default_factory=lambda: [40, 40, 40])
    r: int = 20
    c: int = 20
    k_true: int = 3
    noise_sigma: float = 0.01
    middle_scale: float = 1.0
    seed: int = 0

    def validate(self):
        if self.K_true < 1 or len(self.per_cluster) != self.K_true:
            raise InvalidSpec("per_cluster must list one count per cluster")
        if any(n < 1 for n in self.per_cluster):
            raise InvalidSpec("every cluster needs at least one sample")
        if self.r < 1 or self.c < 1 or not 1 <= self.k_true <= min(self.r, self.c):
            raise InvalidSpec(f"k_true={self.k_true} outside [1, min(r, c)]")
        if self.noise_sigma < 0 or self.middle_scale < 0:
            raise InvalidSpec("noise_sigma and middle_scale must be non-negative")


def synth_generate(spec):
    """Clustered low-rank stack: ``A_i = L_j M_i R_j^T + noise`` with labels j."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    bases = []
    for _ in range(spec.K_true):
        L, _ = np.linalg.qr(rng.standard_normal((spec.r, spec.k_true)))
        R, _ = np.linalg.qr(rng.standard_normal((spec.c, spec.k_true)))
        bases.append((L, R))
    samples, labels = [], []
    for j, ((L, R), n) in enumerate(zip(bases, spec.per_cluster)):
        M = spec.middle_scale * rng.standard_normal((n, spec.k_true, spec.k_true))
        G = rng.standard_normal((n, spec.r, spec.c))
        samples.append(L @ M @ R.T + spec.noise_sigma * G)
        labels.extend([j] * n)
    return MatrixStack(np.concatenate(samples), np.array(labels))


def save_model(model, path, meta=None):
    """Persist a cluster model as an ``.npz`` archive (no pickling)."""
    arrays = dict(
        assignment=np.asarray(model.assignment, dtype=np.int64),
        L=np.stack([p.L for p in model.centroids]),
        R=np.stack([p.R for p in model.centroids]),
        middles=model.middles,
        wcssre_history=np.asarray(model.wcssre_history, dtype=np.float64),
    )
    info = dict(meta or {})
    info.update(K=model.K, outer_iterations=model.outer_iterations,
                inner_iterations=model.inner_iterations, converged=model.converged,
                stop_reason=model.stop_reason)
    arrays["meta"] = np.array(json.dumps(info, sort_keys=True))
    try:
        with open(path, "wb") as f:
            np.savez(f, **arrays)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_model(path):
    """Return ``(model, meta)`` saved by :func:`save_model`."""
    try:
        z = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read model {path}: {exc}") from exc
    with z:
        meta = json.loads(str(z["meta"]))
        pairs = [ProjectorPair(L, R) for L, R in zip(z["L"], z["R"])]
        model = ClusterModel(K=int(meta["K"]), centroids=pairs, assignment=z["assignment"],
                             middles=z["middles"],
                             wcssre_history=[float(x) for x in z["wcssre_history"]],
                             outer_iterations=meta["outer_iterations"],
                             inner_iterations=meta["inner_iterations"],
                             converged=meta["converged"], stop_reason=meta["stop_reason"])
    return model, meta
