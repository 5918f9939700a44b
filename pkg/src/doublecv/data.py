"""Image data: IDX reader/writer, a synthetic bars dataset, and binarization."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


@dataclass
class Dataset:
    """Images flattened to rows, pixel intensities in [0, 1]."""

    pixels: np.ndarray  # (N, rows * cols)
    shape: tuple[int, int]
    labels: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.pixels.shape[0]

    def continuous(self) -> np.ndarray:
        """Intensities mapped affinely to [-1, 1]."""
        return 2.0 * self.pixels - 1.0

    def binarize(self, rng: np.random.Generator) -> np.ndarray:
        """Fresh Bernoulli(pixel) draw (dynamic binarization)."""
        return (rng.random(self.pixels.shape) < self.pixels).astype(np.float64)


def _open(path):
    path = Path(path)
    return gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise IdxFormatError(f"truncated IDX file: expected {n} bytes of {what}, got {len(buf)}")
    return buf


def _check_magic(f, expected: int, what: str):
    (magic,) = struct.unpack(">I", _read_exact(f, 4, "magic"))
    if magic != expected:
        raise IdxFormatError(f"bad magic 0x{magic:08x} for {what} (expected 0x{expected:08x})")


def read_idx_images(path) -> tuple[np.ndarray, tuple[int, int]]:
    with _open(path) as f:
        _check_magic(f, IMAGES_MAGIC, "images")
        n, rows, cols = struct.unpack(">III", _read_exact(f, 12, "header"))
        raw = np.frombuffer(_read_exact(f, n * rows * cols, "pixels"), dtype=np.uint8)
    return raw.reshape(n, rows * cols), (rows, cols)


def read_idx_labels(path) -> np.ndarray:
    with _open(path) as f:
        _check_magic(f, LABELS_MAGIC, "labels")
        (n,) = struct.unpack(">I", _read_exact(f, 4, "header"))
        return np.frombuffer(_read_exact(f, n, "labels"), dtype=np.uint8).copy()


def load_mnist_idx(images_path, labels_path=None) -> Dataset:
    raw, shape = read_idx_images(images_path)
    labels = None
    if labels_path is not None:
        labels = read_idx_labels(labels_path)
        if len(labels) != raw.shape[0]:
            raise IdxFormatError(f"{raw.shape[0]} images but {len(labels)} labels")
    return Dataset(raw.astype(np.float64) / 255.0, shape, labels)


def write_idx_images(path, images) -> None:
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols))
        f.write(images.tobytes())


def write_idx_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">II", LABELS_MAGIC, len(labels)))
        f.write(labels.tobytes())


def synthetic_bars(n: int = 512, side: int = 8, seed: int = 0, binary: bool = True,
                   p_bar: float = 0.2, noise: float = 0.05) -> Dataset:
    """Images made of random horizontal and vertical bars (``2 * side`` latent causes).

    With ``binary`` the images are sampled once to {0, 1}; otherwise the noisy
    gray intensities are returned.
    """
    rng = np.random.default_rng(seed)
    on = rng.random((n, 2 * side)) < p_bar
    img = np.zeros((n, side, side))
    img = np.maximum(img, on[:, :side, None])
    img = np.maximum(img, on[:, None, side:])
    intensity = noise + (1.0 - 2.0 * noise) * img
    if binary:
        pixels = (rng.random(intensity.shape) < intensity).astype(np.float64)
    else:
        pixels = np.clip(intensity + rng.normal(0.0, noise, intensity.shape), 0.0, 1.0)
    return Dataset(pixels.reshape(n, side * side), (side, side))
