"""Binary portable graymap (PGM, P5) reading and writing."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .optics import Kinoform


def write_pgm(path: str | Path, image: np.ndarray, maxval: int) -> None:
    data = np.asarray(image)
    if data.ndim != 2:
        raise ValueError("PGM images are 2D")
    if maxval > 255:
        raw = data.astype(">u2").tobytes()
    else:
        raw = data.astype(np.uint8).tobytes()
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + raw)


def read_pgm(path: str | Path) -> tuple[np.ndarray, int]:
    blob = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            pos = blob.index(b"\n", pos) + 1
            continue
        start = pos
        while not blob[pos:pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos].decode("ascii"))
    pos += 1
    magic, width, height, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic != "P5":
        raise ValueError(f"not a binary PGM: {magic}")
    dtype = ">u2" if maxval > 255 else np.uint8
    data = np.frombuffer(blob, dtype=dtype, count=width * height, offset=pos)
    return data.reshape(height, width).astype(np.int64), maxval


def write_intensity(path: str | Path, image: np.ndarray) -> float:
    """16-bit graymap scaled so the maximum maps to 65535; returns the scale."""
    peak = float(np.max(image))
    scale = 65535.0 / peak if peak > 0 else 0.0
    write_pgm(path, np.round(np.clip(image, 0, None) * scale), 65535)
    return scale


def write_kinoform(path: str | Path, kinoform: Kinoform) -> None:
    write_pgm(path, kinoform.levels, 255)


def read_kinoform(path: str | Path) -> Kinoform:
    data, maxval = read_pgm(path)
    if maxval != 255:
        raise ValueError(f"kinoform graymaps are 8-bit, got maxval {maxval}")
    return Kinoform(data.astype(np.uint8))
