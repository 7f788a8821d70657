"""Image export/import: 16-bit PGM (P5), optional PNG, text metadata sidecars."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ValidationError
from .modesim import ModeImage


def to_uint16(image: ModeImage) -> np.ndarray:
    arr = image.intensities
    peak = arr.max()
    scaled = arr / peak if peak > 0 else arr
    return np.round(scaled * 65535.0).astype(">u2")


def write_pgm(image: ModeImage, path: str | Path) -> Path:
    """Write a 16-bit binary PGM (P5, big-endian samples)."""
    path = Path(path)
    data = to_uint16(image)
    header = f"P5\n{image.width} {image.height}\n65535\n".encode("ascii")
    path.write_bytes(header + data.tobytes())
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM back as a float array scaled to unit peak."""
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5"):
        raise ValidationError(f"{path}: not a binary PGM (P5) file")
    # header: magic, width, height, maxval; '#' comments allowed
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValidationError(f"{path}: truncated PGM header")
        fields.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed PGM header") from exc
    dtype = ">u2" if maxval > 255 else "u1"
    expected = width * height * (2 if maxval > 255 else 1)
    body = raw[pos : pos + expected]
    if len(body) != expected:
        raise ValidationError(f"{path}: truncated PGM data ({len(body)} of {expected} bytes)")
    arr = np.frombuffer(body, dtype=dtype).reshape(height, width).astype(float)
    peak = arr.max()
    return arr / peak if peak > 0 else arr


def write_png(image: ModeImage, path: str | Path) -> Path:
    """Write a 16-bit grayscale PNG (requires Pillow)."""
    from PIL import Image

    path = Path(path)
    data = to_uint16(image).astype("<u2")
    Image.fromarray(data, mode="I;16").save(path)
    return path


def read_image(path: str | Path) -> np.ndarray:
    """Read a PGM or PNG intensity image, scaled to unit peak."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    from PIL import Image

    try:
        arr = np.asarray(Image.open(path), dtype=float)
    except Exception as exc:
        raise ValidationError(f"{path}: unreadable image ({exc})") from exc
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    peak = arr.max()
    return arr / peak if peak > 0 else arr


def write_metadata(image: ModeImage, path: str | Path, extra: dict | None = None) -> Path:
    """Write the text key-value sidecar for an exported image."""
    path = Path(path)
    entries = {
        "width": image.width,
        "height": image.height,
        "pitch_um": image.pitch_um,
        "origin_x_um": image.origin_x_um,
        "origin_y_um": image.origin_y_um,
        "plane_z_m": image.plane_z_m,
    }
    entries.update(image.metadata)
    if extra:
        entries.update(extra)
    lines = [f"{key} = {entries[key]}" for key in entries]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_metadata(path: str | Path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_mode_image(path: str | Path) -> ModeImage:
    """Load an exported image (+ sidecar when present) back into a ModeImage."""
    path = Path(path)
    arr = read_image(path)
    meta_path = path.with_suffix(path.suffix + ".meta")
    pitch_um, plane_z_m = 1.0, 0.0
    origin_x = origin_y = None
    meta: dict = {}
    if meta_path.exists():
        meta = read_metadata(meta_path)
        pitch_um = float(meta.get("pitch_um", 1.0))
        plane_z_m = float(meta.get("plane_z_m", 0.0))
        if "origin_x_um" in meta:
            origin_x = float(meta["origin_x_um"])
        if "origin_y_um" in meta:
            origin_y = float(meta["origin_y_um"])
    if origin_x is None:
        origin_x = -0.5 * (arr.shape[1] - 1) * pitch_um
    if origin_y is None:
        origin_y = -0.5 * (arr.shape[0] - 1) * pitch_um
    return ModeImage(
        intensities=arr,
        pitch_um=pitch_um,
        origin_x_um=origin_x,
        origin_y_um=origin_y,
        plane_z_m=plane_z_m,
        metadata={"source": str(path), **meta},
    )
