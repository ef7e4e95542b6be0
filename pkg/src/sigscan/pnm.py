"""Portable anymap I/O for binary masks and gray inputs.

Accepted inputs: plain and raw bitmaps (P1, P4) where bit 1, the black
ink bit, maps to boolean true; plain and raw graymaps (P2, P5) which the
caller binarizes against an explicit threshold. Outputs: raw bitmaps for
masks, raw pixmaps (P6) for color overlays. Malformed files raise
PnmError with a one-line reason.
"""

from __future__ import annotations

import numpy as np

MAGIC_BITMAP = ("P1", "P4")
MAGIC_GRAY = ("P2", "P5")


class PnmError(ValueError):
    """Input bytes do not form a supported portable anymap."""


class _Scanner:
    """Header tokenizer: whitespace separated, # comments to end of line."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def token(self) -> bytes:
        d, i = self.data, self.pos
        while i < len(d):
            c = d[i : i + 1]
            if c == b"#":
                nl = d.find(b"\n", i)
                i = len(d) if nl < 0 else nl + 1
            elif c.isspace():
                i += 1
            else:
                break
        if i >= len(d):
            raise PnmError("truncated header")
        j = i
        while j < len(d) and not d[j : j + 1].isspace() and d[j : j + 1] != b"#":
            j += 1
        self.pos = j
        return d[i:j]

    def int_token(self, name: str) -> int:
        tok = self.token()
        try:
            value = int(tok)
        except ValueError:
            raise PnmError(f"non-numeric {name}: {tok[:20]!r}") from None
        return value

    def raster_offset(self) -> int:
        # binary rasters begin after exactly one whitespace byte
        if self.pos >= len(self.data) or not self.data[self.pos : self.pos + 1].isspace():
            raise PnmError("missing whitespace before raster")
        return self.pos + 1


def _read_bytes(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def read_magic(path) -> str:
    head = _read_bytes(path)[:2]
    return head.decode("ascii", errors="replace")


def _header(data: bytes, want_maxval: bool):
    scan = _Scanner(data)
    magic = scan.token().decode("ascii", errors="replace")
    width = scan.int_token("width")
    height = scan.int_token("height")
    if width <= 0 or height <= 0:
        raise PnmError(f"bad dimensions {width}x{height}")
    maxval = None
    if want_maxval:
        maxval = scan.int_token("maxval")
        if not 0 < maxval < 65536:
            raise PnmError(f"maxval out of range: {maxval}")
    return magic, width, height, maxval, scan


def read_bitmap(path) -> np.ndarray:
    """Boolean array from a P1 or P4 file; true where the bit is 1 (black)."""
    data = _read_bytes(path)
    magic, width, height, _, scan = _header(data, want_maxval=False)
    if magic == "P1":
        body = data[scan.pos :]
        digits = bytes(c for c in body if not bytes([c]).isspace())
        if len(digits) != width * height:
            raise PnmError(f"plain bitmap has {len(digits)} digits, wants {width * height}")
        if digits.strip(b"01"):
            raise PnmError("plain bitmap contains non-bit characters")
        bits = np.frombuffer(digits, np.uint8) - ord("0")
        return bits.reshape(height, width).astype(bool)
    if magic == "P4":
        start = scan.raster_offset()
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        raster = data[start : start + need]
        if len(raster) < need:
            raise PnmError(f"raw bitmap raster has {len(raster)} bytes, wants {need}")
        rows = np.frombuffer(raster, np.uint8).reshape(height, row_bytes)
        return np.unpackbits(rows, axis=1)[:, :width].astype(bool)
    if magic in MAGIC_GRAY:
        raise PnmError(f"{magic} is a graymap, binarize it with a threshold")
    raise PnmError(f"unsupported magic {magic!r}")


def read_gray(path):
    """(int array, maxval) from a P2 or P5 file."""
    data = _read_bytes(path)
    magic, width, height, maxval, scan = _header(data, want_maxval=True)
    n = width * height
    if magic == "P2":
        body = data[scan.pos :].split()
        if len(body) != n:
            raise PnmError(f"plain graymap has {len(body)} samples, wants {n}")
        try:
            flat = np.array([int(tok) for tok in body], np.int64)
        except ValueError:
            raise PnmError("plain graymap contains non-numeric samples") from None
    elif magic == "P5":
        start = scan.raster_offset()
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = n * dtype.itemsize
        raster = data[start : start + need]
        if len(raster) < need:
            raise PnmError(f"raw graymap raster has {len(raster)} bytes, wants {need}")
        flat = np.frombuffer(raster, dtype).astype(np.int64)
    elif magic in MAGIC_BITMAP:
        raise PnmError(f"{magic} is a bitmap, read it without a threshold")
    else:
        raise PnmError(f"unsupported magic {magic!r}")
    if flat.min() < 0 or flat.max() > maxval:
        raise PnmError(f"graymap sample out of [0, {maxval}]")
    return flat.reshape(height, width), maxval


def read_binary(path, threshold=None) -> np.ndarray:
    """Boolean image from any supported input.

    Bitmaps load directly. Graymaps require a threshold and map value >=
    threshold to true; passing a threshold for a bitmap is an error so a
    meaningless flag never goes silently unused.
    """
    magic = read_magic(path)
    if magic in MAGIC_BITMAP:
        if threshold is not None:
            raise PnmError(f"{magic} is already binary, drop the threshold")
        return read_bitmap(path)
    if magic in MAGIC_GRAY:
        if threshold is None:
            raise PnmError(f"{magic} input needs a threshold")
        gray, _ = read_gray(path)
        return gray >= threshold
    raise PnmError(f"unsupported magic {magic!r}")


def _as_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != bool:
        raise ValueError(f"mask must be a 2-d boolean array, got {mask.dtype} {mask.shape}")
    return mask


def write_bitmap(path, mask, comment=None):
    """Raw (P4) bitmap; true pixels become 1 bits."""
    mask = _as_mask(mask)
    height, width = mask.shape
    header = f"P4\n{width} {height}\n"
    if comment is not None:
        header = f"P4\n# {comment}\n{width} {height}\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(np.packbits(mask, axis=1).tobytes())


def write_bitmap_plain(path, mask, comment=None):
    """Plain (P1) bitmap, rows wrapped to short lines."""
    mask = _as_mask(mask)
    height, width = mask.shape
    lines = ["P1"]
    if comment is not None:
        lines.append(f"# {comment}")
    lines.append(f"{width} {height}")
    for row in mask.astype(np.uint8):
        digits = "".join("1" if v else "0" for v in row)
        for start in range(0, width, 64):
            lines.append(digits[start : start + 64])
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def write_pixmap(path, rgb):
    """Raw (P6) pixmap from a (rows, cols, 3) uint8 array."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ValueError(f"pixmap wants (rows, cols, 3) uint8, got {rgb.dtype} {rgb.shape}")
    height, width = rgb.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        f.write(rgb.tobytes())


def compose_overlay(image, boundary) -> np.ndarray:
    """Overlay pixmap: white ground, input true pixels dark, boundary red."""
    image = _as_mask(image)
    boundary = _as_mask(boundary)
    if boundary.shape != image.shape:
        raise ValueError("boundary shape differs from image shape")
    rgb = np.full(image.shape + (3,), 255, np.uint8)
    rgb[image] = (64, 64, 64)
    rgb[boundary] = (255, 0, 0)
    return rgb
