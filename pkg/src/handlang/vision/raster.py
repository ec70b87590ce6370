"""Frame container and low-level raster ops (color conversion, blur, resize)."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

MIN_FRAME_SIDE = 64


@dataclass(frozen=True)
class FrameRaster:
    """Row-major 8-bit RGB frame."""

    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self) -> None:
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ValueError(f"frame must be (h, w, 3) uint8, got {px.shape} {px.dtype}")
        if px.shape[0] < MIN_FRAME_SIDE or px.shape[1] < MIN_FRAME_SIDE:
            raise ValueError(f"frame must be at least {MIN_FRAME_SIDE}px a side, got {px.shape}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def as_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64) / 255.0

    @classmethod
    def from_float(cls, arr: np.ndarray) -> "FrameRaster":
        return cls(np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8))

    def to_png_bytes(self) -> bytes:
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_png_bytes(cls, data: bytes) -> "FrameRaster":
        from PIL import Image

        img = Image.open(io.BytesIO(data)).convert("RGB")
        return cls(np.asarray(img, dtype=np.uint8))

    def save_png(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_png_bytes())

    @classmethod
    def load_png(cls, path: str) -> "FrameRaster":
        with open(path, "rb") as fh:
            return cls.from_png_bytes(fh.read())

    def to_raw_bytes(self) -> bytes:
        """Row-major interleaved RGB, 3 bytes per pixel."""
        return self.pixels.tobytes()

    @classmethod
    def from_raw_bytes(cls, data: bytes, width: int, height: int) -> "FrameRaster":
        expected = width * height * 3
        if len(data) != expected:
            raise ValueError(f"raw frame needs {expected} bytes for {width}x{height}, got {len(data)}")
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy())


def rgb_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB [0,1] to (hue degrees [0,360), saturation, value)."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = np.max(rgb, axis=-1)
    c = v - np.min(rgb, axis=-1)
    s = np.where(v > 0, c / np.maximum(v, 1e-12), 0.0)

    with np.errstate(invalid="ignore", divide="ignore"):
        safe_c = np.maximum(c, 1e-12)
        h = np.where(
            v == r,
            (g - b) / safe_c % 6.0,
            np.where(v == g, (b - r) / safe_c + 2.0, (r - g) / safe_c + 4.0),
        )
    h = np.where(c > 0, h * 60.0, 0.0) % 360.0
    return h, s, v


def box_blur(img: np.ndarray, radius: int) -> np.ndarray:
    """Separable box blur with edge-replicated borders; radius 0 is a no-op."""
    if radius < 0:
        raise ValueError(f"blur radius must be >= 0, got {radius}")
    if radius == 0:
        return img.astype(np.float64, copy=True)
    out = img.astype(np.float64)
    size = 2 * radius + 1
    for axis in (0, 1):
        padded = np.concatenate(
            [
                np.repeat(out.take([0], axis=axis), radius, axis=axis),
                out,
                np.repeat(out.take([-1], axis=axis), radius, axis=axis),
            ],
            axis=axis,
        )
        csum = np.cumsum(padded, axis=axis)
        zero = np.zeros_like(csum.take([0], axis=axis))
        csum = np.concatenate([zero, csum], axis=axis)
        hi = csum.take(range(size, csum.shape[axis]), axis=axis)
        lo = csum.take(range(0, csum.shape[axis] - size), axis=axis)
        out = (hi - lo) / size
    return out


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample; identity when the shape already matches."""
    in_h, in_w = src.shape[:2]
    if (in_h, in_w) == (out_h, out_w):
        return src.astype(np.float64, copy=True)
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, in_h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, in_w - 1)
    y1 = np.clip(y0 + 1, 0, in_h - 1)
    x1 = np.clip(x0 + 1, 0, in_w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[:, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, :]

    arr = src.astype(np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    top = arr[y0][:, x0] * (1 - wx[..., None]) + arr[y0][:, x1] * wx[..., None]
    bot = arr[y1][:, x0] * (1 - wx[..., None]) + arr[y1][:, x1] * wx[..., None]
    out = top * (1 - wy[..., None]) + bot * wy[..., None]
    if src.ndim == 2:
        return out[:, :, 0]
    return out
