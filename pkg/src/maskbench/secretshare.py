"""
Three-party secret sharing of qubit states and images.

A pixel colour is mapped to a Bloch vector through an HSL bijection, masked
with three maskers whose disks are orthogonal coordinate planes, and each
recipient keeps one marginal. A marginal ``diag((1+w)/2, (1-w)/2)`` reveals a
single coordinate ``w``; all three together pin the state.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ShareFormatError, TamperDetected
from .maskers import qubit_masker
from .qcore import BlochVector, DensityMatrix, bloch_to_density

TAMPER_TOL = 1e-6

# recipient order: the share from masker i reveals coordinate i (x, y, z)
MASKER_IDS = ("U_pi/2^0", "U_pi/2^pi/2", "U_0^0")
MASKER_ANGLES = {
    "U_pi/2^0": (math.pi / 2, 0.0),
    "U_pi/2^pi/2": (math.pi / 2, math.pi / 2),
    "U_0^0": (0.0, 0.0),
}


def share_masker(masker_id: str):
    try:
        return qubit_masker(*MASKER_ANGLES[masker_id])
    except KeyError:
        raise ValueError(f"unknown masker id {masker_id!r}") from None


@dataclass(frozen=True)
class ColorHSL:
    h: float
    s: float
    l: float

    def __post_init__(self):
        if not (0 <= self.h < 1 and 0 <= self.s <= 1 and 0 <= self.l <= 1):
            raise ValueError(f"HSL out of range: {self}")


@dataclass(frozen=True)
class ColorRGB:
    r: float
    g: float
    b: float

    def __post_init__(self):
        if not all(0 <= v <= 1 for v in (self.r, self.g, self.b)):
            raise ValueError(f"RGB out of range: {self}")

    @classmethod
    def from_bytes(cls, r, g, b):
        return cls(r / 255, g / 255, b / 255)

    def to_bytes(self):
        return tuple(int(round(255 * v)) for v in (self.r, self.g, self.b))


# -- colour codec (vectorized over a trailing axis of length 3) --------------

def bloch_to_hsl_array(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    if np.any(np.sqrt(x * x + y * y + z * z) > 1 + 1e-10):
        raise ValueError("Bloch vector outside the unit ball")
    ang = np.arctan2(y, x)
    ang = np.where(ang >= np.pi, -np.pi, ang)  # range [-pi, pi)
    h = 0.5 + ang / (2 * np.pi)
    rho2 = x * x + y * y
    h = np.where(rho2 == 0, 0.0, h)
    h = np.where(h >= 1.0, 0.0, h)
    denom = 1 - z * z
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0, rho2 / np.where(denom > 0, denom, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    l = np.clip((1 + z) / 2, 0.0, 1.0)
    return np.stack([h, s, l], axis=-1)


def hsl_to_bloch_array(hsl) -> np.ndarray:
    hsl = np.asarray(hsl, dtype=float)
    h, s, l = hsl[..., 0], hsl[..., 1], hsl[..., 2]
    z = 2 * l - 1
    r = np.sqrt(np.clip(s * (1 - z * z), 0.0, None))
    ang = 2 * np.pi * (h - 0.5)
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=-1)


def hsl_to_rgb_array(hsl) -> np.ndarray:
    hsl = np.asarray(hsl, dtype=float)
    h, s, l = hsl[..., 0], hsl[..., 1], hsl[..., 2]
    a = s * np.minimum(l, 1 - l)

    def f(n):
        k = (n + 12 * h) % 12
        return l - a * np.maximum(-1, np.minimum(np.minimum(k - 3, 9 - k), 1))

    return np.clip(np.stack([f(0), f(8), f(4)], axis=-1), 0.0, 1.0)


def rgb_to_hsl_array(rgb) -> np.ndarray:
    """Standard RGB to HSL (same convention as ``colorsys.rgb_to_hls``)."""
    rgb = np.asarray(rgb, dtype=float)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    chroma = mx - mn
    l = (mx + mn) / 2
    gray = chroma == 0
    safe = np.where(gray, 1.0, chroma)
    s = np.where(gray, 0.0, chroma / np.where(gray, 1.0, 1 - np.abs(2 * l - 1)))
    rc, gc, bc = (mx - r) / safe, (mx - g) / safe, (mx - b) / safe
    h = np.where(r == mx, bc - gc, np.where(g == mx, 2 + rc - bc, 4 + gc - rc))
    h = np.where(gray, 0.0, (h / 6) % 1.0)
    return np.stack([h, np.clip(s, 0.0, 1.0), l], axis=-1)


def bloch_to_hsl(v) -> ColorHSL:
    """Hue from the azimuth, saturation from the in-plane radius, luminosity from z.

    ``h = 1/2 + atan2(y, x)/(2 pi)``, ``s = (x^2 + y^2)/(1 - z^2)``,
    ``l = (1 + z)/2``; ``h = 0`` on the z axis and ``s = 0`` at the poles.
    """
    if isinstance(v, BlochVector):
        v = v.as_array()
    if np.linalg.norm(v) > 1 + 1e-10:
        raise ValueError("Bloch vector outside the unit ball")
    return ColorHSL(*bloch_to_hsl_array(v).tolist())


def hsl_to_bloch(c: ColorHSL) -> BlochVector:
    x, y, z = hsl_to_bloch_array([c.h, c.s, c.l])
    return BlochVector(x, y, z)


def hsl_to_rgb(c: ColorHSL) -> ColorRGB:
    return ColorRGB(*hsl_to_rgb_array([c.h, c.s, c.l]).tolist())


def rgb_to_hsl(c: ColorRGB) -> ColorHSL:
    return ColorHSL(*rgb_to_hsl_array([c.r, c.g, c.b]).tolist())


# -- single pixel -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PixelShare:
    masker_id: str
    marginal: DensityMatrix

    def __post_init__(self):
        if self.masker_id not in MASKER_IDS:
            raise ValueError(f"unknown masker id {self.masker_id!r}")
        if self.marginal.dim != 2:
            raise DimensionError("a pixel share holds a qubit marginal")

    @property
    def w(self) -> float:
        m = self.marginal.mat
        return float((m[0, 0] - m[1, 1]).real)

    @classmethod
    def from_w(cls, masker_id: str, w: float) -> PixelShare:
        if abs(w) > 1 + TAMPER_TOL:
            raise TamperDetected(f"share value {w} is not a population difference")
        w = float(np.clip(w, -1, 1))
        return cls(masker_id, DensityMatrix(np.diag([(1 + w) / 2, (1 - w) / 2])))


def share_pixel(v) -> tuple:
    """Mask the pixel state with each sharing masker and keep Bob's marginal."""
    from .maskers import masked_marginals

    if not isinstance(v, BlochVector):
        v = BlochVector.from_array(v)
    rho = bloch_to_density(v)
    return tuple(
        PixelShare(mid, masked_marginals(share_masker(mid), rho)[1]) for mid in MASKER_IDS
    )


def reconstruct_pixel(s1: PixelShare, s2: PixelShare, s3: PixelShare) -> BlochVector:
    """Intersect the three orthogonal disks singled out by the shares."""
    shares = (s1, s2, s3)
    ids = [s.masker_id for s in shares]
    if len(set(ids)) != 3:
        raise ValueError(f"duplicate masker id among {ids}")
    coords = np.zeros(3)
    for s in shares:
        coords[MASKER_IDS.index(s.masker_id)] = s.w
    norm = np.linalg.norm(coords)
    if norm > 1 + TAMPER_TOL:
        raise TamperDetected(f"reconstruction of a non-physical state (norm {norm:.6g})")
    if norm > 1:
        coords = coords / norm
    return BlochVector.from_array(coords)


# -- images -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ImageShare:
    """One recipient's share of an image: the coordinate ``w`` for every pixel."""

    masker_id: str
    width: int
    height: int
    w: np.ndarray

    def __post_init__(self):
        if self.masker_id not in MASKER_IDS:
            raise ValueError(f"unknown masker id {self.masker_id!r}")
        w = np.array(self.w, dtype="<f8", copy=True).reshape(self.height, self.width)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def checksum(self) -> str:
        return "sha256:" + hashlib.sha256(self.w.tobytes()).hexdigest()

    def to_bytes(self) -> bytes:
        header = {
            "format": "maskbench-share",
            "version": 1,
            "masker_id": self.masker_id,
            "width": self.width,
            "height": self.height,
            "dtype": "<f8",
            "checksum": self.checksum(),
        }
        return json.dumps(header, sort_keys=True).encode() + b"\n" + self.w.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> ImageShare:
        head, sep, body = data.partition(b"\n")
        if not sep:
            raise ShareFormatError("missing share header")
        try:
            hdr = json.loads(head)
            share = cls(
                hdr["masker_id"], int(hdr["width"]), int(hdr["height"]),
                np.frombuffer(body, dtype="<f8"),
            )
        except (ValueError, KeyError) as exc:
            raise ShareFormatError(f"malformed share file: {exc}") from None
        if hdr.get("format") != "maskbench-share":
            raise ShareFormatError("not a maskbench share file")
        if hdr.get("checksum") != share.checksum():
            raise ShareFormatError("checksum mismatch")
        return share


def write_share(path, share: ImageShare):
    with open(path, "wb") as fh:
        fh.write(share.to_bytes())


def read_share(path) -> ImageShare:
    with open(path, "rb") as fh:
        return ImageShare.from_bytes(fh.read())


def _bob_population_difference(masker, rho):
    """Bob's marginal for a stack of qubit states, reduced to ``w = m00 - m11``."""
    v = masker.columns
    rho_ab = np.einsum("ai,nij,bj->nab", v, rho, v.conj())
    bob = np.einsum("nijik->njk", rho_ab.reshape(-1, 2, 2, 2, 2))
    return (bob[:, 0, 0] - bob[:, 1, 1]).real


def image_to_bloch(pixels) -> np.ndarray:
    """8-bit RGB grid (H, W, 3) to Bloch vectors (H, W, 3)."""
    rgb = np.asarray(pixels, dtype=float) / 255.0
    return hsl_to_bloch_array(rgb_to_hsl_array(rgb))


def bloch_to_image(v) -> np.ndarray:
    rgb = hsl_to_rgb_array(bloch_to_hsl_array(v))
    return np.rint(rgb * 255).astype(np.uint8)


def share_image(pixels) -> tuple:
    """Split an 8-bit RGB image into three :class:`ImageShare` objects."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.shape[0] * pixels.shape[1] == 0:
        raise DimensionError("expected a non-empty (height, width, 3) image")
    height, width = pixels.shape[:2]
    v = image_to_bloch(pixels).reshape(-1, 3)
    rho = 0.5 * np.array([[1 + v[:, 2], v[:, 0] - 1j * v[:, 1]], [v[:, 0] + 1j * v[:, 1], 1 - v[:, 2]]])
    rho = np.moveaxis(rho, -1, 0)
    return tuple(
        ImageShare(mid, width, height, _bob_population_difference(share_masker(mid), rho))
        for mid in MASKER_IDS
    )


@dataclass
class ReconstructionResult:
    pixels: np.ndarray
    bloch: np.ndarray
    tampered: list = field(default_factory=list)
    correlation: float | None = None
    channel_correlation: list | None = None
    constant_channels: list = field(default_factory=list)
    max_abs_error: list | None = None

    def report(self) -> dict:
        out = {
            "width": int(self.pixels.shape[1]),
            "height": int(self.pixels.shape[0]),
            "tampered_pixels": [list(p) for p in self.tampered],
        }
        if self.correlation is not None:
            out.update(
                correlation=self.correlation,
                channel_correlation=self.channel_correlation,
                constant_channels=self.constant_channels,
                max_abs_error=self.max_abs_error,
                correlation_definition="mean over R,G,B of the Pearson correlation of 8-bit values",
            )
        return out


def image_correlation(original, reconstructed):
    """Mean per-channel Pearson correlation, per-channel values, and constant channels.

    A channel with zero variance in either image counts as 1.0 when the two
    channels are identical and 0.0 otherwise, and is listed as constant.
    """
    a = np.asarray(original, dtype=float).reshape(-1, 3)
    b = np.asarray(reconstructed, dtype=float).reshape(-1, 3)
    per, constant = [], []
    for ch, name in enumerate("RGB"):
        x, y = a[:, ch], b[:, ch]
        if x.std() == 0 or y.std() == 0:
            constant.append(name)
            per.append(1.0 if np.array_equal(x, y) else 0.0)
        else:
            per.append(float(np.corrcoef(x, y)[0, 1]))
    return float(np.mean(per)), per, constant


def reconstruct_image(shares, original=None) -> ReconstructionResult:
    """
    Combine three image shares into an 8-bit RGB image.

    Pixels whose coordinates leave the Bloch ball are collected in
    ``tampered`` as ``(row, col)`` and rendered from the radially projected
    point; callers decide whether to raise :class:`TamperDetected`.
    """
    shares = list(shares)
    if len(shares) != 3:
        raise ValueError("need exactly three shares")
    ids = [s.masker_id for s in shares]
    if len(set(ids)) != 3:
        raise ValueError(f"duplicate masker id among {ids}")
    shape = {(s.height, s.width) for s in shares}
    if len(shape) != 1:
        raise DimensionError(f"share dimensions differ: {sorted(shape)}")
    by_id = {s.masker_id: s for s in shares}
    v = np.stack([by_id[mid].w for mid in MASKER_IDS], axis=-1)
    norm = np.linalg.norm(v, axis=-1)
    bad = norm > 1 + TAMPER_TOL
    tampered = [tuple(int(i) for i in rc) for rc in np.argwhere(bad)]
    scale = np.where(norm > 1, 1 / np.where(norm > 1, norm, 1), 1.0)
    v = v * scale[..., None]
    pixels = bloch_to_image(v)
    result = ReconstructionResult(pixels, v, tampered)
    if original is not None:
        original = np.asarray(original)
        if original.shape != pixels.shape:
            raise DimensionError(f"comparison image {original.shape} vs reconstruction {pixels.shape}")
        corr, per, const = image_correlation(original, pixels)
        result.correlation = corr
        result.channel_correlation = per
        result.constant_channels = const
        diff = np.abs(original.astype(int) - pixels.astype(int)).reshape(-1, 3)
        result.max_abs_error = [int(m) for m in diff.max(axis=0)]
    return result


def read_ppm(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def write_ppm(path, pixels):
    from PIL import Image

    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(path, format="PPM")


def pattern_image(size: int = 32) -> np.ndarray:
    """Deterministic RGB test pattern: hue/lightness gradients plus the eight corner colours."""
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    hsl = np.stack([(xx * 0.999) % 1.0, 0.35 + 0.65 * yy, 0.15 + 0.7 * (1 - xx) * yy + 0.15 * xx], axis=-1)
    img = np.rint(hsl_to_rgb_array(hsl) * 255).astype(np.uint8)
    corners = np.array([[r, g, b] for r in (0, 255) for g in (0, 255) for b in (0, 255)], dtype=np.uint8)
    n = min(size, 8)
    img[0, :n] = corners[:n]
    return img
