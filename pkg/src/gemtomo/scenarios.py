"""Test-object generators: cloud density, flat and modulated spin waves,
checkerboard/bitmap phase patterns, and current-loop magnetic phase imprints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.special import ellipe, ellipk, erf

from .errors import ValidationError
from .fields import ComplexField3D, GridSpec
from .physics import HBAR, MU_0, MU_B

_PLANES = ("zx", "zy", "xy")


@dataclass(frozen=True)
class CloudParams:
    """Pencil-shaped cloud: transverse Gaussian, longitudinal plateau of
    length length_z with erf edges of scale edge_softness."""

    length_z: float = 10e-3
    sigma_x: float = 0.15e-3
    sigma_y: float = 0.15e-3
    edge_softness: float = 0.3e-3
    peak_density: float = 1.0

    def __post_init__(self):
        for name in ("length_z", "sigma_x", "sigma_y", "edge_softness", "peak_density"):
            if not (getattr(self, name) > 0):
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class TwoPulseParams:
    alpha: float = 1.0
    delta_t: float = 8e-6

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if not (self.delta_t > 0):
            raise ValidationError(f"delta_t must be > 0, got {self.delta_t}")


@dataclass(frozen=True)
class CoilParams:
    """Circular current loop plus the bias field B0 along z."""

    radius: float
    current: float
    t_c: float
    center: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (0.0, 0.0, 1.0)
    B0: float = 1e-4

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValidationError(f"radius must be > 0, got {self.radius}")
        norm = math.sqrt(sum(a * a for a in self.axis))
        if norm == 0:
            raise ValidationError("coil axis must be a nonzero vector")
        object.__setattr__(self, "axis", tuple(a / norm for a in self.axis))


def cloud_density(grid: GridSpec, c: CloudParams) -> np.ndarray:
    """n(x,y,z) = peak * exp(-x^2/2sx^2 - y^2/2sy^2) * edge(z)."""
    x = grid.x_axis.coords[:, None, None]
    y = grid.y_axis.coords[None, :, None]
    z = grid.z_axis.coords[None, None, :]
    w = c.edge_softness
    edge = 0.5 * (
        erf((z + 0.5 * c.length_z) / (math.sqrt(2) * w))
        - erf((z - 0.5 * c.length_z) / (math.sqrt(2) * w))
    )
    # normalize so the value at cloud center equals peak_density exactly
    edge_center = erf(0.5 * c.length_z / (math.sqrt(2) * w))
    transverse = np.exp(-(x**2) / (2 * c.sigma_x**2) - y**2 / (2 * c.sigma_y**2))
    return c.peak_density * transverse * (edge / edge_center)


def flat_spinwave(grid: GridSpec, c: CloudParams) -> ComplexField3D:
    """Spin wave with the cloud's density and zero phase everywhere."""
    return ComplexField3D(grid, cloud_density(grid, c).astype(np.complex128))


def _plane_coords(grid: GridSpec, plane: str):
    if plane not in _PLANES:
        raise ValidationError(f"plane must be one of {_PLANES}, got {plane!r}")
    axes = {"x": grid.x_axis, "y": grid.y_axis, "z": grid.z_axis}
    a_name, b_name = plane[0], plane[1]
    return axes[a_name], axes[b_name], a_name, b_name


def _extrude(grid: GridSpec, pattern2d: np.ndarray, a_name: str, b_name: str) -> np.ndarray:
    """Place a 2D (a, b) pattern into the 3D grid, extruded along the third axis."""
    order = {"x": 0, "y": 1, "z": 2}
    ia, ib = order[a_name], order[b_name]
    (ic,) = set((0, 1, 2)) - {ia, ib}
    moved = np.expand_dims(np.asarray(pattern2d, dtype=float), axis=ic)
    if ia > ib:  # pattern axes land in ascending dim order; realign if needed
        moved = np.swapaxes(moved, ia, ib)
    reps = [1, 1, 1]
    reps[ic] = grid.shape[ic]
    return np.tile(moved, reps)


def checkerboard_phase(
    grid: GridSpec, tile: float, amplitude: float, plane: str = "zx"
) -> np.ndarray:
    """Binary checkerboard in the given plane, extruded along the third axis.
    Values are exactly {0, amplitude}; parity flips at tile boundaries."""
    ax_a, ax_b, a_name, b_name = _plane_coords(grid, plane)
    if tile <= max(ax_a.step, ax_b.step):
        raise ValidationError(
            f"tile {tile} must exceed the grid step ({ax_a.step}, {ax_b.step})"
        )
    a = ax_a.coords[:, None]
    b = ax_b.coords[None, :]
    parity = (np.floor(a / tile) + np.floor(b / tile)) % 2
    return _extrude(grid, amplitude * parity, a_name, b_name)


def bitmap_phase(
    grid: GridSpec,
    raster,
    scale: float,
    amplitude: float,
    plane: str = "zx",
    threshold: int = 128,
) -> np.ndarray:
    """Binary raster pattern (8-bit grayscale, thresholded at 128) mapped onto
    the grid with `scale` meters per raster pixel, nearest-neighbor sampled,
    centered on the plane, extruded along the third axis."""
    if isinstance(raster, (str, bytes)) or hasattr(raster, "read"):
        with Image.open(raster) as img:
            raster = np.asarray(img.convert("L"))
    raster = np.asarray(raster)
    if raster.ndim != 2 or raster.size == 0:
        raise ValidationError("raster must be a nonempty 2D image")
    if not (scale > 0):
        raise ValidationError(f"scale must be > 0, got {scale}")
    bits = raster >= threshold
    ax_a, ax_b, a_name, b_name = _plane_coords(grid, plane)
    # raster rows map to the first plane axis, columns to the second
    ia = np.rint(ax_a.coords / scale + (raster.shape[0] - 1) / 2).astype(int)
    ib = np.rint(ax_b.coords / scale + (raster.shape[1] - 1) / 2).astype(int)
    inside_a = (ia >= 0) & (ia < raster.shape[0])
    inside_b = (ib >= 0) & (ib < raster.shape[1])
    pattern = np.zeros((ax_a.n, ax_b.n))
    sel = np.ix_(inside_a, inside_b)
    pattern[sel] = bits[np.ix_(ia[inside_a], ib[inside_b])]
    return _extrude(grid, amplitude * pattern, a_name, b_name)


def two_pulse_spinwave(
    grid: GridSpec, c: CloudParams, tp: TwoPulseParams, beta_bar: float
) -> ComplexField3D:
    """Spin wave written by two pulses separated by delta_t:
    S = n(x,y,z) * (1 + alpha*e^{2*pi*i*delta_t*beta_bar*z}) / (1 + alpha)."""
    if not (beta_bar > 0):
        raise ValidationError(f"beta_bar must be > 0, got {beta_bar}")
    z = grid.z_axis.coords[None, None, :]
    modulation = (1.0 + tp.alpha * np.exp(2j * np.pi * tp.delta_t * beta_bar * z)) / (
        1.0 + tp.alpha
    )
    return ComplexField3D(grid, cloud_density(grid, c) * modulation)


def _loop_field_local(rho: np.ndarray, zloc: np.ndarray, a: float, current: float):
    """Circular-loop field in loop-frame cylindrical coordinates via the
    complete elliptic integrals; returns (B_rho, B_z)."""
    apr2 = (a + rho) ** 2
    amr2 = (a - rho) ** 2
    dz2 = zloc**2
    q = apr2 + dz2
    m = 4.0 * a * rho / q  # elliptic parameter
    K = ellipk(m)
    E = ellipe(m)
    pref = MU_0 * current / (2.0 * np.pi * np.sqrt(q))
    denom = amr2 + dz2
    bz = pref * (K + E * (a**2 - rho**2 - dz2) / denom)
    brho = np.zeros_like(bz)
    on_axis = rho == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        brho = pref * (zloc / np.where(on_axis, 1.0, rho)) * (
            E * (a**2 + rho**2 + dz2) / denom - K
        )
    brho[on_axis] = 0.0
    return brho, bz


def _axis_frame(axis):
    n = np.asarray(axis, dtype=float)
    helper = np.array([1.0, 0.0, 0.0])
    if abs(n[0]) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v, n


def coil_field(points, coil: CoilParams) -> np.ndarray:
    """Magnetic field (tesla) of the circular loop at the given points
    (shape (..., 3)).  Raises on points within 1e-6 m of the wire."""
    pts = np.asarray(points, dtype=float)
    squeeze = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != 3:
        raise ValidationError("points must have shape (..., 3)")
    u, v, n = _axis_frame(coil.axis)
    rel = pts.reshape(-1, 3) - np.asarray(coil.center)
    xloc = rel @ u
    yloc = rel @ v
    zloc = rel @ n
    rho = np.hypot(xloc, yloc)
    wire_dist = np.sqrt((rho - coil.radius) ** 2 + zloc**2)
    if np.any(wire_dist <= 1e-6):
        raise ValidationError("field requested within 1e-6 m of the coil wire")
    brho, bz = _loop_field_local(rho, zloc, coil.radius, coil.current)
    with np.errstate(invalid="ignore"):
        cos_phi = np.where(rho > 0, xloc / np.where(rho > 0, rho, 1.0), 0.0)
        sin_phi = np.where(rho > 0, yloc / np.where(rho > 0, rho, 1.0), 0.0)
    bvec = (
        brho[:, None] * (cos_phi[:, None] * u + sin_phi[:, None] * v)
        + bz[:, None] * n
    )
    out = bvec.reshape(pts.shape)
    return out[0] if squeeze else out


def coil_phase_map(grid: GridSpec, coil: CoilParams) -> np.ndarray:
    """Accumulated phase phi(r) = mu_B * |B_coil(r) + z_hat*B0| * t_c / hbar."""
    X, Y, Z = grid.meshgrid()
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)
    B = coil_field(pts, coil)
    B[:, 2] += coil.B0
    mag = np.linalg.norm(B, axis=-1).reshape(grid.shape)
    return MU_B * mag * coil.t_c / HBAR
