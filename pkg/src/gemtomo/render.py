"""Figure-style output: phase/magnitude slice rasters (PNG) and 1D profile
CSVs.  Rasters are written directly from arrays so identical inputs produce
identical bytes.
"""

from __future__ import annotations

import csv

import numpy as np
from PIL import Image

from .errors import ValidationError


def phase_to_rgb(phase: np.ndarray) -> np.ndarray:
    """Cyclic colormap over (-pi, pi]: hue = (phase + pi) / 2pi, full
    saturation and value (HSV -> RGB, vectorized)."""
    h = (np.asarray(phase) + np.pi) / (2.0 * np.pi) % 1.0
    i = np.floor(h * 6.0).astype(int) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    q = 1.0 - f
    r = np.choose(i, [1.0, q, 0.0 * f, 0.0 * f, f, 1.0 + 0 * f])
    g = np.choose(i, [f, 1.0 + 0 * f, 1.0 + 0 * f, q, 0.0 * f, 0.0 * f])
    b = np.choose(i, [0.0 * f, 0.0 * f, f, 1.0 + 0 * f, 1.0 + 0 * f, q])
    rgb = np.stack([r, g, b], axis=-1)
    return (np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def magnitude_to_gray(mag: np.ndarray) -> np.ndarray:
    """Linear grayscale, 0 .. max -> 0 .. 255."""
    mag = np.asarray(mag, dtype=float)
    peak = mag.max()
    if peak <= 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    return (np.clip(mag / peak, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_png(path, rgb_or_gray: np.ndarray) -> None:
    arr = np.asarray(rgb_or_gray)
    if arr.ndim == 2:
        img = Image.fromarray(arr, mode="L")
    elif arr.ndim == 3 and arr.shape[-1] == 3:
        img = Image.fromarray(arr, mode="RGB")
    else:
        raise ValidationError(f"cannot render array of shape {arr.shape}")
    img.save(path, format="PNG")


def slice_of(values: np.ndarray, axis_name: str, index: int) -> np.ndarray:
    axes = {"x": 0, "y": 1, "z": 2}
    if axis_name not in axes:
        raise ValidationError(f"slice axis must be x, y, or z, got {axis_name!r}")
    dim = axes[axis_name]
    if not (0 <= index < values.shape[dim]):
        raise ValidationError(
            f"slice index {index} out of range for axis {axis_name} "
            f"(n={values.shape[dim]})"
        )
    return np.take(values, index, axis=dim)


def write_profiles_csv(path, plane: np.ndarray, row_coords, col_coords) -> None:
    """Center-row and center-column magnitude/phase profiles of a 2D slice."""
    plane = np.asarray(plane)
    r0 = plane.shape[0] // 2
    c0 = plane.shape[1] // 2
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["direction", "coordinate", "magnitude", "phase_rad"])
        for j, c in enumerate(col_coords):
            v = plane[r0, j]
            writer.writerow(["row", repr(float(c)), repr(abs(v)), repr(float(np.angle(v)))])
        for i, r in enumerate(row_coords):
            v = plane[i, c0]
            writer.writerow(["col", repr(float(r)), repr(abs(v)), repr(float(np.angle(v)))])


def render_slice(values3d: np.ndarray, axes_coords, axis_name: str, index: int,
                 out_stem: str, csv_path=None):
    """Write <stem>_phase.png, <stem>_mag.png, and optional profile CSV for
    one slice of a 3D complex array.  Returns the written paths."""
    plane = slice_of(values3d, axis_name, index)
    remaining = [name for name in "xyz" if name != axis_name]
    coords = {name: c for name, c in zip("xyz", axes_coords)}
    row_coords = coords[remaining[0]]
    col_coords = coords[remaining[1]]
    phase_path = f"{out_stem}_phase.png"
    mag_path = f"{out_stem}_mag.png"
    write_png(phase_path, phase_to_rgb(np.angle(plane)))
    write_png(mag_path, magnitude_to_gray(np.abs(plane)))
    written = [phase_path, mag_path]
    if csv_path:
        write_profiles_csv(csv_path, plane, row_coords, col_coords)
        written.append(csv_path)
    return written
