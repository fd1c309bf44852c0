"""Grids, complex 3D fields, unitary Fourier transforms, and axis bookkeeping.

Conventions used throughout the package:

* Forward transforms use the kernel e^{-ik.r}, inverse transforms e^{+ik.r}.
* All discrete transforms are unitary (1/sqrt(n) per transformed axis), so
  total power is preserved exactly.
* Conjugate axes are DC-centered: after transforming an axis of n samples
  with spacing d, the new axis has spacing 2*pi/(n*d) and origin
  -(n//2) * step, i.e. the zero-frequency bin sits at index n//2.  Phase
  conventions correspond to coordinates measured from the center sample,
  which coincides with physical coordinates for centered grids.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

DOMAIN_REAL = "real-space"
DOMAIN_KXY_Z = "kxy-z"
DOMAIN_KXYKZ = "kxykz"

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class AxisSpec:
    """A uniform sample axis: count, spacing, and coordinate of sample 0."""

    n: int
    step: float
    origin: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"axis sample count must be >= 1, got {self.n}")
        if not (self.step > 0):
            raise ValidationError(f"axis step must be > 0, got {self.step}")

    @classmethod
    def centered(cls, n: int, step: float) -> "AxisSpec":
        """Axis whose center sample (index n//2) sits at coordinate 0."""
        return cls(n=n, step=step, origin=-(n // 2) * step)

    @property
    def coords(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.n)

    @property
    def span(self) -> float:
        return self.n * self.step

    @property
    def center(self) -> float:
        return self.origin + (self.n // 2) * self.step

    def conjugate(self) -> "AxisSpec":
        """The DC-centered Fourier-conjugate axis (step' = 2*pi/(n*step))."""
        return AxisSpec.centered(self.n, 2.0 * np.pi / (self.n * self.step))

    def scaled(self, factor: float) -> "AxisSpec":
        if not (factor > 0):
            raise ValidationError(f"axis scale factor must be > 0, got {factor}")
        return AxisSpec(self.n, self.step * factor, self.origin * factor)


@dataclass(frozen=True)
class GridSpec:
    """Rectilinear 3D grid.  rotation_xy records an in-plane rotation of the
    (x, y) axes relative to the lab frame; it is pure metadata."""

    x_axis: AxisSpec
    y_axis: AxisSpec
    z_axis: AxisSpec
    rotation_xy: float = 0.0

    @classmethod
    def centered(cls, shape, steps) -> "GridSpec":
        nx, ny, nz = shape
        dx, dy, dz = steps
        return cls(
            AxisSpec.centered(nx, dx),
            AxisSpec.centered(ny, dy),
            AxisSpec.centered(nz, dz),
        )

    @property
    def shape(self) -> tuple:
        return (self.x_axis.n, self.y_axis.n, self.z_axis.n)

    @property
    def axes(self) -> tuple:
        return (self.x_axis, self.y_axis, self.z_axis)

    def meshgrid(self):
        return np.meshgrid(
            self.x_axis.coords, self.y_axis.coords, self.z_axis.coords, indexing="ij"
        )


def _check_values(values: np.ndarray, shape: tuple, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != tuple(shape):
        raise ValidationError(
            f"{what} shape {values.shape} does not match axes {tuple(shape)}"
        )
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{what} contains non-finite values")
    return values


@dataclass(frozen=True, eq=False)
class ComplexField3D:
    """Complex scalar field on a rectilinear 3D grid."""

    grid: GridSpec
    values: np.ndarray
    domain_tag: str = DOMAIN_REAL

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.values, self.grid.shape, "field values")
        )

    def with_values(self, values: np.ndarray) -> "ComplexField3D":
        return ComplexField3D(self.grid, values, self.domain_tag)


@dataclass(frozen=True, eq=False)
class KSpaceSignal:
    """Complex readout samples on a (k_x, k_y, t_R) lattice, uniform in time."""

    kx_axis: AxisSpec
    ky_axis: AxisSpec
    t_axis: AxisSpec
    values: np.ndarray

    def __post_init__(self):
        shape = (self.kx_axis.n, self.ky_axis.n, self.t_axis.n)
        object.__setattr__(
            self, "values", _check_values(self.values, shape, "signal values")
        )

    @property
    def times(self) -> np.ndarray:
        return self.t_axis.coords

    def with_values(self, values: np.ndarray) -> "KSpaceSignal":
        return KSpaceSignal(self.kx_axis, self.ky_axis, self.t_axis, values)

    def transverse_k_grids(self):
        """Broadcastable (k_x, k_y) coordinate arrays, shapes (n,1) and (1,n)."""
        return (
            self.kx_axis.coords[:, None],
            self.ky_axis.coords[None, :],
        )


# domain-tag transitions under transforming the x/y/z axes
_K_SETS = {
    frozenset(): DOMAIN_REAL,
    frozenset("xy"): DOMAIN_KXY_Z,
    frozenset("xyz"): DOMAIN_KXYKZ,
}
_TAG_TO_SET = {v: k for k, v in _K_SETS.items()}


def _tag_to_kset(tag: str) -> frozenset:
    if tag in _TAG_TO_SET:
        return _TAG_TO_SET[tag]
    if tag.startswith("k:"):
        return frozenset(tag[2:])
    raise ValidationError(f"unknown domain tag {tag!r}")


def _kset_to_tag(kset: frozenset) -> str:
    return _K_SETS.get(kset, "k:" + "".join(sorted(kset)))


def fft_axes(field: ComplexField3D, axes, direction: str = "forward") -> ComplexField3D:
    """Unitary DFT of `field` along the named axes ('x', 'y', 'z').

    Axis metadata is converted to the DC-centered conjugate axis in both
    directions.  Forward uses the e^{-ik.r} kernel, inverse e^{+ik.r}.
    """
    if direction not in ("forward", "inverse"):
        raise ValidationError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    names = tuple(axes)
    if not names:
        return field
    dims = []
    for name in names:
        if name not in _AXIS_INDEX:
            raise ValidationError(f"unknown axis name {name!r}")
        dims.append(_AXIS_INDEX[name])
    if len(set(dims)) != len(dims):
        raise ValidationError(f"duplicate axis in {names}")

    shifted = np.fft.ifftshift(field.values, axes=dims)
    if direction == "forward":
        out = np.fft.fftn(shifted, axes=dims, norm="ortho")
    else:
        out = np.fft.ifftn(shifted, axes=dims, norm="ortho")
    out = np.fft.fftshift(out, axes=dims)

    new_axes = list(field.grid.axes)
    for dim in dims:
        new_axes[dim] = new_axes[dim].conjugate()
    grid = GridSpec(*new_axes, rotation_xy=field.grid.rotation_xy)

    kset = _tag_to_kset(field.domain_tag) ^ frozenset(names)
    return ComplexField3D(grid, out, _kset_to_tag(kset))


def kz_of_time(t_R, beta_bar: float):
    """Longitudinal wavevector read out at time t_R: k_z = -2*pi*beta_bar*t_R.

    beta_bar is the cyclic splitting gradient (Hz/m).
    """
    if not (beta_bar > 0):
        raise ValidationError(f"beta_bar must be > 0, got {beta_bar}")
    return -2.0 * np.pi * beta_bar * np.asarray(t_R)


def total_power(field) -> float:
    """Sum of |value|^2 over all samples of a field, signal, or array."""
    values = getattr(field, "values", field)
    return float(np.sum(np.abs(values) ** 2))
