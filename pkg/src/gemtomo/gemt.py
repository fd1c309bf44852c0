"""GEMT self-describing binary array container.

Layout (all integers and floats little-endian):

    magic   4 bytes  b"GEMT"
    version u32      1
    dtype   u8       1 = interleaved IEEE-754 binary32 pairs (complex64)
                     2 = interleaved IEEE-754 binary64 pairs (complex128)
                     3 = uint8 (mask rasters)
    ndim    u8
    per dimension: { n: u64, step: f64, origin: f64, unit: 16 bytes,
                     zero-padded ASCII tag }
    payload: row-major, last axis fastest
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError
from .fields import (
    AxisSpec,
    ComplexField3D,
    GridSpec,
    KSpaceSignal,
    _kset_to_tag,
)

MAGIC = b"GEMT"
VERSION = 1

_DTYPE_CODES = {1: np.dtype("<c8"), 2: np.dtype("<c16"), 3: np.dtype("u1")}
_CODE_FOR_KIND = {"c8": 1, "c16": 2, "u1": 3}

_HEAD = struct.Struct("<4sIBB")
_DIM = struct.Struct("<Qdd16s")


@dataclass(frozen=True)
class GemtAxis:
    n: int
    step: float
    origin: float
    unit: str

    def to_axis_spec(self) -> AxisSpec:
        return AxisSpec(self.n, self.step, self.origin)


def _dtype_code(values: np.ndarray) -> int:
    if values.dtype == np.complex64:
        return 1
    if values.dtype == np.complex128:
        return 2
    if values.dtype == np.uint8:
        return 3
    raise ValidationError(f"unsupported dtype for GEMT payload: {values.dtype}")


def write_gemt(path, values: np.ndarray, axes) -> None:
    """Write an array with per-axis metadata.  `axes` is a sequence of
    GemtAxis (or (n, step, origin, unit) tuples), one per dimension."""
    values = np.asarray(values)
    axes = [a if isinstance(a, GemtAxis) else GemtAxis(*a) for a in axes]
    if len(axes) != values.ndim:
        raise ValidationError(
            f"got {len(axes)} axis entries for a {values.ndim}-dimensional array"
        )
    for ax, n in zip(axes, values.shape):
        if ax.n != n:
            raise ValidationError(f"axis n={ax.n} does not match array extent {n}")
    code = _dtype_code(values)
    payload = np.ascontiguousarray(values.astype(_DTYPE_CODES[code], copy=False))
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, code, values.ndim))
        for ax in axes:
            unit = ax.unit.encode("ascii")
            if len(unit) > 16:
                raise ValidationError(f"unit tag too long: {ax.unit!r}")
            fh.write(_DIM.pack(ax.n, ax.step, ax.origin, unit))
        fh.write(payload.tobytes())


def read_gemt(path):
    """Read a GEMT file.  Returns (values, [GemtAxis, ...])."""
    with open(path, "rb") as fh:
        head = fh.read(_HEAD.size)
        if len(head) < _HEAD.size:
            raise FormatError("truncated GEMT header")
        magic, version, code, ndim = _HEAD.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FormatError(f"unsupported GEMT version {version}")
        if code not in _DTYPE_CODES:
            raise FormatError(f"unknown GEMT dtype code {code}")
        axes = []
        for _ in range(ndim):
            raw = fh.read(_DIM.size)
            if len(raw) < _DIM.size:
                raise FormatError("truncated GEMT dimension table")
            n, step, origin, unit = _DIM.unpack(raw)
            axes.append(GemtAxis(n, step, origin, unit.rstrip(b"\x00").decode("ascii")))
        dtype = _DTYPE_CODES[code]
        count = int(np.prod([a.n for a in axes])) if axes else 1
        payload = fh.read()
    values = np.frombuffer(payload, dtype=dtype)
    if values.size != count:
        raise FormatError(
            f"payload has {values.size} elements, dimension table implies {count}"
        )
    return values.reshape([a.n for a in axes]), axes


_K_UNIT = "rad/m"


def save_field(path, field: ComplexField3D) -> None:
    kset = {"real-space": "", "kxy-z": "xy", "kxykz": "xyz"}.get(field.domain_tag)
    if kset is None and field.domain_tag.startswith("k:"):
        kset = field.domain_tag[2:]
    units = [(_K_UNIT if name in (kset or "") else "m") for name in "xyz"]
    axes = [
        GemtAxis(ax.n, ax.step, ax.origin, unit)
        for ax, unit in zip(field.grid.axes, units)
    ]
    write_gemt(path, field.values, axes)


def load_field(path) -> ComplexField3D:
    values, axes = read_gemt(path)
    if len(axes) != 3:
        raise FormatError(f"expected a 3D field, file has {len(axes)} dimensions")
    kset = frozenset(name for name, ax in zip("xyz", axes) if ax.unit == _K_UNIT)
    for name, ax in zip("xyz", axes):
        if ax.unit not in ("m", _K_UNIT):
            raise FormatError(f"axis {name} has unit {ax.unit!r}, expected m or rad/m")
    grid = GridSpec(*(ax.to_axis_spec() for ax in axes))
    return ComplexField3D(grid, values.astype(np.complex128), _kset_to_tag(kset))


def save_signal(path, sig: KSpaceSignal) -> None:
    axes = [
        GemtAxis(sig.kx_axis.n, sig.kx_axis.step, sig.kx_axis.origin, _K_UNIT),
        GemtAxis(sig.ky_axis.n, sig.ky_axis.step, sig.ky_axis.origin, _K_UNIT),
        GemtAxis(sig.t_axis.n, sig.t_axis.step, sig.t_axis.origin, "s"),
    ]
    write_gemt(path, sig.values, axes)


def load_signal(path) -> KSpaceSignal:
    values, axes = read_gemt(path)
    if len(axes) != 3:
        raise FormatError(f"expected a 3D signal, file has {len(axes)} dimensions")
    units = [ax.unit for ax in axes]
    if units != [_K_UNIT, _K_UNIT, "s"]:
        raise FormatError(f"signal axis units {units} != ['rad/m', 'rad/m', 's']")
    return KSpaceSignal(
        axes[0].to_axis_spec(),
        axes[1].to_axis_spec(),
        axes[2].to_axis_spec(),
        values.astype(np.complex128),
    )


def save_mask(path, mask: np.ndarray, grid: GridSpec) -> None:
    """Mask raster: uint8 payload, 1 inside, 0 outside."""
    axes = [GemtAxis(ax.n, ax.step, ax.origin, "m") for ax in grid.axes]
    write_gemt(path, mask.astype(np.uint8), axes)


def load_mask(path):
    values, axes = read_gemt(path)
    if values.dtype != np.uint8:
        raise FormatError("mask raster must have uint8 payload")
    grid = GridSpec(*(ax.to_axis_spec() for ax in axes))
    return values.astype(bool), grid
