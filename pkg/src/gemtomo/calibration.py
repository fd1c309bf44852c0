"""Focus calibration of (z0, zeta), axis scale/rotation calibration against a
known pattern, and decoherence-lifetime fitting with temperature extraction.

Focus search: miscalibrated (z0, zeta) convert the stored phase pattern into
amplitude speckle, which concentrates the participation metric; the in-focus
reconstruction fills the cloud most uniformly.  The search therefore drives
the participation metric of the reconstruction to its minimum (equivalently,
maximizes the effective volume the image occupies).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.optimize import minimize

from .errors import NumericsError, ValidationError
from .fields import AxisSpec, ComplexField3D, KSpaceSignal
from .physics import (
    M_RB87,
    DecoherenceParams,
    temperature_from_tau_beta,
    temperature_from_tau_k,
)
from .reconstruct import CalibParams, reconstruct


def sharpness(field) -> float:
    """Normalized participation metric sum|v|^4 / (sum|v|^2)^2.

    A delta field scores 1, a uniform field over N samples scores 1/N (the
    minimal value).  Raises on an all-zero field.
    """
    values = getattr(field, "values", field)
    p2 = np.abs(np.asarray(values)) ** 2
    total = p2.sum()
    if total == 0.0:
        raise ValidationError("sharpness of an all-zero field is undefined")
    return float(np.sum(p2**2) / total**2)


@dataclass(frozen=True)
class FocusResult:
    z0: float
    zeta: float
    z0_identifiable: bool
    participation: float   # metric value at the optimum


# relative spread below which an objective axis is reported flat
_FLAT_TOL = 1e-6


def calibrate_focus(
    sig: KSpaceSignal,
    p,
    z0_range,
    zeta_range,
    base_calib: CalibParams = CalibParams(),
    z_axis: AxisSpec | None = None,
    decoherence: DecoherenceParams | None = None,
    grid_points: int = 21,
) -> FocusResult:
    """Locate (z0, zeta) by coarse grid search plus simplex refinement.

    The ranges must bracket the optimum; an optimum on the range boundary
    raises NumericsError advising a wider range.  When the data carries no
    transverse structure (k_perp ~ 0 only) the z0 axis of the objective is
    flat and the result is flagged unidentifiable.
    """
    z0_lo, z0_hi = map(float, z0_range)
    zeta_lo, zeta_hi = map(float, zeta_range)
    if not (z0_hi > z0_lo) or not (zeta_hi > zeta_lo):
        raise ValidationError("search ranges must have positive extent")
    if grid_points < 3:
        raise ValidationError("grid_points must be >= 3")

    def objective(z0, zeta):
        calib = CalibParams(
            z0=z0,
            zeta=zeta,
            omega_L_bar=base_calib.omega_L_bar,
            axis_scale=base_calib.axis_scale,
            rotation_xy=base_calib.rotation_xy,
            eta_floor=base_calib.eta_floor,
        )
        recon = reconstruct(sig, p, calib, z_axis=z_axis, decoherence=decoherence)
        return sharpness(recon)

    z0s = np.linspace(z0_lo, z0_hi, grid_points)
    zetas = np.linspace(zeta_lo, zeta_hi, grid_points)
    coarse = np.empty((grid_points, grid_points))
    for i, z0 in enumerate(z0s):
        for j, zt in enumerate(zetas):
            coarse[i, j] = objective(z0, zt)

    i_best, j_best = np.unravel_index(np.argmin(coarse), coarse.shape)

    # flatness along z0 at the best zeta column
    z0_column = coarse[:, j_best]
    z0_spread = (z0_column.max() - z0_column.min()) / coarse[i_best, j_best]
    z0_identifiable = bool(z0_spread > _FLAT_TOL)

    if not z0_identifiable:
        # refine zeta alone; report the (meaningless) z0 at mid-range
        zeta_col = coarse[i_best, :]
        if j_best in (0, grid_points - 1):
            raise NumericsError(
                "zeta optimum on the search boundary; widen zeta_range"
            )
        res = minimize(
            lambda q: objective(0.5 * (z0_lo + z0_hi), q[0]),
            x0=[zetas[j_best]],
            method="Nelder-Mead",
            options={"xatol": 1e-4 * (zeta_hi - zeta_lo), "fatol": 0.0},
        )
        zeta_opt = float(np.clip(res.x[0], zeta_lo, zeta_hi))
        return FocusResult(0.5 * (z0_lo + z0_hi), zeta_opt, False, float(res.fun))

    if i_best in (0, grid_points - 1) or j_best in (0, grid_points - 1):
        raise NumericsError(
            "focus optimum on the search boundary; widen z0_range/zeta_range"
        )

    span = np.array([z0_hi - z0_lo, zeta_hi - zeta_lo])
    res = minimize(
        lambda q: objective(q[0], q[1]),
        x0=[z0s[i_best], zetas[j_best]],
        method="Nelder-Mead",
        options={
            "xatol": float(1e-4 * span.min()),
            "fatol": 0.0,
            "initial_simplex": np.array(
                [
                    [z0s[i_best], zetas[j_best]],
                    [z0s[i_best] + 0.5 * (z0s[1] - z0s[0]), zetas[j_best]],
                    [z0s[i_best], zetas[j_best] + 0.5 * (zetas[1] - zetas[0])],
                ]
            ),
        },
    )
    z0_opt, zeta_opt = res.x
    edge = 0.02
    if (
        z0_opt < z0_lo + edge * span[0]
        or z0_opt > z0_hi - edge * span[0]
        or zeta_opt < zeta_lo + edge * span[1]
        or zeta_opt > zeta_hi - edge * span[1]
    ):
        raise NumericsError("refined focus optimum on the search boundary; widen ranges")
    return FocusResult(float(z0_opt), float(zeta_opt), True, float(res.fun))


@dataclass(frozen=True)
class AxesResult:
    s_x: float
    s_y: float
    s_z: float
    rotation_xy: float
    score: float


def _resample_target(target: np.ndarray, grid, params) -> np.ndarray:
    """Sample the target phase map at the transformed coordinates of the
    reconstruction voxels: true position = R(rot) applied in (x, y) after
    per-axis scaling."""
    sx, sy, sz, rot = params
    x = grid.x_axis.coords[:, None, None] * sx
    y = grid.y_axis.coords[None, :, None] * sy
    z = grid.z_axis.coords[None, None, :] * sz
    cos_r, sin_r = math.cos(rot), math.sin(rot)
    xr = cos_r * x - sin_r * y
    yr = sin_r * x + cos_r * y
    ix = (xr - grid.x_axis.origin) / grid.x_axis.step
    iy = (yr - grid.y_axis.origin) / grid.y_axis.step
    iz = (z - grid.z_axis.origin) / grid.z_axis.step
    ix, iy, iz = np.broadcast_arrays(ix, iy, iz)
    coords = np.stack([ix.ravel(), iy.ravel(), iz.ravel()])
    out = map_coordinates(target, coords, order=1, mode="nearest")
    return out.reshape(grid.shape)


def calibrate_axes(
    recon: ComplexField3D,
    target_phase: np.ndarray,
    scale_range=(0.9, 1.1),
    rotation_range=(-0.05, 0.05),
    mask: np.ndarray | None = None,
    grid_points: int = 5,
    min_score: float = 0.2,
) -> AxesResult:
    """Axis scales and in-plane rotation maximizing the magnitude of the
    normalized phase cross-correlation against a known pattern.

    C = |<e^{i target(T r)} , e^{i arg recon(r)}>_mask| / N_mask; C = 1 for an
    exact self-match.  Raises NumericsError when the best correlation stays
    below min_score (pattern not found).
    """
    target_phase = np.asarray(target_phase, dtype=float)
    if target_phase.shape != recon.values.shape:
        raise ValidationError(
            f"target shape {target_phase.shape} != recon shape {recon.values.shape}"
        )
    if mask is None:
        mag = np.abs(recon.values)
        mask = mag > 0.1 * mag.max()
    if not np.any(mask):
        raise ValidationError("empty mask")
    phase_unit = np.where(mask, np.exp(1j * np.angle(recon.values)), 0.0)
    n_mask = int(mask.sum())
    grid = recon.grid

    def score(params) -> float:
        t = _resample_target(target_phase, grid, params)
        return float(np.abs(np.sum(phase_unit * np.exp(-1j * t))) / n_mask)

    s_lo, s_hi = map(float, scale_range)
    r_lo, r_hi = map(float, rotation_range)
    scales = np.linspace(s_lo, s_hi, grid_points)
    rots = np.linspace(r_lo, r_hi, grid_points)
    center = np.array([0.5 * (s_lo + s_hi)] * 3 + [0.5 * (r_lo + r_hi)])

    best, best_score = None, -1.0
    for sx in scales:
        for sy in scales:
            for sz in scales:
                for rot in rots:
                    params = (sx, sy, sz, rot)
                    c = score(params)
                    # prefer mid-range parameters on ties (flat axes)
                    if c > best_score + 1e-12 or (
                        abs(c - best_score) <= 1e-12
                        and np.linalg.norm(np.array(params) - center)
                        < np.linalg.norm(np.array(best) - center)
                    ):
                        best, best_score = params, c

    res = minimize(
        lambda q: -score(q),
        x0=np.array(best),
        method="Nelder-Mead",
        options={"xatol": 1e-5, "fatol": 1e-10},
    )
    final = res.x
    final_score = score(final)
    if final_score < min_score:
        raise NumericsError(
            f"pattern not found: best correlation {final_score:.3f} < {min_score}"
        )
    return AxesResult(
        float(final[0]), float(final[1]), float(final[2]), float(final[3]), final_score
    )


@dataclass(frozen=True)
class DecayFitResult:
    tau_k: float
    tau_k_stderr: float
    tau_beta: float           # math.inf in gradient-off mode
    tau_beta_stderr: float
    temperature: float | None
    temperature_stderr: float | None
    mode: str
    amplitude: float          # fitted A0
    residual_rms: float       # log-domain residual


_MODES = ("gradient-on", "gradient-off")


def fit_decay(
    times,
    amplitudes,
    mode: str = "gradient-on",
    fixed_tau_k: float | None = None,
    k_sw: float | None = None,
    beta_bar: float | None = None,
    mass: float = M_RB87,
) -> DecayFitResult:
    """Least squares of A0 * eta(t) in the log domain.

    gradient-off fixes tau_beta = inf (Gaussian decay only) and reports the
    temperature from tau_k (needs k_sw).  gradient-on fits both times, or
    only tau_beta when fixed_tau_k is given, and reports the temperature from
    tau_beta (needs beta_bar).  Standard errors come from the linear-fit
    covariance; temperature errors by first-order propagation.
    """
    if mode not in _MODES:
        raise ValidationError(f"mode must be one of {_MODES}, got {mode!r}")
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitudes, dtype=float)
    if t.shape != a.shape or t.ndim != 1:
        raise ValidationError("times and amplitudes must be 1D arrays of equal length")
    if t.size < 6:
        raise ValidationError(f"need at least 6 points, got {t.size}")
    if np.any(a <= 0):
        raise ValidationError("amplitudes must be > 0")
    if np.any(t < 0):
        raise ValidationError("times must be >= 0")

    y = np.log(a)
    if mode == "gradient-off":
        X = np.column_stack([np.ones_like(t), -0.5 * t**2])
        names = ("log_a0", "inv_tau_k_sq")
    elif fixed_tau_k is not None:
        if not (fixed_tau_k > 0):
            raise ValidationError(f"fixed_tau_k must be > 0, got {fixed_tau_k}")
        y = y + 0.5 * t**2 / fixed_tau_k**2
        X = np.column_stack([np.ones_like(t), -0.5 * t**4])
        names = ("log_a0", "inv_tau_beta_4")
    else:
        X = np.column_stack([np.ones_like(t), -0.5 * t**2, -0.5 * t**4])
        names = ("log_a0", "inv_tau_k_sq", "inv_tau_beta_4")

    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise NumericsError("decay fit is rank-deficient; vary the sample times")
    resid = y - X @ coef
    dof = t.size - X.shape[1]
    sigma_sq = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma_sq * np.linalg.inv(X.T @ X)
    stderr = np.sqrt(np.diag(cov))
    residual_rms = float(np.sqrt(np.mean(resid**2)))

    params = dict(zip(names, zip(coef, stderr)))
    a0 = float(np.exp(params["log_a0"][0]))

    def _positive(name: str):
        value, err = params[name]
        if value <= 0:
            raise NumericsError(
                f"decay fit failed: {name} = {value:.3e} <= 0 "
                f"(log-domain residual rms {residual_rms:.3e})"
            )
        return value, err

    if mode == "gradient-off":
        p_k, p_k_err = _positive("inv_tau_k_sq")
        tau_k = p_k ** -0.5
        tau_k_err = 0.5 * p_k ** -1.5 * p_k_err
        tau_beta, tau_beta_err = math.inf, 0.0
    elif fixed_tau_k is not None:
        tau_k, tau_k_err = fixed_tau_k, 0.0
        q, q_err = _positive("inv_tau_beta_4")
        tau_beta = q ** -0.25
        tau_beta_err = 0.25 * q ** -1.25 * q_err
    else:
        p_k, p_k_err = _positive("inv_tau_k_sq")
        q, q_err = _positive("inv_tau_beta_4")
        tau_k = p_k ** -0.5
        tau_k_err = 0.5 * p_k ** -1.5 * p_k_err
        tau_beta = q ** -0.25
        tau_beta_err = 0.25 * q ** -1.25 * q_err

    temperature = temperature_err = None
    if mode == "gradient-off" and k_sw is not None:
        temperature = temperature_from_tau_k(tau_k, k_sw, mass)
        temperature_err = 2.0 * temperature * tau_k_err / tau_k
    elif mode == "gradient-on" and beta_bar is not None:
        temperature = temperature_from_tau_beta(tau_beta, beta_bar, mass)
        temperature_err = 4.0 * temperature * tau_beta_err / tau_beta

    return DecayFitResult(
        tau_k=float(tau_k),
        tau_k_stderr=float(tau_k_err),
        tau_beta=float(tau_beta),
        tau_beta_stderr=float(tau_beta_err),
        temperature=temperature,
        temperature_stderr=temperature_err,
        mode=mode,
        amplitude=a0,
        residual_rms=residual_rms,
    )


def save_calibration(path, calib: CalibParams) -> None:
    payload = {
        "z0_m": calib.z0,
        "zeta_rad_per_s2": calib.zeta,
        "sx": calib.axis_scale[0],
        "sy": calib.axis_scale[1],
        "sz": calib.axis_scale[2],
        "rotation_rad": calib.rotation_xy,
        "omega_L_bar_rad_per_s": calib.omega_L_bar,
        "eta_floor": calib.eta_floor,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_calibration(path) -> CalibParams:
    with open(path) as fh:
        payload = json.load(fh)
    try:
        return CalibParams(
            z0=float(payload["z0_m"]),
            zeta=float(payload["zeta_rad_per_s2"]),
            omega_L_bar=float(payload["omega_L_bar_rad_per_s"]),
            axis_scale=(
                float(payload["sx"]),
                float(payload["sy"]),
                float(payload["sz"]),
            ),
            rotation_xy=float(payload["rotation_rad"]),
            eta_floor=float(payload["eta_floor"]),
        )
    except KeyError as exc:
        raise ValidationError(f"calibration file missing key {exc}") from exc
