"""Line-of-sight Lambertian VLC channel and the circular Tx/Rx layout.

Transmitters hang at height ``L`` above a horizontal receiver plane.  With
four or fewer antennas they sit on a ring of radius ``l'`` at angles 0, 90,
180, 270 degrees; from five antennas on, ``n - 1`` sit on the ring and the
last one at the centre.  Receivers use the same pattern with radius ``l``
around a reference point drawn as ``r ~ U[0, r_e]``, ``theta ~ U[0, 2 pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameter

__all__ = [
    "OpticalParams",
    "Geometry",
    "ChannelRealization",
    "ChannelModel",
    "lambertian_order",
    "concentrator_gain",
    "gain_radial",
    "gain_los",
    "antenna_layout",
    "sample_rx_reference",
    "channel_from_reference",
    "build_channel",
    "preset",
    "PRESETS",
    "REFERENCE_GAIN",
]


def lambertian_order(phi_half: float) -> float:
    """``m = -1 / log2(cos(phi_half))``."""
    if not 0 < phi_half < math.pi / 2:
        raise InvalidParameter(f"semi-angle must lie in (0, pi/2), got {phi_half}")
    return -1.0 / math.log2(math.cos(phi_half))


@dataclass(frozen=True)
class OpticalParams:
    phi_half: float = math.radians(60)
    area: float = 1e-4
    responsivity: float = 0.4
    filter_gain: float = 1.0
    refractive_index: float = 1.5
    psi_fov: float = math.radians(60)

    def __post_init__(self):
        for name in ("phi_half", "area", "responsivity", "filter_gain", "refractive_index", "psi_fov"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be positive")
        if self.phi_half >= math.pi / 2:
            raise InvalidParameter("phi_half must be below pi/2")
        if self.psi_fov > math.pi / 2:
            raise InvalidParameter("psi_fov must not exceed pi/2")

    @property
    def order(self) -> float:
        return lambertian_order(self.phi_half)


@dataclass(frozen=True)
class Geometry:
    height: float = 2.15
    cell_radius: float = 3.55
    tx_ring_radius: float = 1.0
    rx_offset: float = 0.05
    n_t: int = 4
    n_r: int = 4

    def __post_init__(self):
        if not self.height > 0 or not self.cell_radius > 0:
            raise InvalidParameter("height and cell radius must be positive")
        if self.tx_ring_radius < 0 or self.rx_offset < 0:
            raise InvalidParameter("ring radii must be nonnegative")
        if self.n_t < 1 or self.n_r < 1:
            raise InvalidParameter("antenna counts must be >= 1")


def concentrator_gain(psi, params: OpticalParams):
    """``eta^2 / sin(psi_fov)`` inside the field of view (boundary included), else 0."""
    psi = np.asarray(psi, dtype=float)
    inside = (psi >= 0) & (psi <= params.psi_fov)
    g = np.where(inside, params.refractive_index**2 / math.sin(params.psi_fov), 0.0)
    return g if g.ndim else float(g)


def gain_radial(r, geom: Geometry, params: OpticalParams, fov_cutoff: bool = True):
    """DC gain of a horizontal receiver at horizontal distance ``r`` from an LED.

    ``C (m+1) L^(m+1) / (r^2 + L^2)^((m+3)/2)`` with
    ``C = A R_p T g / (2 pi)``.  With ``fov_cutoff`` the gain is 0 once the
    incidence angle ``atan(r / L)`` leaves the field of view.
    """
    r = np.asarray(r, dtype=float)
    m = params.order
    L = geom.height
    g = params.refractive_index**2 / math.sin(params.psi_fov)
    c = params.area * params.responsivity * params.filter_gain * g / (2 * math.pi)
    h = c * (m + 1) * L ** (m + 1) / (r**2 + L**2) ** ((m + 3) / 2)
    if fov_cutoff:
        h = np.where(np.arctan2(r, L) <= params.psi_fov, h, 0.0)
    return h if np.ndim(h) else float(h)


def gain_los(d, phi, psi, params: OpticalParams, fov_cutoff: bool = True):
    """General LOS gain from distance, irradiance angle and incidence angle."""
    d = np.asarray(d, dtype=float)
    m = params.order
    g = concentrator_gain(psi, params) if fov_cutoff else params.refractive_index**2 / math.sin(params.psi_fov)
    h = (
        (m + 1) * params.area * params.responsivity / (2 * math.pi * d**2)
        * np.cos(phi) ** m * params.filter_gain * g * np.cos(psi)
    )
    return h if np.ndim(h) else float(h)


def antenna_layout(n: int, radius: float) -> np.ndarray:
    """Planar offsets ``(n, 2)`` of ``n`` antennas around their reference point."""
    if n < 1:
        raise InvalidParameter("need at least one antenna")
    ring = 4 if n <= 4 else n - 1
    angles = 2 * math.pi * np.arange(ring) / ring
    pts = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # exact zeros on the axes keep symmetric layouts exactly symmetric
    pts[np.abs(pts) < 1e-12 * max(radius, 1.0)] = 0.0
    if n <= 4:
        return pts[:n]
    return np.vstack([pts, np.zeros((1, 2))])


@dataclass(frozen=True)
class ChannelRealization:
    gains: np.ndarray
    rx_reference: tuple[float, float]

    @property
    def n_r(self) -> int:
        return self.gains.shape[0]

    @property
    def n_t(self) -> int:
        return self.gains.shape[1]


def sample_rx_reference(rng: np.random.Generator, geom: Geometry) -> tuple[float, float]:
    """Receiver reference point: ``r`` uniform in ``[0, r_e]`` (not area-uniform)."""
    r = rng.uniform(0.0, geom.cell_radius)
    theta = rng.uniform(0.0, 2 * math.pi)
    return float(r), float(theta)


def channel_from_reference(geom: Geometry, params: OpticalParams, r, theta, fov_cutoff: bool = True):
    """Gain matrices ``(..., n_r, n_t)`` for receiver reference points at polar ``(r, theta)``."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ref = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    rx = ref[..., None, :] + antenna_layout(geom.n_r, geom.rx_offset)
    tx = antenna_layout(geom.n_t, geom.tx_ring_radius)
    dist = np.linalg.norm(rx[..., :, None, :] - tx, axis=-1)
    return np.asarray(gain_radial(dist, geom, params, fov_cutoff))


def build_channel(rng: np.random.Generator, geom: Geometry, params: OpticalParams,
                  fov_cutoff: bool = True) -> ChannelRealization:
    r, theta = sample_rx_reference(rng, geom)
    return ChannelRealization(channel_from_reference(geom, params, r, theta, fov_cutoff), (r, theta))


PRESETS = {
    "paper-default": (Geometry(), OpticalParams()),
}

# on-axis gain of the default LED/PD pair; used as the unit of channel gain
REFERENCE_GAIN = gain_radial(0.0, *PRESETS["paper-default"])


@dataclass(frozen=True)
class ChannelModel:
    """Random channel generator used by the simulator and the bounds.

    Gains are reported in units of ``gain_unit`` (the on-axis gain of the
    default preset), so that ``E_s`` of order one yields received amplitudes
    of order one.  Set ``gain_unit=1.0`` for raw A/W-style gains.
    """

    geometry: Geometry = field(default_factory=Geometry)
    optics: OpticalParams = field(default_factory=OpticalParams)
    fov_cutoff: bool = True
    gain_unit: float = REFERENCE_GAIN

    def __post_init__(self):
        if not self.gain_unit > 0:
            raise InvalidParameter("gain_unit must be positive")

    @property
    def n_t(self) -> int:
        return self.geometry.n_t

    @property
    def n_r(self) -> int:
        return self.geometry.n_r

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` independent receiver placements; returns ``(count, n_r, n_t)``."""
        r = rng.uniform(0.0, self.geometry.cell_radius, size=count)
        theta = rng.uniform(0.0, 2 * math.pi, size=count)
        h = channel_from_reference(self.geometry, self.optics, r, theta, self.fov_cutoff)
        return h / self.gain_unit

    def with_antennas(self, n_t: int, n_r: int) -> "ChannelModel":
        return replace(self, geometry=replace(self.geometry, n_t=n_t, n_r=n_r))


def preset(name: str = "paper-default", n_t: int = 4, n_r: int = 4, semi_angle_deg: float | None = None,
           fov_cutoff: bool = True, raw_gains: bool = False) -> ChannelModel:
    """Build a :class:`ChannelModel` from a named parameter set."""
    try:
        geom, optics = PRESETS[name]
    except KeyError:
        raise InvalidParameter(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    if semi_angle_deg is not None:
        optics = replace(optics, phi_half=math.radians(semi_angle_deg))
    return ChannelModel(
        geometry=replace(geom, n_t=n_t, n_r=n_r),
        optics=optics,
        fov_cutoff=fov_cutoff,
        gain_unit=1.0 if raw_gains else REFERENCE_GAIN,
    )
