"""Segmented-calorimeter material map.

The detector is an annulus of azimuthally and radially segmented material
starting at radius ``theta_r`` (the design parameter) and fading out
``r_max`` further. The interaction probability at a point is half the
product of four sigmoid factors: an inner turn-on, two segmentation
combs, and an outer turn-off. Only the inner and outer factors depend on
``theta_r``, so the tangent flows exclusively through them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dual import Dual, DomainError, dsigmoid

__all__ = [
    "PROB_FLOOR",
    "PROB_CEILING",
    "DetectorParams",
    "material_map",
    "clamp_probability",
    "interaction_probability",
]

PROB_FLOOR = 1e-9
PROB_CEILING = 1.0 - 1e-9

# Outside theta_r - pad .. theta_r + r_max + pad the map is provably below
# PROB_FLOOR (each sigmoid factor is < 1, the binding one < sigmoid(-24)),
# so the clamped probability there is the floor with zero tangent.
_PAD_SHARPNESS = 24.0


@dataclass(slots=True)
class DetectorParams:
    theta_r: Dual
    sharpness: float = 6.0
    seg_freq: float = 6.0
    r_max: float = 1.5

    def __post_init__(self):
        if self.theta_r.value <= 0.0:
            raise ValueError(f"theta_r must be positive, got {self.theta_r.value}")
        if self.sharpness <= 0.0 or self.seg_freq <= 0.0 or self.r_max <= 0.0:
            raise ValueError("sharpness, seg_freq and r_max must be positive")

    @property
    def pad(self) -> float:
        return _PAD_SHARPNESS / self.sharpness

    @property
    def outer_radius(self) -> float:
        return self.theta_r.value + self.r_max


def material_map(pos: tuple[float, float], params: DetectorParams) -> Dual:
    """Interaction probability (in (0, 1/2)) at ``pos``, dual in theta_r."""
    x0, x1 = pos
    r2 = x0 * x0 + x1 * x1
    if r2 == 0.0:
        raise DomainError("material_map", "undefined at the origin")
    r = math.sqrt(r2)
    phi = math.atan2(x0, x1)
    beta = params.sharpness
    # Segmentation combs carry no theta_r dependence.
    m_phi = _sigmoid(-beta * math.sin(params.seg_freq * (phi + 2.0 * r)))
    m_r = _sigmoid(-beta * math.cos(params.seg_freq * (r - 2.0)))
    m_start = dsigmoid((Dual(r) - params.theta_r) * beta)
    m_end = dsigmoid((params.theta_r - Dual(r - params.r_max)) * beta)
    return m_start * m_end * (0.5 * m_phi * m_r)


def _sigmoid(v: float) -> float:
    if v >= 0.0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


def clamp_probability(p: Dual, floor: float = PROB_FLOOR, ceiling: float = PROB_CEILING) -> Dual:
    """Clamp into [floor, ceiling]; a clamped value is flat, so tangent 0."""
    if p.value < floor:
        return Dual(floor, 0.0)
    if p.value > ceiling:
        return Dual(ceiling, 0.0)
    return p


def interaction_probability(pos: tuple[float, float], params: DetectorParams) -> Dual:
    """Clamped material map with a short-circuit far from the annulus."""
    r = math.hypot(pos[0], pos[1])
    theta = params.theta_r.value
    pad = params.pad
    if r < theta - pad or r > theta + params.r_max + pad:
        if r == 0.0:
            raise DomainError("material_map", "undefined at the origin")
        return Dual(PROB_FLOOR, 0.0)
    return clamp_probability(material_map(pos, params))
