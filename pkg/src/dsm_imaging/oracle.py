"""Bessel-series structure of the DSM indicator and its comparison with the direct map.

Far from the antennas, the single-transmitter indicator behaves like
``|Phi(r)| / max |Phi|`` with::

    Phi(r) = sum_m rho_m^3 chi_m H0(k |r_m - a_n'|) * (J0(x_m)
             + 1/(N-1) sum_{n != n'} sum_{0<|s|<=S} i^s J_s(x_m) e^{i s (theta_n - phi_m)})

where ``x_m = k |r - r_m|`` and ``phi_m`` is the polar angle of ``r - r_m``.
The Bessel argument uses ``Re(k)``; ``H0`` keeps the complex ``k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateDataError, ValidationError
from .forward import AnalyticField, ScatteringData, _index, born_synthesize
from .imaging import CHUNK, IndicatorMap, dsm_indicator
from .scene import ImagingGrid, Scene
from .specfun import I_POWERS, SeriesBudget, bessel_j_table, hankel1_0

# "k |r - a_n| >> 0.25" is read as at least ten times the threshold.
REGIME_THRESHOLD = 0.25
REGIME_FACTOR = 10.0


def required_order(scene: Scene) -> int:
    """``ceil(Re(k) * grid diameter)``: the largest Bessel argument on the grid."""
    return int(math.ceil(scene.k.real * scene.grid.diameter))


@dataclass(frozen=True, eq=False)
class TheoremParams:
    scene: Scene
    n_prime: int
    budget: SeriesBudget = field(default=None)

    def __post_init__(self):
        _index(self.n_prime, self.scene.array.count)
        need = required_order(self.scene)
        if self.budget is None:
            object.__setattr__(self, "budget", SeriesBudget(need + 30))
        elif self.budget.s_max < need:
            raise ValidationError(
                f"s_max = {self.budget.s_max} does not cover Bessel arguments up to {need}"
            )


def angular_sums(angles, orders, exclude: int | None = None) -> np.ndarray:
    """``sum_n e^{i s theta_n}`` for each ``s`` in ``orders``, optionally skipping antenna ``exclude`` (1-based)."""
    th = np.asarray(angles, dtype=float)
    if exclude is not None:
        th = np.delete(th, _index(exclude, th.size))
    s = np.asarray(orders, dtype=float)
    return np.exp(1j * np.outer(s, th)).sum(axis=1)


def phi_values(points, params: TheoremParams) -> np.ndarray:
    """Truncated ``Phi`` at each of ``points`` (shape ``(G, 2)``)."""
    scene = params.scene
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.zeros(len(pts), dtype=complex)
    if not scene.anomalies:
        return out
    k = scene.k
    count = scene.array.count
    s_max = params.budget.s_max
    orders = np.arange(1, s_max + 1)
    csum = angular_sums(scene.array.angles, orders, exclude=params.n_prime)
    tx = scene.array.positions[params.n_prime - 1]
    centers = scene.centers()
    weights = (
        np.array([a.rho**3 for a in scene.anomalies])
        * scene.contrasts()
        * hankel1_0(k * np.hypot(*(centers - tx).T))
    )
    ipow = I_POWERS[orders % 4]
    for sl in (slice(i, i + CHUNK) for i in range(0, len(pts), CHUNK)):
        chunk = pts[sl]
        for w, c in zip(weights, centers):
            d = chunk - c
            x = k.real * np.hypot(d[:, 0], d[:, 1])
            phi = np.arctan2(d[:, 1], d[:, 0])
            js = bessel_j_table(s_max, x)
            sphi = np.outer(orders, phi)
            # s and -s pair up into 2 Re(C_s e^{-i s phi})
            ang = 2.0 * (csum.real[:, None] * np.cos(sphi) + csum.imag[:, None] * np.sin(sphi))
            corr = (ipow[:, None] * js[1:] * ang).sum(axis=0)
            out[sl] += w * (js[0] + corr / (count - 1))
    return out


def phi_structure(r, params: TheoremParams) -> complex:
    """``Phi(r)`` at a single point."""
    return complex(phi_values(np.asarray(r, dtype=float)[None, :], params)[0])


def theorem_map(grid: ImagingGrid, params: TheoremParams) -> IndicatorMap:
    """``|Phi| / max |Phi|`` over ``grid``."""
    if len(grid.points) == 0:
        raise ValidationError("empty grid")
    mag = np.abs(phi_values(grid.points, params))
    top = float(mag.max())
    if top == 0:
        raise DegenerateDataError("Phi vanishes on the whole grid (no anomalies?)")
    return IndicatorMap(grid, mag / top, params.n_prime, params.scene.medium.freq)


@dataclass(frozen=True)
class DiscrepancyReport:
    l_inf: float
    l2: float
    min_kr: float
    s_max_used: int
    regime_ok: bool
    loss_tangent: float
    n_prime: int
    array_radius: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def map_discrepancy(a: IndicatorMap, b: IndicatorMap) -> tuple[float, float]:
    """L-infinity and root-mean-square difference on a shared grid."""
    if a.grid is not b.grid and not np.array_equal(a.grid.points, b.grid.points):
        raise ValidationError("maps must share the same grid")
    diff = np.abs(a.values - b.values)
    return float(diff.max()), float(np.sqrt(np.mean(diff**2)))


def min_kr(scene: Scene) -> float:
    """``min |k| |r - a_n|`` over grid points and antennas."""
    pts, pos = scene.grid.points, scene.array.positions
    d = np.hypot(pts[:, None, 0] - pos[None, :, 0], pts[:, None, 1] - pos[None, :, 1])
    return float(abs(scene.k) * d.min())


def verify_theorem(
    scene: Scene,
    n_prime: int,
    budget: SeriesBudget | None = None,
    data: ScatteringData | None = None,
    source=None,
    self_check: bool = False,
) -> DiscrepancyReport:
    """Compare the direct DSM map with ``theorem_map`` on the scene's grid.

    ``data`` defaults to noise-free Born data for ``scene``.  With
    ``self_check`` the direct map is compared with itself.
    """
    params = TheoremParams(scene, n_prime, budget)
    if data is None:
        data = born_synthesize(scene)
    if source is None:
        source = AnalyticField.for_scene(scene)
    direct = dsm_indicator(data, source, scene.grid, n_prime)
    other = direct if self_check else theorem_map(scene.grid, params)
    l_inf, l2 = map_discrepancy(direct, other)
    kr = min_kr(scene)
    return DiscrepancyReport(
        l_inf=l_inf,
        l2=l2,
        min_kr=kr,
        s_max_used=params.budget.s_max,
        regime_ok=bool(kr >= REGIME_FACTOR * REGIME_THRESHOLD),
        loss_tangent=scene.medium.loss_tangent,
        n_prime=int(n_prime),
        array_radius=scene.array.radius,
    )
