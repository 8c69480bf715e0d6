"""Physical configuration: background medium, antenna ring, anomalies and imaging grid.

Scenario files are TOML::

    [medium]
    eps_b = 78.0        # relative permittivity
    sigma_b = 0.2       # S/m
    freq = 925.0e6      # Hz, required
    mu = 1.2566e-06     # H/m, optional (defaults to 4e-7 pi)

    [array]
    N = 16
    R = 0.09
    layout = "ring"     # theta_n = 3pi/2 - 2pi(n-1)/N; or give `angles = [...]` (rad)

    [[anomalies]]
    x = -0.03
    y = -0.045
    rho = 0.0032
    eps = 20.0
    sigma = 0.05

    [grid]
    radius = 0.085
    spacing = 0.001328125   # optional, defaults to radius / 64
    center = [0.0, 0.0]     # optional

Unknown keys are rejected.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EPS0 = 8.8541878128e-12
MU0 = 4.0e-7 * math.pi

DEFAULT_FREQ = 925.0e6
GRID_DIVISIONS = 64


# ---------------------------------------------------------------------------
# Medium
# ---------------------------------------------------------------------------


def wavenumber(eps_b: float, sigma_b: float, freq: float, mu: float = MU0) -> complex:
    """Complex wavenumber ``k`` with ``k**2 = omega**2 mu (eps_b eps0 + i sigma_b / omega)``.

    Principal branch: ``Re(k) > 0`` and ``Im(k) >= 0``.
    """
    _check_medium(eps_b, sigma_b, freq, mu)
    omega = 2.0 * math.pi * freq
    k2 = omega**2 * mu * complex(eps_b * EPS0, sigma_b / omega)
    return complex(np.sqrt(k2))


def _check_medium(eps_b, sigma_b, freq, mu):
    for name, value in (("eps_b", eps_b), ("sigma_b", sigma_b), ("freq", freq), ("mu", mu)):
        if not math.isfinite(value):
            raise ValidationError(f"medium.{name} must be finite, got {value!r}")
    if eps_b <= 0:
        raise ValidationError(f"medium.eps_b must be positive, got {eps_b!r}")
    if sigma_b < 0:
        raise ValidationError(f"medium.sigma_b must be non-negative, got {sigma_b!r}")
    if freq <= 0:
        raise ValidationError(f"medium.freq must be positive, got {freq!r}")
    if mu <= 0:
        raise ValidationError(f"medium.mu must be positive, got {mu!r}")


@dataclass(frozen=True)
class Medium:
    eps_b: float
    sigma_b: float
    freq: float
    mu: float = MU0

    def __post_init__(self):
        _check_medium(self.eps_b, self.sigma_b, self.freq, self.mu)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.freq

    @property
    def k(self) -> complex:
        return wavenumber(self.eps_b, self.sigma_b, self.freq, self.mu)

    @property
    def wavelength(self) -> float:
        """Background wavelength ``2 pi / Re(k)`` in metres."""
        return 2.0 * math.pi / self.k.real

    @property
    def loss_tangent(self) -> float:
        return self.sigma_b / (self.omega * self.eps_b * EPS0)


# ---------------------------------------------------------------------------
# Antennas and anomalies
# ---------------------------------------------------------------------------


def ring_angles(count: int) -> tuple[float, ...]:
    """Antenna angles ``3 pi / 2 - 2 pi (n - 1) / N`` for ``n = 1..N``."""
    return tuple(1.5 * math.pi - 2.0 * math.pi * n / count for n in range(count))


@dataclass(frozen=True)
class AntennaArray:
    """``N`` antennas on a circle of radius ``R`` centred at the origin."""

    radius: float
    angles: tuple[float, ...]
    layout: str = "explicit"

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if len(self.angles) < 3:
            raise ValidationError(f"array.N must be at least 3, got {len(self.angles)}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValidationError(f"array.R must be positive, got {self.radius!r}")
        if self.layout not in ("ring", "explicit"):
            raise ValidationError(f"array.layout must be 'ring' or explicit angles, got {self.layout!r}")

    @classmethod
    def ring(cls, count: int = 16, radius: float = 0.09) -> "AntennaArray":
        if count < 3:
            raise ValidationError(f"array.N must be at least 3, got {count}")
        return cls(radius, ring_angles(count), "ring")

    @property
    def count(self) -> int:
        return len(self.angles)

    @property
    def directions(self) -> np.ndarray:
        th = np.asarray(self.angles)
        return np.column_stack([np.cos(th), np.sin(th)])

    @property
    def positions(self) -> np.ndarray:
        """``(N, 2)`` antenna coordinates in metres."""
        return self.radius * self.directions

    def scaled(self, factor: float) -> "AntennaArray":
        return replace(self, radius=self.radius * factor)


@dataclass(frozen=True)
class Anomaly:
    x: float
    y: float
    rho: float
    eps: float
    sigma: float

    def __post_init__(self):
        for name in ("x", "y", "rho", "eps", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"anomaly.{name} must be finite")
        if self.rho <= 0:
            raise ValidationError(f"anomaly.rho must be positive, got {self.rho!r}")

    @property
    def center(self) -> np.ndarray:
        return np.array([self.x, self.y])


def contrast(anomaly: Anomaly, medium: Medium) -> complex:
    """Contrast ``(eps_m - eps_b)/eps_b + i (sigma_m - sigma_b)/(omega sigma_b)``."""
    if medium.sigma_b == 0:
        raise ValidationError("contrast is undefined for sigma_b = 0 (divides by the background conductivity)")
    return complex(
        (anomaly.eps - medium.eps_b) / medium.eps_b,
        (anomaly.sigma - medium.sigma_b) / (medium.omega * medium.sigma_b),
    )


# ---------------------------------------------------------------------------
# Imaging grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ImagingGrid:
    """Square lattice clipped to a disk.

    Points are ordered row-major from the top row (largest ``y``) down, with
    ``x`` increasing along a row.  ``rows``/``cols`` index each point into a
    ``shape`` raster.
    """

    center: tuple[float, float]
    radius: float
    spacing: float
    points: np.ndarray = field(repr=False)
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    shape: tuple[int, int]

    def __len__(self):
        return len(self.points)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def raster_index(self) -> np.ndarray:
        """``shape`` raster of point indices, ``-1`` outside the disk."""
        idx = np.full(self.shape, -1, dtype=np.int64)
        idx[self.rows, self.cols] = np.arange(len(self.points))
        return idx


def build_grid(radius: float, spacing: float | None = None, center=(0.0, 0.0)) -> ImagingGrid:
    if not (math.isfinite(radius) and radius > 0):
        raise ValidationError(f"grid.radius must be positive, got {radius!r}")
    if spacing is None:
        spacing = radius / GRID_DIVISIONS
    if not (math.isfinite(spacing) and spacing > 0):
        raise ValidationError(f"grid.spacing must be positive, got {spacing!r}")
    if spacing > radius:
        raise ValidationError(f"grid.spacing {spacing!r} exceeds grid.radius {radius!r}")
    cx, cy = (float(c) for c in center)
    half = int(math.floor(radius / spacing)) + 1
    offsets = np.arange(-half, half + 1)
    jj, ii = np.meshgrid(offsets[::-1], offsets, indexing="ij")
    dx = ii * spacing
    dy = jj * spacing
    inside = np.hypot(dx, dy) <= radius
    rows, cols = np.nonzero(inside)
    points = np.column_stack([cx + dx[inside], cy + dy[inside]])
    return ImagingGrid((cx, cy), float(radius), float(spacing), points, rows, cols, inside.shape)


# ---------------------------------------------------------------------------
# Scene
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Scene:
    medium: Medium
    array: AntennaArray
    anomalies: tuple[Anomaly, ...]
    grid: ImagingGrid

    def __post_init__(self):
        object.__setattr__(self, "anomalies", tuple(self.anomalies))
        c = np.asarray(self.grid.center)
        if np.hypot(*c) + self.grid.radius >= self.array.radius:
            raise ValidationError("imaging region must lie strictly inside the antenna circle")
        pos = self.array.positions
        for i, a in enumerate(self.anomalies):
            where = f"anomalies[{i}]"
            if np.hypot(*(a.center - c)) + a.rho >= self.grid.radius:
                raise ValidationError(f"{where} is not strictly inside the imaging region")
            if np.any(np.hypot(*(pos - a.center).T) <= a.rho):
                raise ValidationError(f"{where} overlaps an antenna position")
            if contrast(a, self.medium) == 0:
                raise ValidationError(f"{where} has zero contrast and is invisible")

    @property
    def k(self) -> complex:
        return self.medium.k

    def centers(self) -> np.ndarray:
        return np.array([a.center for a in self.anomalies]).reshape(-1, 2)

    def contrasts(self) -> np.ndarray:
        return np.array([contrast(a, self.medium) for a in self.anomalies], dtype=complex)

    def with_anomalies(self, anomalies) -> "Scene":
        return replace(self, anomalies=tuple(anomalies))


def scale_array(scene: Scene, factor: float) -> Scene:
    """Scene with the antenna radius multiplied by ``factor``; medium, anomalies and grid unchanged."""
    if not factor >= 1:
        raise ValidationError("array scale factor must be >= 1 to keep the imaging region inside the ring")
    return replace(scene, array=scene.array.scaled(factor))


# Anomaly placement and material values are our choice: the measured targets
# are not specified beyond their 6.4 mm diameter.
DEFAULT_ANOMALIES = (
    Anomaly(-0.03, -0.045, 0.0032, 20.0, 0.05),
    Anomaly(0.035, 0.03, 0.0032, 20.0, 0.05),
)


def default_scene(anomalies=DEFAULT_ANOMALIES, freq: float = DEFAULT_FREQ) -> Scene:
    """16 antennas on R = 0.09 m in water (eps 78, sigma 0.2 S/m), Omega radius 0.085 m."""
    return Scene(
        Medium(78.0, 0.2, freq),
        AntennaArray.ring(16, 0.09),
        tuple(anomalies),
        build_grid(0.085),
    )


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

_SCHEMA = {
    "medium": ({"eps_b", "sigma_b", "freq"}, {"mu"}),
    "array": ({"N", "R"}, {"layout", "angles"}),
    "grid": ({"radius"}, {"spacing", "center"}),
}
_ANOMALY_KEYS = {"x", "y", "rho", "eps", "sigma"}


def _number(table, key, where):
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _check_keys(table, required, optional, where):
    if not isinstance(table, dict):
        raise ValidationError(f"{where}: expected a table")
    unknown = set(table) - required - optional
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(table)
    if missing:
        raise ValidationError(f"{where}: missing key(s) {sorted(missing)}")


def scene_from_dict(doc: dict) -> Scene:
    unknown = set(doc) - set(_SCHEMA) - {"anomalies"}
    if unknown:
        raise ValidationError(f"unknown top-level key(s) {sorted(unknown)}")
    for name, (req, opt) in _SCHEMA.items():
        if name not in doc:
            raise ValidationError(f"missing table [{name}]")
        _check_keys(doc[name], req, opt, name)

    m = doc["medium"]
    medium = Medium(
        _number(m, "eps_b", "medium"),
        _number(m, "sigma_b", "medium"),
        _number(m, "freq", "medium"),
        _number(m, "mu", "medium") if "mu" in m else MU0,
    )

    a = doc["array"]
    count = a["N"]
    if isinstance(count, bool) or not isinstance(count, int):
        raise ValidationError(f"array.N: expected an integer, got {count!r}")
    radius = _number(a, "R", "array")
    if "angles" in a:
        if "layout" in a and a["layout"] != "explicit":
            raise ValidationError("array: give either layout = 'ring' or angles, not both")
        angles = a["angles"]
        if not isinstance(angles, list) or len(angles) != count:
            raise ValidationError(f"array.angles: expected a list of N = {count} numbers")
        array = AntennaArray(radius, tuple(_number({"v": v}, "v", "array.angles") for v in angles))
    else:
        layout = a.get("layout", "ring")
        if layout != "ring":
            raise ValidationError(f"array.layout: expected 'ring' (or give angles), got {layout!r}")
        array = AntennaArray.ring(count, radius)

    anomalies = []
    raw = doc.get("anomalies", [])
    if not isinstance(raw, list):
        raise ValidationError("anomalies: expected an array of tables")
    for i, t in enumerate(raw):
        where = f"anomalies[{i}]"
        _check_keys(t, _ANOMALY_KEYS, set(), where)
        anomalies.append(Anomaly(*(_number(t, key, where) for key in ("x", "y", "rho", "eps", "sigma"))))

    g = doc["grid"]
    center = g.get("center", [0.0, 0.0])
    if not isinstance(center, list) or len(center) != 2:
        raise ValidationError("grid.center: expected [x, y]")
    grid = build_grid(
        _number(g, "radius", "grid"),
        _number(g, "spacing", "grid") if "spacing" in g else None,
        tuple(_number({"v": v}, "v", "grid.center") for v in center),
    )
    return Scene(medium, array, tuple(anomalies), grid)


def parse_scenario(text: str) -> Scene:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"scenario is not valid TOML: {exc}") from exc
    return scene_from_dict(doc)


def load_scenario(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc}") from exc
    try:
        return parse_scenario(text)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def dump_scenario(scene: Scene) -> str:
    """TOML text that :func:`parse_scenario` turns back into an identical scene."""
    m, a, g = scene.medium, scene.array, scene.grid
    lines = [
        "[medium]",
        f"eps_b = {m.eps_b!r}",
        f"sigma_b = {m.sigma_b!r}",
        f"freq = {m.freq!r}",
        f"mu = {m.mu!r}",
        "",
        "[array]",
        f"N = {a.count}",
        f"R = {a.radius!r}",
    ]
    if a.layout == "ring":
        lines.append('layout = "ring"')
    else:
        lines.append("angles = [" + ", ".join(repr(t) for t in a.angles) + "]")
    for an in scene.anomalies:
        lines += [
            "",
            "[[anomalies]]",
            f"x = {an.x!r}",
            f"y = {an.y!r}",
            f"rho = {an.rho!r}",
            f"eps = {an.eps!r}",
            f"sigma = {an.sigma!r}",
        ]
    lines += [
        "",
        "[grid]",
        f"radius = {g.radius!r}",
        f"spacing = {g.spacing!r}",
        f"center = [{g.center[0]!r}, {g.center[1]!r}]",
        "",
    ]
    return "\n".join(lines)
