"""DSM indicator maps, multi-transmitter combination and peak read-out.

For a transmitter ``n'`` the indicator at a grid point ``r`` is::

    F(r, n') = |sum_n S(n, n') conj(E_inc(r, a_n))| / (||S(., n')|| ||E_inc(r, .)||)

with every sum and norm taken over the measured receivers ``n != n'``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateDataError, ValidationError
from .forward import ScatteringData, _index, fmt
from .scene import ImagingGrid, Medium, Scene

log = logging.getLogger(__name__)

COMBINED = "combined"
DEFAULT_THRESHOLD = 0.5
CHUNK = 4096


@dataclass(eq=False)
class IndicatorMap:
    grid: ImagingGrid
    values: np.ndarray
    transmitter: int | str
    freq: float

    def argmax_point(self) -> np.ndarray:
        return self.grid.points[int(np.argmax(self.values))]

    def value_at(self, point) -> float:
        """Value at the grid point nearest ``point``."""
        d = np.hypot(*(self.grid.points - np.asarray(point, dtype=float)).T)
        return float(self.values[int(np.argmin(d))])


def _norm(v: np.ndarray, axis=None) -> np.ndarray:
    """Euclidean norm that survives entries far below sqrt(tiny)."""
    scale = np.max(np.abs(v), axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    out = np.linalg.norm(v / safe, axis=axis, keepdims=True) * scale
    return out.squeeze() if axis is None else np.squeeze(out, axis=axis)


def _chunks(n: int, size: int = CHUNK):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def dsm_indicator(
    data: ScatteringData, source, grid: ImagingGrid, n_prime: int, workers: int = 1
) -> IndicatorMap:
    """Single-transmitter DSM map for transmitter ``n_prime`` (1-based)."""
    if source.n_antennas != data.n_antennas:
        raise ValidationError(
            f"incident field has {source.n_antennas} antennas, data has {data.n_antennas}"
        )
    rx, s = data.column(n_prime)
    if rx.size == 0:
        raise DegenerateDataError(f"no measured entries for transmitter {n_prime}")
    if not np.all(np.isfinite(s)):
        raise ValidationError(f"non-finite measured data for transmitter {n_prime}")
    s_norm = float(_norm(s))
    if s_norm == 0.0:
        raise DegenerateDataError(f"zero scattered-field norm for transmitter {n_prime}")

    def block(sl):
        e = source.matrix(grid.points[sl], rx)
        num = np.abs(e.conj() @ s)
        den = _norm(e, axis=1) * s_norm
        assert np.all(den > 0), "zero incident-field norm at a grid point"
        return num / den

    slices = _chunks(len(grid.points))
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(block, slices))
    else:
        parts = [block(sl) for sl in slices]
    return IndicatorMap(grid, np.concatenate(parts), int(n_prime), data.freq)


def parse_transmitters(spec: str, count: int) -> list[int]:
    """``"all"`` or a comma list of 1-based indices, e.g. ``"1,5,9,13"``."""
    spec = spec.strip()
    if spec.lower() == "all":
        return list(range(1, count + 1))
    try:
        items = [int(t) for t in spec.split(",") if t.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad transmitter list {spec!r}") from exc
    if not items:
        raise ValidationError("empty transmitter list")
    for t in items:
        _index(t, count)
    if len(set(items)) != len(items):
        raise ValidationError(f"duplicate transmitters in {spec!r}")
    return items


def mdsm_indicator(
    data: ScatteringData, source, grid: ImagingGrid, transmitters, maps=None
) -> IndicatorMap:
    """Pointwise maximum of the single-transmitter maps over ``transmitters``.

    ``maps`` may pass already-computed single maps keyed by transmitter.
    """
    transmitters = list(transmitters)
    if not transmitters:
        raise ValidationError("transmitter set must not be empty")
    maps = maps or {}
    combined = None
    for t in transmitters:
        m = maps.get(t) or dsm_indicator(data, source, grid, t)
        combined = m.values.copy() if combined is None else np.maximum(combined, m.values)
    return IndicatorMap(grid, combined, COMBINED, data.freq)


# ---------------------------------------------------------------------------
# Peaks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Peak:
    location: tuple[float, float]
    value: float
    rank: int


@dataclass
class PeakSet:
    peaks: list[Peak] = field(default_factory=list)
    warning: str | None = None

    def __len__(self):
        return len(self.peaks)

    def locations(self) -> np.ndarray:
        return np.array([p.location for p in self.peaks]).reshape(-1, 2)


def default_suppression_radius(medium: Medium) -> float:
    """Half the background wavelength."""
    return 0.5 * medium.wavelength


def _local_maxima(imap: IndicatorMap) -> np.ndarray:
    grid = imap.grid
    idx = grid.raster_index()
    padded = np.full((idx.shape[0] + 2, idx.shape[1] + 2), -np.inf)
    raster = np.full(idx.shape, -np.inf)
    raster[grid.rows, grid.cols] = imap.values
    padded[1:-1, 1:-1] = raster
    r, c = grid.rows + 1, grid.cols + 1
    is_max = np.ones(len(grid.points), dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr or dc:
                is_max &= imap.values >= padded[r + dr, c + dc]
    return np.flatnonzero(is_max)


def extract_peaks(
    imap: IndicatorMap, threshold: float = DEFAULT_THRESHOLD, radius: float | None = None
) -> PeakSet:
    """Local maxima (8-neighbourhood) kept by greedy non-maximum suppression.

    Candidates are visited by descending value, ties in row-major grid order;
    a candidate survives if it is at least ``threshold * max`` and no closer
    than ``radius`` to an already accepted peak.
    """
    if not 0 < threshold <= 1:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold!r}")
    if radius is None or not radius > 0:
        raise ValidationError(f"suppression radius must be positive, got {radius!r}")
    vals = imap.values
    if vals.size == 0 or np.ptp(vals) == 0:
        return PeakSet([], "constant map: no peaks")
    top = float(vals.max())
    cand = _local_maxima(imap)
    cand = cand[vals[cand] >= threshold * top]
    order = cand[np.lexsort((cand, -vals[cand]))]
    kept: list[int] = []
    pts = imap.grid.points
    for i in order:
        if all(math.hypot(*(pts[i] - pts[j])) >= radius for j in kept):
            kept.append(int(i))
    peaks = [
        Peak((float(pts[i, 0]), float(pts[i, 1])), float(vals[i]), rank)
        for rank, i in enumerate(kept, start=1)
    ]
    return PeakSet(peaks)


def localization_error(peaks: PeakSet, scene: Scene) -> list[float]:
    """Per-anomaly distance to its assigned peak (minimum total distance).

    Only the top-``M`` peaks take part.  Anomalies left without a peak get
    ``inf`` and a warning is logged.
    """
    centers = scene.centers()
    m = len(centers)
    if m == 0:
        raise ValidationError("scene has no anomalies")
    locs = peaks.locations()[:m]
    out = [math.inf] * m
    if len(locs):
        cost = np.hypot(
            centers[:, None, 0] - locs[None, :, 0], centers[:, None, 1] - locs[None, :, 1]
        )
        rows, cols = linear_sum_assignment(cost)
        for a, p in zip(rows, cols):
            out[a] = float(cost[a, p])
    missed = [i for i, d in enumerate(out) if math.isinf(d)]
    if missed:
        log.warning("%d anomaly(ies) without a peak: %s", len(missed), missed)
    return out


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def map_to_csv_text(imap: IndicatorMap) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x_m", "y_m", "value"])
    for (x, y), v in zip(imap.grid.points, imap.values):
        w.writerow([fmt(x), fmt(y), fmt(v)])
    return buf.getvalue()


def write_map_csv(imap: IndicatorMap, path) -> None:
    Path(path).write_text(map_to_csv_text(imap), encoding="utf-8")


def map_to_pgm_bytes(imap: IndicatorMap) -> bytes:
    """Binary 8-bit PGM; value 1 maps to 255, points outside the disk are 0."""
    h, w = imap.grid.shape
    raster = np.zeros((h, w), dtype=np.uint8)
    px = np.clip(np.rint(imap.values * 255.0), 0, 255).astype(np.uint8)
    raster[imap.grid.rows, imap.grid.cols] = px
    return f"P5\n{w} {h}\n255\n".encode("ascii") + raster.tobytes()


def write_map_pgm(imap: IndicatorMap, path) -> None:
    Path(path).write_bytes(map_to_pgm_bytes(imap))


def write_peaks_csv(peaks: PeakSet, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "x_m", "y_m", "value"])
    for p in peaks.peaks:
        w.writerow([p.rank, fmt(p.location[0]), fmt(p.location[1]), fmt(p.value)])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
