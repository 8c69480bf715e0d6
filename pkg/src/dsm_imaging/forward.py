"""Incident fields and Born-approximated scattering parameters.

Antenna indices are 1-based in every public signature (``n = 1..N``).
``ScatteringData.values[n - 1, n' - 1]`` holds ``S_scat(n, n')`` for
receiver ``a_n`` and transmitter ``a_n'``; unmeasured entries (always the
diagonal) are NaN and flagged ``False`` in ``mask``.

File formats
------------
S-parameter CSV: header ``freq_hz,tx,rx,re,im``, one row per measured pair,
sorted by ``tx`` then ``rx``.  Missing rows are unmeasured.

Tabulated incident field CSV: header ``antenna,x_m,y_m,re,im``; for each
antenna a full rectangular lattice, rows ordered by descending ``y`` and
ascending ``x`` within a row.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CoverageError, SingularityError, ValidationError
from .scene import AntennaArray, Medium, Scene
from .specfun import hankel1_0

SPARAM_HEADER = ["freq_hz", "tx", "rx", "re", "im"]
FIELD_HEADER = ["antenna", "x_m", "y_m", "re", "im"]


def fmt(value: float) -> str:
    """Shortest round-tripping float text; deterministic across runs."""
    return repr(float(value))


# ---------------------------------------------------------------------------
# Scattering data
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ScatteringData:
    freq: float
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.mask = np.asarray(self.mask, dtype=bool)
        n = self.values.shape[0]
        if self.values.shape != (n, n) or self.mask.shape != (n, n):
            raise ValidationError("scattering data must be square N x N with a matching mask")
        if np.any(np.diag(self.mask)):
            raise ValidationError("diagonal S(n, n) cannot be measured; mask it out")
        self.values = np.where(self.mask, self.values, np.nan + 1j * np.nan)

    @property
    def n_antennas(self) -> int:
        return self.values.shape[0]

    def receivers(self, tx: int) -> np.ndarray:
        """0-based receiver indices with a measured entry for transmitter ``tx`` (1-based)."""
        col = _index(tx, self.n_antennas)
        return np.flatnonzero(self.mask[:, col])

    def column(self, tx: int) -> tuple[np.ndarray, np.ndarray]:
        """Measured receivers (0-based) and their values for transmitter ``tx``."""
        rx = self.receivers(tx)
        return rx, self.values[rx, tx - 1]

    def scaled(self, c: complex) -> "ScatteringData":
        return ScatteringData(self.freq, self.values * c, self.mask.copy())

    def measured_equal(self, other: "ScatteringData") -> bool:
        return (
            self.freq == other.freq
            and np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values[self.mask], other.values[other.mask])
        )


def full_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


def _index(n: int, count: int) -> int:
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= count:
        raise ValidationError(f"antenna index must be in 1..{count}, got {n!r}")
    return int(n) - 1


# ---------------------------------------------------------------------------
# Incident fields
# ---------------------------------------------------------------------------


class AnalyticField:
    """2D line-source field ``E_inc(r, a_n) = -(i/4) H0^(1)(k |r - a_n|)``."""

    def __init__(self, k: complex, positions):
        self.k = complex(k)
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 2)

    @classmethod
    def for_scene(cls, scene: Scene) -> "AnalyticField":
        return cls(scene.k, scene.array.positions)

    @classmethod
    def for_array(cls, medium: Medium, array: AntennaArray) -> "AnalyticField":
        return cls(medium.k, array.positions)

    @property
    def n_antennas(self) -> int:
        return len(self.positions)

    def matrix(self, points, antennas=None) -> np.ndarray:
        """``(G, A)`` field values at ``points`` for 0-based ``antennas`` (all by default)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        pos = self.positions if antennas is None else self.positions[np.asarray(antennas)]
        dist = np.hypot(pts[:, None, 0] - pos[None, :, 0], pts[:, None, 1] - pos[None, :, 1])
        if np.any(dist == 0):
            raise SingularityError("incident field evaluated at its own antenna position")
        return -0.25j * hankel1_0(self.k * dist)


class TabulatedField:
    """Incident fields sampled on a rectangular lattice, one complex raster per antenna.

    ``values`` has shape ``(N, ny, nx)`` with ``ys`` descending and ``xs``
    ascending.  Evaluation is bilinear; points outside the lattice raise
    :class:`CoverageError`.
    """

    def __init__(self, xs, ys, values):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.values = np.asarray(values, dtype=complex)
        if self.xs.size < 2 or self.ys.size < 2:
            raise ValidationError("tabulated field needs at least 2 x 2 samples")
        if np.any(np.diff(self.xs) <= 0) or np.any(np.diff(self.ys) >= 0):
            raise ValidationError("tabulated field: x must ascend and y must descend")
        if self.values.ndim != 3 or self.values.shape[1:] != (self.ys.size, self.xs.size):
            raise ValidationError("tabulated field values must have shape (N, ny, nx)")

    @property
    def n_antennas(self) -> int:
        return self.values.shape[0]

    @classmethod
    def sample(cls, source, xs, ys) -> "TabulatedField":
        """Tabulate another source (e.g. :class:`AnalyticField`) on the lattice ``xs`` x ``ys``."""
        xs = np.asarray(xs, dtype=float)
        ys = np.sort(np.asarray(ys, dtype=float))[::-1]
        yy, xx = np.meshgrid(ys, xs, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        m = source.matrix(pts)
        return cls(xs, ys, m.T.reshape(-1, ys.size, xs.size))

    def matrix(self, points, antennas=None) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        if (
            np.any(x < self.xs[0])
            or np.any(x > self.xs[-1])
            or np.any(y > self.ys[0])
            or np.any(y < self.ys[-1])
        ):
            raise CoverageError("point outside the tabulated field's lattice")
        ix = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.xs.size - 2)
        # ys descend: search on the negated axis
        iy = np.clip(np.searchsorted(-self.ys, -y, side="right") - 1, 0, self.ys.size - 2)
        tx = (x - self.xs[ix]) / (self.xs[ix + 1] - self.xs[ix])
        ty = (y - self.ys[iy]) / (self.ys[iy + 1] - self.ys[iy])
        vals = self.values if antennas is None else self.values[np.asarray(antennas)]
        v00 = vals[:, iy, ix]
        v01 = vals[:, iy, ix + 1]
        v10 = vals[:, iy + 1, ix]
        v11 = vals[:, iy + 1, ix + 1]
        out = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11)
        return out.T

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIELD_HEADER)
            for n in range(self.n_antennas):
                for j, y in enumerate(self.ys):
                    for i, x in enumerate(self.xs):
                        v = self.values[n, j, i]
                        w.writerow([n + 1, fmt(x), fmt(y), fmt(v.real), fmt(v.imag)])

    @classmethod
    def from_csv(cls, path) -> "TabulatedField":
        rows = _read_csv(path, FIELD_HEADER)
        per_antenna: dict[int, list] = {}
        for line, r in rows:
            try:
                n = int(r[0])
                x, y, re, im = (float(v) for v in r[1:])
            except ValueError as exc:
                raise ValidationError(f"{path}:{line}: {exc}") from exc
            per_antenna.setdefault(n, []).append((x, y, complex(re, im)))
        if not per_antenna:
            raise ValidationError(f"{path}: no field samples")
        count = max(per_antenna)
        if sorted(per_antenna) != list(range(1, count + 1)):
            raise ValidationError(f"{path}: antennas must be numbered 1..N without gaps")
        xs = ys = None
        stack = []
        for n in range(1, count + 1):
            samples = per_antenna[n]
            sx = sorted({s[0] for s in samples})
            sy = sorted({s[1] for s in samples}, reverse=True)
            if xs is None:
                xs, ys = sx, sy
            elif sx != xs or sy != ys:
                raise ValidationError(f"{path}: antenna {n} uses a different lattice")
            if len(samples) != len(xs) * len(ys):
                raise ValidationError(f"{path}: antenna {n} does not cover a full lattice")
            expected = [(x, y) for y in ys for x in xs]
            if [(s[0], s[1]) for s in samples] != expected:
                raise ValidationError(f"{path}: antenna {n} rows are not in row-major order")
            stack.append(np.array([s[2] for s in samples]).reshape(len(ys), len(xs)))
        return cls(xs, ys, np.array(stack))


def incident_field(source, antenna: int, r) -> complex:
    """``E_inc(r, a_antenna)`` for a single point; ``antenna`` is 1-based."""
    n = _index(antenna, source.n_antennas)
    return complex(source.matrix(np.asarray(r, dtype=float)[None, :], [n])[0, 0])


# ---------------------------------------------------------------------------
# Born synthesis and data manipulation
# ---------------------------------------------------------------------------


def born_prefactor(medium: Medium) -> complex:
    """``i k^2 / (4 omega mu)``."""
    return 1j * medium.k**2 / (4.0 * medium.omega * medium.mu)


def born_synthesize(scene: Scene, source=None) -> ScatteringData:
    """Born-approximated ``S_scat(n, n')`` for every ``n != n'``.

    ``S(n, n') = (i k^2 / 4 omega mu) sum_m rho_m^3 chi_m E_inc(a_n', r_m) E_inc(r_m, a_n)``.
    """
    if source is None:
        source = AnalyticField.for_scene(scene)
    n = scene.array.count
    if source.n_antennas != n:
        raise ValidationError(f"incident field has {source.n_antennas} antennas, scene has {n}")
    values = np.zeros((n, n), dtype=complex)
    if scene.anomalies:
        fields = source.matrix(scene.centers())  # (M, N)
        weights = np.array([a.rho**3 for a in scene.anomalies]) * scene.contrasts()
        for w, u in zip(weights, fields):
            values += w * np.outer(u, u)
        values *= born_prefactor(scene.medium)
        # mirror the upper triangle so S(n, n') == S(n', n) bit for bit
        upper = np.triu(values, 1)
        values = upper + upper.T
    return ScatteringData(scene.medium.freq, values, full_mask(n))


def subtract_background(total: ScatteringData, background: ScatteringData) -> ScatteringData:
    """Entry-wise ``total - background`` over entries measured in both."""
    if total.n_antennas != background.n_antennas:
        raise ValidationError(
            f"antenna count mismatch: {total.n_antennas} vs {background.n_antennas}"
        )
    if total.freq != background.freq:
        raise ValidationError(f"frequency mismatch: {total.freq} vs {background.freq}")
    mask = total.mask & background.mask
    diff = np.zeros_like(total.values)
    diff[mask] = total.values[mask] - background.values[mask]
    return ScatteringData(total.freq, diff, mask)


def add_noise(data: ScatteringData, snr_db: float, seed: int) -> ScatteringData:
    """Add circular complex Gaussian noise at ``snr_db`` over the measured entries.

    The noise variance is ``mean(|S|^2) / 10^(snr_db/10)``; ``snr_db = inf``
    returns an unchanged copy.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return ScatteringData(data.freq, data.values.copy(), data.mask.copy())
    if not math.isfinite(snr_db):
        raise ValidationError(f"snr_db must be finite or +inf, got {snr_db!r}")
    measured = data.values[data.mask]
    power = float(np.mean(np.abs(measured) ** 2)) if measured.size else 0.0
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0) / 2.0)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, (measured.size, 2))
    values = data.values.copy()
    values[data.mask] = measured + noise[:, 0] + 1j * noise[:, 1]
    return ScatteringData(data.freq, values, data.mask.copy())


# ---------------------------------------------------------------------------
# S-parameter CSV
# ---------------------------------------------------------------------------


def sparams_to_csv_text(data: ScatteringData) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPARAM_HEADER)
    n = data.n_antennas
    for tx in range(n):
        for rx in range(n):
            if data.mask[rx, tx]:
                v = data.values[rx, tx]
                w.writerow([fmt(data.freq), tx + 1, rx + 1, fmt(v.real), fmt(v.imag)])
    return buf.getvalue()


def write_sparams_csv(data: ScatteringData, path) -> None:
    Path(path).write_text(sparams_to_csv_text(data), encoding="utf-8")


def _read_csv(path, header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ValidationError(f"{path}:1: expected header {','.join(header)}")
    out = []
    for line, r in enumerate(rows[1:], start=2):
        if not r:
            continue
        if len(r) != len(header):
            raise ValidationError(f"{path}:{line}: expected {len(header)} fields, got {len(r)}")
        out.append((line, r))
    return out


def read_sparams_csv(path, n_antennas: int | None = None) -> ScatteringData:
    """Parse an S-parameter CSV; ``n_antennas`` defaults to the largest index seen."""
    rows = _read_csv(path, SPARAM_HEADER)
    parsed = []
    freqs = set()
    for line, r in rows:
        try:
            f, tx, rx, re, im = float(r[0]), int(r[1]), int(r[2]), float(r[3]), float(r[4])
        except ValueError as exc:
            raise ValidationError(f"{path}:{line}: {exc}") from exc
        if tx == rx:
            raise ValidationError(f"{path}:{line}: tx == rx cannot be measured")
        freqs.add(f)
        parsed.append((line, tx, rx, complex(re, im)))
    if len(freqs) > 1:
        raise ValidationError(f"{path}: multiple frequencies {sorted(freqs)}")
    if not parsed and n_antennas is None:
        raise ValidationError(f"{path}: no data rows and no antenna count given")
    n = n_antennas or max(max(p[1], p[2]) for p in parsed)
    values = np.zeros((n, n), dtype=complex)
    mask = np.zeros((n, n), dtype=bool)
    for line, tx, rx, v in parsed:
        if not (1 <= tx <= n and 1 <= rx <= n):
            raise ValidationError(f"{path}:{line}: antenna index outside 1..{n}")
        if mask[rx - 1, tx - 1]:
            raise ValidationError(f"{path}:{line}: duplicate (tx, rx) = ({tx}, {rx})")
        values[rx - 1, tx - 1] = v
        mask[rx - 1, tx - 1] = True
    freq = freqs.pop() if freqs else float("nan")
    return ScatteringData(freq, values, mask)
