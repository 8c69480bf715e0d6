"""Cylindrical special functions used by the forward model and the Bessel-series oracle.

Integer-order ``J_s`` of real argument comes from Miller's backward
recurrence normalised with ``J_0 + 2 * sum_k J_2k = 1``.  ``H0^(1)`` of
complex argument (lossy media) is evaluated with ascending power series for
``|z| < ASYMPTOTIC_RADIUS`` and with the Hankel asymptotic series beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError

MAX_ORDER = 200
MAX_ARGUMENT = 1.0e4

# |z| where the power series (cancellation ~ eps * I0(|z|)) and the
# asymptotic series (smallest term near k = 2|z|) are both below 1e-11.
ASYMPTOTIC_RADIUS = 13.0
_SERIES_TERMS = 40
_ASYMPTOTIC_TERMS = 26

_EULER_GAMMA = 0.57721566490153286061
_RESCALE_LIMIT = 1.0e250

# i**s for s mod 4, exact
I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


@dataclass(frozen=True)
class SeriesBudget:
    """Symmetric truncation ``0 < |s| <= s_max`` of a Bessel series."""

    s_max: int
    tol: float = 1.0e-12

    def __post_init__(self):
        if int(self.s_max) != self.s_max or self.s_max < 0:
            raise DomainError(f"s_max must be a non-negative integer, got {self.s_max!r}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol!r}")

    @classmethod
    def for_argument(cls, x: float, tol: float = 1.0e-12) -> "SeriesBudget":
        """Default budget ``ceil(x) + 30`` covering arguments up to ``x``."""
        return cls(int(math.ceil(x)) + 30, tol)


# ---------------------------------------------------------------------------
# J_s, real argument
# ---------------------------------------------------------------------------


def _miller_start(s_max: int, x_max: float) -> int:
    top = max(s_max, int(math.ceil(x_max)), 1)
    start = top + int(math.sqrt(160.0 * top)) + 16
    return start + (start % 2)


_TINY_ARGUMENT = 1.0e-6


def _log_factorials(n: int) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, n + 1)))])


def bessel_j_table(s_max: int, x) -> np.ndarray:
    """Return ``J_0(x) .. J_{s_max}(x)`` stacked along a new leading axis.

    ``x`` may be a scalar or an array of non-negative reals; the result has
    shape ``(s_max + 1,) + np.shape(x)``.  No envelope check is applied here.
    """
    s_max = int(s_max)
    if s_max < 0:
        raise DomainError("s_max must be non-negative")
    xa = np.asarray(x, dtype=float)
    shape = xa.shape
    xf = xa.ravel()
    if np.any(~np.isfinite(xf)) or np.any(xf < 0):
        raise DomainError("bessel_j_table needs finite, non-negative arguments")

    out = np.zeros((s_max + 1, xf.size))
    zero = xf / 2.0 == 0.0
    tiny = ~zero & (xf < _TINY_ARGUMENT)
    live = ~zero & ~tiny
    if np.any(live):
        xl = xf[live]
        top = _miller_start(s_max, float(xl.max()))
        table = np.zeros((s_max + 1, xl.size))
        j_hi = np.zeros_like(xl)  # J_{n+1}
        j_n = np.full_like(xl, 1.0e-30)  # J_n at n = top
        norm = np.zeros_like(xl)
        two_over_x = 2.0 / xl
        for n in range(top, 0, -1):
            j_lo = n * two_over_x * j_n - j_hi
            j_hi, j_n = j_n, j_lo
            m = n - 1
            if m <= s_max:
                table[m] = j_n
            if m % 2 == 0:
                norm += j_n if m == 0 else 2.0 * j_n
            big = np.abs(j_n) > _RESCALE_LIMIT
            if big.any():
                scale = np.where(big, 1.0 / _RESCALE_LIMIT, 1.0)
                j_n = j_n * scale
                j_hi = j_hi * scale
                norm = norm * scale
                if m <= s_max:
                    table[m:] *= scale
        out[:, live] = table / norm
    if np.any(zero):
        out[0, zero] = 1.0
    if np.any(tiny):
        # two-term ascending series; the next term is below 1e-24 relative
        half = xf[tiny] / 2.0
        orders = np.arange(s_max + 1)[:, None]
        with np.errstate(under="ignore"):
            lead = np.exp(orders * np.log(half)[None, :] - _log_factorials(s_max)[:, None])
        out[:, tiny] = lead * (1.0 - half**2 / (orders + 1))
    return out.reshape((s_max + 1,) + shape)


def bessel_j(s: int, x):
    """Bessel function of the first kind ``J_s(x)`` for integer ``s`` and real ``x >= 0``.

    Supported envelope: ``|s| <= 200`` and ``0 <= x <= 1e4``; absolute error
    is below 1e-12 inside it.  Negative orders use ``J_{-s} = (-1)^s J_s``.
    """
    if int(s) != s:
        raise DomainError(f"order must be an integer, got {s!r}")
    s = int(s)
    xa = np.asarray(x, dtype=float)
    if abs(s) > MAX_ORDER:
        raise DomainError(f"|order| {abs(s)} exceeds supported {MAX_ORDER}")
    if np.any(~np.isfinite(xa)) or np.any(xa < 0) or np.any(xa > MAX_ARGUMENT):
        raise DomainError(f"argument outside [0, {MAX_ARGUMENT:g}]")
    val = bessel_j_table(abs(s), xa)[abs(s)]
    if s < 0 and s % 2:
        val = -val
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# Orders 0 and 1 of the second kind / Hankel, complex argument
# ---------------------------------------------------------------------------


def _series_j_y(nu: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending series for ``J_nu`` and ``Y_nu`` (nu in {0, 1})."""
    q = -(z * z) / 4.0
    log_term = (2.0 / np.pi) * (np.log(z / 2.0) + _EULER_GAMMA)
    term = np.ones_like(z)
    j_sum = np.zeros_like(z)
    h_sum = np.zeros_like(z)
    harmonic = 0.0
    if nu == 0:
        for k in range(_SERIES_TERMS):
            if k:
                term = term * q / (k * k)
                harmonic += 1.0 / k
            j_sum = j_sum + term
            h_sum = h_sum + harmonic * term
        j = j_sum
        y = log_term * j - (2.0 / np.pi) * h_sum
        return j, y
    # nu == 1: terms (-z^2/4)^k / (k! (k+1)!)
    for k in range(_SERIES_TERMS):
        if k:
            term = term * q / (k * (k + 1))
            harmonic += 1.0 / k
        j_sum = j_sum + term
        h_sum = h_sum + (2.0 * harmonic + 1.0 / (k + 1)) * term
    half = z / 2.0
    j = half * j_sum
    y = log_term * j - 2.0 / (np.pi * z) - (half / np.pi) * h_sum
    return j, y


def _asymptotic_h1(nu: int, z: np.ndarray) -> np.ndarray:
    """Hankel asymptotic series for ``H_nu^(1)(z)``, valid for large ``|z|``."""
    mu = 4.0 * nu * nu
    coeff = 1.0
    acc = np.ones_like(z)
    zpow = np.ones_like(z)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        coeff *= (mu - (2 * k - 1) ** 2) / (k * 8.0)
        zpow = zpow * z
        acc = acc + I_POWERS[k % 4] * coeff / zpow
    phase = z - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * np.exp(1j * phase) * acc


def _hankel1(nu: int, z) -> np.ndarray:
    za = np.asarray(z, dtype=complex)
    if np.any(~np.isfinite(za)):
        raise DomainError("Hankel argument must be finite")
    if np.any(za == 0):
        raise SingularityError("H^(1) is singular at z = 0")
    if np.any(za.real < 0):
        raise DomainError("Hankel argument must satisfy Re(z) >= 0")
    out = np.empty(za.shape, dtype=complex)
    far = np.abs(za) >= ASYMPTOTIC_RADIUS
    if np.any(far):
        out[far] = _asymptotic_h1(nu, za[far])
    near = ~far
    if np.any(near):
        j, y = _series_j_y(nu, za[near])
        out[near] = j + 1j * y
    return out


def hankel1_0(z):
    """Hankel function of the first kind of order zero, ``J0(z) + i Y0(z)``.

    Accepts complex scalars or arrays with ``Re(z) >= 0``; absolute error is
    below 1e-10 for ``|z| <= 1e4`` in the closed first quadrant.
    """
    out = _hankel1(0, z)
    return complex(out) if out.ndim == 0 else out


def hankel1_1(z):
    """Hankel function of the first kind of order one (same domain as :func:`hankel1_0`)."""
    out = _hankel1(1, z)
    return complex(out) if out.ndim == 0 else out


def _real_positive(x) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)) or np.any(~np.isfinite(xa)):
        raise DomainError("Y_nu needs finite x > 0")
    return xa


def bessel_y0(x):
    """Bessel function of the second kind ``Y0(x)`` for real ``x > 0``."""
    out = _hankel1(0, _real_positive(x)).imag
    return float(out) if out.ndim == 0 else out


def bessel_y1(x):
    """Bessel function of the second kind ``Y1(x)`` for real ``x > 0``."""
    out = _hankel1(1, _real_positive(x)).imag
    return float(out) if out.ndim == 0 else out


def asymptotic_hankel1_0(k, r, a, R: float) -> complex:
    """Leading far-field term ``(1+i)/(4 sqrt(k pi)) e^{ikR}/sqrt(R) e^{-ik theta.r}``.

    ``theta`` is the unit vector of the antenna position ``a`` and ``R`` its
    radius.  The constant is kept exactly as it appears in the indicator's
    derivation; it equals ``i/4`` times the true leading term of
    ``H0^(1)(k|r - a|)``.
    """
    if not R > 0:
        raise DomainError(f"antenna radius must be positive, got {R!r}")
    k = complex(k)
    if k == 0:
        raise DomainError("wavenumber must be non-zero")
    a = np.asarray(a, dtype=float)
    na = float(np.hypot(a[0], a[1]))
    if na == 0:
        raise DomainError("antenna position must be non-zero")
    theta = a / na
    proj = float(np.dot(theta, np.asarray(r, dtype=float)))
    amp = (1 + 1j) / (4.0 * np.sqrt(k * np.pi))
    return complex(amp * np.exp(1j * k * R) / math.sqrt(R) * np.exp(-1j * k * proj))


# ---------------------------------------------------------------------------
# Jacobi-Anger
# ---------------------------------------------------------------------------


def jacobi_anger_tail_bound(x: float, order: int) -> float:
    """Upper bound on ``sum_{|s| > order} |J_s(x)|``.

    Uses ``|J_s(x)| <= (x/2)^s / s!``; ``inf`` when the geometric bound on the
    ratio of consecutive terms does not hold yet.
    """
    if x / 2.0 == 0:
        return 0.0
    m = order + 1
    if x / 2.0 >= m + 1:
        return math.inf
    log_first = m * math.log(x / 2.0) - math.lgamma(m + 1)
    ratio = (x / 2.0) / (m + 1)
    return 2.0 * math.exp(log_first) / (1.0 - ratio)


def effective_order(x: float, budget: SeriesBudget) -> int:
    """Smallest order ``<= budget.s_max`` whose tail bound is below ``budget.tol``."""
    for s in range(budget.s_max + 1):
        if jacobi_anger_tail_bound(x, s) < budget.tol:
            return s
    return budget.s_max


def jacobi_anger(x: float, theta: float, budget: SeriesBudget | None = None) -> complex:
    """Truncated ``J0(x) + sum_{0<|s|<=S} i^s J_s(x) e^{i s theta}`` approximating ``e^{i x cos(theta)}``."""
    if not x >= 0:
        raise DomainError(f"x must be non-negative, got {x!r}")
    if budget is None:
        budget = SeriesBudget.for_argument(x)
    order = effective_order(x, budget)
    js = bessel_j_table(order, x)
    s = np.arange(1, order + 1)
    # s and -s pair up: i^-s J_-s e^{-is theta} = i^s J_s e^{-is theta}
    tail = np.sum(I_POWERS[s % 4] * js[1:] * 2.0 * np.cos(s * theta))
    return complex(js[0] + tail)
