"""Angular-momentum algebra for quantum numbers up to J ~ 150.

Conventions (used everywhere in the package):

* Condon-Shortley phases for Clebsch-Gordan coefficients and spherical
  harmonics, ``Y_{J,-M} = (-1)^M conj(Y_{J,M})``.
* ``d^J_{m',m}(beta) = <J m'| exp(-i beta J_y) |J m>``, the active rotation
  by ``beta`` about the y axis.
* Quantum numbers are carried as doubled integers internally so half-integer
  values are exact.  Factorial ratios are evaluated with ``math.lgamma`` and
  explicit sign tracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "HalfIntegerJ",
    "QuadratureGrid",
    "clebsch_gordan",
    "wigner_3j",
    "wigner_6j",
    "wigner_d",
    "wigner_d_matrix",
    "stretched_rotation_column",
    "normalized_legendre",
    "legendre_degree",
    "sph_harm",
    "make_grid",
]


@dataclass(frozen=True, order=True)
class HalfIntegerJ:
    """An angular-momentum quantum number stored as ``2J``."""

    twice_j: int

    def __post_init__(self):
        if self.twice_j < 0:
            raise ValueError(f"twice_j must be non-negative, got {self.twice_j}")

    @classmethod
    def of(cls, value) -> "HalfIntegerJ":
        return cls(_twice(value))

    @property
    def value(self) -> float:
        return self.twice_j / 2

    @property
    def is_integer(self) -> bool:
        return self.twice_j % 2 == 0

    def projections(self) -> list[int]:
        """Doubled projections ``2m`` for ``m = -J .. J``."""
        return list(range(-self.twice_j, self.twice_j + 1, 2))


def _twice(x) -> int:
    if isinstance(x, HalfIntegerJ):
        return x.twice_j
    t = round(2 * x)
    if abs(2 * x - t) > 1e-9:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(t)


def _lfact(n2: int) -> float:
    """log((n2/2)!) for an even doubled argument."""
    return math.lgamma(n2 // 2 + 1)


def _triangle(a: int, b: int, c: int) -> bool:
    """Triangle rule on doubled integers, including integrality of a+b+c."""
    return abs(a - b) <= c <= a + b and (a + b + c) % 2 == 0


def _log_delta(a: int, b: int, c: int) -> float:
    return (_lfact(a + b - c) + _lfact(a - b + c) + _lfact(-a + b + c)
            - _lfact(a + b + c + 2))


def _signed_log_sum(terms: list[tuple[int, float]], log_scale: float = 0.0) -> float:
    """exp(log_scale) * sum(sign * exp(logval)) without intermediate overflow."""
    if not terms:
        return 0.0
    top = max(lv for _, lv in terms)
    return math.exp(top + log_scale) * math.fsum(s * math.exp(lv - top) for s, lv in terms)


def _w3j_twice(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if (j1 + m1) % 2 or (j2 + m2) % 2 or (j3 + m3) % 2:
        return 0.0
    if not _triangle(j1, j2, j3):
        return 0.0
    # Racah's single-sum formula; every argument below is a doubled integer.
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    terms = []
    for k in range(kmin, kmax + 1, 2):
        lv = -(_lfact(k) + _lfact(j3 - j2 + k + m1) + _lfact(j3 - j1 + k - m2)
               + _lfact(j1 + j2 - j3 - k) + _lfact(j1 - k - m1) + _lfact(j2 - k + m2))
        terms.append((-1 if (k // 2) % 2 else 1, lv))
    pref = 0.5 * (_log_delta(j1, j2, j3)
                  + _lfact(j1 + m1) + _lfact(j1 - m1) + _lfact(j2 + m2)
                  + _lfact(j2 - m2) + _lfact(j3 + m3) + _lfact(j3 - m3))
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    return phase * _signed_log_sum(terms, pref)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol ``(j1 j2 j3; m1 m2 m3)``; zero outside the selection rules."""
    return _w3j_twice(_twice(j1), _twice(j2), _twice(j3),
                      _twice(m1), _twice(m2), _twice(m3))


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | j m>``."""
    tj1, tj2, tj = _twice(j1), _twice(j2), _twice(j)
    tm1, tm2, tm = _twice(m1), _twice(m2), _twice(m)
    if tm1 + tm2 != tm:
        return 0.0
    w = _w3j_twice(tj1, tj2, tj, tm1, tm2, -tm)
    if w == 0.0:
        return 0.0
    phase = -1 if ((tj1 - tj2 + tm) // 2) % 2 else 1
    return phase * math.sqrt(tj + 1) * w


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol ``{j1 j2 j3; j4 j5 j6}``; zero if any triad fails."""
    a, b, c, d, e, f = (_twice(x) for x in (j1, j2, j3, j4, j5, j6))
    triads = ((a, b, c), (a, e, f), (d, b, f), (d, e, c))
    if not all(_triangle(*t) for t in triads):
        return 0.0
    sums = [sum(t) for t in triads]
    caps = [a + b + d + e, b + c + e + f, c + a + f + d]
    tmin, tmax = max(sums), min(caps)
    terms = []
    for t in range(tmin, tmax + 1, 2):
        lv = (_lfact(t + 2) - sum(_lfact(t - s) for s in sums)
              - sum(_lfact(q - t) for q in caps))
        terms.append((-1 if (t // 2) % 2 else 1, lv))
    pref = 0.5 * sum(_log_delta(*tr) for tr in triads)
    return _signed_log_sum(terms, pref)


# -- Wigner small-d ----------------------------------------------------------

_RESCALE = 1e200


def _d_column(tj: int, tm: int, beta: float) -> np.ndarray:
    """Column ``d^j_{m',m}(beta)`` for all m', with 0 < beta < pi.

    The column is the eigenvector of ``cos(b) J_z + sin(b) J_x`` with
    eigenvalue m, i.e. the three-term recurrence

        c[k-1] v[k-1] + 2 (m'_k cos b - m) / sin b * v[k] + c[k] v[k+1] = 0,

    with ``c[k] = sqrt(j(j+1) - m'_k(m'_k+1))``.  It is run inward from both
    ends (stable through the classically forbidden tails, so the tails keep
    relative accuracy) and the two branches are matched near the centre.
    """
    n = tj + 1
    j = tj / 2
    m = tm / 2
    if n == 1:
        return np.ones(1)
    sb, cb = math.sin(beta), math.cos(beta)
    mp = [-j + k for k in range(n)]
    c = [math.sqrt(max(j * (j + 1) - x * (x + 1), 0.0)) for x in mp]
    diag = [2.0 * (x * cb - m) / sb for x in mp]

    # tiny columns: the downward branch alone is accurate
    centre = 1 if n <= 3 else min(max(int(round(m * cb + j)), 1), n - 2)

    top = [0.0] * n
    top[n - 1] = -1.0 if ((tj - tm) // 2) % 2 else 1.0
    nxt = 0.0
    for k in range(n - 1, centre - 1, -1):
        val = -(diag[k] * top[k] + c[k] * nxt) / c[k - 1]
        nxt = top[k]
        top[k - 1] = val
        if abs(val) > _RESCALE:
            for i in range(k - 1, n):
                top[i] /= _RESCALE
            nxt /= _RESCALE

    if n <= 3:
        v = np.array(top)
        return v / np.linalg.norm(v)

    bot = [0.0] * n
    bot[0] = 1.0
    prv = 0.0
    for k in range(0, centre + 1):
        val = -(prv + diag[k] * bot[k]) / c[k]
        prv = c[k] * bot[k]
        bot[k + 1] = val
        if abs(val) > _RESCALE:
            for i in range(0, k + 2):
                bot[i] /= _RESCALE
            prv /= _RESCALE

    window = range(centre - 1, centre + 2)
    num = sum(top[i] * bot[i] for i in window)
    den = sum(bot[i] * bot[i] for i in window)
    scale = num / den
    v = np.array(bot[:centre] + top[centre:], dtype=float)
    v[:centre] *= scale
    return v / np.linalg.norm(v)


def _reduce_beta(tj: int, beta: float) -> tuple[float, float, bool]:
    """Map beta to [0, pi]; returns (beta', overall sign, transpose flag)."""
    sign = 1.0
    two_pi = 2.0 * math.pi
    k = math.floor((beta + math.pi) / two_pi)
    beta = beta - k * two_pi
    if tj % 2 and k % 2:
        sign = -1.0
    if beta <= -math.pi:
        beta += two_pi
        if tj % 2:
            sign = -sign
    transpose = beta < 0
    return abs(beta), sign, transpose


def _d_column_any(tj: int, tm: int, beta: float) -> np.ndarray:
    n = tj + 1
    if beta < 1e-300:
        col = np.zeros(n)
        col[(tm + tj) // 2] = 1.0
        return col
    if math.pi - beta < 1e-15:
        col = np.zeros(n)
        col[(-tm + tj) // 2] = -1.0 if ((tj - tm) // 2) % 2 else 1.0
        return col
    return _d_column(tj, tm, beta)


@lru_cache(maxsize=256)
def _d_matrix_cached(tj: int, beta: float) -> np.ndarray:
    b, sign, transpose = _reduce_beta(tj, beta)
    mat = np.column_stack([_d_column_any(tj, tm, b) for tm in range(-tj, tj + 1, 2)])
    if transpose:
        mat = mat.T
    mat = sign * mat
    mat.setflags(write=False)
    return mat


def wigner_d_matrix(j, beta: float) -> np.ndarray:
    """Full real matrix ``d^j(beta)`` indexed ``[m' + j, m + j]``."""
    return _d_matrix_cached(_twice(j), float(beta))


def wigner_d(j, m_row, m_col, beta: float) -> float:
    """Single element ``d^j_{m_row, m_col}(beta)``."""
    tj, tr, tc = _twice(j), _twice(m_row), _twice(m_col)
    if abs(tr) > tj or abs(tc) > tj or (tj + tr) % 2 or (tj + tc) % 2:
        return 0.0
    b, sign, transpose = _reduce_beta(tj, float(beta))
    if transpose:
        tr, tc = tc, tr
    return float(sign * _d_column_any(tj, tc, b)[(tr + tj) // 2])


def stretched_rotation_column(j, beta: float) -> np.ndarray:
    """``d^J_{M,J}(beta)`` for ``M = -J .. J`` from the closed binomial form.

    ``d^J_{M,J} = sqrt(C(2J, J+M)) cos(beta/2)^(J+M) sin(beta/2)^(J-M)``,
    evaluated in log space.
    """
    tj = _twice(j)
    jj = tj / 2
    ms = np.arange(-tj, tj + 1, 2) / 2
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    p = ms + jj
    q = jj - ms
    with np.errstate(divide="ignore"):
        logc = math.log(abs(c)) if c != 0 else -math.inf
        logs = math.log(abs(s)) if s != 0 else -math.inf
    lbin = np.array([0.5 * (math.lgamma(tj + 1) - math.lgamma(a + 1) - math.lgamma(b + 1))
                     for a, b in zip(p, q)])
    with np.errstate(invalid="ignore"):
        logmag = lbin + np.where(p > 0, p * logc, 0.0) + np.where(q > 0, q * logs, 0.0)
    sign = np.where((p % 2 == 1) & (c < 0), -1.0, 1.0) * np.where((q % 2 == 1) & (s < 0), -1.0, 1.0)
    return sign * np.exp(logmag)


# -- Spherical harmonics -----------------------------------------------------

def legendre_degree(l: int, x) -> np.ndarray:
    """Fully normalized associated Legendre functions of degree ``l``.

    Returns an array of shape ``(l + 1, len(x))`` with row ``m`` holding
    ``Pbar_{l,m}(x)`` for ``m = 0 .. l``, normalized so that
    ``int_{-1}^{1} Pbar_{l,m}^2 dx = 1`` and carrying the Condon-Shortley
    phase.  Sectoral seeds are built by a product recurrence in ``sin(theta)``
    and the remaining degrees by the standard ascending three-term recurrence,
    so no factorials appear.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    sect = np.empty((l + 1, x.size))
    sect[0] = 1.0 / math.sqrt(2.0)
    for m in range(1, l + 1):
        sect[m] = -math.sqrt((2 * m + 1) / (2 * m)) * s * sect[m - 1]
    if l == 0:
        return sect
    prev2 = np.zeros((l + 1, x.size))
    prev1 = np.zeros((l + 1, x.size))
    cur = np.zeros((l + 1, x.size))
    prev1[0] = sect[0]
    for d in range(1, l + 1):
        m = np.arange(d, dtype=float)
        a = np.sqrt((4.0 * d * d - 1.0) / (d * d - m * m))
        np.multiply(prev1[:d], x, out=cur[:d])
        if d > 1:
            # row d-1 of prev2 is stale but its coefficient b is exactly zero
            b = np.sqrt(((d - 1.0) ** 2 - m * m) / (4.0 * (d - 1.0) ** 2 - 1.0))
            cur[:d] -= b[:, None] * prev2[:d]
        cur[:d] *= a[:, None]
        cur[d] = sect[d]
        prev2, prev1, cur = prev1, cur, prev2
    return prev1


def normalized_legendre(j: int, m: int, x: float) -> float:
    """``Pbar_{j,m}(x)`` with ``Pbar_{j,-m} = (-1)^m Pbar_{j,m}``."""
    if abs(m) > j:
        raise ValueError(f"|m|={abs(m)} exceeds j={j}")
    val = float(legendre_degree(j, [x])[abs(m), 0])
    return -val if (m < 0 and m % 2) else val


def sph_harm(j: int, m: int, theta, phi):
    """Orthonormal spherical harmonic ``Y_{j,m}(theta, phi)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(theta, phi).shape
    p = legendre_degree(j, np.cos(theta).ravel())[abs(m)].reshape(np.shape(theta))
    if m < 0 and m % 2:
        p = -p
    out = p * np.exp(1j * m * phi) / math.sqrt(2.0 * math.pi)
    out = np.broadcast_to(out, shape)
    return complex(out) if out.ndim == 0 else np.array(out)


# -- Quadrature --------------------------------------------------------------

@lru_cache(maxsize=64)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    # descending cos(theta) -> ascending theta
    x, w = x[::-1].copy(), w[::-1].copy()
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre nodes in cos(theta) times a uniform azimuthal grid."""

    n_theta: int
    phi_count: int

    def __post_init__(self):
        if self.n_theta < 2 or self.phi_count < 2:
            raise ValueError("grid needs n_theta >= 2 and n_phi >= 2")

    @property
    def cos_theta(self) -> np.ndarray:
        return _gauss_legendre(self.n_theta)[0]

    @property
    def theta_nodes(self) -> np.ndarray:
        return np.arccos(self.cos_theta)

    @property
    def theta_weights(self) -> np.ndarray:
        return _gauss_legendre(self.n_theta)[1]

    @property
    def phi_nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.phi_count) / self.phi_count

    @property
    def phi_weight(self) -> float:
        return 2.0 * np.pi / self.phi_count

    @property
    def exact_degree(self) -> int:
        return min(2 * self.n_theta - 1, self.phi_count - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.phi_count)

    def require_degree(self, degree: int) -> None:
        if self.exact_degree < degree:
            raise ValueError(
                f"grid {self.n_theta}x{self.phi_count} integrates degree "
                f"{self.exact_degree} exactly, {degree} required")

    def integrate(self, values) -> float:
        """Integral over the sphere of values sampled on the grid."""
        values = np.asarray(values)
        row = values.sum(axis=1) * self.phi_weight
        return row @ self.theta_weights

    def unit_vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cartesian components (x, y, z) of every grid direction."""
        ct = self.cos_theta[:, None]
        st = np.sqrt(1.0 - ct * ct)
        ph = self.phi_nodes[None, :]
        return st * np.cos(ph), st * np.sin(ph), np.broadcast_to(ct, (self.n_theta, self.phi_count))


def make_grid(n_theta: int, n_phi: int) -> QuadratureGrid:
    return QuadratureGrid(int(n_theta), int(n_phi))
