"""Centrifuge wave packets and their evolution into rho(theta, phi).

Geometry: the centrifuge propagates along x, so the prepared angular
momentum points along +x; the field is B z and sets the quantization axis.
Amplitudes ``c_{J,M}`` are always expressed in that field frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .angular_momentum import QuadratureGrid, legendre_degree, make_grid, stretched_rotation_column
from .molecule import ManifoldSpectrum, allowed_j

__all__ = [
    "ADIABATIC",
    "EXACT",
    "PHASE_SIGN",
    "PacketComponent",
    "RotationalWavePacket",
    "DistributionField",
    "centrifuge_packet",
    "evolve",
    "angular_distribution",
    "component_distribution",
    "evaluate_density",
    "project_image",
    "exact_grid",
    "DEFAULT_GRID",
]

ADIABATIC = "adiabatic"
EXACT = "exact"
MODES = (ADIABATIC, EXACT)

# Sign s in exp(s * i * 2 pi E t).  +1 is the literal form of the
# angular-distribution formula; -1 is the Schroedinger-equation convention.
PHASE_SIGN = +1

DEFAULT_GRID = make_grid(256, 512)


@dataclass(frozen=True, eq=False)
class PacketComponent:
    """One incoherent member of the centrifuge mixture.

    ``j`` labels the prepared stretched state.  ``amplitudes`` maps a
    zero-field basis label J' to ``c_{J',M}`` for ``M = -J' .. J'``; in the
    adiabatic mode only ``J' = j`` is present.
    """

    j: int
    weight: float
    amplitudes: dict

    @property
    def norm(self) -> float:
        return math.sqrt(sum(float(np.vdot(c, c).real) for c in self.amplitudes.values()))


@dataclass(frozen=True, eq=False)
class RotationalWavePacket:
    n: int
    components: tuple
    time: float = 0.0
    b_field: float = 0.0
    mode: str = ADIABATIC

    def component(self, j: int) -> PacketComponent:
        for comp in self.components:
            if comp.j == j:
                return comp
        raise KeyError(j)

    @property
    def max_j(self) -> int:
        return max(jp for comp in self.components for jp in comp.amplitudes)


def centrifuge_packet(n: int, weighting: str = "equal") -> RotationalWavePacket:
    """Stretched states ``|J, M'=J>`` along x, one per J, at t = 0.

    ``weighting`` is ``"equal"`` (1/3 each) or ``"degeneracy"`` (2J+1).
    """
    if n < 1:
        raise ValueError("centrifuge_packet needs N >= 1")
    js = allowed_j(n)
    if weighting == "equal":
        raw = [1.0] * len(js)
    elif weighting == "degeneracy":
        raw = [2.0 * j + 1.0 for j in js]
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    total = sum(raw)
    comps = tuple(
        PacketComponent(j, w / total, {j: stretched_rotation_column(j, math.pi / 2).astype(complex)})
        for j, w in zip(js, raw))
    return RotationalWavePacket(n, comps)


def evolve(packet: RotationalWavePacket, t: float, spectrum: ManifoldSpectrum,
           mode: str | None = None, phase_sign: int | None = None) -> RotationalWavePacket:
    """Advance ``packet`` by ``t`` nanoseconds in the field of ``spectrum``.

    ``mode="adiabatic"`` multiplies each ``c_{J,M}`` by the phase of the
    eigenvalue labelled (J, M).  ``mode="exact"`` projects every M block onto
    the eigenvectors, phases them and projects back, so J' components mix.
    """
    mode = mode or packet.mode
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if packet.n != spectrum.n:
        raise ValueError(f"packet manifold N={packet.n} does not match spectrum N={spectrum.n}")
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    sign = PHASE_SIGN if phase_sign is None else phase_sign
    omega = sign * 2.0 * math.pi * float(t)
    n = packet.n
    js = allowed_j(n)

    new_comps = []
    for comp in packet.components:
        if mode == ADIABATIC:
            amps = {}
            for jp, c in comp.amplitudes.items():
                ms = range(-jp, jp + 1)
                e = np.array([spectrum.blocks[m].energy(jp) for m in ms])
                amps[jp] = c * np.exp(1j * omega * e)
        else:
            amps = {jp: np.zeros(2 * jp + 1, complex) for jp in js}
            for jp, c in comp.amplitudes.items():
                amps[jp] = amps[jp] + c
            for m, blk in spectrum.blocks.items():
                basis = blk.basis_j
                v = np.array([amps[jp][m + jp] for jp in basis])
                u = blk.vectors
                v = u @ (np.exp(1j * omega * blk.energies) * (u.T @ v))
                for k, jp in enumerate(basis):
                    amps[jp][m + jp] = v[k]
        new_comps.append(PacketComponent(comp.j, comp.weight, amps))
    return RotationalWavePacket(n, tuple(new_comps), packet.time + float(t), spectrum.b_field, mode)


# -- Distributions -----------------------------------------------------------

@lru_cache(maxsize=64)
def _signed_legendre(j: int, n_theta: int) -> np.ndarray:
    """``Pbar_{j,M}`` on the grid nodes for ``M = -j .. j`` (rows)."""
    x = make_grid(n_theta, 2).cos_theta
    p = legendre_degree(j, x)
    ms = np.arange(-j, j + 1)
    sign = np.where((ms < 0) & (ms % 2 == 1), -1.0, 1.0)
    out = sign[:, None] * p[np.abs(ms)]
    out.setflags(write=False)
    return out


def _wavefunction_on_grid(jp: int, c: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
    """sum_M c_M Y_{J',M} on the grid, via an inverse FFT in phi."""
    p = _signed_legendre(jp, grid.n_theta)
    ms = np.arange(-jp, jp + 1)
    coeff = np.zeros((grid.n_theta, grid.phi_count), complex)
    coeff[:, ms % grid.phi_count] = (c[:, None] * p).T
    return np.fft.ifft(coeff, axis=1) * (grid.phi_count / math.sqrt(2.0 * math.pi))


def component_distribution(comp: PacketComponent, grid: QuadratureGrid) -> np.ndarray:
    """Unweighted density of one component, ``sum_J' |sum_M c Y|^2``."""
    rho = np.zeros(grid.shape)
    for jp in sorted(comp.amplitudes):
        grid.require_degree(2 * jp)
        if grid.phi_count < 2 * jp + 1:
            raise ValueError(f"n_phi={grid.phi_count} aliases J={jp}")
        f = _wavefunction_on_grid(jp, comp.amplitudes[jp], grid)
        rho += f.real ** 2 + f.imag ** 2
    return rho


@dataclass(frozen=True, eq=False)
class DistributionField:
    """rho(theta, phi) sampled on ``grid``; integrates to 1."""

    grid: QuadratureGrid
    values: np.ndarray
    packet: RotationalWavePacket | None = field(default=None, repr=False)

    @property
    def norm(self) -> float:
        return float(self.grid.integrate(self.values))


def angular_distribution(packet: RotationalWavePacket, grid: QuadratureGrid = DEFAULT_GRID) -> DistributionField:
    """rho = sum over components and J' of w |sum_M c_{J',M} Y_{J',M}|^2."""
    grid.require_degree(2 * packet.max_j)
    rho = np.zeros(grid.shape)
    for comp in packet.components:
        rho += comp.weight * component_distribution(comp, grid)
    total = grid.integrate(rho)
    rho = np.clip(rho / total, 0.0, None)
    rho.setflags(write=False)
    return DistributionField(grid, rho, packet)


def exact_grid(max_j: int, extra_degree: int = 2) -> QuadratureGrid:
    """Smallest grid integrating rho times a degree-``extra_degree`` polynomial."""
    degree = 2 * max_j + extra_degree
    return make_grid(degree // 2 + 1, degree + 1)


def evaluate_density(packet: RotationalWavePacket, theta, phi) -> np.ndarray:
    """Normalized rho at arbitrary directions (arrays of equal shape)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x = np.cos(theta).ravel()
    ph = phi.ravel()
    rho = np.zeros(x.size)
    for comp in packet.components:
        for jp, c in comp.amplitudes.items():
            p = legendre_degree(jp, x)
            ms = np.arange(-jp, jp + 1)
            sign = np.where((ms < 0) & (ms % 2 == 1), -1.0, 1.0)
            coef = (c * sign)[:, None] * p[np.abs(ms)]
            # Horner in z = exp(i phi): sum_M coef_M z^M = z^(-J) * sum_k coef_k z^k
            z = np.exp(1j * ph)
            f = np.zeros(x.size, dtype=complex)
            for row in coef[::-1]:
                f = f * z + row
            f *= np.exp(-1j * jp * ph) / math.sqrt(2.0 * math.pi)
            rho += comp.weight * (f.real ** 2 + f.imag ** 2)
    return rho.reshape(theta.shape)


_VIEW_FRAMES = {
    # view axis -> (u axis, v axis, view axis) as a right-handed triple
    "x": (np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])),
    "y": (np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])),
    "z": (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])),
}


def project_image(dist: DistributionField | RotationalWavePacket, view_axis: str, size: int = 201,
                  min_cos: float = 0.05) -> np.ndarray:
    """Density of axis directions projected onto the plane normal to ``view_axis``.

    Each pixel (u, v) inside the unit disk collects both hemispheres,
    ``rho / |cos alpha|``, with ``|cos alpha|`` floored at ``min_cos``.
    Row 0 is the top of the image (largest v).
    """
    if view_axis not in _VIEW_FRAMES:
        raise ValueError(f"view_axis must be x, y or z, got {view_axis!r}")
    packet = dist.packet if isinstance(dist, DistributionField) else dist
    if packet is None:
        raise ValueError("distribution field carries no packet to evaluate")
    eu, ev, ew = _VIEW_FRAMES[view_axis]
    coords = np.linspace(-1.0, 1.0, size)
    u, v = np.meshgrid(coords, coords[::-1])
    r2 = u * u + v * v
    inside = r2 < 1.0
    w = np.sqrt(np.clip(1.0 - r2, 0.0, None))
    image = np.zeros((size, size))
    for hemi in (1.0, -1.0):
        vec = (u[..., None] * eu + v[..., None] * ev + hemi * w[..., None] * ew)[inside]
        theta = np.arccos(np.clip(vec[:, 2], -1.0, 1.0))
        phi = np.arctan2(vec[:, 1], vec[:, 0])
        rho = evaluate_density(packet, theta, phi)
        image[inside] += rho / np.maximum(w[inside], min_cos)
    return image
