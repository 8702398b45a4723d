"""Reduce wave packets and distributions to measurable quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .angular_momentum import QuadratureGrid, wigner_d_matrix
from .dynamics import (
    ADIABATIC,
    DistributionField,
    RotationalWavePacket,
    angular_distribution,
    centrifuge_packet,
    component_distribution,
    evolve,
    exact_grid,
)
from .molecule import MolecularConstants, manifold_spectrum

__all__ = [
    "AlignmentMoments",
    "RamanWeights",
    "DecayTable",
    "DECAY_TABLE",
    "alignment_moments",
    "moment_tensor",
    "analytic_cos2_z",
    "birefringence_signal",
    "probe_projection",
    "angular_momentum_vector",
    "principal_tilt",
    "raman_weights",
    "collisional_envelope",
    "coherent_signal",
    "observed_signal",
    "fit_cos2",
]


@dataclass(frozen=True)
class AlignmentMoments:
    cos2_x: float
    cos2_y: float
    cos2_z: float
    cross_yz: float

    def __post_init__(self):
        total = self.cos2_x + self.cos2_y + self.cos2_z
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"direction cosines squared sum to {total}, not 1")


@dataclass(frozen=True)
class RamanWeights:
    """Weights of positive, negative and zero angular-momentum projection on x."""

    w_plus: float
    w_minus: float
    w_zero: float


@dataclass(frozen=True)
class DecayTable:
    """Collisional lifetimes tau(N) in ps*atm."""

    entries: Mapping[int, float]

    def __post_init__(self):
        keys = list(self.entries)
        if keys != sorted(set(keys)):
            raise ValueError("decay table keys must be strictly increasing")
        if any(v <= 0 for v in self.entries.values()):
            raise ValueError("lifetimes must be positive")

    def lifetime(self, n: float) -> float:
        """Piecewise-linear in N, flat outside the tabulated range."""
        keys = np.array(list(self.entries), dtype=float)
        vals = np.array(list(self.entries.values()), dtype=float)
        return float(np.interp(n, keys, vals))


# Birefringence lifetimes measured at B = 2 T.
DECAY_TABLE = DecayTable({13: 85.0, 33: 290.0, 73: 660.0, 99: 610.0})


def moment_tensor(values: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
    """Second-moment tensor <n_a n_b> of a density sampled on ``grid``."""
    vecs = grid.unit_vectors()
    t = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            t[a, b] = t[b, a] = grid.integrate(values * vecs[a] * vecs[b])
    return t


def alignment_moments(source: DistributionField | RotationalWavePacket,
                      grid: QuadratureGrid | None = None) -> AlignmentMoments:
    """<cos^2 theta_alpha> by quadrature over rho."""
    if isinstance(source, RotationalWavePacket):
        grid = grid or exact_grid(source.max_j)
        source = angular_distribution(source, grid)
    field = source
    field.grid.require_degree(2 * (field.packet.max_j if field.packet else 0) + 2)
    norm = field.norm
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"distribution is not normalized (integral {norm})")
    t = moment_tensor(field.values, field.grid)
    return AlignmentMoments(float(t[0, 0]), float(t[1, 1]), float(t[2, 2]), float(t[1, 2]))


def analytic_cos2_z(packet: RotationalWavePacket) -> float:
    """<cos^2 theta_z> from the amplitudes alone (no quadrature)."""
    total = 0.0
    for comp in packet.components:
        for jp, c in comp.amplitudes.items():
            ms = np.arange(-jp, jp + 1, dtype=float)
            diag = 1.0 / 3.0 + (2.0 / 3.0) * (jp * (jp + 1) - 3.0 * ms * ms) / ((2 * jp - 1) * (2 * jp + 3))
            total += comp.weight * float(np.sum(np.abs(c) ** 2 * diag))
    return total


def birefringence_signal(moments: AlignmentMoments) -> float:
    """Anisotropy cos2_z - cos2_y, up to an unknown scale factor."""
    return moments.cos2_z - moments.cos2_y


def probe_projection(moments: AlignmentMoments, theta_p):
    """<cos^2> along a probe polarization at theta_p from z in the yz plane, minus 1/2."""
    theta_p = np.asarray(theta_p, dtype=float)
    out = ((moments.cos2_z - 0.5) * np.cos(theta_p) ** 2
           + (moments.cos2_y - 0.5) * np.sin(theta_p) ** 2
           + moments.cross_yz * np.sin(2.0 * theta_p))
    return float(out) if out.ndim == 0 else out


def fit_cos2(theta_p, signal) -> tuple[float, float, float]:
    """Least-squares fit of a + b cos^2(theta_p); returns (a, b, max |residual|)."""
    theta_p = np.asarray(theta_p, dtype=float)
    signal = np.asarray(signal, dtype=float)
    design = np.column_stack([np.ones_like(theta_p), np.cos(theta_p) ** 2])
    coef, *_ = np.linalg.lstsq(design, signal, rcond=None)
    resid = signal - design @ coef
    return float(coef[0]), float(coef[1]), float(np.max(np.abs(resid)))


def _ladder_expectations(j: int, c: np.ndarray) -> tuple[float, float, float]:
    ms = np.arange(-j, j + 1, dtype=float)
    p = np.abs(c) ** 2
    jz = float(np.sum(ms * p))
    if j == 0:
        return 0.0, 0.0, jz
    # <J+> = sum_M conj(c_{M+1}) c_M sqrt(J(J+1) - M(M+1))
    coef = np.sqrt(j * (j + 1) - ms[:-1] * (ms[:-1] + 1))
    jplus = complex(np.sum(np.conj(c[1:]) * c[:-1] * coef))
    return jplus.real, jplus.imag, jz


def angular_momentum_vector(packet: RotationalWavePacket) -> dict:
    """(<J_x>, <J_y>, <J_z>) for every prepared component, keyed by its J."""
    out = {}
    for comp in packet.components:
        acc = np.zeros(3)
        for jp, c in comp.amplitudes.items():
            acc += _ladder_expectations(jp, c)
        out[comp.j] = tuple(float(v) for v in acc)
    return out


def principal_tilt(packet: RotationalWavePacket, j: int, grid: QuadratureGrid | None = None) -> float:
    """Azimuth (rad, in (-pi/2, pi/2]) of the disk normal of component ``j``.

    The normal is the eigenvector of smallest eigenvalue of the component's
    second-moment tensor; the azimuth is measured from +x towards +y.
    """
    grid = grid or exact_grid(packet.max_j)
    comp = packet.component(j)
    rho = component_distribution(comp, grid)
    t = moment_tensor(rho / grid.integrate(rho), grid)
    _, vecs = np.linalg.eigh(t)
    normal = vecs[:, 0]
    angle = math.atan2(normal[1], normal[0])
    if angle > math.pi / 2:
        angle -= math.pi
    elif angle <= -math.pi / 2:
        angle += math.pi
    return angle


def raman_weights(packet: RotationalWavePacket) -> RamanWeights:
    """Split the population by the sign of its projection on the centrifuge axis."""
    plus = minus = zero = 0.0
    for comp in packet.components:
        for jp, c in comp.amplitudes.items():
            # |J, M'>_x = R_y(pi/2) |J, M'>_z  =>  b_{M'} = sum_M d_{M,M'}(pi/2) c_M
            b = wigner_d_matrix(jp, math.pi / 2).T @ c
            p = np.abs(b) ** 2
            minus += comp.weight * float(p[:jp].sum())
            zero += comp.weight * float(p[jp])
            plus += comp.weight * float(p[jp + 1:].sum())
    total = plus + minus + zero
    return RamanWeights(plus / total, minus / total, zero / total)


def collisional_envelope(n: float, pressure_atm: float, t_ns: float, table: DecayTable = DECAY_TABLE) -> float:
    """exp(-t P / tau(N)) with tau in ps*atm."""
    if pressure_atm < 0 or t_ns < 0:
        raise ValueError("pressure and time must be non-negative")
    tau_ns_atm = table.lifetime(n) / 1000.0
    return math.exp(-t_ns * pressure_atm / tau_ns_atm)


def coherent_signal(n: int, b_field: float, t_ns: float, constants: MolecularConstants | None = None,
                    mode: str = ADIABATIC, grid: QuadratureGrid | None = None) -> float:
    """Birefringence of the evolved centrifuge packet, without collisions."""
    spectrum = manifold_spectrum(n, float(b_field), constants)
    packet = evolve(centrifuge_packet(n), t_ns, spectrum, mode)
    return birefringence_signal(alignment_moments(packet, grid))


def observed_signal(n: int, b_field: float, t_ns: float, pressure_atm: float,
                    constants: MolecularConstants | None = None, mode: str = ADIABATIC,
                    grid: QuadratureGrid | None = None, table: DecayTable = DECAY_TABLE) -> float:
    return (coherent_signal(n, b_field, t_ns, constants, mode, grid)
            * collisional_envelope(n, pressure_atm, t_ns, table))
