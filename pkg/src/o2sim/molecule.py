"""Level structure of a 3-Sigma molecule in Hund's case (b).

Energies are E/h in GHz throughout.  The Hamiltonian within a fixed-N
manifold is

    H = gamma N.S + (2 lambda / 3)(3 S_z'^2 - S^2) + g_s mu_B B S_z

with z' the internuclear axis and z the field axis.  Matrix elements over
``|N, S, J, M_J>`` come from Wigner-Eckart reductions; Delta N = +-2
spin-spin mixing, the rotational Zeeman term and hyperfine structure are
left out.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping
from importlib import resources
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .angular_momentum import wigner_3j, wigner_6j

__all__ = [
    "ConfigError",
    "MolecularConstants",
    "FineStructureTriplet",
    "ZeemanBlock",
    "ManifoldSpectrum",
    "load_constants",
    "default_constants",
    "rigid_rotor_energy",
    "raman_shift",
    "allowed_j",
    "block_basis",
    "spin_projection_coupled",
    "fine_structure_energies",
    "zeeman_block",
    "manifold_spectrum",
]

CONFIG_KEYS = {
    "b0_ghz": "b0",
    "d0_ghz": "d0",
    "lambda_ghz": "lambda_ss",
    "gamma_ghz": "gamma_sr",
    "g_s": "g_s",
    "mu_b_ghz_per_tesla": "mu_b",
}


class ConfigError(ValueError):
    """Raised when a constants file cannot be read or validated."""


@dataclass(frozen=True)
class MolecularConstants:
    """Rotational, fine-structure and magnetic constants (GHz, GHz/T)."""

    b0: float
    d0: float
    lambda_ss: float
    gamma_sr: float
    g_s: float
    mu_b: float
    spin: int = 1

    def __post_init__(self):
        if not self.b0 > 0:
            raise ValueError(f"b0 must be positive, got {self.b0}")
        if not self.mu_b > 0:
            raise ValueError(f"mu_b must be positive, got {self.mu_b}")
        if self.spin != 1:
            raise ValueError("only S = 1 molecules are supported")

    @property
    def zeeman_scale(self) -> float:
        """g_s * mu_B in GHz per tesla."""
        return self.g_s * self.mu_b

    @classmethod
    def from_dict(cls, data: dict) -> "MolecularConstants":
        if not isinstance(data, dict):
            raise ConfigError("constants file must hold a JSON object")
        missing = sorted(set(CONFIG_KEYS) - set(data))
        extra = sorted(set(data) - set(CONFIG_KEYS))
        if missing or extra:
            raise ConfigError(f"constants keys mismatch: missing={missing} unexpected={extra}")
        kwargs = {}
        for key, attr in CONFIG_KEYS.items():
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{key} must be a finite number, got {value!r}")
            kwargs[attr] = float(value)
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for key, attr in CONFIG_KEYS.items()}


def load_constants(path: str | Path | None = None) -> MolecularConstants:
    """Read a constants JSON file; ``None`` loads the bundled O2 values."""
    try:
        if path is None:
            text = resources.files("o2sim").joinpath("data/o2_constants.json").read_text()
        else:
            text = Path(path).read_text()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read constants from {path}: {exc}") from exc
    return MolecularConstants.from_dict(data)


@lru_cache(maxsize=1)
def default_constants() -> MolecularConstants:
    return load_constants()


def _check_n(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"rotational quantum number must be a non-negative integer, got {n}")
    return int(n)


def rigid_rotor_energy(n: int, constants: MolecularConstants | None = None) -> float:
    """B N(N+1) - D N^2 (N+1)^2 in GHz."""
    c = constants or default_constants()
    n = _check_n(n)
    x = n * (n + 1)
    return c.b0 * x - c.d0 * x * x


def raman_shift(n: int, constants: MolecularConstants | None = None) -> float:
    """Rotational Raman shift of the N -> N+2 line, in THz."""
    return (rigid_rotor_energy(n + 2, constants) - rigid_rotor_energy(n, constants)) / 1000.0


def allowed_j(n: int, spin: int = 1) -> tuple[int, ...]:
    n = _check_n(n)
    return tuple(j for j in range(abs(n - spin), n + spin + 1))


def block_basis(n: int, m_j: int) -> tuple[int, ...]:
    """J values of the manifold admitting projection ``m_j`` (ascending)."""
    js = tuple(j for j in allowed_j(n) if j >= abs(m_j))
    if not js:
        raise ValueError(f"|M_J|={abs(m_j)} exceeds N+1={n + 1}")
    return js


def spin_projection_coupled(n: int, j_row: int, j_col: int, m: int, spin: int = 1) -> float:
    """<N,S,j_row,m| S_z |N,S,j_col,m> in the case (b) basis."""
    n = _check_n(n)
    valid = allowed_j(n, spin)
    if j_row not in valid or j_col not in valid:
        raise ValueError(f"J must be one of {valid} for N={n}, got ({j_row}, {j_col})")
    if abs(m) > min(j_row, j_col):
        raise ValueError(f"|M|={abs(m)} exceeds min(J)={min(j_row, j_col)}")
    s = spin
    reduced = ((-1) ** (n + s + j_row + 1)
               * math.sqrt((2 * j_row + 1) * (2 * j_col + 1))
               * wigner_6j(s, j_row, n, j_col, s, 1)
               * math.sqrt(s * (s + 1) * (2 * s + 1)))
    return (-1) ** (j_row - m) * wigner_3j(j_row, 1, j_col, -m, 0, m) * reduced


def _spin_spin_diagonal(n: int, j: int, spin: int = 1) -> float:
    """<N,S,J| (3 S_z'^2 - S^2) |N,S,J> from C^2(omega) . T^2(S,S)."""
    s = spin
    c2 = (-1) ** n * (2 * n + 1) * wigner_3j(n, 2, n, 0, 0, 0)
    # <S||T^2(S,S)||S> fixed by <S,S| T^2_0 |S,S> = (3S^2 - S(S+1)) / sqrt(6)
    t2 = (3 * s * s - s * (s + 1)) / math.sqrt(6.0) / wigner_3j(s, 2, s, -s, 0, s)
    return math.sqrt(6.0) * (-1) ** (n + s + j) * wigner_6j(j, s, n, 2, n, s) * c2 * t2


@dataclass(frozen=True)
class FineStructureTriplet:
    """Zero-field energies (GHz) of one N manifold, keyed by J."""

    n: int
    e_by_j: Mapping[int, float]

    def __getitem__(self, j: int) -> float:
        return self.e_by_j[j]


@lru_cache(maxsize=512)
def fine_structure_energies(n: int, constants: MolecularConstants | None = None) -> FineStructureTriplet:
    """Spin-rotation plus spin-spin energies relative to the rotor energy."""
    c = constants or default_constants()
    n = _check_n(n)
    s = c.spin
    out = {}
    for j in allowed_j(n, s):
        n_dot_s = (j * (j + 1) - n * (n + 1) - s * (s + 1)) / 2
        out[j] = c.gamma_sr * n_dot_s + (2.0 * c.lambda_ss / 3.0) * _spin_spin_diagonal(n, j, s)
    return FineStructureTriplet(n, MappingProxyType(out))


def zeeman_block(n: int, m_j: int, b_field: float, constants: MolecularConstants | None = None) -> np.ndarray:
    """Real symmetric Hamiltonian block for fixed M_J over ``block_basis(n, m_j)``."""
    c = constants or default_constants()
    n = _check_n(n)
    if abs(m_j) > n + 1:
        raise ValueError(f"|M_J|={abs(m_j)} exceeds N+1={n + 1}")
    js = block_basis(n, m_j)
    fs = fine_structure_energies(n, c)
    h = np.diag([fs[j] for j in js])
    if b_field != 0.0:
        h = h + c.zeeman_scale * b_field * _sz_block(n, m_j, c.spin)
    return h


@lru_cache(maxsize=4096)
def _sz_block(n: int, m_j: int, spin: int) -> np.ndarray:
    js = block_basis(n, m_j)
    sz = np.zeros((len(js), len(js)))
    for a, ja in enumerate(js):
        for b, jb in enumerate(js):
            if abs(ja - jb) <= 1:
                sz[a, b] = spin_projection_coupled(n, ja, jb, m_j, spin)
    sz = 0.5 * (sz + sz.T)
    sz.setflags(write=False)
    return sz


@dataclass(frozen=True, eq=False)
class ZeemanBlock:
    """Eigensystem of one M_J block.

    ``energies[i]`` is the eigenvalue carrying adiabatic label ``basis_j[i]``
    and ``vectors[:, i]`` its eigenvector over ``basis_j``.
    """

    m_j: int
    basis_j: tuple
    matrix: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray

    def energy(self, j: int) -> float:
        return float(self.energies[self.basis_j.index(j)])


@dataclass(frozen=True, eq=False)
class ManifoldSpectrum:
    n: int
    b_field: float
    blocks: dict

    def energy(self, j: int, m_j: int) -> float:
        return self.blocks[m_j].energy(j)

    def levels(self) -> list[tuple[int, int, float]]:
        """(J label, M_J, energy) sorted by (J, M_J)."""
        rows = [(j, m, float(blk.energies[i]))
                for m, blk in self.blocks.items()
                for i, j in enumerate(blk.basis_j)]
        return sorted(rows, key=lambda r: (r[0], r[1]))

    def __len__(self) -> int:
        return sum(len(b.basis_j) for b in self.blocks.values())


def _assign_labels(vectors: np.ndarray, energies: np.ndarray, zero_order: np.ndarray) -> np.ndarray:
    """Pick, per block, the basis-to-eigenvector permutation of largest overlap.

    ``vectors`` has shape (blocks, d, d) with eigenvectors in columns,
    ``energies`` (blocks, d) ascending, ``zero_order`` the rank of each basis
    state's B=0 energy.  Returns ``perm`` with ``perm[:, i]`` the eigenvector
    column assigned to basis state i.  Near-ties go to the permutation that
    keeps the B=0 energy ordering.
    """
    d = vectors.shape[-1]
    weight = vectors ** 2
    perms = np.array(list(itertools.permutations(range(d))))
    idx = np.arange(d)
    scores = np.stack([weight[:, idx, p].sum(axis=1) for p in perms], axis=1)
    best = scores.max(axis=1, keepdims=True)
    # eigenvalues are ascending, so the order-preserving choice maps basis
    # state i to column zero_order[i]
    order_keeping = np.all(perms == zero_order[None, :], axis=1)
    bonus = np.where(order_keeping, 1.0, 0.0)[None, :]
    near = scores >= best - 1e-12
    choice = np.argmax(np.where(near, 1.0 + bonus, 0.0), axis=1)
    return perms[choice]


@lru_cache(maxsize=512)
def manifold_spectrum(n: int, b_field: float, constants: MolecularConstants | None = None) -> ManifoldSpectrum:
    """Diagonalize every M_J block of manifold ``n`` at field ``b_field`` (T)."""
    c = constants or default_constants()
    n = _check_n(n)
    if n < 1:
        raise ValueError("manifold_spectrum needs N >= 1")
    fs = fine_structure_energies(n, c)
    b_field = float(b_field)
    by_dim: dict[int, list[int]] = {}
    for m in range(-(n + 1), n + 2):
        by_dim.setdefault(len(block_basis(n, m)), []).append(m)

    blocks = {}
    for dim, ms in by_dim.items():
        mats = np.array([zeeman_block(n, m, b_field, c) for m in ms])
        evals, evecs = np.linalg.eigh(mats)
        js = block_basis(n, ms[0])
        zero_e = np.array([fs[j] for j in js])
        zero_order = np.argsort(np.argsort(zero_e, kind="stable"), kind="stable")
        perm = _assign_labels(evecs, evals, zero_order)
        for k, m in enumerate(ms):
            basis = block_basis(n, m)
            cols = perm[k]
            vec = evecs[k][:, cols].copy()
            # fix sign: labelled basis component positive
            signs = np.sign(np.diag(vec))
            signs[signs == 0] = 1.0
            vec *= signs[None, :]
            e = evals[k][cols].copy()
            for arr in (vec, e, mats[k]):
                arr.setflags(write=False)
            blocks[m] = ZeemanBlock(m, basis, mats[k], e, vec)
    blocks = dict(sorted(blocks.items()))
    return ManifoldSpectrum(n, b_field, blocks)
