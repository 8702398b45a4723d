"""Cartesian parameter sweeps over (N, B, t, theta_p) with ordered output."""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from decimal import Decimal, InvalidOperation

from .angular_momentum import make_grid
from .dynamics import ADIABATIC, MODES, angular_distribution, centrifuge_packet, evolve
from .molecule import MolecularConstants, manifold_spectrum
from .observables import (
    alignment_moments,
    birefringence_signal,
    collisional_envelope,
    probe_projection,
    raman_weights,
)

__all__ = ["ScanSpec", "ScanRow", "SCAN_COLUMNS", "parse_values", "run_scan", "format_csv"]


class ScanError(ValueError):
    """Malformed sweep specification."""


@dataclass(frozen=True)
class ScanRow:
    n: int
    b_tesla: float
    t_ns: float
    theta_p: float
    pressure_atm: float
    cos2_x: float
    cos2_y: float
    cos2_z: float
    cross_yz: float
    birefringence: float
    probe_signal: float
    w_plus: float
    w_minus: float
    envelope: float
    observed_signal: float

    def values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))


SCAN_COLUMNS = tuple(f.name for f in fields(ScanRow))


@dataclass(frozen=True)
class ScanSpec:
    """Sweep definition.  Times are integer picoseconds."""

    n_list: tuple
    b_list: tuple
    t_ps_list: tuple
    theta_p_list: tuple = (0.0,)
    pressure: float = 0.0
    mode: str = ADIABATIC
    grid: tuple = (256, 512)
    outputs: tuple = SCAN_COLUMNS
    constants: MolecularConstants | None = None

    def __post_init__(self):
        for name in ("n_list", "b_list", "t_ps_list", "theta_p_list"):
            if len(getattr(self, name)) == 0:
                raise ScanError(f"{name} is empty")
        if any(int(n) != n or n < 1 for n in self.n_list):
            raise ScanError("every N must be an integer >= 1")
        if any(int(t) != t or t < 0 for t in self.t_ps_list):
            raise ScanError("times must be non-negative whole picoseconds")
        if self.pressure < 0:
            raise ScanError("pressure must be non-negative")
        if self.mode not in MODES:
            raise ScanError(f"mode must be one of {MODES}")
        unknown = [c for c in self.outputs if c not in SCAN_COLUMNS]
        if unknown:
            raise ScanError(f"unknown output columns {unknown}")
        needed = 2 * (max(self.n_list) + 1) + 2
        if make_grid(*self.grid).exact_degree < needed:
            raise ScanError(f"grid {self.grid[0]}x{self.grid[1]} is too coarse for N={max(self.n_list)}")

    @property
    def columns(self) -> tuple:
        wanted = set(self.outputs)
        return tuple(c for c in SCAN_COLUMNS if c in wanted)

    def tasks(self) -> list[tuple]:
        """One task per (n, b, t); theta_p is expanded inside the task."""
        return [(int(n), float(b), int(t), tuple(self.theta_p_list), float(self.pressure),
                 self.mode, tuple(self.grid), self.constants)
                for n in self.n_list for b in self.b_list for t in self.t_ps_list]


def _evaluate(task: tuple) -> list[ScanRow]:
    n, b, t_ps, thetas, pressure, mode, grid, constants = task
    t_ns = t_ps / 1000.0
    spectrum = manifold_spectrum(n, b, constants)
    packet = evolve(centrifuge_packet(n), t_ns, spectrum, mode)
    moments = alignment_moments(angular_distribution(packet, make_grid(*grid)))
    delta = birefringence_signal(moments)
    raman = raman_weights(packet)
    env = collisional_envelope(n, pressure, t_ns)
    return [ScanRow(n, b, t_ns, th, pressure, moments.cos2_x, moments.cos2_y, moments.cos2_z,
                    moments.cross_yz, delta, probe_projection(moments, th), raman.w_plus,
                    raman.w_minus, env, delta * env)
            for th in thetas]


def run_scan(spec: ScanSpec, workers: int = 1) -> list[ScanRow]:
    """Evaluate every tuple; rows come back in input order for any ``workers``."""
    tasks = spec.tasks()
    if workers <= 1 or len(tasks) == 1:
        chunks = [_evaluate(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate, tasks))
    return [row for chunk in chunks for row in chunk]


def format_value(value) -> str:
    if isinstance(value, int):
        return str(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value}")
    return f"{value:.17g}"


def format_csv(rows, columns=SCAN_COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(getattr(row, c)) for c in columns) + "\n")
    return buf.getvalue()


def _decimal(text: str) -> Decimal:
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise ScanError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise ScanError(f"not a finite number: {text!r}")
    return value


_DEG = Decimal(str(math.pi)) / 180


def _angle(text: str) -> Decimal:
    text = text.strip()
    if text.endswith("deg"):
        return _decimal(text[:-3]) * _DEG
    return _decimal(text)


def parse_values(text: str, kind: str = "float") -> list[Decimal]:
    """Parse ``a,b,c`` or an inclusive ``start:stop:step`` range exactly.

    ``kind="angle"`` accepts a ``deg`` suffix on each number.
    """
    conv = _angle if kind == "angle" else _decimal
    text = text.strip()
    if not text:
        raise ScanError("empty value list")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ScanError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (conv(p) for p in parts)
        if step <= 0:
            raise ScanError("range step must be positive")
        if stop < start:
            raise ScanError("range stop is below start")
        count = int((stop - start) / step + Decimal("1e-9")) + 1
        return [start + k * step for k in range(count)]
    return [conv(p) for p in text.split(",")]


def to_picoseconds(values_ns) -> list[int]:
    out = []
    for v in values_ns:
        ps = Decimal(v) * 1000
        if ps != ps.to_integral_value():
            raise ScanError(f"time {v} ns is not a whole number of picoseconds")
        out.append(int(ps))
    return out
