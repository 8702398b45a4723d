"""Figure-reproduction recipes: the scans behind each figure plus shape checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ADIABATIC, angular_distribution, centrifuge_packet, evolve, exact_grid, project_image
from .molecule import MolecularConstants, default_constants, manifold_spectrum
from .observables import (
    DECAY_TABLE,
    alignment_moments,
    birefringence_signal,
    collisional_envelope,
    fit_cos2,
    principal_tilt,
)
from .scan import ScanSpec, format_csv, format_value, run_scan

__all__ = ["Check", "Reproduction", "FIGURES", "reproduce"]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "detail": self.detail}


@dataclass
class Reproduction:
    figure: str
    tables: dict = field(default_factory=dict)
    images: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"figure": self.figure, "checks": [c.as_dict() for c in self.checks]}


def _grid_for(n_max: int) -> tuple[int, int]:
    g = exact_grid(n_max + 1)
    return (g.n_theta, g.phi_count)


def _spec(n_list, b_list, t_ps, theta=(0.0,), pressure=0.0, mode=ADIABATIC, constants=None) -> ScanSpec:
    return ScanSpec(tuple(n_list), tuple(b_list), tuple(t_ps), tuple(theta), pressure, mode,
                    _grid_for(max(n_list)), constants=constants)


def fig2(constants=None, mode=ADIABATIC, workers=1) -> Reproduction:
    """Field sweep of the Raman directionality weights, N=71, t=1.14 ns."""
    b = [round(0.05 * k, 10) for k in range(21)]
    rows = run_scan(_spec([71], b, [1140], mode=mode, constants=constants), workers)
    rep = Reproduction("fig2")
    rep.tables["fig2_raman.csv"] = format_csv(rows, ("n", "b_tesla", "t_ns", "w_plus", "w_minus"))
    wm = np.array([r.w_minus for r in rows])
    wp = np.array([r.w_plus for r in rows])
    rep.checks.append(Check("w_minus vanishes at B=0", abs(wm[0]) < 1e-12, f"w_minus(0)={wm[0]:.3e}"))
    steps = np.diff(wm)
    rep.checks.append(Check("w_minus nondecreasing in B", bool(np.all(steps >= -1e-12)),
                            f"min step {steps.min():.3e}"))
    ratio = wm / wp
    worst = int(np.argmax(ratio))
    rep.checks.append(Check("anti-Stokes weight stays weak (w_minus/w_plus < 0.2)",
                            bool(np.all(ratio < 0.2)),
                            f"max ratio {ratio[worst]:.3g} at B={b[worst]} T"))
    return rep


def fig3b(constants=None, mode=ADIABATIC, workers=1) -> Reproduction:
    """Distributions at N=59, t=0.9 ns, B = 0 and 0.32 T, with per-J tilts."""
    c = constants or default_constants()
    n, t = 59, 0.9
    grid = exact_grid(n + 1)
    rep = Reproduction("fig3b")
    lines = ["b_tesla,j,tilt_rad,cos2_x,cos2_y,cos2_z,birefringence"]
    tilts = {}
    for b in (0.0, 0.32):
        packet = evolve(centrifuge_packet(n), t, manifold_spectrum(n, b, c), mode)
        mom = alignment_moments(angular_distribution(packet, grid))
        for j in (n - 1, n, n + 1):
            tilts[(b, j)] = principal_tilt(packet, j, grid)
            lines.append(",".join([format_value(b), str(j), format_value(tilts[(b, j)]),
                                   format_value(mom.cos2_x), format_value(mom.cos2_y),
                                   format_value(mom.cos2_z), format_value(birefringence_signal(mom))]))
        rep.images[f"fig3b_B{b:g}_view_z.pgm"] = project_image(packet, "z")
        if b == 0.0:
            rep.images["fig3b_B0_view_x.pgm"] = project_image(packet, "x")
        else:
            delta = birefringence_signal(mom)
    rep.tables["fig3b_tilts.csv"] = "\n".join(lines) + "\n"
    larmor = 2 * math.pi * c.zeeman_scale * 0.32 * t / (n + 1)
    lo, hi = tilts[(0.32, n - 1)], tilts[(0.32, n + 1)]
    rep.checks.append(Check("birefringence positive at 0.32 T", delta > 0, f"delta={delta:.4g}"))
    rep.checks.append(Check("J=N-1 and J=N+1 tilt in opposite senses", lo * hi < 0,
                            f"tilt(N-1)={lo:.4f} rad, tilt(N+1)={hi:.4f} rad"))
    ok = all(0.5 * larmor <= abs(x) <= 2 * larmor for x in (lo, hi))
    rep.checks.append(Check("tilt magnitudes within a factor 2 of the Larmor angle", ok,
                            f"Larmor estimate {larmor:.4f} rad"))
    return rep


def fig3c(constants=None, mode=ADIABATIC, workers=1) -> Reproduction:
    """Probe-angle scan at N=95, B=2 T, t=1.5 ns and a cos^2 fit."""
    thetas = [math.radians(5 * k) for k in range(37)]
    rows = run_scan(_spec([95], [2.0], [1500], thetas, mode=mode, constants=constants), workers)
    rep = Reproduction("fig3c")
    rep.tables["fig3c_probe.csv"] = format_csv(rows, ("n", "b_tesla", "t_ns", "theta_p", "probe_signal"))
    th = np.array([r.theta_p for r in rows])
    s = np.array([r.probe_signal for r in rows])
    s_perp = rows[18].probe_signal
    a, b, resid = fit_cos2(th, s - s_perp)
    rep.checks.append(Check("signal follows a + b cos^2(theta_p)", resid < 0.05 * abs(b),
                            f"a={a:.4g} b={b:.4g} max residual {resid:.3g} ({resid / abs(b):.2%} of b)"))
    return rep


def _first_peak_time(rows) -> float:
    sig = np.array([r.observed_signal for r in rows])
    return rows[int(np.argmax(sig))].t_ns


def fig4a(constants=None, mode=ADIABATIC, workers=1) -> Reproduction:
    """Time scans at B=2 T, P=0.3 atm for N = 13, 33, 73, 99."""
    ns = (13, 33, 73, 99)
    t_ps = list(range(0, 3001, 10))
    rep = Reproduction("fig4a")
    peaks = {}
    all_rows = []
    for n in ns:
        rows = run_scan(_spec([n], [2.0], t_ps, pressure=0.3, mode=mode, constants=constants), workers)
        all_rows.extend(rows)
        peaks[n] = _first_peak_time(rows)
    rep.tables["fig4a_time.csv"] = format_csv(all_rows, ("n", "b_tesla", "t_ns", "pressure_atm", "birefringence",
                                                         "envelope", "observed_signal"))
    rep.checks.append(Check("signal maximum later for N=73 than N=33", peaks[73] > peaks[33],
                            "peak times " + ", ".join(f"N={n}: {peaks[n]:.3f} ns" for n in ns)))
    efold = {n: collisional_envelope(n, 1.0, DECAY_TABLE.lifetime(n) / 1000.0) for n in DECAY_TABLE.entries}
    ok = all(abs(v - math.exp(-1)) < 1e-12 for v in efold.values())
    rep.checks.append(Check("envelopes e-fold at tabulated lifetimes", ok,
                            ", ".join(f"N={n}: {DECAY_TABLE.lifetime(n):g} ps*atm" for n in efold)))
    return rep


def fig4b(constants=None, mode=ADIABATIC, workers=1) -> Reproduction:
    """Field scans at t=1 ns (no collisions) for N = 33 and 95."""
    b = [round(0.05 * k, 10) for k in range(81)]
    rep = Reproduction("fig4b")
    rise = {}
    all_rows = []
    for n in (33, 95):
        rows = run_scan(_spec([n], b, [1000], mode=mode, constants=constants), workers)
        all_rows.extend(rows)
        sig = np.array([r.birefringence for r in rows])
        rise[n] = b[int(np.argmax(sig >= 0.8 * sig.max()))]
        if n == 33:
            at_zero = sig[0]
    rep.tables["fig4b_field.csv"] = format_csv(all_rows, ("n", "b_tesla", "t_ns", "birefringence"))
    rep.checks.append(Check("zero signal at zero field", at_zero == 0.0 or abs(at_zero) < 1e-12,
                            f"delta(0)={at_zero:.3e}"))
    rep.checks.append(Check("N=33 reaches 80% of its maximum at a weaker field than N=95",
                            rise[33] < rise[95], f"B80(N=33)={rise[33]} T, B80(N=95)={rise[95]} T"))
    return rep


FIGURES = {"fig2": fig2, "fig3b": fig3b, "fig3c": fig3c, "fig4a": fig4a, "fig4b": fig4b}


def reproduce(figure_id: str, constants: MolecularConstants | None = None, mode: str = ADIABATIC,
              workers: int = 1) -> Reproduction:
    try:
        recipe = FIGURES[figure_id]
    except KeyError:
        raise KeyError(f"unknown figure {figure_id!r}; valid ids: {', '.join(FIGURES)}") from None
    return recipe(constants=constants, mode=mode, workers=workers)
