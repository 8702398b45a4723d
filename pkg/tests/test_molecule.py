import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from o2sim.molecule import (
    ConfigError,
    MolecularConstants,
    allowed_j,
    block_basis,
    default_constants,
    fine_structure_energies,
    load_constants,
    manifold_spectrum,
    raman_shift,
    rigid_rotor_energy,
    spin_projection_coupled,
    zeeman_block,
)

from oracles import sz_uncoupled

C = default_constants()


# -- constants ---------------------------------------------------------------------

def test_bundled_constants():
    assert C.b0 == pytest.approx(43.100)
    assert C.spin == 1
    assert C.zeeman_scale == pytest.approx(2.0023 * 13.996)


def test_constants_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(C.to_dict()))
    assert load_constants(path) == C


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("g_s"),
    lambda d: d.update(extra=1.0),
    lambda d: d.update(b0_ghz="43"),
    lambda d: d.update(b0_ghz=True),
    lambda d: d.update(b0_ghz=-1.0),
    lambda d: d.update(mu_b_ghz_per_tesla=float("nan")),
])
def test_constants_validation(mutate):
    data = C.to_dict()
    mutate(data)
    with pytest.raises(ConfigError):
        MolecularConstants.from_dict(data)


def test_load_constants_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_constants(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_constants(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_constants(bad)


def test_spin_other_than_one_rejected():
    with pytest.raises(ValueError):
        MolecularConstants(43.1, 0.0, 1.0, 1.0, 2.0, 14.0, spin=2)


# -- rotor -------------------------------------------------------------------------

def test_rigid_rotor_values():
    assert rigid_rotor_energy(0) == 0.0
    assert rigid_rotor_energy(1) == pytest.approx(2 * C.b0 - 4 * C.d0)
    assert rigid_rotor_energy(1) == pytest.approx(86.199, abs=1e-3)
    x = 71 * 72
    assert rigid_rotor_energy(71) == pytest.approx(C.b0 * x - C.d0 * x * x, rel=1e-15)
    with pytest.raises(ValueError):
        rigid_rotor_energy(-1)


def test_raman_shift():
    assert raman_shift(0) == pytest.approx((6 * C.b0 - 36 * C.d0) / 1000)
    shifts = [raman_shift(n) for n in range(151)]
    assert all(b > a for a, b in zip(shifts, shifts[1:]))


# -- basis and S_z -------------------------------------------------------------------

def test_basis_bookkeeping():
    assert allowed_j(0) == (1,)
    assert allowed_j(5) == (4, 5, 6)
    assert block_basis(5, 2) == (4, 5, 6)
    assert block_basis(5, -5) == (5, 6)
    assert block_basis(5, 6) == (6,)
    with pytest.raises(ValueError):
        block_basis(5, 7)


def test_sz_projection_theorem_examples():
    assert spin_projection_coupled(59, 60, 60, 30) == pytest.approx(0.5, abs=1e-13)
    assert spin_projection_coupled(59, 58, 58, 30) == pytest.approx(-30 / 59, abs=1e-13)
    assert spin_projection_coupled(59, 59, 59, 30) == pytest.approx(30 / (59 * 60), abs=1e-13)
    assert spin_projection_coupled(5, 5, 6, 2) == pytest.approx(sz_uncoupled(5, 5, 6, 2), abs=1e-13)


def test_sz_invalid_j_raises():
    with pytest.raises(ValueError):
        spin_projection_coupled(5, 3, 5, 0)
    with pytest.raises(ValueError):
        spin_projection_coupled(5, 5, 5, 6)


@pytest.mark.parametrize("n", [1, 5, 33, 59])
def test_sz_matches_uncoupled_oracle(n):
    js = allowed_j(n)
    worst = 0.0
    for m in range(-(n + 1), n + 2):
        for jr in js:
            for jc in js:
                if abs(m) > min(jr, jc):
                    continue
                worst = max(worst, abs(spin_projection_coupled(n, jr, jc, m) - sz_uncoupled(n, jr, jc, m)))
    assert worst < 1e-12


# -- fine structure -----------------------------------------------------------------

def test_n_dot_s_part():
    no_ss = MolecularConstants(C.b0, C.d0, 0.0, 1.0, C.g_s, C.mu_b)
    fs = fine_structure_energies(59, no_ss)
    assert fs[60] == pytest.approx(59)
    assert fs[59] == pytest.approx(-1)
    assert fs[58] == pytest.approx(-60)


def test_spin_spin_part():
    n = 59
    no_sr = MolecularConstants(C.b0, C.d0, 3.0, 0.0, C.g_s, C.mu_b)  # 2 lambda / 3 = 2
    fs = fine_structure_energies(n, no_sr)
    assert fs[n + 1] == pytest.approx(-2 * n / (2 * n + 3))
    assert fs[n] == pytest.approx(2.0)
    assert fs[n - 1] == pytest.approx(-2 * (n + 1) / (2 * n - 1))


def test_n_zero_manifold():
    fs = fine_structure_energies(0)
    assert dict(fs.e_by_j) == {1: pytest.approx(0.0)}


def test_fine_structure_is_read_only():
    fs = fine_structure_energies(3)
    with pytest.raises(TypeError):
        fs.e_by_j[2] = 0.0


# -- Zeeman blocks ----------------------------------------------------------------------

def test_zero_field_block_is_diagonal():
    fs = fine_structure_energies(7)
    h = zeeman_block(7, 3, 0.0)
    np.testing.assert_array_equal(h, np.diag([fs[6], fs[7], fs[8]]))


def test_block_symmetric_and_sized():
    h = zeeman_block(59, 12, 0.32)
    assert np.array_equal(h, h.T)
    assert zeeman_block(59, 58, 1.0).shape == (3, 3)
    assert zeeman_block(59, 59, 1.0).shape == (2, 2)
    assert zeeman_block(59, -60, 1.0).shape == (1, 1)
    with pytest.raises(ValueError):
        zeeman_block(59, 61, 1.0)


def test_block_offdiagonals_match_oracle():
    n, b = 5, 0.7
    for m in range(-(n + 1), n + 2):
        js = block_basis(n, m)
        h = zeeman_block(n, m, b)
        for a, ja in enumerate(js):
            for k, jb in enumerate(js):
                if a != k:
                    expect = C.zeeman_scale * b * sz_uncoupled(n, ja, jb, m)
                    assert h[a, k] == pytest.approx(expect, abs=1e-12)


# -- spectra -------------------------------------------------------------------------------

def test_level_count_and_degeneracy():
    spec = manifold_spectrum(59, 0.0)
    assert len(spec) == 357
    fs = fine_structure_energies(59)
    for j, m, e in spec.levels():
        assert abs(e - fs[j]) <= 1e-12


def test_levels_sorted():
    levels = manifold_spectrum(4, 0.5).levels()
    keys = [(j, m) for j, m, _ in levels]
    assert keys == sorted(keys)
    assert len(levels) == 6 * 4 + 3


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 101), b=st.floats(0.0, 4.0))
def test_eigensystem_sanity(n, b):
    spec = manifold_spectrum(n, b)
    for blk in spec.blocks.values():
        d = len(blk.basis_j)
        np.testing.assert_allclose(blk.vectors.T @ blk.vectors, np.eye(d), atol=1e-12)
        trace = np.trace(blk.matrix)
        assert blk.energies.sum() == pytest.approx(trace, rel=1e-10, abs=1e-10)
        np.testing.assert_allclose(blk.matrix @ blk.vectors, blk.vectors * blk.energies, atol=1e-9)


@pytest.mark.parametrize("n", [11, 33, 59, 101])
def test_first_order_zeeman_slopes(n):
    # the central difference keeps the odd part of E(B); for J=N the even
    # second-order term would otherwise swamp the tiny first-order slope
    b = 0.005
    plus = manifold_spectrum(n, b)
    minus = manifold_spectrum(n, -b)
    for m in (1, n // 2, n - 1):
        expect = {n + 1: m / (n + 1), n: m / (n * (n + 1)), n - 1: -m / n}
        for j, proj in expect.items():
            slope = (plus.energy(j, m) - minus.energy(j, m)) / (2 * b)
            assert slope == pytest.approx(C.zeeman_scale * proj, rel=0.01)


def test_small_field_slope_of_stretched_level():
    h = 1e-3
    slope = (manifold_spectrum(59, h).energy(60, 30) - manifold_spectrum(59, -h).energy(60, 30)) / (2 * h)
    assert slope == pytest.approx(C.zeeman_scale * 30 / 60, rel=0.01)


def test_slope_bends_by_a_third_of_a_tesla():
    # by 0.32 T second-order repulsion from J=N has lowered the J=N+1 slope well below first order
    h = 1e-4
    slope = (manifold_spectrum(59, 0.32 + h).energy(60, 30)
             - manifold_spectrum(59, 0.32 - h).energy(60, 30)) / (2 * h)
    assert slope < 0.9 * C.zeeman_scale * 30 / 60


def test_field_reversal_mirrors_m():
    a = manifold_spectrum(17, 1.3)
    b = manifold_spectrum(17, -1.3)
    assert len(a) == len(b)
    for j, m, e in a.levels():
        assert b.energy(j, -m) == pytest.approx(e, abs=1e-12)


def test_labels_track_dominant_component():
    spec = manifold_spectrum(59, 0.32)
    for blk in spec.blocks.values():
        diag = np.abs(np.diag(blk.vectors))
        assert np.all(diag > 0.9)
        assert np.all(np.diag(blk.vectors) > 0)


def test_zero_field_spectrum_uses_fine_structure():
    spec = manifold_spectrum(1, 0.0)
    fs = fine_structure_energies(1)
    assert spec.energy(0, 0) == fs[0]
    assert math.isclose(spec.energy(2, -2), fs[2])
