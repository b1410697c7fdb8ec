import math

import numpy as np
import pytest

from seglab.boundary import (
    boundary_thetas,
    make_preset,
    validate_partial_segregation,
)
from seglab.grid import disk_grid, square_grid


def test_symmetric_sine_values_at_pi_over_3():
    theta = np.array([math.pi / 3])
    from seglab.boundary import _symmetric_sine

    v = _symmetric_sine(theta, 3)
    s = math.sqrt(2) / 2
    assert v[0, 0] == pytest.approx(s, abs=1e-15)
    assert v[1, 0] == 0.0
    assert v[2, 0] == pytest.approx(s, abs=1e-15)
    assert v[0, 0] * v[1, 0] * v[2, 0] == 0.0


def test_symmetric_sine_one_component_vanishes_everywhere():
    for g in (square_grid(65), disk_grid(65)):
        t = make_preset("symmetric_sine", g)
        assert (t.values.min(axis=0) == 0.0).all()
        cert = validate_partial_segregation(t, seg_tol=0.0)
        assert cert.passed and cert.max_product == 0.0


def test_halfcap_values():
    g = disk_grid(65)
    t = make_preset("halfcap", g, c=1.0)
    k = int(np.argmin(np.abs(t.thetas)))  # node nearest theta = 0
    th = t.thetas[k]
    assert t.values[0, k] == pytest.approx(math.cos(th), abs=1e-12)
    assert t.values[1, k] == 0.0
    assert t.values[2, k] == 1.0
    assert validate_partial_segregation(t).passed


def test_two_phase_product_zero():
    g = square_grid(33)
    t = make_preset("two_phase", g, psi1=1.0, psi2=1.0)
    assert (t.values[2] == 0.0).all()
    assert validate_partial_segregation(t).passed


def test_constant_ones_triplet_fails():
    g = square_grid(17)
    t = make_preset("two_phase", g)
    t.values[:] = 1.0
    cert = validate_partial_segregation(t, seg_tol=0.0)
    assert not cert.passed
    assert cert.max_product == 1.0


def test_all_zero_triplet_passes():
    g = square_grid(17)
    t = make_preset("two_phase", g, psi1=0.0, psi2=0.0)
    t.values[:] = 0.0
    cert = validate_partial_segregation(t)
    assert cert.passed and cert.max_product == 0.0


def test_unknown_preset_lists_valid_names():
    g = square_grid(17)
    with pytest.raises(ValueError, match="symmetric_sine"):
        make_preset("nope", g)


def test_values_bounded_and_theta_lipschitz():
    theta = np.linspace(0, 2 * math.pi, 20001, endpoint=False)
    from seglab.boundary import _symmetric_sine

    v = _symmetric_sine(theta, 3)
    assert v.min() >= 0.0 and v.max() <= 1.0
    # slope 3/4 in theta away from support endpoints
    dv = np.abs(np.diff(v, axis=1)) / (theta[1] - theta[0])
    assert dv.max() <= 1.0 + 1e-6


def test_square_perimeter_parametrization():
    g = square_grid(9)
    nodes, theta = boundary_thetas(g)
    # all thetas distinct and in [0, 2pi)
    assert len(np.unique(np.round(theta, 12))) == len(theta)
    assert theta.min() >= 0.0 and theta.max() < 2 * math.pi
    # lower-left corner maps to theta = 0
    k = int(np.argmin(theta))
    assert tuple(nodes[k]) == (0, 0)


def test_custom_csv_roundtrip(tmp_path):
    path = tmp_path / "trace.csv"
    ths = np.linspace(0, 2 * math.pi, 100, endpoint=False)
    with open(path, "w") as fh:
        fh.write("theta,psi1,psi2,psi3\n")
        for th in ths:
            fh.write(f"{th},{max(math.cos(th), 0.0)},{max(-math.cos(th), 0.0)},0\n")
    g = disk_grid(65)
    t = make_preset("custom", g, path=str(path))
    cert = validate_partial_segregation(t, seg_tol=1e-12)
    assert cert.passed
    ref = make_preset("halfcap", g, c=1.0)
    assert np.allclose(t.values[0], ref.values[0], atol=1e-3)


def test_custom_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c,d\n0,0,0,0\n1,0,0,0\n")
    with pytest.raises(ValueError, match="header"):
        make_preset("custom", square_grid(17), path=str(path))
