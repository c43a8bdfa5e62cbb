from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pinchlab.errors import (
    ContourAmbiguous,
    DegenerateSamples,
    NonConvergent,
    NotPositiveDefinite,
    PoleAtPoint,
)
from pinchlab.oracle import (
    OracleConfig,
    bubble_direct,
    bubble_numeric,
    bubble_scan,
    bubble_threshold,
    fit_log,
    fit_slope,
    morse_integral,
    morse_scan,
    morse_singular_part,
    qed_reduced_numeric,
    random_spd,
    residue_kernel,
    residue_kernel_exact,
)

GRID = list(np.geomspace(1e-1, 1e-4, 9))


# -- residue kernel ---------------------------------------------------------

def test_residue_unit_poles():
    assert residue_kernel(1, -1, contour_radius=1.0) == pytest.approx(math.pi * 1j, rel=1e-10)


def test_residue_coincident():
    with pytest.raises(ContourAmbiguous):
        residue_kernel(0.5 + 1j, 0.5 + 1j)


def test_residue_offset_pair():
    xi, eta = 2 + 1j, -3
    got = residue_kernel(xi, eta, n_points=512)
    assert abs(got - 2j * math.pi / (xi - eta)) <= 1e-8 * abs(2j * math.pi / (xi - eta))


def test_residue_contour_must_separate():
    with pytest.raises(ContourAmbiguous):
        residue_kernel(1, -1, contour_radius=3.0)


@given(st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
@settings(max_examples=40, deadline=None)
def test_trapezoidal_rate(xi, eta):
    """Doubling the node count cuts the error at least fourfold until round-off."""
    if abs(xi - eta) < 0.5:
        return
    exact = residue_kernel_exact(xi, eta)
    e1 = abs(residue_kernel(xi, eta, n_points=8) - exact)
    e2 = abs(residue_kernel(xi, eta, n_points=16) - exact)
    assert e2 <= e1 / 4 or e2 < 1e-12 * abs(exact)


# -- Morse integral ---------------------------------------------------------

def test_morse_n3_identity():
    scan = morse_scan(np.eye(3), GRID)
    assert abs(scan.fit.slope - 0.5) <= 0.02
    # the fitted coefficient follows pi^(3/2) Gamma(-1/2); the sphere area 4 pi differs by -pi/2
    assert scan.coefficient == pytest.approx(scan.exact_coefficient, rel=0.02)
    assert scan.stated_coefficient == pytest.approx(4 * math.pi)


def test_morse_n2_is_logarithmic():
    scan = morse_scan(np.eye(2), GRID)
    assert scan.power_fit.r_squared < 0.999
    assert scan.fit.accepted()
    # K = pi log(1 + 1/eps): slope -pi in log eps, up to the O(eps) tail
    assert scan.coefficient == pytest.approx(-math.pi, rel=0.02)


def test_morse_n1_closed_form():
    """int dy / (eps + 4 y^2) over 2|y| <= R equals atan(R / sqrt(eps)) / sqrt(eps)."""
    eps, R = 0.01, 1.0
    assert morse_integral([[4.0]], eps, R) == pytest.approx(math.atan(R / math.sqrt(eps)) / math.sqrt(eps), rel=1e-10)
    # singular part pi / (2 sqrt(eps)) = 15.71..., against the stated V_0 eps^(-1/2) / 2 = 10
    assert morse_singular_part([[4.0]], eps, R) == pytest.approx(math.pi / (2 * math.sqrt(eps)), rel=1e-12)


def test_morse_against_brute_force_2d():
    Q = np.array([[2.0, 0.3], [0.3, 1.0]])
    eps = 0.3
    w = np.linalg.eigvalsh(Q)

    def f(r, phi):
        return r / (eps + r * r)

    # whitened coordinates map the ellipsoid onto the unit disk
    val, _ = integrate.dblquad(f, 0, 2 * math.pi, 0, 1.0)
    assert morse_integral(Q, eps) == pytest.approx(val / math.sqrt(np.prod(w)), rel=1e-8)


def test_morse_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        morse_integral([[1.0, 2.0], [2.0, 1.0]], 0.1)


def test_regular_series_range():
    with pytest.raises(NonConvergent):
        morse_singular_part(np.eye(3), 0.5)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=10, deadline=None)
def test_morse_slope_random_forms(seed):
    rng = np.random.default_rng(seed)
    Q = random_spd(3, rng)
    assert abs(morse_scan(Q, GRID).fit.slope - 0.5) <= 0.02


# -- fits -------------------------------------------------------------------

def test_fit_exact_power():
    f = fit_slope([(e, e**2) for e in GRID])
    assert abs(f.slope - 2) < 1e-9 and f.r_squared == pytest.approx(1.0)


def test_fit_constant():
    assert abs(fit_slope([(e, 3.0) for e in GRID]).slope) < 1e-9


def test_fit_corrected_power():
    grid = list(np.geomspace(1e-2, 1e-4, 7))
    assert abs(fit_slope([(e, e**0.5 * (1 + 0.1 * e)) for e in grid]).slope - 0.5) <= 0.01


def test_fit_log():
    lf = fit_log([(e, 2 - 3 * math.log(e)) for e in GRID])
    assert lf.b == pytest.approx(-3) and lf.accepted()


@pytest.mark.parametrize(
    "samples",
    [
        [(1e-1, 1), (1e-2, 1), (1e-3, 1), (1e-4, 1)],
        [(e, 1) for e in np.geomspace(1e-1, 2e-3, 6)],
        [(e, 1) for e in np.geomspace(1e-4, 1e-1, 6)],
        [(e, 0.0) for e in GRID],
    ],
)
def test_fit_degenerate(samples):
    with pytest.raises(DegenerateSamples):
        fit_slope(samples)


# -- bubble -----------------------------------------------------------------

def test_bubble_pole_at_zero():
    with pytest.raises(PoleAtPoint):
        bubble_numeric(0, 1, 1, 3)


def test_bubble_reduced_nonconvergent_at_d5():
    with pytest.raises(NonConvergent):
        bubble_numeric(-1 + 0.5j, 1, 1, 5, path="reduced")


def test_bubble_paths_agree_d3():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m0, m1 = rng.uniform(0.3, 2.0, 2) ** 2
        s = complex(rng.uniform(-6, 6), rng.uniform(0.2, 3.0))
        a = bubble_numeric(s, m0, m1, 3, "direct")
        b = bubble_numeric(s, m0, m1, 3, "reduced")
        assert abs(a - b) <= 1e-3 * abs(a)


def test_bubble_d3_closed_form():
    """Equal masses at d = 3: (2 pi^2 / sqrt(s)) atan(sqrt(s) / (2 m))."""
    s, m = 2.0, 1.0
    closed = 2 * math.pi**2 / math.sqrt(s) * math.atan(math.sqrt(s) / (2 * m))
    assert bubble_direct(s, m, m, 3) == pytest.approx(closed, rel=1e-9)


def test_bubble_threshold_scans():
    assert bubble_threshold(1, 1) == -4
    d5 = bubble_scan(1, 1, 5, GRID)
    assert d5.passed(0.05) and abs(d5.fit.slope - 1) <= 0.05
    d3 = bubble_scan(1, 1, 3, GRID)
    assert d3.logarithmic and d3.passed()


def test_bubble_approach_direction_flag():
    a = bubble_scan(1, 1, 5, GRID, theta=math.pi / 2)
    b = bubble_scan(1, 1, 5, GRID, theta=math.pi / 3)
    assert a.passed() and b.passed()
    assert a.values[0][1] != b.values[0][1]


# -- QED reduced integral ---------------------------------------------------

def test_qed_rejects_zero():
    with pytest.raises(ValueError):
        qed_reduced_numeric(0.0, samples=1000, check=False)
    with pytest.raises(ValueError):
        qed_reduced_numeric(0.1, d=4, samples=1000, check=False)


def test_qed_halving_doubles():
    a = qed_reduced_numeric(0.02, samples=20_000, seed=4, check=False)
    b = qed_reduced_numeric(0.01, samples=20_000, seed=4, check=False)
    assert b.value == pytest.approx(2 * a.value, rel=1e-12)


def test_qed_reproducible():
    a = qed_reduced_numeric(0.05, samples=50_000, seed=11, block_size=7_000, check=False)
    b = qed_reduced_numeric(0.05, samples=50_000, seed=11, block_size=7_000, check=False)
    assert a.value == b.value and a.stderr == b.stderr
    c = qed_reduced_numeric(0.05, samples=50_000, seed=12, block_size=7_000, check=False)
    assert c.value != a.value


def test_config_grid():
    cfg = OracleConfig(eps_min=1e-3, eps_max=1e-1, n_eps=5)
    g = cfg.eps_grid()
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(1e-3) and len(g) == 5
    assert cmath.isclose(cfg.to_dict()["theta"], math.pi / 2)
