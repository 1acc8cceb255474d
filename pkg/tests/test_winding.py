"""Winding numbers, inn/out classification, essentiality, curve fixtures."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphere_census.charts import Chart
from sphere_census.winding import (
    InnOut,
    NonIntegralWinding,
    PointOnCurve,
    SampledCurve,
    circle,
    classify,
    concatenate,
    dump_curve_csv,
    is_essential,
    latitude_circle,
    load_curve_csv,
    winding_number,
)


def analytic_winding(fn, p, samples=20000):
    """Oracle: continuous argument sum of an analytic parameterization."""
    ts = np.linspace(0.0, 1.0, samples, endpoint=True)
    zs = np.array([fn(t) for t in ts]) - p
    total = np.unwrap(np.angle(zs))
    return (total[-1] - total[0]) / (2 * math.pi)


def test_unit_circle_examples():
    c = circle(0j, 1.0, 64)
    assert winding_number(c, 0j) == 1
    assert winding_number(c, 3 + 0j) == 0


def test_doubled_sample_list_winds_twice():
    pts = tuple(cmath.exp(2j * math.pi * k / 64) for k in range(64))
    doubled = SampledCurve(pts + pts)
    assert winding_number(doubled, 0j) == 2


def test_classify_examples():
    c = circle(0j, 1.0, 64)
    assert classify(c, 0j) is InnOut.INN
    assert classify(c, 3 + 0j) is InnOut.OUT


def test_figure_eight_cancels():
    # circle traversed once each way; the oracle is the exact argument sum
    fwd = circle(0j, 1.0, 64)
    back = fwd.reversed()
    both = concatenate(fwd, back)

    def param(t):
        return cmath.exp(2j * math.pi * t) if t < 0.5 else cmath.exp(-2j * math.pi * t)

    oracle = analytic_winding(param, 0j)
    assert round(oracle) == 0
    assert classify(both, 0j) is InnOut.OUT


def test_winding_matches_analytic_oracle_for_offsets():
    c = circle(0.5 + 0.5j, 1.2, 64)
    for p in (0.5 + 0.5j, 0j, 1.5 + 0.4j, 3 + 3j):
        oracle = round(analytic_winding(lambda t: 0.5 + 0.5j + 1.2 * cmath.exp(2j * math.pi * t), p))
        assert winding_number(c, p) == oracle


def test_point_on_curve_raises():
    c = circle(0j, 1.0, 64)
    with pytest.raises(PointOnCurve):
        winding_number(c, 1 + 0j)


def test_non_integral_winding_raises_on_discontinuous_parameterization():
    # the curve teleports between two far circles; seen from a point between
    # them, the jump edge never refines below the per-edge cap
    def jump(t):
        base = cmath.exp(2j * math.pi * t)
        return base + (25.0 if t >= 0.5 else 0.0)

    ts = tuple(i / 64 for i in range(64))
    curve = SampledCurve(tuple(jump(t) for t in ts), param_fn=jump, params=ts)
    with pytest.raises(NonIntegralWinding):
        winding_number(curve, 12.0 + 0j)


def test_adaptive_refinement_handles_sparse_circle():
    # 8 samples of a circle about a point near the boundary: per-edge
    # increments start above pi/2 and must be refined away
    fn = lambda t: cmath.exp(2j * math.pi * t)
    ts = tuple(i / 8 for i in range(8))
    sparse = SampledCurve(tuple(fn(t) for t in ts), param_fn=fn, params=ts)
    assert winding_number(sparse, 0.8 + 0j) == 1
    assert winding_number(sparse, 1.2 + 0j) == 0


def test_additivity_on_shared_basepoint_loops():
    rng = np.random.default_rng(12)
    for _ in range(25):
        base = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))

        def loop():
            n = int(rng.integers(10, 20))
            center = base + complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
            pts = [base] + [
                center + rng.uniform(0.3, 1.0) * cmath.exp(2j * math.pi * i / n)
                for i in range(1, n)
            ]
            return SampledCurve(tuple(pts))

        a, b = loop(), loop()
        both = concatenate(a, b)
        p = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if min(abs(z - p) for z in both.points) < 0.05:
            continue
        assert winding_number(both, p) == winding_number(a, p) + winding_number(b, p)


@settings(max_examples=50)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_perturbation_stability(seed):
    rng = np.random.default_rng(seed)
    c = circle(0j, 1.0, 32)
    p = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
    dist = min(abs(z - p) for z in c.points)
    if dist < 1e-3:
        return
    w0 = winding_number(c, p)
    jittered = tuple(
        z + 0.007 * dist * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        for z in c.points
    )
    assert winding_number(SampledCurve(jittered), p) == w0


def test_sign_flips_under_chart_swap():
    # the same sphere circle seen from the other pole winds the other way
    north = circle(0j, 2.0, 64)
    south_pts = tuple(1.0 / z for z in north.points)
    south = SampledCurve(south_pts, Chart.SOUTH)
    assert winding_number(north, 0j) == -winding_number(south, 0j)


def test_is_essential_examples():
    assert is_essential(circle(0j, 1.0, 64)) is True
    assert is_essential(circle(1 + 0j, 0.1, 64)) is False
    assert is_essential(latitude_circle(0.5)) is True


def test_is_essential_requires_north_chart():
    with pytest.raises(ValueError):
        is_essential(circle(0j, 1.0, 64, chart=Chart.SOUTH))


def test_curve_constructor_cleans_degenerate_edges():
    pts = (1 + 0j, 1 + 0j, 1j, -1 + 0j, -1j, 0.5 + 0.5j, -0.5 + 0.5j, -0.5 - 0.5j, 0.5 - 0.5j, 1 + 0j)
    c = SampledCurve(pts)
    assert c.points[0] != c.points[-1]
    assert all(a != b for a, b in zip(c.points, c.points[1:]))
    with pytest.raises(ValueError):
        SampledCurve((1 + 0j, 2 + 0j, 3 + 0j))  # too few samples


def test_curve_csv_round_trip(tmp_path):
    c = circle(0.2 + 0.1j, 0.7, 16)
    text = dump_curve_csv(c)
    assert text.startswith("# chart=north")
    back = load_curve_csv(text)
    assert back.chart is Chart.NORTH
    assert np.allclose(back.points, c.points)
