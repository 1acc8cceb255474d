"""Winding numbers of sampled closed curves, out/inn sets, essentiality.

The winding number about p is the total continuous argument change of
gamma(t) - p over one traversal, divided by 2*pi.  Per-edge principal
argument increments are summed after adaptive resampling has driven every
increment below pi/2, so the rounded sum is provably the true integer.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .charts import Chart

MAX_SAMPLES = 2 ** 20
MAX_REFINE_ROUNDS = 64
SNAP_TOL = 0.05
EDGE_CAP = 0.5 * math.pi


class CurveError(Exception):
    pass


class PointOnCurve(CurveError):
    """Query point is (numerically) on the curve."""


class NonIntegralWinding(CurveError):
    """Argument sum refused to settle on an integer within the sample cap."""


class InnOut(Enum):
    INN = "inn"
    OUT = "out"


@dataclass(frozen=True)
class SampledCurve:
    """Closed polyline in a fixed chart; optionally carries its parameterization.

    When ``param_fn`` is present, adaptive refinement inserts parameter
    midpoints and re-evaluates the underlying curve; otherwise refinement
    bisects chords, which leaves the polyline geometry unchanged.
    """

    points: tuple[complex, ...]
    chart: Chart = Chart.NORTH
    param_fn: Callable[[float], complex] | None = None
    params: tuple[float, ...] | None = None

    def __post_init__(self):
        pts = [complex(z) for z in self.points]
        pars = list(self.params) if self.params is not None else [
            i / len(pts) for i in range(len(pts))
        ]
        if len(pars) != len(pts):
            raise ValueError("params must match points")
        keep_p, keep_t = [], []
        for z, t in zip(pts, pars):
            if not keep_p or z != keep_p[-1]:
                keep_p.append(z)
                keep_t.append(t)
        while len(keep_p) > 1 and keep_p[-1] == keep_p[0]:
            keep_p.pop()
            keep_t.pop()
        if len(keep_p) < 8:
            raise ValueError("a sampled curve needs at least 8 distinct samples")
        object.__setattr__(self, "points", tuple(keep_p))
        object.__setattr__(self, "params", tuple(keep_t))

    def point_at(self, t: float) -> complex:
        """Curve position at parameter t (mod 1)."""
        if self.param_fn is not None:
            return self.param_fn(t % 1.0)
        ts = self.params + (self.params[0] + 1.0,)
        zs = self.points + (self.points[0],)
        t = t % 1.0
        if t < ts[0]:
            t += 1.0
        for i in range(len(zs) - 1):
            if ts[i] <= t <= ts[i + 1]:
                span = ts[i + 1] - ts[i]
                lam = 0.0 if span == 0 else (t - ts[i]) / span
                return zs[i] + lam * (zs[i + 1] - zs[i])
        return zs[0]

    def reversed(self) -> "SampledCurve":
        return SampledCurve(tuple(reversed(self.points)), self.chart)


def circle(center: complex, radius: float, samples: int = 64,
           chart: Chart = Chart.NORTH) -> SampledCurve:
    if radius <= 0:
        raise ValueError("radius must be positive")
    ts = [i / samples for i in range(samples)]
    pts = [center + radius * cmath.exp(2j * math.pi * t) for t in ts]
    fn = lambda t: center + radius * cmath.exp(2j * math.pi * t)
    return SampledCurve(tuple(pts), chart, param_fn=fn, params=tuple(ts))


def latitude_circle(s: float, samples: int = 256) -> SampledCurve:
    """North-chart circle at log-latitude s (|z| = e^s)."""
    return circle(0j, math.exp(s), samples)


def concatenate(a: SampledCurve, b: SampledCurve) -> SampledCurve:
    if a.chart is not b.chart:
        raise ValueError("curves live in different charts")
    return SampledCurve(a.points + b.points, a.chart)


def curve_diameter(points: Sequence[complex]) -> float:
    zs = np.asarray(points, dtype=complex)
    center = zs.mean()
    return 2.0 * float(np.abs(zs - center).max())


def winding_number(curve: SampledCurve, p: complex) -> int:
    """Integer winding number of the closed curve about p."""
    z = np.asarray(curve.points, dtype=complex)
    t = np.asarray(curve.params, dtype=float)
    z = np.append(z, z[0])
    t = np.append(t, t[0] + 1.0)
    diam = curve_diameter(curve.points)
    min_ok = 1e-9 * diam
    if np.abs(z - p).min() <= min_ok:
        raise PointOnCurve(f"query point within {min_ok:.3g} of a sample")
    fn = curve.param_fn
    rounds = 0
    while True:
        rel = z - p
        inc = np.angle(rel[1:] / rel[:-1])
        bad = np.abs(inc) >= EDGE_CAP
        if not bad.any():
            break
        rounds += 1
        idx = np.nonzero(bad)[0]
        if z.size + idx.size > MAX_SAMPLES or rounds > MAX_REFINE_ROUNDS:
            # a persistently bad edge after 64 halvings spans a parameter
            # interval below 1e-19: the curve jumps, refuse to guess
            raise NonIntegralWinding(
                f"edge increments still >= pi/2 after {rounds - 1} refinement "
                f"rounds ({z.size} samples)"
            )
        tm = 0.5 * (t[idx] + t[idx + 1])
        if fn is not None:
            zm = np.array([fn(x % 1.0) for x in tm], dtype=complex)
        else:
            zm = 0.5 * (z[idx] + z[idx + 1])
        if np.abs(zm - p).size and np.abs(zm - p).min() <= min_ok:
            raise PointOnCurve("refinement landed on the query point")
        z = np.insert(z, idx + 1, zm)
        t = np.insert(t, idx + 1, tm)
    total = float(inc.sum()) / (2.0 * math.pi)
    nearest = round(total)
    if abs(total - nearest) > SNAP_TOL:
        raise NonIntegralWinding(f"argument sum {total:.6f} is not near an integer")
    return int(nearest)


def classify(curve: SampledCurve, p: complex) -> InnOut:
    """p is Out when the curve does not wind around it."""
    return InnOut.OUT if winding_number(curve, p) == 0 else InnOut.INN


def is_essential(curve: SampledCurve) -> bool:
    """Does the curve separate the poles of the annulus?

    The curve must be given in the north chart (S at the origin); a circle
    is essential exactly when it winds around the S coordinate.
    """
    if curve.chart is not Chart.NORTH:
        raise ValueError("essentiality is checked in north-chart coordinates")
    return winding_number(curve, 0j) != 0


# ---------------------------------------------------------------------------
# Curve fixture format: CSV rows re,im with a '# chart=north' comment header
# ---------------------------------------------------------------------------


def dump_curve_csv(curve: SampledCurve) -> str:
    lines = [f"# chart={curve.chart.value}"]
    lines += [f"{z.real:.12g},{z.imag:.12g}" for z in curve.points]
    return "\n".join(lines) + "\n"


def load_curve_csv(text: str) -> SampledCurve:
    chart = Chart.NORTH
    pts: list[complex] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("chart="):
                name = body.split("=", 1)[1].strip()
                try:
                    chart = Chart(name)
                except ValueError as exc:
                    raise ValueError(f"unknown chart {name!r}") from exc
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise ValueError(f"curve row {line!r} is not re,im")
        pts.append(complex(float(cells[0]), float(cells[1])))
    return SampledCurve(tuple(pts), chart)
