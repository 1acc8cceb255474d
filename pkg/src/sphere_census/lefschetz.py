"""Lefschetz index along closed curves and rectangle-boundary certificates.

The index of a map f along gamma is the winding number of the displacement
field x -> f(gamma(x)) - gamma(x) about the origin; when it is nonzero a
fixed point exists in the region the curve bounds.  The four canonical
boundary-behavior patterns on an axis-aligned rectangle certify the index
(+1 for fully expanding or fully contracting sides, -1 for the two mixed
saddle patterns), and the numeric integrator is checked against each
certificate rather than trusted.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .charts import MapSpec, as_plane_map
from .winding import (
    PointOnCurve,
    SampledCurve,
    curve_diameter,
    winding_number,
)

PlaneMap = Callable[[complex], complex]


class FixedPointOnCurve(Exception):
    """The displacement field vanishes (numerically) on the curve."""


class CertificateIndexMismatch(Exception):
    """A certified rectangle disagreed with the numeric index: integrator bug."""


def _plane(f: Union[MapSpec, PlaneMap]) -> PlaneMap:
    return f if callable(f) else as_plane_map(f)


def displacement_curve(f: Union[MapSpec, PlaneMap], curve: SampledCurve) -> SampledCurve:
    """The closed curve t -> f(gamma(t)) - gamma(t), refinable via gamma."""
    fn = _plane(f)

    def disp(t: float) -> complex:
        z = curve.point_at(t)
        return fn(z) - z

    pts = tuple(fn(z) - z for z in curve.points)
    return SampledCurve(pts, curve.chart, param_fn=disp, params=curve.params)


def lefschetz_index(f: Union[MapSpec, PlaneMap], curve: SampledCurve) -> int:
    """Winding of the displacement field of f along the curve, about 0."""
    fn = _plane(f)
    diam = curve_diameter(curve.points)
    disp = [fn(z) - z for z in curve.points]
    low = min(abs(d) for d in disp)
    if low <= 1e-7 * diam:
        raise FixedPointOnCurve(f"min displacement {low:.3g} on a curve of size {diam:.3g}")
    if max(abs(d - disp[0]) for d in disp) < 1e-12 * max(1.0, abs(disp[0])):
        # constant on the sample grid; a few off-grid probes distinguish a
        # genuinely constant field (winding 0) from aliased sampling
        probes = [fn(curve.point_at(t)) - curve.point_at(t)
                  for t in (0.1137, 0.4711, 0.7893)]
        if all(abs(d - disp[0]) < 1e-12 * max(1.0, abs(disp[0])) for d in probes):
            return 0
    try:
        return winding_number(displacement_curve(fn, curve), 0j)
    except PointOnCurve as exc:
        raise FixedPointOnCurve(str(exc)) from exc


# ---------------------------------------------------------------------------
# Rectangle certificates
# ---------------------------------------------------------------------------

BOUNDARY_MARGIN = 1e-9


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("degenerate rectangle")

    def scaled(self, factor: float) -> "Rect":
        cx, cy = 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)
        hx, hy = 0.5 * factor * (self.x1 - self.x0), 0.5 * factor * (self.y1 - self.y0)
        return Rect(cx - hx, cx + hx, cy - hy, cy + hy)

    def contains(self, z: complex) -> bool:
        return self.x0 < z.real < self.x1 and self.y0 < z.imag < self.y1


def boundary_curve(rect: Rect, samples_per_side: int = 64) -> SampledCurve:
    """Positively oriented (counterclockwise) rectangle boundary."""
    corners = [
        complex(rect.x0, rect.y0),
        complex(rect.x1, rect.y0),
        complex(rect.x1, rect.y1),
        complex(rect.x0, rect.y1),
    ]

    def at(t: float) -> complex:
        t = t % 1.0
        leg, frac = divmod(t * 4.0, 1.0)
        a = corners[int(leg) % 4]
        b = corners[(int(leg) + 1) % 4]
        return a + frac * (b - a)

    n = 4 * samples_per_side
    ts = [i / n for i in range(n)]
    return SampledCurve(tuple(at(t) for t in ts), param_fn=at, params=tuple(ts))


class RectCertificate(Enum):
    """Boundary-behavior patterns with their certified indices."""

    EXPANDING = "expanding"        # all four sides pushed outwards: +1
    CONTRACTING = "contracting"    # all four sides pulled inwards: +1
    SADDLE_H = "saddle_h"          # x contracted, y expanded: -1
    SADDLE_V = "saddle_v"          # x expanded, y contracted: -1
    NO_CERTIFICATE = "none"

    @property
    def certified_index(self) -> int | None:
        return {
            RectCertificate.EXPANDING: 1,
            RectCertificate.CONTRACTING: 1,
            RectCertificate.SADDLE_H: -1,
            RectCertificate.SADDLE_V: -1,
        }.get(self)


def _side_direction(values: np.ndarray, line: float, outward_positive: bool) -> str:
    """'away', 'toward' or 'none' for one side's image coordinates."""
    sign = 1.0 if outward_positive else -1.0
    excess = sign * (values - line)
    if (excess > BOUNDARY_MARGIN).all():
        return "away"
    if (excess < -BOUNDARY_MARGIN).all():
        return "toward"
    return "none"


def rectangle_certificate(
    f: Union[MapSpec, PlaneMap], rect: Rect, samples_per_side: int = 64
) -> RectCertificate:
    """Match the rectangle boundary behavior against the four patterns.

    When a pattern holds, the numeric index along the boundary is computed
    and must equal the certified value; a mismatch is a fatal self-test
    failure, never a data condition.
    """
    fn = _plane(f)
    m = samples_per_side
    xs = np.linspace(rect.x0, rect.x1, m)
    ys = np.linspace(rect.y0, rect.y1, m)

    def images(zs) -> np.ndarray:
        return np.array([fn(z) for z in zs], dtype=complex)

    top = images([complex(x, rect.y1) for x in xs])
    bottom = images([complex(x, rect.y0) for x in xs])
    right = images([complex(rect.x1, y) for y in ys])
    left = images([complex(rect.x0, y) for y in ys])

    dir_top = _side_direction(top.imag, rect.y1, outward_positive=True)
    dir_bottom = _side_direction(bottom.imag, rect.y0, outward_positive=False)
    dir_right = _side_direction(right.real, rect.x1, outward_positive=True)
    dir_left = _side_direction(left.real, rect.x0, outward_positive=False)

    y_dirs = (dir_top, dir_bottom)
    x_dirs = (dir_right, dir_left)
    if y_dirs == ("away", "away") and x_dirs == ("away", "away"):
        cert = RectCertificate.EXPANDING
    elif y_dirs == ("toward", "toward") and x_dirs == ("toward", "toward"):
        cert = RectCertificate.CONTRACTING
    elif y_dirs == ("away", "away") and x_dirs == ("toward", "toward"):
        cert = RectCertificate.SADDLE_H
    elif y_dirs == ("toward", "toward") and x_dirs == ("away", "away"):
        cert = RectCertificate.SADDLE_V
    else:
        return RectCertificate.NO_CERTIFICATE

    idx = lefschetz_index(fn, boundary_curve(rect, samples_per_side))
    if idx != cert.certified_index:
        raise CertificateIndexMismatch(
            f"{cert.value} rectangle certified {cert.certified_index} "
            f"but the integrator returned {idx}"
        )
    return cert


# ---------------------------------------------------------------------------
# Fixed points inside a curve: winding-guided bisection on the displacement
# ---------------------------------------------------------------------------


def _boundary_index(fn: PlaneMap, rect: Rect, samples: int = 48) -> int:
    return lefschetz_index(fn, boundary_curve(rect, samples))


def fixed_point_in(
    f: Union[MapSpec, PlaneMap],
    rect: Rect,
    tol: float = 1e-12,
    max_depth: int = 64,
) -> complex | None:
    """A fixed point inside the rectangle, or None when the index vanishes.

    Quadtree descent: keep a subrectangle whose boundary displacement index
    is nonzero (index additivity guarantees one exists), then Newton-polish.
    Splits are nudged when a fixed point sits on a cut line.
    """
    fn = _plane(f)
    try:
        if _boundary_index(fn, rect) == 0:
            return None
    except FixedPointOnCurve:
        pass  # fixed point essentially on the outer boundary; descend anyway
    box = rect
    for _ in range(max_depth):
        if max(box.x1 - box.x0, box.y1 - box.y0) < 1e-6:
            break
        child = None
        for nudge in (0.5, 0.47, 0.53, 0.41):
            xm = box.x0 + nudge * (box.x1 - box.x0)
            ym = box.y0 + nudge * (box.y1 - box.y0)
            quads = [
                Rect(box.x0, xm, box.y0, ym),
                Rect(xm, box.x1, box.y0, ym),
                Rect(box.x0, xm, ym, box.y1),
                Rect(xm, box.x1, ym, box.y1),
            ]
            try:
                for q in quads:
                    if _boundary_index(fn, q) != 0:
                        child = q
                        break
            except FixedPointOnCurve:
                child = None  # cut line hit the fixed point; re-nudge
                continue
            break
        if child is None:
            break
        box = child
    z = complex(0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1))
    return _newton_polish(fn, z, tol)


def _newton_polish(fn: PlaneMap, z: complex, tol: float, iters: int = 60) -> complex:
    """2D Newton on g(z) = f(z) - z with a numeric Jacobian."""
    h = 1e-7
    for _ in range(iters):
        g = fn(z) - z
        if abs(g) < tol:
            return z
        gx = (fn(z + h) - (z + h) - g) / h
        gy = (fn(z + 1j * h) - (z + 1j * h) - g) / h
        jac = np.array([[gx.real, gy.real], [gx.imag, gy.imag]])
        try:
            step = np.linalg.solve(jac, -np.array([g.real, g.imag]))
        except np.linalg.LinAlgError:
            break
        z = z + complex(step[0], step[1])
    return z
