"""Lift of an annulus map to the universal-cover strip, the comparison loop
spanning 2m fundamental domains, and the index values that force fixed points.

Strip coordinates: x = theta / 2*pi (unbounded), y = affine rescaling of the
component's latitude window onto [0.25, 0.75].  A lift F of a map whose
annular degree is d satisfies F(x+1, y) = F(x, y) + (d, 0); distinct lift
offsets k pick out distinct fixed-point classes downstairs.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .annuli import AnnulusComponent
from .charts import (
    Chart,
    MapSpec,
    SpherePoint,
    as_product_view,
    chart_value,
    chordal,
    evaluate,
    from_latlon,
)
from .lefschetz import Rect, fixed_point_in, lefschetz_index
from .winding import SampledCurve

Y_LO, Y_HI = 0.25, 0.75
COND_MARGIN = 1e-9
M_CAP = 64


class StripError(Exception):
    pass


class LiftDiscontinuity(StripError):
    """Angle continuation produced inconsistent branches."""


class MNotFound(StripError):
    """No loop width satisfied the displacement conditions within the cap."""


class IndexMismatch(StripError):
    """Computed index contradicts the certified value: self-test failure."""


@dataclass(frozen=True)
class StripMap:
    """A lift F of ``spec`` restricted to one annulus component."""

    spec: MapSpec
    component: AnnulusComponent
    translation_degree: int
    lift_offset: int

    def __post_init__(self):
        object.__setattr__(self, "_view", as_product_view(self.spec))

    @property
    def s_window(self) -> tuple[float, float]:
        return (self.component.win_lo, self.component.win_hi)

    def s_of_y(self, y: float) -> float:
        lo, hi = self.s_window
        return lo + (y - Y_LO) / (Y_HI - Y_LO) * (hi - lo)

    def y_of_s(self, s: float) -> float:
        lo, hi = self.s_window
        return Y_LO + (s - lo) / (hi - lo) * (Y_HI - Y_LO)

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        s = self.s_of_y(y)
        view = self._view
        if view is not None:
            s_out = view.radial(s)
            x_out = view.angular_degree * x + view.twist(s) / (2 * math.pi)
        else:
            s_out, angle = _continued_image(self.spec, x, y, self)
            x_out = angle / (2 * math.pi)
        return (x_out + self.lift_offset, self.y_of_s(s_out))

    def as_plane(self):
        """The lift as a map of the complex plane x + i*y."""

        def fn(z: complex) -> complex:
            xo, yo = self(z.real, z.imag)
            return complex(xo, yo)

        return fn

    def project(self, x: float, y: float) -> SpherePoint:
        return from_latlon(self.s_of_y(y), 2 * math.pi * x)


def _continued_image(spec: MapSpec, x: float, y: float, F: StripMap,
                     max_points: int = 65536) -> tuple[float, float]:
    """(latitude, continuous angle) of the image, tracked from a basepoint.

    The image angle is continued along the straight strip path from (0, 0.5)
    to (x, y), subdividing until successive principal increments stay below
    pi/2.  Two continuations to the same point agree modulo equivariance.
    """

    def image(xc: float, yc: float) -> complex:
        p = from_latlon(F.s_of_y(yc), 2 * math.pi * xc)
        img = evaluate(spec, p)
        return chart_value(img, Chart.NORTH)

    here = image(0.0, 0.5)
    angle = cmath.phase(here)
    # seed densely enough that no path step can hide a whole image turn:
    # the image angle moves at most (degree bound) turns per unit of x
    turns_bound = (1 + abs(spec.declared_degree)) * (1.0 + abs(x))
    seeds = 16 + 8 * int(math.ceil(turns_bound))
    t_vals = [i / seeds for i in range(seeds + 1)]
    prev = here
    i = 1
    while i < len(t_vals):
        t = t_vals[i]
        cur = image(t * x, 0.5 + t * (y - 0.5))
        step = cmath.phase(cur / prev)
        if abs(step) >= 0.5 * math.pi:
            if len(t_vals) > max_points or t - t_vals[i - 1] < 1e-14:
                raise LiftDiscontinuity("angle continuation failed to settle")
            t_vals.insert(i, 0.5 * (t_vals[i - 1] + t))
            continue
        angle += step
        prev = cur
        i += 1
    target = from_latlon(F.s_of_y(y), 2 * math.pi * x)
    return (evaluate(spec, target).latitude(), angle)


def lift(spec: MapSpec, component: AnnulusComponent, k: int = 0,
         seed: int = 0) -> StripMap:
    """Build the lift F + (k, 0) and validate it against the covering map."""
    F = StripMap(spec, component, translation_degree=component.delta, lift_offset=k)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        x = float(rng.uniform(-2.0, 2.0))
        y = float(rng.uniform(Y_LO, Y_HI))
        xo, yo = F(x, y)
        down = evaluate(spec, F.project(x, y))
        if chordal(F.project(xo - k, yo), down) > 1e-9:
            raise LiftDiscontinuity(
                f"projection does not commute at (x, y) = ({x:.6g}, {y:.6g})"
            )
    for _ in range(10):
        x = float(rng.uniform(-2.0, 2.0))
        y = float(rng.uniform(Y_LO, Y_HI))
        a = F(x + 1.0, y)
        b = F(x, y)
        if abs(a[0] - b[0] - F.translation_degree) > 1e-9 or abs(a[1] - b[1]) > 1e-9:
            raise LiftDiscontinuity("equivariance violated")
    return F


# ---------------------------------------------------------------------------
# The comparison loop
# ---------------------------------------------------------------------------


def build_beta(F: StripMap, m: int) -> SampledCurve:
    """Positively oriented loop: lower boundary lifts across 2m fundamental
    domains, the vertical arc at x = m, the upper lifts back, and the
    vertical at x = -m.  Round boundaries lift to the horizontal lines
    y = 0.25 and y = 0.75.  The degenerate m = 0 loop spans one domain.
    """
    if m < 0:
        raise ValueError("loop width must be >= 0")
    x_lo, x_hi = (0.0, 1.0) if m == 0 else (-float(m), float(m))
    corners = [
        complex(x_lo, Y_LO),
        complex(x_hi, Y_LO),
        complex(x_hi, Y_HI),
        complex(x_lo, Y_HI),
    ]

    def at(t: float) -> complex:
        t = t % 1.0
        leg, frac = divmod(t * 4.0, 1.0)
        a = corners[int(leg) % 4]
        b = corners[(int(leg) + 1) % 4]
        return a + frac * (b - a)

    per_leg = max(16, 8 * (2 * m + 1))
    n = 4 * per_leg
    ts = [i / n for i in range(n)]
    return SampledCurve(tuple(at(t) for t in ts), param_fn=at, params=tuple(ts))


@dataclass(frozen=True)
class VerifyResult:
    index: int
    m_used: int


def _conditions_hold(F: StripMap, m: int, samples: int = 65) -> bool:
    d = F.translation_degree
    ys = np.linspace(Y_LO, Y_HI, samples)
    for x_v, sign in ((float(m), 1.0), (-float(m), -1.0)):
        for y in ys:
            x_img = F(x_v, float(y))[0]
            if d >= 2:
                # image beyond the vertical line, away from the center
                if sign * (x_img - x_v) <= COND_MARGIN:
                    return False
            else:
                # image on the center side of the vertical line
                if sign * (x_v - x_img) <= COND_MARGIN:
                    return False
    xs = np.linspace(-float(m), float(m), samples * max(1, m))
    for x in xs:
        if F(float(x), Y_LO)[1] >= Y_LO - COND_MARGIN:
            return False
        if F(float(x), Y_HI)[1] <= Y_HI + COND_MARGIN:
            return False
    return True


def verify_index(F: StripMap, m_cap: int = M_CAP) -> VerifyResult:
    """Find a loop width where the displacement conditions hold and check
    that the index along the loop matches the certified value (+1 when the
    translation degree is >= 2, -1 when it is <= 0)."""
    d = F.translation_degree
    if d == 1:
        raise ValueError("translation degree 1 carries no certified index")
    expected = 1 if d >= 2 else -1
    for m in range(1, m_cap + 1):
        if not _conditions_hold(F, m):
            continue
        idx = lefschetz_index(F.as_plane(), build_beta(F, m))
        if idx != expected:
            raise IndexMismatch(
                f"loop index {idx} != certified {expected} for degree {d}"
            )
        return VerifyResult(index=idx, m_used=m)
    raise MNotFound(f"conditions never held for m <= {m_cap}")


# ---------------------------------------------------------------------------
# Fixed points of lifts and their projections
# ---------------------------------------------------------------------------


def lift_fixed_point(F: StripMap, m: int) -> complex:
    """Fixed point of the lift inside the comparison loop.

    Found by winding-guided bisection on the displacement field, then
    Newton-polished to machine residual.
    """
    box = Rect(-float(m) - 0.25, float(m) + 0.25, Y_LO - 0.2, Y_HI + 0.2)
    z = fixed_point_in(F.as_plane(), box)
    if z is None:
        raise StripError("no fixed point despite nonzero loop index")
    return z


@dataclass(frozen=True)
class LiftFixedPoint:
    lift_offset: int
    m_used: int
    index: int
    strip_point: complex
    sphere_point: SpherePoint
    residual: float


def nielsen_fixed_points(spec: MapSpec, component: AnnulusComponent,
                         offsets=None) -> list[LiftFixedPoint]:
    """One fixed point per lift offset; projections are pairwise distinct.

    Offsets default to 0 .. |d-1|-1, realizing the full lower bound of a
    repelling degree-d component.
    """
    d = component.delta
    if offsets is None:
        offsets = range(abs(d - 1))
    out = []
    for k in offsets:
        F = lift(spec, component, k=k)
        res = verify_index(F)
        z = lift_fixed_point(F, res.m_used)
        downstairs = F.project(z.real, z.imag)
        residual = chordal(evaluate(spec, downstairs), downstairs)
        out.append(
            LiftFixedPoint(
                lift_offset=k, m_used=res.m_used, index=res.index,
                strip_point=z, sphere_point=downstairs, residual=residual,
            )
        )
    return out
