"""Pairwise link geometry and link expiration time (LET).

The LET of an in-range pair is the remaining time until their distance
exceeds the communication range R, assuming both keep constant speed
and direction.  ``math.inf`` is the distinguished "never expires" value;
callers that feed LETs into weight normalization clamp it first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mobility import VehicleState

INFINITE_LET = math.inf


@dataclass(frozen=True)
class LinkGeometry:
    d_ij: float
    theta_ij: float
    w_ij: float


@dataclass(frozen=True)
class LinkEstimate:
    let_seconds: float
    in_range: bool


def geometry(a: VehicleState, b: VehicleState) -> LinkGeometry:
    """Distance, bearing and vertical (cross-road) distance of a pair.

    The bearing uses the two-argument arctangent, which is defined in
    every quadrant; coincident positions give d = 0, theta = 0, w = 0.
    The vertical distance is reported as an absolute value.
    """
    dx = a.x - b.x
    dy = a.y - b.y
    d = math.hypot(dx, dy)
    theta = math.atan2(dy, dx) if d > 0.0 else 0.0
    w = abs(d * math.sin(theta))
    return LinkGeometry(d_ij=d, theta_ij=theta, w_ij=w)


def _expiry(a: VehicleState, b: VehicleState, r: float) -> LinkEstimate:
    # Relative motion is purely along x (lanes are parallel), so the pair
    # separation is d(t)^2 = (x_rel + u*t)^2 + w^2 with u the relative
    # x velocity.  The closed form picks +/- by whether the pair is
    # closing or separating at t = 0; zero relative speed never expires.
    geo = geometry(a, b)
    if geo.d_ij > r:
        return LinkEstimate(let_seconds=0.0, in_range=False)
    u = a.velocity_x - b.velocity_x
    if u == 0.0:
        return LinkEstimate(let_seconds=INFINITE_LET, in_range=True)
    w = geo.w_ij
    root_range = math.sqrt(max(r * r - w * w, 0.0))
    root_dist = math.sqrt(max(geo.d_ij * geo.d_ij - w * w, 0.0))
    closing = (a.x - b.x) * u < 0.0
    if closing:
        let = (root_range + root_dist) / abs(u)
    else:
        let = (root_range - root_dist) / abs(u)
    return LinkEstimate(let_seconds=max(let, 0.0), in_range=True)


def let_same_direction(a: VehicleState, b: VehicleState, r: float) -> LinkEstimate:
    """LET for a pair travelling the same way; infinite at equal speeds."""
    if a.heading != b.heading:
        raise ValueError("let_same_direction requires equal headings")
    return _expiry(a, b, r)


def let_opposite_direction(a: VehicleState, b: VehicleState, r: float) -> LinkEstimate:
    """LET for a pair travelling opposite ways (approaching or receding)."""
    if a.heading == b.heading:
        raise ValueError("let_opposite_direction requires opposite headings")
    return _expiry(a, b, r)


def link_expiration(a: VehicleState, b: VehicleState, r: float) -> LinkEstimate:
    """Dispatch on headings; the kinematic form covers all four motion cases."""
    return _expiry(a, b, r)
