"""Gauss-Legendre panel quadrature helpers.

All integration in the kernel machinery is built from fixed-order
Gauss-Legendre rules applied panel by panel, so results are fully
deterministic (no adaptive subdivision driven by error estimators,
except the explicit order-doubling fallback used by the kernel
transforms).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gl_integrate(f, a: float, b: float, order: int = 64) -> float:
    """Integrate f over [a, b] with a single Gauss-Legendre panel."""
    if b <= a:
        return 0.0
    x, w = gl_rule(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return float(half * np.dot(w, f(mid + half * x)))


def gl_panels(f, edges, order: int = 64) -> float:
    """Integrate f over consecutive panels given by sorted edge list."""
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += gl_integrate(f, a, b, order)
    return total


def geometric_edges(a: float, b: float, first: float = 1.0) -> np.ndarray:
    """Panel edges on [a, b] whose widths grow geometrically from `first`.

    Used for integrands that decay like a power law away from `a`: the
    panels [a, a+1], [a+1, a+2], [a+2, a+4], ... keep a fixed number of
    Gauss nodes per octave.
    """
    if b <= a:
        return np.array([a, a])
    edges = [a]
    step = first
    pos = a
    while pos + step < b:
        pos += step
        edges.append(pos)
        step *= 2.0
    edges.append(b)
    return np.asarray(edges)


def graded_edges_around(center: float, a: float, b: float, first: float = 0.5) -> np.ndarray:
    """Panel edges on [a, b] refined geometrically toward `center`.

    For integrands peaked at `center` (e.g. rho -> Jtilde(r, rho) peaks at
    rho = r) this resolves the peak without wasting nodes on the tails.
    """
    if b <= a:
        return np.array([a, a])
    pts = {a, b}
    if a < center < b:
        pts.add(center)
    step = first
    lo, hi = center - step, center + step
    while lo > a or hi < b:
        if a < lo:
            pts.add(lo)
        if hi < b:
            pts.add(hi)
        step *= 2.0
        lo, hi = center - step, center + step
    return np.array(sorted(pts))


def tail_integral_power(f, a: float, order: int = 32,
                        rel_tol: float = 1e-12, max_octaves: int = 80) -> float:
    """Integrate f over [a, infinity) for power-law-decaying integrands.

    Doubling panels [a, 2a], [2a, 4a], ... are summed until one panel
    contributes less than rel_tol of the running total.
    """
    lo = max(a, 1e-12)
    total = gl_integrate(f, a, lo) if a < lo else 0.0
    width = max(lo, 1.0)
    for _ in range(max_octaves):
        part = gl_integrate(f, lo, lo + width, order)
        total += part
        lo += width
        width *= 2.0
        if abs(part) <= rel_tol * max(abs(total), 1e-300):
            break
    return total


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    """Composite trapezoid weights for n equispaced nodes."""
    w = np.full(n, dx)
    w[0] = 0.5 * dx
    w[-1] = 0.5 * dx
    return w
