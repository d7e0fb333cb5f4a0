"""Radial dispersal kernels and their derived transforms.

A kernel is a radial profile J(r) on [0, inf) that integrates to 1 over
R^N.  Two derived objects drive everything else:

* the sphere-to-sphere kernel  Jtilde(r, rho) = integral of J(|x - y|)
  over the sphere |y| = rho, for |x| = r, and
* the one-dimensional marginal  Jstar(l) = integral of J over the
  hyperplane at signed distance l from the origin.

Jtilde is evaluated through its angular representation

    Jtilde(r, rho) = w_{N-1} rho^{N-1}
                     int_0^pi (sin t)^{N-2} J(sqrt(r^2+rho^2-2 r rho cos t)) dt,

which is smooth in t (the eta-substitution form has endpoint
singularities for N = 2), and Jstar through

    Jstar(l) = w_{N-1} int_0^inf J(sqrt(l^2 + s^2)) s^{N-2} ds.

Here w_k is the area of the unit sphere in R^k (w_1 = 2, w_2 = 2*pi,
w_3 = 4*pi).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import KernelValidationError, SolvabilityError
from .quadrature import (
    geometric_edges,
    gl_integrate,
    gl_panels,
    gl_rule,
    graded_edges_around,
)

COMPACT = "compact"
FAT_TAIL = "fat_tail"
CUSTOM = "custom"

#: default Gauss-Legendre order for single kernel-transform evaluations
DEFAULT_ORDER = 64
#: relative agreement required between consecutive quadrature orders
ORDER_DOUBLING_TOL = 1e-9


def unit_sphere_area(k: int) -> float:
    """Area of the unit sphere in R^k (w_1 = 2, w_2 = 2*pi, w_3 = 4*pi)."""
    return 2.0 * math.pi ** (k / 2.0) / gamma_fn(k / 2.0)


@dataclass(frozen=True)
class RadialKernel:
    """Radial profile J(r) with the metadata the transforms need.

    profile must be vectorized (accept and return numpy arrays).
    breakpoints lists radii where the profile is non-smooth (e.g. the
    support edge of a truncated kernel); quadrature panels split there.
    For fat-tail kernels, tail_scale is the asymptotic coefficient A in
    J(r) ~ A r^(-beta) and tail_start the radius beyond which the
    two-sided power bound holds.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    dim: int
    kind: str
    support_radius: float | None = None
    tail_exponent: float | None = None
    tail_scale: float | None = None
    tail_start: float = 1.0
    breakpoints: tuple[float, ...] = ()
    label: str = ""
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")
        if self.kind == COMPACT and self.support_radius is None:
            raise ValueError("compact kernel needs a support radius")
        if self.kind == FAT_TAIL and self.tail_exponent is None:
            raise ValueError("fat-tail kernel needs a tail exponent")

    def __call__(self, r):
        return self.profile(np.asarray(r, dtype=float))

    def hash(self) -> str:
        """Stable identity used to key the on-disk kernel-table cache."""
        probe = np.geomspace(1e-3, 64.0, 96)
        vals = np.asarray(self(probe), dtype=float)
        h = hashlib.sha256()
        h.update(repr((self.label, self.kind, self.dim, self.params)).encode())
        h.update(vals.tobytes())
        return h.hexdigest()[:16]


def _uniform_profile(dim: int, radius: float):
    height = dim / (unit_sphere_area(dim) * radius ** dim)

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= radius, height, 0.0)

    return profile


def uniform_kernel(dim: int, radius: float = 1.0) -> RadialKernel:
    """Uniform density on the ball of the given radius (disc for N=2)."""
    return RadialKernel(
        profile=_uniform_profile(dim, radius),
        dim=dim,
        kind=COMPACT,
        support_radius=radius,
        breakpoints=(radius,),
        label=f"uniform{dim}d",
        params=(radius,),
    )


def cosine_bump_kernel(dim: int, radius: float = 1.0) -> RadialKernel:
    """Smooth compactly supported kernel (1 + cos(pi r / K)) / 2, normalized."""
    wN = unit_sphere_area(dim)

    def raw(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= radius, 0.5 * (1.0 + np.cos(np.pi * r / radius)), 0.0)

    mass = wN * gl_integrate(lambda r: raw(r) * r ** (dim - 1), 0.0, radius, 96)

    def profile(r):
        return raw(r) / mass

    return RadialKernel(
        profile=profile,
        dim=dim,
        kind=COMPACT,
        support_radius=radius,
        breakpoints=(radius,),
        label=f"cosbump{dim}d",
        params=(radius,),
    )


def power_tail_kernel(dim: int, beta: float) -> RadialKernel:
    """Fat-tail kernel J(r) = A (1 + r)^(-beta), normalized in closed form.

    Requires beta > N so that J is integrable over R^N.  The normalizing
    constant uses int_0^inf r^(N-1) (1+r)^(-beta) dr = B(N, beta - N).
    """
    if beta <= dim:
        raise ValueError("need beta > N for an integrable fat-tail kernel")
    wN = unit_sphere_area(dim)
    b = gamma_fn(dim) * gamma_fn(beta - dim) / gamma_fn(beta)
    amp = 1.0 / (wN * b)

    def profile(r):
        r = np.asarray(r, dtype=float)
        return amp * (1.0 + r) ** (-beta)

    return RadialKernel(
        profile=profile,
        dim=dim,
        kind=FAT_TAIL,
        tail_exponent=beta,
        tail_scale=amp,
        tail_start=1.0,
        label=f"powertail{dim}d",
        params=(beta,),
    )


def custom_kernel(profile, dim: int, support_radius: float | None = None,
                  breakpoints: tuple[float, ...] = (), label: str = "custom",
                  params: tuple = ()) -> RadialKernel:
    kind = COMPACT if support_radius is not None else CUSTOM
    return RadialKernel(profile=profile, dim=dim, kind=kind,
                        support_radius=support_radius,
                        breakpoints=breakpoints, label=label, params=params)


# ---------------------------------------------------------------------------
# radial moments and validation
# ---------------------------------------------------------------------------

def _radial_integral(kernel: RadialKernel, power: int,
                     rel_tol: float = 1e-12) -> float:
    """int_0^inf J(r) r^power dr with panels split at profile breakpoints."""

    def f(r):
        return kernel(r) * r ** power

    if kernel.kind == COMPACT:
        edges = sorted({0.0, kernel.support_radius,
                        *[b for b in kernel.breakpoints if b < kernel.support_radius]})
        return gl_panels(f, edges, 96)
    # unbounded support: doubling octaves until the contribution stalls
    total = gl_integrate(f, 0.0, 1.0, 96)
    lo, width = 1.0, 1.0
    for _ in range(80):
        part = gl_integrate(f, lo, lo + width, 64)
        total += part
        lo += width
        width *= 2.0
        if abs(part) <= rel_tol * max(abs(total), 1e-300):
            return total
    return math.inf


def normalization(kernel: RadialKernel) -> float:
    """w_N int_0^inf J(r) r^(N-1) dr; equals 1 for an admissible kernel."""
    return unit_sphere_area(kernel.dim) * _radial_integral(kernel, kernel.dim - 1)


def moment_n(kernel: RadialKernel) -> float:
    """The (J1) moment int_0^inf J(r) r^N dr; math.inf when divergent."""
    if kernel.kind == FAT_TAIL and kernel.tail_exponent <= kernel.dim + 1:
        return math.inf
    return _radial_integral(kernel, kernel.dim)


@dataclass(frozen=True)
class ValidationReport:
    normalization: float
    value_at_zero: float
    min_value: float
    moment_n: float
    moment_finite: bool
    accepted: bool
    failures: tuple[str, ...]


def validate_kernel(kernel: RadialKernel, tol_norm: float = 1e-6) -> ValidationReport:
    """Check the admissibility conditions: sign, J(0) > 0, unit mass.

    The finite-N-th-moment verdict is reported but is not an
    admissibility requirement (it only controls whether the spreading
    speed is finite).
    """
    horizon = kernel.support_radius if kernel.kind == COMPACT else 1e3
    probe = np.concatenate(([0.0], np.geomspace(1e-6, horizon, 4096)))
    vals = np.asarray(kernel(probe), dtype=float)
    failures = []
    j0 = float(vals[0])
    vmin = float(vals.min())
    if vmin < 0.0:
        failures.append("profile takes negative values")
    if j0 <= 0.0:
        failures.append("J(0) must be positive")
    norm = normalization(kernel)
    if abs(norm - 1.0) > tol_norm:
        failures.append(f"normalization {norm!r} deviates from 1 by more than {tol_norm}")
    mn = moment_n(kernel)
    return ValidationReport(
        normalization=norm,
        value_at_zero=j0,
        min_value=vmin,
        moment_n=mn,
        moment_finite=math.isfinite(mn),
        accepted=not failures,
        failures=tuple(failures),
    )


def require_valid(kernel: RadialKernel, tol_norm: float = 1e-6) -> ValidationReport:
    report = validate_kernel(kernel, tol_norm)
    if not report.accepted:
        raise KernelValidationError("; ".join(report.failures))
    return report


# ---------------------------------------------------------------------------
# the marginal kernel Jstar
# ---------------------------------------------------------------------------

def j_star(kernel: RadialKernel, l) -> np.ndarray | float:
    """Marginal kernel Jstar(l); vectorized over l, even in l."""
    ls = np.atleast_1d(np.abs(np.asarray(l, dtype=float)))
    out = _j_star_abs(kernel, ls)
    return float(out[0]) if np.isscalar(l) or np.ndim(l) == 0 else out


def _j_star_abs(kernel: RadialKernel, ls: np.ndarray) -> np.ndarray:
    n = kernel.dim
    w = unit_sphere_area(n - 1)
    x, gw = gl_rule(96)
    out = np.zeros_like(ls)

    if kernel.kind == COMPACT:
        K = kernel.support_radius
        inside = ls < K
        if not np.any(inside):
            return out
        li = ls[inside]
        # s runs to the support edge; extra panel splits at interior kinks
        smax = np.sqrt(K * K - li * li)
        breaks = [b for b in kernel.breakpoints if b < K]
        edge_list = [np.zeros_like(li)]
        for b in breaks:
            sb = np.sqrt(np.clip(b * b - li * li, 0.0, None))
            edge_list.append(np.minimum(sb, smax))
        edge_list.append(smax)
        edges = np.sort(np.stack(edge_list, axis=1), axis=1)
        acc = np.zeros_like(li)
        for p in range(edges.shape[1] - 1):
            a, b_ = edges[:, p], edges[:, p + 1]
            half = 0.5 * (b_ - a)
            s = a[:, None] + half[:, None] * (x[None, :] + 1.0)
            vals = kernel(np.sqrt(li[:, None] ** 2 + s * s)) * s ** (n - 2)
            acc += half * (vals @ gw)
        out[inside] = w * acc
        return out

    # unbounded support: fixed geometric panels, extended until the last
    # panel is negligible for every l simultaneously
    acc = np.zeros_like(ls)
    lo, width = 0.0, 1.0
    for _ in range(90):
        half = 0.5 * width
        s = lo + half * (x + 1.0)
        vals = kernel(np.sqrt(ls[:, None] ** 2 + s[None, :] ** 2)) * s[None, :] ** (n - 2)
        part = half * (vals @ gw)
        acc += part
        lo += width
        width *= 2.0
        if part.max() <= 1e-13 * max(acc.max(), 1e-300):
            break
    return w * acc


def j_star_first_moment(kernel: RadialKernel) -> float:
    """int_0^inf l Jstar(l) dl; finite exactly when (J1) holds."""
    if not math.isfinite(moment_n(kernel)):
        return math.inf

    def f(l):
        return np.atleast_1d(j_star(kernel, l)) * np.asarray(l)

    if kernel.kind == COMPACT:
        # the integrand can lose smoothness at the support edge (square-root
        # behavior for truncated kernels), so grade the panels toward it
        K = kernel.support_radius
        edges = sorted({*graded_edges_around(K, 0.0, K, first=K / 64.0),
                        *[b for b in kernel.breakpoints if b < K]})
        return gl_panels(f, edges, 64)
    total = gl_integrate(f, 0.0, 1.0, 64)
    lo, width = 1.0, 1.0
    for _ in range(90):
        part = gl_integrate(f, lo, lo + width, 48)
        total += part
        lo += width
        width *= 2.0
        if abs(part) <= 1e-11 * max(abs(total), 1e-300):
            break
    return total


def moment_identity_check(kernel: RadialKernel) -> tuple[float, float, float]:
    """Cross-check int l Jstar(l) dl against w_{N-1}/(N-1) int J r^N dr."""
    mn = moment_n(kernel)
    if not math.isfinite(mn):
        raise SolvabilityError(
            "the N-th moment of J diverges; both sides of the identity are infinite")
    rhs = unit_sphere_area(kernel.dim - 1) / (kernel.dim - 1) * mn
    lhs = j_star_first_moment(kernel)
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return lhs, rhs, rel


# ---------------------------------------------------------------------------
# the sphere-to-sphere kernel Jtilde
# ---------------------------------------------------------------------------

def _theta_breaks(kernel: RadialKernel, r: float, rho: np.ndarray) -> np.ndarray:
    """Angular panel edges, shape (len(rho), nb + 2), sorted along axis 1.

    A profile breakpoint at radius b maps to the polar angle where the
    chord length sqrt(r^2 + rho^2 - 2 r rho cos t) equals b.
    """
    cols = [np.zeros_like(rho)]
    denom = 2.0 * r * rho
    for b in kernel.breakpoints:
        arg = (r * r + rho * rho - b * b) / denom
        cols.append(np.arccos(np.clip(arg, -1.0, 1.0)))
    cols.append(np.full_like(rho, math.pi))
    return np.sort(np.stack(cols, axis=1), axis=1)


def _fat_theta_edges(r: float, rho: np.ndarray) -> np.ndarray:
    """Angular edges graded toward theta = 0 for unbounded-support kernels.

    J(dist(theta)) is peaked at theta = 0 with width ~ 1/sqrt(r rho)
    once the spheres are large, so a single panel over [0, pi] loses
    the peak entirely; geometric panels keep a fixed node density per
    octave of the peak scale.
    """
    theta0 = 1.0 / (1.0 + np.sqrt(r * rho))
    cols = [np.zeros_like(rho)]
    scale = theta0.copy()
    for _ in range(40):
        cols.append(np.minimum(scale, math.pi))
        if np.all(scale >= math.pi):
            break
        scale = scale * 4.0
    return np.stack(cols, axis=1)


def _j_tilde_panels(kernel: RadialKernel, r: float, rho: np.ndarray,
                    edges: np.ndarray, order: int) -> np.ndarray:
    n = kernel.dim
    x, gw = gl_rule(order)
    acc = np.zeros_like(rho)
    for p in range(edges.shape[1] - 1):
        a, b = edges[:, p], edges[:, p + 1]
        half = 0.5 * (b - a)
        t = a[:, None] + half[:, None] * (x[None, :] + 1.0)
        dist = np.sqrt(r * r + rho[:, None] ** 2
                       - 2.0 * r * rho[:, None] * np.cos(t))
        vals = kernel(dist)
        if n > 2:
            vals = vals * np.sin(t) ** (n - 2)
        acc += half * (vals @ gw)
    return unit_sphere_area(n - 1) * rho ** (n - 1) * acc


def j_tilde_row(kernel: RadialKernel, r: float, rho, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Jtilde(r, rho) for a fixed r and an array of sphere radii rho."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.zeros_like(rho)
    pos = rho > 0.0
    if not np.any(pos):
        return out
    if r == 0.0:
        # exact: the integrand is constant on the sphere
        rp = rho[pos]
        out[pos] = unit_sphere_area(kernel.dim) * rp ** (kernel.dim - 1) * kernel(rp)
        return out
    rp = rho[pos]
    if kernel.kind == COMPACT:
        K = kernel.support_radius
        reach = np.abs(rp - r) < K
        if not np.any(reach):
            return out
        vals = np.zeros_like(rp)
        rr = rp[reach]
        vals[reach] = _j_tilde_panels(kernel, r, rr, _theta_breaks(kernel, r, rr), order)
        out[pos] = vals
        return out
    edges = _fat_theta_edges(r, rp)
    if kernel.breakpoints:
        edges = np.sort(np.concatenate(
            (edges, _theta_breaks(kernel, r, rp)), axis=1), axis=1)
    out[pos] = _j_tilde_panels(kernel, r, rp, edges, order)
    return out


def j_tilde(kernel: RadialKernel, r: float, rho: float,
            order: int = DEFAULT_ORDER) -> float:
    """Jtilde(r, rho) with an order-doubling fallback for accuracy."""
    if rho <= 0.0:
        return 0.0
    prev = float(j_tilde_row(kernel, r, np.array([rho]), order)[0])
    for _ in range(3):
        cur = float(j_tilde_row(kernel, r, np.array([rho]), 2 * order)[0])
        if abs(cur - prev) <= ORDER_DOUBLING_TOL * max(1.0, abs(cur)):
            return cur
        prev, order = cur, 2 * order
    return prev


def j_tilde_split(kernel: RadialKernel, r: float, rho: float,
                  order: int = DEFAULT_ORDER) -> tuple[float, float]:
    """(Jtilde_plus, Jtilde_minus): the hemisphere split at polar angle pi/2."""
    if r <= 0.0:
        raise ValueError("the hemisphere split is undefined at the center r = 0")
    if rho <= 0.0:
        return 0.0, 0.0
    rho_arr = np.array([rho])
    all_edges = _theta_breaks(kernel, r, rho_arr)
    if kernel.kind != COMPACT:
        all_edges = np.sort(np.concatenate(
            (all_edges, _fat_theta_edges(r, rho_arr)), axis=1), axis=1)
    halves = []
    for lo, hi in ((0.0, math.pi / 2.0), (math.pi / 2.0, math.pi)):
        edges = np.sort(np.clip(all_edges, lo, hi), axis=1)
        halves.append(float(_j_tilde_panels(kernel, r, rho_arr, edges, order)[0]))
    return halves[0], halves[1]


# ---------------------------------------------------------------------------
# rho-integrals of Jtilde and the boundary flux
# ---------------------------------------------------------------------------

def interior_rho_integral(kernel: RadialKernel, r: float, h: float,
                          order: int = 32) -> float:
    """int_0^h Jtilde(r, rho) d rho by graded panel quadrature."""
    if h <= 0.0:
        return 0.0
    if kernel.kind == COMPACT:
        K = kernel.support_radius
        lo = max(0.0, r - K)
        hi = min(h, r + K)
        if hi <= lo:
            return 0.0
        edges = _graded_union(lo, hi, _rho_kinks(kernel, r))
    else:
        edges = graded_edges_around(r, 0.0, h, first=0.5)
    total = 0.0
    x, gw = gl_rule(order)
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes = a + half * (x + 1.0)
        total += half * float(np.dot(gw, j_tilde_row(kernel, r, nodes)))
    return total


def outward_rho_integral(kernel: RadialKernel, r: float, h: float,
                         order: int = 32) -> float:
    """int_h^inf Jtilde(r, rho) d rho.

    Compact kernels integrate the outward band directly; fat tails use
    1 - interior, which follows from the unit normalization of J.
    """
    if kernel.kind == COMPACT:
        K = kernel.support_radius
        hi = r + K
        if h >= hi:
            return 0.0
        lo = max(h, max(0.0, r - K))
        edges = _graded_union(lo, hi, _rho_kinks(kernel, r))
        x, gw = gl_rule(order)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            nodes = a + half * (x + 1.0)
            total += half * float(np.dot(gw, j_tilde_row(kernel, r, nodes)))
        return total
    return min(max(1.0 - interior_rho_integral(kernel, r, h, order), 0.0), 1.0)


def _graded_union(lo: float, hi: float, kinks) -> np.ndarray:
    """Panel edges on [lo, hi], geometrically refined toward every kink.

    Tangency points carry square-root behavior (N = 2), which plain
    panel splitting resolves only to a few digits; grading restores
    fast convergence.
    """
    width = hi - lo
    pts = {lo, hi}
    for k in kinks:
        for j in range(1, 14):
            step = width / 2.0 ** j
            for cand in (k - step, k + step):
                if lo < cand < hi:
                    pts.add(cand)
        if lo < k < hi:
            pts.add(k)
    return np.array(sorted(pts))


def _rho_kinks(kernel: RadialKernel, r: float) -> list[float]:
    """rho values where rho -> Jtilde(r, rho) loses smoothness.

    A profile breakpoint at radius b touches the sphere of radius rho
    tangentially when rho = |b - r| or rho = b + r; the peak at rho = r
    is included as well.
    """
    pts = [r]
    for b in kernel.breakpoints:
        pts.extend((abs(b - r), b + r))
    return pts


def _refine(edges, factor: int) -> np.ndarray:
    """Subdivide each panel into `factor` equal pieces."""
    edges = np.asarray(edges, dtype=float)
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        out.extend(np.linspace(a, b, factor + 1)[1:])
    return np.asarray(out)


def boundary_flux(kernel: RadialKernel, h: float, order: int = 24) -> float:
    """F(h) = int_0^h int_h^inf Jtilde(r, rho) d rho d r.

    When (J1) holds, F(h) converges to int_0^inf l Jstar(l) dl as h grows;
    for fat tails with beta in (N, N+1] it grows like h^(N+1-beta), or
    ln h at the endpoint beta = N+1.
    """
    if kernel.kind == COMPACT:
        lo = max(0.0, h - kernel.support_radius)
        outer_edges = _refine([lo, h], 6)
    else:
        outer_edges = graded_edges_around(h, 0.0, h, first=1.0)
    x, gw = gl_rule(order)
    total = 0.0
    for a, b in zip(outer_edges[:-1], outer_edges[1:]):
        half = 0.5 * (b - a)
        nodes = a + half * (x + 1.0)
        vals = np.array([outward_rho_integral(kernel, r, h) for r in nodes])
        total += half * float(np.dot(gw, vals))
    return total


def flux_limit_check(kernel: RadialKernel, h_values) -> list[tuple[float, float]]:
    """Tabulate (h, F(h)) over the given boundary radii."""
    return [(float(h), boundary_flux(kernel, float(h))) for h in h_values]
