"""Scalar 1-D conservation laws u_t + f(u)_x = 0 with polynomial fluxes.

A Godunov finite-volume scheme evolves compactly supported data on a padded
symmetric grid.  The flux also induces a gauge: the minimal affine-
approximation error of f over windows of width h, convexified and rescaled,
measures how strongly the flux bends and controls the generalized variation
of solutions; the gauge feeds the variation codec and its bit bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    DomainTooSmall,
    GaugeDegenerate,
    InfiniteDegeneracy,
    OutOfRange,
    UnstableConfig,
)
from .gauge_variation import Gauge, GaugeReport, StepFunction, gauge_check, right_continuous, tv_psi

LOG_TERM = 3.0 * math.log2(5.0) + math.log2(5.0 * math.e)   # 3 log2 5 + log2(5e)


class Flux:
    """Polynomial flux with exact derivatives, evaluated on [-M, M]."""

    def __init__(self, coeffs, M: float, name: str = "poly"):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.M = float(M)
        self.name = name
        self._d1 = P.polyder(self.coeffs)
        self._d2 = P.polyder(self.coeffs, 2)
        self._check_derivatives()
        self.fprime_max = self._sup_abs(self._d1, self._d2)
        self.critical_points = self._real_roots(self._d1)

    # factories -----------------------------------------------------------

    @classmethod
    def burgers(cls, M: float = 1.0) -> "Flux":
        return cls([0.0, 0.0, 0.5], M, "burgers")

    @classmethod
    def cubic(cls, M: float = 1.0) -> "Flux":
        return cls([0.0, 0.0, 0.0, 1.0 / 3.0], M, "cubic")

    @classmethod
    def quartic(cls, M: float = 1.0) -> "Flux":
        return cls([0.0, 0.0, 0.0, 0.0, 0.25], M, "quartic")

    @classmethod
    def polynomial(cls, coeffs, M: float = 1.0) -> "Flux":
        return cls(coeffs, M, "poly")

    @classmethod
    def parse(cls, token: str, M: float = 1.0) -> "Flux":
        if token == "burgers":
            return cls.burgers(M)
        if token == "cubic":
            return cls.cubic(M)
        if token == "quartic":
            return cls.quartic(M)
        if token.startswith("poly:"):
            return cls.polynomial([float(c) for c in token[5:].split(";")], M)
        raise ValueError(f"unknown flux token {token!r}")

    # evaluation ----------------------------------------------------------

    def __call__(self, u):
        return P.polyval(u, self.coeffs)

    def df(self, u):
        return P.polyval(u, self._d1)

    def d2f(self, u):
        return P.polyval(u, self._d2)

    def is_wgn(self) -> bool:
        """No affine part: f'' is not identically zero."""
        return bool(np.any(np.abs(self._d2) > 1e-14))

    # internals -----------------------------------------------------------

    def _check_derivatives(self) -> None:
        # finite-difference consistency of the supplied derivative
        probes = np.linspace(-self.M, self.M, 17)
        eps = 1e-6 * max(self.M, 1.0)
        fd = (self(probes + eps) - self(probes - eps)) / (2.0 * eps)
        scale = np.maximum(np.abs(self.df(probes)), 1.0)
        if np.any(np.abs(fd - self.df(probes)) > 1e-5 * scale):
            raise ValueError("derivative inconsistent with finite differences")

    def _real_roots(self, poly) -> np.ndarray:
        if np.all(np.abs(poly) < 1e-300) or poly.size <= 1:
            return np.zeros(0)
        roots = P.polyroots(poly)
        real = roots[np.abs(roots.imag) < 1e-9].real
        return np.unique(real[(real >= -self.M) & (real <= self.M)])

    def _sup_abs(self, poly, dpoly) -> float:
        cand = np.concatenate([[-self.M, self.M], self._real_roots(dpoly)])
        return float(np.abs(P.polyval(cand, poly)).max())


def godunov_flux(flux: Flux, ul: float, ur: float) -> float:
    """Interface flux: min of f over [ul, ur] if ul <= ur, else max."""
    tol = 1e-9 * max(flux.M, 1.0)
    if abs(ul) > flux.M + tol or abs(ur) > flux.M + tol:
        raise OutOfRange(f"states ({ul}, {ur}) leave [-M, M] with M = {flux.M}")
    lo, hi = (ul, ur) if ul <= ur else (ur, ul)
    crit = flux.critical_points
    cand = [flux(lo), flux(hi)] + [flux(c) for c in crit if lo < c < hi]
    return min(cand) if ul <= ur else max(cand)


def _godunov_array(flux: Flux, ul: np.ndarray, ur: np.ndarray) -> np.ndarray:
    lo = np.minimum(ul, ur)
    hi = np.maximum(ul, ur)
    vals = np.stack([flux(lo), flux(hi)]
                    + [np.where((lo < c) & (c < hi), flux(c), flux(lo))
                       for c in flux.critical_points])
    return np.where(ul <= ur, vals.min(axis=0), vals.max(axis=0))


@dataclass(frozen=True)
class GridSolution:
    dx: float
    x: np.ndarray           # cell centers
    cells: np.ndarray
    T: float
    mass: float
    max_tv_increase: float = 0.0    # largest per-step growth of cell TV

    @property
    def half_width(self) -> float:
        return float(self.x[-1] + self.dx / 2.0)


def make_grid(L: float, M: float, T: float, flux: Flux, dx: float) -> np.ndarray:
    """Cell centers on a symmetric domain wide enough that waves leaving
    [-L, L] never reach the boundary by time T."""
    W = L + T * flux.fprime_max + 6.0 * dx
    n = int(math.ceil(W / dx))
    return (np.arange(-n, n) + 0.5) * dx


def evolve(
    u0: np.ndarray, flux: Flux, T: float, dx: float, cfl: float = 0.45,
    x: np.ndarray | None = None,
) -> GridSolution:
    """Explicit conservative Godunov update to time T with zero ghost cells."""
    if cfl > 0.9:
        raise UnstableConfig(f"cfl = {cfl} exceeds the 0.9 stability cap")
    u = np.asarray(u0, dtype=float).copy()
    if x is None:
        n = u.size
        x = (np.arange(n) - (n - 1) / 2.0) * dx
    if np.abs(u).max(initial=0.0) > flux.M * (1 + 1e-9):
        raise OutOfRange("initial data exceeds the flux evaluation radius M")

    support = np.flatnonzero(np.abs(u) > 1e-12)
    if support.size:
        margin = T * flux.fprime_max + 2.0 * dx
        left_room = (support[0]) * dx
        right_room = (u.size - 1 - support[-1]) * dx
        if left_room < margin or right_room < margin:
            raise DomainTooSmall(
                f"need {margin} of padding, have ({left_room}, {right_room})"
            )

    speed = max(flux.fprime_max, 1e-300)
    dt_max = cfl * dx / speed
    t = 0.0
    cell_tv = float(np.abs(np.diff(u)).sum())
    max_tv_increase = 0.0
    while t < T - 1e-14:
        dt = min(dt_max, T - t)
        ul = np.concatenate([[0.0], u])
        ur = np.concatenate([u, [0.0]])
        F = _godunov_array(flux, ul, ur)           # interface fluxes, n+1
        u = u - dt / dx * (F[1:] - F[:-1])
        t += dt
        new_tv = float(np.abs(np.diff(u)).sum())
        max_tv_increase = max(max_tv_increase, new_tv - cell_tv)
        cell_tv = new_tv
    return GridSolution(dx=dx, x=np.asarray(x, dtype=float), cells=u, T=T,
                        mass=float(u.sum() * dx),
                        max_tv_increase=max_tv_increase)


def support_check(sol: GridSolution, L: float, M: float, T: float, flux: Flux,
                  threshold: float = 1e-12) -> bool:
    """True iff the numerical support stays inside
    [-(L + T f'_M) - 2 dx, (L + T f'_M) + 2 dx]."""
    ell = L + T * flux.fprime_max
    idx = np.flatnonzero(np.abs(sol.cells) > threshold)
    if idx.size == 0:
        return True
    lo = sol.x[idx[0]] - sol.dx / 2.0
    hi = sol.x[idx[-1]] + sol.dx / 2.0
    return lo >= -ell - 2.0 * sol.dx - 1e-12 and hi <= ell + 2.0 * sol.dx + 1e-12


# ---------------------------------------------------------------------------
# flux-derived gauge


def _window_minimax(xs: np.ndarray, ys: np.ndarray) -> float:
    """Best uniform affine-approximation error on sampled points.

    For any slope s the optimal offset splits the residual range evenly, so
    the error is half of max(y - s x) - min(y - s x); this is convex piecewise
    linear in s and minimized at a convex-hull edge slope of the point set.
    """
    slopes = _hull_edge_slopes(xs, ys)
    best = math.inf
    for s in slopes:
        r = ys - s * xs
        best = min(best, r.max() - r.min())
    return best / 2.0


def _hull_edge_slopes(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    def hull(pts):
        out = []
        for p in pts:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    pts = list(zip(xs, ys))
    lower = hull(pts)
    upper = hull(pts[::-1])
    slopes = []
    for chain in (lower, upper):
        for (x1, y1), (x2, y2) in zip(chain, chain[1:]):
            if x2 != x1:
                slopes.append((y2 - y1) / (x2 - x1))
    return np.unique(np.asarray(slopes)) if slopes else np.zeros(1)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def affine_gap(flux: Flux, M: float, h: float, coarse: int = 65,
               subgrid: int = 257, refine_subgrid: int = 513) -> float:
    """Smallest uniform distance of f to an affine function over any window
    [a, a+h] inside [-M, M]; outer grid search over a with one refinement."""
    if not 0 < h <= 2.0 * M:
        raise ValueError("need 0 < h <= 2M")
    a_grid = np.linspace(-M, M - h, coarse)

    def gap_at(a: float, pts: int) -> float:
        xs = np.linspace(a, a + h, pts)
        return _window_minimax(xs, flux(xs))

    gaps = np.array([gap_at(a, subgrid) for a in a_grid])
    i = int(np.argmin(gaps))
    lo = a_grid[max(i - 1, 0)]
    hi = a_grid[min(i + 1, a_grid.size - 1)]
    fine = np.linspace(lo, hi, 17)
    return float(min(gap_at(a, refine_subgrid) for a in fine))


@dataclass(frozen=True)
class FluxGauge:
    h_grid: np.ndarray
    d_table: np.ndarray          # affine gap per window width
    phi_table: np.ndarray        # lower convex envelope of the gap
    gauge: Gauge = field(repr=False)
    report: GaugeReport = field(repr=False)

    @property
    def x_grid(self) -> np.ndarray:
        return 2.0 * self.h_grid


def flux_gauge(flux: Flux, M: float, h_grid) -> FluxGauge:
    """Gauge psi(x) = Phi(x/2) x where Phi is the lower convex envelope of
    the affine gap, anchored at the origin."""
    hs = np.asarray(h_grid, dtype=float)
    if hs.ndim != 1 or hs.size < 3 or np.any(np.diff(hs) <= 0) or hs[0] <= 0:
        raise ValueError("h_grid must be strictly increasing and positive")
    d_vals = np.array([affine_gap(flux, M, float(h)) for h in hs])
    phi = _lower_envelope(np.concatenate([[0.0], hs]),
                          np.concatenate([[0.0], d_vals]))[1:]
    x = 2.0 * hs
    psi = phi * x
    if psi.max(initial=0.0) <= 1e-15:
        raise GaugeDegenerate("flux is affine on a full window; gauge vanishes")
    gauge = Gauge.tabulated(x, psi, token="table:flux")
    report = gauge_check(gauge, np.concatenate([[0.0], x]))
    return FluxGauge(h_grid=hs, d_table=d_vals, phi_table=phi, gauge=gauge,
                     report=report)


def _lower_envelope(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Values of the lower convex envelope of (xs, ys) at the xs themselves."""
    hull = []
    for p in zip(xs, ys):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    return np.interp(xs, hx, hy)


# ---------------------------------------------------------------------------
# polynomial degeneracy


@dataclass(frozen=True)
class DegeneracyReport:
    inflection_points: tuple
    orders: tuple
    p_f: int | None          # None for uniformly convex/concave fluxes

    @property
    def defined(self) -> bool:
        return self.p_f is not None


def degeneracy(flux: Flux, M: float | None = None) -> DegeneracyReport:
    """Vanishing orders of f'' at its roots: at each inflection point w the
    order p_w is the least p >= 2 with f^(p+1)(w) != 0."""
    M = flux.M if M is None else M
    d2 = P.polyder(flux.coeffs, 2)
    if np.all(np.abs(d2) < 1e-14):
        raise InfiniteDegeneracy("f'' vanishes identically")
    roots = P.polyroots(d2) if d2.size > 1 else np.zeros(0)
    real = np.unique(roots[np.abs(roots.imag) < 1e-9].real) if roots.size else np.zeros(0)
    real = real[(real >= -M) & (real <= M)]
    pts, orders = [], []
    for w in real:
        p = 2
        deriv = P.polyder(flux.coeffs, p + 1)
        while deriv.size and abs(P.polyval(w, deriv)) < 1e-9:
            p += 1
            deriv = P.polyder(flux.coeffs, p + 1)
        pts.append(float(w))
        orders.append(p)
    p_f = max(orders) if orders else None
    return DegeneracyReport(tuple(pts), tuple(orders), p_f)


# ---------------------------------------------------------------------------
# entropy bounds for the solution set


def solution_entropy_bound(
    epsilon: float, L: float, M: float, T: float, flux: Flux,
    gauge: Gauge, gamma_lm: float,
) -> float:
    """Bit bound for the set of time-T solutions with data bounded by M and
    supported in [-L, L], using the flux gauge and a variation constant."""
    ell = L + T * flux.fprime_max
    head = math.log2(16.0 * M * ell / epsilon + 1.0)
    tail = 2.0 * LOG_TERM * gamma_lm * (1.0 + 1.0 / T) / float(
        gauge(epsilon / (4.0 * L + 4.0 * T * flux.fprime_max))
    )
    return head + tail


def solution_entropy_bound_pf(
    epsilon: float, L: float, M: float, T: float, flux: Flux,
    p_f: int, gamma_lm_tilde: float,
) -> float:
    """Power-law form of the solution-set bound with exponent p_f."""
    ell = L + T * flux.fprime_max
    big_gamma = (
        2.0 ** (2.0 * p_f + 1.0) * LOG_TERM * gamma_lm_tilde
        * ell ** p_f * (1.0 + 1.0 / T)
    )
    return big_gamma / epsilon ** p_f + math.log2(16.0 * ell * M / epsilon + 1.0)


# ---------------------------------------------------------------------------
# solution snapshots as step functions


def to_step_function(sol: GridSolution, cap: int = 4096) -> StepFunction:
    """Snapshot on [0, 2W] (domain shifted to start at zero), uniformly
    thinned to at most ``cap`` cells."""
    cells = sol.cells
    stride = max(1, int(math.ceil(cells.size / cap)))
    vals = cells[::stride]
    edges = np.concatenate([
        sol.x[::stride] - sol.dx / 2.0, [sol.x[-1] + sol.dx / 2.0]
    ])
    edges = edges - edges[0]
    return right_continuous(edges, vals)


@dataclass(frozen=True)
class CalibrationReport:
    gamma_lm: float
    samples: tuple               # measured generalized variation per run
    seed: int
    dx: float


def calibrate_gamma(
    flux: Flux, L: float, M: float, T: float, gauge: Gauge,
    n_samples: int = 6, dx: float = 0.01, seed: int = 0, cap: int = 4096,
) -> CalibrationReport:
    """Measure the variation constant: evolve a seeded ensemble of initial
    data and report max tv_psi(u(T)) / (1 + 1/T)."""
    rng = np.random.default_rng(seed)
    x = make_grid(L, M, T, flux, dx)
    measured = []
    for _ in range(n_samples):
        u0 = _random_data(rng, x, L, M)
        sol = evolve(u0, flux, T, dx, x=x)
        f = to_step_function(sol, cap=cap)
        measured.append(tv_psi(f, gauge))
    gamma = max(measured) / (1.0 + 1.0 / T)
    return CalibrationReport(gamma_lm=gamma, samples=tuple(measured),
                             seed=seed, dx=dx)


def _random_data(rng, x: np.ndarray, L: float, M: float) -> np.ndarray:
    """Random piecewise-constant data supported in [-L, L] with |u| <= M."""
    k = int(rng.integers(2, 7))
    cuts = np.sort(rng.uniform(-L, L, size=k - 1))
    edges = np.concatenate([[-L], cuts, [L]])
    levels = rng.uniform(-M, M, size=k)
    u = np.zeros_like(x)
    for lo, hi, v in zip(edges[:-1], edges[1:], levels):
        u[(x >= lo) & (x < hi)] = v
    return u
