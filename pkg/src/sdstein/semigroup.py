"""Semigroup P_t, generator A and the Stein solution f_h.

    P_t h(x) = E h(e^{-t} x + X_t),             X_t ~ mu_t
    A f(x)   = <EX - x, grad f(x)> + int <grad f(x+u) - grad f(x), u> nu(du)
    f_h      = -int_0^inf (P_t h - E h(X)) dt

The jump term is integrated per spherical atom in the radial variable on a
log-spaced composite Gauss-Legendre rule, with a second-order Taylor closure
near 0 and an analytic closure of the far tail.

Derivatives of f_h come from the transferred representation
grad f_h = -int e^{-t} P_t(grad h) dt and Hess f_h = -int e^{-2t} P_t(Hess h) dt.
All time nodes share one set of paths X_t (common random numbers).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._estimate import Estimate
from .charfn import log_cf_ratio
from .errors import BudgetExceeded, DivergentJumpIntegral, RouteUnavailable, TailNotConverged
from .quadrature import gauss_legendre_panels
from .sampling import mu_t_paths, sample_mu_t, sample_target
from .testfunctions import SmoothTestFunction

RHO_MIN = math.exp(-14.0)
PANEL = 0.5  # panel width in log(rho)
ORDER = 8


def _pts(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if d == 1 else x[None, :]
    return x


# radial jump integrals -------------------------------------------------------


def _radial_rule(lo, hi, breaks=()):
    a, b = math.log(lo), math.log(hi)
    edges = set(np.arange(a, b, PANEL).tolist()) | {b}
    edges |= {math.log(r) for r in breaks if lo < r < hi}
    v, w = gauss_legendre_panels(sorted(edges), ORDER)
    rho = np.exp(v)
    return rho, w * rho


def jump_integral(nu, f: SmoothTestFunction, z, scale=1.0, tol=1e-10, chunk=2048):
    """sum_x w_x int_0^inf <grad f(z + rho x) - grad f(z), x> k_x(rho / scale) drho.

    With ``scale = 1`` this is the jump part of A f; with ``scale = e^{-t}``
    it is the jump part transported along the semigroup.
    """
    z = _pts(z, nu.dimension)
    m, d = z.shape
    out = np.zeros(m)
    if nu.is_null:
        return out
    s = float(scale)
    exact_tail = not f.grad_decays and getattr(f, "has_ray_tail", hasattr(f, "ray_tail"))
    if f.grad_decays:
        rho_max = max(1e3, 2.0 * float(np.max(np.abs(z))) + 1e3)
    elif exact_tail:
        rho_max = 4.0
    else:
        rho_max = None
    g0 = f.grad(z)
    H0 = f.hess(z)
    cache = {}
    for x, w, p in nu.atoms():
        key = id(p)
        if key not in cache:
            near = p.int_rk(RHO_MIN / s) * s * s
            if not math.isfinite(near):
                raise DivergentJumpIntegral("int_0 r k(r) dr diverges near 0")
            if rho_max is None:
                # grow until the dropped tail is below tol
                hi = 10.0
                while 2 * f.M[1] * s * p.tail_k(hi / s) > tol and hi < 1e8:
                    hi *= 10.0
                tail = 0.0
            else:
                hi = rho_max
                tail = s * p.tail_k(hi / s)
            if not math.isfinite(tail):
                raise DivergentJumpIntegral("profile has no finite first moment")
            breaks = [s * r for r in getattr(p, "r", ())]
            rho, wr = _radial_rule(RHO_MIN, hi, breaks)
            kw = wr * np.asarray(p(rho / s), dtype=float)
            cache[key] = (rho, kw, near, tail, hi)
        rho, kw, near, tail, hi = cache[key]
        acc = np.empty(m)
        for i in range(0, m, chunk):
            zz = z[i : i + chunk]
            q = zz[:, None, :] + rho[None, :, None] * x[None, None, :]
            g = f.grad(q.reshape(-1, d)).reshape(len(zz), len(rho), d) @ x
            acc[i : i + chunk] = (g - (g0[i : i + chunk] @ x)[:, None]) @ kw
        acc += near * np.einsum("mij,i,j->m", H0, x, x)
        acc -= tail * (g0 @ x)
        if exact_tail:
            acc += f.ray_tail(z, x, hi, lambda r, p=p: p(r / s))
        out += w * acc
    return out


def generator_apply(law, f: SmoothTestFunction, x):
    """A f(x) at the rows of ``x`` (deterministic quadrature, SE 0)."""
    x = _pts(x, law.dimension)
    drift = np.sum((law.mean[None, :] - x) * f.grad(x), axis=1)
    val = drift + jump_integral(law.levy, f, x)
    return Estimate(val, np.zeros_like(val))


# semigroup ---------------------------------------------------------------------


def _mc_mean(values):
    n = values.shape[0]
    mean = values.mean(axis=0)
    se = values.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    return Estimate(mean, se)


def apply_semigroup(law, h: SmoothTestFunction, t, x, route="mc", n=20000, seed=0, grid=None):
    """P_t h at the rows of ``x`` with per-point SE."""
    x = _pts(x, law.dimension)
    if t == 0:
        return Estimate(h.value(x), np.zeros(x.shape[0]))
    if route == "mc":
        u = sample_mu_t(law, t, n, seed).points
        c = math.exp(-t)
        vals = np.stack([h.value(c * xi[None, :] + u) for xi in x], axis=1)
        return _mc_mean(vals)
    if route == "fourier":
        return _semigroup_fourier(law, h, t, x, grid)
    raise RouteUnavailable(f"unknown route {route!r}")


def _semigroup_fourier(law, h, t, x, grid=None):
    d = law.dimension
    if d > 3 or h.support_radius is None:
        raise RouteUnavailable("fourier route needs compact support and d <= 3")
    n = grid or {1: 1024, 2: 128, 3: 48}[d]
    center = getattr(h, "c", np.zeros(d))
    L = 8.0 * h.support_radius
    step = L / n
    ax = -L / 2 + step * np.arange(n)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    y = np.stack([m.ravel() for m in mesh], axis=1) + center
    hv = h.value(y).reshape((n,) * d)
    w1 = 2 * np.pi * np.fft.fftfreq(n, d=step)
    xi = np.stack(np.meshgrid(*([w1] * d), indexing="ij"), axis=-1).reshape(-1, d)
    # hat h(xi) = int h(y) e^{-i xi y} dy on the lattice
    origin = center - L / 2
    hhat = np.fft.fftn(hv).ravel() * step**d * np.exp(-1j * (xi @ origin))
    phi = np.exp(log_cf_ratio(law, xi, t))
    coef = hhat * phi / L**d
    z = math.exp(-t) * x
    vals = np.real(np.exp(1j * z @ xi.T) @ coef)
    r = np.linalg.norm(xi, axis=1)
    ring = r > 0.9 * r.max()
    err = float(np.sum(np.abs(coef[ring])))
    return Estimate(vals, np.full(len(vals), err))


def compose_semigroup(law, h, t, s, x, n=20000, seed=0):
    """P_s(P_t h)(x) by nested sampling: h(e^{-t}(e^{-s}x + V) + U)."""
    x = _pts(x, law.dimension)
    u = sample_mu_t(law, t, n, seed).points
    v = sample_mu_t(law, s, n, seed + 7919).points
    base = math.exp(-t) * v + u
    c = math.exp(-(t + s))
    vals = np.stack([h.value(c * xi[None, :] + base) for xi in x], axis=1)
    return _mc_mean(vals)


# Stein solution ----------------------------------------------------------------


def rate_exponent(d):
    return 1.0 / (2 ** (d + 1) * (d + 1))


def calibrate_constant(law, n=4096, seed=0):
    """Constant C with d_W1(X, X_t) <= C e^{-rate t} for every t >= 0.

    The coupling X = e^{-t} X' + X_t gives d_W1(X, X_t) <= e^{-t} E|X|, which is
    below C e^{-rate t} with C = E|X| since rate < 1.  E|X| is replaced by an
    MC upper bound (mean + 3 SE).
    """
    pts = sample_target(law, n, seed).points
    nr = np.linalg.norm(pts, axis=1)
    return float(nr.mean() + 3 * nr.std(ddof=1) / math.sqrt(n))


def time_rule(T, order=ORDER, fine=8):
    """Composite Gauss-Legendre on panels graded geometrically at 0 and at large t."""
    edges = [0.0] + [2.0 ** k for k in range(-fine, 0)] + [1.0]
    e = 1.0
    while e < T:
        e = min(2 * e, T)
        edges.append(e)
    return gauss_legendre_panels(edges, order)


def choose_tmax(law, tol, x_norm, C=None, cap=200.0, seed=0):
    """Horizon with x_norm e^{-T} + (C / rate) e^{-rate T} below tol."""
    d = law.dimension
    k = rate_exponent(d)
    if C is None:
        C = calibrate_constant(law, seed=seed)
    T_lin = math.log(max(2 * x_norm / tol, 1.0))
    T_rate = math.log(max(2 * C / (k * tol), 1.0)) / k
    return min(cap, max(T_lin, T_rate, 1.0)), C


@dataclass
class SteinSolution:
    law: object
    h: SmoothTestFunction
    points: np.ndarray
    f: Estimate
    grad: Estimate
    hess: Estimate
    times: np.ndarray
    weights: np.ndarray
    T_max: float
    n_mc: int
    seed: int
    tol: float
    meta: dict = field(default_factory=dict)
    _paths: np.ndarray = field(default=None, repr=False)
    _xprime: np.ndarray = field(default=None, repr=False)

    def _per_path(self, fn, x, power):
        """Per-path time integrals -int e^{-power t} fn(e^{-t}x + X_t) dt; (n_mc, m, ...)."""
        x = _pts(x, self.law.dimension)
        acc = None
        for t, w, u in zip(self.times, self.weights, self._paths):
            c = math.exp(-t)
            vals = np.stack([fn(c * xi[None, :] + u, c, u) for xi in x], axis=1)
            term = w * math.exp(-power * t) * vals
            acc = term if acc is None else acc + term
        return -acc

    def value(self, x):
        xp = self._xprime
        h = self.h
        vals = self._per_path(lambda z, c, u: h.value(z) - h.value(c * xp + u), x, 0)
        return _mc_mean(vals)

    def gradient(self, x):
        return _mc_mean(self._per_path(lambda z, c, u: self.h.grad(z), x, 1))

    def hessian(self, x):
        return _mc_mean(self._per_path(lambda z, c, u: self.h.hess(z), x, 2))

    def describe(self):
        return {"T_max": self.T_max, "n_mc": self.n_mc, "time_nodes": int(len(self.times)),
                "seed": self.seed, "tol": self.tol, **self.meta}


def solve_stein(law, h: SmoothTestFunction, points, n_mc=2000, tol=1e-2, seed=0,
                T_max_override=None, order=6, max_work=4e9, check_tail=True) -> SteinSolution:
    """f_h and its first two derivatives at ``points``."""
    x = _pts(points, law.dimension)
    if T_max_override is not None:
        T, C = float(T_max_override), None
    else:
        T, C = choose_tmax(law, tol, float(np.max(np.linalg.norm(x, axis=1))), seed=seed)
    times, weights = time_rule(T, order)
    work = len(times) * n_mc * len(x) * (1 + law.dimension + law.dimension**2)
    if work > max_work:
        raise BudgetExceeded(f"estimated work {work:.3g} exceeds budget {max_work:.3g}")
    paths = mu_t_paths(law, times, n_mc, seed, tag="stein")
    if paths is None:
        paths = np.stack([sample_mu_t(law, float(t), n_mc, seed + i).points for i, t in enumerate(times)])
    xprime = sample_target(law, n_mc, seed + 104729).points
    sol = SteinSolution(law, h, x, None, None, None, times, weights, T, n_mc, seed, tol,
                        {"C_hat": C, "rate": rate_exponent(law.dimension)}, paths, xprime)
    if check_tail:
        c = math.exp(-T)
        u = paths[-1]
        diff = np.stack([h.value(c * xi[None, :] + u) - h.value(c * xprime + u) for xi in x], axis=1)
        est = _mc_mean(diff)
        worst = float(np.max(np.abs(est.value) - 3 * est.se))
        sol.meta["tail_integrand"] = float(np.max(np.abs(est.value)))
        if worst > tol:
            raise TailNotConverged(f"|P_T h - E h| = {worst:.3g} at T_max = {T:.3g}")
    sol.f = sol.value(x)
    sol.grad = sol.gradient(x)
    sol.hess = sol.hessian(x)
    return sol


def estimate_mean_h(law, h, n=10**6, seed=0):
    vals = h.value(sample_target(law, n, seed).points)
    # mean about the first draw: exact when h is constant
    v0 = float(vals[0])
    return Estimate(v0 + float(np.mean(vals - v0)), float(vals.std(ddof=1) / math.sqrt(n)))


def stein_residual(law, sol: SteinSolution, x, eh: Estimate | None = None, n_eh=10**6):
    """A(f_h)(x) - (h(x) - E h(X)) with SE.

    A f_h is evaluated through the semigroup: A f_h(x) = -int_0^T G(t) dt, where
    G(t) = E[e^{-t} <EX - x, grad h(z)> + J_t(z)], z = e^{-t} x + X_t and J_t is
    the jump integral of grad h with radial scale e^{-t}.  The time rule and the
    paths are those of ``sol``.
    """
    h = sol.h
    x = _pts(x, law.dimension)
    if eh is None:
        eh = estimate_mean_h(law, h, n_eh, sol.seed + 15485863)
    n = sol.n_mc
    acc = np.zeros((n, len(x)))
    for t, w, u in zip(sol.times, sol.weights, sol._paths):
        c = math.exp(-t)
        for k, xi in enumerate(x):
            z = c * xi[None, :] + u
            drift = c * (h.grad(z) @ (law.mean - xi))
            jump = jump_integral(law.levy, h, z, scale=c)
            acc[:, k] += w * (drift + jump)
    Af = _mc_mean(-acc)
    val = Af.value - (h.value(x) - eh.value)
    se = np.sqrt(Af.se**2 + eh.se**2)
    return Estimate(val, se)


def characterization_identity(law, f: SmoothTestFunction, n=10**5, seed=0, independent=True):
    """Both sides of E<X - EX, grad f(X)> = E int <grad f(X+u) - grad f(X), u> nu(du).

    With ``independent`` the two sides come from independent target batches,
    so the SE of their difference is the root sum of squares; otherwise one
    batch is shared and the difference SE is the paired one.
    """
    se = lambda v: float(v.std(ddof=1) / math.sqrt(len(v)))
    X = sample_target(law, n, seed).points
    lhs = np.sum((X - law.mean[None, :]) * f.grad(X), axis=1)
    Xj = sample_target(law, n, seed + 1_000_003).points if independent else X
    rhs = jump_integral(law.levy, f, Xj)
    if independent:
        diff = Estimate(float(lhs.mean() - rhs.mean()), math.hypot(se(lhs), se(rhs)))
    else:
        diff = Estimate(float(np.mean(lhs - rhs)), se(lhs - rhs))
    return {
        "lhs": Estimate(float(lhs.mean()), se(lhs)),
        "rhs": Estimate(float(rhs.mean()), se(rhs)),
        "difference": diff,
    }


