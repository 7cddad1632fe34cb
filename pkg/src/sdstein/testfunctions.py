"""Smooth test functions with certified derivative bounds.

Every function evaluates on an (n, d) array and returns values (n,),
gradients (n, d) and Hessians (n, d, d).  ``M`` holds certified upper bounds
on sup|h|, sup|grad h| and sup of the Hessian operator norm.  A function is
in the class H_r when max(M_0..M_r) <= 1.

``grad_decays`` marks functions for which <grad h(z + rho x), x> -> 0 as
rho -> infinity in every direction x; jump integrals use it to close the
radial tail analytically.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

TANH_M2 = 4 / (3 * math.sqrt(3))  # max |2 tanh(z) sech(z)^2|


def _pts(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if d == 1 else x[None, :]
    return x


class SmoothTestFunction:
    name = "h"
    grad_decays = False
    support_radius = None

    def __init__(self, d, M):
        self.d = int(d)
        self.M = tuple(float(m) for m in M)

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hess(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)

    def in_class(self, r):
        return max(self.M[: r + 1]) <= 1.0 + 1e-12

    def describe(self):
        return {"name": self.name, "M": list(self.M)}

    def scaled(self, c):
        return Combination([self], [c])


class Constant(SmoothTestFunction):
    name = "constant"
    grad_decays = True

    def __init__(self, d, c=0.5):
        super().__init__(d, (abs(c), 0.0, 0.0))
        self.c = float(c)

    def value(self, x):
        x = _pts(x, self.d)
        return np.full(x.shape[0], self.c)

    def grad(self, x):
        return np.zeros_like(_pts(x, self.d))

    def hess(self, x):
        x = _pts(x, self.d)
        return np.zeros((x.shape[0], self.d, self.d))

    def describe(self):
        return {"name": self.name, "c": self.c, "M": list(self.M)}


class Linear(SmoothTestFunction):
    """<a, x> + b; unbounded, so never in H_r, but useful for exact checks."""

    name = "linear"

    def __init__(self, a, b=0.0):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        super().__init__(a.size, (math.inf, np.linalg.norm(a), 0.0))
        self.a, self.b = a, float(b)

    def value(self, x):
        return _pts(x, self.d) @ self.a + self.b

    def grad(self, x):
        x = _pts(x, self.d)
        return np.broadcast_to(self.a, x.shape).copy()

    def hess(self, x):
        x = _pts(x, self.d)
        return np.zeros((x.shape[0], self.d, self.d))


class TanhRamp(SmoothTestFunction):
    """a tanh((<v, x> - c) / s)."""

    name = "tanh_ramp"
    grad_decays = True

    def __init__(self, v, a=0.5, s=1.0, c=0.0):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        nv = np.linalg.norm(v)
        super().__init__(v.size, (a, a * nv / s, TANH_M2 * a * nv**2 / s**2))
        self.v, self.a, self.s, self.c = v, float(a), float(s), float(c)

    def _z(self, x):
        return (_pts(x, self.d) @ self.v - self.c) / self.s

    def value(self, x):
        return self.a * np.tanh(self._z(x))

    def grad(self, x):
        th = np.tanh(self._z(x))
        return (self.a / self.s * (1 - th**2))[:, None] * self.v

    def hess(self, x):
        th = np.tanh(self._z(x))
        g2 = -2 * self.a / self.s**2 * th * (1 - th**2)
        return g2[:, None, None] * np.outer(self.v, self.v)[None]

    def describe(self):
        return {"name": self.name, "v": self.v.tolist(), "a": self.a, "s": self.s, "c": self.c,
                "M": list(self.M)}


class Cosine(SmoothTestFunction):
    """a cos(<w, x> + phase)."""

    name = "cosine"

    def __init__(self, w, a=1.0, phase=0.0):
        w = np.atleast_1d(np.asarray(w, dtype=float))
        nw = np.linalg.norm(w)
        super().__init__(w.size, (a, a * nw, a * nw**2))
        self.w, self.a, self.phase = w, float(a), float(phase)

    def _arg(self, x):
        return _pts(x, self.d) @ self.w + self.phase

    def value(self, x):
        return self.a * np.cos(self._arg(x))

    def grad(self, x):
        return (-self.a * np.sin(self._arg(x)))[:, None] * self.w

    def hess(self, x):
        return (-self.a * np.cos(self._arg(x)))[:, None, None] * np.outer(self.w, self.w)[None]

    def ray_tail(self, z, x, R, k):
        """int_R^inf <grad h(z + rho x), x> k(rho) drho for every row of z."""
        B = float(self.w @ x)
        if B == 0:
            return np.zeros(len(z))
        ic, is_ = _oscillatory_tail(k, R, abs(B))
        A = self._arg(z)
        # sin(A + B rho) = sin A cos(B rho) + cos A sin(B rho)
        return -self.a * B * (np.sin(A) * ic + np.cos(A) * math.copysign(1.0, B) * is_)

    def describe(self):
        return {"name": self.name, "w": self.w.tolist(), "a": self.a, "phase": self.phase,
                "M": list(self.M)}


def _oscillatory_tail(k, R, b):
    """(int_R^inf cos(b rho) k(rho) drho, int_R^inf sin(b rho) k(rho) drho) by QAWF."""
    g = lambda r: float(k(r))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        ic, _ = integrate.quad(g, R, np.inf, weight="cos", wvar=b, limlst=200)
        is_, _ = integrate.quad(g, R, np.inf, weight="sin", wvar=b, limlst=200)
    return ic, is_


def sine(w=1.0, a=1.0):
    f = Cosine(w, a, -math.pi / 2)
    f.name = "sine"
    return f


class GaussianBump(SmoothTestFunction):
    """a exp(-|x - c|^2 / (2 s^2))."""

    name = "gaussian_bump"
    grad_decays = True

    def __init__(self, c, s=1.0, a=1.0):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        super().__init__(c.size, (a, a * math.exp(-0.5) / s, a / s**2))
        self.c, self.s, self.a = c, float(s), float(a)
        self.support_radius = 12.0 * s  # |h| < 1e-31 a beyond

    def _parts(self, x):
        y = _pts(x, self.d) - self.c
        v = self.a * np.exp(-0.5 * np.sum(y**2, axis=1) / self.s**2)
        return y, v

    def value(self, x):
        return self._parts(x)[1]

    def grad(self, x):
        y, v = self._parts(x)
        return -(v / self.s**2)[:, None] * y

    def hess(self, x):
        y, v = self._parts(x)
        eye = np.eye(self.d)[None]
        return v[:, None, None] * (y[:, :, None] * y[:, None, :] / self.s**4 - eye / self.s**2)

    def describe(self):
        return {"name": self.name, "c": self.c.tolist(), "s": self.s, "a": self.a, "M": list(self.M)}


class Combination(SmoothTestFunction):
    """sum_i c_i f_i; bounds by the triangle inequality."""

    name = "combination"

    def __init__(self, funcs, coeffs):
        funcs = list(funcs)
        coeffs = [float(c) for c in coeffs]
        d = funcs[0].d
        M = [sum(abs(c) * f.M[l] for f, c in zip(funcs, coeffs)) for l in range(3)]
        super().__init__(d, M)
        self.funcs, self.coeffs = funcs, coeffs
        self.grad_decays = all(f.grad_decays for f in funcs)
        radii = [f.support_radius for f in funcs]
        self.support_radius = None if None in radii else max(radii)

    def value(self, x):
        return sum(c * f.value(x) for f, c in zip(self.funcs, self.coeffs))

    def grad(self, x):
        return sum(c * f.grad(x) for f, c in zip(self.funcs, self.coeffs))

    def hess(self, x):
        return sum(c * f.hess(x) for f, c in zip(self.funcs, self.coeffs))

    @property
    def has_ray_tail(self):
        return all(f.grad_decays or hasattr(f, "ray_tail") for f in self.funcs)

    def ray_tail(self, z, x, R, k):
        out = np.zeros(len(z))
        for f, c in zip(self.funcs, self.coeffs):
            if hasattr(f, "ray_tail") and not f.grad_decays:
                out += c * f.ray_tail(z, x, R, k)
        return out

    def describe(self):
        return {"name": self.name, "coeffs": self.coeffs, "funcs": [f.describe() for f in self.funcs],
                "M": list(self.M)}


class Shifted(SmoothTestFunction):
    """x -> f(a x + b) for scalar a; exposes the composition used by P_t."""

    name = "shifted"

    def __init__(self, f, a=1.0, b=None):
        self.f, self.a = f, float(a)
        self.b = np.zeros(f.d) if b is None else np.asarray(b, dtype=float)
        super().__init__(f.d, (f.M[0], abs(a) * f.M[1], a * a * f.M[2]))
        self.grad_decays = f.grad_decays

    def value(self, x):
        return self.f.value(self.a * _pts(x, self.d) + self.b)

    def grad(self, x):
        return self.a * self.f.grad(self.a * _pts(x, self.d) + self.b)

    def hess(self, x):
        return self.a**2 * self.f.hess(self.a * _pts(x, self.d) + self.b)


def empirical_bounds(f: SmoothTestFunction, points):
    """sup of |h|, |grad h| and Hessian operator norm over ``points``."""
    x = _pts(points, f.d)
    m0 = float(np.max(np.abs(f.value(x))))
    m1 = float(np.max(np.linalg.norm(f.grad(x), axis=1)))
    m2 = float(np.max(np.abs(np.linalg.eigvalsh(f.hess(x))))) if f.d else 0.0
    return m0, m1, m2


def fd_gradient_error(f: SmoothTestFunction, points, step=1e-5):
    """max |central difference - grad| over points and coordinates."""
    x = _pts(points, f.d)
    g = f.grad(x)
    worst = 0.0
    for j in range(f.d):
        e = np.zeros(f.d)
        e[j] = step
        fd = (f.value(x + e) - f.value(x - e)) / (2 * step)
        worst = max(worst, float(np.max(np.abs(fd - g[:, j]))))
    return worst


def fd_hessian_error(f: SmoothTestFunction, points, step=1e-5):
    x = _pts(points, f.d)
    H = f.hess(x)
    worst = 0.0
    for j in range(f.d):
        e = np.zeros(f.d)
        e[j] = step
        fd = (f.grad(x + e) - f.grad(x - e)) / (2 * step)
        worst = max(worst, float(np.max(np.abs(fd - H[:, :, j]))))
    return worst
