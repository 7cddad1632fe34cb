"""Self-decomposable laws through the polar form of their Levy measures.

A Levy measure is stored as a probability measure ``lam`` on the unit sphere
together with radial profiles ``k_x``::

    nu(B) = int lam(dx) int_0^inf 1_B(r x) k_x(r) dr / r

``lam`` is either a finite list of atoms or the uniform law on the sphere.
Every profile is non-increasing, so each atom direction carries a
one-dimensional self-decomposable jump law.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import (
    DivergentIntegral,
    InvalidLevyMeasure,
    NonPositiveRadius,
    QuadratureFailure,
    UnknownDirection,
    UnsupportedLaw,
)
from .quadrature import decade_integral

MOMENTS = ("m2_total", "m2_small", "m1_large", "m2_large", "m1_total")


class Profile:
    """Base class of radial profiles ``k(r)``.

    The numeric methods here are generic (QUADPACK based); subclasses override
    them with closed forms where those exist.  The generic versions stay
    reachable as ``Profile.method(p, ...)`` and serve as independent checks.
    """

    kind = "profile"
    k0 = math.inf

    def __call__(self, r):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}

    # moments of the radial part, all per unit spherical mass
    def moment(self, which: str) -> float:
        g1 = lambda r: float(self(r))
        g2 = lambda r: r * float(self(r))
        if which == "m2_small":
            return decade_integral(g2, 0.0, 1.0)
        if which == "m2_large":
            return decade_integral(g2, 1.0, math.inf)
        if which == "m1_large":
            return decade_integral(g1, 1.0, math.inf)
        if which == "m2_total":
            a = decade_integral(g2, 0.0, 1.0)
            return a + decade_integral(g2, 1.0, math.inf)
        if which == "m1_total":
            return decade_integral(g1, 0.0, math.inf)
        if which == "small_jump":
            # int (r^2 ^ 1) k dr / r
            return decade_integral(g2, 0.0, 1.0) + decade_integral(lambda r: float(self(r)) / r, 1.0, math.inf)
        raise ValueError(f"unknown moment {which!r}")

    def int_rk(self, a: float) -> float:
        """int_0^a r k(r) dr"""
        return decade_integral(lambda r: r * float(self(r)), 0.0, a)

    def tail_k(self, b: float) -> float:
        """int_b^inf k(r) dr"""
        return decade_integral(lambda r: float(self(r)), b, math.inf)

    def intensity(self, a: float, b: float = math.inf) -> float:
        """int_a^b k(r) dr / r"""
        return decade_integral(lambda r: float(self(r)) / r, a, b)

    def exponent(self, s):
        """int_0^inf (e^{irs} - 1 - irs) k(r) dr / r, vectorised in ``s``."""
        s = np.asarray(s, dtype=float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            out = np.array([self._exponent_scalar(float(v)) for v in s.ravel()], dtype=complex)
        if not np.all(np.isfinite(out)) or np.any(np.abs(out) > 1e300):
            raise QuadratureFailure("oscillatory radial quadrature failed")
        return out.reshape(s.shape)

    def _exponent_scalar(self, s: float) -> complex:
        if s == 0.0:
            return 0.0j
        a = abs(s)
        r1 = min(1.0, 1.0 / a)
        opts = dict(epsabs=1e-11, epsrel=1e-10, limit=400)
        re0, _ = integrate.quad(lambda r: (math.cos(a * r) - 1.0) * float(self(r)) / r, 0.0, r1, **opts)
        im0, _ = integrate.quad(lambda r: (math.sin(a * r) - a * r) * float(self(r)) / r, 0.0, r1, **opts)
        tail1 = self.tail_k(r1)
        if not math.isfinite(tail1):
            raise DivergentIntegral("profile has no finite first moment; compensated exponent undefined")
        mass = self.intensity(r1)
        g = lambda r: float(self(r)) / r
        # QAWF on [r1, inf)
        rc, _ = integrate.quad(g, r1, np.inf, weight="cos", wvar=a, limlst=200)
        rs, _ = integrate.quad(g, r1, np.inf, weight="sin", wvar=a, limlst=200)
        re = re0 + rc - mass
        im = im0 + rs - a * tail1
        return complex(re, math.copysign(1.0, s) * im)

    # grid samplers in v = log r
    def _grid_sampler(self, logdens, vlo, vhi, n=8193):
        v = np.linspace(vlo, vhi, n)
        dens = np.maximum(logdens(v), 0.0)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(v))])
        if cdf[-1] <= 0:
            raise QuadratureFailure("empty radial law")
        return v, cdf / cdf[-1]

    def _hi(self, lo, rel=1e-15):
        hi = max(2.0 * lo, 1.0)
        k_ref = float(self(lo))
        for _ in range(200):
            if float(self(hi)) <= rel * k_ref:
                return hi
            hi *= 2.0
        raise UnsupportedLaw("profile tail too heavy for the grid sampler")

    def sample_radius(self, rng, size, lo):
        """Radii with density proportional to k(r)/r on (lo, inf)."""
        hi = self._hi(lo)
        kk = np.vectorize(lambda r: float(self(r)))
        v, cdf = self._grid_sampler(lambda v: kk(np.exp(v)), math.log(lo), math.log(hi))
        return np.exp(np.interp(rng.random(size), cdf, v))

    def sample_r2(self, rng, size):
        """Radii with density proportional to r k(r) on (0, inf)."""
        hi = self._hi(1.0, rel=1e-18)
        kk = np.vectorize(lambda r: float(self(r)))
        v, cdf = self._grid_sampler(lambda v: np.exp(2 * v) * kk(np.exp(v)), math.log(1e-12), math.log(hi))
        return np.exp(np.interp(rng.random(size), cdf, v))

    def sample_mark(self, rng, size):
        """Draws from -dk / k(0+), the jump marks of the background driving process."""
        if not math.isfinite(self.k0):
            raise UnsupportedLaw("k(0+) is infinite")
        hi = self._hi(1e-12, rel=1e-15)
        grid = np.concatenate([[0.0], np.geomspace(1e-12, hi, 8192)])
        G = 1.0 - np.array([float(self(r)) for r in grid]) / self.k0
        G = np.maximum.accumulate(np.clip(G, 0.0, 1.0))
        G[-1] = 1.0
        return np.interp(rng.random(size), G, grid)


class PowerProfile(Profile):
    """``k(r) = c r^{-alpha}``, alpha in (1, 2): the radial part of a stable law."""

    kind = "power"

    def __init__(self, alpha: float, c: float = 1.0):
        if not 1.0 < alpha < 2.0:
            raise InvalidLevyMeasure("power profile needs alpha in (1, 2)")
        if c < 0:
            raise InvalidLevyMeasure("power profile needs c >= 0")
        self.alpha = float(alpha)
        self.c = float(c)

    def __call__(self, r):
        return self.c * np.asarray(r, dtype=float) ** (-self.alpha)

    def describe(self):
        return {"kind": self.kind, "alpha": self.alpha, "c": self.c}

    def int_rk(self, a):
        if math.isinf(a):
            return math.inf if self.c > 0 else 0.0
        return self.c * a ** (2 - self.alpha) / (2 - self.alpha)

    def tail_k(self, b):
        if b == 0:
            return math.inf if self.c > 0 else 0.0
        return self.c * b ** (1 - self.alpha) / (self.alpha - 1)

    def intensity(self, a, b=math.inf):
        if a == 0:
            return math.inf if self.c > 0 else 0.0
        return self.c * (a ** -self.alpha - (0.0 if math.isinf(b) else b ** -self.alpha)) / self.alpha

    def exponent(self, s):
        s = np.asarray(s, dtype=float)
        a = self.alpha
        return self.c * special.gamma(-a) * np.abs(s) ** a * np.exp(-0.5j * math.pi * a * np.sign(s))

    def sample_radius(self, rng, size, lo):
        return lo * rng.random(size) ** (-1.0 / self.alpha)

    def sample_r2(self, rng, size):
        raise UnsupportedLaw("power profile has infinite second moment")


class ExponentialProfile(Profile):
    """``k(r) = alpha e^{-beta r}``: gamma-type radial part."""

    kind = "exponential"

    def __init__(self, alpha: float, beta: float):
        if alpha < 0 or beta <= 0:
            raise InvalidLevyMeasure("exponential profile needs alpha >= 0, beta > 0")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.k0 = self.alpha

    def __call__(self, r):
        return self.alpha * np.exp(-self.beta * np.asarray(r, dtype=float))

    def describe(self):
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}

    def int_rk(self, a):
        b = self.beta
        if math.isinf(a):
            return self.alpha / b**2
        x = b * a
        # 1 - e^{-x}(1+x), stable for small x
        return self.alpha * (-math.expm1(-x) - x * math.exp(-x)) / b**2

    def tail_k(self, b):
        return self.alpha * math.exp(-self.beta * b) / self.beta

    def intensity(self, a, b=math.inf):
        if a == 0:
            return math.inf if self.alpha > 0 else 0.0
        hi = 0.0 if math.isinf(b) else special.exp1(self.beta * b)
        return self.alpha * (special.exp1(self.beta * a) - hi)

    def exponent(self, s):
        z = np.asarray(s, dtype=float) / self.beta
        return self.alpha * (-np.log1p(-1j * z) - 1j * z)

    def sample_radius(self, rng, size, lo):
        hi = lo + 45.0 / self.beta
        v, cdf = self._grid_sampler(lambda v: self(np.exp(v)), math.log(lo), math.log(hi))
        return np.exp(np.interp(rng.random(size), cdf, v))

    def sample_r2(self, rng, size):
        return rng.gamma(2.0, 1.0 / self.beta, size)

    def sample_mark(self, rng, size):
        return rng.exponential(1.0 / self.beta, size)


class TabulatedProfile(Profile):
    """Right-continuous step profile through the table ``(r_i, k_i)``.

    ``k(r) = k_0`` for ``r < r_1`` and ``k(r) = k_i`` on ``[r_i, r_{i+1})``.
    The last value holds on ``[r_last, inf)``; it must be 0 for a finite first
    moment.  Integrals are exact sums over the steps.
    """

    kind = "tabulated"

    def __init__(self, r, k):
        r = np.asarray(r, dtype=float)
        k = np.asarray(k, dtype=float)
        if r.ndim != 1 or r.shape != k.shape or r.size < 1:
            raise InvalidLevyMeasure("tabulated profile needs two equal-length columns")
        if np.any(r <= 0):
            raise InvalidLevyMeasure("tabulated radii must be positive")
        if np.any(np.diff(r) <= 0):
            raise InvalidLevyMeasure("tabulated radii must be strictly increasing")
        if np.any(k < 0):
            raise InvalidLevyMeasure("tabulated profile must be non-negative")
        if np.any(np.diff(k) > 0):
            raise InvalidLevyMeasure("tabulated profile must be non-increasing")
        self.r = r
        self.k = k
        self.k0 = float(k[0])
        # step edges: [0, r_1), [r_1, r_2), ..., [r_last, inf)
        self._lo = np.concatenate([[0.0], r[1:]])
        self._hi = np.concatenate([r[1:], [np.inf]])
        self._val = k.copy()
        if r.size == 1:
            self._lo, self._hi = np.array([0.0]), np.array([np.inf])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.r, r, side="right") - 1
        return self.k[np.clip(idx, 0, None)]

    def describe(self):
        return {"kind": self.kind, "r": self.r.tolist(), "k": self.k.tolist()}

    def _sum(self, a, b, prim):
        lo = np.clip(self._lo, a, b)
        hi = np.clip(self._hi, a, b)
        keep = (hi > lo) & (self._val > 0)
        if not np.any(keep):
            return 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = self._val[keep] * (prim(hi[keep]) - prim(lo[keep]))
        return float(np.sum(vals))

    def moment(self, which):
        if which == "m2_small":
            return self.int_rk(1.0)
        if which == "m2_large":
            return self._sum(1.0, np.inf, lambda x: 0.5 * x**2)
        if which == "m1_large":
            return self.tail_k(1.0)
        if which == "m2_total":
            return self.int_rk(math.inf)
        if which == "m1_total":
            return self.tail_k(0.0)
        if which == "small_jump":
            return self.int_rk(1.0) + self.intensity(1.0)
        raise ValueError(f"unknown moment {which!r}")

    def int_rk(self, a):
        return self._sum(0.0, a, lambda x: 0.5 * x**2)

    def tail_k(self, b):
        return self._sum(b, np.inf, lambda x: x)

    def intensity(self, a, b=math.inf):
        if a == 0 and self.k0 > 0:
            return math.inf
        return self._sum(a, b, np.log)

    def exponent(self, s):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        if self.k[-1] > 0:
            raise DivergentIntegral("tabulated profile with non-zero tail has no first moment")
        for lo, hi, v in zip(self._lo, self._hi, self._val):
            if v == 0 or math.isinf(hi):
                continue
            out += v * self._step_exponent(flat, lo, hi)
        return out.reshape(s.shape)

    @staticmethod
    def _step_exponent(s, lo, hi):
        # int_lo^hi (e^{irs} - 1 - irs) dr / r
        a = np.abs(s)
        nz = a > 0
        re = np.zeros_like(a)
        im = np.zeros_like(a)
        si_h, ci_h = special.sici(a[nz] * hi)
        if lo > 0:
            si_l, ci_l = special.sici(a[nz] * lo)
            re[nz] = ci_h - ci_l - math.log(hi / lo)
            im[nz] = si_h - si_l - a[nz] * (hi - lo)
        else:
            # Ci(x) - log(x) -> gamma_E as x -> 0
            re[nz] = ci_h - np.log(a[nz] * hi) - np.euler_gamma
            im[nz] = si_h - a[nz] * hi
        return re + 1j * np.sign(s) * im

    def _masses(self, density_prim):
        lo, hi = self._lo, self._hi
        return self._val * (density_prim(hi) - density_prim(lo))

    def sample_radius(self, rng, size, lo):
        ed_lo = np.maximum(self._lo, lo)
        keep = (self._hi > ed_lo) & (self._val > 0)
        if np.any(np.isinf(self._hi[keep])):
            raise UnsupportedLaw("non-zero tail value gives infinite intensity")
        a, b, v = ed_lo[keep], self._hi[keep], self._val[keep]
        w = v * np.log(b / a)
        idx = rng.choice(w.size, size=size, p=w / w.sum())
        u = rng.random(size)
        return a[idx] * (b[idx] / a[idx]) ** u

    def sample_r2(self, rng, size):
        keep = self._val > 0
        if np.any(np.isinf(self._hi[keep])):
            raise UnsupportedLaw("non-zero tail value gives infinite second moment")
        a, b, v = self._lo[keep], self._hi[keep], self._val[keep]
        w = v * (b**2 - a**2)
        idx = rng.choice(w.size, size=size, p=w / w.sum())
        return np.sqrt(a[idx] ** 2 + rng.random(size) * (b[idx] ** 2 - a[idx] ** 2))

    def sample_mark(self, rng, size):
        # -dk puts mass k_{i-1} - k_i at r_i
        drops = -np.diff(self.k)
        if self.k[-1] > 0:
            raise UnsupportedLaw("non-zero tail value")
        idx = rng.choice(drops.size, size=size, p=drops / drops.sum())
        return self.r[1:][idx]


class CallableProfile(Profile):
    """User profile given as a vectorised callable; everything is numeric."""

    kind = "callable"

    def __init__(self, fn, k0: float = math.inf, name: str = "custom"):
        self.fn = fn
        self.k0 = float(k0)
        self.name = name

    def __call__(self, r):
        return np.asarray(self.fn(np.asarray(r, dtype=float)), dtype=float)

    def describe(self):
        return {"kind": self.kind, "name": self.name, "k0": self.k0}


# spherical part ---------------------------------------------------------


def sphere_rule(d: int, n: int | None = None):
    """Fixed quadrature rule for the uniform law on S^{d-1}.

    d=1: the two points +-1.  d=2: ``n`` equally spaced angles (default 64).
    d=3: Gauss-Legendre in the polar cosine times equally spaced azimuths,
    exact for polynomials of degree 11 with the defaults.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if d == 2:
        n = n or 64
        th = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(n, 1.0 / n)
    if d == 3:
        nz = n or 6
        z, wz = np.polynomial.legendre.leggauss(nz)
        nphi = 2 * nz
        phi = 2 * np.pi * np.arange(nphi) / nphi
        Z, P = np.meshgrid(z, phi, indexing="ij")
        s = np.sqrt(1 - Z**2)
        dirs = np.stack([s * np.cos(P), s * np.sin(P), Z], axis=-1).reshape(-1, 3)
        w = (wz[:, None] / 2 * np.full(nphi, 1.0 / nphi)[None, :]).ravel()
        return dirs, w
    raise UnsupportedLaw("uniform spherical rule implemented for d <= 3")


class PolarLevyMeasure:
    """Levy measure in polar form.

    Discrete variant: ``directions`` (m, d) unit vectors, ``weights`` summing to
    1, one profile per atom.  Uniform variant: ``uniform=True`` and a single
    profile shared by every direction; integrals then use :func:`sphere_rule`.
    All weights zero gives the null measure.
    """

    def __init__(self, dimension, directions=None, weights=None, profiles=None,
                 uniform=False, validate=True, n_angular=None):
        self.dimension = d = int(dimension)
        if d < 1:
            raise InvalidLevyMeasure("dimension must be >= 1")
        self.uniform = bool(uniform)
        if self.uniform:
            if not isinstance(profiles, Profile):
                raise InvalidLevyMeasure("uniform sphere needs one profile")
            self.profile = profiles
            dirs, w = sphere_rule(d, n_angular)
            profiles = [profiles] * len(w)
        else:
            dirs = np.atleast_2d(np.asarray(directions, dtype=float))
            if dirs.shape[1] != d:
                raise InvalidLevyMeasure("direction vectors must have length d")
            w = np.asarray(weights, dtype=float).ravel()
            if isinstance(profiles, Profile):
                profiles = [profiles] * len(w)
            profiles = list(profiles)
            if len(profiles) != len(w) or len(w) != len(dirs):
                raise InvalidLevyMeasure("need one weight and one profile per direction")
            if np.any(w < 0):
                raise InvalidLevyMeasure("spherical weights must be non-negative")
            norms = np.linalg.norm(dirs, axis=1)
            if np.any(np.abs(norms - 1) > 1e-12):
                raise InvalidLevyMeasure("directions must be unit vectors")
            total = w.sum()
            if total != 0 and abs(total - 1) > 1e-12:
                raise InvalidLevyMeasure(f"spherical mass is {total!r}, expected 1")
        self.directions = dirs
        self.weights = w
        self.profiles = tuple(profiles)
        self.directions.setflags(write=False)
        self.weights.setflags(write=False)
        if validate:
            for p in self._distinct_profiles():
                ok, _ = profile_monotone(p)
                if not ok:
                    raise InvalidLevyMeasure(f"profile {p.describe()} is not non-increasing")

    @property
    def is_null(self):
        return not np.any(self.weights > 0)

    def _distinct_profiles(self):
        seen = {}
        for p in self.profiles:
            seen[id(p)] = p
        return list(seen.values())

    def atoms(self):
        """(direction, weight, profile) triples; a quadrature rule when uniform."""
        return [(x, w, p) for x, w, p in zip(self.directions, self.weights, self.profiles) if w > 0]

    def profile_at(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.dimension or abs(np.linalg.norm(x) - 1) > 1e-9:
            raise UnknownDirection("not a unit vector of the right dimension")
        if self.uniform:
            return self.profile
        hit = np.linalg.norm(self.directions - x[None, :], axis=1) < 1e-9
        if not np.any(hit):
            raise UnknownDirection(f"{x.tolist()} is not a spherical atom")
        return self.profiles[int(np.argmax(hit))]

    def sample_directions(self, rng, size):
        """Atom indices (discrete) or uniform unit vectors, as an (size, d) array and index."""
        if self.uniform:
            g = rng.standard_normal((size, self.dimension))
            return g / np.linalg.norm(g, axis=1, keepdims=True)
        idx = rng.choice(len(self.weights), size=size, p=self.weights)
        return self.directions[idx]

    def describe(self):
        if self.uniform:
            return {"uniform": True, "dimension": self.dimension, "profile": self.profile.describe()}
        return {
            "uniform": False,
            "dimension": self.dimension,
            "directions": self.directions.tolist(),
            "weights": self.weights.tolist(),
            "profiles": [p.describe() for p in self.profiles],
        }


def profile_monotone(p: Profile, lo=1e-8, hi=1e8, n=2001):
    r = np.geomspace(lo, hi, n)
    k = np.asarray(p(r), dtype=float)
    inc = np.diff(k)
    worst = float(np.max(inc)) if inc.size else 0.0
    nonneg = bool(np.all(k >= 0))
    ok = nonneg and worst <= 1e-12 * max(1.0, float(np.max(np.abs(k))))
    return ok, {"max_increase": worst, "min_value": float(np.min(k)), "grid": [lo, hi, n]}


@dataclass(frozen=True)
class SDLawSpec:
    """Self-decomposable target: mean, Levy measure, optional catalog tag."""

    mean: np.ndarray
    levy: PolarLevyMeasure
    closed_form: dict | None = None
    name: str = "custom"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).ravel()
        if m.size != self.levy.dimension:
            raise InvalidLevyMeasure("mean has the wrong dimension")
        m.setflags(write=False)
        object.__setattr__(self, "mean", m)
        if not self.levy.is_null and not math.isfinite(levy_moment(self.levy, "m1_large")):
            raise InvalidLevyMeasure("law needs a finite first moment")

    @property
    def dimension(self):
        return self.levy.dimension

    @property
    def family(self):
        return (self.closed_form or {}).get("family")

    def describe(self):
        return {
            "name": self.name,
            "mean": self.mean.tolist(),
            "closed_form": self.closed_form,
            "levy": self.levy.describe(),
        }


def _measure(law):
    return law.levy if isinstance(law, SDLawSpec) else law


def radial_profile_eval(law, x, r):
    """k_x(r) for the atom direction ``x`` (any unit vector if uniform)."""
    if not r > 0:
        raise NonPositiveRadius(f"r must be positive, got {r!r}")
    return float(_measure(law).profile_at(x)(r))


def levy_moment(law, which: str) -> float:
    """Moment functionals of nu; returns ``math.inf`` when the integral diverges.

    m2_total = int |u|^2 nu(du), m2_small / m2_large restrict to |u| <= 1 / >= 1,
    m1_large = int_{|u|>=1} |u| nu(du), m1_total = int |u| nu(du).
    """
    if which not in MOMENTS:
        raise ValueError(f"which must be one of {MOMENTS}")
    nu = _measure(law)
    total = 0.0
    cache = {}
    for _, w, p in nu.atoms():
        if id(p) not in cache:
            cache[id(p)] = p.moment(which)
        total += w * cache[id(p)]
    return float(total)


def check_admissible(law) -> dict:
    """Admissibility report; failures are reported, never raised."""
    nu = _measure(law)
    out = {}
    mass = float(np.sum(nu.weights))
    out["normalized_sphere"] = {"ok": abs(mass - 1) <= 1e-12, "mass": mass}
    profiles = [p for _, _, p in nu.atoms()] or list(nu.profiles[:1])
    uniq = {id(p): p for p in profiles}.values()
    mono = [profile_monotone(p) for p in uniq]
    out["profile_monotone"] = {"ok": all(m[0] for m in mono), "evidence": [m[1] for m in mono]}

    def safe(p, which):
        try:
            return p.moment(which)
        except (QuadratureFailure, ArithmeticError):
            return math.nan

    sj = [safe(p, "small_jump") for p in uniq]
    out["small_jump_integrable"] = {"ok": all(math.isfinite(v) for v in sj), "values": sj}
    fm = [safe(p, "m1_large") for p in uniq]
    out["first_moment_finite"] = {"ok": all(math.isfinite(v) for v in fm), "values": fm}
    # sup_x k_x(a+) over atoms; for the uniform variant one representative direction
    a_grid = [1e-3, 1e-1, 1.0, 10.0]
    vals = [[float(p(a * (1 + 1e-12))) for a in a_grid] for p in uniq]
    sup = [max(col) for col in zip(*vals)] if vals else [0.0] * len(a_grid)
    out["cond_kx"] = {
        "ok": all(math.isfinite(v) for v in sup),
        "a": a_grid,
        "sup_k": sup,
        "representative_only": nu.uniform,
    }
    out["all"] = all(v["ok"] for v in out.values())
    return out
