"""Characteristic functions of the target, of the ratio laws mu_t, and
densities of mu_t by lattice Fourier inversion.

All laws are written with full compensation,

    log phi(xi) = i <xi, EX> + int (e^{i<xi,u>} - 1 - i<xi,u>) nu(du),

so the per-atom radial factor is the profile exponent evaluated at
``s = <xi, x>``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import GridTooCoarse, NonIntegrableCF, UnsupportedLaw
from .levy import Profile, SDLawSpec

ROUTES = ("auto", "closed_form", "quadrature")


def _as_xi(law, xi):
    xi = np.asarray(xi, dtype=float)
    d = law.dimension
    if d == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
        xi = xi[..., None]
    if xi.shape[-1] != d:
        raise ValueError(f"frequency must have last axis of length {d}")
    return xi


def _closed(law, xi):
    fam = law.family
    cf = law.closed_form or {}
    if fam == "rot_inv_stable":
        return -cf["C"] * np.linalg.norm(xi, axis=-1) ** cf["alpha"] + 0j
    if fam == "symmetric_stable":
        proj = np.abs(xi @ law.levy.directions.T) ** cf["alpha"]
        return -cf["C"] * (proj @ law.levy.weights) + 0j
    if fam == "multi_gamma":
        z = xi / np.asarray(cf["beta"])
        return np.sum(np.asarray(cf["alpha"]) * (-np.log1p(-1j * z) - 1j * z), axis=-1)
    return None


def _jump_exponent(law, xi, generic):
    out = np.zeros(xi.shape[:-1], dtype=complex)
    for x, w, p in law.levy.atoms():
        s = xi @ x
        out += w * (Profile.exponent(p, s) if generic else p.exponent(s))
    return out


def log_cf(law: SDLawSpec, xi, route: str = "auto"):
    """log phi(xi); ``xi`` has shape (..., d), or (...) when d=1."""
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}")
    xi = _as_xi(law, xi)
    drift = 1j * (xi @ law.mean)
    jump = None
    if route in ("auto", "closed_form"):
        jump = _closed(law, xi)
        if jump is None:
            # closed-form radial exponents per atom (exact for atom lists)
            jump = _jump_exponent(law, xi, generic=False)
    else:
        jump = _jump_exponent(law, xi, generic=True)
    out = drift + jump
    return out if out.ndim else complex(out)


def log_cf_ratio(law: SDLawSpec, xi, t, route: str = "auto"):
    """log phi(xi) - log phi(e^{-t} xi), the log-CF of mu_t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    xi = _as_xi(law, xi)
    if t == 0:
        out = np.zeros(xi.shape[:-1], dtype=complex)
        return out if out.ndim else 0j
    if math.isinf(t):
        return log_cf(law, xi, route)
    return log_cf(law, xi, route) - log_cf(law, math.exp(-t) * xi, route)


def _radial_scale(law, t, theta):
    """1 / s where -Re log phi_t(s theta) first reaches 1."""
    f = lambda s: -log_cf_ratio(law, s * theta, t).real - 1.0
    hi = 1.0
    for _ in range(200):
        if f(hi) > 0:
            break
        hi *= 2.0
    else:
        raise NonIntegrableCF("|phi_t| does not decay along the probe direction")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return 1.0 / hi


def _probe_dirs(d):
    dirs = list(np.eye(d))
    if d > 1:
        dirs.append(np.ones(d) / math.sqrt(d))
        v = np.ones(d)
        v[0] = -1
        dirs.append(v / math.sqrt(d))
    return dirs


def natural_scale(law, t):
    return max(_radial_scale(law, t, th) for th in _probe_dirs(law.dimension))


def frequency_cutoff(law, t, level=1e-8):
    """Smallest Xi with |phi_t| < level on the probe rays beyond Xi (bisection)."""
    target = -math.log(level)
    out = 0.0
    for th in _probe_dirs(law.dimension):
        f = lambda s: -log_cf_ratio(law, s * th, t).real - target
        hi = 1.0
        for _ in range(200):
            if f(hi) > 0:
                break
            hi *= 2.0
        else:
            raise NonIntegrableCF(f"|phi_t| stays above {level:g}")
        lo = 0.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
        out = max(out, hi)
    return out


def tail_mass(law, t, Xi, n=4097):
    """Relative mass of |phi_t| s^{d-1} beyond Xi along probe rays, max over rays."""
    d = law.dimension
    worst = 0.0
    for th in _probe_dirs(d):
        s = np.linspace(0.0, 8.0 * Xi, n)
        a = np.abs(np.exp(log_cf_ratio(law, s[:, None] * th, t))) * s ** (d - 1)
        total = integrate.trapezoid(a, s)
        inside = integrate.trapezoid(a[s <= Xi], s[s <= Xi])
        worst = max(worst, (total - inside) / total if total > 0 else 1.0)
    return worst


@dataclass
class DensityGrid:
    dimension: int
    extent: float
    n: int
    center: np.ndarray
    values: np.ndarray
    t: float
    meta: dict = field(default_factory=dict)

    @property
    def spacing(self):
        return self.extent / self.n

    @property
    def axis(self):
        return -self.extent / 2 + self.spacing * np.arange(self.n)

    def axes(self):
        return [c + self.axis for c in self.center]

    @property
    def cell_volume(self):
        return self.spacing ** self.dimension

    def mass(self):
        return float(self.values.sum() * self.cell_volume)

    def points(self):
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_csv(self, path):
        path = Path(path)
        pts = self.points()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(self.dimension)] + ["q"])
            for row, v in zip(pts, self.values.ravel()):
                w.writerow([repr(float(c)) for c in row] + [repr(float(v))])
        side = {"dimension": self.dimension, "extent": self.extent, "n": self.n,
                "center": self.center.tolist(), "t": self.t, **self.meta}
        path.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True))
        return path


def density_by_inversion(law: SDLawSpec, t: float, extent: float | None = None,
                         n: int | None = None, center=None) -> DensityGrid:
    """q_t on an n^d lattice of side ``extent`` by FFT of phi_t.

    ``t = inf`` inverts the target CF.  By default the extent is 64 natural
    scales and ``n`` is the smallest power of two whose Nyquist frequency
    passes the cutoff where |phi_t| < 1e-8.
    """
    d = law.dimension
    if d > 3:
        raise UnsupportedLaw("lattice inversion is limited to d <= 3")
    if not t > 0:
        raise ValueError("t must be positive")
    scale = natural_scale(law, t)
    if extent is None:
        extent = 64.0 * scale
    if extent < 8.0 * scale:
        raise GridTooCoarse(f"extent {extent:g} is below 8 natural scales ({8 * scale:g})")
    if n is None:
        Xi = frequency_cutoff(law, t)
        n = 1 << max(4, math.ceil(math.log2(Xi * extent / math.pi)))
    if n & (n - 1):
        raise ValueError("n must be a power of two")
    Xi = math.pi * n / extent
    tm = tail_mass(law, t, Xi)
    if tm > 1e-6:
        raise NonIntegrableCF(f"|phi_t| tail mass beyond the frequency box is {tm:.3g}")
    if n ** d > 1 << 24:
        raise UnsupportedLaw("lattice too large")
    center = np.asarray(law.mean if center is None else center, dtype=float).ravel()
    h = extent / n
    w1 = 2 * math.pi * np.fft.fftfreq(n, d=h)
    mesh = np.meshgrid(*([w1] * d), indexing="ij")
    xi = np.stack(mesh, axis=-1)
    phi = np.exp(log_cf_ratio(law, xi, t))
    # shift to the lattice origin center - extent/2 on every axis
    origin = center - extent / 2
    phase = np.exp(-1j * (xi @ origin))
    q = np.fft.fftn(phi * phase).real / extent**d
    return DensityGrid(d, float(extent), int(n), center, q, float(t),
                       {"law": law.name, "frequency_cutoff": Xi, "tail_mass": tm})


def symmetric_stable_pdf(x, alpha, C):
    """(1/pi) int_0^inf cos(xi x) exp(-C xi^alpha) dxi, by QAWF."""
    out = []
    for v in np.atleast_1d(x):
        g = lambda s: math.exp(-C * s**alpha)
        if v == 0:
            val, _ = integrate.quad(g, 0, np.inf, epsabs=1e-13)
        else:
            val, _ = integrate.quad(g, 0, np.inf, weight="cos", wvar=abs(v), epsabs=1e-13)
        out.append(val / math.pi)
    return np.array(out)


def density_conditions(law: SDLawSpec, t_grid=(0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0), extent=None):
    """Numerical check of the gradient-integrability conditions on q_t.

    For each t: size of q_t on the lattice boundary relative to its peak
    (decay at infinity) and
    G(t) = max_i int |d_i q_t|, from the spectral derivative.  The time
    integral int e^{-2t} G(t) dt is judged finite when G grows at most like
    t^{-p} with p < 1 as t -> 0 (log-log slope of the two smallest t).
    """
    d = law.dimension
    rows = []
    for t in t_grid:
        grid = density_by_inversion(law, t, extent=extent)
        h = grid.spacing
        G = 0.0
        for i in range(d):
            dq = np.gradient(grid.values, h, axis=i)
            G = max(G, float(np.abs(dq).sum() * grid.cell_volume))
        edge = [np.take(grid.values, [0, -1], axis=i) for i in range(d)]
        edge_max = max(float(np.max(np.abs(e))) for e in edge)
        rows.append({"t": t, "grad_l1": G, "edge_rel": edge_max / float(np.max(grid.values)),
                     "mass": grid.mass()})
    t0, t1 = rows[0]["t"], rows[1]["t"]
    p = -math.log(rows[1]["grad_l1"] / rows[0]["grad_l1"]) / math.log(t1 / t0)
    ok = p < 1 and all(r["edge_rel"] < 1e-2 for r in rows)
    return {"ok": bool(ok), "small_t_exponent": p, "rows": rows, "law": law.name}
