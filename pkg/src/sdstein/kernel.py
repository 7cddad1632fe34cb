"""Infinitely divisible Stein kernels, Stein discrepancy, Galerkin kernels and
Poincare ratios.

All nu-integrals are importance sampled from the probability measure
``|u|^2 nu(du) / m2`` with ``m2 = int |u|^2 nu(du)``, so that

    int g(u) nu(du) = m2 E[g(U) / |U|^2].

Increments of Lipschitz fields are O(|U|), which keeps every integrand
bounded near the origin.  Samples of Y are expected centered.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._estimate import Estimate
from .errors import (
    DegenerateDenominator,
    InfiniteSecondMomentNu,
    MomentMismatch,
    SingularSystem,
)
from .levy import SDLawSpec, levy_moment
from .sampling import SampleBatch
from .streams import stream


def _measure(law):
    return law.levy if isinstance(law, SDLawSpec) else law


def _points(y):
    pts = y.points if isinstance(y, SampleBatch) else np.asarray(y, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


def center(y):
    """Subtract the sample mean."""
    pts = _points(y)
    return pts - pts.mean(axis=0)


def sample_r2_jumps(law, n, rng):
    """n draws of U ~ |u|^2 nu(du) / m2; returns (U, m2)."""
    nu = _measure(law)
    m2 = levy_moment(nu, "m2_total")
    if not math.isfinite(m2):
        raise InfiniteSecondMomentNu("int |u|^2 nu(du) is infinite")
    if m2 == 0:
        raise InfiniteSecondMomentNu("the Levy measure has no mass")
    if nu.uniform:
        r = nu.profile.sample_r2(rng, n)
        return r[:, None] * nu.sample_directions(rng, n), m2
    atoms = nu.atoms()
    m2x = np.array([w * p.moment("m2_total") for _, w, p in atoms])
    owner = rng.choice(len(atoms), size=n, p=m2x / m2x.sum())
    U = np.zeros((n, nu.dimension))
    for j, (x, _, p) in enumerate(atoms):
        sel = owner == j
        U[sel] = p.sample_r2(rng, int(sel.sum()))[:, None] * x
    return U, m2


# vector fields ---------------------------------------------------------------


class VectorField:
    """A map R^d -> R^d evaluated row-wise on (n, d) arrays."""

    name = "field"

    def __init__(self, d):
        self.d = int(d)

    def __call__(self, y):
        raise NotImplementedError

    def describe(self):
        return {"name": self.name}


class IdentityField(VectorField):
    name = "identity"

    def __call__(self, y):
        return np.array(y, dtype=float)


class LinearField(VectorField):
    """y_j e_i."""

    name = "linear"

    def __init__(self, d, i, j):
        super().__init__(d)
        self.i, self.j = int(i), int(j)

    def __call__(self, y):
        out = np.zeros_like(y)
        out[:, self.i] = y[:, self.j]
        return out

    def describe(self):
        return {"name": self.name, "i": self.i, "j": self.j}


class TanhField(VectorField):
    """tanh((y_i - c) / s) e_i."""

    name = "tanh"

    def __init__(self, d, i, c=0.0, s=1.0):
        super().__init__(d)
        self.i, self.c, self.s = int(i), float(c), float(s)

    def __call__(self, y):
        out = np.zeros_like(y)
        out[:, self.i] = np.tanh((y[:, self.i] - self.c) / self.s)
        return out

    def describe(self):
        return {"name": self.name, "i": self.i, "c": self.c, "s": self.s}


class BumpField(VectorField):
    """exp(-|y - c|^2 / (2 s^2)) e_i."""

    name = "bump"

    def __init__(self, d, i, c, s=1.0):
        super().__init__(d)
        self.i, self.c, self.s = int(i), np.asarray(c, dtype=float), float(s)

    def __call__(self, y):
        out = np.zeros_like(y)
        out[:, self.i] = np.exp(-0.5 * np.sum((y - self.c) ** 2, axis=1) / self.s**2)
        return out

    def describe(self):
        return {"name": self.name, "i": self.i, "c": self.c.tolist(), "s": self.s}


class CallableField(VectorField):
    name = "callable"

    def __init__(self, d, fn, name="callable"):
        super().__init__(d)
        self.fn, self.name = fn, name

    def __call__(self, y):
        return np.asarray(self.fn(y), dtype=float).reshape(y.shape)


def default_basis(y, K=4):
    """Linear fields y_j e_i, tanh fields and K radial bumps per coordinate.

    Centers and widths come from the sample ``y``; the span contains the
    identity.
    """
    y = _points(y)
    d = y.shape[1]
    sd = y.std(axis=0)
    s = float(np.mean(sd)) or 1.0
    basis = [LinearField(d, i, j) for i in range(d) for j in range(d)]
    basis += [TanhField(d, i, 0.0, sd[i] or 1.0) for i in range(d)]
    qs = np.linspace(0, 1, K + 2)[1:-1]
    for i in range(d):
        for q in np.quantile(y[:, i], qs):
            c = np.zeros(d)
            c[i] = q
            basis.append(BumpField(d, i, c, s))
    return basis


@dataclass
class SteinKernelFn:
    """tau(y) = sum_i c_i f_i(y) - offset, or a closed-form field."""

    fields: list
    coeffs: np.ndarray
    offset: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def identity(cls, d):
        return cls([IdentityField(d)], np.ones(1))

    @classmethod
    def from_callable(cls, d, fn, name="callable"):
        return cls([CallableField(d, fn, name)], np.ones(1))

    @property
    def d(self):
        return self.fields[0].d

    def __call__(self, y):
        y = _points(y)
        out = np.zeros_like(y)
        for c, f in zip(self.coeffs, self.fields):
            out += c * f(y)
        if self.offset is not None:
            out -= self.offset
        return out

    def centered(self, y):
        """Copy with the mean over ``y`` removed."""
        y = _points(y)
        off = np.mean(SteinKernelFn(self.fields, self.coeffs)(y), axis=0)
        return SteinKernelFn(self.fields, self.coeffs, off, dict(self.meta))

    def shifted(self, v):
        off = np.zeros(self.d) if self.offset is None else self.offset
        return SteinKernelFn(self.fields, self.coeffs, off - np.asarray(v, dtype=float), dict(self.meta))


# discrepancy -----------------------------------------------------------------


def _increments(law, y, tau, n_jumps, seed, tag):
    """Per-draw |tau(Y+U) - tau(Y) - U|^2 / |U|^2 and m2."""
    y = _points(y)
    rng = stream(seed, tag)
    Y = np.repeat(y, n_jumps, axis=0)
    U, m2 = sample_r2_jumps(law, len(Y), rng)
    g = tau(Y + U) - tau(Y) - U
    r2 = np.sum(U**2, axis=1)
    return np.sum(g**2, axis=1) / r2, m2, n_jumps


def _per_y(v, n_jumps):
    return v.reshape(-1, n_jumps).mean(axis=1)


def discrepancy_squared(law, samples_y, tau, n_jumps=1, seed=0) -> Estimate:
    """E int |tau(Y+u) - tau(Y) - u|^2 nu(du) with SE (clustered by Y)."""
    v, m2, k = _increments(law, samples_y, tau, n_jumps, seed, "discrepancy")
    per = m2 * _per_y(v, k)
    return Estimate(float(per.mean()), float(per.std(ddof=1) / math.sqrt(len(per))) if len(per) > 1 else 0.0)


def discrepancy(law, samples_y, tau, n_jumps=1, seed=0) -> Estimate:
    """S(tau) with SE by the delta method; an upper bound on the Stein discrepancy
    when tau is a Stein kernel."""
    s2 = discrepancy_squared(law, samples_y, tau, n_jumps, seed)
    S = math.sqrt(max(s2.value, 0.0))
    se = s2.se / (2 * S) if S > 0 else math.sqrt(s2.se)
    return Estimate(S, float(se))


# Galerkin ---------------------------------------------------------------------


@dataclass
class GalerkinSystem:
    basis: list
    A: np.ndarray
    L: np.ndarray
    coeffs: np.ndarray
    ridge: float
    condition: float
    n: int
    meta: dict = field(default_factory=dict)

    @property
    def residual(self):
        return float(np.linalg.norm(self.A @ self.coeffs - self.L))

    @property
    def min_eig(self):
        return float(np.linalg.eigvalsh(self.A)[0])

    def to_json(self, path=None):
        doc = {
            "basis": [f.describe() for f in self.basis],
            "A": self.A.tolist(),
            "L": self.L.tolist(),
            "coeffs": self.coeffs.tolist(),
            "ridge": self.ridge,
            "condition": self.condition,
            "n": self.n,
            **{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.meta.items()},
        }
        text = json.dumps(doc, indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text)
        return text


GALERKIN_CHUNK = 1 << 16


def _field_increments(law, y, basis, n_jumps, rng):
    Y = np.repeat(y, n_jumps, axis=0)
    U, m2 = sample_r2_jumps(law, len(Y), rng)
    r = np.sqrt(np.sum(U**2, axis=1))[:, None]
    Phi = np.stack([(f(Y + U) - f(Y)) / r for f in basis], axis=1)  # (N, m, d)
    return Phi, m2


def _galerkin_chunks(law, y, basis, n_jumps, seed):
    for k, a in enumerate(range(0, len(y), GALERKIN_CHUNK)):
        yc = y[a:a + GALERKIN_CHUNK]
        Phi, m2 = _field_increments(law, yc, basis, n_jumps, stream(seed, "galerkin", k))
        F = np.stack([f(yc) for f in basis], axis=1)
        yield yc, Phi, F, m2


def galerkin_solve(law, samples_y, basis=None, ridge=None, n_jumps=1, seed=0, center_y=True,
                   max_cond=1e12):
    """Solve A c = L on the span of ``basis`` by Monte Carlo.

    A_ij = E int <f_i(Y+u) - f_i(Y), f_j(Y+u) - f_j(Y)> nu(du), L_i = E <Y, f_i(Y)>.
    Returns the mean-removed kernel sum c_i f_i and the system.  The system
    meta records ``fit_noise``, the first-order prediction of the discrepancy
    added by estimating A and L (sqrt of tr(M^-1 Sigma M^-1 A) / n with Sigma the
    per-sample covariance of A c - L), ``coef_cov`` = M^-1 Sigma M^-1 / n and
    ``energy_fit_se``, the matching first-order SE of A(tau, tau).
    """
    y = center(samples_y) if center_y else _points(samples_y)
    if basis is None:
        basis = default_basis(y)
    m = len(basis)
    n = len(y)
    A = np.zeros((m, m))
    yF = np.zeros(m)
    Fsum = np.zeros((m, y.shape[1]))
    m2 = 0.0
    for yc, Phi, F, m2 in _galerkin_chunks(law, y, basis, n_jumps, seed):
        A += np.einsum("nid,njd->ij", Phi, Phi)
        yF += np.einsum("nd,nid->i", yc, F)
        Fsum += F.sum(axis=0)
    A = m2 * A / (n * n_jumps)
    A = 0.5 * (A + A.T)
    Fbar = Fsum / n
    L = yF / n - Fbar @ y.mean(axis=0)
    lam = 1e-8 * np.trace(A) / m if ridge is None else float(ridge)
    M = A + lam * np.eye(m)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularSystem(f"Galerkin matrix condition number {cond:.3g} exceeds {max_cond:g}")
    c = np.linalg.solve(M, L)
    # second pass on the same streams: per-sample covariance of A c - L
    S1 = np.zeros(m)
    S2 = np.zeros((m, m))
    for yc, Phi, F, _ in _galerkin_chunks(law, y, basis, n_jumps, seed):
        proj = np.einsum("njd,j->nd", Phi, c)
        a = m2 * np.einsum("nid,nd->ni", Phi, proj)
        a = a.reshape(len(yc), n_jumps, m).mean(axis=1)
        g = a - np.einsum("nd,nid->ni", yc, F - Fbar)
        S1 += g.sum(axis=0)
        S2 += g.T @ g
    Sigma = S2 / n - np.outer(S1 / n, S1 / n)
    Minv = np.linalg.inv(M)
    cov = Minv @ Sigma @ Minv / n
    fit_noise = math.sqrt(max(float(np.trace(cov @ A)), 0.0))
    # A(tau, tau) = c'Ac moves with the fit at first order, gradient 2 A c
    g = 2 * A @ c
    energy_fit_se = math.sqrt(max(float(g @ cov @ g), 0.0))
    tau = SteinKernelFn(list(basis), c).centered(y)
    tau.meta.update({"galerkin": True, "m": m})
    system = GalerkinSystem(list(basis), A, L, c, float(lam), cond, n,
                            {"m2_total": m2, "n_jumps": n_jumps, "fit_noise": fit_noise,
                             "energy_fit_se": energy_fit_se, "coef_cov": cov})
    return tau, system


def energy_identity(law, samples_y, tau, n_jumps=1, seed=1):
    """A(tau, tau) and L(tau) on the given (ideally held-out) samples, with the SE
    of their difference computed from paired per-sample contributions."""
    y = center(samples_y)
    rng = stream(seed, "energy")
    Y = np.repeat(y, n_jumps, axis=0)
    U, m2 = sample_r2_jumps(law, len(Y), rng)
    a = m2 * _per_y(np.sum((tau(Y + U) - tau(Y)) ** 2, axis=1) / np.sum(U**2, axis=1), n_jumps)
    ty = tau(y)
    l = np.sum(y * (ty - ty.mean(axis=0)), axis=1)
    n = len(y)
    se = lambda v: float(v.std(ddof=1) / math.sqrt(n))
    return {
        "A": Estimate(float(a.mean()), se(a)),
        "L": Estimate(float(l.mean()), se(l)),
        "difference": Estimate(float(a.mean() - l.mean()), se(a - l)),
        "second_moment": Estimate(float(np.mean(np.sum(y**2, axis=1))), se(np.sum(y**2, axis=1))),
    }


# Poincare ----------------------------------------------------------------------


@dataclass
class PoincareResult:
    value: float
    se: float
    argmax: int
    rows: list

    @property
    def best(self):
        return self.rows[self.argmax]


def coordinate_functions(d):
    from .testfunctions import Linear

    out = []
    for j in range(d):
        a = np.zeros(d)
        a[j] = 1.0
        f = Linear(a)
        f.name = f"coordinate_{j}"
        out.append(f)
    return out


def default_scalar_dictionary(y, K=4):
    """Coordinates, tanh ramps, bumps and cosines scaled to the sample."""
    from .testfunctions import Cosine, GaussianBump, TanhRamp

    y = _points(y)
    d = y.shape[1]
    sd = y.std(axis=0)
    s = float(np.mean(sd)) or 1.0
    out = coordinate_functions(d)
    qs = np.linspace(0, 1, K + 2)[1:-1]
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        for q in np.quantile(y[:, j], qs):
            out.append(TanhRamp(e, 0.5, sd[j] or 1.0, q))
            c = np.mean(y, axis=0)
            c[j] = q
            out.append(GaussianBump(c, s))
        for w in (0.5, 1.0, 2.0):
            out.append(Cosine(e * w / s, 1.0))
    return out


def poincare_ratio(samples_y, law_nu, dictionary=None, n_jumps=1, seed=0, min_den=1e-12):
    """max over the dictionary of Var f(Y) / E int |f(Y+u) - f(Y)|^2 nu(du).

    A lower bound on the Poincare constant U(Y, nu).  SEs use the influence
    function of a ratio of means.
    """
    y = _points(samples_y)
    if dictionary is None:
        dictionary = default_scalar_dictionary(y)
    rng = stream(seed, "poincare")
    Y = np.repeat(y, n_jumps, axis=0)
    U, m2 = sample_r2_jumps(law_nu, len(Y), rng)
    r2 = np.sum(U**2, axis=1)
    n = len(y)
    rows = []
    for k, f in enumerate(dictionary):
        fy = f.value(y)
        num = (fy - fy.mean()) ** 2
        den = m2 * _per_y((f.value(Y + U) - f.value(Y)) ** 2 / r2, n_jumps)
        D = float(den.mean())
        if not D > min_den:
            raise DegenerateDenominator(f"dictionary entry {k} ({f.name}) has denominator {D:.3g}")
        R = float(num.mean() * n / (n - 1)) / D
        psi = (num - R * den) / D
        rows.append({"index": k, "name": f.name, "ratio": R, "se": float(psi.std(ddof=1) / math.sqrt(n)),
                     "variance": float(num.mean()), "dirichlet": D})
    best = int(np.argmax([r["ratio"] for r in rows]))
    return PoincareResult(rows[best]["ratio"], rows[best]["se"], best, rows)


def bound_from_poincare(law, samples_y, U_hat, mode="matched", moment_tol=None):
    """Smooth-Wasserstein bound from a Poincare constant.

    matched: (d/2) m2 sqrt(U - 1), requires E|Y|^2 = m2 within ``moment_tol``
    (default 3 SE of the sample second moment).
    general: (d/2) sqrt(m2) (U E|Y|^2 + m2 - 2 E|Y|^2)^{1/2}.
    """
    y = center(samples_y)
    d = y.shape[1]
    m2 = levy_moment(law, "m2_total")
    if not math.isfinite(m2):
        raise InfiniteSecondMomentNu("int |u|^2 nu(du) is infinite")
    sq = np.sum(y**2, axis=1)
    ey2 = float(sq.mean())
    if mode == "matched":
        tol = 3 * float(sq.std(ddof=1) / math.sqrt(len(sq))) if moment_tol is None else moment_tol
        if abs(ey2 - m2) > tol:
            raise MomentMismatch(f"E|Y|^2 = {ey2:.6g} differs from m2 = {m2:.6g} by more than {tol:.3g}")
        if U_hat < 1:
            raise ValueError("matched mode needs U >= 1")
        return 0.5 * d * m2 * math.sqrt(U_hat - 1)
    if mode == "general":
        return 0.5 * d * math.sqrt(m2) * math.sqrt(max(U_hat * ey2 + m2 - 2 * ey2, 0.0))
    raise ValueError("mode must be 'matched' or 'general'")


def discrepancy_bound_from_poincare(law, samples_y, U_hat):
    """(U E|Y|^2 + m2 - 2 E|Y|^2)^{1/2}, the discrepancy-side companion bound."""
    y = center(samples_y)
    m2 = levy_moment(law, "m2_total")
    ey2 = float(np.mean(np.sum(y**2, axis=1)))
    return math.sqrt(max(U_hat * ey2 + m2 - 2 * ey2, 0.0))


def stein_bound(law, S: Estimate):
    """(d/2) sqrt(m2) S and its SE."""
    m2 = levy_moment(law, "m2_total")
    d = _measure(law).dimension
    k = 0.5 * d * math.sqrt(m2)
    return Estimate(k * S.value, k * S.se)


__all__ = [
    "BumpField", "CallableField", "GalerkinSystem", "IdentityField", "LinearField", "PoincareResult",
    "SteinKernelFn", "TanhField", "VectorField", "bound_from_poincare", "center",
    "coordinate_functions", "default_basis", "default_scalar_dictionary", "discrepancy",
    "discrepancy_bound_from_poincare", "discrepancy_squared", "energy_identity", "galerkin_solve",
    "poincare_ratio", "sample_r2_jumps", "stein_bound",
]
