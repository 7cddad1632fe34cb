"""Empirical Wasserstein distances, smooth-Wasserstein lower bounds over
certified dictionaries, Gaussian mollification and the smoothing-rate curve.

For two empirical measures of the same size every dictionary function with
Lipschitz constant <= 1 satisfies |mean_A h - mean_B h| <= W_1(A, B), so

    lb_r2 <= lb_r1 <= W_1 <= W_2

holds exactly when the r=2 dictionary is contained in the r=1 one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import EmptyDictionary, QuadratureFailure, SizeMismatch, SizeTooLarge
from .levy import SDLawSpec
from .sampling import SampleBatch, jump_paths, stable_paths
from .testfunctions import Cosine, GaussianBump, SmoothTestFunction, TanhRamp

MAX_ASSIGNMENT = 4096
SQRT_2_OVER_PI = math.sqrt(2 / math.pi)


def _points(a):
    pts = a.points if isinstance(a, SampleBatch) else np.asarray(a, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


# empirical transport ----------------------------------------------------------


@dataclass
class Transport:
    value: float
    p: int
    assignment: np.ndarray
    costs: np.ndarray  # per-pair |a_i - b_sigma(i)|

    def __float__(self):
        return self.value

    @property
    def se(self):
        """Spread of the matched pair costs, a rough proxy for sampling error."""
        c = self.costs**self.p
        n = len(c)
        if n < 2:
            return 0.0
        se_p = float(c.std(ddof=1) / math.sqrt(n))
        v = float(c.mean())
        return se_p / (self.p * v ** (1 - 1 / self.p)) if v > 0 else se_p ** (1 / self.p)


def optimal_transport(A, B, p=1) -> Transport:
    a, b = _points(A), _points(B)
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if len(a) != len(b) or a.shape[1] != b.shape[1]:
        raise SizeMismatch(f"batches have shapes {a.shape} and {b.shape}")
    if len(a) > MAX_ASSIGNMENT:
        raise SizeTooLarge(f"n = {len(a)} exceeds the exact-assignment cap {MAX_ASSIGNMENT}")
    D = cdist(a, b)
    rows, cols = linear_sum_assignment(D**p)
    costs = D[rows, cols]
    value = float(np.mean(costs**p) ** (1 / p))
    return Transport(value, p, cols, costs)


def wasserstein_empirical(A, B, p=1) -> float:
    """((1/n) min_sigma sum |a_i - b_sigma(i)|^p)^{1/p} by exact assignment."""
    return optimal_transport(A, B, p).value


# dictionaries -----------------------------------------------------------------


class LipschitzSeed:
    """A Lipschitz function with certified constant and sup-norm."""

    def __init__(self, d, fn, lip, sup, name="seed"):
        self.d, self.fn, self.lip, self.sup, self.name = int(d), fn, float(lip), float(sup), name

    def __call__(self, x):
        return self.fn(x)


def norm_cone(center, radius=1.0):
    """min(|x - c|, radius) with radius <= 1: 1-Lipschitz and bounded by 1."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    r = min(float(radius), 1.0)
    fn = lambda x: np.minimum(np.linalg.norm(x - c, axis=1), r)
    return LipschitzSeed(c.size, fn, 1.0, r, f"norm_cone{np.round(c, 3).tolist()}")


def linear_seed(a, b=0.0):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    return LipschitzSeed(a.size, lambda x: x @ a + b, float(np.linalg.norm(a)), math.inf, "linear")


def _hermite_rule(d, n):
    z, w = np.polynomial.hermite_e.hermegauss(n)  # weight e^{-z^2/2}
    w = w / w.sum()
    mesh = np.meshgrid(*([z] * d), indexing="ij")
    Z = np.stack([m.ravel() for m in mesh], axis=1)
    Wm = np.meshgrid(*([w] * d), indexing="ij")
    W = np.prod(np.stack([m.ravel() for m in Wm], axis=1), axis=1)
    return Z, W


class Mollified(SmoothTestFunction):
    """h_eps(x) = E h(x + eps Z), Z standard normal, by tensor Gauss-Hermite.

    The quadrature value is a convex combination of translates of h, so it keeps
    the seed's Lipschitz constant and sup-norm exactly.  Derivatives use the
    Gaussian integration-by-parts forms E[h(x + eps Z) Z] / eps and
    E[h(x + eps Z)(Z Z^T - I)] / eps^2.  Certified bounds:
    M0 = sup h, M1 = lip h, M2 = sqrt(2/pi) lip h / eps.
    """

    name = "mollified"
    grad_decays = False

    def __init__(self, seed: LipschitzSeed, eps, nodes=32, chunk=4096):
        if not eps > 0:
            raise ValueError("eps must be positive")
        super().__init__(seed.d, (seed.sup, seed.lip, SQRT_2_OVER_PI * seed.lip / eps))
        self.seed, self.eps, self.chunk = seed, float(eps), int(chunk)
        self.Z, self.W = _hermite_rule(seed.d, nodes)
        self.name = f"mollified_{seed.name}"

    def _moments(self, x, order):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.d == 1 and x.shape[1] != 1:
            x = x.reshape(-1, 1)
        d = self.d
        out0 = np.empty(len(x))
        out1 = np.empty((len(x), d)) if order >= 1 else None
        out2 = np.empty((len(x), d, d)) if order >= 2 else None
        step = max(1, self.chunk // max(1, len(self.W) // 64))
        for a in range(0, len(x), step):
            xc = x[a:a + step]
            pts = xc[:, None, :] + self.eps * self.Z[None, :, :]
            v = self.seed(pts.reshape(-1, d)).reshape(len(xc), len(self.W))
            if not np.all(np.isfinite(v)):
                raise QuadratureFailure("seed returned non-finite values")
            vw = v * self.W
            out0[a:a + step] = vw.sum(axis=1)
            if order >= 1:
                out1[a:a + step] = vw @ self.Z / self.eps
            if order >= 2:
                zz = self.Z[:, :, None] * self.Z[:, None, :] - np.eye(d)[None]
                out2[a:a + step] = np.einsum("nk,kij->nij", vw, zz) / self.eps**2
        return out0, out1, out2

    def value(self, x):
        return self._moments(x, 0)[0]

    def grad(self, x):
        return self._moments(x, 1)[1]

    def hess(self, x):
        return self._moments(x, 2)[2]

    def describe(self):
        return {"name": self.name, "eps": self.eps, "M": list(self.M)}


def mollify(seed: LipschitzSeed, eps, nodes=32) -> Mollified:
    """Gaussian mollification of a 1-Lipschitz seed."""
    if seed.lip > 1 + 1e-12:
        raise ValueError("seed must have Lipschitz constant <= 1")
    return Mollified(seed, eps, nodes)


@dataclass
class TestFunctionDictionary:
    __test__ = False  # keep pytest from collecting it

    functions: list
    r: int
    recipe: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def certified(self):
        return all(f.in_class(self.r) for f in self.functions)

    def names(self):
        return [f.name for f in self.functions]


def _unit_dirs(d, k):
    if d == 1:
        return [np.array([1.0])]
    if d == 2:
        ang = np.pi * np.arange(k) / k
        return [np.array([math.cos(a), math.sin(a)]) for a in ang]
    g = np.random.default_rng(0).standard_normal((k, d))
    return list(g / np.linalg.norm(g, axis=1, keepdims=True))


def _unique(funcs):
    seen, out = set(), []
    for f in funcs:
        key = (f.name, str(f.describe()))
        if key not in seen:
            seen.add(key)
            out.append(f)
    return out


def _interleave(groups, k):
    out = []
    its = [iter(_unique(g)) for g in groups]
    while len(out) < k and its:
        alive = []
        for it in its:
            f = next(it, None)
            if f is not None:
                out.append(f)
                alive.append(it)
                if len(out) == k:
                    break
        its = alive
    return out


def default_dictionary(d, r=2, center=None, scale=1.0, per_dim=64):
    """Certified dictionary for H_r with ``per_dim * d`` functions at r = 2.

    Families: tanh ramps along a few directions, cosines with |w| <= 1,
    Gaussian bumps of width >= 1 and mollified norm cones with eps >= 1.  The
    r = 1 dictionary adds steeper members (ramps, cosines and mollified cones
    with M2 > 1 but M0, M1 <= 1), so it is a superset of the r = 2 one.
    """
    if r not in (1, 2):
        raise ValueError("r must be 1 or 2")
    c0 = np.zeros(d) if center is None else np.asarray(center, dtype=float).ravel()
    s = max(float(scale), 1.0)
    dirs = _unit_dirs(d, 1 if d == 1 else 4)
    offsets = np.linspace(-2, 2, 9)
    ramps = [TanhRamp(v, 0.5, w * s, float(v @ c0) + o * s)
             for w in (1.0, 2.0, 3.0) for o in offsets for v in dirs]
    cosines = [Cosine(v * fr / s, 1.0, ph - fr / s * float(v @ c0))
               for fr in (1.0, 0.5, 0.25, 0.75) for ph in np.arange(4) * math.pi / 4 for v in dirs]
    bumps = [GaussianBump(c0 + o * s * v, w * s, 1.0) for w in (1.0, 2.0) for o in offsets for v in dirs]
    cones = [mollify(norm_cone(c0 + o * s * v, 1.0), s, nodes=32 if d == 1 else 16)
             for o in offsets[::2] for v in dirs]
    funcs = _interleave([ramps, cosines, bumps, cones], per_dim * d)
    recipe = {"kind": "default", "scale": s, "per_dim": per_dim, "center": c0.tolist()}
    if r == 2:
        return TestFunctionDictionary(funcs, 2, recipe)
    steep = [TanhRamp(v, 0.5 * w, w * s, float(v @ c0) + o * s)
             for w in (0.5, 0.25) for o in offsets[::2] for v in dirs]
    fast = [Cosine(v * fr / s, s / fr, -fr / s * float(v @ c0)) for fr in (2.0, 4.0) for v in dirs]
    sharp = [mollify(norm_cone(c0 + o * s * v, 1.0), 0.2 * s, nodes=32 if d == 1 else 16)
             for o in (-1.0, 0.0, 1.0) for v in dirs[:2]]
    extra = _interleave([steep, fast, sharp], 32 * d)
    return TestFunctionDictionary(funcs + extra, 1, recipe)


def dictionary_for(A, B, r=2, per_dim=64):
    """Default dictionary centred and scaled on the pooled sample."""
    pooled = np.vstack([_points(A), _points(B)])
    scale = float(np.mean(np.std(pooled, axis=0))) or 1.0
    return default_dictionary(pooled.shape[1], r, np.median(pooled, axis=0), scale, per_dim)


@dataclass
class LowerBound:
    value: float
    se: float
    argmax: int
    name: str
    differences: np.ndarray
    ses: np.ndarray
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return self.value


def _mean_diffs(fs, a, b):
    diffs, ses = [], []
    for f in fs:
        va, vb = f.value(a), f.value(b)
        diffs.append(float(va.mean() - vb.mean()))
        sa = va.std(ddof=1) ** 2 / len(va) if len(va) > 1 else 0.0
        sb = vb.std(ddof=1) ** 2 / len(vb) if len(vb) > 1 else 0.0
        ses.append(math.sqrt(sa + sb))
    return np.array(diffs), np.array(ses)


def smooth_wasserstein_lb(A, B, r=2, dictionary=None, split=False) -> LowerBound:
    """max over the dictionary of |mean_A h - mean_B h|, a lower bound on d_{W_r}.

    With ``split=True`` the maximiser is chosen on the first half of each batch
    and evaluated on the second half, which removes the selection bias of the
    max; the reported SE is then that of a single mean difference.
    """
    a, b = _points(A), _points(B)
    if dictionary is None:
        dictionary = dictionary_for(a, b, r)
    fs = list(dictionary)
    if not fs:
        raise EmptyDictionary("the dictionary has no functions")
    if not split:
        diffs, ses = _mean_diffs(fs, a, b)
        k = int(np.argmax(np.abs(diffs)))
        return LowerBound(float(abs(diffs[k])), float(ses[k]), k, fs[k].name, diffs, ses)
    ha, hb = len(a) // 2, len(b) // 2
    d1, _ = _mean_diffs(fs, a[:ha], b[:hb])
    k = int(np.argmax(np.abs(d1)))
    d2, s2 = _mean_diffs([fs[k]], a[ha:], b[hb:])
    return LowerBound(float(abs(d2[0])), float(s2[0]), k, fs[k].name, d1, np.array([]),
                      {"split": True, "selection_value": float(abs(d1[k]))})


# smoothing rate -----------------------------------------------------------------


def rate_exponent(d):
    return 1.0 / (2 ** (d + 1) * (d + 1))


def coupled_pair(law: SDLawSpec, t, n, seed):
    """(X, X_t) batches on a common probability space.

    Stable laws: X_t = (1 - e^{-t}) EX + (1 - e^{-alpha t})^{1/alpha} (X - EX).
    Finite k(0+): the jump representation, X = e^{-t} X' + X_t path by path.
    """
    if law.family in ("rot_inv_stable", "symmetric_stable"):
        P = stable_paths(law, [math.inf, t], n, seed, tag="smoothing")
        return P[0], P[1], "scaling"
    P = jump_paths(law, [math.inf, t], n, seed, tag="smoothing")
    return P[0], P[1], "self_decomposition"


def stable_abs_moment(law):
    """E|X - EX| for a rotationally invariant stable law."""
    from scipy.special import gammaln

    cf = law.closed_form
    al, C, d = cf["alpha"], cf["C"], law.dimension
    return 2 * C ** (1 / al) * math.exp(gammaln((d + 1) / 2) + gammaln(1 - 1 / al)
                                          - gammaln(d / 2) - gammaln(0.5))


@dataclass
class SmoothingCurve:
    law: str
    t: np.ndarray
    estimate: np.ndarray
    se: np.ndarray
    coupling: str
    slope: float
    C_hat: float
    rate: float
    oracle: np.ndarray | None = None
    oracle_se: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def fitted_bound(self):
        return self.C_hat * np.exp(-self.rate * self.t)

    def to_csv(self, path):
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "estimate", "se", "fitted_bound"])
            for row in zip(self.t, self.estimate, self.se, self.fitted_bound()):
                w.writerow([repr(float(v)) for v in row])
        return path

    def rows(self):
        out = []
        for k in range(len(self.t)):
            r = {"t": float(self.t[k]), "estimate": float(self.estimate[k]), "se": float(self.se[k])}
            if self.oracle is not None:
                r["oracle"] = float(self.oracle[k])
                r["oracle_se"] = float(self.oracle_se[k])
            out.append(r)
        return out


def smoothing_curve(law: SDLawSpec, t_grid, n=2048, seed=0) -> SmoothingCurve:
    """Empirical W_1(X, X_t) along ``t_grid`` on coupled batches.

    Reports the least-squares slope of log W_1 against t and the smallest
    C with W_1(t) <= C e^{-t / (2^{d+1}(d+1))} on the grid.  For stable laws
    the oracle is the cost of the scaling coupling on the same draws,
    (1 - c_t) mean |X_i - EX| with c_t = (1 - e^{-alpha t})^{1/alpha}; the
    population curve (1 - c_t) E|X - EX| is attached in ``meta`` for rotationally
    invariant laws.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be positive and increasing")
    est, se, scaling_cost = [], [], []
    coupling = None
    for k, tk in enumerate(t):
        X, Xt, coupling = coupled_pair(law, tk, n, seed + k)
        tr = optimal_transport(X - law.mean, Xt - law.mean, 1)
        est.append(tr.value)
        se.append(tr.se)
        if coupling == "scaling":
            # the path-by-path cost of the scaling coupling on the same draws
            scaling_cost.append(float(np.mean(np.linalg.norm(X - Xt, axis=1))))
    est, se = np.array(est), np.array(se)
    rate = rate_exponent(law.dimension)
    pos = est > 0
    slope = float(np.polyfit(t[pos], np.log(est[pos]), 1)[0]) if pos.sum() >= 2 else math.nan
    C_hat = float(np.max(est * np.exp(rate * t)))
    oracle = oracle_se = None
    extra = {}
    if coupling == "scaling":
        oracle = np.array(scaling_cost)
        oracle_se = se
        if law.family == "rot_inv_stable":
            al = law.closed_form["alpha"]
            fac = 1 - (-np.expm1(-al * t)) ** (1 / al)
            extra["population_curve"] = (fac * stable_abs_moment(law)).tolist()
    return SmoothingCurve(law.name, t, est, se, coupling, slope, C_hat, rate, oracle, oracle_se, extra)


__all__ = [
    "LipschitzSeed", "LowerBound", "Mollified", "SmoothingCurve", "TestFunctionDictionary", "Transport",
    "coupled_pair", "default_dictionary", "dictionary_for", "linear_seed", "mollify", "norm_cone",
    "optimal_transport", "rate_exponent", "smooth_wasserstein_lb", "smoothing_curve",
    "stable_abs_moment", "wasserstein_empirical",
]
