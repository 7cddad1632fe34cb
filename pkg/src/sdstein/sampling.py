"""Seeded samplers for the target law and for the ratio laws mu_t.

Exact routes:

* multivariate gamma and exponential-profile laws on atoms: gamma variates;
* rotationally invariant stable: sub-Gaussian mixture sqrt(A) G with A a
  positive (alpha/2)-stable variable (Kanter's representation);
* symmetric stable on atoms: sums of 1-d Chambers-Mallows-Stuck draws;
* mu_t for stable laws: scaling of a target draw;
* mu_t when k(0+) is finite: the jump representation
  ``X_t = sum_{s_i <= t} e^{-s_i} rho_i x_i`` minus its mean, with jump times
  at rate k(0+) and marks rho ~ -dk / k(0+).  It is exact and gives the
  self-decomposition coupling ``X = e^{-t} X' + X_t`` path by path.

Everything else falls back to compound-Poisson truncation at radius eps.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfiniteIntensity, TruncationBudgetExceeded, UnsupportedLaw
from .levy import CallableProfile, PolarLevyMeasure, SDLawSpec, levy_moment
from .streams import chunked

T_TARGET = 36.0  # e^{-36} ~ 2e-16: horizon of the jump representation for target draws


@dataclass
class SampleBatch:
    points: np.ndarray
    law_id: str
    t: float | str
    seed: int
    eps: float = 0.0
    trunc_error: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[0] < 1:
            raise ValueError("a batch needs n >= 1")

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dimension(self):
        return self.points.shape[1]

    def sidecar(self):
        return {"law_id": self.law_id, "t": self.t, "seed": self.seed, "eps": self.eps,
                "trunc_error": self.trunc_error, "n": self.n, "dimension": self.dimension, **self.meta}

    def to_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(self.dimension)])
            w.writerows([[repr(float(v)) for v in row] for row in self.points])
        path.with_suffix(".json").write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True))
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        side = json.loads(path.with_suffix(".json").read_text())
        meta = {k: v for k, v in side.items()
                if k not in ("law_id", "t", "seed", "eps", "trunc_error", "n", "dimension")}
        return cls(pts, side["law_id"], side["t"], side["seed"], side["eps"], side["trunc_error"], meta)


# elementary variates --------------------------------------------------------


def symmetric_stable_1d(rng, alpha, size):
    """Chambers-Mallows-Stuck draws with log-CF -|s|^alpha."""
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.exponential(1.0, size)
    if alpha == 1:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1 / alpha)
            * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha))


def positive_stable(rng, a, size):
    """Kanter's draw of A > 0 with E exp(-lam A) = exp(-lam^a), a in (0, 1)."""
    u = rng.uniform(0.0, np.pi, size)
    e = rng.exponential(1.0, size)
    return (np.sin(a * u) / np.sin(u) ** (1 / a)) * (np.sin((1 - a) * u) / e) ** ((1 - a) / a)


def _natural_drift(nu: PolarLevyMeasure, lo=0.0):
    """int_{|u| > lo} u nu(du)."""
    out = np.zeros(nu.dimension)
    if nu.uniform:
        return out
    for x, w, p in nu.atoms():
        out += w * x * p.tail_k(lo)
    return out


def _exact_family(law):
    fam = law.family
    if fam in ("multi_gamma", "rot_inv_stable", "symmetric_stable"):
        return fam
    if fam == "exp_profile" and not law.levy.uniform:
        return fam
    return None


def _finite_k0(nu):
    return all(math.isfinite(p.k0) for _, _, p in nu.atoms())


def _draw_target_exact(law, fam):
    d = law.dimension
    cf = law.closed_form

    def draw(rng, m):
        if fam == "multi_gamma":
            a, b = np.asarray(cf["alpha"]), np.asarray(cf["beta"])
            return rng.gamma(a, 1 / b, size=(m, d)) + (law.mean - a / b)
        if fam == "rot_inv_stable":
            al = cf["alpha"]
            A = positive_stable(rng, al / 2, m)
            G = rng.standard_normal((m, d))
            return law.mean + math.sqrt(2) * cf["C"] ** (1 / al) * np.sqrt(A)[:, None] * G
        if fam == "symmetric_stable":
            al = cf["alpha"]
            out = np.tile(law.mean, (m, 1))
            for x, w, _ in law.levy.atoms():
                sig = (cf["C"] * w) ** (1 / al)
                out += sig * symmetric_stable_1d(rng, al, m)[:, None] * x
            return out
        # exp_profile on atoms: gamma along each direction
        al, be = cf["alpha"], cf["beta"]
        out = np.tile(law.mean - _natural_drift(law.levy), (m, 1))
        for x, w, _ in law.levy.atoms():
            out += rng.gamma(w * al, 1 / be, m)[:, None] * x
        return out

    return draw


def sample_target(law: SDLawSpec, n: int, seed: int, eps: float | None = None) -> SampleBatch:
    """n draws of X."""
    fam = _exact_family(law)
    if law.levy.is_null:
        return SampleBatch(np.tile(law.mean, (n, 1)), law.name, "target", seed)
    if fam is not None:
        pts = chunked(n, seed, "target", _draw_target_exact(law, fam))
        return SampleBatch(pts, law.name, "target", seed, meta={"route": "exact"})
    if _finite_k0(law.levy):
        paths = jump_paths(law, [math.inf], n, seed, tag="target")
        err = math.exp(-T_TARGET) * math.sqrt(levy_moment(law, "m2_total"))
        return SampleBatch(paths[0], law.name, "target", seed, 0.0, err,
                           meta={"route": "jump_representation", "horizon": T_TARGET})
    if eps is None:
        eps = default_eps(law.levy)
    cp = compound_poisson_approx(law.levy, eps, n, seed, compensate="full", tag="target")
    cp.points += law.mean
    cp.t = "target"
    cp.law_id = law.name
    cp.meta["route"] = "compound_poisson"
    return cp


# jump representation --------------------------------------------------------


def jump_paths(law: SDLawSpec, times, n: int, seed: int, tag: str = "paths"):
    """X_t for each t in ``times`` on common random numbers; shape (len(times), n, d).

    ``t = inf`` gives target draws (horizon ``T_TARGET``).  Needs k(0+) < inf.
    """
    nu = law.levy
    if not _finite_k0(nu):
        raise UnsupportedLaw("jump representation needs k(0+) < inf")
    times = np.asarray(times, dtype=float)
    eff = np.where(np.isinf(times), T_TARGET, times)
    horizon = float(eff.max()) if eff.size else 0.0
    d = law.dimension
    drift = _natural_drift(nu)
    atoms = nu.atoms()

    def draw(rng, m):
        out = np.zeros((len(eff), m, d))
        for x, w, p in atoms if not nu.uniform else [(None, 1.0, nu.profile)]:
            rate = w * p.k0 * horizon
            counts = rng.poisson(rate, m)
            N = int(counts.sum())
            if N == 0:
                continue
            s = rng.uniform(0.0, horizon, N)
            rho = p.sample_mark(rng, N)
            dirs = nu.sample_directions(rng, N) if nu.uniform else np.broadcast_to(x, (N, d))
            owner = np.repeat(np.arange(m), counts)
            jump = (np.exp(-s) * rho)[:, None] * dirs
            for k, t in enumerate(eff):
                keep = s <= t
                for j in range(d):
                    out[k, :, j] += np.bincount(owner[keep], jump[keep, j], minlength=m)
        return np.moveaxis(out, 1, 0)

    pts = np.moveaxis(chunked(n, seed, tag, draw), 0, 1)
    shift = (-np.expm1(-eff))[:, None] * (law.mean - drift)[None, :]
    return pts + shift[:, None, :]


def stable_paths(law, times, n, seed, tag="paths"):
    """X_t = (1-e^{-t}) EX + (1-e^{-alpha t})^{1/alpha} (X - EX) from one target draw."""
    al = law.closed_form["alpha"]
    base = chunked(n, seed, tag, _draw_target_exact(law, law.family)) - law.mean
    times = np.asarray(times, dtype=float)
    c = np.where(np.isinf(times), 1.0, (-np.expm1(-al * times)) ** (1 / al))
    lin = np.where(np.isinf(times), 1.0, -np.expm1(-times))
    return c[:, None, None] * base[None] + lin[:, None, None] * law.mean[None, None, :]


def mu_t_paths(law, times, n, seed, tag="paths"):
    """Common-random-number draws of X_t across ``times``; None if no exact route."""
    if law.family in ("rot_inv_stable", "symmetric_stable"):
        return stable_paths(law, times, n, seed, tag)
    if _finite_k0(law.levy):
        return jump_paths(law, times, n, seed, tag)
    return None


def sample_mu_t(law: SDLawSpec, t: float, n: int, seed: int, eps: float | None = None,
                budget: float | None = None) -> SampleBatch:
    """n draws of X_t ~ mu_t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    d = law.dimension
    if t == 0 or law.levy.is_null:
        pts = np.zeros((n, d)) if t == 0 else np.tile(-math.expm1(-t) * law.mean, (n, 1))
        return SampleBatch(pts, law.name, float(t), seed)
    exact = mu_t_paths(law, [t], n, seed, tag="mu_t")
    if exact is not None:
        return SampleBatch(exact[0], law.name, float(t), seed, meta={"route": "exact"})
    nu = law.levy
    diff = []
    err2 = 0.0
    ratio_profiles = {}
    for x, w, p in nu.atoms():
        if id(p) not in ratio_profiles:
            q = CallableProfile(lambda r, p=p: p(r) - p(math.exp(t) * np.asarray(r)), name="ratio")
            ratio_profiles[id(p)] = q
        diff.append(ratio_profiles[id(p)])
    if eps is None:
        eps = default_eps(nu)
    for (x, w, p) in nu.atoms():
        err2 += w * (p.int_rk(eps) - math.exp(-2 * t) * p.int_rk(math.exp(t) * eps))
    err = math.sqrt(max(err2, 0.0))
    if budget is not None and err > budget:
        raise TruncationBudgetExceeded(f"truncation error {err:.3g} exceeds budget {budget:.3g}")
    if nu.uniform:
        nut = PolarLevyMeasure(d, profiles=diff[0], uniform=True, validate=False)
    else:
        nut = PolarLevyMeasure(d, nu.directions[nu.weights > 0], nu.weights[nu.weights > 0], diff,
                               validate=False)
    cp = compound_poisson_approx(nut, eps, n, seed, compensate="full", tag="mu_t")
    pts = cp.points - math.expm1(-t) * law.mean
    return SampleBatch(pts, law.name, float(t), seed, eps, err, meta={"route": "compound_poisson"})


def flow_sample(law: SDLawSpec, initial, t: float, seed: int) -> SampleBatch:
    """Y = e^{-t} Y0 + X_t with X_t ~ mu_t independent of the given Y0 draws."""
    y0 = initial.points if isinstance(initial, SampleBatch) else np.atleast_2d(initial)
    if law.dimension == 1 and y0.shape[1] != 1:
        y0 = y0.reshape(-1, 1)
    xt = sample_mu_t(law, t, y0.shape[0], seed).points
    return SampleBatch(math.exp(-t) * y0 + xt, law.name, float(t), seed, meta={"route": "flow"})


# compound Poisson ------------------------------------------------------------


def truncation_error(nu: PolarLevyMeasure, eps: float) -> float:
    """L2 size of the discarded small jumps: (int_{|u|<=eps} |u|^2 nu(du))^{1/2}."""
    return math.sqrt(sum(w * p.int_rk(eps) for _, w, p in nu.atoms()))


def default_eps(nu: PolarLevyMeasure, rel=1e-3, max_intensity=256.0):
    """Smallest-needed eps: L2 truncation error <= rel * sqrt(m2_small).

    The jump intensity beyond eps is capped at ``max_intensity`` per draw; when
    the cap binds the recorded truncation error is larger than requested.
    """
    target = rel * math.sqrt(levy_moment(nu, "m2_small"))

    def intensity(e):
        return sum(w * p.intensity(e) for _, w, p in nu.atoms())

    def bisect(ok):
        # smallest log-eps in [-40, 0] with ok true; ok is monotone
        lo, hi = -40.0, 0.0
        if ok(lo):
            return math.exp(lo)
        if not ok(hi):
            return 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if ok(mid) else (mid, hi)
        return math.exp(hi)

    if truncation_error(nu, 1.0) <= target:
        e_err = 1.0
    else:
        e_err = bisect(lambda v: truncation_error(nu, math.exp(v)) <= target)
    e_cap = bisect(lambda v: intensity(math.exp(v)) <= max_intensity)
    return max(e_err, e_cap)


def compound_poisson_approx(nu: PolarLevyMeasure, eps: float, n: int, seed: int,
                            compensate: str = "small", tag: str = "cp") -> SampleBatch:
    """Jumps of radius > eps, Poisson in number, with compensation.

    ``compensate``: "small" subtracts the mean of the jumps with eps < r <= 1,
    "full" subtracts the mean of all kept jumps, "none" nothing.
    """
    if compensate not in ("small", "full", "none"):
        raise ValueError("compensate must be small, full or none")
    if not eps > 0:
        raise InfiniteIntensity("eps must be positive")
    d = nu.dimension
    groups = [(None, 1.0, nu.profile)] if nu.uniform else nu.atoms()
    rates = []
    for x, w, p in groups:
        lam = w * p.intensity(eps)
        if not math.isfinite(lam):
            raise InfiniteIntensity("truncated jump intensity diverges")
        rates.append(lam)
    comp = np.zeros(d)
    if not nu.uniform and compensate != "none":
        for x, w, p in groups:
            tail = p.tail_k(eps)
            if compensate == "small":
                tail -= p.tail_k(max(eps, 1.0))
            comp += w * x * tail
    out = np.tile(-comp, (n, 1))
    for a, ((x, w, p), lam) in enumerate(zip(groups, rates)):
        if lam == 0:
            continue

        def draw(rng, m, x=x, p=p, lam=lam):
            counts = rng.poisson(lam, m)
            N = int(counts.sum())
            res = np.zeros((m, d))
            if N == 0:
                return res
            r = p.sample_radius(rng, N, eps)
            dirs = nu.sample_directions(rng, N) if nu.uniform else np.broadcast_to(x, (N, d))
            owner = np.repeat(np.arange(m), counts)
            for j in range(d):
                res[:, j] = np.bincount(owner, r * dirs[:, j], minlength=m)
            return res

        out += chunked(n, seed, tag, draw, a)
    return SampleBatch(out, "levy", "cp", seed, float(eps), truncation_error(nu, eps),
                       meta={"compensate": compensate, "intensity": float(sum(rates))})


def empirical_cf(points, xi):
    """(1/n) sum exp(i <xi, x_k>) for each row of ``xi``."""
    xi = np.atleast_2d(xi)
    return np.exp(1j * points @ xi.T).mean(axis=0)
