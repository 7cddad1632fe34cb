"""Experiment registry, configs and reports.

Each experiment returns a list of checks.  A check records the numbers its
verdict is computed from (estimate, SE, bound or target, the SE multiplier
and an absolute slack), so a report can be re-checked offline with
:func:`recheck`.  Wall-clock figures live under ``wall_clock`` only, which
keeps reports byte-identical across runs apart from that field.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import law_from_config, standard_catalog
from .charfn import log_cf
from .distances import (
    dictionary_for,
    optimal_transport,
    smooth_wasserstein_lb,
    smoothing_curve,
)
from .errors import ConfigInvalid, UnknownExperiment
from .kernel import (
    center,
    discrepancy,
    discrepancy_bound_from_poincare,
    bound_from_poincare,
    energy_identity,
    galerkin_solve,
    poincare_ratio,
    stein_bound,
)
from .levy import check_admissible, levy_moment
from .sampling import flow_sample, sample_target
from .semigroup import (
    apply_semigroup,
    characterization_identity,
    compose_semigroup,
    estimate_mean_h,
    solve_stein,
    stein_residual,
)
from .streams import stream
from .testfunctions import Cosine, GaussianBump, TanhRamp

SCHEMA_VERSION = 1
BUDGET_KEYS = ("n_mc", "n_samples", "time_nodes")
TOLERANCE_KEYS = ("tol", "se_mult", "slack")
CONFIG_KEYS = ("experiment", "seed", "law", "budgets", "tolerances", "output_dir")


# config -----------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    law: object = None
    budgets: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, raw, seed=None, output_dir=None):
        if not isinstance(raw, dict):
            raise ConfigInvalid({"config": "must be a JSON object"})
        errors = {}
        for key in sorted(set(raw) - set(CONFIG_KEYS)):
            errors[key] = "unknown field"
        exp = raw.get("experiment")
        if not isinstance(exp, str):
            errors["experiment"] = "missing or not a string"
        s = raw.get("seed") if seed is None else seed
        if s is None:
            errors["seed"] = "missing (the seed is mandatory)"
        elif isinstance(s, bool) or not isinstance(s, int) or s < 0:
            errors["seed"] = "must be a non-negative integer"
        for name, keys in (("budgets", BUDGET_KEYS), ("tolerances", TOLERANCE_KEYS)):
            block = raw.get(name, {})
            if not isinstance(block, dict):
                errors[name] = "must be an object"
                continue
            for key in sorted(set(block) - set(keys)):
                errors[f"{name}.{key}"] = "unknown field"
            for key, v in block.items():
                if key in keys and (isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0):
                    errors[f"{name}.{key}"] = "must be a positive number"
        if errors:
            raise ConfigInvalid(errors)
        return cls(exp, int(s), raw.get("law"), dict(raw.get("budgets", {})),
                   dict(raw.get("tolerances", {})), output_dir or raw.get("output_dir"))

    @classmethod
    def load(cls, path, seed=None, output_dir=None):
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid({"config": f"invalid JSON: {exc}"}) from None
        cfg = cls.from_dict(raw, seed, output_dir)
        if isinstance(cfg.law, str) and cfg.law not in standard_catalog():
            p = Path(cfg.law)
            cfg.law = str(p if p.is_absolute() else path.parent / p)
        elif isinstance(cfg.law, dict):
            cfg.law = dict(cfg.law, _base=str(path.parent))
        return cfg

    def budget(self, key, default):
        return type(default)(self.budgets.get(key, default))

    def tolerance(self, key, default):
        return float(self.tolerances.get(key, default))

    def echo(self):
        d = asdict(self)
        if isinstance(d["law"], dict):
            d["law"] = {k: v for k, v in d["law"].items() if k != "_base"}
        d.pop("output_dir")
        return d

    def laws(self, default):
        """The configured law, or the experiment's default catalog entries."""
        if self.law is None:
            cat = standard_catalog()
            return [cat[name] for name in default]
        if isinstance(self.law, str) and self.law in standard_catalog():
            return [standard_catalog()[self.law]]
        if isinstance(self.law, dict):
            raw = {k: v for k, v in self.law.items() if k != "_base"}
            return [law_from_config(raw, self.law.get("_base"))]
        return [law_from_config(self.law)]


# checks -----------------------------------------------------------------------


def _f(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))


def _num(v):
    if isinstance(v, str):
        return float(v)
    return v


def check(name, estimate, bound, se=0.0, k=3.0, slack=0.0, kind="le", **info):
    """Verdict for ``kind``:

    le:  estimate <= bound + k se + slack
    ge:  estimate >= bound - k se - slack
    abs: |estimate - bound| <= k se + slack
    true: estimate is truthy
    """
    rec = {"name": name, "kind": kind, "estimate": _f(estimate) if kind != "true" else bool(estimate),
           "bound": _f(bound) if bound is not None else None, "se": _f(se), "k": k, "slack": slack}
    rec["verdict"] = _verdict(rec)
    if info:
        rec["info"] = info
    return rec


def _verdict(rec):
    kind = rec["kind"]
    if kind == "true":
        return "pass" if rec["estimate"] else "fail"
    e, b, se = _num(rec["estimate"]), _num(rec["bound"]), _num(rec["se"]) or 0.0
    allow = rec["k"] * se + rec["slack"]
    if any(isinstance(v, float) and math.isnan(v) for v in (e, b, allow)):
        return "fail"
    if kind == "le":
        ok = e <= b + allow
    elif kind == "ge":
        ok = e >= b - allow
    elif kind == "abs":
        ok = abs(e - b) <= allow
    else:
        raise ValueError(kind)
    return "pass" if ok else "fail"


def recheck(report):
    """Recompute every verdict from the recorded numbers."""
    return all(_verdict(c) == c["verdict"] for c in report["checks"])


# experiments --------------------------------------------------------------------


class Timer:
    def __init__(self):
        self.rows = []

    def add(self, name, seconds, limit=None):
        row = {"name": name, "seconds": round(seconds, 3)}
        if limit is not None:
            row["limit"] = limit
            row["verdict"] = "pass" if seconds <= limit else "fail"
        self.rows.append(row)


def _ramp(law, offset=0.3):
    d = law.dimension
    v = np.ones(d) / math.sqrt(d)
    return TanhRamp(v, 0.5, 1.0, float(v @ law.mean) + offset)


def exp_catalog_check(cfg, timer, out):
    checks = []
    laws = cfg.laws(list(standard_catalog()))
    rng = stream(cfg.seed, "catalog-check")
    for law in laws:
        rep = check_admissible(law)
        for key in ("normalized_sphere", "profile_monotone", "small_jump_integrable",
                    "first_moment_finite", "cond_kx"):
            checks.append(check(f"{law.name}: {key}", rep[key]["ok"], None, kind="true"))
        d = law.dimension
        xi = rng.standard_normal((20, d))
        herm = float(np.max(np.abs(log_cf(law, -xi) - np.conj(log_cf(law, xi)))))
        checks.append(check(f"{law.name}: hermitian symmetry", herm, 1e-12, k=0))
        h = 1e-5
        grad = [(log_cf(law, h * e) - log_cf(law, -h * e)).imag / (2 * h) for e in np.eye(d)]
        err = float(np.max(np.abs(np.array(grad) - law.mean)))
        checks.append(check(f"{law.name}: gradient of log phi at 0 is i EX", err, 1e-6, k=0))
        t = 0.7
        mod = float(np.max(np.abs(np.exp(log_cf(law, xi) - log_cf(law, math.exp(-t) * xi)))))
        checks.append(check(f"{law.name}: |phi_t| <= 1", mod, 1 + 1e-10, k=0))
    return checks


def exp_identity_check(cfg, timer, out):
    checks = []
    n = cfg.budget("n_samples", 10**5)
    k = cfg.tolerance("se_mult", 3.0)
    for law in cfg.laws(["gamma1d", "multi_gamma2"]):
        t0 = time.perf_counter()
        d = law.dimension
        fields = [_ramp(law, 0.3)]
        if d > 1:
            fields += [TanhRamp(e, 0.5, 1.0, float(e @ law.mean)) for e in np.eye(d)]
        for j, f in enumerate(fields):
            r = characterization_identity(law, f, n, cfg.seed + 101 * j)
            checks.append(check(f"{law.name}: ramp {j} lhs = rhs", r["lhs"].value, r["rhs"].value,
                                r["difference"].se, k, kind="abs",
                                lhs_se=r["lhs"].se, rhs_se=r["rhs"].se))
        timer.add(f"{law.name}", time.perf_counter() - t0, 60.0)
    return checks


def exp_semigroup_laws(cfg, timer, out):
    checks = []
    n = cfg.budget("n_mc", 40000)
    k = cfg.tolerance("se_mult", 3.0)
    for law in cfg.laws(["gamma1d", "multi_gamma2", "rot_inv_stable1", "exp_profile2"]):
        d = law.dimension
        h = _ramp(law, 0.2)
        x = law.mean + stream(cfg.seed, "semigroup-x").standard_normal((4, d))
        p0 = apply_semigroup(law, h, 0.0, x)
        checks.append(check(f"{law.name}: P_0 h = h", float(np.max(np.abs(p0.value - h.value(x)))), 0.0,
                            k=0))
        for s, t in ((0.3, 0.7), (1.0, 1.0)):
            nested = compose_semigroup(law, h, t, s, x, n, cfg.seed + 11)
            direct = apply_semigroup(law, h, s + t, x, n=n, seed=cfg.seed + 13)
            for i in range(len(x)):
                checks.append(check(f"{law.name}: P_{s:g} P_{t:g} = P_{s + t:g} at x{i}",
                                    nested.value[i], direct.value[i],
                                    math.hypot(nested.se[i], direct.se[i]), k, kind="abs"))
        for t in (0.5, 1.0, 2.0):
            X = sample_target(law, n, cfg.seed + 17)
            Y = flow_sample(law, X, t, cfg.seed + 19).points
            eh = estimate_mean_h(law, h, n, cfg.seed + 23)
            hy = h.value(Y)
            se = math.hypot(float(hy.std(ddof=1) / math.sqrt(n)), eh.se)
            checks.append(check(f"{law.name}: invariance at t={t:g}", float(hy.mean()), eh.value, se, k,
                                kind="abs"))
        if law.family == "rot_inv_stable" and d <= 2:
            b = GaussianBump(law.mean, 1.0, 1.0)
            for t in (0.5, 1.0):
                mc = apply_semigroup(law, b, t, x, "mc", n, cfg.seed + 29)
                fo = apply_semigroup(law, b, t, x, "fourier")
                for i in range(len(x)):
                    checks.append(check(f"{law.name}: fourier = mc at t={t:g}, x{i}", mc.value[i],
                                        fo.value[i], math.hypot(mc.se[i], fo.se[i]), k, kind="abs"))
    return checks


def exp_stein_residual(cfg, timer, out):
    checks = []
    tol = cfg.tolerance("tol", 1e-2)
    n_mc = cfg.budget("n_mc", 2000)
    k = cfg.tolerance("se_mult", 3.0)
    for law in cfg.laws(["gamma1d", "rot_inv_stable1"]):
        t0 = time.perf_counter()
        d = law.dimension
        v = np.ones(d) / math.sqrt(d)
        h = TanhRamp(v, 0.5, 1.0, 0.0)
        x = np.outer([-1.0, 0.0, 1.0, 2.0, 3.0], v)
        sol = solve_stein(law, h, x, n_mc=n_mc, tol=tol, seed=cfg.seed)
        res = stein_residual(law, sol, x)
        for i in range(len(x)):
            checks.append(check(f"{law.name}: residual at x={x[i].tolist()}", abs(res.value[i]), 0.0,
                                res.se[i], k, slack=k * tol, T_max=sol.T_max))
        timer.add(f"{law.name}", time.perf_counter() - t0, 300.0)
    return checks


def _grid(law, m=1000):
    d = law.dimension
    if d == 1:
        return law.mean + np.linspace(-4, 4, m)[:, None]
    side = int(round(m ** (1 / d)))
    ax = np.linspace(-4, 4, side)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    return law.mean + np.stack([q.ravel() for q in mesh], axis=1)


def exp_derivative_bounds(cfg, timer, out):
    checks = []
    n_mc = cfg.budget("n_mc", 1000)
    m = cfg.budget("n_samples", 1000)
    for law in cfg.laws(["gamma1d", "rot_inv_stable1", "multi_gamma2", "rot_inv_stable2"]):
        d = law.dimension
        v = np.ones(d) / math.sqrt(d)
        x = _grid(law, m)
        for hname, h in (("ramp", TanhRamp(v, 1.0, 1.0, float(v @ law.mean))),
                         ("cosine", Cosine(v, 1.0, -float(v @ law.mean)))):
            sol = solve_stein(law, h, x, n_mc=n_mc, tol=cfg.tolerance("tol", 1e-2), seed=cfg.seed)
            g, gs = sol.grad.value, sol.grad.se
            H, Hs = sol.hess.value, sol.hess.se
            i, j = np.unravel_index(np.argmax(np.abs(g) - 2 * gs), g.shape)
            checks.append(check(f"{law.name}/{hname}: max |d_j f_h| <= 1", abs(g[i, j]), 1.0, gs[i, j], 2))
            idx = np.unravel_index(np.argmax(np.abs(H) - 2 * Hs), H.shape)
            checks.append(check(f"{law.name}/{hname}: max |d_ij f_h| <= 1/2", abs(H[idx]), 0.5, Hs[idx], 2))
            nrm = np.linalg.norm(g, axis=1)
            nse = np.sqrt(np.sum((g * gs) ** 2, axis=1)) / np.maximum(nrm, 1e-300)
            i = int(np.argmax(nrm - 2 * nse))
            checks.append(check(f"{law.name}/{hname}: max |grad f_h| <= sqrt(d)", nrm[i], math.sqrt(d), nse[i], 2))
            ev = np.linalg.eigvalsh(H)
            op = np.max(np.abs(ev), axis=1)
            ose = np.sqrt(np.sum(Hs**2, axis=(1, 2)))  # Frobenius bound on the perturbation
            i = int(np.argmax(op - 2 * ose))
            checks.append(check(f"{law.name}/{hname}: max M2(f_h) <= d/2", op[i], d / 2, ose[i], 2))
    return checks


def _gamma_start(n, seed):
    """Initial law of the perturbations: Gamma(shape 4, rate 2), same mean as the target."""
    return stream(seed, "gamma-start").gamma(4.0, 0.5, size=(n, 1))


def exp_discrepancy_bound(cfg, timer, out):
    checks = []
    law = cfg.laws(["gamma1d"])[0]
    n = cfg.budget("n_samples", 2048)
    n_fit = cfg.budget("n_mc", 400000)
    k = cfg.tolerance("se_mult", 3.0)
    m2 = levy_moment(law, "m2_total")
    for t0 in (0.1, 0.3):
        s = cfg.seed + int(1000 * t0)
        Yfit = flow_sample(law, _gamma_start(n_fit, s), t0, s + 1)
        Yev = flow_sample(law, _gamma_start(n_fit, s + 2), t0, s + 3)
        tau, system = galerkin_solve(law, Yfit, seed=s + 4)
        S = discrepancy(law, center(Yev), tau, seed=s + 5)
        bound = stein_bound(law, S)
        X = sample_target(law, n, s + 6).points - law.mean
        Y = flow_sample(law, _gamma_start(n, s + 7), t0, s + 8).points - law.mean
        lb = smooth_wasserstein_lb(X, Y, 2)
        w1 = optimal_transport(X, Y, 1)
        w2 = optimal_transport(X, Y, 2)
        checks.append(check(f"t0={t0:g}: dW2 lower bound <= (d/2) sqrt(m2) S", lb.value, bound.value,
                            math.hypot(lb.se, bound.se), k, S=S.value, S_se=S.se, m2=m2,
                            galerkin_fit_noise=system.meta["fit_noise"], W1=w1.value, W2=w2.value,
                            witness=lb.name))
        checks.append(check(f"t0={t0:g}: empirical W1 (upper end of the bracket) vs bound", w1.value,
                            bound.value, math.hypot(w1.se, bound.se), k, informational=True))
    # the upper-bracket comparisons are reported but do not gate the verdict
    for c in checks:
        if c.get("info", {}).get("informational"):
            c["gating"] = False
    return checks


def exp_galerkin_kernel(cfg, timer, out):
    checks = []
    k = cfg.tolerance("se_mult", 3.0)
    sizes = {"gamma1d": 4 * 10**6, "multi_gamma2": 2 * 10**6}
    for law in cfg.laws(["gamma1d", "multi_gamma2"]):
        n = cfg.budget("n_samples", sizes.get(law.name, 2 * 10**6))
        Y = sample_target(law, n, cfg.seed)
        Yh = center(sample_target(law, min(n, 10**6), cfg.seed + 1))
        tau, system = galerkin_solve(law, Y, seed=cfg.seed + 2)
        if out is not None:
            system.to_json(Path(out) / f"galerkin-{law.name}.json")
        S = discrepancy(law, Yh, tau, seed=cfg.seed + 3)
        checks.append(check(f"{law.name}: S(galerkin kernel) <= 1e-2", S.value, 0.0, S.se, k, slack=1e-2,
                            fit_noise=system.meta["fit_noise"], basis_size=len(system.basis)))
        checks.append(check(f"{law.name}: Galerkin matrix is PSD", system.min_eig,
                            -1e-8 * float(np.abs(np.linalg.eigvalsh(system.A)).max()), k=0, kind="ge"))
        checks.append(check(f"{law.name}: residual orthogonality", system.residual,
                            2 * system.ridge * float(np.linalg.norm(system.coeffs)) + 1e-12, k=0))
        e = energy_identity(law, Yh, tau, seed=cfg.seed + 4)
        checks.append(check(f"{law.name}: A(tau, tau) = L(tau)", e["difference"].value, 0.0,
                            e["difference"].se, k, kind="abs", A=e["A"].value, L=e["L"].value))
        # the bound is tight at Y = X, so the fit noise of A(tau, tau) enters at first order
        fit_se = system.meta["energy_fit_se"]
        se = math.sqrt(e["A"].se ** 2 + e["second_moment"].se ** 2 + fit_se**2)
        checks.append(check(f"{law.name}: A(tau, tau) <= U E|Y|^2 with U = 1", e["A"].value,
                            e["second_moment"].value, se, k,
                            excess=e["A"].value - e["second_moment"].value, energy_fit_se=fit_se))
    return checks


def exp_poincare(cfg, timer, out):
    checks = []
    n = cfg.budget("n_samples", 10**5)
    k = cfg.tolerance("se_mult", 3.0)
    for law in cfg.laws(["gamma1d", "multi_gamma2", "exp_profile1", "exp_profile2"]):
        Y = center(sample_target(law, n, cfg.seed))
        res = poincare_ratio(Y, law, seed=cfg.seed + 1)
        for row in res.rows:
            checks.append(check(f"{law.name}: ratio[{row['index']}] {row['name']} <= 1", row["ratio"], 1.0,
                                row["se"], k))
            if row["name"].startswith("coordinate_"):
                checks.append(check(f"{law.name}: {row['name']} ratio = 1", row["ratio"], 1.0, row["se"], k,
                                    kind="abs"))
        ey2 = float(np.mean(np.sum(Y**2, axis=1)))
        m2 = levy_moment(law, "m2_total")
        checks.append(check(f"{law.name}: matched bound at U = 1 is 0",
                            bound_from_poincare(law, Y, 1.0, "matched"), 0.0, k=0, kind="abs",
                            second_moment=ey2, m2=m2))
        gen = bound_from_poincare(law, Y, 1.0 + 0.5, "general")
        q = 0.5 * law.dimension * math.sqrt(m2) * math.sqrt(max(1.5 * ey2 + m2 - 2 * ey2, 0.0))
        checks.append(check(f"{law.name}: general bound formula", gen, q, k=0, kind="abs", slack=1e-12))
        sb = discrepancy_bound_from_poincare(law, Y, max(res.value, 1.0))
        checks.append(check(f"{law.name}: discrepancy-side bound is finite", math.isfinite(sb), None,
                            kind="true", value=sb))
    return checks


def exp_smoothing_rate(cfg, timer, out):
    checks = []
    n = cfg.budget("n_samples", 2048)
    k = cfg.tolerance("se_mult", 3.0)
    t_grid = np.arange(1, 25) * 0.25
    t_start = time.perf_counter()
    for law in cfg.laws(list(standard_catalog())):
        if law.dimension > 2:
            continue
        curve = smoothing_curve(law, t_grid, n, cfg.seed)
        if out is not None:
            curve.to_csv(Path(out) / f"smoothing-{law.name}.csv")
        est, se = curve.estimate, curve.se
        worst = int(np.argmax(np.diff(est) - k * np.hypot(se[1:], se[:-1])))
        checks.append(check(f"{law.name}: decreasing within noise (worst step {worst})", est[worst + 1],
                            est[worst], math.hypot(se[worst], se[worst + 1]), k))
        checks.append(check(f"{law.name}: endpoint below start", est[-1], est[0], 0.0, k=0))
        checks.append(check(f"{law.name}: fitted slope < 0", curve.slope, 0.0, k=0, slack=-1e-12))
        checks.append(check(f"{law.name}: finite C_hat for the rate 1/(2^(d+1)(d+1))",
                            math.isfinite(curve.C_hat), None, kind="true", C_hat=curve.C_hat,
                            rate=curve.rate, slope=curve.slope))
        if curve.oracle is not None:
            dev = np.abs(est - curve.oracle) - k * curve.oracle_se
            i = int(np.argmax(dev))
            checks.append(check(f"{law.name}: matches the scaling-coupling curve (worst t={t_grid[i]:g})",
                                est[i], curve.oracle[i], curve.oracle_se[i], k, kind="abs"))
    timer.add("all laws", time.perf_counter() - t_start, 600.0)
    return checks


def _pairs(law, n, seed):
    X = sample_target(law, n, seed).points
    yield "independent copy", X, sample_target(law, n, seed + 1).points
    from .sampling import sample_mu_t

    yield "mu_1", X, sample_mu_t(law, 1.0, n, seed + 2).points
    shift = np.zeros(law.dimension)
    shift[0] = 0.5
    yield "flow from shifted start", X, flow_sample(law, sample_target(law, n, seed + 3).points + shift,
                                                    0.5, seed + 4).points


def exp_distance_orderings(cfg, timer, out):
    checks = []
    n = cfg.budget("n_samples", 1024)
    slack = cfg.tolerance("slack", 1e-10)
    for law in cfg.laws(list(standard_catalog())):
        for name, A, B in _pairs(law, n, cfg.seed):
            D2 = dictionary_for(A, B, 2)
            D1 = dictionary_for(A, B, 1)
            lb2 = smooth_wasserstein_lb(A, B, 2, D2).value
            lb1 = smooth_wasserstein_lb(A, B, 1, D1).value
            w1 = optimal_transport(A, B, 1).value
            w2 = optimal_transport(A, B, 2).value
            tag = f"{law.name}/{name}"
            checks.append(check(f"{tag}: lb_r2 <= lb_r1", lb2, lb1, k=0, slack=slack))
            checks.append(check(f"{tag}: lb_r1 <= W1", lb1, w1, k=0, slack=slack))
            checks.append(check(f"{tag}: W1 <= W2", w1, w2, k=0, slack=slack))
    return checks


def exp_convergence_sequence(cfg, timer, out):
    checks = []
    law = cfg.laws(["gamma1d"])[0]
    n = cfg.budget("n_samples", 10**5)
    k = cfg.tolerance("se_mult", 3.0)
    ts = (0.5, 1.0, 2.0, 4.0, 8.0)
    vals, ses, extra = [], [], []
    X = sample_target(law, n, cfg.seed).points - law.mean
    D = dictionary_for(X, X, 2)
    m2 = levy_moment(law, "m2_total")
    for j, t in enumerate(ts):
        Y = flow_sample(law, _gamma_start(n, cfg.seed + 10 + j), t, cfg.seed + 20 + j).points - law.mean
        lb = smooth_wasserstein_lb(X, Y, 2, D, split=True)
        vals.append(lb.value)
        ses.append(lb.se)
        Yc = center(Y)
        U = poincare_ratio(Yc[: min(n, 20000)], law, seed=cfg.seed + 30 + j).value
        extra.append({"t": t, "second_moment": float(np.mean(np.sum(Yc**2, axis=1))), "U_hat": U,
                      "witness": lb.name})
    for j in range(len(ts) - 1):
        checks.append(check(f"dW2 non-increasing from t={ts[j]:g} to t={ts[j + 1]:g}", vals[j + 1], vals[j],
                            math.hypot(ses[j], ses[j + 1]), k))
    checks.append(check(f"dW2 at t={ts[-1]:g} below 2 SE", vals[-1], 0.0, ses[-1], 2,
                        sequence=[{"t": t, "estimate": v, "se": s, **e} for t, v, s, e in zip(ts, vals, ses, extra)],
                        m2=m2))
    return checks


REGISTRY = {
    "catalog-check": (exp_catalog_check, "admissibility of every catalog law and basic CF identities",
                      "polar decomposition of self-decomposable Levy measures and the condition on k_x"),
    "identity-check": (exp_identity_check, "characterizing equation E A f(X) = 0 for tanh-ramp fields",
                       "characterizing equation of the non-local Stein operator"),
    "semigroup-laws": (exp_semigroup_laws, "P_s P_t = P_{s+t}, invariance of the target, Fourier vs MC",
                       "semigroup property, invariance of mu_X and the generator A"),
    "stein-residual": (exp_stein_residual, "A f_h - (h - E h) at five points per law",
                       "Stein equation A f_h = h - E h(X) solved by f_h"),
    "derivative-bounds": (exp_derivative_bounds, "sup bounds on the derivatives of f_h on a grid",
                          "derivative bounds on f_h: |D f_h| <= 1, |D^2 f_h| <= 1/2, M1 <= sqrt(d), M2 <= d/2"),
    "discrepancy-bound": (exp_discrepancy_bound, "smooth W2 <= (d/2) sqrt(m2) S for perturbed gamma laws",
                          "Stein kernel bound d_W2 <= (d/2) (int |u|^2 nu)^{1/2} S"),
    "galerkin-kernel": (exp_galerkin_kernel, "Galerkin Stein kernel for Y = X: discrepancy, energy identity",
                        "existence of Stein kernels via the variational problem A(f, tau) = L(f)"),
    "poincare": (exp_poincare, "Rayleigh ratios of the ID Poincare inequality for Y = X",
                 "Poincare inequality of ID laws, U_Y >= 1 with f(y) = y"),
    "smoothing-rate": (exp_smoothing_rate, "W1(X, X_t) curves and the fitted constant for the proven rate",
                       "smoothing rate W1(X_t, X) <= C_d exp(-t / (2^{d+1}(d+1)))"),
    "distance-orderings": (exp_distance_orderings, "lb_r2 <= lb_r1 <= W1 <= W2 on sampled pairs",
                           "ordering of smooth Wasserstein and Wasserstein distances"),
    "convergence-sequence": (exp_convergence_sequence, "smooth W2 along Y_n = e^{-t_n} Y0 + X_{t_n}",
                             "convergence: E|Y_n|^2 -> m2 and U_n -> 1 imply Y_n -> X"),
}


def list_registry():
    return [{"id": k, "description": v[1], "anchor": v[2]} for k, v in REGISTRY.items()]


def run_experiment(cfg: ExperimentConfig) -> dict:
    if cfg.experiment not in REGISTRY:
        raise UnknownExperiment(f"unknown experiment {cfg.experiment!r}; see `sdstein list`")
    fn, desc, anchor = REGISTRY[cfg.experiment]
    out = None
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
    timer = Timer()
    t0 = time.perf_counter()
    checks = fn(cfg, timer, out)
    total = time.perf_counter() - t0
    gating = [c for c in checks if c.get("gating", True)]
    timing_ok = all(r.get("verdict", "pass") == "pass" for r in timer.rows)
    report = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "experiment": cfg.experiment,
        "description": desc,
        "anchor": anchor,
        "config": cfg.echo(),
        "checks": checks,
        "n_checks": len(checks),
        "n_failed": sum(c["verdict"] == "fail" for c in gating),
        "passed": all(c["verdict"] == "pass" for c in gating),
        "wall_clock": {"seconds": round(total, 3), "budgets": timer.rows, "ok": timing_ok},
    }
    if out is not None:
        (out / f"{cfg.experiment}.json").write_text(report_json(report))
    return report


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def report_passed(report):
    """Check verdicts and timing budgets together."""
    return bool(report["passed"] and report["wall_clock"]["ok"])
