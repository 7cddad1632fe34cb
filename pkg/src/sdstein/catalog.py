"""Catalog families and config loading.

Families: rotationally invariant stable, symmetric stable with a discrete
spherical measure, multivariate gamma with independent coordinates, gamma-type
laws with exponential radial profile, and ``custom`` laws assembled from
profile descriptors.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy import special

from .errors import ConfigInvalid, InvalidLevyMeasure
from .levy import (
    ExponentialProfile,
    PolarLevyMeasure,
    PowerProfile,
    SDLawSpec,
    TabulatedProfile,
)

FAMILIES = ("rot_inv_stable", "symmetric_stable", "multi_gamma", "exp_profile", "custom")


def stable_kappa(alpha):
    """-Gamma(-alpha) cos(pi alpha / 2): 1-d scale of the power profile r^{-alpha}."""
    return -special.gamma(-alpha) * math.cos(math.pi * alpha / 2)


def sphere_abs_moment(alpha, d):
    """E|theta_1|^alpha for theta uniform on S^{d-1}."""
    return math.exp(
        special.gammaln((alpha + 1) / 2) + special.gammaln(d / 2)
        - 0.5 * math.log(math.pi) - special.gammaln((alpha + d) / 2)
    )


def rot_inv_stable(d=1, alpha=1.5, c=1.0, scale=None, mean=None, name=None):
    """Rotationally invariant stable law, ``log phi = -C |xi|^alpha``.

    The profile is ``c r^{-alpha}``; ``C`` follows from ``c``.  Passing ``scale``
    fixes ``C`` instead and rescales ``c`` to match.
    """
    kap = stable_kappa(alpha) * sphere_abs_moment(alpha, d)
    if scale is not None:
        c = scale / kap
    C = c * kap
    levy = PolarLevyMeasure(d, profiles=PowerProfile(alpha, c), uniform=True)
    mean = np.zeros(d) if mean is None else mean
    return SDLawSpec(mean, levy, {"family": "rot_inv_stable", "alpha": alpha, "c": c, "C": C},
                     name or f"rot_inv_stable_d{d}_a{alpha:g}")


def symmetric_stable(directions, weights, alpha=1.5, c=1.0, mean=None, name=None):
    """Stable law with discrete symmetric spherical measure.

    ``log phi = -C sum_x w_x |<x, xi>|^alpha`` with ``C = c kappa_alpha``.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    w = np.asarray(weights, dtype=float)
    for x, wx in zip(dirs, w):
        hit = np.linalg.norm(dirs + x[None, :], axis=1) < 1e-12
        if not np.any(hit) or abs(w[np.argmax(hit)] - wx) > 1e-12:
            raise InvalidLevyMeasure("symmetric stable needs antipodal atoms with equal weights")
    d = dirs.shape[1]
    levy = PolarLevyMeasure(d, dirs, w, PowerProfile(alpha, c))
    mean = np.zeros(d) if mean is None else mean
    return SDLawSpec(mean, levy, {"family": "symmetric_stable", "alpha": alpha, "c": c,
                                  "C": c * stable_kappa(alpha)},
                     name or f"symmetric_stable_d{d}_a{alpha:g}")


def multi_gamma(alpha, beta=None, mean=None, name=None):
    """Independent coordinates ``X_j ~ Gamma(alpha_j, rate beta_j)``."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    b = np.ones_like(a) if beta is None else np.broadcast_to(np.asarray(beta, dtype=float), a.shape).copy()
    if np.any(a <= 0) or np.any(b <= 0):
        raise InvalidLevyMeasure("gamma parameters must be positive")
    d = a.size
    A = a.sum()
    profiles = [ExponentialProfile(A, bj) for bj in b]
    levy = PolarLevyMeasure(d, np.eye(d), a / A, profiles)
    mean = a / b if mean is None else mean
    return SDLawSpec(mean, levy, {"family": "multi_gamma", "alpha": a.tolist(), "beta": b.tolist()},
                     name or f"multi_gamma_d{d}")


def gamma1d(alpha=2.0, beta=1.0, name=None):
    return multi_gamma([alpha], [beta], name=name or f"gamma1d_a{alpha:g}_b{beta:g}")


def exp_profile(alpha=1.0, beta=1.0, d=1, directions=None, weights=None, mean=None, name=None):
    """Gamma-type law with ``k_x(r) = alpha e^{-beta r}`` in every direction.

    With no directions the spherical measure is uniform.  The default mean is
    the natural one, ``int u nu(du)``.
    """
    prof = ExponentialProfile(alpha, beta)
    if directions is None:
        levy = PolarLevyMeasure(d, profiles=prof, uniform=True)
        natural = np.zeros(d)
    else:
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        w = np.asarray(weights, dtype=float)
        levy = PolarLevyMeasure(dirs.shape[1], dirs, w, prof)
        natural = (w[:, None] * dirs).sum(axis=0) * alpha / beta
    mean = natural if mean is None else mean
    return SDLawSpec(mean, levy, {"family": "exp_profile", "alpha": alpha, "beta": beta},
                     name or f"exp_profile_d{levy.dimension}")


def standard_catalog():
    """The laws exercised by the test-suite and the experiment registry."""
    s = 1 / math.sqrt(2)
    laws = [
        gamma1d(2.0, 1.0, name="gamma1d"),
        multi_gamma([1.0, 2.0], [1.0, 1.0], name="multi_gamma2"),
        rot_inv_stable(1, 1.5, name="rot_inv_stable1"),
        rot_inv_stable(2, 1.5, name="rot_inv_stable2"),
        symmetric_stable([[1, 0], [-1, 0], [s, s], [-s, -s]], [0.25] * 4, 1.5, name="symmetric_stable2"),
        exp_profile(1.0, 1.0, directions=[[1.0], [-1.0]], weights=[0.7, 0.3], name="exp_profile1"),
        exp_profile(1.0, 1.0, d=2, name="exp_profile2"),
    ]
    return {law.name: law for law in laws}


# loading ----------------------------------------------------------------


def read_profile_csv(path):
    """Two columns (r, k(r)); a non-numeric first row is taken as the header."""
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0:
                    continue
                raise InvalidLevyMeasure(f"{path}: bad row {i + 1}: {row!r}")
    if not rows:
        raise InvalidLevyMeasure(f"{path}: no data")
    r, k = zip(*rows)
    return TabulatedProfile(r, k)


def _profile_from(desc, base: Path):
    kind = desc.get("kind")
    if kind == "power":
        return PowerProfile(desc["alpha"], desc.get("c", 1.0))
    if kind == "exponential":
        return ExponentialProfile(desc["alpha"], desc["beta"])
    if kind == "tabulated":
        if "csv" in desc:
            p = Path(desc["csv"])
            return read_profile_csv(p if p.is_absolute() else base / p)
        return TabulatedProfile(desc["r"], desc["k"])
    raise ConfigInvalid({"profiles": f"unknown profile kind {kind!r}"})


def law_from_config(cfg, base=None) -> SDLawSpec:
    """Build a law from ``{family, params, mean, dimension}``."""
    if isinstance(cfg, (str, Path)):
        path = Path(cfg)
        return law_from_config(json.loads(path.read_text()), path.parent)
    base = Path(base or ".")
    errors = {}
    unknown = set(cfg) - {"family", "params", "mean", "dimension", "name"}
    for key in sorted(unknown):
        errors[key] = "unknown field"
    fam = cfg.get("family")
    if fam not in FAMILIES:
        errors["family"] = f"must be one of {FAMILIES}"
    if errors:
        raise ConfigInvalid(errors)
    p = dict(cfg.get("params", {}))
    d = cfg.get("dimension")
    mean = cfg.get("mean")
    name = cfg.get("name")
    try:
        if fam == "rot_inv_stable":
            law = rot_inv_stable(d or 1, p.get("alpha", 1.5), p.get("c", 1.0), p.get("scale"), mean, name)
        elif fam == "symmetric_stable":
            law = symmetric_stable(p["directions"], p["weights"], p.get("alpha", 1.5), p.get("c", 1.0), mean, name)
        elif fam == "multi_gamma":
            law = multi_gamma(p["alpha"], p.get("beta"), mean, name)
        elif fam == "exp_profile":
            law = exp_profile(p.get("alpha", 1.0), p.get("beta", 1.0), d or 1,
                              p.get("directions"), p.get("weights"), mean, name)
        else:
            profs = p["profiles"]
            if p.get("uniform"):
                levy = PolarLevyMeasure(d, profiles=_profile_from(profs[0], base), uniform=True)
            else:
                profiles = [_profile_from(q, base) for q in profs]
                levy = PolarLevyMeasure(d or len(p["directions"][0]), p["directions"], p["weights"], profiles)
            law = SDLawSpec(np.zeros(levy.dimension) if mean is None else mean, levy, None, name or "custom")
    except KeyError as exc:
        raise ConfigInvalid({f"params.{exc.args[0]}": "missing"}) from None
    if d is not None and law.dimension != d:
        raise ConfigInvalid({"dimension": f"config says {d}, law has {law.dimension}"})
    return law
