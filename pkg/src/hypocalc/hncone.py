"""Numerical exploration of the Helffer-Nourrigat cone through the weighted pairing map.

For a graded basis ``B_1..B_d`` (weights ``w_k``) at ``p`` the pairing map is
``Phi(x, eta, t)_k = t**w_k * <eta, B_k(x)>``; the cone is its limit set as
``x -> p`` and ``t -> 0``. Sampling returns gauge-normalized image points;
membership is decided by minimizing the distance to the image with ``t``
kept small.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import norm, qmc

from .filtration import GradedBasisData
from .osculating import GradedLieAlgebra, coadjoint, dilate_dual
from .polyfield import PolyVectorField

DEFAULT_EPS_IN = 1e-6
DEFAULT_EPS_OUT = 1e-2
DEFAULT_STARTS = 64
DEFAULT_ITERATIONS = 500
DEFAULT_T_SMALL = 1e-3
LOG_T_FLOOR = math.log(1e-12)


@dataclass(frozen=True)
class PairingMap:
    """``basis_fields`` are polynomial fields or callables ``x -> tangent vector``."""

    basis_fields: tuple
    weights: tuple
    base_point: tuple
    dim: int
    _evaluators: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if len(self.basis_fields) != len(self.weights):
            raise ValueError("one weight per basis field is required")
        evals = []
        for B in self.basis_fields:
            if isinstance(B, PolyVectorField):
                evals.append(B.numeric())
            elif callable(B):
                evals.append(lambda x, B=B: np.asarray(B(x), dtype=float))
            else:
                raise TypeError("basis entries must be PolyVectorField or callable")
        object.__setattr__(self, "_evaluators", tuple(evals))
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(self, "base_point", tuple(float(v) for v in self.base_point))

    @classmethod
    def from_basis(cls, basis: GradedBasisData) -> "PairingMap":
        return cls(tuple(basis.fields), tuple(basis.weights), basis.point, basis.generators.dim)

    @property
    def size(self) -> int:
        return len(self.weights)

    def frame(self, x) -> np.ndarray:
        """Matrix whose row ``k`` is ``B_k(x)``."""
        x = np.asarray(x, dtype=float)
        return np.array([ev(x) for ev in self._evaluators])


def pairing(phi: PairingMap, x, eta, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    vals = phi.frame(x) @ np.asarray(eta, dtype=float)
    return vals * np.power(float(t), np.array(phi.weights, dtype=float))


def normalize(xi) -> tuple[np.ndarray, float]:
    """Gauge: divide by the largest absolute component (zero stays zero)."""
    xi = np.asarray(xi, dtype=float)
    s = float(np.max(np.abs(xi))) if xi.size else 0.0
    return (xi / s, s) if s > 0 else (xi.copy(), 1.0)


@dataclass
class ConeSample:
    points: np.ndarray          # (n, d) normalized representatives
    parameters: list            # (x, eta, t) with pairing(x, eta, t) == points[i]
    normalization: str = "max-abs"

    def __len__(self):
        return len(self.points)

    def to_dict(self) -> dict:
        return {
            "normalization": self.normalization,
            "points": [[float(v) for v in row] for row in self.points],
            "parameters": [{"x": [float(v) for v in x], "eta": [float(v) for v in e], "t": float(t)}
                           for x, e, t in self.parameters],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.points.shape[1] if len(self.points) else 0
        w.writerow([f"xi{k + 1}" for k in range(d)])
        for row in self.points:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def projections(self, i: int, j: int) -> np.ndarray:
        """Plot data: coordinates ``(xi_i, xi_j)`` of every representative."""
        return self.points[:, [i, j]]


def exact_point(phi: PairingMap, x, eta, t) -> list:
    """Pairing evaluated in rationals; needs polynomial basis fields.  Float inputs are taken at face value."""
    if not all(isinstance(B, PolyVectorField) for B in phi.basis_fields):
        raise TypeError("exact evaluation needs polynomial basis fields")
    xq = [Fraction(v) if not isinstance(v, Fraction) else v for v in x]
    eq = [Fraction(v) if not isinstance(v, Fraction) else v for v in eta]
    tq = Fraction(t)
    return [tq**w * sum(c * e for c, e in zip(B.evaluate(xq), eq)) for B, w in zip(phi.basis_fields, phi.weights)]


def sample_cone(phi: PairingMap, budget: int, t_max: float = 1.0, seed: int = 0, x_radius: float = 1.0,
                log_eta_range: tuple = (-3.0, 3.0), log_t_min: float = -6.0, dedup_eps: float = 1e-12) -> ConeSample:
    """Quasi-random sweep of the image of the pairing map, gauge-normalized and deduplicated."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    m = phi.dim
    sob = qmc.Sobol(d=2 * m + 2, scramble=True, seed=seed)
    u = sob.random_base2(max(0, math.ceil(math.log2(budget))))[:budget]
    p = np.array(phi.base_point)
    pts, params, seen = [], [], set()
    log_t_max = math.log10(t_max)
    for row in u:
        x = p + x_radius * (2 * row[:m] - 1)
        g = norm.ppf(np.clip(row[m:2 * m], 1e-12, 1 - 1e-12))
        direction = g / np.linalg.norm(g) if np.linalg.norm(g) > 0 else np.eye(m)[0]
        radius = 10 ** (log_eta_range[0] + (log_eta_range[1] - log_eta_range[0]) * row[2 * m])
        t = 10 ** (log_t_min + (log_t_max - log_t_min) * row[2 * m + 1])
        eta = radius * direction
        xi = pairing(phi, x, eta, t)
        xi_n, s = normalize(xi)
        if not np.all(np.isfinite(xi_n)) or s == 0:
            continue
        key = tuple(np.round(xi_n / dedup_eps).astype(np.int64)) if dedup_eps > 0 else None
        if key is not None:
            if key in seen:
                continue
            seen.add(key)
        pts.append(xi_n)
        params.append((x, eta / s, t))
    return ConeSample(np.array(pts).reshape(-1, phi.size), params)


def reachable(phi: PairingMap, sample: ConeSample, rtol: float = 1e-8) -> bool:
    for xi, (x, eta, t) in zip(sample.points, sample.parameters):
        again = pairing(phi, x, eta, t)
        if np.linalg.norm(again - xi) > rtol * max(1.0, np.linalg.norm(xi)):
            return False
    return True


@dataclass
class MembershipVerdict:
    candidate: list
    residual: float
    verdict: str
    heuristic: bool
    witness: dict | None
    trace: list
    eps_in: float
    eps_out: float

    def to_dict(self) -> dict:
        return {"candidate": [float(v) for v in self.candidate], "residual": float(self.residual),
                "verdict": self.verdict, "heuristic": self.heuristic, "witness": self.witness,
                "trace": [float(v) for v in self.trace], "eps_in": self.eps_in, "eps_out": self.eps_out}


def membership(phi: PairingMap, xi, budget: int = DEFAULT_STARTS, eps_in: float = DEFAULT_EPS_IN,
               eps_out: float = DEFAULT_EPS_OUT, iterations: int = DEFAULT_ITERATIONS,
               t_small: float = DEFAULT_T_SMALL, x_radius: float = 0.1, seed: int = 0) -> MembershipVerdict:
    """Is ``xi`` in the closure of the image of the pairing map as ``t -> 0``?

    The covector is written ``eta = omega / t**W`` with ``W`` the top weight, and
    ``omega`` is eliminated by linear least squares (the map is linear in it), so
    the optimizer only moves ``(x, log t)``.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (phi.size,) or not np.all(np.isfinite(xi)):
        raise ValueError("candidate must be a finite vector of the algebra dimension")
    m = phi.dim
    W = max(phi.weights)
    p = np.array(phi.base_point)
    shifts = np.array(phi.weights, dtype=float) - W
    log_hi = math.log(t_small)

    def design(z):
        x = p + z[:m]
        t = math.exp(z[m])
        return phi.frame(x) * np.power(t, shifts)[:, None]

    def residual_vec(z):
        A = design(z)
        omega, *_ = np.linalg.lstsq(A, xi, rcond=None)
        return A @ omega - xi

    trace = []
    best = (np.inf, None)
    if not np.any(xi):
        witness = {"x": list(p), "eta": [0.0] * m, "t": t_small}
        return MembershipVerdict(list(xi), 0.0, "in", False, witness, [0.0], eps_in, eps_out)
    rng = np.random.default_rng(seed)
    lo = np.concatenate([-x_radius * np.ones(m), [LOG_T_FLOOR]])
    hi = np.concatenate([x_radius * np.ones(m), [log_hi]])
    for _ in range(budget):
        z0 = np.concatenate([rng.uniform(-x_radius, x_radius, m) * rng.uniform(0, 1) ** 2,
                             [rng.uniform(LOG_T_FLOOR / 2, log_hi)]])
        z0 = np.clip(z0, lo + 1e-12, hi - 1e-12)
        try:
            sol = least_squares(residual_vec, z0, bounds=(lo, hi), max_nfev=iterations,
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except (ValueError, np.linalg.LinAlgError, FloatingPointError):
            continue
        r = float(np.linalg.norm(residual_vec(sol.x)))
        trace.append(r)
        if r < best[0]:
            best = (r, sol.x)
        if r < eps_in:
            break
    r, z = best
    witness = None
    if z is not None:
        A = design(z)
        omega, *_ = np.linalg.lstsq(A, xi, rcond=None)
        t = math.exp(z[m])
        witness = {"x": [float(v) for v in p + z[:m]], "eta": [float(v) for v in omega / t**W], "t": t}
    if r < eps_in:
        verdict, heuristic = "in", False
    elif r >= eps_out:
        verdict, heuristic = "out", True
    else:
        verdict, heuristic = "inconclusive", True
    return MembershipVerdict(list(xi), r, verdict, heuristic, witness, trace, eps_in, eps_out)


@dataclass
class InvarianceReport:
    checked: int
    failures: list
    skipped_negative_dilation: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"checked": self.checked, "ok": self.ok, "failures": self.failures,
                "negative_dilation": self.skipped_negative_dilation}


def invariance_check(phi: PairingMap, sample: ConeSample, g: GradedLieAlgebra, count: int = 10, seed: int = 0,
                     negative_dilation: bool = False, **membership_kw) -> InvarianceReport:
    """Re-certify dilations, scalar multiples and coadjoint translates of sampled cone points."""
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(sample), size=min(count, len(sample)), replace=False) if len(sample) else []
    failures, neg = [], []
    checked = 0
    for idx in sorted(int(i) for i in picks):
        xi = sample.points[idx]
        lam = float(np.exp(rng.uniform(-1, 1)))
        mu = float(rng.uniform(-2, 2))
        a = rng.uniform(-1, 1, g.dim)
        moves = {
            "dilate": np.array(dilate_dual(g, lam, list(xi)), dtype=float),
            "scale": mu * xi,
            "scale_-1": -xi,
            "coadjoint": np.array([float(v) for v in coadjoint(g, list(a), list(xi))]),
        }
        for name, target in moves.items():
            target_n, _ = normalize(target)
            v = membership(phi, target_n, seed=seed, **membership_kw)
            checked += 1
            if v.verdict != "in":
                failures.append({"index": idx, "move": name, "target": [float(t) for t in target_n],
                                 "residual": v.residual, "lambda": lam, "mu": mu, "a": [float(t) for t in a]})
        if negative_dilation:
            target_n, _ = normalize(np.array(dilate_dual(g, -1.0, list(xi)), dtype=float))
            v = membership(phi, target_n, seed=seed, **membership_kw)
            neg.append({"index": idx, "verdict": v.verdict, "residual": v.residual})
    return InvarianceReport(checked, failures, neg)


def verdict_json(v: MembershipVerdict) -> str:
    return json.dumps(v.to_dict(), sort_keys=True)


# -- relation suites for the bundled configs ------------------------------------------------


def relation_residuals(name: str, points: np.ndarray) -> dict:
    """Per-relation maximum residuals on normalized cone points."""
    P = np.asarray(points, dtype=float)
    if name == "cusp":
        return {"xi1*xi3 - xi2^2": float(np.max(np.abs(P[:, 0] * P[:, 2] - P[:, 1] ** 2)))}
    if name == "grushin":
        return {"xi2*xi4 - xi3^2": float(np.max(np.abs(P[:, 1] * P[:, 3] - P[:, 2] ** 2)))}
    if name == "sextic":
        return {
            "xi1^3 - xi2*xi4^2": float(np.max(np.abs(P[:, 0] ** 3 - P[:, 1] * P[:, 3] ** 2))),
            "xi3^3 - xi2^2*xi4": float(np.max(np.abs(P[:, 2] ** 3 - P[:, 1] ** 2 * P[:, 3]))),
            "min xi_i*xi5": float(np.min(P[:, :4] * P[:, 4:5])),
        }
    if name == "flat":
        # avoid squaring tiny values: (xi1/xi2)*(xi3/xi2)
        mask = (np.abs(P[:, 1]) > 1e-280) & (np.abs(P[:, 0]) > 1e-280)
        ratio = (P[mask, 0] / P[mask, 1]) * (P[mask, 2] / P[mask, 1])
        return {"ratio_min": float(ratio.min()) if ratio.size else math.nan,
                "ratio_max": float(ratio.max()) if ratio.size else math.nan,
                "ratio_count": int(ratio.size)}
    raise KeyError(f"no relation suite named {name!r}")
