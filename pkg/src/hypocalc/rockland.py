"""Hermite-Galerkin truncations of polynomial-coefficient operators and injectivity evidence."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigvals, svd

from .polyfield import MultiPoly
from .scalars import Gaussian
from .symbols import SymbolOperator

MAX_TRUNCATION = 10**6
DEFAULT_LADDER = (64, 128, 256)
DEFAULT_TOL = 1e-6


class TruncationTooLarge(ValueError):
    pass


def _complex(c) -> complex:
    if isinstance(c, Gaussian):
        return complex(float(c.re), float(c.im))
    return complex(c)


def position_matrix(L: int) -> sp.csr_matrix:
    """``<h_i, y h_j>`` on Hermite functions ``h_0..h_{L-1}``."""
    j = np.arange(1, L)
    off = np.sqrt(j / 2.0)
    return sp.diags([off, off], [1, -1], shape=(L, L), format="csr")


def derivative_matrix(L: int) -> sp.csr_matrix:
    """``<h_i, h_j'>``: skew-symmetric tridiagonal."""
    j = np.arange(1, L)
    off = np.sqrt(j / 2.0)
    return sp.diags([off, -off], [1, -1], shape=(L, L), format="csr")


@dataclass
class HermiteTruncation:
    q: int
    M: int
    sparse: sp.csr_matrix = field(repr=False)
    extended: sp.csr_matrix = field(repr=False)  # operator applied to the span of the first M functions, untruncated rows
    ext_size: int = 0

    @property
    def matrix(self) -> np.ndarray:
        return self.sparse.toarray()

    @property
    def size(self) -> int:
        return self.M**self.q

    def is_hermitian(self, rtol: float = 1e-10) -> bool:
        A = self.sparse
        diff = abs(A - A.conj().T).max() if A.nnz else 0.0
        scale = max(1.0, abs(A).max() if A.nnz else 0.0)
        return diff <= rtol * scale

    def residual(self, v: np.ndarray) -> float:
        """``||S v|| / ||v||`` for ``v`` in the truncated span, computed with the full operator."""
        return float(np.linalg.norm(self.extended @ v) / np.linalg.norm(v))


def _operator_reach(S: SymbolOperator) -> int:
    return max((sum(a) + c.degree for a, c in S.terms.items()), default=0)


def _term_matrix(c: MultiPoly, alpha: tuple, Ys: list, Ds: list, L: int, q: int):
    total = None
    for e, coef in c.items():
        op = sp.identity(L**q, format="csr", dtype=complex)
        for a in range(q):
            for _ in range(e[a]):
                op = Ys[a] @ op
        mat = op
        for a in range(q):
            for _ in range(alpha[a]):
                mat = mat @ Ds[a]
        term = _complex(coef) * mat
        total = term if total is None else total + term
    return total


def discretize(S: SymbolOperator, M: int) -> HermiteTruncation:
    """Exact Galerkin matrix of ``S`` on the first ``M`` Hermite functions per variable."""
    q = S.q
    if q < 1 or q > 2:
        raise ValueError("discretization supports q = 1 or 2")
    if M < 1:
        raise ValueError("M must be positive")
    if M**q > MAX_TRUNCATION:
        raise TruncationTooLarge(f"truncation of size {M**q} exceeds {MAX_TRUNCATION}")
    L = M + _operator_reach(S) + 1
    Y1, D1, I1 = position_matrix(L), derivative_matrix(L), sp.identity(L, format="csr")
    if q == 1:
        Ys, Ds = [Y1], [D1]
    else:
        Ys = [sp.kron(Y1, I1, format="csr"), sp.kron(I1, Y1, format="csr")]
        Ds = [sp.kron(D1, I1, format="csr"), sp.kron(I1, D1, format="csr")]
    full = sp.csr_matrix((L**q, L**q), dtype=complex)
    for alpha, c in S.terms.items():
        full = full + _term_matrix(c, alpha, Ys, Ds, L, q)
    if q == 1:
        keep = np.arange(M)
    else:
        i1, i2 = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
        keep = (i1 * L + i2).ravel()
    cols = full[:, keep]
    block = cols[keep, :]
    if not np.any(cols.imag.data):
        block, cols = block.real, cols.real
    return HermiteTruncation(q, M, block.tocsr(), cols.tocsr(), L)


@dataclass
class SpectralReport:
    eigenvalues: list
    sizes: list
    converged: bool
    smallest_singular: list
    table: dict
    tol: float

    def to_dict(self) -> dict:
        return {"eigenvalues": [_num(v) for v in self.eigenvalues], "sizes": list(self.sizes),
                "converged": self.converged, "smallest_singular": [float(v) for v in self.smallest_singular],
                "tol": self.tol, "table": {str(k): [_num(v) for v in vals] for k, vals in self.table.items()}}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["M"] + [f"lambda{i + 1}" for i in range(len(self.eigenvalues))])
        for M, vals in self.table.items():
            w.writerow([M] + [repr(float(np.real(v))) for v in vals])
        return buf.getvalue()


def _num(v):
    v = complex(v)
    return v.real if abs(v.imag) < 1e-14 else [v.real, v.imag]


def _lowest(T: HermiteTruncation, L: int) -> np.ndarray:
    A = T.matrix
    if T.is_hermitian():
        return eigh(A, eigvals_only=True, subset_by_index=[0, min(L, A.shape[0]) - 1])
    vals = eigvals(A)
    return np.array(sorted(vals, key=lambda z: (z.real, z.imag))[:L])


def _smin(T: HermiteTruncation) -> float:
    return float(svd(T.matrix, compute_uv=False)[-1])


def spectrum_1d(S: SymbolOperator, L: int = 5, M: int = 64, tol: float = DEFAULT_TOL) -> SpectralReport:
    """Lowest ``L`` eigenvalues from truncations ``M`` and ``2M``; converged when they agree within ``tol``."""
    sizes = [M, 2 * M]
    table, smins = {}, []
    for m in sizes:
        T = discretize(S, m)
        table[m] = list(_lowest(T, L))
        smins.append(_smin(T))
    a, b = np.array(table[sizes[0]]), np.array(table[sizes[1]])
    converged = len(a) == len(b) and bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b))))
    return SpectralReport(list(b), sizes, converged, smins, table, tol)


@dataclass
class InjectivityVerdict:
    verdict: str
    smallest_singular: list
    sizes: list
    residual: float | None
    null_vector: np.ndarray | None = field(default=None, repr=False)
    note: str = "numerical evidence from a truncation ladder, not a proof"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "smallest_singular": [float(v) for v in self.smallest_singular],
                "sizes": list(self.sizes), "residual": self.residual, "note": self.note}


def injectivity_test(S: SymbolOperator, M_ladder: Sequence[int] = DEFAULT_LADDER, threshold: float = DEFAULT_TOL,
                     stabilization: float = 1e-6) -> InjectivityVerdict:
    """Injective when the smallest singular value settles above ``threshold``;
    not injective when a near-null vector keeps a residual below it under refinement."""
    smins, residuals, vecs = [], [], []
    sizes = list(M_ladder)
    for M in sizes:
        T = discretize(S, M)
        _, s, Vh = svd(T.matrix)
        v = Vh[-1].conj()
        smins.append(float(s[-1]))
        residuals.append(T.residual(v))
        vecs.append(v)
    stable = len(smins) < 2 or abs(smins[-1] - smins[-2]) <= stabilization * max(1.0, smins[-1])
    if all(s > threshold for s in smins) and stable:
        return InjectivityVerdict("injective", smins, sizes, None)
    if all(r < threshold for r in residuals[-2:]):
        return InjectivityVerdict("not-injective", smins, sizes, residuals[-1], vecs[-1])
    return InjectivityVerdict("inconclusive", smins, sizes, residuals[-1])


# -- the ladder family criterion ------------------------------------------------------------


def model_operator(k: int, n: int, beta: float | Fraction = 1) -> SymbolOperator:
    """``(-1)^{n(k+n)} d^{2n(k+n)} + beta^{2(k+n)} y^{2k(k+n)}`` on ``R``."""
    order = 2 * n * (k + n)
    y = MultiPoly.var(1, 0)
    b = Fraction(beta) if not isinstance(beta, float) else beta
    return SymbolOperator(1, {(order,): (-1) ** (n * (k + n)), (0,): y ** (2 * k * (k + n)) * (b ** (2 * (k + n)))})


@dataclass
class HypoellipticityVerdict:
    hypoelliptic: bool
    basis: str
    target: complex
    nearest_index: int | None
    nearest_eigenvalue: float | None
    eigenvalues: list
    converged: bool
    beta_checks: dict

    def to_dict(self) -> dict:
        return {"hypoelliptic": self.hypoelliptic, "basis": self.basis, "target": _num(self.target),
                "nearest_index": self.nearest_index, "nearest_eigenvalue": self.nearest_eigenvalue,
                "eigenvalues": [float(v) for v in self.eigenvalues], "converged": self.converged,
                "beta_checks": self.beta_checks}


def _decide(target: complex, eigs: np.ndarray, ceiling: float, tol: float):
    if abs(target.imag) > tol:
        return True, "non-real", None
    t = target.real
    dist = np.abs(eigs - t)
    idx = int(np.argmin(dist))
    if dist[idx] <= tol * max(1.0, abs(t)):
        return False, "eigenvalue", idx
    if t < eigs.min():
        return True, "below-spectrum", idx
    if t <= ceiling:
        return True, "gap", idx
    return True, "spectral-growth", idx


def hypoellipticity_verdict(k: int, n: int, lam, M: int = 128, L: int = 8, tol: float = DEFAULT_TOL,
                            betas: Sequence[float] = (1.0, -1.0, 2.0, 0.5)) -> HypoellipticityVerdict:
    """Criterion for the ladder family: ``(-1)^{n+1} lam`` must avoid the model spectrum.

    Each ``beta`` in ``betas`` is checked directly on the symbol
    ``A_beta + lam (-1)^n beta^{2n}``; its spectrum scales by ``beta^{2n}`` so the
    verdict must not depend on ``beta``.
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    lam = complex(lam)
    rep = spectrum_1d(model_operator(k, n), L=L, M=M, tol=tol)
    eigs = np.real(np.array(rep.eigenvalues))
    conv = np.abs(np.real(np.array(rep.table[rep.sizes[0]])) - eigs) <= tol * np.maximum(1.0, np.abs(eigs))
    ceiling = float(eigs[np.nonzero(conv)[0][-1]]) if conv.any() else -math.inf
    target = (-1) ** (n + 1) * lam
    ok, basis, idx = _decide(target, eigs, ceiling, tol)
    checks = {}
    for beta in betas:
        r = spectrum_1d(model_operator(k, n, beta), L=L, M=M, tol=tol)
        e = np.real(np.array(r.eigenvalues))
        scale = abs(beta) ** (2 * n)
        shifted = -lam * (-1) ** n * beta ** (2 * n)
        b_ok, _, _ = _decide(complex(shifted) / scale, e / scale, ceiling, tol)
        checks[repr(float(beta))] = {"hypoelliptic": b_ok,
                                     "scaled_eigenvalues": [float(v) for v in e[:3] / scale]}
    return HypoellipticityVerdict(ok, basis, target, idx, float(eigs[idx]) if idx is not None else None,
                                  list(eigs), rep.converged, checks)
