"""Discretized integral operator ``L_Gamma`` and the carrier maps ``A`` / ``A*``.

On a discrete measure with nodes ``x_i`` and weights ``w_i`` the integral
operator acts on node values by ``(L phi)_i = sum_j Gamma(x_i, x_j) w_j phi_j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RkhsError
from .kernels import GramMatrix, KernelSpec, cross_gram, gram
from .measure import DiscreteMeasure, lp_norm
from .rkhs import RkhsElement, evaluate_at


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """``entries[i, j] = Gamma(x_i, x_j) * w_j``."""

    measure: DiscreteMeasure
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.measure)
        if self.entries.shape != (n, n):
            raise RkhsError("dimension-mismatch", "operator does not match node count")

    @property
    def kernel_values(self) -> np.ndarray:
        return self.entries / self.measure.weights[None, :]

    def symmetrized(self) -> np.ndarray:
        """``W^{1/2} K W^{1/2}``, unitarily similar to ``L`` in ``L^2(mu)``."""
        s = np.sqrt(self.measure.weights)
        K = self.kernel_values
        S = s[:, None] * K * s[None, :]
        return 0.5 * (S + S.conj().T)


@dataclass(frozen=True, eq=False)
class CarrierMap:
    """The inclusion ``A: H -> node functions`` and its adjoint on a measure."""

    kernel: KernelSpec
    measure: DiscreteMeasure
    gram_on_nodes: GramMatrix

    @classmethod
    def build(cls, kernel: KernelSpec, measure: DiscreteMeasure) -> "CarrierMap":
        return cls(kernel, measure, gram(kernel, measure.nodes))

    def operator(self) -> OperatorMatrix:
        return OperatorMatrix(self.measure, self.gram_on_nodes.entries * self.measure.weights[None, :])


def integral_operator(kernel: KernelSpec, measure: DiscreteMeasure) -> OperatorMatrix:
    G = cross_gram(kernel, measure.nodes, measure.nodes)
    return OperatorMatrix(measure, G * measure.weights[None, :])


def apply_integral_operator(op: OperatorMatrix, phi) -> np.ndarray:
    phi = op.measure._values(phi)
    return op.entries @ phi


def adjoint_apply(cm: CarrierMap, phi) -> RkhsElement:
    """``A* phi = sum_i w_i phi_i gamma_{x_i}``, the discrete weak integral."""
    phi = cm.measure._values(phi)
    return RkhsElement(cm.kernel, cm.measure.nodes, cm.measure.weights * phi)


def forward_apply(cm: CarrierMap, f: RkhsElement) -> np.ndarray:
    """Sample ``f`` at the nodes: ``values_i = f(x_i)``."""
    if f.kernel != cm.kernel:
        raise RkhsError("kernel-mismatch", "element and carrier map use different kernels")
    return evaluate_at(f, cm.measure.nodes)


def verify_factorization(cm: CarrierMap) -> float:
    """Max-abs gap between ``A A*`` assembled column by column and ``L``."""
    n = len(cm.measure)
    columns = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        columns.append(forward_apply(cm, adjoint_apply(cm, e)))
    composed = np.column_stack(columns)
    direct = cm.operator().entries
    return float(np.max(np.abs(composed - direct)))


def factorization_tolerance(cm: CarrierMap) -> float:
    n = len(cm.measure)
    top = float(np.max(np.abs(cm.gram_on_nodes.entries)))
    return 1e-12 * (1.0 + top * float(np.max(cm.measure.weights))) * n


def frame_operator(cm: CarrierMap) -> np.ndarray:
    """``A* A`` on anchor coefficients: ``c -> W G c``."""
    return cm.measure.weights[:, None] * cm.gram_on_nodes.entries


def frame_spectrum(cm: CarrierMap) -> np.ndarray:
    """Eigenvalues of the frame operator, descending.

    ``W G`` is similar to ``W^{1/2} G W^{1/2}``, so a Hermitian solve suffices.
    """
    return np.linalg.eigvalsh(cm.operator().symmetrized())[::-1]


@dataclass
class HSReport:
    trace_diag: float
    eigen_sum: float
    rel_defect: float
    hs_flag: bool

    def to_dict(self):
        return {"trace_diag": self.trace_diag, "eigen_sum": self.eigen_sum,
                "rel_defect": self.rel_defect, "hs_flag": self.hs_flag}


def hs_diagnostic(cm: CarrierMap) -> HSReport:
    """Compare ``sum_i w_i Gamma(x_i, x_i)`` with the sum of the operator's eigenvalues."""
    diag = np.real(np.diag(cm.gram_on_nodes.entries))
    trace_diag = float(np.sum(cm.measure.weights * diag))
    eigen_sum = float(np.sum(np.linalg.eigvalsh(cm.operator().symmetrized())))
    rel = abs(trace_diag - eigen_sum) / (1.0 + abs(trace_diag))
    return HSReport(trace_diag, eigen_sum, rel, bool(np.isfinite(trace_diag)))


@dataclass
class OpNormReport:
    p: float
    lower: float
    upper: float
    exact: Optional[float]

    def to_dict(self):
        return {"p": _p_json(self.p), "lower": self.lower, "upper": self.upper,
                "exact": self.exact}


def _p_json(p):
    return "inf" if np.isinf(p) else (int(p) if float(p).is_integer() else p)


def _parse_p(p):
    if isinstance(p, str):
        p = p.strip().lower()
        p = np.inf if p in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if p not in (1.0, 2.0) and not np.isinf(p):
        raise RkhsError("invalid-p", f"p must be one of 1, 2, inf; got {p}")
    return p


def _random_unimodular(rng, n, count, complex_):
    if complex_:
        return np.exp(2j * np.pi * rng.uniform(size=(n, count)))
    return rng.choice([-1.0, 1.0], size=(n, count))


def opnorm_estimate(op: OperatorMatrix, p=2, trials=1000, seed=0) -> OpNormReport:
    """Norm of ``L`` from ``L^q(mu)`` to ``L^p(mu)``, ``q = p / (p - 1)``.

    ``p = inf``: exact, the max modulus of the kernel on the nodes.
    ``p = 2``: exact, the top singular value of ``W^{1/2} K W^{1/2}``; the
    bracket is a random-vector lower bound and a Schur-test upper bound.
    ``p = 1``: no exact value. Upper bound ``sum_ij w_i w_j |Gamma_ij|``;
    lower bound the best ``|L phi|_1 / |phi|_inf`` over ``phi = 1``, the sign
    pattern of the top eigenvector, and ``trials`` random signs (or phases).
    """
    p = _parse_p(p)
    mu = op.measure
    w = mu.weights
    K = op.kernel_values
    n = len(mu)
    rng = np.random.default_rng(seed)
    complex_ = np.iscomplexobj(K)
    if np.isinf(p):
        exact = float(np.max(np.abs(K)))
        return OpNormReport(p, exact, exact, exact)
    if p == 2.0:
        S = op.symmetrized()
        exact = float(np.linalg.norm(S, 2))
        absS = np.abs(S)
        schur = float(np.sqrt(np.max(absS.sum(axis=0)) * np.max(absS.sum(axis=1))))
        upper = max(exact, min(schur, float(np.linalg.norm(S, "fro"))))
        cand = rng.standard_normal((n, trials))
        if complex_:
            cand = cand + 1j * rng.standard_normal((n, trials))
        ratios = np.linalg.norm(S @ cand, axis=0) / np.linalg.norm(cand, axis=0)
        lower = min(float(np.max(ratios)), exact)
        return OpNormReport(p, lower, upper, exact)
    upper = float(np.sum(w[:, None] * w[None, :] * np.abs(K)))
    eigvec = np.linalg.eigh(op.symmetrized())[1][:, -1] / np.sqrt(w)
    sign = np.where(np.abs(eigvec) > 0, eigvec / np.where(eigvec == 0, 1, np.abs(eigvec)), 1.0)
    cand = np.column_stack([np.ones(n), sign, _random_unimodular(rng, n, trials, complex_)])
    images = op.entries @ cand
    ratios = np.sum(w[:, None] * np.abs(images), axis=0) / np.max(np.abs(cand), axis=0)
    return OpNormReport(p, float(np.max(ratios)), upper, None)


@dataclass
class CarlemanReport:
    q: float
    row_norms: np.ndarray
    max_row_norm: float

    def to_dict(self):
        return {"q": _p_json(self.q), "max_row_norm": self.max_row_norm,
                "row_norms": self.row_norms.tolist()}


def carleman_report(cm: CarrierMap, q=2) -> CarlemanReport:
    """``L^q(mu)`` norm of each kernel row ``Gamma(x_i, .)``."""
    if isinstance(q, str):
        q = np.inf if q.strip().lower() in ("inf", "infinity") else float(q)
    G = cm.gram_on_nodes.entries
    norms = np.array([lp_norm(G[i], cm.measure, q) for i in range(G.shape[0])])
    return CarlemanReport(float(q), norms, float(np.max(norms)))
