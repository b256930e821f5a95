"""Finite-span elements ``f = sum_i c_i Gamma(., x_i)`` and the reproducing inner product."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RkhsError
from .kernels import KernelSpec, cross_gram
from .measure import as_point, as_points, check_distinct
from .serialization import decode_array, encode_array


@dataclass(frozen=True, eq=False)
class RkhsElement:
    """Element of the pre-Hilbert span of kernel sections.

    Stored as anchors and coefficients; duplicated anchors are rejected.
    """

    kernel: KernelSpec
    anchors: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        anchors = as_points(self.anchors)
        coef = np.asarray(self.coefficients)
        if not np.iscomplexobj(coef):
            coef = coef.astype(np.float64)
        coef = coef.reshape(-1)
        if coef.shape[0] != anchors.shape[0]:
            raise RkhsError("dimension-mismatch",
                            f"{anchors.shape[0]} anchors but {coef.shape[0]} coefficients")
        if not np.all(np.isfinite(coef)):
            raise RkhsError("invalid-coefficients", "coefficients must be finite")
        check_distinct(anchors, "anchors")
        anchors.setflags(write=False)
        coef.setflags(write=False)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "coefficients", coef)

    @classmethod
    def section(cls, kernel: KernelSpec, x) -> "RkhsElement":
        """The kernel section ``gamma_x = Gamma(., x)``."""
        return cls(kernel, as_point(x)[None, :], np.ones(1))

    @classmethod
    def zero(cls, kernel: KernelSpec, anchors) -> "RkhsElement":
        anchors = as_points(anchors)
        return cls(kernel, anchors, np.zeros(len(anchors)))

    def __call__(self, x):
        return evaluate_element(self, x)

    def norm(self) -> float:
        return float(np.sqrt(max(0.0, np.real(rkhs_inner(self, self)))))

    def to_dict(self):
        return {"kernel": self.kernel.to_dict(), "anchors": self.anchors.tolist(),
                "coefficients": encode_array(self.coefficients)}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(KernelSpec.from_dict(data["kernel"]), data["anchors"],
                       decode_array(data["coefficients"], 1))
        except KeyError as exc:
            raise RkhsError("invalid-element", f"missing field {exc}") from None


def _scalar(z):
    return complex(z) if np.iscomplexobj(z) else float(z)


def rkhs_inner(f: RkhsElement, g: RkhsElement):
    """``<f, g> = sum_ij c_i conj(d_j) Gamma(t_j, x_i)`` for ``f = sum c_i gamma_{x_i}``, ``g = sum d_j gamma_{t_j}``."""
    if f.kernel != g.kernel:
        raise RkhsError("kernel-mismatch", "elements belong to different kernels")
    G = cross_gram(f.kernel, g.anchors, f.anchors)   # G[j, i] = Gamma(t_j, x_i)
    return _scalar(np.conj(g.coefficients) @ G @ f.coefficients)


def evaluate_element(f: RkhsElement, x):
    """``f(x) = sum_i c_i Gamma(x, x_i)`` at a single point."""
    return _scalar(cross_gram(f.kernel, as_point(x)[None, :], f.anchors)[0] @ f.coefficients)


def evaluate_at(f: RkhsElement, points) -> np.ndarray:
    """Vectorized :func:`evaluate_element` over the rows of ``points``."""
    return cross_gram(f.kernel, as_points(points), f.anchors) @ f.coefficients


def reproducing_check(f: RkhsElement, probe_points) -> float:
    """Max ``|f(x) - <f, gamma_x>|`` over the probes.

    The two sides are computed separately: a batched evaluation against the
    anchors, and one inner product per probe with the section ``gamma_x``.
    """
    probes = as_points(probe_points)
    direct = evaluate_at(f, probes)
    via_inner = np.array([rkhs_inner(f, RkhsElement.section(f.kernel, p)) for p in probes])
    return float(np.max(np.abs(direct - via_inner))) if len(probes) else 0.0


def reproducing_tolerance(f: RkhsElement, probe_points) -> float:
    """Contract bound ``1e-9 * (1 + |f|_H * max_x sqrt(Gamma(x, x)))``."""
    diag = np.real(f.kernel.diag(as_points(probe_points)))
    return 1e-9 * (1.0 + f.norm() * float(np.sqrt(np.max(np.maximum(diag, 0.0)))))


@dataclass
class InterpolationInfo:
    residual: float
    rank: int
    discarded: int


def interpolate(kernel: KernelSpec, points, targets, rank_tol=1e-12, full_output=False):
    """Minimum-norm span element matching ``targets`` at ``points``.

    Solves ``G c = y`` with an eigenvalue-cutoff pseudo-inverse of the Gram
    (modes below ``rank_tol * lambda_max`` are dropped). With
    ``full_output=True`` also returns an :class:`InterpolationInfo` holding the
    max-abs residual ``|G c - y|`` left by the dropped modes.
    """
    pts = as_points(points)
    check_distinct(pts)
    y = np.asarray(targets)
    if y.ndim != 1 or y.shape[0] != len(pts):
        raise RkhsError("dimension-mismatch", "one target per point required")
    G = cross_gram(kernel, pts, pts)
    if not np.any(y):
        f = RkhsElement(kernel, pts, np.zeros(len(pts), dtype=np.result_type(G, y)))
        return (f, InterpolationInfo(0.0, 0, 0)) if full_output else f
    lam, U = np.linalg.eigh(0.5 * (G + G.conj().T))
    top = lam[-1]
    keep = lam > rank_tol * top if top > 0 else np.zeros_like(lam, dtype=bool)
    if not np.any(keep):
        raise RkhsError("all-eigenvalues-cut", "rank_tol removes the entire Gram spectrum")
    Uk = U[:, keep]
    c = Uk @ ((Uk.conj().T @ y) / lam[keep])
    if np.isrealobj(G) and np.isrealobj(y):
        c = np.real(c)
    f = RkhsElement(kernel, pts, c)
    if not full_output:
        return f
    residual = float(np.max(np.abs(G @ c - y)))
    return f, InterpolationInfo(residual, int(np.sum(keep)), int(np.sum(~keep)))
