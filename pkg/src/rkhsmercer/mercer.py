"""Mercer decomposition of the discretized integral operator.

The weighted operator ``K W`` is symmetrized to ``S = W^{1/2} K W^{1/2}``,
``S = U diag(lambda) U*`` is computed with a Hermitian solver, and
``phi_n = W^{-1/2} u_n`` are the eigenfunctions, orthonormal in ``L^2(mu)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RkhsError
from .kernels import KernelSpec, cross_gram
from .measure import DiscreteMeasure
from .serialization import decode_array, encode_array

DEFAULT_RANK_TOL = 1e-12
CLUSTER_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class MercerDecomposition:
    """Eigenpairs of ``L_Gamma``, eigenvalues descending.

    ``eigenfunctions[n]`` holds the node values of ``phi_n``. All ``n`` modes
    are kept; the first ``rank`` (those above ``rank_tol * lambda_1``) are the
    retained ones that enter every ``1 / lambda`` formula.
    """

    measure: DiscreteMeasure
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    rank: int
    rank_tol: float

    @property
    def top(self) -> float:
        return float(self.eigenvalues[0]) if len(self.eigenvalues) else 0.0

    @property
    def retained_values(self) -> np.ndarray:
        return self.eigenvalues[:self.rank]

    @property
    def retained_functions(self) -> np.ndarray:
        return self.eigenfunctions[:self.rank]

    def coefficients(self, v) -> np.ndarray:
        """``<v, phi_n>_{L^2(mu)}`` for every mode."""
        v = self.measure._values(v)
        return np.conj(self.eigenfunctions) @ (self.measure.weights * v)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.to_dict(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenfunctions": encode_array(self.eigenfunctions),
            "rank_tol": self.rank_tol,
            "rank": self.rank,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MercerDecomposition":
        try:
            measure = DiscreteMeasure.from_dict(data["measure"])
            lam = np.asarray(data["eigenvalues"], dtype=np.float64)
            phi = decode_array(data["eigenfunctions"], 2)
            rank, tol = int(data["rank"]), float(data["rank_tol"])
        except (KeyError, TypeError, ValueError) as exc:
            raise RkhsError("invalid-decomposition", f"bad decomposition file: {exc}") from None
        if phi.shape != (len(lam), len(measure)) or not 0 <= rank <= len(lam):
            raise RkhsError("invalid-decomposition", "inconsistent shapes in decomposition file")
        return cls(measure, lam, phi, rank, tol)


def decompose(kernel: KernelSpec, mu: DiscreteMeasure, rank_tol=DEFAULT_RANK_TOL) -> MercerDecomposition:
    """Spectral decomposition of ``L_Gamma`` on ``mu``.

    Raises ``not-positive-type`` when an eigenvalue falls below
    ``-rank_tol * lambda_1``; smaller negative values are clamped to zero.
    """
    if not 0 < rank_tol < 1:
        raise RkhsError("invalid-rank-tol", f"rank_tol must lie in (0, 1), got {rank_tol}")
    w = np.asarray(mu.weights)
    if np.any(w <= 0):
        raise RkhsError("degenerate-measure", "every weight must be > 0")
    G = cross_gram(kernel, mu.nodes, mu.nodes)
    s = np.sqrt(w)
    S = s[:, None] * G * s[None, :]
    S = 0.5 * (S + S.conj().T)
    lam, U = np.linalg.eigh(S)
    lam, U = lam[::-1].copy(), U[:, ::-1]
    top = max(float(lam[0]), 0.0)
    if lam[-1] < -rank_tol * top or (top == 0.0 and lam[-1] < 0):
        raise RkhsError("not-positive-type",
                        f"eigenvalue {lam[-1]:.6g} below -rank_tol * lambda_1 = {-rank_tol * top:.3g}")
    lam = np.where(lam < 0, 0.0, lam)
    rank = int(np.sum(lam > rank_tol * top)) if top > 0 else 0
    phi = (U / s[:, None]).T.copy()
    if np.isrealobj(phi):
        phi = _fix_signs(phi, w)
    lam.setflags(write=False)
    phi.setflags(write=False)
    return MercerDecomposition(mu, lam, phi, rank, float(rank_tol))


def _fix_signs(phi, w):
    # deterministic orientation: largest-magnitude entry of each mode made positive
    idx = np.argmax(np.abs(phi), axis=1)
    signs = np.sign(phi[np.arange(phi.shape[0]), idx])
    signs[signs == 0] = 1.0
    return phi * signs[:, None]


def orthonormality_defect(dec: MercerDecomposition) -> float:
    """Max ``|<phi_m, phi_n> - delta_mn|`` over retained modes."""
    P = dec.retained_functions
    M = (P * dec.measure.weights[None, :]) @ P.conj().T
    return float(np.max(np.abs(M - np.eye(dec.rank)))) if dec.rank else 0.0


def eigen_relation_defect(dec: MercerDecomposition, kernel: KernelSpec) -> float:
    """Max over retained modes of ``|L phi_n - lambda_n phi_n|_{L^2(mu)}``."""
    from .measure import lp_norm

    mu = dec.measure
    K = cross_gram(kernel, mu.nodes, mu.nodes) * mu.weights[None, :]
    worst = 0.0
    for lam, phi in zip(dec.retained_values, dec.retained_functions):
        worst = max(worst, lp_norm(K @ phi - lam * phi, mu, 2))
    return worst


def reconstruct_kernel(dec: MercerDecomposition, r: Optional[int] = None) -> np.ndarray:
    """Truncated Mercer sum ``sum_{n<r} lambda_n phi_n(x_i) conj(phi_n(x_j))``."""
    r = dec.rank if r is None else r
    if int(r) != r or not 0 <= r <= dec.rank:
        raise RkhsError("rank-out-of-range", f"r must lie in [0, {dec.rank}], got {r}")
    r = int(r)
    P = dec.eigenfunctions[:r]
    return (P.T * dec.eigenvalues[:r][None, :]) @ P.conj()


def diagonal_defects(dec: MercerDecomposition, kernel: KernelSpec) -> np.ndarray:
    """``Gamma(x_i, x_i) - sum_{n<r} lambda_n |phi_n(x_i)|^2`` for ``r = 0..rank`` (rows)."""
    diag = np.real(kernel.diag(dec.measure.nodes))
    terms = dec.retained_values[:, None] * np.abs(dec.retained_functions) ** 2
    partial = np.vstack([np.zeros(len(diag)), np.cumsum(terms, axis=0)])
    return diag[None, :] - partial


@dataclass
class SpectralNorm:
    norm_sq: float
    residual: float

    def to_dict(self):
        return {"norm_sq": self.norm_sq, "residual": self.residual}


def rkhs_norm_spectral(dec: MercerDecomposition, v) -> SpectralNorm:
    """``|v|_H^2 = sum_n |<v, phi_n>|^2 / lambda_n`` over retained modes.

    ``residual`` is the ``L^2(mu)`` norm of the part of ``v`` outside the
    retained eigenspace, where that formula says nothing.
    """
    v = dec.measure._values(v)
    c = dec.coefficients(v)[:dec.rank]
    norm_sq = float(np.sum(np.abs(c) ** 2 / dec.retained_values))
    rest = v - c @ dec.retained_functions
    residual = float(np.sqrt(np.sum(dec.measure.weights * np.abs(rest) ** 2)))
    return SpectralNorm(norm_sq, residual)


@dataclass
class Membership:
    member: bool
    residual: float
    norm_sq: Optional[float]
    large_norm: bool = False

    def to_dict(self):
        return {"member": self.member, "residual": self.residual, "norm_sq": self.norm_sq,
                "large_norm": self.large_norm}


def membership_test(dec: MercerDecomposition, v, tol=1e-8) -> Membership:
    """Decide whether ``v`` lies in the range of ``L^{1/2}`` at the retained rank.

    A residual above ``tol * |v|`` is a hard failure. A member whose norm
    exceeds ``|v|^2 / (sqrt(rank_tol) * lambda_1)`` is flagged ``large_norm``
    (the norm is then carried by the bottom of the retained spectrum): at
    finite rank a divergent norm only shows up under refinement.
    """
    v = dec.measure._values(v)
    res = rkhs_norm_spectral(dec, v)
    vnorm = float(np.sqrt(np.sum(dec.measure.weights * np.abs(v) ** 2)))
    member = res.residual <= tol * vnorm
    if not member:
        return Membership(False, res.residual, None)
    large = bool(dec.top > 0 and res.norm_sq > vnorm ** 2 / (np.sqrt(dec.rank_tol) * dec.top))
    if large:
        warnings.warn(f"RKHS norm {res.norm_sq:.3g} is near the rank cutoff", stacklevel=2)
    return Membership(True, res.residual, res.norm_sq, large)


def eigenvalue_clusters(dec: MercerDecomposition, gap=CLUSTER_GAP) -> list:
    """Group retained modes whose eigenvalues differ by ``<= gap * lambda_1``."""
    groups = []
    for n in range(dec.rank):
        if groups and abs(dec.eigenvalues[groups[-1][-1]] - dec.eigenvalues[n]) <= gap * dec.top:
            groups[-1].append(n)
        else:
            groups.append([n])
    return groups


def _projector(dec, modes):
    P = dec.eigenfunctions[modes]
    return P.T @ (P.conj() * dec.measure.weights[None, :])


def cluster_projectors(dec: MercerDecomposition, gap=CLUSTER_GAP) -> list:
    """``(mean eigenvalue, projector)`` per eigenvalue cluster; basis-independent."""
    return [(float(np.mean(dec.eigenvalues[g])), _projector(dec, g))
            for g in eigenvalue_clusters(dec, gap)]


@dataclass
class SpectralProjector:
    projector: np.ndarray
    basis_size: int
    modes: list
    partial_kernel: np.ndarray

    def to_dict(self):
        return {"projector": encode_array(self.projector), "basis_size": self.basis_size,
                "modes": self.modes, "partial_kernel": encode_array(self.partial_kernel)}


def spectral_projector(dec: MercerDecomposition, interval) -> SpectralProjector:
    """Projection onto retained modes with ``lambda`` in ``(a, b]``, ``a > 0``.

    ``P_ij = sum_n phi_n(x_i) conj(phi_n(x_j)) w_j`` acts on node values and
    is idempotent and self-adjoint in ``L^2(mu)``. ``partial_kernel`` is the
    same sum without the weight.
    """
    a, b = (float(t) for t in interval)
    if not a > 0 or not a < b:
        raise RkhsError("invalid-interval", f"need 0 < a < b, got ({a}, {b}]")
    lam = dec.retained_values
    modes = [int(n) for n in np.flatnonzero((lam > a) & (lam <= b))]
    P = dec.eigenfunctions[modes]
    partial = P.T @ P.conj()
    proj = partial * dec.measure.weights[None, :]
    return SpectralProjector(proj, len(modes), modes, partial)


@dataclass
class PointwiseMass:
    mass: float
    in_range_of_L: bool
    range_residual: float

    def to_dict(self):
        return {"mass": self.mass, "in_range_of_L": self.in_range_of_L,
                "range_residual": self.range_residual}


def pointwise_mass(dec: MercerDecomposition, node_index: int, kernel: Optional[KernelSpec] = None) -> PointwiseMass:
    """``sum_{n<rank} |phi_n(x_i)|^2`` at one node.

    The kernel column ``Gamma(., x_i)`` is in the retained range when its
    ``L^2(mu)`` component outside the retained eigenspace is at most
    ``sqrt(rank_tol)`` times its norm. The column is rebuilt from all modes
    when ``kernel`` is omitted.
    """
    n = len(dec.measure)
    if int(node_index) != node_index or not 0 <= node_index < n:
        raise RkhsError("index-out-of-range", f"node index must lie in [0, {n}), got {node_index}")
    i = int(node_index)
    mass = float(np.sum(np.abs(dec.retained_functions[:, i]) ** 2))
    if kernel is not None:
        col = cross_gram(kernel, dec.measure.nodes, dec.measure.nodes[i:i + 1])[:, 0]
    else:
        col = (dec.eigenvalues * np.conj(dec.eigenfunctions[:, i])) @ dec.eigenfunctions
    res = rkhs_norm_spectral(dec, col).residual
    cnorm = float(np.sqrt(np.sum(dec.measure.weights * np.abs(col) ** 2)))
    in_range = res <= np.sqrt(dec.rank_tol) * cnorm
    return PointwiseMass(mass, bool(in_range), res)
