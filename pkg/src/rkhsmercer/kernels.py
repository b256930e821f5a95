"""Kernel families, Gram assembly and positive-type diagnostics."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend
from .errors import RkhsError
from .measure import as_point, as_points, block_nodes, check_distinct
from .serialization import decode_array, encode_array

FAMILIES = ("gaussian", "laplace", "brownian", "constant", "block", "matrix")
_CODES = {"gaussian": 0, "laplace": 1, "brownian": 2, "constant": 3, "block": 4}

SYMMETRY_WARN = 1e-8


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A positive-type kernel ``Gamma : X x X -> scalars``.

    Use the classmethod constructors (:meth:`gaussian`, :meth:`block`, ...)
    rather than filling fields by hand.

    ``gaussian``  ``exp(-|x - t|^2 / (2 sigma^2))``
    ``laplace``   ``exp(-|x - t| / sigma)``
    ``brownian``  ``prod_k min(x_k, t_k)`` on the nonnegative orthant
    ``constant``  ``c``
    ``block``     ``sigma_n^2 / a_n`` when both points lie in block ``[2n, 2n + 1)``,
                  0 otherwise; pairs with :func:`~rkhsmercer.measure.build_block_measure`
    ``matrix``    explicit Hermitian values on a declared node set
    """

    family: str
    sigma: Optional[float] = None
    c: Optional[float] = None
    sigmas: Optional[tuple] = None
    masses: Optional[tuple] = None
    nodes: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    field: str = "real"
    _index: dict = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise RkhsError("unknown-family", repr(self.family))
        if self.field not in ("real", "complex"):
            raise RkhsError("invalid-field", repr(self.field))
        fam = self.family
        if fam in ("gaussian", "laplace"):
            if self.sigma is None or not (self.sigma > 0 and math.isfinite(self.sigma)):
                raise RkhsError("invalid-parameter", f"{fam} needs sigma > 0")
            object.__setattr__(self, "sigma", float(self.sigma))
        elif fam == "constant":
            if self.c is None or not (self.c >= 0 and math.isfinite(self.c)):
                raise RkhsError("invalid-parameter", "constant needs c >= 0")
            object.__setattr__(self, "c", float(self.c))
        elif fam == "block":
            sig = tuple(float(s) for s in (self.sigmas or ()))
            if not sig or any(not (s > 0 and math.isfinite(s)) for s in sig):
                raise RkhsError("invalid-parameter", "block needs positive sigmas")
            masses = tuple(float(a) for a in (self.masses or (1.0,) * len(sig)))
            if len(masses) != len(sig) or any(not (a > 0 and math.isfinite(a)) for a in masses):
                raise RkhsError("invalid-parameter", "block masses must be positive, one per sigma")
            object.__setattr__(self, "sigmas", sig)
            object.__setattr__(self, "masses", masses)
        elif fam == "matrix":
            self._init_matrix()

    def _init_matrix(self):
        if self.nodes is None or self.values is None:
            raise RkhsError("invalid-parameter", "matrix kernel needs nodes and values")
        nodes = as_points(self.nodes)
        check_distinct(nodes, "matrix kernel nodes")
        vals = np.asarray(self.values)
        if vals.shape != (len(nodes), len(nodes)):
            raise RkhsError("dimension-mismatch",
                            f"values shape {vals.shape} does not match {len(nodes)} nodes")
        if not np.all(np.isfinite(vals)):
            raise RkhsError("invalid-parameter", "matrix values must be finite")
        is_complex = np.iscomplexobj(vals) and np.any(vals.imag != 0)
        if is_complex and self.field == "real":
            raise RkhsError("invalid-field", "complex values on a real-field kernel")
        vals = vals.astype(np.complex128 if is_complex else np.float64)
        asym = float(np.max(np.abs(vals - vals.conj().T))) if vals.size else 0.0
        if asym > SYMMETRY_WARN:
            warnings.warn(f"matrix kernel asymmetric by {asym:.3g}; symmetrizing", stacklevel=4)
        vals = 0.5 * (vals + vals.conj().T)
        nodes.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", vals)
        if is_complex:
            object.__setattr__(self, "field", "complex")
        object.__setattr__(self, "_index", {tuple(p): i for i, p in enumerate(nodes.tolist())})

    # -- constructors
    @classmethod
    def gaussian(cls, sigma=1.0, field="real"):
        return cls("gaussian", sigma=sigma, field=field)

    @classmethod
    def laplace(cls, sigma=1.0, field="real"):
        return cls("laplace", sigma=sigma, field=field)

    @classmethod
    def brownian(cls, field="real"):
        return cls("brownian", field=field)

    @classmethod
    def constant(cls, c=1.0, field="real"):
        return cls("constant", c=c, field=field)

    @classmethod
    def block(cls, sigmas, masses=None, field="real"):
        return cls("block", sigmas=sigmas, masses=masses, field=field)

    @classmethod
    def matrix(cls, nodes, values, field=None):
        if field is None:
            field = "complex" if np.iscomplexobj(values) else "real"
        return cls("matrix", nodes=nodes, values=values, field=field)

    # -- identity
    def _key(self):
        if self.family == "matrix":
            return (self.family, self.field, self.nodes.tobytes(), self.nodes.shape,
                    self.values.tobytes(), self.values.dtype.str)
        return (self.family, self.field, self.sigma, self.c, self.sigmas, self.masses)

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def is_complex(self) -> bool:
        return self.field == "complex"

    def _code_params(self):
        fam = self.family
        if fam in ("gaussian", "laplace"):
            params = [self.sigma]
        elif fam == "constant":
            params = [self.c]
        elif fam == "block":
            params = [len(self.sigmas), *self.sigmas, *self.masses]
        else:
            params = []
        return _CODES[fam], np.asarray(params, dtype=np.float64)

    def in_domain(self, points) -> np.ndarray:
        """Boolean mask of points the kernel accepts."""
        pts = as_points(points)
        if self.family == "brownian":
            return np.all(pts >= 0, axis=1)
        if self.family == "matrix":
            return np.array([tuple(p) in self._index for p in pts.tolist()], dtype=bool)
        return np.ones(len(pts), dtype=bool)

    def node_indices(self, points) -> np.ndarray:
        """Indices of ``points`` within a matrix kernel's declared nodes."""
        out = []
        for p in as_points(points).tolist():
            idx = self._index.get(tuple(p))
            if idx is None:
                raise RkhsError("unknown-point", f"{p} is not a declared node of the matrix kernel")
            out.append(idx)
        return np.asarray(out, dtype=np.int64)

    def __call__(self, X, Y=None) -> np.ndarray:
        """Cross Gram ``out[i, j] = Gamma(X[i], Y[j])``."""
        return cross_gram(self, X, X if Y is None else Y)

    def diag(self, X) -> np.ndarray:
        """``Gamma(x, x)`` for each row of ``X``."""
        X = as_points(X)
        if self.family == "matrix":
            idx = self.node_indices(X)
            return self.values[idx, idx].real.copy()
        self._check_domain(X)
        code, params = self._code_params()
        return _backend.diag_closed_form(code, params, X)

    def _check_domain(self, X):
        if self.family == "brownian" and np.any(X < 0):
            raise RkhsError("out-of-domain", "brownian kernel needs nonnegative coordinates")
        if self.family == "block" and X.shape[1] != 1:
            raise RkhsError("out-of-domain", "block kernel is one-dimensional")

    # -- serialization
    def to_dict(self) -> dict:
        if self.family == "matrix":
            return {"family": "matrix", "field": self.field, "nodes": self.nodes.tolist(),
                    "values": encode_array(self.values)}
        params = {}
        if self.sigma is not None:
            params["sigma"] = self.sigma
        if self.c is not None:
            params["c"] = self.c
        if self.sigmas is not None:
            params["sigmas"] = list(self.sigmas)
            params["masses"] = list(self.masses)
        return {"family": self.family, "params": params, "field": self.field}

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        if not isinstance(data, dict) or "family" not in data:
            raise RkhsError("invalid-kernel", "kernel JSON needs a 'family' field")
        fam = data["family"]
        fld = data.get("field")
        if fam == "matrix":
            if "nodes" not in data or "values" not in data:
                raise RkhsError("invalid-kernel", "matrix kernel needs 'nodes' and 'values'")
            values = decode_array(data["values"], 2)
            return cls.matrix(data["nodes"], values, field=fld)
        if fam not in FAMILIES:
            raise RkhsError("unknown-family", repr(fam))
        params = dict(data.get("params", {}))
        allowed = {"gaussian": {"sigma"}, "laplace": {"sigma"}, "brownian": set(),
                   "constant": {"c"}, "block": {"sigmas", "masses"}}[fam]
        extra = set(params) - allowed
        if extra:
            raise RkhsError("invalid-kernel", f"unexpected params for {fam}: {sorted(extra)}")
        return cls(fam, field=fld or "real", **params)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel values on a finite point set."""

    points: np.ndarray
    entries: np.ndarray

    def min_eigenvalue_ratio(self) -> float:
        """Smallest eigenvalue relative to the largest absolute one."""
        eig = np.linalg.eigvalsh(self.entries)
        scale = np.max(np.abs(eig))
        return float(eig[0] / scale) if scale > 0 else 0.0

    def to_dict(self):
        return {"points": self.points.tolist(), "entries": encode_array(self.entries)}


def cross_gram(spec: KernelSpec, X, Y) -> np.ndarray:
    X = as_points(X)
    Y = as_points(Y)
    if spec.family == "matrix":
        return spec.values[np.ix_(spec.node_indices(X), spec.node_indices(Y))].copy()
    if X.shape[1] != Y.shape[1]:
        raise RkhsError("dimension-mismatch", "points of different dimension")
    spec._check_domain(X)
    spec._check_domain(Y)
    code, params = spec._code_params()
    return _backend.gram_closed_form(code, params, X, Y)


def evaluate_kernel(spec: KernelSpec, x, t):
    """``Gamma(x, t)`` as a Python scalar."""
    val = cross_gram(spec, as_point(x)[None, :], as_point(t)[None, :])[0, 0]
    return complex(val) if np.iscomplexobj(val) else float(val)


def gram(spec: KernelSpec, points) -> GramMatrix:
    pts = as_points(points)
    check_distinct(pts)
    entries = cross_gram(spec, pts, pts)
    entries.setflags(write=False)
    return GramMatrix(pts, entries)


def quadratic_form(spec: KernelSpec, points, coefficients):
    """``sum_ij c_i conj(c_j) Gamma(x_i, x_j)`` by direct double summation."""
    pts = as_points(points)
    c = np.asarray(coefficients)
    total = 0j
    for i in range(len(pts)):
        for j in range(len(pts)):
            total += c[i] * np.conj(c[j]) * evaluate_kernel(spec, pts[i], pts[j])
    return total


# -- positive-type check

def default_sampler(spec: KernelSpec, dim=1) -> Callable:
    """Point sampler ``sampler(rng, size) -> (size, d)`` over the kernel's natural domain.

    Matrix kernels draw subsets of their declared nodes, block kernels draw
    from the union of blocks, everything else from the unit cube.
    """
    if spec.family == "matrix":
        nodes = spec.nodes

        def sample(rng, size):
            idx = rng.choice(len(nodes), size=min(size, len(nodes)), replace=False)
            return nodes[np.sort(idx)]
    elif spec.family == "block":
        nb = len(spec.sigmas)

        def sample(rng, size):
            blocks = rng.integers(0, nb, size=size)
            return (2.0 * blocks + rng.uniform(0, 1, size=size)).reshape(-1, 1)
    else:
        def sample(rng, size):
            return rng.uniform(0.0, 1.0, size=(size, dim))
    return sample


@dataclass
class PositivityReport:
    verdict: str
    reason: str
    trials: int
    subset_size: int
    tol: float
    seed: Optional[int]
    worst_relative_eigenvalue: float
    max_asymmetry: float
    symmetry_checked: bool
    witness_points: Optional[np.ndarray] = None
    witness_coefficients: Optional[np.ndarray] = None
    witness_eigenvalue: Optional[float] = None
    witness_quadratic_form: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self):
        out = {
            "verdict": self.verdict,
            "reason": self.reason,
            "coverage": {"trials": self.trials, "subset_size": self.subset_size,
                         "seed": self.seed},
            "tol": self.tol,
            "worst_relative_eigenvalue": self.worst_relative_eigenvalue,
            "max_asymmetry": self.max_asymmetry,
            "symmetry_checked": self.symmetry_checked,
        }
        if self.witness_points is not None:
            out["witness"] = {
                "points": self.witness_points.tolist(),
                "coefficients": encode_array(self.witness_coefficients),
                "eigenvalue": self.witness_eigenvalue,
                "quadratic_form": self.witness_quadratic_form,
            }
        return out


def check_positive_type(spec: KernelSpec, sampler=None, subset_size=8, trials=50,
                        tol=1e-10, seed=0) -> PositivityReport:
    """Randomized finite-section test of positive-typeness.

    Each trial draws ``subset_size`` distinct points, assembles the Gram and
    compares its smallest eigenvalue to ``-tol * max|eig|``. For real kernels
    the symmetry ``Gamma(x, t) == Gamma(t, x)`` is checked on the same
    samples, for complex ones Hermitian symmetry. A failing trial returns a
    witness coefficient vector ``c`` with a negative quadratic form.

    This samples finitely many sections; a pass is evidence, not a proof.
    """
    if subset_size < 1 or trials < 1:
        raise RkhsError("invalid-count", "subset_size and trials must be >= 1")
    rng = np.random.default_rng(seed)
    if sampler is None:
        sampler = default_sampler(spec)
    worst = math.inf
    max_asym = 0.0
    done = 0
    for _ in range(trials):
        pts = np.unique(as_points(sampler(rng, subset_size)), axis=0)
        done += 1
        G = cross_gram(spec, pts, pts)
        ref = G.T if spec.field == "real" else G.conj().T
        asym = float(np.max(np.abs(G - ref)))
        max_asym = max(max_asym, asym)
        if asym > 1e-14 * (1.0 + float(np.max(np.abs(G)))):
            return PositivityReport("fail", "asymmetric", done, subset_size, tol, seed,
                                    worst if math.isfinite(worst) else 0.0, max_asym,
                                    True, witness_points=pts)
        eig, vec = np.linalg.eigh(0.5 * (G + ref))
        scale = float(np.max(np.abs(eig)))
        rel = float(eig[0] / scale) if scale > 0 else 0.0
        worst = min(worst, rel)
        if rel < -tol:
            # eigenvector u gives u^H G u = lambda; the form sums c_i conj(c_j) G_ij = c^T G conj(c)
            c = np.conj(vec[:, 0])
            form = c @ G @ np.conj(c)
            return PositivityReport("fail", "negative-eigenvalue", done, subset_size, tol, seed,
                                    worst, max_asym, True, witness_points=pts,
                                    witness_coefficients=c, witness_eigenvalue=float(eig[0]),
                                    witness_quadratic_form=float(np.real(form)))
    return PositivityReport("pass", "all sampled sections positive semidefinite",
                            done, subset_size, tol, seed, worst, max_asym, True)


# -- feature-map metric

def feature_distance(spec: KernelSpec, x, t) -> float:
    """``|gamma_x - gamma_t|``, the metric the feature map induces on ``X``."""
    x = as_point(x)
    t = as_point(t)
    pts = np.vstack([x, t])
    G = cross_gram(spec, pts, pts)
    d2 = float(np.real(G[0, 0] + G[1, 1] - 2.0 * np.real(G[0, 1])))
    if d2 < -1e-8:
        warnings.warn(f"negative squared feature distance {d2:.3g}: kernel is not positive type",
                      stacklevel=2)
    return math.sqrt(max(0.0, d2))


def _pairwise_feature_distance(spec, x, probes):
    if len(probes) == 0:
        return np.zeros(0)
    dx = spec.diag(x[None, :])[0]
    dp = spec.diag(probes)
    cross = cross_gram(spec, x[None, :], probes)[0]
    d2 = np.real(dx + dp - 2.0 * np.real(cross))
    return np.sqrt(np.maximum(d2, 0.0))


@dataclass
class ContinuityReport:
    verdict: str
    scales: np.ndarray
    base_points: np.ndarray
    sup_distance: np.ndarray        # (n_points, n_scales)
    decay_exponent: np.ndarray      # per point, nan when undefined
    point_verdicts: list
    local_bound: float
    tol: float
    min_exponent: float

    @property
    def continuous(self) -> bool:
        return self.verdict == "diagonal-continuous"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "scales": self.scales.tolist(),
            "base_points": self.base_points.tolist(),
            "sup_distance": self.sup_distance.tolist(),
            "decay_exponent": [None if not np.isfinite(a) else float(a)
                               for a in self.decay_exponent],
            "point_verdicts": self.point_verdicts,
            "local_bound": self.local_bound,
            "tol": self.tol,
            "min_exponent": self.min_exponent,
        }


def continuity_probe(spec: KernelSpec, base_points, scales: Sequence[float],
                     probes_per_axis=17, tol=1e-6, min_exponent=0.25) -> ContinuityReport:
    """Small-scale behaviour of the feature metric around each base point.

    For each scale ``h`` the sup of ``feature_distance(x, t)`` over probes with
    ``|t - x| <= h`` is recorded. A point is judged diagonal-continuous when
    that sup is nonincreasing in ``h`` (to ``tol`` relative) and either
    vanishes at the smallest scale (``<= tol`` times the largest value) or
    decays like ``h**alpha`` with ``alpha >= min_exponent`` between the
    extreme scales. Matrix kernels are probed on their declared nodes only.
    """
    base = as_points(base_points)
    scales = np.asarray(scales, dtype=np.float64).reshape(-1)
    if scales.size == 0 or np.any(scales <= 0) or np.any(np.diff(scales) >= 0):
        raise RkhsError("invalid-scales", "scales must be positive and strictly decreasing")
    d = base.shape[1]
    offsets = np.linspace(-1.0, 1.0, probes_per_axis)
    sups = np.zeros((len(base), scales.size))
    local_bound = -math.inf
    for i, x in enumerate(base):
        for k, h in enumerate(scales):
            if spec.family == "matrix":
                dist = np.linalg.norm(spec.nodes - x, axis=1)
                probes = spec.nodes[dist <= h]
            else:
                probes = np.concatenate([x + h * np.outer(offsets, np.eye(d)[a])
                                         for a in range(d)])
                probes = probes[spec.in_domain(probes)]
            dists = _pairwise_feature_distance(spec, x, probes)
            sups[i, k] = float(np.max(dists)) if dists.size else 0.0
            if len(probes):
                local_bound = max(local_bound, float(np.max(spec.diag(probes))))
    exps = np.full(len(base), np.nan)
    verdicts = []
    for i in range(len(base)):
        s = sups[i]
        top = float(np.max(s))
        vanishing = s[-1] <= tol * top or top == 0.0
        monotone = bool(np.all(np.diff(s) <= tol * max(top, 1e-300)))
        if scales.size > 1 and s[0] > 0 and s[-1] > 0:
            exps[i] = math.log(s[-1] / s[0]) / math.log(scales[-1] / scales[0])
        decaying = bool(np.isfinite(exps[i]) and exps[i] >= min_exponent)
        ok = vanishing or (monotone and decaying)
        verdicts.append("diagonal-continuous" if ok else "not-diagonal-continuous")
    overall = ("diagonal-continuous" if all(v == "diagonal-continuous" for v in verdicts)
               else "not-diagonal-continuous")
    return ContinuityReport(overall, scales, base, sups, exps, verdicts,
                            local_bound if math.isfinite(local_bound) else 0.0,
                            tol, min_exponent)


def block_pair(sigmas, masses=None, nodes_per_block=1):
    """Block kernel together with its matching block measure."""
    from .measure import build_block_measure

    masses = [1.0] * len(sigmas) if masses is None else list(masses)
    return KernelSpec.block(sigmas, masses), build_block_measure(masses, nodes_per_block)


__all__ = [
    "KernelSpec", "GramMatrix", "PositivityReport", "ContinuityReport",
    "cross_gram", "evaluate_kernel", "gram", "quadratic_form", "default_sampler",
    "check_positive_type", "feature_distance", "continuity_probe", "block_pair",
    "block_nodes",
]
