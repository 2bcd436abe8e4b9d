"""Volterra singular kernels: the abstraction and the three built-in instances.

A Volterra kernel is an operator-valued map K(t, s) defined only for
0 < s < t (causality).  Built-ins:

* the scalar model kernel 1/(t - s), which satisfies every size and
  smoothness condition yet defines no integral operator on its support;
* the parabolic heat kernel k(t, x) as a pointwise function (two diffusion
  normalizations, see ``heat_kernel_pointwise``);
* the matrix-semigroup Green kernel K(tau) = -A e^{-tau A} of a discretized
  1-D divergence-form generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .spaces import SpatialSpace, induced_operator_norm

__all__ = [
    "CausalityError", "SemigroupAccuracyError", "VolterraKernel",
    "ModelScalarKernel", "model_scalar_kernel", "CallableKernel",
    "heat_kernel_pointwise", "GeneratorSpec", "load_generator_spec",
    "Semigroup", "GreensKernel", "greens_kernel_from_generator",
]


class CausalityError(ValueError):
    """Raised when a Volterra kernel is evaluated with s >= t (or s <= 0)."""


class SemigroupAccuracyError(RuntimeError):
    """Raised when e^{-(t1+t2)A} and e^{-t1 A} e^{-t2 A} disagree beyond tolerance."""


class VolterraKernel:
    """Base class: evaluation map (t, s) -> m_out x m_in matrix for 0 < s < t.

    ``sigma`` is the Holder exponent of the smoothness conditions, ``M`` the
    claimed constant (None when unknown).  Subclasses override ``_matrix``
    and may override the batch hooks for speed.
    """

    def __init__(self, domain: SpatialSpace, codomain: SpatialSpace, *,
                 sigma: float = 1.0, M: float | None = None,
                 convolution: bool = False, off_support_only: bool = False,
                 name: str = "kernel"):
        if not 0 < sigma <= 1:
            raise ValueError(f"Holder exponent sigma must lie in (0, 1], got {sigma!r}")
        self.domain = domain
        self.codomain = codomain
        self.sigma = float(sigma)
        self.M = None if M is None else float(M)
        self.convolution = convolution
        self.off_support_only = off_support_only
        self.name = name

    # -- single evaluation ---------------------------------------------------
    def _check_causal(self, t: float, s: float):
        if not (0.0 < s < t):
            raise CausalityError(
                f"kernel {self.name} requires 0 < s < t, got (t={t!r}, s={s!r})")

    def matrix(self, t: float, s: float) -> np.ndarray:
        self._check_causal(t, s)
        return self._matrix(t, s)

    def _matrix(self, t: float, s: float) -> np.ndarray:
        raise NotImplementedError

    # -- batch hooks (generic fallbacks loop over _matrix) ---------------------
    def matrices_many(self, t: float, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.size and not (0.0 < s.min() and s.max() < t):
            raise CausalityError(f"kernel {self.name}: batch contains s outside (0, t)")
        out = np.empty((s.size, self.codomain.m, self.domain.m))
        for j, sj in enumerate(s):
            out[j] = self._matrix(t, float(sj))
        return out

    def apply_many(self, t: float, s: np.ndarray, vecs: np.ndarray) -> np.ndarray:
        """Rows K(t, s_j) @ vecs_j."""
        mats = self.matrices_many(t, s)
        return np.einsum("jab,jb->ja", mats, np.atleast_2d(vecs))

    def apply_many_transposed(self, t: float, s: np.ndarray, vecs: np.ndarray) -> np.ndarray:
        """Rows K(s_j, t)^T @ vecs_j (the transpose kernel K'(t, s) = K(s, t)')."""
        s = np.asarray(s, dtype=float)
        vecs = np.atleast_2d(vecs)
        out = np.empty((s.size, self.domain.m))
        for j, sj in enumerate(s):
            self._check_causal(float(sj), t)
            out[j] = self._matrix(float(sj), t).T @ vecs[j]
        return out

    def norm_upper_pairs(self, t, s) -> np.ndarray:
        """Upper endpoints of the induced-norm enclosure of K(t_j, s_j)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t, s = np.broadcast_arrays(t, s)
        r = self.domain.r
        out = np.empty(t.size)
        for j in range(t.size):
            self._check_causal(float(t[j]), float(s[j]))
            out[j] = induced_operator_norm(self._matrix(float(t[j]), float(s[j])), r).upper
        return out

    def diff_norm_upper(self, t: float, s: float, s0: float) -> float:
        """||K(t,s) - K(t,s0)|| (induced-norm upper endpoint)."""
        d = self.matrix(t, s) - self.matrix(t, s0)
        return induced_operator_norm(d, self.domain.r).upper

    def diff_norm_upper_t(self, t: float, t0: float, s: float) -> float:
        """||K(t,s) - K(t0,s)|| (induced-norm upper endpoint)."""
        d = self.matrix(t, s) - self.matrix(t0, s)
        return induced_operator_norm(d, self.domain.r).upper


class ModelScalarKernel(VolterraKernel):
    """The scalar model kernel K(t, s) = 1/(t - s).

    Satisfies the size bound with constant 1 and the Holder-difference
    bounds with constant 2 (sigma = 1), yet the associated integral is not
    defined on the support of f even in the principal-value sense, so it is
    flagged for off-support application only.
    """

    def __init__(self):
        space = SpatialSpace(1, 2.0)
        super().__init__(space, space, sigma=1.0, M=2.0, convolution=True,
                         off_support_only=True, name="model")

    def _matrix(self, t, s):
        return np.array([[1.0 / (t - s)]])

    def apply_many(self, t, s, vecs):
        s = np.asarray(s, dtype=float)
        if s.size and not (0.0 < s.min() and s.max() < t):
            raise CausalityError("model kernel: batch contains s outside (0, t)")
        return np.atleast_2d(vecs) / (t - s)[:, None]

    def apply_many_transposed(self, t, s, vecs):
        s = np.asarray(s, dtype=float)
        if s.size and not (t < s.min() and t > 0.0):
            raise CausalityError("model kernel transpose: batch contains s <= t")
        return np.atleast_2d(vecs) / (s - t)[:, None]

    def norm_upper_pairs(self, t, s):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s <= 0) or np.any(s >= t):
            raise CausalityError("model kernel: pairs must satisfy 0 < s < t")
        return 1.0 / (t - s)

    def diff_norm_upper(self, t, s, s0):
        self._check_causal(t, s)
        self._check_causal(t, s0)
        return abs(1.0 / (t - s) - 1.0 / (t - s0))

    def diff_norm_upper_t(self, t, t0, s):
        self._check_causal(t, s)
        self._check_causal(t0, s)
        return abs(1.0 / (t - s) - 1.0 / (t0 - s))


def model_scalar_kernel() -> ModelScalarKernel:
    return ModelScalarKernel()


class CallableKernel(VolterraKernel):
    """User kernel from an evaluation callable (t, s) -> matrix."""

    def __init__(self, fn, domain: SpatialSpace, codomain: SpatialSpace, *,
                 sigma: float = 1.0, M: float | None = None,
                 convolution: bool = False, name: str = "callable"):
        super().__init__(domain, codomain, sigma=sigma, M=M,
                         convolution=convolution, name=name)
        self._fn = fn

    def _matrix(self, t, s):
        out = np.asarray(self._fn(t, s), dtype=float)
        return out.reshape(self.codomain.m, self.domain.m)


# ---------------------------------------------------------------------------
# parabolic heat kernel (pointwise)

def heat_kernel_pointwise(t: float, x, d: int | None = None,
                          variant: str = "paper") -> float:
    """The singular kernel of parabolic type driving d_t of the heat flow.

    variant="paper" evaluates
        (|x|^2/t^2 - d/(2t)) * exp(-|x|^2/t) / (2 pi t)^{d/2},
    which is d_t of exp(-|x|^2/t)/(2 pi t)^{d/2}; variant="standard" uses the
    standard diffusion normalization, d_t of exp(-|x|^2/(4t))/(4 pi t)^{d/2}.
    Both integrate to 0 over R^d for every fixed t (the underlying Gaussian
    profile has t-independent mass), which is the cross-check exposed in the
    tests.  Requires t > 0.
    """
    if t <= 0:
        raise ValueError(f"heat kernel requires t > 0, got {t!r}")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if d is None:
        d = xv.size
    elif xv.size == 1 and d > 1:
        xv = np.concatenate([xv, np.zeros(d - 1)])
    elif xv.size != d:
        raise ValueError(f"x has length {xv.size}, expected d = {d}")
    xsq = float(xv @ xv)
    if variant == "paper":
        return (xsq / t ** 2 - d / (2.0 * t)) * math.exp(-xsq / t) \
            / (2.0 * math.pi * t) ** (d / 2.0)
    if variant == "standard":
        return (xsq / (4.0 * t ** 2) - d / (2.0 * t)) * math.exp(-xsq / (4.0 * t)) \
            / (4.0 * math.pi * t) ** (d / 2.0)
    raise ValueError(f"unknown heat-kernel variant {variant!r}")


# ---------------------------------------------------------------------------
# discretized 1-D generator A u = -(a u')' + b u' + c u

@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Second-order centered discretization of a divergence-form generator.

    One spatial dimension on [0, 1]; ``m`` grid nodes (interior nodes for
    Dirichlet, all nodes for periodic).  ``a`` is sampled at the nodes and
    averaged to midpoints; the discrete strong-ellipticity condition
    1/Lam <= a(x) <= Lam is enforced.  With b == c == 0 the assembled matrix
    is symmetric positive semidefinite (definite for Dirichlet).
    """

    m: int
    bc: str = "dirichlet"
    Lam: float = 1.0
    a: np.ndarray = None
    coefficient_b: np.ndarray = None
    c: np.ndarray = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("grid size m must be positive")
        if self.bc not in ("dirichlet", "periodic"):
            raise ValueError(f"boundary condition must be dirichlet|periodic, got {self.bc!r}")
        if self.Lam < 1.0:
            raise ValueError(f"ellipticity constant Lambda must be >= 1, got {self.Lam!r}")
        for name, default in (("a", 1.0), ("coefficient_b", 0.0), ("c", 0.0)):
            arr = getattr(self, name)
            if arr is None:
                arr = np.full(self.m, default)
            else:
                arr = np.array(arr, dtype=float).reshape(-1)
                if arr.size == 1:
                    arr = np.full(self.m, float(arr[0]))
                if arr.size != self.m:
                    raise ValueError(f"coefficient {name} must have length m={self.m}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        slack = 1e-12
        if np.any(self.a < 1.0 / self.Lam - slack) or np.any(self.a > self.Lam + slack):
            raise ValueError(
                "diffusion coefficient violates the ellipticity bounds "
                f"[{1.0 / self.Lam:g}, {self.Lam:g}]")

    @property
    def dx(self) -> float:
        return 1.0 / self.m if self.bc == "periodic" else 1.0 / (self.m + 1)

    @property
    def symmetric(self) -> bool:
        return bool(np.all(self.coefficient_b == 0.0))

    def assemble(self) -> np.ndarray:
        """Dense generator matrix A."""
        m, dx = self.m, self.dx
        A = np.zeros((m, m))
        if self.bc == "periodic":
            amid = 0.5 * (self.a + np.roll(self.a, -1))  # interface i <-> i+1
            for i in range(m):
                ip, im = (i + 1) % m, (i - 1) % m
                A[i, i] += (amid[im] + amid[i]) / dx ** 2 + self.c[i]
                A[i, ip] += -amid[i] / dx ** 2 + self.coefficient_b[i] / (2 * dx)
                A[i, im] += -amid[im] / dx ** 2 - self.coefficient_b[i] / (2 * dx)
        else:
            amid = np.empty(m + 1)  # interface i-1/2 ahead of node i
            amid[0], amid[m] = self.a[0], self.a[m - 1]
            amid[1:m] = 0.5 * (self.a[:-1] + self.a[1:])
            for i in range(m):
                A[i, i] += (amid[i] + amid[i + 1]) / dx ** 2 + self.c[i]
                if i + 1 < m:
                    A[i, i + 1] = -amid[i + 1] / dx ** 2 + self.coefficient_b[i] / (2 * dx)
                if i - 1 >= 0:
                    A[i, i - 1] = -amid[i] / dx ** 2 - self.coefficient_b[i] / (2 * dx)
        return A

    @classmethod
    def constant(cls, m: int, bc: str = "dirichlet", a: float = 1.0,
                 b: float = 0.0, c: float = 0.0, Lam: float | None = None) -> "GeneratorSpec":
        if Lam is None:
            Lam = max(a, 1.0 / a) if a > 0 else 1.0
        return cls(m=m, bc=bc, Lam=Lam, a=np.full(m, a),
                   coefficient_b=np.full(m, b), c=np.full(m, c))

    @classmethod
    def scalar(cls, rate: float) -> "GeneratorSpec":
        """A 1x1 generator with A = [rate] (periodic closure kills diffusion)."""
        return cls(m=1, bc="periodic", Lam=1.0, c=np.array([rate]))

    @classmethod
    def random_elliptic(cls, m: int, Lam: float, seed: int = 0,
                        bc: str = "dirichlet") -> "GeneratorSpec":
        rng = np.random.default_rng(seed)
        loga = rng.uniform(-math.log(Lam), math.log(Lam), size=m) if Lam > 1 \
            else np.zeros(m)
        return cls(m=m, bc=bc, Lam=Lam, a=np.exp(loga))


def load_generator_spec(path) -> GeneratorSpec:
    """Read a plain-text key=value generator config.

    Keys: ``m``, ``bc`` (periodic|dirichlet), ``Lambda``; optional
    ``coefficients`` names a companion CSV (relative to the config file)
    whose header picks columns from {a, b, c}.
    """
    path = Path(path)
    kv = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
    try:
        m = int(kv["m"])
    except KeyError:
        raise ValueError(f"config {path} is missing the grid size key 'm='") from None
    bc = kv.get("bc", "dirichlet")
    lam = float(kv.get("Lambda", 1.0))
    cols = {}
    if "coefficients" in kv:
        csv_path = path.parent / kv["coefficients"]
        rows = [r.split(",") for r in csv_path.read_text().splitlines() if r.strip()]
        header = [name.strip() for name in rows[0]]
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        for j, name in enumerate(header):
            if name not in ("a", "b", "c"):
                raise ValueError(f"unknown coefficient column {name!r} in {csv_path}")
            cols[name] = data[:, j]
    return GeneratorSpec(m=m, bc=bc, Lam=lam, a=cols.get("a"),
                         coefficient_b=cols.get("b"), c=cols.get("c"))


# ---------------------------------------------------------------------------
# matrix semigroup e^{-tau A} and the Green kernel K(tau) = -A e^{-tau A}

def _phi1(z: np.ndarray) -> np.ndarray:
    """(1 - e^{-z})/z, stable near 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    out[small] = 1.0 + zs * (-0.5 + zs * (1.0 / 6 + zs * (-1.0 / 24 + zs / 120)))
    zb = z[~small]
    out[~small] = -np.expm1(-zb) / zb
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    """(z - 1 + e^{-z})/z^2, stable near 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    out[small] = 0.5 + zs * (-1.0 / 6 + zs * (1.0 / 24 + zs * (-1.0 / 120 + zs / 720)))
    zb = z[~small]
    out[~small] = (zb + np.expm1(-zb)) / zb ** 2
    return out


class Semigroup:
    """e^{-tau A} with its first two time integrals.

    Symmetric A goes through the orthogonal eigendecomposition; otherwise
    dense matrix exponentials (Pade) are used and cached per tau.  The
    semigroup identity e^{-(t1+t2)A} = e^{-t1 A} e^{-t2 A} is validated on
    sampled pairs at construction; relative defects above ``tol`` raise.
    """

    def __init__(self, A: np.ndarray, tol: float = 1e-8, validate: bool = True):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("generator matrix must be square")
        self.A = A
        self.m = A.shape[0]
        self.symmetric = bool(np.array_equal(A, A.T))
        self._expm_cache: dict[float, np.ndarray] = {}
        if self.symmetric:
            self.eigenvalues, self.eigenvectors = np.linalg.eigh(A)
        else:
            self.eigenvalues = np.linalg.eigvals(A)
            self.eigenvectors = None
        self.zero_modes = int(np.sum(np.abs(self.eigenvalues) <=
                                     1e-12 * max(1.0, np.abs(self.eigenvalues).max())))
        if validate:
            defect = self.semigroup_defect()
            if defect > tol:
                raise SemigroupAccuracyError(
                    f"semigroup identity defect {defect:.3e} exceeds {tol:.1e}")

    # -- exponentials ---------------------------------------------------------
    def expm(self, tau: float) -> np.ndarray:
        if self.symmetric:
            w, V = self.eigenvalues, self.eigenvectors
            return (V * np.exp(-tau * w)) @ V.T
        key = float(tau)
        if key not in self._expm_cache:
            self._expm_cache[key] = scipy.linalg.expm(-tau * self.A)
        return self._expm_cache[key]

    def kernel_matrix(self, tau: float) -> np.ndarray:
        """K(tau) = -A e^{-tau A}."""
        if self.symmetric:
            w, V = self.eigenvalues, self.eigenvectors
            return (V * (-w * np.exp(-tau * w))) @ V.T
        return -self.A @ self.expm(tau)

    def kernel_deriv_matrix(self, tau: float) -> np.ndarray:
        """d/dtau K(tau) = A^2 e^{-tau A} (analytic, no differencing)."""
        if self.symmetric:
            w, V = self.eigenvalues, self.eigenvectors
            return (V * (w ** 2 * np.exp(-tau * w))) @ V.T
        return self.A @ self.A @ self.expm(tau)

    def kernel_apply(self, taus: np.ndarray, vecs: np.ndarray) -> np.ndarray:
        """Rows K(tau_j) @ vecs_j."""
        taus = np.asarray(taus, dtype=float)
        vecs = np.atleast_2d(vecs)
        if self.symmetric:
            w, V = self.eigenvalues, self.eigenvectors
            coef = -w[None, :] * np.exp(-np.outer(taus, w))
            return ((vecs @ V) * coef) @ V.T
        out = np.empty((taus.size, self.m))
        for j, tau in enumerate(taus):
            out[j] = self.kernel_matrix(float(tau)) @ vecs[j]
        return out

    def kernel_norm2(self, taus: np.ndarray) -> np.ndarray:
        """||K(tau)||_{2->2} per tau (exact via the spectrum when symmetric)."""
        taus = np.asarray(taus, dtype=float)
        if self.symmetric:
            w = self.eigenvalues
            return np.abs(w[None, :] * np.exp(-np.outer(taus, w))).max(axis=1)
        return np.array([np.linalg.norm(self.kernel_matrix(float(t)), 2) for t in taus])

    def kernel_deriv_norm2(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        if self.symmetric:
            w = self.eigenvalues
            return (w[None, :] ** 2 * np.exp(-np.outer(taus, w))).max(axis=1)
        return np.array([np.linalg.norm(self.kernel_deriv_matrix(float(t)), 2)
                         for t in taus])

    # -- step matrices for the exponential integrator ---------------------------
    def step_matrices(self, h: float):
        """(E, S, D) with E = e^{-hA}, S = int_0^h e^{-uA} du,
        D = int_0^h (h-u) e^{-uA} du; the analytic limits cover zero modes."""
        if self.symmetric:
            w, V = self.eigenvalues, self.eigenvectors
            z = h * w
            E = (V * np.exp(-z)) @ V.T
            S = (V * (h * _phi1(z))) @ V.T
            D = (V * (h ** 2 * _phi2(z))) @ V.T
            return E, S, D
        m = self.m
        aug = np.zeros((3 * m, 3 * m))
        aug[:m, :m] = -h * self.A
        aug[:m, m:2 * m] = h * np.eye(m)
        aug[m:2 * m, 2 * m:] = h * np.eye(m)
        P = scipy.linalg.expm(aug)
        return P[:m, :m], P[:m, m:2 * m], P[:m, 2 * m:]

    # -- validation -------------------------------------------------------------
    def semigroup_defect(self, scales=(0.1, 1.0, 10.0)) -> float:
        """Max relative defect of the semigroup identity over sampled pairs."""
        wmax = float(np.abs(self.eigenvalues).max(initial=0.0))
        base = 1.0 / wmax if wmax > 0 else 1.0
        worst = 0.0
        for c1 in scales:
            for c2 in scales:
                t1, t2 = c1 * base, c2 * base
                lhs = self.expm(t1 + t2)
                rhs = self.expm(t1) @ self.expm(t2)
                denom = max(np.linalg.norm(lhs, 2), 1e-300)
                worst = max(worst, float(np.linalg.norm(lhs - rhs, 2) / denom))
        return worst


class GreensKernel(VolterraKernel):
    """Convolution kernel K(t - s) = -A e^{-(t-s)A} of the discrete parabolic flow."""

    def __init__(self, spec: GeneratorSpec, r: float = 2.0, tol: float = 1e-8):
        space = SpatialSpace(spec.m, r)
        super().__init__(space, space, sigma=1.0, M=None, convolution=True,
                         name=f"green[{spec.bc},m={spec.m}]")
        self.spec = spec
        self.semigroup = Semigroup(spec.assemble(), tol=tol)

    def _matrix(self, t, s):
        return self.semigroup.kernel_matrix(t - s)

    def matrices_many(self, t, s):
        s = np.asarray(s, dtype=float)
        if s.size and not (0.0 < s.min() and s.max() < t):
            raise CausalityError(f"kernel {self.name}: batch contains s outside (0, t)")
        out = np.empty((s.size, self.codomain.m, self.domain.m))
        for j, sj in enumerate(s):
            out[j] = self.semigroup.kernel_matrix(t - float(sj))
        return out

    def apply_many(self, t, s, vecs):
        s = np.asarray(s, dtype=float)
        if s.size and not (0.0 < s.min() and s.max() < t):
            raise CausalityError(f"kernel {self.name}: batch contains s outside (0, t)")
        return self.semigroup.kernel_apply(t - s, vecs)

    def apply_many_transposed(self, t, s, vecs):
        s = np.asarray(s, dtype=float)
        if s.size and not (s.min() > t > 0.0):
            raise CausalityError(f"kernel {self.name} transpose: batch contains s <= t")
        if self.semigroup.symmetric:
            return self.semigroup.kernel_apply(s - t, vecs)
        vecs = np.atleast_2d(vecs)
        out = np.empty((s.size, self.domain.m))
        for j, sj in enumerate(s):
            out[j] = self.semigroup.kernel_matrix(float(sj) - t).T @ vecs[j]
        return out

    def norm_upper_pairs(self, t, s):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t, s = np.broadcast_arrays(t, s)
        taus = t - s
        if np.any(taus <= 0):
            raise CausalityError(f"kernel {self.name}: pairs must satisfy s < t")
        if self.domain.r == 2.0 and self.semigroup.symmetric:
            return self.semigroup.kernel_norm2(taus)
        return np.array([induced_operator_norm(
            self.semigroup.kernel_matrix(float(tau)), self.domain.r).upper
            for tau in taus])

    def time_derivative(self) -> "GreensKernelDerivative":
        return GreensKernelDerivative(self)


class GreensKernelDerivative(VolterraKernel):
    """d/dt of a Green kernel: A^2 e^{-(t-s)A}, used by the decay validators."""

    def __init__(self, parent: GreensKernel):
        super().__init__(parent.domain, parent.codomain, sigma=1.0, M=None,
                         convolution=True, name=parent.name + ".dt")
        self.semigroup = parent.semigroup

    def _matrix(self, t, s):
        return self.semigroup.kernel_deriv_matrix(t - s)

    def norm_upper_pairs(self, t, s):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t, s = np.broadcast_arrays(t, s)
        taus = t - s
        if np.any(taus <= 0):
            raise CausalityError(f"kernel {self.name}: pairs must satisfy s < t")
        if self.domain.r == 2.0 and self.semigroup.symmetric:
            return self.semigroup.kernel_deriv_norm2(taus)
        return np.array([induced_operator_norm(
            self.semigroup.kernel_deriv_matrix(float(tau)), self.domain.r).upper
            for tau in taus])


def greens_kernel_from_generator(spec: GeneratorSpec, r: float = 2.0,
                                 tol: float = 1e-8) -> GreensKernel:
    """Build the Green kernel of a generator spec; validates the semigroup identity."""
    return GreensKernel(spec, r=r, tol=tol)
