"""Dense complex Hermitian linear algebra for density operators.

Spectral decompositions, support projectors, matrix functions restricted to
the support, von Neumann and relative entropies, Schatten norms, partial
traces, and derivatives of trace functions.  All logarithms are natural, so
entropic quantities are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ZERO_EIGENVALUE_RTOL",
    "HERMITICITY_ATOL",
    "TRACE_ATOL",
    "PSD_ATOL",
    "SUPPORT_LEAK_ATOL",
    "LinalgError",
    "INFINITE_DIVERGENCE",
    "is_infinite",
    "DensityMatrix",
    "SupportProjector",
    "EigenSystem",
    "as_matrix",
    "dagger",
    "hermitian_part",
    "require_hermitian",
    "spectral_decompose",
    "support_projector",
    "matrix_log_on_support",
    "von_neumann_entropy",
    "relative_entropy",
    "schatten_norm",
    "trace_distance",
    "partial_trace",
    "trace_function_derivative",
]

# Eigenvalues <= ZERO_EIGENVALUE_RTOL * lambda_max are treated as kernel.
ZERO_EIGENVALUE_RTOL = 1e-12
# Inputs with asymmetry above this are rejected rather than symmetrized.
HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-8
PSD_ATOL = 1e-8
# Allowed state mass outside supp(sigma) before D(rho||sigma) is declared infinite.
SUPPORT_LEAK_ATOL = 1e-9


class LinalgError(ValueError):
    """An operator violates a structural precondition (shape, Hermiticity, ...)."""


class _InfiniteDivergence:
    """Sentinel for an infinite relative entropy.

    Deliberately supports no arithmetic: callers must branch on
    :func:`is_infinite` instead of letting an IEEE infinity propagate.
    """

    __slots__ = ()

    def __repr__(self) -> str:
        return "INFINITE_DIVERGENCE"


INFINITE_DIVERGENCE = _InfiniteDivergence()


def is_infinite(value) -> bool:
    """True when ``value`` is the infinite-divergence sentinel."""
    return isinstance(value, _InfiniteDivergence)


def as_matrix(operator) -> np.ndarray:
    """Unwrap DensityMatrix / SupportProjector, or coerce to a complex array."""
    entries = getattr(operator, "entries", operator)
    return np.asarray(entries, dtype=complex)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def require_hermitian(operator, atol: float = HERMITICITY_ATOL, name: str = "operator") -> np.ndarray:
    """Return the symmetrized matrix, rejecting inputs that are genuinely asymmetric."""
    a = as_matrix(operator)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LinalgError(f"{name} must be a square matrix, got shape {a.shape}")
    asym = np.max(np.abs(a - dagger(a))) if a.size else 0.0
    if asym > atol:
        raise LinalgError(f"{name} is not Hermitian: max asymmetry {asym:.3e} > {atol:.1e}")
    return hermitian_part(a)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


@dataclass(frozen=True)
class SupportProjector:
    """Projection onto the span of eigenvectors with non-negligible eigenvalues."""

    entries: np.ndarray
    rank: int

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def complement(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex) - self.entries


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semi-definite matrix with unit (or sub-unit) trace.

    ``subnormalized=True`` relaxes the trace condition to Tr <= 1, which is
    what trace-non-increasing operations produce.
    """

    entries: np.ndarray
    subnormalized: bool = False
    dim: int = field(init=False)

    def __post_init__(self):
        a = require_hermitian(self.entries, name="density matrix")
        eigs = np.linalg.eigvalsh(a)
        if eigs[0] < -PSD_ATOL:
            raise LinalgError(f"density matrix not PSD: min eigenvalue {eigs[0]:.3e}")
        tr = float(np.real(np.trace(a)))
        if self.subnormalized:
            if tr > 1.0 + TRACE_ATOL:
                raise LinalgError(f"sub-normalized state has trace {tr} > 1")
        elif abs(tr - 1.0) > TRACE_ATOL:
            raise LinalgError(f"density matrix has trace {tr}, expected 1")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "dim", a.shape[0])

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise LinalgError("cannot build a pure state from the zero vector")
        v = v / n
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def diagonal(cls, probabilities) -> "DensityMatrix":
        p = np.asarray(probabilities, dtype=float)
        return cls(np.diag(p).astype(complex))

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


def spectral_decompose(operator, atol: float = HERMITICITY_ATOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Inputs with asymmetry within ``atol`` are symmetrized; anything worse is
    rejected.  The reconstruction V diag(w) V^dag matches the input to
    machine precision.
    """
    a = require_hermitian(operator, atol=atol)
    eigenvalues, eigenvectors = np.linalg.eigh(a)
    order = np.argsort(eigenvalues)[::-1]
    return EigenSystem(eigenvalues[order].copy(), eigenvectors[:, order].copy())


def _support_mask(eigenvalues: np.ndarray, tol: float) -> np.ndarray:
    lam_max = float(eigenvalues.max(initial=0.0))
    if lam_max <= 0.0:
        return np.zeros_like(eigenvalues, dtype=bool)
    return eigenvalues > tol * lam_max


def support_projector(rho, tol: float = ZERO_EIGENVALUE_RTOL) -> SupportProjector:
    """Projector onto the eigenvectors of ``rho`` with eigenvalue > tol * lambda_max."""
    if tol <= 0:
        raise LinalgError("support tolerance must be positive")
    es = spectral_decompose(rho)
    mask = _support_mask(es.eigenvalues, tol)
    v = es.eigenvectors[:, mask]
    pi = v @ dagger(v)
    return SupportProjector(hermitian_part(pi), rank=int(mask.sum()))


def matrix_log_on_support(rho, tol: float = ZERO_EIGENVALUE_RTOL) -> np.ndarray:
    """Natural matrix logarithm restricted to the support; zero on the kernel."""
    es = spectral_decompose(rho)
    mask = _support_mask(es.eigenvalues, tol)
    logs = np.zeros_like(es.eigenvalues)
    logs[mask] = np.log(es.eigenvalues[mask])
    v = es.eigenvectors
    return hermitian_part((v * logs) @ dagger(v))


def von_neumann_entropy(rho) -> float:
    """-Tr{rho log rho} in nats, with the 0 log 0 = 0 convention."""
    eigenvalues = np.linalg.eigvalsh(require_hermitian(rho, name="state"))
    lam = np.clip(eigenvalues, 0.0, None)
    nz = lam > 0.0
    return float(-np.sum(lam[nz] * np.log(lam[nz])))


def relative_entropy(rho, sigma, support_atol: float = SUPPORT_LEAK_ATOL,
                     tol: float = ZERO_EIGENVALUE_RTOL):
    """Quantum relative entropy D(rho || sigma).

    Returns :data:`INFINITE_DIVERGENCE` when supp(rho) is not contained in
    supp(sigma), detected as Tr{(1 - Pi_sigma) rho} > ``support_atol``.  On
    full-rank pairs the direct trace formula Tr{rho (log rho - log sigma)} is
    used; otherwise the spectral double sum over eigenvector overlaps.
    """
    r = require_hermitian(rho, name="rho")
    s = require_hermitian(sigma, name="sigma")
    if r.shape != s.shape:
        raise LinalgError(f"dimension mismatch: {r.shape} vs {s.shape}")

    es_r = spectral_decompose(r)
    es_s = spectral_decompose(s)
    mask_r = _support_mask(es_r.eigenvalues, tol)
    mask_s = _support_mask(es_s.eigenvalues, tol)

    pi_s = es_s.eigenvectors[:, mask_s]
    leak = float(np.real(np.trace(r))) - float(
        np.real(np.sum(np.conj(pi_s) * (r @ pi_s)))
    )
    if leak > support_atol:
        return INFINITE_DIVERGENCE

    if bool(mask_r.all()) and bool(mask_s.all()):
        diff = matrix_log_on_support(r, tol) - matrix_log_on_support(s, tol)
        return float(np.real(np.trace(r @ diff)))

    # Rank-deficient case: sum over |<phi_i|psi_j>|^2 p_i (log p_i - log q_j).
    p = es_r.eigenvalues[mask_r]
    q = es_s.eigenvalues[mask_s]
    overlaps = np.abs(dagger(es_r.eigenvectors[:, mask_r]) @ es_s.eigenvectors[:, mask_s]) ** 2
    log_ratio = np.log(p)[:, None] - np.log(q)[None, :]
    return float(np.sum(overlaps * p[:, None] * log_ratio))


def schatten_norm(operator, p: float) -> float:
    """Schatten p-norm (sum of singular values to the p-th power, p-th root).

    ``p = inf`` (``math.inf`` / ``numpy.inf``) returns the largest singular
    value.  Values of p below 1 are rejected.
    """
    a = as_matrix(operator)
    singular_values = np.linalg.svd(a, compute_uv=False)
    if math.isinf(p):
        return float(singular_values[0]) if singular_values.size else 0.0
    if p < 1:
        raise LinalgError(f"Schatten norm requires p >= 1, got {p}")
    if p == 1:
        return float(np.sum(singular_values))
    return float(np.sum(singular_values**p) ** (1.0 / p))


def trace_distance(a, b) -> float:
    """Half the trace norm of the difference."""
    return 0.5 * schatten_norm(as_matrix(a) - as_matrix(b), 1)


def partial_trace(rho_ab, dims: tuple[int, int], keep: str) -> DensityMatrix:
    """Trace out one tensor factor of a bipartite state.

    ``dims = (d_A, d_B)`` and ``keep`` is "A" or "B".  Trace and positivity
    carry over, so the result is validated as a density matrix.
    """
    d_a, d_b = dims
    a = as_matrix(rho_ab)
    if a.shape != (d_a * d_b, d_a * d_b):
        raise LinalgError(f"state of shape {a.shape} does not match dims {dims}")
    four = a.reshape(d_a, d_b, d_a, d_b)
    if keep == "B":
        reduced = np.einsum("abad->bd", four)
    elif keep == "A":
        reduced = np.einsum("abcb->ac", four)
    else:
        raise LinalgError(f"keep must be 'A' or 'B', got {keep!r}")
    sub = isinstance(rho_ab, DensityMatrix) and rho_ab.subnormalized
    return DensityMatrix(hermitian_part(reduced), subnormalized=sub)


def trace_function_derivative(a, a_dot, f: str = "xlogx", h: float = 0.0,
                              tol: float = ZERO_EIGENVALUE_RTOL) -> float:
    """d/ds Tr{f(A + s A_dot)} at s = 0, i.e. Tr{f'(A) A_dot}.

    f' is evaluated spectrally on the support of A.  Supported tags:
    ``"xlogx"`` for f(x) = x log x (f'(x) = log x + 1) and ``"power"`` for
    f(x) = x**(1 + h) (f'(x) = (1 + h) x**h).
    """
    es = spectral_decompose(a)
    direction = require_hermitian(a_dot, name="A_dot")
    mask = _support_mask(np.abs(es.eigenvalues), tol)
    lam = es.eigenvalues[mask]
    if f == "xlogx":
        if np.any(lam < 0):
            raise LinalgError("x log x requires a PSD operator")
        fprime = np.log(lam) + 1.0
    elif f == "power":
        fprime = (1.0 + h) * lam**h
    else:
        raise LinalgError(f"unsupported scalar function tag {f!r}")
    v = es.eigenvectors[:, mask]
    rotated = dagger(v) @ direction @ v
    return float(np.real(np.sum(fprime * np.diagonal(rotated))))
