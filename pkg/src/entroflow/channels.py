"""Quantum channels and Lindblad generators.

Channels are carried in Kraus form; the superoperator matrix and the Choi
matrix are derived caches.  Superoperator matrices use the row-stacking
convention vec(X) = X.reshape(-1), under which the map X -> K X L has matrix
kron(K, L.T).  Generators are kept structurally (Hamiltonian plus a list of
rate/jump-operator pairs) so their adjoints are exact by construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DensityMatrix,
    LinalgError,
    as_matrix,
    dagger,
    hermitian_part,
    require_hermitian,
)

__all__ = [
    "ChannelError",
    "SuperOperator",
    "QuantumChannel",
    "CptpReport",
    "UnitalityTag",
    "UnitalityClass",
    "compose",
    "choi_of",
    "is_cptp",
    "unitality_class",
    "identity_channel",
    "unitary_channel",
    "depolarizing",
    "gadc",
    "gadc_coherence",
    "dephasing_channel",
    "partial_trace_channel",
    "transpose_superoperator",
    "ConstantCoefficient",
    "CosineSquaredCoefficient",
    "ExponentialCoefficient",
    "JumpTerm",
    "LindbladGenerator",
    "TailGuard",
    "dephasing_generator",
    "depolarizing_generator",
    "annihilation_operator",
    "bosonic_generator",
    "thermal_state",
    "lindblad_apply",
    "lindblad_adjoint_apply",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ChannelError(ValueError):
    """A map violates a structural precondition (dimensions, CP-ness, ...)."""


def _vec(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1)


def _unvec(v: np.ndarray, d_out: int) -> np.ndarray:
    return v.reshape(d_out, d_out)


class SuperOperator:
    """Matrix representation of a linear map on operators.

    Not necessarily completely positive or trace-preserving; this is the
    representation used for generators, map differences, and intermediate
    maps that may fail complete positivity.
    """

    def __init__(self, matrix, dim_in: int | None = None, dim_out: int | None = None):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2:
            raise ChannelError("superoperator matrix must be 2-D")
        if dim_in is None:
            dim_in = round(m.shape[1] ** 0.5)
        if dim_out is None:
            dim_out = round(m.shape[0] ** 0.5)
        if m.shape != (dim_out**2, dim_in**2):
            raise ChannelError(f"matrix shape {m.shape} incompatible with dims ({dim_in}, {dim_out})")
        self.matrix = m
        self.dim_in = dim_in
        self.dim_out = dim_out

    def apply(self, x) -> np.ndarray:
        a = as_matrix(x)
        if a.shape != (self.dim_in, self.dim_in):
            raise ChannelError(f"input shape {a.shape} does not match dim {self.dim_in}")
        return _unvec(self.matrix @ _vec(a), self.dim_out)

    def adjoint(self) -> "SuperOperator":
        # Row stacking preserves the Hilbert-Schmidt inner product, so the
        # adjoint map's matrix is the conjugate transpose.
        return SuperOperator(dagger(self.matrix), dim_in=self.dim_out, dim_out=self.dim_in)

    def compose(self, inner: "SuperOperator | QuantumChannel") -> "SuperOperator":
        inner = inner.superoperator() if isinstance(inner, QuantumChannel) else inner
        if inner.dim_out != self.dim_in:
            raise ChannelError("dimension mismatch in composition")
        return SuperOperator(self.matrix @ inner.matrix, dim_in=inner.dim_in, dim_out=self.dim_out)

    def choi(self) -> np.ndarray:
        d_in, d_out = self.dim_in, self.dim_out
        s4 = self.matrix.reshape(d_out, d_out, d_in, d_in)
        # J[(i,a),(j,b)] = <a| N(|i><j|) |b> = S[(a,b),(i,j)]
        return s4.transpose(2, 0, 3, 1).reshape(d_in * d_out, d_in * d_out)

    def superoperator(self) -> "SuperOperator":
        return self

    @classmethod
    def identity(cls, dim: int) -> "SuperOperator":
        return cls(np.eye(dim * dim, dtype=complex), dim_in=dim, dim_out=dim)


class QuantumChannel:
    """Completely positive map in Kraus form.

    Trace preservation is classified at construction: ``trace_preserving``
    when sum_i K_i^dag K_i = I, otherwise ``trace_nonincreasing`` when it is
    dominated by the identity.  Maps satisfying neither (e.g. adjoints of
    non-unital channels) are still representable; both flags are False.
    Channels are immutable after construction.
    """

    def __init__(self, kraus, atol: float = 1e-8):
        ops = [np.asarray(k, dtype=complex) for k in kraus]
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise ChannelError("Kraus operators must share a common 2-D shape")
        self.kraus = tuple(k.copy() for k in ops)
        for k in self.kraus:
            k.setflags(write=False)
        self.dim_out, self.dim_in = shape
        gram = sum(dagger(k) @ k for k in self.kraus)
        defect = gram - np.eye(self.dim_in)
        self.completeness_defect = float(np.max(np.abs(defect)))
        self.trace_preserving = self.completeness_defect <= atol
        if self.trace_preserving:
            self.trace_nonincreasing = True
        else:
            self.trace_nonincreasing = bool(
                np.linalg.eigvalsh(hermitian_part(defect))[-1] <= atol
            )
        self._superop: SuperOperator | None = None
        self._choi: np.ndarray | None = None

    def __repr__(self) -> str:
        return (f"QuantumChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, "
                f"n_kraus={len(self.kraus)}, tp={self.trace_preserving})")

    def apply(self, rho) -> np.ndarray:
        a = as_matrix(rho)
        if a.shape != (self.dim_in, self.dim_in):
            raise ChannelError(f"input shape {a.shape} does not match dim_in {self.dim_in}")
        out = np.zeros((self.dim_out, self.dim_out), dtype=complex)
        for k in self.kraus:
            out += k @ a @ dagger(k)
        return out

    def apply_state(self, rho: DensityMatrix) -> DensityMatrix:
        sub = rho.subnormalized or not self.trace_preserving
        return DensityMatrix(hermitian_part(self.apply(rho)), subnormalized=sub)

    def adjoint(self) -> "QuantumChannel":
        """Hilbert-Schmidt adjoint, Kraus set {K_i^dag}; unital when self is TP."""
        return QuantumChannel([dagger(k) for k in self.kraus])

    def compose(self, inner: "QuantumChannel") -> "QuantumChannel":
        """self after ``inner``, Kraus set {K_self K_inner}."""
        if inner.dim_out != self.dim_in:
            raise ChannelError("dimension mismatch in composition")
        return QuantumChannel([a @ b for a in self.kraus for b in inner.kraus])

    def superoperator(self) -> SuperOperator:
        if self._superop is None:
            m = sum(np.kron(k, k.conj()) for k in self.kraus)
            self._superop = SuperOperator(m, dim_in=self.dim_in, dim_out=self.dim_out)
        return self._superop

    def choi(self) -> np.ndarray:
        if self._choi is None:
            vecs = [k.T.reshape(-1) for k in self.kraus]
            j = sum(np.outer(v, v.conj()) for v in vecs)
            j = hermitian_part(j)
            j.setflags(write=False)
            self._choi = j
        return self._choi

    def on_identity(self) -> np.ndarray:
        return self.apply(np.eye(self.dim_in, dtype=complex))


@dataclass(frozen=True)
class CptpReport:
    choi_min_eigenvalue: float
    trace_defect: float
    completely_positive: bool
    trace_preserving: bool

    @property
    def passed(self) -> bool:
        return self.completely_positive and self.trace_preserving

    def __bool__(self) -> bool:
        return self.passed


class UnitalityTag(enum.Enum):
    UNITAL = "unital"
    STRICTLY_SUB_UNITAL = "strictly_sub_unital"
    STRICTLY_SUPER_UNITAL = "strictly_super_unital"
    NEITHER = "neither"


@dataclass(frozen=True)
class UnitalityClass:
    tag: UnitalityTag
    min_eigenvalue: float
    max_eigenvalue: float

    @property
    def is_unital(self) -> bool:
        return self.tag is UnitalityTag.UNITAL

    @property
    def is_sub_unital(self) -> bool:
        # Unital counts as (non-strictly) sub-unital.
        return self.tag in (UnitalityTag.UNITAL, UnitalityTag.STRICTLY_SUB_UNITAL)


def compose(outer, inner):
    """outer after inner.  Kraus-level when both are channels."""
    if isinstance(outer, QuantumChannel) and isinstance(inner, QuantumChannel):
        return outer.compose(inner)
    return outer.superoperator().compose(inner)


def choi_of(channel_like) -> np.ndarray:
    """Choi matrix (id x N applied to the unnormalized maximally entangled operator)."""
    return channel_like.choi()


def is_cptp(channel_like, atol: float = 1e-8) -> CptpReport:
    """Check complete positivity (Choi PSD) and trace preservation."""
    choi = channel_like.choi()
    min_eig = float(np.linalg.eigvalsh(hermitian_part(choi))[0])
    if isinstance(channel_like, QuantumChannel):
        trace_defect = channel_like.completeness_defect
    else:
        d_in = channel_like.dim_in
        d_out = channel_like.dim_out
        j4 = choi.reshape(d_in, d_out, d_in, d_out)
        reduced = np.einsum("iaja->ij", j4)
        trace_defect = float(np.max(np.abs(reduced - np.eye(d_in))))
    return CptpReport(
        choi_min_eigenvalue=min_eig,
        trace_defect=trace_defect,
        completely_positive=min_eig >= -atol,
        trace_preserving=trace_defect <= atol,
    )


def unitality_class(channel_like, atol: float = 1e-9) -> UnitalityClass:
    """Classify N(I) against I by the spectrum of N(I) - I."""
    if isinstance(channel_like, QuantumChannel):
        image = channel_like.on_identity()
    else:
        image = channel_like.apply(np.eye(channel_like.dim_in, dtype=complex))
    deviation = np.linalg.eigvalsh(hermitian_part(image - np.eye(image.shape[0])))
    lo, hi = float(deviation[0]), float(deviation[-1])
    if hi <= atol and lo >= -atol:
        tag = UnitalityTag.UNITAL
    elif hi <= atol:
        tag = UnitalityTag.STRICTLY_SUB_UNITAL
    elif lo >= -atol:
        tag = UnitalityTag.STRICTLY_SUPER_UNITAL
    else:
        tag = UnitalityTag.NEITHER
    return UnitalityClass(tag=tag, min_eigenvalue=lo, max_eigenvalue=hi)


# ---------------------------------------------------------------------------
# Builtin channels
# ---------------------------------------------------------------------------

def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel([np.eye(dim, dtype=complex)])


def unitary_channel(u) -> QuantumChannel:
    u = np.asarray(u, dtype=complex)
    if np.max(np.abs(dagger(u) @ u - np.eye(u.shape[1]))) > 1e-10:
        raise ChannelError("matrix is not unitary/isometric")
    return QuantumChannel([u])


def _heisenberg_weyl(dim: int) -> list[np.ndarray]:
    """The d^2 clock-and-shift unitaries X^a Z^b."""
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    ops = []
    for a in range(dim):
        xa = np.linalg.matrix_power(shift, a)
        for b in range(dim):
            ops.append(xa @ np.linalg.matrix_power(clock, b))
    return ops


def depolarizing(dim: int, q: float) -> QuantumChannel:
    """rho -> (1 - q) rho + q Tr(rho) I/d for q in [0, d^2/(d^2 - 1)].

    Kraus form over the clock-and-shift unitary basis; the identity Kraus
    weight 1 - q (1 - 1/d^2) fixes the upper end of the admissible range.
    """
    if dim < 2:
        raise ChannelError("depolarizing channel needs dim >= 2")
    q_max = dim**2 / (dim**2 - 1)
    if not 0.0 <= q <= q_max + 1e-12:
        raise ChannelError(f"q={q} outside [0, {q_max}]")
    identity_weight = max(1.0 - q * (1.0 - 1.0 / dim**2), 0.0)
    uniform_weight = q / dim**2
    ops = _heisenberg_weyl(dim)
    kraus = [np.sqrt(identity_weight) * ops[0]]
    kraus += [np.sqrt(uniform_weight) * u for u in ops[1:]]
    return QuantumChannel(kraus)


def gadc(t: float, omega: float) -> QuantumChannel:
    """Generalized amplitude damping channel at time t.

    Four Kraus operators with excitation probability p_t = cos^2(omega t)
    and damping parameter eta_t = exp(-t); the identity channel at t = 0.
    """
    if t < 0:
        raise ChannelError("gadc requires t >= 0")
    p = np.cos(omega * t) ** 2
    eta = np.exp(-t)
    sp, sq = np.sqrt(p), np.sqrt(1.0 - p)
    se, sl = np.sqrt(eta), np.sqrt(1.0 - eta)
    kraus = [
        sp * np.array([[1, 0], [0, se]], dtype=complex),
        sp * np.array([[0, sl], [0, 0]], dtype=complex),
        sq * np.array([[se, 0], [0, 1]], dtype=complex),
        sq * np.array([[0, 0], [sl, 0]], dtype=complex),
    ]
    return QuantumChannel(kraus)


def gadc_coherence(t: float, omega: float) -> float:
    """Population imbalance W_t = cos(2 omega t)(1 - e^{-t}) of the evolved I/2."""
    return float(np.cos(2.0 * omega * t) * (1.0 - np.exp(-t)))


def dephasing_channel(coherence: float) -> QuantumChannel:
    """Qubit phase damping that scales off-diagonals by ``coherence`` in [-1, 1]."""
    if not -1.0 <= coherence <= 1.0:
        raise ChannelError("coherence factor must lie in [-1, 1]")
    return QuantumChannel([
        np.sqrt((1.0 + coherence) / 2.0) * np.eye(2, dtype=complex),
        np.sqrt((1.0 - coherence) / 2.0) * SIGMA_Z,
    ])


def partial_trace_channel(dim_keep: int, dim_drop: int, keep: str = "B") -> QuantumChannel:
    """The channel Tr_A (keep="B") or Tr_B (keep="A") on a bipartite input."""
    if keep == "B":
        d_a, d_b = dim_drop, dim_keep
        kraus = [np.kron(e.reshape(1, -1), np.eye(d_b, dtype=complex))
                 for e in np.eye(d_a, dtype=complex)]
    elif keep == "A":
        d_a, d_b = dim_keep, dim_drop
        kraus = [np.kron(np.eye(d_a, dtype=complex), e.reshape(1, -1))
                 for e in np.eye(d_b, dtype=complex)]
    else:
        raise ChannelError("keep must be 'A' or 'B'")
    return QuantumChannel(kraus)


def transpose_superoperator(dim: int) -> SuperOperator:
    """Matrix transposition: the canonical positive map that is not CP."""
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            m[i * dim + j, j * dim + i] = 1.0
    return SuperOperator(m, dim_in=dim, dim_out=dim)


# ---------------------------------------------------------------------------
# Time-dependent coefficients and Lindblad generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantCoefficient:
    value: float

    def __call__(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class CosineSquaredCoefficient:
    """scale * cos^2(omega t)"""

    omega: float
    scale: float = 1.0

    def __call__(self, t: float) -> float:
        return self.scale * np.cos(self.omega * t) ** 2


@dataclass(frozen=True)
class ExponentialCoefficient:
    """scale * exp(-decay t)"""

    decay: float
    scale: float = 1.0

    def __call__(self, t: float) -> float:
        return self.scale * np.exp(-self.decay * t)


def _as_coefficient(rate):
    if isinstance(rate, (int, float)):
        return ConstantCoefficient(float(rate))
    if callable(rate):
        return rate
    raise ChannelError(f"rate must be a number or callable, got {type(rate)!r}")


@dataclass(frozen=True)
class JumpTerm:
    """One dissipator: rate gamma(t) and jump operator A(t).

    The rate may be temporarily negative; only the overall evolution has to
    stay completely positive.
    """

    rate: object
    operator: object

    def rate_at(self, t: float) -> float:
        return float(self.rate(t)) if callable(self.rate) else float(self.rate)

    def operator_at(self, t: float) -> np.ndarray:
        op = self.operator(t) if callable(self.operator) else self.operator
        return np.asarray(op, dtype=complex)


@dataclass(frozen=True)
class TailGuard:
    """Population bound on the top Fock levels of a truncated mode."""

    levels: int = 2
    bound: float = 1e-8

    def check(self, state: np.ndarray) -> float:
        pops = np.real(np.diagonal(state))[-self.levels:]
        return float(np.sum(pops))


class LindbladGenerator:
    """Time-dependent generator: -i[H, rho] + sum_i gamma_i (A_i rho A_i^dag - {A_i^dag A_i, rho}/2).

    The Hamiltonian may be None (no coherent part), a constant matrix, or a
    callable of t.  Jump rates are numbers, coefficient objects, or callables.
    """

    def __init__(self, dim: int, hamiltonian=None, jumps=(), tail_guard: TailGuard | None = None):
        self.dim = int(dim)
        self.hamiltonian = hamiltonian
        terms = []
        for term in jumps:
            if not isinstance(term, JumpTerm):
                rate, op = term
                term = JumpTerm(_as_coefficient(rate), op)
            terms.append(term)
        self.jumps = tuple(terms)
        self.tail_guard = tail_guard

    def hamiltonian_at(self, t: float) -> np.ndarray:
        h = self.hamiltonian
        if h is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        if callable(h):
            h = h(t)
        return require_hermitian(h, name="hamiltonian")

    def terms_at(self, t: float) -> list[tuple[float, np.ndarray]]:
        return [(term.rate_at(t), term.operator_at(t)) for term in self.jumps]

    def apply(self, t: float, rho) -> np.ndarray:
        x = as_matrix(rho)
        h = self.hamiltonian_at(t)
        out = -1j * (h @ x - x @ h)
        for gamma, a in self.terms_at(t):
            ada = dagger(a) @ a
            out += gamma * (a @ x @ dagger(a) - 0.5 * (ada @ x + x @ ada))
        return out

    def adjoint_apply(self, t: float, x) -> np.ndarray:
        y = as_matrix(x)
        h = self.hamiltonian_at(t)
        out = 1j * (h @ y - y @ h)
        for gamma, a in self.terms_at(t):
            ada = dagger(a) @ a
            out += gamma * (dagger(a) @ y @ a - 0.5 * (y @ ada + ada @ y))
        return out

    def superoperator(self, t: float) -> SuperOperator:
        d = self.dim
        eye = np.eye(d, dtype=complex)
        h = self.hamiltonian_at(t)
        m = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for gamma, a in self.terms_at(t):
            ada = dagger(a) @ a
            m += gamma * (np.kron(a, a.conj())
                          - 0.5 * np.kron(ada, eye)
                          - 0.5 * np.kron(eye, ada.T))
        return SuperOperator(m, dim_in=d, dim_out=d)

    def is_time_independent(self) -> bool:
        constant_h = self.hamiltonian is None or not callable(self.hamiltonian)
        constant_terms = all(
            isinstance(term.rate, ConstantCoefficient) and not callable(term.operator)
            for term in self.jumps
        )
        return constant_h and constant_terms


def lindblad_apply(generator: LindbladGenerator, t: float, rho) -> np.ndarray:
    return generator.apply(t, rho)


def lindblad_adjoint_apply(generator: LindbladGenerator, t: float, x) -> np.ndarray:
    return generator.adjoint_apply(t, x)


def dephasing_generator(rate) -> LindbladGenerator:
    """Pure decoherence of a qubit: single jump sigma_z with rate gamma(t)/2."""
    gamma = _as_coefficient(rate)
    half = (lambda t: 0.5 * gamma(t)) if not isinstance(gamma, ConstantCoefficient) \
        else ConstantCoefficient(0.5 * gamma.value)
    return LindbladGenerator(2, jumps=[JumpTerm(half, SIGMA_Z)])


def depolarizing_generator(dim: int, rate: float) -> LindbladGenerator:
    """Semigroup generator whose flow is rho -> e^{-c t} rho + (1 - e^{-c t}) I/d.

    Jumps are the non-identity clock-and-shift unitaries with equal constant
    rates; c = rate * d^2.  Unital and self-adjoint as a superoperator.
    """
    ops = _heisenberg_weyl(dim)[1:]
    jumps = [JumpTerm(ConstantCoefficient(rate), u) for u in ops]
    return LindbladGenerator(dim, jumps=jumps)


def annihilation_operator(cutoff: int) -> np.ndarray:
    """Truncated field-mode annihilation operator, a|n> = sqrt(n)|n-1>."""
    if cutoff < 2:
        raise ChannelError("cutoff must be at least 2")
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1).astype(complex)


def bosonic_generator(gamma_plus: float, gamma_minus: float, cutoff: int,
                      tail_bound: float = 1e-8) -> LindbladGenerator:
    """Phase-insensitive single-mode generator gamma_+ L_+ + gamma_- L_-.

    L_+ raises with the creation operator, L_- lowers with the annihilation
    operator.  The truncation breaks [a, a^dag] = I on the top level, so the
    generator carries a tail guard: propagation is trusted only while the
    population of the top two levels stays below ``tail_bound``.
    """
    if gamma_plus < 0 or gamma_minus < 0:
        raise ChannelError("bosonic rates must be non-negative")
    a = annihilation_operator(cutoff)
    jumps = [
        JumpTerm(ConstantCoefficient(float(gamma_plus)), dagger(a)),
        JumpTerm(ConstantCoefficient(float(gamma_minus)), a),
    ]
    return LindbladGenerator(cutoff, jumps=jumps,
                             tail_guard=TailGuard(levels=2, bound=tail_bound))


def thermal_state(mean_photons: float, cutoff: int, tail_atol: float = 1e-8) -> DensityMatrix:
    """Geometric Fock-diagonal state with the given mean photon number.

    The truncated tail (N/(N+1))^cutoff must stay below ``tail_atol``;
    otherwise the cutoff is declared insufficient.  The retained weights are
    renormalized.
    """
    if mean_photons < 0:
        raise ChannelError("mean photon number must be non-negative")
    if mean_photons == 0:
        probs = np.zeros(cutoff)
        probs[0] = 1.0
        return DensityMatrix.diagonal(probs)
    ratio = mean_photons / (mean_photons + 1.0)
    tail = ratio**cutoff
    if tail > tail_atol:
        raise ChannelError(
            f"cutoff {cutoff} insufficient for N={mean_photons}: tail mass {tail:.3e}"
        )
    probs = ratio ** np.arange(cutoff) / (mean_photons + 1.0)
    return DensityMatrix.diagonal(probs / probs.sum())
