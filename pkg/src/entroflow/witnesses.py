"""Entropy-change bounds, rate limits, and non-Markovianity machinery.

The central quantity is the pinned adjoint-generator trace Tr{Pi_t L_t^dag(rho_t)}:
it vanishes for unital dynamics (witnessing non-unitality otherwise), its
negative lower-bounds the entropy rate of any CP-divisible evolution, and its
mismatch against the short-time channel derivative feeds the memory tests.
Measures maximize over sampled initial states, so reported values are
certified lower bounds on the true suprema.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import pmap
from .channels import LindbladGenerator, QuantumChannel, SuperOperator, unitality_class
from .dynamics import ChannelFamily, Trajectory, entropy_rate, propagate
from .linalg import (
    INFINITE_DIVERGENCE,
    DensityMatrix,
    as_matrix,
    dagger,
    hermitian_part,
    is_infinite,
    matrix_log_on_support,
    relative_entropy,
    schatten_norm,
    support_projector,
    von_neumann_entropy,
)

__all__ = [
    "EPS_WITNESS",
    "EPS_TEST_C",
    "WitnessError",
    "WitnessReport",
    "MeasureResult",
    "entropy_change",
    "entropy_change_lower_bound",
    "entropy_change_upper_bound",
    "entropy_change_upper_bound_holder",
    "theorem2_bound",
    "nonunitality_witness",
    "generator_commutator_expectation",
    "epsilon_derivative",
    "f_components",
    "witness_f_channel",
    "time_local_generator",
    "test_a",
    "test_b",
    "test_c",
    "witness_reports",
    "export_witness_reports",
    "measure_generator",
    "measure_channel",
    "blp_measure",
    "SandwichBounds",
    "semigroup_sandwich",
    "PinskerGap",
    "pinsker_gap",
    "environment_simulation_bound",
]

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

EPS_WITNESS = 1e-7       # violation threshold for the rate tests
EPS_TEST_C = 1e-6        # mismatch threshold for the derivative-consistency test
EPSILON_STEP = 1e-3      # base step for the short-time channel derivative
RANK_CHANGE_MARGIN = 1e-3


class WitnessError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Entropy change and its bounds
# ---------------------------------------------------------------------------

def _back_action(channel: QuantumChannel, rho) -> np.ndarray:
    """N^dag(N(rho)) as a matrix."""
    return hermitian_part(channel.adjoint().apply(channel.apply(rho)))


def entropy_change(channel: QuantumChannel, rho) -> float:
    """S(N(rho)) - S(rho)."""
    a = as_matrix(rho)
    if a.shape != (channel.dim_in, channel.dim_in):
        raise WitnessError(
            f"state dim {a.shape[0]} does not match channel input {channel.dim_in}"
        )
    return von_neumann_entropy(hermitian_part(channel.apply(a))) - von_neumann_entropy(a)


def entropy_change_lower_bound(channel: QuantumChannel, rho):
    """D(rho || N^dag(N(rho))): a lower bound on the entropy change of any
    positive trace-preserving map (trace-non-increasing maps need N(rho) > 0).

    Returns the infinite-divergence sentinel on support violation.
    """
    return relative_entropy(as_matrix(rho), _back_action(channel, rho))


def _require_full_rank(rho, name: str = "state") -> np.ndarray:
    a = as_matrix(rho)
    if np.linalg.eigvalsh(hermitian_part(a))[0] <= 1e-12:
        raise WitnessError(f"{name} must be full rank for this bound")
    return a


def entropy_change_upper_bound(channel: QuantumChannel, rho) -> float:
    """Tr{[rho - N^dag(N(rho))] log rho} for a sub-unital channel and rho > 0."""
    a = _require_full_rank(rho)
    if not unitality_class(channel).is_sub_unital:
        raise WitnessError("upper bound requires a sub-unital channel")
    diff = a - _back_action(channel, a)
    return float(np.real(np.trace(diff @ matrix_log_on_support(a))))


def entropy_change_upper_bound_holder(channel: QuantumChannel, rho) -> float:
    """||rho - N^dag(N(rho))||_1 ||log rho||_inf: the norm-product relaxation
    of the trace-form upper bound."""
    a = _require_full_rank(rho)
    diff = a - _back_action(channel, a)
    return schatten_norm(diff, 1) * schatten_norm(matrix_log_on_support(a), np.inf)


# ---------------------------------------------------------------------------
# Rate bound and non-unitality witness
# ---------------------------------------------------------------------------

def _pinned_adjoint_trace(generator, t: float, rho) -> float:
    """Tr{Pi_rho L_t^dag(rho)} for a structural generator or a superoperator."""
    a = as_matrix(rho)
    if isinstance(generator, LindbladGenerator):
        image = generator.adjoint_apply(t, a)
    elif isinstance(generator, SuperOperator):
        image = generator.adjoint().apply(a)
    else:
        raise WitnessError(f"unsupported generator type {type(generator).__name__}")
    pi = support_projector(a)
    return float(np.real(np.trace(pi.entries @ image)))


def nonunitality_witness(generator, t: float, rho) -> float:
    """Tr{Pi_t L_t^dag(rho_t)}; zero for unital dynamics at every state."""
    return _pinned_adjoint_trace(generator, t, rho)


def theorem2_bound(generator, t: float, rho) -> float:
    """-Tr{Pi_t L_t^dag(rho_t)}: the CP-divisible lower limit on dS/dt."""
    return -_pinned_adjoint_trace(generator, t, rho)


def generator_commutator_expectation(generator: LindbladGenerator, t: float, rho) -> float:
    """sum_i gamma_i <[A_i^dag, A_i]>_rho, the full-rank form of the rate bound."""
    a = as_matrix(rho)
    total = 0.0
    for gamma, op in generator.terms_at(t):
        comm = dagger(op) @ op - op @ dagger(op)
        total += gamma * float(np.real(np.trace(comm @ a)))
    return total


# ---------------------------------------------------------------------------
# Channel-side witness: the short-time derivative and f(t)
# ---------------------------------------------------------------------------

def _pinned_back_action(step_map, pi: np.ndarray, rho: np.ndarray) -> float:
    forward = step_map.apply(rho)
    back = step_map.adjoint().apply(forward)
    return float(np.real(np.trace(pi @ back)))


def epsilon_derivative(family: ChannelFamily, rho_t, t: float,
                       eps0: float = EPSILON_STEP,
                       convergence_tol: float = 0.05) -> float:
    """d/d eps Tr{Pi_t (M_{t+eps,t})^dag M_{t+eps,t}(rho_t)} at eps -> 0+.

    One-sided difference quotients at eps0 and eps0/2 combined with a single
    Richardson step (the limit is one-sided, but the quotient pair removes
    the linear error term).  A large disagreement between the two quotients
    flags a non-smooth family.
    """
    a = hermitian_part(as_matrix(rho_t))
    pi = support_projector(a).entries
    base = float(np.real(np.trace(pi @ a)))

    def quotient(eps: float) -> float:
        return (_pinned_back_action(family.step(t, eps), pi, a) - base) / eps

    d1 = quotient(eps0)
    d2 = quotient(0.5 * eps0)
    if abs(d2 - d1) > convergence_tol * max(1.0, abs(d2)):
        raise WitnessError(
            f"epsilon-derivative quotients disagree at t={t}: {d1} vs {d2}"
        )
    return 2.0 * d2 - d1


def _family_state_derivative(family: ChannelFamily, rho0, t: float,
                             h: float = 1e-5) -> tuple[np.ndarray, np.ndarray]:
    rho_t = hermitian_part(family.state(rho0, t))
    if t >= h:
        dot = (family.state(rho0, t + h) - family.state(rho0, t - h)) / (2.0 * h)
    else:
        s0 = family.state(rho0, t)
        s1 = family.state(rho0, t + h)
        s2 = family.state(rho0, t + 2.0 * h)
        dot = (-3.0 * s0 + 4.0 * s1 - s2) / (2.0 * h)
    return rho_t, hermitian_part(dot)


def f_components(family: ChannelFamily, rho0, t: float,
                 eps0: float = EPSILON_STEP) -> tuple[float, float]:
    """(entropy rate, short-time derivative term) along the family trajectory."""
    rho_t, rho_dot = _family_state_derivative(family, rho0, t)
    rate = entropy_rate(rho_t, rho_dot)
    return rate, epsilon_derivative(family, rho_t, t, eps0=eps0)


def witness_f_channel(family: ChannelFamily, rho0, t: float,
                      eps0: float = EPSILON_STEP) -> float:
    """f(t) = dS/dt + short-time derivative term; f < 0 certifies memory."""
    rate, eps_term = f_components(family, rho0, t, eps0=eps0)
    return rate + eps_term


def time_local_generator(family: ChannelFamily, t: float, h: float = 1e-5) -> SuperOperator:
    """Numerical time-local generator dM_t/dt o M_t^{-1} of a channel family."""
    m_t = family.at(t).superoperator().matrix
    if t >= h:
        m_dot = (family.at(t + h).superoperator().matrix
                 - family.at(t - h).superoperator().matrix) / (2.0 * h)
    else:
        m0 = family.at(t).superoperator().matrix
        m1 = family.at(t + h).superoperator().matrix
        m2 = family.at(t + 2.0 * h).superoperator().matrix
        m_dot = (-3.0 * m0 + 4.0 * m1 - m2) / (2.0 * h)
    dim = family.dim
    return SuperOperator(m_dot @ np.linalg.inv(m_t), dim_in=dim, dim_out=dim)


# ---------------------------------------------------------------------------
# Memory tests and per-time reports
# ---------------------------------------------------------------------------

def test_a(f_value: float, tol: float = EPS_WITNESS) -> bool:
    """Negative f certifies non-Markovianity."""
    return f_value < -tol


def test_b(rate: float, bound: float, tol: float = EPS_WITNESS) -> bool:
    """Entropy rate below the CP-divisible limit certifies non-Markovianity."""
    return rate - bound < -tol


def test_c(eps_derivative_value: float, generator_term: float,
           tol: float = EPS_TEST_C) -> bool:
    """Mismatch between the channel-side derivative and Tr{Pi L^dag rho}."""
    return abs(eps_derivative_value - generator_term) > tol


@dataclass(frozen=True)
class WitnessReport:
    """Per-time record of the rate, its lower limit, f, and test outcomes."""

    time: float
    entropy_rate: float
    theorem2_bound: float
    f_value: float
    nonunitality: float
    flags: frozenset[str]

    @property
    def violation(self) -> float:
        return self.entropy_rate - self.theorem2_bound


def witness_reports(generator: LindbladGenerator, traj: Trajectory,
                    family: ChannelFamily | None = None,
                    eps0: float = EPSILON_STEP) -> list[WitnessReport]:
    """One WitnessReport per trajectory point.

    The f column and test (a)/(c) need intermediate maps; when no family is
    supplied the generator's own time-ordered propagators are used.
    """
    from .dynamics import GeneratorFamily

    fam = family if family is not None else GeneratorFamily(generator)
    reports = []
    for k, t in enumerate(traj.grid):
        t = float(t)
        state = traj.states[k].entries
        rate = entropy_rate(state, traj.derivatives[k])
        witness = _pinned_adjoint_trace(generator, t, state)
        bound = -witness
        eps_term = epsilon_derivative(fam, state, t, eps0=eps0)
        f_value = rate + eps_term
        flags = set()
        if test_a(f_value):
            flags.add("test_a_passed")
        if test_b(rate, bound):
            flags.add("test_b_passed")
        if test_c(eps_term, witness):
            flags.add("test_c_passed")
        reports.append(WitnessReport(time=t, entropy_rate=rate, theorem2_bound=bound,
                                     f_value=f_value, nonunitality=witness,
                                     flags=frozenset(flags)))
    return reports


def export_witness_reports(reports, path) -> None:
    """CSV stream: t, rate, bound, f, nonunitality, flags (semicolon-joined)."""
    lines = ["t,entropy_rate,theorem2_bound,f,nonunitality,flags"]
    for r in reports:
        flags = ";".join(sorted(r.flags))
        lines.append(",".join([
            repr(r.time), repr(r.entropy_rate), repr(r.theorem2_bound),
            repr(r.f_value), repr(r.nonunitality), flags,
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Measures of non-Markovianity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureResult:
    """Max over sampled initial states of the integrated witness violation."""

    value: float
    argmax_state: DensityMatrix | None
    samples_used: int
    sample_values: tuple[float, ...]


def _exclusion_mask(grid: np.ndarray, centers, margin: float) -> np.ndarray:
    mask = np.zeros(len(grid), dtype=bool)
    for c in centers:
        mask |= np.abs(grid - c) < margin
    return mask


def _violation_integral(grid: np.ndarray, values: np.ndarray, threshold: float,
                        evaluate=None, excluded: np.ndarray | None = None,
                        bisect_atol: float = 1e-6) -> float:
    """Integral of |v| over {v < -threshold} by trapezoid rule.

    Interval endpoints where the violation switches on or off are refined by
    bisection on ``evaluate`` when available (else linear interpolation).
    Grid points under an exclusion mask are treated as non-violating; with
    the default margins this only trims rank-change neighborhoods whose true
    violation mass is zero.
    """
    violating = (values < -threshold)
    if excluded is not None:
        violating &= ~excluded
    if not violating.any():
        return 0.0

    def crossing(t0, v0, t1, v1):
        # Root of v(t) = -threshold inside [t0, t1].
        target = -threshold
        if evaluate is None:
            if v1 == v0:
                return 0.5 * (t0 + t1)
            return t0 + (target - v0) * (t1 - t0) / (v1 - v0)
        lo, hi = t0, t1
        below_lo = v0 < target
        while hi - lo > bisect_atol:
            mid = 0.5 * (lo + hi)
            if (evaluate(mid) < target) == below_lo:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    total = 0.0
    for k in range(len(grid) - 1):
        a, b = violating[k], violating[k + 1]
        t0, t1 = float(grid[k]), float(grid[k + 1])
        v0, v1 = float(values[k]), float(values[k + 1])
        if a and b:
            total += 0.5 * (-v0 - v1) * (t1 - t0)
        elif a and not b:
            t_star = min(max(crossing(t0, v0, t1, v1), t0), t1)
            total += 0.5 * (-v0 + threshold) * (t_star - t0)
        elif b and not a:
            t_star = min(max(crossing(t0, v0, t1, v1), t0), t1)
            total += 0.5 * (threshold - v1) * (t1 - t_star)
    return total


def measure_generator(generator: LindbladGenerator, state_sampler, grid,
                      eps_w: float = EPS_WITNESS,
                      rank_margin: float = RANK_CHANGE_MARGIN) -> MeasureResult:
    """Max over initial states of the integrated Theorem-2 violation.

    For each sampled rho_0 the trajectory is propagated and
    |dS/dt + Tr{Pi L^dag rho}| is integrated over the times where it is below
    -eps_w, with bisection refinement of the window boundaries.
    """
    states = list(state_sampler)
    if not states:
        raise WitnessError("state sampler yielded no states")
    grid = np.asarray(grid, dtype=float)

    def one(rho0: DensityMatrix) -> float:
        traj = propagate(generator, rho0, grid)
        values = np.array([
            entropy_rate(traj.states[k], traj.derivatives[k])
            + _pinned_adjoint_trace(generator, float(t), traj.states[k])
            for k, t in enumerate(traj.grid)
        ])
        excluded = _exclusion_mask(traj.grid, traj.rank_change_times(), rank_margin)

        def evaluate(t: float) -> float:
            state = hermitian_part(traj.state_at(t))
            dot = generator.apply(t, state)
            return entropy_rate(state, dot) + _pinned_adjoint_trace(generator, t, state)

        return _violation_integral(traj.grid, values, eps_w,
                                   evaluate=evaluate, excluded=excluded)

    integrals = pmap(one, states)
    best = int(np.argmax(integrals))
    return MeasureResult(value=float(integrals[best]), argmax_state=states[best],
                         samples_used=len(states), sample_values=tuple(map(float, integrals)))


def measure_channel(family: ChannelFamily, state_sampler, grid,
                    eps_w: float = EPS_WITNESS, eps0: float = EPSILON_STEP,
                    rank_margin: float = RANK_CHANGE_MARGIN) -> MeasureResult:
    """Max over initial states of the integrated negative part of f(t)."""
    states = list(state_sampler)
    if not states:
        raise WitnessError("state sampler yielded no states")
    grid = np.asarray(grid, dtype=float)

    def one(rho0: DensityMatrix) -> float:
        traj = family.trajectory(rho0, grid)
        values = np.array([
            entropy_rate(traj.states[k], traj.derivatives[k])
            + epsilon_derivative(family, traj.states[k].entries, float(t), eps0=eps0)
            for k, t in enumerate(traj.grid)
        ])
        excluded = _exclusion_mask(traj.grid, traj.rank_change_times(), rank_margin)

        def evaluate(t: float) -> float:
            return witness_f_channel(family, rho0, t, eps0=eps0)

        return _violation_integral(traj.grid, values, eps_w,
                                   evaluate=evaluate, excluded=excluded)

    integrals = pmap(one, states)
    best = int(np.argmax(integrals))
    return MeasureResult(value=float(integrals[best]), argmax_state=states[best],
                         samples_used=len(states), sample_values=tuple(map(float, integrals)))


def blp_measure(family: ChannelFamily, pair_sampler, grid) -> float:
    """Trace-distance revival measure: max over state pairs of the integrated
    positive part of d/dt (1/2)||rho^1_t - rho^2_t||_1 (central differences)."""
    grid = np.asarray(grid, dtype=float)

    def one(pair) -> float:
        rho1, rho2 = pair
        dists = np.array([
            0.5 * schatten_norm(family.state(rho1, float(t)) - family.state(rho2, float(t)), 1)
            for t in grid
        ])
        sigma = np.gradient(dists, grid)
        positive = np.clip(sigma, 0.0, None)
        return float(_trapezoid(positive, grid))

    values = pmap(one, list(pair_sampler))
    return max(values) if values else 0.0


# ---------------------------------------------------------------------------
# Semigroup sandwich, Pinsker pair, environment simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichBounds:
    lower: float
    entropy: float
    upper: float
    initial_entropy: float
    relative_entropy_bound: float


def semigroup_sandwich(generator: LindbladGenerator, rho0, t: float,
                       atol: float = 1e-9, slack: float = 1e-8) -> SandwichBounds:
    """-Tr{rho_0 log rho_2t} <= S(rho_t) <= -Tr{rho_2t log rho_0} for a
    self-adjoint unital semigroup, plus S(rho_t) - S(rho_0) >= D(rho_0||rho_2t).

    Requires a time-independent generator whose superoperator is Hermitian
    (self-adjoint map), unital, and a full-rank initial state.
    """
    from scipy.linalg import expm

    if not generator.is_time_independent():
        raise WitnessError("sandwich bounds need a time-independent generator")
    s = generator.superoperator(0.0)
    if np.max(np.abs(s.matrix - dagger(s.matrix))) > atol:
        raise WitnessError("generator is not self-adjoint")
    if np.max(np.abs(generator.apply(0.0, np.eye(generator.dim)))) > atol:
        raise WitnessError("generator is not unital")
    a = _require_full_rank(rho0, "initial state")

    m_t = expm(t * s.matrix)
    v0 = a.reshape(-1)
    rho_t = hermitian_part((m_t @ v0).reshape(a.shape))
    rho_2t = hermitian_part((m_t @ rho_t.reshape(-1)).reshape(a.shape))

    entropy = von_neumann_entropy(rho_t)
    lower = float(-np.real(np.trace(a @ matrix_log_on_support(rho_2t))))
    upper = float(-np.real(np.trace(rho_2t @ matrix_log_on_support(a))))
    if not (lower - slack <= entropy <= upper + slack):
        raise WitnessError(
            f"sandwich violated at t={t}: {lower} <= {entropy} <= {upper}"
        )
    d = relative_entropy(a, rho_2t)
    if is_infinite(d):
        raise WitnessError("relative entropy bound is infinite on a full-rank pair")
    return SandwichBounds(lower=lower, entropy=entropy, upper=upper,
                          initial_entropy=von_neumann_entropy(a),
                          relative_entropy_bound=float(d))


@dataclass(frozen=True)
class PinskerGap:
    relative_entropy: float
    half_trace_norm_sq: float
    reverse_bound: float


def pinsker_gap(channel: QuantumChannel, rho, slack: float = 1e-10) -> PinskerGap:
    """Both sides of the Pinsker pair for a sub-unital quantum operation.

    Checks D >= ||rho - N^dag N(rho)||_1^2 / 2 and
    ||rho - N^dag N(rho)||_1 >= D / ||log rho||_inf, raising on violation.
    """
    if not channel.trace_nonincreasing:
        raise WitnessError("Pinsker pair needs a trace-non-increasing operation")
    if not unitality_class(channel).is_sub_unital:
        raise WitnessError("Pinsker pair needs a sub-unital operation")
    a = _require_full_rank(rho)
    back = _back_action(channel, a)
    _require_full_rank(back, "N^dag N(rho)")
    d = relative_entropy(a, back)
    if is_infinite(d):
        raise WitnessError("relative entropy infinite despite full-rank back action")
    d = float(d)
    tn = schatten_norm(a - back, 1)
    log_norm = schatten_norm(matrix_log_on_support(a), np.inf)
    if d < 0.5 * tn * tn - slack:
        raise WitnessError(f"Pinsker inequality violated: D={d}, ||.||_1={tn}")
    if tn < d / log_norm - slack:
        raise WitnessError(f"reverse Pinsker violated: D={d}, ||.||_1={tn}")
    return PinskerGap(relative_entropy=d, half_trace_norm_sq=0.5 * tn * tn,
                      reverse_bound=d / log_norm)


def environment_simulation_bound(interaction: QuantumChannel, theta_c, rho_a,
                                 slack: float = 1e-9,
                                 equality_slack: float = 1e-8) -> tuple[float, float]:
    """Entropy-change bound for E(rho_A) = F(rho_A (x) theta_C).

    Returns (Delta S, S(theta_C) + D(rho_A (x) theta_C || F^dag F(...))) and
    checks Delta S >= bound - slack.  When F is a single-Kraus unitary
    interaction the two sides must agree within ``equality_slack``.
    """
    a = as_matrix(rho_a)
    c = as_matrix(theta_c)
    joint = np.kron(a, c)
    if joint.shape != (interaction.dim_in, interaction.dim_in):
        raise WitnessError(
            f"joint input dim {joint.shape[0]} does not match channel input "
            f"{interaction.dim_in}"
        )
    out = hermitian_part(interaction.apply(joint))
    delta_s = von_neumann_entropy(out) - von_neumann_entropy(a)
    d = relative_entropy(joint, _back_action(interaction, joint))
    if is_infinite(d):
        raise WitnessError("simulation bound is infinite; support collapsed")
    bound = von_neumann_entropy(c) + float(d)
    if delta_s < bound - slack:
        raise WitnessError(f"simulation bound violated: {delta_s} < {bound}")
    if len(interaction.kraus) == 1:
        k = interaction.kraus[0]
        if np.max(np.abs(dagger(k) @ k - np.eye(interaction.dim_in))) < 1e-10:
            if abs(delta_s - bound) > equality_slack:
                raise WitnessError(
                    f"unitary interaction should saturate the bound: "
                    f"{delta_s} vs {bound}"
                )
    return delta_s, bound
