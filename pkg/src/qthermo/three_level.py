"""Closed-form physics of a three-level particle between two thermal baths.

Two configurations are covered:

* ``lambda``: two low levels, each coupled through its own bath to one shared
  excited level.  The population accumulates on the side of the colder bath,
  and the mean position obeys a driven damped oscillator equation whose drive
  is the thermophoretic force.
* ``vee``: one shared ground level coupled to two excited levels.  The force
  is the exact negative of the lambda one, so the particle drifts toward the
  hotter bath.

Every closed form here is cross-checked in the test suite against the full
eigenbasis master equation built by :mod:`qthermo.davies`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .davies import BathSpec, FlatDensity, OpenSystem, bose_occupation
from .errors import DegenerateInputError, InvariantViolationError
from .linalg import require_density_matrix

LAMBDA = "lambda"
VEE = "vee"


@dataclass(frozen=True)
class ThreeLevelParams:
    """Model parameters; frequencies and rates in energy units, temperatures
    likewise, ``d`` the separation of the two localized positions."""

    configuration: str
    omega_1: float = 1.0
    omega_2: float = 1.0
    gamma_1: float = 1.0
    gamma_2: float = 1.0
    temp_1: float = 1.0
    temp_2: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        if self.configuration not in (LAMBDA, VEE):
            raise InvariantViolationError(
                f"configuration must be {LAMBDA!r} or {VEE!r}, got {self.configuration!r}"
            )
        for name in ("omega_1", "omega_2", "gamma_1", "gamma_2", "d"):
            if not getattr(self, name) > 0:
                raise InvariantViolationError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("temp_1", "temp_2"):
            if getattr(self, name) < 0:
                raise InvariantViolationError(f"{name} must be >= 0, got {getattr(self, name)}")

    @classmethod
    def from_occupations(
        cls,
        configuration: str,
        n_1: float,
        n_2: float,
        omega: float = 1.0,
        gamma: float = 1.0,
        d: float = 1.0,
    ) -> "ThreeLevelParams":
        """Build parameters from target bath occupations at a common transition
        frequency (T = omega / ln(1 + 1/n), T = 0 for n = 0)."""
        if n_1 < 0 or n_2 < 0:
            raise InvariantViolationError("occupations must be >= 0")
        temp = lambda n: 0.0 if n == 0 else omega / math.log1p(1.0 / n)
        return cls(
            configuration=configuration,
            omega_1=omega,
            omega_2=omega,
            gamma_1=gamma,
            gamma_2=gamma,
            temp_1=temp(n_1),
            temp_2=temp(n_2),
            d=d,
        )


def occupations(params: ThreeLevelParams) -> tuple[float, float]:
    """Bath occupations, each evaluated at its own transition frequency."""
    return (
        bose_occupation(params.omega_1, params.temp_1),
        bose_occupation(params.omega_2, params.temp_2),
    )


def _require_equal_rates(params: ThreeLevelParams) -> float:
    if params.gamma_1 != params.gamma_2:
        raise InvariantViolationError(
            "the closed forms assume equal bath rates; got "
            f"gamma_1 = {params.gamma_1}, gamma_2 = {params.gamma_2}"
        )
    return params.gamma_1


@dataclass(frozen=True)
class LevelPopulations:
    """Populations of the two position-carrying levels and of the shared third
    level (excited for lambda, ground for vee)."""

    p_1: float
    p_2: float
    p_shared: float

    def __post_init__(self):
        for name in ("p_1", "p_2", "p_shared"):
            value = getattr(self, name)
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise InvariantViolationError(f"{name} = {value} outside [0, 1]")
        total = self.p_1 + self.p_2 + self.p_shared
        if abs(total - 1.0) > 1e-12:
            raise InvariantViolationError(f"populations sum to {total}, not 1")

    @classmethod
    def closing(cls, p_1: float, p_2: float) -> "LevelPopulations":
        """Complete the triple using probability conservation."""
        return cls(p_1, p_2, 1.0 - p_1 - p_2)

    @property
    def unbalance(self) -> float:
        return self.p_2 - self.p_1

    @property
    def mean(self) -> float:
        return 0.5 * (self.p_1 + self.p_2)


@dataclass(frozen=True)
class ThermoDiagnostics:
    """Occupation-level summary of the closed forms for one parameter set."""

    n_1: float
    n_2: float
    delta_n: float
    n_mean: float
    mass: float          # effective oscillator mass 1/(4 n_mean + 2)
    omega_sq: float      # squared oscillator frequency, in rate^2 units
    unbalance: float     # stationary population unbalance, in [-1, 1]
    force: float         # thermophoretic drive of the oscillator equation


def thermo_diagnostics(params: ThreeLevelParams) -> ThermoDiagnostics:
    """Closed-form diagnostics for either configuration (requires equal rates).

    For the lambda configuration the stationary unbalance diverges from zero
    toward the cold side; the vee force is its exact negative.  Both squared
    frequencies are nonnegative for all admissible occupations.
    """
    gamma = _require_equal_rates(params)
    n_1, n_2 = occupations(params)
    delta_n = n_2 - n_1
    n_mean = 0.5 * (n_1 + n_2)
    mass = 1.0 / (4.0 * n_mean + 2.0)
    if params.configuration == LAMBDA:
        if n_mean == 0.0:
            raise DegenerateInputError(
                "both baths at T = 0 leave the lambda system without dynamics"
            )
        reduced = n_mean * (3.0 * n_mean + 2.0) - 0.75 * delta_n**2
        unbalance = -delta_n / reduced
        force = -(delta_n / 2.0) * mass * gamma**2 * params.d
    else:
        reduced = (3.0 * n_mean + 1.0) * (n_mean + 1.0) - 0.75 * delta_n**2
        unbalance = delta_n / reduced
        force = +(delta_n / 2.0) * mass * gamma**2 * params.d
    return ThermoDiagnostics(
        n_1=n_1,
        n_2=n_2,
        delta_n=delta_n,
        n_mean=n_mean,
        mass=mass,
        omega_sq=gamma**2 * reduced,
        unbalance=unbalance,
        force=force,
    )


def steady_unbalance(params: ThreeLevelParams) -> float:
    """Stationary population unbalance of the two position-carrying levels."""
    return thermo_diagnostics(params).unbalance


def thermophoretic_force(params: ThreeLevelParams) -> float:
    """Drive term of the mean-position oscillator equation.  Negative of the
    lambda value in the vee configuration."""
    return thermo_diagnostics(params).force


@dataclass(frozen=True)
class OscillatorCoefficients:
    """Coefficients of m x'' + damping x' + m W^2 x = drive for the mean position."""

    mass: float
    damping: float
    omega_sq: float
    drive: float


def oscillator_coefficients(params: ThreeLevelParams) -> OscillatorCoefficients:
    diag = thermo_diagnostics(params)
    return OscillatorCoefficients(
        mass=diag.mass,
        damping=_require_equal_rates(params),
        omega_sq=diag.omega_sq,
        drive=diag.force,
    )


def lambda_system(params: ThreeLevelParams) -> OpenSystem:
    """Open system for the lambda configuration.

    Basis order (|1>, |2>, |e>); the energy zero sits at level |1>, so the
    Hamiltonian is diag(0, omega_1 - omega_2, omega_1) and each bath couples
    its own low level to the shared excited one with a flat spectral density.
    """
    if params.configuration != LAMBDA:
        raise InvariantViolationError("lambda_system needs configuration = 'lambda'")
    h = np.diag([0.0, params.omega_1 - params.omega_2, params.omega_1]).astype(complex)
    couplings = []
    for k in (0, 1):
        c = np.zeros((3, 3), dtype=complex)
        c[k, 2] = 1.0
        c[2, k] = 1.0
        couplings.append(c)
    return OpenSystem(
        hamiltonian=h,
        baths=(
            BathSpec(couplings[0], FlatDensity(params.gamma_1), params.temp_1),
            BathSpec(couplings[1], FlatDensity(params.gamma_2), params.temp_2),
        ),
    )


def vee_system(params: ThreeLevelParams) -> OpenSystem:
    """Open system for the vee configuration.

    Basis order (|g>, |1>, |2>) with the ground level at zero energy; bath k
    drives the |g> <-> |k> transition at frequency omega_k.
    """
    if params.configuration != VEE:
        raise InvariantViolationError("vee_system needs configuration = 'vee'")
    h = np.diag([0.0, params.omega_1, params.omega_2]).astype(complex)
    couplings = []
    for k in (1, 2):
        c = np.zeros((3, 3), dtype=complex)
        c[0, k] = 1.0
        c[k, 0] = 1.0
        couplings.append(c)
    return OpenSystem(
        hamiltonian=h,
        baths=(
            BathSpec(couplings[0], FlatDensity(params.gamma_1), params.temp_1),
            BathSpec(couplings[1], FlatDensity(params.gamma_2), params.temp_2),
        ),
    )


def three_level_system(params: ThreeLevelParams) -> OpenSystem:
    return lambda_system(params) if params.configuration == LAMBDA else vee_system(params)


def rate_matrix(params: ThreeLevelParams, spontaneous: bool = True) -> np.ndarray:
    """Population rate matrix on (P_1, P_2, P_shared); columns sum to zero.

    ``spontaneous=False`` drops the +1 of the downward rates, which models a
    purely classical environment and kills the stationary unbalance.
    """
    n_1, n_2 = occupations(params)
    s = 1.0 if spontaneous else 0.0
    g1, g2 = params.gamma_1, params.gamma_2
    if params.configuration == LAMBDA:
        down_1, down_2 = g1 * (n_1 + s), g2 * (n_2 + s)
        up_1, up_2 = g1 * n_1, g2 * n_2
        return np.array(
            [
                [-up_1, 0.0, down_1],
                [0.0, -up_2, down_2],
                [up_1, up_2, -(down_1 + down_2)],
            ]
        )
    down_1, down_2 = g1 * (n_1 + s), g2 * (n_2 + s)
    up_1, up_2 = g1 * n_1, g2 * n_2
    return np.array(
        [
            [-down_1, 0.0, up_1],
            [0.0, -down_2, up_2],
            [down_1, down_2, -(up_1 + up_2)],
        ]
    )


def rate_rhs(
    pops: LevelPopulations, params: ThreeLevelParams, spontaneous: bool = True
) -> tuple[float, float]:
    """Time derivatives of (P_1, P_2) under the population rate equations."""
    matrix = rate_matrix(params, spontaneous)
    vec = np.array([pops.p_1, pops.p_2, pops.p_shared])
    dot = matrix @ vec
    return float(dot[0]), float(dot[1])


def populations_from_state(rho, params: ThreeLevelParams) -> LevelPopulations:
    """Read (P_1, P_2, P_shared) off a three-level density matrix in the basis
    order used by :func:`lambda_system` / :func:`vee_system`."""
    state = require_density_matrix(rho)
    if state.shape != (3, 3):
        raise InvariantViolationError(f"expected a 3x3 state, got {state.shape}")
    diag = state.diagonal().real
    if params.configuration == LAMBDA:
        return LevelPopulations(float(diag[0]), float(diag[1]), float(diag[2]))
    return LevelPopulations(float(diag[1]), float(diag[2]), float(diag[0]))


def mean_position(pops: LevelPopulations, params: ThreeLevelParams) -> float:
    """(d/2)(P_2 - P_1); the shared level sits at the symmetric midpoint."""
    return 0.5 * params.d * pops.unbalance


@dataclass(frozen=True)
class TrajectoryCheck:
    """Mean position along a trajectory and the residual of its oscillator
    equation, computed with second-order finite differences."""

    times: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    residual: np.ndarray
    rel_residual_max: float


def _derivatives(values: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    n = values.size
    if n < 4:
        raise ValueError("need at least four samples for the finite-difference stencils")
    vel = np.empty(n)
    acc = np.empty(n)
    vel[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    vel[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt)
    vel[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dt)
    acc[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dt**2
    acc[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / dt**2
    acc[-1] = (2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]) / dt**2
    return vel, acc


def mean_position_trajectory(
    params: ThreeLevelParams, trajectory: np.ndarray, t_grid
) -> TrajectoryCheck:
    """Mean position along a uniformly sampled trajectory and the pointwise
    residual of the driven-damped oscillator equation it must satisfy.

    The residual of the exact dynamics is pure discretization error and
    shrinks quadratically with the sampling step; a warning is issued when it
    stays above 1e-3 relative to the equation's own scale.
    """
    times = np.asarray(t_grid, dtype=float)
    steps = np.diff(times)
    if steps.size < 3 or np.max(np.abs(steps - steps[0])) > 1e-12 * max(steps[0], 1.0):
        raise ValueError("mean_position_trajectory needs a uniform time grid of >= 4 points")
    dt = float(steps[0])
    coeff = oscillator_coefficients(params)
    position = np.array(
        [mean_position(populations_from_state(rho, params), params) for rho in trajectory]
    )
    velocity, acceleration = _derivatives(position, dt)
    residual = (
        coeff.mass * acceleration
        + coeff.damping * velocity
        + coeff.mass * coeff.omega_sq * position
        - coeff.drive
    )
    scale = float(
        np.max(
            np.abs(coeff.mass * acceleration)
            + np.abs(coeff.damping * velocity)
            + np.abs(coeff.mass * coeff.omega_sq * position)
            + abs(coeff.drive)
        )
    )
    rel = float(np.max(np.abs(residual)) / scale) if scale > 0 else 0.0
    if rel > 1e-3:
        warnings.warn(
            f"oscillator residual {rel:.2e} is dominated by the sampling step; refine the grid",
            stacklevel=2,
        )
    return TrajectoryCheck(
        times=times,
        position=position,
        velocity=velocity,
        acceleration=acceleration,
        residual=residual,
        rel_residual_max=rel,
    )


@dataclass(frozen=True)
class HighTemperatureForce:
    """Semiclassical force, its exact-occupation counterpart, and their
    relative deviation."""

    high_t: float
    exact_overdamped: float
    deviation: float


def high_temperature_force(params: ThreeLevelParams) -> HighTemperatureForce:
    """Semiclassical limit of the force, -(T'/T) Gamma^2 d^2 / 6 with T' the
    temperature slope across the separation, against the exact-occupation
    overdamped force -(dn / 3 n_mean) Gamma^2 d / 2.

    Requires equal transition frequencies so the thermal-equilibrium bias
    cannot masquerade as a gradient effect.
    """
    gamma = _require_equal_rates(params)
    if params.omega_1 != params.omega_2:
        raise InvariantViolationError(
            "the high-temperature comparison requires omega_1 = omega_2"
        )
    if params.temp_1 + params.temp_2 == 0:
        raise DegenerateInputError("both temperatures vanish; the mean temperature divides")
    t_slope = (params.temp_2 - params.temp_1) / params.d
    t_mean = 0.5 * (params.temp_1 + params.temp_2)
    high_t = -(t_slope / t_mean) * gamma**2 * params.d**2 / 6.0
    n_1, n_2 = occupations(params)
    delta_n = n_2 - n_1
    n_mean = 0.5 * (n_1 + n_2)
    if n_mean == 0:
        raise DegenerateInputError("zero mean occupation; no overdamped comparison")
    exact = -(delta_n / (3.0 * n_mean)) * gamma**2 * params.d / 2.0
    deviation = abs(high_t / exact - 1.0) if exact != 0 else (0.0 if high_t == 0 else math.inf)
    return HighTemperatureForce(high_t=high_t, exact_overdamped=exact, deviation=deviation)


@dataclass(frozen=True)
class OverdampedResult:
    """Late-time ratio acc / (-damping * n_mean * vel) with its spread across
    the analysis window; ``applicable`` is False for stationary input."""

    ratio: float
    spread: float
    applicable: bool
    n_mean: float


def overdamped_ratio(
    params: ThreeLevelParams, trajectory: np.ndarray, t_grid
) -> OverdampedResult:
    """Check that the mean-position acceleration tracks -Gamma n_mean times the
    velocity, the overdamped reduction valid at high occupations.

    The ratio is evaluated on the late part of the trajectory: after at least
    five time constants of the slowest population mode and within the final
    half of the samples, so the fast transient cannot contaminate it.
    """
    times = np.asarray(t_grid, dtype=float)
    steps = np.diff(times)
    if steps.size < 3 or np.max(np.abs(steps - steps[0])) > 1e-12 * max(steps[0], 1.0):
        raise ValueError("overdamped_ratio needs a uniform time grid of >= 4 points")
    dt = float(steps[0])
    gamma = _require_equal_rates(params)
    n_1, n_2 = occupations(params)
    n_mean = 0.5 * (n_1 + n_2)
    if n_mean == 0:
        return OverdampedResult(ratio=math.nan, spread=math.nan, applicable=False, n_mean=0.0)

    position = np.array(
        [mean_position(populations_from_state(rho, params), params) for rho in trajectory]
    )
    velocity, acceleration = _derivatives(position, dt)

    eigenvalues = np.linalg.eigvals(rate_matrix(params))
    decay = np.sort(np.abs(eigenvalues.real))
    slow = decay[decay > 1e-12 * max(decay.max(), 1.0)]
    if slow.size == 0:
        return OverdampedResult(ratio=math.nan, spread=math.nan, applicable=False, n_mean=n_mean)
    t_start = max(5.0 / slow[0], times[0] + 0.5 * (times[-1] - times[0]))
    window = times >= t_start
    window[[0, -1]] = False  # one-sided stencils are less accurate
    floor = 1e-12 * gamma * max(float(np.max(np.abs(position))), params.d)
    if not np.any(window) or float(np.max(np.abs(velocity[window]))) < floor:
        return OverdampedResult(ratio=math.nan, spread=math.nan, applicable=False, n_mean=n_mean)

    ratios = acceleration[window] / (-gamma * n_mean * velocity[window])
    ratio = float(np.median(ratios))
    spread = float(np.max(ratios) - np.min(ratios))
    return OverdampedResult(ratio=ratio, spread=spread, applicable=True, n_mean=n_mean)


def dufour_currents(
    pops: LevelPopulations, n_1: float, n_2: float, omega: float, gamma: float
) -> tuple[float, float, bool]:
    """Heat currents of the lambda system at clamped populations,
    J_k = omega gamma [(n_k + 1) P_shared - n_k P_k], and whether they are
    ordered J_1 > J_2 > 0.

    A clamped concentration unbalance P_2 > P_1 with population inversion
    makes bath 1 heat up faster: the reciprocal of thermophoresis.
    """
    if n_1 < 0 or n_2 < 0:
        raise InvariantViolationError("occupations must be >= 0")
    j_1 = omega * gamma * ((n_1 + 1.0) * pops.p_shared - n_1 * pops.p_1)
    j_2 = omega * gamma * ((n_2 + 1.0) * pops.p_shared - n_2 * pops.p_2)
    return j_1, j_2, bool(j_1 > j_2 > 0.0)


@dataclass(frozen=True)
class BathHeatingHistory:
    """Temperature and current histories of two finite-capacity baths heated by
    a clamped population distribution.  ``truncated`` marks an early halt when
    a temperature reached zero."""

    times: np.ndarray
    temp_1: np.ndarray
    temp_2: np.ndarray
    current_1: np.ndarray
    current_2: np.ndarray
    truncated: bool


def finite_capacity_heating(
    pops: LevelPopulations,
    omega: float,
    gamma: float,
    temp_start: float,
    capacity: float,
    horizon: float,
    samples: int = 201,
) -> BathHeatingHistory:
    """Integrate dT_k/dt = J_k / C for two baths that start at the same
    temperature, with the occupations recomputed from the instantaneous
    temperatures at every stage.

    The populations stay clamped for the whole horizon.  Integration halts
    with the partial history if a temperature reaches zero.
    """
    if capacity <= 0:
        raise InvariantViolationError(f"heat capacity must be > 0, got {capacity}")
    if temp_start < 0:
        raise InvariantViolationError(f"starting temperature must be >= 0, got {temp_start}")
    if samples < 2 or horizon <= 0:
        raise ValueError("need horizon > 0 and at least two samples")

    def currents(t1: float, t2: float) -> tuple[float, float]:
        n_1 = bose_occupation(omega, max(t1, 0.0))
        n_2 = bose_occupation(omega, max(t2, 0.0))
        j_1, j_2, _ = dufour_currents(pops, n_1, n_2, omega, gamma)
        return j_1, j_2

    def rhs(s: np.ndarray) -> np.ndarray:
        return np.array(currents(s[0], s[1])) / capacity

    dt = horizon / (samples - 1)
    times = [0.0]
    t1_hist = [temp_start]
    t2_hist = [temp_start]
    j0 = currents(temp_start, temp_start)
    j1_hist = [j0[0]]
    j2_hist = [j0[1]]
    truncated = False
    state = np.array([temp_start, temp_start])
    for i in range(1, samples):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if state.min() <= 0.0:
            truncated = True
            break
        j = currents(state[0], state[1])
        times.append(i * dt)
        t1_hist.append(float(state[0]))
        t2_hist.append(float(state[1]))
        j1_hist.append(j[0])
        j2_hist.append(j[1])
    return BathHeatingHistory(
        times=np.array(times),
        temp_1=np.array(t1_hist),
        temp_2=np.array(t2_hist),
        current_1=np.array(j1_hist),
        current_2=np.array(j2_hist),
        truncated=truncated,
    )
