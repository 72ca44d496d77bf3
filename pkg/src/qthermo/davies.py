"""Global (secular) thermal master equation for a discrete system with several baths.

The generator is built in the eigenbasis of the system Hamiltonian: every
bath coupling operator is decomposed into components oscillating at a single
transition frequency, each component gets a thermal rate set by the bath's
spectral density and temperature, and the resulting dissipators are assembled
into one superoperator together with the coherent commutator.  At a uniform
temperature this construction relaxes any system to its Gibbs state, which
the test suite uses as an independent equilibrium oracle.

Sign and rate conventions:

* frequencies are energy differences E_j - E_i between eigenlevels;
* a component at frequency w > 0 removes the energy w from the system and
  carries rate J(w) (1 + n(w, T)); its adjoint partner at -w carries
  J(w) n(w, T);
* heat currents are positive when energy flows from the system into a bath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    AccuracyError,
    AmbiguousGroupingError,
    InvariantViolationError,
    NonUniqueSteadyStateError,
    NumericalConsistencyError,
    SolverFailureError,
    UnsupportedModelError,
)
from .linalg import (
    EigenDecomposition,
    devectorize,
    eigh,
    hermitize,
    require_density_matrix,
    require_hermitian,
    vectorize,
)

DEFAULT_FREQ_TOL = 1e-8
# Couplings are order-one matrices; below this the zero-frequency component
# counts as absent and no rate is needed for it.
ZERO_COMPONENT_ATOL = 1e-10
NULL_SPACE_RTOL = 1e-10
STEADY_RESIDUAL_RTOL = 1e-9
TRACE_DRIFT_TOL = 1e-7
EVOLUTION_POSITIVITY_FLOOR = -1e-7


@dataclass(frozen=True)
class FlatDensity:
    """Frequency-independent spectral density J(w) = rate."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise InvariantViolationError(f"flat spectral density needs rate > 0, got {self.rate}")

    def value(self, omega: float) -> float:
        return self.rate

    def scaled(self, factor: float) -> "FlatDensity":
        return FlatDensity(self.rate * factor)


@dataclass(frozen=True)
class OhmicDensity:
    """Linear spectral density J(w) = slope * w for w > 0."""

    slope: float

    def __post_init__(self):
        if not self.slope > 0:
            raise InvariantViolationError(f"ohmic spectral density needs slope > 0, got {self.slope}")

    def value(self, omega: float) -> float:
        return self.slope * omega

    def scaled(self, factor: float) -> "OhmicDensity":
        return OhmicDensity(self.slope * factor)


SpectralDensity = Union[FlatDensity, OhmicDensity]


@dataclass(frozen=True)
class BathSpec:
    """One thermal reservoir: coupling operator, spectral density, temperature."""

    coupling: np.ndarray
    spectral: SpectralDensity
    temperature: float

    def __post_init__(self):
        object.__setattr__(self, "coupling", require_hermitian(self.coupling, name="bath coupling"))
        if self.temperature < 0:
            raise InvariantViolationError(f"bath temperature must be >= 0, got {self.temperature}")


@dataclass(frozen=True)
class OpenSystem:
    """System Hamiltonian plus an ordered list of baths."""

    hamiltonian: np.ndarray
    baths: tuple[BathSpec, ...]

    def __post_init__(self):
        h = require_hermitian(self.hamiltonian, name="hamiltonian")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "baths", tuple(self.baths))
        for k, bath in enumerate(self.baths):
            if bath.coupling.shape != h.shape:
                raise InvariantViolationError(
                    f"bath {k} coupling shape {bath.coupling.shape} differs from hamiltonian {h.shape}"
                )

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean excitation number 1/(exp(omega/T) - 1); zero at T = 0."""
    if omega <= 0:
        raise ValueError(f"bose_occupation needs omega > 0, got {omega}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > 700:  # exp would overflow; the occupation is indistinguishable from 0
        return 0.0
    return 1.0 / math.expm1(x)


def thermal_rate(spectral: SpectralDensity, omega: float, temperature: float) -> float:
    """Rate attached to a nonzero-frequency component: emission for omega > 0,
    absorption for omega < 0."""
    if omega > 0:
        return spectral.value(omega) * (1.0 + bose_occupation(omega, temperature))
    if omega < 0:
        return spectral.value(-omega) * bose_occupation(-omega, temperature)
    raise ValueError("thermal_rate is undefined at omega = 0; handled by the grouping code")


def _check_grouping_tolerance(energies: np.ndarray, freq_tol: float) -> None:
    if not freq_tol > 0:
        raise ValueError(f"frequency grouping tolerance must be > 0, got {freq_tol}")
    spacings = np.diff(np.sort(energies))
    nonzero = spacings[spacings > freq_tol]
    if nonzero.size and freq_tol >= nonzero.min() / 4.0:
        raise AmbiguousGroupingError(
            f"grouping tolerance {freq_tol:.3e} is not below a quarter of the minimum "
            f"nonzero level spacing {nonzero.min():.3e}"
        )


@dataclass(frozen=True)
class _FrequencyGroup:
    frequency: float  # representative (group mean, exact 0 for the zero group)
    lo: float
    hi: float


def _frequency_groups(energies: np.ndarray, freq_tol: float) -> list[_FrequencyGroup]:
    """Cluster all pairwise energy differences (diagonal included) into groups
    separated by more than ``freq_tol``.  Group representatives are symmetric
    under negation by construction, and the group containing zero is pinned
    to exactly zero."""
    diffs = (energies[None, :] - energies[:, None]).reshape(-1)
    order = np.sort(diffs)
    boundaries = np.flatnonzero(np.diff(order) > freq_tol)
    starts = np.concatenate(([0], boundaries + 1))
    ends = np.concatenate((boundaries + 1, [order.size]))
    groups: list[_FrequencyGroup] = []
    for s, e in zip(starts, ends):
        chunk = order[s:e]
        spread = float(chunk[-1] - chunk[0])
        if spread > freq_tol:
            raise AmbiguousGroupingError(
                f"frequency cluster around {float(chunk.mean()):.6g} has spread {spread:.3e} "
                f"beyond the grouping tolerance {freq_tol:.3e}"
            )
        groups.append(_FrequencyGroup(float(chunk.mean()), float(chunk[0]), float(chunk[-1])))
    # The spectrum of differences is exactly symmetric; force representatives
    # to be exactly closed under negation.
    symmetrized: list[_FrequencyGroup] = []
    for grp in groups:
        if abs(grp.frequency) <= freq_tol:
            symmetrized.append(_FrequencyGroup(0.0, grp.lo, grp.hi))
        elif grp.frequency > 0:
            partner = min(groups, key=lambda g: abs(g.frequency + grp.frequency))
            symmetrized.append(
                _FrequencyGroup(0.5 * (grp.frequency - partner.frequency), grp.lo, grp.hi)
            )
        else:
            partner = min(groups, key=lambda g: abs(g.frequency + grp.frequency))
            symmetrized.append(
                _FrequencyGroup(-0.5 * (partner.frequency - grp.frequency), grp.lo, grp.hi)
            )
    return symmetrized


def bohr_frequencies(eig: EigenDecomposition, freq_tol: float = DEFAULT_FREQ_TOL) -> np.ndarray:
    """Distinct transition frequencies E_j - E_i, grouped within ``freq_tol``,
    sorted ascending and closed under negation.

    Zero appears only when distinct levels are degenerate; the trivial i = j
    differences are not reported here (the jump-operator construction still
    processes the zero-frequency component for completeness).
    """
    _check_grouping_tolerance(eig.energies, freq_tol)
    groups = _frequency_groups(eig.energies, freq_tol)
    out = []
    dim = eig.dim
    for grp in groups:
        if grp.frequency == 0.0:
            # the zero group always holds the dim trivial i = j pairs; more
            # members means a degenerate pair exists
            diffs = (eig.energies[None, :] - eig.energies[:, None]).reshape(-1)
            members = np.count_nonzero((diffs >= grp.lo) & (diffs <= grp.hi))
            if members > dim:
                out.append(0.0)
        else:
            out.append(grp.frequency)
    return np.array(sorted(out))


@dataclass(frozen=True)
class JumpTerm:
    """One single-frequency component of a bath coupling, with its thermal rate."""

    frequency: float
    operator: np.ndarray
    rate: float


@dataclass(frozen=True)
class JumpOperatorSet:
    """Per-bath single-frequency components; ``terms[k]`` belongs to bath k.

    Within each bath the operators sum back to the coupling operator, and the
    component at -w is the adjoint of the one at +w.
    """

    terms: tuple[tuple[JumpTerm, ...], ...]
    freq_tol: float


def jump_operators(system: OpenSystem, freq_tol: float = DEFAULT_FREQ_TOL) -> JumpOperatorSet:
    """Decompose every bath coupling into eigenbasis components per transition
    frequency and attach thermal rates.

    The zero-frequency component is always computed: if it vanishes it is kept
    with rate zero, if not the rate is slope * T for an ohmic density while a
    flat density makes the zero-frequency rate diverge and raises
    UnsupportedModelError.
    """
    eig = eigh(system.hamiltonian)
    _check_grouping_tolerance(eig.energies, freq_tol)
    groups = _frequency_groups(eig.energies, freq_tol)
    diff_matrix = eig.energies[None, :] - eig.energies[:, None]
    states = eig.states

    all_terms: list[tuple[JumpTerm, ...]] = []
    for k, bath in enumerate(system.baths):
        coupling_eig = states.conj().T @ bath.coupling @ states
        bath_terms: list[JumpTerm] = []
        for grp in groups:
            mask = (diff_matrix >= grp.lo) & (diff_matrix <= grp.hi)
            component_eig = np.where(mask, coupling_eig, 0.0)
            operator = states @ component_eig @ states.conj().T
            if grp.frequency == 0.0:
                magnitude = float(np.max(np.abs(component_eig))) if component_eig.size else 0.0
                if magnitude <= ZERO_COMPONENT_ATOL:
                    rate = 0.0
                elif isinstance(bath.spectral, OhmicDensity):
                    rate = bath.spectral.slope * bath.temperature
                else:
                    raise UnsupportedModelError(
                        f"bath {k}: zero-frequency coupling component of magnitude "
                        f"{magnitude:.3e} with a flat spectral density has a diverging rate; "
                        "use an ohmic density or a model whose zero-frequency component vanishes"
                    )
            else:
                rate = thermal_rate(bath.spectral, grp.frequency, bath.temperature)
            bath_terms.append(JumpTerm(grp.frequency, operator, rate))
        all_terms.append(tuple(bath_terms))
    return JumpOperatorSet(terms=tuple(all_terms), freq_tol=freq_tol)


@dataclass(frozen=True)
class Liouvillian:
    """Column-stacking superoperator of the full master equation."""

    matrix: np.ndarray
    dim: int
    default_dt: float

    def apply(self, m) -> np.ndarray:
        """Action on a matrix: devectorize(matrix @ vectorize(m))."""
        return devectorize(self.matrix @ vectorize(m))


def _dissipator_super(operator: np.ndarray, identity: np.ndarray) -> np.ndarray:
    sandwich = np.kron(operator.conj(), operator)
    norm_op = operator.conj().T @ operator
    return sandwich - 0.5 * (np.kron(identity, norm_op) + np.kron(norm_op.T, identity))


def liouvillian(system: OpenSystem, freq_tol: float = DEFAULT_FREQ_TOL) -> Liouvillian:
    """Assemble the full generator: coherent commutator plus one dissipator per
    bath and transition frequency."""
    jumps = jump_operators(system, freq_tol)
    h = system.hamiltonian
    dim = system.dim
    identity = np.eye(dim, dtype=complex)
    matrix = -1j * (np.kron(identity, h) - np.kron(h.T, identity))
    max_rate = 0.0
    for bath_terms in jumps.terms:
        for term in bath_terms:
            if term.rate == 0.0 or float(np.max(np.abs(term.operator))) <= ZERO_COMPONENT_ATOL:
                continue
            matrix = matrix + term.rate * _dissipator_super(term.operator, identity)
            max_rate = max(max_rate, term.rate)
    spectral_norm_h = float(np.max(np.abs(np.linalg.eigvalsh(h)))) if dim else 0.0
    scale = max_rate + spectral_norm_h
    default_dt = 0.01 / scale if scale > 0 else math.inf
    return Liouvillian(matrix=matrix, dim=dim, default_dt=default_dt)


def evolve(
    liouv: Liouvillian,
    rho0,
    t_grid,
    dt: float | None = None,
    validate: bool = True,
) -> np.ndarray:
    """Integrate the master equation with classic fixed-step fourth-order
    Runge-Kutta, returning one state per grid time.

    ``rho0`` is the state at ``t_grid[0]``.  Each interval is subdivided so no
    step exceeds ``dt`` (default chosen at generator build time from the
    largest rate and the Hamiltonian norm).  Trace drift beyond 1e-7 or
    non-finite entries raise AccuracyError suggesting a smaller step.
    """
    rho = require_density_matrix(rho0)
    if rho.shape[0] != liouv.dim:
        raise InvariantViolationError(f"state dimension {rho.shape[0]} differs from generator {liouv.dim}")
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("t_grid must be a one-dimensional sequence of times")
    if times[0] < 0 or (times.size > 1 and not np.all(np.diff(times) > 0)):
        raise ValueError("t_grid must be strictly increasing and start at a time >= 0")
    step = dt if dt is not None else liouv.default_dt
    if not step > 0:
        raise ValueError(f"dt must be > 0, got {step}")

    matrix = liouv.matrix
    vec = vectorize(rho)
    out = np.empty((times.size, liouv.dim, liouv.dim), dtype=complex)
    out[0] = rho

    def _check(state_vec: np.ndarray, t: float) -> np.ndarray:
        snapshot = devectorize(state_vec)
        if not np.all(np.isfinite(snapshot)):
            raise AccuracyError(f"non-finite state at t = {t:g}; use a smaller dt")
        drift = abs(complex(np.trace(snapshot)) - 1.0)
        if drift > TRACE_DRIFT_TOL:
            raise AccuracyError(
                f"trace drift {drift:.3e} above {TRACE_DRIFT_TOL:.0e} at t = {t:g}; use a smaller dt"
            )
        if validate:
            snapshot = require_density_matrix(
                snapshot,
                herm_atol=1e-10,
                trace_atol=TRACE_DRIFT_TOL,
                eig_floor=EVOLUTION_POSITIVITY_FLOOR,
                name=f"state at t = {t:g}",
            )
        return snapshot

    for i in range(1, times.size):
        span = times[i] - times[i - 1]
        n_sub = max(1, math.ceil(span / step)) if math.isfinite(step) else 1
        h = span / n_sub
        for _ in range(n_sub):
            k1 = matrix @ vec
            k2 = matrix @ (vec + 0.5 * h * k1)
            k3 = matrix @ (vec + 0.5 * h * k2)
            k4 = matrix @ (vec + h * k3)
            vec = vec + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i] = _check(vec, float(times[i]))
    return out


def steady_state(liouv: Liouvillian, null_rtol: float = NULL_SPACE_RTOL) -> np.ndarray:
    """Stationary state from the singular-value null space of the generator.

    Exactly one singular value may sit below ``null_rtol`` times the largest;
    zero raises SolverFailureError and more than one raises
    NonUniqueSteadyStateError reporting the dimension found.
    """
    _, singulars, vh = np.linalg.svd(liouv.matrix)
    top = float(singulars[0]) if singulars.size else 0.0
    if top == 0.0:
        raise SolverFailureError("generator is identically zero; every state is stationary")
    null_dim = int(np.count_nonzero(singulars <= null_rtol * top))
    if null_dim == 0:
        raise SolverFailureError(
            f"no singular value below {null_rtol:.0e} of the largest; smallest ratio "
            f"{float(singulars[-1]) / top:.3e}"
        )
    if null_dim > 1:
        raise NonUniqueSteadyStateError(
            f"steady state is not unique: null space has dimension {null_dim}", null_dim
        )
    candidate = devectorize(vh[-1].conj())
    candidate = hermitize(candidate)
    trace = complex(np.trace(candidate)).real
    if abs(trace) < 1e-12:
        raise SolverFailureError("null vector is traceless; no normalizable stationary state")
    rho = candidate / trace
    residual = float(np.linalg.norm(liouv.matrix @ vectorize(rho)))
    if residual > STEADY_RESIDUAL_RTOL * top:
        raise SolverFailureError(
            f"stationary residual {residual:.3e} above {STEADY_RESIDUAL_RTOL:.0e} * ||L|| = "
            f"{STEADY_RESIDUAL_RTOL * top:.3e}"
        )
    return require_density_matrix(rho, name="steady state")


def _bath_dissipator_action(bath_terms: tuple[JumpTerm, ...], rho: np.ndarray) -> np.ndarray:
    action = np.zeros_like(rho)
    for term in bath_terms:
        if term.rate == 0.0:
            continue
        a = term.operator
        norm_op = a.conj().T @ a
        action += term.rate * (a @ rho @ a.conj().T - 0.5 * (norm_op @ rho + rho @ norm_op))
    return action


def heat_currents(system: OpenSystem, rho, freq_tol: float = DEFAULT_FREQ_TOL) -> np.ndarray:
    """Per-bath heat currents, positive when energy flows from the system into
    the bath.  At any stationary state the currents sum to zero."""
    state = require_density_matrix(rho)
    jumps = jump_operators(system, freq_tol)
    h = system.hamiltonian
    currents = []
    for bath_terms in jumps.terms:
        value = -complex(np.trace(_bath_dissipator_action(bath_terms, state) @ h))
        if abs(value.imag) > 1e-10:
            raise NumericalConsistencyError(
                f"heat current has imaginary residue {value.imag:.3e} above 1e-10"
            )
        currents.append(value.real)
    return np.array(currents)


def gibbs_state(hamiltonian, temperature: float) -> np.ndarray:
    """Thermal equilibrium state exp(-H/T)/Z, built from the eigendecomposition
    with the spectrum shifted for overflow safety."""
    if not temperature > 0:
        raise ValueError(f"gibbs_state needs temperature > 0, got {temperature}")
    eig = eigh(hamiltonian)
    weights = np.exp(-(eig.energies - eig.energies.min()) / temperature)
    weights /= weights.sum()
    rho = (eig.states * weights) @ eig.states.conj().T
    return hermitize(rho)
