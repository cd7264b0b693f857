"""Propagators for hard pulses, scalar-coupled free evolution, and crushers.

Everything is computed in the doubly rotating frame: only the per-spin offsets
delta = omega - omega_frame enter the free-evolution phases, never the Larmor
frequencies themselves. Pulses are instantaneous (no J evolution during a
pulse); delays are diagonal in the Zeeman product basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .policy import POLICY
from .qcore import DensityOperator, evolve, identity2, rotation_unitary, tensor

DEFAULT_J = 214.5

AXIS_LABELS = {
    "x": (1.0, 0.0, 0.0),
    "-x": (-1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "-y": (0.0, -1.0, 0.0),
}

# m_z eigenvalue pattern (in units of the +-1/2 quantum numbers, before the
# I_z sign convention is applied) for basis order |uu>, |ud>, |du>, |dd>
_MA = np.array([0.5, 0.5, -0.5, -0.5])
_MB = np.array([0.5, -0.5, 0.5, -0.5])


@dataclass(frozen=True)
class SpinSystemParams:
    """Two-spin rotating-frame parameters; frequencies in rad/s, J in Hz.

    Frequencies are stored relative to a per-spin carrier (defaults put both
    spins on their carriers). Absolute Larmor values never enter a
    rotating-frame propagator, and carrying them around at 1e8 rad/s scale
    would only round the offsets they are subtracted into.
    """

    omega_a: float = 0.0
    omega_b: float = 0.0
    omega_a_frame: float = 0.0
    omega_b_frame: float = 0.0
    j_coupling: float = DEFAULT_J

    def __post_init__(self) -> None:
        if not self.j_coupling > 0:
            raise DomainError("J coupling must be positive")
        bound = 10 * 2 * math.pi * self.j_coupling
        if abs(self.delta_a) > bound or abs(self.delta_b) > bound:
            raise DomainError("frame offset exceeds the 10*2piJ sanity bound")

    @property
    def delta_a(self) -> float:
        return self.omega_a - self.omega_a_frame

    @property
    def delta_b(self) -> float:
        return self.omega_b - self.omega_b_frame

    def with_frame_shift(self, spin: str, shift: float) -> "SpinSystemParams":
        """New params with the frame frequency of one spin moved by shift rad/s."""
        if spin == "a":
            return replace(self, omega_a_frame=self.omega_a + shift)
        if spin == "b":
            return replace(self, omega_b_frame=self.omega_b + shift)
        raise DomainError(f"unknown spin label {spin!r}")


def _flip_radians(flip: Fraction | float) -> float:
    return float(flip) * math.pi if isinstance(flip, Fraction) else float(flip)


@dataclass(frozen=True)
class Rotation:
    """Hard pulse on one spin about a transverse axis.

    axis is one of the labels 'x', '-x', 'y', '-y' or a transverse phase angle
    in radians. flip is the nominal rotation angle: a Fraction means an exact
    multiple of pi (kept exact for bit-stable rendering), a float is radians.
    """

    spin: str
    axis: str | float
    flip: Fraction | float

    def __post_init__(self) -> None:
        if self.spin not in ("a", "b"):
            raise DomainError(f"unknown spin label {self.spin!r}")
        if isinstance(self.axis, str) and self.axis not in AXIS_LABELS:
            raise DomainError(f"unknown axis label {self.axis!r}")
        angle = self.flip_radians
        if not -2 * math.pi < angle <= 2 * math.pi:
            raise DomainError("flip angle must lie in (-2pi, 2pi]")

    @property
    def flip_radians(self) -> float:
        return _flip_radians(self.flip)

    def axis_vector(self) -> np.ndarray:
        if isinstance(self.axis, str):
            return np.array(AXIS_LABELS[self.axis])
        phi = float(self.axis)
        return np.array([math.cos(phi), math.sin(phi), 0.0])


@dataclass(frozen=True)
class Delay:
    """Free-evolution interval; exactly one of seconds / per_j is set.

    per_j keeps durations given as k/J as exact rationals so programs built
    from 1/(2J) blocks sum to exact multiples of 1/J.
    """

    seconds: float | None = None
    per_j: Fraction | None = None

    def __post_init__(self) -> None:
        if (self.seconds is None) == (self.per_j is None):
            raise DomainError("delay needs exactly one of seconds or per_j")
        if self.seconds is not None and self.seconds < 0:
            raise DomainError("delay duration must be nonnegative")
        if self.per_j is not None and self.per_j < 0:
            raise DomainError("delay duration must be nonnegative")

    def duration(self, j: float) -> float:
        if self.per_j is not None:
            return float(self.per_j) / j
        return float(self.seconds)


@dataclass(frozen=True)
class Gradient:
    """Crusher gradient; only the z axis is modeled."""

    axis: str = "z"

    def __post_init__(self) -> None:
        if self.axis != "z":
            raise DomainError("only z crusher gradients are supported")


PulseEvent = Rotation | Delay | Gradient


@dataclass(frozen=True)
class FrameOffset:
    """Frame directive: move one spin's frame frequency by value in the given
    unit ('piJ' = multiples of 2piJ rad/s, so -0.5piJ shifts by -piJ; 'Hz')."""

    spin: str
    value: Fraction | float
    unit: str

    def __post_init__(self) -> None:
        if self.spin not in ("a", "b"):
            raise DomainError(f"unknown spin label {self.spin!r}")
        if self.unit not in ("piJ", "Hz"):
            raise DomainError(f"unknown frame offset unit {self.unit!r}")

    def angular(self, j: float) -> float:
        if self.unit == "piJ":
            return float(self.value) * 2 * math.pi * j
        return 2 * math.pi * float(self.value)


@dataclass(frozen=True)
class SequenceProgram:
    """Ordered pulse-program events plus the frame they execute in."""

    events: tuple[PulseEvent, ...]
    params: SpinSystemParams
    frames: tuple[FrameOffset, ...] = ()

    @property
    def total_duration(self) -> float:
        """Sum of delay durations in seconds; k/J delays summed exactly."""
        per_j = Fraction(0)
        seconds = 0.0
        for ev in self.events:
            if isinstance(ev, Delay):
                if ev.per_j is not None:
                    per_j += ev.per_j
                else:
                    seconds += ev.seconds
        return float(per_j) / self.params.j_coupling + seconds


def make_program(
    events,
    params: SpinSystemParams | None = None,
    frames: tuple[FrameOffset, ...] = (),
) -> SequenceProgram:
    """Assemble a program, applying frame directives to the base parameters."""
    params = params if params is not None else SpinSystemParams()
    for fr in frames:
        params = params.with_frame_shift(fr.spin, fr.angular(params.j_coupling))
    return SequenceProgram(tuple(events), params, tuple(frames))


def free_evolution_unitary(
    params: SpinSystemParams, t: float, iz_sign: int = 1
) -> np.ndarray:
    """Diagonal propagator exp(-i H t) of the rotating-frame Hamiltonian
    H = delta_a I_z^a + delta_b I_z^b + 2piJ I_z^a I_z^b.

    iz_sign = +-1 selects which Zeeman label carries m = +1/2; the J term is
    invariant under the flip, the offset terms change sign with it.
    """
    if t < 0:
        raise DomainError("evolution time must be nonnegative")
    if iz_sign not in (1, -1):
        raise DomainError("iz_sign must be +1 or -1")
    ma, mb = iz_sign * _MA, iz_sign * _MB
    phases = -(
        params.delta_a * ma + params.delta_b * mb
        + 2 * math.pi * params.j_coupling * ma * mb
    ) * t
    return np.diag(np.exp(1j * phases))


def pulse_unitary(params: SpinSystemParams, ev: Rotation, sense: int = 1) -> np.ndarray:
    """Two-spin propagator of a hard pulse.

    sense = +-1 fixes how a pulse label (axis, flip) maps onto a physical
    rotation: the realized unitary is exp(-i sense*flip axis.sigma/2) on the
    target spin. sense=+1 reproduces rotation_unitary verbatim.
    """
    if sense not in (1, -1):
        raise DomainError("pulse sense must be +1 or -1")
    u = rotation_unitary(ev.axis_vector(), sense * ev.flip_radians)
    if ev.spin == "a":
        return tensor(u, identity2)
    return tensor(identity2, u)


def gradient_crusher(rho: DensityOperator) -> DensityOperator:
    """Project onto the Zeeman-diagonal part (ideal z-crusher on a
    heteronuclear pair: every nonzero coherence order dephases)."""
    if rho.dim != 4:
        raise DomainError("crusher model is defined for the two-spin system")
    return DensityOperator(np.diag(np.diag(rho.matrix)), normalized=rho.normalized)


def apply_t2_relaxation(
    rho: DensityOperator, t: float, t2a: float, t2b: float
) -> DensityOperator:
    """Phenomenological transverse dephasing: coherence between basis states
    decays as exp(-|dm_a| t/T2a) exp(-|dm_b| t/T2b); populations untouched."""
    if rho.dim != 4:
        raise DomainError("relaxation model is defined for the two-spin system")
    if t < 0:
        raise DomainError("relaxation time must be nonnegative")
    if not (t2a > 0 and t2b > 0):
        raise DomainError("T2 constants must be positive")
    dma = np.abs(_MA[:, None] - _MA[None, :])
    dmb = np.abs(_MB[:, None] - _MB[None, :])
    factors = np.exp(-dma * (t / t2a)) * np.exp(-dmb * (t / t2b))
    return DensityOperator(rho.matrix * factors, normalized=rho.normalized)


def event_unitary(
    prog: SequenceProgram, ev: Rotation | Delay, pulse_sense: int = 1, iz_sign: int = 1
) -> np.ndarray:
    if isinstance(ev, Rotation):
        return pulse_unitary(prog.params, ev, sense=pulse_sense)
    return free_evolution_unitary(prog.params, ev.duration(prog.params.j_coupling), iz_sign)


def run_sequence(
    rho0: DensityOperator,
    prog: SequenceProgram,
    record: bool = False,
    samples_per_delay: int = 64,
    pulse_sense: int = 1,
    iz_sign: int = 1,
) -> tuple[DensityOperator, list[tuple[float, DensityOperator]]]:
    """Execute a program left to right.

    Returns the final state and a (time, state) trajectory. The final state
    always comes from unsubdivided closed-form delay propagators; with
    record=True each delay is additionally sampled samples_per_delay times for
    path tracing, which never feeds back into the final state.
    """
    if rho0.dim != 4:
        raise DomainError("sequences act on the two-spin system")
    if record and samples_per_delay < 1:
        raise DomainError("samples_per_delay must be at least 1")
    j = prog.params.j_coupling
    t = 0.0
    rho = rho0
    trajectory: list[tuple[float, DensityOperator]] = [(0.0, rho0)]
    rho_samp = rho0
    for ev in prog.events:
        if isinstance(ev, Gradient):
            rho = gradient_crusher(rho)
            if record:
                rho_samp = gradient_crusher(rho_samp)
                trajectory.append((t, rho_samp))
            else:
                trajectory.append((t, rho))
        elif isinstance(ev, Rotation):
            u = pulse_unitary(prog.params, ev, sense=pulse_sense)
            rho = evolve(rho, u)
            if record:
                rho_samp = evolve(rho_samp, u)
                trajectory.append((t, rho_samp))
            else:
                trajectory.append((t, rho))
        elif isinstance(ev, Delay):
            dt = ev.duration(j)
            rho = evolve(rho, free_evolution_unitary(prog.params, dt, iz_sign))
            if record:
                step = free_evolution_unitary(prog.params, dt / samples_per_delay, iz_sign)
                for i in range(1, samples_per_delay + 1):
                    rho_samp = evolve(rho_samp, step)
                    trajectory.append((t + dt * i / samples_per_delay, rho_samp))
            else:
                trajectory.append((t + dt, rho))
            t += dt
        else:
            raise DomainError(f"unknown event type {type(ev).__name__}")
    return rho, trajectory


def branch_propagators(
    prog: SequenceProgram, pulse_sense: int = 1, iz_sign: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Spin-b propagators conditioned on the spin-a Zeeman state.

    Valid only for programs containing b-spin pulses and delays (anything that
    mixes the spin-a blocks is rejected). Returns (U when a is up, U when a is
    down) as 2x2 blocks of the full propagator.
    """
    u = np.eye(4, dtype=complex)
    for ev in prog.events:
        if isinstance(ev, Gradient):
            raise DomainError("branch propagators are unitary; crushers not allowed")
        if isinstance(ev, Rotation) and ev.spin != "b":
            raise DomainError("branch propagators require b-spin pulses only")
        u = event_unitary(prog, ev, pulse_sense, iz_sign) @ u
    if np.max(np.abs(u[:2, 2:])) > 1e-12 or np.max(np.abs(u[2:, :2])) > 1e-12:
        raise DomainError("propagator does not preserve the spin-a branches")
    return u[:2, :2].copy(), u[2:, 2:].copy()
