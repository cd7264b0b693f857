"""Bloch-sphere paths and discrete holonomy analysis.

Sign conventions used throughout: solid angles are positive for loops that
run counterclockwise when viewed from outside the sphere, and the discrete
geometric phase of a closed state path is gamma = -arg of the overlap
product, which tends to -Omega/2 for spin-1/2 as sampling densifies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .policy import POLICY
from .pulse import Delay, Gradient, Rotation, SequenceProgram
from .qcore import identity2, pauli_x, pauli_y, pauli_z, principal_angle

_X_AXIS = np.array([1.0, 0.0, 0.0])


def _read_only(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BlochPath:
    """Sampled curve of unit Bloch vectors; times may be any monotone
    parameter (seconds for traced trajectories, arc length for synthetic
    loops)."""

    times: np.ndarray
    points: np.ndarray
    closed: bool = False

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or len(times) != len(points):
            raise DomainError("path needs matching (N,) times and (N,3) points")
        if len(points) < 1:
            raise DomainError("path must contain at least one sample")
        if np.any(np.diff(times) < 0):
            raise DomainError("sample times must be nondecreasing")
        norms = np.linalg.norm(points, axis=1)
        if np.max(np.abs(norms - 1.0)) > POLICY.path_unit_tol:
            raise DomainError("path points must be unit vectors")
        if self.closed and np.linalg.norm(points[0] - points[-1]) > POLICY.path_closure_tol:
            raise DomainError("closed path endpoints do not coincide")
        object.__setattr__(self, "times", _read_only(times))
        object.__setattr__(self, "points", _read_only(points))

    def __len__(self) -> int:
        return len(self.points)

    def reversed(self) -> "BlochPath":
        t = self.times
        return BlochPath(t[0] + (t[-1] - t[::-1]), self.points[::-1], self.closed)

    def arc_length(self) -> float:
        """Sum of great-circle segment lengths (chord form, precise for
        short segments where acos would lose digits)."""
        chords = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return float(np.sum(2.0 * np.arcsin(np.clip(chords / 2.0, 0.0, 1.0))))


@dataclass(frozen=True)
class LuneSpec:
    """Lune of inclination theta: vertices on +-vertex_axis, enclosed area
    4*theta."""

    theta: float
    vertex_axis: np.ndarray = _X_AXIS

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi / 2:
            raise DomainError("inclination angle must lie in [0, pi/2]")
        axis = np.asarray(self.vertex_axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > POLICY.axis_unit_tol:
            raise DomainError("vertex_axis must be a unit 3-vector")
        object.__setattr__(self, "vertex_axis", _read_only(axis))


@dataclass(frozen=True)
class StatePath:
    """Sampled pure-qubit trajectory, optionally with the instantaneous
    Hamiltonian at each sample (needed for the dynamical phase)."""

    times: np.ndarray
    states: np.ndarray
    generators: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 2 or states.shape[1] != 2 or len(times) != len(states):
            raise DomainError("state path needs matching (N,) times and (N,2) states")
        if len(states) < 1:
            raise DomainError("state path must contain at least one sample")
        if np.any(np.diff(times) < 0):
            raise DomainError("sample times must be nondecreasing")
        norms = np.linalg.norm(states, axis=1)
        if np.max(np.abs(norms - 1.0)) > POLICY.state_norm_tol:
            raise DomainError("states must be normalized")
        overlaps = np.abs(np.sum(states[:-1].conj() * states[1:], axis=1))
        if len(overlaps) and np.min(overlaps) <= POLICY.overlap_floor:
            raise DomainError(
                "consecutive samples nearly antipodal; refine the sampling density"
            )
        generators = self.generators
        if generators is not None:
            generators = np.asarray(generators, dtype=complex)
            if generators.shape != (len(states), 2, 2):
                raise DomainError("generators must be one 2x2 operator per sample")
            generators = _read_only(generators)
        object.__setattr__(self, "times", _read_only(times))
        object.__setattr__(self, "states", _read_only(states))
        object.__setattr__(self, "generators", generators)

    def __len__(self) -> int:
        return len(self.states)

    def bloch_points(self) -> np.ndarray:
        s = self.states
        x = 2.0 * np.real(s[:, 0].conj() * s[:, 1])
        y = 2.0 * np.imag(s[:, 0].conj() * s[:, 1])
        z = np.abs(s[:, 0]) ** 2 - np.abs(s[:, 1]) ** 2
        return np.column_stack([x, y, z])

    def to_bloch_path(self) -> BlochPath:
        pts = self.bloch_points()
        closed = bool(np.linalg.norm(pts[0] - pts[-1]) <= POLICY.path_closure_tol)
        return BlochPath(self.times, pts, closed)


def _rotate_about(axis: np.ndarray, angle: float, v: np.ndarray) -> np.ndarray:
    axis = axis / np.linalg.norm(axis)
    return (
        v * math.cos(angle)
        + np.cross(axis, v) * math.sin(angle)
        + axis * np.dot(axis, v) * (1.0 - math.cos(angle))
    )


def _frame_rotation(target: np.ndarray) -> np.ndarray:
    """Rotation matrix carrying x-hat onto target (identity when equal)."""
    c = float(np.dot(_X_AXIS, target))
    cross = np.cross(_X_AXIS, target)
    s = float(np.linalg.norm(cross))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        return np.diag([-1.0, -1.0, 1.0])  # half turn about z
    axis = cross / s
    angle = math.atan2(s, c)
    k = np.array(
        [[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]
    )
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def lune_path(spec: LuneSpec, n_samples: int) -> BlochPath:
    """Closed loop A -> B -> C -> D -> A around a lune of inclination theta.

    A = vertex_axis, C = -A. Segment ABC rotates A by pi about
    n1 = (0, -sin t, cos t) through B = (0, cos t, sin t); segment CDA rotates
    C by pi about -n2, n2 = (0, sin t, cos t), through D = (0, cos t, -sin t).
    Times hold the arc-length parameter, total 2*pi. This sample order has
    signed solid angle -4*theta; its reversal bounds +4*theta.
    """
    if n_samples < 8:
        raise DomainError("lune sampling needs at least 8 points")
    t = spec.theta
    a = _X_AXIS
    c = -a
    n1 = np.array([0.0, -math.sin(t), math.cos(t)])
    n2 = np.array([0.0, math.sin(t), math.cos(t)])
    half = n_samples // 2
    phis = np.linspace(0.0, math.pi, half + 1)
    seg1 = np.array([_rotate_about(n1, phi, a) for phi in phis])
    seg2 = np.array([_rotate_about(-n2, phi, c) for phi in phis])
    points = np.vstack([seg1[:-1], seg2])
    points[-1] = points[0]  # closes exactly; roundoff drift is well below tol
    times = np.concatenate([phis[:-1], math.pi + phis])
    if not np.allclose(spec.vertex_axis, _X_AXIS):
        points = points @ _frame_rotation(np.asarray(spec.vertex_axis)).T
        norms = np.linalg.norm(points, axis=1)
        points = points / norms[:, None]
    return BlochPath(times, points, closed=True)


_FALLBACK_FAN_POINTS = [
    (1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0),
    (0.0, 0.0, 1.0), (0.0, 0.0, -1.0),
    (1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0),
]


def _fan_point(points: np.ndarray) -> np.ndarray:
    candidates = []
    centroid = points.mean(axis=0)
    if np.linalg.norm(centroid) > 1e-12:
        candidates.append(centroid / np.linalg.norm(centroid))
    candidates.extend(np.array(c) / np.linalg.norm(c) for c in _FALLBACK_FAN_POINTS)
    for cand in candidates:
        # reject fan points nearly antipodal to any sample: the triangle
        # excess degenerates there
        if np.min(np.linalg.norm(points + cand, axis=1)) > POLICY.antipode_guard:
            return cand
    raise DomainError("could not find a stable fan point for this loop")


def solid_angle(path: BlochPath) -> float:
    """Signed spherical area enclosed by a closed loop, in (-2pi, 2pi]
    modulo 4pi; counterclockwise seen from outside is positive.

    Triangle fan from an interior direction with the van Oosterom-Strackee
    excess formula per triangle; exact (to roundoff) for piecewise-geodesic
    loops, second-order accurate in sample count for smooth ones.
    """
    if not path.closed:
        raise DomainError("solid angle requires a closed path")
    points = path.points
    if np.max(np.linalg.norm(points - points[0], axis=1)) <= 1e-9:
        return 0.0
    if np.linalg.norm(points[0] - points[-1]) <= POLICY.path_closure_tol:
        points = points[:-1]
    fan = _fan_point(points)
    p = points
    q = np.roll(points, -1, axis=0)
    numer = np.einsum("i,ji->j", fan, np.cross(p, q))
    denom = 1.0 + p @ fan + np.sum(p * q, axis=1) + q @ fan
    total = 2.0 * float(np.sum(np.arctan2(numer, denom)))
    wrapped = math.remainder(total, 4.0 * math.pi)
    if wrapped <= -2.0 * math.pi:
        wrapped += 4.0 * math.pi
    return wrapped


def pancharatnam_phase(path: StatePath) -> float:
    """Discrete geometric phase -arg prod <psi_k|psi_k+1>, closing overlap
    included; gauge-invariant and defined for projectively closed paths."""
    states = path.states
    closing = np.vdot(states[-1], states[0])
    if abs(abs(np.vdot(states[0], states[-1])) - 1.0) > 1e-9:
        raise DomainError("path is not closed up to phase")
    if abs(closing) <= POLICY.overlap_floor:
        raise DomainError("closing overlap too small; refine the sampling density")
    overlaps = np.sum(states[:-1].conj() * states[1:], axis=1)
    # sum of arguments rather than product of overlaps: immune to magnitude
    # underflow on long paths, identical modulo 2pi
    total = float(np.sum(np.angle(overlaps))) + float(np.angle(closing))
    return principal_angle(-total)


def dynamical_phase(path: StatePath) -> float:
    """-integral of <psi|H|psi> dt by trapezoidal quadrature."""
    if path.generators is None:
        raise DomainError("dynamical phase requires generator samples")
    energies = np.real(np.einsum("ki,kij,kj->k", path.states.conj(),
                                 path.generators, path.states))
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return -float(trapezoid(energies, path.times))


def check_geodesic(path: BlochPath) -> float:
    """Max distance of samples from the best-fit plane through the origin;
    a segment is geodesic when this is ~0 (<= 1e-6 by convention)."""
    points = path.points
    if len(points) < 3:
        raise DomainError("geodesic check needs at least 3 samples")
    _, _, vt = np.linalg.svd(points, full_matrices=True)
    normal = vt[-1]
    return float(np.max(np.abs(points @ normal)))


def scaled_trajectory(path: BlochPath, r: float) -> np.ndarray:
    """Bloch trajectory of the mixed state riding the unit path: the same
    curve scaled to radius r. Plain array, not a BlochPath (non-unit)."""
    if not 0.0 <= r <= 1.0:
        raise DomainError("purity must lie in [0, 1]")
    return r * path.points


_PAULI = (pauli_x, pauli_y, pauli_z)


def trace_eigenvector_path(
    prog: SequenceProgram,
    branch: str,
    initial: np.ndarray,
    pulse_sense: int = 1,
    iz_sign: int = 1,
    samples_per_delay: int = 64,
    samples_per_pulse: int = 32,
) -> StatePath:
    """Literal spin-b trajectory along one spin-a branch of a program.

    branch is 'up' or 'down' (spin-a Zeeman state). Pulses are swept at
    constant time (instantaneous, zero quadrature weight); delays evolve
    under the branch Hamiltonian
    H = delta_b Iz + 2piJ m_a Iz + delta_a m_a, which is recorded per sample
    for dynamical-phase analysis. Programs with a-spin pulses or gradients
    do not preserve a branch and are rejected.
    """
    if branch not in ("up", "down"):
        raise DomainError("branch must be 'up' or 'down'")
    if pulse_sense not in (1, -1) or iz_sign not in (1, -1):
        raise DomainError("pulse_sense and iz_sign must be +1 or -1")
    psi = np.asarray(initial, dtype=complex).reshape(2)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > POLICY.state_norm_tol:
        raise DomainError("initial state must be normalized")
    psi = psi / norm

    params = prog.params
    m_a = (0.5 if branch == "up" else -0.5) * iz_sign
    iz = iz_sign * 0.5 * pauli_z
    h_delay = (
        params.delta_b * iz
        + 2.0 * math.pi * params.j_coupling * m_a * iz
        + params.delta_a * m_a * identity2
    )
    energies = np.real(np.diag(h_delay))  # diagonal by construction

    times = [0.0]
    states = [psi]
    generators = [h_delay]
    t = 0.0
    for ev in prog.events:
        if isinstance(ev, Gradient):
            raise DomainError("crusher gradients do not preserve a pure branch state")
        if isinstance(ev, Rotation):
            if ev.spin != "b":
                raise DomainError("a-spin pulses mix the branches; cannot trace")
            n = ev.axis_vector()
            h_dir = 0.5 * (n[0] * _PAULI[0] + n[1] * _PAULI[1] + n[2] * _PAULI[2])
            step_angle = pulse_sense * ev.flip_radians / samples_per_pulse
            half = step_angle / 2.0
            u = math.cos(half) * identity2 - 1j * math.sin(half) * 2.0 * h_dir
            for _ in range(samples_per_pulse):
                psi = u @ psi
                times.append(t)
                states.append(psi)
                # impulsive generator: direction only, zero time weight
                generators.append(h_dir)
        elif isinstance(ev, Delay):
            dt = ev.duration(params.j_coupling)
            step = dt / samples_per_delay
            u = np.diag(np.exp(-1j * energies * step))
            for i in range(1, samples_per_delay + 1):
                psi = u @ psi
                times.append(t + dt * i / samples_per_delay)
                states.append(psi)
                generators.append(h_delay)
            t += dt
        else:
            raise DomainError(f"unknown event type {type(ev).__name__}")
    return StatePath(np.array(times), np.array(states), np.array(generators))
