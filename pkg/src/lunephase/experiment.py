"""Two-spin interferometry pipeline: preparation, conditional cycle, readout.

A thermal deviation state is reshaped into an effective pure state by a
bundled pulse-and-crusher program, mixed down to a chosen spin-b purity,
carried through a conditional cycle whose active branch drives spin b around
a closed two-geodesic loop, and read out through the spin-a coherence
relative to its pre-cycle value.  Two interchangeable cycle models are
provided: the literal pulse sequence and an idealized branch-controlled
holonomy.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np

from .conventions import DEFAULT_CONVENTIONS, Conventions
from .errors import ConventionError, DomainError
from .geometry import StatePath
from .phases import PhaseResult, signed_mixed_phase
from .policy import POLICY
from .pulse import (
    DEFAULT_J,
    Delay,
    FrameOffset,
    Gradient,
    Rotation,
    SequenceProgram,
    SpinSystemParams,
    apply_t2_relaxation,
    make_program,
    run_sequence,
)
from .pulseprog import parse_sequence
from .qcore import (
    DensityOperator,
    evolve,
    identity2,
    partial_trace,
    pauli_x,
    pauli_z,
    principal_angle,
    rotation_unitary,
    tensor,
)

MODELS = ("literal-sequence", "idealized-controlled-U")

# Purity ladder granularity: r = cos(n*pi/PURITY_STEPS) for n = 0..PURITY_STEPS-1.
PURITY_STEPS = 12

DEFAULT_THETAS = (math.pi / 8, math.pi / 4, 3 * math.pi / 8)


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid point of the interferometry experiment.

    theta sets the loop inclination (the traced lune spans solid angle
    4*theta), n indexes the purity ladder r = cos(n*pi/12), model selects the
    cycle implementation, relaxation optionally supplies transverse decay
    times (t2a, t2b) applied over the cycle duration, and conventions records
    the sign choices the pulse labels are interpreted under.
    """

    theta: float
    n: int
    model: str = "literal-sequence"
    relaxation: tuple[float, float] | None = None
    conventions: Conventions = DEFAULT_CONVENTIONS

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", float(self.theta))
        if not 0.0 <= self.theta <= math.pi / 2 + 1e-12:
            raise DomainError("inclination angle must lie in [0, pi/2]")
        if not isinstance(self.n, int) or not 0 <= self.n < PURITY_STEPS:
            raise DomainError(
                f"purity index must be an integer in [0, {PURITY_STEPS - 1}]"
            )
        if self.model not in MODELS:
            raise DomainError(f"unknown cycle model {self.model!r}")
        if self.relaxation is not None:
            t2a, t2b = self.relaxation
            if not (t2a > 0.0 and t2b > 0.0):
                raise DomainError("relaxation times must be positive")
            object.__setattr__(self, "relaxation", (float(t2a), float(t2b)))

    @property
    def omega(self) -> float:
        """Solid angle magnitude of the cycle loop."""
        return 4.0 * self.theta

    @property
    def purity(self) -> float:
        """Signed spin-b Bloch length cos(n*pi/12) after mixing."""
        return math.cos(self.n * math.pi / PURITY_STEPS)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one grid point.

    residual is the wrapped difference gamma_measured - gamma_theory; it and
    the phase fields are meaningful only when defined is true (an undefined
    row signals vanishing interference contrast, not an error).
    """

    config: ExperimentConfig
    gamma_measured: float
    visibility_measured: float
    gamma_theory: float
    visibility_theory: float
    residual: float
    defined: bool
    snapshots: tuple[tuple[float, DensityOperator], ...] | None = None

    def __post_init__(self) -> None:
        if self.defined:
            if not -math.pi < self.residual <= math.pi:
                raise DomainError("residual must be a principal angle")
        elif not math.isnan(self.residual):
            raise DomainError("undefined rows must carry a nan residual")


def thermal_state() -> DensityOperator:
    """High-temperature deviation of the two-spin system.

    Diagonal (2.5, -1.5, 1.5, -2.5): spin b enters with four times the
    z-polarization of spin a, reflecting their gyromagnetic ratio imbalance.
    The operator is traceless and flagged unnormalized.
    """
    dev = 0.5 * tensor(pauli_z, identity2) + 2.0 * tensor(identity2, pauli_z)
    return DensityOperator(dev, normalized=False)


def prepare_pure_program(params: SpinSystemParams | None = None) -> SequenceProgram:
    """Bundled pulse program reshaping the thermal deviation to effective purity.

    Runs on resonance; no frame directives.
    """
    text = (
        resources.files("lunephase")
        .joinpath("data", "prepare_pure.seq")
        .read_text(encoding="utf-8")
    )
    return parse_sequence(text, params)


def mixing_program(n: int, params: SpinSystemParams | None = None) -> SequenceProgram:
    """Purity-setting stage after the pure preparation.

    A partial spin-b rotation followed by a crusher shrinks its longitudinal
    polarization to cos(n*pi/12); the two final pulses turn both spins into
    the transverse plane where the interferometer operates.
    """
    if not isinstance(n, int) or not 0 <= n < PURITY_STEPS:
        raise DomainError(
            f"purity index must be an integer in [0, {PURITY_STEPS - 1}]"
        )
    events = (
        Rotation("b", "x", Fraction(n, PURITY_STEPS)),
        Gradient(),
        Rotation("a", "-y", Fraction(1, 2)),
        Rotation("b", "-y", Fraction(1, 2)),
    )
    return make_program(events, params)


def cycle_program(
    theta: float | Fraction, params: SpinSystemParams | None = None
) -> SequenceProgram:
    """Conditional-cycle pulse program at inclination theta.

    Two spin-b pulses about -x (flips theta and pi - 2*theta) bracket
    two 1/(2J) delays.  The spin-b frame is shifted by -piJ so the branch
    Hamiltonians become 0 and 2*pi*J*Iz: the passive branch idles while the
    active one precesses a half turn per delay.  A Fraction theta is read as
    an exact multiple of pi and renders as exact degrees.
    """
    if isinstance(theta, Fraction):
        if not 0 <= theta <= Fraction(1, 2):
            raise DomainError("inclination angle must lie in [0, pi/2]")
        first: float | Fraction = theta
        second: float | Fraction = 1 - 2 * theta
    else:
        theta = float(theta)
        if not 0.0 <= theta <= math.pi / 2 + 1e-12:
            raise DomainError("inclination angle must lie in [0, pi/2]")
        first = theta
        second = math.pi - 2.0 * theta
    events = (
        Rotation("b", "-x", first),
        Delay(per_j=Fraction(1, 2)),
        Rotation("b", "-x", second),
        Delay(per_j=Fraction(1, 2)),
    )
    return make_program(events, params, (FrameOffset("b", Fraction(-1, 2), "piJ"),))


def _deviation_direction(matrix: np.ndarray) -> np.ndarray:
    flat = np.asarray(matrix, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(flat))
    if norm < 1e-12:
        raise DomainError("deviation vanishes; no direction to compare")
    return flat / norm

def _require_direction(out: DensityOperator, target: np.ndarray, stage: str) -> None:
    # Positive proportionality required: directions, not lines.
    got = _deviation_direction(out.matrix)
    want = _deviation_direction(target)
    if float(np.linalg.norm(got - want)) > POLICY.direction_tol:
        raise ConventionError(
            f"{stage} missed its target state: the configured rotation sense "
            "or branch assignment is inconsistent with the pulse labels (see "
            "the sign-conventions section of the package documentation)"
        )

def _pure_target() -> np.ndarray:
    up = 0.5 * (identity2 + pauli_z)
    full = tensor(up, up)
    return full - np.trace(full).real / 4.0 * np.eye(4)

def _mixed_target(r_signed: float) -> np.ndarray:
    spin_a = 0.5 * (identity2 + pauli_x)
    spin_b = 0.5 * (identity2 + r_signed * pauli_x)
    full = tensor(spin_a, spin_b)
    return full - np.trace(full).real / 4.0 * np.eye(4)


def prepare_effective_pure(
    rho_thermal: DensityOperator, conventions: Conventions = DEFAULT_CONVENTIONS
) -> DensityOperator:
    """Run the bundled preparation program on the thermal deviation.

    Postcondition: the output deviation is positively proportional to the
    traceless part of the both-spins-up projector; a mismatch raises
    ConventionError since it can only come from inconsistent sign choices.
    """
    out, _ = run_sequence(
        rho_thermal,
        prepare_pure_program(),
        pulse_sense=conventions.pulse_sense,
        iz_sign=conventions.iz_sign,
    )
    _require_direction(out, _pure_target(), "effective-pure preparation")
    return out


def prepare_mixed(
    rho_pure: DensityOperator,
    n: int,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> DensityOperator:
    """Mix the effective pure state down to spin-b purity cos(n*pi/12).

    Postcondition: the output deviation points along the traceless part of
    (1 + sx_a)/2 tensor (1 + r*sx_b)/2 with r = cos(n*pi/12); both spins end
    along +x, spin b with shortened Bloch vector.
    """
    prog = mixing_program(n)
    out, _ = run_sequence(
        rho_pure,
        prog,
        pulse_sense=conventions.pulse_sense,
        iz_sign=conventions.iz_sign,
    )
    r_signed = math.cos(n * math.pi / PURITY_STEPS)
    _require_direction(out, _mixed_target(r_signed), "purity preparation")
    return out


def controlled_cycle(
    rho: DensityOperator,
    theta: float | Fraction,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> DensityOperator:
    """Apply the literal conditional-cycle pulse program to a two-spin state."""
    out, _ = run_sequence(
        rho,
        cycle_program(theta),
        pulse_sense=conventions.pulse_sense,
        iz_sign=conventions.iz_sign,
    )
    return out


def lune_axes(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotation axes of the two geodesic half turns at inclination theta.

    Both lie in the y-z plane at +-theta from +z; each half turn about one of
    them maps +x to -x (and back) along a great-circle arc.
    """
    theta = float(theta)
    if not 0.0 <= theta <= math.pi / 2 + 1e-12:
        raise DomainError("inclination angle must lie in [0, pi/2]")
    n1 = np.array([0.0, -math.sin(theta), math.cos(theta)])
    n2 = np.array([0.0, math.sin(theta), math.cos(theta)])
    return n1, n2


def lune_holonomy(theta: float, sense: int) -> np.ndarray:
    """Net spin-b unitary of the two-geodesic loop: exp(i*sense*2*theta*sx).

    At sense -1 the first half turn is about n2 (carrying +x through the
    lower vertex) and the second about -n1; at sense +1 the mirrored order.
    Both factorizations compose without any extra global phase.
    """
    n1, n2 = lune_axes(theta)
    if sense == -1:
        return rotation_unitary(-n1, math.pi) @ rotation_unitary(n2, math.pi)
    if sense == 1:
        return rotation_unitary(-n2, math.pi) @ rotation_unitary(n1, math.pi)
    raise DomainError("traversal sense must be +1 or -1")


def idealized_controlled_cycle(
    rho: DensityOperator,
    theta: float,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> DensityOperator:
    """Branch-controlled form of the cycle: identity on the passive spin-a
    branch, the lune holonomy on the active one.

    The loop traversal sense equals the pulse rotation sense; the branch
    assignment then fixes which interferometer arm carries it, so the
    observable phase matches the literal sequence under any convention set.
    """
    if rho.matrix.shape != (4, 4):
        raise DomainError("expected a two-spin state")
    u_loop = lune_holonomy(theta, conventions.pulse_sense)
    w = np.zeros((4, 4), dtype=complex)
    if conventions.active_branch_up:
        w[:2, :2] = u_loop
        w[2:, 2:] = identity2
    else:
        w[:2, :2] = identity2
        w[2:, 2:] = u_loop
    return evolve(rho, w)


def idealized_eigenvector_path(
    theta: float,
    eigen_sign: int = 1,
    conventions: Conventions = DEFAULT_CONVENTIONS,
    samples_per_segment: int = 2000,
    j_coupling: float = DEFAULT_J,
    perturb: float = 0.0,
) -> StatePath:
    """Active-branch spinor trajectory through the idealized loop.

    Starts from the +x (eigen_sign +1) or -x (eigen_sign -1) eigenvector and
    follows the two half turns at the physical rate (each lasting 1/(2J)),
    recording the instantaneous rotation generator at every sample.  perturb
    tilts each segment axis toward the loop vertex by that amount, a
    verification hook that breaks both the geodesic and parallel-transport
    properties.
    """
    if eigen_sign not in (-1, 1):
        raise DomainError("eigenvector label must be +1 or -1")
    if samples_per_segment < 2:
        raise DomainError("need at least two samples per segment")
    if j_coupling <= 0.0:
        raise DomainError("coupling must be positive")
    n1, n2 = lune_axes(theta)
    if conventions.pulse_sense == -1:
        axes = (n2, -n1)
    else:
        axes = (n1, -n2)
    vertex = np.array([1.0, 0.0, 0.0])
    if perturb != 0.0:
        tilted = []
        for axis in axes:
            v = axis + float(perturb) * vertex
            tilted.append(v / np.linalg.norm(v))
        axes = tuple(tilted)

    start = np.array([1.0, float(eigen_sign)], dtype=complex) / math.sqrt(2.0)
    seg_time = 1.0 / (2.0 * j_coupling)
    rate = 2.0 * math.pi * j_coupling  # half turn per segment at angle pi

    times: list[float] = []
    states: list[np.ndarray] = []
    generators: list[np.ndarray] = []
    m = samples_per_segment
    current = start
    for seg, axis in enumerate(axes):
        h = 0.5 * rate * _axis_sigma(axis)
        first = 0 if seg == 0 else 1
        for k in range(first, m + 1):
            u = rotation_unitary(axis, math.pi * k / m)
            times.append(seg * seg_time + seg_time * k / m)
            states.append(u @ current)
            generators.append(h)
        current = states[-1]
    return StatePath(
        np.array(times), np.array(states), np.array(generators)
    )


def _axis_sigma(axis: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [axis[2], axis[0] - 1j * axis[1]],
            [axis[0] + 1j * axis[1], -axis[2]],
        ],
        dtype=complex,
    )


def spin_a_coherence(rho: DensityOperator) -> complex:
    """Complex up-down coherence of the spin-a reduced state."""
    return complex(partial_trace(rho, "a").matrix[0, 1])


def readout_phase(rho_ab: DensityOperator, reference: complex) -> PhaseResult:
    """Interference readout relative to the pre-cycle coherence.

    The phase is the argument and the visibility the magnitude of the spin-a
    coherence ratioed against its reference value; a vanishing ratio yields
    an undefined result, a vanishing reference is a usage error.
    """
    ref = complex(reference)
    if abs(ref) < POLICY.visibility_floor:
        raise DomainError("reference coherence is zero; prepare the state first")
    c = spin_a_coherence(rho_ab)
    visibility = abs(c) / abs(ref)
    if visibility < POLICY.visibility_floor:
        return PhaseResult(0.0, visibility, False)
    ratio = c / ref
    return PhaseResult(
        principal_angle(math.atan2(ratio.imag, ratio.real)), visibility, True
    )


def run_single(
    config: ExperimentConfig, record_snapshots: bool = False
) -> RunRecord:
    """Execute one grid point end to end and compare against closed form.

    Pipeline: thermal deviation, effective-pure preparation, purity mixing,
    reference coherence capture, conditional cycle under the selected model,
    optional transverse relaxation over the cycle duration, phase readout.
    """
    conv = config.conventions
    rho = thermal_state()
    rho = prepare_effective_pure(rho, conv)
    rho = prepare_mixed(rho, config.n, conv)
    reference = spin_a_coherence(rho)

    snapshots: tuple[tuple[float, DensityOperator], ...] | None = None
    if config.model == "literal-sequence":
        prog = cycle_program(config.theta)
        out, trajectory = run_sequence(
            rho,
            prog,
            record=record_snapshots,
            pulse_sense=conv.pulse_sense,
            iz_sign=conv.iz_sign,
        )
        duration = float(prog.total_duration)
        if record_snapshots:
            snapshots = tuple(trajectory)
    else:
        out = idealized_controlled_cycle(rho, config.theta, conv)
        duration = 1.0 / DEFAULT_J
        if record_snapshots:
            snapshots = ((0.0, rho), (duration, out))

    if config.relaxation is not None:
        t2a, t2b = config.relaxation
        out = apply_t2_relaxation(out, duration, t2a, t2b)

    measured = readout_phase(out, reference)
    theory = signed_mixed_phase(config.purity, config.omega, conv.orientation)
    defined = measured.defined and theory.defined
    residual = (
        principal_angle(measured.gamma - theory.gamma) if defined else math.nan
    )
    return RunRecord(
        config=config,
        gamma_measured=measured.gamma,
        visibility_measured=measured.visibility,
        gamma_theory=theory.gamma,
        visibility_theory=theory.visibility,
        residual=residual,
        defined=defined,
        snapshots=snapshots,
    )


def run_sweep(
    thetas=DEFAULT_THETAS,
    n_values=range(PURITY_STEPS),
    model: str = "literal-sequence",
    relaxation: tuple[float, float] | None = None,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> list[RunRecord]:
    """Run the full grid, theta-major and purity-minor.

    Undefined-contrast rows are flagged in their records rather than raised;
    configuration problems surface before any simulation starts.
    """
    thetas = tuple(float(t) for t in thetas)
    ns = tuple(int(n) for n in n_values)
    if not thetas:
        raise DomainError("at least one inclination angle is required")
    if not ns:
        raise DomainError("at least one purity index is required")
    configs = [
        ExperimentConfig(theta, n, model, relaxation, conventions)
        for theta in thetas
        for n in ns
    ]
    return [run_single(config) for config in configs]


def sweep_summary(records: list[RunRecord]) -> dict:
    """Aggregate residual statistics over the defined rows of a sweep."""
    residuals = [abs(r.residual) for r in records if r.defined]
    rms = math.sqrt(sum(x * x for x in residuals) / len(residuals)) if residuals else 0.0
    return {
        "rows": len(records),
        "defined_rows": len(residuals),
        "max_abs_residual_rad": max(residuals) if residuals else 0.0,
        "rms_residual_rad": rms,
    }


SWEEP_COLUMNS = (
    "omega_rad",
    "theta_rad",
    "n",
    "r",
    "gamma_sim_rad",
    "gamma_theory_rad",
    "visibility_sim",
    "visibility_theory",
    "residual_rad",
    "defined",
)


def record_values(record: RunRecord) -> dict:
    """Flatten one record into the sweep schema; phase fields of undefined
    rows become None."""
    cfg = record.config
    defined = record.defined
    return {
        "omega_rad": cfg.omega,
        "theta_rad": cfg.theta,
        "n": cfg.n,
        "r": cfg.purity,
        "gamma_sim_rad": record.gamma_measured if defined else None,
        "gamma_theory_rad": record.gamma_theory if defined else None,
        "visibility_sim": record.visibility_measured,
        "visibility_theory": record.visibility_theory,
        "residual_rad": record.residual if defined else None,
        "defined": defined,
    }


def _csv_cell(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records: list[RunRecord]) -> str:
    """Render sweep records as deterministic CSV with a '#' summary footer."""
    lines = [",".join(SWEEP_COLUMNS)]
    for record in records:
        values = record_values(record)
        lines.append(",".join(_csv_cell(values[col]) for col in SWEEP_COLUMNS))
    summary = sweep_summary(records)
    lines.append(f"# max_abs_residual_rad = {repr(summary['max_abs_residual_rad'])}")
    lines.append(f"# rms_residual_rad = {repr(summary['rms_residual_rad'])}")
    return "\n".join(lines) + "\n"


def records_to_json(records: list[RunRecord]) -> str:
    """Render sweep records as deterministic JSON with a summary object."""
    payload = {
        "rows": [record_values(r) for r in records],
        "summary": sweep_summary(records),
    }
    return json.dumps(payload, indent=2) + "\n"
