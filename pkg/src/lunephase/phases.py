"""Closed-form interference phase of transported mixtures.

A mixed qubit state carried around a closed Bloch-sphere loop produces an
interference pattern whose phase shift and contrast are the argument and
modulus of the eigenvalue-weighted average of the eigenvector phase factors.
This module evaluates that average, its closed qubit reduction, and the
standard purity-ladder prediction table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .policy import POLICY
from .qcore import principal_angle


@dataclass(frozen=True)
class PhaseResult:
    """Interference phase in (-pi, pi], fringe visibility in [0, 1], and a
    flag marking whether the phase is defined (visibility above the floor
    where the argument of a near-zero complex number loses meaning)."""

    gamma: float
    visibility: float
    defined: bool

    def __post_init__(self) -> None:
        if not -math.pi < self.gamma <= math.pi:
            raise DomainError("gamma must lie in (-pi, pi]")
        if not 0.0 <= self.visibility <= 1.0 + 1e-12:
            raise DomainError("visibility must lie in [0, 1]")


def _from_complex(re: float, im: float) -> PhaseResult:
    v = math.hypot(re, im)
    if v < POLICY.visibility_floor:
        return PhaseResult(0.0, v, False)
    return PhaseResult(principal_angle(math.atan2(im, re)), v, True)


def sjoqvist_average(probabilities, phases) -> PhaseResult:
    """Weighted average of unit phase factors: v e^{i gamma} = sum p_n e^{i g_n}.

    The mixture's interference pattern shifts by the argument of the sum and
    its contrast drops to the modulus.
    """
    p = np.asarray(probabilities, dtype=float)
    g = np.asarray(phases, dtype=float)
    if p.ndim != 1 or p.shape != g.shape:
        raise DomainError("weights and phases must be 1-d and of equal length")
    if p.size == 0:
        raise DomainError("need at least one weighted branch")
    if np.any(p < 0):
        raise DomainError("weights must be nonnegative")
    if abs(float(np.sum(p)) - 1.0) > 1e-9:
        raise DomainError("weights must sum to 1")
    z = complex(np.sum(p * np.exp(1j * g)))
    return _from_complex(z.real, z.imag)


def qubit_mixed_phase(r: float, omega: float, sign: int = 1) -> PhaseResult:
    """Closed qubit form v e^{i gamma} = cos(omega/2) + i sign r sin(omega/2).

    r is the Bloch-vector length of the mixture and omega the signed solid
    angle bounded by its heavier eigenvector's loop; sign is the global
    orientation convention relating loop sense to phase sign. Equivalent to
    sjoqvist_average with weights (1+-r)/2 on phases +-sign*omega/2. For
    |omega| < pi the phase reduces to sign*arctan(r tan(omega/2)).
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError("purity must lie in [0, 1]")
    if sign not in (1, -1):
        raise DomainError("orientation sign must be +1 or -1")
    half = 0.5 * omega
    return _from_complex(math.cos(half), sign * r * math.sin(half))


def signed_mixed_phase(r: float, omega: float, sign: int = 1) -> PhaseResult:
    """qubit_mixed_phase extended to signed Bloch length r in [-1, 1].

    Negative r is the same mixture with its two eigenvector weights swapped
    (the Bloch vector points along the opposite axis), which flips the phase
    sign while leaving the visibility unchanged.
    """
    if not -1.0 <= r <= 1.0:
        raise DomainError("signed purity must lie in [-1, 1]")
    if r < 0:
        return qubit_mixed_phase(-r, omega, -sign)
    return qubit_mixed_phase(r, omega, sign)


def arctan_phase(r: float, omega: float, sign: int = 1) -> float:
    """Single-branch convenience form sign*arctan(r tan(omega/2)).

    Agrees with qubit_mixed_phase only on |omega| < pi; beyond that window
    the complex-argument form is the meaningful one (at omega = 2 pi it gives
    pi where the arctan form would report 0).
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError("purity must lie in [0, 1]")
    if sign not in (1, -1):
        raise DomainError("orientation sign must be +1 or -1")
    if not abs(omega) < math.pi:
        raise DomainError("arctan form is valid only for |omega| < pi")
    return sign * math.atan(r * math.tan(0.5 * omega))


@dataclass(frozen=True)
class TheoryRow:
    """One prediction-table row; flipped marks purities entering as negative
    cosines, reported with r = |cos| and the phase sign inverted."""

    n: int
    r: float
    gamma: float
    visibility: float
    defined: bool
    flipped: bool


def theory_curve(omega: float, n_max: int = 12, sign: int = 1) -> list[TheoryRow]:
    """Prediction table over the purity ladder r = cos(n pi/12), n = 0..n_max-1."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    rows = []
    for n in range(n_max):
        c = math.cos(n * math.pi / 12.0)
        res = signed_mixed_phase(c, omega, sign)
        rows.append(
            TheoryRow(n, abs(c), res.gamma, res.visibility, res.defined, c < 0)
        )
    return rows
