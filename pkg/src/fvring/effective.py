"""Closed-form perturbation theory in the 5-state symmetric subspace
{vacuum, S1, S2, S2', S3} around the size-3 bubble resonance, and the
resulting effective two-level model with its sqrt(L)-enhanced coupling.

All coefficients are rational functions of the longitudinal field h with poles
at h in {-2, 0, 1, 2}; evaluation near a pole raises PoleError.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import PoleError

POLE_GUARD = 1e-6
_POLES = (-2.0, 0.0, 1.0, 2.0)


def _guard_poles(h):
    for p in _POLES:
        if abs(h - p) < POLE_GUARD:
            raise PoleError(
                f"h={h} within {POLE_GUARD} of the pole at h={p}", denominator=h - p
            )


def projected_h0(L, h):
    """Diagonal of the field-only Hamiltonian in the 5-state basis."""
    if L < 7:
        raise ValueError("the 5-state basis requires L >= 7")
    return np.diag(
        [
            -L + L * h,
            4.0 - L + (L - 2) * h,
            4.0 - L + (L - 4) * h,
            8.0 - L + (L - 4) * h,
            4.0 - L + (L - 6) * h,
        ]
    )


def projected_h1(L, g):
    """Transverse-field coupling matrix in the 5-state basis."""
    if L < 7:
        raise ValueError("the 5-state basis requires L >= 7")
    s = np.sqrt(L)
    pattern = np.array(
        [
            [0, s, 0, 0, 0],
            [s, 0, 2, 2, 0],
            [0, 2, 0, 0, 2],
            [0, 2, 0, 0, 1],
            [0, 0, 2, 1, 0],
        ],
        dtype=np.float64,
    )
    return -g * pattern


def swt_generators(L, h, g):
    """First- and second-order anti-Hermitian generators (S1, S2) removing the
    off-block couplings between the degenerate {vacuum, S3} block and the rest."""
    _guard_poles(h)
    s = np.sqrt(L)
    s1 = -g * np.array(
        [
            [0, s / (2 * (h - 2)), 0, 0, 0],
            [-s / (2 * h - 4), 0, 1 / h, 1 / (h - 2), 0],
            [0, -1 / h, 0, 0, 1 / h],
            [0, -1 / (h - 2), 0, 0, 1 / (2 * (h + 2))],
            [0, 0, -1 / h, -1 / (2 * h + 4), 0],
        ]
    )
    q16 = 16 * h**2 - 48 * h + 32
    q64 = 64 * h**2 - 256
    q4 = 4 * h**2 - 16
    s2 = g**2 * np.array(
        [
            [0, 0, 4 * s / (h * q16), 0, 0],
            [0, 0, 0, 0, 2 / (h * q4)],
            [-4 * s / (h * q16), 0, 0, (16 * h**2 + 48 * h - 32) / (h * q64), 0],
            [0, 0, (-16 * h**2 - 48 * h + 32) / (h * q64), 0, 0],
            [0, -2 / (h * q4), 0, 0, 0],
        ]
    )
    return s1, s2


def kappa(h):
    """Coupling coefficient of the third-order effective Rabi term;
    equals 81/64 at the size-3 resonance h = 2/3."""
    _guard_poles(h)
    num = h * (9 * h - 10) - 8
    den = 12 * (h - 2) ** 2 * h**2 * (h**2 + h - 2)
    return num / den


def self_energy_shift(L, h, g):
    """Second-order self-energy mismatch Delta of the vacuum state."""
    _guard_poles(h)
    return g**2 * (L / (2 * h - 4) + (5 * h + 8) / (2 * h * (h + 2)))


def base_offset(L, h, g):
    """Scalar offset E0 pulled out of the effective two-level matrix."""
    _guard_poles(h)
    return -(g**2) * (5 * h + 8) / (2 * h * (h + 2)) + L * (h - 1)


@dataclass(frozen=True)
class EffectiveTwoLevel:
    """Effective 2x2 model: offset e0, self-energy delta, Rabi coupling, and
    the bare detuning diag2 = 4 - 6h of the bubble state."""

    L: int
    h: float
    g: float
    e0: float
    delta: float
    coupling: float
    diag2: float
    legacy: bool = False

    def matrix(self):
        """The full 2x2 matrix including the scalar offset."""
        return self.e0 * np.eye(2) + np.array(
            [[self.delta, self.coupling], [self.coupling, self.diag2]]
        )

    def eigen_gap(self):
        """Eigenvalue splitting of the full 2x2 matrix."""
        return float(np.hypot(self.delta - self.diag2, 2.0 * self.coupling))

    def to_json(self):
        return {
            "L": self.L,
            "h": self.h,
            "g": self.g,
            "e0": self.e0,
            "delta": self.delta,
            "coupling": self.coupling,
            "diag2": self.diag2,
            "matrix": [list(row) for row in self.matrix()],
            "eigen_gap": self.eigen_gap(),
            "legacy": self.legacy,
        }


def effective_two_level(L, h, g, legacy=False):
    """Effective two-level model near the size-3 bubble resonance.

    ``legacy=True`` reproduces the earlier single-site treatment: no
    self-energy shift and no sqrt(L) enhancement of the coupling.
    """
    _guard_poles(h)
    k = kappa(h)
    if legacy:
        return EffectiveTwoLevel(
            L=L, h=h, g=g, e0=L * (h - 1.0), delta=0.0,
            coupling=-k * g**3, diag2=4.0 - 6.0 * h, legacy=True,
        )
    return EffectiveTwoLevel(
        L=L, h=h, g=g,
        e0=base_offset(L, h, g),
        delta=self_energy_shift(L, h, g),
        coupling=-k * np.sqrt(L) * g**3,
        diag2=4.0 - 6.0 * h,
    )


def predicted_period(L, h, g, legacy=False):
    """Oscillation period from the effective model.

    Uses the gap 2*pi/sqrt(detuning^2 + 4*coupling^2) with the bare detuning
    4 - 6h of the unperturbed levels, which reduces to the resonant value
    pi/(kappa*sqrt(L)*g^3) exactly at h = 2/3. The full-matrix gap including
    the self-energy shift is available via EffectiveTwoLevel.eigen_gap().
    """
    two = effective_two_level(L, h, g, legacy=legacy)
    gap = np.hypot(two.diag2, 2.0 * two.coupling)
    if gap == 0.0:
        return np.inf
    return float(2.0 * np.pi / gap)


def resonance_field(L, g, bracket=(0.55, 0.78)):
    """The field h* equalizing the two diagonals of the effective model
    (detuning including self-energy = 0); converges to 2/3 as g -> 0."""

    def detune(h):
        two = effective_two_level(L, h, g)
        return two.delta - two.diag2

    lo, hi = bracket
    return float(scipy.optimize.brentq(detune, lo, hi, xtol=1e-12))
