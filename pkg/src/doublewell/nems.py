"""Doubly-clamped beam to dimensionless-oscillator mapping.

The fundamental flexural mode of a doubly-clamped beam of length l0,
cross-section area A, moment of inertia I, elastic modulus E and inherent
longitudinal tension T0 moves in the effective potential

    V(Y) = c2 Y^2 + c4 Y^4,
    c2 = E I pi^4 / l0^3 + pi^2 T0 / (4 l0),
    c4 = E A pi^4 / (16 l0^3),

with Y the midpoint displacement.  Sufficient compression,
T0 < -4 pi^2 E I / l0^2, makes c2 negative: the beam buckles and V turns
into a double well.  In that regime the quantumness parameter of the
dimensionless Duffing model is

    beta^2 = (hbar l0 / (8 pi^2)) sqrt( A / (2 E rho I^3) ) * (lam/(4 pi^2) - 1)^(-3/2),

where lam = |T0| l0^2 / (E I) is the compression ratio and rho the mass
density.  All inputs are SI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

from .errors import ConfigError

# Relative distance from the buckling threshold below which beta is
# reported as out of domain instead of silently diverging.
DOMAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class RectangularSection:
    """Rectangular cross-section: `thickness` in the bending direction is a,
    `width` is b, bending moment I = a b^3 / 12."""

    thickness: float
    width: float

    @property
    def area(self) -> float:
        return self.thickness * self.width

    @property
    def moment(self) -> float:
        return self.thickness * self.width**3 / 12.0


@dataclass(frozen=True)
class CircularSection:
    radius: float

    @property
    def area(self) -> float:
        return np.pi * self.radius**2

    @property
    def moment(self) -> float:
        return np.pi * self.radius**4 / 4.0


@dataclass(frozen=True)
class Material:
    modulus: float  # Pa
    density: float  # kg/m^3


# Typical values for materials commonly used in doubly-clamped beams.
MATERIALS = {
    "silicon": Material(modulus=0.137e12, density=2330.0),
    "swnt": Material(modulus=1.25e12, density=1930.0),
    "mwnt": Material(modulus=1.25e12, density=1930.0),
    "platinum": Material(modulus=0.168e12, density=21090.0),
}


@dataclass(frozen=True)
class BeamSpec:
    """Geometry and material of one doubly-clamped beam.

    `tension` is the inherent longitudinal tension T0 in newtons; negative
    values compress the beam.
    """

    length: float
    section: RectangularSection | CircularSection
    modulus: float
    density: float
    tension: float

    def __post_init__(self):
        for name in ("length", "modulus", "density"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"beam {name} must be positive", key=name)
        if not (self.section.area > 0 and self.section.moment > 0):
            raise ConfigError("beam cross-section must have positive area", key="section")


@dataclass(frozen=True)
class PotentialCoefficients:
    c2: float
    c4: float
    is_double_well: bool


def critical_tension(beam: BeamSpec) -> float:
    """Buckling threshold: c2 changes sign at T0 = -4 pi^2 E I / l0^2."""
    return -4.0 * np.pi**2 * beam.modulus * beam.section.moment / beam.length**2


def potential_coefficients(beam: BeamSpec) -> PotentialCoefficients:
    """Quadratic and quartic coefficients of the midpoint potential."""
    e, i, a, l0 = beam.modulus, beam.section.moment, beam.section.area, beam.length
    c2 = e * i * np.pi**4 / l0**3 + np.pi**2 * beam.tension / (4.0 * l0)
    c4 = e * a * np.pi**4 / (16.0 * l0**3)
    return PotentialCoefficients(c2=float(c2), c4=float(c4), is_double_well=bool(c2 < 0))


def buckling_ratio(beam: BeamSpec) -> float:
    """lam = |T0| l0^2 / (E I); the beam is buckled for lam > 4 pi^2."""
    return abs(beam.tension) * beam.length**2 / (beam.modulus * beam.section.moment)


def tension_from_buckling_ratio(beam_or_section, length: float | None = None, lam: float = 0.0,
                                modulus: float | None = None) -> float:
    """Compressive tension T0 < 0 that realizes the given ratio lam.

    Accepts either a BeamSpec (whose tension field is ignored) or an
    explicit (section, length, modulus) triple.
    """
    if isinstance(beam_or_section, BeamSpec):
        b = beam_or_section
        return -lam * b.modulus * b.section.moment / b.length**2
    section = beam_or_section
    return -lam * modulus * section.moment / length**2


def beta_from_beam(beam: BeamSpec) -> float:
    """Quantumness parameter beta of a buckled beam.

    Raises ConfigError when the beam is not buckled, the tension is not
    compressive, or the compression sits within DOMAIN_MARGIN of the
    threshold where beta diverges.
    """
    if beam.tension >= 0:
        raise ConfigError(
            "beta is defined for compressed (buckled) beams; tension must be negative",
            key="tension",
        )
    bracket = buckling_ratio(beam) / (4.0 * np.pi**2) - 1.0
    if bracket <= DOMAIN_MARGIN:
        raise ConfigError(
            f"beam is not buckled (compression ratio {buckling_ratio(beam):.6g} "
            f"vs threshold {4 * np.pi**2:.6g}); no double well, beta undefined",
            key="tension",
        )
    e, i, a, l0 = beam.modulus, beam.section.moment, beam.section.area, beam.length
    prefactor = (hbar * l0 / (8.0 * np.pi**2)) * np.sqrt(a / (2.0 * e * beam.density * i**3))
    return float(np.sqrt(prefactor * bracket ** (-1.5)))


def beta_prefactor(beam: BeamSpec) -> float:
    """The coefficient C in beta^2 = C (lam/(4 pi^2) - 1)^(-3/2)."""
    e, i, a, l0 = beam.modulus, beam.section.moment, beam.section.area, beam.length
    return float((hbar * l0 / (8.0 * np.pi**2)) * np.sqrt(a / (2.0 * e * beam.density * i**3)))


def quality_factor_to_gamma(q: float) -> float:
    """Dimensionless damping rate Gamma = 1 / (2 Q)."""
    if not q > 0:
        raise ConfigError(f"quality factor must be positive, got {q}", key="quality_factor")
    return 1.0 / (2.0 * q)
