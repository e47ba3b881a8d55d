"""Dimensioned quantities and unit conversions.

All internal arithmetic is done in CGS-photon units: lengths in cm, times
in s, counts in photons or molecules. Power is the one exception and is
carried in W. Only the handful of dimensions the ETPA pipeline needs are
supported; this is not a general unit algebra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from numbers import Real

__all__ = [
    "AVOGADRO",
    "GM_IN_CM4S",
    "PLANCK",
    "SPEED_OF_LIGHT",
    "Dimension",
    "DimensionError",
    "DomainError",
    "Quantity",
    "UNITS",
    "cm4s_to_gm",
    "gm_to_cm4s",
    "magnitude",
    "molar_to_number_density",
    "mw_to_w",
    "number_density_to_molar",
    "photon_energy",
    "power_to_photon_rate",
    "w_to_mw",
]

# Exact SI-defining constants (2019 redefinition).
AVOGADRO = 6.02214076e23  # molecules / mol
PLANCK = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 299792458.0  # m / s

GM_IN_CM4S = 1e-50  # 1 GM in cm^4 s photon^-1 molecule^-1
_CM3_PER_LITRE = 1e3


class DomainError(ValueError):
    """A physical magnitude is negative, non-finite or otherwise out of range."""


class DimensionError(TypeError):
    """Two quantities (or a quantity and a unit) have incompatible dimensions."""


class Dimension(Enum):
    POWER = "W"
    LENGTH = "cm"
    AREA = "cm^2"
    VOLUME = "cm^3"
    TIME = "s"
    RATE = "s^-1"
    FLUX_DENSITY = "photons s^-1 cm^-2"
    CONCENTRATION = "mol L^-1"
    NUMBER_DENSITY = "molecules cm^-3"
    CROSS_SECTION_E = "cm^2 molecule^-1"
    CROSS_SECTION_R = "cm^4 s photon^-1 molecule^-1"


# unit symbol -> (dimension, factor to the canonical unit of that dimension)
UNITS: dict[str, tuple[Dimension, float]] = {
    "W": (Dimension.POWER, 1.0),
    "mW": (Dimension.POWER, 1e-3),
    "cm": (Dimension.LENGTH, 1.0),
    "mm": (Dimension.LENGTH, 1e-1),
    "um": (Dimension.LENGTH, 1e-4),
    "nm": (Dimension.LENGTH, 1e-7),
    "m": (Dimension.LENGTH, 1e2),
    "cm2": (Dimension.AREA, 1.0),
    "cm3": (Dimension.VOLUME, 1.0),
    "L": (Dimension.VOLUME, _CM3_PER_LITRE),
    "s": (Dimension.TIME, 1.0),
    "ns": (Dimension.TIME, 1e-9),
    "1/s": (Dimension.RATE, 1.0),
    "photons/s/cm2": (Dimension.FLUX_DENSITY, 1.0),
    "M": (Dimension.CONCENTRATION, 1.0),
    "mM": (Dimension.CONCENTRATION, 1e-3),
    "uM": (Dimension.CONCENTRATION, 1e-6),
    "1/cm3": (Dimension.NUMBER_DENSITY, 1.0),
    "cm2/molecule": (Dimension.CROSS_SECTION_E, 1.0),
    "cm4s": (Dimension.CROSS_SECTION_R, 1.0),
    "GM": (Dimension.CROSS_SECTION_R, GM_IN_CM4S),
}


def _check_magnitude(value: float, name: str = "value") -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if value < 0:
        raise DomainError(f"{name} must be non-negative, got {value}")
    return value


@dataclass(frozen=True)
class Quantity:
    """Non-negative scalar with a dimension, stored in canonical units.

    Addition, subtraction and ordering require matching dimensions.
    Scaling by a plain number is allowed; multiplying two quantities is not,
    since the result would generally fall outside the supported dimensions.
    """

    value: float
    dim: Dimension

    def __post_init__(self) -> None:
        if not isinstance(self.dim, Dimension):
            raise TypeError(f"dim must be a Dimension, got {self.dim!r}")
        object.__setattr__(self, "value", _check_magnitude(self.value, self.dim.name.lower()))

    @classmethod
    def of(cls, value: float, unit: str) -> Quantity:
        """Build a quantity from a value expressed in ``unit``."""
        try:
            dim, factor = UNITS[unit]
        except KeyError:
            raise DimensionError(f"unknown unit {unit!r}") from None
        return cls(_check_magnitude(value) * factor, dim)

    def to(self, unit: str) -> float:
        try:
            dim, factor = UNITS[unit]
        except KeyError:
            raise DimensionError(f"unknown unit {unit!r}") from None
        if dim is not self.dim:
            raise DimensionError(f"cannot express {self.dim.name} in {unit} ({dim.name})")
        return self.value / factor

    def _same(self, other: object) -> Quantity:
        if not isinstance(other, Quantity):
            raise DimensionError(f"cannot combine Quantity with {type(other).__name__}")
        if other.dim is not self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim.name} vs {other.dim.name}")
        return other

    def __add__(self, other: Quantity) -> Quantity:
        return Quantity(self.value + self._same(other).value, self.dim)

    def __sub__(self, other: Quantity) -> Quantity:
        return Quantity(self.value - self._same(other).value, self.dim)

    def __mul__(self, k: float) -> Quantity:
        if isinstance(k, Quantity):
            raise DimensionError("product of two quantities is not supported")
        return Quantity(self.value * k, self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other: float | Quantity) -> Quantity | float:
        # same-dimension ratio is a plain number
        if isinstance(other, Quantity):
            return self.value / self._same(other).value
        return Quantity(self.value / other, self.dim)

    def __lt__(self, other: Quantity) -> bool:
        return self.value < self._same(other).value

    def __le__(self, other: Quantity) -> bool:
        return self.value <= self._same(other).value

    def __gt__(self, other: Quantity) -> bool:
        return self.value > self._same(other).value

    def __ge__(self, other: Quantity) -> bool:
        return self.value >= self._same(other).value

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.value:g} {self.dim.value}"


def magnitude(x: float | Quantity, dim: Dimension, name: str = "value") -> float:
    """Return ``x`` as a float in the canonical unit of ``dim``.

    Plain numbers are taken to already be in canonical units. A Quantity of
    another dimension raises DimensionError.
    """
    if isinstance(x, Quantity):
        if x.dim is not dim:
            raise DimensionError(f"{name}: expected {dim.name}, got {x.dim.name}")
        return x.value
    return _check_magnitude(x, name)


def gm_to_cm4s(x: float) -> float:
    """Convert a random-TPA cross section from GM to cm^4 s photon^-1 molecule^-1."""
    return _check_magnitude(x, "cross section (GM)") * GM_IN_CM4S


def cm4s_to_gm(x: float) -> float:
    return _check_magnitude(x, "cross section (cm^4 s)") / GM_IN_CM4S


def molar_to_number_density(c: float | Quantity) -> float:
    """mol/L -> molecules/cm^3."""
    c = magnitude(c, Dimension.CONCENTRATION, "concentration")
    return c / _CM3_PER_LITRE * AVOGADRO


def number_density_to_molar(n: float | Quantity) -> float:
    n = magnitude(n, Dimension.NUMBER_DENSITY, "number density")
    return n / AVOGADRO * _CM3_PER_LITRE


def mw_to_w(p: float) -> float:
    return _check_magnitude(p, "power (mW)") * 1e-3


def w_to_mw(p: float) -> float:
    return _check_magnitude(p, "power (W)") * 1e3


def photon_energy(wavelength: float | Quantity) -> float:
    """Energy of one photon in J; ``wavelength`` in cm."""
    wl = magnitude(wavelength, Dimension.LENGTH, "wavelength")
    if wl == 0:
        raise DomainError("wavelength must be positive")
    return PLANCK * SPEED_OF_LIGHT / (wl * 1e-2)


def power_to_photon_rate(power: float | Quantity, wavelength: float | Quantity) -> float:
    """Photons per second carried by ``power`` (W) at ``wavelength`` (cm)."""
    p = magnitude(power, Dimension.POWER, "power")
    return p / photon_energy(wavelength)
