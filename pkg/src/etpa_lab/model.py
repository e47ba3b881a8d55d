"""Interaction-region geometry and the ETPA rate equations.

Functions take plain floats in canonical CGS units (or ``Quantity``
objects, which are dimension-checked) and return floats.

The absorbed pair rate is linear in the transmitted solvent rate:

    R_abs = (n V sigma_E / A) * R_solvent,    n = c * N_A / 1000

so the slope of R_abs against R_solvent is the absorption fraction.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from decimal import Decimal

from .units import (
    Dimension,
    DomainError,
    Quantity,
    magnitude,
    molar_to_number_density,
)

__all__ = [
    "ExperimentGeometry",
    "ModelBreakdownWarning",
    "SampleSpec",
    "absorbed_pair_rate",
    "absorption_fraction",
    "beam_area",
    "crossover_flux",
    "etpa_rate",
    "is_breakdown",
    "rayleigh_range",
    "tpa_rate",
]


class ModelBreakdownWarning(UserWarning):
    """The linear absorption model predicts absorbing all incident pairs or more."""


def _positive(x: float | Quantity, dim: Dimension, name: str) -> float:
    v = magnitude(x, dim, name)
    if v == 0:
        raise DomainError(f"{name} must be positive")
    return v


def beam_area(w0: float | Quantity, override: float | None = None) -> float:
    """Transverse area (cm^2) of the interaction cylinder.

    Defaults to pi*w0^2 for a Gaussian waist ``w0`` (cm). ``override``
    replaces the computed value outright.
    """
    w0 = _positive(w0, Dimension.LENGTH, "beam waist")
    if override is not None:
        return _positive(override, Dimension.AREA, "area override")
    return math.pi * w0**2


def rayleigh_range(w0: float | Quantity, wavelength: float | Quantity) -> float:
    """pi*w0^2/lambda, in cm."""
    w0 = _positive(w0, Dimension.LENGTH, "beam waist")
    wl = _positive(wavelength, Dimension.LENGTH, "wavelength")
    return math.pi * w0**2 / wl


@dataclass(frozen=True)
class ExperimentGeometry:
    """Beam and cuvette geometry.

    Inputs are in lab units (um, nm, mm); the derived properties are in cm.
    ``area_cm2`` overrides the pi*w0^2 area; the volume is always A*L.
    """

    beam_waist_um: float = 61.0
    wavelength_nm: float = 808.0
    path_length_mm: float = 10.0
    area_cm2: float | None = None

    def __post_init__(self) -> None:
        for name in ("beam_waist_um", "wavelength_nm", "path_length_mm"):
            _positive(getattr(self, name), Dimension.LENGTH, name)
        if self.area_cm2 is not None:
            _positive(self.area_cm2, Dimension.AREA, "area_cm2")

    @classmethod
    def standard(cls) -> ExperimentGeometry:
        """61 um waist, 808 nm, 10 mm cuvette, A = 2e-4 cm^2."""
        return cls(61.0, 808.0, 10.0, area_cm2=2e-4)

    @property
    def beam_waist(self) -> float:
        return self.beam_waist_um * 1e-4

    @property
    def wavelength(self) -> float:
        return self.wavelength_nm * 1e-7

    @property
    def path_length(self) -> float:
        return self.path_length_mm * 1e-1

    @property
    def area(self) -> float:
        return beam_area(self.beam_waist, self.area_cm2)

    @property
    def volume(self) -> float:
        return self.area * self.path_length

    @property
    def rayleigh_range(self) -> float:
        return rayleigh_range(self.beam_waist, self.wavelength)

    @property
    def collimated(self) -> bool:
        """True when the beam stays collimated over the whole cuvette."""
        return self.rayleigh_range >= self.path_length / 2


@dataclass(frozen=True)
class SampleSpec:
    """A solution placed in the beam. ``concentration`` is in mol/L.

    A concentration of zero denotes pure solvent.
    """

    label: str
    concentration: float = 0.0
    sigma_e: float = 0.0
    delta_r: float = 0.0

    def __post_init__(self) -> None:
        magnitude(self.concentration, Dimension.CONCENTRATION, "concentration")
        magnitude(self.sigma_e, Dimension.CROSS_SECTION_E, "sigma_e")
        magnitude(self.delta_r, Dimension.CROSS_SECTION_R, "delta_r")
        if not self.label or any(ch in self.label for ch in ',"\r\n'):
            raise ValueError(f"invalid sample label {self.label!r}")

    @property
    def is_solvent(self) -> bool:
        return self.concentration == 0


def tpa_rate(phi: float | Quantity, sigma_e: float | Quantity, delta_r: float | Quantity = 0.0) -> float:
    """Per-molecule TPA rate (s^-1) for photon flux density ``phi``."""
    phi = magnitude(phi, Dimension.FLUX_DENSITY, "phi")
    sigma_e = magnitude(sigma_e, Dimension.CROSS_SECTION_E, "sigma_e")
    delta_r = magnitude(delta_r, Dimension.CROSS_SECTION_R, "delta_r")
    return sigma_e * phi + delta_r * phi**2


def etpa_rate(pair_flux: float | Quantity, sigma_e: float | Quantity) -> float:
    """Per-molecule entangled TPA rate for a pair flux density (pairs s^-1 cm^-2)."""
    pair_flux = magnitude(pair_flux, Dimension.FLUX_DENSITY, "pair flux")
    sigma_e = magnitude(sigma_e, Dimension.CROSS_SECTION_E, "sigma_e")
    return 2 * sigma_e * pair_flux


def crossover_flux(sigma_e: float | Quantity, delta_r: float | Quantity) -> float:
    """Flux density at which the linear and quadratic TPA terms are equal."""
    sigma_e = magnitude(sigma_e, Dimension.CROSS_SECTION_E, "sigma_e")
    delta_r = magnitude(delta_r, Dimension.CROSS_SECTION_R, "delta_r")
    if delta_r == 0:
        raise ZeroDivisionError("crossover flux is undefined for delta_r = 0")
    # divide the shortest decimal forms and round once, so 1e-18 / 1e-48 is exactly 1e30
    return float(Decimal(repr(sigma_e)) / Decimal(repr(delta_r)))


def is_breakdown(fraction: float) -> bool:
    return fraction >= 1.0


def absorption_fraction(
    concentration: float | Quantity,
    geometry: ExperimentGeometry,
    sigma_e: float | Quantity,
) -> float:
    """Fraction of incident pairs absorbed, c*V*N_A*sigma_E/A.

    Values >= 1 are returned unchanged and emit ModelBreakdownWarning:
    the linear model has no saturation.
    """
    n = molar_to_number_density(concentration)
    sigma_e = magnitude(sigma_e, Dimension.CROSS_SECTION_E, "sigma_e")
    fraction = n * geometry.volume * sigma_e / geometry.area
    if is_breakdown(fraction):
        warnings.warn(
            f"absorption fraction {fraction:.4g} >= 1: linear model breaks down",
            ModelBreakdownWarning,
            stacklevel=2,
        )
    return fraction


def absorbed_pair_rate(
    concentration: float | Quantity,
    geometry: ExperimentGeometry,
    sigma_e: float | Quantity,
    r_solvent: float | Quantity,
) -> float:
    r_solvent = magnitude(r_solvent, Dimension.RATE, "R_solvent")
    return absorption_fraction(concentration, geometry, sigma_e) * r_solvent
