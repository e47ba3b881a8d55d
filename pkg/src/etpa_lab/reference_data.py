"""Measured sigma_E at 808 nm for ZnTPP in toluene and RhB in methanol.

Concentrations in mol/L, cross sections in cm^2 molecule^-1. These are
the values the demo run and the consistency checks are built around.
"""
from __future__ import annotations

from typing import NamedTuple


class ReferenceRow(NamedTuple):
    molecule: str
    solvent: str
    concentration: float
    sigma_e: float
    sigma_e_uncertainty: float

    @property
    def label(self) -> str:
        # each molecule keeps the concentration unit it was tabulated in
        if self.molecule == "ZnTPP":
            return f"{self.molecule}-{self.concentration * 1e6:g}uM"
        return f"{self.molecule}-{self.concentration * 1e3:g}mM"


_E18 = 1e-18

ZNTPP_ROWS = (
    ReferenceRow("ZnTPP", "toluene", 17e-6, 42 * _E18, 5.2 * _E18),
    ReferenceRow("ZnTPP", "toluene", 63e-6, 5.1 * _E18, 0.46 * _E18),
    ReferenceRow("ZnTPP", "toluene", 120e-6, 3.2 * _E18, 0.20 * _E18),
    ReferenceRow("ZnTPP", "toluene", 230e-6, 1.1 * _E18, 0.07 * _E18),
    ReferenceRow("ZnTPP", "toluene", 1400e-6, 0.27 * _E18, 0.026 * _E18),
)

RHB_ROWS = (
    ReferenceRow("RhB", "methanol", 0.038e-3, 4.2 * _E18, 0.34 * _E18),
    ReferenceRow("RhB", "methanol", 0.19e-3, 0.80 * _E18, 0.068 * _E18),
    ReferenceRow("RhB", "methanol", 4.5e-3, 0.063 * _E18, 0.0039 * _E18),
    ReferenceRow("RhB", "methanol", 58e-3, 0.011 * _E18, 0.00084 * _E18),
    ReferenceRow("RhB", "methanol", 110e-3, 0.017 * _E18, 0.0018 * _E18),
)

REFERENCE_ROWS = ZNTPP_ROWS + RHB_ROWS

# concentration pairs whose slopes coincide because sigma_E*c is nearly equal
DEGENERATE_PAIRS = (
    (ZNTPP_ROWS[2], ZNTPP_ROWS[4]),
    (RHB_ROWS[0], RHB_ROWS[1]),
)
