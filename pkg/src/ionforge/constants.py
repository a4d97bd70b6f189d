"""Physical constants for a single-species ion chain driven by Raman beams."""

import dataclasses
import math

HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
ELEMENTARY_CHARGE = 1.602176634e-19  # C
COULOMB_CONSTANT = 8.9875517923e9  # N m^2 / C^2


@dataclasses.dataclass(frozen=True)
class PhysicalConstants:
    """Fixed physical inputs; defaults describe 171Yb+ driven at 355 nm.

    delta_k is the wave-vector difference of the counter-propagating beam
    pair, 2 * (2 pi / wavelength).
    """

    hbar: float = HBAR
    ion_mass: float = 171 * ATOMIC_MASS_UNIT
    elementary_charge: float = ELEMENTARY_CHARGE
    coulomb_constant: float = COULOMB_CONSTANT
    raman_wavelength: float = 355e-9

    def __post_init__(self):
        for name in ("hbar", "ion_mass", "elementary_charge", "coulomb_constant",
                     "raman_wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def delta_k(self) -> float:
        return 4 * math.pi / self.raman_wavelength

    def to_dict(self) -> dict:
        return {
            "hbar": self.hbar,
            "ion_mass_kg": self.ion_mass,
            "elementary_charge_c": self.elementary_charge,
            "coulomb_constant": self.coulomb_constant,
            "raman_wavelength_m": self.raman_wavelength,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicalConstants":
        return cls(
            hbar=d["hbar"],
            ion_mass=d["ion_mass_kg"],
            elementary_charge=d["elementary_charge_c"],
            coulomb_constant=d["coulomb_constant"],
            raman_wavelength=d["raman_wavelength_m"],
        )


DEFAULT_CONSTANTS = PhysicalConstants()
