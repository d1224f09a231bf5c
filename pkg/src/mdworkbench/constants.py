"""Physical constants, unit conversions, and element/residue tables."""

from __future__ import annotations

# Boltzmann constant in kcal/mol/K.
KB_KCAL = 0.0019872041

# Internal time unit: sqrt(amu * A^2 / (kcal/mol)) expressed in femtoseconds.
# Working units are A, amu, kcal/mol; velocities are A per internal time unit.
TIME_UNIT_FS = 48.88821

# 1 atm in kcal/mol/A^3.
ATM_TO_KCAL_PER_A3 = 1.4584e-5

# Atomic masses (amu) for the elements the toolset handles.
ATOMIC_MASSES = {
    "H": 1.008,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "S": 32.06,
    "P": 30.974,
    "SE": 78.971,
    "FE": 55.845,
    "ZN": 65.38,
    "MG": 24.305,
    "NA": 22.990,
    "CL": 35.45,
    "K": 39.098,
    "CA": 40.078,
}

# Bondi van der Waals radii (A).  Unknown elements are hard errors at use
# sites rather than silent defaults.
VDW_RADII = {
    "H": 1.20,
    "C": 1.70,
    "N": 1.55,
    "O": 1.52,
    "S": 1.80,
    "P": 1.80,
    "SE": 1.90,
    "F": 1.47,
    "CL": 1.75,
    "BR": 1.85,
    "I": 1.98,
    "NA": 2.27,
    "K": 2.75,
    "MG": 1.73,
    "ZN": 1.39,
    "FE": 1.52,
    "CA": 2.31,
}

# Side-chain pKa values used by the protonation rule (protonate iff
# target pH < pKa).
SIDECHAIN_PKA = {
    "HIS": 6.0,
    "ASP": 3.9,
    "GLU": 4.1,
    "LYS": 10.5,
    "CYS": 8.3,
    "TYR": 10.1,
    "ARG": 12.5,
}

# Name of the extra polar hydrogen carried by the protonated form.
TITRATABLE_PROTON = {
    "HIS": "HE2",
    "ASP": "HD2",
    "GLU": "HE2",
    "LYS": "HZ3",
    "CYS": "HG",
    "TYR": "HH",
    "ARG": "HH22",
}

AMINO_ACIDS_3 = {
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
    "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
}

AA_3_TO_1 = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C",
    "GLN": "Q", "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I",
    "LEU": "L", "LYS": "K", "MET": "M", "PHE": "F", "PRO": "P",
    "SER": "S", "THR": "T", "TRP": "W", "TYR": "Y", "VAL": "V",
}

WATER_RESIDUES = {"HOH", "WAT", "TIP3", "SOL"}

# Solvent templates: (residue name, molar mass g/mol, default target
# density g/cm^3).  Water is rigid 3-site; methanol and acetonitrile are
# united-atom.
SOLVENT_INFO = {
    "water": ("HOH", 18.015, 0.997),
    "methanol": ("MOH", 32.042, 0.792),
    "acetonitrile": ("ACN", 41.053, 0.786),
}

# Conversion g/cm^3 -> amu/A^3 is 0.6022141; molecule count in a volume V
# (A^3) at density rho (g/cm^3) is rho * V * 0.6022141 / molar_mass.
DENSITY_FACTOR = 0.6022141


def element_mass(element: str) -> float:
    try:
        return ATOMIC_MASSES[element.upper()]
    except KeyError:
        raise KeyError(f"unknown element {element!r}: no mass entry") from None


def vdw_radius(element: str) -> float:
    try:
        return VDW_RADII[element.upper()]
    except KeyError:
        raise KeyError(f"unknown element {element!r}: no vdW radius entry") from None
