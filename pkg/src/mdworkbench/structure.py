"""Molecular structures and fixed-column PDB I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .constants import AMINO_ACIDS_3, WATER_RESIDUES, element_mass


@dataclass(frozen=True)
class Atom:
    serial: int
    name: str
    element: str
    res_name: str
    res_seq: int
    chain_id: str
    x: float
    y: float
    z: float
    occupancy: float = 1.0
    b_factor: float = 0.0
    het: bool = False

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def residue_key(self) -> tuple[str, int, str]:
        return (self.chain_id, self.res_seq, self.res_name)


@dataclass
class Structure:
    """Immutable-by-convention atom list with a chain/residue hierarchy.

    All operations return new structures; never mutate `atoms` in place.
    """

    atoms: list[Atom]
    source: str = "generated"
    provenance: str = ""
    title: str = ""

    def __post_init__(self) -> None:
        serials = [a.serial for a in self.atoms]
        if len(set(serials)) != len(serials):
            raise ValueError("duplicate atom serials")
        for a in self.atoms:
            if not (math.isfinite(a.x) and math.isfinite(a.y) and math.isfinite(a.z)):
                raise ValueError(f"non-finite coordinate on atom serial {a.serial}")

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def coordinates(self) -> np.ndarray:
        return np.array([[a.x, a.y, a.z] for a in self.atoms]).reshape(-1, 3)

    @property
    def chain_ids(self) -> list[str]:
        seen: list[str] = []
        for a in self.atoms:
            if a.chain_id not in seen:
                seen.append(a.chain_id)
        return seen

    def residues(self) -> list[tuple[tuple[str, int, str], list[Atom]]]:
        """Residues in file order as (key, atoms) pairs."""
        order: list[tuple[str, int, str]] = []
        groups: dict[tuple[str, int, str], list[Atom]] = {}
        for a in self.atoms:
            key = a.residue_key
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(a)
        return [(k, groups[k]) for k in order]

    def masses(self) -> np.ndarray:
        return np.array([element_mass(a.element) for a in self.atoms])

    def with_atoms(self, atoms: list[Atom], note: str = "") -> "Structure":
        prov = self.provenance
        if note:
            prov = f"{prov}; {note}" if prov else note
        return replace(self, atoms=list(atoms), provenance=prov)

    def counts(self) -> dict:
        """Deterministic composition report."""
        residues = self.residues()
        waters = sum(1 for (_, _, rn), _ in residues if rn in WATER_RESIDUES)
        hetero = sum(
            1
            for (_, _, rn), ats in residues
            if rn not in AMINO_ACIDS_3 and rn not in WATER_RESIDUES
        )
        per_kind: dict[str, int] = {}
        for (_, _, rn), _ in residues:
            per_kind[rn] = per_kind.get(rn, 0) + 1
        return {
            "atoms": len(self.atoms),
            "residues": len(residues),
            "chains": len(self.chain_ids),
            "waters": waters,
            "heterogen_residues": hetero,
            "residues_per_kind": dict(sorted(per_kind.items())),
        }


def _parse_element(raw_element: str, name: str) -> str:
    el = raw_element.strip()
    if el:
        return el.upper()
    # Fall back to the atom-name column convention.
    stripped = name.strip()
    for ch in stripped:
        if ch.isalpha():
            return ch.upper()
    raise ValueError(f"cannot infer element for atom name {name!r}")


def parse_pdb(text: str, source: str = "fetched") -> Structure:
    """Parse fixed-column PDB text (model 1 only for multi-model files)."""
    atoms: list[Atom] = []
    title_parts: list[str] = []
    for line in text.splitlines():
        record = line[:6]
        if record == "TITLE ":
            title_parts.append(line[10:].strip())
        elif record == "ENDMDL":
            break
        elif record in ("ATOM  ", "HETATM"):
            if len(line) < 54:
                raise ValueError(f"truncated coordinate record: {line!r}")
            atoms.append(
                Atom(
                    serial=int(line[6:11]),
                    name=line[12:16].strip(),
                    element=_parse_element(line[76:78] if len(line) >= 78 else "", line[12:16]),
                    res_name=line[17:20].strip(),
                    res_seq=int(line[22:26]),
                    chain_id=line[21].strip() or "A",
                    x=float(line[30:38]),
                    y=float(line[38:46]),
                    z=float(line[46:54]),
                    occupancy=float(line[54:60]) if line[54:60].strip() else 1.0,
                    b_factor=float(line[60:66]) if line[60:66].strip() else 0.0,
                    het=record == "HETATM",
                )
            )
    return Structure(atoms=atoms, source=source, title=" ".join(title_parts))


def serialize_pdb(structure: Structure) -> str:
    lines: list[str] = []
    if structure.title:
        lines.append(f"TITLE     {structure.title}")
    prev_chain: str | None = None
    for a in structure.atoms:
        if prev_chain is not None and a.chain_id != prev_chain:
            lines.append("TER")
        prev_chain = a.chain_id
        record = "HETATM" if a.het else "ATOM  "
        name = a.name if len(a.name) == 4 else f" {a.name:<3s}"
        lines.append(
            f"{record}{a.serial:>5d} {name}{'':1s}{a.res_name:>3s} "
            f"{a.chain_id:1s}{a.res_seq:>4d}    "
            f"{a.x:8.3f}{a.y:8.3f}{a.z:8.3f}{a.occupancy:6.2f}{a.b_factor:6.2f}"
            f"          {a.element:>2s}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"


def load_pdb_file(path: str | Path, source: str = "fetched") -> Structure:
    return parse_pdb(Path(path).read_text(), source=source)


def save_pdb_file(structure: Structure, path: str | Path) -> None:
    Path(path).write_text(serialize_pdb(structure))
