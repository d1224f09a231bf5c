"""PDB & protein tools: structure fetching (live or vendored fixtures),
cleaning (heterogen removal, missing heavy atoms from idealized internal
coordinates, pKa-ruled hydrogen addition), composition summaries, and
static visualization."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constants import AMINO_ACIDS_3, SIDECHAIN_PKA, TITRATABLE_PROTON, WATER_RESIDUES
from ..geometry import place_atom
from ..structure import Atom, Structure, parse_pdb

PDB_ID_RE = re.compile(r"^[0-9][A-Za-z0-9]{3}$")


class PdbToolError(Exception):
    pass


@dataclass
class FetchConfig:
    """fixture mode reads vendored files and never touches the network."""

    fixture_mode: bool = True
    fixture_dir: Path | None = None
    archive_url: str = "https://files.rcsb.org/download"


def default_fixture_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "fixtures" / "pdb"


def fetch_structure(pdb_id: str, config: FetchConfig | None = None) -> tuple[Structure, str]:
    """Return (structure, pdb text).  Malformed ids and unknown entries are
    tool errors, not crashes."""
    config = config or FetchConfig()
    if not PDB_ID_RE.match(pdb_id or ""):
        raise PdbToolError(
            f"malformed PDB id {pdb_id!r}: expected 4 characters, digit first (e.g. 1LYZ)"
        )
    pdb_id = pdb_id.upper()
    if config.fixture_mode:
        base = config.fixture_dir or default_fixture_dir()
        path = base / f"{pdb_id}.pdb"
        if not path.exists():
            raise PdbToolError(f"structure {pdb_id} not found in fixture store ({base})")
        text = path.read_text()
    else:
        import requests

        resp = requests.get(f"{config.archive_url}/{pdb_id}.pdb", timeout=60)
        if resp.status_code == 404:
            raise PdbToolError(f"structure {pdb_id} not found in the archive")
        resp.raise_for_status()
        text = resp.text
    return parse_pdb(text, source="fetched"), text


@dataclass
class CleanSpec:
    target_pH: float = 7.0
    add_hydrogens: bool = True
    add_missing_heavy_atoms: bool = True
    remove_heterogens: bool = True
    keep_water: bool = False

    def __post_init__(self) -> None:
        if not (0 < self.target_pH < 14):
            raise PdbToolError(f"target_pH must be in (0, 14), got {self.target_pH}")


# Side-chain heavy atoms as internal coordinates: atom -> (anchors a3,a2,a1,
# bond A, angle deg, dihedral deg); a1 is the bonded parent.  Geometry is
# idealized; no minimization follows.
_SC = {
    "ALA": [],
    "ARG": [
        ("CG", ("N", "CA", "CB"), 1.52, 111.0, 180.0),
        ("CD", ("CA", "CB", "CG"), 1.52, 111.0, 180.0),
        ("NE", ("CB", "CG", "CD"), 1.46, 111.0, 180.0),
        ("CZ", ("CG", "CD", "NE"), 1.33, 124.0, 180.0),
        ("NH1", ("CD", "NE", "CZ"), 1.33, 120.0, 0.0),
        ("NH2", ("CD", "NE", "CZ"), 1.33, 120.0, 180.0),
    ],
    "ASN": [
        ("CG", ("N", "CA", "CB"), 1.52, 112.6, 180.0),
        ("OD1", ("CA", "CB", "CG"), 1.23, 120.8, 0.0),
        ("ND2", ("CA", "CB", "CG"), 1.33, 116.4, 180.0),
    ],
    "ASP": [
        ("CG", ("N", "CA", "CB"), 1.52, 112.6, 180.0),
        ("OD1", ("CA", "CB", "CG"), 1.25, 118.5, 0.0),
        ("OD2", ("CA", "CB", "CG"), 1.25, 118.5, 180.0),
    ],
    "CYS": [("SG", ("N", "CA", "CB"), 1.81, 114.0, 180.0)],
    "GLN": [
        ("CG", ("N", "CA", "CB"), 1.52, 111.0, 180.0),
        ("CD", ("CA", "CB", "CG"), 1.52, 112.6, 180.0),
        ("OE1", ("CB", "CG", "CD"), 1.23, 120.8, 0.0),
        ("NE2", ("CB", "CG", "CD"), 1.33, 116.4, 180.0),
    ],
    "GLU": [
        ("CG", ("N", "CA", "CB"), 1.52, 111.0, 180.0),
        ("CD", ("CA", "CB", "CG"), 1.52, 112.6, 180.0),
        ("OE1", ("CB", "CG", "CD"), 1.25, 118.5, 0.0),
        ("OE2", ("CB", "CG", "CD"), 1.25, 118.5, 180.0),
    ],
    "GLY": [],
    "HIS": [
        ("CG", ("N", "CA", "CB"), 1.50, 113.8, 180.0),
        ("ND1", ("CA", "CB", "CG"), 1.38, 122.7, 90.0),
        ("CD2", ("CA", "CB", "CG"), 1.36, 131.0, -90.0),
        ("CE1", ("CB", "CG", "ND1"), 1.32, 109.3, 180.0),
        ("NE2", ("CB", "CG", "CD2"), 1.37, 107.2, 180.0),
    ],
    "ILE": [
        ("CG1", ("N", "CA", "CB"), 1.53, 110.4, 180.0),
        ("CG2", ("N", "CA", "CB"), 1.53, 110.5, -60.0),
        ("CD1", ("CA", "CB", "CG1"), 1.51, 113.8, 180.0),
    ],
    "LEU": [
        ("CG", ("N", "CA", "CB"), 1.53, 116.3, 180.0),
        ("CD1", ("CA", "CB", "CG"), 1.52, 110.7, 60.0),
        ("CD2", ("CA", "CB", "CG"), 1.52, 110.7, 180.0),
    ],
    "LYS": [
        ("CG", ("N", "CA", "CB"), 1.52, 111.0, 180.0),
        ("CD", ("CA", "CB", "CG"), 1.52, 111.0, 180.0),
        ("CE", ("CB", "CG", "CD"), 1.52, 111.0, 180.0),
        ("NZ", ("CG", "CD", "CE"), 1.49, 112.0, 180.0),
    ],
    "MET": [
        ("CG", ("N", "CA", "CB"), 1.52, 111.0, 180.0),
        ("SD", ("CA", "CB", "CG"), 1.81, 112.7, 180.0),
        ("CE", ("CB", "CG", "SD"), 1.79, 100.8, 180.0),
    ],
    "PHE": [
        ("CG", ("N", "CA", "CB"), 1.50, 113.8, 180.0),
        ("CD1", ("CA", "CB", "CG"), 1.39, 120.0, 90.0),
        ("CD2", ("CA", "CB", "CG"), 1.39, 120.0, -90.0),
        ("CE1", ("CB", "CG", "CD1"), 1.39, 120.0, 180.0),
        ("CE2", ("CB", "CG", "CD2"), 1.39, 120.0, 180.0),
        ("CZ", ("CG", "CD1", "CE1"), 1.39, 120.0, 0.0),
    ],
    "PRO": [
        ("CG", ("N", "CA", "CB"), 1.50, 104.5, -30.0),
        ("CD", ("CA", "CB", "CG"), 1.51, 106.1, 30.0),
    ],
    "SER": [("OG", ("N", "CA", "CB"), 1.42, 110.8, 180.0)],
    "THR": [
        ("OG1", ("N", "CA", "CB"), 1.43, 109.6, 60.0),
        ("CG2", ("N", "CA", "CB"), 1.53, 110.5, 180.0),
    ],
    "TRP": [
        ("CG", ("N", "CA", "CB"), 1.50, 113.8, 180.0),
        ("CD1", ("CA", "CB", "CG"), 1.37, 127.0, 90.0),
        ("CD2", ("CA", "CB", "CG"), 1.43, 126.6, -90.0),
        ("NE1", ("CB", "CG", "CD1"), 1.38, 110.2, 180.0),
        ("CE2", ("CB", "CG", "CD2"), 1.41, 107.2, 180.0),
        ("CE3", ("CG", "CD2", "CE2"), 1.40, 133.9, 180.0),
        ("CZ2", ("CD2", "CE2", "NE1"), 2.40, 90.0, 180.0),
        ("CZ3", ("CD2", "CE3", "CZ2"), 2.36, 60.0, 0.0),
        ("CH2", ("CE3", "CZ3", "CZ2"), 1.40, 60.0, 30.0),
    ],
    "TYR": [
        ("CG", ("N", "CA", "CB"), 1.50, 113.8, 180.0),
        ("CD1", ("CA", "CB", "CG"), 1.39, 120.0, 90.0),
        ("CD2", ("CA", "CB", "CG"), 1.39, 120.0, -90.0),
        ("CE1", ("CB", "CG", "CD1"), 1.39, 120.0, 180.0),
        ("CE2", ("CB", "CG", "CD2"), 1.39, 120.0, 180.0),
        ("CZ", ("CG", "CD1", "CE1"), 1.39, 120.0, 0.0),
        ("OH", ("CD1", "CE1", "CZ"), 1.38, 120.0, 180.0),
    ],
    "VAL": [
        ("CG1", ("N", "CA", "CB"), 1.53, 110.5, 60.0),
        ("CG2", ("N", "CA", "CB"), 1.53, 110.5, 180.0),
    ],
}

# Anchors (a3, a2, a1=bonded heavy atom) for each titratable proton.
_PROTON_ANCHORS = {
    "HIS": ("CG", "CD2", "NE2"),
    "ASP": ("CB", "CG", "OD2"),
    "GLU": ("CG", "CD", "OE2"),
    "LYS": ("CD", "CE", "NZ"),
    "CYS": ("CA", "CB", "SG"),
    "TYR": ("CE1", "CZ", "OH"),
    "ARG": ("NE", "CZ", "NH2"),
}


@dataclass
class CleanReport:
    structure: Structure
    removed_heterogens: int = 0
    added_heavy_atoms: int = 0
    added_hydrogens: int = 0
    removed_hydrogens: int = 0
    warnings: list[str] = field(default_factory=list)


def clean_structure(structure: Structure, spec: CleanSpec) -> CleanReport:
    """Apply, in order: heterogen removal, missing heavy-atom
    reconstruction, hydrogen addition per the protonation rule
    (protonate iff target_pH < pKa).  Heavy atoms never move; cleaning
    twice with the same spec is a no-op the second time."""
    warnings: list[str] = []
    atoms = list(structure.atoms)
    removed_het = 0

    if spec.remove_heterogens:
        kept = []
        for a in atoms:
            is_water = a.res_name in WATER_RESIDUES
            if a.res_name in AMINO_ACIDS_3 or (is_water and spec.keep_water):
                kept.append(a)
            else:
                removed_het += 1
        atoms = kept

    added_heavy = 0
    added_h = 0
    removed_h = 0
    next_serial = max((a.serial for a in atoms), default=0) + 1
    out: list[Atom] = []

    # Group into residues preserving order.
    res_order: list[tuple[str, int, str]] = []
    res_atoms: dict[tuple[str, int, str], list[Atom]] = {}
    for a in atoms:
        key = a.residue_key
        if key not in res_atoms:
            res_atoms[key] = []
            res_order.append(key)
        res_atoms[key].append(a)

    prev_in_chain: dict[str, tuple[int, dict[str, np.ndarray]]] = {}
    for key in res_order:
        chain, seq, rname = key
        ratoms = list(res_atoms[key])
        names = {a.name for a in ratoms}
        pos = {a.name: a.position for a in ratoms}
        template_atom = ratoms[0]

        def _add(name: str, element: str, p: np.ndarray, het: bool = False) -> None:
            nonlocal next_serial
            ratoms.append(
                Atom(
                    serial=next_serial, name=name, element=element, res_name=rname,
                    res_seq=seq, chain_id=chain,
                    x=float(p[0]), y=float(p[1]), z=float(p[2]), het=het,
                )
            )
            names.add(name)
            pos[name] = p
            next_serial += 1

        if spec.add_missing_heavy_atoms and rname in AMINO_ACIDS_3:
            if not {"N", "CA", "C"} <= names:
                warnings.append(
                    f"{rname} {chain}{seq}: backbone incomplete, heavy-atom rebuild skipped"
                )
            else:
                if "O" not in names:
                    _add("O", "O", place_atom(pos["N"], pos["CA"], pos["C"], 1.231, 120.8, 135.0))
                    added_heavy += 1
                if rname != "GLY" and "CB" not in names:
                    _add("CB", "C", place_atom(pos["C"], pos["N"], pos["CA"], 1.53, 110.5, 122.5))
                    added_heavy += 1
                for name, (a3, a2, a1), bond, angle, dihedral in _SC[rname]:
                    if name in names:
                        continue
                    if not {a3, a2, a1} <= names:
                        warnings.append(f"{rname} {chain}{seq}: anchors missing for {name}")
                        continue
                    _add(name, name[0], place_atom(pos[a3], pos[a2], pos[a1], bond, angle, dihedral))
                    added_heavy += 1
        elif spec.add_missing_heavy_atoms and rname not in AMINO_ACIDS_3 and rname not in WATER_RESIDUES:
            warnings.append(f"{rname} {chain}{seq}: no residue template, left untouched")

        if spec.add_hydrogens and rname in AMINO_ACIDS_3:
            # Backbone amide H, built from the preceding carbonyl.
            prev = prev_in_chain.get(chain)
            if (
                "H" not in names and rname != "PRO" and "N" in names
                and prev is not None and prev[0] == seq - 1
                and "C" in prev[1] and "O" in prev[1]
            ):
                d = prev[1]["C"] - prev[1]["O"]
                nrm = np.linalg.norm(d)
                if nrm > 1e-9:
                    _add("H", "H", pos["N"] + 1.01 * d / nrm)
                    added_h += 1
            # Titratable side chain: protonate iff pH < pKa.
            if rname in SIDECHAIN_PKA:
                proton = TITRATABLE_PROTON[rname]
                protonated = spec.target_pH < SIDECHAIN_PKA[rname]
                if protonated and proton not in names:
                    a3, a2, a1 = _PROTON_ANCHORS[rname]
                    if {a3, a2, a1} <= names:
                        _add(proton, "H", place_atom(pos[a3], pos[a2], pos[a1], 0.97, 109.5, 0.0))
                        added_h += 1
                    else:
                        warnings.append(f"{rname} {chain}{seq}: cannot place {proton}, anchors missing")
                elif not protonated and proton in names:
                    ratoms = [a for a in ratoms if a.name != proton]
                    names.discard(proton)
                    removed_h += 1

        prev_in_chain[chain] = (seq, pos)
        out.extend(ratoms)

    note = (
        f"cleaned at pH {spec.target_pH} (removed {removed_het} heterogen atoms, "
        f"added {added_heavy} heavy atoms, +{added_h}/-{removed_h} hydrogens)"
    )
    cleaned = Structure(
        atoms=out,
        source="cleaned",
        provenance=(structure.provenance + "; " if structure.provenance else "") + note,
        title=structure.title,
    )
    return CleanReport(
        structure=cleaned,
        removed_heterogens=removed_het,
        added_heavy_atoms=added_heavy,
        added_hydrogens=added_h,
        removed_hydrogens=removed_h,
        warnings=warnings,
    )


def summarize_structure(structure: Structure) -> str:
    c = structure.counts()
    kinds = ", ".join(f"{k}: {v}" for k, v in c["residues_per_kind"].items()) or "none"
    return (
        f"atoms: {c['atoms']}, residues: {c['residues']}, chains: {c['chains']}, "
        f"waters: {c['waters']}, heterogen residues: {c['heterogen_residues']}. "
        f"Residues per kind: {kinds}."
    )


def render_structure(
    structure: Structure, out_path: str | Path, width: int = 640, height: int = 480
) -> Path:
    if len(structure) < 1:
        raise PdbToolError("cannot render an empty structure")
    from ..imaging import render_structure_projection

    return render_structure_projection(
        structure.coordinates,
        [a.element for a in structure.atoms],
        out_path,
        width=width,
        height=height,
    )
