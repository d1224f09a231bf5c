"""Trajectory analysis: RMSD, RMSF, radius of gyration, secondary
structure, PCA, SASA, RDF, moments of inertia, and figure emission.

All operations are pure functions of immutable inputs.  Coordinates are
(F, N, 3) arrays in A; topology metadata comes from a Structure whose
atom order matches the trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constants import KB_KCAL, element_mass, vdw_radius  # noqa: F401  (kB unused here, masses are)
from ..geometry import kabsch_rotation
from ..structure import Atom, Structure


class AnalysisError(Exception):
    pass


BACKBONE_NAMES = {"N", "CA", "C", "O"}


@dataclass(frozen=True)
class Selection:
    """Atom predicate: optional chain, residue range, and a name class."""

    chain_id: str | None = None
    res_first: int | None = None
    res_last: int | None = None
    name_class: str = "all"  # all | heavy | backbone | calpha

    def indices(self, topology: Structure) -> np.ndarray:
        idx = []
        for i, a in enumerate(topology.atoms):
            if self.chain_id is not None and a.chain_id != self.chain_id:
                continue
            if self.res_first is not None and a.res_seq < self.res_first:
                continue
            if self.res_last is not None and a.res_seq > self.res_last:
                continue
            if self.name_class == "heavy" and a.element.upper() == "H":
                continue
            if self.name_class == "backbone" and a.name not in BACKBONE_NAMES:
                continue
            if self.name_class == "calpha" and a.name != "CA":
                continue
            idx.append(i)
        return np.array(idx, dtype=int)

    def require(self, topology: Structure) -> np.ndarray:
        idx = self.indices(topology)
        if len(idx) == 0:
            raise AnalysisError(f"empty selection: {self}")
        return idx


@dataclass
class SeriesResult:
    label: str
    x: np.ndarray
    y: np.ndarray
    x_unit: str
    y_unit: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.x) != len(self.y):
            raise AnalysisError("series x and y lengths differ")
        if not self.x_unit or not self.y_unit:
            raise AnalysisError("series units must be non-empty")

    def to_csv(self) -> str:
        lines = [f"# label: {self.label}", f"# x_unit: {self.x_unit}", f"# y_unit: {self.y_unit}"]
        for k, v in sorted(self.provenance.items()):
            lines.append(f"# {k}: {v}")
        lines.append("x,y")
        for xv, yv in zip(self.x, self.y):
            lines.append(f"{xv:.10g},{yv:.10g}")
        return "\n".join(lines) + "\n"


def _superpose_frames(frames: np.ndarray, reference: np.ndarray) -> np.ndarray:
    out = np.empty_like(frames)
    ref_c = reference - reference.mean(axis=0)
    for f in range(len(frames)):
        mob = frames[f]
        mc = mob.mean(axis=0)
        rot = kabsch_rotation(mob - mc, ref_c)
        out[f] = (mob - mc) @ rot.T + reference.mean(axis=0)
    return out


def rmsd(
    frames: np.ndarray,
    reference: np.ndarray,
    times_ps: np.ndarray,
    topology: Structure | None = None,
    selection: Selection | None = None,
    superpose: bool = True,
    provenance: dict | None = None,
) -> SeriesResult:
    sel = (selection or Selection()).require(topology) if topology is not None else np.arange(frames.shape[1])
    sub = frames[:, sel, :]
    ref = reference[sel, :] if reference.shape[0] == frames.shape[1] else reference
    if ref.shape[0] != sub.shape[1]:
        raise AnalysisError(
            f"reference atom count {ref.shape[0]} does not match selection size {sub.shape[1]}"
        )
    if superpose:
        sub = _superpose_frames(sub, ref)
    diff = sub - ref[None, :, :]
    vals = np.sqrt(np.mean(np.einsum("fij,fij->fi", diff, diff), axis=1))
    return SeriesResult("RMSD", times_ps, vals, "ps", "A", provenance or {})


def rmsf(
    frames: np.ndarray,
    topology: Structure | None = None,
    selection: Selection | None = None,
    superpose: bool = True,
) -> np.ndarray:
    """Per-atom fluctuation about the time-mean position, after per-frame
    superposition onto the mean structure (two alignment passes)."""
    if len(frames) < 2:
        raise AnalysisError("RMSF needs at least 2 frames")
    sel = (selection or Selection()).require(topology) if topology is not None else np.arange(frames.shape[1])
    sub = frames[:, sel, :].astype(float)
    if superpose:
        mean = sub.mean(axis=0)
        for _ in range(2):
            sub = _superpose_frames(sub, mean)
            mean = sub.mean(axis=0)
    mean = sub.mean(axis=0)
    diff = sub - mean[None, :, :]
    return np.sqrt(np.mean(np.einsum("fij,fij->fi", diff, diff), axis=0))


def radius_of_gyration(
    frames: np.ndarray,
    times_ps: np.ndarray,
    topology: Structure | None = None,
    mass_weighted: bool = True,
    provenance: dict | None = None,
) -> SeriesResult:
    if frames.shape[1] < 1:
        raise AnalysisError("radius of gyration needs at least one atom")
    if mass_weighted and topology is not None:
        w = topology.masses()
    else:
        w = np.ones(frames.shape[1])
    wsum = w.sum()
    com = np.einsum("fij,i->fj", frames, w) / wsum
    diff = frames - com[:, None, :]
    vals = np.sqrt(np.einsum("fij,fij,i->f", diff, diff, w) / wsum)
    return SeriesResult("RGy", times_ps, vals, "ps", "A", provenance or {})


def moments_of_inertia(
    frames: np.ndarray, times_ps: np.ndarray, topology: Structure
) -> np.ndarray:
    """Principal moments (ascending) per frame, amu*A^2; shape (F, 3)."""
    m = topology.masses()
    out = np.empty((len(frames), 3))
    for f, coords in enumerate(frames):
        com = (m[:, None] * coords).sum(axis=0) / m.sum()
        d = coords - com
        xx = np.sum(m * (d[:, 1] ** 2 + d[:, 2] ** 2))
        yy = np.sum(m * (d[:, 0] ** 2 + d[:, 2] ** 2))
        zz = np.sum(m * (d[:, 0] ** 2 + d[:, 1] ** 2))
        xy = -np.sum(m * d[:, 0] * d[:, 1])
        xz = -np.sum(m * d[:, 0] * d[:, 2])
        yz = -np.sum(m * d[:, 1] * d[:, 2])
        tensor = np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])
        out[f] = np.sort(np.linalg.eigvalsh(tensor))
    return out


def pca(
    frames: np.ndarray,
    topology: Structure | None = None,
    selection: Selection | None = None,
    n_components: int = 3,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coordinate covariance eigendecomposition after superposition to the
    mean.  Returns (components (modes x 3N), eigenvalues descending,
    projections (F x k))."""
    if len(frames) < 2:
        raise AnalysisError("PCA needs at least 2 frames")
    sel = (selection or Selection()).require(topology) if topology is not None else np.arange(frames.shape[1])
    sub = frames[:, sel, :].astype(float)
    mean = sub.mean(axis=0)
    for _ in range(2):
        sub = _superpose_frames(sub, mean)
        mean = sub.mean(axis=0)
    flat = (sub - mean[None, :, :]).reshape(len(sub), -1)
    cov = flat.T @ flat / len(flat)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    # Sign convention: largest-magnitude entry positive.
    for j in range(vecs.shape[1]):
        k = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[k, j] < 0:
            vecs[:, j] = -vecs[:, j]
    comps = vecs.T
    proj = flat @ vecs[:, :n_components]
    return comps, vals, proj


# ---------------------------------------------------------------------------
# Secondary structure (hydrogen-bond energy patterns, 3-class reduction)

HBOND_Q1Q2_F = 0.084 * 332.0
HBOND_CUTOFF = -0.5  # kcal/mol


def _backbone_index(topology: Structure) -> list[dict[str, int]]:
    residues = []
    for (chain, seq, name), atoms in topology.residues():
        entry: dict = {"chain": chain, "seq": seq, "name": name, "atoms": {}}
        for i, a in enumerate(topology.atoms):
            if a.residue_key == (chain, seq, name) and a.name in ("N", "CA", "C", "O", "H"):
                entry["atoms"][a.name] = i
        residues.append(entry)
    return residues


def hbond_energies(coords: np.ndarray, topology: Structure) -> tuple[np.ndarray, list]:
    """Backbone H-bond energy matrix E[donor_res, acceptor_res].

    E = 0.084*332*(1/r_ON + 1/r_CH - 1/r_OH - 1/r_CN); amide H positions
    are built geometrically when absent (1.01 A from N, anti-parallel to
    the preceding carbonyl)."""
    residues = _backbone_index(topology)
    n = len(residues)
    energies = np.zeros((n, n))
    h_pos: list[np.ndarray | None] = [None] * n
    for i, res in enumerate(residues):
        ats = res["atoms"]
        if "H" in ats:
            h_pos[i] = coords[ats["H"]]
        elif i > 0 and "N" in ats and res["name"] != "PRO":
            prev = residues[i - 1]["atoms"]
            if (
                "C" in prev and "O" in prev
                and residues[i - 1]["chain"] == res["chain"]
                and residues[i - 1]["seq"] == res["seq"] - 1
            ):
                d = coords[prev["C"]] - coords[prev["O"]]
                nrm = np.linalg.norm(d)
                if nrm > 1e-9:
                    h_pos[i] = coords[ats["N"]] + 1.01 * d / nrm
    for i in range(n):  # donor (N-H of residue i)
        ats_i = residues[i]["atoms"]
        if "N" not in ats_i or h_pos[i] is None:
            continue
        for j in range(n):  # acceptor (C=O of residue j)
            if abs(i - j) < 2:
                continue
            ats_j = residues[j]["atoms"]
            if "C" not in ats_j or "O" not in ats_j:
                continue
            npos, hpos = coords[ats_i["N"]], h_pos[i]
            cpos, opos = coords[ats_j["C"]], coords[ats_j["O"]]
            r_on = np.linalg.norm(opos - npos)
            r_ch = np.linalg.norm(cpos - hpos)
            r_oh = np.linalg.norm(opos - hpos)
            r_cn = np.linalg.norm(cpos - npos)
            if min(r_on, r_ch, r_oh, r_cn) < 0.5:
                energies[i, j] = -9.9
            else:
                energies[i, j] = HBOND_Q1Q2_F * (1 / r_on + 1 / r_ch - 1 / r_oh - 1 / r_cn)
    return energies, residues


def secondary_structure(coords: np.ndarray, topology: Structure) -> list[str]:
    """Per-residue classes in {H, E, C}: helix from i->i+4 turn patterns,
    strand from bridge patterns, else coil.  Residues missing backbone
    atoms are coil."""
    energies, residues = hbond_energies(coords, topology)
    n = len(residues)
    classes = ["C"] * n
    # hbond(donor=i, acceptor=j): N-H(i) ... O=C(j)
    bond = energies < HBOND_CUTOFF

    # Strand: antiparallel and parallel bridge patterns, |i-j| >= 3.
    for i in range(n):
        for j in range(i + 3, n):
            anti = (bond[i, j] and bond[j, i]) or (
                i - 1 >= 0 and i + 1 < n and j - 1 >= 0 and j + 1 < n
                and bond[j + 1, i - 1] and bond[i + 1, j - 1]
            )
            para = (
                i - 1 >= 0 and i + 1 < n and bond[j, i - 1] and bond[i + 1, j]
            ) or (
                j - 1 >= 0 and j + 1 < n and bond[i, j - 1] and bond[j + 1, i]
            )
            if anti or para:
                classes[i] = "E"
                classes[j] = "E"
    # Helix (takes priority): a 4-turn at j means hbond(j+4 -> j); mark the
    # turn's residues helical.
    for j in range(n - 4):
        if bond[j + 4, j]:
            for k in range(j, j + 5):
                classes[k] = "H"
    return classes


def secondary_structure_counts(classes: list[str]) -> dict[str, int]:
    return {
        "helix": classes.count("H"),
        "strand": classes.count("E"),
        "coil": classes.count("C"),
    }


# ---------------------------------------------------------------------------
# SASA (probe-rolled spherical quadrature on a deterministic spiral lattice)


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5**0.5) * i
    return np.stack(
        [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)], axis=1
    )


def sasa(
    coords: np.ndarray,
    topology: Structure,
    probe_radius: float = 1.4,
    n_points: int = 960,
) -> tuple[np.ndarray, float]:
    """Per-atom accessible area (A^2) and the total.  Unknown elements are
    errors (no silent radius defaults)."""
    radii = np.array([vdw_radius(a.element) + probe_radius for a in topology.atoms])
    sphere = _fibonacci_sphere(n_points)
    n = len(coords)
    areas = np.empty(n)
    for i in range(n):
        pts = coords[i] + radii[i] * sphere
        exposed = np.ones(n_points, dtype=bool)
        for j in range(n):
            if j == i:
                continue
            d2 = np.einsum("ij,ij->i", pts - coords[j], pts - coords[j])
            exposed &= d2 > radii[j] ** 2
            if not exposed.any():
                break
        areas[i] = 4.0 * np.pi * radii[i] ** 2 * exposed.sum() / n_points
    return areas, float(areas.sum())


def sasa_per_residue(
    coords: np.ndarray, topology: Structure, probe_radius: float = 1.4, n_points: int = 960
) -> dict[tuple[str, int, str], float]:
    per_atom, _ = sasa(coords, topology, probe_radius, n_points)
    out: dict[tuple[str, int, str], float] = {}
    for a, area in zip(topology.atoms, per_atom):
        out[a.residue_key] = out.get(a.residue_key, 0.0) + float(area)
    return out


# ---------------------------------------------------------------------------
# RDF


def rdf(
    frames: np.ndarray,
    box_per_frame: np.ndarray,
    indices_a: np.ndarray,
    indices_b: np.ndarray,
    r_max: float,
    n_bins: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """g(r) histogram under the minimum-image convention, normalized by
    ideal-gas shell counts and frames.  Returns (bin centers, g)."""
    if len(indices_a) == 0 or len(indices_b) == 0:
        raise AnalysisError("RDF selections must be non-empty")
    boxes = np.asarray(box_per_frame, dtype=float)
    if np.any(boxes <= 0):
        raise AnalysisError("RDF requires a periodic box on every frame")
    legal = boxes.min() / 2.0
    if r_max > legal + 1e-9:
        raise AnalysisError(f"r_max {r_max} exceeds half the minimum box edge ({legal:.4f})")
    edges = np.linspace(0.0, r_max, n_bins + 1)
    counts = np.zeros(n_bins)
    shell_expect = np.zeros(n_bins)
    same = indices_a.shape == indices_b.shape and np.array_equal(indices_a, indices_b)
    for f in range(len(frames)):
        box = boxes[f]
        a = frames[f][indices_a]
        b = frames[f][indices_b]
        d = a[:, None, :] - b[None, :, :]
        d -= box * np.round(d / box)
        r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
        if same:
            iu = np.triu_indices(len(a), k=1)
            rr = r[iu]
            n_pairs_density = len(indices_b) - 1
        else:
            rr = r.ravel()
            n_pairs_density = len(indices_b)
        hist, _ = np.histogram(rr, bins=edges)
        pair_factor = 0.5 if same else 1.0
        counts += hist
        rho = n_pairs_density / box**3
        shells = 4.0 / 3.0 * np.pi * (edges[1:] ** 3 - edges[:-1] ** 3)
        shell_expect += pair_factor * len(indices_a) * rho * shells
    centers = 0.5 * (edges[:-1] + edges[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(shell_expect > 0, counts / shell_expect, 0.0)
    return centers, g


# ---------------------------------------------------------------------------
# Figures


def plot_series(
    series: list[SeriesResult], title: str, out_path: str | Path
) -> Path:
    if not series:
        raise AnalysisError("plot_series needs at least one series")
    y_units = {s.y_unit for s in series}
    x_units = {s.x_unit for s in series}
    if len(y_units) > 1 or len(x_units) > 1:
        raise AnalysisError(f"mixed units on one axis: x={sorted(x_units)}, y={sorted(y_units)}")
    from ..imaging import plot_line_series

    return plot_line_series(
        [(s.label, s.x, s.y) for s in series],
        title=title,
        xlabel=f"time ({series[0].x_unit})",
        ylabel=series[0].y_unit,
        path=out_path,
    )
