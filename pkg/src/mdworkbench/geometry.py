"""Rigid-body fitting and internal-coordinate atom placement."""

from __future__ import annotations

import numpy as np


def kabsch_rotation(mobile: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Optimal proper rotation aligning centered `mobile` onto centered
    `reference`.  Reflections are rejected by sign-flipping the smallest
    singular vector."""
    h = mobile.T @ reference
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(u @ vt))
    flip = np.diag([1.0, 1.0, d])
    return (u @ flip @ vt).T


def superpose(mobile: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Return `mobile` rigidly superposed onto `reference` (both N x 3)."""
    mc = mobile.mean(axis=0)
    rc = reference.mean(axis=0)
    rot = kabsch_rotation(mobile - mc, reference - rc)
    return (mobile - mc) @ rot.T + rc


def superpose_transform(
    mobile: np.ndarray, reference: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rotation and centroids such that (x - mc) @ R.T + rc superposes."""
    mc = mobile.mean(axis=0)
    rc = reference.mean(axis=0)
    rot = kabsch_rotation(mobile - mc, reference - rc)
    return rot, mc, rc


def place_atom(
    a: np.ndarray, b: np.ndarray, c: np.ndarray,
    bond: float, angle_deg: float, dihedral_deg: float,
) -> np.ndarray:
    """Place a new atom D given three anchor atoms A-B-C, the C-D bond
    length, the B-C-D angle, and the A-B-C-D dihedral (NeRF extension)."""
    angle = np.deg2rad(angle_deg)
    dihedral = np.deg2rad(dihedral_deg)
    bc = c - b
    bc /= np.linalg.norm(bc)
    ab = b - a
    n = np.cross(ab, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    d_local = np.array([
        -bond * np.cos(angle),
        bond * np.sin(angle) * np.cos(dihedral),
        -bond * np.sin(angle) * np.sin(dihedral),
    ])
    return c + d_local[0] * bc + d_local[1] * m + d_local[2] * n


# Ideal peptide geometry (lengths in A, angles in degrees).
N_CA = 1.458
CA_C = 1.525
C_N = 1.329
C_O = 1.231
ANGLE_N_CA_C = 111.2
ANGLE_CA_C_N = 116.2
ANGLE_C_N_CA = 121.7
ANGLE_CA_C_O = 120.8


def build_backbone(
    n_residues: int, phi_deg: float, psi_deg: float, omega_deg: float = 180.0
) -> list[dict[str, np.ndarray]]:
    """Generate ideal-geometry backbone coordinates (N, CA, C, O per
    residue) for a homopolymer chain at fixed (phi, psi)."""
    if n_residues < 1:
        raise ValueError("need at least one residue")
    residues: list[dict[str, np.ndarray]] = []
    n0 = np.array([0.0, 0.0, 0.0])
    ca0 = np.array([N_CA, 0.0, 0.0])
    c0 = place_atom(
        np.array([-1.0, 1.0, 0.0]), n0, ca0, CA_C, ANGLE_N_CA_C, 0.0
    )
    prev = {"N": n0, "CA": ca0, "C": c0}
    residues.append(prev)
    for _ in range(1, n_residues):
        n = place_atom(prev["N"], prev["CA"], prev["C"], C_N, ANGLE_CA_C_N, psi_deg)
        ca = place_atom(prev["CA"], prev["C"], n, N_CA, ANGLE_C_N_CA, omega_deg)
        c = place_atom(prev["C"], n, ca, CA_C, ANGLE_N_CA_C, phi_deg)
        cur = {"N": n, "CA": ca, "C": c}
        residues.append(cur)
        prev = cur
    # Carbonyl O: in the peptide plane, trans to the next N (or to an
    # extrapolated direction for the last residue).
    for i, res in enumerate(residues):
        if i + 1 < len(residues):
            next_n = residues[i + 1]["N"]
            res["O"] = place_atom(next_n, res["CA"], res["C"], C_O, ANGLE_CA_C_O, 180.0)
        else:
            res["O"] = place_atom(res["N"], res["CA"], res["C"], C_O, ANGLE_CA_C_O, -45.0)
    return residues
