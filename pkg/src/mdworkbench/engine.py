"""Desk-scale MD engine behind the engine-adapter contract.

Forces are harmonic bonds + optional per-element Lennard-Jones with a
cutoff + optional isotropic harmonic restraints.  Integration is BAOAB
Langevin (velocity Verlet when friction is zero, i.e. NVE); NPT adds a
Monte-Carlo barostat move every 25 steps.  Everything is deterministic
given the seed.

Units: A, amu, kcal/mol; time handled internally in sqrt(amu*A^2/kcal/mol)
units and exposed in fs/ps.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import ATM_TO_KCAL_PER_A3, KB_KCAL, TIME_UNIT_FS

BAROSTAT_INTERVAL = 25
TRAJ_MAGIC = b"MDWTRJ1\n"


class EngineError(Exception):
    pass


class InstabilityError(EngineError):
    """Non-finite energy or force during integration."""


@dataclass
class HarmonicBond:
    i: int
    j: int
    r0: float  # A
    k: float  # kcal/mol/A^2


@dataclass
class HarmonicWell:
    """Isotropic restraint U = 0.5 * k * |r - center|^2."""

    index: int
    center: np.ndarray
    k: float


@dataclass
class MDSystem:
    masses: np.ndarray  # (N,)
    positions: np.ndarray  # (N, 3)
    bonds: list[HarmonicBond] = field(default_factory=list)
    wells: list[HarmonicWell] = field(default_factory=list)
    lj_epsilon: np.ndarray | None = None  # (N,) kcal/mol
    lj_sigma: np.ndarray | None = None  # (N,) A
    lj_cutoff: float = 10.0  # A
    box_edge: float | None = None  # cubic box, A; None = non-periodic
    exclusions: set[frozenset] = field(default_factory=set)

    @property
    def n_atoms(self) -> int:
        return len(self.masses)


def _min_image(d: np.ndarray, box: float | None) -> np.ndarray:
    if box is None:
        return d
    return d - box * np.round(d / box)


def compute_forces(system: MDSystem, positions: np.ndarray, box: float | None):
    """Return (potential energy, forces)."""
    n = system.n_atoms
    forces = np.zeros((n, 3))
    energy = 0.0
    for b in system.bonds:
        d = _min_image(positions[b.j] - positions[b.i], box)
        r = float(np.linalg.norm(d))
        if r < 1e-12:
            raise InstabilityError(f"bonded atoms {b.i},{b.j} coincide")
        dr = r - b.r0
        energy += 0.5 * b.k * dr * dr
        f = (b.k * dr / r) * d
        forces[b.i] += f
        forces[b.j] -= f
    for w in system.wells:
        d = positions[w.index] - w.center
        energy += 0.5 * w.k * float(d @ d)
        forces[w.index] -= w.k * d
    if system.lj_epsilon is not None and n > 1:
        eps = system.lj_epsilon
        sig = system.lj_sigma
        cutoff = system.lj_cutoff
        for i in range(n - 1):
            d = positions[i + 1 :] - positions[i]
            d = _min_image(d, box)
            r2 = np.einsum("ij,ij->i", d, d)
            e_ij = np.sqrt(eps[i] * eps[i + 1 :])
            s_ij = 0.5 * (sig[i] + sig[i + 1 :])
            mask = (r2 < cutoff * cutoff) & (r2 > 1e-12) & (e_ij > 0)
            for off in np.nonzero(mask)[0]:
                j = i + 1 + off
                if frozenset((i, j)) in system.exclusions:
                    continue
                inv_r2 = float(s_ij[off] ** 2 / r2[off])
                inv_r6 = inv_r2**3
                inv_r12 = inv_r6**2
                energy += 4 * e_ij[off] * (inv_r12 - inv_r6)
                fmag = 24 * e_ij[off] * (2 * inv_r12 - inv_r6) / r2[off]
                fv = fmag * d[off]
                forces[i] -= fv
                forces[j] += fv
    if not np.all(np.isfinite(forces)) or not np.isfinite(energy):
        raise InstabilityError("non-finite force or energy")
    return energy, forces


@dataclass
class Trajectory:
    frames: np.ndarray  # (F, N, 3) A
    times_ps: np.ndarray  # (F,)
    box_per_frame: np.ndarray  # (F,) edge length A; 0 when non-periodic
    state_log: list[dict]  # step, potential, kinetic, temperature, volume

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def n_atoms(self) -> int:
        return self.frames.shape[1]


@dataclass
class IntegrationSettings:
    ensemble: str  # NVE | NVT | NPT
    temperature: float  # K
    timestep_fs: float
    n_steps: int
    friction_per_ps: float = 1.0
    pressure_atm: float | None = None
    record_interval: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.ensemble not in ("NVE", "NVT", "NPT"):
            raise EngineError(f"unknown ensemble {self.ensemble!r}")
        if self.ensemble != "NVE" and self.temperature <= 0:
            raise EngineError("temperature must be > 0 for NVT/NPT")
        if not (0 < self.timestep_fs <= 5):
            raise EngineError("timestep must be in (0, 5] fs")
        if self.n_steps < 1:
            raise EngineError("n_steps must be >= 1")
        if self.record_interval < 1:
            raise EngineError("record_interval must be >= 1")
        if self.ensemble == "NPT" and self.pressure_atm is None:
            raise EngineError("NPT requires a pressure")


def integrate(system: MDSystem, settings: IntegrationSettings) -> Trajectory:
    """Run the integrator and record F = floor(n_steps/record_interval) + 1
    frames (the initial frame plus every record_interval-th step)."""
    settings.validate()
    rng = np.random.default_rng(settings.seed)
    n = system.n_atoms
    m = system.masses.reshape(-1, 1)
    dt = settings.timestep_fs / TIME_UNIT_FS
    gamma = settings.friction_per_ps * TIME_UNIT_FS / 1000.0
    kt = KB_KCAL * max(settings.temperature, 0.0)
    box = system.box_edge

    x = system.positions.copy()
    if settings.ensemble == "NVE" or settings.temperature <= 0:
        v = np.zeros((n, 3))
    else:
        v = rng.standard_normal((n, 3)) * np.sqrt(kt / m)
    if settings.ensemble == "NVE":
        gamma = 0.0

    if gamma > 0:
        c1 = float(np.exp(-gamma * dt))
        c2 = float(np.sqrt(max(0.0, 1.0 - c1 * c1)))
    else:
        c1, c2 = 1.0, 0.0
    sigma_v = np.sqrt(kt / m) if kt > 0 else np.zeros_like(m)

    pe, forces = compute_forces(system, x, box)
    frames = [x.copy()]
    boxes = [box or 0.0]
    times = [0.0]
    log: list[dict] = []

    def record(step: int, pe_val: float) -> None:
        ke = float(0.5 * np.sum(m * v * v))
        dof = max(1, 3 * n)
        temp = 2.0 * ke / (dof * KB_KCAL)
        vol = (box or 0.0) ** 3 if box else 0.0
        log.append(
            {
                "step": step,
                "potential_kcal_mol": pe_val,
                "kinetic_kcal_mol": ke,
                "temperature_K": temp,
                "volume_A3": vol,
            }
        )

    record(0, pe)
    for step in range(1, settings.n_steps + 1):
        # BAOAB: B half kick, A half drift, O bath, A half drift, B half kick.
        v += 0.5 * dt * forces / m
        x += 0.5 * dt * v
        if gamma > 0:
            v = c1 * v + c2 * sigma_v * rng.standard_normal((n, 3))
        x += 0.5 * dt * v
        pe, forces = compute_forces(system, x, box)
        v += 0.5 * dt * forces / m

        if settings.ensemble == "NPT" and step % BAROSTAT_INTERVAL == 0 and box:
            box, x, pe, forces = _barostat_move(
                system, x, box, pe, settings.pressure_atm or 1.0, kt, rng
            )

        if step % settings.record_interval == 0:
            frames.append(x.copy())
            boxes.append(box or 0.0)
            times.append(step * settings.timestep_fs / 1000.0)
            record(step, pe)

    return Trajectory(
        frames=np.array(frames),
        times_ps=np.array(times),
        box_per_frame=np.array(boxes),
        state_log=log,
    )


def _barostat_move(system, x, box, pe, pressure_atm, kt, rng):
    """Isotropic MC volume move with the standard Metropolis NPT weight."""
    n = system.n_atoms
    p_internal = pressure_atm * ATM_TO_KCAL_PER_A3
    v_old = box**3
    dv = (rng.random() * 2.0 - 1.0) * 0.02 * v_old
    v_new = v_old + dv
    if v_new <= 0:
        return box, x, pe, compute_forces(system, x, box)[1]
    box_new = v_new ** (1.0 / 3.0)
    scale = box_new / box
    x_new = x * scale
    try:
        pe_new, f_new = compute_forces(system, x_new, box_new)
    except InstabilityError:
        return box, x, pe, compute_forces(system, x, box)[1]
    if kt <= 0:
        accept = pe_new + p_internal * dv <= pe
    else:
        arg = -(pe_new - pe + p_internal * dv - n * kt * np.log(v_new / v_old)) / kt
        accept = np.log(rng.random() + 1e-300) < arg
    if accept:
        return box_new, x_new, pe_new, f_new
    return box, x, pe, compute_forces(system, x, box)[1]


def write_trajectory(traj: Trajectory, path: str | Path) -> None:
    """Self-describing binary container: magic, header (N, F, little-endian),
    then per frame: time (ps), box edge, N*3 float64 coordinates."""
    p = Path(path)
    with p.open("wb") as fh:
        fh.write(TRAJ_MAGIC)
        fh.write(struct.pack("<qq", traj.n_atoms, traj.n_frames))
        for i in range(traj.n_frames):
            fh.write(struct.pack("<dd", float(traj.times_ps[i]), float(traj.box_per_frame[i])))
            fh.write(traj.frames[i].astype("<f8").tobytes())


def read_trajectory(path: str | Path) -> Trajectory:
    p = Path(path)
    with p.open("rb") as fh:
        magic = fh.read(len(TRAJ_MAGIC))
        if magic != TRAJ_MAGIC:
            raise EngineError(f"not a trajectory file: {p}")
        n, f = struct.unpack("<qq", fh.read(16))
        frames = np.empty((f, n, 3))
        times = np.empty(f)
        boxes = np.empty(f)
        for i in range(f):
            times[i], boxes[i] = struct.unpack("<dd", fh.read(16))
            frames[i] = np.frombuffer(fh.read(n * 24), dtype="<f8").reshape(n, 3)
    return Trajectory(frames=frames, times_ps=times, box_per_frame=boxes, state_log=[])


def write_state_log(log: list[dict], path: str | Path) -> None:
    lines = ["step,potential_kcal_mol,kinetic_kcal_mol,temperature_K,volume_A3"]
    for rec in log:
        lines.append(
            f"{rec['step']},{rec['potential_kcal_mol']:.8f},{rec['kinetic_kcal_mol']:.8f},"
            f"{rec['temperature_K']:.6f},{rec['volume_A3']:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_state_log(path: str | Path) -> list[dict]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    out = []
    for line in lines[1:]:
        vals = line.split(",")
        rec = dict(zip(header, vals))
        out.append(
            {
                "step": int(rec["step"]),
                "potential_kcal_mol": float(rec["potential_kcal_mol"]),
                "kinetic_kcal_mol": float(rec["kinetic_kcal_mol"]),
                "temperature_K": float(rec["temperature_K"]),
                "volume_A3": float(rec["volume_A3"]),
            }
        )
    return out
