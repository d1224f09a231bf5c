"""Simulation tools: parameter assembly with recoverable diagnostics,
solvent packing, run execution through an engine adapter, and editable
run-script emission/modification."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constants import (
    AMINO_ACIDS_3,
    DENSITY_FACTOR,
    SOLVENT_INFO,
    WATER_RESIDUES,
    element_mass,
    vdw_radius,
)
from ..engine import (
    EngineError,
    HarmonicBond,
    IntegrationSettings,
    InstabilityError,
    MDSystem,
    Trajectory,
    integrate,
    write_state_log,
    write_trajectory,
)
from ..llm import ChatMessage, LLMGateway
from ..registry import FileRegistry
from ..structure import Atom, Structure

KNOWN_FORCEFIELDS = ("toy-lj",)
DEFAULT_TIMESTEP_FS = 2.0
DEFAULT_FRICTION = 1.0
DEFAULT_CUTOFF_A = 10.0
DEFAULT_SEED = 2024
MAX_RECORDED_FRAMES = 1000
DEFAULT_MIN_DISTANCE_A = 2.0
SCRIPT_SCHEMA = "mdworkbench-runscript/1"


class SpecDiagnostic(Exception):
    """Structured parameter error; the text is the agent's recovery signal."""

    def __init__(self, field_name: str, message: str, example: str):
        self.field_name = field_name
        super().__init__(f"invalid or missing field '{field_name}': {message} (example: {example})")


@dataclass
class SolvationSpec:
    solvent: str = "water"
    box_edge: float | None = None  # A
    padding: float | None = None  # A
    target_density: float | None = None  # g/cm^3; None = solvent default
    min_distance: float = DEFAULT_MIN_DISTANCE_A

    def __post_init__(self) -> None:
        if self.solvent not in SOLVENT_INFO:
            raise SpecDiagnostic("solvent", f"unknown solvent {self.solvent!r}", "solvent=water")
        if self.min_distance <= 0:
            raise SpecDiagnostic("min_distance_A", "must be > 0", "min_distance_A=2.0")

    def density(self) -> float:
        return self.target_density if self.target_density is not None else SOLVENT_INFO[self.solvent][2]


@dataclass
class SystemSpec:
    structure: str  # file id or path
    forcefield_id: str = "toy-lj"
    ensemble: str = "NVT"
    temperature: float = 300.0  # K
    pressure: float | None = None  # atm
    timestep: float = DEFAULT_TIMESTEP_FS  # fs
    n_steps: int = 5000
    friction: float = DEFAULT_FRICTION  # 1/ps
    nonbonded_cutoff: float = DEFAULT_CUTOFF_A  # A
    solvation: SolvationSpec | None = None
    record_interval: int = 0  # 0 = auto (<= MAX_RECORDED_FRAMES frames)
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.record_interval == 0:
            self.record_interval = max(1, -(-self.n_steps // MAX_RECORDED_FRAMES))

    def canonical(self) -> dict:
        d = {
            "structure": self.structure,
            "forcefield_id": self.forcefield_id,
            "ensemble": self.ensemble,
            "temperature": self.temperature,
            "pressure": self.pressure,
            "timestep": self.timestep,
            "n_steps": self.n_steps,
            "friction": self.friction,
            "nonbonded_cutoff": self.nonbonded_cutoff,
            "record_interval": self.record_interval,
            "seed": self.seed,
        }
        if self.solvation:
            d["solvation"] = {
                "solvent": self.solvation.solvent,
                "box_edge": self.solvation.box_edge,
                "padding": self.solvation.padding,
                "target_density": self.solvation.target_density,
                "min_distance": self.solvation.min_distance,
            }
        return d


def spec_hash(spec: SystemSpec) -> str:
    return hashlib.sha256(json.dumps(spec.canonical(), sort_keys=True).encode()).hexdigest()[:16]


def _parse_kv(raw: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for chunk in raw.replace("\n", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise SpecDiagnostic("input", f"expected key=value, got {chunk!r}", "temperature_K=300")
        k, v = chunk.split("=", 1)
        pairs[k.strip()] = v.strip()
    return pairs


_FLOAT_FIELDS = {
    "temperature_K": ("temperature", "temperature_K=300"),
    "pressure_atm": ("pressure", "pressure_atm=1.0"),
    "timestep_fs": ("timestep", "timestep_fs=2.0"),
    "friction_per_ps": ("friction", "friction_per_ps=1.0"),
    "nonbonded_cutoff_A": ("nonbonded_cutoff", "nonbonded_cutoff_A=10"),
}
_INT_FIELDS = {
    "n_steps": ("n_steps", "n_steps=5000"),
    "record_interval": ("record_interval", "record_interval=10"),
    "seed": ("seed", "seed=2024"),
}


def validate_and_complete_spec(raw: str) -> tuple[SystemSpec, list[str]]:
    """Parse a key=value tool input into a complete SystemSpec.

    Returns (spec, notes); every default the validator filled that the
    agent should know about is echoed in `notes`.
    """
    pairs = _parse_kv(raw)
    notes: list[str] = []
    if "structure" not in pairs or not pairs["structure"]:
        raise SpecDiagnostic("structure", "a structure file id or path is required", "structure=f001")
    kwargs: dict = {"structure": pairs.pop("structure")}

    ff = pairs.pop("forcefield", "toy-lj")
    if ff not in KNOWN_FORCEFIELDS:
        raise SpecDiagnostic(
            "forcefield", f"unknown forcefield {ff!r}; known: {', '.join(KNOWN_FORCEFIELDS)}",
            "forcefield=toy-lj",
        )
    kwargs["forcefield_id"] = ff

    ensemble = pairs.pop("ensemble", "NVT").upper()
    if ensemble not in ("NVE", "NVT", "NPT"):
        raise SpecDiagnostic("ensemble", f"unknown ensemble {ensemble!r}", "ensemble=NVT")
    kwargs["ensemble"] = ensemble

    for key, (attr, example) in _FLOAT_FIELDS.items():
        if key in pairs:
            value = pairs.pop(key)
            try:
                kwargs[attr] = float(value)
            except ValueError:
                raise SpecDiagnostic(key, f"unparsable value {value!r}", example) from None
    for key, (attr, example) in _INT_FIELDS.items():
        if key in pairs:
            value = pairs.pop(key)
            try:
                kwargs[attr] = int(value)
            except ValueError:
                raise SpecDiagnostic(key, f"unparsable value {value!r}", example) from None

    solv_keys = {"solvent", "box_edge_A", "padding_A", "target_density", "min_distance_A"}
    if solv_keys & set(pairs):
        try:
            kwargs["solvation"] = SolvationSpec(
                solvent=pairs.pop("solvent", "water"),
                box_edge=float(pairs.pop("box_edge_A")) if "box_edge_A" in pairs else None,
                padding=float(pairs.pop("padding_A")) if "padding_A" in pairs else None,
                target_density=float(pairs.pop("target_density")) if "target_density" in pairs else None,
                min_distance=float(pairs.pop("min_distance_A", DEFAULT_MIN_DISTANCE_A)),
            )
        except ValueError as exc:
            raise SpecDiagnostic("solvation", f"unparsable solvation value: {exc}", "box_edge_A=20") from None

    if pairs:
        unknown = ", ".join(sorted(pairs))
        raise SpecDiagnostic(unknown, "unknown parameter(s)", "temperature_K=300")

    spec = SystemSpec(**kwargs)
    if spec.n_steps < 1:
        raise SpecDiagnostic("n_steps", "must be >= 1", "n_steps=5000")
    if not (0 < spec.timestep <= 5):
        raise SpecDiagnostic("timestep_fs", "must be in (0, 5] fs", "timestep_fs=2.0")
    if spec.ensemble in ("NVT", "NPT") and spec.temperature <= 0:
        raise SpecDiagnostic("temperature_K", "must be > 0 for NVT/NPT", "temperature_K=300")
    if spec.ensemble == "NPT" and spec.pressure is None:
        spec.pressure = 1.0
        notes.append("pressure was not provided; defaulted to 1 atm for NPT")
    if "timestep" not in kwargs:
        notes.append(f"timestep defaulted to {DEFAULT_TIMESTEP_FS} fs")
    if "friction" not in kwargs:
        notes.append(f"friction defaulted to {DEFAULT_FRICTION} /ps")
    if "nonbonded_cutoff" not in kwargs:
        notes.append(f"nonbonded cutoff defaulted to {DEFAULT_CUTOFF_A} A")
    if "record_interval" not in kwargs:
        notes.append(f"record_interval defaulted to {spec.record_interval} (<= {MAX_RECORDED_FRAMES} frames)")
    return spec, notes


# ---------------------------------------------------------------------------
# Solvation

_SOLVENT_TEMPLATES = {
    # residue name -> list of (atom name, element, local coordinates A)
    "HOH": [
        ("O", "O", np.array([0.0, 0.0, 0.0])),
        ("H1", "H", np.array([0.9572, 0.0, 0.0])),
        ("H2", "H", np.array([-0.2400, 0.9266, 0.0])),
    ],
    "MOH": [
        ("CH3", "C", np.array([0.0, 0.0, 0.0])),
        ("O", "O", np.array([1.43, 0.0, 0.0])),
        ("HO", "H", np.array([1.75, 0.90, 0.0])),
    ],
    "ACN": [
        ("CH3", "C", np.array([0.0, 0.0, 0.0])),
        ("C", "C", np.array([1.46, 0.0, 0.0])),
        ("N", "N", np.array([2.62, 0.0, 0.0])),
    ],
}


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def solvate(
    structure: Structure, spec: SolvationSpec, seed: int = DEFAULT_SEED
) -> tuple[Structure, float]:
    """Pack solvent molecules around the solute by random insertion with
    rejection.  Returns (solvated structure, box edge).  Deterministic
    given the seed."""
    coords = structure.coordinates if len(structure) else np.zeros((0, 3))
    if spec.box_edge is not None:
        box = float(spec.box_edge)
    elif spec.padding is not None:
        extent = float(np.max(coords.max(axis=0) - coords.min(axis=0))) if len(structure) else 0.0
        box = extent + 2.0 * spec.padding
    else:
        raise SpecDiagnostic("box_edge_A", "solvation needs box_edge_A or padding_A", "box_edge_A=20")
    if len(structure):
        extent = np.max(coords.max(axis=0) - coords.min(axis=0))
        if extent + 2.0 * spec.min_distance > box:
            raise EngineError(
                f"box edge {box:.1f} A too small for solute extent {extent:.1f} A"
            )
        center_shift = box / 2.0 - (coords.max(axis=0) + coords.min(axis=0)) / 2.0
    else:
        center_shift = np.zeros(3)

    res_name, molar_mass, _ = SOLVENT_INFO[spec.solvent]
    template = _SOLVENT_TEMPLATES[res_name]
    target = int(round(spec.density() * box**3 * DENSITY_FACTOR / molar_mass))

    rng = np.random.default_rng(seed)
    existing = coords + center_shift if len(structure) else np.zeros((0, 3))
    placed_atoms: list[Atom] = [
        Atom(
            serial=a.serial, name=a.name, element=a.element, res_name=a.res_name,
            res_seq=a.res_seq, chain_id=a.chain_id,
            x=a.x + center_shift[0], y=a.y + center_shift[1], z=a.z + center_shift[2],
            occupancy=a.occupancy, b_factor=a.b_factor, het=a.het,
        )
        for a in structure.atoms
    ]
    serial = max((a.serial for a in structure.atoms), default=0)
    res_seq = max((a.res_seq for a in structure.atoms), default=0)
    min_d2 = spec.min_distance**2

    n_placed = 0
    rejections = 0
    while n_placed < target and rejections < 1_000_000:
        origin = rng.random(3) * box
        rot = _random_rotation(rng)
        mol = np.array([origin + rot @ local for _, _, local in template])
        if len(existing):
            d = existing[None, :, :] - mol[:, None, :]
            d -= box * np.round(d / box)
            if np.min(np.einsum("ijk,ijk->ij", d, d)) < min_d2:
                rejections += 1
                continue
        rejections = 0
        res_seq += 1
        for (name, element, _), pos in zip(template, mol):
            serial += 1
            placed_atoms.append(
                Atom(
                    serial=serial, name=name, element=element, res_name=res_name,
                    res_seq=res_seq, chain_id="W",
                    x=float(pos[0]), y=float(pos[1]), z=float(pos[2]), het=True,
                )
            )
        existing = np.vstack([existing, mol]) if len(existing) else mol
        n_placed += 1

    solvated = Structure(
        atoms=placed_atoms,
        source="solvated",
        provenance=(structure.provenance + "; " if structure.provenance else "")
        + f"solvated with {n_placed} {spec.solvent} molecules in a {box:.2f} A box (seed {seed})",
        title=structure.title,
    )
    return solvated, box


# ---------------------------------------------------------------------------
# Toy forcefield system construction and the engine adapter contract


def build_toy_system(
    structure: Structure, cutoff: float = DEFAULT_CUTOFF_A, box_edge: float | None = None
) -> MDSystem:
    """Per-element Lennard-Jones plus harmonic bonds inferred from the
    input geometry (bonds start at their observed lengths, so a parsed
    structure begins at a local minimum of the bonded terms)."""
    known = AMINO_ACIDS_3 | WATER_RESIDUES | set(_SOLVENT_TEMPLATES)
    for (_, _, rn), _atoms in structure.residues():
        if rn not in known:
            raise EngineError(f"missing forcefield template for residue '{rn}'")
    n = len(structure)
    if n == 0:
        raise EngineError("cannot build a system from an empty structure")
    coords = structure.coordinates
    masses = structure.masses()
    elements = [a.element.upper() for a in structure.atoms]
    eps = np.array([0.02 if e == "H" else 0.10 for e in elements])
    sigma = np.array([2.0 * vdw_radius(e) * 2 ** (-1.0 / 6.0) for e in elements])

    bonds: list[HarmonicBond] = []
    exclusions: set[frozenset] = set()
    for i in range(n - 1):
        d = coords[i + 1 :] - coords[i]
        if box_edge:
            d -= box_edge * np.round(d / box_edge)
        r = np.sqrt(np.einsum("ij,ij->i", d, d))
        for off in np.nonzero(r < 2.0)[0]:
            j = i + 1 + off
            limit = 1.3 if "H" in (elements[i], elements[j]) else 2.0
            if r[off] < limit and r[off] > 0.5:
                bonds.append(HarmonicBond(i=i, j=j, r0=float(r[off]), k=300.0))
                exclusions.add(frozenset((i, j)))
    return MDSystem(
        masses=masses,
        positions=coords.copy(),
        bonds=bonds,
        lj_epsilon=eps,
        lj_sigma=sigma,
        lj_cutoff=cutoff,
        box_edge=box_edge,
        exclusions=exclusions,
    )


class ToyEngineAdapter:
    """Engine-adapter contract: build a system, integrate, and dry-run
    scripts.  A production adapter would bind a real MD package behind
    the same three methods."""

    name = "toy"

    def build_system(self, structure: Structure, spec: SystemSpec, box_edge: float | None) -> MDSystem:
        return build_toy_system(structure, cutoff=spec.nonbonded_cutoff, box_edge=box_edge)

    def integrate(self, system: MDSystem, settings: IntegrationSettings) -> Trajectory:
        return integrate(system, settings)

    def dry_run(self, script_text: str) -> None:
        """Syntax-check a script without integrating; raises on failure."""
        parse_script(script_text)


# ---------------------------------------------------------------------------
# Run scripts


@dataclass
class RunScript:
    text: str
    spec_digest: str

    @staticmethod
    def from_spec(spec: SystemSpec, schedule: list[tuple[int, float]] | None = None) -> "RunScript":
        return RunScript(text=emit_script_text(spec, schedule), spec_digest=spec_hash(spec))


class ScriptError(Exception):
    pass


def emit_script_text(spec: SystemSpec, schedule: list[tuple[int, float]] | None = None) -> str:
    """Editable run script; every spec field appears literally, and the
    schedule/output sections are delimited for direct editing."""
    lines = [
        f"# run script ({SCRIPT_SCHEMA})",
        "[system]",
        f"structure = {spec.structure}",
        f"forcefield = {spec.forcefield_id}",
    ]
    if spec.solvation:
        s = spec.solvation
        lines += ["[solvation]", f"solvent = {s.solvent}"]
        if s.box_edge is not None:
            lines.append(f"box_edge_A = {s.box_edge}")
        if s.padding is not None:
            lines.append(f"padding_A = {s.padding}")
        if s.target_density is not None:
            lines.append(f"target_density = {s.target_density}")
        lines.append(f"min_distance_A = {s.min_distance}")
    lines += [
        "[integrator]",
        f"ensemble = {spec.ensemble}",
        f"temperature_K = {spec.temperature}",
    ]
    if spec.pressure is not None:
        lines.append(f"pressure_atm = {spec.pressure}")
    lines += [
        f"timestep_fs = {spec.timestep}",
        f"friction_per_ps = {spec.friction}",
        f"nonbonded_cutoff_A = {spec.nonbonded_cutoff}",
        f"n_steps = {spec.n_steps}",
        f"record_interval = {spec.record_interval}",
        f"seed = {spec.seed}",
        "# --- integration schedule (edit below to add segments) ---",
        "[schedule]",
    ]
    if schedule:
        for steps, temp in schedule:
            lines.append(f"segment steps={steps} temperature_K={temp}")
    lines += [
        "# --- output section ---",
        "[output]",
        "trajectory = trajectory.mdtrj",
        "state_log = state_log.csv",
    ]
    return "\n".join(lines) + "\n"


def parse_script(text: str) -> tuple[SystemSpec, list[tuple[int, float]], dict[str, str]]:
    """Parse a run script back into (spec, schedule, output names)."""
    section = ""
    kv: dict[str, dict[str, str]] = {"system": {}, "solvation": {}, "integrator": {}, "output": {}}
    schedule: list[tuple[int, float]] = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            if section not in ("system", "solvation", "integrator", "schedule", "output"):
                raise ScriptError(f"line {ln}: unknown section [{section}]")
            continue
        if section == "schedule":
            if not line.startswith("segment"):
                raise ScriptError(f"line {ln}: schedule entries must start with 'segment'")
            seg: dict[str, str] = {}
            for tok in line.split()[1:]:
                if "=" not in tok:
                    raise ScriptError(f"line {ln}: bad segment token {tok!r}")
                k, v = tok.split("=", 1)
                seg[k] = v
            try:
                schedule.append((int(seg["steps"]), float(seg["temperature_K"])))
            except (KeyError, ValueError) as exc:
                raise ScriptError(f"line {ln}: bad segment: {exc}") from None
            continue
        if "=" not in line:
            raise ScriptError(f"line {ln}: expected key = value")
        if not section:
            raise ScriptError(f"line {ln}: key outside any section")
        k, v = (s.strip() for s in line.split("=", 1))
        kv[section][k] = v

    sysec, integ = kv["system"], kv["integrator"]
    try:
        solvation = None
        if kv["solvation"]:
            s = kv["solvation"]
            solvation = SolvationSpec(
                solvent=s.get("solvent", "water"),
                box_edge=float(s["box_edge_A"]) if "box_edge_A" in s else None,
                padding=float(s["padding_A"]) if "padding_A" in s else None,
                target_density=float(s["target_density"]) if "target_density" in s else None,
                min_distance=float(s.get("min_distance_A", DEFAULT_MIN_DISTANCE_A)),
            )
        spec = SystemSpec(
            structure=sysec["structure"],
            forcefield_id=sysec.get("forcefield", "toy-lj"),
            ensemble=integ["ensemble"],
            temperature=float(integ["temperature_K"]),
            pressure=float(integ["pressure_atm"]) if "pressure_atm" in integ else None,
            timestep=float(integ["timestep_fs"]),
            n_steps=int(integ["n_steps"]),
            friction=float(integ["friction_per_ps"]),
            nonbonded_cutoff=float(integ["nonbonded_cutoff_A"]),
            solvation=solvation,
            record_interval=int(integ["record_interval"]),
            seed=int(integ["seed"]),
        )
    except (KeyError, ValueError) as exc:
        raise ScriptError(f"missing or unparsable script field: {exc}") from None
    if spec.forcefield_id not in KNOWN_FORCEFIELDS:
        raise ScriptError(f"unknown forcefield {spec.forcefield_id!r}")
    return spec, schedule, kv["output"]


# ---------------------------------------------------------------------------
# Run execution


@dataclass
class SimulationResult:
    trajectory: Trajectory
    script: RunScript
    trajectory_entry: object
    state_log_entry: object
    script_entry: object
    observation: str


def _run_schedule(
    structure: Structure,
    spec: SystemSpec,
    schedule: list[tuple[int, float]],
    adapter,
    box_edge: float | None,
) -> Trajectory:
    """Integrate one or more temperature segments, chaining coordinates.
    A single segment is exactly a plain run."""
    system = adapter.build_system(structure, spec, box_edge)
    frames: list[np.ndarray] = []
    times: list[float] = []
    boxes: list[float] = []
    log: list[dict] = []
    t_offset = 0.0
    step_offset = 0
    for idx, (steps, temp) in enumerate(schedule):
        settings = IntegrationSettings(
            ensemble=spec.ensemble,
            temperature=temp,
            timestep_fs=spec.timestep,
            n_steps=steps,
            friction_per_ps=spec.friction,
            pressure_atm=spec.pressure,
            record_interval=spec.record_interval,
            seed=spec.seed + idx,
        )
        traj = adapter.integrate(system, settings)
        start = 0 if idx == 0 else 1  # drop duplicated initial frame
        frames.extend(traj.frames[start:])
        times.extend(traj.times_ps[start:] + t_offset)
        boxes.extend(traj.box_per_frame[start:])
        recs = traj.state_log if idx == 0 else traj.state_log[1:]
        for rec in recs:
            r = dict(rec)
            r["step"] += step_offset
            log.append(r)
        system.positions = traj.frames[-1].copy()
        if traj.box_per_frame[-1] > 0:
            system.box_edge = float(traj.box_per_frame[-1])
        t_offset += steps * spec.timestep / 1000.0
        step_offset += steps
    return Trajectory(
        frames=np.array(frames),
        times_ps=np.array(times),
        box_per_frame=np.array(boxes),
        state_log=log,
    )


def run_simulation(
    spec: SystemSpec,
    adapter,
    registry: FileRegistry,
    step: int = 0,
    schedule: list[tuple[int, float]] | None = None,
    output_names: dict[str, str] | None = None,
) -> SimulationResult:
    """Resolve the structure, optionally solvate, integrate, and register
    trajectory + state log + run script."""
    path = registry.lookup(spec.structure)
    from ..structure import load_pdb_file

    structure = load_pdb_file(path)
    box_edge = None
    if spec.solvation is not None:
        structure, box_edge = solvate(structure, spec.solvation, seed=spec.seed)

    sched = schedule or [(spec.n_steps, spec.temperature)]
    try:
        traj = _run_schedule(structure, spec, sched, adapter, box_edge)
    except InstabilityError as exc:
        raise EngineError(
            f"simulation unstable: {exc}. Remedies: reduce timestep_fs, raise friction_per_ps, "
            "or relax the starting structure."
        ) from exc

    names = output_names or {}
    digest = spec_hash(spec)
    traj_path = registry.root / names.get("trajectory", f"trajectory_{digest}.mdtrj")
    log_path = registry.root / names.get("state_log", f"state_log_{digest}.csv")
    script_path = registry.root / f"run_script_{digest}.txt"
    write_trajectory(traj, traj_path)
    write_state_log(traj.state_log, log_path)
    script = RunScript.from_spec(spec, schedule)
    script_path.write_text(script.text)

    te = registry.register_file(traj_path, f"trajectory of {spec.structure} ({spec.ensemble}, {spec.temperature} K, {spec.n_steps} steps)", kind="trajectory", step=step)
    le = registry.register_file(log_path, f"state log of {spec.structure} run", kind="state_log", step=step)
    se = registry.register_file(script_path, "editable run script reproducing this simulation", kind="script", step=step)

    final = traj.state_log[-1]
    obs = (
        f"Simulation complete: {traj.n_frames} frames, final potential "
        f"{final['potential_kcal_mol']:.3f} kcal/mol, final temperature "
        f"{final['temperature_K']:.1f} K. Files: trajectory={te.file_id}, "
        f"state_log={le.file_id}, script={se.file_id}."
    )
    return SimulationResult(
        trajectory=traj,
        script=script,
        trajectory_entry=te,
        state_log_entry=le,
        script_entry=se,
        observation=obs,
    )


def execute_script(
    script_text: str, adapter, registry: FileRegistry, step: int = 0
) -> SimulationResult:
    """Execute a (possibly edited) run script through the same path as
    run_simulation; an unmodified emitted script reproduces it exactly."""
    spec, schedule, output = parse_script(script_text)
    return run_simulation(
        spec, adapter, registry, step=step,
        schedule=schedule or None, output_names=output or None,
    )


MODIFY_SCRIPT_PROMPT = (
    "You edit molecular-simulation run scripts. Apply the instruction to the "
    "script and return the FULL modified script only, no commentary.\n\n"
    "Instruction: {instruction}\n\nScript:\n{script}"
)


def modify_script(
    script: RunScript, instruction: str, gateway: LLMGateway, adapter
) -> RunScript:
    """One LLM edit round-trip, dry-run checked; a second dry-run failure
    (after one repair attempt) is a tool error carrying both diagnostics."""
    if not instruction:
        raise ScriptError("empty modification instruction")
    messages = [
        ChatMessage("system", "You edit simulation run scripts precisely."),
        ChatMessage("user", MODIFY_SCRIPT_PROMPT.format(instruction=instruction, script=script.text)),
    ]
    candidate = _strip_fences(gateway.complete_chat(messages))
    try:
        adapter.dry_run(candidate)
    except ScriptError as first:
        repair = messages + [
            ChatMessage("assistant", candidate),
            ChatMessage("user", f"That script failed validation: {first}. Return a corrected full script."),
        ]
        candidate = _strip_fences(gateway.complete_chat(repair))
        try:
            adapter.dry_run(candidate)
        except ScriptError as second:
            raise ScriptError(
                f"script modification failed twice; first error: {first}; second error: {second}"
            ) from second
    spec, _, _ = parse_script(candidate)
    return RunScript(text=candidate, spec_digest=spec_hash(spec))


def _strip_fences(text: str) -> str:
    t = text.strip()
    if t.startswith("```") and t.endswith("```"):
        body = t.split("\n", 1)[1] if "\n" in t else ""
        return body[: body.rfind("```")].rstrip() + "\n"
    return t if t.endswith("\n") else t + "\n"
