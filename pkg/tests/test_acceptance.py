"""End-to-end acceptance checks: parser round-trips, deterministic scripted
runs, checkpoint integrity, oracle-verified analysis and physics, the
script contract, harness arithmetic replay, and the full download-to-plot
flow."""

import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from mdworkbench.agent import AgentAction, ParseFailure, parse_llm_output, render_action, run_agent
from mdworkbench.constants import KB_KCAL, VDW_RADII
from mdworkbench.engine import EngineError, HarmonicWell, IntegrationSettings, MDSystem, integrate
from mdworkbench.evalharness.grading import aggregate_accuracy, apply_cascade, load_grades
from mdworkbench.evalharness.stats import robustness_cv, spearman_complexity_correlation, welch_t_test
from mdworkbench.evalharness.tasks import Subtask, TaskSpec, default_task_file, load_tasks
from mdworkbench.llm import scripted_gateway
from mdworkbench.registry import FileRegistry, load_checkpoint, save_checkpoint
from mdworkbench.structure import Atom, Structure, serialize_pdb
from mdworkbench.tools import ToolContext, build_toolset
from mdworkbench.tools import analysis as ana
from mdworkbench.tools.sim import (
    RunScript,
    ToyEngineAdapter,
    execute_script,
    modify_script,
    run_simulation,
    validate_and_complete_spec,
)

from conftest import action_block, final_block, random_frames


# ---------------------------------------------------------------------------
# Parser round-trip: 200 valid, 50 malformed, < 5 s


def test_parser_round_trip_and_malformed_rejection():
    start = time.monotonic()
    rng = np.random.default_rng(42)
    words = ["fetch", "clean", "simulate", "analyze", "plot", "inspect", "compare"]
    tools = ["PDBFileDownloader", "SetUpandRunFunction", "ComputeRMSD", "PlotSeries"]

    n_valid = 0
    for i in range(200):
        thought = " ".join(rng.choice(words, size=rng.integers(1, 6)))
        if i % 4 == 0:
            action = AgentAction(kind="final_answer", thought=thought,
                                 answer=f"answer {i}: " + " ".join(rng.choice(words, size=3)))
        else:
            action = AgentAction(
                kind="tool_call", thought=thought,
                tool_name=str(rng.choice(tools)),
                tool_input=f"structure=f{i:03d}, temperature_K={int(rng.integers(100, 500))}",
            )
        parsed = parse_llm_output(render_action(action))
        assert isinstance(parsed, AgentAction)
        assert parsed == action
        n_valid += 1
    assert n_valid == 200

    base = render_action(AgentAction(kind="tool_call", thought="t",
                                     tool_name="ComputeRMSD", tool_input="x"))
    malformed = []
    for i in range(50):
        variant = i % 5
        if variant == 0:
            malformed.append(base.replace("```", "", 1))  # broken fence
        elif variant == 1:
            malformed.append(base.replace('"action"', f'"action_{i}"'))  # wrong key
        elif variant == 2:
            malformed.append(base + f"\nFinal Answer: also done {i}")  # both forms
        elif variant == 3:
            malformed.append(base.replace("{", "{,", 1) + f"\n# v{i}")  # bad JSON
        else:
            malformed.append(f"Thought: just thinking, attempt {i}")  # no block
    for text in malformed:
        assert isinstance(parse_llm_output(text), ParseFailure), text
    assert time.monotonic() - start < 5.0


# ---------------------------------------------------------------------------
# Deterministic scripted 6-step run, x3 byte-identical


SIX_STEP_FLOW = [
    action_block("PDBFileDownloader", "1LYZ", thought="fetch the structure"),
    action_block("CleaningToolFunction", "structure=f001, pH=7.0", thought="strip heterogens"),
    action_block("SetUpandRunFunction",
                 "structure=f002, n_steps=100, record_interval=10, timestep_fs=1.0",
                 thought="short equilibration"),
    action_block("ComputeRMSD", "trajectory=f003, topology=f002", thought="drift check"),
    action_block("PlotSeries", "series=f006, title=RMSD", thought="make the figure"),
    final_block("Workflow complete: simulated 1LYZ and plotted its RMSD."),
]


def run_scripted_flow(tmp_path: Path, tag: str, n_steps_script=None):
    workdir = tmp_path / f"work_{tag}"
    registry = FileRegistry(workdir)
    gateway = scripted_gateway(list(n_steps_script or SIX_STEP_FLOW))
    ctx = ToolContext(registry=registry, gateway=gateway)
    toolset = build_toolset(ctx)
    ticker = itertools.count()
    trace = run_agent(
        "simulate 1LYZ briefly and plot the RMSD",
        toolset, gateway, registry=registry,
        clock=lambda: float(next(ticker)),
    )
    return trace, registry


def test_six_step_run_byte_identical_across_executions(tmp_path):
    traces = []
    manifests = []
    for i in range(3):
        trace, registry = run_scripted_flow(tmp_path, str(i))
        assert trace.outcome == "final_answer"
        assert len(trace.steps) == 6
        run_id = save_checkpoint(
            tmp_path / f"ckpt_{i}", registry, trace, "fixed summary",
            summary_is_llm=False, run_id="fixed-run-id", clock=lambda: 1700000000.0,
        )
        traces.append(json.dumps(trace.to_dict(), sort_keys=True).encode())
        manifests.append((tmp_path / f"ckpt_{i}" / run_id / "manifest").read_bytes())
    assert traces[0] == traces[1] == traces[2]
    assert manifests[0] == manifests[1] == manifests[2]


# ---------------------------------------------------------------------------
# Checkpoint round-trip and per-entry missing-payload flagging


def test_checkpoint_round_trip_and_missing_payload(tmp_path):
    trace, registry = run_scripted_flow(tmp_path, "ckpt")
    run_id = save_checkpoint(tmp_path / "ckpt", registry, trace, "the summary",
                             summary_is_llm=False)
    loaded = load_checkpoint(tmp_path / "ckpt", run_id)
    assert loaded.summary == "the summary"
    assert loaded.trace.outcome == trace.outcome
    assert [f.file_id for f in loaded.files] == [e.file_id for e in registry.entries]
    assert [f.description for f in loaded.files] == [e.description for e in registry.entries]
    assert not any(f.missing for f in loaded.files)

    # delete one payload; only that entry is flagged on the next load
    victim = loaded.files[2]
    (tmp_path / "ckpt" / run_id / victim.path).unlink()
    reloaded = load_checkpoint(tmp_path / "ckpt", run_id)
    flags = {f.file_id: f.missing for f in reloaded.files}
    assert flags[victim.file_id] is True
    assert sum(flags.values()) == 1


# ---------------------------------------------------------------------------
# Analysis oracle suite, < 60 s


def ideal_helix(n=20):
    from mdworkbench.geometry import build_backbone

    bb = build_backbone(n, phi_deg=-57.0, psi_deg=-47.0)
    atoms = []
    serial = 1
    for r, res in enumerate(bb):
        for name in ("N", "CA", "C", "O"):
            x, y, z = res[name]
            atoms.append(Atom(serial=serial, name=name, element=name[0], res_name="ALA",
                              res_seq=r + 1, chain_id="A", x=float(x), y=float(y), z=float(z)))
            serial += 1
    return Structure(atoms=atoms)


def test_analysis_oracle_suite():
    start = time.monotonic()
    rng = np.random.default_rng(7)

    # fixtures: <= 50 atoms
    n_atoms, n_frames = 40, 12
    frames = random_frames(n_frames, n_atoms, seed=7, scale=0.4)
    atoms = [Atom(serial=i + 1, name="CA", element="C", res_name="ALA", res_seq=i + 1,
                  chain_id="A", x=0.0, y=0.0, z=0.0) for i in range(n_atoms)]
    top = Structure(atoms=atoms)
    masses = top.masses()
    times = np.arange(float(n_frames))

    # RMSD against the brute-force definition (no superposition), 1e-10
    out = ana.rmsd(frames, frames[0], times, superpose=False)
    for f in range(n_frames):
        expected = math.sqrt(sum(
            (frames[f, i, k] - frames[0, i, k]) ** 2 for i in range(n_atoms) for k in range(3)
        ) / n_atoms)
        assert abs(out.y[f] - expected) < 1e-10

    # RGy, mass weighted, 1e-10
    rgy = ana.radius_of_gyration(frames, times, top, mass_weighted=True)
    for f in range(n_frames):
        com = sum(masses[i] * frames[f, i] for i in range(n_atoms)) / masses.sum()
        acc = sum(masses[i] * np.dot(frames[f, i] - com, frames[f, i] - com)
                  for i in range(n_atoms))
        assert abs(rgy.y[f] - math.sqrt(acc / masses.sum())) < 1e-10

    # RMSF, 1e-10
    vals = ana.rmsf(frames, superpose=False)
    mean = frames.mean(axis=0)
    for i in range(n_atoms):
        expected = math.sqrt(np.mean([np.dot(frames[f, i] - mean[i], frames[f, i] - mean[i])
                                      for f in range(n_frames)]))
        assert abs(vals[i] - expected) < 1e-10

    # moments of inertia vs an explicit tensor, 1e-8
    moi = ana.moments_of_inertia(frames, times, top)
    for f in range(n_frames):
        com = (masses[:, None] * frames[f]).sum(axis=0) / masses.sum()
        tensor = np.zeros((3, 3))
        for i in range(n_atoms):
            d = frames[f, i] - com
            tensor += masses[i] * (np.dot(d, d) * np.eye(3) - np.outer(d, d))
        assert np.allclose(moi[f], np.sort(np.linalg.eigvalsh(tensor)), atol=1e-8)

    # PCA: eigenvalue/projection-variance identity, 1e-8
    comps, eigvals, proj = ana.pca(frames, n_components=3)
    for k in range(3):
        assert abs(np.var(proj[:, k]) - eigvals[k]) < 1e-8

    # SASA: isolated sphere analytic area within 2%
    lone = Structure(atoms=[Atom(serial=1, name="C1", element="C", res_name="LIG",
                                 res_seq=1, chain_id="A", x=0.0, y=0.0, z=0.0, het=True)])
    _, total = ana.sasa(lone.coordinates, lone)
    analytic = 4.0 * math.pi * (VDW_RADII["C"] + 1.4) ** 2
    assert abs(total - analytic) / analytic < 0.02

    # RDF: ideal gas flat at 1 +- 0.05
    box = 20.0
    gas = rng.uniform(0, box, (50, 1000, 3))
    idx = np.arange(1000)
    centers, g = ana.rdf(gas, np.full(50, box), idx, idx, r_max=box / 2, n_bins=40)
    far = centers > 2.0
    assert np.all(np.abs(g[far] - 1.0) < 0.05)

    # ideal alpha-helix >= 90% H
    helix = ideal_helix(20)
    classes = ana.secondary_structure(helix.coordinates, helix)
    assert classes.count("H") / len(classes) >= 0.90

    assert time.monotonic() - start < 60.0


# ---------------------------------------------------------------------------
# Toy-engine physics, < 120 s


def test_engine_physics_suite():
    start = time.monotonic()

    # NVE harmonic oscillator: relative energy drift < 1e-4 over 1e5 steps
    system = MDSystem(
        masses=np.array([1.0]),
        positions=np.array([[1.0, 0.0, 0.0]]),
        bonds=[], wells=[HarmonicWell(index=0, center=np.zeros(3), k=1.0)],
        lj_epsilon=np.array([0.0]), lj_sigma=np.array([1.0]),
    )
    traj = integrate(system, IntegrationSettings(
        ensemble="NVE", temperature=0.0, timestep_fs=0.5, n_steps=100_000,
        friction_per_ps=0.0, record_interval=5_000, seed=1,
    ))
    energies = [r["potential_kcal_mol"] + r["kinetic_kcal_mol"] for r in traj.state_log]
    drift = max(abs(e - energies[0]) for e in energies) / abs(energies[0])
    assert drift < 1e-4

    # NVT harmonic well: per-axis <x^2> = kB*T/k within 10% over 5e4 steps
    k, temperature = 2.0, 300.0
    well = MDSystem(
        masses=np.array([1.0]),
        positions=np.array([[0.5, 0.0, 0.0]]),
        bonds=[], wells=[HarmonicWell(index=0, center=np.zeros(3), k=k)],
        lj_epsilon=np.array([0.0]), lj_sigma=np.array([1.0]),
    )
    traj = integrate(well, IntegrationSettings(
        ensemble="NVT", temperature=temperature, timestep_fs=2.0, n_steps=50_000,
        friction_per_ps=5.0, record_interval=10, seed=2024,
    ))
    coords = traj.frames[len(traj.frames) // 5:, 0, :]
    expected = KB_KCAL * temperature / k
    for axis in range(3):
        assert abs(np.mean(coords[:, axis] ** 2) - expected) / expected < 0.10

    # NPT default-pressure injection fires exactly when pressure is absent
    spec, notes = validate_and_complete_spec("structure=f001, ensemble=NPT")
    assert spec.pressure == 1.0
    assert sum("1 atm" in n for n in notes) == 1
    spec2, notes2 = validate_and_complete_spec(
        "structure=f001, ensemble=NPT, pressure_atm=3.0"
    )
    assert spec2.pressure == 3.0
    assert not any("atm" in n for n in notes2)
    spec3, notes3 = validate_and_complete_spec("structure=f001, ensemble=NVT")
    assert spec3.pressure is None
    assert not any("atm" in n for n in notes3)
    with pytest.raises(EngineError):
        IntegrationSettings(ensemble="NPT", temperature=300.0, timestep_fs=1.0,
                            n_steps=10, pressure_atm=None).validate()

    assert time.monotonic() - start < 120.0


# ---------------------------------------------------------------------------
# Script contract


@pytest.fixture
def sim_registry(tmp_path, tiny_structure):
    reg = FileRegistry(tmp_path / "work")
    pdb = tmp_path / "tiny.pdb"
    pdb.write_text(serialize_pdb(tiny_structure))
    reg.register_file(pdb, "test peptide", kind="structure", step=0)
    return reg


def test_script_contract_bit_for_bit(sim_registry, tmp_path, tiny_structure):
    spec, _ = validate_and_complete_spec("structure=f001, n_steps=200, record_interval=20")
    direct = run_simulation(spec, ToyEngineAdapter(), sim_registry)

    reg2 = FileRegistry(tmp_path / "replay")
    reg2.register_file(sim_registry.lookup("f001"), "test peptide", kind="structure", step=0)
    script = RunScript.from_spec(spec)
    replay = execute_script(script.text, ToyEngineAdapter(), reg2)

    assert (sim_registry.lookup(direct.trajectory_entry.file_id).read_bytes()
            == reg2.lookup(replay.trajectory_entry.file_id).read_bytes())
    assert (sim_registry.lookup(direct.state_log_entry.file_id).read_bytes()
            == reg2.lookup(replay.state_log_entry.file_id).read_bytes())
    assert (sim_registry.lookup(direct.script_entry.file_id).read_bytes()
            == reg2.lookup(replay.script_entry.file_id).read_bytes())


def test_annealing_modify_script_temperature_trace(tmp_path):
    """The 300 -> 400 -> 300 K edit: segment mean temperatures go up then
    back down.  Uses a helix large enough that kinetic-temperature noise
    stays well below the 100 K ramps."""
    registry = FileRegistry(tmp_path / "anneal")
    pdb = tmp_path / "helix.pdb"
    pdb.write_text(serialize_pdb(ideal_helix(12)))
    registry.register_file(pdb, "helical peptide", kind="structure", step=0)

    spec, _ = validate_and_complete_spec(
        "structure=f001, n_steps=3600, timestep_fs=1.0, friction_per_ps=5.0, record_interval=10"
    )
    script = RunScript.from_spec(spec)
    edited = script.text.replace(
        "[schedule]",
        "[schedule]\n"
        "segment steps=1200 temperature_K=300\n"
        "segment steps=1200 temperature_K=400\n"
        "segment steps=1200 temperature_K=300",
    )
    gateway = scripted_gateway([edited])
    modified = modify_script(script, "anneal from 300 K to 400 K and back", gateway,
                             ToyEngineAdapter())
    result = execute_script(modified.text, ToyEngineAdapter(), registry)
    temps = np.array([r["temperature_K"] for r in result.trajectory.state_log])
    steps = np.array([r["step"] for r in result.trajectory.state_log])
    means = []
    for lo, hi in ((0, 1200), (1200, 2400), (2400, 3600)):
        mask = (steps > lo + 600) & (steps <= hi)  # second half of each segment
        means.append(temps[mask].mean())
    assert means[1] > means[0] + 40.0
    assert means[1] > means[2] + 40.0
    assert abs(means[0] - 300.0) < 60.0
    assert abs(means[1] - 400.0) < 70.0
    assert abs(means[2] - 300.0) < 60.0


# ---------------------------------------------------------------------------
# Harness arithmetic replay


def replay_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "src" / "mdworkbench" / "data" / "grades" / "replay"


def test_replay_aggregate_accuracy_exact():
    grades = load_grades(replay_dir())
    by_model = {}
    for g in grades:
        by_model.setdefault(g.model_id, []).append(g)
    assert aggregate_accuracy(by_model["gpt-4o"]) == 72.0
    assert aggregate_accuracy(by_model["llama3-405b"]) == 68.0
    assert aggregate_accuracy(by_model["gpt-3.5"]) == 28.0


def test_cascade_rule_examples():
    task = TaskSpec(
        task_id=1, prompt_natural="p",
        subtasks=(
            Subtask("download", "get file"),
            Subtask("simulate", "run", depends_on=("download",)),
            Subtask("analyze", "measure", depends_on=("simulate",)),
            Subtask("report", "summarize", depends_on=("analyze",)),
        ),
    )
    from mdworkbench.evalharness.grading import GradeRecord

    g = GradeRecord(task_id=1, model_id="m", framework="mdcrow",
                    completed={"download": True, "simulate": False,
                               "analyze": True, "report": True},
                    accuracy=False)
    effective = apply_cascade(g, task)
    assert effective == {"download": True, "simulate": False,
                         "analyze": False, "report": False}


def test_statistics_match_independent_recomputation():
    # CV
    xs = [1.0, 0.5, 0.75, 0.25]
    rep = robustness_cv(xs)
    mean = np.mean(xs)
    sd = np.sqrt(np.mean((np.array(xs) - mean) ** 2))
    assert abs(rep.cv - sd / mean) < 1e-9

    # Spearman over the bundled task complexities vs a synthetic score set,
    # compared against exact rank arithmetic
    tasks = load_tasks(default_task_file())
    complexities = [len(t.subtasks) for t in tasks]
    rng = np.random.default_rng(3)
    scores = [max(0.0, 1.0 - 0.08 * c + rng.normal(0, 0.05)) for c in complexities]
    rho, p = spearman_complexity_correlation(complexities, scores)

    def exact_ranks(v):
        v = np.asarray(v, dtype=float)
        r = np.empty(len(v))
        for i, x in enumerate(v):
            less = np.sum(v < x)
            equal = np.sum(v == x)
            r[i] = less + (equal + 1) / 2.0
        return r

    ra, rb = exact_ranks(complexities), exact_ranks(scores)
    rho_ref = np.corrcoef(ra, rb)[0, 1]
    assert abs(rho - rho_ref) < 1e-9

    # Welch
    a = [0.9, 0.8, 0.95, 0.7, 0.85]
    b = [0.5, 0.6, 0.4, 0.55]
    t_stat, p_val = welch_t_test(a, b)
    va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
    se = math.sqrt(va / len(a) + vb / len(b))
    assert abs(t_stat - (np.mean(a) - np.mean(b)) / se) < 1e-9
    assert 0.0 < p_val < 1.0


# ---------------------------------------------------------------------------
# Task-set integrity


def test_task_set_integrity():
    tasks = load_tasks(default_task_file())
    assert len(tasks) == 25
    by_id = {t.task_id: len(t.subtasks) for t in tasks}
    assert by_id[2] == 1
    assert by_id[7] == 10
    assert by_id[25] == 9
    assert min(by_id.values()) == 1
    assert max(by_id.values()) == 10


# ---------------------------------------------------------------------------
# End-to-end scripted flow, < 60 s


def test_end_to_end_download_simulate_plot(tmp_path):
    start = time.monotonic()
    flow = [
        action_block("PDBFileDownloader", "1LYZ", thought="start with the structure"),
        action_block("SummarizeStructure", "f001", thought="check the composition"),
        action_block("CleaningToolFunction", "structure=f001", thought="prepare for simulation"),
        action_block("SetUpandRunFunction",
                     "structure=f002, n_steps=500, record_interval=25, timestep_fs=1.0",
                     thought="short production run"),
        action_block("ComputeRMSD", "trajectory=f003, topology=f002", thought="measure drift"),
        action_block("PlotSeries", "series=f006, title=RMSD of 1LYZ", thought="figure"),
        final_block("Downloaded 1LYZ, simulated 500 steps, and plotted the RMSD."),
    ]
    registry = FileRegistry(tmp_path / "files")
    gateway = scripted_gateway(flow)
    ctx = ToolContext(registry=registry, gateway=gateway)
    trace = run_agent("simulate 1LYZ and plot its RMSD", build_toolset(ctx), gateway,
                      registry=registry)
    assert trace.outcome == "final_answer"
    assert len(registry.entries) >= 4
    kinds = [e.kind for e in registry.entries]
    assert "figure" in kinds
    assert "trajectory" in kinds
    figure = next(e for e in registry.entries if e.kind == "figure")
    assert registry.resolve(figure.file_id).read_bytes().startswith(b"P6")
    assert time.monotonic() - start < 60.0
