import numpy as np
import pytest

from mdworkbench.engine import EngineError, read_state_log, read_trajectory
from mdworkbench.llm import scripted_gateway
from mdworkbench.registry import FileRegistry
from mdworkbench.structure import serialize_pdb
from mdworkbench.tools.sim import (
    RunScript,
    ScriptError,
    SolvationSpec,
    SpecDiagnostic,
    SystemSpec,
    ToyEngineAdapter,
    emit_script_text,
    execute_script,
    modify_script,
    parse_script,
    run_simulation,
    solvate,
    spec_hash,
    validate_and_complete_spec,
)


@pytest.fixture
def registry(tmp_path, tiny_structure):
    reg = FileRegistry(tmp_path / "work")
    pdb = tmp_path / "tiny.pdb"
    pdb.write_text(serialize_pdb(tiny_structure))
    reg.register_file(pdb, "tiny test peptide", kind="structure", step=0)
    return reg


# ---------------------------------------------------------------------------
# Spec validation


def test_spec_minimal_input_fills_defaults():
    spec, notes = validate_and_complete_spec("structure=f001")
    assert spec.ensemble == "NVT"
    assert spec.temperature == 300.0
    assert spec.timestep == 2.0
    joined = " ".join(notes)
    assert "timestep" in joined and "friction" in joined and "cutoff" in joined


def test_spec_missing_structure_diagnostic():
    with pytest.raises(SpecDiagnostic) as err:
        validate_and_complete_spec("temperature_K=300")
    assert "structure" in str(err.value) and "example" in str(err.value)


def test_spec_unknown_field_named_in_diagnostic():
    with pytest.raises(SpecDiagnostic) as err:
        validate_and_complete_spec("structure=f001, tempersture_K=300")
    assert "tempersture_K" in str(err.value)


def test_spec_unparsable_float_diagnostic():
    with pytest.raises(SpecDiagnostic) as err:
        validate_and_complete_spec("structure=f001, temperature_K=warm")
    assert "temperature_K" in str(err.value) and "warm" in str(err.value)


def test_spec_bad_ensemble_and_forcefield():
    with pytest.raises(SpecDiagnostic):
        validate_and_complete_spec("structure=f001, ensemble=NPH")
    with pytest.raises(SpecDiagnostic) as err:
        validate_and_complete_spec("structure=f001, forcefield=amber99")
    assert "toy-lj" in str(err.value)


def test_spec_npt_defaults_pressure_with_note():
    spec, notes = validate_and_complete_spec("structure=f001, ensemble=NPT")
    assert spec.pressure == 1.0
    assert any("1 atm" in n for n in notes)


def test_spec_npt_explicit_pressure_no_note():
    spec, notes = validate_and_complete_spec("structure=f001, ensemble=NPT, pressure_atm=2.5")
    assert spec.pressure == 2.5
    assert not any("atm" in n for n in notes)


def test_spec_timestep_bounds():
    with pytest.raises(SpecDiagnostic):
        validate_and_complete_spec("structure=f001, timestep_fs=0")
    with pytest.raises(SpecDiagnostic):
        validate_and_complete_spec("structure=f001, timestep_fs=6")


def test_spec_hash_stable_and_sensitive():
    a, _ = validate_and_complete_spec("structure=f001, n_steps=100")
    b, _ = validate_and_complete_spec("structure=f001, n_steps=100")
    c, _ = validate_and_complete_spec("structure=f001, n_steps=200")
    assert spec_hash(a) == spec_hash(b)
    assert spec_hash(a) != spec_hash(c)


# ---------------------------------------------------------------------------
# Solvation


def test_solvate_hits_density_target(tiny_structure):
    from mdworkbench.constants import DENSITY_FACTOR, SOLVENT_INFO

    spec = SolvationSpec(solvent="water", box_edge=14.0)
    solvated, box = solvate(tiny_structure, spec, seed=7)
    res_name, molar_mass, density = SOLVENT_INFO["water"]
    target = int(round(density * box**3 * DENSITY_FACTOR / molar_mass))
    waters = {a.res_seq for a in solvated.atoms if a.res_name == res_name and a.chain_id == "W"}
    assert len(waters) == target
    assert box == 14.0


def test_solvate_respects_min_distance(tiny_structure):
    spec = SolvationSpec(solvent="water", box_edge=14.0, min_distance=2.4,
                         target_density=0.4)
    solvated, box = solvate(tiny_structure, spec, seed=3)
    coords = solvated.coordinates
    n_solute = len(tiny_structure)
    # solvent atoms keep min_distance from everything outside their own molecule
    res_of = np.array([a.res_seq for a in solvated.atoms])
    d = coords[:, None, :] - coords[None, :, :]
    d -= box * np.round(d / box)
    r = np.sqrt((d**2).sum(axis=2))
    same_mol = res_of[:, None] == res_of[None, :]
    check = ~same_mol
    check[:n_solute, :n_solute] = False  # solute internal geometry is given
    assert np.all(r[check] >= 2.4 - 1e-9)


def test_solvate_deterministic(tiny_structure):
    spec = SolvationSpec(solvent="water", box_edge=14.0)
    a, _ = solvate(tiny_structure, spec, seed=11)
    b, _ = solvate(tiny_structure, spec, seed=11)
    assert np.array_equal(a.coordinates, b.coordinates)


def test_solvate_box_too_small(tiny_structure):
    spec = SolvationSpec(solvent="water", box_edge=5.0)
    with pytest.raises(EngineError):
        solvate(tiny_structure, spec)


def test_solvate_needs_box_or_padding(tiny_structure):
    spec = SolvationSpec(solvent="water")
    with pytest.raises(SpecDiagnostic):
        solvate(tiny_structure, spec)


def test_solvation_unknown_solvent():
    with pytest.raises(SpecDiagnostic):
        SolvationSpec(solvent="benzene")


# ---------------------------------------------------------------------------
# Script contract


def test_script_emit_parse_round_trip():
    spec, _ = validate_and_complete_spec(
        "structure=f001, ensemble=NPT, temperature_K=310, pressure_atm=1.5, "
        "n_steps=400, timestep_fs=1.0, seed=99, solvent=water, box_edge_A=20"
    )
    text = emit_script_text(spec, schedule=[(100, 300.0), (300, 310.0)])
    parsed, schedule, output = parse_script(text)
    assert parsed == spec
    assert schedule == [(100, 300.0), (300, 310.0)]
    assert output["trajectory"] == "trajectory.mdtrj"
    assert emit_script_text(parsed, schedule) == text


def test_script_parse_errors_carry_line_numbers():
    with pytest.raises(ScriptError) as err:
        parse_script("[integrator]\nnot a key value\n")
    assert "line 2" in str(err.value)
    with pytest.raises(ScriptError) as err:
        parse_script("[mystery]\n")
    assert "mystery" in str(err.value)
    with pytest.raises(ScriptError) as err:
        parse_script("structure = f001\n")
    assert "outside" in str(err.value)


def test_script_bad_schedule_segment():
    spec, _ = validate_and_complete_spec("structure=f001")
    text = emit_script_text(spec).replace(
        "[schedule]", "[schedule]\nsegment steps=ten temperature_K=300"
    )
    with pytest.raises(ScriptError):
        parse_script(text)


def test_script_missing_field_names_it():
    spec, _ = validate_and_complete_spec("structure=f001")
    text = "\n".join(
        ln for ln in emit_script_text(spec).splitlines() if not ln.startswith("n_steps")
    )
    with pytest.raises(ScriptError) as err:
        parse_script(text)
    assert "n_steps" in str(err.value)


# ---------------------------------------------------------------------------
# Run execution


def test_run_simulation_registers_three_files(registry):
    spec, _ = validate_and_complete_spec("structure=f001, n_steps=200, record_interval=20")
    result = run_simulation(spec, ToyEngineAdapter(), registry, step=1)
    kinds = {e.kind for e in (result.trajectory_entry, result.state_log_entry, result.script_entry)}
    assert kinds == {"trajectory", "state_log", "script"}
    assert "Simulation complete" in result.observation
    traj = read_trajectory(registry.lookup(result.trajectory_entry.file_id))
    assert traj.n_frames == result.trajectory.n_frames
    log = read_state_log(registry.lookup(result.state_log_entry.file_id))
    assert log[-1]["step"] == 200


def test_execute_unmodified_script_is_bit_identical(registry, tmp_path):
    spec, _ = validate_and_complete_spec("structure=f001, n_steps=150, record_interval=10")
    direct = run_simulation(spec, ToyEngineAdapter(), registry)

    reg2 = FileRegistry(tmp_path / "work2")
    pdb = registry.lookup(spec.structure)
    reg2.register_file(pdb, "tiny test peptide", kind="structure", step=0)
    spec2, _ = validate_and_complete_spec("structure=f001, n_steps=150, record_interval=10")
    script = RunScript.from_spec(spec2)
    replay = execute_script(script.text, ToyEngineAdapter(), reg2)

    a = registry.lookup(direct.trajectory_entry.file_id).read_bytes()
    b = reg2.lookup(replay.trajectory_entry.file_id).read_bytes()
    assert a == b
    la = registry.lookup(direct.state_log_entry.file_id).read_bytes()
    lb = reg2.lookup(replay.state_log_entry.file_id).read_bytes()
    assert la == lb


def test_schedule_single_segment_equals_plain_run(registry, tmp_path):
    spec, _ = validate_and_complete_spec("structure=f001, n_steps=120, record_interval=10")
    plain = run_simulation(spec, ToyEngineAdapter(), registry)

    reg2 = FileRegistry(tmp_path / "work2")
    reg2.register_file(registry.lookup("f001"), "tiny test peptide", kind="structure", step=0)
    seg = run_simulation(spec, ToyEngineAdapter(), reg2, schedule=[(120, spec.temperature)])
    assert np.array_equal(plain.trajectory.frames, seg.trajectory.frames)


def test_annealing_schedule_temperature_segments(registry):
    """A 300 -> 400 -> 300 K schedule shows per-segment mean temperatures
    tracking the setpoints."""
    spec, _ = validate_and_complete_spec(
        "structure=f001, n_steps=6000, timestep_fs=1.0, friction_per_ps=5.0, record_interval=10"
    )
    result = run_simulation(
        spec, ToyEngineAdapter(), registry,
        schedule=[(2000, 300.0), (2000, 400.0), (2000, 300.0)],
    )
    log = result.trajectory.state_log
    temps = np.array([r["temperature_K"] for r in log])
    steps = np.array([r["step"] for r in log])
    # discard the first half of each segment for equilibration
    means = []
    for lo, hi in ((0, 2000), (2000, 4000), (4000, 6000)):
        mask = (steps > lo + 1000) & (steps <= hi)
        means.append(temps[mask].mean())
    assert abs(means[0] - 300.0) < 60.0
    assert abs(means[1] - 400.0) < 80.0
    assert abs(means[2] - 300.0) < 60.0
    assert means[1] > means[0] + 40.0
    assert means[1] > means[2] + 40.0


# ---------------------------------------------------------------------------
# Script modification


def base_script():
    spec, _ = validate_and_complete_spec("structure=f001, n_steps=300")
    return RunScript.from_spec(spec)


def test_modify_script_good_first_response():
    script = base_script()
    edited = script.text.replace("n_steps = 300", "n_steps = 600")
    gw = scripted_gateway([edited])
    out = modify_script(script, "double the step count", gw, ToyEngineAdapter())
    spec, _, _ = parse_script(out.text)
    assert spec.n_steps == 600
    assert out.spec_digest == spec_hash(spec)


def test_modify_script_strips_code_fences():
    script = base_script()
    edited = script.text.replace("temperature_K = 300.0", "temperature_K = 350.0")
    gw = scripted_gateway(["```\n" + edited + "```"])
    out = modify_script(script, "raise temperature", gw, ToyEngineAdapter())
    spec, _, _ = parse_script(out.text)
    assert spec.temperature == 350.0


def test_modify_script_repair_round_trip():
    script = base_script()
    good = script.text.replace("n_steps = 300", "n_steps = 900")
    gw = scripted_gateway(["this is not a script", good])
    out = modify_script(script, "triple the steps", gw, ToyEngineAdapter())
    spec, _, _ = parse_script(out.text)
    assert spec.n_steps == 900
    # the repair turn tells the model what failed
    assert "failed validation" in gw.script.calls[1][-1].content


def test_modify_script_two_failures_carries_both_diagnostics():
    script = base_script()
    gw = scripted_gateway(["garbage one\n", "[weird]\n"])
    with pytest.raises(ScriptError) as err:
        modify_script(script, "break it", gw, ToyEngineAdapter())
    msg = str(err.value)
    assert "first error" in msg and "second error" in msg


def test_modify_script_empty_instruction():
    with pytest.raises(ScriptError):
        modify_script(base_script(), "", scripted_gateway(["x"]), ToyEngineAdapter())


def test_modify_script_annealing_instruction_executes(registry):
    """The canonical annealing edit: add a 300/400/300 schedule, then run
    the modified script and check the temperature log segments."""
    spec, _ = validate_and_complete_spec(
        "structure=f001, n_steps=3000, timestep_fs=1.0, friction_per_ps=5.0, record_interval=10"
    )
    script = RunScript.from_spec(spec)
    edited = script.text.replace(
        "[schedule]",
        "[schedule]\n"
        "segment steps=1000 temperature_K=300\n"
        "segment steps=1000 temperature_K=400\n"
        "segment steps=1000 temperature_K=300",
    )
    gw = scripted_gateway([edited])
    out = modify_script(script, "anneal 300 to 400 and back", gw, ToyEngineAdapter())
    result = execute_script(out.text, ToyEngineAdapter(), registry, step=2)
    temps = np.array([r["temperature_K"] for r in result.trajectory.state_log])
    steps = np.array([r["step"] for r in result.trajectory.state_log])
    mid = temps[(steps > 1500) & (steps <= 2000)].mean()
    ends = temps[(steps > 500) & (steps <= 1000)].mean()
    assert mid > ends + 30.0
