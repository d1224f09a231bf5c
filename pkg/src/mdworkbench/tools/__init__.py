"""The curated toolset: named tools bound to handlers over a shared
per-run context (registry, gateway, engine adapter, fixture config)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agent import ToolSpec
from ..engine import read_trajectory
from ..llm import LLMGateway
from ..registry import FileRegistry
from ..structure import Structure, load_pdb_file, save_pdb_file
from . import analysis as ana
from . import info as info_tools
from . import pdbtools
from . import sim as sim_tools
from .sim import _parse_kv  # shared key=value input grammar


@dataclass
class ToolContext:
    registry: FileRegistry
    gateway: LLMGateway | None = None
    adapter: object = field(default_factory=sim_tools.ToyEngineAdapter)
    fetch_config: pdbtools.FetchConfig = field(default_factory=pdbtools.FetchConfig)
    metadata_config: info_tools.MetadataConfig = field(default_factory=info_tools.MetadataConfig)
    corpus_dir: Path | None = None
    current_step: int = 0


def _usage(msg: str, example: str) -> str:
    return f"{msg}. Example input: {example}"


def _load_structure(ctx: ToolContext, token: str) -> Structure:
    return load_pdb_file(ctx.registry.lookup(token))


def _load_traj(ctx: ToolContext, pairs: dict[str, str]):
    if "trajectory" not in pairs:
        raise ValueError(_usage("'trajectory' file id is required", "trajectory=f002"))
    traj = read_trajectory(ctx.registry.lookup(pairs["trajectory"]))
    topology = None
    if "topology" in pairs:
        topology = _load_structure(ctx, pairs["topology"])
        if len(topology) != traj.n_atoms:
            raise ValueError(
                f"topology has {len(topology)} atoms but trajectory has {traj.n_atoms}"
            )
    return traj, topology


def _selection_from(pairs: dict[str, str]) -> ana.Selection:
    rng = pairs.get("residues")
    first = last = None
    if rng:
        a, _, b = rng.partition("-")
        first, last = int(a), int(b or a)
    return ana.Selection(
        chain_id=pairs.get("chain"),
        res_first=first,
        res_last=last,
        name_class=pairs.get("atoms", "all"),
    )


def _series_to_file(ctx: ToolContext, series: ana.SeriesResult, stem: str, desc: str):
    path = ctx.registry.root / f"{stem}.csv"
    path.write_text(series.to_csv())
    return ctx.registry.register_file(path, desc, kind="other", step=ctx.current_step)


def build_toolset(ctx: ToolContext) -> list[ToolSpec]:
    tools: list[ToolSpec] = []

    def tool(name: str, category: str, description: str, input_contract: str):
        def wrap(fn):
            tools.append(ToolSpec(name, category, description, input_contract, fn))
            return fn

        return wrap

    # -- information retrieval ------------------------------------------

    def _metadata(query: str) -> info_tools.ProteinMetadata:
        return info_tools.fetch_protein_metadata(query, ctx.metadata_config)

    @tool(
        "GetProteinMetadata", "information_retrieval",
        "Retrieve protein annotations (names, function, subunit structure, sequence, active/binding sites, kinetics) from the protein database.",
        "a UniProt accession or 4-character PDB id",
    )
    def get_protein_metadata(arg: str) -> str:
        return _metadata(arg).render()

    @tool(
        "GetSubunitStructure", "information_retrieval",
        "Retrieve only the subunit-structure annotation for a protein.",
        "a UniProt accession or PDB id",
    )
    def get_subunit(arg: str) -> str:
        md = _metadata(arg)
        return md.subunit_structure or "no subunit-structure annotation recorded"

    @tool(
        "GetSequenceInfo", "information_retrieval",
        "Retrieve the one-letter residue sequence and its length.",
        "a UniProt accession or PDB id",
    )
    def get_sequence(arg: str) -> str:
        md = _metadata(arg)
        return f"length {len(md.sequence)}: {md.sequence}" if md.sequence else "no sequence recorded"

    @tool(
        "GetActiveAndBindingSites", "information_retrieval",
        "Retrieve active-site and binding-site residue annotations.",
        "a UniProt accession or PDB id",
    )
    def get_sites(arg: str) -> str:
        md = _metadata(arg)
        if not md.sites:
            return "no active or binding sites recorded"
        return "\n".join(
            f"[{s['kind']}] residues {s['first']}-{s['last']}: {s.get('note', '')}"
            for s in md.sites
        )

    @tool(
        "GetProteinFunction", "information_retrieval",
        "Retrieve the protein's function annotation and gene/protein names.",
        "a UniProt accession or PDB id",
    )
    def get_function(arg: str) -> str:
        md = _metadata(arg)
        names = ", ".join(md.names) or "unnamed"
        return f"Names: {names}\nFunction: {md.function_text or 'not recorded'}"

    @tool(
        "LiteratureSearch", "information_retrieval",
        "Answer a question from the local literature corpus, with per-claim source citations.",
        "a natural-language question",
    )
    def lit_search(arg: str) -> str:
        if ctx.corpus_dir is None:
            return "Error: no literature corpus configured"
        if ctx.gateway is None:
            return "Error: literature search needs an LLM gateway"
        result = info_tools.literature_search(arg, ctx.corpus_dir, ctx.gateway)
        cites = "; ".join(f"{d} chunk {i}" for d, i in result.citations) or "none"
        return f"{result.answer}\nSources: {cites}"

    # -- PDB & protein ---------------------------------------------------

    @tool(
        "PDBFileDownloader", "pdb_protein",
        "Download a structure by PDB id and register the file.",
        "a 4-character PDB id, e.g. 1LYZ",
    )
    def download_pdb(arg: str) -> str:
        structure, text = pdbtools.fetch_structure(arg.strip(), ctx.fetch_config)
        path = ctx.registry.root / f"{arg.strip().upper()}.pdb"
        path.write_text(text)
        entry = ctx.registry.register_file(
            path, f"PDB structure {arg.strip().upper()}", kind="structure", step=ctx.current_step
        )
        c = structure.counts()
        return (
            f"Downloaded {arg.strip().upper()} as {entry.file_id}: "
            f"{c['atoms']} atoms, {c['residues']} residues, {c['chains']} chain(s)."
        )

    @tool(
        "CleaningToolFunction", "pdb_protein",
        "Clean a structure: remove heterogens, rebuild missing heavy atoms, add hydrogens at a target pH.",
        "key=value pairs: structure=<file id> [pH=7.0] [keep_water=false] [add_hydrogens=true] [add_missing=true] [remove_heterogens=true]",
    )
    def clean(arg: str) -> str:
        pairs = _parse_kv(arg)
        if "structure" not in pairs:
            raise ValueError(_usage("'structure' file id is required", "structure=f001, pH=7.0"))
        def flag(key: str, default: bool) -> bool:
            return pairs.get(key, str(default)).lower() in ("1", "true", "yes")
        spec = pdbtools.CleanSpec(
            target_pH=float(pairs.get("pH", 7.0)),
            add_hydrogens=flag("add_hydrogens", True),
            add_missing_heavy_atoms=flag("add_missing", True),
            remove_heterogens=flag("remove_heterogens", True),
            keep_water=flag("keep_water", False),
        )
        structure = _load_structure(ctx, pairs["structure"])
        report = pdbtools.clean_structure(structure, spec)
        out = ctx.registry.root / f"cleaned_{pairs['structure']}_pH{spec.target_pH:g}.pdb"
        save_pdb_file(report.structure, out)
        entry = ctx.registry.register_file(
            out, f"cleaned {pairs['structure']} at pH {spec.target_pH:g}",
            kind="structure", step=ctx.current_step,
        )
        msg = (
            f"Cleaned structure saved as {entry.file_id}: removed {report.removed_heterogens} "
            f"heterogen atoms, added {report.added_heavy_atoms} heavy atoms, "
            f"+{report.added_hydrogens}/-{report.removed_hydrogens} hydrogens."
        )
        if report.warnings:
            msg += " Warnings: " + "; ".join(report.warnings)
        return msg

    @tool(
        "SummarizeStructure", "pdb_protein",
        "Report exact atom/residue/chain/water/heterogen counts for a structure file.",
        "a structure file id",
    )
    def summarize(arg: str) -> str:
        return pdbtools.summarize_structure(_load_structure(ctx, arg.strip()))

    @tool(
        "VisualizeStructure", "pdb_protein",
        "Render a deterministic 2D projection of a structure and register the figure.",
        "a structure file id",
    )
    def visualize(arg: str) -> str:
        token = arg.strip()
        structure = _load_structure(ctx, token)
        out = ctx.registry.root / f"render_{token}.ppm"
        pdbtools.render_structure(structure, out)
        entry = ctx.registry.register_file(
            out, f"static projection of {token}", kind="figure", step=ctx.current_step
        )
        return f"Visualization saved and registered as {entry.file_id} ({out.name})."

    # -- simulation --------------------------------------------------------

    @tool(
        "SetUpandRunFunction", "simulation",
        "Validate simulation parameters (filling documented defaults), run the simulation, and register trajectory, state log, and an editable run script.",
        "key=value pairs: structure=<file id> [ensemble=NVT] [temperature_K=300] [pressure_atm=] [timestep_fs=2] [n_steps=5000] [friction_per_ps=1] [nonbonded_cutoff_A=10] [record_interval=] [seed=2024] [solvent=water box_edge_A=...]",
    )
    def setup_and_run(arg: str) -> str:
        spec, notes = sim_tools.validate_and_complete_spec(arg)
        result = sim_tools.run_simulation(spec, ctx.adapter, ctx.registry, step=ctx.current_step)
        obs = result.observation
        if notes:
            obs += " Notes: " + "; ".join(notes) + "."
        return obs

    @tool(
        "SolvateStructure", "simulation",
        "Pack solvent molecules around a structure at a target density and register the solvated structure.",
        "key=value pairs: structure=<file id> solvent=water|methanol|acetonitrile (box_edge_A=<A> or padding_A=<A>) [target_density=g/cm3] [min_distance_A=2.0] [seed=2024]",
    )
    def solvate_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        if "structure" not in pairs:
            raise ValueError(_usage("'structure' file id is required", "structure=f001, solvent=water, box_edge_A=20"))
        spec = sim_tools.SolvationSpec(
            solvent=pairs.get("solvent", "water"),
            box_edge=float(pairs["box_edge_A"]) if "box_edge_A" in pairs else None,
            padding=float(pairs["padding_A"]) if "padding_A" in pairs else None,
            target_density=float(pairs["target_density"]) if "target_density" in pairs else None,
            min_distance=float(pairs.get("min_distance_A", sim_tools.DEFAULT_MIN_DISTANCE_A)),
        )
        structure = _load_structure(ctx, pairs["structure"])
        solvated, box = sim_tools.solvate(structure, spec, seed=int(pairs.get("seed", sim_tools.DEFAULT_SEED)))
        out = ctx.registry.root / f"solvated_{pairs['structure']}_{spec.solvent}.pdb"
        save_pdb_file(solvated, out)
        entry = ctx.registry.register_file(
            out, f"{pairs['structure']} solvated in {spec.solvent} (box {box:.1f} A)",
            kind="structure", step=ctx.current_step,
        )
        n_solvent = sum(1 for a in solvated.atoms if a.chain_id == "W")
        return f"Solvated structure registered as {entry.file_id}: box {box:.2f} A, {n_solvent} solvent atoms."

    @tool(
        "WriteRunScript", "simulation",
        "Emit an editable run script for a validated parameter set without running it.",
        "same key=value pairs as SetUpandRunFunction",
    )
    def write_script(arg: str) -> str:
        spec, notes = sim_tools.validate_and_complete_spec(arg)
        script = sim_tools.RunScript.from_spec(spec)
        out = ctx.registry.root / f"run_script_{script.spec_digest}.txt"
        out.write_text(script.text)
        entry = ctx.registry.register_file(
            out, "editable run script", kind="script", step=ctx.current_step
        )
        obs = f"Run script registered as {entry.file_id} (digest {script.spec_digest})."
        if notes:
            obs += " Notes: " + "; ".join(notes) + "."
        return obs

    @tool(
        "ModifyRunScript", "simulation",
        "Apply a natural-language modification to a registered run script (validated before acceptance) and register the result.",
        "key=value pairs: script=<file id>, instruction=<free text>",
    )
    def modify(arg: str) -> str:
        if ctx.gateway is None:
            return "Error: script modification needs an LLM gateway"
        pairs = _parse_kv(arg)
        if "script" not in pairs or "instruction" not in pairs:
            raise ValueError(_usage("need script=<file id> and instruction=<text>", "script=f003, instruction=anneal 300 to 400 and back"))
        text = ctx.registry.lookup(pairs["script"]).read_text()
        spec, _, _ = sim_tools.parse_script(text)
        old = sim_tools.RunScript(text=text, spec_digest=sim_tools.spec_hash(spec))
        new = sim_tools.modify_script(old, pairs["instruction"], ctx.gateway, ctx.adapter)
        out = ctx.registry.root / f"run_script_{new.spec_digest}_modified.txt"
        out.write_text(new.text)
        entry = ctx.registry.register_file(
            out, f"modified run script ({pairs['instruction'][:60]})", kind="script", step=ctx.current_step
        )
        return f"Modified script accepted and registered as {entry.file_id}."

    @tool(
        "ExecuteRunScript", "simulation",
        "Execute a registered run script (including edited schedules) and register its outputs.",
        "script=<file id>",
    )
    def execute(arg: str) -> str:
        pairs = _parse_kv(arg) if "=" in arg else {"script": arg.strip()}
        if "script" not in pairs:
            raise ValueError(_usage("'script' file id is required", "script=f003"))
        text = ctx.registry.lookup(pairs["script"]).read_text()
        result = sim_tools.execute_script(text, ctx.adapter, ctx.registry, step=ctx.current_step)
        return result.observation

    # -- analysis ----------------------------------------------------------

    @tool(
        "ComputeRMSD", "analysis",
        "RMSD of each trajectory frame against a reference frame (Kabsch superposition by default); writes a CSV series.",
        "key=value pairs: trajectory=<file id> topology=<structure file id> [reference_frame=0] [superpose=true] [chain=] [residues=a-b] [atoms=all|heavy|backbone|calpha]",
    )
    def compute_rmsd(arg: str) -> str:
        pairs = _parse_kv(arg)
        traj, topology = _load_traj(ctx, pairs)
        sel = _selection_from(pairs)
        ref_idx = int(pairs.get("reference_frame", 0))
        superpose = pairs.get("superpose", "true").lower() != "false"
        series = ana.rmsd(
            traj.frames, traj.frames[ref_idx], traj.times_ps, topology, sel,
            superpose=superpose,
            provenance={"trajectory": pairs["trajectory"], "reference_frame": ref_idx},
        )
        entry = _series_to_file(ctx, series, f"rmsd_{pairs['trajectory']}", f"RMSD series of {pairs['trajectory']}")
        return (
            f"RMSD over {len(series.y)} frames: mean {np.mean(series.y):.3f} A, "
            f"max {np.max(series.y):.3f} A. Series registered as {entry.file_id}."
        )

    @tool(
        "ComputeRMSF", "analysis",
        "Per-atom root-mean-square fluctuation about the time-mean structure.",
        "key=value pairs: trajectory=<file id> topology=<structure file id> [chain=] [residues=a-b] [atoms=...]",
    )
    def compute_rmsf(arg: str) -> str:
        pairs = _parse_kv(arg)
        traj, topology = _load_traj(ctx, pairs)
        vals = ana.rmsf(traj.frames, topology, _selection_from(pairs))
        series = ana.SeriesResult(
            "RMSF", np.arange(len(vals), dtype=float), vals, "atom index", "A",
            {"trajectory": pairs["trajectory"]},
        )
        entry = _series_to_file(ctx, series, f"rmsf_{pairs['trajectory']}", f"RMSF of {pairs['trajectory']}")
        return f"RMSF over {len(vals)} atoms: mean {np.mean(vals):.3f} A, max {np.max(vals):.3f} A. Registered as {entry.file_id}."

    @tool(
        "RadiusOfGyration", "analysis",
        "Mass-weighted radius of gyration per frame; writes a CSV series.",
        "key=value pairs: trajectory=<file id> [topology=<structure file id>] [mass_weighted=true]",
    )
    def compute_rgy(arg: str) -> str:
        pairs = _parse_kv(arg)
        traj, topology = _load_traj(ctx, pairs)
        mw = pairs.get("mass_weighted", "true").lower() != "false"
        series = ana.radius_of_gyration(
            traj.frames, traj.times_ps, topology, mass_weighted=mw,
            provenance={"trajectory": pairs["trajectory"]},
        )
        entry = _series_to_file(ctx, series, f"rgy_{pairs['trajectory']}", f"radius of gyration of {pairs['trajectory']}")
        return f"Radius of gyration: mean {np.mean(series.y):.3f} A. Series registered as {entry.file_id}."

    @tool(
        "SecondaryStructure", "analysis",
        "Assign helix/strand/coil per residue from backbone hydrogen-bond patterns; reports per-class counts.",
        "key=value pairs: structure=<file id> OR trajectory=<file id> topology=<file id> [frame=-1]",
    )
    def dssp_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        if "structure" in pairs:
            topo = _load_structure(ctx, pairs["structure"])
            coords = topo.coordinates
        else:
            traj, topo = _load_traj(ctx, pairs)
            if topo is None:
                raise ValueError(_usage("secondary structure needs a topology", "trajectory=f002, topology=f001"))
            coords = traj.frames[int(pairs.get("frame", -1))]
        classes = ana.secondary_structure(coords, topo)
        counts = ana.secondary_structure_counts(classes)
        return (
            f"Secondary structure: {counts['helix']} helix, {counts['strand']} strand, "
            f"{counts['coil']} coil residues. Assignment: {''.join(classes)}"
        )

    @tool(
        "PCATool", "analysis",
        "Principal component analysis of superposed coordinates; reports leading eigenvalues.",
        "key=value pairs: trajectory=<file id> topology=<file id> [chain=] [atoms=...]",
    )
    def pca_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        traj, topology = _load_traj(ctx, pairs)
        _, vals, proj = ana.pca(traj.frames, topology, _selection_from(pairs))
        top = ", ".join(f"{v:.4f}" for v in vals[:3])
        series = ana.SeriesResult(
            "PC1 projection", traj.times_ps, proj[:, 0], "ps", "A",
            {"trajectory": pairs["trajectory"]},
        )
        entry = _series_to_file(ctx, series, f"pca_{pairs['trajectory']}", f"PC1 projection of {pairs['trajectory']}")
        return f"PCA eigenvalues (A^2, leading 3): {top}. PC1 projection registered as {entry.file_id}."

    @tool(
        "SASATool", "analysis",
        "Shrake-Rupley solvent-accessible surface area (probe 1.4 A) for a structure or trajectory frame.",
        "key=value pairs: structure=<file id> OR trajectory=<file id> topology=<file id> [frame=-1] [probe_radius_A=1.4]",
    )
    def sasa_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        probe = float(pairs.get("probe_radius_A", 1.4))
        if "structure" in pairs:
            topo = _load_structure(ctx, pairs["structure"])
            coords = topo.coordinates
        else:
            traj, topo = _load_traj(ctx, pairs)
            if topo is None:
                raise ValueError(_usage("SASA needs a topology", "trajectory=f002, topology=f001"))
            coords = traj.frames[int(pairs.get("frame", -1))]
        _, total = ana.sasa(coords, topo, probe_radius=probe)
        return f"Total SASA: {total:.2f} A^2 (probe {probe:g} A)."

    @tool(
        "RDFTool", "analysis",
        "Radial distribution function g(r) between two selections under the minimum-image convention.",
        "key=value pairs: trajectory=<file id> topology=<file id> r_max=<A> [n_bins=100] [chain_a=] [chain_b=]",
    )
    def rdf_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        traj, topo = _load_traj(ctx, pairs)
        if topo is None:
            raise ValueError(_usage("RDF needs a topology", "trajectory=f002, topology=f001, r_max=5"))
        if "r_max" not in pairs:
            raise ValueError(_usage("'r_max' is required", "r_max=5.0"))
        sel_a = ana.Selection(chain_id=pairs.get("chain_a")).require(topo)
        sel_b = ana.Selection(chain_id=pairs.get("chain_b")).require(topo)
        centers, g = ana.rdf(
            traj.frames, traj.box_per_frame, sel_a, sel_b,
            r_max=float(pairs["r_max"]), n_bins=int(pairs.get("n_bins", 100)),
        )
        series = ana.SeriesResult("g(r)", centers, g, "A", "dimensionless", {"trajectory": pairs["trajectory"]})
        entry = _series_to_file(ctx, series, f"rdf_{pairs['trajectory']}", f"RDF of {pairs['trajectory']}")
        peak = centers[int(np.argmax(g))]
        return f"RDF computed over {traj.n_frames} frames; main peak near {peak:.2f} A. Registered as {entry.file_id}."

    @tool(
        "MomentsOfInertia", "analysis",
        "Principal moments of inertia (ascending) per frame.",
        "key=value pairs: trajectory=<file id> topology=<file id>",
    )
    def moi_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        traj, topo = _load_traj(ctx, pairs)
        if topo is None:
            raise ValueError(_usage("moments of inertia need a topology", "trajectory=f002, topology=f001"))
        moi = ana.moments_of_inertia(traj.frames, traj.times_ps, topo)
        for k in range(3):
            series = ana.SeriesResult(
                f"I{k + 1}", traj.times_ps, moi[:, k], "ps", "amu*A^2",
                {"trajectory": pairs["trajectory"]},
            )
            entry = _series_to_file(
                ctx, series, f"moi{k + 1}_{pairs['trajectory']}",
                f"principal moment {k + 1} of {pairs['trajectory']}",
            )
        means = ", ".join(f"{m:.2f}" for m in moi.mean(axis=0))
        return f"Principal moments (mean, amu*A^2): {means}. Last series registered as {entry.file_id}."

    @tool(
        "PlotSeries", "analysis",
        "Plot one or more registered CSV series on a shared axis and register the figure.",
        "key=value pairs: series=<file id>[;<file id>...] [title=...]",
    )
    def plot_tool(arg: str) -> str:
        pairs = _parse_kv(arg)
        if "series" not in pairs:
            raise ValueError(_usage("'series' file id(s) required", "series=f004;f005, title=RMSD"))
        ids = [s.strip() for s in pairs["series"].split(";") if s.strip()]
        series_list = [_read_series(ctx.registry.lookup(fid)) for fid in ids]
        title = pairs.get("title", series_list[0].label)
        out = ctx.registry.root / f"plot_{'_'.join(ids)}.ppm"
        ana.plot_series(series_list, title, out)
        entry = ctx.registry.register_file(
            out, f"plot of {', '.join(ids)}", kind="figure", step=ctx.current_step
        )
        return f"Figure registered as {entry.file_id} ({out.name})."

    # -- meta ---------------------------------------------------------------

    @tool(
        "ListRegistryFiles", "meta",
        "List every registered file with its id, kind, and description.",
        "no input (pass an empty string)",
    )
    def list_files(arg: str) -> str:
        return ctx.registry.describe_all() or "no files registered yet"

    return tools


def _read_series(path: Path) -> ana.SeriesResult:
    label, x_unit, y_unit = "series", "x", "y"
    provenance: dict[str, str] = {}
    xs: list[float] = []
    ys: list[float] = []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = (s.strip() for s in body.split(":", 1))
                if k == "label":
                    label = v
                elif k == "x_unit":
                    x_unit = v
                elif k == "y_unit":
                    y_unit = v
                else:
                    provenance[k] = v
        elif line and not line.startswith("x,"):
            a, b = line.split(",")
            xs.append(float(a))
            ys.append(float(b))
    return ana.SeriesResult(label, np.array(xs), np.array(ys), x_unit, y_unit, provenance)
