import json
from pathlib import Path

import numpy as np
import pytest

from mdworkbench.structure import Atom, Structure


def action_block(tool: str, arg: str, thought: str = "next step") -> str:
    body = json.dumps({"action": tool, "action_input": arg})
    return f"Thought: {thought}\nAction:\n```json\n{body}\n```"


def final_block(answer: str, thought: str = "done") -> str:
    return f"Thought: {thought}\nFinal Answer: {answer}"


@pytest.fixture
def tiny_structure() -> Structure:
    """A 3-residue backbone-only peptide for fast tool tests."""
    coords = [
        ("N", "N", 1, (0.0, 0.0, 0.0)),
        ("CA", "C", 1, (1.46, 0.0, 0.0)),
        ("C", "C", 1, (2.0, 1.4, 0.0)),
        ("O", "O", 1, (1.3, 2.4, 0.0)),
        ("N", "N", 2, (3.3, 1.5, 0.0)),
        ("CA", "C", 2, (4.1, 2.7, 0.1)),
        ("C", "C", 2, (5.5, 2.3, 0.5)),
        ("O", "O", 2, (5.8, 1.1, 0.6)),
        ("N", "N", 3, (6.4, 3.3, 0.7)),
        ("CA", "C", 3, (7.8, 3.1, 1.1)),
        ("C", "C", 3, (8.6, 4.4, 1.0)),
        ("O", "O", 3, (8.1, 5.5, 0.8)),
    ]
    atoms = [
        Atom(serial=i + 1, name=n, element=e, res_name="ALA", res_seq=r,
             chain_id="A", x=x, y=y, z=z)
        for i, (n, e, r, (x, y, z)) in enumerate(coords)
    ]
    return Structure(atoms=atoms, source="test")


def random_frames(n_frames: int, n_atoms: int, seed: int = 0, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = rng.uniform(0, 10, (n_atoms, 3))
    return base[None, :, :] + rng.normal(0, scale, (n_frames, n_atoms, 3))


def fixture_pdb_dir() -> Path:
    import mdworkbench

    return Path(mdworkbench.__file__).parent / "data" / "fixtures" / "pdb"
