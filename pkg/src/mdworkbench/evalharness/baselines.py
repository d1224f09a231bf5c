"""The two comparison frameworks: a single-query LLM that writes one
combined script, and a reasoning loop equipped only with a sandboxed Python
interpreter."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..agent import AgentTrace, ToolSpec, run_agent
from ..llm import ChatMessage, LLMGateway
from ..registry import FileEntry, FileRegistry
from ..sandbox import SandboxConfig, run_snippet
from .tasks import TaskSpec

SINGLE_QUERY_SYSTEM_PROMPT = (
    "You are an expert molecular dynamics scientist, and your task is to "
    "respond to the question or solve the problem in its entirety to the "
    "best of your ability. If any part of the task requires you to perform "
    " an action that you are not capable of completing, please write a "
    "runnable Python script for that step and move on. For literature "
    "papers, use and process papers from the `paper_collection` folder. For "
    ".pdb files, download them from the RSCB website using `requests`. To "
    "preprocess PDB files, you will use PDBFixer. To get information about "
    "proteins, retrieve data from the UniProt database. For anything "
    "related to simulations, you will use OpenMM, and for anything related "
    "to analyses, you will use MDTraj. At the end, combine any scripts into "
    "one script."
)

REACT_SYSTEM_PROMPT = """You are an expert molecular dynamics scientist, and your task is to respond to the question or solve the problem to the best of your ability. If any part of the task requires you to perform an action that you are not capable of completing, please write a runnable Python script for that step and run it. For literature papers, use and process papers from the `paper_collection' folder. For .pdb files, download them from the RSCB website using `requests`. TO preprocess PDB files, you will use PDBFixer. To get information about proteins, retrieve data from the UniProt database. For anything related to simulations, you will use OpenMM, and for anything related to analyzes, you will use MDTraj.

You can only respond with a single complete 'Thought, Action, Action Input' format OR a single 'Final Answer' format.

Complete format:
Thought: (reflect on your progress and decide what to do next)
Action:
```
{{
    "action": (the action name, it should be the name of a tool),
    "action_input": (the input string for the action)
}}
```

OR

Final Answer: (the final response to the original input
question, once all steps are complete)

You are required to use the tools provided,
using the most specific tool available for each action. Your final answer should contain all information necessary to answer the question and its subquestions. Before you finish, reflect on your progress and make sure you have addressed the question in its entirety.

Here is the input:
Question: {input}"""

_CODE_FENCE_RE = re.compile(r"```(?:python)?\s*\n(.*?)```", re.DOTALL)


@dataclass
class SingleQueryResult:
    completion: str
    script_text: str
    script_entry: FileEntry
    n_llm_calls: int


def extract_combined_script(completion: str) -> str:
    """The last fenced code block is treated as the combined script; a
    completion with no fences is saved whole (still graded by a human)."""
    blocks = _CODE_FENCE_RE.findall(completion)
    return blocks[-1].strip() + "\n" if blocks else completion.strip() + "\n"


def baseline_single_query(
    task: TaskSpec,
    gateway: LLMGateway,
    registry: FileRegistry,
    prompt_style: str = "natural",
) -> SingleQueryResult:
    """One completion, one emitted script.  The script is registered for
    human-executed grading and never run here."""
    prompt = task.prompt_ordered if prompt_style == "ordered" and task.prompt_ordered else task.prompt_natural
    completion = gateway.complete_chat(
        [
            ChatMessage("system", SINGLE_QUERY_SYSTEM_PROMPT),
            ChatMessage("user", prompt),
        ]
    )
    script = extract_combined_script(completion)
    path = registry.root / f"combined_script_task{task.task_id:03d}.py"
    path.write_text(script)
    entry = registry.register_file(
        path, f"combined script emitted for task {task.task_id} (not executed)", kind="script"
    )
    return SingleQueryResult(completion, script, entry, n_llm_calls=1)


def python_repl_tool(config: SandboxConfig) -> ToolSpec:
    def handler(code: str) -> str:
        return run_snippet(code, config)

    return ToolSpec(
        name="PythonREPL",
        category="meta",
        description=(
            "Execute a Python snippet in an isolated interpreter "
            f"(wall time limit {config.time_limit_s:g} s, memory limit "
            f"{config.memory_limit_bytes // (1024 * 1024)} MB); stdout and "
            "stderr are returned as the observation."
        ),
        input_contract="the Python source to run",
        handler=handler,
    )


def baseline_react_interpreter(
    task: TaskSpec,
    gateway: LLMGateway,
    sandbox: SandboxConfig,
    prompt_style: str = "natural",
    step_budget: int = 40,
) -> AgentTrace:
    """The reasoning loop with a single tool: sandboxed code execution."""
    prompt = task.prompt_ordered if prompt_style == "ordered" and task.prompt_ordered else task.prompt_natural
    toolset = [python_repl_tool(sandbox)]
    return run_agent(
        prompt,
        toolset,
        gateway,
        step_budget=step_budget,
        system_prompt=REACT_SYSTEM_PROMPT.format(input=prompt),
    )
