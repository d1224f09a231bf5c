"""Chain-of-thought agent loop: prompt rendering, completion parsing,
tool dispatch, and the run driver."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from typing import Callable

from .llm import ChatMessage, GatewayError, LLMGateway

TOOL_CATEGORIES = (
    "information_retrieval",
    "pdb_protein",
    "simulation",
    "analysis",
    "meta",
)

DEFAULT_STEP_BUDGET = 40
OBSERVATION_PROMPT_LIMIT = 4000
PARSE_RETRIES_PER_STEP = 2
MAX_CONSECUTIVE_PARSE_FAILURES = 3

SYSTEM_PROMPT_TEMPLATE = """You are an expert molecular dynamics scientist, and your task is to respond to the question or solve the problem to the best of your ability using the provided tools.

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

You are required to use the tools provided, using the most specific tool available for each action. Your final answer should contain all information necessary to answer the question and its subquestions. Before you finish, reflect on your progress and make sure you have addressed the question in its entirety.

If you are asked to continue or reference previous runs, the context will be provided to you. If context is provided, you should assume you are continuing a chat.

You have access to the following tools:
{tools}

Here is the input:
Previous Context: {context}
Question: {input}"""

FORMAT_REMINDER = (
    "Your last response could not be parsed ({reason}). Respond with exactly one "
    "'Thought, Action, Action Input' block (the action object fenced in triple "
    "backticks) OR exactly one 'Final Answer:'."
)


@dataclass(frozen=True)
class ToolSpec:
    name: str
    category: str
    description: str
    input_contract: str
    handler: Callable[[str], str]

    def __post_init__(self) -> None:
        if self.category not in TOOL_CATEGORIES:
            raise ValueError(f"unknown tool category {self.category!r}")
        if not self.description:
            raise ValueError(f"tool {self.name!r} has an empty description")


@dataclass(frozen=True)
class AgentAction:
    thought: str
    kind: str  # tool_call | final_answer
    tool_name: str | None = None
    tool_input: str | None = None
    answer: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "tool_call":
            if self.tool_name is None or self.tool_input is None or self.answer is not None:
                raise ValueError("tool_call requires tool_name and tool_input, no answer")
        elif self.kind == "final_answer":
            if self.answer is None or self.tool_name is not None or self.tool_input is not None:
                raise ValueError("final_answer requires answer, no tool fields")
        else:
            raise ValueError(f"bad action kind {self.kind!r}")


@dataclass(frozen=True)
class ParseFailure:
    reason: str
    detail: str = ""


@dataclass
class TraceStep:
    action: AgentAction
    observation: str
    wall_time_s: float
    error: bool

    def to_dict(self) -> dict:
        return {
            "thought": self.action.thought,
            "kind": self.action.kind,
            "tool_name": self.action.tool_name,
            "tool_input": self.action.tool_input,
            "answer": self.action.answer,
            "observation": self.observation,
            "wall_time_s": self.wall_time_s,
            "error": self.error,
        }

    @staticmethod
    def from_dict(d: dict) -> "TraceStep":
        return TraceStep(
            action=AgentAction(
                thought=d["thought"],
                kind=d["kind"],
                tool_name=d.get("tool_name"),
                tool_input=d.get("tool_input"),
                answer=d.get("answer"),
            ),
            observation=d["observation"],
            wall_time_s=d["wall_time_s"],
            error=d["error"],
        )


@dataclass
class AgentTrace:
    steps: list[TraceStep] = field(default_factory=list)
    outcome: str = "unrecoverable_error"  # final_answer | step_budget_exhausted | unrecoverable_error
    final_text: str = ""
    user_input: str = ""

    def to_dict(self) -> dict:
        return {
            "user_input": self.user_input,
            "outcome": self.outcome,
            "final_text": self.final_text,
            "steps": [s.to_dict() for s in self.steps],
        }

    @staticmethod
    def from_dict(d: dict) -> "AgentTrace":
        return AgentTrace(
            steps=[TraceStep.from_dict(s) for s in d["steps"]],
            outcome=d["outcome"],
            final_text=d["final_text"],
            user_input=d.get("user_input", ""),
        )


def render_tool_catalog(tools: list[ToolSpec]) -> str:
    lines = []
    for t in tools:
        lines.append(f"- {t.name} [{t.category}]: {t.description} Input: {t.input_contract}")
    return "\n".join(lines)


def render_system_prompt(
    user_input: str, tools: list[ToolSpec], context: str | None = None
) -> str:
    if not user_input:
        raise ValueError("user_input must be non-empty")
    names = [t.name for t in tools]
    if len(set(names)) != len(names):
        raise ValueError("tool names must be unique within a toolset")
    return SYSTEM_PROMPT_TEMPLATE.format(
        tools=render_tool_catalog(tools),
        context=context or "",
        input=user_input,
    )


_FENCE_RE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)
_FINAL_RE = re.compile(r"Final Answer:\s*(.*)", re.DOTALL)
_THOUGHT_RE = re.compile(r"Thought:[ \t]*(.*?)(?:\n\s*(?:Action:|Final Answer:)|\Z)", re.DOTALL)


def parse_llm_output(text: str) -> AgentAction | ParseFailure:
    """Extract a single tool call or final answer from a raw completion.

    Tolerates surrounding prose around exactly one well-formed block;
    anything ambiguous is a ParseFailure the loop converts into a format
    reminder.
    """
    fences = _FENCE_RE.findall(text)
    final = _FINAL_RE.search(text)
    thought_m = _THOUGHT_RE.search(text)
    thought = thought_m.group(1).strip() if thought_m else ""

    if fences and final:
        return ParseFailure("action_and_final_answer")
    if final:
        return AgentAction(thought=thought, kind="final_answer", answer=final.group(1).strip())
    if len(fences) > 1:
        return ParseFailure("multiple_actions")
    if not fences:
        if "{" in text and '"action"' in text:
            return ParseFailure("unfenced_action")
        return ParseFailure("no_action_block")
    try:
        obj = json.loads(fences[0])
    except json.JSONDecodeError as exc:
        return ParseFailure("malformed_action_object", str(exc))
    if not isinstance(obj, dict) or "action" not in obj or "action_input" not in obj:
        return ParseFailure("malformed_action_object", "missing action/action_input keys")
    name = obj["action"]
    arg = obj["action_input"]
    if not isinstance(name, str) or not name:
        return ParseFailure("malformed_action_object", "action must be a non-empty string")
    if not isinstance(arg, str):
        arg = json.dumps(arg)
    return AgentAction(thought=thought, kind="tool_call", tool_name=name, tool_input=arg)


def render_action(action: AgentAction) -> str:
    """Canonical completion text for an action; inverse of parse_llm_output."""
    if action.kind == "final_answer":
        return f"Thought: {action.thought}\nFinal Answer: {action.answer}"
    body = json.dumps({"action": action.tool_name, "action_input": action.tool_input}, indent=4)
    return f"Thought: {action.thought}\nAction:\n```\n{body}\n```"


def dispatch_tool(action: AgentAction, toolset: list[ToolSpec]) -> tuple[str, bool]:
    """Invoke the named tool; exceptions become 'Error:' observations so
    the loop keeps going.  Returns (observation, error_flag)."""
    if action.kind != "tool_call":
        raise ValueError("dispatch_tool requires a tool_call action")
    by_name = {t.name: t for t in toolset}
    tool = by_name.get(action.tool_name or "")
    if tool is None:
        names = ", ".join(sorted(by_name))
        return (f"Error: tool not found: {action.tool_name!r}. Valid tools: {names}", True)
    try:
        return (tool.handler(action.tool_input or ""), False)
    except Exception as exc:
        return (f"Error: {exc}", True)


def truncate_observation(text: str, limit: int = OBSERVATION_PROMPT_LIMIT) -> str:
    if len(text) <= limit:
        return text
    return text[:limit] + " [truncated]"


def run_agent(
    user_input: str,
    toolset: list[ToolSpec],
    gateway: LLMGateway,
    context: str | None = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
    registry=None,
    clock: Callable[[], float] = time.time,
    step_callback: Callable[[int, TraceStep], None] | None = None,
    system_prompt: str | None = None,
) -> AgentTrace:
    """Render -> complete -> parse -> dispatch until a final answer, the
    step budget, or three consecutive parse failures.

    `registry`, when given, has its compact listing injected into each
    step's scratchpad so the model can reference files by id.
    """
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    system = system_prompt or render_system_prompt(user_input, toolset, context)
    trace = AgentTrace(user_input=user_input)
    scratchpad: list[ChatMessage] = []
    consecutive_failures = 0

    for _ in range(step_budget):
        messages = [ChatMessage("system", system)]
        if registry is not None:
            listing = registry.describe_all()
            if listing:
                messages.append(ChatMessage("user", "Files so far:\n" + listing))
        messages.extend(scratchpad)
        if len(messages) == 1:
            messages.append(ChatMessage("user", "Begin."))

        action: AgentAction | None = None
        for attempt in range(PARSE_RETRIES_PER_STEP + 1):
            started = clock()
            try:
                completion = gateway.complete_chat(messages)
            except GatewayError as exc:
                trace.outcome = "unrecoverable_error"
                trace.final_text = f"gateway failure: {exc}"
                return trace
            parsed = parse_llm_output(completion)
            if isinstance(parsed, AgentAction):
                action = parsed
                break
            if attempt < PARSE_RETRIES_PER_STEP:
                messages = messages + [
                    ChatMessage("assistant", completion),
                    ChatMessage("user", FORMAT_REMINDER.format(reason=parsed.reason)),
                ]
        if action is None:
            consecutive_failures += 1
            if consecutive_failures >= MAX_CONSECUTIVE_PARSE_FAILURES:
                trace.outcome = "unrecoverable_error"
                trace.final_text = "aborted: repeated unparsable completions"
                return trace
            continue
        consecutive_failures = 0

        if action.kind == "final_answer":
            step = TraceStep(action=action, observation="", wall_time_s=clock() - started, error=False)
            trace.steps.append(step)
            if step_callback:
                step_callback(len(trace.steps) - 1, step)
            trace.outcome = "final_answer"
            trace.final_text = action.answer or ""
            return trace

        observation, err = dispatch_tool(action, toolset)
        step = TraceStep(
            action=action, observation=observation, wall_time_s=clock() - started, error=err
        )
        trace.steps.append(step)
        if step_callback:
            step_callback(len(trace.steps) - 1, step)
        scratchpad.append(ChatMessage("assistant", render_action(action)))
        scratchpad.append(
            ChatMessage("user", "Observation: " + truncate_observation(observation))
        )

    trace.outcome = "step_budget_exhausted"
    trace.final_text = ""
    return trace
