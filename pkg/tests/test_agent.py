import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdworkbench.agent import (
    AgentAction,
    AgentTrace,
    ParseFailure,
    ToolSpec,
    dispatch_tool,
    parse_llm_output,
    render_action,
    render_system_prompt,
    run_agent,
    truncate_observation,
)
from mdworkbench.llm import scripted_gateway

from conftest import action_block, final_block


def echo_tool(name: str = "Echo") -> ToolSpec:
    return ToolSpec(name, "meta", "Echo the input back.", "any string", lambda s: f"echo: {s}")


def fail_tool() -> ToolSpec:
    def boom(s: str) -> str:
        raise RuntimeError("deliberate failure")

    return ToolSpec("Boom", "meta", "Always fails.", "any string", boom)


# ---------------------------------------------------------------------------
# Parsing


def test_parse_tool_call():
    out = parse_llm_output(action_block("Echo", "hello"))
    assert isinstance(out, AgentAction)
    assert out.kind == "tool_call"
    assert out.tool_name == "Echo"
    assert out.tool_input == "hello"
    assert out.thought == "next step"


def test_parse_final_answer():
    out = parse_llm_output(final_block("all done"))
    assert isinstance(out, AgentAction)
    assert out.kind == "final_answer"
    assert out.answer == "all done"


def test_parse_rejects_both_action_and_final():
    text = action_block("Echo", "x") + "\nFinal Answer: also this"
    out = parse_llm_output(text)
    assert isinstance(out, ParseFailure)
    assert out.reason == "action_and_final_answer"


def test_parse_rejects_multiple_actions():
    text = action_block("A", "1") + "\n" + action_block("B", "2")
    out = parse_llm_output(text)
    assert isinstance(out, ParseFailure)
    assert out.reason == "multiple_actions"


def test_parse_rejects_unfenced_action():
    text = 'Thought: hm\nAction:\n{"action": "Echo", "action_input": "x"}'
    out = parse_llm_output(text)
    assert isinstance(out, ParseFailure)
    assert out.reason == "unfenced_action"


def test_parse_rejects_prose():
    out = parse_llm_output("I will now think about the problem.")
    assert isinstance(out, ParseFailure)
    assert out.reason == "no_action_block"


def test_parse_rejects_bad_json():
    out = parse_llm_output('Action:\n```\n{"action": "Echo", \n```')
    assert isinstance(out, ParseFailure)


def test_parse_non_string_input_is_serialized():
    body = json.dumps({"action": "Echo", "action_input": {"k": 1}})
    out = parse_llm_output(f"Action:\n```\n{body}\n```")
    assert isinstance(out, AgentAction)
    assert json.loads(out.tool_input) == {"k": 1}


tool_names = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd")), min_size=1, max_size=20
)
inputs = st.text(min_size=0, max_size=200)
thoughts = st.text(
    alphabet=st.characters(blacklist_characters="\n", blacklist_categories=("Cs", "Cc")),
    max_size=80,
).map(str.strip)


@settings(max_examples=200, deadline=None)
@given(name=tool_names, arg=inputs, thought=thoughts)
def test_parser_round_trip_tool_calls(name, arg, thought):
    action = AgentAction(thought=thought, kind="tool_call", tool_name=name, tool_input=arg)
    reparsed = parse_llm_output(render_action(action))
    assert reparsed == action


@settings(max_examples=50, deadline=None)
@given(answer=thoughts.filter(lambda s: s and "{" not in s))
def test_parser_round_trip_final_answers(answer):
    action = AgentAction(thought="t", kind="final_answer", answer=answer)
    reparsed = parse_llm_output(render_action(action))
    assert reparsed == action


# ---------------------------------------------------------------------------
# Action invariants


def test_action_kind_invariants():
    with pytest.raises(ValueError):
        AgentAction(thought="", kind="tool_call", tool_name="X", tool_input=None)
    with pytest.raises(ValueError):
        AgentAction(thought="", kind="final_answer", answer="a", tool_name="X", tool_input="y")
    with pytest.raises(ValueError):
        AgentAction(thought="", kind="other")


# ---------------------------------------------------------------------------
# Prompt rendering


def test_system_prompt_lists_tools_and_question():
    prompt = render_system_prompt("What is 1LYZ?", [echo_tool()])
    assert "Echo" in prompt
    assert "Question: What is 1LYZ?" in prompt
    assert "expert molecular dynamics scientist" in prompt


def test_system_prompt_rejects_duplicate_tools():
    with pytest.raises(ValueError):
        render_system_prompt("q", [echo_tool(), echo_tool()])


def test_system_prompt_rejects_empty_input():
    with pytest.raises(ValueError):
        render_system_prompt("", [echo_tool()])


# ---------------------------------------------------------------------------
# Dispatch


def test_dispatch_unknown_tool_names_valid_ones():
    action = AgentAction(thought="", kind="tool_call", tool_name="Nope", tool_input="x")
    obs, err = dispatch_tool(action, [echo_tool(), fail_tool()])
    assert err
    assert "tool not found" in obs
    assert "Boom" in obs and "Echo" in obs


def test_dispatch_tool_exception_becomes_error_observation():
    action = AgentAction(thought="", kind="tool_call", tool_name="Boom", tool_input="x")
    obs, err = dispatch_tool(action, [fail_tool()])
    assert err
    assert obs == "Error: deliberate failure"


def test_truncate_observation_marks_cut():
    text = "a" * 5000
    out = truncate_observation(text)
    assert out.endswith("[truncated]")
    assert len(out) == 4000 + len(" [truncated]")
    assert truncate_observation("short") == "short"


# ---------------------------------------------------------------------------
# Loop behavior


def test_loop_runs_tool_then_final():
    gw = scripted_gateway([action_block("Echo", "hi"), final_block("said hi")])
    trace = run_agent("say hi", [echo_tool()], gw)
    assert trace.outcome == "final_answer"
    assert trace.final_text == "said hi"
    assert trace.steps[0].observation == "echo: hi"


def test_loop_recovers_after_format_reminder():
    gw = scripted_gateway(["just prose, no action", action_block("Echo", "x"), final_block("ok")])
    trace = run_agent("q", [echo_tool()], gw)
    assert trace.outcome == "final_answer"
    # the reminder is visible to the model on the retry
    retry_call = gw.script.calls[1]
    assert any("could not be parsed" in m.content for m in retry_call)


def test_loop_aborts_after_persistent_garbage():
    gw = scripted_gateway(["garbage"] * 20)
    trace = run_agent("q", [echo_tool()], gw)
    assert trace.outcome == "unrecoverable_error"


def test_loop_exhausts_step_budget():
    gw = scripted_gateway([action_block("Echo", str(i)) for i in range(5)])
    trace = run_agent("q", [echo_tool()], gw, step_budget=5)
    assert trace.outcome == "step_budget_exhausted"
    assert len(trace.steps) == 5


def test_trace_round_trips_through_dict():
    gw = scripted_gateway([action_block("Echo", "hi"), final_block("done")])
    trace = run_agent("q", [echo_tool()], gw)
    restored = AgentTrace.from_dict(trace.to_dict())
    assert restored.to_dict() == trace.to_dict()
    assert restored.outcome == trace.outcome
