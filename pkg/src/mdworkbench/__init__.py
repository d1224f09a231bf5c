"""mdworkbench: an LLM agent for molecular-dynamics workflows with a
curated toolset, resumable checkpointed sessions, a toy MD engine, and an
evaluation harness."""

__version__ = "0.1.0"

from .agent import AgentTrace, ToolSpec, run_agent
from .llm import ChatMessage, LLMGateway, ModelConfig, ScriptedLLM, scripted_gateway
from .registry import FileRegistry, RunCheckpoint, load_checkpoint, save_checkpoint

__all__ = [
    "AgentTrace",
    "ToolSpec",
    "run_agent",
    "ChatMessage",
    "LLMGateway",
    "ModelConfig",
    "ScriptedLLM",
    "scripted_gateway",
    "FileRegistry",
    "RunCheckpoint",
    "load_checkpoint",
    "save_checkpoint",
]
