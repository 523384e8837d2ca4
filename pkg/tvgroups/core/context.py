"""Per-invocation run context."""

import secrets
from contextvars import ContextVar

# Context variable for the run ID (one per CLI invocation or batch job)
run_id_context: ContextVar[str] = ContextVar("run_id", default="")


def generate_run_id() -> str:
    """
    Generate a unique run ID.

    Returns:
        A unique run ID in format: run_<32 hex chars>
    """
    return f"run_{secrets.token_hex(16)}"


def start_run(run_id: str | None = None) -> str:
    """Bind a run ID to the current context and return it."""
    value = run_id or generate_run_id()
    run_id_context.set(value)
    return value


def get_run_id() -> str:
    """
    Get the current run ID from context.

    Returns:
        Current run ID or empty string if no run was started
    """
    return run_id_context.get()
