"""Core settings, logging and run context."""
