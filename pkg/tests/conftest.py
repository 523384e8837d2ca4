"""Pytest configuration and fixtures."""

import logging
from collections.abc import Callable, Iterator
from pathlib import Path

import pytest

from tvgroups.core.config import Settings
from tvgroups.main import run
from tvgroups.services.automaton import Automaton, dump_automaton
from tvgroups.services.constructions import (
    cyclic_shift_mealy,
    dihedral_mealy,
    lamplighter_mealy,
    sausage_mealy,
    single_state_tva,
)


@pytest.fixture(autouse=True)
def test_settings(monkeypatch: pytest.MonkeyPatch) -> Settings:
    """
    Provide deterministic settings for tests.

    config/main.yaml is local-only, so tests must not depend on it.
    """
    settings = Settings(config_file="does-not-exist.yaml")
    monkeypatch.setattr("tvgroups.main.get_settings", lambda: settings)
    return settings


@pytest.fixture(autouse=True)
def restore_root_logger() -> Iterator[None]:
    """setup_logging replaces root handlers; put the originals back after each test."""
    root = logging.getLogger()
    handlers = root.handlers[:]
    level = root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def identity_automaton() -> Automaton:
    """One state, identity labeling at every step."""
    return single_state_tva((), (False,))


@pytest.fixture
def flip_automaton() -> Automaton:
    """One state a = (a, a) tau."""
    return single_state_tva((), (True,))


@pytest.fixture
def lamplighter() -> Automaton:
    return lamplighter_mealy()


@pytest.fixture
def dihedral() -> Automaton:
    return dihedral_mealy()


@pytest.fixture
def shift3() -> Automaton:
    return cyclic_shift_mealy(3)


@pytest.fixture
def sausage2() -> Automaton:
    return sausage_mealy(2)


@pytest.fixture
def write_automaton(tmp_path: Path) -> Callable[[Automaton, str], Path]:
    """Dump an automaton into the test's temporary directory."""

    def _write(aut: Automaton, name: str) -> Path:
        path = tmp_path / name
        dump_automaton(aut, path)
        return path

    return _write


@pytest.fixture
def cli(capsys: pytest.CaptureFixture[str]) -> Callable[..., tuple[int, str, str]]:
    """Run the CLI and return (exit code, stdout, stderr)."""

    def _run(*argv: str) -> tuple[int, str, str]:
        code = run(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run
