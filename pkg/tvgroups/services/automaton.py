"""Invertible Mealy and time-varying automata with eventually periodic schedules."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from pydantic import ValidationError

from tvgroups.core.logging import get_logger
from tvgroups.models.automaton import AutomatonFile, StepTableFile
from tvgroups.services.errors import InputError

logger = get_logger(__name__)

Word = tuple[int, ...]


class AutomatonError(InputError):
    """Base exception for automaton operations."""


class AutomatonValidationError(AutomatonError):
    """Raised when an automaton violates a well-formedness invariant."""

    def __init__(self, reason: str, location: str | None = None) -> None:
        super().__init__(f"{location}: {reason}" if location else reason)
        self.reason = reason
        self.location = location


class LetterOutOfRangeError(AutomatonError):
    """Raised when a word contains a letter outside the alphabet."""


class StateNotFoundError(AutomatonError):
    """Raised when a state name or index does not exist."""


@dataclass(frozen=True)
class Alphabet:
    """Letters 0..size-1."""

    size: int

    @property
    def letters(self) -> range:
        return range(self.size)


@dataclass(frozen=True)
class Permutation:
    """A map of the alphabet given by its image list; images[x] is the image of x."""

    images: tuple[int, ...]

    @classmethod
    def identity(cls, size: int) -> Permutation:
        return cls(tuple(range(size)))

    @classmethod
    def flip(cls) -> Permutation:
        """The transposition of the binary alphabet."""
        return cls((1, 0))

    def __call__(self, letter: int) -> int:
        return self.images[letter]

    @property
    def size(self) -> int:
        return len(self.images)

    @property
    def is_bijection(self) -> bool:
        return sorted(self.images) == list(range(len(self.images)))

    @property
    def is_identity(self) -> bool:
        return all(image == letter for letter, image in enumerate(self.images))

    def inverse(self) -> Permutation:
        inverse = [0] * len(self.images)
        for letter, image in enumerate(self.images):
            inverse[image] = letter
        return Permutation(tuple(inverse))

    def then(self, other: Permutation) -> Permutation:
        """Apply self first, then other."""
        return Permutation(tuple(other.images[image] for image in self.images))


@dataclass(frozen=True)
class StepTable:
    """Transition map and per-state labelings for one step of the schedule."""

    delta: tuple[tuple[int, ...], ...]
    rho: tuple[Permutation, ...]

    @classmethod
    def build(cls, delta: Sequence[Sequence[int]], rho: Sequence[Sequence[int]]) -> StepTable:
        return cls(
            delta=tuple(tuple(row) for row in delta),
            rho=tuple(Permutation(tuple(row)) for row in rho),
        )

    def padded(self, extra: int) -> StepTable:
        """Append `extra` inert states after the existing ones."""
        n = len(self.delta)
        k = len(self.rho[0].images) if self.rho else 0
        return StepTable(
            delta=self.delta + tuple(tuple(n + j for _ in range(k)) for j in range(extra)),
            rho=self.rho + tuple(Permutation.identity(k) for _ in range(extra)),
        )


@dataclass(frozen=True)
class Schedule:
    """Step tables for i = 1, 2, ...: the prefix once, then the cycle forever."""

    prefix: tuple[StepTable, ...]
    cycle: tuple[StepTable, ...]

    @property
    def phase_count(self) -> int:
        """Number of distinct effective phases, |prefix| + |cycle|."""
        return len(self.prefix) + len(self.cycle)

    @property
    def tables(self) -> tuple[StepTable, ...]:
        """Tables indexed by effective phase minus one."""
        return self.prefix + self.cycle

    def effective_phase(self, step: int) -> int:
        """Collapse a step index into 1..|prefix|+|cycle|."""
        if step < 1:
            raise AutomatonError(f"step index must be >= 1, got {step}")
        prefix_len = len(self.prefix)
        if step <= prefix_len:
            return step
        return prefix_len + 1 + (step - prefix_len - 1) % len(self.cycle)

    def next_phase(self, phase: int) -> int:
        """Effective phase of step i+1 given the effective phase of step i."""
        if phase < self.phase_count:
            return phase + 1
        return len(self.prefix) + 1

    def step(self, step: int) -> StepTable:
        return self.tables[self.effective_phase(step) - 1]


@dataclass(frozen=True)
class CompiledTables:
    """Flat lookup tables indexed by [phase - 1][state][letter] for the hot loops."""

    delta: tuple[tuple[tuple[int, ...], ...], ...]
    images: tuple[tuple[tuple[int, ...], ...], ...]
    inverse_images: tuple[tuple[tuple[int, ...], ...], ...] | None
    next_phase: tuple[int, ...]
    identity_label: tuple[tuple[bool, ...], ...]


@dataclass(frozen=True)
class Automaton:
    """Time-varying automaton (X, Q, phi, psi) with a finitely described schedule."""

    alphabet: Alphabet
    states: tuple[str, ...]
    schedule: Schedule

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def k(self) -> int:
        return self.alphabet.size

    @property
    def is_mealy(self) -> bool:
        return not self.schedule.prefix and len(self.schedule.cycle) == 1

    def step_table(self, step: int) -> StepTable:
        return self.schedule.step(step)

    def effective_phase(self, step: int) -> int:
        return self.schedule.effective_phase(step)

    def next_phase(self, phase: int) -> int:
        return self.schedule.next_phase(phase)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise StateNotFoundError(
                f"unknown state {name!r}; states are {', '.join(self.states)}"
            ) from None

    @cached_property
    def compiled(self) -> CompiledTables:
        tables = self.schedule.tables
        invertible = all(label.is_bijection for table in tables for label in table.rho)
        return CompiledTables(
            delta=tuple(table.delta for table in tables),
            images=tuple(tuple(label.images for label in table.rho) for table in tables),
            inverse_images=(
                tuple(tuple(label.inverse().images for label in table.rho) for table in tables)
                if invertible
                else None
            ),
            next_phase=tuple(
                self.schedule.next_phase(phase) for phase in range(1, len(tables) + 1)
            ),
            identity_label=tuple(tuple(label.is_identity for label in table.rho) for table in tables),
        )

    @cached_property
    def trivial_states(self) -> frozenset[tuple[int, int]]:
        """
        Pairs (state, effective phase) whose transformation is the identity.

        A vertex of the diagram acts trivially iff no vertex reachable from it
        carries a non-identity labeling.
        """
        compiled = self.compiled
        phases = self.schedule.phase_count
        predecessors: dict[tuple[int, int], list[tuple[int, int]]] = {}
        moving: list[tuple[int, int]] = []
        for phase in range(1, phases + 1):
            following = compiled.next_phase[phase - 1]
            for q in range(self.n):
                if not compiled.identity_label[phase - 1][q]:
                    moving.append((q, phase))
                for target in set(compiled.delta[phase - 1][q]):
                    predecessors.setdefault((target, following), []).append((q, phase))

        nontrivial = set(moving)
        queue = deque(moving)
        while queue:
            vertex = queue.popleft()
            for source in predecessors.get(vertex, ()):
                if source not in nontrivial:
                    nontrivial.add(source)
                    queue.append(source)

        return frozenset(
            (q, phase)
            for phase in range(1, phases + 1)
            for q in range(self.n)
            if (q, phase) not in nontrivial
        )

    @cached_property
    def trivial_by_phase(self) -> tuple[frozenset[int], ...]:
        """For each effective phase, the states acting as the identity there."""
        trivial = self.trivial_states
        return tuple(
            frozenset(q for q in range(self.n) if (q, phase) in trivial)
            for phase in range(1, self.schedule.phase_count + 1)
        )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of `validate`: the first violated invariant, if any."""

    ok: bool
    reason: str | None = None
    location: str | None = None

    def raise_for_error(self) -> None:
        if not self.ok:
            raise AutomatonValidationError(self.reason or "invalid automaton", self.location)


@dataclass(frozen=True)
class TraceStep:
    """One vertex (q, i) on a diagram path together with its labeling and the letters read."""

    state: int
    step: int
    label: Permutation
    letter: int
    output: int


def _check_table(table: StepTable, n: int, k: int, where: str) -> ValidationReport | None:
    if len(table.delta) != n:
        return ValidationReport(False, f"expected {n} delta rows, got {len(table.delta)}", f"{where}.delta")
    if len(table.rho) != n:
        return ValidationReport(False, f"expected {n} rho rows, got {len(table.rho)}", f"{where}.rho")
    for q, row in enumerate(table.delta):
        if len(row) != k:
            return ValidationReport(
                False, f"expected {k} entries, got {len(row)}", f"{where}.delta[{q}]"
            )
        for x, target in enumerate(row):
            if not 0 <= target < n:
                return ValidationReport(
                    False, f"state index {target} out of range 0..{n - 1}", f"{where}.delta[{q}][{x}]"
                )
    for q, label in enumerate(table.rho):
        if label.size != k:
            return ValidationReport(
                False, f"expected {k} entries, got {label.size}", f"{where}.rho[{q}]"
            )
        for x, image in enumerate(label.images):
            if not 0 <= image < k:
                return ValidationReport(
                    False, f"letter {image} out of range 0..{k - 1}", f"{where}.rho[{q}][{x}]"
                )
        if not label.is_bijection:
            return ValidationReport(
                False, f"labeling {list(label.images)} is not a bijection", f"{where}.rho[{q}]"
            )
    return None


def validate(aut: Automaton) -> ValidationReport:
    """
    Check every well-formedness invariant of an automaton.

    Returns:
        Report naming the first violated invariant and where it occurs
    """
    if aut.alphabet.size < 2:
        return ValidationReport(False, "alphabet size must be >= 2", "alphabet")
    if not aut.states:
        return ValidationReport(False, "at least one state is required", "states")
    if len(set(aut.states)) != len(aut.states):
        return ValidationReport(False, "state names must be distinct", "states")
    if not aut.schedule.cycle:
        return ValidationReport(False, "cycle must be nonempty", "cycle")

    for part, tables in (("prefix", aut.schedule.prefix), ("cycle", aut.schedule.cycle)):
        for index, table in enumerate(tables):
            problem = _check_table(table, aut.n, aut.k, f"{part}[{index}]")
            if problem is not None:
                return problem
    return ValidationReport(True)


def is_invertible(aut: Automaton) -> bool:
    """True iff every labeling of every step table is a bijection."""
    return all(label.is_bijection for table in aut.schedule.tables for label in table.rho)


def is_mealy(aut: Automaton) -> bool:
    return aut.is_mealy


def trivial_states(aut: Automaton) -> frozenset[tuple[int, int]]:
    """(state, effective phase) pairs whose transformation is the identity."""
    return aut.trivial_states


def step_table(aut: Automaton, i: int) -> StepTable:
    """Step table phi_i, psi_i for the 1-based step index i."""
    return aut.step_table(i)


def _check_word(aut: Automaton, word: Iterable[int]) -> Word:
    letters = tuple(word)
    for position, letter in enumerate(letters):
        if not 0 <= letter < aut.k:
            raise LetterOutOfRangeError(
                f"letter {letter} at position {position} is outside 0..{aut.k - 1}"
            )
    return letters


def _check_state(aut: Automaton, state: int) -> None:
    if not 0 <= state < aut.n:
        raise StateNotFoundError(f"state index {state} out of range 0..{aut.n - 1}")


def trace(aut: Automaton, state: int, i: int, word: Iterable[int]) -> list[TraceStep]:
    """Follow the diagram path labeled by `word` from vertex (state, i)."""
    _check_state(aut, state)
    letters = _check_word(aut, word)
    path: list[TraceStep] = []
    q = state
    for offset, letter in enumerate(letters):
        table = aut.step_table(i + offset)
        label = table.rho[q]
        path.append(TraceStep(state=q, step=i + offset, label=label, letter=letter, output=label(letter)))
        q = table.delta[q][letter]
    return path


def apply(aut: Automaton, state: int, i: int, word: Iterable[int]) -> Word:
    """Image q_i(w) of a word under the automaton transformation of `state` at step i."""
    _check_state(aut, state)
    letters = _check_word(aut, word)
    compiled = aut.compiled
    phase = aut.effective_phase(i)
    q = state
    output = []
    for letter in letters:
        output.append(compiled.images[phase - 1][q][letter])
        q = compiled.delta[phase - 1][q][letter]
        phase = compiled.next_phase[phase - 1]
    return tuple(output)


def apply_inverse(aut: Automaton, state: int, i: int, word: Iterable[int]) -> Word:
    """Preimage q_i^-1(w); requires an invertible automaton."""
    _check_state(aut, state)
    letters = _check_word(aut, word)
    compiled = aut.compiled
    if compiled.inverse_images is None:
        raise AutomatonError("automaton is not invertible")
    phase = aut.effective_phase(i)
    q = state
    output = []
    for letter in letters:
        source = compiled.inverse_images[phase - 1][q][letter]
        output.append(source)
        q = compiled.delta[phase - 1][q][source]
        phase = compiled.next_phase[phase - 1]
    return tuple(output)


def parse_word(text: str, alphabet: int = 2) -> Word:
    """Parse `0101` (or `0,10,3` for alphabets above ten letters) into a word."""
    text = text.strip()
    if not text:
        return ()
    try:
        if "," in text:
            letters = tuple(int(part) for part in text.split(","))
        else:
            letters = tuple(int(char) for char in text)
    except ValueError:
        raise LetterOutOfRangeError(f"cannot parse word {text!r}") from None
    for letter in letters:
        if not 0 <= letter < alphabet:
            raise LetterOutOfRangeError(f"letter {letter} is outside 0..{alphabet - 1}")
    return letters


def format_word(word: Sequence[int], alphabet: int = 2) -> str:
    if alphabet > 10:
        return ",".join(str(letter) for letter in word)
    return "".join(str(letter) for letter in word)


def _table_from_file(table: StepTableFile) -> StepTable:
    return StepTable.build(table.delta, table.rho)


def _table_to_file(table: StepTable) -> StepTableFile:
    return StepTableFile(
        delta=[list(row) for row in table.delta],
        rho=[list(label.images) for label in table.rho],
    )


def automaton_from_file(document: AutomatonFile) -> Automaton:
    """Build and validate an automaton from its file model."""
    aut = Automaton(
        alphabet=Alphabet(document.alphabet),
        states=tuple(document.states),
        schedule=Schedule(
            prefix=tuple(_table_from_file(table) for table in document.prefix),
            cycle=tuple(_table_from_file(table) for table in document.cycle),
        ),
    )
    validate(aut).raise_for_error()
    return aut


def automaton_to_file(aut: Automaton) -> AutomatonFile:
    return AutomatonFile(
        alphabet=aut.k,
        states=list(aut.states),
        prefix=[_table_to_file(table) for table in aut.schedule.prefix],
        cycle=[_table_to_file(table) for table in aut.schedule.cycle],
    )


def automaton_from_dict(data: object) -> Automaton:
    try:
        document = AutomatonFile.model_validate(data)
    except ValidationError as exc:
        raise _validation_error(exc) from None
    return automaton_from_file(document)


def automaton_to_dict(aut: Automaton) -> dict[str, object]:
    return automaton_to_file(aut).model_dump(mode="json")


def load_automaton(path: str | Path) -> Automaton:
    """
    Read and validate an automaton JSON file.

    Raises:
        AutomatonError: If the file cannot be read or is not a valid automaton
    """
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise AutomatonError(f"cannot read {file_path}: {exc.strerror or exc}") from None

    try:
        document = AutomatonFile.model_validate_json(text)
    except ValidationError as exc:
        raise _validation_error(exc) from None

    aut = automaton_from_file(document)
    logger.debug(
        "Automaton loaded",
        extra={"path": str(file_path), "states": aut.n, "phases": aut.schedule.phase_count},
    )
    return aut


def dump_automaton(aut: Automaton, path: str | Path) -> None:
    """Write an automaton as a JSON file."""
    file_path = Path(path)
    file_path.write_text(automaton_to_file(aut).model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug("Automaton written", extra={"path": str(file_path), "states": aut.n})


def _validation_error(exc: ValidationError) -> AutomatonValidationError:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or None
    return AutomatonValidationError(first.get("msg", "invalid automaton file"), location)
