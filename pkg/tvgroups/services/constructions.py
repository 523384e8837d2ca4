"""Factories for the explicit automaton constructions over the binary alphabet."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from math import lcm

from tvgroups.core.logging import get_logger
from tvgroups.services.automaton import (
    Alphabet,
    Automaton,
    Permutation,
    Schedule,
    StepTable,
    validate,
)
from tvgroups.services.errors import InputError
from tvgroups.services.group_engine import Element, Factor, element

logger = get_logger(__name__)

BINARY = 2
IDENTITY = Permutation.identity(BINARY)
FLIP = Permutation.flip()


class ConstructionError(InputError):
    """Raised when a construction's precondition is violated."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


class BuildKind(StrEnum):
    """Constructions exposed through `build_named`."""

    CYCLIC = "cyclic"
    MIXED = "mixed"
    FREE_ABELIAN = "free-abelian"
    SAUSAGE = "sausage"
    SHIFT = "shift"
    SINGLE = "single"
    LAMPLIGHTER = "lamplighter"
    DIHEDRAL = "dihedral"


@dataclass(frozen=True)
class ResidueBlock:
    """Steps i > offset with i = residue (mod modulus), assigned to generator a_j."""

    generator: int
    residue: int
    modulus: int
    offset: int

    def contains(self, step: int) -> bool:
        return step > self.offset and (step - self.residue) % self.modulus == 0

    def count_between(self, first: int, last: int) -> int:
        """Number of member steps in first..last (inclusive)."""
        first = max(first, self.offset + 1)
        if last < first:
            return 0
        below_last = (last - self.residue) // self.modulus
        below_first = (first - 1 - self.residue) // self.modulus
        return below_last - below_first


@dataclass(frozen=True)
class StepPartition:
    """
    Assignment of steps to generators: N_j is the set of steps at which a_j flips.

    Generators are numbered from 1 as a_1..a_n. Finite blocks are explicit step
    sets; infinite blocks are residue classes beyond an offset.
    """

    finite_blocks: tuple[tuple[int, frozenset[int]], ...] = ()
    infinite_blocks: tuple[ResidueBlock, ...] = ()

    @property
    def horizon(self) -> int:
        """Steps after the horizon repeat with period `period`."""
        finite_max = max((max(steps) for _, steps in self.finite_blocks if steps), default=0)
        offset_max = max((block.offset for block in self.infinite_blocks), default=0)
        return max(finite_max, offset_max)

    @property
    def period(self) -> int:
        return lcm(*(block.modulus for block in self.infinite_blocks)) if self.infinite_blocks else 1

    def block_of(self, step: int) -> int | None:
        """Generator index j with step in N_j, or None when the step is in no block."""
        for generator, steps in self.finite_blocks:
            if step in steps:
                return generator
        for block in self.infinite_blocks:
            if block.contains(step):
                return block.generator
        return None

    def count_in_window(self, generator: int, start: int, length: int) -> int:
        """|N_j ∩ {start, ..., start + length - 1}|."""
        last = start + length - 1
        total = 0
        for owner, steps in self.finite_blocks:
            if owner == generator:
                total += sum(1 for step in steps if start <= step <= last)
        for block in self.infinite_blocks:
            if block.generator == generator:
                total += block.count_between(start, last)
        return total

    def check(self, first: int, last: int | None) -> None:
        """
        Verify the blocks are disjoint and cover exactly first..last (last=None: all steps >= first).

        Raises:
            ConstructionError: If two blocks overlap or a required step is uncovered
        """
        horizon = self.horizon + self.period
        end = horizon if last is None else max(last, horizon)
        for step in range(1, end + 1):
            owners = [generator for generator, steps in self.finite_blocks if step in steps]
            owners += [block.generator for block in self.infinite_blocks if block.contains(step)]
            if len(owners) > 1:
                raise ConstructionError("partition", f"step {step} lies in blocks {owners}")
            required = step >= first and (last is None or step <= last)
            if required and not owners:
                raise ConstructionError("partition", f"step {step} is not covered")
            if not required and owners:
                raise ConstructionError("partition", f"step {step} must not be covered")


def _names(n: int) -> tuple[str, ...]:
    return tuple(f"a{j}" for j in range(1, n + 1))


def _table(rows: Sequence[tuple[tuple[int, int], Permutation]]) -> StepTable:
    """Build a binary step table from (delta row, labeling) pairs, states 0-based."""
    return StepTable(delta=tuple(row for row, _ in rows), rho=tuple(label for _, label in rows))


def _stay(q: int) -> tuple[tuple[int, int], Permutation]:
    return (q, q), IDENTITY


def _assemble(
    n: int, partition: StepPartition, table_at: Callable[[int], StepTable]
) -> Automaton:
    """Realize a step-indexed table rule as prefix (up to the horizon) plus one period."""
    horizon = partition.horizon
    period = partition.period
    aut = Automaton(
        alphabet=Alphabet(BINARY),
        states=_names(n),
        schedule=Schedule(
            prefix=tuple(table_at(step) for step in range(1, horizon + 1)),
            cycle=tuple(table_at(step) for step in range(horizon + 1, horizon + period + 1)),
        ),
    )
    validate(aut).raise_for_error()
    return aut


def _mealy(rows: Sequence[tuple[tuple[int, int], Permutation]]) -> Automaton:
    aut = Automaton(
        alphabet=Alphabet(BINARY),
        states=_names(len(rows)),
        schedule=Schedule(prefix=(), cycle=(_table(rows),)),
    )
    validate(aut).raise_for_error()
    return aut


def cyclic_tva(exponent: int | None) -> Automaton:
    """
    Two-state automaton generating C_{2^r} (exponent=r) or C_inf (exponent=None).

    a_2 flips at the steps of N_2 ({1..r} or all steps) with a_{2,i} = (a_{2,i+1}, a_{1,i+1})tau
    in letter order; a_1 is inert.
    """
    if exponent is not None and exponent < 1:
        raise ConstructionError("order", f"exponent r must be >= 1, got {exponent}")

    if exponent is None:
        partition = StepPartition(infinite_blocks=(ResidueBlock(2, 0, 1, 0),))
    else:
        partition = StepPartition(finite_blocks=((2, frozenset(range(1, exponent + 1))),))

    def table_at(step: int) -> StepTable:
        if partition.block_of(step) == 2:
            return _table([_stay(0), ((1, 0), FLIP)])
        return _table([_stay(0), _stay(1)])

    aut = _assemble(2, partition, table_at)
    logger.debug("Built cyclic automaton", extra={"exponent": exponent})
    return aut


def mixed_partition(r_list: Sequence[int], free_rank: int) -> StepPartition:
    """N_1 = {1..r_1}, then consecutive blocks of sizes r_2..r_d, then residues mod d'."""
    finite: list[tuple[int, frozenset[int]]] = []
    start = 1
    for j, size in enumerate(r_list, start=1):
        finite.append((j, frozenset(range(start, start + size))))
        start += size
    total = start - 1
    d = len(r_list)
    infinite = tuple(
        ResidueBlock(generator=j, residue=(total + j - d) % free_rank, modulus=free_rank, offset=total)
        for j in range(d + 1, d + free_rank + 1)
    )
    return StepPartition(finite_blocks=tuple(finite), infinite_blocks=infinite)


def mixed_abelian_tva(r_list: Sequence[int], free_rank: int) -> Automaton:
    """
    n-state automaton (n = d + d') generating C_{2^r_1} + ... + C_{2^r_d} + Z^d'.

    Raises:
        ConstructionError: On an empty torsion list, r_j < 1, d' < 0 or n < 2
    """
    if not r_list:
        raise ConstructionError("torsion", "at least one torsion exponent is required")
    if any(r < 1 for r in r_list):
        raise ConstructionError("torsion", f"every exponent must be >= 1, got {list(r_list)}")
    if free_rank < 0:
        raise ConstructionError("free", f"free rank must be >= 0, got {free_rank}")
    n = len(r_list) + free_rank
    if n < 2:
        raise ConstructionError("torsion", f"needs n = d + d' >= 2 states, got {n}")

    r1 = r_list[0]
    partition = mixed_partition(r_list, free_rank)
    partition.check(1, None if free_rank > 0 else sum(r_list))

    def table_at(step: int) -> StepTable:
        owner = partition.block_of(step)
        rows: list[tuple[tuple[int, int], Permutation]] = []
        # a_1
        if step == r1:
            rows.append(((1, 1), FLIP))
        elif owner == 1:
            rows.append(((0, 1), FLIP))
        else:
            rows.append(_stay(0))
        # a_2..a_n
        for j in range(2, n + 1):
            q = j - 1
            rows.append(((q, 0), FLIP) if owner == j else _stay(q))
        return _table(rows)

    aut = _assemble(n, partition, table_at)
    logger.debug(
        "Built mixed abelian automaton",
        extra={"torsion": list(r_list), "free_rank": free_rank, "phases": aut.schedule.phase_count},
    )
    return aut


def mixed_torsion_generator(aut: Automaton, phase: int = 1) -> Element:
    """b_1 = a_1 * a_2^-1, whose order is 2^r_1 in `mixed_abelian_tva`."""
    return element(aut, (Factor(0, 1), Factor(1, -1)), phase)


def free_partition(n: int) -> StepPartition:
    """N_j = {i >= 2 : i = j (mod n - 1)} for j = 2..n."""
    modulus = n - 1
    return StepPartition(
        infinite_blocks=tuple(
            ResidueBlock(generator=j, residue=j % modulus, modulus=modulus, offset=1)
            for j in range(2, n + 1)
        )
    )


def free_abelian_tva(n: int) -> Automaton:
    """n-state automaton generating the free abelian group of rank n."""
    if n < 2:
        raise ConstructionError("rank", f"rank must be >= 2, got {n}")

    partition = free_partition(n)
    partition.check(2, None)

    def table_at(step: int) -> StepTable:
        owner = partition.block_of(step)
        rows: list[tuple[tuple[int, int], Permutation]] = [
            ((0, 1), IDENTITY) if step == 1 else _stay(0)
        ]
        for j in range(2, n + 1):
            q = j - 1
            rows.append(((q, 0), FLIP) if owner == j else _stay(q))
        return _table(rows)

    return _assemble(n, partition, table_at)


def sausage_mealy(n: int) -> Automaton:
    """n-state Mealy automaton generating the free abelian group of rank n - 1."""
    if n < 2:
        raise ConstructionError("states", f"needs at least 2 states, got {n}")
    rows: list[tuple[tuple[int, int], Permutation]] = [_stay(0), ((n - 1, 0), FLIP)]
    rows += [((j - 2, j - 2), IDENTITY) for j in range(3, n + 1)]
    return _mealy(rows)


def cyclic_shift_mealy(n: int) -> Automaton:
    """n-state Mealy automaton a_j -> a_{j-1} (a_1 -> a_n), only a_1 labeled by the flip."""
    if n < 1:
        raise ConstructionError("states", f"needs at least 1 state, got {n}")
    rows: list[tuple[tuple[int, int], Permutation]] = [((n - 1, n - 1), FLIP)]
    rows += [((j - 2, j - 2), IDENTITY) for j in range(2, n + 1)]
    return _mealy(rows)


def single_state_tva(prefix_flips: Sequence[bool], cycle_flips: Sequence[bool]) -> Automaton:
    """One-state automaton a_i = (a_{i+1}, a_{i+1}) pi_i with pi_i the flip where marked."""
    if not cycle_flips:
        raise ConstructionError("cycle", "the cycle needs at least one step")

    def table(flip: bool) -> StepTable:
        return _table([((0, 0), FLIP if flip else IDENTITY)])

    aut = Automaton(
        alphabet=Alphabet(BINARY),
        states=_names(1),
        schedule=Schedule(
            prefix=tuple(table(flip) for flip in prefix_flips),
            cycle=tuple(table(flip) for flip in cycle_flips),
        ),
    )
    validate(aut).raise_for_error()
    return aut


def lamplighter_mealy() -> Automaton:
    """a = (a, b), b = (b, a) tau."""
    aut = _mealy([((0, 1), IDENTITY), ((1, 0), FLIP)])
    return Automaton(alphabet=aut.alphabet, states=("a", "b"), schedule=aut.schedule)


def dihedral_mealy() -> Automaton:
    """a = (b, b) tau, b = (a, b): two involutions with an element of infinite order as product."""
    aut = _mealy([((1, 1), FLIP), ((0, 1), IDENTITY)])
    return Automaton(alphabet=aut.alphabet, states=("a", "b"), schedule=aut.schedule)


def _fresh_names(existing: Sequence[str], count: int) -> list[str]:
    names: list[str] = []
    candidate = 1
    while len(names) < count:
        name = f"q{candidate}"
        if name not in existing:
            names.append(name)
        candidate += 1
    return names


def pad_states(aut: Automaton, total: int) -> Automaton:
    """
    Add inert states (self-loops, identity labels at every step) up to `total` states.

    The transformations of the original states are unchanged, so the generated group is too.
    """
    if total < aut.n:
        raise ConstructionError("states", f"cannot pad {aut.n} states down to {total}")
    extra = total - aut.n
    if extra == 0:
        return aut
    return Automaton(
        alphabet=aut.alphabet,
        states=aut.states + tuple(_fresh_names(aut.states, extra)),
        schedule=Schedule(
            prefix=tuple(table.padded(extra) for table in aut.schedule.prefix),
            cycle=tuple(table.padded(extra) for table in aut.schedule.cycle),
        ),
    )


@dataclass(frozen=True)
class BuildRequest:
    """Parameters accepted by `build_named`; unused fields are ignored."""

    kind: BuildKind
    exponent: int | None = None
    torsion: tuple[int, ...] = ()
    free_rank: int = 0
    rank: int = 2
    states: int = 2
    prefix_flips: tuple[bool, ...] = ()
    cycle_flips: tuple[bool, ...] = (True,)


def build_named(request: BuildRequest) -> Automaton:
    """Dispatch a build request to its construction."""
    match request.kind:
        case BuildKind.CYCLIC:
            return cyclic_tva(request.exponent)
        case BuildKind.MIXED:
            return mixed_abelian_tva(request.torsion, request.free_rank)
        case BuildKind.FREE_ABELIAN:
            return free_abelian_tva(request.rank)
        case BuildKind.SAUSAGE:
            return sausage_mealy(request.states)
        case BuildKind.SHIFT:
            return cyclic_shift_mealy(request.states)
        case BuildKind.SINGLE:
            return single_state_tva(request.prefix_flips, request.cycle_flips)
        case BuildKind.LAMPLIGHTER:
            return lamplighter_mealy()
        case BuildKind.DIHEDRAL:
            return dihedral_mealy()
    raise ConstructionError("kind", f"unknown construction {request.kind!r}")
