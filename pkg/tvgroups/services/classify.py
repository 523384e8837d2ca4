"""
Enumeration and classification of groups generated by invertible Mealy automata.

Abelian groups generated by a binary Mealy automaton are either torsion free or
elementary abelian 2-groups. The classifier decides abelianness exactly, then
takes the branch the generator orders point to: exact subset-product counting
for the elementary abelian case, a bounded integer relation search for the
free abelian case.
"""

from __future__ import annotations

import csv
import math
import random
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from pathlib import Path

from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from tvgroups.core.logging import get_logger
from tvgroups.models.classification import (
    REPORT_COLUMNS,
    ClassificationRow,
    GroupKind,
    GroupType,
    VerdictSummary,
)
from tvgroups.services.automaton import (
    Alphabet,
    Automaton,
    Permutation,
    Schedule,
    StepTable,
    is_invertible,
)
from tvgroups.services.errors import InputError, LimitExceededError
from tvgroups.services.group_engine import (
    DEFAULT_MAX_CLOSURE,
    Element,
    ExceedsBound,
    Factor,
    Finite,
    OrderResult,
    commute,
    element,
    equal,
    from_exponents,
    generators,
    in_first_level_stabilizer,
    is_identity,
    is_involution,
    order_pow2,
)

logger = get_logger(__name__)

DEFAULT_ENUMERATION_LIMIT = 100_000

Vector = tuple[int, ...]


class ClassificationError(InputError):
    """Base exception for enumeration and classification."""


class NonAbelianInputError(ClassificationError):
    """Raised when the abelian classifier is given a non-abelian automaton group."""


class EnumerationCapError(ClassificationError, LimitExceededError):
    """Raised when an enumeration would exceed the configured number of automata."""


def _hnf_columns(vectors: Sequence[Vector], dimension: int) -> tuple[Vector, ...]:
    """Hermite normal form basis of the lattice spanned by `vectors`, one tuple per basis vector."""
    nonzero = [vector for vector in vectors if any(vector)]
    if not nonzero or dimension == 0:
        return ()
    columns = Matrix([list(vector) for vector in nonzero]).T
    reduced = hermite_normal_form(columns)
    return tuple(
        tuple(int(entry) for entry in reduced.col(index)) for index in range(reduced.cols)
    )


@dataclass(frozen=True)
class RelationLattice:
    """
    Integer relations v with prod g_j^v_j = id found within max-norm `bound`.

    Only one of v and -v is listed, since the generators commute. `basis` is the
    Hermite normal form of the lattice the relations span.
    """

    generators: tuple[Element, ...]
    bound: int
    relations: tuple[Vector, ...]
    basis: tuple[Vector, ...] = field(default=())

    @property
    def dimension(self) -> int:
        return len(self.generators)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def free_rank(self) -> int:
        """Rank of Z^n modulo the lattice, i.e. the free rank of the group seen so far."""
        return self.dimension - self.rank

    def contains(self, vector: Sequence[int]) -> bool:
        """Lattice membership: adding the vector leaves the Hermite normal form unchanged."""
        candidate = tuple(vector)
        if len(candidate) != self.dimension:
            raise ClassificationError(
                f"vector has {len(candidate)} entries, lattice dimension is {self.dimension}"
            )
        if not any(candidate):
            return True
        return _hnf_columns((*self.basis, candidate), self.dimension) == self.basis

    def verify(self, *, max_closure: int = DEFAULT_MAX_CLOSURE) -> bool:
        """Re-check every relation with the identity decision and the basis by mutual membership."""
        gens = list(self.generators)
        for relation in self.relations:
            if not is_identity(from_exponents(gens, relation), max_closure=max_closure).is_identity:
                return False
        if not all(self.contains(relation) for relation in self.relations):
            return False
        spanned = _hnf_columns(self.relations, self.dimension)
        return spanned == self.basis


def _canonical_sign(vector: Vector) -> bool:
    """True when the first nonzero entry is positive."""
    for entry in vector:
        if entry:
            return entry > 0
    return False


def relation_lattice(
    gens: Sequence[Element],
    bound: int,
    *,
    max_closure: int = DEFAULT_MAX_CLOSURE,
    commutative: bool = False,
) -> RelationLattice:
    """
    Search all exponent vectors with max-norm at most `bound` for relations.

    The generators must pairwise commute; identity is decided exactly for each
    candidate. Vectors whose first nonzero entry is negative are skipped because
    they give the inverse of an already tested element. `commutative` is
    passed on to `is_identity` and needs a Mealy automaton.
    """
    if bound < 0:
        raise ClassificationError(f"rel_bound must be >= 0, got {bound}")
    gens = tuple(gens)
    if not gens:
        return RelationLattice(generators=(), bound=bound, relations=(), basis=())

    relations: list[Vector] = []
    tested = 0
    for vector in product(range(-bound, bound + 1), repeat=len(gens)):
        if not _canonical_sign(vector):
            continue
        tested += 1
        candidate = from_exponents(gens, vector)
        if is_identity(candidate, max_closure=max_closure, commutative=commutative).is_identity:
            relations.append(vector)

    basis = _hnf_columns(relations, len(gens))
    logger.info(
        "Relation search completed",
        extra={
            "generators": len(gens),
            "bound": bound,
            "vectors_tested": tested,
            "relations": len(relations),
            "lattice_rank": len(basis),
        },
    )
    return RelationLattice(
        generators=gens, bound=bound, relations=tuple(relations), basis=basis
    )


def count_invertible_mealy(n: int, k: int = 2) -> int:
    """Number of invertible Mealy automata with n labeled states over k letters: (n^k * k!)^n."""
    return (n**k * math.factorial(k)) ** n


def _mealy_from_tables(
    n: int, k: int, delta: Sequence[int], labels: Sequence[tuple[int, ...]]
) -> Automaton:
    table = StepTable(
        delta=tuple(tuple(delta[q * k : (q + 1) * k]) for q in range(n)),
        rho=tuple(Permutation(label) for label in labels),
    )
    return Automaton(
        alphabet=Alphabet(k),
        states=tuple(f"a{q + 1}" for q in range(n)),
        schedule=Schedule(prefix=(), cycle=(table,)),
    )


def enumerate_invertible_mealy(
    n: int, k: int = 2, *, limit: int | None = DEFAULT_ENUMERATION_LIMIT
) -> Iterator[Automaton]:
    """
    Yield every invertible Mealy automaton with states a1..an exactly once.

    Order: transition tables (row-major, lexicographic) in the outer loop,
    tuples of per-state permutations in the inner loop.

    Raises:
        ClassificationError: If n < 1 or k < 2
        EnumerationCapError: If the count exceeds `limit`
    """
    if n < 1:
        raise ClassificationError(f"states must be >= 1, got {n}")
    if k < 2:
        raise ClassificationError(f"alphabet must be >= 2, got {k}")
    total = count_invertible_mealy(n, k)
    if limit is not None and total > limit:
        raise EnumerationCapError(
            f"enumerating n={n}, k={k} yields {total} automata, above the cap of {limit}"
        )

    logger.info("Enumeration started", extra={"states": n, "alphabet": k, "automata": total})
    return _iterate_mealy(n, k)


def _iterate_mealy(n: int, k: int) -> Iterator[Automaton]:
    labelings = list(permutations(range(k)))
    for delta in product(range(n), repeat=n * k):
        for labels in product(labelings, repeat=n):
            yield _mealy_from_tables(n, k, delta, labels)


def is_abelian(aut: Automaton, *, max_closure: int = DEFAULT_MAX_CLOSURE) -> bool:
    """True iff the generators at phase 1 pairwise commute."""
    gens = generators(aut)
    return all(
        commute(a, b, max_closure=max_closure) for a, b in combinations(gens, 2)
    )


def elementary_abelian_rank(
    gens: Sequence[Element], *, max_closure: int = DEFAULT_MAX_CLOSURE, commutative: bool = False
) -> int | None:
    """
    log2 of the number of distinct subset products, or None if that count is not a power of two.

    Exact for commuting involutions: the group is then the set of subset products.
    """
    gens = list(gens)
    if not gens:
        return 0
    distinct: list[Element] = []
    for mask in product((0, 1), repeat=len(gens)):
        candidate = from_exponents(gens, mask)
        if not any(
            equal(candidate, seen, max_closure=max_closure, commutative=commutative)
            for seen in distinct
        ):
            distinct.append(candidate)
    count = len(distinct)
    if count & (count - 1):
        return None
    return count.bit_length() - 1


def classify_abelian_mealy(
    aut: Automaton,
    max_exp: int,
    bound: int,
    *,
    assume_abelian: bool = False,
    max_closure: int = DEFAULT_MAX_CLOSURE,
) -> GroupType:
    """
    Identify the isomorphism type of an abelian group generated by a binary Mealy automaton.

    Args:
        aut: Invertible binary Mealy automaton with an abelian group
        max_exp: Generator orders are searched up to 2^max_exp
        bound: Relation search bound K for the torsion-free branch
        assume_abelian: Skip the commutation check when the caller has done it

    Returns:
        Trivial, ElementaryAbelian(rank), FreeAbelian(rank, K), or Unknown with diagnostics

    Raises:
        NonAbelianInputError: If some pair of generators does not commute
    """
    if not assume_abelian and not is_abelian(aut, max_closure=max_closure):
        raise NonAbelianInputError("classify_abelian_mealy needs pairwise commuting generators")

    # sections of a Mealy automaton stay in its group, which is abelian from here on
    commutative = aut.is_mealy
    gens = generators(aut)
    orders: list[OrderResult] = [
        order_pow2(g, max_exp, max_closure=max_closure, commutative=commutative) for g in gens
    ]
    described = ", ".join(str(order) for order in orders)

    if all(isinstance(order, Finite) and order.order == 1 for order in orders):
        return GroupType(kind=GroupKind.TRIVIAL)

    torsion = [order for order in orders if isinstance(order, Finite) and order.order > 1]
    if torsion:
        if any(isinstance(order, ExceedsBound) or order.order > 2 for order in orders):
            return GroupType(
                kind=GroupKind.UNKNOWN,
                max_exp=max_exp,
                bound=bound,
                detail=f"torsion generator beside orders [{described}] is not elementary abelian",
            )
        rank = elementary_abelian_rank(gens, max_closure=max_closure, commutative=commutative)
        if rank is None:
            return GroupType(
                kind=GroupKind.UNKNOWN,
                max_exp=max_exp,
                bound=bound,
                detail="subset product count is not a power of two",
            )
        return GroupType(kind=GroupKind.ELEMENTARY_ABELIAN, rank=rank)

    lattice = relation_lattice(gens, bound, max_closure=max_closure, commutative=commutative)
    if lattice.free_rank == 0:
        return GroupType(
            kind=GroupKind.UNKNOWN,
            max_exp=max_exp,
            bound=bound,
            detail=f"generators of orders [{described}] satisfy a full-rank relation lattice",
        )
    return GroupType(
        kind=GroupKind.FREE_ABELIAN, rank=lattice.free_rank, bound=bound, max_exp=max_exp
    )


def classify_mealy(
    aut: Automaton, max_exp: int, bound: int, *, max_closure: int = DEFAULT_MAX_CLOSURE
) -> tuple[bool, GroupType]:
    """Returns (abelian, verdict); non-abelian groups are reported as NonAbelian."""
    if not is_abelian(aut, max_closure=max_closure):
        return False, GroupType(kind=GroupKind.NON_ABELIAN)
    verdict = classify_abelian_mealy(
        aut, max_exp, bound, assume_abelian=True, max_closure=max_closure
    )
    return True, verdict


def find_involutions(
    aut: Automaton, length: int, *, max_closure: int = DEFAULT_MAX_CLOSURE
) -> Iterator[Element]:
    """Involutions among freely reduced words of factor length 1..length at phase 1, shortest first."""
    letters = [Factor(q, sign) for q in range(aut.n) for sign in (1, -1)]
    for size in range(1, length + 1):
        for factors in product(letters, repeat=size):
            if any(
                left.state == right.state and left.sign == -right.sign
                for left, right in zip(factors, factors[1:], strict=False)
            ):
                continue
            candidate = element(aut, factors)
            if is_involution(candidate, max_closure=max_closure):
                yield candidate


def find_involution_outside_stabilizer(
    aut: Automaton, length: int, *, max_closure: int = DEFAULT_MAX_CLOSURE
) -> Element | None:
    """First involution of factor length <= `length` whose root permutation is nontrivial."""
    if not is_invertible(aut):
        raise ClassificationError("involution search needs an invertible automaton")
    for candidate in find_involutions(aut, length, max_closure=max_closure):
        if not in_first_level_stabilizer(candidate):
            return candidate
    return None


def table_digits(aut: Automaton) -> tuple[str, str]:
    """delta and rho of a Mealy automaton as digit strings, row-major by state then letter."""
    table = aut.schedule.cycle[0]
    delta = "".join(str(target) for row in table.delta for target in row)
    rho = "".join(str(image) for label in table.rho for image in label.images)
    return delta, rho


def classification_row(index: int, aut: Automaton, abelian: bool, verdict: GroupType) -> ClassificationRow:
    delta, rho = table_digits(aut)
    return ClassificationRow(
        index=index,
        delta=delta,
        rho=rho,
        abelian=abelian,
        verdict=verdict.kind,
        rank=verdict.rank,
        bound=verdict.bound if verdict.kind == GroupKind.FREE_ABELIAN else None,
        signature=verdict.signature,
    )


def classification_report(
    automata: Iterable[Automaton],
    max_exp: int,
    bound: int,
    *,
    max_closure: int = DEFAULT_MAX_CLOSURE,
) -> list[ClassificationRow]:
    """Classify each automaton in turn; rows come back sorted by index."""
    rows = []
    for index, aut in enumerate(automata):
        abelian, verdict = classify_mealy(aut, max_exp, bound, max_closure=max_closure)
        rows.append(classification_row(index, aut, abelian, verdict))
    return sorted(rows, key=lambda row: row.index)


def summarize_verdicts(rows: Iterable[ClassificationRow]) -> VerdictSummary:
    rows = list(rows)
    counts = Counter(row.signature for row in rows)
    return VerdictSummary(automata=len(rows), counts=dict(sorted(counts.items())))


def write_report_csv(rows: Iterable[ClassificationRow], path: str | Path) -> None:
    """Write the report with header `index,delta,rho,abelian,verdict,rank,bound`."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in sorted(rows, key=lambda item: item.index):
            writer.writerow(
                {
                    "index": row.index,
                    "delta": row.delta,
                    "rho": row.rho,
                    "abelian": "true" if row.abelian else "false",
                    "verdict": row.verdict.value,
                    "rank": "" if row.rank is None else row.rank,
                    "bound": "" if row.bound is None else row.bound,
                }
            )
    logger.info("Report written", extra={"path": str(target)})


def sample_invertible_mealy(n: int, k: int, count: int, seed: int) -> list[Automaton]:
    """`count` invertible Mealy automata drawn uniformly (with repetition) from a seeded generator."""
    if n < 1 or k < 2:
        raise ClassificationError(f"need states >= 1 and alphabet >= 2, got {n} and {k}")
    rng = random.Random(seed)
    sampled = []
    for _ in range(count):
        delta = [rng.randrange(n) for _ in range(n * k)]
        labels = []
        for _ in range(n):
            label = list(range(k))
            rng.shuffle(label)
            labels.append(tuple(label))
        sampled.append(_mealy_from_tables(n, k, delta, labels))
    return sampled
