"""
Elements of G(A_i) as signed factor words, their wreath recursions, and exact decisions.

An element at phase i is a word q1^e1 q2^e2 ... over the states, each factor taken
at its i-th transition. The leftmost factor acts first on words, which matches the
product rule (g g')|_x = g|_x g'|_{sigma_g(x)}.

Phases are stored as effective phases (see `Schedule.effective_phase`), so an
element at step i and one at step i + |cycle| (beyond the prefix) coincide.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import product
from random import Random
from typing import NamedTuple

from tvgroups.core.logging import get_logger
from tvgroups.services.automaton import (
    Automaton,
    LetterOutOfRangeError,
    Permutation,
    Word,
    is_invertible,
)
from tvgroups.services.errors import InputError, LimitExceededError

logger = get_logger(__name__)

DEFAULT_MAX_CLOSURE = 2_000_000


class GroupEngineError(InputError):
    """Base exception for group element operations."""


class NotInvertibleError(GroupEngineError):
    """Raised when group operations are requested on a non-invertible automaton."""


class PhaseMismatchError(GroupEngineError):
    """Raised when combining elements taken at different phases."""


class AutomatonMismatchError(GroupEngineError):
    """Raised when combining elements of different automata."""


class UnsupportedAlphabetError(GroupEngineError):
    """Raised when an operation is only justified for the binary alphabet."""


class ClosureLimitError(LimitExceededError):
    """Raised when a section closure grows beyond the configured cap."""


class Factor(NamedTuple):
    """A generator q_i (sign +1) or its inverse (sign -1)."""

    state: int
    sign: int


# Internal encoding: factor q^+1 -> q + 2, factor q^-1 -> -(q + 2).
# Codes are never 0 (run sentinel in format_element) or -1, which hashes like -2.
Codes = tuple[int, ...]

_CODE_OFFSET = 2


def _code(state: int, sign: int) -> int:
    return state + _CODE_OFFSET if sign > 0 else -(state + _CODE_OFFSET)


def _state_of(code: int) -> int:
    return abs(code) - _CODE_OFFSET


def _encode(factors: Iterable[Factor]) -> Codes:
    return tuple(_code(f.state, f.sign) for f in factors)


def _decode(codes: Iterable[int]) -> tuple[Factor, ...]:
    return tuple(Factor(_state_of(code), 1 if code > 0 else -1) for code in codes)


def _free_reduce(codes: Iterable[int]) -> Codes:
    stack: list[int] = []
    for code in codes:
        if stack and stack[-1] == -code:
            stack.pop()
        else:
            stack.append(code)
    return tuple(stack)


@dataclass(frozen=True)
class Element:
    """Product of factor transformations at an effective phase; empty factors = identity."""

    automaton: Automaton
    phase: int
    factors: tuple[Factor, ...]

    @property
    def codes(self) -> Codes:
        return _encode(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __str__(self) -> str:
        return format_element(self)


@dataclass(frozen=True)
class WreathRecursion:
    """g = (g|_0, ..., g|_{k-1}) sigma_g, sections listed in letter order."""

    root: Permutation
    sections: tuple[Element, ...]

    def __str__(self) -> str:
        inner = ", ".join(format_element(section) for section in self.sections)
        if self.root.is_identity:
            return f"({inner})"
        return f"({inner}){list(self.root.images)}"


@dataclass(frozen=True)
class IdentityVerdict:
    """Outcome of the identity decision; `witness` is a word moved by the element."""

    is_identity: bool
    witness: Word | None = None
    closure_size: int = 0


@dataclass(frozen=True)
class Finite:
    """Element of finite order."""

    order: int

    def __str__(self) -> str:
        return str(self.order)


@dataclass(frozen=True)
class ExceedsBound:
    """No power g^(2^e) with e <= max_exp is trivial."""

    max_exp: int

    def __str__(self) -> str:
        return f"exceeds 2^{self.max_exp}"


OrderResult = Finite | ExceedsBound


def _require_invertible(aut: Automaton) -> None:
    if not is_invertible(aut):
        raise NotInvertibleError("group operations need an invertible automaton")


def _require_compatible(a: Element, b: Element) -> None:
    if a.automaton is not b.automaton and a.automaton != b.automaton:
        raise AutomatonMismatchError("elements belong to different automata")
    if a.phase != b.phase:
        raise PhaseMismatchError(f"elements are at phases {a.phase} and {b.phase}")


def element(aut: Automaton, factors: Iterable[Factor], phase: int = 1) -> Element:
    """Element at step `phase` with the given factors, freely reduced."""
    _require_invertible(aut)
    factor_list = tuple(factors)
    for factor in factor_list:
        if not 0 <= factor.state < aut.n:
            raise GroupEngineError(f"state index {factor.state} out of range 0..{aut.n - 1}")
        if factor.sign not in (1, -1):
            raise GroupEngineError(f"factor sign must be +1 or -1, got {factor.sign}")
    return Element(
        automaton=aut,
        phase=aut.effective_phase(phase),
        factors=_decode(_free_reduce(_encode(factor_list))),
    )


def identity(aut: Automaton, phase: int = 1) -> Element:
    return element(aut, (), phase)


def generator(aut: Automaton, state: int | str, phase: int = 1) -> Element:
    """The automaton transformation q_i of one state."""
    index = aut.state_index(state) if isinstance(state, str) else state
    return element(aut, (Factor(index, 1),), phase)


def generators(aut: Automaton, phase: int = 1) -> list[Element]:
    return [generator(aut, q, phase) for q in range(aut.n)]


def _rebuild(template: Element, codes: Codes, phase: int | None = None) -> Element:
    return Element(
        automaton=template.automaton,
        phase=template.phase if phase is None else phase,
        factors=_decode(codes),
    )


def compose(a: Element, b: Element) -> Element:
    """Product a*b (a acts first), with free cancellation at the junction."""
    _require_compatible(a, b)
    return _rebuild(a, _free_reduce(a.codes + b.codes))


def invert(g: Element) -> Element:
    return _rebuild(g, tuple(-code for code in reversed(g.codes)))


def power(g: Element, exponent: int) -> Element:
    """g^s by repeated squaring; negative exponents go through the inverse."""
    if exponent < 0:
        g = invert(g)
        exponent = -exponent
    result = _rebuild(g, ())
    base = g
    while exponent:
        if exponent & 1:
            result = compose(result, base)
        exponent >>= 1
        if exponent:
            base = compose(base, base)
    return result


def commutator(a: Element, b: Element) -> Element:
    return compose(compose(a, b), compose(invert(a), invert(b)))


def from_exponents(gens: Sequence[Element], vector: Sequence[int]) -> Element:
    """Product g_1^v_1 * ... * g_n^v_n."""
    if len(gens) != len(vector):
        raise GroupEngineError(f"expected {len(gens)} exponents, got {len(vector)}")
    if not gens:
        raise GroupEngineError("at least one generator is required")
    result = _rebuild(gens[0], ())
    for gen, exponent in zip(gens, vector, strict=True):
        if exponent:
            result = compose(result, power(gen, exponent))
    return result


def _thread(aut: Automaton, codes: Codes, phase: int, letter: int) -> tuple[int, Codes]:
    """Push one letter through the factors; returns (output letter, raw section codes)."""
    compiled = aut.compiled
    delta = compiled.delta[phase - 1]
    images = compiled.images[phase - 1]
    inverse = compiled.inverse_images[phase - 1]  # type: ignore[index]
    current = letter
    section_codes: list[int] = []
    for code in codes:
        if code > 0:
            q = code - _CODE_OFFSET
            section_codes.append(delta[q][current] + _CODE_OFFSET)
            current = images[q][current]
        else:
            q = -code - _CODE_OFFSET
            source = inverse[q][current]
            section_codes.append(-(delta[q][source] + _CODE_OFFSET))
            current = source
    return current, tuple(section_codes)


def _canonical(aut: Automaton, codes: Codes, phase: int) -> Codes:
    """Drop factors acting trivially at this phase, then cancel adjacent inverse pairs."""
    trivial = aut.trivial_by_phase[phase - 1]
    if trivial:
        codes = tuple(code for code in codes if _state_of(code) not in trivial)
    return _free_reduce(codes)


def _commutative_canonical(aut: Automaton, codes: Codes, phase: int) -> Codes:
    """
    Collapse a word to q1^v1 q2^v2 ... by net exponent, dropping trivially acting states.

    Only sound when every section lies in one abelian group, i.e. for a Mealy
    automaton whose group is abelian.
    """
    trivial = aut.trivial_by_phase[phase - 1]
    exponents = [0] * aut.n
    for code in codes:
        exponents[_state_of(code)] += 1 if code > 0 else -1
    return tuple(
        _code(q, exponent)
        for q, exponent in enumerate(exponents)
        if q not in trivial
        for _ in range(abs(exponent))
    )


def root_permutation(g: Element) -> Permutation:
    """Product of the factor labelings (inverted for sign -1), in action order."""
    aut = g.automaton
    codes = g.codes
    return Permutation(tuple(_thread(aut, codes, g.phase, x)[0] for x in range(aut.k)))


def section(g: Element, letter: int, *, reduce: bool = True) -> Element:
    """
    Section g|_x at the next phase.

    With reduce=False the result has exactly one factor per factor of g.
    """
    aut = g.automaton
    if not 0 <= letter < aut.k:
        raise LetterOutOfRangeError(f"letter {letter} is outside 0..{aut.k - 1}")
    _, codes = _thread(aut, g.codes, g.phase, letter)
    if reduce:
        codes = _free_reduce(codes)
    return _rebuild(g, codes, aut.next_phase(g.phase))


def section_at(g: Element, word: Iterable[int]) -> Element:
    """Section g|_w along a word."""
    current = g
    for letter in word:
        current = section(current, letter)
    return current


def wreath(g: Element) -> WreathRecursion:
    return WreathRecursion(
        root=root_permutation(g),
        sections=tuple(section(g, x) for x in range(g.automaton.k)),
    )


def image(g: Element, word: Iterable[int]) -> Word:
    """g(w) computed letter by letter: output sigma_{g_j}(x_{j+1}), then g_{j+1} = g_j|_{x_{j+1}}."""
    aut = g.automaton
    codes = g.codes
    phase = g.phase
    output: list[int] = []
    for position, letter in enumerate(word):
        if not 0 <= letter < aut.k:
            raise LetterOutOfRangeError(
                f"letter {letter} at position {position} is outside 0..{aut.k - 1}"
            )
        moved, raw = _thread(aut, codes, phase, letter)
        output.append(moved)
        phase = aut.next_phase(phase)
        codes = _canonical(aut, raw, phase)
    return tuple(output)


def is_identity(
    g: Element, *, max_closure: int = DEFAULT_MAX_CLOSURE, commutative: bool = False
) -> IdentityVerdict:
    """
    Decide g = id by breadth-first search over the section closure of g.

    g is the identity iff every element of the closure has a trivial root
    permutation. The closure is finite because factor counts never grow and
    there are finitely many effective phases.

    With commutative=True closure words are keyed by their exponent vectors. The
    caller guarantees a Mealy automaton with an abelian group; long powers then
    have closures of a few nodes per level instead of one per distinct word.
    """
    aut = g.automaton
    if commutative and not aut.is_mealy:
        raise GroupEngineError("commutative closures need a Mealy automaton")
    canonical = _commutative_canonical if commutative else _canonical
    letters = range(aut.k)
    compiled = aut.compiled
    start = canonical(aut, g.codes, g.phase)
    if not start:
        return IdentityVerdict(is_identity=True, closure_size=0)

    seen: set[tuple[int, Codes]] = {(g.phase, start)}
    queue: deque[tuple[int, Codes, Word]] = deque([(g.phase, start, ())])
    while queue:
        phase, codes, path = queue.popleft()
        following = compiled.next_phase[phase - 1]
        children: list[Codes] = []
        for letter in letters:
            moved, raw = _thread(aut, codes, phase, letter)
            if moved != letter:
                witness = path + (letter,)
                logger.debug(
                    "Identity refuted",
                    extra={"closure_size": len(seen), "witness_length": len(witness)},
                )
                return IdentityVerdict(is_identity=False, witness=witness, closure_size=len(seen))
            children.append(raw)

        for letter, raw in enumerate(children):
            child = canonical(aut, raw, following)
            if not child:
                continue
            key = (following, child)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > max_closure:
                raise ClosureLimitError(
                    f"section closure exceeded {max_closure} elements for a word of length {len(start)}"
                )
            queue.append((following, child, path + (letter,)))

    logger.debug("Identity confirmed", extra={"closure_size": len(seen)})
    return IdentityVerdict(is_identity=True, closure_size=len(seen))


def equal(
    a: Element, b: Element, *, max_closure: int = DEFAULT_MAX_CLOSURE, commutative: bool = False
) -> bool:
    _require_compatible(a, b)
    verdict = is_identity(compose(a, invert(b)), max_closure=max_closure, commutative=commutative)
    return verdict.is_identity


def commute(a: Element, b: Element, *, max_closure: int = DEFAULT_MAX_CLOSURE) -> bool:
    _require_compatible(a, b)
    return is_identity(commutator(a, b), max_closure=max_closure).is_identity


def in_first_level_stabilizer(g: Element) -> bool:
    return root_permutation(g).is_identity


def is_involution(g: Element, *, max_closure: int = DEFAULT_MAX_CLOSURE) -> bool:
    """g != id and g^2 = id."""
    if is_identity(g, max_closure=max_closure).is_identity:
        return False
    return is_identity(compose(g, g), max_closure=max_closure).is_identity


def order_pow2(
    g: Element,
    max_exp: int,
    *,
    max_closure: int = DEFAULT_MAX_CLOSURE,
    commutative: bool = False,
) -> OrderResult:
    """
    Smallest 2^e (e <= max_exp) with g^(2^e) = id.

    Over the binary alphabet every element of finite order has order a power of
    two, so testing the powers 2^0, 2^1, ... is exhaustive up to the bound.
    `commutative` is passed on to `is_identity`.
    """
    if g.automaton.k != 2:
        raise UnsupportedAlphabetError("order_pow2 is only defined for the binary alphabet")
    if max_exp < 0:
        raise GroupEngineError(f"max_exp must be >= 0, got {max_exp}")

    current = g
    for exponent in range(max_exp + 1):
        verdict = is_identity(current, max_closure=max_closure, commutative=commutative)
        if verdict.is_identity:
            logger.debug("Order found", extra={"order": 2**exponent})
            return Finite(2**exponent)
        if exponent < max_exp:
            current = compose(current, current)
    return ExceedsBound(max_exp)


def all_words(alphabet: int, length: int) -> Iterable[Word]:
    return product(range(alphabet), repeat=length)


def acts_trivially_up_to(g: Element, depth: int) -> bool:
    """Brute-force check that g fixes every word of length `depth` (hence every shorter one)."""
    return all(image(g, word) == word for word in all_words(g.automaton.k, depth))


def brute_force_order(g: Element, max_power: int, depth: int) -> int | None:
    """
    Order of the action of g on words of length `depth`, if at most `max_power`.

    Computed from the induced permutation of {0..k-1}^depth, not from the
    identity decision, so it serves as an independent oracle.
    """
    words = list(all_words(g.automaton.k, depth))
    index = {word: position for position, word in enumerate(words)}
    mapping = [index[image(g, word)] for word in words]
    current = list(mapping)
    for exponent in range(1, max_power + 1):
        if all(target == position for position, target in enumerate(current)):
            return exponent
        current = [mapping[target] for target in current]
    return None


def format_element(g: Element) -> str:
    """Render as `a1^2 * a2^-1`; the empty word renders as `id`."""
    if not g.factors:
        return "id"
    names = g.automaton.states
    parts: list[str] = []
    run_code = 0
    run_length = 0
    for code in (*g.codes, 0):
        if code == run_code:
            run_length += 1
            continue
        if run_code:
            exponent = run_length if run_code > 0 else -run_length
            name = names[_state_of(run_code)]
            parts.append(name if exponent == 1 else f"{name}^{exponent}")
        run_code, run_length = code, 1
    return " * ".join(parts)


def random_element(aut: Automaton, length: int, rng: Random, phase: int = 1) -> Element:
    """Element built from `length` factors drawn uniformly from the generators and their inverses."""
    factors = [Factor(rng.randrange(aut.n), rng.choice((1, -1))) for _ in range(length)]
    return element(aut, factors, phase)
