"""Element grammar: `a1^2 * a2^-1`, tokens separated by whitespace or `*`."""

import re

from tvgroups.services.automaton import Automaton
from tvgroups.services.group_engine import Element, Factor, GroupEngineError, element

_TOKEN = re.compile(r"^(?P<name>[^\s*^]+)(?:\^(?P<exponent>-?\d+))?$")
_IDENTITY_TOKENS = frozenset({"id", "1", "e"})
MAX_FACTORS = 100_000


class ElementParseError(GroupEngineError):
    """Raised when an element expression cannot be parsed."""


def parse_element(
    aut: Automaton, text: str, phase: int = 1, *, max_factors: int = MAX_FACTORS
) -> Element:
    """
    Parse an element expression over the automaton's state names.

    Examples: `a2`, `a1^2 * a2^-1`, `a1 a2 a1^-1`, `id`. Exponents are expanded
    into factors, at most `max_factors` of them in total.

    Raises:
        ElementParseError: On unknown states, zero exponents, malformed tokens
            or expressions longer than `max_factors`
    """
    tokens = [token for token in re.split(r"[\s*]+", text.strip()) if token]
    factors: list[Factor] = []
    for token in tokens:
        match = _TOKEN.match(token)
        if match is None:
            raise ElementParseError(f"malformed token {token!r} in element {text!r}")

        name = match.group("name")
        raw_exponent = match.group("exponent")
        if name not in aut.states and name in _IDENTITY_TOKENS and raw_exponent is None:
            continue
        if name not in aut.states:
            raise ElementParseError(
                f"unknown state {name!r} in element {text!r}; states are {', '.join(aut.states)}"
            )

        try:
            exponent = 1 if raw_exponent is None else int(raw_exponent)
        except ValueError as exc:
            raise ElementParseError(f"exponent too large in token {token!r}") from exc
        if exponent == 0:
            raise ElementParseError(f"exponent must be nonzero in token {token!r}")

        if len(factors) + abs(exponent) > max_factors:
            raise ElementParseError(
                f"element {text!r} expands to more than {max_factors} factors"
            )

        state = aut.states.index(name)
        sign = 1 if exponent > 0 else -1
        factors.extend(Factor(state, sign) for _ in range(abs(exponent)))

    return element(aut, factors, phase)
