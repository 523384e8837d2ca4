"""Command-line entry point: build, validate, query, classify and enumerate automata."""

import argparse
import json
import sys
from collections.abc import Callable, Sequence

from tvgroups.core.config import Settings, get_settings, load_settings
from tvgroups.core.context import start_run
from tvgroups.core.logging import get_logger, setup_logging
from tvgroups.services.automaton import (
    Automaton,
    automaton_to_dict,
    dump_automaton,
    format_word,
    load_automaton,
    parse_word,
    trace,
    validate,
)
from tvgroups.services.automaton import apply as apply_state
from tvgroups.services.batch import BatchClassifier
from tvgroups.services.classify import (
    EnumerationCapError,
    classify_mealy,
    enumerate_invertible_mealy,
    find_involution_outside_stabilizer,
    relation_lattice,
    sample_invertible_mealy,
    summarize_verdicts,
    write_report_csv,
)
from tvgroups.services.constructions import (
    BuildKind,
    BuildRequest,
    ConstructionError,
    build_named,
    pad_states,
)
from tvgroups.services.elements import parse_element
from tvgroups.services.errors import InputError, LimitExceededError, TVGroupsError
from tvgroups.services.group_engine import (
    Element,
    commute,
    format_element,
    generators,
    image,
    is_identity,
    order_pow2,
    wreath,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_LIMIT = 1
EXIT_INPUT = 2

Handler = Callable[[argparse.Namespace, Settings], None]


def _emit(text: str = "") -> None:
    print(text)


def _boolean(value: bool) -> str:
    return "true" if value else "false"


def parse_order(text: str) -> int:
    """Exponent r from `2^r` or from the power of two itself (`8` -> 3)."""
    raw = text.strip()
    if raw.startswith("2^"):
        try:
            exponent = int(raw[2:])
        except ValueError:
            raise ConstructionError("order", f"cannot parse {text!r} as 2^r") from None
    else:
        try:
            value = int(raw)
        except ValueError:
            raise ConstructionError("order", f"cannot parse {text!r} as 2^r") from None
        if value < 2 or value & (value - 1):
            raise ConstructionError("order", f"{value} is not a power of two >= 2")
        exponent = value.bit_length() - 1
    if exponent < 1:
        raise ConstructionError("order", f"exponent r must be >= 1, got {exponent}")
    return exponent


def parse_torsion(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConstructionError("torsion", f"expected comma-separated integers, got {text!r}") from None


def parse_flips(text: str) -> tuple[bool, ...]:
    if any(char not in "01" for char in text):
        raise ConstructionError("flips", f"expected a 0/1 string, got {text!r}")
    return tuple(char == "1" for char in text)


def _state(aut: Automaton, name: str) -> int:
    return aut.state_index(name)


def _element(aut: Automaton, text: str, step: int) -> Element:
    return parse_element(aut, text, phase=step)


def _write_automaton(aut: Automaton, output: str | None) -> None:
    validate(aut).raise_for_error()
    if output is None:
        _emit(json.dumps(automaton_to_dict(aut), indent=2))
        return
    dump_automaton(aut, output)
    _emit(output)


def cmd_validate(args: argparse.Namespace, settings: Settings) -> None:
    load_automaton(args.file)
    _emit("ok")


def cmd_apply(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    word = parse_word(args.word, aut.k)
    if args.element is not None:
        result = image(_element(aut, args.element, args.step), word)
    else:
        result = apply_state(aut, _state(aut, args.state), args.step, word)
    _emit(format_word(result, aut.k))


def cmd_image(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    word = parse_word(args.word, aut.k)
    _emit(format_word(image(_element(aut, args.element, args.step), word), aut.k))


def cmd_identity(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    verdict = is_identity(
        _element(aut, args.element, args.step), max_closure=settings.search.max_closure
    )
    _emit(_boolean(verdict.is_identity))
    if verdict.witness is not None:
        _emit(f"witness {format_word(verdict.witness, aut.k)}")


def cmd_order(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    max_exp = settings.search.max_exp if args.max_exp is None else args.max_exp
    result = order_pow2(
        _element(aut, args.element, args.step), max_exp, max_closure=settings.search.max_closure
    )
    _emit(str(result))


def cmd_commute(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    left = _element(aut, args.left, args.step)
    right = _element(aut, args.right, args.step)
    _emit(_boolean(commute(left, right, max_closure=settings.search.max_closure)))


def cmd_wreath(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    _emit(str(wreath(_element(aut, args.element, args.step))))


def cmd_trace(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    path = trace(aut, _state(aut, args.state), args.step, parse_word(args.word, aut.k))
    for step in path:
        _emit(
            f"step {step.step} {aut.states[step.state]} "
            f"{list(step.label.images)} {step.letter}->{step.output}"
        )


def cmd_classify(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    if not aut.is_mealy:
        raise InputError("classify needs a Mealy automaton (empty prefix, one cycle step)")
    _, verdict = classify_mealy(
        aut,
        settings.search.max_exp if args.max_exp is None else args.max_exp,
        settings.search.rel_bound if args.rel_bound is None else args.rel_bound,
        max_closure=settings.search.max_closure,
    )
    _emit(str(verdict))
    if verdict.detail:
        _emit(verdict.detail)


def cmd_lattice(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    bound = settings.search.rel_bound if args.rel_bound is None else args.rel_bound
    lattice = relation_lattice(
        generators(aut, args.step), bound, max_closure=settings.search.max_closure
    )
    for vector in lattice.basis:
        _emit(" ".join(str(entry) for entry in vector))
    _emit(f"rank {lattice.rank}")
    _emit(f"free rank {lattice.free_rank} (K={bound})")


def cmd_involution(args: argparse.Namespace, settings: Settings) -> None:
    aut = load_automaton(args.file)
    length = settings.search.involution_length if args.length is None else args.length
    found = find_involution_outside_stabilizer(aut, length, max_closure=settings.search.max_closure)
    _emit("none" if found is None else format_element(found))


def cmd_enumerate(args: argparse.Namespace, settings: Settings) -> None:
    limit = settings.enumeration.max_states
    if args.alphabet == 2 and args.states > limit:
        raise EnumerationCapError(
            f"states: enumeration is capped at {limit} states for the binary alphabet"
        )
    if args.sample is not None:
        automata = sample_invertible_mealy(
            args.states, args.alphabet, args.sample, settings.enumeration.seed
        )
    else:
        automata = list(enumerate_invertible_mealy(args.states, args.alphabet))

    classifier = BatchClassifier(
        max_exp=settings.search.max_exp if args.max_exp is None else args.max_exp,
        bound=settings.search.rel_bound if args.rel_bound is None else args.rel_bound,
        workers=settings.enumeration.workers if args.workers is None else args.workers,
        max_closure=settings.search.max_closure,
    )
    rows = classifier.run(automata)
    if args.report:
        write_report_csv(rows, args.report)

    summary = summarize_verdicts(rows)
    _emit(f"automata {summary.automata}")
    for signature, count in summary.counts.items():
        _emit(f"{signature} {count}")


def cmd_build(args: argparse.Namespace, settings: Settings) -> None:
    kind = BuildKind(args.kind)
    if kind == BuildKind.CYCLIC:
        if args.infinite == (args.order is not None):
            raise ConstructionError("order", "give exactly one of --order 2^r and --infinite")
        request = BuildRequest(
            kind=kind, exponent=None if args.infinite else parse_order(args.order)
        )
    elif kind == BuildKind.MIXED:
        request = BuildRequest(kind=kind, torsion=parse_torsion(args.torsion), free_rank=args.free)
    elif kind == BuildKind.FREE_ABELIAN:
        request = BuildRequest(kind=kind, rank=args.rank)
    elif kind == BuildKind.SINGLE:
        request = BuildRequest(
            kind=kind,
            prefix_flips=parse_flips(args.prefix_flips),
            cycle_flips=parse_flips(args.cycle_flips),
        )
    elif kind in {BuildKind.SAUSAGE, BuildKind.SHIFT}:
        request = BuildRequest(kind=kind, states=args.states)
    else:
        request = BuildRequest(kind=kind)
    _write_automaton(build_named(request), args.output)


def cmd_pad(args: argparse.Namespace, settings: Settings) -> None:
    _write_automaton(pad_states(load_automaton(args.file), args.states), args.output)


def _add_file(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("file", help="Automaton JSON file")


def _add_step(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--step", type=int, default=1, help="1-based step index (default: 1)")


def _add_element(parser: argparse.ArgumentParser, *, required: bool = True) -> None:
    parser.add_argument(
        "--element", required=required, help="Element expression, e.g. 'a1^2 * a2^-1'"
    )


def _add_bounds(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-exp", type=int, help="Order search bound exponent E")
    parser.add_argument("--rel-bound", type=int, help="Relation search bound K")


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-o", "--output", help="Write the automaton here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for all subcommands."""
    parser = argparse.ArgumentParser(
        prog="tvgroups",
        description="Groups generated by Mealy and time-varying automata over finite alphabets",
    )
    parser.add_argument("--config", help="YAML settings file")
    parser.add_argument("--log-level", help="Logging level (default from settings: WARNING)")
    parser.add_argument("--log-format", choices=("json", "text"), help="Log format")
    parser.add_argument("--seed", type=int, help="Seed for randomized helpers")
    commands = parser.add_subparsers(dest="command", required=True)

    validate_parser = commands.add_parser("validate", help="Check an automaton file")
    _add_file(validate_parser)
    validate_parser.set_defaults(handler=cmd_validate)

    apply_parser = commands.add_parser("apply", help="Image of a word under a state or element")
    _add_file(apply_parser)
    target = apply_parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--state", help="State name")
    target.add_argument("--element", help="Element expression")
    _add_step(apply_parser)
    apply_parser.add_argument("--word", required=True, help="Input word, e.g. 0101")
    apply_parser.set_defaults(handler=cmd_apply)

    image_parser = commands.add_parser("image", help="Image of a word under an element")
    _add_file(image_parser)
    _add_element(image_parser)
    _add_step(image_parser)
    image_parser.add_argument("--word", required=True, help="Input word, e.g. 0101")
    image_parser.set_defaults(handler=cmd_image)

    identity_parser = commands.add_parser("identity", help="Decide whether an element is trivial")
    _add_file(identity_parser)
    _add_element(identity_parser)
    _add_step(identity_parser)
    identity_parser.set_defaults(handler=cmd_identity)

    order_parser = commands.add_parser("order", help="Order of an element (a power of two)")
    _add_file(order_parser)
    _add_element(order_parser)
    _add_step(order_parser)
    order_parser.add_argument("--max-exp", type=int, help="Search bound exponent E")
    order_parser.set_defaults(handler=cmd_order)

    commute_parser = commands.add_parser("commute", help="Decide whether two elements commute")
    _add_file(commute_parser)
    commute_parser.add_argument("left", help="First element expression")
    commute_parser.add_argument("right", help="Second element expression")
    _add_step(commute_parser)
    commute_parser.set_defaults(handler=cmd_commute)

    wreath_parser = commands.add_parser("wreath", help="Root permutation and sections")
    _add_file(wreath_parser)
    _add_element(wreath_parser)
    _add_step(wreath_parser)
    wreath_parser.set_defaults(handler=cmd_wreath)

    trace_parser = commands.add_parser("trace", help="Diagram path read by a word")
    _add_file(trace_parser)
    trace_parser.add_argument("--state", required=True, help="State name")
    _add_step(trace_parser)
    trace_parser.add_argument("--word", required=True, help="Input word")
    trace_parser.set_defaults(handler=cmd_trace)

    classify_parser = commands.add_parser("classify", help="Identify the generated group")
    _add_file(classify_parser)
    _add_bounds(classify_parser)
    classify_parser.set_defaults(handler=cmd_classify)

    lattice_parser = commands.add_parser("lattice", help="Relation lattice of the generators")
    _add_file(lattice_parser)
    _add_step(lattice_parser)
    lattice_parser.add_argument("--rel-bound", type=int, help="Relation search bound K")
    lattice_parser.set_defaults(handler=cmd_lattice)

    involution_parser = commands.add_parser(
        "involution", help="Search an involution outside the first level stabilizer"
    )
    _add_file(involution_parser)
    involution_parser.add_argument("--length", type=int, help="Maximum factor length L")
    involution_parser.set_defaults(handler=cmd_involution)

    enumerate_parser = commands.add_parser("enumerate", help="Classify all n-state Mealy automata")
    enumerate_parser.add_argument("--states", type=int, required=True, help="Number of states n")
    enumerate_parser.add_argument("--alphabet", type=int, default=2, help="Alphabet size k")
    enumerate_parser.add_argument("--sample", type=int, help="Classify a seeded random sample instead")
    enumerate_parser.add_argument("--workers", type=int, help="Worker processes")
    enumerate_parser.add_argument("--report", help="CSV report path")
    _add_bounds(enumerate_parser)
    enumerate_parser.set_defaults(handler=cmd_enumerate)

    build_parser_ = commands.add_parser("build", help="Write one of the explicit constructions")
    kinds = build_parser_.add_subparsers(dest="kind", required=True)

    cyclic = kinds.add_parser(BuildKind.CYCLIC.value, help="Cyclic group C_{2^r} or C_inf")
    cyclic.add_argument("--order", help="Group order as 2^r")
    cyclic.add_argument("--infinite", action="store_true", help="Infinite cyclic group")
    mixed = kinds.add_parser(BuildKind.MIXED.value, help="Finite cyclic factors plus Z^d'")
    mixed.add_argument("--torsion", required=True, help="Exponents r1,r2,...")
    mixed.add_argument("--free", type=int, default=0, help="Free rank d'")
    free = kinds.add_parser(BuildKind.FREE_ABELIAN.value, help="Free abelian group of rank n")
    free.add_argument("--rank", type=int, required=True, help="Rank n >= 2")
    for kind, help_text in (
        (BuildKind.SAUSAGE, "Mealy automaton for Z^(n-1)"),
        (BuildKind.SHIFT, "Mealy automaton for C_2^n"),
    ):
        sized = kinds.add_parser(kind.value, help=help_text)
        sized.add_argument("--states", type=int, required=True, help="Number of states n")
    single = kinds.add_parser(BuildKind.SINGLE.value, help="One-state time-varying automaton")
    single.add_argument("--prefix-flips", default="", help="0/1 flips for the prefix steps")
    single.add_argument("--cycle-flips", default="1", help="0/1 flips for the cycle steps")
    kinds.add_parser(BuildKind.LAMPLIGHTER.value, help="Lamplighter fixture")
    kinds.add_parser(BuildKind.DIHEDRAL.value, help="Infinite dihedral fixture")
    pad = kinds.add_parser("pad", help="Add inert states to an existing automaton")
    _add_file(pad)
    pad.add_argument("--states", type=int, required=True, help="Total number of states")
    pad.set_defaults(handler=cmd_pad)

    for name, sub in kinds.choices.items():
        _add_output(sub)
        if name != "pad":
            sub.set_defaults(handler=cmd_build)

    return parser


def _settings_for(args: argparse.Namespace) -> Settings:
    settings = get_settings() if args.config is None else load_settings(args.config)
    updates: dict[str, object] = {}
    if args.log_level:
        updates["log_level"] = args.log_level
    if args.log_format:
        updates["log_format"] = args.log_format
    if args.seed is not None:
        updates["enumeration"] = settings.enumeration.model_copy(update={"seed": args.seed})
    return settings.model_copy(update=updates) if updates else settings


def run(argv: Sequence[str] | None = None) -> int:
    """
    Run one command.

    Returns:
        0 on success, 2 on invalid input, 1 when a search cap is exceeded
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT

    try:
        settings = _settings_for(args)
        setup_logging(settings)
    except (ValueError, AttributeError) as exc:
        print(f"error: invalid settings: {exc}", file=sys.stderr)
        return EXIT_INPUT

    start_run()
    handler: Handler = args.handler
    logger.info("Command started", extra={"command": args.command})
    try:
        handler(args, settings)
    except LimitExceededError as exc:
        logger.warning("Search cap exceeded", extra={"command": args.command})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (TVGroupsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
