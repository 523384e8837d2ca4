"""Tests for elements, wreath recursion and the exact decision procedures."""

import pytest

from tvgroups.services.automaton import Alphabet, Automaton, Permutation, Schedule, StepTable
from tvgroups.services.constructions import (
    cyclic_shift_mealy,
    cyclic_tva,
    free_abelian_tva,
    sausage_mealy,
)
from tvgroups.services.elements import ElementParseError, parse_element
from tvgroups.services.group_engine import (
    AutomatonMismatchError,
    ClosureLimitError,
    ExceedsBound,
    Factor,
    GroupEngineError,
    Finite,
    NotInvertibleError,
    PhaseMismatchError,
    UnsupportedAlphabetError,
    acts_trivially_up_to,
    brute_force_order,
    commutator,
    commute,
    compose,
    element,
    equal,
    format_element,
    from_exponents,
    generator,
    identity,
    image,
    in_first_level_stabilizer,
    invert,
    is_identity,
    is_involution,
    order_pow2,
    power,
    random_element,
    root_permutation,
    section,
    section_at,
    wreath,
)


class TestElements:
    """Construction and arithmetic of factor words."""

    def test_element_is_freely_reduced(self, shift3):
        g = element(shift3, [Factor(0, 1), Factor(1, 1), Factor(1, -1), Factor(2, 1)])
        assert g.factors == (Factor(0, 1), Factor(2, 1))

    def test_phase_is_effective(self):
        aut = cyclic_tva(2)
        assert generator(aut, "a2", 10).phase == 3

    def test_compose_and_invert(self, shift3):
        a1 = generator(shift3, 0)
        a2 = generator(shift3, 1)
        g = compose(a1, a2)
        assert len(compose(g, invert(g))) == 0

    def test_power(self, shift3):
        a1 = generator(shift3, 0)
        assert len(power(a1, 5)) == 5
        assert power(a1, -2).factors == (Factor(0, -1), Factor(0, -1))
        assert len(power(a1, 0)) == 0

    def test_from_exponents(self, shift3):
        gens = [generator(shift3, q) for q in range(3)]
        g = from_exponents(gens, (2, 0, -1))
        assert format_element(g) == "a1^2 * a3^-1"

    def test_inverse_words_hash_apart(self, lamplighter):
        # words in a^-1 and b^-1 only are freely reduced, so all 2^12 are distinct elements
        words = [
            element(lamplighter, [Factor(state, -1) for state in states])
            for states in product((0, 1), repeat=12)
        ]
        assert len({g.codes for g in words}) == 4096
        assert len({hash(g.codes) for g in words}) == 4096

    def test_inverse_and_direct_factors_encode_apart(self, shift3):
        a1 = generator(shift3, 0)
        a2 = generator(shift3, 1)
        assert invert(a1).codes != a2.codes
        assert hash(invert(a1).codes) != hash(invert(a2).codes)

    def test_phase_mismatch(self):
        aut = cyclic_tva(2)
        with pytest.raises(PhaseMismatchError):
            compose(generator(aut, 1, 1), generator(aut, 1, 2))

    def test_automaton_mismatch(self):
        with pytest.raises(AutomatonMismatchError):
            compose(generator(sausage_mealy(2), 0), generator(cyclic_shift_mealy(2), 0))

    def test_non_invertible_automaton(self):
        table = StepTable.build([[0, 0]], [[0, 0]])
        aut = Automaton(Alphabet(2), ("a1",), Schedule((), (table,)))
        with pytest.raises(NotInvertibleError):
            generator(aut, 0)


class TestWreath:
    """Root permutations and sections."""

    def test_cyclic_generator(self):
        a2 = generator(cyclic_tva(2), "a2")
        recursion = wreath(a2)
        assert recursion.root == Permutation.flip()
        assert format_element(recursion.sections[0]) == "a2"
        assert recursion.sections[0].phase == 2
        assert format_element(recursion.sections[1]) == "a1"
        assert str(recursion) == "(a2, a1)[1, 0]"

    def test_section_in_cyclic_four(self):
        a2 = generator(cyclic_tva(2), "a2")
        assert section(a2, 0) == generator(cyclic_tva(2), "a2", 2)

    def test_free_abelian_first_generator(self):
        aut = free_abelian_tva(3)
        a1 = generator(aut, "a1")
        assert root_permutation(a1).is_identity
        assert section(a1, 1) == generator(aut, "a2", 2)
        assert section(a1, 0) == generator(aut, "a1", 2)

    def test_identity_recursion(self, shift3):
        recursion = wreath(identity(shift3))
        assert recursion.root.is_identity
        assert all(len(s) == 0 for s in recursion.sections)

    def test_unreduced_section_keeps_one_factor_per_factor(self, shift3):
        g = parse_element(shift3, "a1 a2^-1 a3 a1")
        for letter in (0, 1):
            assert len(section(g, letter, reduce=False)) == len(g)

    def test_section_along_word(self, shift3):
        g = generator(shift3, "a3")
        assert section_at(g, (0, 0)) == generator(shift3, "a1")

    def test_stabilizer(self):
        shift2 = cyclic_shift_mealy(2)
        assert not in_first_level_stabilizer(generator(shift2, "a1"))
        assert in_first_level_stabilizer(identity(shift2))
        sausage = sausage_mealy(2)
        assert in_first_level_stabilizer(power(generator(sausage, "a2"), 2))


class TestImage:
    """The action on words."""

    def test_shift_generator(self, shift3):
        assert image(generator(shift3, "a2"), (0, 0, 0)) == (0, 1, 0)

    def test_sausage_generator(self, sausage2):
        assert image(generator(sausage2, "a2"), (0, 0, 0)) == (1, 1, 1)

    def test_left_factor_acts_first(self, lamplighter):
        a = generator(lamplighter, "a")
        b = generator(lamplighter, "b")
        word = (0, 1, 1, 0)
        assert image(compose(a, b), word) == image(b, image(a, word))

    def test_inverse_action(self, dihedral):
        g = parse_element(dihedral, "a b^-1 a")
        word = (1, 1, 0, 1, 0)
        assert image(invert(g), image(g, word)) == word


class TestIdentity:
    """The identity decision and its witnesses."""

    def test_empty_word(self, shift3):
        verdict = is_identity(identity(shift3))
        assert verdict.is_identity
        assert verdict.witness is None

    def test_square_of_order_two_generator(self):
        a2 = generator(cyclic_tva(1), "a2")
        assert is_identity(compose(a2, a2)).is_identity
        assert equal(invert(a2), a2)

    def test_witness_is_moved(self, lamplighter):
        g = commutator(generator(lamplighter, "a"), generator(lamplighter, "b"))
        verdict = is_identity(g)
        assert not verdict.is_identity
        witness = verdict.witness
        assert witness is not None
        assert image(g, witness) != witness
        # ancestors of the witness are fixed
        assert image(g, witness[:-1]) == witness[:-1]

    def test_trivial_state_is_identity(self):
        for n in (2, 3, 4):
            aut = sausage_mealy(n)
            assert equal(generator(aut, "a1"), identity(aut))

    def test_distinct_generators(self):
        aut = cyclic_shift_mealy(2)
        assert not equal(generator(aut, "a1"), generator(aut, "a2"))

    def test_closure_cap(self, lamplighter):
        # a^2 fixes the first letter and has two distinct sections
        with pytest.raises(ClosureLimitError):
            is_identity(power(generator(lamplighter, "a"), 2), max_closure=1)


class TestCommutativeClosure:
    """Exponent-vector closures for abelian Mealy groups."""

    @pytest.mark.parametrize("aut", [sausage_mealy(3), cyclic_shift_mealy(3)])
    def test_agrees_with_word_closure(self, aut):
        rng = Random(5)
        for _ in range(60):
            g = random_element(aut, rng.randint(0, 8), rng)
            plain = is_identity(g)
            collapsed = is_identity(g, commutative=True)
            assert collapsed.is_identity == plain.is_identity
            if not collapsed.is_identity:
                witness = collapsed.witness
                assert witness is not None
                assert image(g, witness) != witness

    def test_long_power_has_small_closure(self):
        aut = sausage_mealy(3)
        g = power(compose(generator(aut, "a2"), invert(generator(aut, "a3"))), 256)
        verdict = is_identity(g, commutative=True)
        assert not verdict.is_identity
        assert verdict.closure_size <= 64 * aut.n

    def test_orders_agree(self):
        aut = cyclic_shift_mealy(4)
        for g in (generator(aut, q) for q in range(4)):
            assert order_pow2(g, 4, commutative=True) == order_pow2(g, 4) == Finite(2)
        g = generator(sausage_mealy(2), "a2")
        assert order_pow2(g, 10, commutative=True) == ExceedsBound(10)

    def test_equal_in_shift_group(self, shift3):
        a1 = generator(shift3, 0)
        a2 = generator(shift3, 1)
        assert equal(compose(a1, a2), compose(a2, a1), commutative=True)
        assert not equal(a1, a2, commutative=True)

    def test_needs_mealy_automaton(self):
        with pytest.raises(GroupEngineError):
            is_identity(generator(cyclic_tva(2), "a2"), commutative=True)


class TestCommute:
    """Commutation and involutions."""

    def test_shift_generators_commute(self):
        aut = cyclic_shift_mealy(4)
        gens = [generator(aut, q) for q in range(4)]
        assert all(commute(a, b) for a in gens for b in gens)

    def test_lamplighter_does_not_commute(self, lamplighter):
        assert not commute(generator(lamplighter, "a"), generator(lamplighter, "b"))

    def test_involutions(self, dihedral, shift3):
        assert is_involution(generator(dihedral, "a"))
        assert not is_involution(identity(shift3))
        assert not is_involution(compose(generator(dihedral, "a"), generator(dihedral, "b")))


class TestOrder:
    """Orders of elements over the binary alphabet."""

    @pytest.mark.parametrize("exponent", [1, 2, 3, 4])
    def test_cyclic_generator_order(self, exponent):
        a2 = generator(cyclic_tva(exponent), "a2")
        assert order_pow2(a2, exponent + 1) == Finite(2**exponent)

    def test_bound_too_small(self):
        a2 = generator(cyclic_tva(3), "a2")
        assert order_pow2(a2, 2) == ExceedsBound(2)

    def test_infinite_cyclic(self):
        a2 = generator(cyclic_tva(None), "a2")
        assert order_pow2(a2, 12) == ExceedsBound(12)

    def test_identity_has_order_one(self, shift3):
        assert order_pow2(identity(shift3), 0) == Finite(1)

    def test_binary_alphabet_only(self):
        table = StepTable.build([[0, 0, 0]], [[1, 2, 0]])
        aut = Automaton(Alphabet(3), ("a1",), Schedule((), (table,)))
        with pytest.raises(UnsupportedAlphabetError):
            order_pow2(generator(aut, 0), 3)

    def test_brute_force_agrees(self):
        a2 = generator(cyclic_tva(3), "a2")
        assert brute_force_order(a2, 64, 4) == 8
        assert acts_trivially_up_to(power(a2, 8), 6)
        assert not acts_trivially_up_to(power(a2, 4), 3)


class TestElementGrammar:
    """Parsing and formatting element expressions."""

    def test_round_trip(self, shift3):
        g = parse_element(shift3, "a1^2 * a2^-1 a3")
        assert format_element(g) == "a1^2 * a2^-1 * a3"
        assert parse_element(shift3, format_element(g)) == g

    def test_identity_tokens(self, shift3):
        assert len(parse_element(shift3, "id")) == 0
        assert format_element(parse_element(shift3, "")) == "id"

    def test_phase(self):
        aut = cyclic_tva(2)
        assert parse_element(aut, "a2", phase=2).phase == 2

    @pytest.mark.parametrize("text", ["b1", "a1^0", "a1^", "a1^x"])
    def test_rejects(self, shift3, text):
        with pytest.raises(ElementParseError):
            parse_element(shift3, text)

    def test_huge_exponent_is_rejected(self, shift3):
        with pytest.raises(ElementParseError, match="factors"):
            parse_element(shift3, "a1^1000000000")

    def test_factor_cap(self, shift3):
        assert len(parse_element(shift3, "a1^3 a2", max_factors=4)) == 4
        with pytest.raises(ElementParseError):
            parse_element(shift3, "a1^3 a2^2", max_factors=4)
