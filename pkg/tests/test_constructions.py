"""Tests for the explicit automaton constructions."""

import pytest

from tvgroups.services.automaton import apply, validate
from tvgroups.services.constructions import (
    BuildKind,
    BuildRequest,
    ConstructionError,
    StepPartition,
    build_named,
    cyclic_shift_mealy,
    cyclic_tva,
    dihedral_mealy,
    free_abelian_tva,
    free_partition,
    lamplighter_mealy,
    mixed_abelian_tva,
    mixed_partition,
    mixed_torsion_generator,
    pad_states,
    sausage_mealy,
    single_state_tva,
)
from tvgroups.services.group_engine import (
    Finite,
    commute,
    equal,
    generator,
    generators,
    identity,
    image,
    order_pow2,
)


class TestPartitions:
    """Step partitions and window counts."""

    def test_mixed_partition_blocks(self):
        partition = mixed_partition((3, 1, 2), 1)
        assert [partition.block_of(step) for step in range(1, 9)] == [1, 1, 1, 2, 3, 3, 4, 4]
        assert partition.horizon == 6
        assert partition.period == 1

    def test_mixed_partition_cycles_free_generators(self):
        partition = mixed_partition((1,), 2)
        assert [partition.block_of(step) for step in range(1, 6)] == [1, 2, 3, 2, 3]

    def test_window_counts(self):
        partition = mixed_partition((3, 1, 2), 1)
        assert partition.count_in_window(3, 1, 10) == 2
        assert partition.count_in_window(4, 1, 10) == 4
        assert partition.count_in_window(1, 2, 2) == 2

    def test_free_partition(self):
        partition = free_partition(3)
        assert partition.block_of(1) is None
        assert partition.block_of(2) == 2
        assert partition.block_of(3) == 3
        assert partition.count_in_window(2, 1, 10) == 5
        assert partition.count_in_window(3, 1, 10) == 4

    def test_overlap_is_rejected(self):
        partition = StepPartition(finite_blocks=((1, frozenset({1, 2})), (2, frozenset({2}))))
        with pytest.raises(ConstructionError, match="step 2"):
            partition.check(1, 2)

    def test_gap_is_rejected(self):
        partition = StepPartition(finite_blocks=((1, frozenset({1})),))
        with pytest.raises(ConstructionError, match="not covered"):
            partition.check(1, 2)


class TestCyclic:
    """Two-state automata generating cyclic groups."""

    def test_layout(self):
        aut = cyclic_tva(3)
        assert len(aut.schedule.prefix) == 3
        assert len(aut.schedule.cycle) == 1
        assert cyclic_tva(None).is_mealy

    def test_first_generator_is_trivial(self):
        aut = cyclic_tva(2)
        assert equal(generator(aut, "a1"), identity(aut))

    def test_exponent_must_be_positive(self):
        with pytest.raises(ConstructionError) as exc_info:
            cyclic_tva(0)
        assert exc_info.value.field_name == "order"


class TestMixed:
    """Direct sums of finite cyclic 2-groups and free abelian groups."""

    def test_small_instance_orders(self):
        aut = mixed_abelian_tva((1, 1), 0)
        assert aut.n == 2
        assert order_pow2(generator(aut, "a2"), 3) == Finite(2)
        assert order_pow2(mixed_torsion_generator(aut), 3) == Finite(2)

    def test_three_block_torsion_orders(self):
        aut = mixed_abelian_tva((3, 1, 2), 1)
        assert aut.n == 4
        assert order_pow2(generator(aut, "a2"), 4) == Finite(2)
        assert order_pow2(generator(aut, "a3"), 4) == Finite(4)

    @pytest.mark.parametrize(
        ("r_list", "free_rank", "field_name"),
        [((), 1, "torsion"), ((0, 1), 0, "torsion"), ((1,), -1, "free"), ((2,), 0, "torsion")],
    )
    def test_preconditions(self, r_list, free_rank, field_name):
        with pytest.raises(ConstructionError) as exc_info:
            mixed_abelian_tva(r_list, free_rank)
        assert exc_info.value.field_name == field_name


class TestFreeAbelian:
    """Free abelian groups of rank n from n states."""

    def test_rank_two_commutes(self):
        a1, a2 = generators(free_abelian_tva(2))
        assert commute(a1, a2)

    def test_rank_precondition(self):
        with pytest.raises(ConstructionError):
            free_abelian_tva(1)


class TestMealyFamilies:
    """Sausage, cyclic-shift and the non-abelian fixtures."""

    def test_shift_generators_are_involutions(self):
        for n in range(1, 5):
            for g in generators(cyclic_shift_mealy(n)):
                assert order_pow2(g, 3) == Finite(2)

    def test_shift_image_of_zero_word(self):
        aut = cyclic_shift_mealy(4)
        for j in range(4):
            expected = tuple(1 if position == j else 0 for position in range(4))
            assert apply(aut, j, 1, (0, 0, 0, 0)) == expected

    def test_sausage_generators_commute(self):
        gens = generators(sausage_mealy(3))
        assert all(commute(a, b) for a in gens for b in gens)

    def test_fixture_state_names(self):
        assert lamplighter_mealy().states == ("a", "b")
        assert dihedral_mealy().states == ("a", "b")

    def test_size_preconditions(self):
        with pytest.raises(ConstructionError):
            sausage_mealy(1)
        with pytest.raises(ConstructionError):
            cyclic_shift_mealy(0)


class TestSingleState:
    """One-state time-varying automata."""

    def test_orders(self):
        assert order_pow2(generator(single_state_tva((), (True,)), 0), 2) == Finite(2)
        assert order_pow2(generator(single_state_tva((True, False), (False,)), 0), 2) == Finite(2)
        assert order_pow2(generator(single_state_tva((), (False, True)), 0), 2) == Finite(2)
        assert order_pow2(generator(single_state_tva((), (False,)), 0), 2) == Finite(1)

    def test_empty_cycle(self):
        with pytest.raises(ConstructionError):
            single_state_tva((True,), ())


class TestPadding:
    """Adding inert states."""

    def test_padded_states_are_trivial(self, sausage2):
        padded = pad_states(sausage2, 4)
        assert padded.states == ("a1", "a2", "q1", "q2")
        assert validate(padded).ok
        for name in ("q1", "q2"):
            assert equal(generator(padded, name), identity(padded))

    def test_original_action_is_kept(self, sausage2):
        padded = pad_states(sausage2, 3)
        assert image(generator(padded, "a2"), (0, 0, 0)) == (1, 1, 1)

    def test_padding_time_varying(self):
        padded = pad_states(cyclic_tva(2), 3)
        assert len(padded.schedule.prefix) == 2
        assert order_pow2(generator(padded, "a2"), 3) == Finite(4)

    def test_cannot_shrink(self, sausage2):
        with pytest.raises(ConstructionError):
            pad_states(sausage2, 1)
        assert pad_states(sausage2, 2) is sausage2


class TestBuildNamed:
    """Dispatch used by the CLI."""

    def test_dispatch(self):
        assert build_named(BuildRequest(kind=BuildKind.SHIFT, states=3)) == cyclic_shift_mealy(3)
        assert build_named(BuildRequest(kind=BuildKind.CYCLIC, exponent=2)) == cyclic_tva(2)
        assert build_named(BuildRequest(kind=BuildKind.MIXED, torsion=(1, 1))) == mixed_abelian_tva(
            (1, 1), 0
        )
        assert build_named(BuildRequest(kind=BuildKind.DIHEDRAL)) == dihedral_mealy()
