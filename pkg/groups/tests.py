import math

import numpy as np
from django.test import TestCase, override_settings

from groups.services import (
    GroupSpec, PermutationGroup, build_group, parse_group_spec, symmetric_generators,
)
from snakelab.exceptions import ArgumentError, SizeLimitError


class BuildGroupTests(TestCase):
    """Test suite for group construction."""

    def test_cyclic_order(self):
        """Test that cyclic(4) has four elements."""
        self.assertEqual(build_group("cyclic(4)").order, 4)

    def test_power_order(self):
        """Test that power(cyclic(2), 3) has eight elements."""
        self.assertEqual(build_group("power(cyclic(2),3)").order, 8)

    def test_symmetric_order(self):
        """Test that symmetric(4) has 4! elements."""
        self.assertEqual(build_group(GroupSpec.symmetric(4)).order, 24)

    def test_closure_of_standard_generators_gives_factorial(self):
        """Test that closing the adjacent transpositions of S_k gives k! for k <= 6."""
        for k in range(1, 7):
            group = build_group(GroupSpec.permutation_closure(symmetric_generators(k)))
            self.assertEqual(group.order, math.factorial(k))

    def test_closure_of_transposition_and_cycle(self):
        """Test that a transposition and a 5-cycle generate S_5."""
        group = build_group("perms([1,0,2,3,4];[1,2,3,4,0])")
        self.assertEqual(group.order, 120)

    def test_empty_generator_list_rejected(self):
        """Test that a closure with no generators is rejected."""
        with self.assertRaises(ArgumentError):
            build_group(GroupSpec.permutation_closure([]))

    def test_closure_cap_raises_size_limit(self):
        """Test that exceeding the element cap raises a size-limit error."""
        with self.assertRaises(SizeLimitError) as ctx:
            PermutationGroup(symmetric_generators(5), cap=50)
        self.assertEqual(ctx.exception.cap, 50)

    @override_settings(GROUP_ELEMENT_CAP=100)
    def test_power_cap_raises_size_limit(self):
        """Test that a direct power above the element cap is refused."""
        with self.assertRaises(SizeLimitError):
            build_group("power(cyclic(2),7)")

    def test_spec_text_round_trip(self):
        """Test that the text form of a spec parses back to the same spec."""
        for text in ["cyclic(6)", "power(cyclic(5),2)", "symmetric(3)", "perms([1,0,2];[0,2,1])"]:
            self.assertEqual(str(parse_group_spec(text)), text)

    def test_malformed_spec_rejected(self):
        """Test that unknown families are argument errors."""
        with self.assertRaises(ArgumentError):
            parse_group_spec("dihedral(4)")

    @override_settings(GROUP_TABLE_CAP=4)
    def test_action_mode_matches_table_mode(self):
        """Test that on-demand products agree with the materialised table."""
        action = build_group("symmetric(3)")
        self.assertFalse(action.has_table)
        with self.settings(GROUP_TABLE_CAP=4096):
            table = build_group("symmetric(3)")
        self.assertTrue(table.has_table)
        for a in range(6):
            for b in range(6):
                self.assertEqual(action.multiply(a, b), table.multiply(a, b))


class ArithmeticTests(TestCase):
    """Test suite for multiply and invert."""

    def setUp(self):
        """Set up a few small groups."""
        self.z4 = build_group("cyclic(4)")
        self.z6 = build_group("cyclic(6)")
        self.cube = build_group("power(cyclic(2),3)")
        self.s3 = build_group("symmetric(3)")

    def test_cyclic_multiply(self):
        """Test modular addition in Z_4."""
        self.assertEqual(self.z4.multiply(1, 3), 0)

    def test_power_multiply_is_xor(self):
        """Test that Z_2^3 multiplies coordinatewise."""
        a = self.cube.element([1, 0, 1])
        b = self.cube.element([1, 1, 0])
        self.assertEqual(self.cube.multiply(a, b), self.cube.element([0, 1, 1]))

    def test_permutation_convention(self):
        """Test that (12)·(23) = (123) under right-to-left composition."""
        t12 = self.s3.element((1, 0, 2))
        t23 = self.s3.element((0, 2, 1))
        product = self.s3.multiply(t12, t23)
        self.assertEqual(self.s3.label(product), '(123)')

    def test_invert_examples(self):
        """Test the documented inverses."""
        self.assertEqual(self.z6.invert(2), 4)
        for a in range(8):
            self.assertEqual(self.cube.invert(a), a)
        c = self.s3.element((1, 2, 0))
        self.assertEqual(self.s3.label(self.s3.invert(c)), '(132)')

    def test_out_of_range_rejected(self):
        """Test that invalid ids raise argument errors."""
        with self.assertRaises(ArgumentError):
            self.z4.multiply(4, 0)
        with self.assertRaises(ArgumentError):
            self.z4.invert(-1)

    def test_identity_and_inverse_laws(self):
        """Test identity, inverse and bijection laws exhaustively on small groups."""
        for group in (self.z6, self.cube, self.s3, build_group("symmetric(4)")):
            for a in range(group.order):
                self.assertEqual(group.multiply(group.identity, a), a)
                self.assertEqual(group.multiply(a, group.identity), a)
                self.assertEqual(group.multiply(a, group.invert(a)), group.identity)
                self.assertEqual(sorted(group.left_translation(a).tolist()), list(range(group.order)))
                self.assertEqual(sorted(group.right_translation(a).tolist()), list(range(group.order)))

    def test_double_inverse_exhaustive(self):
        """Test that invert(invert(a)) = a for every element of groups up to order 10^3."""
        for group in (build_group("symmetric(6)"), build_group("power(cyclic(10),3)")):
            inv = group.inverse_array()
            np.testing.assert_array_equal(inv[inv], np.arange(group.order))

    def test_associativity_spot_check(self):
        """Test associativity on 10^3 random triples per group."""
        rng = np.random.default_rng(11)
        for group in (self.z6, self.cube, build_group("symmetric(5)"), build_group("power(symmetric(3),2)")):
            a, b, c = rng.integers(group.order, size=(3, 1000))
            left = group.multiply_arrays(group.multiply_arrays(a, b), c)
            right = group.multiply_arrays(a, group.multiply_arrays(b, c))
            np.testing.assert_array_equal(left, right)

    def test_hypercube_labels(self):
        """Test that Z_2^3 labels list coordinates first-to-last."""
        self.assertEqual(self.cube.label(self.cube.element([1, 1, 0])), '110')
        self.assertEqual(self.cube.element([1, 1, 0]), 3)
