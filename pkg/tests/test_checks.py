"""Sampled and analytic hypothesis checks."""

import numpy as np
import pytest

from gvikit import (
    Affine,
    Box,
    Constant,
    Identity,
    PointwiseNonlinear,
    Rotation,
    SampleConfig,
    Scale,
    affine_relative_monotone,
    check_fiber_condition,
    check_g_nonexpansive,
    check_g_pseudocontractive,
    check_monotone_relative,
    check_ql,
    check_range_inclusion,
    segment_distance,
)

CFG = SampleConfig(seed=2024, samples=400)
SQUARE = PointwiseNonlinear("square", 1)
SYM_BOX = Box([-1.0], [1.0])
UNIT_BOX = Box([0.0, 0.0], [1.0, 1.0])


class TestMonotoneRelative:
    def test_plain_monotone_affine(self):
        op = Affine([[2.0, 1.0], [1.0, 2.0]])
        rep = check_monotone_relative(op, Identity(2), UNIT_BOX, CFG)
        assert rep.verdict == "holds_on_samples"
        assert rep.max_violation <= CFG.tol

    def test_reflection_is_not_monotone(self):
        op = Scale(-1.0, Identity(2))
        rep = check_monotone_relative(op, Identity(2), UNIT_BOX, CFG)
        assert rep.verdict == "violated"
        x, y = rep.witness
        inner = float((op(x) - op(y)) @ (x - y))
        assert -inner == pytest.approx(rep.max_violation)
        assert -inner > CFG.tol

    def test_square_monotone_on_positive_interval(self):
        rep = check_monotone_relative(SQUARE, Identity(1), Box([0.0], [1.0]), CFG)
        assert rep.verdict == "holds_on_samples"

    def test_square_not_monotone_on_symmetric_interval(self):
        # (x^2 - y^2)(x - y) = (x + y)(x - y)^2 turns negative when x + y < 0
        rep = check_monotone_relative(SQUARE, Identity(1), SYM_BOX, CFG)
        assert rep.verdict == "violated"
        x, y = rep.witness
        assert (x + y).item() < 0

    def test_relative_to_doubling(self):
        # g - f with f a rotation and g = 2x: <(2I - R)d, 2d> = 4|d|^2 >= 0
        g = Affine(2 * np.eye(2))
        diff = Affine(2 * np.eye(2) - np.array([[0.0, -1.0], [1.0, 0.0]]))
        rep = check_monotone_relative(diff, g, UNIT_BOX, CFG)
        assert rep.verdict == "holds_on_samples"

    def test_determinism(self):
        op = Scale(-1.0, Identity(2))
        r1 = check_monotone_relative(op, Identity(2), UNIT_BOX, CFG)
        r2 = check_monotone_relative(op, Identity(2), UNIT_BOX, CFG)
        assert r1.max_violation == r2.max_violation
        np.testing.assert_array_equal(r1.witness[0], r2.witness[0])


class TestAffineRelativeMonotone:
    def test_proven_for_worked_pair(self):
        m = [[2.0, -1.0], [0.0, 1.0]]
        g = [[1.0, 0.0], [1.0, 1.0]]
        rep = affine_relative_monotone(m, g)
        assert rep.verdict == "proven"

    def test_violated_with_reproducing_witness(self):
        rep = affine_relative_monotone([[-1.0]], [[1.0]])
        assert rep.verdict == "violated"
        d, origin = rep.witness
        inner = float((np.array([[-1.0]]) @ d) @ (np.array([[1.0]]) @ d))
        assert inner < -1e-9
        np.testing.assert_array_equal(origin, np.zeros(1))

    def test_agrees_with_sampled_check(self):
        rng = np.random.default_rng(77)
        box = Box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
        for _ in range(10):
            g_mat = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
            s = rng.normal(size=(3, 3))
            psd = s.T @ s + 1e-3 * np.eye(3)
            indef = psd - (np.trace(psd)) * np.eye(3)
            for sym, expect in ((psd, "proven"), (indef, "violated")):
                m = np.linalg.solve(g_mat.T, sym)
                rep = affine_relative_monotone(m, g_mat)
                assert rep.verdict == expect
                sampled = check_monotone_relative(
                    Affine(m), Affine(g_mat), box, SampleConfig(seed=3, samples=300)
                )
                if expect == "proven":
                    assert sampled.verdict == "holds_on_samples"
                else:
                    assert sampled.verdict == "violated"

    def test_shape_validation(self):
        from gvikit import DimensionMismatch

        with pytest.raises(DimensionMismatch):
            affine_relative_monotone([[1.0, 0.0]], [[1.0]])


class TestQl:
    def test_affine_maps_hold(self):
        rep = check_ql(Affine([[2.0, 0.0], [1.0, 1.0]], [3.0, -1.0]), UNIT_BOX, CFG)
        assert rep.verdict == "holds_on_samples"

    def test_square_violates_with_witness(self):
        rep = check_ql(SQUARE, SYM_BOX, CFG)
        assert rep.verdict == "violated"
        x, y, z = rep.witness
        d = segment_distance(SQUARE(z), SQUARE(x), SQUARE(y))
        assert d == pytest.approx(rep.max_violation)
        assert d > CFG.tol


class TestNonexpansiveAndPseudocontractive:
    def test_contraction_is_nonexpansive(self):
        rep = check_g_nonexpansive(Scale(0.5, Identity(1)), Identity(1), SYM_BOX, CFG)
        assert rep.verdict == "holds_on_samples"

    def test_expansion_violates(self):
        rep = check_g_nonexpansive(Scale(2.0, Identity(1)), Identity(1), SYM_BOX, CFG)
        assert rep.verdict == "violated"
        x, y = rep.witness
        assert abs(2 * (x - y)) > abs(x - y)

    def test_rotation_nonexpansive_relative_to_doubling(self):
        rep = check_g_nonexpansive(Rotation(0.7), Affine(2 * np.eye(2)), UNIT_BOX, CFG)
        assert rep.verdict == "holds_on_samples"

    def test_crossing_lines_pseudocontractive(self):
        f = Affine([[1.0]], [0.5])
        g = Affine([[2.0]], [0.0])
        rep = check_g_pseudocontractive(f, g, Box([0.0], [1.0]), CFG)
        assert rep.verdict == "holds_on_samples"

    def test_triple_expansion_violates(self):
        rep = check_g_pseudocontractive(Scale(3.0, Identity(1)), Identity(1), SYM_BOX, CFG)
        assert rep.verdict == "violated"
        x, y = rep.witness
        viol = 3 * (x - y) * (x - y) - (x - y) ** 2
        assert viol.item() == pytest.approx(rep.max_violation)

    def test_nonexpansive_implies_pseudocontractive(self):
        rng = np.random.default_rng(99)
        box = Box([-1.0, -1.0], [1.0, 1.0])
        ops = [
            (Rotation(0.9), Identity(2)),
            (Scale(0.8, Rotation(0.2)), Identity(2)),
            (Rotation(1.5), Affine(2 * np.eye(2))),
            (Affine(0.5 * np.eye(2), [0.3, 0.3]), Identity(2)),
        ]
        for f, g in ops:
            for _ in range(500):
                x, y = box.sample(rng), box.sample(rng)
                df = np.asarray(f(x)) - f(y)
                dg = np.asarray(g(x)) - g(y)
                if np.linalg.norm(df) <= np.linalg.norm(dg):
                    assert float(df @ dg - dg @ dg) <= 1e-9


class TestRangeInclusion:
    def test_constant_inside(self):
        rep = check_range_inclusion(
            Constant([0.25, 0.75]), Identity(2), UNIT_BOX, UNIT_BOX, CFG
        )
        assert rep.verdict == "holds_on_samples"

    def test_translation_escapes(self):
        f = Affine(np.eye(2), [2.0, 0.0])
        rep = check_range_inclusion(f, Identity(2), UNIT_BOX, UNIT_BOX, CFG)
        assert rep.verdict == "violated"
        (x,) = rep.witness
        assert UNIT_BOX.distance(f(x)) > CFG.tol

    def test_doubling_covers_shifted_line(self):
        f = Affine([[1.0]], [0.5])
        g = Affine([[2.0]], [0.0])
        image = Box([0.0], [2.0])
        rep = check_range_inclusion(f, g, Box([0.0], [1.0]), image, CFG)
        assert rep.verdict == "holds_on_samples"


class TestFiberCondition:
    # the inversion recovers preimages only to ~1e-9, so compare at 1e-6
    FIBER_CFG = SampleConfig(seed=8, samples=48, tol=1e-6)

    def test_even_operator_passes(self):
        A = PointwiseNonlinear("square", 1)
        rep = check_fiber_condition(A, SQUARE, SYM_BOX, self.FIBER_CFG)
        assert rep.verdict == "holds_on_samples"

    def test_odd_operator_fails_with_witness(self):
        A = PointwiseNonlinear("cube", 1)
        rep = check_fiber_condition(A, SQUARE, SYM_BOX, self.FIBER_CFG)
        assert rep.verdict == "violated"
        x, y = rep.witness
        assert abs((SQUARE(x) - SQUARE(y)).item()) <= 1e-7
        assert abs((A(x) - A(y)).item()) > 1e-6

    def test_injective_inner_map_trivially_passes(self):
        A = PointwiseNonlinear("cube", 1)
        rep = check_fiber_condition(A, Affine([[2.0]], [1.0]), SYM_BOX, self.FIBER_CFG)
        assert rep.verdict == "holds_on_samples"


def test_report_to_dict_is_jsonable():
    import json

    rep = check_monotone_relative(Scale(-1.0, Identity(2)), Identity(2), UNIT_BOX, CFG)
    encoded = json.dumps(rep.to_dict())
    decoded = json.loads(encoded)
    assert decoded["property"] == "monotone_relative"
    assert decoded["verdict"] == "violated"
    assert len(decoded["witness"]) == 2
