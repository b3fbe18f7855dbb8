import math

import numpy as np
import pytest

from slumkit.errors import InvalidProbability, NonDifferentiablePoint
from slumkit.losses import (
    PROB_EPS,
    RoISample,
    box_loss,
    cls_loss,
    gradcheck,
    gradcheck_sample,
    mask_loss,
    random_sample,
    total_loss,
)

# frozen with 50-digit mpmath: -(ln .9 + ln .8 + ln .7 + ln .8) / 4
MASK_FIXTURE_VALUE = 0.22708064055624455
# frozen with 50-digit mpmath: log(exp(2) + exp(0.5)) - 0.5
CLS_FIXTURE_VALUE = 1.7014132779827524


def simple_sample(mask_probs, gt_mask, gt_class=1, num_classes=1):
    m = np.asarray(gt_mask).shape[0]
    probs = np.full((num_classes, m, m), 0.5)
    probs[gt_class - 1] = mask_probs
    return RoISample(
        class_logits=np.zeros(num_classes + 1),
        box_deltas=np.zeros((num_classes, 4)),
        box_targets=np.zeros(4),
        mask_probs=probs,
        gt_class=gt_class,
        gt_mask=np.asarray(gt_mask, dtype=np.float64),
    )


class TestMaskLoss:
    def test_perfect_prediction_near_zero(self):
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
        value, _ = mask_loss(simple_sample(y, y))
        # clamped-perfect: -log(1 - eps) per pixel
        assert 0.0 <= value <= 2 * PROB_EPS

    def test_uniform_half_is_ln2(self):
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
        value, _ = mask_loss(simple_sample(np.full((2, 2), 0.5), y))
        assert value == pytest.approx(math.log(2), abs=1e-9)

    def test_frozen_fixture(self):
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
        p = np.array([[0.9, 0.2], [0.3, 0.8]])
        value, _ = mask_loss(simple_sample(p, y))
        assert value == pytest.approx(MASK_FIXTURE_VALUE, abs=1e-12)

    def test_gradient_formula(self):
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
        p = np.array([[0.9, 0.2], [0.3, 0.8]])
        _, grad = mask_loss(simple_sample(p, y))
        expected = -(y / p - (1 - y) / (1 - p)) / 4
        assert np.allclose(grad[0], expected, atol=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            s = random_sample(rng, num_classes=2, mask_size=3, interior=False)
            value, _ = mask_loss(s)
            assert value >= 0.0

    def test_only_gt_channel_matters(self):
        rng = np.random.default_rng(5)
        s = random_sample(rng, num_classes=3, mask_size=4)
        value, grad = mask_loss(s)
        perturbed = s.mask_probs.copy()
        for ch in range(3):
            if ch != s.gt_class - 1:
                perturbed[ch] = rng.uniform(0.1, 0.9, size=(4, 4))
        s2 = RoISample(
            class_logits=s.class_logits,
            box_deltas=s.box_deltas,
            box_targets=s.box_targets,
            mask_probs=perturbed,
            gt_class=s.gt_class,
            gt_mask=s.gt_mask,
        )
        value2, grad2 = mask_loss(s2)
        assert value2 == value
        assert np.array_equal(grad2[s.gt_class - 1], grad[s.gt_class - 1])
        for ch in range(3):
            if ch != s.gt_class - 1:
                assert np.all(grad2[ch] == 0.0)

    def test_invalid_probability(self):
        y = np.zeros((2, 2))
        with pytest.raises(InvalidProbability):
            mask_loss(simple_sample(np.array([[1.2, 0.5], [0.5, 0.5]]), y))
        with pytest.raises(InvalidProbability):
            mask_loss(simple_sample(np.array([[-0.1, 0.5], [0.5, 0.5]]), y))


class TestClsLoss:
    def test_dominant_logit_drives_loss_to_zero(self):
        value, _ = cls_loss(np.array([0.0, 50.0]), 1)
        assert value < 1e-20

    def test_two_equal_logits(self):
        value, _ = cls_loss(np.array([1.3, 1.3]), 0)
        assert value == pytest.approx(math.log(2), abs=1e-12)

    def test_frozen_fixture(self):
        value, _ = cls_loss(np.array([2.0, 0.5]), 1)
        assert value == pytest.approx(CLS_FIXTURE_VALUE, abs=1e-12)

    def test_gradient_is_softmax_minus_onehot(self):
        logits = np.array([2.0, 0.5, -1.0])
        _, grad = cls_loss(logits, 1)
        e = np.exp(logits - logits.max())
        softmax = e / e.sum()
        softmax[1] -= 1.0
        assert np.allclose(grad, softmax, atol=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            logits = rng.standard_normal(4)
            v1, g1 = cls_loss(logits, 2)
            v2, g2 = cls_loss(logits + 123.456, 2)
            assert v1 == pytest.approx(v2, rel=1e-12, abs=1e-12)
            assert np.allclose(g1, g2, atol=1e-12)

    def test_invalid_class(self):
        with pytest.raises(IndexError):
            cls_loss(np.array([0.0, 1.0]), 5)


class TestBoxLoss:
    def test_exact_match(self):
        value, grad = box_loss(np.ones(4), np.ones(4))
        assert value == 0.0
        assert np.all(grad == 0.0)

    def test_quadratic_branch(self):
        value, grad = box_loss(np.array([0.5, 0, 0, 0]), np.zeros(4))
        assert value == pytest.approx(0.125)
        assert grad[0] == pytest.approx(0.5)

    def test_linear_branch(self):
        value, grad = box_loss(np.array([2.0, 0, 0, 0]), np.zeros(4))
        assert value == pytest.approx(1.5)
        assert grad[0] == 1.0

    def test_sum_over_coordinates(self):
        value, _ = box_loss(np.array([0.5, -0.5, 2.0, -2.0]), np.zeros(4))
        assert value == pytest.approx(0.125 + 0.125 + 1.5 + 1.5)


class TestTotalLoss:
    def test_perfect_sample_near_zero(self):
        y = np.array([[1.0, 0.0], [0.0, 1.0]])
        s = RoISample(
            class_logits=np.array([0.0, 60.0]),
            box_deltas=np.zeros((1, 4)),
            box_targets=np.zeros(4),
            mask_probs=y[None, :, :],
            gt_class=1,
            gt_mask=y,
        )
        breakdown = total_loss(s)
        assert breakdown.total < 1e-6

    def test_total_is_exact_sum(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            s = random_sample(rng, num_classes=2, mask_size=3)
            b = total_loss(s)
            assert b.total == b.l_cls + b.l_box + b.l_mask

    def test_components_match_kernels(self):
        rng = np.random.default_rng(13)
        s = random_sample(rng, num_classes=2, mask_size=3)
        b = total_loss(s)
        assert b.l_cls == cls_loss(s.class_logits, s.gt_class)[0]
        assert b.l_box == box_loss(s.box_deltas[s.gt_class - 1], s.box_targets)[0]
        assert b.l_mask == mask_loss(s)[0]


class TestGradcheck:
    def test_mask_loss_gradient(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            s = random_sample(rng, num_classes=2, mask_size=3)
            assert gradcheck_sample("mask", s) <= 1e-5

    def test_cls_loss_gradient(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            s = random_sample(rng, num_classes=3, mask_size=2)
            assert gradcheck_sample("cls", s) <= 1e-5

    def test_box_loss_gradient(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            s = random_sample(rng, num_classes=2, mask_size=2)
            assert gradcheck_sample("box", s) <= 1e-5

    def test_box_linear_branch_is_machine_exact(self):
        s = RoISample(
            class_logits=np.zeros(2),
            box_deltas=np.array([[3.0, 0.2, -0.3, 0.4]]),
            box_targets=np.zeros(4),
            mask_probs=np.full((1, 2, 2), 0.5),
            gt_class=1,
            gt_mask=np.zeros((2, 2)),
        )
        pred = s.box_deltas[0]

        def fn(x):
            return box_loss(x, s.box_targets)

        # isolate the linear coordinate
        err = abs(
            box_loss(pred, s.box_targets)[1][0]
            - (fn(pred + np.array([1e-5, 0, 0, 0]))[0]
               - fn(pred - np.array([1e-5, 0, 0, 0]))[0]) / 2e-5
        )
        assert err <= 1e-9

    def test_near_kink_rejected(self):
        s = RoISample(
            class_logits=np.zeros(2),
            box_deltas=np.array([[1.0 + 1e-6, 0.0, 0.0, 0.0]]),
            box_targets=np.zeros(4),
            mask_probs=np.full((1, 2, 2), 0.5),
            gt_class=1,
            gt_mask=np.zeros((2, 2)),
        )
        with pytest.raises(NonDifferentiablePoint):
            gradcheck_sample("box", s)

    def test_near_clamp_rejected(self):
        probs = np.full((1, 2, 2), 0.5)
        probs[0, 0, 0] = PROB_EPS + 1e-6
        s = RoISample(
            class_logits=np.zeros(2),
            box_deltas=np.zeros((1, 4)),
            box_targets=np.zeros(4),
            mask_probs=probs,
            gt_class=1,
            gt_mask=np.zeros((2, 2)),
        )
        with pytest.raises(NonDifferentiablePoint):
            gradcheck_sample("mask", s)

    def test_generic_gradcheck_on_quadratic(self):
        def fn(x):
            return float(np.sum(x * x)), 2 * x

        assert gradcheck(fn, np.array([1.0, -2.0, 3.0])) <= 1e-8


class TestRoISampleValidation:
    def test_bad_gt_class(self):
        with pytest.raises(IndexError):
            RoISample(
                class_logits=np.zeros(2),
                box_deltas=np.zeros((1, 4)),
                box_targets=np.zeros(4),
                mask_probs=np.full((1, 2, 2), 0.5),
                gt_class=2,
                gt_mask=np.zeros((2, 2)),
            )

    def test_bad_logit_length(self):
        with pytest.raises(ValueError):
            RoISample(
                class_logits=np.zeros(3),
                box_deltas=np.zeros((1, 4)),
                box_targets=np.zeros(4),
                mask_probs=np.full((1, 2, 2), 0.5),
                gt_class=1,
                gt_mask=np.zeros((2, 2)),
            )
