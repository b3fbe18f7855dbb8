"""Numeric kernels for the detection multi-task loss, with hand-derived
gradients.

All three kernels are pure numpy functions returning (value, gradient) so
the gradients can be validated against central finite differences; no
autodiff framework is involved. The total loss is the plain unweighted sum
of the classification, box-regression, and mask terms.

Per-region tensors follow the usual layout for a detector with K foreground
classes: class logits of length K+1 (index 0 is background), per-class box
deltas of shape (K, 4), and per-class mask probabilities of shape (K, m, m).
The ground-truth class index k in 1..K selects the row/channel the box and
mask losses read; every other channel is ignored and receives zero gradient.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidProbability, NonDifferentiablePoint

PROB_EPS = 1e-7  # probabilities are clamped to [PROB_EPS, 1 - PROB_EPS]

__all__ = [
    "RoISample",
    "LossBreakdown",
    "mask_loss",
    "cls_loss",
    "box_loss",
    "total_loss",
    "gradcheck",
    "gradcheck_sample",
    "random_sample",
    "PROB_EPS",
]


@dataclass
class RoISample:
    """One region's predicted tensors plus its ground truth."""

    class_logits: np.ndarray   # (K+1,)
    box_deltas: np.ndarray     # (K, 4) predicted deltas per class
    box_targets: np.ndarray    # (4,) target deltas for the GT class
    mask_probs: np.ndarray     # (K, m, m) in [0, 1]
    gt_class: int              # in 1..K
    gt_mask: np.ndarray        # (m, m) binary

    def __post_init__(self) -> None:
        self.class_logits = np.asarray(self.class_logits, dtype=np.float64)
        self.box_deltas = np.asarray(self.box_deltas, dtype=np.float64)
        self.box_targets = np.asarray(self.box_targets, dtype=np.float64)
        self.mask_probs = np.asarray(self.mask_probs, dtype=np.float64)
        self.gt_mask = np.asarray(self.gt_mask, dtype=np.float64)
        k_classes = self.mask_probs.shape[0]
        if self.class_logits.shape != (k_classes + 1,):
            raise ValueError(
                f"class_logits must have length K+1={k_classes + 1}, "
                f"got {self.class_logits.shape}"
            )
        if self.box_deltas.shape != (k_classes, 4) or self.box_targets.shape != (4,):
            raise ValueError("box_deltas must be (K, 4) and box_targets (4,)")
        m = self.mask_probs.shape[1]
        if self.mask_probs.shape[2] != m or m == 0:
            raise ValueError(f"mask_probs must be (K, m, m), got {self.mask_probs.shape}")
        if self.gt_mask.shape != (m, m):
            raise ValueError(f"gt_mask must be ({m}, {m}), got {self.gt_mask.shape}")
        if not 1 <= self.gt_class <= k_classes:
            raise IndexError(f"gt_class {self.gt_class} outside 1..{k_classes}")

    @property
    def num_classes(self) -> int:
        return self.mask_probs.shape[0]

    @property
    def mask_size(self) -> int:
        return self.mask_probs.shape[1]


@dataclass
class LossBreakdown:
    l_cls: float
    l_box: float
    l_mask: float
    total: float


def mask_loss(sample: RoISample) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy over the GT-class mask channel.

    Probabilities are clamped to [PROB_EPS, 1 - PROB_EPS] before the logs.
    The returned gradient has the full (K, m, m) shape with zeros everywhere
    except channel gt_class - 1, where d/dp = -(y/p - (1-y)/(1-p)) / m^2
    evaluated at the clamped probabilities.
    """
    probs = sample.mask_probs
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise InvalidProbability("mask probabilities outside [0, 1]")
    k = sample.gt_class - 1
    p = np.clip(probs[k], PROB_EPS, 1.0 - PROB_EPS)
    y = sample.gt_mask
    m2 = p.size
    value = float(-np.sum(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)) / m2)
    grad = np.zeros_like(probs)
    grad[k] = -(y / p - (1.0 - y) / (1.0 - p)) / m2
    return value, grad


def cls_loss(class_logits: np.ndarray, gt_class: int) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy: -log softmax(logits)[gt_class].

    Gradient is softmax(logits) - one_hot(gt_class). Invariant under adding
    a constant to all logits.
    """
    logits = np.asarray(class_logits, dtype=np.float64)
    if not 0 <= gt_class < logits.shape[0]:
        raise IndexError(f"gt_class {gt_class} outside 0..{logits.shape[0] - 1}")
    shifted = logits - logits.max()
    log_z = np.log(np.sum(np.exp(shifted)))
    value = float(log_z - shifted[gt_class])
    softmax = np.exp(shifted - log_z)
    grad = softmax.copy()
    grad[gt_class] -= 1.0
    return value, grad


def box_loss(pred_deltas: np.ndarray, target_deltas: np.ndarray) -> tuple[float, np.ndarray]:
    """Smooth-L1 over the 4 box delta coordinates.

    Per coordinate with d = pred - target: 0.5*d^2 when |d| < 1, else
    |d| - 0.5; gradient d or sign(d) respectively.
    """
    pred = np.asarray(pred_deltas, dtype=np.float64).reshape(4)
    target = np.asarray(target_deltas, dtype=np.float64).reshape(4)
    d = pred - target
    quad = np.abs(d) < 1.0
    value = float(np.sum(np.where(quad, 0.5 * d * d, np.abs(d) - 0.5)))
    grad = np.where(quad, d, np.sign(d))
    return value, grad


def total_loss(sample: RoISample) -> LossBreakdown:
    """Sum of the three kernels; total is exactly l_cls + l_box + l_mask."""
    l_cls, _ = cls_loss(sample.class_logits, sample.gt_class)
    l_box, _ = box_loss(sample.box_deltas[sample.gt_class - 1], sample.box_targets)
    l_mask, _ = mask_loss(sample)
    return LossBreakdown(
        l_cls=l_cls, l_box=l_box, l_mask=l_mask, total=l_cls + l_box + l_mask
    )


def gradcheck(
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x: np.ndarray,
    step: float = 1e-5,
) -> float:
    """Compare fn's analytic gradient to central finite differences.

    Returns max over inputs of |analytic - numeric| / max(1, |analytic|).
    """
    x = np.asarray(x, dtype=np.float64)
    _, grad = fn(x)
    grad = np.asarray(grad, dtype=np.float64)
    worst = 0.0
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        f_plus, _ = fn(x)
        flat[i] = orig - step
        f_minus, _ = fn(x)
        flat[i] = orig
        numeric = (f_plus - f_minus) / (2.0 * step)
        rel = abs(gflat[i] - numeric) / max(1.0, abs(gflat[i]))
        worst = max(worst, rel)
    return worst


def gradcheck_sample(
    loss_name: str, sample: RoISample, step: float = 1e-5
) -> float:
    """Run gradcheck for one kernel on one sample.

    loss_name is "mask", "cls", or "box". Raises NonDifferentiablePoint when
    the sample sits within 10*step of a clamp boundary (mask) or of the
    smooth-L1 kink at |d| = 1 (box), where finite differences are invalid.
    """
    margin = 10.0 * step
    if loss_name == "mask":
        k = sample.gt_class - 1
        p = sample.mask_probs[k]
        if np.any(p < PROB_EPS + margin) or np.any(p > 1.0 - PROB_EPS - margin):
            raise NonDifferentiablePoint("mask probabilities too close to clamp")

        def fn(x):
            probs = sample.mask_probs.copy()
            probs[k] = x
            patched = RoISample(
                class_logits=sample.class_logits,
                box_deltas=sample.box_deltas,
                box_targets=sample.box_targets,
                mask_probs=probs,
                gt_class=sample.gt_class,
                gt_mask=sample.gt_mask,
            )
            value, grad = mask_loss(patched)
            return value, grad[k]

        return gradcheck(fn, sample.mask_probs[k].copy(), step)
    if loss_name == "cls":
        return gradcheck(
            lambda x: cls_loss(x, sample.gt_class),
            sample.class_logits.copy(),
            step,
        )
    if loss_name == "box":
        pred = sample.box_deltas[sample.gt_class - 1]
        d = pred - sample.box_targets
        if np.any(np.abs(np.abs(d) - 1.0) <= margin):
            raise NonDifferentiablePoint("box delta too close to the |d|=1 kink")
        return gradcheck(
            lambda x: box_loss(x, sample.box_targets), pred.copy(), step
        )
    raise ValueError(f"unknown loss {loss_name!r}")


def random_sample(
    rng: np.random.Generator,
    num_classes: int = 1,
    mask_size: int = 4,
    interior: bool = True,
) -> RoISample:
    """Draw a random RoISample; interior=True keeps it differentiable
    (probabilities away from the clamp, box deltas away from the kink)."""
    if interior:
        probs = rng.uniform(0.05, 0.95, size=(num_classes, mask_size, mask_size))
        # |d| in [0, 0.8] or [1.2, 2.0]: both branches, never near the kink
        mag = rng.uniform(0.0, 0.8, size=(num_classes, 4))
        mag = np.where(rng.random((num_classes, 4)) < 0.5, mag, mag + 1.2)
        deltas = mag * rng.choice([-1.0, 1.0], size=(num_classes, 4))
    else:
        probs = rng.uniform(0.0, 1.0, size=(num_classes, mask_size, mask_size))
        deltas = rng.uniform(-3.0, 3.0, size=(num_classes, 4))
    return RoISample(
        class_logits=rng.standard_normal(num_classes + 1),
        box_deltas=deltas,
        box_targets=np.zeros(4),
        mask_probs=probs,
        gt_class=int(rng.integers(1, num_classes + 1)),
        gt_mask=(rng.random((mask_size, mask_size)) < 0.5).astype(np.float64),
    )
