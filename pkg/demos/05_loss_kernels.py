"""The multi-task detection loss as plain numeric kernels: classification
cross-entropy, smooth-L1 box regression, and per-class binary cross-entropy
mask loss, each with an analytic gradient checked against finite differences.

Run:  python3 demos/05_loss_kernels.py
"""
import numpy as np

from slumkit import RoISample, mask_loss, total_loss
from slumkit.losses import gradcheck_sample, random_sample

# A region with 2 foreground classes and a 4x4 mask grid.
rng = np.random.default_rng(1)
sample = RoISample(
    class_logits=np.array([0.2, 2.1, -0.5]),
    box_deltas=rng.uniform(-0.5, 0.5, size=(2, 4)),
    box_targets=np.zeros(4),
    mask_probs=rng.uniform(0.2, 0.8, size=(2, 4, 4)),
    gt_class=1,
    gt_mask=(rng.random((4, 4)) < 0.5).astype(float),
)

breakdown = total_loss(sample)
print(f"classification: {breakdown.l_cls:.6f}")
print(f"box regression: {breakdown.l_box:.6f}")
print(f"mask:           {breakdown.l_mask:.6f}")
print(f"total:          {breakdown.total:.6f}")

# The mask term reads only the ground-truth class channel.
other = sample.mask_probs.copy()
other[1] = 0.99
same_value, _ = mask_loss(RoISample(
    class_logits=sample.class_logits, box_deltas=sample.box_deltas,
    box_targets=sample.box_targets, mask_probs=other,
    gt_class=1, gt_mask=sample.gt_mask,
))
assert same_value == breakdown.l_mask
print("perturbing a non-ground-truth mask channel leaves the loss unchanged")

# An indifferent mask prediction costs ln 2 per pixel.
flat, _ = mask_loss(RoISample(
    class_logits=np.zeros(3), box_deltas=np.zeros((2, 4)),
    box_targets=np.zeros(4), mask_probs=np.full((2, 4, 4), 0.5),
    gt_class=1, gt_mask=sample.gt_mask,
))
print(f"all-0.5 mask loss: {flat:.6f} (ln 2 = {np.log(2):.6f})")

# Every analytic gradient agrees with central finite differences.
print(f"{'kernel':<6} {'max rel err over 20 random samples':>36}")
for name in ("mask", "cls", "box"):
    worst = max(
        gradcheck_sample(name, random_sample(rng, num_classes=2, mask_size=4))
        for _ in range(20)
    )
    print(f"{name:<6} {worst:>36.3e}")
