"""slumkit: instance-mask geometry, evaluation, and change monitoring for
settlement mapping from satellite imagery.

The toolkit covers the desk-side half of a mapping pipeline: polygon
annotations and binary rasters, multi-task detection loss kernels with
verified gradients, IoU / average-precision evaluation of externally produced
instance predictions, mask-subtraction change detection between two capture
dates, and a seeded synthetic-scene generator for end-to-end verification.
"""

from .change import (
    ChangeRaster,
    ChangeResult,
    ChangeStatus,
    detect_change,
    scene_union_mask,
    write_change_map_png,
)
from .dataset import (
    Dataset,
    Detection,
    InstanceAnnotation,
    Scale,
    Scene,
    gt_masks,
    load_dataset,
    load_predictions,
    save_dataset,
    save_predictions,
)
from .losses import (
    LossBreakdown,
    RoISample,
    box_loss,
    cls_loss,
    gradcheck,
    gradcheck_sample,
    mask_loss,
    total_loss,
)
from .metrics import (
    EvalReport,
    MatchResult,
    PrCurve,
    average_precision,
    evaluate,
    match_detections,
    pairwise_iou,
    pr_curve,
    union_iou,
)
from .raster import (
    PixelBox,
    Polygon,
    RleMask,
    bounding_box,
    mask_area,
    mask_combine,
    polygon_area,
    polygon_perimeter,
    rasterize_polygon,
    rle_decode,
    rle_encode,
)
from .synth import SynthConfig, generate_pair, generate_scene, write_corpus
from .transforms import (
    AugmentConfig,
    ColorJitter,
    GeomTransform,
    ResizePadResult,
    apply_color,
    apply_geometric,
    augment,
    resize_pad,
)

__version__ = "0.1.0"
