"""Brain MRI tumour classification with segmentation features and a Mamdani fuzzy classifier."""

from ._core import (
    BtfuzzError,
    FisParseError,
    Fis,
    InvalidArgument,
    IoError,
    NoInternalMarker,
    adjust_intensity,
    binarize,
    compute_histogram,
    compute_metrics,
    confusion_matrix,
    default_fis,
    default_fis_text,
    generate_phantom,
    global_threshold_feature,
    load_fis,
    load_image,
    median_filter,
    morph_reconstruct,
    otsu_threshold,
    parse_fis,
    region_grow,
    region_stats,
    render_report,
    resize_with_aspect,
    run_pipeline,
    save_png,
    tumour_region,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
