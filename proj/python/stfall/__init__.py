from stfall._core import (
    EvalError,
    InputError,
    IoError,
    SpecError,
    __version__,
    evaluate,
    gen_dataset,
    preprocess_frames,
    roc_auc,
    score,
    shape_report,
    train,
    window_labels,
)

__all__ = [
    "EvalError",
    "InputError",
    "IoError",
    "SpecError",
    "__version__",
    "evaluate",
    "gen_dataset",
    "preprocess_frames",
    "roc_auc",
    "score",
    "shape_report",
    "train",
    "window_labels",
]
