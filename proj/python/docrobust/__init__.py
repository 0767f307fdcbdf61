"""Python access to the docrobust core: perturbations, IQA, mAP and robustness metrics."""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import _core
from ._core import (
    Error,
    EvaluationError,
    IoError,
    ParameterError,
    ResourceError,
    TransformError,
    ValidationError,
    cw_ssim,
    degradation,
    iou,
    mpe,
    mpe_level,
    mrd,
    ms_ssim,
    parse_perturbation,
    perturbation_code,
    perturbation_name,
    rd,
    synth_page,
    write_synthetic_dataset,
)

__version__ = _core.__version__

__all__ = [
    "Error",
    "EvaluationError",
    "IoError",
    "ParameterError",
    "ResourceError",
    "TransformError",
    "ValidationError",
    "apply",
    "cw_ssim",
    "degradation",
    "iou",
    "load_coco",
    "mean_average_precision",
    "mpe",
    "mpe_level",
    "mrd",
    "ms_ssim",
    "parse_perturbation",
    "perturbation_code",
    "perturbation_name",
    "rd",
    "severity_params",
    "synth_page",
    "write_synthetic_dataset",
]


def _pid(perturbation: int | str) -> int:
    return parse_perturbation(perturbation) if isinstance(perturbation, str) else int(perturbation)


def severity_params(perturbation: int | str, level: int, overrides: Mapping[str, float] | None = None) -> dict:
    """Severity parameters of one perturbation level, with optional overrides."""
    return json.loads(_core.severity_params_json(_pid(perturbation), level, dict(overrides or {})))


def apply(
    image: np.ndarray,
    annotations: Sequence[Mapping[str, Any]],
    perturbation: int | str,
    level: int,
    seed: int = 42,
    page_id: str = "0",
    overrides: Mapping[str, float] | None = None,
) -> tuple[np.ndarray, list[dict], dict]:
    """Perturb one page.

    `annotations` are COCO-style dicts with at least id, category_id and bbox.
    Returns the perturbed image, the transformed annotations and the
    provenance record.
    """
    img, anns, prov = _core.apply_json(
        np.ascontiguousarray(image, dtype=np.uint8),
        json.dumps(list(annotations)),
        page_id,
        _pid(perturbation),
        level,
        seed,
        dict(overrides or {}),
    )
    return img, json.loads(anns), json.loads(prov)


def mean_average_precision(
    ground_truths: Iterable[tuple[int, int, Sequence[float]]],
    detections: Iterable[tuple[int, int, Sequence[float], float]],
) -> dict:
    """COCO-style mAP; tuples are (image_id, category_id, [x, y, w, h][, score])."""
    return json.loads(_core.mean_average_precision_json(list(ground_truths), list(detections)))


def load_coco(path: str) -> dict:
    """Validated COCO dataset as a plain dict."""
    return json.loads(_core.load_coco_json(path))
