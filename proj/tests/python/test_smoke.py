import json
import math

import numpy as np
import pytest

import docrobust as dr


def test_perturbation_names_round_trip():
    for p in range(1, 13):
        code = dr.perturbation_code(p)
        assert dr.parse_perturbation(code) == p
        assert dr.parse_perturbation(dr.perturbation_name(p)) == p


def test_unknown_perturbation_raises_parameter_error():
    with pytest.raises(dr.ParameterError):
        dr.parse_perturbation("P13")
    assert issubclass(dr.ParameterError, dr.Error)


def test_severity_params_are_json():
    params = dr.severity_params("P4", 2)
    assert isinstance(params, dict) and params


def test_apply_is_deterministic_and_keeps_shape():
    page = dr.synth_page(7, 0, 200, 260)
    anns = [{"id": 1, "category_id": 1, "bbox": [20, 30, 80, 40]}]
    img1, out1, prov1 = dr.apply(page, anns, "P1", 2, seed=5, page_id="1")
    img2, out2, prov2 = dr.apply(page, anns, "P1", 2, seed=5, page_id="1")
    assert img1.dtype == np.uint8 and img1.ndim == 2
    assert np.array_equal(img1, img2)
    assert out1 == out2 and prov1 == prov2
    assert len(out1) == 1 and len(out1[0]["bbox"]) == 4


def test_iqa_identity():
    page = dr.synth_page(3, 1, 200, 200)
    assert dr.ms_ssim(page, page) == pytest.approx(100.0)
    assert dr.cw_ssim(page, page) == pytest.approx(100.0)


def test_iou_and_map():
    assert dr.iou([0, 0, 10, 10], [5, 0, 10, 10]) == pytest.approx(1 / 3)
    gts = [(1, 1, [0, 0, 10, 10]), (1, 2, [20, 20, 10, 10])]
    dets = [(1, 1, [0, 0, 10, 10], 0.9), (1, 2, [20, 20, 10, 10], 0.8)]
    res = dr.mean_average_precision(gts, dets)
    assert res["map"] == pytest.approx(100.0)


def test_robustness_formulas():
    assert dr.degradation(70.0) == pytest.approx(30.0)
    rds = [100.0, 80.0, 120.0] * 4
    assert math.isfinite(dr.mrd(rds))
    assert dr.mrd(rds) == pytest.approx(100.0)
    with pytest.raises(dr.ParameterError):
        dr.mrd([100.0])


def test_synthetic_dataset_loads(tmp_path):
    dr.write_synthetic_dataset(str(tmp_path), 42, 2, 200, 240)
    coco = dr.load_coco(str(tmp_path))
    assert len(coco["images"]) == 2
    assert coco["annotations"]
    json.dumps(coco)


def test_missing_dataset_raises_io_error(tmp_path):
    with pytest.raises(dr.IoError):
        dr.load_coco(str(tmp_path / "nope"))
