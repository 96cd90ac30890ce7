import csv
import math

import numpy as np
import pytest

import btfuzz


def disc(h, w, radius, inside=0.9, outside=0.2):
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.full((h, w), outside)
    img[(yy - h // 2) ** 2 + (xx - w // 2) ** 2 <= radius * radius] = inside
    return img


def test_resize_letterbox():
    out = btfuzz.resize_with_aspect(np.full((50, 100), 0.5), 64, 64)
    assert out.shape == (64, 64)
    assert np.all(out[:16] == 0.0) and np.all(out[48:] == 0.0)
    assert np.allclose(out[16:48], 0.5)


def test_median_and_binarize():
    img = np.zeros((3, 3))
    img[1, 1] = 1.0
    assert btfuzz.median_filter(img)[1, 1] == 0.0
    m = btfuzz.binarize(np.array([[0.66, 0.65]]))
    assert m.dtype == np.bool_
    assert m.tolist() == [[True, False]]


def test_otsu_plateau_start():
    bins = np.zeros(256, dtype=np.uint64)
    bins[50] = 50
    bins[200] = 50
    assert btfuzz.otsu_threshold(bins) == pytest.approx(50 / 255)
    with pytest.raises(btfuzz.InvalidArgument):
        btfuzz.otsu_threshold(np.zeros(10, dtype=np.uint64))


def test_histogram_counts_pixels():
    img = np.random.default_rng(0).random((20, 30))
    h = btfuzz.compute_histogram(img)
    assert h.shape == (256,) and int(h.sum()) == 600


def test_reconstruction_bounded_by_mask():
    rng = np.random.default_rng(1)
    mask = rng.random((16, 16))
    marker = np.minimum(mask, rng.random((16, 16)))
    rec = btfuzz.morph_reconstruct(marker, mask, 1)
    assert np.all(rec <= mask) and np.all(rec >= marker)


def test_region_grow_block():
    img = np.zeros((7, 7))
    img[2:5, 2:5] = 1.0
    mask = btfuzz.region_grow(img, [(3, 3)], 0.0)
    assert mask.sum() == 9 and mask[2:5, 2:5].all()


@pytest.mark.parametrize("method", ["watershed", "region-growing"])
def test_tumour_region_on_disc(method):
    r = btfuzz.tumour_region(btfuzz.median_filter(disc(64, 64, 12)), method=method)
    expected = math.pi * 144 / 4096
    assert r["size_fraction"] == pytest.approx(expected, rel=0.2)
    assert r["mask"].shape == (64, 64)
    assert (r["labels"] is not None) == (method == "watershed")


def test_watershed_without_marker_raises():
    with pytest.raises(btfuzz.NoInternalMarker):
        btfuzz.tumour_region(disc(64, 64, 2), method="watershed")


def test_default_fis_and_classify():
    fis = btfuzz.default_fis()
    assert fis.rule_count == 9 and fis.resolution == 1001
    assert fis.input_names == ["size", "threshold"]
    assert fis.output_name == "tumour_type"
    crisp, label, none_fired = fis.classify(0.35, 0.5)
    assert label in ("tumour", "normal") and not none_fired
    assert fis.label_for_crisp(0.5) == "tumour"
    again = btfuzz.parse_fis(fis.serialize())
    assert again.classify(0.35, 0.5) == (crisp, label, none_fired)


def test_fis_parse_error():
    with pytest.raises(btfuzz.FisParseError):
        btfuzz.parse_fis(btfuzz.default_fis_text() + "rule IF size IS huge THEN tumour_type IS tumour\n")


def test_metrics():
    m = btfuzz.compute_metrics(30, 1, 1, 19)
    assert round(m["accuracy"], 2) == 96.08 and round(m["f1"], 2) == 96.77
    assert btfuzz.compute_metrics(0, 0, 0, 5)["precision"] is None
    assert btfuzz.confusion_matrix(["tumour", "normal"], ["tumour", "non_tumour"]) == (1, 0, 0, 1)
    report = btfuzz.render_report({"watershed": (2, 1, 1, 6)}, "csv")
    assert "80.00" in report and "66.67" in report


def test_pipeline_on_phantoms(tmp_path):
    images = btfuzz.generate_phantom(count_per_class=5, width=64, height=64, seed=7)
    assert len(images) == 10
    rows = []
    for i, (img, label) in enumerate(images):
        name = f"img_{i:02d}.png"
        btfuzz.save_png(img, str(tmp_path / name))
        rows.append((name, label, "test"))
    manifest = tmp_path / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "label", "split"])
        w.writerows(rows)
    loaded = btfuzz.load_image(str(tmp_path / rows[0][0]))
    assert np.max(np.abs(loaded - images[0][0])) <= 1 / 255 + 1e-12

    a, metrics = btfuzz.run_pipeline(str(manifest), workers=1, width=64, height=64)
    b, _ = btfuzz.run_pipeline(str(manifest), workers=4, width=64, height=64)
    assert a == b
    assert len(a) == 10 and all(r["label"] is not None for r in a)
    (key,) = metrics
    assert metrics[key]["accuracy"] >= 90.0

    with pytest.raises(btfuzz.IoError):
        btfuzz.run_pipeline(str(manifest), fis=str(tmp_path / "missing.fis"))
