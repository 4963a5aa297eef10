"""Image/label-map validation, conversions, file round-trips, and config."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from visrep.config import PipelineConfig, load_config, save_config
from visrep.image import (
    MAX_LABEL,
    canonicalize_labels,
    check_image,
    check_label_map,
    load_image,
    load_label_map,
    rgb_to_lab,
    save_image,
    save_label_map,
    to_gray,
)


class TestCheckImage:
    def test_uint8_gray_becomes_float64(self):
        img = np.arange(12, dtype=np.uint8).reshape(3, 4)
        out = check_image(img)
        assert out.dtype == np.float64
        assert np.array_equal(out, img.astype(np.float64))

    def test_color_passes(self):
        out = check_image(np.zeros((4, 5, 3), dtype=np.uint8))
        assert out.shape == (4, 5, 3)

    def test_single_channel_axis_squeezed(self):
        out = check_image(np.zeros((4, 5, 1)))
        assert out.shape == (4, 5)

    @pytest.mark.parametrize(
        "bad",
        [
            np.zeros(7),
            np.zeros((2, 2, 4)),
            np.zeros((0, 3)),
            np.full((2, 2), -1.0),
            np.full((2, 2), 256.0),
            np.full((2, 2), np.nan),
        ],
    )
    def test_rejects_bad_arrays(self, bad):
        with pytest.raises(ValueError):
            check_image(bad)

    def test_rejects_non_numeric(self):
        with pytest.raises(ValueError):
            check_image(np.array([["a", "b"], ["c", "d"]]))


class TestCheckLabelMap:
    def test_accepts_integer_grid(self):
        out = check_label_map(np.array([[0, 1], [2, 3]], dtype=np.uint16))
        assert out.dtype == np.int64

    def test_integral_floats_accepted(self):
        out = check_label_map(np.array([[0.0, 2.0]]))
        assert np.array_equal(out, [[0, 2]])

    @pytest.mark.parametrize(
        "bad", [np.zeros((2, 2, 2), dtype=int), np.array([[0.5]]), np.array([[-1]])]
    )
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            check_label_map(bad)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            check_label_map(np.zeros((2, 3), dtype=int), shape=(3, 2))


class TestConversions:
    def test_to_gray_luma_weights(self):
        red = np.zeros((1, 1, 3))
        red[..., 0] = 255.0
        assert to_gray(red)[0, 0] == pytest.approx(0.299 * 255)

    def test_to_gray_passthrough_on_gray(self):
        img = np.random.default_rng(0).uniform(0, 255, (5, 5))
        assert np.array_equal(to_gray(img), img)

    def test_lab_white_and_black(self):
        white = np.full((1, 1, 3), 255.0)
        lab = rgb_to_lab(white)
        assert lab[0, 0, 0] == pytest.approx(100.0, abs=1e-3)
        assert lab[0, 0, 1] == pytest.approx(0.0, abs=1e-3)
        assert lab[0, 0, 2] == pytest.approx(0.0, abs=1e-3)
        assert rgb_to_lab(np.zeros((1, 1, 3)))[0, 0, 0] == pytest.approx(0.0, abs=1e-6)

    def test_lab_rejects_gray(self):
        with pytest.raises(ValueError):
            rgb_to_lab(np.zeros((3, 3)))

    def test_canonicalize_compacts_and_orders(self):
        labels = np.array([[0, 9], [5, 9]])
        out = canonicalize_labels(labels)
        assert np.array_equal(out, [[0, 2], [1, 2]])
        assert np.array_equal(canonicalize_labels(out), out)


class TestImageFiles:
    def test_gray_round_trip(self, tmp_path):
        img = np.random.default_rng(1).integers(0, 256, (6, 7), dtype=np.uint8)
        path = tmp_path / "g.png"
        save_image(img, path)
        assert np.array_equal(load_image(path), img)

    def test_color_round_trip(self, tmp_path):
        img = np.random.default_rng(2).integers(0, 256, (6, 7, 3), dtype=np.uint8)
        path = tmp_path / "c.png"
        save_image(img, path)
        assert np.array_equal(load_image(path), img)

    def test_missing_file_names_path(self, tmp_path):
        path = tmp_path / "nope.png"
        with pytest.raises(FileNotFoundError, match="nope.png"):
            load_image(path)

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.png"
        path.write_bytes(b"this is not an image")
        with pytest.raises(ValueError, match="bad.png"):
            load_image(path)


class TestLabelMapFiles:
    def test_round_trip_with_max_label(self, tmp_path):
        labels = np.array([[0, 1], [300, MAX_LABEL]])
        path = tmp_path / "m.png"
        save_label_map(labels, path)
        assert np.array_equal(load_label_map(path), labels)

    def test_overflow_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="16-bit"):
            save_label_map(np.array([[MAX_LABEL + 1]]), tmp_path / "m.png")

    def test_color_png_rejected(self, tmp_path):
        path = tmp_path / "c.png"
        save_image(np.zeros((3, 3, 3)), path)
        with pytest.raises(ValueError, match="single-channel"):
            load_label_map(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_label_map(tmp_path / "missing.png")


class TestConfig:
    def test_defaults_match_reference_setting(self):
        cfg = PipelineConfig()
        assert cfg.keypoint_budget == 9000
        assert cfg.knn == 15
        assert cfg.daisy_radius == 30
        assert cfg.vote_window == 11
        assert cfg.superpixel_count == 150
        assert cfg.tau_mode == "relative"
        assert cfg.tau == 0.05

    def test_file_round_trip(self, tmp_path):
        cfg = PipelineConfig(knn=7, tau_mode="absolute", tau=3.5, alpha=1.25)
        path = tmp_path / "pipeline.ini"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_missing_keys_keep_defaults(self, tmp_path):
        path = tmp_path / "partial.ini"
        path.write_text("[matching]\nknn = 5\n")
        cfg = load_config(path)
        assert cfg.knn == 5
        assert cfg.keypoint_budget == 9000

    def test_unknown_section_and_key_fail(self, tmp_path):
        bad_section = tmp_path / "s.ini"
        bad_section.write_text("[nonsense]\nx = 1\n")
        with pytest.raises(ValueError, match="unknown config section"):
            load_config(bad_section)
        bad_key = tmp_path / "k.ini"
        bad_key.write_text("[matching]\nknnn = 5\n")
        with pytest.raises(ValueError, match="unknown config key"):
            load_config(bad_key)

    def test_bad_value_fails(self, tmp_path):
        path = tmp_path / "v.ini"
        path.write_text("[matching]\nknn = seven\n")
        with pytest.raises(ValueError, match="bad value"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "none.ini")

    def test_all_violations_reported_at_once(self):
        with pytest.raises(ValueError) as err:
            PipelineConfig(knn=0, vote_window=4, tau=-1.0)
        msg = str(err.value)
        assert "knn" in msg and "vote_window" in msg and "tau" in msg

    def test_override_validation(self):
        cfg = PipelineConfig()
        assert cfg.with_overrides(knn=3).knn == 3
        with pytest.raises(ValueError):
            cfg.with_overrides(superpixel_count=1)

    @settings(max_examples=25, deadline=None)
    @given(
        budget=st.integers(1, 20000),
        knn=st.integers(1, 64),
        window=st.integers(1, 15).map(lambda n: 2 * n + 1),
        tau=st.floats(1e-6, 100.0, allow_nan=False),
        mode=st.sampled_from(["relative", "absolute"]),
    )
    def test_any_valid_config_survives_file_round_trip(
        self, tmp_path_factory, budget, knn, window, tau, mode
    ):
        cfg = PipelineConfig(
            keypoint_budget=budget, knn=knn, vote_window=window, tau=tau, tau_mode=mode
        )
        path = tmp_path_factory.mktemp("cfg") / "c.ini"
        save_config(cfg, path)
        loaded = load_config(path)
        assert loaded.keypoint_budget == budget
        assert loaded.knn == knn
        assert loaded.vote_window == window
        assert loaded.tau == pytest.approx(tau, rel=1e-12)
        assert loaded.tau_mode == mode
