import numpy as np
import pytest

from slumkit.change import detect_change
from slumkit.dataset import load_dataset, resolve_image_path
from slumkit.errors import InvalidConfig
from slumkit.ioutils import load_image
from slumkit.raster import polygon_area, rasterize_polygon
from slumkit.synth import SynthConfig, generate_pair, generate_scene, write_corpus

from oracles import polygon_is_simple


def union_mask(polygons, width, height):
    out = np.zeros((height, width), dtype=bool)
    for p in polygons:
        out |= rasterize_polygon(p, width, height)
    return out


def local_variance_split(gray, union):
    """Mean 3x3 local variance over pixels fully inside vs fully outside."""
    win_mean = _window9(gray) / 9.0
    win_sq = _window9(gray * gray) / 9.0
    var = win_sq - win_mean * win_mean
    inside_core = _window9(union.astype(float)) == 9.0
    outside_core = _window9(union.astype(float)) == 0.0
    return float(var[inside_core].mean()), float(var[outside_core].mean())


def _window9(arr):
    out = np.zeros((arr.shape[0] - 2, arr.shape[1] - 2), dtype=float)
    for dy in range(3):
        for dx in range(3):
            out += arr[dy:dy + arr.shape[0] - 2, dx:dx + arr.shape[1] - 2]
    return out


class TestGenerateScene:
    def test_deterministic(self):
        cfg = SynthConfig()
        img1, scene1, anns1 = generate_scene(cfg, seed=42)
        img2, scene2, anns2 = generate_scene(cfg, seed=42)
        assert np.array_equal(img1, img2)
        assert scene1 == scene2
        assert len(anns1) == len(anns2)
        for a, b in zip(anns1, anns2):
            assert np.array_equal(a.polygon.vertices, b.polygon.vertices)

    def test_instance_count_range(self):
        cfg = SynthConfig(n_instances=(3, 3))
        _, _, anns = generate_scene(cfg, seed=0)
        assert len(anns) == 3

    def test_polygons_always_simple(self):
        cfg = SynthConfig(n_instances=(1, 3))
        for seed in range(500):
            _, _, anns = generate_scene(cfg, seed=seed)
            for ann in anns:
                assert polygon_is_simple(ann.polygon.vertices), f"seed {seed}"

    def test_instances_disjoint_and_in_bounds(self):
        cfg = SynthConfig(n_instances=(4, 4))
        for seed in range(25):
            _, scene, anns = generate_scene(cfg, seed=seed)
            masks = [
                rasterize_polygon(a.polygon, scene.width, scene.height)
                for a in anns
            ]
            total = sum(int(m.sum()) for m in masks)
            merged = union_mask(
                [a.polygon for a in anns], scene.width, scene.height
            )
            assert int(merged.sum()) == total  # no overlap
            for a in anns:
                v = a.polygon.vertices
                assert v[:, 0].min() >= 0 and v[:, 0].max() <= scene.width
                assert v[:, 1].min() >= 0 and v[:, 1].max() <= scene.height

    def test_texture_contrast_separates_inside_from_outside(self):
        for contrast in (0.3, 0.6, 1.0):
            cfg = SynthConfig(texture_contrast=contrast, n_instances=(3, 4))
            img, scene, anns = generate_scene(cfg, seed=5)
            gray = img.mean(axis=-1) / 255.0
            union = union_mask([a.polygon for a in anns], scene.width, scene.height)
            inside, outside = local_variance_split(gray, union)
            assert inside - outside >= contrast * 0.005

    def test_invalid_configs(self):
        with pytest.raises(InvalidConfig):
            SynthConfig(n_instances=(4, 2))
        with pytest.raises(InvalidConfig):
            SynthConfig(instance_radius=(0.0, 10.0))
        with pytest.raises(InvalidConfig):
            SynthConfig(instance_radius=(10.0, 500.0))
        with pytest.raises(InvalidConfig):
            SynthConfig(growth_factor=0.0)
        with pytest.raises(InvalidConfig):
            SynthConfig(vertices_per_instance=(2, 5))


class TestGeneratePair:
    def test_unit_growth_is_identity(self):
        cfg = SynthConfig(growth_factor=1.0)
        (img_b, scene_b, anns_b), (img_a, scene_a, anns_a) = generate_pair(cfg, 7)
        for a, b in zip(anns_b, anns_a):
            assert np.allclose(a.polygon.vertices, b.polygon.vertices)
        mb = union_mask([a.polygon for a in anns_b], cfg.width, cfg.height)
        ma = union_mask([a.polygon for a in anns_a], cfg.width, cfg.height)
        res = detect_change(mb, ma)
        assert res.percent_change == 0.0

    def test_polygon_areas_scale_exactly(self):
        cfg = SynthConfig(growth_factor=1.44)
        (_, _, anns_b), (_, _, anns_a) = generate_pair(cfg, 11)
        for b, a in zip(anns_b, anns_a):
            assert polygon_area(a.polygon) == pytest.approx(
                1.44 * polygon_area(b.polygon), rel=1e-12
            )

    def test_growth_1_3525_lands_near_35_25_percent(self):
        cfg = SynthConfig(
            width=512, height=512, n_instances=(2, 3),
            instance_radius=(45.0, 70.0), growth_factor=1.3525,
        )
        for seed in (1, 2, 3):
            (_, _, anns_b), (_, _, anns_a) = generate_pair(cfg, seed)
            mb = union_mask([a.polygon for a in anns_b], 512, 512)
            ma = union_mask([a.polygon for a in anns_a], 512, 512)
            res = detect_change(mb, ma)
            assert res.percent_change == pytest.approx(35.25, abs=1.5)

    def test_shrink_factor(self):
        cfg = SynthConfig(
            width=512, height=512, n_instances=(2, 3),
            instance_radius=(45.0, 70.0), growth_factor=0.25,
        )
        (_, _, anns_b), (_, _, anns_a) = generate_pair(cfg, 13)
        mb = union_mask([a.polygon for a in anns_b], 512, 512)
        ma = union_mask([a.polygon for a in anns_a], 512, 512)
        res = detect_change(mb, ma)
        assert res.percent_change == pytest.approx(-75.0, abs=1.5)

    def test_pair_years_and_ids(self):
        cfg = SynthConfig(growth_factor=1.2)
        (_, scene_b, _), (_, scene_a, _) = generate_pair(cfg, 3)
        assert scene_b.id == scene_a.id
        assert scene_b.capture_year < scene_a.capture_year


class TestWriteCorpus:
    def test_single_mode_layout(self, tmp_path):
        cfg = SynthConfig(n_instances=(1, 2))
        paths = write_corpus(cfg, seed=5, out_dir=tmp_path / "corpus", n_scenes=3)
        assert len(paths) == 1
        ds = load_dataset(paths[0])
        assert len(ds.scenes) == 3
        for scene in ds.scenes:
            img = load_image(resolve_image_path(paths[0], scene))
            assert img.shape == (scene.height, scene.width, 3)

    def test_pair_mode_layout(self, tmp_path):
        cfg = SynthConfig(growth_factor=1.3, n_instances=(1, 2))
        paths = write_corpus(cfg, seed=5, out_dir=tmp_path / "corpus", n_scenes=2)
        assert len(paths) == 2
        before = load_dataset(paths[0])
        after = load_dataset(paths[1])
        assert [s.id for s in before.scenes] == [s.id for s in after.scenes]
        assert all(
            b.capture_year < a.capture_year
            for b, a in zip(before.scenes, after.scenes)
        )

    def test_corpus_deterministic(self, tmp_path):
        cfg = SynthConfig(n_instances=(1, 2))
        p1 = write_corpus(cfg, seed=9, out_dir=tmp_path / "a", n_scenes=2)
        p2 = write_corpus(cfg, seed=9, out_dir=tmp_path / "b", n_scenes=2)
        assert p1[0].read_bytes() == p2[0].read_bytes()
        img_a = (tmp_path / "a" / "images" / "s000.png").read_bytes()
        img_b = (tmp_path / "b" / "images" / "s000.png").read_bytes()
        assert img_a == img_b
