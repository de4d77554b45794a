"""Descriptor, hierarchy, warping, and the up/down co-saliency passes."""

import numpy as np
import pytest

from coloc import cosaliency, cues


def textured_frame(rng, h=64, w=64):
    return rng.random((h, w, 3)).astype(np.float32)


class TestGistDescriptor:
    def test_deterministic(self):
        rng = np.random.default_rng(1)
        f = textured_frame(rng)
        d1 = cosaliency.gist_descriptor(f)
        d2 = cosaliency.gist_descriptor(f.copy())
        assert d1.shape == (512,)
        assert (d1 == d2).all()

    def test_constant_frame_uniform_pooling(self):
        d = cosaliency.gist_descriptor(np.full((64, 64, 3), 0.5, np.float32))
        cells = d.reshape(32, 16)
        assert np.allclose(cells, cells[:, :1], atol=1e-10)

    def test_rotation_permutes_grid_cells(self):
        rng = np.random.default_rng(2)
        f = textured_frame(rng)          # already 64x64: no resize involved
        d = cosaliency.gist_descriptor(f).reshape(32, 4, 4)
        rot = cosaliency.gist_descriptor(f[::-1, ::-1].copy()).reshape(32, 4, 4)
        assert np.allclose(rot, d[:, ::-1, ::-1], atol=1e-9)

    def test_small_frame_rejected(self):
        with pytest.raises(ValueError):
            cosaliency.gist_descriptor(np.zeros((16, 16, 3), np.float32))


class TestBuildHierarchy:
    def test_level_sizes(self):
        rng = np.random.default_rng(3)
        desc = rng.random((150, 512))
        hier = cosaliency.build_hierarchy([None] * 150, min_size=4, seed=0,
                                          descriptors=desc)
        assert len(hier.levels[0]) == 150
        assert len(hier.levels[1]) == 10          # round(150 / 15)
        for lo, hi in zip(hier.levels, hier.levels[1:]):
            assert len(hi) == max(1, round(len(lo) / 15)) or len(hi) <= len(lo)
            assert set(hi) <= set(lo)

    def test_min_size_terminates(self):
        rng = np.random.default_rng(4)
        desc = rng.random((5, 512))
        hier = cosaliency.build_hierarchy([None] * 5, min_size=10, descriptors=desc)
        assert hier.levels == [list(range(5))]
        assert hier.parents == []

    def test_every_frame_has_one_parent(self):
        rng = np.random.default_rng(5)
        desc = rng.random((60, 512))
        hier = cosaliency.build_hierarchy([None] * 60, min_size=2, descriptors=desc)
        for level in range(hier.top):
            parents = hier.parents[level]
            for f in hier.levels[level]:
                assert f in parents
                assert parents[f] in hier.levels[level + 1]

    def test_cluster_purity_on_separated_scenes(self):
        rng = np.random.default_rng(6)
        centers = rng.normal(0, 1, (15, 512)) * 10
        desc = np.concatenate([c + rng.normal(0, 0.05, (15, 512)) for c in centers])
        hier = cosaliency.build_hierarchy([None] * 225, min_size=4, seed=1,
                                          descriptors=desc)
        assert len(hier.levels[1]) == 15
        scenes = {rep // 15 for rep in hier.levels[1]}
        assert len(scenes) == 15   # one representative per generated scene

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        desc = rng.random((45, 64))
        h1 = cosaliency.build_hierarchy([None] * 45, descriptors=desc, seed=3)
        h2 = cosaliency.build_hierarchy([None] * 45, descriptors=desc, seed=3)
        assert h1.levels == h2.levels and h1.parents == h2.parents

    def test_json_dump(self):
        rng = np.random.default_rng(8)
        desc = rng.random((30, 16))
        hier = cosaliency.build_hierarchy([None] * 30, min_size=1, descriptors=desc)
        dump = hier.to_json()
        assert '"levels"' in dump and '"parents"' in dump


class TestWarpMap:
    def test_self_warp_identity(self):
        rng = np.random.default_rng(9)
        f = textured_frame(rng, 48, 64)
        m = rng.random((48, 64)).astype(np.float32)
        assert (cosaliency.warp_map(f, f, m) == m).all()

    def test_planted_block_translation(self):
        rng = np.random.default_rng(10)
        src = textured_frame(rng, 64, 64)
        dst = np.empty_like(src)
        dst[16:, 16:] = src[:-16, :-16]
        dst[:16, :], dst[:, :16] = src[:16, :], src[:, :16]
        m = rng.random((64, 64)).astype(np.float32)
        warped = cosaliency.warp_map(src, dst, m)
        assert np.allclose(warped[16:, 16:], m[:-16, :-16])

    def test_zero_map_stays_zero(self):
        rng = np.random.default_rng(11)
        src, dst = textured_frame(rng), textured_frame(rng)
        warped = cosaliency.warp_map(src, dst, np.zeros((64, 64), np.float32))
        assert not warped.any()

    def test_range_preserved(self):
        rng = np.random.default_rng(12)
        src, dst = textured_frame(rng), textured_frame(rng)
        m = rng.random((64, 64)).astype(np.float32)
        warped = cosaliency.warp_map(src, dst, m)
        assert warped.min() >= 0 and warped.max() <= 1


def solid_map(h=64, w=64):
    m = np.zeros((h, w), np.float32)
    m[20:40, 24:44] = 1.0
    return m


class TestAggregateUp:
    def hier2(self, n):
        """Flat two-level hierarchy: frame 0 represents everything."""
        rng = np.random.default_rng(13)
        frames = [textured_frame(rng)] * n
        frames = [frames[0]] * n  # identical frames: identity warps
        hier = cosaliency.Hierarchy(levels=[list(range(n)), [0]],
                                    parents=[{i: 0 for i in range(n)}],
                                    descriptors=np.zeros((n, 4)))
        return frames, hier

    def test_identical_children_identical_maps(self):
        frames, hier = self.hier2(3)
        base = {i: solid_map() for i in range(3)}
        co = cosaliency.aggregate_up(hier, frames, base)
        assert np.allclose(co[1][0], base[0])

    def test_degenerate_weights_pick_single_child(self):
        frames, hier = self.hier2(3)
        special = solid_map()
        base = {0: np.full((64, 64), 0.4, np.float32),   # constant: weight 0
                1: special,                              # weight 1
                2: np.full((64, 64), 0.6, np.float32)}   # constant: weight 0
        co = cosaliency.aggregate_up(hier, frames, base)
        assert np.allclose(co[1][0], special)

    def test_equal_weights_average(self):
        frames, hier = self.hier2(2)
        a, b = solid_map(), np.roll(solid_map(), 8, axis=1)
        co = cosaliency.aggregate_up(hier, frames, {0: a, 1: b},
                                     weight_fn=lambda m: 0.5)
        mean = (a + b) / 2
        assert np.allclose(co[1][0], mean / mean.max())

    def test_missing_base_map_rejected(self):
        frames, hier = self.hier2(2)
        with pytest.raises(ValueError):
            cosaliency.aggregate_up(hier, frames, {0: solid_map()})


class TestPropagateDown:
    def test_two_level_equal_mixing(self):
        rng = np.random.default_rng(14)
        frame = textured_frame(rng)
        frames = [frame, frame]
        hier = cosaliency.Hierarchy(levels=[[0, 1], [0]],
                                    parents=[{0: 0, 1: 0}],
                                    descriptors=np.zeros((2, 4)))
        sal = {0: solid_map(), 1: np.roll(solid_map(), 4, axis=0)}
        rep_map = np.clip(solid_map() * 0.8, 0, 1)
        co_maps = [sal, {0: rep_map}]
        out = cosaliency.propagate_down(hier, frames, co_maps)
        assert np.allclose(out[1], (rep_map + sal[1]) / 2, atol=1e-6)

    def test_three_level_bottom_weights(self):
        rng = np.random.default_rng(15)
        frame = textured_frame(rng)
        frames = [frame] * 3
        hier = cosaliency.Hierarchy(levels=[[0, 1, 2], [0, 1], [0]],
                                    parents=[{0: 0, 1: 1, 2: 1}, {0: 0, 1: 0}],
                                    descriptors=np.zeros((3, 4)))
        sal = {i: np.full((64, 64), 0.2, np.float32) for i in range(3)}
        mid = {0: solid_map() * 0.5, 1: solid_map() * 0.7}
        top = {0: solid_map()}
        out = cosaliency.propagate_down(hier, frames, [sal, mid, top])
        # step top->mid: d=1 -> mid'[1] = (top + mid[1]) / 2
        mid1 = (top[0] + mid[1]) / 2
        # step mid->ground for child 2 (parent 1): d=2 -> (2*mid1 + sal) / 3
        assert np.allclose(out[2], (2 * mid1 + sal[2]) / 3, atol=1e-6)

    def test_identical_parent_and_child_map_is_fixpoint(self):
        rng = np.random.default_rng(16)
        frame = textured_frame(rng)
        m = solid_map()
        hier = cosaliency.Hierarchy(levels=[[0], [0]], parents=[{0: 0}],
                                    descriptors=np.zeros((1, 4)))
        out = cosaliency.propagate_down(hier, [frame], [{0: m}, {0: m}])
        assert np.allclose(out[0], m)


class TestIdenticalCorpus:
    def test_cosaliency_equals_saliency_on_identical_frames(self):
        rng = np.random.default_rng(17)
        frame = textured_frame(rng)
        frames = [frame] * 20
        desc = np.stack([cosaliency.gist_descriptor(f) for f in frames])
        hier = cosaliency.build_hierarchy(frames, min_size=1, descriptors=desc)
        sal = solid_map()
        base = {i: sal for i in range(20)}
        co = cosaliency.aggregate_up(hier, frames, base)
        out = cosaliency.propagate_down(hier, frames, co)
        for i in range(20):
            assert np.allclose(out[i], sal, atol=1e-6)
