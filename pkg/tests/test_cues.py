"""Cue-layer operations against independent oracles."""

import numpy as np
import pytest

from coloc import cues


def brute_otsu(values):
    """Exhaustive scan over all 256 candidate thresholds, written directly
    from the between-class-variance definition."""
    v = np.asarray(values, np.float64).ravel()
    if v.max() == v.min():
        return float(v.max())
    bins = np.minimum((v * 256).astype(int), 255)
    centers = (np.arange(256) + 0.5) / 256
    best_t, best_var = 0, -1.0
    for t in range(256):
        lo = bins <= t
        hi = ~lo
        if not lo.any() or not hi.any():
            var = 0.0
        else:
            w0, w1 = lo.sum(), hi.sum()
            mu0 = centers[bins[lo]].mean()
            mu1 = centers[bins[hi]].mean()
            var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return float((best_t + 0.5) / 256)


class TestOtsu:
    def test_constant_map(self):
        assert cues.otsu_threshold(np.full((4, 4), 0.5)) == 0.5

    def test_bimodal(self):
        v = np.zeros((10, 10))
        v[:5] = 0.2
        v[5:] = 0.8
        phi = cues.otsu_threshold(v)
        assert 0.2 < phi < 0.8
        assert phi == brute_otsu(v)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            v = rng.random((8, 8))
            assert cues.otsu_threshold(v) == brute_otsu(v)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cues.otsu_threshold(np.zeros((0, 4)))


def eq1_oracle(values):
    """Per-pixel reimplementation of the tri-map rule."""
    v = np.asarray(values, np.float64)
    phi = brute_otsu(v)
    above = v[v > phi]
    cut = phi + (above.mean() if above.size else 0.0)
    out = np.zeros(v.shape, np.int8)
    for r in range(v.shape[0]):
        for c in range(v.shape[1]):
            if v[r, c] > cut:
                out[r, c] = 1
            elif v[r, c] < phi:
                out[r, c] = -1
    if not (out == 1).any() and v.max() > v.min():
        out[v >= 0.95 * v.max()] = 1
    return out


class TestTrimap:
    def test_direct_arithmetic(self):
        # bimodal map: phi lands near .3, upper-class mean near .54
        v = np.array([[0.1] * 8 + [0.25] * 4 + [0.35] * 3 + [0.5] * 3 + [0.65] * 3
                      + [0.9, 0.2, 0.55]])
        phi = cues.otsu_threshold(v)
        assert 0.25 < phi < 0.35
        cut = phi + v[v > phi].mean()
        assert 0.55 < cut < 0.9      # the direct branch is exercised
        tri = cues.build_trimap(v)
        assert tri[0, -3] == 1       # 0.9 above the cut
        assert tri[0, -2] == -1      # 0.2 below phi
        assert tri[0, -1] == 0       # 0.55 in between

    def test_constant_all_unknown(self):
        assert (cues.build_trimap(np.full((6, 6), 0.4)) == 0).all()

    def test_matches_pixel_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            v = rng.random((16, 16)).astype(np.float32)
            assert (cues.build_trimap(v) == eq1_oracle(v)).all()

    def test_partition(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            v = rng.random((12, 12))
            tri = cues.build_trimap(v)
            n = (tri == 1).sum() + (tri == -1).sum() + (tri == 0).sum()
            assert n == v.size

    def test_fallback_keeps_foreground_nonempty(self):
        # tight cluster plus slight spread: the fg cut exceeds the max
        v = np.full((8, 8), 0.5)
        v[0, 0] = 0.52
        v[7, 7] = 0.48
        tri = cues.build_trimap(v)
        assert (tri == 1).any()


def bhattacharyya(m1, s1, m2, s2):
    s2sum = s1 * s1 + s2 * s2
    return np.sqrt(2 * s1 * s2 / s2sum) * np.exp(-((m1 - m2) ** 2) / (4 * s2sum))


class TestReliability:
    def test_perfectly_separated_solid_rectangle(self):
        v = np.zeros((10, 10), np.float32)
        v[2:6, 3:8] = 1.0
        tri = np.zeros((10, 10), np.int8)
        tri[2:6, 3:8] = 1
        tri[v == 0] = -1
        assert cues.reliability_score(v, tri) == pytest.approx(1.0, abs=1e-6)

    def test_empty_side_scores_zero(self):
        v = np.random.default_rng(0).random((5, 5))
        tri = np.ones((5, 5), np.int8)
        assert cues.reliability_score(v, tri) == 0.0
        assert cues.reliability_score(v, -tri) == 0.0

    def test_closed_form_overlap_oracle(self):
        rng = np.random.default_rng(19)
        h, w = 20, 20
        v = np.clip(rng.normal(0.2, 0.05, (h, w)), 0, 1)
        tri = np.full((h, w), -1, np.int8)
        # fg fills alternating columns of a 10x10 block: half its bounding box
        fg = np.zeros((h, w), bool)
        fg[5:15, 5:15:2] = True
        v[fg] = np.clip(rng.normal(0.8, 0.05, fg.sum()), 0, 1)
        tri[fg] = 1
        fg_vals, bg_vals = v[tri == 1], v[tri == -1]
        overlap = bhattacharyya(fg_vals.mean(), max(fg_vals.std(), 1e-4),
                                bg_vals.mean(), max(bg_vals.std(), 1e-4))
        concentration = fg.sum() / (10 * 9)  # rows 5..14, cols 5..13
        expected = np.clip((1 - overlap) * concentration, 0, 1)
        assert cues.reliability_score(v, tri) == pytest.approx(expected, rel=1e-12)

    def test_permutation_within_bbox_invariant(self):
        rng = np.random.default_rng(23)
        v = rng.random((12, 12)).astype(np.float64)
        tri = np.full((12, 12), -1, np.int8)
        tri[3:9, 4:10] = 1
        base = cues.reliability_score(v, tri)
        # shuffle fg values among fg pixels: bbox and populations unchanged
        fg_idx = np.nonzero(tri == 1)
        perm = rng.permutation(len(fg_idx[0]))
        v2 = v.copy()
        v2[fg_idx] = v[fg_idx][perm]
        assert cues.reliability_score(v2, tri) == pytest.approx(base, rel=1e-12)


class TestConsensus:
    def test_two_cues_agree(self):
        t1 = np.ones((2, 2), np.int8)
        t2 = np.ones((2, 2), np.int8)
        c = cues.consensus_map([t1, t2], [0.8, 0.6])
        assert c.raw[0, 0] == pytest.approx(1.4)
        assert c.normalized[0, 0] == pytest.approx(1.0)

    def test_disagreement_cancels(self):
        t1 = np.ones((2, 2), np.int8)
        c = cues.consensus_map([t1, -t1], [0.5, 0.5])
        assert (c.raw == 0).all()

    def test_three_cue_case(self):
        t = [np.full((1, 1), s, np.int8) for s in (1, 0, -1)]
        c = cues.consensus_map(t, [0.9, 0.5, 0.3])
        assert c.raw[0, 0] == pytest.approx(0.6)
        assert c.normalized[0, 0] == pytest.approx(0.6 / 1.7)

    def test_odd_symmetry(self):
        rng = np.random.default_rng(29)
        tris = [rng.integers(-1, 2, (6, 6)).astype(np.int8) for _ in range(3)]
        psis = rng.random(3).tolist()
        c1 = cues.consensus_map(tris, psis)
        c2 = cues.consensus_map([-t for t in tris], psis)
        assert np.allclose(c1.raw, -c2.raw)

    def test_bound_and_uniqueness_of_extreme(self):
        rng = np.random.default_rng(31)
        tris = [rng.integers(-1, 2, (8, 8)).astype(np.int8) for _ in range(3)]
        psis = [0.7, 0.4, 0.2]
        c = cues.consensus_map(tris, psis)
        total = sum(psis)
        assert (np.abs(c.raw) <= total + 1e-12).all()
        # |X| hits the total exactly where every cue claims a known label
        # with the same sign
        stacked = np.stack(tris)
        all_agree = (np.abs(stacked.sum(axis=0)) == 3)
        assert np.array_equal(np.abs(c.raw) > total - 1e-12, all_agree)

    def test_zero_reliability_normalizes_to_zero(self):
        t = np.ones((3, 3), np.int8)
        c = cues.consensus_map([t], [0.0])
        assert (c.normalized == 0).all()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            cues.consensus_map([np.ones((2, 2), np.int8), np.ones((3, 3), np.int8)],
                               [0.5, 0.5])


class TestCueMapType:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            cues.CueMap(np.array([[1.5]]), kind=cues.VISUAL)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            cues.CueMap(np.array([[np.nan]]), kind=cues.VISUAL)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            cues.CueMap(np.zeros((2, 2)), kind="depth")
