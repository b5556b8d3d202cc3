import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from indsub.linalg import numerical_rank
from indsub.subspace import (
    Subspace,
    cosine,
    is_independent,
    margin,
    principal_pairs,
    sum_subspace,
    synth_union,
)

from conftest import random_basis

E = np.eye(3)
# y-z plane and the line through (1, 1, 0)
FIG1_PLANE = Subspace(E[:, [1, 2]])
FIG1_LINE = Subspace(np.array([[1.0], [1.0], [0.0]]) / np.sqrt(2))


def random_subspace(rng, n, d):
    return Subspace(random_basis(rng, n, d))


class TestSubspaceType:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_from_span_drops_dependent(self, rng):
        b = rng.standard_normal((6, 2))
        assert Subspace.from_span(np.hstack([b, b @ [[1.0], [2.0]]])).dim == 2


class TestMargin:
    def test_orthogonal_lines(self):
        assert margin(Subspace(E[:, [0]]), Subspace(E[:, [1]])) == 0.0

    def test_self(self, rng):
        s = random_subspace(rng, 10, 3)
        assert margin(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_figure_one(self):
        assert margin(FIG1_PLANE, FIG1_LINE) == pytest.approx(1 / np.sqrt(2), abs=1e-14)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            margin(Subspace(np.eye(3)[:, :1]), Subspace(np.eye(4)[:, :1]))

    def test_symmetric(self, rng):
        s1, s2 = random_subspace(rng, 30, 4), random_subspace(rng, 30, 7)
        assert abs(margin(s1, s2) - margin(s2, s1)) < 1e-12

    def test_is_max_cosine(self, rng):
        s1, s2 = random_subspace(rng, 12, 3), random_subspace(rng, 12, 4)
        g = margin(s1, s2)
        u = s1.basis @ rng.standard_normal((3, 1000))
        v = s2.basis @ rng.standard_normal((4, 1000))
        cos = np.sum(u * v, axis=0) / np.linalg.norm(u, axis=0) / np.linalg.norm(v, axis=0)
        assert np.all(cos <= g + 1e-10)

    def test_equivalent_distance_form(self, rng):
        s1, s2 = random_subspace(rng, 40, 5), random_subspace(rng, 40, 6)
        first = principal_pairs(s1, s2)[0]
        assert 0.5 * np.sum((first.u - first.v) ** 2) == pytest.approx(1 - margin(s1, s2), abs=1e-10)


class TestPrincipalPairs:
    def test_orthogonal_lines(self):
        (pair,) = principal_pairs(Subspace(E[:, [0]]), Subspace(E[:, [1]]))
        assert pair.cosine == 0.0 and pair.index == 1

    def test_figure_one(self):
        (pair,) = principal_pairs(FIG1_PLANE, FIG1_LINE)
        np.testing.assert_allclose(np.abs(pair.u), [0, 1, 0], atol=1e-14)
        np.testing.assert_allclose(np.abs(pair.v), np.array([1, 1, 0]) / np.sqrt(2), atol=1e-14)
        assert pair.cosine == pytest.approx(1 / np.sqrt(2), abs=1e-14)
        assert pair.u @ pair.v == pytest.approx(pair.cosine, abs=1e-14)

    def test_high_dimensional_random(self, rng):
        s1, s2 = random_subspace(rng, 1000, 20), random_subspace(rng, 1000, 30)
        pairs = principal_pairs(s1, s2)
        assert len(pairs) == 20
        cos = np.array([p.cosine for p in pairs])
        assert cos.max() < 1 - 1e-6
        assert np.all(np.diff(cos) <= 0)
        assert cos[0] == pytest.approx(margin(s1, s2), abs=1e-15)

    def test_against_scipy_angles(self, rng):
        s1, s2 = random_subspace(rng, 50, 6), random_subspace(rng, 50, 9)
        ours = [p.cosine for p in principal_pairs(s1, s2)]
        ref = np.cos(scipy.linalg.subspace_angles(s1.basis, s2.basis))
        np.testing.assert_allclose(ours, np.sort(ref)[::-1], atol=1e-10)

    def test_pair_invariants(self, rng):
        s1, s2 = random_subspace(rng, 25, 4), random_subspace(rng, 25, 5)
        direct = np.linalg.svd(s1.basis.T @ s2.basis, compute_uv=False)
        for p, sv in zip(principal_pairs(s1, s2), direct):
            assert abs(np.linalg.norm(p.u) - 1) < 1e-10 and abs(np.linalg.norm(p.v) - 1) < 1e-10
            assert s1.residual(p.u) < 1e-8 and s2.residual(p.v) < 1e-8
            assert abs(p.cosine - p.u @ p.v) < 1e-10
            assert abs(p.cosine - sv) < 1e-12


class TestSumAndIndependence:
    def test_sum_of_axes(self):
        s = sum_subspace([Subspace(E[:, [0]]), Subspace(E[:, [1]])])
        assert s.dim == 2
        np.testing.assert_allclose(s.basis @ s.basis.T, np.diag([1, 1, 0]), atol=1e-15)

    def test_sum_idempotent(self, rng):
        s = random_subspace(rng, 8, 3)
        assert sum_subspace([s, s]).dim == 3

    def test_rank_additivity(self, rng):
        subs = [random_subspace(rng, 100, d) for d in (3, 4, 5, 6)]
        assert sum_subspace(subs).dim == 18

    def test_empty(self):
        with pytest.raises(ValueError):
            sum_subspace([])

    def test_axes_independent(self):
        assert is_independent([Subspace(E[:, [0]]), Subspace(E[:, [1]])])

    def test_dependent(self):
        line = Subspace(np.array([[1.0], [1.0], [0.0]]) / np.sqrt(2))
        assert not is_independent([Subspace(E[:, [0]]), line, Subspace(E[:, [1]])])

    def test_random_independent(self, rng):
        assert is_independent([random_subspace(rng, 200, d) for d in (2, 3, 4, 5, 6)])

    def test_pairwise_disjoint_but_dependent(self, rng):
        # three lines in a plane: pairwise disjoint, not independent
        b = random_basis(rng, 5, 2)
        lines = [Subspace.from_span(b @ rng.standard_normal((2, 1))) for _ in range(3)]
        assert all(margin(a, c) < 1 - 1e-6 for a in lines for c in lines if a is not c)
        assert not is_independent(lines)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_rotation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        subs = [random_subspace(rng, 40, d) for d in rng.integers(1, 6, size=rng.integers(2, 5))]
        rotated = [Subspace(s.basis @ random_basis(rng, s.dim, s.dim)) for s in subs]
        assert is_independent(subs) and is_independent(rotated)


def augmentation_instance(rng):
    """Random (x1, y1, x2, y2) with nonnegative max(cos1, cos2) and cos1 < 1."""
    d1, d2 = rng.integers(1, 20, size=2)
    x1, y1 = rng.standard_normal(d1), rng.standard_normal(d1)
    x2, y2 = rng.standard_normal(d2), rng.standard_normal(d2)
    if max(cosine(x1, y1), cosine(x2, y2)) < 0:
        y1 = -y1
    return x1, y1, x2, y2


class TestAugmentation:
    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_stacked_cosine_bounded(self, seed):
        x1, y1, x2, y2 = augmentation_instance(np.random.default_rng(seed))
        g1, g2 = cosine(x1, y1), cosine(x2, y2)
        stacked = cosine(np.concatenate([x1, x2]), np.concatenate([y1, y2]))
        assert stacked <= max(g1, g2) + 1e-12
        if abs(g1 - g2) >= 1e-6:
            assert stacked < max(g1, g2)

    def test_bound_can_fail_for_negative_cosines(self):
        # both cosines negative: the augmented cosine can exceed the larger one
        x1, y1 = np.array([1.0]), np.array([-1.0])
        x2, y2 = np.array([10.0, 0.0]), 0.1 * np.array([-0.9, np.sqrt(1 - 0.81)])
        stacked = cosine(np.concatenate([x1, x2]), np.concatenate([y1, y2]))
        assert stacked > max(cosine(x1, y1), cosine(x2, y2))


class TestSynthUnion:
    def test_two_class_setup(self):
        data, subs = synth_union(1000, [20, 30], 100, 0.0, seed=7)
        assert data.features.shape == (1000, 200)
        assert data.class_count == 2 and [s.dim for s in subs] == [20, 30]
        np.testing.assert_allclose(np.linalg.norm(data.features, axis=0), 1.0, atol=1e-12)

    def test_rank_one_class(self):
        data, _ = synth_union(3, [1], 5, 0.0, seed=1)
        assert numerical_rank(data.features) == 1

    @pytest.mark.parametrize("dims,per_class", [((2, 3), 10), ((5, 1, 4), 3), ((8,), 20)])
    def test_noiseless_classes_lie_in_bases(self, dims, per_class):
        data, subs = synth_union(30, dims, per_class, 0.0, seed=3)
        for k, s in zip(data.classes, subs):
            xk = data.class_features(k)
            assert numerical_rank(xk) == min(s.dim, per_class)
            assert np.max(s.residual(xk)) < 1e-10

    def test_noise_moves_samples_off_subspace(self):
        data, subs = synth_union(50, (3, 3), 20, 0.05, seed=3)
        res = subs[0].residual(data.class_features(1))
        assert 0.01 < np.median(res) < 0.1
        np.testing.assert_allclose(np.linalg.norm(data.features, axis=0), 1.0, atol=1e-12)

    def test_deterministic(self):
        a, _ = synth_union(20, (2, 3), 4, 0.1, seed=11)
        b, _ = synth_union(20, (2, 3), 4, 0.1, seed=11)
        c, _ = synth_union(20, (2, 3), 4, 0.1, seed=12)
        np.testing.assert_array_equal(a.features, b.features)
        assert not np.array_equal(a.features, c.features)

    def test_too_many_dims(self):
        with pytest.raises(ValueError):
            synth_union(5, (3, 3), 2)
