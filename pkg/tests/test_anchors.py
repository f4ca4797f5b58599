import numpy as np
import pytest
from hypothesis import given, strategies as st

from multihop.anchors import AnchorError, AnchorSet, PerturbConfig, derive_anchors, perturb
from multihop.models import Cart, Mlp, Polynomial, TreeEnsemble, complexity


class TestDerive:
    def test_polynomial(self):
        assert [a.degree for a in derive_anchors(Polynomial(5), 4).specs] == [4, 3, 2, 1]
        with pytest.raises(AnchorError):
            derive_anchors(Polynomial(5), 5)

    def test_mlp_depths(self):
        spec = Mlp((32,) * 9)
        assert spec.depth == 10
        anchors = derive_anchors(spec, 8)
        assert [a.depth for a in anchors.specs] == list(range(9, 1, -1))

    def test_ensemble_ranges(self):
        spec = TreeEnsemble("boosted", 100, 8)
        anchors = derive_anchors(spec, 20)
        assert len(anchors) == 20
        assert all(3 <= a.n_trees <= 60 and a.max_depth <= 6 for a in anchors.specs)
        assert {a.kind for a in anchors.specs} == {"boosted", "forest"}
        scores = [complexity(a) for a in anchors.specs]
        assert all(x > y for x, y in zip(scores, scores[1:]))
        assert scores[0] < complexity(spec)

    def test_cart(self):
        assert [a.max_depth for a in derive_anchors(Cart(4), 3).specs] == [3, 2, 1]

    def test_small_ensemble_rejected(self):
        with pytest.raises(AnchorError):
            derive_anchors(TreeEnsemble("forest", 3, 4), 2)

    def test_anchor_set_order_enforced_and_one_indexed(self):
        s = AnchorSet([Polynomial(3), Polynomial(1)])
        assert s[1] == Polynomial(3) and s[2] == Polynomial(1)
        with pytest.raises(IndexError):
            s[0]
        with pytest.raises(AnchorError):
            AnchorSet([Polynomial(1), Polynomial(3)])

    @given(st.sampled_from(["boosted", "forest"]), st.integers(10, 300), st.integers(1, 10),
           st.integers(1, 12))
    def test_derived_anchors_strictly_simpler(self, kind, n_trees, depth, k):
        spec = TreeEnsemble(kind, n_trees, depth)
        try:
            anchors = derive_anchors(spec, k)
        except AnchorError:
            return
        scores = [complexity(a) for a in anchors.specs]
        assert len(scores) == k
        assert all(x > y for x, y in zip(scores, scores[1:]))
        assert scores[0] < complexity(spec)


class TestPerturb:
    def test_identity(self):
        for a in (Polynomial(3), Cart(2), Mlp((4, 4)), TreeEnsemble("forest", 5, 3)):
            assert perturb(a, PerturbConfig(identity=True), 123) == a

    def test_depth_coverage(self):
        cfg = PerturbConfig(depth_jitter=2)
        depths = {perturb(TreeEnsemble("boosted", 20, 6), cfg, s).max_depth for s in range(1000)}
        assert depths == {4, 5, 6, 7, 8}

    def test_depth_clamped(self):
        cfg = PerturbConfig(depth_jitter=3)
        assert min(perturb(Cart(1), cfg, s).max_depth for s in range(200)) == 1

    def test_single_delete_step(self):
        cfg = PerturbConfig(max_steps=1)
        outs = [perturb(Mlp((64, 64, 64)), cfg, s).hidden_widths for s in range(50)]
        deleted = [o for o in outs if len(o) == 2]
        assert deleted and all(o == (64, 64) for o in deleted)
        modified = [o for o in outs if len(o) == 3]
        assert modified and all(sum(w != 64 for w in o) == 1 for o in modified)
        assert {w for o in modified for w in o} <= {32, 48, 64, 80, 96}

    def test_polynomial_degree(self):
        degrees = {perturb(Polynomial(2), PerturbConfig(degree_jitter=1), s).degree for s in range(200)}
        assert degrees == {1, 2, 3}

    @given(st.integers(0, 2 ** 32 - 1),
           st.lists(st.integers(1, 50), min_size=1, max_size=5),
           st.integers(1, 5))
    def test_pure_and_valid(self, seed, widths, steps):
        cfg = PerturbConfig(max_steps=steps)
        a = perturb(Mlp(tuple(widths)), cfg, seed)
        assert a == perturb(Mlp(tuple(widths)), cfg, seed)
        assert len(a.hidden_widths) >= 1 and min(a.hidden_widths) >= 1
