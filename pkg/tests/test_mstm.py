import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multihop.anchors import AnchorSet, PerturbConfig, derive_anchors
from multihop.harness.data import SyntheticSpec, gaussian_mixture_dataset, noisy_teacher, split, synthetic_poly_dataset
from multihop.metrics import reward
from multihop.models import Cart, FitConfig, LinearLS, Polynomial, RobustLinear, TreeEnsemble, fit, predict
from multihop.mstm import (SearchConfig, SearchError, brute_force_search, mstm_search, submodularity_ratio,
                           subset_size)
from multihop.seeding import derive_seed
from multihop.transfer import ConfidenceWeight, Distill, Hop, TransferPlan, chain_transfer, hop

IDENTITY = PerturbConfig(identity=True)


@pytest.fixture(scope="module")
def poly_instance():
    spec = SyntheticSpec(seed=0)
    ds, clean = synthetic_poly_dataset(spec)
    return noisy_teacher(spec, ds, clean), ds.features, clean


def small_classification(seed, n=300):
    ds = gaussian_mixture_dataset(n_samples=n, n_features=5, n_informative=3, seed=seed)
    tr, va, te = split(ds, repeat_index=0, master_seed=seed)
    C = fit(TreeEnsemble("boosted", 12, 3), tr.features, tr.targets)
    return C, tr, va


class TestSubsetSize:
    def test_examples(self):
        assert subset_size(10, 2, 1 / math.e) == 5
        assert subset_size(10, 2, 0.999999) == 1
        assert subset_size(228, 3, 0.1) == math.ceil(76 * math.log(10)) == 175
        assert subset_size(4, 1, 1e-9) == 4

    def test_bad_delta(self):
        for d in (0.0, 1.0, -0.1, 2.0):
            with pytest.raises(SearchError):
                subset_size(5, 2, d)

    def test_config(self):
        with pytest.raises(SearchError):
            SearchConfig(n=2, delta=0.5)
        with pytest.raises(SearchError):
            SearchConfig(reward="f1")
        assert SearchConfig(m=2, delta=1 / math.e).candidates_per_hop(10) == 5
        assert SearchConfig(n=20).candidates_per_hop(4) == 4


class TestSearchSynthetic:
    def test_halves_one_hop_error(self, poly_instance):
        T, X, clean = poly_instance
        anchors = derive_anchors(Polynomial(5), 4)
        simple, plan, trace = mstm_search(T, anchors, RobustLinear(), (X, None), (X, clean),
                                          SearchConfig(m=2, reward="neg_mse"), IDENTITY)
        one = hop(T, RobustLinear(), X, None, Distill())
        mse = lambda m: np.mean((predict(m, X)[:, 0] - clean) ** 2)
        assert plan.hops
        assert mse(simple) <= 0.5 * mse(one)
        assert trace.final_reward == pytest.approx(-mse(simple), abs=1e-12)

    def test_k2_m2_table_matches_enumeration(self, poly_instance):
        T, X, clean = poly_instance
        anchors = AnchorSet([Polynomial(3), Polynomial(2)])
        res = brute_force_search(T, anchors, RobustLinear(), (X, None), (X, clean), m=2, reward="neg_mse",
                                 seed=5)
        # independent scripted enumeration
        expected = []
        for tup in itertools.product(range(3), repeat=2):
            teacher = T
            for pos, j in enumerate(tup, start=1):
                if j:
                    teacher = hop(teacher, anchors[j], X, None, Distill(),
                                  FitConfig(seed=derive_seed(5, pos, j, 1)))
            s = hop(teacher, RobustLinear(), X, None, Distill())
            expected.append((tup, -float(np.mean((predict(s, X)[:, 0] - clean) ** 2))))
        assert [t for t, _ in res.table] == [t for t, _ in expected]
        np.testing.assert_allclose([r for _, r in res.table], [r for _, r in expected], rtol=0, atol=1e-12)
        assert res.reward == max(r for _, r in expected)

    def test_budget_guard(self, poly_instance):
        T, X, clean = poly_instance
        with pytest.raises(SearchError, match="budget"):
            brute_force_search(T, derive_anchors(Polynomial(5), 4), RobustLinear(), (X, None), (X, clean),
                               m=3, reward="neg_mse", budget=100)

    def test_brute_force_m1_is_direct_or_single_anchor(self, poly_instance):
        T, X, clean = poly_instance
        anchors = derive_anchors(Polynomial(5), 4)
        res = brute_force_search(T, anchors, RobustLinear(), (X, None), (X, clean), m=1, reward="neg_mse")
        assert [t for t, _ in res.table] == [(j,) for j in range(5)]
        direct = hop(T, RobustLinear(), X, None, Distill())
        assert res.table[0][1] == reward("neg_mse", direct, X, clean)

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 3))
    @settings(max_examples=15)
    def test_pruning_soundness_nested_polynomials(self, poly_instance, lo, hi, extra):
        # projecting onto a larger polynomial space after a smaller one changes nothing
        if hi <= lo:
            return
        T, X, clean = poly_instance
        short = TransferPlan((Hop(Polynomial(lo)),))
        longer = TransferPlan((Hop(Polynomial(lo)), Hop(Polynomial(hi))))
        for simple in (LinearLS(), Polynomial(1)):
            a, _ = chain_transfer(T, short, simple, X, None)
            b, _ = chain_transfer(T, longer, simple, X, None, require_decreasing=False)
            assert reward("neg_mse", b, X, clean) <= reward("neg_mse", a, X, clean) + 1e-9


class TestSearchClassification:
    def test_k1_m1_two_candidates(self):
        C, tr, va = small_classification(0)
        anchors = AnchorSet([TreeEnsemble("forest", 5, 3)])
        cfg = SearchConfig(m=1, n=1, seed=2)
        simple, plan, trace = mstm_search(C, anchors, Cart(2), (tr.features, tr.y), (va.features, va.y),
                                          cfg, IDENTITY)
        direct = hop(C, Cart(2), tr.features, tr.y, Distill())
        via = hop(hop(C, anchors[1], tr.features, tr.y, Distill(), FitConfig(seed=derive_seed(2, 1, 1, 1))),
                  Cart(2), tr.features, tr.y, Distill())
        r0, r1 = (reward("accuracy", m, va.features, va.y) for m in (direct, via))
        assert trace.final_reward == max(r0, r1)
        assert (len(plan.hops) == 1) == (r1 > r0)

    def test_full_subsets_equal_plain_greedy(self):
        C, tr, va = small_classification(1)
        anchors = derive_anchors(C.spec, 3)
        data = (tr.features, tr.y)
        cfg = SearchConfig(m=2, seed=9)
        _, plan, trace = mstm_search(C, anchors, Cart(2), data, (va.features, va.y), cfg, IDENTITY)
        # plain greedy over every live anchor with the same seed rule
        teacher, live, chosen = C, [1, 2, 3], []
        best = reward("accuracy", hop(C, Cart(2), *data, Distill()), va.features, va.y)
        for h in (1, 2):
            scores = {}
            for j in live:
                inter = hop(teacher, anchors[j], *data, Distill(), FitConfig(seed=derive_seed(9, h, j, 1)))
                scores[j] = (reward("accuracy", hop(inter, Cart(2), *data, Distill()), va.features, va.y), inter)
            j_best = max(live, key=lambda j: (scores[j][0], -j))
            if scores[j_best][0] > best:
                best, teacher = scores[j_best][0], scores[j_best][1]
                chosen.append(j_best)
                live = [i for i in live if i > j_best]
            if not live:
                break
        assert trace.chosen_indices == chosen
        assert trace.final_reward == best

    def test_returned_model_matches_retrained_plan(self):
        C, tr, va = small_classification(2)
        anchors = derive_anchors(C.spec, 4)
        cfg = SearchConfig(m=3, seed=4, hop_method=Distill(), final_method=ConfidenceWeight())
        simple, plan, _ = mstm_search(C, anchors, Cart(2), (tr.features, tr.y), (va.features, va.y), cfg)
        again, inters = chain_transfer(C, plan, Cart(2), tr.features, tr.y, require_decreasing=False)
        assert len(inters) == len(plan.hops)
        np.testing.assert_array_equal(predict(simple, va.features), predict(again, va.features))

    def test_parallel_matches_serial(self):
        C, tr, va = small_classification(3)
        anchors = derive_anchors(C.spec, 4)
        cfg = SearchConfig(m=2, seed=11)
        runs = [mstm_search(C, anchors, Cart(2), (tr.features, tr.y), (va.features, va.y), cfg, n_jobs=j)
                for j in (1, 2)]
        assert runs[0][2].to_dict() == runs[1][2].to_dict()

    def test_empty_validation_rejected(self):
        C, tr, va = small_classification(0)
        with pytest.raises(SearchError):
            mstm_search(C, derive_anchors(C.spec, 2), Cart(2), (tr.features, tr.y),
                        (va.features[:0], va.y[:0]), SearchConfig(m=1))

    def test_reward_task_mismatch(self):
        C, tr, va = small_classification(0)
        with pytest.raises(ValueError):
            mstm_search(C, derive_anchors(C.spec, 2), Cart(2), (tr.features, tr.y), (va.features, va.y),
                        SearchConfig(m=1, reward="neg_mse"))


def check_trace(trace, k):
    prev = 0
    for rec in trace.hops:
        assert rec.sampled[0] == 0
        assert all(1 <= j <= k for j in rec.sampled[1:])
        assert rec.rewards[rec.chosen] >= rec.rewards[0]
        assert rec.rewards[rec.chosen] == max(rec.rewards.values())
        if rec.chosen:
            assert rec.chosen > prev
            prev = rec.chosen
        assert all(j > prev for j in rec.remaining)
    chosen = trace.chosen_indices
    assert all(a < b for a, b in zip(chosen, chosen[1:]))


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3), st.integers(1, 4))
@settings(max_examples=12)
def test_trace_invariants(seed, m, n):
    C, tr, va = small_classification(seed % 3, n=240)
    anchors = derive_anchors(C.spec, 4)
    _, _, trace = mstm_search(C, anchors, Cart(2), (tr.features, tr.y), (va.features, va.y),
                              SearchConfig(m=m, n=n, seed=seed))
    check_trace(trace, 4)


class TestSubmodularity:
    def test_additive_is_one(self):
        v = {0: 1.0, 1: 2.5, 2: -0.5, 3: 4.0}
        f = lambda S: sum(v[i] for i in S)
        assert submodularity_ratio(f, {0}, {1, 3}) == pytest.approx(1.0, abs=1e-15)

    def test_min_cardinality(self):
        assert submodularity_ratio(lambda S: min(len(S), 1), set(), {"a", "b"}) == 2.0

    def test_undefined_and_overlap(self):
        assert submodularity_ratio(lambda S: 1.0, {1}, {2}) is None
        with pytest.raises(ValueError):
            submodularity_ratio(len, {1}, {1, 2})
