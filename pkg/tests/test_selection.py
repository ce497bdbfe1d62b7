import numpy as np
import pytest
from scipy import stats

from msond import (
    ChannelRealization,
    InfeasibleSelectionError,
    InvalidArgumentError,
    NetworkConfig,
    draw_block,
    make_beam_configs,
    metric_stage1,
    metric_stage2,
    select_both_sets,
    select_set,
    shape_params,
    signaling_overhead_bits,
    stage1_metric_table,
    stage2_metric_table,
)
from msond.selection import sample_stage1_metrics, sample_til_metrics


def timer_replay(values, excluded, K, S):
    """Message-by-message emulation of the distributed timer protocol.

    Every (relay, slot) timer expires in ascending metric order; an expiry
    is ignored when the relay already reserved a slot or the slot is taken,
    which is exactly the effect of the protocol's timer-clearing rules.
    """
    n = values.shape[0]
    events = sorted(
        (values[r, k, s], r, k, s)
        for r in range(n)
        if r not in excluded
        for k in range(K)
        for s in range(S)
    )
    assigned = {}
    busy = set()
    for _, r, k, s in events:
        if r in busy or (k, s) in assigned:
            continue
        assigned[(k, s)] = r
        busy.add(r)
        if len(assigned) == K * S:
            break
    return assigned


class TestBeamConfigs:
    def test_shapes(self):
        cfg = NetworkConfig(K=2, N=10, M=4, S=2, snr=1.0)
        beams = make_beam_configs(cfg, np.random.default_rng(0))
        assert len(beams) == 2
        for b in beams:
            assert b.V.shape == (4, 4)
            assert b.Q.shape == (4, 2)
            assert b.U.shape == (4, 2)
            assert np.max(np.abs(b.V.conj().T @ b.V - np.eye(4))) < 1e-12

    def test_full_stream_count(self):
        cfg = NetworkConfig(K=1, N=4, M=4, S=4, snr=1.0)
        beams = make_beam_configs(cfg, np.random.default_rng(1))
        assert beams[0].Q.shape == (4, 0)
        assert np.max(np.abs(beams[0].U.conj().T @ beams[0].U - np.eye(4))) < 1e-12

    def test_deterministic_under_seed(self):
        cfg = NetworkConfig(K=2, N=10, M=4, S=1, snr=1.0)
        a = make_beam_configs(cfg, np.random.default_rng(42))
        b = make_beam_configs(cfg, np.random.default_rng(42))
        for x, y in zip(a, b):
            assert np.array_equal(x.V, y.V)
            assert np.array_equal(x.U, y.U)


class TestMetrics:
    def _instance(self, K=2, S=1, M=4, N=10, seed=0):
        cfg = NetworkConfig(K=K, N=N, M=M, S=S, snr=1.0)
        rng = np.random.default_rng(seed)
        chan = draw_block(cfg, rng)
        beams = make_beam_configs(cfg, rng)
        return cfg, chan, beams

    def test_zero_channels_give_zero(self):
        cfg, chan, beams = self._instance()
        zero = ChannelRealization(
            hop1=np.zeros_like(chan.hop1),
            hop2=np.zeros_like(chan.hop2),
            relay=np.zeros_like(chan.relay),
        )
        assert metric_stage1(zero, beams, 0, 0, 0) == 0.0
        pi1 = np.array([[1]])
        assert metric_stage2(zero, beams, pi1, 0, 0, 0) == 0.0

    def test_single_pair_single_stream_is_zero(self):
        cfg, chan, beams = self._instance(K=1, S=1, N=5)
        for n in range(5):
            assert metric_stage1(chan, beams, n, 0, 0) == 0.0

    def test_stage2_adds_nonnegative(self):
        cfg, chan, beams = self._instance(seed=3)
        pi1 = np.array([[2], [7]])
        for n in [0, 1, 3, 4]:
            m1 = metric_stage1(chan, beams, n, 0, 0)
            m2 = metric_stage2(chan, beams, pi1, n, 0, 0)
            assert m2 >= m1

    def test_stage2_rejects_members(self):
        cfg, chan, beams = self._instance()
        with pytest.raises(InvalidArgumentError):
            metric_stage2(chan, beams, np.array([[2], [7]]), 2, 0, 0)

    def test_out_of_range_index(self):
        cfg, chan, beams = self._instance()
        with pytest.raises(InvalidArgumentError):
            metric_stage1(chan, beams, 99, 0, 0)

    @pytest.mark.parametrize("K,S", [(2, 1), (3, 1), (2, 2)])
    def test_table_matches_scalar_reference(self, K, S):
        cfg, chan, beams = self._instance(K=K, S=S, N=8, seed=K * 10 + S)
        table = stage1_metric_table(chan, beams)
        for n in range(8):
            for k in range(K):
                for s in range(S):
                    assert table[n, k, s] == pytest.approx(
                        metric_stage1(chan, beams, n, k, s), abs=1e-12
                    )
        pi1 = np.arange(S * K).reshape(K, S)
        table2 = stage2_metric_table(table, chan, pi1)
        for n in range(S * K, 8):
            for k in range(K):
                for s in range(S):
                    assert table2[n, k, s] == pytest.approx(
                        metric_stage2(chan, beams, pi1, n, k, s), abs=1e-12
                    )

    def test_stage1_mean(self):
        # 2SK - S - 1 unit-mean terms: mean 2 for (K, S) = (2, 1)
        samples = sample_stage1_metrics(2, 1, 4, 100_000, np.random.default_rng(5))
        assert abs(np.mean(samples) - 2.0) < 0.05

    def test_til_mean(self):
        # 3SK - S - 1 terms: mean 4 for (K, S) = (2, 1)
        samples = sample_til_metrics(2, 1, 4, 100_000, np.random.default_rng(6))
        assert abs(np.mean(samples) - 4.0) < 0.08

    def test_sampled_distributions_match_gamma(self):
        shapes = shape_params(2, 2)
        s1 = sample_stage1_metrics(2, 2, 4, 20_000, np.random.default_rng(7))
        s2 = sample_til_metrics(2, 2, 4, 20_000, np.random.default_rng(8))
        assert stats.kstest(s1, "gamma", args=(shapes.a1,)).statistic < 0.02
        assert stats.kstest(s2, "gamma", args=(shapes.a2,)).statistic < 0.02

    def test_pipeline_metrics_match_gamma(self):
        # samples drawn through draw_block + the metric table, not the sampler
        cfg = NetworkConfig(K=2, N=50, M=4, S=1, snr=1.0)
        rng = np.random.default_rng(9)
        vals = []
        for _ in range(200):
            chan = draw_block(cfg, rng)
            beams = make_beam_configs(cfg, rng)
            vals.append(stage1_metric_table(chan, beams)[:, 0, 0])
        samples = np.concatenate(vals)
        a1 = shape_params(2, 1).a1
        assert stats.kstest(samples, "gamma", args=(a1,)).statistic < 0.02


class TestSelectSet:
    def test_hand_trace(self):
        metrics = np.array([[[0.5, 0.9]], [[0.1, 0.8]], [[0.7, 0.2]]])
        out = select_set(metrics, frozenset(), 1, 2)
        assert out[0, 0] == 1
        assert out[0, 1] == 2

    def test_pigeonhole(self):
        rng = np.random.default_rng(0)
        metrics = rng.random((4, 2, 2))
        out = select_set(metrics, frozenset(), 2, 2)
        assert sorted(out.ravel().tolist()) == [0, 1, 2, 3]

    def test_tie_break_order(self):
        metrics = np.ones((3, 1, 2))
        out = select_set(metrics, frozenset(), 1, 2)
        assert out[0, 0] == 0
        assert out[0, 1] == 1

    def test_infeasible(self):
        metrics = np.ones((3, 2, 2))
        with pytest.raises(InfeasibleSelectionError):
            select_set(metrics, frozenset(), 2, 2)
        with pytest.raises(InfeasibleSelectionError):
            select_set(np.ones((4, 2, 2)), frozenset({0}), 2, 2)

    def test_excluded_never_selected(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            metrics = rng.random((8, 2, 1))
            out = select_set(metrics, frozenset({0, 3}), 2, 1)
            assert 0 not in out
            assert 3 not in out

    def test_matches_timer_replay(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            n = int(rng.integers(4, 13))
            k = int(rng.integers(1, 3))
            s = int(rng.integers(1, 3))
            if n < k * s:
                continue
            metrics = rng.random((n, k, s))
            excluded = set()
            if n - k * s >= 1 and rng.random() < 0.5:
                excluded = {int(rng.integers(0, n))}
            if n - len(excluded) < k * s:
                continue
            got = select_set(metrics, excluded, k, s)
            want = timer_replay(metrics, excluded, k, s)
            for (kk, ss), r in want.items():
                assert got[kk, ss] == r

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            metrics = rng.random((9, 2, 1))
            perm = rng.permutation(9)
            base = select_set(metrics, frozenset(), 2, 1)
            permuted = select_set(metrics[perm], frozenset(), 2, 1)
            # relay r in the base table sits at row perm^-1(r) in the permuted one
            inv = np.argsort(perm)
            assert np.array_equal(inv[base], permuted)


class TestSelectBothSets:
    def test_no_idle_at_minimum_n(self):
        cfg = NetworkConfig(K=2, N=4, M=4, S=1, snr=1.0)
        rng = np.random.default_rng(0)
        chan = draw_block(cfg, rng)
        beams = make_beam_configs(cfg, rng)
        a = select_both_sets(chan, beams, cfg)
        assert a.idle == frozenset()

    def test_invariants_over_trials(self):
        cfg = NetworkConfig(K=2, N=12, M=4, S=2, snr=1.0)
        rng = np.random.default_rng(1)
        for _ in range(200):
            chan = draw_block(cfg, rng)
            beams = make_beam_configs(cfg, rng)
            a = select_both_sets(chan, beams, cfg)
            p1 = a.pi1.ravel().tolist()
            p2 = a.pi2.ravel().tolist()
            assert len(set(p1)) == 4
            assert len(set(p2)) == 4
            assert not set(p1) & set(p2)
            assert set(p1) | set(p2) | a.idle == set(range(12))

    def test_stepwise_minimality_of_second_set(self):
        cfg = NetworkConfig(K=2, N=15, M=4, S=1, snr=1.0)
        rng = np.random.default_rng(2)
        for _ in range(50):
            chan = draw_block(cfg, rng)
            beams = make_beam_configs(cfg, rng)
            a = select_both_sets(chan, beams, cfg)
            table1 = stage1_metric_table(chan, beams)
            table2 = stage2_metric_table(table1, chan, a.pi1)
            # replay the greedy over the TIL table and check each pick is the
            # stepwise minimum among relays still eligible for that slot
            work = table2.copy()
            work[a.pi1.ravel(), :, :] = np.inf
            for _step in range(cfg.slots):
                flat = int(np.argmin(work))
                rn, rk, rs = np.unravel_index(flat, work.shape)
                assert a.pi2[rk, rs] == rn
                assert work[rn, rk, rs] <= np.min(work[:, rk, rs])
                work[rn, :, :] = np.inf
                work[:, rk, rs] = np.inf

    def test_infeasible_when_too_few_relays(self):
        cfg = NetworkConfig(K=2, N=3, M=4, S=1, snr=1.0)
        rng = np.random.default_rng(3)
        chan = draw_block(cfg, rng)
        beams = make_beam_configs(cfg, rng)
        with pytest.raises(Exception):
            select_both_sets(chan, beams, cfg)


class TestOverheadBits:
    @pytest.mark.parametrize("k,s,expected", [(2, 1, 4), (1, 1, 0), (2, 2, 16), (3, 1, 12)])
    def test_values(self, k, s, expected):
        assert signaling_overhead_bits(k, s) == expected

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            signaling_overhead_bits(0, 1)
